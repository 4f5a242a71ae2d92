use num_rational::BigRational;
use proptest::prelude::*;
use ultradiff_core::bounds::{lemma4_construct, rai_constant};
use ultradiff_core::fdb::{m_circ_bruteforce, m_circ_table};
use ultradiff_core::jet::{reciprocal_via_ode, Jet};
use ultradiff_core::numeric::{ln_factorial, rational};
use ultradiff_core::seq::{compare_inclusion, Relation};
use ultradiff_core::weight_fn::PiecewiseLinear;
use ultradiff_core::{CheckConfig, Status, WeightSequence};

/// `ln(k! M_k)` with nondecreasing increments, so the sequence is weakly
/// log-convex.
fn log_convex_terms(incs: &[f64]) -> Vec<f64> {
    let mut sorted = incs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut out = vec![0.0];
    let mut acc = 0.0;
    for (i, d) in sorted.iter().enumerate() {
        acc += d;
        out.push(acc - ln_factorial(i as u128 + 1));
    }
    out
}

fn small_rational() -> impl Strategy<Value = BigRational> {
    (-6i64..=6, 1i64..=4).prop_map(|(n, d)| rational(n, d))
}

fn rational_jet(n: usize) -> impl Strategy<Value = Jet<BigRational>> {
    proptest::collection::vec(small_rational(), n + 1).prop_map(|c| Jet::new(c).unwrap())
}

fn centered_jet(n: usize) -> impl Strategy<Value = Jet<BigRational>> {
    rational_jet(n).prop_map(|j| {
        let mut c = j.coefficients().to_vec();
        c[0] = rational(0, 1);
        Jet::new(c).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn dp_matches_enumeration(incs in proptest::collection::vec(0.0f64..3.0, 10)) {
        let terms = log_convex_terms(&incs);
        let table = m_circ_table(&terms, 10).unwrap();
        for k in 0..=10 {
            let b = m_circ_bruteforce(&terms, k).unwrap();
            prop_assert!((table.m_circ[k] - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn m_circ_dominates_single_composition(incs in proptest::collection::vec(0.0f64..3.0, 40)) {
        let terms = log_convex_terms(&incs);
        let table = m_circ_table(&terms, 40).unwrap();
        for k in 1..=40 {
            prop_assert!(table.m_circ[k] >= terms[k] + terms[1] - 1e-12);
        }
    }

    #[test]
    fn ring_laws(a in rational_jet(8), b in rational_jet(8), c in rational_jet(8)) {
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
    }

    #[test]
    fn composition_associative(f in rational_jet(7), g in centered_jet(7), h in centered_jet(7)) {
        let left = f.compose(&g).unwrap().compose(&h).unwrap();
        let right = f.compose(&g.compose(&h).unwrap()).unwrap();
        prop_assert_eq!(left, right);
        prop_assert_eq!(f.compose(&g).unwrap(), f.compose_fdb(&g).unwrap());
    }

    #[test]
    fn inverse_roundtrip(g in centered_jet(12), lead in 1i64..=5) {
        let mut c = g.coefficients().to_vec();
        c[1] = rational(lead, 1);
        let f = Jet::new(c).unwrap();
        let inv = f.functional_inverse().unwrap();
        prop_assert_eq!(f.compose(&inv).unwrap(), Jet::identity(12));
        prop_assert_eq!(inv.compose(&f).unwrap(), Jet::identity(12));
    }

    #[test]
    fn reciprocal_routes_agree(j in rational_jet(12), c0 in 1i64..=5) {
        let mut c = j.coefficients().to_vec();
        c[0] = rational(c0, 2);
        let f = Jet::new(c).unwrap();
        let r = f.reciprocal().unwrap();
        prop_assert_eq!(f.mul(&r), Jet::constant(rational(1, 1), 12));
        prop_assert_eq!(reciprocal_via_ode(&f).unwrap(), r);
    }

    #[test]
    fn biconjugate_recovers_convex_function(
        slopes in proptest::collection::vec(0i64..30, 2..10),
        widths in proptest::collection::vec(1i64..6, 10),
    ) {
        let mut slopes = slopes;
        slopes.sort();
        let mut knots = vec![(rational(0, 1), rational(0, 1))];
        for (i, s) in slopes.iter().enumerate() {
            let (t, y) = knots.last().unwrap().clone();
            let w = rational(widths[i], 2);
            knots.push((t + w.clone(), y + w * rational(*s, 3)));
        }
        let phi = PiecewiseLinear::new(knots.clone(), rational(slopes.last().unwrap() + 1, 3)).unwrap();
        let conj = phi.conjugate().unwrap();
        for (t, y) in &knots {
            prop_assert_eq!(&conj.biconjugate(t), y);
        }
    }

    #[test]
    fn regularization_inequalities(
        s1 in 1.0f64..3.0, d2 in 0.0f64..1.0, d3 in 0.0f64..1.0,
        c in 0.5f64..5.0, zeros in proptest::collection::vec(1usize..256, 0..6),
    ) {
        let k = 256;
        let (s2, s3) = (s1 + d2, s1 + d2 + d3);
        let m1 = WeightSequence::gevrey(s1, k).unwrap();
        let m2 = WeightSequence::gevrey(s2, k).unwrap();
        let m3 = WeightSequence::gevrey(s3, k).unwrap();
        let mut l: Vec<f64> = (0..=k).map(|i| i as f64 * c.ln()).collect();
        for z in zeros {
            l[z] = f64::NEG_INFINITY;
        }
        let h1 = rai_constant(&m1, &m2, k, false).exp();
        let out = lemma4_construct(&l, &m1, &m2, &m3, h1, &CheckConfig::default().with_truncation(k)).unwrap();
        prop_assert!(out.l_le_n1 && out.n1_le_n2 && out.comparison_holds);
        prop_assert!(out.comparison_excess <= 1e-12);
    }

    #[test]
    fn monotone_roots_have_no_defect(incs in proptest::collection::vec(0.0f64..2.0, 64)) {
        // convex ln M_k with M_0 = 1 has nondecreasing roots
        let mut sorted = incs;
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut terms = vec![0.0];
        for d in &sorted {
            terms.push(terms.last().unwrap() + d);
        }
        let w = WeightSequence::from_log_terms("convex", terms, false).unwrap();
        prop_assert_eq!(rai_constant(&w, &w, 64, false), 0.0);
    }

    #[test]
    fn inclusion_is_reflexive(s in 0.0f64..3.0) {
        let w = WeightSequence::gevrey(s, 256).unwrap();
        let v = compare_inclusion(&w, &w, Relation::Preceq, &CheckConfig::default().with_truncation(256)).unwrap();
        prop_assert_eq!(v.status, Status::HoldsUpTo);
    }
}
