use num_traits::{Signed, Zero};
use proptest::prelude::*;
use unclab_core::norm::*;
use unclab_core::rational::{q, qi, Q};

fn dense(xs: &[i64]) -> SparseVector {
    SparseVector::from_dense(&xs.iter().map(|&x| qi(x)).collect::<Vec<_>>())
}

#[test]
fn examples() {
    let linf = build_standard(StandardNorm::Linf, 3).unwrap();
    assert_eq!(eval_norm(&linf, &dense(&[1, -2, 3])).unwrap(), qi(3));
    let summing = build_standard(StandardNorm::Summing, 4).unwrap();
    assert_eq!(eval_norm(&summing, &dense(&[1, -1, 1, -1])).unwrap(), qi(1));
    assert_eq!(eval_norm(&build_standard(StandardNorm::L1, 2).unwrap(), &dense(&[1, -1])).unwrap(), qi(2));
    assert_eq!(eval_norm(&build_standard(StandardNorm::Summing, 2).unwrap(), &dense(&[1, -1])).unwrap(), qi(1));
    assert_eq!(projected(&dense(&[1, -2, 3]), &ProjSet::Subset { indices: vec![1, 3] }), dense(&[1, 0, 3]));
    assert!(projected(&dense(&[1, -2, 3]), &ProjSet::Subset { indices: vec![] }).is_zero());
    assert_eq!(projected(&dense(&[1, -2, 3]), &ProjSet::Interval { start: 1, end: 3 }), dense(&[1, -2, 3]));
}

#[test]
fn pointcloud_identity_is_linf() {
    let id: Vec<Vec<Q>> = (0..3).map(|t| (0..3).map(|i| qi((i == t) as i64)).collect()).collect();
    let pc = build_pointcloud(&id).unwrap();
    let linf = build_standard(StandardNorm::Linf, 3).unwrap();
    for a in [dense(&[1, -5, 2]), dense(&[0, 0, -1]), dense(&[3, 3, 3])] {
        assert_eq!(eval_norm(&pc, &a).unwrap(), eval_norm(&linf, &a).unwrap());
    }
    assert!(build_pointcloud(&[vec![qi(1)], vec![qi(1), qi(2)]]).is_err());
}

#[test]
fn json_round_trip() {
    let inst = build_standard(StandardNorm::Summing, 2).unwrap();
    let s = serde_json::to_string(&inst).unwrap();
    assert!(s.contains("\"projection_class\":\"initial\""));
    let back: NormInstance = serde_json::from_str(&s).unwrap();
    assert_eq!(back, inst);
    let raw = r#"{"dim":2,"projection_class":"interval","include_sup":true,"functionals":[[{"i":1,"v":"1/2"},{"i":2,"v":"1/1"}]]}"#;
    let inst: NormInstance = serde_json::from_str(raw).unwrap();
    assert_eq!(inst.functionals.len(), 2);
    let bad = r#"{"dim":1,"projection_class":"interval","include_sup":true,"functionals":[[{"i":2,"v":"1/2"}]]}"#;
    assert!(serde_json::from_str::<NormInstance>(bad).is_err());
}

/// Oracle: enumerate every projection set of the class explicitly.
fn oracle_norm(inst: &NormInstance, a: &SparseVector) -> Q {
    let n = inst.dim;
    let sets: Vec<Vec<usize>> = match inst.projection_class {
        ProjectionClass::InitialSegments => (0..=n).map(|t| (1..=t).collect()).collect(),
        ProjectionClass::Intervals => {
            let mut v = vec![vec![]];
            for s in 1..=n {
                for t in s..=n {
                    v.push((s..=t).collect());
                }
            }
            v
        }
        ProjectionClass::AllSubsets => (0..1u32 << n).map(|m| (1..=n).filter(|i| m >> (i - 1) & 1 == 1).collect()).collect(),
    };
    let mut best = if inst.include_sup { a.sup() } else { Q::zero() };
    for f in &inst.functionals {
        for e in &sets {
            let v = f.dot(&a.restrict(e));
            if v > best {
                best = v;
            }
        }
    }
    best
}

fn arb_rat() -> impl Strategy<Value = Q> {
    (-6i64..=6, 1i64..=4).prop_map(|(n, d)| q(n, d))
}

fn arb_vec(n: usize) -> impl Strategy<Value = SparseVector> {
    prop::collection::vec(arb_rat(), n).prop_map(|v| SparseVector::from_dense(&v))
}

fn arb_instance() -> impl Strategy<Value = NormInstance> {
    (2usize..=5, 0usize..=4, 0u8..3).prop_flat_map(|(n, m, c)| {
        prop::collection::vec(arb_vec(n), m).prop_map(move |fs| {
            let class = [ProjectionClass::InitialSegments, ProjectionClass::Intervals, ProjectionClass::AllSubsets][c as usize];
            NormInstance::new(n, fs, class, true).unwrap()
        })
    })
}

fn arb_pair() -> impl Strategy<Value = (NormInstance, SparseVector, SparseVector, Q)> {
    arb_instance().prop_flat_map(|inst| {
        let n = inst.dim;
        (Just(inst), arb_vec(n), arb_vec(n), arb_rat())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn certificate_attains_norm((inst, a, _b, _l) in arb_pair()) {
        let v = eval_norm(&inst, &a).unwrap();
        prop_assert_eq!(&v, &oracle_norm(&inst, &a));
        let c = dual_certificate(&inst, &a).unwrap();
        prop_assert_eq!(c.value(), v.clone());
        prop_assert_eq!(c.recompute(&a), v);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn norm_axioms((inst, a, b, l) in arb_pair()) {
        let na = eval_norm(&inst, &a).unwrap();
        let nb = eval_norm(&inst, &b).unwrap();
        let sum = SparseVector::from_pairs((1..=inst.dim).map(|i| (i, a.get(i) + b.get(i))));
        prop_assert!(eval_norm(&inst, &sum).unwrap() <= &na + &nb);
        let scaled = SparseVector::from_pairs(a.iter().map(|(i, x)| (i, x * &l)));
        prop_assert_eq!(eval_norm(&inst, &scaled).unwrap(), l.abs() * &na);
        prop_assert_eq!(na.is_zero(), a.is_zero());
    }

    #[test]
    fn initial_segment_contraction((inst, a, _b, _l) in arb_pair()) {
        let inst = NormInstance::new(inst.dim, inst.functionals, ProjectionClass::InitialSegments, true).unwrap();
        let full = eval_norm(&inst, &a).unwrap();
        for t in 0..=inst.dim {
            let p = projected(&a, &ProjSet::Interval { start: 1, end: t });
            prop_assert!(eval_norm(&inst, &p).unwrap() <= full);
        }
    }
}
