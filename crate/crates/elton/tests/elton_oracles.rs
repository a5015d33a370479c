use num_traits::Zero;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use unclab_core::norm::{eval_norm, NormInstance, ProjectionClass, SparseVector};
use unclab_core::rational::{q, qi, Q};
use unclab_core::Caps;
use unclab_elton::certificate::{default_alpha_window, k_lower_certificate, parameter_ladder, quasi_certificate};
use unclab_elton::layout::{build_layout, build_vectors, miniature_layouts, EltonLayout, Family, Variant};
use unclab_elton::maximize::{brute_miniature, elton_norm, max_over_functionals, reverify, structured_dp, MaxMethod};
use unclab_elton::params::{case_bounds, EltonParams};
use unclab_elton::runvec::RunVector;

fn caps() -> Caps {
    Caps::default()
}

fn layout(n1: u64, n2: u64, k: u32) -> EltonLayout {
    build_layout(&EltonParams::new(n1, n2, k, q(1, 2)), 1, 2, &caps()).unwrap()
}

fn random_vector(rng: &mut ChaCha8Rng, universe: u64) -> RunVector {
    let vals: Vec<Q> = (0..universe).map(|_| q(rng.gen_range(-4..=4), rng.gen_range(1..=4))).collect();
    RunVector::from_dense(&vals)
}

fn test_vectors(l: &EltonLayout, rng: &mut ChaCha8Rng, random: usize) -> Vec<RunVector> {
    let s = build_vectors(l, &Variant::Standard).unwrap();
    let y = build_vectors(l, &Variant::Quasi { alpha: q(2, 3) }).unwrap();
    let mut out = vec![s.x, s.x_plus, y.x, y.x_plus];
    out.extend((0..random).map(|_| random_vector(rng, l.universe)));
    out
}

fn assert_agree(l: &EltonLayout, v: &RunVector) {
    let dp = structured_dp(&l.family, v).unwrap();
    let bf = brute_miniature(&l.family, v, &caps()).unwrap();
    assert_eq!(dp.value, bf.value, "layout {l:?} vector {:?}", v.to_dense());
    assert_eq!(reverify(&l.family, v, &dp.witness).unwrap(), dp.value);
    assert_eq!(reverify(&l.family, v, &bf.witness).unwrap(), bf.value);
}

/// Every `L ⊂ {1..u}` with at least two elements as an explicit functional.
fn explicit_instance(f: &Family, u: u64) -> NormInstance {
    let mut fs = vec![];
    for mask in 0u32..1 << u {
        let l: Vec<u64> = (1..=u).filter(|i| mask >> (i - 1) & 1 == 1).collect();
        if l.len() < 2 {
            continue;
        }
        let (l1, l2) = (l[0], l[1]);
        let (a, b) = f.block_sizes(l1, l2);
        let (w1, w2) = f.weights(l2);
        let pat = f.pattern_len(l2);
        let mut g = SparseVector::new();
        g.set(l1 as usize, q(1, 2));
        g.set(l2 as usize, qi(1));
        for (s, &p) in l[2..].iter().enumerate() {
            let s = num_bigint::BigInt::from(s);
            if s >= pat {
                break;
            }
            let w = if &s % (&a + &b) < a { &w1 } else { &w2 };
            g.set(p as usize, w.clone());
        }
        fs.push(g);
    }
    // L with one element inside the universe
    for i in 1..=u {
        fs.push(SparseVector::from_pairs([(i as usize, q(1, 2))]));
    }
    NormInstance::new(u as usize, fs, ProjectionClass::InitialSegments, true).unwrap()
}

#[test]
fn layout_and_vector_examples() {
    let l = layout(1, 8, 4);
    assert_eq!((l.n_m, l.block_i, l.block_j, l.pairs), (1152, 16, 128, 8));
    assert_eq!((l.e1_size(), l.e2_size()), (128, 1024));
    l.check_identities().unwrap();
    let v = build_vectors(&l, &Variant::Standard).unwrap();
    assert_eq!(v.x_star_on_plus, q(5, 4));
    assert_eq!(v.x_star_on_x, qi(1));
}

#[test]
fn full_layout_norms() {
    let l = layout(1, 8, 4);
    let v = build_vectors(&l, &Variant::Standard).unwrap();
    let nx = max_over_functionals(&l, &v.x, MaxMethod::StructuredDp, &caps()).unwrap();
    assert!(nx.value >= qi(1) && nx.value <= q(9, 8));
    let np = max_over_functionals(&l, &v.x_plus, MaxMethod::StructuredDp, &caps()).unwrap();
    assert!(np.value >= q(5, 4));
    assert_eq!((np.witness.l1, np.witness.l2), (Some(1), Some(2)));
    assert!(max_over_functionals(&l, &v.x, MaxMethod::BruteMiniature, &caps()).is_err());
}

#[test]
fn dp_matches_brute_on_all_small_layouts() {
    let ls = miniature_layouts(12);
    let shapes: Vec<(u64, u64, u32)> = ls.iter().map(|l| (l.family.n1, l.family.n2, l.family.k)).collect();
    for s in [(1, 2, 1), (1, 3, 1), (1, 4, 1), (2, 3, 1)] {
        assert!(shapes.contains(&s));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for l in &ls {
        for v in test_vectors(l, &mut rng, 4) {
            assert_agree(l, &v);
        }
    }
}

#[test]
fn dp_matches_brute_on_sampled_layouts() {
    let ls: Vec<EltonLayout> = miniature_layouts(16).into_iter().filter(|l| l.universe > 12).collect();
    assert!(!ls.is_empty());
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let l = &ls[rng.gen_range(0..ls.len())];
        let v = random_vector(&mut rng, l.universe);
        assert_agree(l, &v);
    }
}

#[test]
fn norm_matches_explicit_functionals() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for l in miniature_layouts(10) {
        let inst = explicit_instance(&l.family, l.universe);
        for v in test_vectors(&l, &mut rng, 3) {
            let n = elton_norm(&l.family, &v, MaxMethod::StructuredDp, &caps()).unwrap();
            assert_eq!(n.value, eval_norm(&inst, &v.to_sparse(64).unwrap()).unwrap());
        }
    }
}

#[test]
fn certificates() {
    let c = k_lower_certificate(&EltonParams::new(1, 8, 4, q(13, 100)), 1, 2, &caps()).unwrap();
    assert!(c.norm_plus.value >= q(5, 4));
    assert!(c.norm_x.value <= q(9, 8));
    assert!(c.ratio >= q(10, 9));
    assert!(c.reverified && c.within_case_bound);
    let c = k_lower_certificate(&EltonParams::new(1, 64, 8, q(1, 50)), 1, 2, &caps()).unwrap();
    assert!(c.ratio >= q(320, 259));
    assert!(c.reverified && c.within_case_bound);
    assert!(k_lower_certificate(&EltonParams::new(1, 1, 1, q(1, 2)), 1, 2, &caps()).is_err());
}

#[test]
fn ladder_is_monotone_and_bounded() {
    let mut last = Q::zero();
    for p in parameter_ladder() {
        let c = k_lower_certificate(&p, 1, 2, &caps()).unwrap();
        assert!(c.ratio >= last, "{p:?}");
        assert!(c.norm_x.value <= case_bounds(&p).unwrap().max);
        assert!(c.ratio <= q(5, 4));
        last = c.ratio;
    }
}

#[test]
fn quasi_variant() {
    let p = EltonParams::new(1, 64, 8, q(1, 50));
    let w = default_alpha_window();
    let c = quasi_certificate(&p, &q(2, 3), 1, 2, &w, &caps()).unwrap();
    assert!(c.exceeds_target && c.reverified);
    assert_eq!(c.eps, q(3, 256));
    assert!(!c.threshold_identity);
    let c = quasi_certificate(&p, &(q(2, 3) - q(1, 1000)), 1, 2, &w, &caps()).unwrap();
    assert!(c.threshold_identity && c.exceeds_target);
    let c = quasi_certificate(&p, &qi(1), 1, 2, &w, &caps()).unwrap();
    let bound = qi(1) + case_bounds(&p).unwrap().max;
    assert!(c.ratio <= bound);
    assert!(quasi_certificate(&p, &q(1, 10), 1, 2, &w, &caps()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]
    #[test]
    fn dp_matches_brute_on_random_vectors(
        shape in prop::sample::select(vec![(1u64, 2u64, 1u32), (1, 3, 1), (2, 3, 1), (1, 4, 2)]),
        vals in prop::collection::vec(-3i64..=3, 3..=11),
    ) {
        let v = RunVector::from_dense(&vals.iter().map(|&x| q(x, 2)).collect::<Vec<_>>());
        let f = Family { n1: shape.0, n2: shape.1, k: shape.2 };
        let a = structured_dp(&f, &v).unwrap();
        let b = brute_miniature(&f, &v, &caps()).unwrap();
        prop_assert_eq!(&a.value, &b.value);
        prop_assert_eq!(reverify(&f, &v, &a.witness).unwrap(), a.value);
    }
}
