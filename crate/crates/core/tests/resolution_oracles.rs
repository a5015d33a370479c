use num_bigint::BigInt;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use unclab_core::rational::{pow2, q, qi, Q};
use unclab_core::resolution::*;
use unclab_core::Caps;

fn res(k: u32, c: &[u32], a: &[Q]) -> Resolution {
    Resolution::new(Pattern::new(k, c.to_vec()).unwrap(), a.to_vec()).unwrap()
}

fn pat(k: u32, c: &[u32]) -> Pattern {
    Pattern::new(k, c.to_vec()).unwrap()
}

/// Independent oracle: every monotone matching is a choice, per position of
/// `r`, of either nothing or a strictly later position of `s`.
fn oracle_bracket(r: &Resolution, s: &Resolution) -> Q {
    fn go(r: &Resolution, s: &Resolution, u: usize, min_v: usize) -> Q {
        if u == r.len() {
            return Q::zero();
        }
        let mut best = go(r, s, u + 1, min_v);
        for v in min_v..s.len() {
            let e = r.pattern.colours[u] as i64 - s.pattern.colours[v] as i64;
            let val = pow2(e) * &r.alpha[u] + go(r, s, u + 1, v + 1);
            if val > best {
                best = val;
            }
        }
        best
    }
    go(r, s, 0, 0)
}

fn dp(r: &Resolution, s: &Resolution) -> Q {
    bracket(r, s, BracketMethod::Dp, &Caps::default()).unwrap()
}

fn brute(r: &Resolution, s: &Resolution) -> Q {
    bracket(r, s, BracketMethod::Brute, &Caps::default()).unwrap()
}

#[test]
fn bracket_frozen_values() {
    let one = res(1, &[1], &[qi(1)]);
    assert_eq!(dp(&one, &one), qi(1));
    assert_eq!(mutual_bracket(&one, &one).unwrap(), qi(1));

    let r = res(2, &[1, 2], &[q(1, 2), q(1, 2)]);
    let s = res(2, &[1, 1, 2], &[q(1, 4), q(1, 4), q(1, 2)]);
    let t = res(2, &[2, 1], &[q(1, 2), q(1, 2)]);
    for (a, b, v) in [(&r, &s, q(3, 2)), (&s, &r, qi(1)), (&r, &t, q(5, 4)), (&t, &r, q(5, 4))] {
        assert_eq!(dp(a, b), v);
        assert_eq!(brute(a, b), v);
        assert_eq!(oracle_bracket(a, b), v);
    }
    assert_eq!(mutual_bracket(&r, &s).unwrap(), q(3, 2));
    assert_eq!(mutual_bracket(&r, &t).unwrap(), q(5, 4));
}

#[test]
fn bracket_errors() {
    let a = res(1, &[1], &[qi(1)]);
    let b = res(2, &[1], &[qi(1)]);
    assert!(matches!(bracket(&a, &b, BracketMethod::Dp, &Caps::default()), Err(unclab_core::Error::Domain(_))));
    let long = res(1, &[1; 9], &vec![q(1, 9); 9]);
    assert!(matches!(bracket(&long, &a, BracketMethod::Brute, &Caps::default()), Err(unclab_core::Error::Size(_))));
}

#[test]
fn witness_is_optimal_and_lexicographically_first() {
    let r = res(2, &[1, 2], &[q(1, 2), q(1, 2)]);
    let s = res(2, &[1, 1, 2], &[q(1, 4), q(1, 4), q(1, 2)]);
    let (v, m) = bracket_witness(&r, &s).unwrap();
    assert_eq!(v, q(3, 2));
    assert_eq!(m.pairs, vec![(0, 0), (1, 1)]);
    assert!(m.is_monotone());
    assert_eq!(m.value(&r, &s), v);
}

/// All 2-colour patterns of length at most 4 with weights in {1/2, 1/4}.
fn small_family() -> Vec<Resolution> {
    let mut out = vec![];
    for len in 1..=4u32 {
        for cmask in 0..1u32 << len {
            for wmask in 0..1u32 << len {
                let c: Vec<u32> = (0..len).map(|i| 1 + (cmask >> i & 1)).collect();
                let a: Vec<Q> = (0..len).map(|i| if wmask >> i & 1 == 1 { q(1, 2) } else { q(1, 4) }).collect();
                out.push(res(2, &c, &a));
            }
        }
    }
    out
}

#[test]
fn dp_equals_brute_exhaustively() {
    let fam = small_family();
    for r in &fam {
        for s in &fam {
            let d = dp(r, s);
            assert_eq!(d, brute(r, s), "{r:?} {s:?}");
        }
    }
    // the independent oracle on a thinner slice
    for r in fam.iter().step_by(7) {
        for s in fam.iter().step_by(5) {
            assert_eq!(dp(r, s), oracle_bracket(r, s));
        }
    }
}

fn arb_resolution(k: u32, max_len: usize) -> impl Strategy<Value = Resolution> {
    prop::collection::vec((1..=k, 1i64..=8, 1i64..=8), 1..=max_len).prop_map(move |v| {
        let c: Vec<u32> = v.iter().map(|x| x.0).collect();
        let a: Vec<Q> = v.iter().map(|x| q(x.1, x.2)).collect();
        res(k, &c, &a)
    })
}

/// A random member of the class `w`: colour blocks in random order, each
/// weight split into random positive parts.
fn arb_class_member(w: Vec<Q>) -> impl Strategy<Value = Resolution> {
    let k = w.len() as u32;
    let live: Vec<u32> = (1..=k).filter(|&j| w[j as usize - 1] > Q::zero()).collect();
    let n = live.len();
    (
        Just(live).prop_shuffle(),
        prop::collection::vec(prop::collection::vec(1i64..=5, 1..=3), n),
    )
        .prop_map(move |(order, parts)| {
            let mut c = vec![];
            let mut a = vec![];
            for (col, p) in order.iter().zip(parts) {
                let tot: i64 = p.iter().sum();
                for x in p {
                    c.push(*col);
                    a.push(&w[*col as usize - 1] * q(x, tot));
                }
            }
            res(k, &c, &a)
        })
}

fn arb_class() -> impl Strategy<Value = Vec<Q>> {
    prop::collection::vec(0i64..=4, 2..=4)
        .prop_filter("non-zero", |v| v.iter().sum::<i64>() > 0)
        .prop_map(|v| {
            let tot: i64 = v.iter().sum();
            v.iter().map(|&x| q(x, tot)).collect()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn dp_equals_brute_random(r in arb_resolution(3, 6), s in arb_resolution(3, 6)) {
        prop_assert_eq!(dp(&r, &s), brute(&r, &s));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn class_bounds((w, r, s) in arb_class().prop_flat_map(|w| (Just(w.clone()), arb_class_member(w.clone()), arb_class_member(w)))) {
        let class = WeightClass::new(w.len() as u32, w.clone()).unwrap();
        prop_assert!(class.contains(&r) && class.contains(&s));
        prop_assert!(dp(&r, &s) <= class.bracket_ceiling());
        prop_assert!(mutual_bracket(&r, &s).unwrap() >= class.max_weight());
    }

    #[test]
    fn embedding_and_self_pairing(r in arb_resolution(3, 6), extra in prop::collection::vec((1u32..=3, 1i64..=4), 0..4), seed in 0u64..1000) {
        prop_assert!(dp(&r, &r) >= r.total_weight());
        // insert extra positions to get a pattern containing r's pattern
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut c = r.pattern.colours.clone();
        let mut a = r.alpha.clone();
        for (col, w) in extra {
            let at = rng.gen_range(0..=c.len());
            c.insert(at, col);
            a.insert(at, q(w, 3));
        }
        let s = res(3, &c, &a);
        prop_assert!(pattern_embeds(&r.pattern, &s.pattern).unwrap());
        prop_assert!(dp(&r, &s) >= r.total_weight());
    }

    #[test]
    fn repeat_preserves_weights(r in arb_resolution(3, 5), m in 1usize..6) {
        let rr = repeat_resolution(&r, m).unwrap();
        prop_assert_eq!(rr.weights(), r.weights());
        prop_assert_eq!(rr.len(), r.len() * m);
    }
}

#[test]
fn chain_examples() {
    let ps = vec![pat(2, &[1]), pat(2, &[1, 2]), pat(2, &[1, 1, 2])];
    assert_eq!(longest_chain(&ps).unwrap(), vec![0, 1, 2]);
    assert_eq!(longest_chain(&[pat(2, &[1, 2]), pat(2, &[2, 1])]).unwrap(), vec![0]);
    assert!(longest_chain(&[]).unwrap().is_empty());
}

/// Brute force over all subsets: the best chain is the subset, sorted by
/// (length, index), whose consecutive members embed.
fn oracle_chain(ps: &[Pattern]) -> Vec<usize> {
    let n = ps.len();
    let mut best: Vec<usize> = vec![];
    for mask in 1u32..1 << n {
        let mut idx: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        idx.sort_by_key(|&i| (ps[i].len(), i));
        if idx.windows(2).all(|w| pattern_embeds(&ps[w[0]], &ps[w[1]]).unwrap())
            && (idx.len() > best.len() || (idx.len() == best.len() && idx < best)) {
                best = idx;
            }
    }
    best
}

#[test]
fn chain_matches_subset_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..40 {
        let ps: Vec<Pattern> = (0..10)
            .map(|_| {
                let len = rng.gen_range(1..=4);
                pat(2, &(0..len).map(|_| rng.gen_range(1..=2)).collect::<Vec<_>>())
            })
            .collect();
        let got = longest_chain(&ps).unwrap();
        assert_eq!(got, oracle_chain(&ps), "{ps:?}");
        assert!(got.windows(2).all(|w| pattern_embeds(&ps[w[0]], &ps[w[1]]).unwrap()));
    }
}

fn big(xs: &[i64]) -> Vec<BigInt> {
    xs.iter().map(|&x| BigInt::from(x)).collect()
}

fn params(ns: &[i64], n: u64, l: u32, m: u32) -> RademacherParams {
    RademacherParams { k0: 2, ns: big(ns), n, l, m }
}

#[test]
fn rademacher_examples() {
    let caps = Caps::default();
    let r1 = build_rademacher(&params(&[1, 2], 1, 1, 2), &caps).unwrap();
    assert_eq!(r1.pattern.colours, vec![2, 4, 4]);
    assert_eq!(r1.alpha, vec![q(1, 2), q(1, 4), q(1, 4)]);
    let r2 = build_rademacher(&params(&[1, 2], 1, 2, 2), &caps).unwrap();
    assert_eq!(r2.pattern.colours, vec![2, 4, 4, 2, 4, 4]);
    assert_eq!(r2.alpha, vec![q(1, 4), q(1, 8), q(1, 8), q(1, 4), q(1, 8), q(1, 8)]);
    for r in [&r1, &r2] {
        assert_eq!(r.weights(), vec![qi(0), q(1, 2), qi(0), q(1, 2)]);
    }
    assert!(build_rademacher(&params(&[1, 2], 1, 0, 2), &caps).is_err());
}

#[test]
fn rademacher_weights_general() {
    let caps = Caps::default();
    for (k0, ns) in [(2u32, big(&[1, 17])), (3, big(&[1, 2, 5])), (3, choose_multiplicities(3).unwrap()[..2].iter().cloned().chain([BigInt::from(600)]).collect())] {
        let p = RademacherParams { k0, ns, n: 2, l: 2, m: 2 };
        let r = build_rademacher(&p, &caps).unwrap();
        for (j, w) in r.weights().iter().enumerate() {
            let want = if (j as u32 + 1).is_multiple_of(k0) { Q::new(BigInt::one(), BigInt::from(k0)) } else { Q::zero() };
            assert_eq!(*w, want);
        }
    }
}

/// Smallest `n` above `lo` with `f(n)` true, for monotone `f`.
fn least(lo: i64, f: impl Fn(i64) -> bool) -> i64 {
    let mut hi = lo.max(1);
    while !f(hi) {
        hi *= 2;
    }
    let mut lo = lo;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if f(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

#[test]
fn multiplicity_oracle() {
    assert_eq!(choose_multiplicities(2).unwrap(), big(&[1, 17]));
    assert!(q(1, 17) < q(1, 16));
    // independent search for the k0 = 3 greedy
    let b = pow2(-9);
    let n2 = least(1, |n| q(1, n) < b);
    let n3 = least(n2, |n| q(1, n2) + q(1 + n2, n) < b);
    assert_eq!((n2, n3), (513, 135_005_185));
    let ns = choose_multiplicities(3).unwrap();
    assert_eq!(ns, big(&[1, n2, n3]));
    assert!(ris_sum(&ns) < pow2(-9));
    assert!(RademacherParams { k0: 3, ns, n: 1, l: 1, m: 1 }.ris_satisfied());
}

#[test]
fn rademacher_bounds() {
    let p = params(&[1, 17], 1, 1, 3);
    for l in 1..=3 {
        assert_eq!(rademacher_bound(&p, l, l).unwrap(), qi(2));
    }
    // 1/4 + (1/2)·4·(1/17) + 3/2
    let off = q(1, 4) + q(1, 2) * qi(4) * q(1, 17) + q(3, 2);
    assert_eq!(off, q(127, 68));
    assert_eq!(rademacher_bound(&p, 1, 2).unwrap(), q(127, 68));
    assert!(q(127, 68) <= q(5, 2));
    assert!(rademacher_bound(&p, 0, 1).is_err());
    assert!(rademacher_bound(&p, 1, 4).is_err());
}

#[test]
fn rademacher_family_brackets_within_bounds() {
    let caps = Caps::default();
    let p = params(&[1, 17], 1, 1, 3);
    let fam = rademacher_family(2, &p.ns, 1, 3, &caps).unwrap();
    assert_eq!(fam.len(), 3);
    for r in &fam {
        assert_eq!(r.len(), 72);
    }
    for (i, r) in fam.iter().enumerate() {
        for (j, s) in fam.iter().enumerate() {
            let b = mutual_bracket(r, s).unwrap();
            let bound = rademacher_bound(&p, i as u32 + 1, j as u32 + 1).unwrap();
            assert!(b <= bound, "levels {} {}: {b} > {bound}", i + 1, j + 1);
            if i != j {
                assert!(b <= q(5, 2));
                // also within the tighter value that drops the middle term
                assert!(b <= q(119, 68));
            }
        }
    }
    assert!(pairwise_orthogonal(&fam, &q(5, 2)).unwrap());
}

#[test]
fn explorer() {
    let class = WeightClass::new(2, vec![q(1, 2), q(1, 2)]).unwrap();
    let fam = explore_orthogonal_family(&class, &q(1, 2), 5, 3).unwrap();
    assert!(fam.len() <= 1);
    let eta = q(3, 2);
    let a = explore_orthogonal_family(&class, &eta, 6, 11).unwrap();
    let b = explore_orthogonal_family(&class, &eta, 6, 11).unwrap();
    assert_eq!(a, b);
    assert!(!a.is_empty() && a.len() <= 6);
    assert!(a.iter().all(|r| class.contains(r)));
    assert!(pairwise_orthogonal(&a, &eta).unwrap());
}
