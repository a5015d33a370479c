//! Patterns, resolutions and the bracket.

use crate::caps::Caps;
use crate::error::{domain, size, Error, Result};
use crate::rational::{pow2, qb, qi, Q};
use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawPattern")]
pub struct Pattern {
    pub k: u32,
    pub colours: Vec<u32>,
}

#[derive(Deserialize)]
struct RawPattern {
    k: u32,
    colours: Vec<u32>,
}

impl TryFrom<RawPattern> for Pattern {
    type Error = Error;
    fn try_from(r: RawPattern) -> Result<Pattern> {
        Pattern::new(r.k, r.colours)
    }
}

impl Pattern {
    pub fn new(k: u32, colours: Vec<u32>) -> Result<Pattern> {
        if k == 0 {
            return domain("pattern needs k >= 1");
        }
        if colours.is_empty() {
            return domain("pattern must be non-empty");
        }
        if let Some(c) = colours.iter().find(|&&c| c == 0 || c > k) {
            return domain(format!("colour {c} outside 1..{k}"));
        }
        Ok(Pattern { k, colours })
    }

    pub fn len(&self) -> usize {
        self.colours.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colours.is_empty()
    }
}

/// `c ⊂ d`: `c` is a colour-preserving subsequence of `d`.
pub fn pattern_embeds(c: &Pattern, d: &Pattern) -> Result<bool> {
    if c.k != d.k {
        return domain(format!("mismatched k: {} vs {}", c.k, d.k));
    }
    let mut it = d.colours.iter();
    Ok(c.colours.iter().all(|x| it.any(|y| y == x)))
}

/// Longest chain in the embedding order, ties broken by the
/// lexicographically smallest index sequence.
pub fn longest_chain(ps: &[Pattern]) -> Result<Vec<usize>> {
    if ps.is_empty() {
        return Ok(vec![]);
    }
    let k = ps[0].k;
    if ps.iter().any(|p| p.k != k) {
        return domain("patterns must share k");
    }
    let n = ps.len();
    // i -> j when p_i ⊂ p_j, with equal patterns ordered by index
    let mut succ = vec![vec![]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j && pattern_embeds(&ps[i], &ps[j])? && (ps[i] != ps[j] || i < j) {
                succ[i].push(j);
            }
        }
    }
    // an edge strictly increases (length, index), so process in decreasing order
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| std::cmp::Reverse((ps[i].len(), i)));
    let mut best = vec![1usize; n];
    let mut next = vec![None; n];
    for &i in &order {
        for &j in &succ[i] {
            if best[j] + 1 > best[i] || (best[j] + 1 == best[i] && Some(j) < next[i]) {
                best[i] = best[j] + 1;
                next[i] = Some(j);
            }
        }
    }
    let top = *best.iter().max().unwrap();
    let mut cur = (0..n).find(|&i| best[i] == top);
    let mut chain = vec![];
    while let Some(i) = cur {
        chain.push(i);
        cur = next[i];
    }
    Ok(chain)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawResolution", into = "RawResolution")]
pub struct Resolution {
    pub pattern: Pattern,
    pub alpha: Vec<Q>,
}

#[derive(Serialize, Deserialize)]
struct RawResolution {
    k: u32,
    pattern: Vec<u32>,
    #[serde(with = "crate::rational::qvec")]
    alpha: Vec<Q>,
}

impl TryFrom<RawResolution> for Resolution {
    type Error = Error;
    fn try_from(r: RawResolution) -> Result<Resolution> {
        Resolution::new(Pattern::new(r.k, r.pattern)?, r.alpha)
    }
}

impl From<Resolution> for RawResolution {
    fn from(r: Resolution) -> RawResolution {
        RawResolution { k: r.pattern.k, pattern: r.pattern.colours, alpha: r.alpha }
    }
}

impl Resolution {
    pub fn new(pattern: Pattern, alpha: Vec<Q>) -> Result<Resolution> {
        if alpha.len() != pattern.len() {
            return domain("alpha and pattern lengths differ");
        }
        if alpha.iter().any(|a| *a <= Q::zero()) {
            return domain("alpha entries must be positive");
        }
        Ok(Resolution { pattern, alpha })
    }

    pub fn k(&self) -> u32 {
        self.pattern.k
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    /// `w_j` for `j = 1..k`, stored at index `j - 1`.
    pub fn weights(&self) -> Vec<Q> {
        let mut w = vec![Q::zero(); self.k() as usize];
        for (c, a) in self.pattern.colours.iter().zip(&self.alpha) {
            w[*c as usize - 1] += a;
        }
        w
    }

    pub fn total_weight(&self) -> Q {
        self.alpha.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BracketMethod {
    Dp,
    Brute,
}

/// Pairs `(u, v)` of 0-based positions, strictly increasing in both.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MonotoneMatching {
    pub pairs: Vec<(usize, usize)>,
}

impl MonotoneMatching {
    pub fn is_monotone(&self) -> bool {
        self.pairs.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 < w[1].1)
    }

    pub fn value(&self, r: &Resolution, s: &Resolution) -> Q {
        self.pairs.iter().map(|&(u, v)| gain(r, s, u, v)).sum()
    }
}

fn gain(r: &Resolution, s: &Resolution, u: usize, v: usize) -> Q {
    let e = r.pattern.colours[u] as i64 - s.pattern.colours[v] as i64;
    pow2(e) * &r.alpha[u]
}

fn same_k(r: &Resolution, s: &Resolution) -> Result<()> {
    if r.k() != s.k() {
        return domain(format!("mismatched k: {} vs {}", r.k(), s.k()));
    }
    Ok(())
}

/// Suffix table: `t[u][v]` is the best value using positions `>= u` of `r`
/// and `>= v` of `s`.
fn suffix_table(r: &Resolution, s: &Resolution) -> Vec<Vec<Q>> {
    let (m, n) = (r.len(), s.len());
    let mut t = vec![vec![Q::zero(); n + 1]; m + 1];
    for u in (0..m).rev() {
        for v in (0..n).rev() {
            let take = gain(r, s, u, v) + &t[u + 1][v + 1];
            let mut best = if t[u + 1][v] > t[u][v + 1] { t[u + 1][v].clone() } else { t[u][v + 1].clone() };
            if take > best {
                best = take;
            }
            t[u][v] = best;
        }
    }
    t
}

pub fn bracket(r: &Resolution, s: &Resolution, method: BracketMethod, caps: &Caps) -> Result<Q> {
    same_k(r, s)?;
    match method {
        BracketMethod::Dp => Ok(suffix_table(r, s).swap_remove(0).swap_remove(0)),
        BracketMethod::Brute => {
            if r.len() > caps.brute_bracket_len || s.len() > caps.brute_bracket_len {
                return size(format!(
                    "brute bracket limited to length {}",
                    caps.brute_bracket_len
                ));
            }
            let mut best = Q::zero();
            brute_rec(r, s, 0, 0, Q::zero(), &mut best);
            Ok(best)
        }
    }
}

fn brute_rec(r: &Resolution, s: &Resolution, u0: usize, v0: usize, acc: Q, best: &mut Q) {
    if acc > *best {
        *best = acc.clone();
    }
    for u in u0..r.len() {
        for v in v0..s.len() {
            brute_rec(r, s, u + 1, v + 1, &acc + gain(r, s, u, v), best);
        }
    }
}

/// The bracket together with the lexicographically first optimal matching.
pub fn bracket_witness(r: &Resolution, s: &Resolution) -> Result<(Q, MonotoneMatching)> {
    same_k(r, s)?;
    let t = suffix_table(r, s);
    let (m, n) = (r.len(), s.len());
    let mut pairs = vec![];
    let (mut u0, mut v0) = (0, 0);
    while u0 < m && v0 < n && !t[u0][v0].is_zero() {
        let target = &t[u0][v0];
        let pick = (u0..m)
            .flat_map(|u| (v0..n).map(move |v| (u, v)))
            .find(|&(u, v)| &(gain(r, s, u, v) + &t[u + 1][v + 1]) == target)
            .expect("suffix table is attained");
        pairs.push(pick);
        u0 = pick.0 + 1;
        v0 = pick.1 + 1;
    }
    Ok((t[0][0].clone(), MonotoneMatching { pairs }))
}

pub fn mutual_bracket(r: &Resolution, s: &Resolution) -> Result<Q> {
    let caps = Caps::default();
    let a = bracket(r, s, BracketMethod::Dp, &caps)?;
    let b = bracket(s, r, BracketMethod::Dp, &caps)?;
    Ok(if a > b { a } else { b })
}

/// `(r, …, r)_m`: the pattern repeated `m` times with weights divided by `m`.
pub fn repeat_resolution(r: &Resolution, m: usize) -> Result<Resolution> {
    if m == 0 {
        return domain("repeat count must be positive");
    }
    let d = qi(m as i64);
    let colours = r.pattern.colours.repeat(m);
    let once: Vec<Q> = r.alpha.iter().map(|a| a / &d).collect();
    let alpha: Vec<Q> = (0..m).flat_map(|_| once.iter().cloned()).collect();
    Resolution::new(Pattern::new(r.k(), colours)?, alpha)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightClass {
    pub k: u32,
    #[serde(with = "crate::rational::qvec")]
    pub w: Vec<Q>,
}

impl WeightClass {
    pub fn new(k: u32, w: Vec<Q>) -> Result<WeightClass> {
        if w.len() != k as usize {
            return domain("weight class needs k entries");
        }
        if w.iter().any(|x| *x < Q::zero()) {
            return domain("weights must be non-negative");
        }
        if w.iter().sum::<Q>() != Q::one() {
            return domain("weights must sum to 1");
        }
        Ok(WeightClass { k, w })
    }

    pub fn contains(&self, r: &Resolution) -> bool {
        r.k() == self.k && r.weights() == self.w
    }

    pub fn max_weight(&self) -> Q {
        self.w.iter().max().cloned().unwrap_or_else(Q::zero)
    }

    /// `Σ_j 2^{j-1} w_j`, an upper bound for every bracket inside the class.
    pub fn bracket_ceiling(&self) -> Q {
        self.w.iter().enumerate().map(|(j, w)| pow2(j as i64) * w).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RademacherParams {
    pub k0: u32,
    #[serde(with = "crate::rational::zvec")]
    pub ns: Vec<BigInt>,
    pub n: u64,
    pub l: u32,
    pub m: u32,
}

impl RademacherParams {
    pub fn validate(&self) -> Result<()> {
        if self.k0 < 2 {
            return domain("k0 must be at least 2");
        }
        if self.ns.len() != self.k0 as usize {
            return domain("ns needs k0 entries");
        }
        if self.ns[0] < BigInt::one() || self.ns.windows(2).any(|w| w[0] >= w[1]) {
            return domain("ns must be positive and strictly increasing");
        }
        if self.n == 0 {
            return domain("n must be positive");
        }
        if self.l < 1 {
            return domain("level must be at least 1");
        }
        if self.m < self.l {
            return domain("depth m must be at least l");
        }
        Ok(())
    }

    pub fn k(&self) -> u32 {
        self.k0 * self.k0
    }

    pub fn ris_satisfied(&self) -> bool {
        ris_sum(&self.ns) < pow2(-(self.k() as i64))
    }
}

/// `Σ_{j<j'} n_j / n_{j'}`.
pub fn ris_sum(ns: &[BigInt]) -> Q {
    let mut total = Q::zero();
    let mut prefix = BigInt::zero();
    for n in ns {
        total += Q::new(prefix.clone(), n.clone());
        prefix += n;
    }
    total
}

/// `R_{n,l}`: colour `j·k0` appears `n·n_j` times per copy, the whole block
/// repeated `k0^{l-1}` times.
pub fn build_rademacher(p: &RademacherParams, caps: &Caps) -> Result<Resolution> {
    p.validate()?;
    let k0 = p.k0 as u64;
    let block: BigInt = p.ns.iter().map(|nj| nj * p.n).sum();
    let reps = BigInt::from(k0).pow(p.l - 1);
    let total = &block * &reps;
    if total > BigInt::from(caps.pattern_len) {
        return size(format!("Rademacher pattern of length {total} exceeds cap {}", caps.pattern_len));
    }
    let mut colours = vec![];
    let mut alpha = vec![];
    for (j, nj) in p.ns.iter().enumerate() {
        let count = (nj * p.n).to_usize().unwrap();
        let a = Q::new(BigInt::one(), nj * p.n * k0);
        for _ in 0..count {
            colours.push((j as u32 + 1) * p.k0);
            alpha.push(a.clone());
        }
    }
    let base = Resolution::new(Pattern::new(p.k(), colours)?, alpha)?;
    repeat_resolution(&base, reps.to_usize().unwrap())
}

/// Levels `l = 1..m` of `R_{n·k0^{m-l}, l}`, all of the same length.
pub fn rademacher_family(k0: u32, ns: &[BigInt], n: u64, m: u32, caps: &Caps) -> Result<Vec<Resolution>> {
    (1..=m)
        .map(|l| {
            let mult = n
                .checked_mul((k0 as u64).checked_pow(m - l).ok_or_else(|| Error::Size("multiplier overflow".into()))?)
                .ok_or_else(|| Error::Size("multiplier overflow".into()))?;
            build_rademacher(&RademacherParams { k0, ns: ns.to_vec(), n: mult, l, m }, caps)
        })
        .collect()
}

/// Greedy multiplicities: `n_1 = 1`, each next entry the least integer above
/// its predecessor keeping the partial sum below `2^{-k0²}`.
pub fn choose_multiplicities(k0: u32) -> Result<Vec<BigInt>> {
    if k0 < 2 {
        return domain("k0 must be at least 2");
    }
    let bound = pow2(-((k0 * k0) as i64));
    let mut ns = vec![BigInt::one()];
    let mut partial = Q::zero();
    let mut prefix = BigInt::one();
    for _ in 1..k0 {
        let slack = &bound - &partial;
        // need prefix / n < slack
        let lower = qb(&prefix) / slack;
        let mut n: BigInt = crate::rational::floor(&lower) + 1;
        let prev = ns.last().unwrap() + 1;
        if n < prev {
            n = prev;
        }
        partial += Q::new(prefix.clone(), n.clone());
        prefix += &n;
        ns.push(n);
    }
    Ok(ns)
}

pub fn rademacher_bound(p: &RademacherParams, l: u32, l2: u32) -> Result<Q> {
    p.validate()?;
    if l < 1 || l2 < 1 || l > p.m || l2 > p.m {
        return domain(format!("levels must lie in 1..{}", p.m));
    }
    let k0 = p.k0 as i64;
    if l == l2 {
        return Ok(qi(1) + Q::new(BigInt::from(2), BigInt::from(k0)));
    }
    let mut s2 = Q::zero();
    for j in 0..p.ns.len() {
        for jp in j + 1..p.ns.len() {
            s2 += pow2((jp - j) as i64 * k0) * Q::new(p.ns[j].clone(), p.ns[jp].clone());
        }
    }
    Ok(pow2(-k0) + s2 / qi(k0) + Q::new(BigInt::from(3), BigInt::from(k0)))
}

/// Largest mutual bracket over distinct pairs, `None` for fewer than two members.
pub fn max_pairwise(family: &[Resolution]) -> Result<Option<Q>> {
    let mut best: Option<Q> = None;
    for i in 0..family.len() {
        for j in i + 1..family.len() {
            let b = mutual_bracket(&family[i], &family[j])?;
            if best.as_ref().is_none_or(|x| b > *x) {
                best = Some(b);
            }
        }
    }
    Ok(best)
}

/// Every distinct pair is `eta`-orthogonal, that is `⟨r,s⟩ < eta`.
pub fn pairwise_orthogonal(family: &[Resolution], eta: &Q) -> Result<bool> {
    Ok(max_pairwise(family)?.is_none_or(|b| &b < eta))
}

/// Seeded greedy search for a large pairwise `eta`-orthogonal family in the class.
pub fn explore_orthogonal_family(class: &WeightClass, eta: &Q, budget: usize, seed: u64) -> Result<Vec<Resolution>> {
    WeightClass::new(class.k, class.w.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut family: Vec<Resolution> = vec![];
    if budget == 0 {
        return Ok(family);
    }
    let live: Vec<u32> = (1..=class.k).filter(|&j| class.w[j as usize - 1] > Q::zero()).collect();
    let attempts = 40 * budget;
    for _ in 0..attempts {
        if family.len() >= budget {
            break;
        }
        let cand = random_member(class, &live, &mut rng)?;
        let mut ok = true;
        for f in &family {
            if mutual_bracket(f, &cand)? >= *eta {
                ok = false;
                break;
            }
        }
        if ok {
            family.push(cand);
        }
    }
    Ok(family)
}

fn random_member(class: &WeightClass, live: &[u32], rng: &mut ChaCha8Rng) -> Result<Resolution> {
    // a random base block, repeated a random number of times
    let mut colours = vec![];
    let mut alpha = vec![];
    let mut order = live.to_vec();
    for i in (1..order.len()).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
    let mut slots: Vec<(u32, i64)> = order.iter().map(|&c| (c, rng.gen_range(1..=3))).collect();
    if rng.gen_bool(0.5) {
        slots.sort_by_key(|&(c, _)| c);
    }
    for (c, count) in slots {
        let w = &class.w[c as usize - 1];
        for _ in 0..count {
            colours.push(c);
            alpha.push(w / qi(count));
        }
    }
    let base = Resolution::new(Pattern::new(class.k, colours)?, alpha)?;
    let reps = rng.gen_range(1..=4);
    repeat_resolution(&base, reps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn pat(k: u32, c: &[u32]) -> Pattern {
        Pattern::new(k, c.to_vec()).unwrap()
    }

    #[test]
    fn embedding_examples() {
        assert!(pattern_embeds(&pat(2, &[1, 2]), &pat(2, &[1, 1, 2])).unwrap());
        assert!(!pattern_embeds(&pat(2, &[2, 1]), &pat(2, &[1, 2])).unwrap());
        assert!(pattern_embeds(&pat(2, &[1, 2, 1]), &pat(2, &[1, 1, 2, 2, 1])).unwrap());
        assert!(pattern_embeds(&pat(2, &[1]), &pat(3, &[1])).is_err());
    }

    #[test]
    fn pattern_validation() {
        assert!(Pattern::new(2, vec![]).is_err());
        assert!(Pattern::new(2, vec![3]).is_err());
        assert!(Pattern::new(2, vec![0]).is_err());
    }

    #[test]
    fn repeat_examples() {
        let r = Resolution::new(pat(4, &[2, 4, 4]), vec![q(1, 2), q(1, 4), q(1, 4)]).unwrap();
        let rr = repeat_resolution(&r, 2).unwrap();
        assert_eq!(rr.pattern.colours, vec![2, 4, 4, 2, 4, 4]);
        assert_eq!(rr.alpha, vec![q(1, 4), q(1, 8), q(1, 8), q(1, 4), q(1, 8), q(1, 8)]);
        assert_eq!(rr.weights(), r.weights());
        assert!(repeat_resolution(&r, 0).is_err());
    }

    #[test]
    fn multiplicities() {
        assert_eq!(choose_multiplicities(2).unwrap(), vec![BigInt::from(1), BigInt::from(17)]);
        let ns = choose_multiplicities(3).unwrap();
        assert!(ris_sum(&ns) < pow2(-9));
        assert!(ns.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn ris_flag_is_exact() {
        let p = |ns: Vec<i64>| RademacherParams {
            k0: 2,
            ns: ns.into_iter().map(BigInt::from).collect(),
            n: 1,
            l: 1,
            m: 1,
        };
        assert!(p(vec![1, 17]).ris_satisfied());
        assert!(!p(vec![1, 16]).ris_satisfied());
    }
}
