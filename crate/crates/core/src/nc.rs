//! Non-crossing partitions and exact moment arithmetic for free convolutions.
//!
//! Free cumulants `κ_n` relate to moments through
//! `m_n = Σ_{π ∈ NC(n)} Π_{V ∈ π} κ_{|V|}`. Free additive convolution adds
//! cumulants; free multiplicative convolution pairs the cumulants of one
//! factor with the moments of the other along the Kreweras complement:
//! `m_n(A ⊠ B) = Σ_{π ∈ NC(n)} κ_π(A) · m_{K(π)}(B)`.
//!
//! All sums are generic over [`num_traits::Num`], so they run exactly over
//! [`BigRational`] or approximately over `f64`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, ToPrimitive, Zero};
use serde::de::{self, Deserializer};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::measure::MeasureRep;

/// Largest `n` for which partitions are enumerated.
pub const MAX_NC_SIZE: usize = 12;
/// Largest order supported by [`mult_conv_moments`].
pub const MAX_MULT_ORDER: usize = 10;

/// `C_n = (2n)! / (n! (n+1)!)`.
pub fn catalan(n: usize) -> u64 {
    let mut c: u64 = 1;
    for i in 0..n as u64 {
        c = c * 2 * (2 * i + 1) / (i + 2);
    }
    c
}

/// A non-crossing partition of `{1, …, n}`.
///
/// Blocks are sorted internally and ordered by their minimum.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NCPartition {
    n: usize,
    blocks: Vec<Vec<usize>>,
}

impl NCPartition {
    /// Validates and normalizes a partition given as 1-based blocks.
    pub fn new(n: usize, mut blocks: Vec<Vec<usize>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("partition of an empty set".into()));
        }
        let mut seen = vec![false; n + 1];
        for b in blocks.iter_mut() {
            if b.is_empty() {
                return Err(Error::InvalidParameter("empty block".into()));
            }
            b.sort_unstable();
            for &x in b.iter() {
                if x == 0 || x > n || seen[x] {
                    return Err(Error::InvalidParameter(format!("element {x} missing, repeated or out of range")));
                }
                seen[x] = true;
            }
        }
        if seen[1..].iter().any(|s| !s) {
            return Err(Error::InvalidParameter("blocks do not cover {1..n}".into()));
        }
        blocks.sort_by_key(|b| b[0]);
        if !is_non_crossing(&blocks) {
            return Err(Error::InvalidParameter("partition is crossing".into()));
        }
        Ok(NCPartition { n, blocks })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// Sorted multiset of block sizes.
    pub fn block_type(&self) -> Vec<usize> {
        let mut t: Vec<usize> = self.blocks.iter().map(Vec::len).collect();
        t.sort_unstable();
        t
    }

    /// Relabels `i ↦ i + 1` (and `n ↦ 1`).
    pub fn rotate(&self) -> Self {
        let n = self.n;
        let blocks = self.blocks.iter().map(|b| b.iter().map(|&x| x % n + 1).collect()).collect();
        NCPartition::new(n, blocks).expect("rotation preserves non-crossing")
    }
}

/// Whether no `a < b < c < d` has `a, c` in one block and `b, d` in another.
pub fn is_non_crossing(blocks: &[Vec<usize>]) -> bool {
    let n = blocks.iter().flatten().copied().max().unwrap_or(0);
    let mut lab = vec![usize::MAX; n + 1];
    for (bi, b) in blocks.iter().enumerate() {
        for &x in b {
            lab[x] = bi;
        }
    }
    // Two blocks cross iff, scanning left to right, some block is re-entered
    // after another block that is still unfinished was opened inside it.
    let mut last = vec![0usize; blocks.len()];
    for (bi, b) in blocks.iter().enumerate() {
        last[bi] = *b.iter().max().unwrap();
    }
    let mut stack: Vec<usize> = Vec::new();
    for (x, &b) in lab.iter().enumerate().take(n + 1).skip(1) {
        if b == usize::MAX {
            continue;
        }
        if let Some(pos) = stack.iter().position(|&s| s == b) {
            if pos != stack.len() - 1 {
                return false;
            }
        } else {
            stack.push(b);
        }
        if last[b] == x {
            stack.pop();
        }
    }
    true
}

/// All non-crossing partitions of `{1, …, n}`, `1 ≤ n ≤ 12`.
///
/// Elements are placed left to right; an element may open a new block or
/// join a block that is still open. Joining a block closes every block
/// opened after it, which is exactly the non-crossing constraint.
pub fn enumerate_nc(n: usize) -> Result<Vec<NCPartition>> {
    if n == 0 || n > MAX_NC_SIZE {
        return Err(Error::Limit { what: "non-crossing partition size", value: n, limit: MAX_NC_SIZE });
    }
    let mut out = Vec::with_capacity(catalan(n) as usize);
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut open: Vec<usize> = Vec::new();
    extend_nc(1, n, &mut blocks, &mut open, &mut out);
    Ok(out)
}

fn extend_nc(x: usize, n: usize, blocks: &mut Vec<Vec<usize>>, open: &mut Vec<usize>, out: &mut Vec<NCPartition>) {
    if x > n {
        out.push(NCPartition { n, blocks: blocks.clone() });
        return;
    }
    // open a new block
    blocks.push(vec![x]);
    open.push(blocks.len() - 1);
    extend_nc(x + 1, n, blocks, open, out);
    open.pop();
    blocks.pop();
    // join an open block, closing everything above it
    for depth in 0..open.len() {
        let b = open[depth];
        let saved: Vec<usize> = open.split_off(depth + 1);
        blocks[b].push(x);
        extend_nc(x + 1, n, blocks, open, out);
        blocks[b].pop();
        open.extend(saved);
    }
}

/// Kreweras complement, realized as the cycles of `π^{-1} γ` with
/// `γ = (1 2 … n)`. Applying it twice rotates by one position.
pub fn kreweras(p: &NCPartition) -> NCPartition {
    let n = p.n;
    // π as a permutation: each element maps to the next element of its block
    let mut pi_inv = vec![0usize; n];
    for b in &p.blocks {
        for w in 0..b.len() {
            let from = b[w] - 1;
            let to = b[(w + 1) % b.len()] - 1;
            pi_inv[to] = from;
        }
    }
    let mut visited = vec![false; n];
    let mut blocks = Vec::new();
    for start in 0..n {
        if visited[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut i = start;
        while !visited[i] {
            visited[i] = true;
            cycle.push(i + 1);
            i = pi_inv[(i + 1) % n];
        }
        blocks.push(cycle);
    }
    NCPartition::new(n, blocks).expect("Kreweras complement is non-crossing")
}

/// Aggregated block-type tables for one `n`.
struct TypeTable {
    /// (block sizes of π, multiplicity)
    moment_terms: Vec<(Vec<usize>, u64)>,
    /// (block sizes of π, block sizes of K(π), multiplicity)
    mixed_terms: Vec<(Vec<usize>, Vec<usize>, u64)>,
}

fn type_table(n: usize) -> &'static TypeTable {
    static TABLES: [OnceLock<TypeTable>; MAX_NC_SIZE + 1] = [const { OnceLock::new() }; MAX_NC_SIZE + 1];
    TABLES[n].get_or_init(|| {
        let parts = enumerate_nc(n).expect("n within limit");
        let mut moment: HashMap<Vec<usize>, u64> = HashMap::new();
        let mut mixed: HashMap<(Vec<usize>, Vec<usize>), u64> = HashMap::new();
        for p in &parts {
            let t = p.block_type();
            *moment.entry(t.clone()).or_default() += 1;
            if n <= MAX_MULT_ORDER {
                *mixed.entry((t, kreweras(p).block_type())).or_default() += 1;
            }
        }
        let mut moment_terms: Vec<_> = moment.into_iter().collect();
        moment_terms.sort();
        let mut mixed_terms: Vec<_> = mixed.into_iter().map(|((a, b), c)| (a, b, c)).collect();
        mixed_terms.sort();
        TypeTable { moment_terms, mixed_terms }
    })
}

fn product<T: Num + Clone>(seq: &[T], sizes: &[usize]) -> T {
    sizes.iter().fold(T::one(), |acc, &s| acc * seq[s - 1].clone())
}

fn times<T: Num + Clone>(x: T, count: u64) -> T {
    // counts are below C_12 = 208012, so repeated doubling stays exact
    let mut acc = T::zero();
    let mut base = x;
    let mut c = count;
    while c > 0 {
        if c & 1 == 1 {
            acc = acc + base.clone();
        }
        base = base.clone() + base;
        c >>= 1;
    }
    acc
}

/// `m_n = Σ_{π ∈ NC(n)} κ_π` for `n = 1..len`.
pub fn moments_from_cumulants_generic<T: Num + Clone>(kappa: &[T]) -> Result<Vec<T>> {
    check_len(kappa.len(), MAX_NC_SIZE)?;
    Ok((1..=kappa.len())
        .map(|n| {
            type_table(n).moment_terms.iter().fold(T::zero(), |acc, (sizes, c)| acc + times(product(kappa, sizes), *c))
        })
        .collect())
}

/// Inverts [`moments_from_cumulants_generic`] order by order.
pub fn cumulants_from_moments_generic<T: Num + Clone>(m: &[T]) -> Result<Vec<T>> {
    check_len(m.len(), MAX_NC_SIZE)?;
    let mut kappa: Vec<T> = Vec::with_capacity(m.len());
    for n in 1..=m.len() {
        // every term other than the one-block partition uses only κ_1..κ_{n-1}
        kappa.push(T::zero());
        let rest = type_table(n)
            .moment_terms
            .iter()
            .filter(|(sizes, _)| sizes.len() > 1)
            .fold(T::zero(), |acc, (sizes, c)| acc + times(product(&kappa, sizes), *c));
        kappa[n - 1] = m[n - 1].clone() - rest;
    }
    Ok(kappa)
}

/// `m_n(A ⊠ B) = Σ_{π ∈ NC(n)} κ_π(A) m_{K(π)}(B)`.
pub fn mult_conv_generic<T: Num + Clone>(ma: &[T], mb: &[T], k: usize) -> Result<Vec<T>> {
    check_len(k, MAX_MULT_ORDER)?;
    if ma.len() < k || mb.len() < k {
        return Err(Error::InvalidParameter(format!("need {k} moments of each factor")));
    }
    let kappa_a = cumulants_from_moments_generic(&ma[..k])?;
    Ok((1..=k)
        .map(|n| {
            type_table(n)
                .mixed_terms
                .iter()
                .fold(T::zero(), |acc, (pa, kb, c)| acc + times(product(&kappa_a, pa) * product(mb, kb), *c))
        })
        .collect())
}

fn check_len(k: usize, limit: usize) -> Result<()> {
    if k == 0 || k > limit {
        return Err(Error::Limit { what: "moment order", value: k, limit });
    }
    Ok(())
}

/// A finite sequence `m_1..m_k` (moments or cumulants), exact when every
/// entry is a rational number.
#[derive(Debug, Clone, PartialEq)]
pub enum MomentSequence {
    Exact(Vec<BigRational>),
    Approx(Vec<f64>),
}

/// Cumulant sequences share the representation of moment sequences.
pub type CumulantSequence = MomentSequence;

impl MomentSequence {
    pub fn exact(values: Vec<BigRational>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("empty moment sequence".into()));
        }
        Ok(MomentSequence::Exact(values))
    }

    pub fn approx(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("empty moment sequence".into()));
        }
        Ok(MomentSequence::Approx(values))
    }

    /// Semicircle of variance `t`: `m_{2j} = C_j t^j`, odd moments zero.
    pub fn semicircle(t: &BigRational, k: usize) -> Self {
        let vals = (1..=k)
            .map(|n| {
                if n % 2 == 1 {
                    BigRational::zero()
                } else {
                    BigRational::from_integer(BigInt::from(catalan(n / 2))) * num_traits::pow(t.clone(), n / 2)
                }
            })
            .collect();
        MomentSequence::Exact(vals)
    }

    pub fn point_mass(c: &BigRational, k: usize) -> Self {
        MomentSequence::Exact((1..=k).map(|n| num_traits::pow(c.clone(), n)).collect())
    }

    /// Uniform law on `[a, b]`: `m_n = (b^{n+1} − a^{n+1}) / ((n+1)(b − a))`.
    pub fn uniform(a: &BigRational, b: &BigRational, k: usize) -> Self {
        let width = b - a;
        MomentSequence::Exact(
            (1..=k)
                .map(|n| {
                    let num = num_traits::pow(b.clone(), n + 1) - num_traits::pow(a.clone(), n + 1);
                    num / (width.clone() * BigRational::from_integer(BigInt::from(n + 1)))
                })
                .collect(),
        )
    }

    /// Moments of a finitely supported measure given as `(location, weight)`.
    pub fn atomic(atoms: &[(BigRational, BigRational)], k: usize) -> Self {
        MomentSequence::Exact(
            (1..=k)
                .map(|n| atoms.iter().fold(BigRational::zero(), |acc, (x, w)| acc + w * num_traits::pow(x.clone(), n)))
                .collect(),
        )
    }

    /// Moments of `mu`: exact for atomic and semicircle forms (treating the
    /// stored floats as exact binary rationals), approximate otherwise.
    pub fn from_measure(mu: &MeasureRep, k: usize) -> Result<Self> {
        match mu {
            MeasureRep::Atomic(a) => {
                let atoms: Option<Vec<_>> = a
                    .atoms()
                    .iter()
                    .map(|&(x, w)| Some((BigRational::from_float(x)?, BigRational::from_float(w)?)))
                    .collect();
                Ok(MomentSequence::atomic(&atoms.expect("finite atoms"), k))
            }
            MeasureRep::Semicircle(s) => Ok(MomentSequence::semicircle(&nice_rational(s.variance()), k)),
            _ => MomentSequence::approx(mu.moments(k)?),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            MomentSequence::Exact(v) => v.len(),
            MomentSequence::Approx(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, MomentSequence::Exact(_))
    }

    pub fn to_f64(&self) -> Vec<f64> {
        match self {
            MomentSequence::Exact(v) => v.iter().map(|r| r.to_f64().unwrap_or(f64::NAN)).collect(),
            MomentSequence::Approx(v) => v.clone(),
        }
    }

    pub fn truncate(&self, k: usize) -> Self {
        match self {
            MomentSequence::Exact(v) => MomentSequence::Exact(v[..k.min(v.len())].to_vec()),
            MomentSequence::Approx(v) => MomentSequence::Approx(v[..k.min(v.len())].to_vec()),
        }
    }

    /// Entry `n` (1-based) as a display string: `p/q` when exact.
    pub fn entry_string(&self, n: usize) -> String {
        match self {
            MomentSequence::Exact(v) => v[n - 1].to_string(),
            MomentSequence::Approx(v) => crate::fmt::sig17(v[n - 1]),
        }
    }
}

impl Serialize for MomentSequence {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.len()))?;
        for n in 1..=self.len() {
            seq.serialize_element(&self.entry_string(n))?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for MomentSequence {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw: Vec<String> = Vec::deserialize(d)?;
        if raw.is_empty() {
            return Err(de::Error::custom("empty moment sequence"));
        }
        let is_float = |s: &str| s.contains(['.', 'e', 'E']) || s.contains("inf") || s.contains("NaN");
        if raw.iter().any(|s| is_float(s)) {
            let vals: std::result::Result<Vec<f64>, _> = raw.iter().map(|s| s.parse::<f64>()).collect();
            vals.map(MomentSequence::Approx).map_err(de::Error::custom)
        } else {
            let vals: std::result::Result<Vec<BigRational>, _> = raw.iter().map(|s| parse_rational(s)).collect();
            vals.map(MomentSequence::Exact).map_err(de::Error::custom)
        }
    }
}

fn parse_rational(s: &str) -> std::result::Result<BigRational, String> {
    let int = |t: &str| t.trim().parse::<BigInt>().map_err(|e| format!("{e} in {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let d = int(d)?;
            if d.is_zero() {
                return Err(format!("zero denominator in {s:?}"));
            }
            Ok(BigRational::new(int(n)?, d))
        }
        None => Ok(BigRational::from_integer(int(s)?)),
    }
}

/// Free cumulants of a moment sequence; exact when the input is exact.
pub fn cumulants_from_moments(m: &MomentSequence) -> Result<CumulantSequence> {
    Ok(match m {
        MomentSequence::Exact(v) => MomentSequence::Exact(cumulants_from_moments_generic(v)?),
        MomentSequence::Approx(v) => MomentSequence::Approx(cumulants_from_moments_generic(v)?),
    })
}

/// Moments from free cumulants; exact inverse of [`cumulants_from_moments`].
pub fn moments_from_cumulants(kappa: &CumulantSequence) -> Result<MomentSequence> {
    Ok(match kappa {
        MomentSequence::Exact(v) => MomentSequence::Exact(moments_from_cumulants_generic(v)?),
        MomentSequence::Approx(v) => MomentSequence::Approx(moments_from_cumulants_generic(v)?),
    })
}

fn both_exact(
    a: &MomentSequence,
    b: &MomentSequence,
    k: usize,
) -> Result<Option<(Vec<BigRational>, Vec<BigRational>)>> {
    if a.len() < k || b.len() < k {
        return Err(Error::InvalidParameter(format!("need {k} moments, got {} and {}", a.len(), b.len())));
    }
    Ok(match (a, b) {
        (MomentSequence::Exact(x), MomentSequence::Exact(y)) => Some((x[..k].to_vec(), y[..k].to_vec())),
        _ => None,
    })
}

/// `m_1..m_k` of `A ⊞ B` by adding free cumulants.
pub fn add_conv_moments(ma: &MomentSequence, mb: &MomentSequence, k: usize) -> Result<MomentSequence> {
    check_len(k, MAX_NC_SIZE)?;
    if let Some((x, y)) = both_exact(ma, mb, k)? {
        let ka = cumulants_from_moments_generic(&x)?;
        let kb = cumulants_from_moments_generic(&y)?;
        let sum: Vec<BigRational> = ka.into_iter().zip(kb).map(|(p, q)| p + q).collect();
        return Ok(MomentSequence::Exact(moments_from_cumulants_generic(&sum)?));
    }
    let (x, y) = (ma.to_f64(), mb.to_f64());
    let ka = cumulants_from_moments_generic(&x[..k])?;
    let kb = cumulants_from_moments_generic(&y[..k])?;
    let sum: Vec<f64> = ka.into_iter().zip(kb).map(|(p, q)| p + q).collect();
    Ok(MomentSequence::Approx(moments_from_cumulants_generic(&sum)?))
}

/// `m_1..m_k` of `A ⊠ B`, `k ≤ 10`. `A` is normally the factor on `[0, ∞)`;
/// the moment formula itself is symmetric in the two factors.
pub fn mult_conv_moments(ma: &MomentSequence, mb: &MomentSequence, k: usize) -> Result<MomentSequence> {
    check_len(k, MAX_MULT_ORDER)?;
    if let Some((x, y)) = both_exact(ma, mb, k)? {
        return Ok(MomentSequence::Exact(mult_conv_generic(&x, &y, k)?));
    }
    Ok(MomentSequence::Approx(mult_conv_generic(&ma.to_f64(), &mb.to_f64(), k)?))
}

/// Rational reading of a float: the simplest fraction with denominator at
/// most `10^6` lying within four ulps of `x`, or the exact binary value.
pub fn nice_rational(x: f64) -> BigRational {
    let exact = BigRational::from_float(x).expect("finite value");
    if x == 0.0 {
        return exact;
    }
    let tol = 4.0 * f64::EPSILON * x.abs();
    // continued fraction convergents
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut rest = x;
    for _ in 0..40 {
        let a = rest.floor();
        if a.abs() > 1e15 {
            break;
        }
        let ai = a as i128;
        let (h2, k2) = (ai * h1 + h0, ai * k1 + k0);
        if k2 > 1_000_000 {
            break;
        }
        if ((h2 as f64) / (k2 as f64) - x).abs() <= tol {
            return BigRational::new(BigInt::from(h2), BigInt::from(k2));
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = rest - a;
        if frac == 0.0 {
            break;
        }
        rest = 1.0 / frac;
    }
    exact
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{One, Signed};

    fn one() -> BigRational {
        BigRational::one()
    }
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    /// All set partitions via restricted growth strings, filtered for crossings.
    fn brute_force_nc(n: usize) -> Vec<Vec<Vec<usize>>> {
        let mut out = Vec::new();
        let mut rgs = vec![0usize; n];
        loop {
            let nb = rgs.iter().max().unwrap() + 1;
            let mut blocks = vec![Vec::new(); nb];
            for (i, &b) in rgs.iter().enumerate() {
                blocks[b].push(i + 1);
            }
            let crossing = (0..nb).any(|p| {
                (0..nb).any(|r| {
                    p != r
                        && blocks[p].iter().any(|&a| {
                            blocks[r]
                                .iter()
                                .any(|&b| b > a && blocks[p].iter().any(|&c| c > b && blocks[r].iter().any(|&d| d > c)))
                        })
                })
            });
            if !crossing {
                out.push(blocks);
            }
            // next restricted growth string
            let mut i = n;
            loop {
                if i == 1 {
                    return out;
                }
                i -= 1;
                let maxprev = rgs[..i].iter().max().copied().unwrap_or(0);
                if rgs[i] <= maxprev {
                    rgs[i] += 1;
                    for x in rgs[i + 1..].iter_mut() {
                        *x = 0;
                    }
                    break;
                }
            }
        }
    }

    /// Independent moment recursion `m_n = Σ_s κ_s [z^{n-s}] M(z)^s`.
    fn moments_by_functional_equation(kappa: &[BigRational]) -> Vec<BigRational> {
        let k = kappa.len();
        let mut m = vec![BigRational::one()]; // m_0
        for n in 1..=k {
            let mut total = BigRational::zero();
            for s in 1..=n {
                // coefficient of z^{n-s} in M(z)^s using m_0..m_{n-1}
                let mut poly = vec![BigRational::one()];
                for _ in 0..s {
                    let mut next = vec![BigRational::zero(); n - s + 1];
                    for (i, a) in poly.iter().enumerate() {
                        for (j, b) in m.iter().enumerate() {
                            if i + j <= n - s {
                                next[i + j] = next[i + j].clone() + a * b;
                            }
                        }
                    }
                    poly = next;
                }
                total += &kappa[s - 1] * &poly[n - s];
            }
            m.push(total);
        }
        m.split_off(1)
    }

    #[test]
    fn catalan_numbers() {
        let expected = [1, 1, 2, 5, 14, 42, 132, 429, 1430, 4862, 16796, 58786, 208012];
        for (n, &c) in expected.iter().enumerate() {
            assert_eq!(catalan(n), c);
        }
    }

    #[test]
    fn enumeration_counts_and_oracle() {
        assert_eq!(enumerate_nc(1).unwrap().len(), 1);
        for n in 1..=8 {
            let fast = enumerate_nc(n).unwrap();
            assert_eq!(fast.len() as u64, catalan(n), "n={n}");
            let mut fast_blocks: Vec<_> = fast.iter().map(|p| p.blocks().to_vec()).collect();
            let mut slow: Vec<_> =
                brute_force_nc(n).into_iter().map(|bs| NCPartition::new(n, bs).unwrap().blocks().to_vec()).collect();
            fast_blocks.sort();
            slow.sort();
            assert_eq!(fast_blocks, slow, "n={n}");
        }
        assert_eq!(brute_force_nc(4).len(), 14);
        assert_eq!(brute_force_nc(6).len(), 132);
        assert!(matches!(enumerate_nc(0), Err(Error::Limit { .. })));
        assert!(matches!(enumerate_nc(13), Err(Error::Limit { .. })));
        assert_eq!(enumerate_nc(12).unwrap().len(), 208012);
    }

    #[test]
    fn crossing_partition_rejected() {
        assert!(NCPartition::new(4, vec![vec![1, 3], vec![2, 4]]).is_err());
        assert!(NCPartition::new(4, vec![vec![1, 4], vec![2, 3]]).is_ok());
        assert!(NCPartition::new(3, vec![vec![1, 2]]).is_err());
        assert!(NCPartition::new(3, vec![vec![1, 2], vec![2, 3]]).is_err());
    }

    #[test]
    fn kreweras_examples() {
        for n in 1..=6 {
            let singletons = NCPartition::new(n, (1..=n).map(|i| vec![i]).collect()).unwrap();
            let full = NCPartition::new(n, vec![(1..=n).collect()]).unwrap();
            assert_eq!(kreweras(&singletons), full);
            assert_eq!(kreweras(&full), singletons);
        }
        let p = NCPartition::new(2, vec![vec![1, 2]]).unwrap();
        assert_eq!(kreweras(&p).blocks(), &[vec![1], vec![2]]);
        let p = NCPartition::new(3, vec![vec![1, 2], vec![3]]).unwrap();
        assert_eq!(kreweras(&p).blocks(), &[vec![1], vec![2, 3]]);
    }

    #[test]
    fn kreweras_block_count_and_double_complement() {
        for n in 1..=8 {
            for p in enumerate_nc(n).unwrap() {
                let k = kreweras(&p);
                assert_eq!(p.block_count() + k.block_count(), n + 1);
                assert_eq!(kreweras(&k).rotate(), p);
            }
        }
    }

    #[test]
    fn semicircle_and_point_mass_cumulants() {
        let t = q(3, 2);
        for k in 1..=8 {
            let kappa = cumulants_from_moments(&MomentSequence::semicircle(&t, k)).unwrap();
            let MomentSequence::Exact(v) = kappa else { panic!() };
            for (i, x) in v.iter().enumerate() {
                if i == 1 {
                    assert_eq!(x, &t);
                } else {
                    assert!(x.is_zero());
                }
            }
        }
        let c = q(-5, 3);
        let MomentSequence::Exact(v) = cumulants_from_moments(&MomentSequence::point_mass(&c, 8)).unwrap() else {
            panic!()
        };
        assert_eq!(v[0], c);
        assert!(v[1..].iter().all(Zero::is_zero));
        let zeros = MomentSequence::Exact(vec![BigRational::zero(); 6]);
        let MomentSequence::Exact(v) = cumulants_from_moments(&zeros).unwrap() else { panic!() };
        assert!(v.iter().all(Zero::is_zero));
    }

    #[test]
    fn moments_from_cumulants_examples() {
        let t = q(2, 7);
        let mut kappa = vec![BigRational::zero(); 8];
        kappa[1] = t.clone();
        let m = moments_from_cumulants(&MomentSequence::Exact(kappa)).unwrap();
        assert_eq!(m, MomentSequence::semicircle(&t, 8));
        let c = q(3, 1);
        let mut kappa = vec![BigRational::zero(); 5];
        kappa[0] = c.clone();
        let m = moments_from_cumulants(&MomentSequence::Exact(kappa)).unwrap();
        assert_eq!(m, MomentSequence::point_mass(&c, 5));
    }

    #[test]
    fn free_poisson_square_gives_fuss_catalan() {
        // free Poisson(1): all cumulants 1, moments Catalan; its ⊠-square has
        // moments binom(3n, n) / (2n + 1)
        let cat: Vec<BigRational> = (1..=8).map(|n| BigRational::from_integer(catalan(n).into())).collect();
        let MomentSequence::Exact(kappa) = cumulants_from_moments(&MomentSequence::Exact(cat.clone())).unwrap() else {
            panic!()
        };
        assert!(kappa.iter().all(|x| x.is_one()));
        let prod = mult_conv_moments(&MomentSequence::Exact(cat.clone()), &MomentSequence::Exact(cat), 8).unwrap();
        let fuss = [1u64, 3, 12, 55, 273, 1428, 7752, 43263];
        let expected: Vec<BigRational> = fuss.iter().map(|&v| BigRational::from_integer(v.into())).collect();
        assert_eq!(prod, MomentSequence::Exact(expected));
    }

    #[test]
    fn mult_conv_examples() {
        let sc = MomentSequence::semicircle(&one(), 8);
        let id = MomentSequence::point_mass(&one(), 8);
        assert_eq!(mult_conv_moments(&id, &sc, 8).unwrap(), sc);
        let two = mult_conv_moments(&MomentSequence::point_mass(&q(2, 1), 4), &sc, 4).unwrap();
        assert_eq!(two.to_f64()[1], 4.0);
        let uni = MomentSequence::uniform(&q(1, 1), &q(2, 1), 6);
        let MomentSequence::Exact(v) = mult_conv_moments(&uni, &sc, 6).unwrap() else { panic!() };
        assert!(v[0].is_zero());
        assert_eq!(v[1], q(9, 4));
        assert!(v[2].is_zero() && v[4].is_zero());
        // by hand: only π = 1111, 13|2|4 and 24|1|3 survive, giving 2κ1⁴ + 2κ2κ1²
        assert_eq!(v[3], q(81, 8) + q(3, 8));
        assert!(matches!(mult_conv_moments(&uni, &sc, 11), Err(Error::Limit { .. })));
    }

    #[test]
    fn add_conv_examples() {
        let a = MomentSequence::semicircle(&q(1, 3), 8);
        let b = MomentSequence::semicircle(&q(1, 2), 8);
        assert_eq!(add_conv_moments(&a, &b, 8).unwrap(), MomentSequence::semicircle(&q(5, 6), 8));
        let c = q(1, 1);
        let shifted = add_conv_moments(&MomentSequence::point_mass(&c, 6), &a, 6).unwrap();
        // moments of X + 1 with X semicircle(1/3): Σ binom(n, j) m_j
        let MomentSequence::Exact(sm) = &a else { panic!() };
        let MomentSequence::Exact(v) = shifted else { panic!() };
        for n in 1..=6usize {
            let mut expected = BigRational::one();
            let mut binom = BigInt::from(1);
            for j in 1..=n {
                binom = binom * BigInt::from(n - j + 1) / BigInt::from(j);
                expected += BigRational::from_integer(binom.clone()) * &sm[j - 1];
            }
            assert_eq!(v[n - 1], expected);
        }
        let zero = MomentSequence::point_mass(&BigRational::zero(), 8);
        assert_eq!(add_conv_moments(&a, &zero, 8).unwrap(), a);
    }

    #[test]
    fn approx_path_matches_exact() {
        let uni = MomentSequence::uniform(&q(1, 1), &q(2, 1), 6);
        let sc = MomentSequence::semicircle(&one(), 6);
        let exact = mult_conv_moments(&uni, &sc, 6).unwrap().to_f64();
        let approx = mult_conv_moments(&MomentSequence::Approx(uni.to_f64()), &sc, 6).unwrap();
        assert!(!approx.is_exact());
        for (a, b) in approx.to_f64().iter().zip(&exact) {
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }

    #[test]
    fn nice_rational_reads_decimals() {
        assert_eq!(nice_rational(0.5), q(1, 2));
        assert_eq!(nice_rational(1.0 / 3.0), q(1, 3));
        assert_eq!(
            nice_rational(8.0 * std::f64::consts::PI.powi(2) * (1.0 / (8.0 * std::f64::consts::PI.powi(2)))),
            q(1, 1)
        );
        let pi = nice_rational(std::f64::consts::PI);
        assert_eq!(pi, BigRational::from_float(std::f64::consts::PI).unwrap());
    }

    #[test]
    fn json_strings() {
        let m = MomentSequence::Exact(vec![q(1, 2), q(3, 1)]);
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"["1/2","3"]"#);
        assert_eq!(serde_json::from_str::<MomentSequence>(&s).unwrap(), m);
        let a = MomentSequence::Approx(vec![0.1, 2.0]);
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(serde_json::from_str::<MomentSequence>(&s).unwrap(), a);
    }

    fn rational() -> impl Strategy<Value = BigRational> {
        (-20i64..=20, 1i64..=9).prop_map(|(n, d)| q(n, d))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn round_trip_is_identity(kappa in prop::collection::vec(rational(), 1..=10)) {
            let k = MomentSequence::Exact(kappa.clone());
            let m = moments_from_cumulants(&k).unwrap();
            prop_assert_eq!(cumulants_from_moments(&m).unwrap(), k);
            let MomentSequence::Exact(mv) = m else { unreachable!() };
            prop_assert_eq!(mv, moments_by_functional_equation(&kappa));
        }

        #[test]
        fn variance_adds(a in prop::collection::vec(rational(), 4), b in prop::collection::vec(rational(), 4)) {
            let ma = moments_from_cumulants(&MomentSequence::Exact(a.clone())).unwrap();
            let mb = moments_from_cumulants(&MomentSequence::Exact(b.clone())).unwrap();
            let MomentSequence::Exact(s) = add_conv_moments(&ma, &mb, 4).unwrap() else { unreachable!() };
            let var = |m: &MomentSequence| { let MomentSequence::Exact(v) = m else { unreachable!() }; &v[1] - &v[0] * &v[0] };
            prop_assert_eq!(&s[1] - &s[0] * &s[0], var(&ma) + var(&mb));
        }

        #[test]
        fn semicircle_shift_only_moves_second_cumulant(kappa in prop::collection::vec(rational(), 6), t in rational()) {
            let t = t.abs() + one();
            let m = moments_from_cumulants(&MomentSequence::Exact(kappa.clone())).unwrap();
            let sum = add_conv_moments(&m, &MomentSequence::semicircle(&t, 6), 6).unwrap();
            let MomentSequence::Exact(ks) = cumulants_from_moments(&sum).unwrap() else { unreachable!() };
            for i in 0..6 {
                let expected = if i == 1 { &kappa[i] + &t } else { kappa[i].clone() };
                prop_assert_eq!(&ks[i], &expected);
            }
        }

        #[test]
        fn mult_conv_symmetric(a in prop::collection::vec(rational(), 6), b in prop::collection::vec(rational(), 6)) {
            let ma = MomentSequence::Exact(a);
            let mb = MomentSequence::Exact(b);
            prop_assert_eq!(mult_conv_moments(&ma, &mb, 6).unwrap(), mult_conv_moments(&mb, &ma, 6).unwrap());
            let id = MomentSequence::point_mass(&one(), 6);
            prop_assert_eq!(mult_conv_moments(&id, &mb, 6).unwrap(), mb.clone());
        }
    }
}
