//! Regular-Cantor-set geometry on words: unstable/stable cylinder sizes,
//! scales, partitions at a scale, and measured distortion constants.
//!
//! The unstable size of a word `α` is the length `|I^u(α)|` of its unstable
//! cylinder; the stable size is `|I^s(α^T)|`, the cylinder read backwards.
//! Scales use the natural logarithm throughout (the choice only shifts scales
//! by a constant factor).

use crate::cf;
use crate::error::{Error, Result};
use crate::symbolic::{enumerate_words, Symbol, TransitionSystem, Word, DEFAULT_DEPTH_CAP};
use serde::{Deserialize, Serialize};

/// Geometry assigned to words of a fixed transition system.
///
/// Implementations must guarantee: sizes lie in `(0, 1]`, strictly decrease
/// under extension, and the order predicates are total on distinct same-depth
/// cylinders.
pub trait GeometryModel: Send + Sync {
    /// `|I^u(w)|`.
    fn u_size(&self, w: &Word) -> f64;

    /// `ln(1 / |I^u(w)|)`, computed stably for deep words.
    fn u_neg_ln_size(&self, w: &Word) -> f64 {
        -self.u_size(w).ln()
    }

    /// `|I^s(w^T)|`: the stable size of `w` (backward-itinerary cylinder).
    fn s_size(&self, w: &Word) -> f64;

    fn s_neg_ln_size(&self, w: &Word) -> f64 {
        -self.s_size(w).ln()
    }

    /// Hull endpoints of the unstable cylinder of `w`.
    fn u_interval(&self, w: &Word) -> (f64, f64);

    /// Hull endpoints of the stable cylinder `I^s(w^T)`.
    fn s_interval(&self, w: &Word) -> (f64, f64);

    /// Whether the unstable cylinder of `a` lies left of `b`'s, by left
    /// endpoints. Exact where the model can afford it.
    fn u_strictly_left(&self, a: &Word, b: &Word) -> bool {
        self.u_interval(a).0 < self.u_interval(b).0
    }

    /// Stable-side order on the cylinders `I^s(a^T)`, `I^s(b^T)`.
    fn s_strictly_left(&self, a: &Word, b: &Word) -> bool {
        self.s_interval(a).0 < self.s_interval(b).0
    }
}

/// Unstable scale `r^(u)(w) = floor(ln(1/|I^u(w)|))`.
pub fn u_scale(gm: &dyn GeometryModel, w: &Word) -> i64 {
    self::scale_of_neg_ln(gm.u_neg_ln_size(w))
}

/// Stable scale `r^(s)(w) = floor(ln(1/|I^s(w^T)|))`.
pub fn s_scale(gm: &dyn GeometryModel, w: &Word) -> i64 {
    self::scale_of_neg_ln(gm.s_neg_ln_size(w))
}

fn scale_of_neg_ln(neg_ln: f64) -> i64 {
    neg_ln.floor() as i64
}

/// Gauss-map cylinder geometry: symbols are continued-fraction digits, the
/// unstable size of `w` is the Lebesgue length of its CF cylinder, and the
/// stable size is the length of the cylinder of the reversed word. The
/// symmetric model: `s_size(w) = u_size(w^T)` exactly.
#[derive(Debug, Clone, Default)]
pub struct CfGeometry;

impl GeometryModel for CfGeometry {
    fn u_size(&self, w: &Word) -> f64 {
        cf::cylinder_size(w.symbols())
    }

    fn u_neg_ln_size(&self, w: &Word) -> f64 {
        cf::cylinder_neg_ln_size(w.symbols())
    }

    fn s_size(&self, w: &Word) -> f64 {
        cf::cylinder_size(w.transpose().symbols())
    }

    fn s_neg_ln_size(&self, w: &Word) -> f64 {
        cf::cylinder_neg_ln_size(w.transpose().symbols())
    }

    fn u_interval(&self, w: &Word) -> (f64, f64) {
        cf::cylinder_endpoints_f64(w.symbols())
    }

    fn s_interval(&self, w: &Word) -> (f64, f64) {
        cf::cylinder_endpoints_f64(w.transpose().symbols())
    }

    // CF cylinders of distinct same-length words can share an endpoint; the
    // left-endpoint comparison is exact in rational arithmetic.
    fn u_strictly_left(&self, a: &Word, b: &Word) -> bool {
        cf::cylinder_endpoints_rational(a.symbols()).0
            < cf::cylinder_endpoints_rational(b.symbols()).0
    }

    fn s_strictly_left(&self, a: &Word, b: &Word) -> bool {
        cf::cylinder_endpoints_rational(a.transpose().symbols()).0
            < cf::cylinder_endpoints_rational(b.transpose().symbols()).0
    }
}

/// Exact self-similar geometry: symbol `a` carries a contraction ratio, and
/// the cylinder of a word is the composition of affine branches laid out
/// left-to-right in alphabet order on `[0, 1]` with uniform gaps.
///
/// Zero distortion by construction, so every downstream formula has a closed
/// form; this is the oracle model for tests.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AffineGeometry {
    alphabet: Vec<Symbol>,
    ratios: Vec<f64>,
    /// Stable-side ratios; equal to `ratios` unless configured otherwise.
    s_ratios: Vec<f64>,
    /// Left endpoint of each symbol's branch interval.
    offsets: Vec<f64>,
    s_offsets: Vec<f64>,
}

impl AffineGeometry {
    /// Branch intervals of lengths `ratios[i]` for the i-th alphabet symbol,
    /// flush left/right with equal interior gaps.
    pub fn new(alphabet: Vec<Symbol>, ratios: Vec<f64>) -> Result<Self> {
        let s = ratios.clone();
        Self::with_stable(alphabet, ratios, s)
    }

    pub fn with_stable(
        alphabet: Vec<Symbol>,
        ratios: Vec<f64>,
        s_ratios: Vec<f64>,
    ) -> Result<Self> {
        if alphabet.is_empty() {
            return Err(Error::EmptyCollection("alphabet"));
        }
        if ratios.len() != alphabet.len() || s_ratios.len() != alphabet.len() {
            return Err(Error::InvalidParameter("one ratio per symbol required".into()));
        }
        for &r in ratios.iter().chain(&s_ratios) {
            if !(r > 0.0 && r < 1.0) {
                return Err(Error::InvalidParameter(format!("ratio {r} outside (0,1)")));
            }
        }
        let offsets = layout(&ratios)?;
        let s_offsets = layout(&s_ratios)?;
        Ok(Self { alphabet, ratios, s_ratios, offsets, s_offsets })
    }

    /// Two branches of equal ratio, the standard test model.
    pub fn dyadic(ratio: f64) -> Result<Self> {
        Self::new(vec![1, 2], vec![ratio, ratio])
    }

    fn idx(&self, s: Symbol) -> usize {
        self.alphabet.iter().position(|&a| a == s).expect("symbol outside affine alphabet")
    }

    fn product(&self, w: &Word, ratios: &[f64]) -> f64 {
        w.symbols().iter().map(|&s| ratios[self.idx(s)]).product()
    }

    fn interval(&self, w: &Word, ratios: &[f64], offsets: &[f64]) -> (f64, f64) {
        // I(a w') = phi_a(I(w')) with phi_a(x) = offset_a + ratio_a * x.
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        for &s in w.symbols().iter().rev() {
            let i = self.idx(s);
            lo = offsets[i] + ratios[i] * lo;
            hi = offsets[i] + ratios[i] * hi;
        }
        (lo, hi)
    }
}

fn layout(ratios: &[f64]) -> Result<Vec<f64>> {
    let total: f64 = ratios.iter().sum();
    if total > 1.0 + 1e-12 {
        return Err(Error::InvalidParameter(format!("ratios sum to {total} > 1")));
    }
    let n = ratios.len();
    let gap = if n > 1 { (1.0 - total).max(0.0) / (n - 1) as f64 } else { 0.0 };
    let mut offsets = Vec::with_capacity(n);
    let mut x = 0.0;
    for &r in ratios {
        offsets.push(x);
        x += r + gap;
    }
    Ok(offsets)
}

impl GeometryModel for AffineGeometry {
    fn u_size(&self, w: &Word) -> f64 {
        self.product(w, &self.ratios)
    }

    fn u_neg_ln_size(&self, w: &Word) -> f64 {
        -w.symbols().iter().map(|&s| self.ratios[self.idx(s)].ln()).sum::<f64>()
    }

    fn s_size(&self, w: &Word) -> f64 {
        // Products commute, so reversing the word is immaterial here.
        self.product(w, &self.s_ratios)
    }

    fn s_neg_ln_size(&self, w: &Word) -> f64 {
        -w.symbols().iter().map(|&s| self.s_ratios[self.idx(s)].ln()).sum::<f64>()
    }

    fn u_interval(&self, w: &Word) -> (f64, f64) {
        self.interval(w, &self.ratios, &self.offsets)
    }

    fn s_interval(&self, w: &Word) -> (f64, f64) {
        let t = w.transpose();
        self.interval(&t, &self.s_ratios, &self.s_offsets)
    }
}

/// The geometry of the transposed system: unstable objects become the
/// original stable objects read through transposition, and vice versa.
pub struct TransposedGeometry<'a> {
    inner: &'a dyn GeometryModel,
}

impl<'a> TransposedGeometry<'a> {
    pub fn new(inner: &'a dyn GeometryModel) -> Self {
        Self { inner }
    }
}

impl GeometryModel for TransposedGeometry<'_> {
    fn u_size(&self, w: &Word) -> f64 {
        self.inner.s_size(&w.transpose())
    }

    fn u_neg_ln_size(&self, w: &Word) -> f64 {
        self.inner.s_neg_ln_size(&w.transpose())
    }

    fn s_size(&self, w: &Word) -> f64 {
        self.inner.u_size(&w.transpose())
    }

    fn s_neg_ln_size(&self, w: &Word) -> f64 {
        self.inner.u_neg_ln_size(&w.transpose())
    }

    fn u_interval(&self, w: &Word) -> (f64, f64) {
        self.inner.s_interval(&w.transpose())
    }

    fn s_interval(&self, w: &Word) -> (f64, f64) {
        self.inner.u_interval(&w.transpose())
    }

    fn u_strictly_left(&self, a: &Word, b: &Word) -> bool {
        self.inner.s_strictly_left(&a.transpose(), &b.transpose())
    }

    fn s_strictly_left(&self, a: &Word, b: &Word) -> bool {
        self.inner.u_strictly_left(&a.transpose(), &b.transpose())
    }
}

/// The partition `P_r^(u)`: minimal admissible words whose unstable scale
/// first reaches `r`. No word is a prefix of another, and the cylinders cover
/// the limit set.
pub fn partition_at_scale(
    r: i64,
    ts: &TransitionSystem,
    gm: &dyn GeometryModel,
) -> Result<Vec<Word>> {
    if r < 0 {
        return Err(Error::InvalidParameter(format!("scale r = {r} must be >= 0")));
    }
    enumerate_words(ts, |_| true, |w| u_scale(gm, w) >= r, DEFAULT_DEPTH_CAP)
}

/// Measured distortion constants of a geometry on a system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryConstants {
    /// Bounded-distortion constant: every split ratio
    /// `u_size(ab) / (u_size(a) u_size(b))` lies in `[e^{-c1}, e^{c1}]`.
    pub c1: f64,
    /// Stable/unstable comparability: `|ln(|I^u(a)| / |I^s(a)|)| <= c2`.
    pub c2: f64,
    /// Submultiplicativity padding length
    /// `c3 = max(0, ceil(ln(e^{2 c1} max_a |I^u_a|) / ln mu))`.
    pub c3: u32,
    /// Expansion lower bound `mu = min` over one-symbol extensions of
    /// `u_size(w) / u_size(wa) > 1`.
    pub mu: f64,
    /// Word-length depth the constants were measured at.
    pub depth: usize,
}

/// Scans all admissible words up to `depth` symbols and measures `c1`, `c2`,
/// `mu`, and the derived `c3`. The constants are measured, not proved: they
/// certify the scanned range and are asserted stable as depth grows.
pub fn measure_constants(
    ts: &TransitionSystem,
    gm: &dyn GeometryModel,
    depth: usize,
) -> Result<GeometryConstants> {
    if depth < 2 {
        return Err(Error::InvalidParameter("constant measurement needs depth >= 2".into()));
    }
    let words = enumerate_words(ts, |_| true, |w| w.len() >= depth, depth + 1)?;
    // Collect every admissible word of length <= depth via prefixes.
    let mut c1 = 0.0_f64;
    let mut c2 = 0.0_f64;
    let mut mu = f64::INFINITY;
    let mut max_single = 0.0_f64;
    for &a in ts.alphabet() {
        max_single = max_single.max(gm.u_size(&Word::from_unchecked(vec![a])));
    }
    let mut seen = std::collections::HashSet::new();
    for w in &words {
        for len in 1..=w.len() {
            let prefix = &w.symbols()[..len];
            if !seen.insert(prefix.to_vec()) {
                continue;
            }
            let pw = Word::from_unchecked(prefix.to_vec());
            let nls = gm.u_neg_ln_size(&pw);
            // c2 compares |I^u(alpha)| with |I^s(alpha)| = s_size(alpha^T).
            let s_nls = gm.s_neg_ln_size(&pw.transpose());
            c2 = c2.max((nls - s_nls).abs());
            // c1 over all splits of the prefix.
            for cut in 1..len {
                let left = Word::from_unchecked(prefix[..cut].to_vec());
                let right = Word::from_unchecked(prefix[cut..].to_vec());
                let ratio_ln =
                    gm.u_neg_ln_size(&left) + gm.u_neg_ln_size(&right) - nls;
                c1 = c1.max(ratio_ln.abs());
            }
            // One-symbol expansion factor.
            if len >= 2 {
                let parent = Word::from_unchecked(prefix[..len - 1].to_vec());
                let expansion = (nls - gm.u_neg_ln_size(&parent)).exp();
                mu = mu.min(expansion);
            }
        }
    }
    if !mu.is_finite() || mu <= 1.0 {
        return Err(Error::InvalidParameter(format!("measured expansion mu = {mu} is not > 1")));
    }
    let raw = ((2.0 * c1).exp() * max_single).ln() / mu.ln();
    let c3 = if raw <= 0.0 { 0 } else { raw.ceil() as u32 };
    Ok(GeometryConstants { c1, c2, c3, mu, depth })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_shift() -> TransitionSystem {
        TransitionSystem::full_shift_n(2).unwrap()
    }

    fn w(syms: &[Symbol], ts: &TransitionSystem) -> Word {
        Word::new(syms.to_vec(), ts).unwrap()
    }

    #[test]
    fn cf_scales() {
        let ts = two_shift();
        let gm = CfGeometry;
        assert_eq!(u_scale(&gm, &w(&[1], &ts)), 0); // floor(ln 2)
        assert_eq!(u_scale(&gm, &w(&[2], &ts)), 1); // floor(ln 6)
        assert_eq!(u_scale(&gm, &w(&[2, 2], &ts)), 3); // floor(ln 35)
    }

    #[test]
    fn partition_scale_zero_is_single_symbols() {
        let ts = two_shift();
        let gm = CfGeometry;
        let p0 = partition_at_scale(0, &ts, &gm).unwrap();
        assert_eq!(p0, vec![w(&[1], &ts), w(&[2], &ts)]);
    }

    #[test]
    fn partition_scale_two_hand_enumeration() {
        let ts = two_shift();
        let gm = CfGeometry;
        let p2 = partition_at_scale(2, &ts, &gm).unwrap();
        let expect: Vec<Word> = [
            vec![1, 1, 1],
            vec![1, 1, 2],
            vec![1, 2],
            vec![2, 1],
            vec![2, 2],
        ]
        .iter()
        .map(|s| w(s, &ts))
        .collect();
        assert_eq!(p2.len(), 5);
        let mut got = p2.clone();
        got.sort();
        let mut exp = expect.clone();
        exp.sort();
        assert_eq!(got, exp);
        // Sizes from the spec'd hand enumeration.
        let sizes: Vec<f64> = exp.iter().map(|word| gm.u_size(word)).collect();
        let expected_sizes = [1.0 / 15.0, 1.0 / 35.0, 1.0 / 12.0, 1.0 / 15.0, 1.0 / 35.0];
        for (s, e) in sizes.iter().zip(expected_sizes) {
            assert!((s - e).abs() < 1e-15);
        }
    }

    #[test]
    fn partition_no_word_is_prefix_of_another() {
        let ts = two_shift();
        let gm = CfGeometry;
        let p = partition_at_scale(4, &ts, &gm).unwrap();
        for a in &p {
            for b in &p {
                if a != b {
                    assert!(!b.symbols().starts_with(a.symbols()));
                }
            }
        }
    }

    #[test]
    fn partition_covers_every_itinerary() {
        // Cylinders of P_r have disjoint interiors, and every deep admissible
        // word has exactly one P_r member as a prefix, so every infinite
        // itinerary's limit point is covered.
        let ts = two_shift();
        let gm = CfGeometry;
        for r in [1i64, 2, 3] {
            let p = partition_at_scale(r, &ts, &gm).unwrap();
            let mut ivals: Vec<(f64, f64)> = p.iter().map(|word| gm.u_interval(word)).collect();
            ivals.sort_by(|x, y| x.0.total_cmp(&y.0));
            for pair in ivals.windows(2) {
                assert!(pair[0].1 <= pair[1].0 + 1e-12, "overlapping interiors");
            }
            let deep = enumerate_words(&ts, |_| true, |w| w.len() >= 12, 13).unwrap();
            for w in deep {
                let covering: Vec<&Word> =
                    p.iter().filter(|c| w.symbols().starts_with(c.symbols())).collect();
                assert_eq!(covering.len(), 1, "word {w} covered {} times", covering.len());
            }
        }
    }

    #[test]
    fn affine_partition_ratio_quarter() {
        let ts = two_shift();
        let gm = AffineGeometry::dyadic(0.25).unwrap();
        // Each length-2 word has size 1/16, scale floor(ln 16) = 2; parents
        // have scale floor(ln 4) = 1.
        let p2 = partition_at_scale(2, &ts, &gm).unwrap();
        assert_eq!(p2.len(), 4);
        assert!(p2.iter().all(|word| word.len() == 2));
    }

    #[test]
    fn affine_constants_are_exact() {
        let ts = two_shift();
        let gm = AffineGeometry::dyadic(1.0 / 3.0).unwrap();
        let c = measure_constants(&ts, &gm, 6).unwrap();
        assert!(c.c1.abs() < 1e-12, "affine c1 = {}", c.c1);
        assert!(c.c2.abs() < 1e-12);
        assert_eq!(c.c3, 0);
        assert!((c.mu - 3.0).abs() < 1e-9);
    }

    #[test]
    fn cf_constants_bound_all_ratios() {
        let ts = two_shift();
        let gm = CfGeometry;
        let c = measure_constants(&ts, &gm, 8).unwrap();
        assert!(c.c1 > 0.0 && c.c1 < 1.0, "c1 = {}", c.c1);
        // Symmetric model: stable size of alpha^T equals unstable of alpha.
        assert!(c.c2.abs() < 1e-12, "c2 = {}", c.c2);
        assert!(c.mu > 2.0);
        // Spot-check quasi-multiplicativity with the measured constant.
        for (a, b) in [(vec![1], vec![1]), (vec![2], vec![1, 1]), (vec![1, 2], vec![2, 1])] {
            let wa = w(&a, &ts);
            let wb = w(&b, &ts);
            let mut joined = a.clone();
            joined.extend(&b);
            let wj = w(&joined, &ts);
            let ratio = gm.u_size(&wj) / (gm.u_size(&wa) * gm.u_size(&wb));
            assert!(ratio.ln().abs() <= c.c1 + 1e-12);
        }
    }

    #[test]
    fn cf_interval_order_examples() {
        let ts = two_shift();
        let gm = CfGeometry;
        // I(2,1) < I(2,2) < I(1,2) by left endpoints.
        let w21 = w(&[2, 1], &ts);
        let w22 = w(&[2, 2], &ts);
        let w12 = w(&[1, 2], &ts);
        assert!(gm.u_strictly_left(&w21, &w22));
        assert!(gm.u_strictly_left(&w22, &w12));
        assert!(!gm.u_strictly_left(&w12, &w21));
    }

    #[test]
    fn transposed_geometry_roundtrip() {
        let ts = two_shift();
        let gm = CfGeometry;
        let tgm = TransposedGeometry::new(&gm);
        let word = w(&[1, 2, 2], &ts);
        // Transposed unstable = original stable of the transpose.
        assert_eq!(tgm.u_size(&word), gm.s_size(&word.transpose()));
        assert_eq!(tgm.s_size(&word), gm.u_size(&word.transpose()));
    }

    #[test]
    fn monotone_under_extension() {
        let ts = two_shift();
        let gm = CfGeometry;
        let words = enumerate_words(&ts, |_| true, |w| w.len() >= 6, 8).unwrap();
        for word in words {
            for len in 2..=word.len() {
                let parent = Word::new(word.symbols()[..len - 1].to_vec(), &ts).unwrap();
                let child = Word::new(word.symbols()[..len].to_vec(), &ts).unwrap();
                assert!(gm.u_size(&child) < gm.u_size(&parent));
            }
        }
    }
}
