//! Continued-fraction arithmetic: continuants, Gauss-map cylinder endpoints,
//! and exact quadratic-surd values of periodic sequences.
//!
//! Continuants are computed in `u128` and promoted to arbitrary precision on
//! overflow or past length 40, so words up to the enumeration depth cap never
//! error out. Endpoints are available in exact rational form for oracles and
//! order predicates.

use crate::symbolic::Symbol;
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Length beyond which continuants go straight to arbitrary precision.
const BIG_THRESHOLD: usize = 40;

/// Natural log of a positive big integer, accurate to f64 precision.
pub(crate) fn ln_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 53 {
        return x.to_f64().unwrap().ln();
    }
    let shift = bits - 53;
    let top = (x >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// A pair of consecutive continuants, small or big.
#[derive(Debug, Clone)]
pub(crate) enum ContinuantPair {
    Small { q: u128, q_prev: u128 },
    Big { q: BigUint, q_prev: BigUint },
}

impl ContinuantPair {
    fn promote(q: u128, q_prev: u128) -> Self {
        ContinuantPair::Big { q: BigUint::from(q), q_prev: BigUint::from(q_prev) }
    }

    fn step(self, a: u128) -> Self {
        match self {
            ContinuantPair::Small { q, q_prev } => match a.checked_mul(q).and_then(|m| m.checked_add(q_prev)) {
                Some(next) => ContinuantPair::Small { q: next, q_prev: q },
                None => ContinuantPair::promote(q, q_prev).step(a),
            },
            ContinuantPair::Big { q, q_prev } => {
                let next = BigUint::from(a) * &q + q_prev;
                ContinuantPair::Big { q: next, q_prev: q }
            }
        }
    }

    pub(crate) fn q_big(&self) -> BigUint {
        match self {
            ContinuantPair::Small { q, .. } => BigUint::from(*q),
            ContinuantPair::Big { q, .. } => q.clone(),
        }
    }

    pub(crate) fn q_prev_big(&self) -> BigUint {
        match self {
            ContinuantPair::Small { q_prev, .. } => BigUint::from(*q_prev),
            ContinuantPair::Big { q_prev, .. } => q_prev.clone(),
        }
    }
}

/// `(K(a_1..a_n), K(a_1..a_{n-1}))` for the denominator continuants of
/// `[0; a_1, ..., a_n]`, i.e. `K() = 1`, `K(a_1) = a_1`.
pub(crate) fn denominator_continuants(syms: &[Symbol]) -> ContinuantPair {
    let mut pair = if syms.len() > BIG_THRESHOLD {
        ContinuantPair::Big { q: BigUint::one(), q_prev: BigUint::zero() }
    } else {
        ContinuantPair::Small { q: 1, q_prev: 0 }
    };
    for &a in syms {
        pair = pair.step(a as u128);
    }
    pair
}

/// Lebesgue length of the continued-fraction cylinder
/// `{x in (0,1): a_1(x) = a_1, ..., a_n(x) = a_n}`: `1/(q_n (q_n + q_{n-1}))`.
pub fn cylinder_size(syms: &[Symbol]) -> f64 {
    match denominator_continuants(syms) {
        ContinuantPair::Small { q, q_prev } => {
            // q (q + q') stays below 2^127 whenever q < 2^63.
            if q < (1u128 << 63) {
                1.0 / (q as f64 * (q + q_prev) as f64)
            } else {
                (-(ln_u128(q) + ln_u128(q + q_prev))).exp()
            }
        }
        ContinuantPair::Big { q, q_prev } => {
            (-(ln_biguint(&q) + ln_biguint(&(&q + &q_prev)))).exp()
        }
    }
}

fn ln_u128(x: u128) -> f64 {
    if x < (1u128 << 53) {
        (x as f64).ln()
    } else {
        ln_biguint(&BigUint::from(x))
    }
}

/// `ln(1/|I(a_1..a_n)|) = ln(q_n) + ln(q_n + q_{n-1})`, computed without
/// forming the possibly-underflowing size.
pub fn cylinder_neg_ln_size(syms: &[Symbol]) -> f64 {
    match denominator_continuants(syms) {
        ContinuantPair::Small { q, q_prev } => ln_u128(q) + ln_u128(q + q_prev),
        ContinuantPair::Big { q, q_prev } => ln_biguint(&q) + ln_biguint(&(&q + &q_prev)),
    }
}

/// Exact rational endpoints `(lo, hi)` of the cylinder of `syms`. The two
/// endpoint values are the convergent `p_n/q_n` (tail digit at infinity) and
/// the mediant `(p_n + p_{n-1})/(q_n + q_{n-1})` (tail digit 1); which is the
/// left one flips with the parity of `n`.
pub fn cylinder_endpoints_rational(syms: &[Symbol]) -> (BigRational, BigRational) {
    // p-continuants of [0; a_1..a_n] are the denominator continuants of the
    // word with its first symbol dropped.
    let qs = denominator_continuants(syms);
    let ps = denominator_continuants(&syms[1..]);
    let (q, q_prev) = (qs.q_big(), qs.q_prev_big());
    let (p, p_prev) = (ps.q_big(), ps.q_prev_big());
    let a = BigRational::new(BigInt::from(p.clone()), BigInt::from(q.clone()));
    let b = BigRational::new(BigInt::from(p + p_prev), BigInt::from(q + q_prev));
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Endpoints of the cylinder of `syms` as floats. Deep cylinders can collapse
/// to a point (or invert by an ulp) in f64; the result is re-sorted.
pub fn cylinder_endpoints_f64(syms: &[Symbol]) -> (f64, f64) {
    let (lo, hi) = cylinder_endpoints_rational(syms);
    let a = rational_to_f64(&lo);
    let b = rational_to_f64(&hi);
    (a.min(b), a.max(b))
}

pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    let num = r.numer();
    let den = r.denom();
    match (num.to_f64(), den.to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() && d != 0.0 => n / d,
        _ => {
            let sign = if num.is_negative() { -1.0 } else { 1.0 };
            let ln = ln_biguint(num.magnitude()) - ln_biguint(den.magnitude());
            sign * ln.exp()
        }
    }
}

/// Consecutive continuants `(K(w), K(w minus last))` of a word as floats,
/// rescaled together when they overflow f64.
pub(crate) fn continuant_pair_f64(syms: &[Symbol]) -> (f64, f64) {
    match denominator_continuants(syms) {
        ContinuantPair::Small { q, q_prev } => (q as f64, q_prev as f64),
        ContinuantPair::Big { q, q_prev } => {
            let a = q.to_f64().unwrap_or(f64::INFINITY);
            let b = q_prev.to_f64().unwrap_or(f64::INFINITY);
            if a.is_finite() && b.is_finite() {
                (a, b)
            } else {
                // Shift both down; only the ratio matters to callers.
                let shift = q.bits().max(q_prev.bits()).saturating_sub(900);
                ((&q >> shift).to_f64().unwrap(), (&q_prev >> shift).to_f64().unwrap())
            }
        }
    }
}

/// Value of the finite continued fraction `[a_0; a_1, ..., a_k]`, evaluated
/// backwards for stability.
pub fn finite_cf_value(syms: &[Symbol]) -> f64 {
    let mut acc = 0.0_f64;
    for &a in syms.iter().rev() {
        acc = a as f64 + if acc == 0.0 { 0.0 } else { 1.0 / acc };
    }
    acc
}

/// Exact data for the value of the classical potential at a periodic point:
/// the value at a phase whose forward reading is `w = (b_0, ..., b_{n-1})`
/// (purely periodic both ways) is `sqrt(disc) / q` with integer `disc` and
/// `q`.
///
/// Writing `x = [b_0; b_1, ..., b_{n-1}, b_0, ...]` with convergents
/// `h_i / k_i`, the fixed-point equation `x = (h x + h') / (q x + q')` gives
/// `x = (h - q' + sqrt(disc)) / (2q)`, `disc = (q' - h)^2 + 4 q h'`. The
/// backward reading is the Galois conjugate with its sign flipped, so the
/// two-sided value collapses to `x - conj(x) = sqrt(disc) / q`. `disc` is
/// invariant under rotation of the period.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurdValue {
    pub disc: BigUint,
    pub q: BigUint,
}

impl SurdValue {
    pub fn to_f64(&self) -> f64 {
        // sqrt via logs would lose precision; disc fits f64 for desk-scale
        // periods, and the log route covers the rest.
        match (self.disc.to_f64(), self.q.to_f64()) {
            (Some(d), Some(q)) if d.is_finite() && q.is_finite() => d.sqrt() / q,
            _ => (0.5 * ln_biguint(&self.disc) - ln_biguint(&self.q)).exp(),
        }
    }
}

/// Surd value of the periodic sequence whose forward reading from position 0
/// is the rotation `w` (so `θ_0 = w[0]`, `θ_{-1} = w[n-1]`, ...).
pub fn periodic_phase_surd(w: &[Symbol]) -> SurdValue {
    assert!(!w.is_empty());
    // Convergents of [w_0; w_1, ..., w_{n-1}]:
    //   h continuants over the full word, k continuants over the word with
    //   its first symbol dropped.
    let hs = denominator_continuants(w);
    let ks = denominator_continuants(&w[1..]);
    let h = BigInt::from(hs.q_big());
    let h_prev = BigInt::from(hs.q_prev_big());
    let k = BigInt::from(ks.q_big());
    let k_prev = BigInt::from(ks.q_prev_big());
    let diff = &k_prev - &h;
    let disc = (&diff * &diff + BigInt::from(4) * &k * &h_prev)
        .to_biguint()
        .expect("discriminant of a positive fixed point is positive");
    SurdValue { disc, q: k.to_biguint().expect("continuants are positive") }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::FromPrimitive;

    #[test]
    fn cylinder_sizes_match_endpoint_oracle() {
        // Independent oracle: |[0; a_1..a_n] - [0; a_1..a_n + 1]| via exact
        // rational endpoints.
        for syms in [vec![1u8], vec![2], vec![1, 2], vec![2, 2], vec![1, 1, 2], vec![2, 1, 1, 2]] {
            let (lo, hi) = cylinder_endpoints_rational(&syms);
            let oracle = rational_to_f64(&(&hi - &lo));
            let size = cylinder_size(&syms);
            assert!(
                (size - oracle).abs() <= 1e-12 * oracle,
                "size {size} vs oracle {oracle} for {syms:?}"
            );
        }
    }

    #[test]
    fn known_sizes() {
        assert_eq!(cylinder_size(&[1]), 0.5);
        assert!((cylinder_size(&[2]) - 1.0 / 6.0).abs() < 1e-15);
        assert!((cylinder_size(&[1, 2]) - 1.0 / 12.0).abs() < 1e-15);
        assert!((cylinder_size(&[2, 2]) - 1.0 / 35.0).abs() < 1e-15);
    }

    #[test]
    fn known_endpoints() {
        // I(1) = [1/2, 1], I(2) = [1/3, 1/2], I(1,2) = [2/3, 3/4].
        let half = BigRational::from_f64(0.5).unwrap();
        let (lo, hi) = cylinder_endpoints_rational(&[1]);
        assert_eq!(lo, half);
        assert_eq!(hi, BigRational::from_integer(1.into()));
        let (lo, hi) = cylinder_endpoints_rational(&[2]);
        assert_eq!(lo, BigRational::new(1.into(), 3.into()));
        assert_eq!(hi, half);
        let (lo, hi) = cylinder_endpoints_rational(&[1, 2]);
        assert_eq!(lo, BigRational::new(2.into(), 3.into()));
        assert_eq!(hi, BigRational::new(3.into(), 4.into()));
    }

    #[test]
    fn long_words_promote_without_error() {
        let word = vec![200u8; 64];
        let nls = cylinder_neg_ln_size(&word);
        assert!(nls.is_finite() && nls > 0.0);
        // size underflows f64 gracefully toward 0 but never errors
        let s = cylinder_size(&word);
        assert!(s >= 0.0 && s < 1.0);
    }

    #[test]
    fn surd_values_of_period_one() {
        // [overline{1}]: x - conj(x) = sqrt(5); [overline{2}]: sqrt(8).
        let s = periodic_phase_surd(&[1]);
        assert_eq!(s.disc, BigUint::from(5u8));
        assert_eq!(s.q, BigUint::from(1u8));
        let s = periodic_phase_surd(&[2]);
        assert_eq!(s.disc, BigUint::from(8u8));
        assert_eq!(s.q, BigUint::from(1u8));
    }

    #[test]
    fn surd_discriminant_rotation_invariant() {
        let word = [2u8, 2, 1, 1];
        let discs: Vec<BigUint> = (0..word.len())
            .map(|k| {
                let mut rot = word.to_vec();
                rot.rotate_left(k);
                periodic_phase_surd(&rot).disc
            })
            .collect();
        assert!(discs.windows(2).all(|p| p[0] == p[1]));
        assert_eq!(discs[0], BigUint::from(221u32));
    }

    #[test]
    fn finite_cf_value_basics() {
        assert_eq!(finite_cf_value(&[2]), 2.0);
        assert!((finite_cf_value(&[2, 1]) - 3.0).abs() < 1e-15);
        assert!((finite_cf_value(&[0, 2, 1]) - 1.0 / 3.0).abs() < 1e-15);
    }
}
