//! Symbolic realization of Lagrange values: remove the blocks that can carry
//! the maximum of `f` over a complete subshift, pad with a quiet periodic
//! word, insert one maximal block, and verify that the limsup along the
//! nested construction equals the Markov value of the single-insertion
//! sequence.

use crate::error::{Error, Result};
use crate::potential::{markov_value, Potential};
use crate::symbolic::{concat, PeriodicPoint, Symbol, TransitionSystem, Word, WordAlphabet};
use serde::{Deserialize, Serialize};

/// A bi-infinite sequence that is eventually periodic in both directions:
/// `left` repeats toward minus infinity and ends at position -1, `center`
/// occupies `[0, center_len)`, `right` repeats from `center_len` on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventuallyPeriodic {
    pub left: Word,
    pub center: Word,
    pub right: Word,
}

impl EventuallyPeriodic {
    pub fn new(left: Word, center: Word, right: Word, ts: &TransitionSystem) -> Result<Self> {
        for w in [&left, &center, &right] {
            Word::new(w.symbols().to_vec(), ts)?;
        }
        for (a, b) in [
            (left.last(), left.first()),
            (left.last(), center.first()),
            (center.last(), right.first()),
            (right.last(), right.first()),
        ] {
            if !ts.is_transition(a, b) {
                return Err(Error::InadmissibleJunction { a, b, index: 0 });
            }
        }
        Ok(Self { left, center, right })
    }

    pub fn symbol_at(&self, i: i64) -> Symbol {
        if i < 0 {
            let n = self.left.len() as i64;
            let idx = (i % n + n) % n;
            self.left.symbols()[idx as usize]
        } else if (i as usize) < self.center.len() {
            self.center.symbols()[i as usize]
        } else {
            let j = i as usize - self.center.len();
            self.right.symbols()[j % self.right.len()]
        }
    }

    fn window(&self, offset: i64, depth: usize) -> (Vec<Symbol>, Vec<Symbol>) {
        let past: Vec<Symbol> =
            (0..depth).map(|d| self.symbol_at(offset - depth as i64 + d as i64)).collect();
        let future: Vec<Symbol> = (0..depth).map(|d| self.symbol_at(offset + d as i64)).collect();
        (past, future)
    }

    /// Evaluates `f(σ^offset θ)` through a deep certified window; the
    /// midpoint is exact to the window's tail decay.
    pub fn eval_at(&self, pot: &dyn Potential, offset: i64, depth: usize) -> Result<f64> {
        let (past, future) = self.window(offset, depth);
        let iv = pot.bounds(&past, &future)?;
        Ok(0.5 * (iv.lo + iv.hi))
    }

    /// Certified upper bound of `f(σ^offset θ)`.
    pub fn upper_at(&self, pot: &dyn Potential, offset: i64, depth: usize) -> Result<f64> {
        let (past, future) = self.window(offset, depth);
        Ok(pot.bounds(&past, &future)?.hi)
    }

    /// Markov value `sup_n f(σ^n θ)` and the arg-max offset when it falls in
    /// the scanned transition region. The tails contribute their exact
    /// periodic Markov values.
    pub fn markov(
        &self,
        pot: &dyn Potential,
        ts: &TransitionSystem,
        depth: usize,
    ) -> Result<(f64, Option<i64>)> {
        let from = -(2 * self.left.len() as i64);
        let to = self.center.len() as i64 + 2 * self.right.len() as i64;
        let mut best = f64::NEG_INFINITY;
        let mut arg = None;
        for offset in from..to {
            let v = self.eval_at(pot, offset, depth)?;
            if v > best {
                best = v;
                arg = Some(offset);
            }
        }
        let m_left = markov_value(&PeriodicPoint::new(self.left.clone(), 0, ts)?, pot);
        let m_right = markov_value(&PeriodicPoint::new(self.right.clone(), 0, ts)?, pot);
        if m_left > best || m_right > best {
            return Ok((best.max(m_left).max(m_right), None));
        }
        Ok((best, arg))
    }
}

/// Repetitions of the padding block used to certify the insertion value.
const INSERTION_PAD_REPS: usize = 4;

/// The blocks of `B^(2m+1)` that can carry values reaching the certified
/// insertion value, with a certified gap on the remainder alphabet.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MaximizerSet {
    /// Block-grouping radius: blocks are `2m+1` alphabet words, the anchor
    /// block in the middle.
    pub m: usize,
    /// Removed blocks: everything whose certified window bound can reach the
    /// insertion value.
    pub gammas: Vec<Word>,
    /// The block realizing the largest certified insertion value; inserted
    /// by the realization maps.
    pub insertion_block: Word,
    /// Certified lower bound of `f` at the padded insertion.
    pub insertion_lower: f64,
    /// Certified gap: `f` on remainder sequences stays below the insertion
    /// value by at least this.
    pub eta_gap: f64,
    /// Exact maximum over sampled periodic points (a lower bound for the
    /// maximum of `f` over `Σ(B)`).
    pub max_lower: f64,
    /// Certified upper bound of `f` over sequences of remainder blocks.
    pub remainder_upper: f64,
    /// The remainder alphabet `B* = B^(2m+1) - gammas`.
    pub b_star: Vec<Word>,
    /// Padding word: the quietest block (smallest Markov value).
    pub d_word: Word,
}

/// Finds the blocks of `B^(2m+1)` that can carry the maximum of `f` over
/// `Σ(B)` and certifies the separation.
///
/// Every offset of every block is bounded inside every neighbor-block
/// context (a superset of the remainder contexts, hence sound). The removal
/// threshold is the certified value of the padded insertion, so the gap
/// `eta_gap = insertion_lower - remainder_upper` is positive by construction
/// whenever a remainder exists.
pub fn find_maximizers(
    b: &WordAlphabet,
    m: usize,
    pot: &dyn Potential,
    ts: &TransitionSystem,
) -> Result<MaximizerSet> {
    if m < 1 {
        return Err(Error::InvalidParameter("maximizer block radius m must be >= 1".into()));
    }
    let span = 2 * m + 1;
    let base = b.words();
    let n = base.len();
    let block_count = n.pow(span as u32);
    if block_count.saturating_mul(block_count).saturating_mul(block_count) > 40_000_000 {
        return Err(Error::GapInconclusive {
            m,
            reason: format!("{block_count} blocks make the neighbor scan infeasible; lower m"),
        });
    }
    // All (2m+1)-tuples in lexicographic index order.
    let mut blocks: Vec<Word> = Vec::with_capacity(block_count);
    let mut idx = vec![0usize; span];
    loop {
        let parts: Vec<Word> = idx.iter().map(|&i| base[i].clone()).collect();
        blocks.push(concat(&parts, ts)?);
        let mut carry = span;
        while carry > 0 {
            idx[carry - 1] += 1;
            if idx[carry - 1] < n {
                break;
            }
            idx[carry - 1] = 0;
            carry -= 1;
        }
        if carry == 0 {
            break;
        }
    }

    // Exact maximum over periodic concatenations of up to 2m+1 words.
    let mut max_lower = f64::NEG_INFINITY;
    let mut tuple: Vec<usize> = Vec::new();
    max_lower = periodic_scan(base, &mut tuple, span, ts, pot, max_lower)?;

    // Certified upper bound of f over every offset of every block, inside
    // every neighbor-block context.
    let mut his: Vec<f64> = Vec::with_capacity(blocks.len());
    for g in &blocks {
        let mut hi = f64::NEG_INFINITY;
        for u in &blocks {
            for v in &blocks {
                for off in 0..g.len() {
                    let mut past = u.symbols().to_vec();
                    past.extend_from_slice(&g.symbols()[..off]);
                    let mut future = g.symbols()[off..].to_vec();
                    future.extend_from_slice(v.symbols());
                    hi = hi.max(pot.bounds(&past, &future)?.hi);
                }
            }
        }
        his.push(hi);
    }

    // Quiet padding candidate: the block with the smallest Markov value.
    let d_word = blocks
        .iter()
        .min_by(|a, c| {
            let ma = markov_value(&PeriodicPoint::new((*a).clone(), 0, ts).unwrap(), pot);
            let mc = markov_value(&PeriodicPoint::new((*c).clone(), 0, ts).unwrap(), pot);
            ma.total_cmp(&mc)
        })
        .expect("blocks nonempty")
        .clone();
    let mut pad = Vec::new();
    for _ in 0..INSERTION_PAD_REPS {
        pad.extend_from_slice(d_word.symbols());
    }

    // Insertion value: best certified lower bound of f at a padded block
    // offset, over blocks that can plausibly carry the maximum.
    let mut insertion: Option<(usize, f64)> = None;
    let tol = 1e-9 * max_lower.abs().max(1.0);
    for (gi, g) in blocks.iter().enumerate() {
        if his[gi] < max_lower - tol {
            continue;
        }
        let mut best_lo = f64::NEG_INFINITY;
        for off in 0..g.len() {
            let mut past = pad.clone();
            past.extend_from_slice(&g.symbols()[..off]);
            let mut future = g.symbols()[off..].to_vec();
            future.extend_from_slice(&pad);
            best_lo = best_lo.max(pot.bounds(&past, &future)?.lo);
        }
        let better = match insertion {
            None => true,
            Some((_, lo)) => best_lo > lo,
        };
        if better {
            insertion = Some((gi, best_lo));
        }
    }
    let (gamma_idx, insertion_lower) = insertion.ok_or(Error::GapInconclusive {
        m,
        reason: "no block reaches the certified maximum".into(),
    })?;
    let insertion_block = blocks[gamma_idx].clone();

    // Removal: everything whose certified bound can reach the insertion value.
    let mut gammas = Vec::new();
    let mut b_star = Vec::new();
    let mut remainder_upper = f64::NEG_INFINITY;
    for (g, &hi) in blocks.iter().zip(&his) {
        if hi >= insertion_lower {
            gammas.push(g.clone());
        } else {
            remainder_upper = remainder_upper.max(hi);
            b_star.push(g.clone());
        }
    }
    if b_star.is_empty() {
        return Err(Error::GapInconclusive {
            m,
            reason: "every block can reach the insertion value; nothing remains".into(),
        });
    }
    if !b_star.contains(&d_word) {
        return Err(Error::GapInconclusive {
            m,
            reason: "the quiet padding block does not survive the removal".into(),
        });
    }
    let eta_gap = insertion_lower - remainder_upper;
    debug_assert!(eta_gap > 0.0);
    Ok(MaximizerSet {
        m,
        gammas,
        insertion_block,
        insertion_lower,
        eta_gap,
        max_lower,
        remainder_upper,
        b_star,
        d_word,
    })
}

fn periodic_scan(
    base: &[Word],
    tuple: &mut Vec<usize>,
    max_len: usize,
    ts: &TransitionSystem,
    pot: &dyn Potential,
    mut best: f64,
) -> Result<f64> {
    if !tuple.is_empty() {
        let parts: Vec<Word> = tuple.iter().map(|&i| base[i].clone()).collect();
        let period = concat(&parts, ts)?;
        let p = PeriodicPoint::new(period, 0, ts)?;
        best = best.max(markov_value(&p, pot));
    }
    if tuple.len() < max_len {
        for i in 0..base.len() {
            tuple.push(i);
            best = periodic_scan(base, tuple, max_len, ts, pot, best)?;
            tuple.pop();
        }
    }
    Ok(best)
}

/// Options for the realization construction.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RealizeOptions {
    /// Repetitions of the padding word on each side of the inserted block.
    pub pad_reps: usize,
    /// Truncation depth: nested context blocks per side.
    pub tau_depth: usize,
    /// Window depth (symbols) for near-exact evaluation.
    pub eval_depth: usize,
    /// Tolerance of the realization identity.
    pub tolerance: f64,
}

impl Default for RealizeOptions {
    fn default() -> Self {
        Self { pad_reps: 6, tau_depth: 6, eval_depth: 64, tolerance: 1e-9 }
    }
}

/// The realized pair of sequences and the verified identity data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RealizationSpec {
    /// Indices into the remainder alphabet.
    pub x_blocks: Vec<usize>,
    pub d_word: Word,
    pub tau_depth: usize,
    /// Single-insertion sequence: x-periodic tails around the padded block.
    pub theta: EventuallyPeriodic,
    /// Nested-insertion sequence whose limsup realizes the value.
    pub theta_star: EventuallyPeriodic,
    /// Shift realizing the Markov value of `theta`.
    pub n: i64,
    /// `limsup f(σ^k θ*) `, computed exactly on the periodic tail.
    pub lagrange: f64,
    /// `f(σ^n θ) = m(θ)`.
    pub markov_theta: f64,
    /// Window radius around the insertion outside which the gap holds.
    pub n0: i64,
}

/// Builds `θ(x)` and `θ*(x)` for a word over the remainder alphabet and
/// verifies the realization identity `ℓ(θ*) = f(σ^n θ)` and the gap property.
/// A verification failure is an error carrying the offending data: it would
/// falsify the construction.
pub fn realize(
    x_blocks: &[usize],
    ms: &MaximizerSet,
    pot: &dyn Potential,
    ts: &TransitionSystem,
    opts: RealizeOptions,
) -> Result<RealizationSpec> {
    if x_blocks.is_empty() {
        return Err(Error::EmptyCollection("x word"));
    }
    if opts.tau_depth < 2 {
        return Err(Error::InvalidParameter("tau depth must be >= 2".into()));
    }
    if opts.pad_reps < INSERTION_PAD_REPS {
        return Err(Error::InvalidParameter(format!(
            "pad_reps must be >= {INSERTION_PAD_REPS} to inherit the insertion certificate"
        )));
    }
    for &i in x_blocks {
        if i >= ms.b_star.len() {
            return Err(Error::InvalidParameter(format!("x block {i} outside remainder")));
        }
    }
    let gamma = &ms.insertion_block;
    let x_words: Vec<Word> = x_blocks.iter().map(|&i| ms.b_star[i].clone()).collect();
    let x_concat = concat(&x_words, ts)?;
    let pad: Vec<Word> = std::iter::repeat(ms.d_word.clone()).take(opts.pad_reps).collect();
    let mut core_parts = pad.clone();
    core_parts.push(gamma.clone());
    core_parts.extend(pad.clone());
    let core = concat(&core_parts, ts)?;
    let gamma_start = opts.pad_reps * ms.d_word.len();
    let gamma_span = gamma_start as i64..(gamma_start + gamma.len()) as i64;

    let theta = EventuallyPeriodic::new(x_concat.clone(), core.clone(), x_concat.clone(), ts)?;

    // tau_j: j cyclic x-blocks on each side of the core. Reading toward the
    // core from the left, the last block is x[len-1], then x[len-2], ...
    let tau = |j: usize| -> Result<Word> {
        let len = x_words.len();
        let mut parts: Vec<Word> = Vec::new();
        for i in 0..j {
            let d = (j - i) % len;
            parts.push(x_words[(len - d) % len].clone());
        }
        parts.push(core.clone());
        for i in 0..j {
            parts.push(x_words[i % len].clone());
        }
        concat(&parts, ts)
    };
    let t_depth = opts.tau_depth;
    let tau_outer = tau(t_depth)?;
    let mut center_parts: Vec<Word> = Vec::new();
    for j in (1..t_depth).rev() {
        center_parts.push(tau(j)?);
    }
    for j in 1..t_depth {
        center_parts.push(tau(j)?);
    }
    let center = concat(&center_parts, ts)?;
    let theta_star = EventuallyPeriodic::new(tau_outer.clone(), center, tau_outer.clone(), ts)?;

    // limsup of theta_star: exact Markov value of the periodic tail.
    let lagrange = markov_value(&PeriodicPoint::new(tau_outer, 0, ts)?, pot);
    let (markov_theta, arg) = theta.markov(pot, ts, opts.eval_depth)?;
    let n = arg.ok_or_else(|| {
        Error::InvalidParameter("markov of theta attained in the periodic tail".into())
    })?;
    if !gamma_span.contains(&n) {
        return Err(Error::InvalidParameter(format!(
            "markov of theta attained at {n}, outside the inserted block"
        )));
    }
    let diff = (lagrange - markov_theta).abs();
    if diff > opts.tolerance {
        return Err(Error::InvalidParameter(format!(
            "realization identity off by {diff:.3e} at depth {t_depth}"
        )));
    }

    // Gap property: every offset outside the inserted gamma spans stays below
    // the central value by eta_gap. Scan one structural period of theta_star.
    let mut n0 = 0i64;
    let core_center = (gamma_start + gamma.len() / 2) as i64;
    let scan_from = -(theta_star.left.len() as i64);
    let scan_to = (theta_star.center.len() + theta_star.right.len()) as i64;
    for offset in scan_from..scan_to {
        let in_gamma = offset_in_gamma(&theta_star, offset, gamma.symbols());
        let v = theta_star.eval_at(pot, offset, opts.eval_depth)?;
        if !in_gamma && v > markov_theta - ms.eta_gap + opts.tolerance {
            return Err(Error::InvalidParameter(format!(
                "gap violated at offset {offset}: {v} vs {}",
                markov_theta - ms.eta_gap
            )));
        }
    }
    // n0 on theta itself: offsets within eta_gap of the maximum.
    for offset in -(x_concat.len() as i64)..(core.len() + x_concat.len()) as i64 {
        let v = theta.eval_at(pot, offset, opts.eval_depth)?;
        if v > markov_theta - ms.eta_gap {
            n0 = n0.max((offset - core_center).abs());
        }
    }
    Ok(RealizationSpec {
        x_blocks: x_blocks.to_vec(),
        d_word: ms.d_word.clone(),
        tau_depth: t_depth,
        theta,
        theta_star,
        n,
        lagrange,
        markov_theta,
        n0,
    })
}

/// Whether the window anchored at `offset` sits inside an occurrence of the
/// inserted block, checked symbolically around the offset.
fn offset_in_gamma(theta: &EventuallyPeriodic, offset: i64, gamma: &[Symbol]) -> bool {
    let g = gamma.len() as i64;
    for start in (offset - g + 1)..=offset {
        if (0..g).all(|d| theta.symbol_at(start + d) == gamma[d as usize]) {
            return true;
        }
    }
    false
}

/// Lagrange values realized through `realize` over deterministic random
/// x-words. Every value lies in the Lagrange spectrum of `Σ(B)`.
pub fn lagrange_samples(
    ms: &MaximizerSet,
    pot: &dyn Potential,
    ts: &TransitionSystem,
    count: usize,
    seed: u64,
    opts: RealizeOptions,
) -> Result<Vec<f64>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let len = rng.gen_range(2..=5);
        let x: Vec<usize> = (0..len).map(|_| rng.gen_range(0..ms.b_star.len())).collect();
        let spec = realize(&x, ms, pot, ts, opts)?;
        out.push(spec.lagrange);
    }
    Ok(out)
}
