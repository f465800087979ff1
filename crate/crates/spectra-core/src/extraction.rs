//! Extraction of a framed complete subshift inside a sublevel set, with
//! independent containment certification.
//!
//! The pipeline: certified base cylinders at a base scale, a pruned pool of
//! k-block concatenations, good-position combinatorics, a frame of repeated
//! block pairs, a cut between two matching frame positions, and finally a
//! window-by-window certificate that every bi-infinite concatenation of the
//! extracted words stays below `t - delta`.
//!
//! The theorem-scale constants guarantee existence; at desk scale the
//! pipeline accepts user-sized parameters and relies entirely on the final
//! certification for soundness.

use crate::dimension::{
    compute_covering_table, estimate_du, moran_dimension, DimensionEstimate,
};
use crate::error::{Error, Result};
use crate::geometry::{measure_constants, GeometryConstants, GeometryModel};

use crate::potential::{certify_monotonicity, MonotonicityVerdict, Potential};
use crate::sublevel::{MeetsVerdict, SearchBudget, SublevelOracle};
use crate::symbolic::{
    check_complete_subshift, concat, AlphabetKind, TransitionSystem, Word, WordAlphabet,
};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Parameters of one extraction run. `paper_*` helpers compute the
/// theorem-scale values; the defaults are desk-scale.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtractionParams {
    pub t: f64,
    /// Target dimension loss in (0,1).
    pub eta: f64,
    /// Defaults to `eta / 100`.
    pub tau: f64,
    /// Base scale for the starting alphabet.
    pub r0: i64,
    /// Number of blocks per pool word.
    pub k: usize,
    /// Number of frame positions.
    pub frame_len: usize,
    /// Minimum gap between frame positions, in blocks.
    pub spacing: usize,
    /// Fraction of positions that must be good for an excellent word.
    pub good_threshold: f64,
    /// Continue with the whole pool when no word passes the threshold
    /// (flagged non-paper mode).
    pub allow_lowered_threshold: bool,
    /// Membership search budget level.
    pub budget_level: u32,
    /// Cap on the concatenation pool size.
    pub pool_cap: usize,
    /// Deepest scale used for the dimension bracket.
    pub du_r_max: i64,
    /// Depth for measuring distortion and monotonicity constants.
    pub constants_depth: usize,
}

impl ExtractionParams {
    pub fn desk(t: f64, eta: f64) -> Self {
        Self {
            t,
            eta,
            tau: eta / 100.0,
            r0: 4,
            k: 6,
            frame_len: 2,
            spacing: 3,
            good_threshold: 0.9,
            allow_lowered_threshold: false,
            budget_level: 6,
            pool_cap: 200_000,
            du_r_max: 12,
            constants_depth: 8,
        }
    }

    /// Theorem-scale block count `k = 8 N0^2 ceil(2/tau)`.
    pub fn paper_k(n0: usize, tau: f64) -> u128 {
        8 * (n0 as u128).pow(2) * (2.0 / tau).ceil() as u128
    }

    /// Theorem-scale frame length `3 N0^2`.
    pub fn paper_frame_len(n0: usize) -> u128 {
        3 * (n0 as u128).pow(2)
    }

    /// Theorem-scale spacing `2 ceil(2/tau)`.
    pub fn paper_spacing(tau: f64) -> u128 {
        2 * (2.0 / tau).ceil() as u128
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(Error::InvalidParameter(format!("eta = {} outside (0,1)", self.eta)));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::InvalidParameter(format!("tau = {} outside (0,1)", self.tau)));
        }
        if self.k < 2 {
            return Err(Error::InvalidParameter("k must be >= 2".into()));
        }
        if self.r0 < 1 {
            return Err(Error::InvalidParameter("r0 must be >= 1".into()));
        }
        if self.frame_len < 2 {
            return Err(Error::InvalidParameter("frame length must be >= 2".into()));
        }
        if self.spacing < 1 || self.spacing + 1 > self.k {
            return Err(Error::InvalidParameter("spacing must fit inside k blocks".into()));
        }
        Ok(())
    }
}

/// A pool word: `k` blocks drawn from the base alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockWord {
    /// Indices into the base alphabet.
    pub blocks: Vec<u32>,
    /// The concatenated symbols.
    pub word: Word,
}

/// The pool of admissible k-block concatenations not certified outside the
/// sublevel set, with the certified-yes subset marked.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockPool {
    pub b0: Vec<Word>,
    pub k: usize,
    pub words: Vec<BlockWord>,
    /// Parallel to `words`: whether the concatenation carries a periodic
    /// witness inside the sublevel set.
    pub certified: Vec<bool>,
}

impl BlockPool {
    pub fn lower_count(&self) -> usize {
        self.certified.iter().filter(|&&c| c).count()
    }
}

/// The certified base cylinders at scale `r0`: `B0 = C_u(t, r0)` restricted
/// to its certified-yes bracket, together with `N0`.
pub fn base_alphabet(
    t: f64,
    r0: i64,
    ts: &TransitionSystem,
    gm: &dyn GeometryModel,
    pot: &dyn Potential,
    budget: SearchBudget,
) -> Result<(Vec<Word>, usize)> {
    let table = compute_covering_table(t, r0, ts, gm, pot, budget, true)?;
    let words = table.row(r0).yes_words;
    if words.is_empty() {
        return Err(Error::ExtractionImpossible {
            stage: "base_alphabet",
            reason: format!("no certified cylinders at scale {r0} for t = {t}"),
        });
    }
    let n0 = words.len();
    Ok((words, n0))
}

/// All admissible k-fold concatenations of base words that are not certified
/// outside the sublevel set. Certified-no prefixes are never extended.
pub fn build_concatenation_pool(
    b0: &[Word],
    k: usize,
    ts: &TransitionSystem,
    oracle: &SublevelOracle<'_>,
    pool_cap: usize,
) -> Result<BlockPool> {
    if b0.is_empty() {
        return Err(Error::EmptyCollection("base alphabet"));
    }
    let mut words = Vec::new();
    let mut certified = Vec::new();
    let root = oracle.root_states();
    let mut blocks: Vec<u32> = Vec::with_capacity(k);
    let mut syms: Vec<u8> = Vec::new();
    build_pool_rec(
        b0,
        k,
        ts,
        oracle,
        pool_cap,
        &mut blocks,
        &mut syms,
        root.as_ref().cloned(),
        &mut words,
        &mut certified,
    )?;
    Ok(BlockPool { b0: b0.to_vec(), k, words, certified })
}

#[allow(clippy::too_many_arguments)]
fn build_pool_rec(
    b0: &[Word],
    k: usize,
    ts: &TransitionSystem,
    oracle: &SublevelOracle<'_>,
    pool_cap: usize,
    blocks: &mut Vec<u32>,
    syms: &mut Vec<u8>,
    states: Option<crate::sublevel::StateSet>,
    words: &mut Vec<BlockWord>,
    certified: &mut Vec<bool>,
) -> Result<()> {
    if blocks.len() == k {
        let w = Word::from_unchecked(syms.clone());
        match oracle.verdict_with_embed(&w, states.as_ref().map(|_| true))? {
            MeetsVerdict::NoCertified => {}
            verdict => {
                if words.len() >= pool_cap {
                    return Err(Error::PoolCapExceeded { cap: pool_cap });
                }
                words.push(BlockWord { blocks: blocks.clone(), word: w });
                certified.push(verdict.is_yes());
            }
        }
        return Ok(());
    }
    for (i, b) in b0.iter().enumerate() {
        if let Some(&last) = syms.last() {
            if !ts.is_transition(last, b.first()) {
                continue;
            }
        }
        // Step the graph states through the block; emptiness certifies that
        // no sublevel sequence extends this prefix.
        let mut next_states = states.clone();
        let mut dead = false;
        if let Some(s) = &mut next_states {
            for &sym in b.symbols() {
                *s = oracle.step_states(s, sym);
                if s.is_empty() {
                    dead = true;
                    break;
                }
            }
        }
        if dead {
            continue;
        }
        blocks.push(i as u32);
        let base_len = syms.len();
        syms.extend_from_slice(b.symbols());
        build_pool_rec(b0, k, ts, oracle, pool_cap, blocks, syms, next_states, words, certified)?;
        syms.truncate(base_len);
        blocks.pop();
    }
    Ok(())
}

/// Right-good, left-good, and good positions (1-based) of one pool word.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoodPositionReport {
    pub right_good: Vec<usize>,
    pub left_good: Vec<usize>,
    pub good: Vec<usize>,
}

/// Precomputed group extrema for good-position queries over a pool.
///
/// Position `j` of a word is right-good when the pool contains words sharing
/// blocks `1..j-1` whose j-th block's unstable cylinder lies strictly left,
/// and strictly right, of the word's; left-good mirrors this with shared
/// suffix and stable-side order. Flanking words are drawn from the whole
/// (upper) pool.
pub struct GoodPositionIndex {
    k: usize,
    u_rank: Vec<usize>,
    s_rank: Vec<usize>,
    /// Per position `j` (0-based), extrema of `u_rank` over each prefix group.
    prefix_extrema: Vec<HashMap<Vec<u32>, (usize, usize)>>,
    /// Per position `j` (0-based), extrema of `s_rank` over each suffix group.
    suffix_extrema: Vec<HashMap<Vec<u32>, (usize, usize)>>,
}

impl GoodPositionIndex {
    pub fn new(pool: &BlockPool, gm: &dyn GeometryModel) -> Self {
        let n = pool.b0.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            if gm.u_strictly_left(&pool.b0[a], &pool.b0[b]) {
                std::cmp::Ordering::Less
            } else if gm.u_strictly_left(&pool.b0[b], &pool.b0[a]) {
                std::cmp::Ordering::Greater
            } else {
                std::cmp::Ordering::Equal
            }
        });
        let mut u_rank = vec![0usize; n];
        for (rank, &i) in order.iter().enumerate() {
            u_rank[i] = rank;
        }
        let mut s_order: Vec<usize> = (0..n).collect();
        s_order.sort_by(|&a, &b| {
            if gm.s_strictly_left(&pool.b0[a], &pool.b0[b]) {
                std::cmp::Ordering::Less
            } else if gm.s_strictly_left(&pool.b0[b], &pool.b0[a]) {
                std::cmp::Ordering::Greater
            } else {
                std::cmp::Ordering::Equal
            }
        });
        let mut s_rank = vec![0usize; n];
        for (rank, &i) in s_order.iter().enumerate() {
            s_rank[i] = rank;
        }

        let k = pool.k;
        let mut prefix_extrema = vec![HashMap::new(); k];
        let mut suffix_extrema = vec![HashMap::new(); k];
        for bw in &pool.words {
            for j in 0..k {
                let pr = u_rank[bw.blocks[j] as usize];
                let entry = prefix_extrema[j]
                    .entry(bw.blocks[..j].to_vec())
                    .or_insert((pr, pr));
                entry.0 = entry.0.min(pr);
                entry.1 = entry.1.max(pr);
                let sr = s_rank[bw.blocks[j] as usize];
                let entry = suffix_extrema[j]
                    .entry(bw.blocks[j + 1..].to_vec())
                    .or_insert((sr, sr));
                entry.0 = entry.0.min(sr);
                entry.1 = entry.1.max(sr);
            }
        }
        Self { k, u_rank, s_rank, prefix_extrema, suffix_extrema }
    }

    pub fn report(&self, bw: &BlockWord) -> GoodPositionReport {
        let mut right_good = Vec::new();
        let mut left_good = Vec::new();
        for j in 0..self.k {
            let pr = self.u_rank[bw.blocks[j] as usize];
            if let Some(&(min, max)) = self.prefix_extrema[j].get(&bw.blocks[..j].to_vec()) {
                if min < pr && pr < max {
                    right_good.push(j + 1);
                }
            }
            let sr = self.s_rank[bw.blocks[j] as usize];
            if let Some(&(min, max)) = self.suffix_extrema[j].get(&bw.blocks[j + 1..].to_vec()) {
                if min < sr && sr < max {
                    left_good.push(j + 1);
                }
            }
        }
        let good: Vec<usize> =
            right_good.iter().copied().filter(|j| left_good.contains(j)).collect();
        GoodPositionReport { right_good, left_good, good }
    }
}

/// Good positions of one pool word against the whole pool.
pub fn good_positions(
    bw: &BlockWord,
    pool: &BlockPool,
    gm: &dyn GeometryModel,
) -> GoodPositionReport {
    GoodPositionIndex::new(pool, gm).report(bw)
}

/// Pool indices whose number of good positions reaches `threshold * k`, and
/// the excellent fraction of the pool.
pub fn filter_excellent(
    pool: &BlockPool,
    index: &GoodPositionIndex,
    threshold: f64,
) -> (Vec<usize>, f64) {
    let need = threshold * pool.k as f64 - 1e-9;
    let excellent: Vec<usize> = (0..pool.words.len())
        .filter(|&i| index.report(&pool.words[i]).good.len() as f64 >= need)
        .collect();
    let fraction =
        if pool.words.is_empty() { 0.0 } else { excellent.len() as f64 / pool.words.len() as f64 };
    (excellent, fraction)
}

/// A frame: positions with fixed block pairs shared by the word set `X`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Frame {
    /// 1-based block positions, strictly increasing with the requested
    /// spacing; each position `j` fixes the pair at `(j, j+1)`.
    pub positions: Vec<usize>,
    /// Fixed block-index pairs, parallel to `positions`.
    pub pairs: Vec<(u32, u32)>,
    /// Pool indices of the words agreeing with the frame at good positions.
    pub x_set: Vec<usize>,
}

/// Finds frame positions and block pairs maximizing the surviving set.
///
/// For two positions the search is exhaustive over positions and pairs,
/// constrained so the pairs match (which the cut requires). For longer
/// frames a greedy frequency search picks one position at a time.
pub fn find_frame(
    pool: &BlockPool,
    excellent: &[usize],
    index: &GoodPositionIndex,
    frame_len: usize,
    spacing: usize,
    require_good: bool,
) -> Result<Frame> {
    if excellent.is_empty() {
        return Err(Error::ExtractionImpossible {
            stage: "find_frame",
            reason: "no excellent words".into(),
        });
    }
    let k = pool.k;
    if frame_len == 2 {
        // Exhaustive search over (j1, j2, pair) with matching pairs.
        let mut best: Option<(usize, usize, (u32, u32), Vec<usize>)> = None;
        for j1 in 1..k {
            for j2 in (j1 + spacing)..k {
                let mut groups: HashMap<(u32, u32), Vec<usize>> = HashMap::new();
                for &i in excellent {
                    let bw = &pool.words[i];
                    let p1 = (bw.blocks[j1 - 1], bw.blocks[j1]);
                    let p2 = (bw.blocks[j2 - 1], bw.blocks[j2]);
                    if p1 != p2 {
                        continue;
                    }
                    let rep = index.report(bw);
                    if !require_good
                        || [j1, j1 + 1, j2, j2 + 1].iter().all(|p| rep.good.contains(p))
                    {
                        groups.entry(p1).or_default().push(i);
                    }
                }
                let mut keys: Vec<(u32, u32)> = groups.keys().copied().collect();
                keys.sort_unstable();
                for key in keys {
                    let v = &groups[&key];
                    let better = match &best {
                        None => true,
                        Some((_, _, _, bx)) => v.len() > bx.len(),
                    };
                    if better {
                        best = Some((j1, j2, key, v.clone()));
                    }
                }
            }
        }
        let (j1, j2, pair, x_set) = best.ok_or(Error::ExtractionImpossible {
            stage: "find_frame",
            reason: "no position pair with matching block pairs".into(),
        })?;
        return Ok(Frame { positions: vec![j1, j2], pairs: vec![pair, pair], x_set });
    }

    // Greedy frequency search for longer frames.
    let mut positions: Vec<usize> = Vec::new();
    let mut pairs: Vec<(u32, u32)> = Vec::new();
    let mut survivors: Vec<usize> = excellent.to_vec();
    for _ in 0..frame_len {
        let mut best: Option<(usize, (u32, u32), Vec<usize>)> = None;
        for j in 1..k {
            if positions.iter().any(|&p| j.abs_diff(p) < spacing) {
                continue;
            }
            let mut groups: HashMap<(u32, u32), Vec<usize>> = HashMap::new();
            for &i in &survivors {
                let bw = &pool.words[i];
                let rep = index.report(bw);
                if !require_good || (rep.good.contains(&j) && rep.good.contains(&(j + 1))) {
                    groups
                        .entry((bw.blocks[j - 1], bw.blocks[j]))
                        .or_default()
                        .push(i);
                }
            }
            let mut keys: Vec<(u32, u32)> = groups.keys().copied().collect();
            keys.sort_unstable();
            for key in keys {
                let v = &groups[&key];
                let better = match &best {
                    None => true,
                    Some((_, _, bx)) => v.len() > bx.len(),
                };
                if better {
                    best = Some((j, key, v.clone()));
                }
            }
        }
        let (j, pair, surv) = best.ok_or(Error::ExtractionImpossible {
            stage: "find_frame",
            reason: "greedy frame search exhausted positions".into(),
        })?;
        positions.push(j);
        pairs.push(pair);
        survivors = surv;
    }
    let mut order: Vec<usize> = (0..positions.len()).collect();
    order.sort_by_key(|&i| positions[i]);
    let positions: Vec<usize> = order.iter().map(|&i| positions[i]).collect();
    let pairs: Vec<(u32, u32)> = order.iter().map(|&i| pairs[i]).collect();
    Ok(Frame { positions, pairs, x_set: survivors })
}

/// The result of cutting the frame: the framed alphabet and the chosen cut.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CutResult {
    pub b: WordAlphabet,
    /// Block decompositions of the alphabet words.
    pub block_lists: Vec<Vec<u32>>,
    pub gamma1: Word,
    pub gamma2: Word,
    /// The chosen frame positions (1-based block positions).
    pub p0: usize,
    pub q0: usize,
}

/// Cuts the frame between two positions with equal block pairs, maximizing
/// the cardinality density `ln #B / (j_q - j_p)`; ties break toward the
/// smaller left position.
pub fn cut_frame(pool: &BlockPool, frame: &Frame, ts: &TransitionSystem) -> Result<CutResult> {
    let mut best: Option<(usize, usize, f64, (u32, u32))> = None;
    for a in 0..frame.positions.len() {
        for b in (a + 1)..frame.positions.len() {
            if frame.pairs[a] != frame.pairs[b] {
                continue;
            }
            let (jp, jq) = (frame.positions[a], frame.positions[b]);
            let mut tuples: Vec<&[u32]> = frame
                .x_set
                .iter()
                .map(|&i| &pool.words[i].blocks[jp..jq])
                .collect();
            tuples.sort_unstable();
            tuples.dedup();
            let score = (tuples.len() as f64).ln() / (jq - jp) as f64;
            let better = match best {
                None => true,
                Some((bp, _, bs, _)) => score > bs + 1e-15 || (score > bs - 1e-15 && jp < bp),
            };
            if better {
                best = Some((jp, jq, score, frame.pairs[a]));
            }
        }
    }
    let (jp, jq, _, pair) = best.ok_or(Error::NoMatchingFrame)?;
    let mut tuples: Vec<Vec<u32>> =
        frame.x_set.iter().map(|&i| pool.words[i].blocks[jp..jq].to_vec()).collect();
    tuples.sort_unstable();
    tuples.dedup();
    let words: Vec<Word> = tuples
        .iter()
        .map(|tu| {
            let parts: Vec<Word> = tu.iter().map(|&bi| pool.b0[bi as usize].clone()).collect();
            concat(&parts, ts)
        })
        .collect::<Result<_>>()?;
    let gamma1 = pool.b0[pair.1 as usize].clone();
    let gamma2 = pool.b0[pair.0 as usize].clone();
    let b = check_complete_subshift(&words, ts, Some((gamma1.len(), gamma2.len())))?;
    debug_assert!(matches!(b.kind(), AlphabetKind::Framed { .. }));
    // keep block lists aligned with the sorted word order of the alphabet
    let mut tagged: Vec<(Word, Vec<u32>)> = words.into_iter().zip(tuples).collect();
    tagged.sort_by(|x, y| x.0.cmp(&y.0));
    let block_lists = tagged.into_iter().map(|(_, t)| t).collect();
    Ok(CutResult { b, block_lists, gamma1, gamma2, p0: jp, q0: jq })
}

/// A successful containment certificate: `Σ(B) ⊂ Σ_{t-delta}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Containment {
    pub delta: f64,
    /// Largest certified window bound encountered.
    pub worst_bound: f64,
    /// Human-readable locator of the worst window.
    pub worst_window: String,
    /// The four theorem-formula components, from the measured separation
    /// constant; informational (the empirical `delta` is authoritative).
    pub delta_components: [f64; 4],
}

/// Branch-and-bound entry: one shift of one alphabet word, with explicit
/// neighbor words on each side. Expanding the context only tightens the
/// certified bound, so the queue maximum always dominates every bi-infinite
/// concatenation.
#[derive(Clone, PartialEq)]
struct CertWindow {
    hi: f64,
    word: usize,
    offset: usize,
    /// Context words, innermost first.
    past_ctx: Vec<usize>,
    fut_ctx: Vec<usize>,
    past_syms: usize,
    fut_syms: usize,
}

impl Eq for CertWindow {}

impl Ord for CertWindow {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.hi
            .total_cmp(&other.hi)
            .then_with(|| other.word.cmp(&self.word))
            .then_with(|| other.offset.cmp(&self.offset))
            .then_with(|| other.past_ctx.cmp(&self.past_ctx))
            .then_with(|| other.fut_ctx.cmp(&self.fut_ctx))
    }
}

impl PartialOrd for CertWindow {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Explicit-context symbol span at which a window stops being refined.
const CERT_CONTEXT_SYMS: usize = 48;
/// Cap on branch-and-bound expansions before accepting the current bound.
const CERT_EXPANSION_CAP: usize = 500_000;

fn cert_window_bound(
    b: &WordAlphabet,
    pot: &dyn Potential,
    win: &mut CertWindow,
) -> Result<()> {
    let words = b.words();
    let w = &words[win.word];
    let mut past: Vec<u8> = Vec::new();
    for &c in win.past_ctx.iter().rev() {
        past.extend_from_slice(words[c].symbols());
    }
    past.extend_from_slice(&w.symbols()[..win.offset]);
    let mut future: Vec<u8> = w.symbols()[win.offset..].to_vec();
    for &c in &win.fut_ctx {
        future.extend_from_slice(words[c].symbols());
    }
    win.past_syms = past.len();
    win.fut_syms = future.len();
    win.hi = pot.bounds(&past, &future)?.hi;
    Ok(())
}

/// Certifies `Σ(B) ⊂ Σ_{t-delta}` by bounding `f` on every shift of every
/// alphabet word and adaptively deepening the explicit neighbor context of
/// the maximal windows until the bound stabilizes. Sound at every stage;
/// fails when the margin never becomes positive.
pub fn certify_containment(
    b: &WordAlphabet,
    t: f64,
    pot: &dyn Potential,
    gm: &dyn GeometryModel,
    c6: f64,
) -> Result<Containment> {
    let words = b.words();
    let mut heap: std::collections::BinaryHeap<CertWindow> = std::collections::BinaryHeap::new();
    for wi in 0..words.len() {
        for offset in 0..words[wi].len() {
            let mut win = CertWindow {
                hi: 0.0,
                word: wi,
                offset,
                past_ctx: Vec::new(),
                fut_ctx: Vec::new(),
                past_syms: 0,
                fut_syms: 0,
            };
            cert_window_bound(b, pot, &mut win)?;
            heap.push(win);
        }
    }
    let mut expansions = 0usize;
    let worst = loop {
        let top = heap.pop().expect("alphabet is nonempty");
        if (top.past_syms >= CERT_CONTEXT_SYMS && top.fut_syms >= CERT_CONTEXT_SYMS)
            || expansions >= CERT_EXPANSION_CAP
        {
            break top;
        }
        expansions += 1;
        let expand_past = top.past_syms <= top.fut_syms;
        for n in 0..words.len() {
            let mut child = top.clone();
            if expand_past {
                child.past_ctx.push(n);
            } else {
                child.fut_ctx.push(n);
            }
            cert_window_bound(b, pot, &mut child)?;
            heap.push(child);
        }
    };
    let delta = t - worst.hi;
    if delta <= 0.0 {
        return Err(Error::CertificationFailed { bound: worst.hi, t });
    }
    let worst_window = format!(
        "word {} offset {} (context {}|{} symbols)",
        words[worst.word], worst.offset, worst.past_syms, worst.fut_syms
    );
    let delta_components = paper_delta_components(b, gm, c6);
    Ok(Containment { delta, worst_bound: worst.hi, worst_window, delta_components })
}

/// The four suffix/prefix cylinder minima scaled by `c6 / 2`, evaluated on
/// the framed decomposition; infinite entries mean the corresponding offset
/// range is empty at this word length.
fn paper_delta_components(b: &WordAlphabet, gm: &dyn GeometryModel, c6: f64) -> [f64; 4] {
    let AlphabetKind::Framed { gamma1, gamma2 } = b.kind() else {
        return [f64::INFINITY; 4];
    };
    let half_c6 = 0.5 * c6;
    let mut d1 = f64::INFINITY;
    let mut d2 = f64::INFINITY;
    let mut d3 = f64::INFINITY;
    let mut d4 = f64::INFINITY;
    for w in b.words() {
        if w.len() < gamma1.len() + gamma2.len() {
            continue;
        }
        let mid = &w.symbols()[gamma1.len()..w.len() - gamma2.len()];
        let m = mid.len();
        for j in 1..m {
            let mut suffix = mid[j..].to_vec();
            suffix.extend_from_slice(gamma2.symbols());
            d1 = d1.min(half_c6 * gm.u_size(&Word::from_unchecked(suffix)));
            let mut prefix = gamma1.symbols().to_vec();
            prefix.extend_from_slice(&mid[..j]);
            d2 = d2.min(half_c6 * gm.s_size(&Word::from_unchecked(prefix)));
        }
        for l in 1..gamma1.len() {
            let mut v = gamma2.symbols().to_vec();
            v.extend_from_slice(&gamma1.symbols()[..l]);
            d3 = d3.min(half_c6 * gm.s_size(&Word::from_unchecked(v)));
        }
        for l in 1..gamma2.len() {
            let mut v = gamma2.symbols()[l..].to_vec();
            v.extend_from_slice(gamma1.symbols());
            d4 = d4.min(half_c6 * gm.u_size(&Word::from_unchecked(v)));
        }
    }
    [d1, d2, d3, d4]
}

/// Output of the full extraction pipeline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtractionResult {
    pub b: WordAlphabet,
    pub block_lists: Vec<Vec<u32>>,
    pub base_alphabet: Vec<Word>,
    pub gamma1: Word,
    pub gamma2: Word,
    pub frame_positions: Vec<usize>,
    pub p0: usize,
    pub q0: usize,
    pub delta: f64,
    pub delta_components: [f64; 4],
    pub dim_lower: f64,
    pub moran: DimensionEstimate,
    pub du: DimensionEstimate,
    pub achieved_eta: f64,
    pub n0: usize,
    pub pool_upper: usize,
    pub pool_lower: usize,
    pub excellent_fraction: f64,
    pub constants: GeometryConstants,
    pub c6: f64,
    pub non_paper_mode: bool,
    pub warnings: Vec<String>,
}

/// Runs the whole pipeline. The certification at the end is independent of
/// how the alphabet was found; every stage failure carries its stage name.
pub fn extract(
    params: &ExtractionParams,
    ts: &TransitionSystem,
    gm: &dyn GeometryModel,
    pot: &dyn Potential,
) -> Result<ExtractionResult> {
    params.validate()?;
    let mut warnings = Vec::new();
    let constants = measure_constants(ts, gm, params.constants_depth)?;
    let mono = certify_monotonicity(ts, gm, pot, params.constants_depth.min(6))?;
    let c6 = match mono.verdict {
        MonotonicityVerdict::Certified => mono.c6,
        _ => {
            warnings.push("monotonicity not certified; c6 = 0 in component formulas".into());
            0.0
        }
    };

    let budget = SearchBudget::from_level(params.budget_level);
    let du_r_max = params.du_r_max.max(params.r0);
    let table = compute_covering_table(params.t, du_r_max, ts, gm, pot, budget, true)?;
    let du = estimate_du(&table, 1.max(params.r0.min(du_r_max)), du_r_max, ts.len(), &constants)?;
    if du.lower <= 0.0 {
        warnings.push(format!(
            "Du lower bracket is {} at r_max = {du_r_max}; the dimension target is vacuous",
            du.lower
        ));
    }

    let b0 = table.row(params.r0).yes_words;
    if b0.is_empty() {
        return Err(Error::ExtractionImpossible {
            stage: "base_alphabet",
            reason: format!("no certified cylinders at scale {} for t = {}", params.r0, params.t),
        });
    }
    let n0 = b0.len();
    // base-scale consistency: |ln N(t,r0)/r0 - Du| should be below (tau/2) Du
    let n_up_r0 = table.upper(params.r0).max(1) as f64;
    let rate = n_up_r0.ln() / params.r0 as f64;
    if du.value > 0.0 && (rate - du.value).abs() >= 0.5 * params.tau * du.value {
        warnings.push(format!(
            "base scale r0 = {} violates the rate constraint: |{rate:.4} - {:.4}| >= tau/2 * Du",
            params.r0, du.value
        ));
    }

    let oracle = SublevelOracle::new(ts, pot, params.t, budget)?;
    let pool = build_concatenation_pool(&b0, params.k, ts, &oracle, params.pool_cap)?;
    if pool.words.is_empty() {
        return Err(Error::ExtractionImpossible {
            stage: "build_concatenation_pool",
            reason: "every k-block concatenation is certified outside the sublevel set".into(),
        });
    }
    let index = GoodPositionIndex::new(&pool, gm);
    let (mut excellent, fraction) = filter_excellent(&pool, &index, params.good_threshold);
    let mut non_paper_mode = false;
    if excellent.is_empty() {
        if params.allow_lowered_threshold {
            warnings.push(format!(
                "no word reaches good-position threshold {}; continuing with the whole pool",
                params.good_threshold
            ));
            excellent = (0..pool.words.len()).collect();
            non_paper_mode = true;
        } else {
            return Err(Error::ExtractionImpossible {
                stage: "filter_excellent",
                reason: format!(
                    "no word reaches good-position threshold {}",
                    params.good_threshold
                ),
            });
        }
    }
    let frame = find_frame(
        &pool,
        &excellent,
        &index,
        params.frame_len,
        params.spacing,
        !non_paper_mode,
    )?;
    let cut = cut_frame(&pool, &frame, ts)?;
    let moran = moran_dimension(&cut.b, gm, constants.c1)?;
    let containment = certify_containment(&cut.b, params.t, pot, gm, c6)?;
    let achieved_eta = if du.upper > 0.0 { 1.0 - moran.value / du.upper } else { f64::NAN };
    Ok(ExtractionResult {
        b: cut.b,
        block_lists: cut.block_lists,
        base_alphabet: b0,
        gamma1: cut.gamma1,
        gamma2: cut.gamma2,
        frame_positions: frame.positions,
        p0: cut.p0,
        q0: cut.q0,
        delta: containment.delta,
        delta_components: containment.delta_components,
        dim_lower: moran.value,
        moran,
        du,
        achieved_eta,
        n0,
        pool_upper: pool.words.len(),
        pool_lower: pool.lower_count(),
        excellent_fraction: fraction,
        constants,
        c6,
        non_paper_mode,
        warnings,
    })
}

/// Samples random windows of bi-infinite B-concatenations and returns the
/// largest certified upper bound of `f` seen; used by soundness checks.
///
/// Contexts are extended by further random alphabet words until both sides
/// span `min_context_syms` symbols, so each certified bound exceeds the true
/// supremum over the window's extensions only by the tail width.
pub fn sample_concatenation_bound(
    b: &WordAlphabet,
    pot: &dyn Potential,
    samples: usize,
    window_words: usize,
    min_context_syms: usize,
    seed: u64,
) -> Result<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let words = b.words();
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..samples {
        let picks: Vec<&Word> =
            (0..window_words).map(|_| &words[rng.gen_range(0..words.len())]).collect();
        let mid = window_words / 2;
        let offset = rng.gen_range(0..picks[mid].len());
        let mut past = Vec::new();
        for w in &picks[..mid] {
            past.extend_from_slice(w.symbols());
        }
        past.extend_from_slice(&picks[mid].symbols()[..offset]);
        let mut future = picks[mid].symbols()[offset..].to_vec();
        for w in &picks[mid + 1..] {
            future.extend_from_slice(w.symbols());
        }
        while past.len() < min_context_syms {
            let w = &words[rng.gen_range(0..words.len())];
            let mut ext = w.symbols().to_vec();
            ext.extend_from_slice(&past);
            past = ext;
        }
        while future.len() < min_context_syms {
            let w = &words[rng.gen_range(0..words.len())];
            future.extend_from_slice(w.symbols());
        }
        let hi = pot.bounds(&past, &future)?.hi;
        worst = worst.max(hi);
    }
    Ok(worst)
}

/// Certified upper bound of `f` over one window of a B-concatenation, with
/// explicit neighbor words and sound tails.
pub fn window_upper_bound(
    b: &WordAlphabet,
    pot: &dyn Potential,
    left: &Word,
    center: &Word,
    offset: usize,
    right: &Word,
) -> Result<f64> {
    let _ = b;
    let mut past = left.symbols().to_vec();
    past.extend_from_slice(&center.symbols()[..offset]);
    let mut future = center.symbols()[offset..].to_vec();
    future.extend_from_slice(right.symbols());
    Ok(pot.bounds(&past, &future)?.hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::CfGeometry;
    use crate::potential::{markov_value, ClassicalCfPotential};
    use crate::symbolic::PeriodicPoint;

    fn two_shift() -> TransitionSystem {
        TransitionSystem::full_shift_n(2).unwrap()
    }

    fn word(syms: &[u8], ts: &TransitionSystem) -> Word {
        Word::new(syms.to_vec(), ts).unwrap()
    }

    #[test]
    fn base_alphabet_empty_below_hurwitz() {
        let ts = two_shift();
        let pot = ClassicalCfPotential::new(ts.clone());
        let err =
            base_alphabet(2.2, 4, &ts, &CfGeometry, &pot, SearchBudget::default()).unwrap_err();
        assert!(matches!(err, Error::ExtractionImpossible { stage: "base_alphabet", .. }));
    }

    #[test]
    fn base_alphabet_infinite_is_partition() {
        let ts = two_shift();
        let pot = ClassicalCfPotential::new(ts.clone());
        let (b0, n0) =
            base_alphabet(f64::INFINITY, 2, &ts, &CfGeometry, &pot, SearchBudget::default())
                .unwrap();
        assert_eq!(n0, 5);
        assert_eq!(b0.len(), 5);
    }

    #[test]
    fn pool_of_single_word() {
        let ts = two_shift();
        let pot = ClassicalCfPotential::new(ts.clone());
        let oracle = SublevelOracle::new(&ts, &pot, 2.5, SearchBudget::default()).unwrap();
        let b0 = vec![word(&[1], &ts)];
        let pool = build_concatenation_pool(&b0, 3, &ts, &oracle, 1000).unwrap();
        assert_eq!(pool.words.len(), 1);
        assert_eq!(pool.words[0].word, word(&[1, 1, 1], &ts));
        assert!(pool.certified[0]);
    }

    #[test]
    fn pool_prunes_isolated_twos_at_3_1() {
        let ts = two_shift();
        let pot = ClassicalCfPotential::new(ts.clone());
        let oracle = SublevelOracle::new(&ts, &pot, 3.1, SearchBudget::default()).unwrap();
        let b0 = vec![word(&[1], &ts), word(&[2], &ts)];
        let pool = build_concatenation_pool(&b0, 5, &ts, &oracle, 1000).unwrap();
        assert!(!pool.words.is_empty());
        for bw in &pool.words {
            assert!(!bw.word.contains_subword(&[1, 2, 1]), "{}", bw.word);
        }
        // 2,1,2 survives: its closure stays below 3.1.
        assert!(pool.words.iter().any(|bw| bw.word.contains_subword(&[2, 1, 2])));
    }

    #[test]
    fn good_positions_interval_order_example() {
        // Pool over B0 = P_2 at t = infinity, k = 2: interior blocks in
        // cylinder order are flanked, extremes are not.
        let ts = two_shift();
        let gm = CfGeometry;
        let pot = ClassicalCfPotential::new(ts.clone());
        let oracle =
            SublevelOracle::new(&ts, &pot, f64::INFINITY, SearchBudget::default()).unwrap();
        let (b0, _) =
            base_alphabet(f64::INFINITY, 2, &ts, &gm, &pot, SearchBudget::default()).unwrap();
        let pool = build_concatenation_pool(&b0, 2, &ts, &oracle, 10_000).unwrap();
        let index = GoodPositionIndex::new(&pool, &gm);
        // find the word whose both blocks are u-interior and s-interior
        let mut some_good = false;
        for bw in &pool.words {
            let rep = index.report(bw);
            assert!(rep.good.iter().all(|j| (1..=2).contains(j)));
            some_good |= !rep.good.is_empty();
        }
        assert!(some_good, "no good positions in the full pool");
        // single-word pool has no good positions
        let tiny = BlockPool {
            b0: b0.clone(),
            k: 2,
            words: vec![pool.words[0].clone()],
            certified: vec![true],
        };
        let rep = good_positions(&pool.words[0], &tiny, &gm);
        assert!(rep.good.is_empty());
    }

    #[test]
    fn extract_degenerate_at_2_5() {
        let ts = two_shift();
        let pot = ClassicalCfPotential::new(ts.clone());
        let mut params = ExtractionParams::desk(2.5, 0.5);
        params.allow_lowered_threshold = true;
        let res = extract(&params, &ts, &CfGeometry, &pot).unwrap();
        assert!(res.b.words().iter().all(|w| w.symbols().iter().all(|&s| s == 1)));
        assert_eq!(res.dim_lower, 0.0);
        assert!((res.delta - (2.5 - 5.0f64.sqrt())).abs() < 1e-6, "delta = {}", res.delta);
        assert!(res.non_paper_mode);
    }

    #[test]
    fn extract_at_3_1_certifies() {
        let ts = two_shift();
        let pot = ClassicalCfPotential::new(ts.clone());
        let params = ExtractionParams::desk(3.1, 0.5);
        let res = extract(&params, &ts, &CfGeometry, &pot).unwrap();
        assert!(res.delta > 0.0);
        assert!(res.dim_lower > 0.0, "dim_lower = {}", res.dim_lower);
        // every periodic concatenation of <= 3 alphabet words stays below
        // t - delta
        let words = res.b.words();
        let mut stack: Vec<Vec<usize>> = vec![vec![]];
        while let Some(tuple) = stack.pop() {
            if !tuple.is_empty() {
                let parts: Vec<Word> = tuple.iter().map(|&i| words[i].clone()).collect();
                let period = concat(&parts, &ts).unwrap();
                let p = PeriodicPoint::new(period, 0, &ts).unwrap();
                let m = markov_value(&p, &pot);
                assert!(
                    m <= 3.1 - res.delta + 1e-9,
                    "periodic concatenation {:?} has markov {m}, delta {}",
                    tuple,
                    res.delta
                );
            }
            if tuple.len() < 3 {
                for i in 0..words.len() {
                    let mut next = tuple.clone();
                    next.push(i);
                    stack.push(next);
                }
            }
        }
        // framed kind passes the complete-subshift check by construction
        assert!(matches!(res.b.kind(), AlphabetKind::Framed { .. }));
    }

    #[test]
    fn certify_rejects_impossible_threshold() {
        let ts = two_shift();
        let pot = ClassicalCfPotential::new(ts.clone());
        let b = check_complete_subshift(&[word(&[2], &ts)], &ts, Some((1, 1))).unwrap();
        let err = certify_containment(&b, 2.8, &pot, &CfGeometry, 0.1).unwrap_err();
        // 2 sqrt(2) > 2.8: the singleton alphabet {2} cannot be contained.
        assert!(matches!(err, Error::CertificationFailed { .. }));
    }

    #[test]
    fn certify_singleton_ones() {
        let ts = two_shift();
        let pot = ClassicalCfPotential::new(ts.clone());
        let b = check_complete_subshift(&[word(&[1], &ts)], &ts, Some((1, 1))).unwrap();
        let cert = certify_containment(&b, 2.5, &pot, &CfGeometry, 0.1).unwrap();
        assert!((cert.delta - (2.5 - 5.0f64.sqrt())).abs() < 1e-6);
    }

    #[test]
    fn extraction_soundness_sampled_windows() {
        let ts = two_shift();
        let pot = ClassicalCfPotential::new(ts.clone());
        let params = ExtractionParams::desk(3.1, 0.5);
        let res = extract(&params, &ts, &CfGeometry, &pot).unwrap();
        let worst = sample_concatenation_bound(&res.b, &pot, 1000, 5, 48, 17).unwrap();
        assert!(
            worst <= 3.1 - res.delta + 1e-9,
            "sampled window bound {worst} above t - delta = {}",
            3.1 - res.delta
        );
    }
}
