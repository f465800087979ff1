//! Potentials on the shift space: certified window bounds, exact values on
//! periodic sequences, Markov and Lagrange values, and the locally-monotone
//! inequality scan.
//!
//! A [`Potential`] models a function `f` on bi-infinite admissible sequences
//! through two capabilities: sound interval enclosures over all extensions of
//! a finite window, and exact evaluation on periodic sequences. The classical
//! potential is `f(θ) = [θ_0; θ_1, ...] + [0; θ_{-1}, θ_{-2}, ...]`, whose
//! sup over orbits produces the classical Markov spectrum.

use crate::cf::{self, SurdValue};
use crate::error::{Error, Result};
use crate::geometry::{AffineGeometry, GeometryModel};
use crate::interval::Interval;
use crate::symbolic::{enumerate_words, PeriodicPoint, Symbol, TransitionSystem, Word};
use serde::{Deserialize, Serialize};

/// A potential with certified window bounds and exact periodic evaluation.
///
/// `bounds(past, future)` must contain `f(θ)` for every admissible bi-infinite
/// `θ` with `θ_{-|past|..-1} = past` and `θ_{0..|future|-1} = future`, and must
/// never widen as either window grows.
pub trait Potential: Send + Sync {
    /// Sound enclosure of `f` over all admissible extensions of the window.
    /// Errors on unknown symbols, inadmissible windows, or an inadmissible
    /// junction between past and future.
    fn bounds(&self, past: &[Symbol], future: &[Symbol]) -> Result<Interval>;

    /// Exact value of `f` at a periodic sequence (up to f64 rounding).
    fn eval_periodic(&self, p: &PeriodicPoint) -> f64;

    /// The transition system the potential is defined over.
    fn system(&self) -> &TransitionSystem;

    /// For potentials splitting as `f = F(future) + G(past)`: attainable hull
    /// of the forward component over admissible tails. `None` when the
    /// potential has no such split; differences with a shared tail then
    /// cannot cancel and the monotonicity scan falls back to joint windows.
    fn forward_component(&self, future: &[Symbol]) -> Option<Interval> {
        let _ = future;
        None
    }

    /// Split counterpart of [`Potential::forward_component`] for the past.
    fn backward_component(&self, past: &[Symbol]) -> Option<Interval> {
        let _ = past;
        None
    }
}

fn check_window(ts: &TransitionSystem, past: &[Symbol], future: &[Symbol]) -> Result<()> {
    for part in [past, future] {
        ts.check_symbols(part)?;
        for (i, p) in part.windows(2).enumerate() {
            if !ts.is_transition(p[0], p[1]) {
                return Err(Error::InadmissiblePair { a: p[0], b: p[1], index: i });
            }
        }
    }
    if let (Some(&a), Some(&b)) = (past.last(), future.first()) {
        if !ts.is_transition(a, b) {
            return Err(Error::InadmissibleJunction { a, b, index: 0 });
        }
    }
    Ok(())
}

/// The classical continued-fraction potential
/// `f(θ) = [θ_0; θ_1, ...] + [0; θ_{-1}, θ_{-2}, ...]` over a (truncated)
/// digit alphabet.
///
/// Window bounds are the exact attainable hulls: the forward reading over
/// all admissible tails is the Moebius image of the per-symbol value range
/// `z_a = {[a; θ_1, ...] admissible}` under the window's convergents, and the
/// per-symbol ranges are precomputed as an interval fixpoint.
#[derive(Debug, Clone)]
pub struct ClassicalCfPotential {
    ts: TransitionSystem,
    transposed: TransitionSystem,
    /// Attainable forward values by leading symbol, indexed by alphabet position.
    z_fwd: Vec<Interval>,
    /// Same for the transposed system (backward readings).
    z_bwd: Vec<Interval>,
}

fn value_ranges(ts: &TransitionSystem) -> Vec<Interval> {
    let mut z: Vec<Interval> = ts
        .alphabet()
        .iter()
        .map(|&a| Interval::new(a as f64, a as f64 + 1.0))
        .collect();
    // z_a = a + 1 / hull{z_b : (a,b) allowed}; contraction from the outer
    // enclosure converges well before 200 rounds.
    for _ in 0..200 {
        let snapshot = z.clone();
        for (i, &a) in ts.alphabet().iter().enumerate() {
            let mut hull: Option<Interval> = None;
            for (j, &b) in ts.alphabet().iter().enumerate() {
                if ts.is_transition(a, b) {
                    hull = Some(match hull {
                        Some(h) => h.hull(&snapshot[j]),
                        None => snapshot[j],
                    });
                }
            }
            let h = hull.expect("no dead symbols");
            z[i] = Interval::new(a as f64 + 1.0 / h.hi, a as f64 + 1.0 / h.lo);
        }
    }
    z.iter().map(Interval::widened).collect()
}

fn moebius_hull(h: f64, h_prev: f64, k: f64, k_prev: f64, z: Interval) -> Interval {
    let f = |t: f64| (h * t + h_prev) / (k * t + k_prev);
    let a = f(z.lo);
    let b = f(z.hi);
    Interval::new(a.min(b), a.max(b))
}

impl ClassicalCfPotential {
    /// Requires every symbol to be a valid continued-fraction digit (>= 1).
    pub fn new(ts: TransitionSystem) -> Self {
        assert!(
            ts.alphabet().iter().all(|&a| a >= 1),
            "continued-fraction digits must be positive"
        );
        let transposed = ts.transpose();
        let z_fwd = value_ranges(&ts);
        let z_bwd = value_ranges(&transposed);
        Self { ts, transposed, z_fwd, z_bwd }
    }

    /// Exact surd form `sqrt(disc)/q` of the value at a periodic point.
    pub fn surd_value(&self, p: &PeriodicPoint) -> SurdValue {
        cf::periodic_phase_surd(p.aligned_word().symbols())
    }

    fn idx(&self, s: Symbol) -> usize {
        self.ts.alphabet().iter().position(|&a| a == s).expect("symbol in alphabet")
    }

    fn tail_hull(&self, ranges: &[Interval], symbols: impl Iterator<Item = Symbol>) -> Interval {
        let mut hull: Option<Interval> = None;
        for s in symbols {
            let iv = ranges[self.idx(s)];
            hull = Some(match hull {
                Some(h) => h.hull(&iv),
                None => iv,
            });
        }
        hull.expect("no dead symbols")
    }

    /// Attainable hull of `[w_0; w_1, ..., w_{m-1}, tail]` over admissible
    /// tails; `past_last` constrains `w_0` when the window is empty.
    fn forward_range(&self, future: &[Symbol], past_last: Option<Symbol>) -> Interval {
        if future.is_empty() {
            return match past_last {
                Some(a) => self.tail_hull(&self.z_fwd, self.ts.successors(a)),
                None => self.tail_hull(&self.z_fwd, self.ts.alphabet().iter().copied()),
            };
        }
        let (h, h_prev) = cf::continuant_pair_f64(future);
        let (k, k_prev) = cf::continuant_pair_f64(&future[1..]);
        let z = self.tail_hull(&self.z_fwd, self.ts.successors(*future.last().unwrap()));
        moebius_hull(h, h_prev, k, k_prev, z)
    }

    /// Attainable hull of `[0; θ_{-1}, ..., θ_{-n}, tail]` where the past
    /// window occupies positions `-n..-1`; backward readings are admissible
    /// in the transposed system.
    fn backward_range(&self, past: &[Symbol], future_first: Option<Symbol>) -> Interval {
        if past.is_empty() {
            let inv = |iv: Interval| Interval::new(1.0 / iv.hi, 1.0 / iv.lo);
            let hull = match future_first {
                Some(b) => self.tail_hull(&self.z_bwd, self.ts.predecessors(b)),
                None => self.tail_hull(&self.z_bwd, self.ts.alphabet().iter().copied()),
            };
            return inv(hull);
        }
        let mut v: Vec<Symbol> = vec![0];
        v.extend(past.iter().rev());
        let (h, h_prev) = cf::continuant_pair_f64(&v);
        let (k, k_prev) = cf::continuant_pair_f64(&v[1..]);
        // The next backward digit e satisfies (e, past[0]) in T, i.e. it is a
        // transposed-system successor of past[0].
        let z = self.tail_hull(&self.z_bwd, self.transposed.successors(past[0]));
        moebius_hull(h, h_prev, k, k_prev, z)
    }
}

impl Potential for ClassicalCfPotential {
    fn bounds(&self, past: &[Symbol], future: &[Symbol]) -> Result<Interval> {
        check_window(&self.ts, past, future)?;
        let forward = self.forward_range(future, past.last().copied());
        let backward = self.backward_range(past, future.first().copied());
        Ok(forward.sum(&backward).widened())
    }

    fn eval_periodic(&self, p: &PeriodicPoint) -> f64 {
        self.surd_value(p).to_f64()
    }

    fn system(&self) -> &TransitionSystem {
        &self.ts
    }

    fn forward_component(&self, future: &[Symbol]) -> Option<Interval> {
        Some(self.forward_range(future, None).widened())
    }

    fn backward_component(&self, past: &[Symbol]) -> Option<Interval> {
        Some(self.backward_range(past, None).widened())
    }
}

fn hull_over(mut it: impl Iterator<Item = Interval>) -> Interval {
    let first = it.next().expect("no dead symbols, so at least one extension exists");
    it.fold(first, |acc, iv| acc.hull(&iv))
}

/// Coordinate potential on an affine model: the unstable coordinate of the
/// forward itinerary plus the stable coordinate of the backward itinerary.
/// Exactly linear, so every monotonicity constant has a closed form.
#[derive(Debug, Clone)]
pub struct AffineCoordinatePotential {
    ts: TransitionSystem,
    gm: AffineGeometry,
}

impl AffineCoordinatePotential {
    pub fn new(ts: TransitionSystem, gm: AffineGeometry) -> Self {
        Self { ts, gm }
    }

    fn forward_hull(&self, w: &Word) -> Interval {
        let (lo, hi) = self.gm.u_interval(w);
        Interval::new(lo, hi)
    }

    /// Backward digits in reading order (`θ_{-1}, θ_{-2}, ...`) form the word
    /// `past^T`; its stable cylinder is `s_interval((past^T)^T) = s_interval(past)`.
    fn backward_hull(&self, past: &Word) -> Interval {
        let (lo, hi) = self.gm.s_interval(past);
        Interval::new(lo, hi)
    }
}

impl Potential for AffineCoordinatePotential {
    fn bounds(&self, past: &[Symbol], future: &[Symbol]) -> Result<Interval> {
        check_window(&self.ts, past, future)?;
        let forward = if future.is_empty() {
            let firsts: Vec<Symbol> = match past.last() {
                Some(&a) => self.ts.successors(a).collect(),
                None => self.ts.alphabet().to_vec(),
            };
            hull_over(firsts.iter().map(|&b| self.forward_hull(&Word::from_unchecked(vec![b]))))
        } else {
            let last = *future.last().unwrap();
            hull_over(self.ts.successors(last).map(|b| {
                let mut w = future.to_vec();
                w.push(b);
                self.forward_hull(&Word::from_unchecked(w))
            }))
        };
        let backward = if past.is_empty() {
            let lasts: Vec<Symbol> = match future.first() {
                Some(&b) => self.ts.predecessors(b).collect(),
                None => self.ts.alphabet().to_vec(),
            };
            hull_over(lasts.iter().map(|&e| self.backward_hull(&Word::from_unchecked(vec![e]))))
        } else {
            let first = past[0];
            hull_over(self.ts.predecessors(first).map(|e| {
                let mut v = vec![e];
                v.extend_from_slice(past);
                self.backward_hull(&Word::from_unchecked(v))
            }))
        };
        Ok(forward.sum(&backward).widened())
    }

    fn eval_periodic(&self, p: &PeriodicPoint) -> f64 {
        // Iterate the aligned word until the nested cylinder pins the
        // coordinate to f64 resolution.
        let aligned = p.aligned_word();
        let mut fwd = aligned.symbols().to_vec();
        let mut bwd: Vec<Symbol> = aligned.symbols().iter().rev().copied().collect();
        for _ in 0..80 {
            let f = self.forward_hull(&Word::from_unchecked(fwd.clone()));
            let rev_word = Word::from_unchecked(bwd.iter().rev().copied().collect());
            let b = self.backward_hull(&rev_word);
            if f.width() < 1e-16 && b.width() < 1e-16 {
                break;
            }
            fwd.extend_from_slice(aligned.symbols());
            bwd.extend(aligned.symbols().iter().rev());
        }
        let f = self.forward_hull(&Word::from_unchecked(fwd));
        let rev_word = Word::from_unchecked(bwd.iter().rev().copied().collect());
        let b = self.backward_hull(&rev_word);
        0.5 * (f.lo + f.hi) + 0.5 * (b.lo + b.hi)
    }

    fn system(&self) -> &TransitionSystem {
        &self.ts
    }

    fn forward_component(&self, future: &[Symbol]) -> Option<Interval> {
        if future.is_empty() {
            return None;
        }
        Some(self.forward_hull(&Word::from_unchecked(future.to_vec())))
    }

    fn backward_component(&self, past: &[Symbol]) -> Option<Interval> {
        if past.is_empty() {
            return None;
        }
        Some(self.backward_hull(&Word::from_unchecked(past.to_vec())))
    }
}

/// A potential depending exactly on a finite coordinate window
/// `(-past_len, ..., future_len - 1)`, given by a total table over admissible
/// windows. Tail modulus is zero beyond the window.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FiniteWindowPotential {
    ts: TransitionSystem,
    past_len: usize,
    future_len: usize,
    /// Values keyed by the window `(past, future)` as concatenated symbols.
    entries: Vec<(Vec<Symbol>, Vec<Symbol>, f64)>,
}

impl FiniteWindowPotential {
    /// Requires a value for every admissible window of the stated lengths.
    pub fn new(
        ts: TransitionSystem,
        past_len: usize,
        future_len: usize,
        entries: Vec<(Vec<Symbol>, Vec<Symbol>, f64)>,
    ) -> Result<Self> {
        if future_len == 0 {
            return Err(Error::InvalidParameter("future window must be nonempty".into()));
        }
        let pot = Self { ts, past_len, future_len, entries };
        let windows = pot.all_windows()?;
        for (p, f) in &windows {
            if pot.lookup(p, f).is_none() {
                return Err(Error::InvalidParameter(format!(
                    "missing table entry for window past={p:?} future={f:?}"
                )));
            }
        }
        Ok(pot)
    }

    fn all_windows(&self) -> Result<Vec<(Vec<Symbol>, Vec<Symbol>)>> {
        let total = self.past_len + self.future_len;
        let words = enumerate_words(&self.ts, |_| true, |w| w.len() >= total, total + 1)?;
        Ok(words
            .into_iter()
            .map(|w| {
                let s = w.symbols();
                (s[..self.past_len].to_vec(), s[self.past_len..].to_vec())
            })
            .collect())
    }

    fn lookup(&self, past: &[Symbol], future: &[Symbol]) -> Option<f64> {
        self.entries
            .iter()
            .find(|(p, f, _)| p == past && f == future)
            .map(|&(_, _, v)| v)
    }

    fn window_of(&self, p: &PeriodicPoint) -> (Vec<Symbol>, Vec<Symbol>) {
        let past: Vec<Symbol> =
            (0..self.past_len).map(|i| p.symbol_at(i as i64 - self.past_len as i64)).collect();
        let future: Vec<Symbol> = (0..self.future_len).map(|i| p.symbol_at(i as i64)).collect();
        (past, future)
    }
}

impl Potential for FiniteWindowPotential {
    fn bounds(&self, past: &[Symbol], future: &[Symbol]) -> Result<Interval> {
        check_window(&self.ts, past, future)?;
        // Hull of table values over all admissible completions of the window.
        let mut hull: Option<Interval> = None;
        for (p, f) in self.all_windows()? {
            // The fixed part of the window must be consistent with the query:
            // query past aligns to the right end of `p`, future to the left
            // end of `f`.
            let pn = past.len().min(self.past_len);
            let fn_ = future.len().min(self.future_len);
            let p_tail = &p[self.past_len - pn..];
            let q_tail = &past[past.len() - pn..];
            if p_tail != q_tail || f[..fn_] != future[..fn_] {
                continue;
            }
            // Symbols of the query beyond the dependency window still
            // constrain admissibility through the junctions already checked.
            let v = self.lookup(&p, &f).expect("validated total table");
            let iv = Interval::point(v);
            hull = Some(match hull {
                Some(h) => h.hull(&iv),
                None => iv,
            });
        }
        hull.ok_or_else(|| Error::InvalidParameter("window admits no completion".into()))
    }

    fn eval_periodic(&self, p: &PeriodicPoint) -> f64 {
        let (past, future) = self.window_of(p);
        self.lookup(&past, &future).expect("validated total table")
    }

    fn system(&self) -> &TransitionSystem {
        &self.ts
    }
}

/// The potential `f ∘ reflect` on the transposed system, where
/// `reflect(θ)_i = θ_{-i}`. Running the unstable machinery on the transposed
/// system with the reflected potential computes the stable-side quantities of
/// the original model.
pub struct ReflectedPotential<'a> {
    inner: &'a dyn Potential,
    transposed: TransitionSystem,
}

impl<'a> ReflectedPotential<'a> {
    pub fn new(inner: &'a dyn Potential) -> Self {
        let transposed = inner.system().transpose();
        Self { inner, transposed }
    }
}

impl Potential for ReflectedPotential<'_> {
    fn bounds(&self, past: &[Symbol], future: &[Symbol]) -> Result<Interval> {
        check_window(&self.transposed, past, future)?;
        // reflect(θ)_j = W_j translates to original-θ constraints:
        //   future' = (W_0, reverse(past)), past' = reverse(future[1..]).
        let orig_past: Vec<Symbol> = future.iter().skip(1).rev().copied().collect();
        if let Some(&w0) = future.first() {
            let mut orig_future = vec![w0];
            orig_future.extend(past.iter().rev());
            self.inner.bounds(&orig_past, &orig_future)
        } else {
            // Position 0 unconstrained: hull over its admissible values.
            let orig_future_tail: Vec<Symbol> = past.iter().rev().copied().collect();
            let candidates: Vec<Symbol> = match orig_future_tail.first() {
                Some(&b) => self.inner.system().predecessors(b).collect(),
                None => self.inner.system().alphabet().to_vec(),
            };
            let mut hull: Option<Interval> = None;
            for c in candidates {
                let mut orig_future = vec![c];
                orig_future.extend_from_slice(&orig_future_tail);
                let iv = self.inner.bounds(&orig_past, &orig_future)?;
                hull = Some(match hull {
                    Some(h) => h.hull(&iv),
                    None => iv,
                });
            }
            hull.ok_or_else(|| Error::InvalidParameter("no admissible reflection".into()))
        }
    }

    fn eval_periodic(&self, p: &PeriodicPoint) -> f64 {
        // reflect of (w, phase) is (reverse(w), n - 1 - phase).
        let n = p.period();
        let rev = p.word().transpose();
        let phase = (n - 1 - p.phase() % n) % n;
        let rp = PeriodicPoint::new(rev, phase, self.inner.system())
            .expect("reflection preserves admissibility");
        self.inner.eval_periodic(&rp)
    }

    fn system(&self) -> &TransitionSystem {
        &self.transposed
    }
}

/// Markov value of a periodic point: the max of `f` over the (finite) orbit.
/// The sup in the definition is attained on periodic orbits.
pub fn markov_value(p: &PeriodicPoint, pot: &dyn Potential) -> f64 {
    let ts = pot.system();
    (0..p.period())
        .map(|phase| {
            let q = PeriodicPoint::new(p.word().clone(), phase, ts).expect("same period word");
            pot.eval_periodic(&q)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Lagrange value of an eventually periodic sequence: the limsup along the
/// forward orbit, which ignores any finite preperiod and equals the Markov
/// value of the periodic tail.
pub fn lagrange_value(
    preperiod: Option<&Word>,
    period: &PeriodicPoint,
    pot: &dyn Potential,
) -> Result<f64> {
    let ts = pot.system();
    if let Some(pre) = preperiod {
        Word::new(pre.symbols().to_vec(), ts)?;
        let head = period.aligned_word().first();
        if !ts.is_transition(pre.last(), head) {
            return Err(Error::InadmissibleJunction { a: pre.last(), b: head, index: 0 });
        }
    }
    Ok(markov_value(period, pot))
}

/// Sound enclosing interval for `f` over all admissible bi-infinite sequences
/// through the window; errors on an inadmissible junction.
pub fn window_bounds(past: &Word, future: &Word, pot: &dyn Potential) -> Result<Interval> {
    pot.bounds(past.symbols(), future.symbols())
}

/// Outcome of the locally-monotone inequality scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MonotonicityVerdict {
    Certified,
    Refuted { counterexample: String },
    Inconclusive,
}

/// Measured separation (`c6`) and Lipschitz (`c7`) constants: every scanned
/// window pair differing in one symbol past a shared block of size `s`
/// separates `f` by more than `c6 * s` and less than `c7 * s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityCertificate {
    pub c6: f64,
    pub c7: f64,
    pub depth: usize,
    pub verdict: MonotonicityVerdict,
}

/// Scans all admissible windows up to `depth` symbols, on both the unstable
/// side (shared block, differing next symbol, shared tail beyond) and the
/// stable side (mirrored), and measures the largest `c6` and smallest `c7`
/// that pass.
///
/// When the potential splits as `f = F(future) + G(past)`, the shared tail
/// cancels exactly and the separation is the gap between the component hulls
/// of the two extensions. Without a split the scan compares joint windows
/// over explicit contexts, which cannot exhibit cancellation and typically
/// refutes; both routes are conservative for `c6` and generous for `c7`.
pub fn certify_monotonicity(
    ts: &TransitionSystem,
    gm: &dyn GeometryModel,
    pot: &dyn Potential,
    depth: usize,
) -> Result<MonotonicityCertificate> {
    if depth < 2 {
        return Err(Error::InvalidParameter("monotonicity scan needs depth >= 2".into()));
    }
    let probe = Word::from_unchecked(vec![ts.alphabet()[0]]);
    let split = pot.forward_component(probe.symbols()).is_some()
        && pot.backward_component(probe.symbols()).is_some();
    let ctx_len = depth.min(4);
    let contexts = enumerate_words(ts, |_| true, |w| w.len() >= ctx_len, ctx_len + 1)?;
    let words = enumerate_words(ts, |_| true, |w| w.len() >= depth, depth + 1)?;
    let mut shared: Vec<Word> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for w in &words {
        for len in 1..=depth.saturating_sub(1) {
            let p = &w.symbols()[..len];
            if seen.insert(p.to_vec()) {
                shared.push(Word::from_unchecked(p.to_vec()));
            }
        }
    }

    let mut c6 = f64::INFINITY;
    let mut c7: f64 = 0.0;
    let mut worst: Option<String> = None;
    let mut record = |lo: f64, hi: f64, descr: &dyn Fn() -> String| {
        if lo < c6 {
            c6 = lo;
            if lo <= 0.0 {
                worst = Some(descr());
            }
        }
        c7 = c7.max(hi);
    };

    for block in &shared {
        // Unstable side: extensions (block a ...) vs (block a' ...) with the
        // same sequence beyond the differing symbol.
        let exts: Vec<Symbol> = ts.successors(block.last()).collect();
        for (i, &a) in exts.iter().enumerate() {
            for &b in &exts[i + 1..] {
                let mut wa = block.symbols().to_vec();
                wa.push(a);
                let mut wb = block.symbols().to_vec();
                wb.push(b);
                let scale = gm.u_size(block);
                if split {
                    let ia = pot.forward_component(&wa).expect("split probed");
                    let ib = pot.forward_component(&wb).expect("split probed");
                    record(ia.gap(&ib) / scale, ia.spread(&ib) / scale, &|| {
                        format!("block {block} symbols {a}/{b} (u)")
                    });
                } else {
                    for ctx in &contexts {
                        if !ts.is_transition(ctx.last(), block.first()) {
                            continue;
                        }
                        let ia = pot.bounds(ctx.symbols(), &wa)?;
                        let ib = pot.bounds(ctx.symbols(), &wb)?;
                        record(ia.gap(&ib) / scale, ia.spread(&ib) / scale, &|| {
                            format!("ctx {ctx} block {block} symbols {a}/{b} (u)")
                        });
                    }
                }
            }
        }
        // Stable side: pasts (a block) vs (a' block) with shared future.
        let pre: Vec<Symbol> = ts.predecessors(block.first()).collect();
        for (i, &a) in pre.iter().enumerate() {
            for &b in &pre[i + 1..] {
                let mut wa = vec![a];
                wa.extend_from_slice(block.symbols());
                let mut wb = vec![b];
                wb.extend_from_slice(block.symbols());
                let scale = gm.s_size(block);
                if split {
                    let ia = pot.backward_component(&wa).expect("split probed");
                    let ib = pot.backward_component(&wb).expect("split probed");
                    record(ia.gap(&ib) / scale, ia.spread(&ib) / scale, &|| {
                        format!("block {block} symbols {a}/{b} (s)")
                    });
                } else {
                    for ctx in &contexts {
                        if !ts.is_transition(block.last(), ctx.first()) {
                            continue;
                        }
                        let ia = pot.bounds(&wa, ctx.symbols())?;
                        let ib = pot.bounds(&wb, ctx.symbols())?;
                        record(ia.gap(&ib) / scale, ia.spread(&ib) / scale, &|| {
                            format!("ctx {ctx} block {block} symbols {a}/{b} (s)")
                        });
                    }
                }
            }
        }
    }

    if !c6.is_finite() {
        return Ok(MonotonicityCertificate {
            c6: 0.0,
            c7,
            depth,
            verdict: MonotonicityVerdict::Inconclusive,
        });
    }
    let verdict = if c6 > 0.0 {
        MonotonicityVerdict::Certified
    } else {
        MonotonicityVerdict::Refuted { counterexample: worst.unwrap_or_default() }
    };
    Ok(MonotonicityCertificate { c6, c7, depth, verdict })
}
