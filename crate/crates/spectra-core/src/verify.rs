//! Property battery behind `spectra verify-invariants`: each check exercises
//! one structural invariant at a configurable depth and reports pass/fail.

use crate::dimension::{
    box_dimension_oracle, check_submultiplicative, compute_covering_table, estimate_du,
    moran_dimension,
};
use crate::geometry::{measure_constants, partition_at_scale, u_scale, GeometryModel};
use crate::potential::{markov_value, Potential};
use crate::realization::EventuallyPeriodic;
use crate::sublevel::{cylinder_meets_sublevel, SearchBudget};
use crate::symbolic::{
    check_complete_subshift, concat, enumerate_words, is_admissible, PeriodicPoint, Symbol,
    TransitionSystem, Word,
};
use crate::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Outcome of one invariant check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckReport {
    fn ok(name: &str, detail: String) -> Self {
        Self { name: name.into(), passed: true, detail }
    }

    fn fail(name: &str, detail: String) -> Self {
        Self { name: name.into(), passed: false, detail }
    }

    fn assert(name: &str, cond: bool, detail: String) -> Self {
        if cond {
            Self::ok(name, detail)
        } else {
            Self::fail(name, detail)
        }
    }
}

fn random_word(ts: &TransitionSystem, rng: &mut ChaCha8Rng, max_len: usize) -> Word {
    let len = rng.gen_range(1..=max_len);
    let mut syms = Vec::with_capacity(len);
    let alphabet = ts.alphabet();
    let mut cur = alphabet[rng.gen_range(0..alphabet.len())];
    syms.push(cur);
    for _ in 1..len {
        let nexts: Vec<Symbol> = ts.successors(cur).collect();
        cur = nexts[rng.gen_range(0..nexts.len())];
        syms.push(cur);
    }
    Word::new(syms, ts).expect("random walk is admissible")
}

/// Runs the whole invariant battery at the given depth and seed.
pub fn run_invariant_suite(
    ts: &TransitionSystem,
    gm: &dyn GeometryModel,
    pot: &dyn Potential,
    depth: usize,
    seed: u64,
) -> Result<Vec<CheckReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let depth = depth.clamp(4, 12);

    // transpose involution
    {
        let mut all = true;
        for _ in 0..200 {
            let w = random_word(ts, &mut rng, depth);
            all &= w.transpose().transpose() == w;
        }
        out.push(CheckReport::assert(
            "symbolic/transpose-involution",
            all,
            "transpose(transpose(w)) == w on 200 random words".into(),
        ));
    }

    // concat associativity
    {
        let mut all = true;
        for _ in 0..200 {
            let a = random_word(ts, &mut rng, 4);
            let b = random_word(ts, &mut rng, 4);
            let c = random_word(ts, &mut rng, 4);
            let ab_c = concat(&[a.clone(), b.clone()], ts)
                .and_then(|ab| concat(&[ab, c.clone()], ts));
            let a_bc = concat(&[b.clone(), c.clone()], ts)
                .and_then(|bc| concat(&[a.clone(), bc], ts));
            match (ab_c, a_bc) {
                (Ok(x), Ok(y)) => all &= x == y,
                (Err(_), Err(_)) => {}
                _ => all = false,
            }
        }
        out.push(CheckReport::assert(
            "symbolic/concat-associative",
            all,
            "(a.b).c == a.(b.c) where defined, 200 random triples".into(),
        ));
    }

    // enumeration emits each qualifying word exactly once (vs naive recursion)
    {
        let len = depth.min(8);
        let enumerated = enumerate_words(ts, |_| true, |w| w.len() >= len, len + 1)?;
        let mut naive: Vec<Vec<Symbol>> = Vec::new();
        let mut stack: Vec<Vec<Symbol>> = ts.alphabet().iter().map(|&a| vec![a]).collect();
        while let Some(w) = stack.pop() {
            if w.len() == len {
                naive.push(w);
                continue;
            }
            for b in ts.successors(*w.last().unwrap()) {
                let mut next = w.clone();
                next.push(b);
                stack.push(next);
            }
        }
        naive.sort();
        naive.dedup();
        let mut got: Vec<Vec<Symbol>> =
            enumerated.iter().map(|w| w.symbols().to_vec()).collect();
        let unique = {
            let mut sorted = got.clone();
            sorted.sort();
            sorted.dedup();
            sorted.len() == got.len()
        };
        got.sort();
        out.push(CheckReport::assert(
            "symbolic/enumeration-exact",
            unique && got == naive,
            format!("depth-{len} frontier matches naive generation ({} words)", naive.len()),
        ));
    }

    // complete subshift: random concatenations of <= 6 words stay admissible
    {
        let words: Vec<Word> = ts.alphabet().iter().map(|&a| Word::new(vec![a], ts)).collect::<Result<_>>()?;
        let b = check_complete_subshift(&words, ts, None);
        let mut all = b.is_ok();
        if let Ok(b) = b {
            for _ in 0..200 {
                let n = rng.gen_range(1..=6);
                let picks: Vec<Word> =
                    (0..n).map(|_| b.words()[rng.gen_range(0..b.len())].clone()).collect();
                let joined = concat(&picks, ts);
                all &= joined.is_ok() && is_admissible(joined.unwrap().symbols(), ts)?;
            }
        }
        out.push(CheckReport::assert(
            "symbolic/complete-subshift-closure",
            all,
            "random concatenations of alphabet words are admissible".into(),
        ));
    }

    let consts = measure_constants(ts, gm, depth.min(8))?;

    // quasi-multiplicativity with the measured constant
    {
        let mut worst: f64 = 0.0;
        for _ in 0..300 {
            let a = random_word(ts, &mut rng, 5);
            let b = random_word(ts, &mut rng, 5);
            if !ts.is_transition(a.last(), b.first()) {
                continue;
            }
            let ab = concat(&[a.clone(), b.clone()], ts)?;
            let ratio =
                gm.u_neg_ln_size(&a) + gm.u_neg_ln_size(&b) - gm.u_neg_ln_size(&ab);
            worst = worst.max(ratio.abs());
        }
        out.push(CheckReport::assert(
            "geometry/quasi-multiplicativity",
            worst <= consts.c1 + 1e-9,
            format!("worst |ln ratio| {worst:.6} within measured c1 = {:.6}", consts.c1),
        ));
    }

    // partitions: prefix-freeness and disjoint interiors
    {
        let mut all = true;
        for r in 1..=3i64 {
            let p = partition_at_scale(r, ts, gm)?;
            for a in &p {
                for b in &p {
                    if a != b && b.symbols().starts_with(a.symbols()) {
                        all = false;
                    }
                }
            }
            let mut ivals: Vec<(f64, f64)> = p.iter().map(|w| gm.u_interval(w)).collect();
            ivals.sort_by(|x, y| x.0.total_cmp(&y.0));
            for pair in ivals.windows(2) {
                if pair[0].1 > pair[1].0 + 1e-9 {
                    all = false;
                }
            }
        }
        out.push(CheckReport::assert(
            "geometry/partition-covering",
            all,
            "P_r prefix-free with disjoint cylinder interiors, r <= 3".into(),
        ));
    }

    // scale sandwich on partition members
    {
        let max_step: f64 = ts
            .alphabet()
            .iter()
            .map(|&a| gm.u_neg_ln_size(&Word::new(vec![a], ts).unwrap()))
            .fold(0.0, f64::max);
        let mut all = true;
        for r in 1..=4i64 {
            for w in partition_at_scale(r, ts, gm)? {
                let s = u_scale(gm, &w);
                if s < r || (s as f64) > r as f64 + consts.c1 + max_step + 1.0 {
                    all = false;
                }
            }
        }
        out.push(CheckReport::assert(
            "geometry/scale-sandwich",
            all,
            "r <= scale(w) <= r + c1 + max one-step refinement".into(),
        ));
    }

    // monotonicity of sizes under extension
    {
        let mut all = true;
        for _ in 0..200 {
            let w = random_word(ts, &mut rng, depth);
            if w.len() < 2 {
                continue;
            }
            let parent = Word::new(w.symbols()[..w.len() - 1].to_vec(), ts)?;
            all &= gm.u_size(&w) < gm.u_size(&parent);
        }
        out.push(CheckReport::assert(
            "geometry/size-monotone",
            all,
            "u_size strictly decreases under extension".into(),
        ));
    }

    // Lagrange <= Markov on random eventually periodic points
    {
        let mut all = true;
        for _ in 0..300 {
            let period = random_word(ts, &mut rng, 5);
            if !ts.is_transition(period.last(), period.first()) {
                continue;
            }
            let pre = random_word(ts, &mut rng, 4);
            if !ts.is_transition(pre.last(), period.first())
                || !ts.is_transition(period.last(), pre.first())
            {
                continue;
            }
            let p = PeriodicPoint::new(period.clone(), 0, ts)?;
            let lag = markov_value(&p, pot);
            let mut center = pre.symbols().to_vec();
            center.extend_from_slice(period.symbols());
            let theta = EventuallyPeriodic::new(
                period.clone(),
                Word::new(center, ts)?,
                period.clone(),
                ts,
            )?;
            let (m, _) = theta.markov(pot, ts, 48)?;
            all &= lag <= m + 1e-9;
        }
        out.push(CheckReport::assert(
            "potential/lagrange-below-markov",
            all,
            "limsup of the tail never exceeds the sup over the whole orbit".into(),
        ));
    }

    // window soundness against periodic extensions
    {
        let mut all = true;
        for _ in 0..300 {
            let w = random_word(ts, &mut rng, 2 * depth.min(5));
            if !ts.is_transition(w.last(), w.first()) {
                continue;
            }
            let cut = rng.gen_range(0..w.len());
            let iv = pot.bounds(&w.symbols()[..cut], &w.symbols()[cut..])?;
            let p = PeriodicPoint::new(w.clone(), cut, ts)?;
            let v = pot.eval_periodic(&p);
            all &= iv.contains(v);
        }
        out.push(CheckReport::assert(
            "potential/window-soundness",
            all,
            "periodic extensions stay inside certified windows".into(),
        ));
    }

    // Markov value invariant under rotation
    {
        let mut all = true;
        for _ in 0..100 {
            let w = random_word(ts, &mut rng, 6);
            if !ts.is_transition(w.last(), w.first()) {
                continue;
            }
            let base = markov_value(&PeriodicPoint::new(w.clone(), 0, ts)?, pot);
            let k = rng.gen_range(0..w.len());
            let rot = w.rotate_left(k);
            if !ts.is_transition(rot.last(), rot.first()) {
                continue;
            }
            let v = markov_value(&PeriodicPoint::new(rot, 0, ts)?, pot);
            all &= (base - v).abs() < 1e-9;
        }
        out.push(CheckReport::assert(
            "potential/markov-rotation-invariant",
            all,
            "markov value is a function of the orbit, not the phase".into(),
        ));
    }

    // membership verdict monotone in t
    {
        let mut all = true;
        let probe = random_word(ts, &mut rng, 3);
        let base = markov_value(
            &PeriodicPoint::new(Word::new(vec![ts.alphabet()[0]], ts)?, 0, ts)?,
            pot,
        );
        let mut seen_yes = false;
        for step in 0..4 {
            let t = base - 0.1 + 0.15 * step as f64;
            let v = cylinder_meets_sublevel(&probe, t, SearchBudget::from_level(4), ts, pot)?;
            if seen_yes && !v.is_yes() {
                all = false;
            }
            seen_yes |= v.is_yes();
        }
        out.push(CheckReport::assert(
            "sublevel/monotone-in-t",
            all,
            "yes verdicts persist as the threshold grows".into(),
        ));
    }

    // Fekete bound non-increasing, submultiplicativity holds at t = infinity
    {
        let r_max = (depth as i64).clamp(6, 10);
        let table = compute_covering_table(
            f64::INFINITY,
            r_max,
            ts,
            gm,
            pot,
            SearchBudget::from_level(4),
            false,
        )?;
        let mut prev = f64::INFINITY;
        let mut fekete_ok = true;
        for r in 3..=r_max {
            let est = estimate_du(&table, 2, r, ts.len(), &consts)?;
            if est.upper > prev + 1e-12 {
                fekete_ok = false;
            }
            prev = est.upper;
        }
        let sub = check_submultiplicative(&table, r_max / 2, r_max - r_max / 2, ts.len(), consts.c3)?;
        out.push(CheckReport::assert(
            "dimension/fekete-consistency",
            fekete_ok && sub.holds,
            format!("upper bound non-increasing; submultiplicative slack {:.4}", sub.slack),
        ));
    }

    // Moran sandwich against the box oracle at matched depth
    {
        let words: Vec<Word> =
            ts.alphabet().iter().map(|&a| Word::new(vec![a], ts)).collect::<Result<_>>()?;
        let b = check_complete_subshift(&words, ts, None)?;
        let refined = b.power(depth.min(8), ts)?;
        let moran = moran_dimension(&refined, gm, consts.c1)?;
        let intervals: Vec<(f64, f64)> =
            refined.words().iter().map(|w| gm.u_interval(w)).collect();
        let box_dim = box_dimension_oracle(&intervals);
        let ok = moran.lower <= moran.value + 1e-12
            && moran.value <= moran.upper + 1e-12
            && (moran.value - box_dim).abs() <= 0.05 + consts.c1;
        out.push(CheckReport::assert(
            "dimension/estimator-sandwich",
            ok,
            format!("moran {:.4} in [{:.4}, {:.4}], box {:.4}", moran.value, moran.lower, moran.upper, box_dim),
        ));
    }

    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{AffineGeometry, CfGeometry};
    use crate::potential::{AffineCoordinatePotential, ClassicalCfPotential};

    #[test]
    fn suite_passes_on_cf_model() {
        let ts = TransitionSystem::full_shift_n(2).unwrap();
        let pot = ClassicalCfPotential::new(ts.clone());
        let reports = run_invariant_suite(&ts, &CfGeometry, &pot, 8, 12345).unwrap();
        for r in &reports {
            assert!(r.passed, "{}: {}", r.name, r.detail);
        }
        assert!(reports.len() >= 10);
    }

    #[test]
    fn suite_passes_on_affine_model() {
        let ts = TransitionSystem::full_shift_n(2).unwrap();
        let gm = AffineGeometry::dyadic(1.0 / 3.0).unwrap();
        let pot = AffineCoordinatePotential::new(ts.clone(), gm.clone());
        let reports = run_invariant_suite(&ts, &gm, &pot, 6, 99).unwrap();
        for r in &reports {
            assert!(r.passed, "{}: {}", r.name, r.detail);
        }
    }
}
