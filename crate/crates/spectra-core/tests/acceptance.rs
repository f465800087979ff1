//! Acceptance suite: one test per criterion, each printing a pass line with
//! its measured quantities. Run with `cargo test --test acceptance --
//! --nocapture` to see every line.
//!
//! All tolerances are pinned here; the criteria run on the full 2-shift with
//! Gauss-cylinder geometry and the classical two-sided potential.

use spectra_core::dimension::{
    box_dimension_oracle, check_submultiplicative, compute_covering_table, estimate_du,
    moran_dimension,
};
use spectra_core::extraction::{extract, sample_concatenation_bound, ExtractionParams};
use spectra_core::geometry::{measure_constants, CfGeometry, GeometryModel, TransposedGeometry};
use spectra_core::potential::{markov_value, ClassicalCfPotential, ReflectedPotential};
use spectra_core::realization::{find_maximizers, lagrange_samples, RealizeOptions};
use spectra_core::sublevel::SearchBudget;
use spectra_core::{
    check_complete_subshift, concat, AlphabetKind, PeriodicPoint, TransitionSystem, Word,
};
use std::time::Instant;

fn two_shift() -> TransitionSystem {
    TransitionSystem::full_shift_n(2).unwrap()
}

fn word(syms: &[u8], ts: &TransitionSystem) -> Word {
    Word::new(syms.to_vec(), ts).unwrap()
}

fn periodic(syms: &[u8], ts: &TransitionSystem) -> PeriodicPoint {
    PeriodicPoint::new(word(syms, ts), 0, ts).unwrap()
}

struct Timer {
    start: Instant,
    limit_s: f64,
    name: &'static str,
}

impl Timer {
    fn start(name: &'static str, limit_s: f64) -> Self {
        Self { start: Instant::now(), limit_s, name }
    }

    fn finish(self, detail: String) {
        let elapsed = self.start.elapsed().as_secs_f64();
        assert!(
            elapsed < self.limit_s,
            "{}: runtime {elapsed:.1}s exceeds the {:.0}s budget",
            self.name,
            self.limit_s
        );
        println!("ACCEPTANCE {}: PASS ({detail}; {elapsed:.2}s)", self.name);
    }
}

#[test]
fn criterion_01_exact_markov_anchors() {
    let timer = Timer::start("1 exact anchors", 1.0);
    let ts = two_shift();
    let pot = ClassicalCfPotential::new(ts.clone());
    let cases: [(&[u8], f64); 3] = [
        (&[1], 5.0f64.sqrt()),
        (&[2], 2.0 * 2.0f64.sqrt()),
        (&[2, 2, 1, 1], 221.0f64.sqrt() / 5.0),
    ];
    let mut descr = Vec::new();
    for (syms, expect) in cases {
        let got = markov_value(&periodic(syms, &ts), &pot);
        assert!(
            (got - expect).abs() < 1e-12,
            "period {syms:?}: got {got}, expected {expect}"
        );
        descr.push(format!("{got:.12}"));
    }
    timer.finish(format!("values {}", descr.join(", ")));
}

#[test]
fn criterion_02_empty_sublevel_below_hurwitz() {
    let timer = Timer::start("2 empty sublevel at t=2.2", 10.0);
    let ts = two_shift();
    let gm = CfGeometry;
    let pot = ClassicalCfPotential::new(ts.clone());
    let consts = measure_constants(&ts, &gm, 8).unwrap();
    let table =
        compute_covering_table(2.2, 20, &ts, &gm, &pot, SearchBudget::default(), false).unwrap();
    for r in 0..=20 {
        assert_eq!((table.lower(r), table.upper(r)), (0, 0), "nonzero count at r={r}");
    }
    let est = estimate_du(&table, 2, 20, ts.len(), &consts).unwrap();
    assert_eq!((est.lower, est.value, est.upper), (0.0, 0.0, 0.0));
    timer.finish("all covering counts (0,0) for r <= 20, estimate exactly 0".into());
}

#[test]
fn criterion_03_discreteness_below_three() {
    let timer = Timer::start("3 discreteness at t=2.5", 60.0);
    let ts = two_shift();
    let gm = CfGeometry;
    let pot = ClassicalCfPotential::new(ts.clone());
    let consts = measure_constants(&ts, &gm, 8).unwrap();
    let table =
        compute_covering_table(2.5, 20, &ts, &gm, &pot, SearchBudget::default(), false).unwrap();
    let mut prev = f64::INFINITY;
    let mut upper_at_20 = f64::NAN;
    for r_max in [8, 12, 16, 20] {
        let est = estimate_du(&table, 2, r_max, ts.len(), &consts).unwrap();
        assert!(est.upper < prev, "upper bracket did not decrease at r_max={r_max}");
        prev = est.upper;
        upper_at_20 = est.upper;
    }
    assert!(upper_at_20 <= 0.05, "upper bracket {upper_at_20} above 0.05");
    timer.finish(format!("upper bracket {upper_at_20:.4} <= 0.05 and decreasing in r_max"));
}

#[test]
fn criterion_04_submultiplicativity() {
    let timer = Timer::start("4 submultiplicativity", 300.0);
    let ts = two_shift();
    let gm = CfGeometry;
    let pot = ClassicalCfPotential::new(ts.clone());
    let consts = measure_constants(&ts, &gm, 8).unwrap();
    let mut checked = 0usize;
    for t in [2.5, 3.1, 3.5, f64::INFINITY] {
        let table =
            compute_covering_table(t, 14, &ts, &gm, &pot, SearchBudget::default(), false)
                .unwrap();
        for n in 1..=13i64 {
            for m in 1..=(14 - n) {
                let rep = check_submultiplicative(&table, n, m, ts.len(), consts.c3).unwrap();
                assert!(rep.holds, "violated at t={t}, n={n}, m={m}: {rep:?}");
                checked += 1;
            }
        }
    }
    timer.finish(format!("{checked} (t,n,m) triples with measured c3 = {}", consts.c3));
}

#[test]
fn criterion_05_estimator_cross_validation() {
    let timer = Timer::start("5 estimator cross-validation", 300.0);
    let ts = two_shift();
    let gm = CfGeometry;
    let pot = ClassicalCfPotential::new(ts.clone());
    let consts = measure_constants(&ts, &gm, 8).unwrap();
    let table = compute_covering_table(
        f64::INFINITY,
        25,
        &ts,
        &gm,
        &pot,
        SearchBudget::default(),
        false,
    )
    .unwrap();
    let du = estimate_du(&table, 2, 25, ts.len(), &consts).unwrap();
    let base = check_complete_subshift(&[word(&[1], &ts), word(&[2], &ts)], &ts, None).unwrap();
    let refined = base.power(12, &ts).unwrap();
    let moran = moran_dimension(&refined, &gm, consts.c1).unwrap();
    let depth10 = spectra_core::enumerate_words(&ts, |_| true, |w| w.len() >= 10, 11).unwrap();
    let intervals: Vec<(f64, f64)> = depth10.iter().map(|w| gm.u_interval(w)).collect();
    let boxdim = box_dimension_oracle(&intervals);
    for (a, b, name) in [
        (du.value, moran.value, "fekete/moran"),
        (du.value, boxdim, "fekete/box"),
        (moran.value, boxdim, "moran/box"),
    ] {
        assert!((a - b).abs() <= 0.05, "{name} disagree: {a:.4} vs {b:.4}");
    }
    // Informational: the literature value for dim(E_2) is about 0.5313; it is
    // printed for comparison and not asserted as ground truth.
    println!(
        "  estimators: fekete {:.4}, moran {:.4}, box {:.4}; literature dim(E_2) ~ 0.5313",
        du.value, moran.value, boxdim
    );
    timer.finish(format!(
        "pairwise within 0.05 (fekete {:.4}, moran {:.4}, box {:.4})",
        du.value, moran.value, boxdim
    ));
}

#[test]
fn criterion_06_stable_unstable_symmetry() {
    let timer = Timer::start("6 conservative symmetry", 60.0);
    let ts = two_shift();
    let gm = CfGeometry;
    let pot = ClassicalCfPotential::new(ts.clone());
    let tts = ts.transpose();
    let tgm = TransposedGeometry::new(&gm);
    let tpot = ReflectedPotential::new(&pot);
    let mut pairs = 0usize;
    for t in [2.5, 3.0, 3.1, 3.3, f64::INFINITY] {
        let nu = compute_covering_table(t, 10, &ts, &gm, &pot, SearchBudget::default(), false)
            .unwrap();
        let ns = compute_covering_table(t, 10, &tts, &tgm, &tpot, SearchBudget::default(), false)
            .unwrap();
        for r in 0..=10 {
            assert_eq!(
                (nu.lower(r), nu.upper(r)),
                (ns.lower(r), ns.upper(r)),
                "N_s != N_u at t={t}, r={r}"
            );
            pairs += 1;
        }
    }
    timer.finish(format!("N_s(t,r) = N_u(t,r) exactly on {pairs} grid points"));
}

#[test]
fn criterion_07_semicontinuity_evidence() {
    let timer = Timer::start("7 semicontinuity evidence", 1800.0);
    let ts = two_shift();
    let gm = CfGeometry;
    let pot = ClassicalCfPotential::new(ts.clone());
    let consts = measure_constants(&ts, &gm, 8).unwrap();
    let mut brackets = Vec::new();
    let mut t = 2.9;
    while t <= 3.6 + 1e-9 {
        let table =
            compute_covering_table(t, 16, &ts, &gm, &pot, SearchBudget::default(), false)
                .unwrap();
        let est = estimate_du(&table, 2, 16, ts.len(), &consts).unwrap();
        brackets.push((t, est.lower, est.upper));
        t += 0.05;
    }
    for pair in brackets.windows(2) {
        let (t0, _, upper0) = pair[0];
        let (t1, lower1, upper1) = pair[1];
        assert!(
            lower1 <= upper0 + 0.05,
            "certified jump between t={t0} and t={t1}: lower {lower1} vs upper {upper0}"
        );
        assert!(
            upper1 >= upper0 - 0.05,
            "upper envelope drops between t={t0} and t={t1}: {upper0} -> {upper1}"
        );
    }
    timer.finish(format!(
        "{} grid points in [2.9, 3.6]; no certified jump above 0.05",
        brackets.len()
    ));
}

#[test]
fn criterion_08_extraction_soundness() {
    let timer = Timer::start("8 extraction soundness at t=3.1", 600.0);
    let ts = two_shift();
    let gm = CfGeometry;
    let pot = ClassicalCfPotential::new(ts.clone());
    let params = ExtractionParams::desk(3.1, 0.5);
    let res = extract(&params, &ts, &gm, &pot).unwrap();
    assert!(res.delta > 0.0, "no positive containment margin");
    assert!(matches!(res.b.kind(), AlphabetKind::Framed { .. }));

    // 10^3 random windows of B-concatenations, certified with deep context.
    let worst = sample_concatenation_bound(&res.b, &pot, 1000, 5, 48, 2026).unwrap();
    assert!(
        worst <= 3.1 - res.delta + 1e-9,
        "sampled window bound {worst} above {}",
        3.1 - res.delta
    );

    // Every periodic concatenation of at most 3 alphabet words.
    let words = res.b.words();
    let mut periodic_checked = 0usize;
    let mut stack: Vec<Vec<usize>> = vec![vec![]];
    while let Some(tuple) = stack.pop() {
        if !tuple.is_empty() {
            let parts: Vec<Word> = tuple.iter().map(|&i| words[i].clone()).collect();
            let p = PeriodicPoint::new(concat(&parts, &ts).unwrap(), 0, &ts).unwrap();
            let m = markov_value(&p, &pot);
            assert!(
                m <= 3.1 - res.delta + 1e-9,
                "periodic concatenation {tuple:?} has markov {m}"
            );
            periodic_checked += 1;
        }
        if tuple.len() < 3 {
            for i in 0..words.len() {
                let mut next = tuple.clone();
                next.push(i);
                stack.push(next);
            }
        }
    }

    // The inner dimension never exceeds the sublevel's upper bracket.
    assert!(
        res.moran.value <= res.du.upper + 1e-12,
        "moran {} above Du upper {}",
        res.moran.value,
        res.du.upper
    );
    timer.finish(format!(
        "delta {:.4}; {} words; 1000 windows and {periodic_checked} periodic concatenations below t - delta",
        res.delta,
        words.len()
    ));
}

#[test]
fn criterion_09_sandwich_chain() {
    let timer = Timer::start("9 sandwich chain", 300.0);
    let ts = two_shift();
    let gm = CfGeometry;
    let pot = ClassicalCfPotential::new(ts.clone());
    let params = ExtractionParams::desk(3.1, 0.5);
    let res = extract(&params, &ts, &gm, &pot).unwrap();

    // Moran bracket: quoted lower-bound formula <= value <= box oracle + 0.05.
    assert!(res.moran.lower <= res.moran.value + 1e-12);
    let words = res.b.words();
    let mut power = 1usize;
    let mut family = res.b.clone();
    while words.len().pow(power as u32 + 1) <= 20_000 {
        power += 1;
        family = res.b.power(power, &ts).unwrap();
    }
    let intervals: Vec<(f64, f64)> = family.words().iter().map(|w| gm.u_interval(w)).collect();
    let boxdim = box_dimension_oracle(&intervals);
    assert!(
        res.moran.value <= boxdim + 0.05,
        "moran {} above box oracle {boxdim} + 0.05",
        res.moran.value
    );

    // Realized Lagrange values from a sub-alphabet stay below t - delta.
    let mut scored: Vec<(f64, Word)> = words
        .iter()
        .map(|w| {
            let p = PeriodicPoint::new(w.clone(), 0, &ts).unwrap();
            (markov_value(&p, &pot), w.clone())
        })
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    let kept: Vec<Word> = scored.into_iter().take(2).map(|(_, w)| w).collect();
    let sub = check_complete_subshift(&kept, &ts, None).unwrap();
    let ms = find_maximizers(&sub, 1, &pot, &ts).unwrap();
    let values = lagrange_samples(&ms, &pot, &ts, 25, 7, RealizeOptions::default()).unwrap();
    for v in &values {
        assert!(*v <= 3.1 - res.delta + 1e-9, "realized value {v} above t - delta");
    }
    timer.finish(format!(
        "moran [{:.4} <= {:.4}] <= box {boxdim:.4} + 0.05; {} realized values below t - delta",
        res.moran.lower,
        res.moran.value,
        values.len()
    ));
}

#[test]
fn criterion_10_realization_identity() {
    let timer = Timer::start("10 realization identity", 120.0);
    let ts = two_shift();
    let pot = ClassicalCfPotential::new(ts.clone());
    let b = check_complete_subshift(&[word(&[1], &ts), word(&[2], &ts)], &ts, None).unwrap();
    let ms = find_maximizers(&b, 2, &pot, &ts).unwrap();
    assert!(ms.eta_gap > 0.0);
    // realize() verifies the 1e-9 identity and the gap property internally
    // and errors on any violation; 100 successes are 100 passes.
    let values = lagrange_samples(&ms, &pot, &ts, 100, 123, RealizeOptions::default()).unwrap();
    assert_eq!(values.len(), 100);
    for v in &values {
        assert!(*v <= ms.max_lower + 1e-9 && *v >= ms.insertion_lower - 1e-9);
    }
    timer.finish(format!(
        "100 x-words passed the 1e-9 identity and gap checks (eta_gap {:.3e})",
        ms.eta_gap
    ));
}
