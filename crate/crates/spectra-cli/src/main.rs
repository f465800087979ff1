//! `spectra`: dimension curves, subshift extraction, Lagrange sampling, and
//! invariant verification for dynamical Markov/Lagrange spectra.
//!
//! Exit codes: 0 success, 2 clean mathematical impossibility (for instance an
//! empty sublevel set), 1 any other error.

mod cache;
mod config;
mod envelope;

use cache::TableCache;
use clap::{Args, Parser, Subcommand};
use config::RunConfig;
use envelope::ResultEnvelope;
use spectra_core::dimension::{compute_covering_table, estimate_du};
use spectra_core::extraction::{extract, ExtractionParams};
use spectra_core::geometry::measure_constants;
use spectra_core::potential::markov_value;
use spectra_core::realization::{find_maximizers, lagrange_samples, RealizeOptions};
use spectra_core::sublevel::SearchBudget;
use spectra_core::verify::run_invariant_suite;
use spectra_core::{enumerate_words, Error as CoreError, PeriodicPoint, Word};
use std::io::Write;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "spectra", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Path to a RunConfig JSON file; defaults to the 2-shift classical model.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the payload (CSV or JSON) to this file; stdout always carries
    /// the result envelope.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; results are identical for any value.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Membership search budget level.
    #[arg(long, global = true)]
    budget: Option<u32>,
    /// Seed for randomized sampling.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Certified dimension brackets of the sublevel set over a threshold grid.
    DimensionCurve {
        #[command(flatten)]
        common: CommonArgs,
        /// Grid `start:end:step`, inclusive of both ends (within step/2).
        #[arg(long = "t-grid")]
        t_grid: String,
        #[arg(long = "r-max", default_value_t = 14)]
        r_max: i64,
        #[arg(long = "r-min", default_value_t = 2)]
        r_min: i64,
    },
    /// Extract a framed complete subshift certified inside `Σ_{t-δ}`.
    Extract {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 0.5)]
        eta: f64,
        #[arg(long, default_value_t = 4)]
        r0: i64,
        #[arg(long, default_value_t = 6)]
        k: usize,
        #[arg(long = "frame-len", default_value_t = 2)]
        frame_len: usize,
        #[arg(long, default_value_t = 3)]
        spacing: usize,
        #[arg(long, default_value_t = 0.9)]
        threshold: f64,
        /// Continue with the whole pool when nothing passes the threshold.
        #[arg(long = "allow-lowered")]
        allow_lowered: bool,
    },
    /// Realize Lagrange values inside the spectrum via maximizer removal.
    LagrangeSample {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 100)]
        count: usize,
        /// Block radius for the maximizer search.
        #[arg(long, default_value_t = 1)]
        m: usize,
        /// Trim the extracted alphabet to this many quietest words before the
        /// block search.
        #[arg(long = "max-words", default_value_t = 3)]
        max_words: usize,
        #[arg(long, default_value_t = 0.5)]
        eta: f64,
        #[arg(long, default_value_t = 4)]
        r0: i64,
        #[arg(long, default_value_t = 6)]
        k: usize,
    },
    /// Run every module's property suite and report pass/fail.
    VerifyInvariants {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 8)]
        depth: usize,
    },
    /// Markov/Lagrange values of all periodic orbits up to a period.
    SpectrumTable {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long = "max-period", default_value_t = 6)]
        max_period: usize,
    },
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e.downcast_ref::<CoreError>() {
                Some(
                    CoreError::ExtractionImpossible { .. }
                    | CoreError::CertificationFailed { .. }
                    | CoreError::GapInconclusive { .. },
                ) => 2,
                _ => 1,
            }
        }
    };
    std::process::exit(code);
}

type AnyError = Box<dyn std::error::Error + Send + Sync>;

fn load_config(common: &CommonArgs) -> Result<RunConfig, AnyError> {
    let mut config = match &common.config {
        Some(path) => serde_json::from_slice(&std::fs::read(path)?)?,
        None => RunConfig::default(),
    };
    if let Some(w) = common.workers {
        config.workers = w.max(1);
    }
    if let Some(b) = common.budget {
        config.budget_level = b;
    }
    if let Some(s) = common.seed {
        config.seed = s;
    }
    Ok(config)
}

fn emit(
    common: &CommonArgs,
    config: &RunConfig,
    command: &str,
    payload_kind: &str,
    payload: serde_json::Value,
    wall_ms: u128,
) -> Result<(), AnyError> {
    let envelope = ResultEnvelope {
        config_hash: config.hash(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.to_string(),
        seed: config.seed,
        payload_kind: payload_kind.to_string(),
        payload,
    };
    if let Some(path) = &common.out {
        let bytes = envelope.payload_bytes();
        std::fs::write(path, bytes)?;
    }
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    serde_json::to_writer(&mut lock, &envelope)?;
    writeln!(lock)?;
    eprintln!("{command}: done in {wall_ms} ms");
    Ok(())
}

fn run(cli: Cli) -> Result<(), AnyError> {
    match cli.command {
        Command::DimensionCurve { common, t_grid, r_max, r_min } => {
            let config = load_config(&common)?;
            with_pool(config.workers, || dimension_curve(&common, &config, &t_grid, r_min, r_max))
        }
        Command::Extract { common, t, eta, r0, k, frame_len, spacing, threshold, allow_lowered } => {
            let config = load_config(&common)?;
            let params = ExtractionParams {
                r0,
                k,
                frame_len,
                spacing,
                good_threshold: threshold,
                allow_lowered_threshold: allow_lowered,
                budget_level: config.budget_level,
                ..ExtractionParams::desk(t, eta)
            };
            with_pool(config.workers, || run_extract(&common, &config, &params))
        }
        Command::LagrangeSample { common, t, count, m, max_words, eta, r0, k } => {
            let config = load_config(&common)?;
            let params = ExtractionParams {
                r0,
                k,
                budget_level: config.budget_level,
                ..ExtractionParams::desk(t, eta)
            };
            with_pool(config.workers, || {
                run_lagrange_sample(&common, &config, &params, count, m, max_words)
            })
        }
        Command::VerifyInvariants { common, depth } => {
            let config = load_config(&common)?;
            with_pool(config.workers, || run_verify(&common, &config, depth))
        }
        Command::SpectrumTable { common, max_period } => {
            let config = load_config(&common)?;
            with_pool(config.workers, || run_spectrum_table(&common, &config, max_period))
        }
    }
}

fn with_pool<T>(workers: usize, f: impl FnOnce() -> T + Send) -> T
where
    T: Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("thread pool");
    pool.install(f)
}

fn parse_grid(spec: &str) -> Result<Vec<f64>, AnyError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("grid `{spec}` is not start:end:step").into());
    }
    let start: f64 = parts[0].parse()?;
    let end: f64 = parts[1].parse()?;
    let step: f64 = parts[2].parse()?;
    if step <= 0.0 || end < start {
        return Err(format!("grid `{spec}` is empty or reversed").into());
    }
    let mut out = Vec::new();
    let mut i = 0u32;
    loop {
        let t = start + step * i as f64;
        if t > end + step * 0.5 {
            break;
        }
        out.push(t);
        i += 1;
    }
    Ok(out)
}

fn dimension_curve(
    common: &CommonArgs,
    config: &RunConfig,
    grid: &str,
    r_min: i64,
    r_max: i64,
) -> Result<(), AnyError> {
    let start = std::time::Instant::now();
    let ts = &config.system;
    let gm = config.build_geometry()?;
    let pot = config.build_potential()?;
    let budget = SearchBudget::from_level(config.budget_level);
    let constants = measure_constants(ts, gm.as_ref(), 8)?;
    let cache = TableCache::from_env();
    let hash = config.hash();
    let mut csv = String::new();
    csv.push_str(&format!("# config_hash={hash}\n"));
    csv.push_str("t,lower,value,upper,r_min,r_max\n");
    for t in parse_grid(grid)? {
        let table = match cache.as_ref().and_then(|c| c.load(&hash, t, r_max, config.budget_level))
        {
            Some(table) => table,
            None => {
                let table =
                    compute_covering_table(t, r_max, ts, gm.as_ref(), pot.as_ref(), budget, false)?;
                if let Some(c) = cache.as_ref() {
                    if let Err(e) = c.store(&hash, t, r_max, config.budget_level, &table) {
                        eprintln!("warning: cache store failed: {e}");
                    }
                }
                table
            }
        };
        let est = estimate_du(&table, r_min, r_max, ts.len(), &constants)?;
        csv.push_str(&format!(
            "{t:.6},{:.10},{:.10},{:.10},{},{}\n",
            est.lower, est.value, est.upper, est.r_used.0, est.r_used.1
        ));
    }
    emit(
        common,
        config,
        "dimension-curve",
        "csv",
        serde_json::Value::String(csv),
        start.elapsed().as_millis(),
    )
}

fn run_extract(
    common: &CommonArgs,
    config: &RunConfig,
    params: &ExtractionParams,
) -> Result<(), AnyError> {
    let start = std::time::Instant::now();
    let gm = config.build_geometry()?;
    let pot = config.build_potential()?;
    let result = extract(params, &config.system, gm.as_ref(), pot.as_ref())?;
    eprintln!(
        "extracted {} words (gamma1 {}, gamma2 {}), delta = {:.6}, dim >= {:.6}, eta achieved {:.4}",
        result.b.len(),
        result.gamma1,
        result.gamma2,
        result.delta,
        result.dim_lower,
        result.achieved_eta,
    );
    for w in result.warnings.iter() {
        eprintln!("warning: {w}");
    }
    let payload = serde_json::to_value(&result)?;
    emit(common, config, "extract", "json", payload, start.elapsed().as_millis())
}

fn run_lagrange_sample(
    common: &CommonArgs,
    config: &RunConfig,
    params: &ExtractionParams,
    count: usize,
    m: usize,
    max_words: usize,
) -> Result<(), AnyError> {
    let start = std::time::Instant::now();
    let ts = &config.system;
    let gm = config.build_geometry()?;
    let pot = config.build_potential()?;
    let result = extract(params, ts, gm.as_ref(), pot.as_ref())?;
    // Trim to the quietest words: realization block counts grow as the cube
    // of the alphabet. A sub-alphabet of a complete subshift is one too.
    let mut scored: Vec<(f64, Word)> = result
        .b
        .words()
        .iter()
        .map(|w| {
            let p = PeriodicPoint::new(w.clone(), 0, ts).expect("framed words close");
            (markov_value(&p, pot.as_ref()), w.clone())
        })
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    let kept: Vec<Word> =
        scored.into_iter().take(max_words.max(2)).map(|(_, w)| w).collect();
    let b = spectra_core::check_complete_subshift(&kept, ts, None)?;
    let ms = find_maximizers(&b, m, pot.as_ref(), ts)?;
    let values = lagrange_samples(
        &ms,
        pot.as_ref(),
        ts,
        count,
        config.seed,
        RealizeOptions::default(),
    )?;
    let mut csv = String::new();
    csv.push_str(&format!("# config_hash={}\n", config.hash()));
    csv.push_str(&format!(
        "# t={}, delta={:.8}, insertion_lower={:.8}, eta_gap={:.3e}\n",
        params.t, result.delta, ms.insertion_lower, ms.eta_gap
    ));
    csv.push_str("lagrange_value\n");
    for v in &values {
        csv.push_str(&format!("{v:.12}\n"));
    }
    emit(
        common,
        config,
        "lagrange-sample",
        "csv",
        serde_json::Value::String(csv),
        start.elapsed().as_millis(),
    )
}

fn run_verify(common: &CommonArgs, config: &RunConfig, depth: usize) -> Result<(), AnyError> {
    let start = std::time::Instant::now();
    let gm = config.build_geometry()?;
    let pot = config.build_potential()?;
    let reports = run_invariant_suite(&config.system, gm.as_ref(), pot.as_ref(), depth, config.seed)?;
    let all_pass = reports.iter().all(|r| r.passed);
    for r in &reports {
        eprintln!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
    }
    let payload = serde_json::to_value(&reports)?;
    emit(common, config, "verify-invariants", "json", payload, start.elapsed().as_millis())?;
    if !all_pass {
        return Err("invariant suite reported failures".into());
    }
    Ok(())
}

fn run_spectrum_table(
    common: &CommonArgs,
    config: &RunConfig,
    max_period: usize,
) -> Result<(), AnyError> {
    let start = std::time::Instant::now();
    let ts = &config.system;
    let pot = config.build_potential()?;
    let mut rows: Vec<(Word, f64)> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for len in 1..=max_period {
        let words = enumerate_words(ts, |_| true, |w| w.len() >= len, len + 1)?;
        for w in words {
            if !ts.is_transition(w.last(), w.first()) {
                continue;
            }
            // one row per orbit: smallest rotation of the primitive root
            let primitive = (1..=w.len() / 2).any(|d| {
                w.len() % d == 0 && w.symbols().chunks(d).all(|c| c == &w.symbols()[..d])
            });
            if primitive {
                continue;
            }
            let canon = (0..w.len()).map(|k| w.rotate_left(k)).min().expect("nonempty");
            if !seen.insert(canon.clone()) {
                continue;
            }
            let p = PeriodicPoint::new(canon.clone(), 0, ts)?;
            rows.push((canon, markov_value(&p, pot.as_ref())));
        }
    }
    rows.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    let mut csv = String::new();
    csv.push_str(&format!("# config_hash={}\n", config.hash()));
    csv.push_str("period,markov_value,lagrange_value\n");
    for (w, m) in rows {
        // periodic points have lagrange = markov
        csv.push_str(&format!("{w},{m:.12},{m:.12}\n"));
    }
    emit(
        common,
        config,
        "spectrum-table",
        "csv",
        serde_json::Value::String(csv),
        start.elapsed().as_millis(),
    )
}
