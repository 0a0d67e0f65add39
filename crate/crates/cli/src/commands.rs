//! The five subcommands. Exit codes: 0 pass, 1 theorem-verdict fail,
//! 2 usage/configuration error, 3 numerical-guard trip.

use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};

use nldiff_core::decayfit::{default_scenarios, run_theorem_suite, ScenarioOutcome, ScenarioSpec};
use nldiff_core::io::{dump_array, fmt_float, write_csv, ArrayHeader};
use nldiff_core::kernels::make_kernel;
use nldiff_core::solver::NormP;
use nldiff_core::xseries::{verify_series_asymptotics, BoundednessVerdict};
use nldiff_core::Error as CoreError;

use crate::config::ExperimentConfig;
use crate::manifest::{check_manifest, config_hash, Collector};
use crate::plot::write_loglog_plot;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_GUARD: i32 = 3;

fn code_for_core(err: &CoreError) -> i32 {
    match err {
        CoreError::Resolution(_) | CoreError::Periodization { .. } => EXIT_GUARD,
        _ => EXIT_CONFIG,
    }
}

fn to_io(err: CoreError) -> std::io::Error {
    std::io::Error::other(err.to_string())
}

macro_rules! fail {
    ($code:expr, $($arg:tt)*) => {{
        eprintln!($($arg)*);
        return $code;
    }};
}

macro_rules! try_core {
    ($expr:expr) => {
        match $expr {
            Ok(v) => v,
            Err(e) => {
                let code = code_for_core(&e);
                eprintln!("{e}");
                return code;
            }
        }
    };
}

macro_rules! try_io {
    ($expr:expr) => {
        match $expr {
            Ok(v) => v,
            Err(e) => fail!(EXIT_CONFIG, "i/o error: {e}"),
        }
    };
}

/// Persist the effective configuration next to the outputs so a run can be
/// reproduced from its own directory.
fn record_config(collector: &mut Collector, config: &ExperimentConfig) -> std::io::Result<()> {
    std::fs::write(collector.root().join("config.toml"), config.to_toml())?;
    collector.record_file("config.toml")
}

fn finish(collector: Collector, verify: bool) -> i32 {
    let root = collector.root().to_path_buf();
    if let Err(e) = collector.finish() {
        fail!(EXIT_CONFIG, "failed to write manifest: {e}");
    }
    if verify {
        match check_manifest(&root) {
            Ok((_, mismatches)) if mismatches.is_empty() => {
                println!("check: all recorded files verified");
            }
            Ok((_, mismatches)) => fail!(EXIT_FAIL, "check: digest mismatch in {mismatches:?}"),
            Err(e) => fail!(EXIT_CONFIG, "check: {e}"),
        }
    }
    EXIT_PASS
}

/// `series`: ratio table plus a boundedness verdict.
pub fn cmd_series(config: &ExperimentConfig, out: &Path, verify: bool) -> i32 {
    let spec = match config.series_spec() {
        Ok(s) => s,
        Err(e) => fail!(EXIT_CONFIG, "{e}"),
    };
    let t_grid = match config.time_points() {
        Ok(g) => g,
        Err(e) => fail!(EXIT_CONFIG, "{e}"),
    };
    let mut collector =
        try_io!(Collector::new(out, config_hash(config), config.seed));
    try_io!(record_config(&mut collector, config));
    collector.stage("evaluate");
    let outcome = try_core!(verify_series_asymptotics(&spec, &t_grid));
    collector.stage("write");
    let rows: Vec<Vec<String>> = outcome
        .t_grid
        .iter()
        .zip(outcome.ratios.iter())
        .map(|(&t, &r)| vec![fmt_float(t), fmt_float(r)])
        .collect();
    try_io!(write_csv(out.join("ratios.csv"), &["t", "ratio"], &rows));
    try_io!(collector.record_file("ratios.csv"));
    let verdict = outcome.verdict;
    collector.verdict_line(format!(
        "series scenario={} verdict={verdict:?} top_decade_spread={:.6e}",
        config.scenario,
        outcome.top_decade_spread()
    ));
    println!(
        "series: verdict {verdict:?}, top-decade spread {:.4}",
        outcome.top_decade_spread()
    );
    let code = finish(collector, verify);
    if code != EXIT_PASS {
        return code;
    }
    if verdict == BoundednessVerdict::Bounded {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

/// `kernel`: per-k norms and sharp Young bounds, slope estimate, binary
/// kernel dump.
pub fn cmd_kernel(config: &ExperimentConfig, out: &Path, verify: bool) -> i32 {
    let Some(kc) = &config.kernel else {
        fail!(EXIT_CONFIG, "configuration error: missing [kernel] section");
    };
    let Some(sweep) = &config.kernel_sweep else {
        fail!(EXIT_CONFIG, "configuration error: missing [kernel_sweep] section");
    };
    let family = match kc.family() {
        Ok(f) => f,
        Err(e) => fail!(EXIT_CONFIG, "{e}"),
    };
    if sweep.k_min == 0 || sweep.k_max < sweep.k_min || sweep.points_per_decade == 0 {
        fail!(
            EXIT_CONFIG,
            "configuration error: kernel_sweep range [{}, {}] invalid",
            sweep.k_min,
            sweep.k_max
        );
    }
    let kernel = try_core!(make_kernel(&family, kc.n, kc.half_width, kc.points_per_axis));
    let trustworthy = kernel.max_trustworthy_k(sweep.k_max);
    if trustworthy < sweep.k_max {
        fail!(
            EXIT_CONFIG,
            "configuration error: kernel_sweep.k_max = {} exceeds the trustworthy limit {} \
             (wrap-around mass above 1e-6); shrink the range or enlarge the domain",
            sweep.k_max,
            trustworthy
        );
    }

    let mut collector = try_io!(Collector::new(out, config_hash(config), config.seed));
    try_io!(record_config(&mut collector, config));
    collector.stage("sweep");
    let decades = ((sweep.k_max as f64 / sweep.k_min as f64).log10()).max(0.0);
    let count = ((decades * sweep.points_per_decade as f64).ceil() as usize + 1).max(2);
    let ks = nldiff_core::decayfit::log_spaced_k(sweep.k_min, sweep.k_max, count);
    let mut rows = Vec::new();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut bound_holds = true;
    for &k in &ks {
        let power = try_core!(kernel.convolution_power(k));
        let bound = try_core!(kernel.sharp_young_bound(k, sweep.gamma_probe));
        if power.sup_norm > bound.intermediate {
            bound_holds = false;
        }
        xs.push((k as f64).ln());
        ys.push(power.sup_norm.ln());
        rows.push(vec![
            k.to_string(),
            fmt_float(power.sup_norm),
            fmt_float(power.l1_norm),
            fmt_float(bound.intermediate),
            fmt_float(power.wraparound_estimate),
        ]);
    }
    let n = xs.len() as f64;
    let xm = xs.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
    let sxy: f64 = xs.iter().zip(ys.iter()).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let slope = sxy / sxx;

    collector.stage("write");
    try_io!(write_csv(
        out.join("norms_vs_k.csv"),
        &["k", "sup_norm", "l1_norm", "bound", "wraparound_estimate"],
        &rows
    ));
    try_io!(collector.record_file("norms_vs_k.csv"));
    let header = ArrayHeader {
        dim: kc.n,
        half_width: kc.half_width,
        points_per_axis: kc.points_per_axis,
        family: kernel.family_name().to_string(),
        params: kernel.family_params().to_vec(),
    };
    try_io!(dump_array(out.join("kernel.bin"), &header, kernel.samples())
        .map_err(|e| std::io::Error::other(e.to_string())));
    try_io!(collector.record_file("kernel.bin"));
    collector.verdict_line(format!(
        "kernel scenario={} slope={slope:.6e} bound_holds={bound_holds}",
        config.scenario
    ));
    println!("kernel: slope {slope:.4} over k in [{}, {}], bounds hold: {bound_holds}",
        sweep.k_min, sweep.k_max);
    let code = finish(collector, verify);
    if code != EXIT_PASS {
        return code;
    }
    if bound_holds {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

fn write_outcome(
    collector: &mut Collector,
    rel_dir: &str,
    spec: &ScenarioSpec,
    outcome: &ScenarioOutcome,
    plot: bool,
) -> std::io::Result<bool> {
    let dir = collector.root().join(rel_dir);
    std::fs::create_dir_all(&dir)?;
    let join = |name: &str| {
        if rel_dir.is_empty() {
            name.to_string()
        } else {
            format!("{rel_dir}/{name}")
        }
    };

    let rows: Vec<Vec<String>> = outcome
        .table
        .rows
        .iter()
        .map(|r| {
            vec![
                fmt_float(r.t),
                r.method.as_str().to_string(),
                r.p.as_str().to_string(),
                fmt_float(r.value),
            ]
        })
        .collect();
    write_csv(dir.join("norms.csv"), &["t", "method", "p", "norm"], &rows).map_err(to_io)?;
    collector.record_file(&join("norms.csv"))?;

    let mut all_pass = true;
    for fit in &outcome.fits {
        let rows: Vec<Vec<String>> = fit
            .report
            .compensated_ratios
            .iter()
            .map(|&(t, r)| vec![fmt_float(t), fmt_float(r)])
            .collect();
        let name = format!("compensated_{}.csv", fit.p.as_str());
        write_csv(dir.join(&name), &["t", "compensated_ratio"], &rows).map_err(to_io)?;
        collector.record_file(&join(&name))?;
        if fit.report.verdict != nldiff_core::decayfit::Verdict::Pass {
            all_pass = false;
        }
        collector.verdict_line(format!(
            "solve scenario={} p={} beta_expected={:.6e} fitted_exponent={:.6e} stderr={:.6e} \
             verdict={} window=[{:.6e},{:.6e}] flattening_time={:.6e}",
            outcome.name,
            fit.p.as_str(),
            fit.beta_expected,
            fit.report.fitted_exponent,
            fit.report.exponent_stderr,
            fit.report.verdict.as_str(),
            fit.report.fit_window.0,
            fit.report.fit_window.1,
            outcome.flattening_time,
        ));
    }
    if let Some(env) = &outcome.envelope_report {
        let rows: Vec<Vec<String>> = env
            .points
            .iter()
            .map(|p| vec![p.k.to_string(), fmt_float(p.measured), fmt_float(p.envelope)])
            .collect();
        write_csv(dir.join("envelope.csv"), &["k", "measured", "envelope"], &rows).map_err(to_io)?;
        collector.record_file(&join("envelope.csv"))?;
        collector.verdict_line(format!(
            "envelope scenario={} holds={} first_violation={:?}",
            outcome.name,
            env.holds,
            env.first_violation.map(|p| p.k)
        ));
        if !env.holds {
            all_pass = false;
        }
    }
    if plot {
        let sup = outcome.table.series(NormP::Inf);
        if sup.len() >= 2 {
            let beta = outcome
                .fits
                .iter()
                .find(|f| f.p == NormP::Inf)
                .map(|f| -f.beta_expected)
                .unwrap_or(0.0);
            let hash = collector.config_hash().to_string();
            write_loglog_plot(
                &dir.join("plot.svg"),
                &format!("{} ({})", outcome.name, spec.kind.as_str()),
                &sup,
                beta,
                &hash,
            )?;
            collector.record_file(&join("plot.svg"))?;
        }
    }
    Ok(all_pass)
}

/// `solve`: one scenario end to end.
pub fn cmd_solve(config: &ExperimentConfig, out: &Path, plot: bool, verify: bool) -> i32 {
    let spec = match config.scenario_spec() {
        Ok(s) => s,
        Err(e) => fail!(EXIT_CONFIG, "{e}"),
    };
    if spec.t_grid.len() < 2 {
        fail!(EXIT_CONFIG, "configuration error: time grid needs at least 2 points");
    }
    let mut collector = try_io!(Collector::new(out, config_hash(config), config.seed));
    try_io!(record_config(&mut collector, config));
    collector.stage("run");
    let outcome = try_core!(run_theorem_suite(&spec));
    collector.stage("snapshot");
    // Final state in the shared binary format, for reuse across runs.
    {
        let kernel =
            try_core!(make_kernel(&spec.kernel_family, spec.dim, spec.half_width, spec.points_per_axis));
        let u0 = try_core!(nldiff_core::solver::make_initial(&spec.initial, *kernel.meta()));
        let t_last = *spec.t_grid.last().expect("nonempty grid");
        let snap =
            try_core!(nldiff_core::solver::solve_spectral(&kernel, &u0, spec.removal_rate, t_last));
        let header = ArrayHeader {
            dim: spec.dim,
            half_width: spec.half_width,
            points_per_axis: spec.points_per_axis,
            family: "snapshot".into(),
            params: vec![t_last],
        };
        try_io!(dump_array(out.join("snapshot.bin"), &header, &snap.samples).map_err(to_io));
        try_io!(collector.record_file("snapshot.bin"));
    }
    collector.stage("write");
    let all_pass = try_io!(write_outcome(&mut collector, "", &spec, &outcome, plot));
    for fit in &outcome.fits {
        println!(
            "solve {}: p={} fitted {:+.4} (expected {:+.4}) verdict {}",
            outcome.name,
            fit.p.as_str(),
            fit.report.fitted_exponent,
            -fit.beta_expected,
            fit.report.verdict.as_str()
        );
    }
    let code = finish(collector, verify);
    if code != EXIT_PASS {
        return code;
    }
    if all_pass {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

/// `suite`: the full scenario battery with a worker cap; results are
/// written by this single thread in scenario order.
pub fn cmd_suite(out: &Path, workers: Option<usize>, seed: u64, plot: bool, verify: bool) -> i32 {
    let specs = default_scenarios();
    let cap = workers
        .unwrap_or_else(|| {
            std::thread::available_parallelism().map(|v| v.get().min(4)).unwrap_or(1)
        })
        .clamp(1, specs.len());
    let suite_tag = format!(
        "suite:{}:{}",
        env!("CARGO_PKG_VERSION"),
        specs.iter().map(|s| s.name.as_str()).collect::<Vec<_>>().join(",")
    );
    let mut collector =
        try_io!(Collector::new(out, crate::manifest::hex_digest(suite_tag.as_bytes()), seed));
    collector.stage("run");
    let results: Vec<Option<nldiff_core::Result<ScenarioOutcome>>> = {
        let next = AtomicUsize::new(0);
        let specs_ref = &specs;
        let next_ref = &next;
        std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for _ in 0..cap {
                handles.push(scope.spawn(move || {
                    let mut local = Vec::new();
                    loop {
                        let i = next_ref.fetch_add(1, Ordering::Relaxed);
                        if i >= specs_ref.len() {
                            break;
                        }
                        local.push((i, run_theorem_suite(&specs_ref[i])));
                    }
                    local
                }));
            }
            let mut slots: Vec<Option<nldiff_core::Result<ScenarioOutcome>>> =
                (0..specs.len()).map(|_| None).collect();
            for handle in handles {
                for (i, r) in handle.join().expect("worker panicked") {
                    slots[i] = Some(r);
                }
            }
            slots
        })
    };

    collector.stage("write");
    let mut all_pass = true;
    for (spec, result) in specs.iter().zip(results.into_iter()) {
        match result.expect("scenario slot filled") {
            Ok(outcome) => {
                let ok = try_io!(write_outcome(&mut collector, &spec.name, spec, &outcome, plot));
                println!(
                    "suite {}: {}",
                    spec.name,
                    if ok { "pass" } else { "FAIL" }
                );
                if !ok {
                    all_pass = false;
                }
            }
            Err(e) => {
                let code = code_for_core(&e);
                eprintln!("suite {}: {e}", spec.name);
                return code;
            }
        }
    }
    let code = finish(collector, verify);
    if code != EXIT_PASS {
        return code;
    }
    if all_pass {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

/// `check`: verify manifest digests in an output directory.
pub fn cmd_check(out: &Path) -> i32 {
    match check_manifest(out) {
        Ok((manifest, mismatches)) => {
            if mismatches.is_empty() {
                println!(
                    "check: {} files verified against manifest {}",
                    manifest.files.len(),
                    manifest.config_hash
                );
                EXIT_PASS
            } else {
                eprintln!("check: digest mismatch in {mismatches:?}");
                EXIT_FAIL
            }
        }
        Err(e) => {
            eprintln!("check: cannot read manifest: {e}");
            EXIT_CONFIG
        }
    }
}
