use std::path::{Path, PathBuf};

use rflab_core::flow::FlowStatus;
use rflab_core::functionals::kappa_monitor_strided;
use rflab_core::metric_spaces::consecutive_windows;
use rflab_core::verification::MAX_FIT_RESIDUAL;
use rflab_core::{distortion_ledger, dyadic_decompose, estimate_singular_time, gap_report, run, sup_norms};

use crate::artifacts::*;
use crate::scenario_file::parse_scenario;
use crate::CliError;

/// Snapshots between κ̂ evaluations aim for about this many evaluations.
const KAPPA_EVALUATIONS: usize = 200;
/// Ledger windows per run.
const LEDGER_WINDOWS: usize = 40;

/// Summary printed after a run.
pub struct RunOutcome {
    pub dir: PathBuf,
    pub status: FlowStatus,
}

pub fn cmd_run(scenario_path: &Path, root: &Path) -> Result<RunOutcome, CliError> {
    let resolved = parse_scenario(scenario_path)?;
    let started = unix_now();
    let stem = scenario_path
        .file_stem()
        .map_or_else(|| "run".to_string(), |s| s.to_string_lossy().into_owned());
    let dir = root.join(stem);
    std::fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;

    let trace = run(&resolved.scenario).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut series = sup_norms(&trace);
    if let Ok(fit) = estimate_singular_time(&trace) {
        if fit.residual < MAX_FIT_RESIDUAL {
            series = series.with_t_hat(fit.t_hat, &resolved.lambda_list);
        }
    }
    let t0 = trace.times[0];
    let decomposition = dyadic_decompose(&trace, t0);
    let kappa = kappa_monitor_strided(&trace, trace.len().div_ceil(KAPPA_EVALUATIONS));
    let windows = consecutive_windows(&trace, trace.len().div_ceil(LEDGER_WINDOWS));
    let ledger = distortion_ledger(&trace, &resolved.meridian_pairs(), &windows)
        .map_err(|e| CliError::Breakdown(format!("distortion ledger: {e}")))?;
    let report = gap_report(&trace, &series, &decomposition, Some(&kappa));

    write_trace(&dir.join(TRACE_CSV), &trace_rows(&trace, &kappa))?;
    write_profiles(&dir.join(PROFILES_CSV), &trace, resolved.profile_stride)?;
    write_functionals(&dir.join(FUNCTIONALS_CSV), &series)?;
    write_dyadic(&dir.join(DYADIC_CSV), &decomposition)?;
    write_ledger(&dir.join(LEDGER_CSV), &ledger)?;
    write_json(&dir.join(GAP_REPORT), &report)?;
    write_atomic(&dir.join(PLOT_SCRIPT), plot_script().as_bytes())?;

    let names = [TRACE_CSV, PROFILES_CSV, FUNCTIONALS_CSV, DYADIC_CSV, LEDGER_CSV, GAP_REPORT, PLOT_SCRIPT];
    let manifest = RunManifest {
        schema: crate::scenario_file::SCHEMA_VERSION,
        tool: env!("CARGO_PKG_NAME").into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        scenario_path: scenario_path.display().to_string(),
        resolved,
        started_unix: started,
        finished_unix: unix_now(),
        status: trace.status.clone(),
        steps: trace.steps,
        snapshots: trace.len(),
        artifacts: digest_artifacts(&dir, &names)?,
    };
    write_json(&dir.join(MANIFEST), &manifest)?;

    println!("status: {:?}", trace.status);
    println!("snapshots: {}  steps: {}  t_end: {}", trace.len(), trace.steps, trace.times.last().unwrap());
    if let Some(b) = &series.blowup {
        println!("estimated singular time: {}", b.t_hat);
    }
    println!("dyadic levels: {}", decomposition.levels.len());
    for e in &report.entries {
        let value = e.value.map_or("-".to_string(), |v| format!("{v:.6}"));
        println!("  {:<28} {:>14}  {:?}", e.name, value, e.verdict);
    }
    println!("artifacts in {}", dir.display());
    Ok(RunOutcome {
        dir,
        status: trace.status,
    })
}
