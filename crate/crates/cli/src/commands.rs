//! The CLI verbs as library functions, so tests can drive them directly.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use ethics2vec::sim::{self, BinaryAgentResult, LawResult, RNG_ALGORITHM};
use ethics2vec::{
    aggregate_ethics_vector, audit_binary_agent, build_empirical_roc, ethics_trace, weight_ratio,
    BinaryAudit, RiskModel, WeightRatioMethod,
};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::Config;
use crate::error::{CliError, Result};
use crate::logio;
use crate::report::{AuditReport, Diagnostic, EthicsVectorReport, WeightRatios};

pub const THREADS_ENV: &str = "ETHICS_AUDIT_THREADS";

/// Runs `job` on a pool capped by `ETHICS_AUDIT_THREADS` when it is set.
pub fn with_thread_pool<T: Send>(job: impl FnOnce() -> T + Send) -> Result<T> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(raw) => match raw.trim().parse::<usize>() {
            Ok(n) if n > 0 => n,
            _ => return Err(CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got `{raw}`"))),
        },
        Err(_) => 0,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker threads: {e}")))?;
    Ok(pool.install(job))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| CliError::io(format!("creating {}", parent.display()), e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(format!("creating {}", path.display()), e))
}

fn write_file(path: &Path, fill: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<PathBuf> {
    let mut out = create(path)?;
    fill(&mut out)
        .and_then(|_| out.flush())
        .map_err(|e| CliError::io(format!("writing {}", path.display()), e))?;
    Ok(path.to_path_buf())
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<PathBuf> {
    write_file(path, |out| {
        serde_json::to_writer_pretty(&mut *out, value)?;
        writeln!(out)
    })
}

fn write_resolved_config(out_dir: &Path, config: &Config) -> Result<PathBuf> {
    write_file(&out_dir.join("resolved_config.toml"), |out| out.write_all(config.to_toml().as_bytes()))
}

fn binary_report(agent_id: String, audit: &BinaryAudit, config_echo: serde_json::Value, seed: u64) -> AuditReport {
    let mut diagnostics = vec![
        Diagnostic::new("slope", audit.slope),
        Diagnostic::new("tau_star_estimate", audit.threshold.tau),
        Diagnostic::new("threshold_violations", audit.threshold.violations as f64),
        Diagnostic::new("p_n", audit.priors.p_n()),
        Diagnostic::new("p_p", audit.priors.p_p()),
        Diagnostic::new("operating_fpr", audit.operating_point.0),
        Diagnostic::new("operating_tpr", audit.operating_point.1),
    ];
    if let Some(fit) = audit.fit {
        diagnostics.extend([
            Diagnostic::new("mu0", fit.mu0),
            Diagnostic::new("sigma0", fit.sigma0),
            Diagnostic::new("mu1", fit.mu1),
            Diagnostic::new("sigma1", fit.sigma1),
        ]);
    }
    if let Some(bw) = audit.bandwidth {
        diagnostics.push(Diagnostic::new("bandwidth", bw));
    }
    AuditReport {
        agent_id,
        method: audit.method.to_string(),
        recovered_ratio: audit.recovered_ratio,
        ethics_vector: EthicsVectorReport::Binary(audit.ethics),
        weight_ratio: None,
        diagnostics,
        config_echo,
        seed,
    }
}

/// Audits one logged agent. Writes `audit_report.json` (and the ROC points
/// when `emit_roc` is given).
pub fn cmd_audit_binary(
    log_path: &Path,
    agent_id: Option<&str>,
    emit_roc: Option<&Path>,
    config: &Config,
    out_dir: &Path,
) -> Result<AuditReport> {
    let log = logio::load_decision_log(log_path)?;
    let audit = audit_binary_agent(&log, &config.audit)?;
    if let Some(path) = emit_roc {
        let roc = build_empirical_roc(&log, None)?;
        write_file(path, |out| logio::write_roc(&roc, out))?;
    }
    let agent_id = agent_id
        .map(str::to_string)
        .or_else(|| log_path.file_stem().map(|s| s.to_string_lossy().into_owned()))
        .unwrap_or_else(|| "agent".into());
    let echo = json!({
        "command": "audit-binary",
        "log": log_path.display().to_string(),
        "records": log.len(),
        "audit": config.audit,
    });
    let report = binary_report(agent_id, &audit, echo, config.binary.seed);
    write_json(&out_dir.join("audit_report.json"), &report)?;
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct BinarySummary {
    pub agents: usize,
    pub pearson: f64,
    pub max_relative_error: f64,
}

#[derive(Debug, Clone)]
pub struct BinaryExperimentOutput {
    pub rows: Vec<BinaryAgentResult>,
    pub reports: Vec<AuditReport>,
    pub summary: BinarySummary,
    pub files: Vec<PathBuf>,
}

pub fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Generates and audits every configured binary agent.
pub fn cmd_experiment_binary(config: &Config, out_dir: &Path) -> Result<BinaryExperimentOutput> {
    config.validate()?;
    let exp = &config.binary;
    let rows = with_thread_pool(|| {
        (0..exp.ratios.len())
            .into_par_iter()
            .map(|i| sim::run_binary_agent(exp, &config.audit, i))
            .collect::<ethics2vec::Result<Vec<_>>>()
    })??;

    let truth: Vec<f64> = rows.iter().map(|r| r.true_ratio).collect();
    let recovered: Vec<f64> = rows.iter().map(|r| r.audit.recovered_ratio).collect();
    let summary = BinarySummary {
        agents: rows.len(),
        pearson: pearson(&truth, &recovered),
        max_relative_error: rows
            .iter()
            .map(|r| (r.audit.recovered_ratio - r.true_ratio).abs() / r.true_ratio)
            .fold(0.0, f64::max),
    };
    let reports: Vec<AuditReport> = rows
        .iter()
        .map(|r| {
            let echo = json!({ "agent": r.index, "true_ratio": r.true_ratio, "agent_seed": r.seed });
            binary_report(format!("agent-{:02}", r.index + 1), &r.audit, echo, exp.seed)
        })
        .collect();

    let mut files = vec![
        write_file(&out_dir.join("binary_recovery.csv"), |out| {
            writeln!(out, "agent,true_ratio,recovered_ratio,relative_error,true_tau_star,tau_star_estimate")?;
            for r in &rows {
                let rel = (r.audit.recovered_ratio - r.true_ratio) / r.true_ratio;
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    r.index + 1,
                    r.true_ratio,
                    r.audit.recovered_ratio,
                    rel,
                    r.true_tau_star,
                    r.audit.threshold.tau
                )?;
            }
            Ok(())
        })?,
        write_file(&out_dir.join("binary_ethics2vec.csv"), |out| {
            writeln!(out, "agent,true_ratio,d_tpr_d_tau,d_fpr_d_tau,slope")?;
            for r in &rows {
                let e = &r.audit.ethics;
                writeln!(out, "{},{},{},{},{}", r.index + 1, r.true_ratio, e.d_tpr_d_tau, e.d_fpr_d_tau, e.slope())?;
            }
            Ok(())
        })?,
    ];
    files.push(write_json(
        &out_dir.join("binary_report.json"),
        &json!({
            "command": "experiment-binary",
            "config_echo": config,
            "seed": exp.seed,
            "rng_algorithm": RNG_ALGORITHM,
            "summary": summary,
            "agents": reports,
        }),
    )?);
    files.push(write_resolved_config(out_dir, config)?);
    Ok(BinaryExperimentOutput { rows, reports, summary, files })
}

#[derive(Debug, Clone)]
pub struct CarExperimentOutput {
    pub laws: Vec<LawResult>,
    pub reports: Vec<AuditReport>,
    pub files: Vec<PathBuf>,
}

fn car_report(r: &LawResult, risk_names: &[String], seed: u64) -> AuditReport {
    AuditReport {
        agent_id: format!("law-{:02}", r.id),
        method: "ratio-of-sums".into(),
        recovered_ratio: r.ratio_of_sums,
        ethics_vector: EthicsVectorReport::Aggregate { risk_names: risk_names.to_vec(), components: r.aggregate.clone() },
        weight_ratio: Some(WeightRatios { ratio_of_sums: r.ratio_of_sums, sum_of_ratios: r.sum_of_ratios }),
        diagnostics: vec![
            Diagnostic::new("hourly_E1", r.hourly_aggregate[0]),
            Diagnostic::new("hourly_E2", r.hourly_aggregate[1]),
            Diagnostic::new("stationarity_residual", r.stationarity_residual),
            Diagnostic::new("absolute_derivative_mass", r.absolute_mass),
            Diagnostic::new("max_step_residual", r.max_step_residual),
            Diagnostic::new("final_position", r.final_position),
            Diagnostic::new("u_start", r.law.u_start),
        ]
        .into_iter()
        .chain(r.arrival_time.map(|t| Diagnostic::new("arrival_time", t)))
        .collect(),
        config_echo: json!({ "law": r.law }),
        seed,
    }
}

/// Simulates the law family, profiles each law and writes
/// `car_vectors.csv`, `car_report.json` and any requested per-step traces.
pub fn cmd_experiment_car(config: &Config, out_dir: &Path, emit_trace: &[usize]) -> Result<CarExperimentOutput> {
    config.validate()?;
    let car = &config.car;
    let laws = car.control_laws();
    if let Some(bad) = emit_trace.iter().find(|&&id| id == 0 || id > laws.len()) {
        return Err(CliError::Usage(format!("--emit-trace {bad}: laws are numbered 1..={}", laws.len())));
    }
    let runs = with_thread_pool(|| {
        laws.par_iter()
            .map(|law| sim::run_car_law(car, law))
            .collect::<ethics2vec::Result<Vec<_>>>()
    })??;

    let risk_names = runs.first().map(|(_, _, t)| t.risk_names.clone()).unwrap_or_default();
    let mut files = vec![write_file(&out_dir.join("car_vectors.csv"), |out| {
        writeln!(out, "law,E1,E2,E1_hourly,E2_hourly,ratio_of_sums,sum_of_ratios")?;
        for (r, _, _) in &runs {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.id, r.aggregate[0], r.aggregate[1], r.hourly_aggregate[0], r.hourly_aggregate[1], r.ratio_of_sums,
                r.sum_of_ratios
            )?;
        }
        Ok(())
    })?];
    for &id in emit_trace {
        let (_, trajectory, trace) = &runs[id - 1];
        files.push(write_file(&out_dir.join(format!("car_trace_law{id}.csv")), |out| {
            logio::write_trace(trajectory, trace, out)
        })?);
    }

    let reports: Vec<AuditReport> = runs.iter().map(|(r, _, _)| car_report(r, &risk_names, car.seed)).collect();
    files.push(write_json(
        &out_dir.join("car_report.json"),
        &json!({
            "command": "experiment-car",
            "config_echo": config,
            "seed": car.seed,
            "laws": reports,
        }),
    )?);
    files.push(write_resolved_config(out_dir, config)?);
    Ok(CarExperimentOutput { laws: runs.into_iter().map(|(r, _, _)| r).collect(), reports, files })
}

/// Profiles an externally recorded `t,x,u` trajectory with the configured
/// risk models.
pub fn cmd_profile_trajectory(config: &Config, trajectory_path: &Path, out_dir: &Path) -> Result<AuditReport> {
    config.validate()?;
    let car = &config.car;
    let file = File::open(trajectory_path).map_err(|e| CliError::Parse {
        path: trajectory_path.to_path_buf(),
        line: 0,
        message: e.to_string(),
    })?;
    let trajectory = logio::read_trajectory(std::io::BufReader::new(file), trajectory_path, car.destination)?;
    let (accident, lateness) = car.risks();
    let risks: [&dyn RiskModel; 2] = [&accident, &lateness];
    let trace = ethics_trace(&trajectory, &risks, &car.derivatives())?;
    let aggregate = aggregate_ethics_vector(&trace)?;
    let ratio_of_sums = weight_ratio(&trace, WeightRatioMethod::RatioOfSums)?.value;
    let sum_of_ratios = weight_ratio(&trace, WeightRatioMethod::SumOfRatios)?.value;
    write_file(&out_dir.join("trajectory_trace.csv"), |out| logio::write_trace(&trajectory, &trace, out))?;
    let report = AuditReport {
        agent_id: trajectory_path
            .file_stem()
            .map_or_else(|| "trajectory".into(), |s| s.to_string_lossy().into_owned()),
        method: "ratio-of-sums".into(),
        recovered_ratio: ratio_of_sums,
        ethics_vector: EthicsVectorReport::Aggregate { risk_names: trace.risk_names.clone(), components: aggregate },
        weight_ratio: Some(WeightRatios { ratio_of_sums, sum_of_ratios }),
        diagnostics: vec![
            Diagnostic::new(
                "stationarity_residual",
                ethics2vec::continuous::stationarity_residual(&trace, &[ratio_of_sums, 1.0]).abs(),
            ),
            Diagnostic::new("absolute_derivative_mass", trace.absolute_mass()),
        ],
        config_echo: json!({
            "command": "experiment-car",
            "trajectory": trajectory_path.display().to_string(),
            "car": car,
        }),
        seed: car.seed,
    };
    write_json(&out_dir.join("trajectory_report.json"), &report)?;
    Ok(report)
}

/// Writes `car_trajectory_law{N}.csv` for one law or for all of them.
pub fn cmd_simulate_car(config: &Config, law: Option<usize>, out_dir: &Path) -> Result<Vec<PathBuf>> {
    config.validate()?;
    let car = &config.car;
    let laws = car.control_laws();
    let selected: Vec<_> = match law {
        Some(id) if id == 0 || id > laws.len() => {
            return Err(CliError::Usage(format!("--law {id}: laws are numbered 1..={}", laws.len())))
        }
        Some(id) => vec![laws[id - 1]],
        None => laws,
    };
    let mut files = Vec::new();
    for law in &selected {
        let trajectory = ethics2vec::simulate_trajectory(law, &car.simulation())?;
        files.push(write_file(&out_dir.join(format!("car_trajectory_law{}.csv", law.id)), |out| {
            logio::write_trajectory(&trajectory, out)
        })?);
    }
    Ok(files)
}
