//! `run` and `analyze`, independent of argument parsing.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use gmab::analysis::{
    epsilon_lower_bound, optimality_partition, regime_constants, subopt_distance, subopt_gap, BoundCurve,
    DEFAULT_RESOLUTION,
};
use gmab::reward_models::{HolderCertificate, InstanceSpec};
use gmab::simulator::{log_checkpoints, run_monte_carlo, ExperimentConfig, DEFAULT_CHECKPOINTS};
use gmab::GmabError;

use crate::export::{self, OutputFile, RunManifest};
use crate::presets::ScenarioPreset;

pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_IO: u8 = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    Validation(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "validation error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<GmabError> for CliError {
    fn from(e: GmabError) -> Self {
        CliError::Validation(e.to_string())
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

#[derive(Debug, Clone, Default)]
pub struct RunArgs {
    pub preset: Option<ScenarioPreset>,
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub out: PathBuf,
    pub horizon: Option<u64>,
    pub reps: Option<u64>,
    pub checkpoints: Option<Vec<u64>>,
    pub check_lemmas: bool,
}

fn read_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    Ok(ExperimentConfig::from_json(&text)?)
}

fn prepare_out(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

/// Resolves the configuration with command-line overrides applied. A new
/// horizon without explicit checkpoints falls back to the log-spaced grid.
pub fn resolve_config(args: &RunArgs) -> Result<ExperimentConfig, CliError> {
    let mut config = match (&args.preset, &args.config) {
        (Some(p), None) => p.config(),
        (None, Some(path)) => read_config(path)?,
        _ => return Err(CliError::Validation("give exactly one of --preset and --config".into())),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(h) = args.horizon {
        config.horizon = h;
        config.checkpoints.clear();
    }
    if let Some(r) = args.reps {
        config.replications = r;
    }
    if let Some(cp) = &args.checkpoints {
        config.checkpoints = cp.clone();
    }
    if args.check_lemmas {
        config.check_lemmas = true;
    }
    Ok(config)
}

/// Runs the experiment and writes results, bounds, partition and manifest.
pub fn run(args: &RunArgs) -> Result<RunManifest, CliError> {
    let config = resolve_config(args)?;
    let instance = config.validate()?;
    prepare_out(&args.out)?;

    let started = Instant::now();
    let agg = run_monte_carlo(&config)?;
    let partition = optimality_partition(&instance, DEFAULT_RESOLUTION)?;

    let out = &args.out;
    let files = vec![
        write(
            out,
            export::RESULTS_CSV,
            &export::RESULTS_HEADER,
            &export::results_rows(&agg),
        )?,
        write(
            out,
            export::BOUNDS_CSV,
            &export::BOUNDS_HEADER,
            &export::bounds_rows(&agg.bounds),
        )?,
        write(
            out,
            export::PARTITION_CSV,
            &export::PARTITION_HEADER,
            &export::partition_rows(&partition),
        )?,
    ];
    let manifest = RunManifest {
        command: "run".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        preset: args.preset.map(|p| p.name().to_string()),
        config_hash: Some(config.hash()),
        seed: Some(config.seed),
        budget_secs: args.preset.map(|p| p.budget_secs()),
        elapsed_secs: started.elapsed().as_secs_f64(),
        lemmas: agg.lemmas.clone(),
        config: Some(config),
        files,
    };
    export::write_manifest(out, &manifest).map_err(|e| io_err(out, e))?;
    Ok(manifest)
}

fn write(dir: &Path, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<OutputFile, CliError> {
    export::write_csv(dir, name, header, rows).map_err(|e| io_err(&dir.join(name), e))
}

#[derive(Debug, Clone, Default)]
pub struct AnalyzeArgs {
    pub preset: Option<ScenarioPreset>,
    pub config: Option<PathBuf>,
    pub instance: Option<PathBuf>,
    pub theta: Option<f64>,
    pub delta: Option<f64>,
    pub arms: Option<usize>,
    pub certificate: Option<HolderCertificate>,
    pub horizon: u64,
    pub out: PathBuf,
}

/// Parses `d1,gamma1,d2,gamma2`.
pub fn parse_certificate(text: &str) -> Result<HolderCertificate, CliError> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Validation(format!("certificate: {e}")))?;
    match parts[..] {
        [d1, g1, d2, g2] => Ok(HolderCertificate::new(d1, g1, d2, g2)?),
        _ => Err(CliError::Validation(format!(
            "certificate: expected d1,gamma1,d2,gamma2, got {} values",
            parts.len()
        ))),
    }
}

/// Writes `report.csv` (quantity, arm, value), `bounds.csv`, `partition.csv`
/// when an instance is given, and the manifest.
pub fn analyze(args: &AnalyzeArgs) -> Result<RunManifest, CliError> {
    let started = Instant::now();
    let mut source: Option<(InstanceSpec, Option<f64>, Option<f64>)> = None;
    if let Some(p) = args.preset {
        let c = p.config();
        source = Some((c.instance, c.theta_star, c.prior.map(|p| p.density_bound)));
    }
    if let Some(path) = &args.config {
        let c = read_config(path)?;
        source = Some((c.instance, c.theta_star, c.prior.map(|p| p.density_bound)));
    }
    if let Some(path) = &args.instance {
        let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        source = Some((InstanceSpec::from_json(&text)?, None, None));
    }
    let ts = log_checkpoints(args.horizon.max(1), DEFAULT_CHECKPOINTS);

    let mut report: Vec<Vec<String>> = Vec::new();
    let mut row = |q: &str, arm: Option<usize>, v: f64| {
        report.push(vec![
            q.to_string(),
            arm.map(|a| a.to_string()).unwrap_or_default(),
            export::num(v),
        ]);
    };
    let mut curves: Vec<BoundCurve> = Vec::new();
    let mut partition_rows = None;

    if let Some((mut spec, spec_theta, density_bound)) = source {
        if let (Some(cert), InstanceSpec::Standard { certificate, .. }) = (args.certificate, &mut spec) {
            *certificate = Some(cert);
        }
        let instance = spec.build()?;
        let theta = args
            .theta
            .or(spec_theta)
            .ok_or_else(|| CliError::Validation("theta: required for instance analysis".into()))?;
        let partition = optimality_partition(&instance, DEFAULT_RESOLUTION)?;
        let gap = subopt_gap(&instance, theta)?;
        let delta = subopt_distance(&instance, theta, &partition)?;
        let k = instance.num_arms();

        row("theta", None, theta);
        for &a in &gap.optimal_arms {
            row("optimal_arm", Some(a), gap.optimal_mean);
        }
        row("optimal_mean", None, gap.optimal_mean);
        for (a, g) in gap.gaps.iter().enumerate() {
            if let Some(g) = g {
                row("gap", Some(a), *g);
            }
        }
        if let Some(g) = gap.delta_min {
            row("gap_min", None, g);
        }
        row("delta_min", None, delta);
        if let Some(cert) = instance.certificate() {
            if let Ok(eps) = epsilon_lower_bound(&gap, cert) {
                row("epsilon", None, eps);
            }
            curves.push(BoundCurve::one_step(&ts, k, cert));
            curves.push(BoundCurve::cumulative(&ts, k, cert));
            if let Ok(rc) = regime_constants(delta, k, cert) {
                row("c1", None, rc.c1 as f64);
                row("c2", None, rc.c2 as f64);
                curves.push(BoundCurve::subopt_prob(&ts, delta, k, cert));
                curves.push(BoundCurve::three_regime(&ts, &rc));
            }
            if let Some(b) = density_bound {
                curves.push(BoundCurve::bayes_risk(&ts, b, k, cert));
            }
        }
        partition_rows = Some(export::partition_rows(&partition));
    } else {
        let (Some(delta), Some(k), Some(cert)) = (args.delta, args.arms, args.certificate) else {
            return Err(CliError::Validation(
                "give an instance (--preset, --config or --instance) or all of --delta, --arms and --certificate"
                    .into(),
            ));
        };
        let rc = regime_constants(delta, k, &cert)?;
        row("delta_min", None, delta);
        row("c1", None, rc.c1 as f64);
        row("c2", None, rc.c2 as f64);
        curves.push(BoundCurve::one_step(&ts, k, &cert));
        curves.push(BoundCurve::cumulative(&ts, k, &cert));
        curves.push(BoundCurve::subopt_prob(&ts, delta, k, &cert));
        curves.push(BoundCurve::three_regime(&ts, &rc));
    }

    prepare_out(&args.out)?;
    let out = &args.out;
    let mut files = vec![
        write(out, export::REPORT_CSV, &["quantity", "arm", "value"], &report)?,
        write(
            out,
            export::BOUNDS_CSV,
            &export::BOUNDS_HEADER,
            &export::bounds_rows(&curves),
        )?,
    ];
    if let Some(rows) = partition_rows {
        files.push(write(out, export::PARTITION_CSV, &export::PARTITION_HEADER, &rows)?);
    }
    let manifest = RunManifest {
        command: "analyze".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        preset: args.preset.map(|p| p.name().to_string()),
        config: None,
        config_hash: None,
        seed: None,
        budget_secs: None,
        elapsed_secs: started.elapsed().as_secs_f64(),
        lemmas: None,
        files,
    };
    export::write_manifest(out, &manifest).map_err(|e| io_err(out, e))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn certificate_parsing() {
        let c = parse_certificate("1, 0.5, 2, 1").unwrap();
        assert_eq!((c.d1(), c.gamma1(), c.d2(), c.gamma2()), (1.0, 0.5, 2.0, 1.0));
        assert!(parse_certificate("1,1,1").is_err());
        assert!(parse_certificate("1,x,1,1").is_err());
        let err = parse_certificate("1,1.5,1,1").unwrap_err();
        assert!(err.to_string().contains("(0, 1]"));
        assert_eq!(err.exit_code(), EXIT_VALIDATION);
    }

    #[test]
    fn overrides_apply() {
        let args = RunArgs {
            preset: Some(ScenarioPreset::ThreeArmDemo),
            seed: Some(7),
            horizon: Some(500),
            reps: Some(3),
            ..Default::default()
        };
        let c = resolve_config(&args).unwrap();
        assert_eq!((c.seed, c.horizon, c.replications), (7, 500, 3));
        assert!(c.checkpoints.is_empty());
        assert!(c.validate().is_ok());
    }
}
