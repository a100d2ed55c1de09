//! Validation and execution of subcommands.

use crate::args::{Cli, Command, Common, Format, MethodChoice, SamplerChoice};
use crate::output::{Cell, Report, Table};
use serde_json::{json, Value};
use std::fs;
use treewave::conditioned::{
    batch_means, build_gibbs_plan, gaussian_tail_slope, gibbs_trace, tail_of_series,
};
use treewave::levelset::{
    conditioned_survival, critical_threshold, expdec_alpha, haggstrom_alpha, rate_curve,
    survival_direct, survival_ratio_bounds, survival_smc_curve, SmcConfig,
    SurvivalEstimate, TransferSpec,
};
use treewave::rng::map_streams;
use treewave::sampler::{
    path_step_kernel, verify_eigen_residual, verify_sphere_sums, BallSampler, PathSampler,
    SamplerKind,
};
use treewave::spectral::{
    build_profile, repulsion_coefficients, spectral_density, spectral_edge, CovarianceProfile,
    SpectralPoint, TreeParams,
};
use treewave::tree::{ball_size, DEFAULT_VERTEX_BUDGET};

/// Largest ball the dense sampler factors.
const DENSE_LIMIT: u128 = 4096;
/// Largest number of ball values written by `sample-ball`.
const OUTPUT_LIMIT: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    Validation(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Runtime(m) => m,
        }
    }
}

fn runtime(e: treewave::Error) -> CliError {
    CliError::Runtime(e.to_string())
}

fn validation(e: impl ToString) -> CliError {
    CliError::Validation(e.to_string())
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), CliError> {
    if cond {
        Ok(())
    } else {
        Err(CliError::Validation(msg()))
    }
}

fn parse_lambda(d: usize, text: &str) -> Result<f64, CliError> {
    let edge = spectral_edge(d);
    match text.trim() {
        "edge" | "+edge" => Ok(edge),
        "-edge" => Ok(-edge),
        t => t
            .parse::<f64>()
            .map_err(|_| CliError::Validation(format!("cannot parse lambda {t:?}"))),
    }
}

fn finite(name: &str, v: f64) -> Result<(), CliError> {
    ensure(v.is_finite(), || format!("{name} must be finite, got {v}"))
}

fn smc_config(particles: usize, replicates: usize) -> Result<SmcConfig, CliError> {
    SmcConfig::new(particles, replicates).map_err(validation)
}

fn transfer_spec(m: usize, u_max_offset: f64) -> Result<TransferSpec, CliError> {
    ensure(m >= 16, || format!("need --m >= 16, got {m}"))?;
    ensure(u_max_offset > 0.0 && u_max_offset.is_finite(), || {
        format!("--u-max-offset must be positive, got {u_max_offset}")
    })?;
    Ok(TransferSpec { m, u_max_offset })
}

fn check_ball(d: usize, radius: usize, reps: usize, sampler: SamplerChoice) -> Result<(), CliError> {
    let size = ball_size(d, radius);
    ensure(size <= DEFAULT_VERTEX_BUDGET as u128, || {
        format!("ball of radius {radius} has {size} vertices, budget is {DEFAULT_VERTEX_BUDGET}")
    })?;
    if sampler == SamplerChoice::Dense {
        ensure(size <= DENSE_LIMIT, || {
            format!("dense sampler limited to {DENSE_LIMIT} vertices, radius {radius} has {size}")
        })?;
    }
    ensure(reps >= 1, || "need --reps >= 1".into())?;
    Ok(())
}

/// Checks every flag before any computation; returns the spectral point.
pub fn validate(cmd: &Command) -> Result<SpectralPoint, CliError> {
    let common = cmd.common();
    TreeParams::new(common.d).map_err(validation)?;
    let lambda = parse_lambda(common.d, &common.lambda)?;
    let point = SpectralPoint::new(common.d, lambda).map_err(validation)?;
    if let Some(w) = common.workers {
        ensure(w >= 1, || "need --workers >= 1".into())?;
    }
    if let Some(path) = &common.output {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            ensure(parent.is_dir(), || {
                format!("output directory {} does not exist", parent.display())
            })?;
        }
    }
    match cmd {
        Command::Profile { n, .. } => {
            ensure(*n <= 100_000, || format!("--n {n} is too large"))?;
        }
        Command::SampleBall {
            radius,
            reps,
            sampler,
            common,
        } => {
            check_ball(common.d, *radius, *reps, *sampler)?;
            let total = ball_size(common.d, *radius) * *reps as u128;
            ensure(total <= OUTPUT_LIMIT, || {
                format!("{total} output values exceed the limit of {OUTPUT_LIMIT}")
            })?;
        }
        Command::SamplePath { n, reps, .. } => {
            ensure(*n >= 1, || "need --n >= 1".into())?;
            ensure(*reps >= 1, || "need --reps >= 1".into())?;
            ensure((*n as u128) * (*reps as u128) <= OUTPUT_LIMIT, || {
                "requested output is too large".into()
            })?;
        }
        Command::Verify {
            radius,
            reps,
            sampler,
            common,
        } => check_ball(common.d, *radius, *reps, *sampler)?,
        Command::Gibbs {
            n,
            alpha,
            sweeps,
            burnin,
            thin,
            chains,
            coord,
            ..
        } => {
            finite("--alpha", *alpha)?;
            ensure(*n >= 1, || "need --n >= 1".into())?;
            ensure(sweeps > burnin, || format!("--sweeps ({sweeps}) must exceed --burnin ({burnin})"))?;
            ensure(*thin >= 1, || "need --thin >= 1".into())?;
            ensure(*chains >= 1, || "need --chains >= 1".into())?;
            if let Some(k) = coord {
                ensure((1..=*n).contains(k), || format!("--coord {k} outside 1..={n}"))?;
            }
        }
        Command::Survival {
            n,
            alpha,
            method,
            reps,
            particles,
            replicates,
            x1,
            x2,
            ratios,
            ..
        } => {
            finite("--alpha", *alpha)?;
            ensure(*n >= 1, || "need --n >= 1".into())?;
            match method {
                MethodChoice::Direct => {
                    ensure(*reps >= 1, || "need --reps >= 1".into())?;
                    ensure(x1.is_none() && ratios.is_none(), || {
                        "--x1/--x2 and --ratios require --method smc".into()
                    })?;
                }
                MethodChoice::Smc => {
                    smc_config(*particles, *replicates)?;
                }
            }
            if let (Some(a), Some(b)) = (x1, x2) {
                finite("--x1", *a)?;
                finite("--x2", *b)?;
                ensure(*a > *alpha && *b > *alpha, || {
                    format!("starting pair ({a}, {b}) must lie above alpha = {alpha}")
                })?;
            }
            if let Some(list) = ratios {
                ensure(!list.is_empty() && list.iter().all(|&k| k >= 1), || {
                    "--ratios needs positive lengths".into()
                })?;
            }
        }
        Command::Rate {
            alpha,
            alpha_min,
            alpha_max,
            steps,
            m,
            u_max_offset,
            ..
        } => {
            transfer_spec(*m, *u_max_offset)?;
            match alpha {
                Some(list) => {
                    ensure(!list.is_empty(), || "--alpha needs at least one value".into())?;
                    for a in list {
                        finite("--alpha", *a)?;
                    }
                }
                None => {
                    finite("--alpha-min", *alpha_min)?;
                    finite("--alpha-max", *alpha_max)?;
                    ensure(*steps >= 1, || "need --steps >= 1".into())?;
                    ensure(alpha_min <= alpha_max, || "--alpha-min exceeds --alpha-max".into())?;
                }
            }
        }
        Command::Threshold {
            tol, m, u_max_offset, ..
        } => {
            transfer_spec(*m, *u_max_offset)?;
            ensure(*tol > 0.0 && tol.is_finite(), || format!("--tol must be positive, got {tol}"))?;
        }
        Command::Bounds {
            alpha,
            n,
            particles,
            replicates,
            ..
        } => {
            if let Some(list) = alpha {
                for a in list {
                    finite("--alpha", *a)?;
                }
                ensure(*n >= 1, || "need --n >= 1".into())?;
                smc_config(*particles, *replicates)?;
            }
        }
    }
    Ok(point)
}

fn profile_for(point: &SpectralPoint, n: usize) -> Result<CovarianceProfile, CliError> {
    build_profile(point, n.max(2)).map_err(runtime)
}

fn kind(choice: SamplerChoice) -> SamplerKind {
    match choice {
        SamplerChoice::Dense => SamplerKind::Dense,
        SamplerChoice::Recursive => SamplerKind::Recursive,
    }
}

fn estimate_row(e: &SurvivalEstimate) -> Vec<Cell> {
    vec![
        e.n.into(),
        e.alpha.into(),
        e.p_hat.into(),
        e.stderr.into(),
        e.method.id().into(),
        e.collapsed.into(),
    ]
}

const SURVIVAL_COLUMNS: [&str; 6] = ["n", "alpha", "p_hat", "stderr", "method", "collapsed"];

/// Output plus an optional failure detected after the output was produced.
pub struct Outcome {
    pub report: Report,
    pub failure: Option<String>,
}

pub fn execute(cmd: &Command, point: SpectralPoint) -> Result<Outcome, CliError> {
    let common = cmd.common();
    let (d, lambda, seed) = (point.d(), point.lambda(), common.seed);
    let mut failure = None;
    let report = match cmd {
        Command::Profile { n, .. } => {
            let p = profile_for(&point, *n)?;
            let mut r = Report::new("profile", d, lambda, seed);
            r.summary("big_phi", p.big_phi());
            r.summary("spectral_density", spectral_density(&point));
            r.summary("spectral_edge", point.edge());
            let c = repulsion_coefficients(&point);
            r.summary("a1", c.a1);
            r.summary("a2", c.a2);
            let k = path_step_kernel(&p).map_err(runtime)?;
            r.summary("step_b1", k.b1);
            r.summary("step_b2", k.b2);
            r.summary("step_sigma2", k.sigma2);
            r.table = Table::new(&["n", "phi", "envelope"]);
            for j in 0..=*n {
                r.table.push(vec![j.into(), p.values()[j].into(), p.decay_envelope(j).into()]);
            }
            r
        }
        Command::SampleBall {
            radius,
            reps,
            sampler,
            ..
        } => {
            let p = profile_for(&point, 2 * radius)?;
            let s = BallSampler::new(kind(*sampler), &p, *radius).map_err(runtime)?;
            let samples = s.sample_many(*reps, seed);
            let mut r = Report::new("sample-ball", d, lambda, seed);
            r.meta("sampler", kind(*sampler).id());
            r.meta("radius", *radius);
            r.meta("reps", *reps);
            r.table = Table::new(&["rep", "vertex", "depth", "value"]);
            for (i, sample) in samples.iter().enumerate() {
                for (v, value) in sample.ball().vertices().iter().zip(sample.values()) {
                    r.table.push(vec![i.into(), v.to_string().into(), v.depth().into(), (*value).into()]);
                }
            }
            r
        }
        Command::SamplePath { n, reps, .. } => {
            let p = profile_for(&point, 2)?;
            let sampler = PathSampler::new(&p).map_err(runtime)?;
            let paths = map_streams(seed, *reps, |_, rng| sampler.sample(*n, rng));
            let mut r = Report::new("sample-path", d, lambda, seed);
            r.meta("sampler", "path");
            r.meta("reps", *reps);
            r.table = Table::new(&["rep", "k", "value"]);
            for (i, path) in paths.iter().enumerate() {
                for (k, v) in path.values().iter().enumerate() {
                    r.table.push(vec![i.into(), (k + 1).into(), (*v).into()]);
                }
            }
            r
        }
        Command::Verify {
            radius,
            reps,
            sampler,
            ..
        } => {
            let p = profile_for(&point, 2 * radius)?;
            let s = BallSampler::new(kind(*sampler), &p, *radius).map_err(runtime)?;
            let rows = map_streams(seed, *reps, |_, rng| {
                let sample = s.sample(rng);
                (
                    verify_eigen_residual(&sample),
                    sample.eigen_tolerance(),
                    verify_sphere_sums(&sample),
                    sample.sphere_tolerance(),
                )
            });
            let mut r = Report::new("verify", d, lambda, seed);
            r.meta("sampler", kind(*sampler).id());
            r.meta("radius", *radius);
            r.meta("reps", *reps);
            r.table = Table::new(&[
                "rep",
                "eigen_residual",
                "eigen_tol",
                "sphere_residual",
                "sphere_tol",
                "ok",
            ]);
            let (mut worst_eigen, mut worst_ratio, mut worst_sphere) = (0.0f64, 0.0f64, 0.0f64);
            let mut all_ok = true;
            for (i, &(e, et, s, st)) in rows.iter().enumerate() {
                let ok = e <= et && s <= st;
                all_ok &= ok;
                worst_eigen = worst_eigen.max(e);
                worst_ratio = worst_ratio.max(e / et).max(s / st);
                worst_sphere = worst_sphere.max(s);
                r.table.push(vec![i.into(), e.into(), et.into(), s.into(), st.into(), ok.into()]);
            }
            r.summary("max_eigen_residual", worst_eigen);
            r.summary("max_sphere_residual", worst_sphere);
            r.summary("max_residual_over_tolerance", worst_ratio);
            r.summary("all_ok", all_ok);
            if !all_ok {
                failure = Some("some realizations violate the wave identities".into());
            }
            r
        }
        Command::Gibbs {
            n,
            alpha,
            sweeps,
            burnin,
            thin,
            chains,
            coord,
            ..
        } => gibbs(&point, seed, *n, *alpha, (*sweeps, *burnin, *thin), *chains, *coord)?,
        Command::Survival {
            n,
            alpha,
            method,
            reps,
            particles,
            replicates,
            x1,
            x2,
            ratios,
            ..
        } => {
            let p = profile_for(&point, 2)?;
            let mut r = Report::new("survival", d, lambda, seed);
            r.meta("method", match method {
                MethodChoice::Direct => "direct",
                MethodChoice::Smc => "smc",
            });
            match (method, x1.zip(*x2), ratios) {
                (MethodChoice::Direct, _, _) => {
                    r.meta("reps", *reps);
                    let e = survival_direct(&p, *n, *alpha, *reps, seed).map_err(runtime)?;
                    r.table = Table::new(&SURVIVAL_COLUMNS);
                    r.table.push(estimate_row(&e));
                }
                (MethodChoice::Smc, Some((a, b)), _) => {
                    let cfg = smc_config(*particles, *replicates)?;
                    r.meta("particles", *particles);
                    r.meta("replicates", *replicates);
                    r.meta("x1", a);
                    r.meta("x2", b);
                    let e = conditioned_survival(&p, *n, *alpha, a, b, cfg, seed).map_err(runtime)?;
                    r.table = Table::new(&SURVIVAL_COLUMNS);
                    r.table.push(estimate_row(&e));
                }
                (MethodChoice::Smc, None, Some(list)) => {
                    let cfg = smc_config(*particles, *replicates)?;
                    r.meta("particles", *particles);
                    r.meta("replicates", *replicates);
                    let rep = survival_ratio_bounds(&p, *alpha, list, list, cfg, seed).map_err(runtime)?;
                    r.summary("alpha", *alpha);
                    r.summary("m_point", rep.m_point);
                    r.summary("m_upper", rep.m_upper);
                    r.table = Table::new(&["n", "m", "ratio", "stderr"]);
                    for e in &rep.entries {
                        r.table.push(vec![e.n.into(), e.m.into(), e.ratio.into(), e.stderr.into()]);
                    }
                }
                (MethodChoice::Smc, None, None) => {
                    let cfg = smc_config(*particles, *replicates)?;
                    r.meta("particles", *particles);
                    r.meta("replicates", *replicates);
                    let curve = survival_smc_curve(&p, *n, *alpha, cfg, seed).map_err(runtime)?;
                    r.table = Table::new(&SURVIVAL_COLUMNS);
                    for k in 1..=*n {
                        r.table.push(estimate_row(&curve.estimate(k).map_err(runtime)?));
                    }
                }
            }
            r
        }
        Command::Rate {
            alpha,
            alpha_min,
            alpha_max,
            steps,
            m,
            u_max_offset,
            ..
        } => {
            let p = profile_for(&point, 2)?;
            let spec = transfer_spec(*m, *u_max_offset)?;
            let fine = transfer_spec(2 * m, *u_max_offset)?;
            let alphas: Vec<f64> = match alpha {
                Some(list) => list.clone(),
                None if *steps == 1 => vec![*alpha_min],
                None => (0..*steps)
                    .map(|i| alpha_min + (alpha_max - alpha_min) * i as f64 / (*steps - 1) as f64)
                    .collect(),
            };
            let coarse = rate_curve(&p, &alphas, spec).map_err(runtime)?;
            let refined = rate_curve(&p, &alphas, fine).map_err(runtime)?;
            let mut r = Report::new("rate", d, lambda, seed);
            r.summary("quadrature_m", *m);
            r.summary("u_max_offset", *u_max_offset);
            r.summary("strictly_decreasing", coarse.is_strictly_decreasing());
            r.summary("target", 1.0 / (d - 1) as f64);
            r.table = Table::new(&["alpha", "r", "stderr_or_tol"]);
            for ((a, rc), rf) in alphas.iter().zip(&coarse.r).zip(&refined.r) {
                r.table.push(vec![(*a).into(), (*rc).into(), (rc - rf).abs().into()]);
            }
            r
        }
        Command::Threshold {
            tol, m, u_max_offset, ..
        } => {
            let p = profile_for(&point, 2)?;
            let spec = transfer_spec(*m, *u_max_offset)?;
            let t = critical_threshold(&p, *tol, spec).map_err(runtime)?;
            let mut r = Report::new("threshold", d, lambda, seed);
            r.summary("alpha_c", t.alpha_c);
            r.summary("bracket", json!([t.haggstrom, t.expdec]));
            r.summary("haggstrom_alpha", t.haggstrom);
            r.summary("expdec_alpha", t.expdec);
            r.summary("rate_at_alpha_c", t.rate_at_alpha_c);
            r.summary("target", t.target);
            r.summary("tol", *tol);
            r.summary("quadrature", json!({"m": m, "u_max_offset": u_max_offset}));
            r.summary("within_bracket", t.within_bracket());
            r.table = Table::new(&["alpha", "r", "stderr_or_tol"]);
            r.table.push(vec![t.alpha_c.into(), t.rate_at_alpha_c.into(), (*tol).into()]);
            r
        }
        Command::Bounds {
            alpha,
            n,
            particles,
            replicates,
            ..
        } => {
            let p = profile_for(&point, 2)?;
            let mut r = Report::new("bounds", d, lambda, seed);
            let phi = p.big_phi();
            r.summary("big_phi", phi);
            r.summary("beta", 1.0 / (2.0 * phi));
            r.summary("haggstrom_alpha", haggstrom_alpha(&p).map_err(runtime)?);
            r.summary("expdec_alpha", expdec_alpha(&p));
            r.table = Table::new(&["n", "alpha", "p_hat", "stderr", "bound", "holds"]);
            if let Some(list) = alpha {
                let cfg = smc_config(*particles, *replicates)?;
                r.meta("particles", *particles);
                r.meta("replicates", *replicates);
                let mut all = true;
                for (i, &a) in list.iter().enumerate() {
                    let curve = survival_smc_curve(&p, *n, a, cfg, seed.wrapping_add(i as u64))
                        .map_err(runtime)?;
                    for k in 1..=*n {
                        let e = curve.estimate(k).map_err(runtime)?;
                        let bound = (-a * a * k as f64 / (2.0 * phi)).exp();
                        let holds = e.p_hat <= bound * (1.0 + 3.0 * e.relative_stderr().min(1e300));
                        all &= holds;
                        r.table.push(vec![
                            k.into(),
                            a.into(),
                            e.p_hat.into(),
                            e.stderr.into(),
                            bound.into(),
                            holds.into(),
                        ]);
                    }
                }
                r.summary("bound_holds", all);
            }
            r
        }
    };
    Ok(Outcome { report, failure })
}

fn gibbs(
    point: &SpectralPoint,
    seed: u64,
    n: usize,
    alpha: f64,
    (sweeps, burnin, thin): (usize, usize, usize),
    chains: usize,
    coord: Option<usize>,
) -> Result<Report, CliError> {
    let p = profile_for(point, 4)?;
    let plan = build_gibbs_plan(&p, n).map_err(runtime)?;
    let coords: Vec<usize> = (0..n).collect();
    let runs = map_streams(seed, chains, |_, rng| {
        gibbs_trace(&plan, alpha, &[], &coords, sweeps, burnin, thin, rng)
    })
    .into_iter()
    .collect::<treewave::Result<Vec<_>>>()
    .map_err(runtime)?;
    let center = coord.unwrap_or(n.div_ceil(2));
    let mut r = Report::new("gibbs", point.d(), point.lambda(), seed);
    r.meta("n", n);
    r.meta("alpha", alpha);
    r.meta("sweeps", sweeps);
    r.meta("burnin", burnin);
    r.meta("thin", thin);
    r.meta("chains", chains);
    r.table = Table::new(&["chain", "sweep", "coord", "value"]);
    for (c, traces) in runs.iter().enumerate() {
        for t in 0..traces[0].len() {
            let sweep = burnin + (t + 1) * thin;
            for (k, trace) in traces.iter().enumerate() {
                r.table.push(vec![c.into(), sweep.into(), (k + 1).into(), trace[t].into()]);
            }
        }
    }
    // Chains are concatenated; batches rarely straddle two chains.
    let pooled: Vec<f64> = runs.iter().flat_map(|t| t[center - 1].iter().copied()).collect();
    let est = batch_means(&pooled);
    let psi0 = alpha + 2.0;
    let grid: Vec<f64> = (0..=16).map(|i| alpha.max(0.0) + 0.25 * i as f64).collect();
    let tail = tail_of_series(&pooled, &grid);
    r.summary("coord", center);
    r.summary("mean", est.mean);
    r.summary("mean_stderr", est.stderr);
    r.summary("ess", tail.ess);
    r.summary("psi0_hat", psi0);
    let slope = gaussian_tail_slope(&tail.points, psi0, psi0 + 2.0).ok();
    r.summary("tail_slope", slope.map_or(Value::Null, |s| s.0.into()));
    r.summary("tail_slope_stderr", slope.map_or(Value::Null, |s| s.1.into()));
    let table: Vec<Value> = tail
        .points
        .iter()
        .map(|t| json!({"x": t.x, "probability": t.probability, "stderr": t.stderr}))
        .collect();
    r.summary("tail", Value::Array(table));
    Ok(r)
}

fn emit(report: &Report, common: &Common) -> Result<(), CliError> {
    let text = match common.format {
        Format::Csv => report.to_csv(),
        Format::Json => report.to_json(),
    };
    match &common.output {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display()))),
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| CliError::Runtime(format!("cannot write output: {e}")))
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let point = validate(&cli.command)?;
    let common = cli.command.common();
    if let Some(w) = common.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| CliError::Runtime(format!("cannot start worker pool: {e}")))?;
    }
    let outcome = execute(&cli.command, point)?;
    emit(&outcome.report, common)?;
    match outcome.failure {
        Some(msg) => Err(CliError::Runtime(msg)),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::Parser;

    fn command(args: &[&str]) -> Command {
        let mut argv = vec!["treewave"];
        argv.extend_from_slice(args);
        Cli::try_parse_from(argv).unwrap().command
    }

    #[test]
    fn lambda_keywords() {
        assert_eq!(parse_lambda(3, "edge").unwrap(), spectral_edge(3));
        assert_eq!(parse_lambda(3, "-edge").unwrap(), -spectral_edge(3));
        assert!(parse_lambda(3, "abc").is_err());
    }

    #[test]
    fn validation_catches_bad_flags() {
        for args in [
            vec!["profile", "--d", "2"],
            vec!["profile", "--lambda", "3"],
            vec!["sample-ball", "--radius", "20"],
            vec!["sample-ball", "--radius", "12", "--sampler", "dense"],
            vec!["gibbs", "--sweeps", "10", "--burnin", "10"],
            vec!["gibbs", "--n", "5", "--coord", "6"],
            vec!["survival", "--particles", "10"],
            vec!["survival", "--alpha", "1", "--x1", "0.5", "--x2", "2"],
            vec!["survival", "--method", "direct", "--ratios", "5,10"],
            vec!["rate", "--m", "8"],
            vec!["rate", "--alpha-min", "1", "--alpha-max", "0"],
            vec!["threshold", "--tol", "0"],
        ] {
            let err = validate(&command(&args)).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{args:?}");
        }
        assert!(validate(&command(&["threshold", "--lambda", "-edge"])).is_ok());
    }

    #[test]
    fn profile_report_rows() {
        let cmd = command(&["profile", "--n", "4"]);
        let point = validate(&cmd).unwrap();
        let out = execute(&cmd, point).unwrap();
        let phis: Vec<f64> = out
            .report
            .table
            .rows
            .iter()
            .map(|r| match r[1] {
                Cell::Float(v) => v,
                _ => unreachable!(),
            })
            .collect();
        let want = [1.0, 0.0, -0.5, 0.0, 0.25];
        assert!(phis.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-12));
    }
}
