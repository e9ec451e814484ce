use std::collections::BTreeSet;
use std::path::Path;
use std::time::Instant;

use anyhow::Context;
use finsler_core::audit::{metric_audit, AuditOptions};
use finsler_core::comparison::{
    check_volume_ratio, laplacian_at, polar_density, Branch, ComparisonProfile, VolumeBranch, DIRECTIONS,
};
use finsler_core::config::{BoundarySpec, LabConfig, SuiteSpec};
use finsler_core::elliptic::{check_subsolution, maximum_principle_check, solve_harmonic_with_stats, Orientation};
use finsler_core::harness::{run_suite, ExperimentConfig, SuiteOptions, DEFAULT_SEED};
use finsler_core::measure::distance;
use finsler_core::report::InequalityReport;
use finsler_core::sampling::ball_points;
use finsler_core::{FinslerError, Space};
use serde_json::json;

use crate::baseline;
use crate::output::{fmt_num, summary_row, Outputs};
use crate::{Cli, Command};

/// Failure that decides the exit code: 2 for configuration and hypothesis
/// errors, 1 for everything else.
#[derive(Debug)]
enum Failure {
    Config(String),
    Run(String),
}

impl From<FinslerError> for Failure {
    fn from(e: FinslerError) -> Self {
        match e {
            FinslerError::Parse(_)
            | FinslerError::InvalidMetric(_)
            | FinslerError::DomainError(_)
            | FinslerError::HypothesisNotMet(_)
            | FinslerError::UnsupportedSpace(_)
            | FinslerError::DimensionMismatch { .. } => Failure::Config(e.to_string()),
            _ => Failure::Run(e.to_string()),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Run(format!("{e:#}"))
    }
}

type Res<T> = std::result::Result<T, Failure>;

struct Run<'a> {
    cli: &'a Cli,
    cfg: LabConfig,
    out: Outputs,
    messages: Vec<String>,
    failed: bool,
    suites: Vec<String>,
}

impl Run<'_> {
    fn seed(&self, suite: &SuiteSpec) -> u64 {
        self.cli.seed.or(suite.seed).unwrap_or(DEFAULT_SEED)
    }

    fn note(&mut self, m: String) {
        eprintln!("{m}");
        self.messages.push(m);
    }

    fn tally(&mut self, reports: &[InequalityReport]) {
        for r in reports.iter().filter(|r| r.is_failure()) {
            self.failed = true;
            self.note(format!("FAIL {} on {}: lhs {} rhs {}", r.ineq_id, r.space, fmt_num(r.lhs), fmt_num(r.rhs)));
        }
    }

    fn selected(&self) -> Res<Vec<(String, SuiteSpec)>> {
        Ok(self
            .cfg
            .select_suites(self.cli.suite.as_deref())?
            .into_iter()
            .map(|(n, s)| (n.to_string(), s.clone()))
            .collect())
    }
}

pub fn run(cli: &Cli) -> u8 {
    let cfg = match LabConfig::load(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let mut run = Run { cli, cfg, out: Outputs::default(), messages: Vec::new(), failed: false, suites: Vec::new() };
    let started = Instant::now();
    let result = match cli.command {
        Command::MetricAudit => metric_audit_cmd(&mut run),
        Command::VolumeCompare => volume_cmd(&mut run),
        Command::SolveHarmonic => solve_cmd(&mut run),
        Command::Inequalities => inequalities_cmd(&mut run),
    };
    let code = match &result {
        Ok(()) if run.failed => 1,
        Ok(()) => 0,
        Err(Failure::Config(m)) => {
            run.note(format!("error: {m}"));
            2
        }
        Err(Failure::Run(m)) => {
            run.note(format!("error: {m}"));
            1
        }
    };
    if let Err(e) = finish(&mut run, code) {
        eprintln!("error: {e:#}");
        return 1;
    }
    eprintln!("{} finished in {:.1} s with exit code {code}", cli.command.name(), started.elapsed().as_secs_f64());
    code
}

fn finish(run: &mut Run, code: u8) -> anyhow::Result<()> {
    let config_bytes = std::fs::read(&run.cli.config).context("re-reading config")?;
    let budgets: serde_json::Map<String, serde_json::Value> = run
        .suites
        .iter()
        .filter_map(|s| run.cfg.suites.get(s).map(|spec| (s.clone(), json!(spec.budget_seconds))))
        .collect();
    let seeds: serde_json::Map<String, serde_json::Value> = run
        .suites
        .iter()
        .filter_map(|s| run.cfg.suites.get(s).map(|spec| (s.clone(), json!(run.seed(spec)))))
        .collect();
    let manifest = json!({
        "tool": "finsler-lab",
        "version": env!("CARGO_PKG_VERSION"),
        "command": run.cli.command.name(),
        "config": run.cli.config.display().to_string(),
        "config_sha256": crate::output::hex_sha256(&config_bytes),
        "suites": run.suites,
        "seed": run.cli.seed,
        "suite_seeds": seeds,
        "bless": run.cli.bless,
        "budget_seconds": budgets,
        "outputs": run.out.digests(),
        "exit_code": code,
        "messages": run.messages,
    });
    let mut text = serde_json::to_vec_pretty(&manifest)?;
    text.push(b'\n');
    run.out.add("manifest.json", text);
    run.out.write_all(&run.cli.out)
}

fn metric_audit_cmd(run: &mut Run) -> Res<()> {
    let mut reports = Vec::new();
    for (name, suite) in run.selected()? {
        run.suites.push(name.clone());
        let a = &suite.audit;
        let opts = AuditOptions {
            samples: a.samples,
            seed: run.seed(&suite),
            region_radius: a.region_radius,
            resolution: a.resolution,
            tol: a.tol,
            ..AuditOptions::default()
        };
        for space_name in run.cfg.suite_spaces(&suite) {
            let space: Space = run.cfg.space(space_name)?;
            let rs = metric_audit(space_name, &space.metric, &suite.base_point, &opts)?;
            reports.extend(rs.into_iter().map(|r| r.with("suite", name.as_str())));
        }
    }
    run.tally(&reports);
    run.out.jsonl("metric_audit.jsonl", &reports);
    Ok(())
}

/// Comparison branches enabled by the certified bounds of a space.
fn branches(space: &Space) -> Vec<VolumeBranch<f64>> {
    let cb = &space.certified_bounds;
    let mut v = Vec::new();
    if cb.s_curvature_lower.is_some() {
        v.push(VolumeBranch::SBound(None));
    }
    if cb.distortion_bound.is_some() {
        v.push(VolumeBranch::TauBound(None));
    }
    v
}

fn laplacian_comparison(space: &Space, x0: &[f64; 2], queries: &[[f64; 2]], branch: Branch<f64>, tol: f64) -> Res<InequalityReport> {
    let k = space.certified_bounds.ric_inf_lower;
    let profile = ComparisonProfile::new(branch, k, space.dim());
    let mut worst = f64::NEG_INFINITY;
    let mut at = None;
    let mut used = 0u64;
    let mut skipped = 0u64;
    for q in queries {
        let p = [x0[0] + q[0], x0[1] + q[1]];
        let lap = match laplacian_at(space, x0, &p) {
            Ok(v) => v,
            Err(FinslerError::NonMinimal(_)) => {
                skipped += 1;
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let r = distance(space, x0, &p)?;
        let excess = lap - profile.dlog_chi(r)?;
        used += 1;
        if excess > worst {
            worst = excess;
            at = Some(p);
        }
    }
    if used == 0 {
        return Err(Failure::Config(format!("no minimal query point for the Laplacian comparison on {}", space.name)));
    }
    Ok(InequalityReport::check_abs("laplacian_comparison", &space.name, worst, 0.0, tol)
        .with("branch", branch.name())
        .with("minimal_queries", used)
        .with("non_minimal_queries", skipped)
        .with("worst_point", at.map(|p| p.to_vec()).unwrap_or_default())
        .with_num("K", k))
}

fn volume_cmd(run: &mut Run) -> Res<()> {
    let mut reports = Vec::new();
    let mut sigma = csv::Writer::from_writer(Vec::new());
    sigma.write_record(["suite", "space", "r", "theta_index", "sigma", "minimal"]).map_err(anyhow::Error::from)?;
    for (name, suite) in run.selected()? {
        run.suites.push(name.clone());
        let v = &suite.volume;
        let x0 = suite.base_point;
        for space_name in run.cfg.suite_spaces(&suite) {
            let space: Space = run.cfg.space(space_name)?;
            if v.segments == 0 || !(v.r_max > 0.0) {
                return Err(Failure::Config("volume table needs r_max > 0 and segments > 0".into()));
            }
            let radii: Vec<f64> = (0..=v.segments).map(|i| v.r_max * i as f64 / v.segments as f64).collect();
            let table = polar_density(&space, &x0, DIRECTIONS, &radii)?;
            for (i, r) in table.radii.iter().enumerate() {
                for j in 0..table.direction_count() {
                    sigma
                        .write_record([
                            name.clone(),
                            space_name.to_string(),
                            fmt_num(*r),
                            j.to_string(),
                            fmt_num(table.sigma[j][i]),
                            table.minimal[j][i].to_string(),
                        ])
                        .map_err(anyhow::Error::from)?;
                }
            }
            for &r in &v.radii {
                let m = table.ball_volume(r)?;
                reports.push(
                    InequalityReport::measured("ball_volume", space_name, m, m / r.powi(space.dim() as i32))
                        .with("r", r)
                        .with("base_point", x0.to_vec()),
                );
            }
            let queries: Vec<[f64; 2]> = match &v.queries {
                Some(q) => q.clone(),
                None => ball_points(&[0.0, 0.0], v.query_radius, v.query_count)
                    .iter()
                    .filter(|p| p[0].hypot(p[1]) > 1e-3 * v.query_radius)
                    .map(|p| [p[0], p[1]])
                    .collect(),
            };
            for b in branches(&space) {
                let branch = b.resolve(&space)?;
                reports.push(laplacian_comparison(&space, &x0, &queries, branch, v.tol)?);
                for pair in &v.pairs {
                    reports.push(check_volume_ratio(&space, &x0, pair[0], pair[1], b, v.tol)?);
                }
            }
        }
    }
    run.tally(&reports);
    run.out.jsonl("volume.jsonl", &reports);
    run.out.add("sigma.csv", sigma.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?);
    Ok(())
}

fn solve_cmd(run: &mut Run) -> Res<()> {
    let names: Vec<String> = if run.cfg.suites.is_empty() && run.cli.suite.is_none() {
        run.cfg.problems.keys().cloned().collect()
    } else {
        let mut set = BTreeSet::new();
        for (name, suite) in run.selected()? {
            run.suites.push(name);
            set.extend(run.cfg.suite_problems(&suite).into_iter().map(str::to_string));
        }
        set.into_iter().collect()
    };
    if names.is_empty() {
        return Err(Failure::Config("no problems to solve".into()));
    }
    let mut reports = Vec::new();
    let mut table = csv::Writer::from_writer(Vec::new());
    table
        .write_record(["problem", "space", "mesh", "nodes", "iterations", "energy", "residual", "used_newton", "max_principle"])
        .map_err(anyhow::Error::from)?;
    for name in &names {
        let spec = run.cfg.problems[name].clone();
        let problem = run.cfg.problem::<f64>(name)?;
        let (u, stats) = solve_harmonic_with_stats(&problem)?;
        let mut buf = Vec::new();
        problem.mesh.write_function_csv(&u, &mut buf)?;
        run.out.add(&format!("u_{name}.csv"), buf);
        let scale = problem.scale();
        let tag = |r: InequalityReport| r.with("problem", name.as_str());
        let mp = maximum_principle_check(&problem, &u)?;
        table
            .write_record([
                name.clone(),
                spec.space_ref.clone(),
                spec.mesh_ref.clone(),
                problem.mesh.node_count().to_string(),
                stats.iterations.to_string(),
                fmt_num(stats.energy),
                fmt_num(stats.residual),
                stats.used_newton.to_string(),
                mp.passed().to_string(),
            ])
            .map_err(anyhow::Error::from)?;
        reports.push(tag(InequalityReport::check_abs("solver_residual", &problem.space.name, stats.residual, 0.0, 1e-8 * scale)
            .with("iterations", stats.iterations as u64)
            .with("used_newton", stats.used_newton)));
        reports.push(tag(mp));
        if let BoundarySpec::Affine { coeffs: [c0, c1, c2] } = spec.boundary {
            if problem.space.metric.is_constant_coefficient() && problem.space.log_density.is_constant(&problem.space.metric) {
                let err = problem
                    .mesh
                    .nodes
                    .iter()
                    .zip(&u.values)
                    .fold(0.0f64, |m, (p, v)| m.max((v - (c0 + c1 * p[0] + c2 * p[1])).abs()));
                reports.push(tag(InequalityReport::check_abs("affine_reproduction", &problem.space.name, err, 0.0, 1e-8 * scale)));
            }
        }
        if problem.source.is_some() {
            reports.push(tag(check_subsolution(&problem, &u, None, Orientation::Sub)?));
        }
    }
    run.tally(&reports);
    run.out.jsonl("solve.jsonl", &reports);
    run.out.add("residuals.csv", table.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?);
    Ok(())
}

fn inequalities_cmd(run: &mut Run) -> Res<()> {
    let root = run.cfg.root.clone();
    let mut all = Vec::new();
    let mut diff_rows = Vec::new();
    for (name, suite) in run.selected()? {
        run.suites.push(name.clone());
        let started = Instant::now();
        let spec = &suite.inequalities;
        let mut reports = Vec::new();
        for space_name in run.cfg.suite_spaces(&suite) {
            let space: Space = run.cfg.space(space_name)?;
            let mut cfg = ExperimentConfig::for_space(&space, suite.base_point, spec.radius);
            cfg.delta = spec.delta;
            cfg.delta_prime = spec.delta_prime;
            cfg.rho = spec.rho;
            cfg.p = spec.p;
            cfg.a = spec.a;
            cfg.tol = spec.tol;
            cfg.rings = spec.rings;
            cfg.sectors = spec.sectors;
            cfg.seed = run.seed(&suite);
            let mut opts = SuiteOptions::for_space(&space);
            if let Some(checks) = &spec.checks {
                opts.checks = checks.clone();
            }
            opts.probe_radii = spec.probe_radii.clone();
            opts.scaling_radii = spec.scaling_radii.clone();
            let rs = run_suite(&space, &cfg, &opts)?;
            reports.extend(rs.into_iter().map(|r| r.with("suite", name.as_str())));
        }
        if let Some(budget) = suite.budget_seconds {
            let took = started.elapsed().as_secs_f64();
            if took > budget {
                eprintln!("warning: suite {name} took {took:.1} s, over its {budget} s budget");
            }
        }
        let rows: Vec<[String; 7]> = reports.iter().map(summary_row).collect();
        let path = root.join("baselines").join(format!("{name}.csv"));
        if run.cli.bless {
            write_baseline(&path, &rows)?;
            run.note(format!("blessed {}", path.display()));
        } else if path.exists() {
            let base = baseline::read(&path)?;
            for d in baseline::compare(&base, &rows) {
                run.failed = true;
                run.note(format!("drift: {}", d.describe()));
                diff_rows.push([
                    name.clone(),
                    d.ineq_id,
                    d.space,
                    d.params_hash,
                    d.baseline.unwrap_or_default(),
                    d.measured.unwrap_or_default(),
                    d.relative.map(fmt_num).unwrap_or_default(),
                ]);
            }
        } else {
            run.note(format!("no baseline at {}; run with --bless to record one", path.display()));
        }
        all.extend(reports);
    }
    run.tally(&all);
    run.out.jsonl("reports.jsonl", &all);
    run.out.summary("summary.csv", &all)?;
    let mut wr = csv::Writer::from_writer(Vec::new());
    wr.write_record(["suite", "ineq_id", "space", "params_hash", "baseline", "measured", "relative"]).map_err(anyhow::Error::from)?;
    for r in diff_rows {
        wr.write_record(r).map_err(anyhow::Error::from)?;
    }
    run.out.add("baseline_diff.csv", wr.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?);
    Ok(())
}

fn write_baseline(path: &Path, rows: &[[String; 7]]) -> anyhow::Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut wr = csv::Writer::from_path(path)?;
    wr.write_record(crate::output::SUMMARY_HEADER)?;
    for r in rows {
        wr.write_record(r)?;
    }
    wr.flush()?;
    Ok(())
}
