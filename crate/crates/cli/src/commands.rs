use std::f64::consts::PI;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use log::{info, warn};
use serde::Serialize;
use serde_json::json;
use torsion_core::fem::{
    discretize, error_budget, solve_dirichlet_torsion, solve_robin_torsion, steklov_spectrum, triangulate,
};
use torsion_core::geometry::summarize;
use torsion_core::harness::{
    emit_report, exit_code, read_csv_rows, read_json_report, run_parallel_coordinates_suite, run_threshold_suite,
    sweep, Family, Normalization, ReportFormat, RunMetadata, Status, EXIT_PASS,
};
use torsion_core::parallel::dirichlet_lower_bound;
use torsion_core::radial::{
    critical_alpha, dirichlet_torsion_ball, dn_torsion_shell, robin_torsion_ball, shell_plateau, steklov_ball,
};
use torsion_core::thresholds::{certification_grid, write_curves_csv, ThresholdCurve};
use torsion_core::{BallGeometry, ConvexPolygon, Error, ExperimentConfig, ShellGeometry};

use crate::cli::{Check, FemArgs, LowerboundArgs, Output, RadialArgs, ReportArgs, ThresholdArgs, VerifyArgs};

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(BufWriter::new(f))
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).with_context(|| format!("writing {}", path.display()))?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

fn write_csv<T: Serialize>(rows: &[T], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    for r in rows {
        w.serialize(r).with_context(|| format!("writing {}", path.display()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// JSON to `--out`, or to stdout when there is none. CSV needs rows, so
/// commands producing a single object only accept json.
fn emit_object(value: &serde_json::Value, output: &Output) -> Result<()> {
    if output.format() == ReportFormat::Csv {
        bail!(Error::Config(
            "this command writes a single object; use --format json".into()
        ));
    }
    match &output.out {
        Some(p) => write_json(value, p),
        None => {
            let mut out = io::stdout().lock();
            serde_json::to_writer_pretty(&mut out, value)?;
            writeln!(out)?;
            Ok(())
        }
    }
}

fn count(statuses: impl IntoIterator<Item = Status>) -> [usize; 3] {
    let mut n = [0; 3];
    for s in statuses {
        n[match s {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Indeterminate => 2,
        }] += 1;
    }
    n
}

fn tally(label: &str, statuses: impl IntoIterator<Item = Status>) -> String {
    let [p, f, i] = count(statuses);
    format!("{label}: {p} pass, {f} fail, {i} indeterminate")
}

pub fn radial(a: &RadialArgs) -> Result<i32> {
    let ball = BallGeometry::new(a.dim, a.radius)?;
    let mut v = json!({
        "dim": a.dim,
        "radius": a.radius,
        "volume": ball.volume(),
        "surface": ball.surface(),
        "tau_dirichlet": dirichlet_torsion_ball(&ball),
        "critical_alpha": critical_alpha(&ball),
    });
    if let Some(alpha) = a.alpha {
        v["alpha"] = json!(alpha);
        v["tau_alpha"] = json!(robin_torsion_ball(&ball, alpha)?);
    }
    if a.steklov > 0 {
        let s = (0..a.steklov)
            .map(|k| steklov_ball(&ball, k))
            .collect::<torsion_core::Result<Vec<_>>>()?;
        v["steklov"] = json!(s);
    }
    if let Some(r1) = a.inner {
        let shell = ShellGeometry::new(a.dim, r1, a.radius)?;
        v["shell"] = json!({
            "inner": r1,
            "outer": a.radius,
            "volume": shell.volume(),
            "tau_dn": dn_torsion_shell(&shell),
            "plateau": shell_plateau(&shell),
        });
    }
    emit_object(&v, &a.output)?;
    Ok(EXIT_PASS)
}

pub fn thresholds(a: &ThresholdArgs) -> Result<i32> {
    let suite = run_threshold_suite(&a.dims, a.grid)?;
    let mut out = io::stdout().lock();
    for (line, ok) in suite.lines() {
        writeln!(out, "{} {line}", if ok { "PASS" } else { "FAIL" })?;
    }
    if let Some(path) = &a.output.out {
        match a.output.format() {
            ReportFormat::Json => write_json(&suite, path)?,
            ReportFormat::Csv => {
                let grid = certification_grid(a.grid);
                let curves = suite
                    .certifications
                    .iter()
                    .map(|c| ThresholdCurve::sample(c.kind, c.d, &grid))
                    .collect::<torsion_core::Result<Vec<_>>>()?;
                write_curves_csv(&curves, create(path)?)?;
            }
        }
        info!("wrote {}", path.display());
    }
    let statuses = suite.statuses();
    writeln!(out, "{}", tally("thresholds", statuses.iter().copied()))?;
    Ok(exit_code(statuses))
}

fn lowerbound_defaults() -> ExperimentConfig {
    ExperimentConfig::new(Family::RandomConvex, 20, 1, Normalization::Area(1.0))
}

pub fn lowerbound(a: &LowerboundArgs) -> Result<i32> {
    if let Some(path) = &a.polygon {
        let poly = ConvexPolygon::load(path)?;
        let r = dirichlet_lower_bound(&poly)?;
        let v = json!({
            "polygon": path,
            "summary": r.summary,
            "shell": r.shell,
            "tau_dn": r.tau_dn,
            "lower_bound": r.bound,
            "psi_m": r.psi_m,
            "u_m": r.u_m,
            "pass": r.pass,
        });
        emit_object(&v, &a.output)?;
        return Ok(exit_code([if r.pass { Status::Pass } else { Status::Fail }]));
    }
    let config = a.experiment.config(lowerbound_defaults())?;
    let suite = run_parallel_coordinates_suite(&config)?;
    let mut out = io::stdout().lock();
    for r in &suite.records {
        writeln!(
            out,
            "{} {}: tau_dn {:.10e} <= LB {:.10e} <= tau_D {:.10e} (budget {:.2e})",
            r.status, r.domain_id, r.tau_dn, r.lower_bound, r.tau_dirichlet, r.tau_dirichlet_budget
        )?;
    }
    if let Some(path) = &a.output.out {
        match a.output.format() {
            ReportFormat::Json => write_json(
                &json!({ "config": config, "records": suite.records, "skipped": suite.skipped }),
                path,
            )?,
            ReportFormat::Csv => write_csv(&suite.records, path)?,
        }
    }
    writeln!(
        out,
        "{}; {} skipped",
        tally("sandwich", suite.statuses()),
        suite.skipped.len()
    )?;
    Ok(exit_code(suite.statuses()))
}

pub fn fem(a: &FemArgs) -> Result<i32> {
    let poly = match (&a.polygon, a.regular, a.square) {
        (Some(p), _, _) => ConvexPolygon::load(p)?,
        (None, Some(n), _) => ConvexPolygon::regular(n, 1.0)?,
        (None, None, true) => ConvexPolygon::unit_square(),
        (None, None, false) => bail!(Error::Config("give --polygon, --regular or --square".into())),
    };
    if !(a.mesh_h > 0.0 && a.mesh_h.is_finite()) {
        bail!(Error::Config(format!("mesh_h must be positive, got {}", a.mesh_h)));
    }
    if a.levels == 0 || a.levels == 2 || a.levels > 12 {
        bail!(Error::Config(format!(
            "levels must be 1 or in 3..=12, got {}",
            a.levels
        )));
    }
    let mut v = json!({ "summary": summarize(&poly), "alpha": a.alpha });
    let finest = a.mesh_h / (1u64 << (a.levels - 1)) as f64;
    match a.levels {
        1 => {
            let sys = discretize(&poly, a.mesh_h)?;
            let r = match a.alpha {
                Some(alpha) => solve_robin_torsion(&sys, alpha)?,
                None => solve_dirichlet_torsion(&sys)?,
            };
            v["tau"] = json!(r.tau);
            v["n_nodes"] = json!(r.n_nodes);
            v["h"] = json!(r.h);
            v["residual"] = json!(r.residual);
            v["sigma1"] = json!(steklov_spectrum(&sys, 2)?.sigma1());
        }
        n => {
            let hs: Vec<f64> = (0..n).map(|k| a.mesh_h / (1u64 << k) as f64).collect();
            let b = error_budget(&poly, a.alpha, &hs)?;
            v["tau"] = json!(b.tau.extrapolated);
            v["tau_budget"] = json!(b.tau.budget);
            v["sigma1"] = json!(b.sigma1.extrapolated);
            v["sigma1_budget"] = json!(b.sigma1.budget);
            v["budget"] = serde_json::to_value(&b)?;
        }
    }
    if let Some(path) = &a.mesh_out {
        triangulate(&poly, finest)?.write_dump(path)?;
    }
    emit_object(&v, &a.output)?;
    Ok(EXIT_PASS)
}

fn verify_defaults() -> ExperimentConfig {
    ExperimentConfig::new(Family::RandomConvex, 20, 1, Normalization::Perimeter(2.0 * PI))
}

pub fn verify(a: &VerifyArgs) -> Result<i32> {
    let mut config = a.experiment.config(verify_defaults())?;
    if !a.fractions.is_empty() {
        config.alpha_fractions = a.fractions.clone();
        config.validate()?;
    }
    info!(
        "verifying {} {} domains, {}, seed {}",
        config.count, config.family, config.normalization, config.seed
    );
    let mut report = sweep(&config)?;
    for r in &mut report.records {
        r.status = match a.check {
            Check::Both => r.status,
            Check::Theorem => r.theorem_status,
            Check::Lemma => r.lemma_status,
        };
    }
    let mut out = io::stdout().lock();
    for r in &report.records {
        writeln!(
            out,
            "{} {} alpha {:.6}: theorem {:+.3e} (budget {:.1e}), lemma {:+.3e} (budget {:.1e})",
            r.status, r.domain_id, r.alpha, r.theorem_margin, r.theorem_budget, r.lemma_margin, r.lemma_budget
        )?;
    }
    if let Some(path) = &a.output.out {
        if report.records.is_empty() {
            warn!("no records; {} not written", path.display());
        } else {
            emit_report(
                &report.records,
                &report.skipped,
                &RunMetadata::new(&config),
                a.output.format(),
                path,
            )?;
            info!("wrote {}", path.display());
        }
    }
    writeln!(
        out,
        "{}",
        tally("theorem", report.records.iter().map(|r| r.theorem_status))
    )?;
    writeln!(out, "{}", tally("lemma", report.records.iter().map(|r| r.lemma_status)))?;
    writeln!(out, "skipped: {}", report.skipped.len())?;
    if report.records.is_empty() {
        // nothing was verified, which is not a pass
        return Ok(exit_code([Status::Indeterminate]));
    }
    Ok(exit_code(report.statuses()))
}

pub fn report(a: &ReportArgs) -> Result<i32> {
    let rep = match read_json_report(&a.input) {
        Ok(r) => r,
        Err(e) if read_csv_rows(&a.input).is_ok() => {
            bail!(Error::Config(format!(
                "{} is a CSV report, which drops fields; convert from the JSON report ({e})",
                a.input.display()
            )))
        }
        Err(e) => return Err(e.into()),
    };
    let Some(path) = &a.output.out else {
        bail!(Error::Config("report needs --out".into()));
    };
    emit_report(&rep.records, &rep.skipped, &rep.metadata, a.output.format(), path)?;
    println!(
        "{} records -> {} ({})",
        rep.records.len(),
        path.display(),
        a.output.format()
    );
    Ok(EXIT_PASS)
}
