use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::oracle::{self, ClassifyOptions};
use crate::selftest;
use crate::threebody::{self, SolveOptions};
use crate::torus::{TorusPoint, UniformGrid};
use crate::twobody;

use super::config::RunConfig;
use super::output::{num, q, q_opt, qv, Cell, Report, DIMENSIONLESS, ENERGY, MOMENTUM};

pub fn dispatch(cfg: &RunConfig, exec: Exec) -> Result<(Report, i32)> {
    match cfg.command.as_str() {
        "twobody" => Ok((two_body(cfg)?, 0)),
        "threebody" => Ok((three_body(cfg, exec)?, 0)),
        "ess" => Ok((ess(cfg)?, 0)),
        "band" => band(cfg, exec),
        "oracle" => Ok((oracle_cmd(cfg, exec)?, 0)),
        "selftest" => Ok(self_test(cfg, exec)),
        other => Err(Error::InvalidArgument(format!("unknown command '{other}'"))),
    }
}

fn momentum_columns(prefix: &str, d: usize) -> Vec<String> {
    (1..=d).map(|i| format!("{prefix}{i}")).collect()
}

fn header(prefix: &str, d: usize, rest: &[&str]) -> Report {
    let mut h = momentum_columns(prefix, d);
    h.extend(rest.iter().map(|s| s.to_string()));
    let refs: Vec<&str> = h.iter().map(String::as_str).collect();
    Report::new(&refs)
}

fn with_point(p: &TorusPoint, rest: Vec<Cell>) -> Vec<Cell> {
    let mut cells: Vec<Cell> = p.coords().iter().map(|&x| Cell::Float(x)).collect();
    cells.extend(rest);
    cells
}

fn require_coupling(cfg: &RunConfig) -> Result<()> {
    if cfg.mu == 0.0 {
        Err(Error::InvalidCoupling)
    } else {
        Ok(())
    }
}

fn two_body(cfg: &RunConfig) -> Result<Report> {
    require_coupling(cfg)?;
    let k = TorusPoint::new(&cfg.k)?;
    let sol = twobody::bound_state_energy(cfg.mu, &k)?;
    let grid = UniformGrid::new(cfg.d, if cfg.d == 1 { 256 } else { 64 })?;
    let f = twobody::eigenfunction(&sol, &grid);
    let eigen_residual = twobody::eigenfunction_residual(&sol, &f);
    let mut r = header(
        "k",
        cfg.d,
        &["energy", "binding", "e_min", "e_max", "residual", "eigen_residual", "iterations"],
    );
    r.row(with_point(
        &k,
        vec![
            sol.energy.into(),
            sol.binding.into(),
            sol.ess.lo.into(),
            sol.ess.hi.into(),
            sol.residual.into(),
            eigen_residual.into(),
            sol.iterations.into(),
        ],
    ));
    r.results = json!({
        "k": qv(k.coords(), MOMENTUM),
        "energy": q(sol.energy, ENERGY),
        "binding": q(sol.binding, ENERGY),
        "e_min": q(sol.ess.lo, ENERGY),
        "e_max": q(sol.ess.hi, ENERGY),
    });
    r.diagnostics.insert("residual".into(), q(sol.residual, DIMENSIONLESS));
    r.diagnostics.insert("eigen_residual".into(), q(eigen_residual, ENERGY));
    r.diagnostics.insert("iterations".into(), json!(sol.iterations));
    Ok(r)
}

fn three_body(cfg: &RunConfig, exec: Exec) -> Result<Report> {
    require_coupling(cfg)?;
    let k = TorusPoint::new(&cfg.k)?;
    let opts = SolveOptions {
        n: cfg.n,
        z_tol: cfg.tol,
        exec,
        ..SolveOptions::for_dim(cfg.d)
    };
    let sol = threebody::bound_state_energy_with(cfg.mu, &k, &opts)?;
    let sweep = if cfg.oracle.is_empty() {
        None
    } else {
        Some(oracle::sweep(cfg.mu, &k, &cfg.oracle, exec)?)
    };
    let (o_energy, o_error) = match &sweep {
        Some(s) => match &s.extrapolated {
            Some(x) => (Some(x.energy), Some(x.error)),
            None => (s.energies.last().copied(), None),
        },
        None => (None, None),
    };
    let o_diff = o_energy.map(|e| (sol.energy - e).abs());
    let spec = &sol.spectrum;
    let mut r = header(
        "K",
        cfg.d,
        &[
            "energy",
            "tau_bottom",
            "tau_top",
            "branch_lo",
            "branch_hi",
            "band_lo",
            "band_hi",
            "gap",
            "lambda",
            "residual",
            "symmetry_residual",
            "n",
            "oracle_energy",
            "oracle_error",
            "oracle_difference",
        ],
    );
    r.row(with_point(
        &k,
        vec![
            sol.energy.into(),
            spec.tau_bottom.into(),
            spec.tau_top.into(),
            spec.two_particle_branch.lo.into(),
            spec.two_particle_branch.hi.into(),
            spec.three_particle_band.lo.into(),
            spec.three_particle_band.hi.into(),
            sol.gap.into(),
            sol.lambda.into(),
            sol.residual.into(),
            sol.symmetry_residual.into(),
            sol.n.into(),
            o_energy.into(),
            o_error.into(),
            o_diff.into(),
        ],
    ));
    r.results = json!({
        "K": qv(k.coords(), MOMENTUM),
        "energy": q(sol.energy, ENERGY),
        "side": sol.side(),
        "tau_bottom": q(spec.tau_bottom, ENERGY),
        "tau_top": q(spec.tau_top, ENERGY),
        "branch": qv(&[spec.two_particle_branch.lo, spec.two_particle_branch.hi], ENERGY),
        "band": qv(&[spec.three_particle_band.lo, spec.three_particle_band.hi], ENERGY),
        "gap": q(sol.gap, ENERGY),
        "oracle_energy": q_opt(o_energy, ENERGY),
        "oracle_difference": q_opt(o_diff, ENERGY),
    });
    let dg = &sol.diagnostics;
    let d = &mut r.diagnostics;
    d.insert("n".into(), json!(sol.n));
    d.insert("lambda".into(), q(sol.lambda, DIMENSIONLESS));
    d.insert("residual".into(), q_opt(sol.residual, ENERGY));
    d.insert("symmetry_residual".into(), q_opt(sol.symmetry_residual, DIMENSIONLESS));
    d.insert("grid_shift".into(), qv(sol.shift.coords(), MOMENTUM));
    d.insert("evaluations".into(), json!(dg.evaluations));
    d.insert("monotone".into(), json!(dg.monotone));
    d.insert("one_signed".into(), json!(dg.one_signed));
    d.insert("near_gap".into(), q(dg.near_gap, ENERGY));
    d.insert("lambda_near".into(), q(dg.lambda_near, DIMENSIONLESS));
    d.insert("refined_shift".into(), q_opt(dg.refined_shift, ENERGY));
    d.insert(
        "lambda_samples".into(),
        Value::Array(
            dg.lambda_samples
                .iter()
                .map(|[z, l]| json!({"z": q(*z, ENERGY), "lambda": q(*l, DIMENSIONLESS)}))
                .collect(),
        ),
    );
    if let Some(s) = &sweep {
        d.insert(
            "oracle".into(),
            json!({
                "L": s.ls,
                "energies": qv(&s.energies, ENERGY),
                "extrapolated": s.extrapolated.as_ref().map(|x| json!({
                    "energy": q(x.energy, ENERGY),
                    "error": q(x.error, ENERGY),
                    "ratio": x.ratio.map(num),
                    "warning": x.warning,
                })),
            }),
        );
    }
    Ok(r)
}

fn ess(cfg: &RunConfig) -> Result<Report> {
    require_coupling(cfg)?;
    let k = TorusPoint::new(&cfg.k)?;
    let s = threebody::essential_spectrum(cfg.mu, &k)?;
    let mut r = header(
        "K",
        cfg.d,
        &["branch_lo", "branch_hi", "band_lo", "band_hi", "tau_bottom", "tau_top"],
    );
    r.row(with_point(
        &k,
        vec![
            s.two_particle_branch.lo.into(),
            s.two_particle_branch.hi.into(),
            s.three_particle_band.lo.into(),
            s.three_particle_band.hi.into(),
            s.tau_bottom.into(),
            s.tau_top.into(),
        ],
    ));
    r.results = json!({
        "K": qv(k.coords(), MOMENTUM),
        "branch": qv(&[s.two_particle_branch.lo, s.two_particle_branch.hi], ENERGY),
        "band": qv(&[s.three_particle_band.lo, s.three_particle_band.hi], ENERGY),
        "tau_bottom": q(s.tau_bottom, ENERGY),
        "tau_top": q(s.tau_top, ENERGY),
    });
    r.diagnostics.insert("branch_argmin".into(), qv(s.branch_argmin.coords(), MOMENTUM));
    r.diagnostics.insert("branch_argmax".into(), qv(s.branch_argmax.coords(), MOMENTUM));
    Ok(r)
}

fn band(cfg: &RunConfig, exec: Exec) -> Result<(Report, i32)> {
    require_coupling(cfg)?;
    let report = if cfg.particles == 2 {
        twobody::band_scan(cfg.mu, cfg.d, cfg.nk, exec)?
    } else {
        let opts = SolveOptions {
            z_tol: cfg.tol,
            exec,
            ..SolveOptions::for_dim(cfg.d).with_n(cfg.n).bare()
        };
        threebody::band_scan(cfg.mu, cfg.d, cfg.nk, &opts)?
    };
    let mut r = header(
        "K",
        cfg.d,
        &["energy", "tau_bottom", "tau_top", "e_min", "e_max", "gap", "status"],
    );
    let mut rows = Vec::new();
    for row in &report.rows {
        r.row(with_point(
            &row.k,
            vec![
                row.energy.into(),
                row.tau_bottom.into(),
                row.tau_top.into(),
                row.e_min.into(),
                row.e_max.into(),
                row.gap.into(),
                row.status.clone().into(),
            ],
        ));
        rows.push(json!({
            "K": qv(row.k.coords(), MOMENTUM),
            "energy": q_opt(row.energy, ENERGY),
            "tau_bottom": q(row.tau_bottom, ENERGY),
            "tau_top": q(row.tau_top, ENERGY),
            "e_min": q(row.e_min, ENERGY),
            "e_max": q(row.e_max, ENERGY),
            "gap": q_opt(row.gap, ENERGY),
            "status": row.status,
        }));
    }
    r.results = Value::Array(rows);
    let failed = report.rows.iter().filter(|x| !x.is_ok()).count();
    r.summary("isolated", report.isolated);
    r.summary("gap", report.gap.map_or("none".into(), super::output::fmt12));
    if let Some(b) = report.band {
        r.summary(
            "band",
            format!("[{}, {}]", super::output::fmt12(b.lo), super::output::fmt12(b.hi)),
        );
    }
    r.summary("rows", report.rows.len());
    r.summary("failed", failed);
    r.diagnostics.insert("separated".into(), json!(report.separated));
    let status = if report.all_ok { 0 } else { 3 };
    Ok((r, status))
}

fn oracle_cmd(cfg: &RunConfig, exec: Exec) -> Result<Report> {
    let k = TorusPoint::new(&cfg.k)?;
    if cfg.ls.is_empty() {
        return Err(Error::InvalidArgument("oracle needs at least one box size --L".into()));
    }
    let reports = exec
        .map(&cfg.ls, |&l| {
            let fiber = oracle::finite_three_body_bosonic(cfg.mu, &k, l)?;
            oracle::classify_spectrum(&fiber, &ClassifyOptions::default())
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let bound = |rep: &oracle::OracleReport| -> Option<f64> {
        if cfg.mu < 0.0 {
            rep.bosonic.first().copied()
        } else if cfg.mu > 0.0 {
            rep.bosonic.last().copied()
        } else {
            None
        }
    };
    let mut r = Report::new(&[
        "L",
        "bosonic_dim",
        "bound_energy",
        "isolated_below",
        "isolated_above",
        "cluster_lo",
        "cluster_hi",
    ]);
    let mut results = Vec::new();
    for rep in &reports {
        r.row(vec![
            rep.l.into(),
            rep.bosonic.len().into(),
            bound(rep).into(),
            rep.isolated_below.len().into(),
            rep.isolated_above.len().into(),
            rep.cluster.lo.into(),
            rep.cluster.hi.into(),
        ]);
        results.push(json!({
            "L": rep.l,
            "bosonic_dim": rep.bosonic.len(),
            "bound_energy": q_opt(bound(rep), ENERGY),
            "isolated_below": qv(&rep.isolated_below, ENERGY),
            "isolated_above": qv(&rep.isolated_above, ENERGY),
            "cluster": qv(&[rep.cluster.lo, rep.cluster.hi], ENERGY),
        }));
    }
    r.results = Value::Array(results);
    let energies: Option<Vec<f64>> = reports.iter().map(bound).collect();
    if let Some(e) = energies.filter(|e| e.len() >= 3) {
        let x = oracle::extrapolate(&e)?;
        r.summary("extrapolated", super::output::fmt12(x.energy));
        r.summary("error", super::output::fmt12(x.error));
        if let Some(w) = &x.warning {
            r.summary("warning", w);
        }
        r.diagnostics.insert(
            "extrapolated".into(),
            json!({"energy": q(x.energy, ENERGY), "error": q(x.error, ENERGY), "warning": x.warning}),
        );
    }
    Ok(r)
}

fn self_test(cfg: &RunConfig, exec: Exec) -> (Report, i32) {
    let checks = selftest::run(cfg.d, cfg.quick, exec);
    let mut r = Report::new(&["check", "passed", "detail", "seconds"]);
    for c in &checks {
        r.row(vec![
            c.name.as_str().into(),
            c.passed.into(),
            c.detail.as_str().into(),
            c.seconds.into(),
        ]);
        eprintln!("{} {:<44} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    r.results = Value::Array(
        checks
            .iter()
            .map(|c| json!({"check": c.name, "passed": c.passed, "detail": c.detail}))
            .collect(),
    );
    let failed = checks.iter().filter(|c| !c.passed).count();
    r.summary("checks", checks.len());
    r.summary("failed", failed);
    (r, if failed == 0 { 0 } else { 1 })
}
