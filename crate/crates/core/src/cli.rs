//! Batch commands behind the `bubblestrip` binary.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::bubble::{alpha, BubbleParams};
use crate::config::RunConfig;
use crate::error::Result;
use crate::geometry::{lattice_sum, surface_area};
use crate::model::Block;
use crate::norms::{build_grid, l_norm_scaling, nonlinear_remainder, scaling_exponent_fit, GridOptions};
use crate::projection::{
    ball_samples, periodicity_check, phi_expansion_residual, pw_eval, sandwich_check, PeriodicityRow,
};
use crate::quad::constants::f_index;
use crate::quad::{
    compute_b, compute_bi, compute_bi_by_parts, compute_d, compute_f_at, compute_f_two_route, gram_matrix,
    mc_oracle, FRoute, Proposal,
};
use crate::reduction::{consistency_check, reduced_coefficients, solve_reduced, ConsistencyOptions, Which};
use crate::report::{write_csv, Check, Report, ScalingRow, Status};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Check the dimensional and curvature hypotheses.
    Validate,
    /// B, D, F, B_i and the Gram matrix with their identities.
    Constants,
    /// The lattice sum and the reduced-equation constant S.
    Lattice,
    /// Sandwich, periodicity and expansion checks of the projected bubble.
    ProjectCheck,
    /// Scaling of the error term and of the nonlinear remainder.
    NormCheck,
    /// C₀ and the leading-order reduced solution.
    Reduce,
    /// Numeric terms of the projected equation against their leading forms.
    Consistency,
    /// Everything above, one report.
    ReportAll,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Constants => "constants",
            Command::Lattice => "lattice",
            Command::ProjectCheck => "project-check",
            Command::NormCheck => "norm-check",
            Command::Reduce => "reduce",
            Command::Consistency => "consistency",
            Command::ReportAll => "report-all",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "bubblestrip", version, about = "Projected bubbles and reduced equations on a periodic strip")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration; defaults apply to missing sections.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Report path; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// CSV path for scaling tables.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
    /// Overrides every seed in the configuration.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, env = "BUBBLESTRIP_THREADS")]
    pub threads: Option<usize>,
}

/// Result of one command before it is written out.
pub struct Outcome {
    pub checks: Vec<Check>,
    pub results: Value,
    pub table: Vec<ScalingRow>,
}

fn to_json<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

pub fn run_constants(cfg: &RunConfig) -> Result<Outcome> {
    let g = &cfg.geometry;
    let m = &cfg.model;
    let spec = &cfg.quadrature;
    let tol = spec.rel_tol;
    let mut checks = Vec::new();

    let b = compute_b(g, spec)?;
    let b_exact = (g.nf() - 2.0) * surface_area(g.n)? * g.c_nk();
    checks.push(Check::relative("B far-field mass", b, b_exact, 1e-6, "(N-2)|S^{N-1}| C_{N,k}"));
    let mc = mc_oracle(
        |x| crate::bubble::w_eval(x, &BubbleParams::centered(g.h, 1.0), g).powf(g.power()),
        g,
        &Proposal::for_bubble(g.origin(), 1.0),
        spec,
    )?;
    let mut c = Check::window(
        "B Monte Carlo",
        mc.estimate,
        mc.std_error,
        b - 3.0 * mc.std_error,
        b + 3.0 * mc.std_error,
        "Cauchy importance sampling, 3σ",
    );
    c.expected = Some(b);
    checks.push(c);

    let d = compute_d(g, spec)?;
    checks.push(Check::relative(
        "D identity",
        d,
        (g.nf() - 2.0) * b / (2.0 * (g.two_sharp() - 1.0)),
        1e-6,
        "(N-2)B/(2(2♯-1))",
    ));

    let (f_def, f_bp) = compute_f_two_route(g, m, spec)?;
    checks.push(Check::relative("F two routes", f_def, f_bp, 1e-5, "integration by parts"));
    let (lo, hi) = match m.j_block(g) {
        Some(Block::Y) => (1, g.k),
        _ => (g.k + 1, g.n),
    };
    let i0 = f_index(g, m)?;
    let mut f_block = Vec::new();
    for i in lo..=hi {
        let v = compute_f_at(g, m.beta_min(), i, spec, FRoute::Defining)?;
        checks.push(Check::relative(&format!("F invariance, index {i}"), v, f_def, 1e-5, "block symmetry"));
        f_block.push(v);
    }

    let mut bis = Vec::new();
    for i in 1..=g.h {
        let bi = compute_bi(g, m, i, spec)?;
        let bp = compute_bi_by_parts(g, m, i, spec)?;
        checks.push(Check::relative(&format!("B_{i} by parts"), bi, bp, 1e-5, "integration by parts"));
        checks.push(Check::flag(&format!("B_{i} nonzero"), bi != 0.0, "a_(k+i) ≠ 0"));
        bis.push(bi);
    }

    let lam = cfg.bubble.lambda;
    let g1 = gram_matrix(&cfg.bubble, g, spec)?;
    let g2 = gram_matrix(&BubbleParams::new(cfg.bubble.zhat.clone(), 2.0 * lam), g, spec)?;
    let n = g.h + 1;
    let off_zero = (0..n).all(|i| (0..n).all(|j| i == j || g1.entries[i][j] == 0.0));
    checks.push(Check::flag("Gram off-diagonals zero", off_zero, "parity assertion"));
    for i in 1..=n {
        let want = 2f64.powi(2 * alpha(i, g)?);
        checks.push(Check::relative(
            &format!("Gram diagonal {i} λ-scaling"),
            g2.diag(i) / g1.diag(i),
            want,
            1e-10,
            "2^(2α(i))",
        ));
        checks.push(Check::flag(&format!("Gram diagonal {i} positive"), g1.diag(i) > 0.0, "positivity"));
    }

    Ok(Outcome {
        checks,
        results: json!({
            "B": b, "B_exact": b_exact, "B_mc": to_json(&mc), "D": d,
            "F": f_def, "F_by_parts": f_bp, "F_index": i0, "F_block": f_block,
            "B_i": bis, "gram": to_json(&g1), "gram_2lambda": to_json(&g2), "rel_tol": tol,
        }),
        table: Vec::new(),
    })
}

pub fn run_lattice(cfg: &RunConfig) -> Result<Outcome> {
    let g = &cfg.geometry;
    let r = lattice_sum(g.nf() - 2.0, g.kbar)?;
    let s = r.value * g.kernel_prefactor();
    let checks = vec![Check::window(
        "lattice tail certified",
        r.tail_bound / r.value,
        0.0,
        0.0,
        1e-8,
        "cube-comparison tail bound",
    )];
    Ok(Outcome {
        checks,
        results: json!({ "lattice_sum": to_json(&r), "S": s }),
        table: Vec::new(),
    })
}

fn sandwich_grid() -> GridOptions {
    GridOptions {
        scaled_shells: 10,
        absolute_shells: 10,
        directions: 4,
        slab_points: 10,
        far_points: 10,
        seed: 5,
    }
}

pub fn run_project_check(cfg: &RunConfig) -> Result<Outcome> {
    let g = &cfg.geometry;
    let p = &cfg.bubble;
    let pc = &cfg.projection;
    let mut checks = Vec::new();

    let mut pts = build_grid(g, p, &sandwich_grid()).points;
    pts.truncate(cfg.grids.sandwich_points);
    let rows = sandwich_check(&pts, p, g, pc)?;
    let bad = rows.iter().filter(|r| !r.ok).count();
    checks.push(Check::window("sandwich violations", bad as f64, 0.0, 0.0, 0.0, "0 <= PW <= ΣW within 3σ + tail"));

    let per: Vec<_> = pts
        .iter()
        .step_by((pts.len() / 10).max(1))
        .take(10)
        .flat_map(|x| (1..=g.kbar).map(move |d| (x.clone(), d)))
        .map(|(x, d)| periodicity_check(&x, p, g, pc, d))
        .collect::<Result<_>>()?;
    let bad = per.iter().filter(|r: &&PeriodicityRow| !r.ok).count();
    checks.push(Check::window("periodicity violations", bad as f64, 0.0, 0.0, 0.0, "2(tail + 3σ)"));

    let xs = ball_samples(g, &g.origin(), 1.0, cfg.grids.expansion_points, pc.seed);
    let rep = phi_expansion_residual(p, g, pc, &xs, &cfg.grids.l_grid)?;
    let e = -(g.nf() - 2.0);
    checks.push(
        Check::window("expansion residual L-exponent", rep.slope, rep.half_width, e - 0.5, e + 0.5, "remainder order")
            .inconclusive(rep.inconclusive),
    );
    let table = rep
        .rows
        .iter()
        .map(|r| ScalingRow {
            scale: r.l,
            value: r.max_abs_e,
            error: r.stat_error,
            weight: 1.0,
        })
        .collect();
    Ok(Outcome {
        checks,
        results: json!({ "sandwich": to_json(&rows), "periodicity": to_json(&per), "expansion": to_json(&rep) }),
        table,
    })
}

/// `N(tω)` slope in `t` at random points, with `ω` dominating `PW`.
pub fn remainder_exponents(cfg: &RunConfig) -> Result<Vec<(f64, f64)>> {
    let g = &cfg.geometry;
    let p = &cfg.bubble;
    let xs = ball_samples(g, &p.center(g), 1.0, cfg.grids.remainder_points, cfg.projection.seed ^ 0x5eed);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.projection.seed);
    let mut out = Vec::new();
    for x in &xs {
        let pw = pw_eval(x, p, g, &cfg.projection)?.value.max(0.0);
        // ω/PW log-uniform in [1e7, 1e9]: the regime where ω dominates.
        let ratio = 10f64.powf(rng.random_range(7.0..9.0));
        let omega = ratio * pw.max(f64::MIN_POSITIVE);
        let pairs: Vec<(f64, f64)> = (0..13)
            .map(|i| {
                let t = 10f64.powf(-3.0 + 0.25 * i as f64);
                nonlinear_remainder(x, pw, t * omega, &cfg.model, g).map(|v| (t, v.abs()))
            })
            .collect::<Result<_>>()?;
        let f = scaling_exponent_fit(&pairs)?;
        out.push((f.exponent, f.half_width));
    }
    Ok(out)
}

pub fn run_norm_check(cfg: &RunConfig) -> Result<Outcome> {
    let g = &cfg.geometry;
    let m = &cfg.model;
    let rc = reduced_coefficients(g, m, &cfg.quadrature)?;
    let sol = solve_reduced(&rc, m, g, g.l)?;
    let pairs: Vec<(f64, f64)> = cfg
        .grids
        .lambda_grid
        .iter()
        .map(|&lam| (lam, (lam / sol.c0).powf(1.0 / sol.exponent)))
        .collect();
    let rep = l_norm_scaling(&pairs, g, m, cfg.theta, &cfg.projection, &GridOptions::default())?;
    let mut checks = vec![Check::window(
        "‖l‖_** λ-exponent",
        rep.fit.exponent,
        rep.fit.half_width,
        f64::NEG_INFINITY,
        -1.0,
        "grid sup along the coupled (λ, L) curve",
    )];
    let ex = remainder_exponents(cfg)?;
    let target = g.nf() / (g.nf() - 2.0);
    for (i, (e, hw)) in ex.iter().enumerate() {
        checks.push(Check::window(
            &format!("N(tω) t-exponent, point {i}"),
            *e,
            *hw,
            target - 0.1,
            target + 0.1,
            "N/(N-2)",
        ));
    }
    let table = rep
        .rows
        .iter()
        .map(|r| ScalingRow {
            scale: r.lambda,
            value: r.norm,
            error: r.norm * r.max_rel_error,
            weight: 1.0,
        })
        .collect();
    Ok(Outcome {
        checks,
        results: json!({ "l_norm": to_json(&rep), "remainder_exponents": ex, "C0": sol.c0 }),
        table,
    })
}

pub fn run_reduce(cfg: &RunConfig) -> Result<Outcome> {
    let g = &cfg.geometry;
    let m = &cfg.model;
    let rc = reduced_coefficients(g, m, &cfg.quadrature)?;
    let sol = solve_reduced(&rc, m, g, g.l)?;
    let ratio = sol.lambda_l / g.l.powf(sol.exponent);
    let checks = vec![
        Check::relative("λ_L / L^exponent = C₀", ratio, sol.c0, 1e-12, "leading-order balance"),
        Check::flag("window_ok", sol.window_ok, "C₀/2 <= λ L^(-exponent) <= 2C₀"),
        Check::flag("C₀ > 0", sol.c0 > 0.0, "sign condition"),
    ];
    Ok(Outcome {
        checks,
        results: json!({
            "coefficients": to_json(&rc),
            "solution": to_json(&sol),
            "lambda_over_L_pow": ratio,
        }),
        table: Vec::new(),
    })
}

pub fn run_consistency(cfg: &RunConfig) -> Result<Outcome> {
    let g0 = &cfg.geometry;
    let m = &cfg.model;
    let spec = &cfg.quadrature;
    let rc = reduced_coefficients(g0, m, spec)?;
    let opts = ConsistencyOptions {
        samples: cfg.grids.consistency_samples,
        seed: cfg.quadrature.mc_seed,
        ..Default::default()
    };
    let mut reports = Vec::new();
    let mut table = Vec::new();
    for &l in &cfg.grids.consistency_l_grid {
        let g = g0.with_period(l);
        let sol = solve_reduced(&rc, m, &g, l)?;
        let r = consistency_check(sol.lambda_l, &g, m, &rc, &cfg.projection, spec, Which::Lambda, &opts)?;
        table.push(ScalingRow {
            scale: l,
            value: r.m_term.ratio.unwrap_or(f64::NAN),
            error: 0.0,
            weight: 1.0,
        });
        let mut zs = Vec::new();
        for i in 1..=g.h {
            zs.push(consistency_check(sol.lambda_l, &g, m, &rc, &cfg.projection, spec, Which::Z(i), &opts)?);
        }
        reports.push((l, r, zs));
    }
    let mut checks = Vec::new();
    let at = reports.iter().position(|(l, _, _)| *l == g0.l);
    if let Some(k) = at {
        let (l, r, _) = &reports[k];
        for (name, t) in [("φ-term", &r.phi_term), ("(M-1)-term", &r.m_term)] {
            checks.push(
                Check::window(
                    &format!("{name} ratio at L = {l}"),
                    t.ratio.unwrap_or(f64::NAN),
                    t.stat_error / t.closed_form.abs(),
                    0.8,
                    1.2,
                    &t.oracle,
                )
                .inconclusive(r.inconclusive),
            );
        }
        if k > 0 {
            let (lp, rp, _) = &reports[k - 1];
            for (name, a, b) in [
                ("φ-term", &rp.phi_term, &r.phi_term),
                ("(M-1)-term", &rp.m_term, &r.m_term),
            ] {
                let (ea, eb) = ((a.ratio.unwrap_or(f64::NAN) - 1.0).abs(), (b.ratio.unwrap_or(f64::NAN) - 1.0).abs());
                let noise = (a.stat_error / a.closed_form.abs()) + (b.stat_error / b.closed_form.abs());
                checks.push(Check::flag(
                    &format!("{name} improves from L = {lp} to L = {l}"),
                    eb <= ea + 3.0 * noise,
                    "|ratio - 1| non-increasing within noise",
                ));
            }
        }
    }
    let results = json!({
        "coefficients": to_json(&rc),
        "checks": reports.iter().map(|(l, r, zs)| json!({"L": l, "lambda": to_json(r), "z": to_json(zs)})).collect::<Vec<_>>(),
    });
    Ok(Outcome { checks, results, table })
}

/// Runs `cmd` on a validated configuration.
pub fn execute(cmd: Command, cfg: &RunConfig) -> Result<Outcome> {
    match cmd {
        Command::Validate => Ok(Outcome {
            checks: vec![Check::flag("hypotheses", true, "validate_geometry, validate_model")],
            results: json!({ "violations": Vec::<String>::new() }),
            table: Vec::new(),
        }),
        Command::Constants => run_constants(cfg),
        Command::Lattice => run_lattice(cfg),
        Command::ProjectCheck => run_project_check(cfg),
        Command::NormCheck => run_norm_check(cfg),
        Command::Reduce => run_reduce(cfg),
        Command::Consistency => run_consistency(cfg),
        Command::ReportAll => {
            let mut checks = Vec::new();
            let mut results = serde_json::Map::new();
            let mut table = Vec::new();
            for c in [
                Command::Constants,
                Command::Lattice,
                Command::ProjectCheck,
                Command::NormCheck,
                Command::Reduce,
                Command::Consistency,
            ] {
                let o = execute(c, cfg)?;
                checks.extend(o.checks.into_iter().map(|mut k| {
                    k.name = format!("{}: {}", c.name(), k.name);
                    k
                }));
                results.insert(c.name().into(), o.results);
                table.extend(o.table);
            }
            Ok(Outcome {
                checks,
                results: Value::Object(results),
                table,
            })
        }
    }
}

fn emit(text: &str, out: Option<&Path>) -> std::result::Result<(), String> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("cannot write {}: {e}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

/// Full CLI flow; returns the process exit code.
pub fn main_with(cli: Cli) -> i32 {
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("cannot configure {t} threads: {e}");
        }
    }
    let mut cfg = match &cli.config {
        Some(p) => match RunConfig::load(p) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("{e}");
                return 1;
            }
        },
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.reseed(s);
    }
    let violations = cfg.violations();
    if !violations.is_empty() {
        for v in &violations {
            eprintln!("violation: {v}");
        }
        let checks = violations
            .iter()
            .map(|v| Check::flag(v, false, "hypothesis check"))
            .collect();
        let rep = Report::new(cli.command.name(), &cfg, checks, json!({ "violations": violations }));
        if let Err(e) = emit(&rep.to_json(), cli.out.as_deref()) {
            eprintln!("{e}");
        }
        return 1;
    }
    let outcome = match execute(cli.command, &cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("{} failed: {e}", cli.command.name());
            return match e {
                crate::Error::Config(_) => 1,
                _ => 2,
            };
        }
    };
    if let Some(p) = &cli.csv {
        if let Err(e) = write_csv(p, &outcome.table) {
            eprintln!("{e}");
            return 1;
        }
    }
    let rep = Report::new(cli.command.name(), &cfg, outcome.checks, outcome.results);
    for c in &rep.checks {
        if c.status != Status::Pass {
            eprintln!("{:?}: {} = {} ({})", c.status, c.name, c.value, c.tolerance);
        }
    }
    if let Err(e) = emit(&rep.to_json(), cli.out.as_deref()) {
        eprintln!("{e}");
        return 1;
    }
    rep.status.exit_code()
}
