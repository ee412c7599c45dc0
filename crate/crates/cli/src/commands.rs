//! One function per subcommand. Each returns the exit code and fills the
//! report; errors are mapped to exit codes by the caller.

use kwsolve::geometry::{
    degenerate_solve, gauduchon_degree, reduce, transform_s, transform_s2, GeometrySetup,
};
use kwsolve::kw::{
    asymptotic_suite, construct_unsolvable, critical_c_bracket, necessary_check, solve_kw,
    solve_prescribed, sufficient_check, PrescribedSolution,
};
use kwsolve::linsolve::estimate_gamma;
use kwsolve::operators::divergence;
use kwsolve::{GridSpec, KWProblem, KwConfig, OneForm, ScalarField, SolveReport, Status};

use crate::config::RunConfig;
use crate::error::{CliError, Result, EXIT_NOT_CONVERGED, EXIT_OK, EXIT_UNSOLVABLE};
use crate::output::{Report, Sink};

pub const COMMANDS: &[&str] = &[
    "validate",
    "transform",
    "reduce",
    "solve",
    "necessary",
    "sufficient",
    "critical-c",
    "asymptotic",
    "construct-unsolvable",
    "roundtrip",
    "gamma-estimate",
    "degenerate-t",
];

/// Field names `validate` looks for.
const FIELDS: &[&str] = &["s", "s_hat", "s2", "u", "f", "phi", "psi"];

struct Ctx<'a> {
    cfg: &'a RunConfig,
    sink: &'a Sink,
    grid: GridSpec,
    kw: KwConfig,
}

impl Ctx<'_> {
    fn field(&self, name: &str) -> Result<ScalarField> {
        self.cfg.required_field(name, &self.grid)
    }

    fn alpha(&self) -> Result<OneForm> {
        self.cfg.alpha(&self.grid)
    }

    fn setup(&self) -> Result<GeometrySetup> {
        let n = self.cfg.usize_or("n", 0)?;
        if n == 0 {
            return Err(CliError::Config("missing or zero key 'n'".into()));
        }
        let n = u32::try_from(n).map_err(|_| CliError::Config("n too large".into()))?;
        Ok(GeometrySetup::new(n, self.cfg.f64("t")?)?)
    }

    fn problem(&self, phi: ScalarField) -> Result<KWProblem> {
        Ok(KWProblem::new(
            self.alpha()?,
            self.cfg.f64("c")?,
            phi,
            self.kw.linear.gauduchon_tol,
        )?)
    }
}

pub fn run(command: &str, cfg: &RunConfig, sink: &Sink, report: &mut Report) -> Result<i32> {
    let ctx = Ctx {
        cfg,
        sink,
        grid: cfg.grid()?,
        kw: cfg.kw_config()?,
    };
    let dims: Vec<String> = ctx.grid.dims().iter().map(|d| d.to_string()).collect();
    report.put("grid", dims.join(","));
    match command {
        "validate" => validate(&ctx, report),
        "transform" => transform(&ctx, report),
        "reduce" => reduce_cmd(&ctx, report),
        "solve" => solve(&ctx, report),
        "necessary" => necessary(&ctx, report),
        "sufficient" => sufficient(&ctx, report),
        "critical-c" => critical(&ctx, report),
        "asymptotic" => asymptotic(&ctx, report),
        "construct-unsolvable" => unsolvable(&ctx, report),
        "roundtrip" => roundtrip(&ctx, report),
        "gamma-estimate" => gamma(&ctx, report),
        "degenerate-t" => degenerate(&ctx, report),
        other => Err(CliError::Config(format!("unknown command '{other}'"))),
    }
}

fn stats(report: &mut Report, name: &str, f: &ScalarField) {
    report.put(&format!("{name}.min"), f.min());
    report.put(&format!("{name}.max"), f.max());
    report.put(&format!("{name}.mean"), f.mean());
}

fn validate(ctx: &Ctx, report: &mut Report) -> Result<i32> {
    for name in FIELDS {
        if let Some(f) = ctx.cfg.field(name, &ctx.grid)? {
            stats(report, name, &f);
        }
    }
    let alpha = ctx.alpha()?;
    let div = divergence(&alpha).sup_norm();
    report.put("alpha.divergence", div);
    let tol = ctx.kw.linear.gauduchon_tol;
    report.put("alpha.gauduchon", div <= tol);
    alpha.validate_gauduchon(tol)?;
    Ok(EXIT_OK)
}

fn transform(ctx: &Ctx, report: &mut Report) -> Result<i32> {
    let setup = ctx.setup()?;
    let alpha = ctx.alpha()?;
    let u = ctx.field("u")?;
    report.put("k_t", setup.k_t());
    let s_hat = transform_s(&ctx.field("s")?, &u, &alpha, &setup)?;
    ctx.sink.field(report, "s_hat", &s_hat)?;
    if let Some(s2) = ctx.cfg.field("s2", &ctx.grid)? {
        // The metric e^u h is e^{2f} h with f = u/2.
        let f = u.scale(0.5)?;
        let s2_hat = transform_s2(&s2, &f, &alpha, &setup)?;
        ctx.sink.field(report, "s2_hat", &s2_hat)?;
    }
    Ok(EXIT_OK)
}

fn reduce_cmd(ctx: &Ctx, report: &mut Report) -> Result<i32> {
    let setup = ctx.setup()?;
    let s = ctx.field("s")?;
    let reduced = reduce(
        &s,
        &ctx.field("s_hat")?,
        &ctx.alpha()?,
        &setup,
        &ctx.kw.linear,
    )?;
    report.put("k_t", setup.k_t());
    report.put("gauduchon_degree", gauduchon_degree(&s));
    report.put("c", reduced.c);
    ctx.sink.field(report, "g", &reduced.g)?;
    ctx.sink.field(report, "phi", &reduced.phi)?;
    Ok(EXIT_OK)
}

fn status_exit(status: Status) -> i32 {
    match status {
        Status::Converged => EXIT_OK,
        Status::CertifiedUnsolvable => EXIT_UNSOLVABLE,
        Status::MaxIter | Status::NotCertified => EXIT_NOT_CONVERGED,
    }
}

fn solve_report(ctx: &Ctx, report: &mut Report, out: &PrescribedSolution) -> Result<i32> {
    let r: &SolveReport = &out.report;
    if let Some(reduced) = &out.reduced {
        report.put("c", reduced.c);
    }
    report.put("status", r.status.name());
    report.put("method", r.method.name());
    report.put("iterations", r.iterations);
    report.put("residual", r.residual);
    if let Some(m) = &r.monotone {
        report.put("monotone.lambda", m.lambda);
        report.put("monotone.min_increment", m.min_increment);
        report.put("monotone.max_excess", m.max_excess);
    }
    let trace: Vec<Vec<f64>> = r
        .trace
        .iter()
        .enumerate()
        .map(|(i, &v)| vec![i as f64, v])
        .collect();
    ctx.sink
        .csv(report, "trace", &["iteration", "max"], &trace)?;
    let steps: Vec<Vec<f64>> = r
        .steps
        .iter()
        .enumerate()
        .map(|(i, &v)| vec![i as f64, v])
        .collect();
    ctx.sink
        .csv(report, "steps", &["iteration", "value"], &steps)?;
    if let Some(u) = &out.u {
        ctx.sink.field(report, "u", u)?;
    }
    Ok(status_exit(r.status))
}

fn solve(ctx: &Ctx, report: &mut Report) -> Result<i32> {
    if ctx.cfg.get("s").is_none() && ctx.cfg.get("s_file").is_none() {
        return solve_direct(ctx, report);
    }
    let setup = ctx.setup()?;
    let strategy = ctx.cfg.strategy()?;
    report.put("strategy", strategy.name());
    let out = solve_prescribed(
        &ctx.field("s")?,
        &ctx.field("s_hat")?,
        &ctx.alpha()?,
        &setup,
        strategy,
        &ctx.kw,
    )?;
    solve_report(ctx, report, &out)
}

/// Solves for `w` given `phi` and `c` directly.
fn solve_direct(ctx: &Ctx, report: &mut Report) -> Result<i32> {
    let prob = ctx.problem(ctx.field("phi")?)?;
    let r = solve_kw(&prob, &ctx.kw)?;
    let out = PrescribedSolution {
        u: None,
        report: r,
        reduced: None,
    };
    report.put("c", prob.c);
    let code = solve_report(ctx, report, &out)?;
    if let Some(w) = &out.report.solution {
        ctx.sink.field(report, "w", w)?;
    }
    Ok(code)
}

fn roundtrip(ctx: &Ctx, report: &mut Report) -> Result<i32> {
    let setup = ctx.setup()?;
    let strategy = ctx.cfg.strategy()?;
    let alpha = ctx.alpha()?;
    let s = ctx.field("s")?;
    let u_star = ctx.field("u")?;
    let s_hat = transform_s(&s, &u_star, &alpha, &setup)?;
    ctx.sink.field(report, "s_hat", &s_hat)?;
    report.put("strategy", strategy.name());
    let out = solve_prescribed(&s, &s_hat, &alpha, &setup, strategy, &ctx.kw)?;
    if let Some(u) = &out.u {
        report.put("error", u.sup_distance(&u_star)?);
    }
    solve_report(ctx, report, &out)
}

fn necessary(ctx: &Ctx, report: &mut Report) -> Result<i32> {
    let prob = ctx.problem(ctx.field("phi")?)?;
    let check = necessary_check(&prob, &ctx.kw.linear)?;
    report.put("positive", check.positive);
    report.put("mean_negative", check.mean_negative);
    report.put("phi.mean", prob.phi.mean());
    ctx.sink.field(report, "phi0", &check.phi0)?;
    Ok(if check.passed() {
        report.put("status", "passed");
        EXIT_OK
    } else {
        report.put("status", Status::CertifiedUnsolvable.name());
        EXIT_UNSOLVABLE
    })
}

fn p_exponent(ctx: &Ctx) -> Result<f64> {
    ctx.cfg.f64_or("p", ctx.grid.rank() as f64 + 1.0)
}

fn gamma_hat(ctx: &Ctx, alpha: &OneForm, c: f64, p: f64, report: &mut Report) -> Result<f64> {
    let gamma = match ctx.cfg.get("gamma") {
        Some(_) => ctx.cfg.f64("gamma")?,
        None => {
            let samples = ctx.cfg.usize_or("samples", 8)?;
            let seed = ctx.cfg.usize_or("seed", 0)? as u64;
            report.put("samples", samples);
            report.put("seed", seed);
            estimate_gamma(alpha, c, p, samples, seed, &ctx.kw.linear)?
        }
    };
    report.put("gamma_hat", gamma);
    report.put("gamma_heuristic", ctx.cfg.get("gamma").is_none());
    Ok(gamma)
}

fn sufficient(ctx: &Ctx, report: &mut Report) -> Result<i32> {
    let prob = ctx.problem(ctx.field("phi")?)?;
    let p = p_exponent(ctx)?;
    report.put("p", p);
    let gamma = gamma_hat(ctx, &prob.alpha, prob.c, p, report)?;
    let check = sufficient_check(&prob, gamma, p)?;
    report.put("certified", check.certified);
    report.put("alpha_star", check.alpha_star);
    report.put("margin", check.margin);
    Ok(EXIT_OK)
}

fn gamma(ctx: &Ctx, report: &mut Report) -> Result<i32> {
    let alpha = ctx
        .alpha()?
        .validate_gauduchon(ctx.kw.linear.gauduchon_tol)?;
    let p = p_exponent(ctx)?;
    report.put("p", p);
    gamma_hat(ctx, &alpha, ctx.cfg.f64("c")?, p, report)?;
    Ok(EXIT_OK)
}

fn critical(ctx: &Ctx, report: &mut Report) -> Result<i32> {
    let phi = ctx.field("phi")?;
    let floor = ctx.cfg.f64_or("search_floor", -1e6)?;
    let b = critical_c_bracket(&phi, &ctx.alpha()?, floor, &ctx.kw)?;
    report.put("c_lo", b.c_lo);
    report.put("c_hi", b.c_hi);
    report.put("lo_evidence", b.lo_evidence.name());
    report.put("hi_evidence", b.hi_evidence.name());
    report.put("unbounded", b.unbounded);
    report.put("probes", b.probes.len());
    let rows: Vec<Vec<String>> = b
        .probes
        .iter()
        .map(|p| vec![p.c.to_string(), p.evidence.name().to_string()])
        .collect();
    ctx.sink.csv(report, "probes", &["c", "evidence"], &rows)?;
    Ok(EXIT_OK)
}

fn asymptotic(ctx: &Ctx, report: &mut Report) -> Result<i32> {
    let f = ctx.field("f")?;
    let alpha = ctx
        .alpha()?
        .validate_gauduchon(ctx.kw.linear.gauduchon_tol)?;
    let table = asymptotic_suite(&f, &alpha, &ctx.cfg.f64_list("c_list")?, &ctx.kw.linear)?;
    let rows: Vec<Vec<f64>> = table.iter().map(|&(c, d)| vec![c, d]).collect();
    ctx.sink
        .csv(report, "asymptotic", &["c", "deviation"], &rows)?;
    report.put("rows", rows.len());
    Ok(EXIT_OK)
}

fn unsolvable(ctx: &Ctx, report: &mut Report) -> Result<i32> {
    let c = ctx.cfg.f64("c")?;
    let shift = ctx.cfg.f64("alpha_const")?;
    let phi = construct_unsolvable(&ctx.field("psi")?, shift, c, &ctx.alpha()?)?;
    report.put("c", c);
    report.put("phi.mean", phi.mean());
    report.put("expected_mean", c * shift);
    ctx.sink.field(report, "phi", &phi)?;
    Ok(EXIT_OK)
}

fn degenerate(ctx: &Ctx, report: &mut Report) -> Result<i32> {
    let n = ctx.cfg.usize_or("n", 0)?;
    if n < 2 {
        return Err(CliError::Config(format!(
            "the degenerate parameter t = 1/(1-n) needs n >= 2, got {n}"
        )));
    }
    let n = u32::try_from(n).map_err(|_| CliError::Config("n too large".into()))?;
    let t = 1.0 / (1.0 - n as f64);
    let setup = GeometrySetup::new(n, t)?;
    report.put("t", t);
    report.put("k_t", setup.k_t());
    report.put("degenerate", setup.is_degenerate());
    let u = degenerate_solve(&ctx.field("s")?, &ctx.field("s_hat")?)?;
    ctx.sink.field(report, "u", &u)?;
    Ok(EXIT_OK)
}
