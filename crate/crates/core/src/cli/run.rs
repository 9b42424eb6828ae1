use std::time::{Duration, Instant};

use rayon::prelude::*;

use super::config::{ExperimentConfig, ExperimentKind, OrderingValue};
use super::report::{Cell, CheckOutcome, OrderFit, RunReport, Table};
use super::{CliError, RunOptions};
use crate::hamiltonian::{
    expand_recurrence, verification_suite, vonroos_kinetic, vonroos_potential, NamedCheck, OrderingParams,
    SiteConvention, SuiteOptions, SPACING,
};
use crate::lattice::{build_chain, SymTridiag};
use crate::spectral::{
    discretize_effective, discretize_operator, eigenpairs, lowest_eigenvalues, sample_on_grid, Grid,
    SpectrumResult,
};
use crate::symexpr::{rational_to_f64, Expr};

pub const VERIFY_HEADER: [&str; 5] = ["check", "passed", "method", "difference", "note"];
pub const SPECTRUM_HEADER: [&str; 3] = ["index", "eigenvalue", "residual"];
pub const COMPARE_HEADER: [&str; 5] = ["index", "E_chain", "E_effective", "abs_err", "rel_err"];
pub const CONVERGENCE_HEADER: [&str; 4] = ["N", "a", "max_abs_err", "fitted_order_so_far"];
pub const ORDERING_HEADER: [&str; 5] = ["alpha", "gamma", "index", "E_full", "E_kinetic_only"];

pub const CHECK_RESIDUALS: &str = "eigenpair-residuals";
pub const CHECK_MONOTONE: &str = "convergence-monotone";
pub const CHECK_INVARIANCE: &str = "full-spectrum-invariance";

struct Timer(Vec<(String, Duration)>);

impl Timer {
    fn time<T>(&mut self, label: impl Into<String>, f: impl FnOnce() -> T) -> T {
        let t0 = Instant::now();
        let out = f();
        self.0.push((label.into(), t0.elapsed()));
        out
    }
}

fn report(cfg: &ExperimentConfig, opts: &RunOptions, table: Table) -> RunReport {
    RunReport {
        kind: cfg.kind,
        config: cfg.echo(),
        seed: opts.seed,
        checks: Vec::new(),
        table,
        fit: None,
        notes: Vec::new(),
        timings: Vec::new(),
    }
}

fn verify_row(c: &NamedCheck) -> (Vec<Cell>, CheckOutcome) {
    let v = &c.report.verdict;
    let method = if v.is_exact() { "exact" } else { "sampled" };
    let diffs: Vec<String> = v
        .differences()
        .into_iter()
        .filter(|(_, d)| !d.is_zero())
        .map(|(k, d)| format!("D^{k}: {d}"))
        .collect();
    let difference = if diffs.is_empty() { "0".to_string() } else { diffs.join("; ") };
    let mut detail = if c.passed() { "exact-equal".to_string() } else { format!("differs ({difference})") };
    if let Some(n) = &c.note {
        detail = format!("{detail}; {n}");
    }
    let row = vec![
        c.name.into(),
        (if c.passed() { "true" } else { "false" }).into(),
        method.into(),
        difference.into(),
        c.note.clone().unwrap_or_default().into(),
    ];
    (row, CheckOutcome { name: c.name.to_string(), passed: c.passed(), detail })
}

/// Runs the six named symbolic identity checks.
pub fn run_verify(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunReport, CliError> {
    let mut timer = Timer(Vec::new());
    let suite_opts = SuiteOptions {
        ordering: cfg.ordering(),
        triple: cfg.factor_triple(),
        convention: cfg.geometry.convention,
        mutation: opts.mutation,
    };
    let suite = timer.time("verification-suite", || verification_suite(&suite_opts))?;
    let mut r = report(cfg, opts, Table::new(&VERIFY_HEADER));
    for c in &suite {
        let (row, outcome) = verify_row(c);
        r.table.push(row);
        r.checks.push(outcome);
    }
    if cfg.geometry.convention != SiteConvention::Left {
        let rec = expand_recurrence(cfg.geometry.convention, SPACING)?;
        r.notes.push(format!(
            "convention {} gives first_order_term = {}; the hermitian form corresponds to the left convention",
            rec.convention, rec.first_order_term
        ));
    }
    r.timings = timer.0;
    Ok(r)
}

/// Refined continuum matrix on the box of an `n`-site chain. The left
/// convention uses the hermitian effective Hamiltonian, other conventions
/// the operator re-derived from their recurrence.
pub fn continuum_matrix(cfg: &ExperimentConfig, n: usize) -> Result<SymTridiag, CliError> {
    let a = cfg.geometry.spacing(n);
    let grid = Grid::for_chain(cfg.geometry.first_site(n), a, n, cfg.refine)?;
    let params = cfg.profile_params(n);
    if cfg.geometry.convention == SiteConvention::Left {
        return Ok(discretize_effective(cfg.j_profile(), &cfg.eps.expr, a, &grid, &params)?);
    }
    let rec = expand_recurrence(cfg.geometry.convention, SPACING)?;
    let b = cfg.chain_spec(n).binding()?.with_param(SPACING, a);
    Ok(discretize_operator(&rec.operator, &b, &grid)?)
}

fn spectrum_report(
    cfg: &ExperimentConfig,
    opts: &RunOptions,
    t: &SymTridiag,
    mut timer: Timer,
) -> Result<RunReport, CliError> {
    let sp = timer.time("eigenpairs", || eigenpairs(t, cfg.k, cfg.tol, opts.seed))?;
    let mut r = report(cfg, opts, Table::new(&SPECTRUM_HEADER));
    for (i, (e, res)) in sp.eigenvalues.iter().zip(&sp.residuals).enumerate() {
        r.table.push(vec![(i + 1).into(), (*e).into(), (*res).into()]);
    }
    let bound = cfg.tol * sp.meta.width;
    let worst = sp.residuals.iter().copied().fold(0.0, f64::max);
    r.checks.push(CheckOutcome {
        name: CHECK_RESIDUALS.into(),
        passed: worst <= bound,
        detail: format!("max residual {worst:.3e} against tol * width = {bound:.3e}"),
    });
    push_solver_notes(&mut r, t, &sp);
    r.timings = timer.0;
    Ok(r)
}

fn push_solver_notes(r: &mut RunReport, t: &SymTridiag, sp: &SpectrumResult) {
    let m = &sp.meta;
    r.notes.push(format!(
        "{} on {}x{} matrix, Gershgorin width {:.6e}, pivot guard {:.3e}, max bisection steps {}, inverse iterations {:?}",
        m.method,
        t.n(),
        t.n(),
        m.width,
        m.pivot_guard,
        m.max_bisection_steps,
        m.inverse_iterations
    ));
    if m.unreduced && !m.strictly_separated {
        r.notes.push("warning: unreduced matrix returned coincident eigenvalues".into());
    }
}

pub fn run_spectrum_chain(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunReport, CliError> {
    let mut timer = Timer(Vec::new());
    let t = timer.time("build-chain", || build_chain(&cfg.chain_spec(cfg.n())))?;
    spectrum_report(cfg, opts, &t, timer)
}

pub fn run_spectrum_effective(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunReport, CliError> {
    let mut timer = Timer(Vec::new());
    let t = timer.time("discretize", || continuum_matrix(cfg, cfg.n()))?;
    spectrum_report(cfg, opts, &t, timer)
}

/// Lowest `k` eigenvalues of the chain and of its continuum counterpart.
pub fn paired_spectra(cfg: &ExperimentConfig, n: usize) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let chain = build_chain(&cfg.chain_spec(n))?;
    let cont = continuum_matrix(cfg, n)?;
    let (ec, ee) = rayon::join(|| lowest_eigenvalues(&chain, cfg.k, cfg.tol), || lowest_eigenvalues(&cont, cfg.k, cfg.tol));
    Ok((ec?.eigenvalues, ee?.eigenvalues))
}

pub fn run_compare(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunReport, CliError> {
    let mut timer = Timer(Vec::new());
    let (ec, ee) = timer.time("spectra", || paired_spectra(cfg, cfg.n()))?;
    let mut r = report(cfg, opts, Table::new(&COMPARE_HEADER));
    for (i, (c, e)) in ec.iter().zip(&ee).enumerate() {
        let abs = (c - e).abs();
        r.table.push(vec![(i + 1).into(), (*c).into(), (*e).into(), abs.into(), (abs / c.abs()).into()]);
    }
    r.timings = timer.0;
    Ok(r)
}

/// Least-squares slope of `ln e` against `ln a`; `None` with fewer than two
/// points or a nonpositive error.
pub fn fit_order(points: &[(f64, f64)]) -> Option<OrderFit> {
    if points.len() < 2 || points.iter().any(|(a, e)| !(*a > 0.0 && *e > 0.0)) {
        return None;
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let order = sxy / sxx;
    let ss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - my - order * (x - mx)).powi(2)).sum();
    Some(OrderFit { order, residual: (ss / n).sqrt() })
}

pub fn run_convergence(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunReport, CliError> {
    let mut timer = Timer(Vec::new());
    let errors: Vec<f64> = timer.time("sweep", || {
        cfg.geometry
            .n
            .par_iter()
            .map(|&n| {
                let (ec, ee) = paired_spectra(cfg, n)?;
                Ok(ec.iter().zip(&ee).map(|(c, e)| (c - e).abs()).fold(0.0, f64::max))
            })
            .collect::<Result<_, CliError>>()
    })?;
    let points: Vec<(f64, f64)> = cfg.geometry.n.iter().map(|&n| cfg.geometry.spacing(n)).zip(errors.iter().copied()).collect();
    let mut r = report(cfg, opts, Table::new(&CONVERGENCE_HEADER));
    for (i, (&n, &(a, e))) in cfg.geometry.n.iter().zip(&points).enumerate() {
        let so_far = fit_order(&points[..=i]).map_or(Cell::Empty, |f| f.order.into());
        r.table.push(vec![n.into(), a.into(), e.into(), so_far]);
    }
    let monotone = errors.windows(2).all(|w| w[1] < w[0]);
    let listed: Vec<String> = errors.iter().map(|e| format!("{e:.3e}")).collect();
    r.checks.push(CheckOutcome {
        name: CHECK_MONOTONE.into(),
        passed: monotone,
        detail: format!("e(N) = [{}] {} strictly decreasing", listed.join(", "), if monotone { "is" } else { "is not" }),
    });
    r.fit = fit_order(&points);
    r.timings = timer.0;
    Ok(r)
}

/// Lowest eigenvalues of `T + U` and of `T` alone for one ordering.
pub struct OrderingPoint {
    pub alpha: f64,
    pub gamma: f64,
    pub full: SpectrumResult,
    pub kinetic_only: SpectrumResult,
}

pub fn ordering_point(cfg: &ExperimentConfig, p: &OrderingParams, n: usize) -> Result<(SpectrumResult, SpectrumResult), CliError> {
    let a = cfg.geometry.spacing(n);
    let grid = Grid::for_chain(cfg.geometry.first_site(n), a, n, cfg.refine)?;
    let b = cfg.chain_spec(n).binding()?.with_param(SPACING, a);
    let spacing = Expr::param(SPACING);
    let kinetic = discretize_operator(&vonroos_kinetic(p, &spacing), &b, &grid)?;
    let mut full = kinetic.clone();
    full.add_diagonal(&sample_on_grid(&vonroos_potential(p, &spacing), &b, &grid)?);
    Ok((lowest_eigenvalues(&full, cfg.k, cfg.tol)?, lowest_eigenvalues(&kinetic, cfg.k, cfg.tol)?))
}

fn values(v: &OrderingValue) -> &[num_rational::BigRational] {
    match v {
        OrderingValue::Values(v) => v,
        OrderingValue::Symbolic => &[],
    }
}

pub fn run_ordering_sweep(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunReport, CliError> {
    let mut timer = Timer(Vec::new());
    let grid: Vec<OrderingParams> = values(&cfg.alpha)
        .iter()
        .flat_map(|a| values(&cfg.gamma).iter().map(move |g| OrderingParams::rational(a.clone(), g.clone())))
        .collect();
    let n = cfg.n();
    let pts: Vec<OrderingPoint> = timer.time("sweep", || {
        grid.par_iter()
            .map(|p| {
                let (full, kinetic_only) = ordering_point(cfg, p, n)?;
                let num = |e: &Expr| match e {
                    Expr::Const(c) => rational_to_f64(c),
                    _ => f64::NAN,
                };
                Ok(OrderingPoint { alpha: num(p.alpha()), gamma: num(p.gamma()), full, kinetic_only })
            })
            .collect::<Result<_, CliError>>()
    })?;
    let mut r = report(cfg, opts, Table::new(&ORDERING_HEADER));
    for pt in &pts {
        for (i, (f, k)) in pt.full.eigenvalues.iter().zip(&pt.kinetic_only.eigenvalues).enumerate() {
            r.table.push(vec![pt.alpha.into(), pt.gamma.into(), (i + 1).into(), (*f).into(), (*k).into()]);
        }
    }
    let spread = |get: &dyn Fn(&OrderingPoint) -> &SpectrumResult| {
        (0..cfg.k)
            .map(|i| {
                let vals = pts.iter().map(|p| get(p).eigenvalues[i]);
                let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
                hi - lo
            })
            .fold(0.0, f64::max)
    };
    let full_spread = spread(&|p| &p.full);
    let kinetic_spread = spread(&|p| &p.kinetic_only);
    let tol_abs = cfg.tol * pts.iter().map(|p| p.full.meta.width).fold(0.0, f64::max);
    r.checks.push(CheckOutcome {
        name: CHECK_INVARIANCE.into(),
        passed: full_spread <= 2.0 * tol_abs,
        detail: format!(
            "max spread of T+U eigenvalues over {} orderings is {full_spread:.3e} against 2 * solver tolerance = {:.3e}",
            pts.len(),
            2.0 * tol_abs
        ),
    });
    r.notes.push(format!(
        "kinetic-only spread {kinetic_spread:.3e} = {:.3e} x solver tolerance",
        kinetic_spread / tol_abs
    ));
    r.timings = timer.0;
    Ok(r)
}

/// Dispatches on the experiment kind.
pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunReport, CliError> {
    match cfg.kind {
        ExperimentKind::Verify => run_verify(cfg, opts),
        ExperimentKind::SpectrumChain => run_spectrum_chain(cfg, opts),
        ExperimentKind::SpectrumEffective => run_spectrum_effective(cfg, opts),
        ExperimentKind::Compare => run_compare(cfg, opts),
        ExperimentKind::Convergence => run_convergence(cfg, opts),
        ExperimentKind::OrderingSweep => run_ordering_sweep(cfg, opts),
    }
}
