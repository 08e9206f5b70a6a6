//! Dispatch from configured checks to the core reports.

use crate::config::{Check, ExperimentConfig, KernelParams, RieszParams, StrategyName};
use graphcalc_core::coefficients::{verify_alpha_bound, verify_estim_bounds, wallis_report};
use graphcalc_core::czd::{cz_decompose_with, gradient_maximal, verify_cz, DEFAULT_C1, DEFAULT_C2};
use graphcalc_core::functional::{k_sandwich_report, poincare_report, KOptions};
use graphcalc_core::graph::{doubling_report, Ball, DistanceMatrix};
use graphcalc_core::lab::ascent::AscentOptions;
use graphcalc_core::lab::{
    delta_alpha_report, duality_report, gaffney_report, gfunc_report, gp_report, kernel_bound_report, pi_p_check,
    reverse_riesz_constant, rh_ratio, riesz_constant, KernelBound, Strategy,
};
use graphcalc_core::operators::spectral_decompose;
use graphcalc_core::rng::{normal_vec, seeded};
use graphcalc_core::{InequalityReport, Method, Result, SpectralDecomposition, Verdict, VertexFunction, WeightedGraph};
use std::sync::OnceLock;

/// Shared, lazily computed state for one graph.
pub struct Context<'a> {
    pub graph: &'a WeightedGraph,
    spec: OnceLock<Result<SpectralDecomposition>>,
    central: OnceLock<usize>,
}

impl<'a> Context<'a> {
    pub fn new(graph: &'a WeightedGraph) -> Self {
        Context { graph, spec: OnceLock::new(), central: OnceLock::new() }
    }

    pub fn spec(&self) -> Result<&SpectralDecomposition> {
        self.spec.get_or_init(|| spectral_decompose(self.graph)).as_ref().map_err(Clone::clone)
    }

    /// A vertex of least eccentricity, lowest index first.
    pub fn central(&self) -> usize {
        *self.central.get_or_init(|| {
            let g = self.graph;
            (0..g.vertex_count()).min_by_key(|&x| (g.bfs(x).into_iter().max().unwrap_or(0), x)).unwrap_or(0)
        })
    }
}

fn ascent(restarts: usize, steps: usize, seed: u64) -> AscentOptions {
    AscentOptions { restarts, steps, seed, ..Default::default() }
}

fn kernel(ctx: &Context, which: KernelBound, p: &KernelParams) -> Result<InequalityReport> {
    kernel_bound_report(ctx.graph, which, &p.k_grid, &p.c_grid, p.cap)
}

fn riesz(ctx: &Context, p: &RieszParams, reverse: bool, seed: u64) -> Result<InequalityReport> {
    let strategy = match p.strategy {
        Some(StrategyName::Exact) => Strategy::Exact,
        Some(StrategyName::Ascent) => Strategy::Ascent,
        Some(StrategyName::Sample) => Strategy::Sample,
        None if p.p == 2.0 => Strategy::Exact,
        None => Strategy::Ascent,
    };
    let opts = ascent(p.restarts, p.steps, seed);
    if reverse {
        reverse_riesz_constant(ctx.graph, ctx.spec()?, p.p, strategy, &opts)
    } else {
        riesz_constant(ctx.graph, ctx.spec()?, p.p, strategy, &opts)
    }
}

/// Lower-quantile order statistic of a sample.
fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let i = ((q.clamp(0.0, 1.0) * (v.len() - 1) as f64).round() as usize).min(v.len() - 1);
    v[i]
}

/// Folds per-sample reports of one check into one: rows are prefixed by the sample, constants
/// keep their largest value, and the verdict is the worst one seen.
pub fn merge_reports(mut reports: Vec<InequalityReport>) -> InequalityReport {
    if reports.len() == 1 {
        return reports.pop().expect("one report");
    }
    let mut out = reports[0].clone();
    out.rows.clear();
    out.flags.clear();
    out.params.insert("samples".into(), reports.len().into());
    for (i, r) in reports.iter().enumerate() {
        for row in &r.rows {
            out.push_row(&format!("f{i}/{}", row.series), row.x, row.y);
        }
        for c in &r.constants {
            if let Some(mine) = out.constants.iter_mut().find(|m| m.name == c.name) {
                if c.value > mine.value || (mine.value.is_nan() && !c.value.is_nan()) {
                    mine.value = c.value;
                }
            }
        }
        for f in &r.flags {
            out.flag(format!("f{i}: {f}"));
        }
        out.verdict = match (out.verdict, r.verdict) {
            (Verdict::Fail, _) | (_, Verdict::Fail) => Verdict::Fail,
            (Verdict::Estimate, _) | (_, Verdict::Estimate) => Verdict::Estimate,
            _ => Verdict::Pass,
        };
    }
    out
}

fn spectrum_report(spec: &SpectralDecomposition) -> InequalityReport {
    let mut report = InequalityReport::new("SPECTRUM", Method::ExactSpectral).param("size", spec.len());
    for (i, &l) in spec.eigenvalues().iter().enumerate() {
        report.push_row("eigenvalue", i as f64, l);
    }
    report.push_constant("lambda_min", spec.lambda_min(), Method::ExactSpectral, "smallest eigenvalue of P");
    report.push_constant(
        "second_modulus",
        spec.second_modulus(),
        Method::ExactSpectral,
        "largest |lambda| off the constants",
    );
    report.verdict = Verdict::Pass;
    report
}

/// Runs one check with its derived seed.
pub fn run_check(ctx: &Context, cfg: &ExperimentConfig, check: &Check, seed: u64) -> Result<InequalityReport> {
    let g = ctx.graph;
    let centers = |c: &Option<Vec<usize>>| c.clone().unwrap_or_else(|| vec![ctx.central()]);
    match check {
        Check::D { centers: c, radii } => doubling_report(g, &centers(c), radii),
        Check::DeltaAlpha { p_grid, samples } => delta_alpha_report(g, p_grid, *samples, seed),
        Check::Due(p) => kernel(ctx, KernelBound::Due, p),
        Check::Ue(p) => kernel(ctx, KernelBound::Ue, p),
        Check::Lue(p) => kernel(ctx, KernelBound::Lue, p),
        Check::Timederiv(p) => kernel(ctx, KernelBound::Timederiv, p),
        Check::P2 { centers: c, radii, spread_cap } => {
            poincare_report(g, &centers(c), radii, 2.0, *spread_cap, &AscentOptions { seed, ..Default::default() })
        }
        Check::Pq { centers: c, radii, p, spread_cap, restarts, steps } => {
            poincare_report(g, &centers(c), radii, *p, *spread_cap, &ascent(*restarts, *steps, seed))
        }
        Check::Gp { p, n_grid, restarts, steps } => {
            gp_report(g, ctx.spec()?, *p, n_grid, &ascent(*restarts, *steps, seed))
        }
        Check::Rp(p) => riesz(ctx, p, false, seed),
        Check::Rrp(p) => riesz(ctx, p, true, seed),
        Check::Duality { p, tol, restarts, steps } => {
            duality_report(g, ctx.spec()?, *p, &ascent(*restarts, *steps, seed), cfg.tolerance("duality", *tol))
        }
        Check::Gfunc { samples } => gfunc_report(g, ctx.spec()?, *samples, seed),
        Check::Cz { q, p, percentile, alpha, samples } => {
            let dm = DistanceMatrix::new(g);
            let mut rng = seeded(seed);
            let mut reports = Vec::with_capacity(*samples);
            for _ in 0..(*samples).max(1) {
                let f = VertexFunction::new(g, normal_vec(&mut rng, g.vertex_count()))?;
                let level = match alpha {
                    Some(a) => *a,
                    None => {
                        let m: Vec<f64> =
                            gradient_maximal(g, &dm, f.values(), *q).iter().map(|v| v.powf(1.0 / q)).collect();
                        quantile(&m, *percentile)
                    }
                };
                let dec = cz_decompose_with(g, &dm, &f, level, *q, DEFAULT_C1, DEFAULT_C2)?;
                reports.push(verify_cz(g, &dec, *p)?);
            }
            Ok(merge_reports(reports))
        }
        Check::Kfunc { q, t_fractions, samples, bound } => {
            let mut rng = seeded(seed);
            let fs = (0..*samples)
                .map(|_| VertexFunction::new(g, normal_vec(&mut rng, g.vertex_count())))
                .collect::<Result<Vec<_>>>()?;
            let total = g.total_mass();
            let ts: Vec<f64> = t_fractions.iter().map(|t| t * total).collect();
            k_sandwich_report(g, &fs, *q, &ts, *bound, &KOptions::default())
        }
        Check::Rh { center, radius, p, samples } => {
            let ball = Ball::new(g, center.unwrap_or_else(|| ctx.central()), *radius)?;
            rh_ratio(g, &ball, *p, *samples, seed)
        }
        Check::Pi { p, samples } => pi_p_check(g, ctx.spec()?, *p, *samples, seed),
        Check::Gaffney { balls, i_max, l_grid, samples, c_grid } => {
            let pairs = balls.clone().unwrap_or_else(|| vec![(ctx.central(), 2)]);
            let balls = pairs.iter().map(|&(c, r)| Ball::new(g, c, r)).collect::<Result<Vec<_>>>()?;
            gaffney_report(g, ctx.spec()?, &balls, *i_max, l_grid, *samples, seed, c_grid)
        }
        Check::CoeffEstim { n, k, len } => verify_estim_bounds(*n, *k, *len),
        Check::CoeffAlpha { n, k, c, j_max } => verify_alpha_bound(*n, *k, *c, *j_max),
        Check::Wallis { l_max, quad_points } => wallis_report(*l_max, *quad_points),
        Check::Spectrum {} => Ok(spectrum_report(ctx.spec()?)),
    }
}
