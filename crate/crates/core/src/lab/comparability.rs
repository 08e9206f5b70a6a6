//! The Δ(α) condition and the vertex/edge gradient comparison it controls.

use crate::error::{Error, Result};
use crate::graph::{delta_alpha, WeightedGraph};
use crate::operators::{d_values, edge_norm, grad_values, lp_norm};
use crate::report::{InequalityReport, Method, Verdict};
use crate::rng::{normal_vec, seeded};

/// Two-sided bounds on ‖df‖_{L^p(E)}/‖∇f‖_p valid under Δ(α).
///
/// Jensen on the probability p(x, ·) gives one side with constant 2^{1/2−1/p}; the other side
/// uses p(x, y) ≥ α to compare the largest difference at x with the mean square.
pub fn comparability_bounds(alpha: f64, p: f64) -> (f64, f64) {
    if p.is_infinite() {
        return (0.5f64.sqrt(), (0.5 / alpha).sqrt());
    }
    let base = 2f64.powf(0.5 - 1.0 / p);
    let tilt = alpha.powf(1.0 / p - 0.5);
    if p >= 2.0 {
        (base, base * tilt)
    } else {
        (base * tilt, base)
    }
}

/// Largest α in Δ(α), then the sampled range of ‖df‖_p/‖∇f‖_p for each p against
/// [`comparability_bounds`]. PASS when α > 0 and every sample lies inside its bounds.
pub fn delta_alpha_report(g: &WeightedGraph, p_grid: &[f64], samples: usize, seed: u64) -> Result<InequalityReport> {
    if p_grid.iter().any(|&p| !(p >= 1.0)) {
        return Err(Error::InvalidParameter("exponents must be at least 1".into()));
    }
    let da = delta_alpha(g);
    let mut report = InequalityReport::new("DELTA_ALPHA", Method::Enumeration)
        .param("p_grid", p_grid.to_vec())
        .param("samples", samples);
    report.push_constant("alpha", da.alpha, Method::Enumeration, "min over edges of mu_xy / m(x)");
    if !da.missing_self_loops.is_empty() {
        report.flag(format!("MissingSelfLoop at {} vertices", da.missing_self_loops.len()));
        report.verdict = Verdict::Fail;
        return Ok(report);
    }
    let mut rng = seeded(seed);
    let fs: Vec<Vec<f64>> = (0..samples).map(|_| normal_vec(&mut rng, g.vertex_count())).collect();
    let mut ok = true;
    for &p in p_grid {
        let (lo, hi) = comparability_bounds(da.alpha, p);
        let (mut rmin, mut rmax) = (f64::INFINITY, 0.0f64);
        for f in &fs {
            let r = edge_norm(g, &d_values(g, f), p) / lp_norm(g, &grad_values(g, f), p);
            rmin = rmin.min(r);
            rmax = rmax.max(r);
        }
        report.push_row("ratio_min", p, rmin);
        report.push_row("ratio_max", p, rmax);
        report.push_row("bound_lower", p, lo);
        report.push_row("bound_upper", p, hi);
        ok &= rmin >= lo * (1.0 - 1e-12) && rmax <= hi * (1.0 + 1e-12);
    }
    report.verdict = if ok { Verdict::Pass } else { Verdict::Fail };
    Ok(report)
}
