//! L^p boundedness of the edge projection Q = d(I − P)^+δ.

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::operators::{d_values, edge_inner, edge_norm, edge_projection, EdgeFunction, SpectralDecomposition};
use crate::report::{InequalityReport, Method, Verdict};
use crate::rng::{normal_vec, seeded};

const EXACT_TOL: f64 = 1e-10;

fn random_field(g: &WeightedGraph, z: &[f64]) -> EdgeFunction {
    let idx = upper_index(g);
    EdgeFunction::from_upper(g, |x, y| idx.get(&(x, y)).map_or(0.0, |&i| z[i]))
}

fn upper_index(g: &WeightedGraph) -> std::collections::HashMap<(usize, usize), usize> {
    let mut idx = std::collections::HashMap::new();
    for (x, y, _) in g.edges() {
        if x < y {
            let k = idx.len();
            idx.entry((x, y)).or_insert(k);
        }
    }
    idx
}

/// Sampled sup of ‖QF‖_{L^p(E)}/‖F‖_{L^p(E)}.
///
/// Candidates are Gaussian antisymmetric fields, single-edge fields and exact fields df with f
/// Gaussian; the last give ratio 1 exactly. At p = 2 the report also checks the projection
/// identities Q² = −Q, Q(df) = −df and ‖QF‖₂ ≤ ‖F‖₂ and returns PASS/FAIL with constant 1.
pub fn pi_p_check(
    g: &WeightedGraph,
    spec: &SpectralDecomposition,
    p: f64,
    samples: usize,
    seed: u64,
) -> Result<InequalityReport> {
    spec.check(g)?;
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("need p in (1, inf), got {p}")));
    }
    let exact = p == 2.0;
    let method = if exact { Method::ExactSpectral } else { Method::RandomSample };
    let mut report = InequalityReport::new("PI", method).param("p", p).param("samples", samples);
    let mut rng = seeded(seed);
    let pairs = upper_index(g).len();
    let mut sup = 0.0f64;
    let (mut idem, mut fix, mut orth) = (0.0f64, 0.0f64, 0.0f64);
    let mut exact_ratio_err = 0.0f64;
    let ratio = |f: &EdgeFunction| -> Result<(f64, EdgeFunction)> {
        let q = edge_projection(g, spec, f)?;
        Ok((edge_norm(g, q.values(), p) / edge_norm(g, f.values(), p), q))
    };
    for i in 0..samples {
        let f = random_field(g, &normal_vec(&mut rng, pairs));
        let (r, q) = ratio(&f)?;
        sup = sup.max(r);
        report.push_row("ratio", i as f64, r);
        let qq = edge_projection(g, spec, &q)?;
        let sum: Vec<f64> = qq.values().iter().zip(q.values()).map(|(a, b)| a + b).collect();
        idem = idem.max(edge_norm(g, &sum, 2.0) / edge_norm(g, f.values(), 2.0));
        // F + QF is orthogonal to the exact fields, so ⟨QF, F + QF⟩ vanishes.
        let rest: Vec<f64> = f.values().iter().zip(q.values()).map(|(a, b)| a + b).collect();
        orth = orth.max(edge_inner(g, q.values(), &rest).abs() / edge_norm(g, f.values(), 2.0).powi(2));

        let u = normal_vec(&mut rng, g.vertex_count());
        let df = EdgeFunction::new(g, d_values(g, &u))?;
        let (r, q) = ratio(&df)?;
        exact_ratio_err = exact_ratio_err.max((r - 1.0).abs());
        let sum: Vec<f64> = q.values().iter().zip(df.values()).map(|(a, b)| a + b).collect();
        fix = fix.max(edge_norm(g, &sum, 2.0) / edge_norm(g, df.values(), 2.0));
    }
    for (x, y, _) in g.edges().into_iter().filter(|(x, y, _)| x < y) {
        let f = EdgeFunction::from_upper(g, |a, b| if (a, b) == (x, y) { 1.0 } else { 0.0 });
        sup = sup.max(ratio(&f)?.0);
    }
    report.push_constant("C_p", sup, method, "sup of ||QF|| / ||F|| over tested fields");
    report.push_constant("exact_field_error", exact_ratio_err, Method::RandomSample, "max |ratio - 1| on F = df");
    if exact {
        report.push_constant("idempotence", idem, Method::RandomSample, "max ||Q^2 F + QF|| / ||F||");
        report.push_constant("fixes_df", fix, Method::RandomSample, "max ||Q df + df|| / ||df||");
        report.push_constant("orthogonality", orth, Method::RandomSample, "max |<QF, F + QF>| / ||F||^2");
        let ok = sup <= 1.0 + EXACT_TOL
            && idem <= EXACT_TOL
            && fix <= EXACT_TOL
            && orth <= EXACT_TOL
            && exact_ratio_err <= EXACT_TOL;
        report.verdict = if ok { Verdict::Pass } else { Verdict::Fail };
    } else {
        report.verdict = Verdict::Estimate;
    }
    Ok(report)
}
