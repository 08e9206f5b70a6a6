use super::{d_values, delta_values, EdgeFunction, SpectralDecomposition};
use crate::error::Result;
use crate::graph::WeightedGraph;

/// Q F = d (I − P)^+ δ F, with (I − P)^+ the pseudo-inverse off the constants.
///
/// −Q is the orthogonal projection of L²(E) onto the exact fields {df}.
pub fn edge_projection(g: &WeightedGraph, spec: &SpectralDecomposition, f: &EdgeFunction) -> Result<EdgeFunction> {
    f.check(g)?;
    spec.check(g)?;
    let div = delta_values(g, f.values());
    let u = spec.apply_mean_zero(|l| 1.0 / (1.0 - l), &div);
    Ok(EdgeFunction { values: d_values(g, &u), graph: g.fingerprint() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::gen_cycle;
    use crate::operators::{differential, spectral_decompose, VertexFunction};

    #[test]
    fn fixes_exact_fields_up_to_sign() {
        let g = gen_cycle(5, 1.0).unwrap();
        let s = spectral_decompose(&g).unwrap();
        let f = VertexFunction::new(&g, vec![0.3, -1.0, 2.0, 0.5, 0.0]).unwrap();
        let df = differential(&g, &f).unwrap();
        let q = edge_projection(&g, &s, &df).unwrap();
        for (a, b) in q.values().iter().zip(df.values()) {
            assert!((a + b).abs() < 1e-12);
        }
        let zero = edge_projection(&g, &s, &EdgeFunction::zeros(&g)).unwrap();
        assert!(zero.values().iter().all(|&v| v == 0.0));
    }
}
