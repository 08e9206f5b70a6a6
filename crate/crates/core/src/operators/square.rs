use super::{p_values, SpectralDecomposition, VertexFunction};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

/// Pointwise tolerance of the truncated square function, relative to ‖f‖₂/√m_min.
const G_TAIL_TOL: f64 = 1e-10;

/// g(f)(x) = (Σ_{l ≥ 1} l |(I − P)P^l f(x)|²)^{1/2}.
///
/// The series is summed by sparse iteration. With s_l = sup_{λ ≠ 1} (1 − λ)|λ|^l, the
/// discarded part at x is at most Σ_{l > L} l s_l² ‖f‖₂²/m(x), and s_l ≤ 2λ*^l.
pub fn g_function(g: &WeightedGraph, spec: &SpectralDecomposition, f: &VertexFunction) -> Result<VertexFunction> {
    f.check(g)?;
    spec.check(g)?;
    let lam = spec.second_modulus();
    if lam >= 1.0 {
        return Err(Error::TailNotCertified(f64::INFINITY));
    }
    let q = lam * lam;
    // Σ_{l > L} l q^l = q^{L+1}((L + 1) − L q)/(1 − q)².
    let tail = |l: usize| -> f64 {
        let lf = l as f64;
        4.0 * q.powf(lf + 1.0) * ((lf + 1.0) - lf * q) / ((1.0 - q) * (1.0 - q))
    };
    let mut terms = 1usize;
    while tail(terms).sqrt() > G_TAIL_TOL {
        terms += 1;
        if terms > 1 << 24 {
            return Err(Error::TailNotCertified(tail(terms).sqrt()));
        }
    }

    let n = g.vertex_count();
    let mut acc = vec![0.0; n];
    let mut power = p_values(g, f.values());
    for l in 1..=terms {
        let next = p_values(g, &power);
        for x in 0..n {
            let d = power[x] - next[x];
            acc[x] += l as f64 * d * d;
        }
        power = next;
    }
    VertexFunction::new(g, acc.into_iter().map(f64::sqrt).collect())
}

/// Σ_{λ_i ≠ 1} (λ_i/(1 + λ_i))² ⟨f, v_i⟩², the exact value of ‖g(f)‖₂².
pub fn g_function_spectral_norm_sq(spec: &SpectralDecomposition, f: &[f64]) -> f64 {
    let c = spec.coefficients(f);
    c.iter().zip(spec.eigenvalues()).skip(1).map(|(ci, l)| (l / (1.0 + l)).powi(2) * ci * ci).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gen_cycle, gen_grid};
    use crate::operators::spectral_decompose;
    use crate::rng::{normal_vec, seeded};

    #[test]
    fn zero_eigenfunction_has_no_square_function() {
        let g = gen_grid(1, 2, 1.0).unwrap();
        let s = spectral_decompose(&g).unwrap();
        let f = VertexFunction::new(&g, vec![1.0, -1.0]).unwrap();
        assert!(g_function(&g, &s, &f).unwrap().values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn half_eigenfunction_on_the_cycle() {
        let g = gen_cycle(4, 2.0).unwrap();
        let s = spectral_decompose(&g).unwrap();
        let f = VertexFunction::new(&g, vec![1.0, 0.0, -1.0, 0.0]).unwrap();
        let gf = g_function(&g, &s, &f).unwrap();
        for x in 0..4 {
            assert!((gf.get(x) - f.get(x).abs() / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn constants_vanish() {
        let g = gen_grid(2, 3, 1.0).unwrap();
        let s = spectral_decompose(&g).unwrap();
        let gf = g_function(&g, &s, &VertexFunction::constant(&g, 4.0)).unwrap();
        assert!(gf.values().iter().all(|&v| v < 1e-12));
    }

    #[test]
    fn matches_the_spectral_norm() {
        let g = gen_grid(2, 5, 1.0).unwrap();
        let s = spectral_decompose(&g).unwrap();
        let f = VertexFunction::new(&g, normal_vec(&mut seeded(11), 25)).unwrap();
        let lhs = g_function(&g, &s, &f).unwrap().norm(&g, 2.0).powi(2);
        let rhs = g_function_spectral_norm_sq(&s, f.values());
        assert!((lhs - rhs).abs() <= 1e-8 * rhs);
        assert!(lhs <= f.norm(&g, 2.0).powi(2));
    }
}
