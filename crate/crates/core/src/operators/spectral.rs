use super::VertexFunction;
use crate::error::{Error, Result};
use crate::graph::{WeightedGraph, DEFAULT_DENSE_CAP};
use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Eigenpairs of P, orthonormal in L²(Γ, m), eigenvalues in descending order.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    /// Column i holds v_i.
    vectors: DMatrix<f64>,
    masses: Vec<f64>,
    graph: u64,
}

/// Dense eigendecomposition of P through S = M^{1/2} P M^{−1/2}.
pub fn spectral_decompose(g: &WeightedGraph) -> Result<SpectralDecomposition> {
    let n = g.vertex_count();
    if n > DEFAULT_DENSE_CAP {
        return Err(Error::SizeOverflow { requested: n, cap: DEFAULT_DENSE_CAP });
    }
    let sqrt_m: Vec<f64> = g.masses().iter().map(|m| m.sqrt()).collect();
    let mut s = DMatrix::zeros(n, n);
    for x in 0..n {
        for (y, w) in g.neighbors(x) {
            s[(x, y)] = w / (sqrt_m[x] * sqrt_m[y]);
        }
    }
    let eig = SymmetricEigen::try_new(s, 1e-15, 0).ok_or(Error::EigensolverFailure)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));

    let mut eigenvalues = Vec::with_capacity(n);
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        eigenvalues.push(eig.eigenvalues[i].clamp(-1.0, 1.0));
        let u = eig.eigenvectors.column(i);
        let lead = u.iter().copied().find(|v| v.abs() > 1e-12).unwrap_or(1.0);
        let sign = if lead < 0.0 { -1.0 } else { 1.0 };
        for x in 0..n {
            vectors[(x, col)] = sign * u[x] / sqrt_m[x];
        }
    }
    // Connected graph: the top mode is exactly the normalised constant with λ = 1.
    eigenvalues[0] = 1.0;
    let c = 1.0 / g.total_mass().sqrt();
    vectors.column_mut(0).fill(c);
    Ok(SpectralDecomposition { eigenvalues, vectors, masses: g.masses().to_vec(), graph: g.fingerprint() })
}

impl SpectralDecomposition {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// v_i as raw values.
    pub fn vector(&self, i: usize) -> Vec<f64> {
        self.vectors.column(i).iter().copied().collect()
    }

    /// Index of the constant eigenvector (λ = 1).
    pub fn constant_index(&self) -> usize {
        0
    }

    /// λ* = max(|λ₂|, |λ_min|), the contraction rate on mean-zero functions.
    pub fn second_modulus(&self) -> f64 {
        self.eigenvalues[1..].iter().fold(0.0, |a, l| a.max(l.abs()))
    }

    pub fn lambda_min(&self) -> f64 {
        *self.eigenvalues.last().expect("nonempty spectrum")
    }

    pub fn belongs_to(&self, g: &WeightedGraph) -> bool {
        self.graph == g.fingerprint()
    }

    pub(crate) fn check(&self, g: &WeightedGraph) -> Result<()> {
        if self.belongs_to(g) {
            Ok(())
        } else {
            Err(Error::GraphMismatch)
        }
    }

    /// c_i = ⟨f, v_i⟩_m.
    pub fn coefficients(&self, f: &[f64]) -> Vec<f64> {
        let weighted = DVector::from_iterator(f.len(), f.iter().zip(&self.masses).map(|(v, m)| v * m));
        (self.vectors.transpose() * weighted).iter().copied().collect()
    }

    /// Σ c_i v_i.
    pub fn synthesize(&self, c: &[f64]) -> Vec<f64> {
        (&self.vectors * DVector::from_column_slice(c)).iter().copied().collect()
    }

    /// Σ φ(λ_i) c_i v_i on raw values. Terms with negligible c_i are skipped, so φ may be
    /// infinite on eigenvalues that `f` does not charge.
    pub fn apply_values(&self, phi: impl Fn(f64) -> f64, f: &[f64]) -> Result<Vec<f64>> {
        let mut c = self.coefficients(f);
        let scale = c.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for (ci, &l) in c.iter_mut().zip(&self.eigenvalues) {
            if ci.abs() <= 1e-10 * scale {
                *ci = 0.0;
                continue;
            }
            let w = phi(l);
            if !w.is_finite() {
                return Err(Error::SingularFunction(l));
            }
            *ci *= w;
        }
        Ok(self.synthesize(&c))
    }

    /// Σ φ(λ_i) c_i v_i over the non-constant modes only.
    pub fn apply_mean_zero(&self, phi: impl Fn(f64) -> f64, f: &[f64]) -> Vec<f64> {
        let mut c = self.coefficients(f);
        c[self.constant_index()] = 0.0;
        for (ci, &l) in c.iter_mut().zip(&self.eigenvalues).skip(1) {
            *ci *= phi(l);
        }
        self.synthesize(&c)
    }

    /// Dense matrix of φ(P) in the standard basis: Σ φ(λ_i) v_i v_iᵀ M.
    pub fn matrix_of(&self, phi: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let n = self.len();
        let mut scaled = self.vectors.clone();
        for i in 0..n {
            let w = phi(self.eigenvalues[i]);
            scaled.column_mut(i).scale_mut(w);
        }
        let mut vt_m = self.vectors.transpose();
        for x in 0..n {
            vt_m.column_mut(x).scale_mut(self.masses[x]);
        }
        scaled * vt_m
    }
}

/// φ(P) f by spectral calculus.
pub fn apply_function_of_p(
    spec: &SpectralDecomposition,
    phi: impl Fn(f64) -> f64,
    f: &VertexFunction,
) -> Result<VertexFunction> {
    if f.values().len() != spec.len() || f.graph != spec.graph {
        return Err(Error::GraphMismatch);
    }
    let values = spec.apply_values(phi, f.values())?;
    Ok(VertexFunction { values, graph: spec.graph })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gen_cycle, gen_grid};
    use crate::operators::{apply_p, gradient, p_values};
    use crate::rng::{normal_vec, seeded};

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn two_vertex_spectrum() {
        let g = gen_grid(1, 2, 1.0).unwrap();
        let s = spectral_decompose(&g).unwrap();
        assert!(close(s.eigenvalues(), &[1.0, 0.0], 1e-14));
    }

    #[test]
    fn cycle_spectrum() {
        let g = gen_cycle(4, 2.0).unwrap();
        let s = spectral_decompose(&g).unwrap();
        assert!(close(s.eigenvalues(), &[1.0, 0.5, 0.5, 0.0], 1e-14));
        let v0 = s.vector(0);
        assert!(v0.iter().all(|&v| (v - v0[0]).abs() < 1e-14 && v > 0.0));
    }

    #[test]
    fn eigenbasis_is_m_orthonormal_and_reconstructs_p() {
        let g = gen_grid(2, 5, 0.5).unwrap();
        let s = spectral_decompose(&g).unwrap();
        for i in 0..s.len() {
            for j in 0..s.len() {
                let ip = crate::operators::inner(&g, &s.vector(i), &s.vector(j));
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((ip - want).abs() < 1e-12);
            }
        }
        let recon = s.matrix_of(|l| l);
        let p = g.transition_matrix();
        assert!((recon - p).abs().max() < 1e-12);
        assert!(s.lambda_min() > -1.0);
    }

    #[test]
    fn sign_convention() {
        let g = gen_grid(2, 4, 1.0).unwrap();
        let s = spectral_decompose(&g).unwrap();
        for i in 0..s.len() {
            let lead = s.vector(i).into_iter().find(|v| v.abs() > 1e-12).unwrap();
            assert!(lead > 0.0);
        }
    }

    #[test]
    fn function_calculus() {
        let g = gen_grid(2, 4, 1.0).unwrap();
        let s = spectral_decompose(&g).unwrap();
        let f = VertexFunction::new(&g, normal_vec(&mut seeded(3), g.vertex_count())).unwrap();
        let id = apply_function_of_p(&s, |l| l, &f).unwrap();
        assert!(close(id.values(), apply_p(&g, &f).unwrap().values(), 1e-12));

        let lap = apply_function_of_p(&s, |l| 1.0 - l, &f).unwrap();
        let direct: Vec<f64> = f.values().iter().zip(p_values(&g, f.values())).map(|(a, b)| a - b).collect();
        assert!(close(lap.values(), &direct, 1e-12));

        let half = apply_function_of_p(&s, |l| (1.0 - l).max(0.0).sqrt(), &f).unwrap();
        let gradf = gradient(&g, &f).unwrap();
        let (a, b) = (half.norm(&g, 2.0), gradf.norm(&g, 2.0));
        assert!((a - b).abs() <= 1e-10 * b);

        let centred = VertexFunction::new(&g, crate::operators::center(&g, f.values())).unwrap();
        let inv = apply_function_of_p(&s, |l| (1.0 - l).powf(-0.5), &centred).unwrap();
        let back = apply_function_of_p(&s, |l| (1.0 - l).max(0.0).sqrt(), &inv).unwrap();
        assert!(close(back.values(), centred.values(), 1e-10));
    }

    #[test]
    fn singular_function_is_reported() {
        let g = gen_cycle(4, 2.0).unwrap();
        let s = spectral_decompose(&g).unwrap();
        let f = VertexFunction::constant(&g, 1.0);
        assert!(matches!(apply_function_of_p(&s, |l| 1.0 / (1.0 - l), &f), Err(Error::SingularFunction(_))));
    }
}
