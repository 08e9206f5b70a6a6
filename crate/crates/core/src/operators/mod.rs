//! The Markov operator, discrete calculus and spectral functional calculus.

mod edge;
mod io;
mod maximal;
mod riesz;
mod spectral;
mod square;

pub use edge::edge_projection;
pub use io::{edge_function_from_csv, edge_function_to_csv, vertex_function_from_csv, vertex_function_to_csv};
pub use maximal::{maximal_function, maximal_values};
pub use riesz::{riesz_apply, riesz_series, riesz_series_certified, riesz_series_tail, sqrt_split, CertifiedSeries};
pub use spectral::{apply_function_of_p, spectral_decompose, SpectralDecomposition};
pub use square::{g_function, g_function_spectral_norm_sq};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

/// A real function on the vertices of a specific graph.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexFunction {
    values: Vec<f64>,
    graph: u64,
}

impl VertexFunction {
    pub fn new(g: &WeightedGraph, values: Vec<f64>) -> Result<Self> {
        if values.len() != g.vertex_count() {
            return Err(Error::GraphMismatch);
        }
        Ok(VertexFunction { values, graph: g.fingerprint() })
    }

    pub fn zeros(g: &WeightedGraph) -> Self {
        Self::constant(g, 0.0)
    }

    pub fn constant(g: &WeightedGraph, c: f64) -> Self {
        VertexFunction { values: vec![c; g.vertex_count()], graph: g.fingerprint() }
    }

    pub fn from_fn(g: &WeightedGraph, f: impl Fn(usize) -> f64) -> Self {
        VertexFunction { values: (0..g.vertex_count()).map(f).collect(), graph: g.fingerprint() }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, x: usize) -> f64 {
        self.values[x]
    }

    pub fn belongs_to(&self, g: &WeightedGraph) -> bool {
        self.graph == g.fingerprint() && self.values.len() == g.vertex_count()
    }

    pub(crate) fn check(&self, g: &WeightedGraph) -> Result<()> {
        if self.belongs_to(g) {
            Ok(())
        } else {
            Err(Error::GraphMismatch)
        }
    }

    /// ‖f‖_p in L²(Γ, m) style: (Σ |f|^p m)^{1/p}, or sup |f| for p = ∞.
    pub fn norm(&self, g: &WeightedGraph, p: f64) -> f64 {
        lp_norm(g, &self.values, p)
    }
}

/// (Σ_x |f(x)|^p m(x))^{1/p}; sup |f| when `p` is infinite.
pub fn lp_norm(g: &WeightedGraph, f: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return f.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    }
    let s: f64 = f.iter().zip(g.masses()).map(|(v, m)| v.abs().powf(p) * m).sum();
    s.powf(1.0 / p)
}

/// ⟨f, h⟩ in L²(Γ, m).
pub fn inner(g: &WeightedGraph, f: &[f64], h: &[f64]) -> f64 {
    f.iter().zip(h).zip(g.masses()).map(|((a, b), m)| a * b * m).sum()
}

/// m-weighted mean of `f` over the whole graph.
pub fn mean(g: &WeightedGraph, f: &[f64]) -> f64 {
    inner(g, f, &vec![1.0; f.len()]) / g.total_mass()
}

/// `f` minus its m-weighted mean.
pub fn center(g: &WeightedGraph, f: &[f64]) -> Vec<f64> {
    let c = mean(g, f);
    f.iter().map(|v| v - c).collect()
}

/// Fails with `NotMeanZero` unless ⟨f, 1⟩_m vanishes relative to ‖f‖₁.
pub fn check_mean_zero(g: &WeightedGraph, f: &[f64]) -> Result<()> {
    let s: f64 = inner(g, f, &vec![1.0; f.len()]);
    let scale = lp_norm(g, f, 1.0);
    if s.abs() <= 1e-10 * scale.max(f64::MIN_POSITIVE) {
        Ok(())
    } else {
        Err(Error::NotMeanZero(s / g.total_mass()))
    }
}

/// A function on the canonical directed edges, antisymmetric by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeFunction {
    values: Vec<f64>,
    graph: u64,
}

impl EdgeFunction {
    /// Wraps per-edge values, rejecting any F(x, y) ≠ −F(y, x).
    pub fn new(g: &WeightedGraph, values: Vec<f64>) -> Result<Self> {
        if values.len() != g.edge_count() {
            return Err(Error::GraphMismatch);
        }
        let rev = g.reverse_edges();
        for x in 0..g.vertex_count() {
            for e in g.edge_range(x) {
                if values[e] != -values[rev[e]] {
                    return Err(Error::NotAntisymmetric(x, g.edge_target(e)));
                }
            }
        }
        Ok(EdgeFunction { values, graph: g.fingerprint() })
    }

    /// Builds F from its values on pairs x < y; the rest follows by antisymmetry.
    pub fn from_upper(g: &WeightedGraph, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut values = vec![0.0; g.edge_count()];
        for x in 0..g.vertex_count() {
            for e in g.edge_range(x) {
                let y = g.edge_target(e);
                values[e] = match x.cmp(&y) {
                    std::cmp::Ordering::Less => f(x, y),
                    std::cmp::Ordering::Greater => -f(y, x),
                    std::cmp::Ordering::Equal => 0.0,
                };
            }
        }
        EdgeFunction { values, graph: g.fingerprint() }
    }

    pub fn zeros(g: &WeightedGraph) -> Self {
        EdgeFunction { values: vec![0.0; g.edge_count()], graph: g.fingerprint() }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn belongs_to(&self, g: &WeightedGraph) -> bool {
        self.graph == g.fingerprint() && self.values.len() == g.edge_count()
    }

    pub(crate) fn check(&self, g: &WeightedGraph) -> Result<()> {
        if self.belongs_to(g) {
            Ok(())
        } else {
            Err(Error::GraphMismatch)
        }
    }

    /// ‖F‖_{L^p(E)} = (½ Σ |F|^p μ)^{1/p}; ½ sup |F| for p = ∞.
    pub fn norm(&self, g: &WeightedGraph, p: f64) -> f64 {
        edge_norm(g, &self.values, p)
    }
}

pub fn edge_norm(g: &WeightedGraph, f: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return 0.5 * f.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    }
    let s: f64 = (0..f.len()).map(|e| f[e].abs().powf(p) * g.edge_weight(e)).sum();
    (0.5 * s).powf(1.0 / p)
}

/// ⟨F, G⟩_{L²(E)} = ½ Σ F G μ.
pub fn edge_inner(g: &WeightedGraph, f: &[f64], h: &[f64]) -> f64 {
    0.5 * (0..f.len()).map(|e| f[e] * h[e] * g.edge_weight(e)).sum::<f64>()
}

/// Pf(x) = Σ_y p(x, y) f(y) on raw values.
pub fn p_values(g: &WeightedGraph, f: &[f64]) -> Vec<f64> {
    (0..g.vertex_count())
        .map(|x| {
            let s: f64 = g.neighbors(x).map(|(y, w)| w * f[y]).sum();
            s / g.mass(x)
        })
        .collect()
}

/// ∇f(x) = (½ Σ_y p(x, y)|f(y) − f(x)|²)^{1/2} on raw values.
pub fn grad_values(g: &WeightedGraph, f: &[f64]) -> Vec<f64> {
    (0..g.vertex_count())
        .map(|x| {
            let fx = f[x];
            let s: f64 = g.neighbors(x).map(|(y, w)| w * (f[y] - fx) * (f[y] - fx)).sum();
            (0.5 * s / g.mass(x)).sqrt()
        })
        .collect()
}

/// Σ_x |∇f(x)|^p m(x), adding its gradient with respect to f into `grad` when given.
/// Vertices with ∇f(x) = 0 contribute the zero subgradient.
pub fn grad_power_sum(g: &WeightedGraph, f: &[f64], p: f64, grad: Option<&mut [f64]>) -> f64 {
    grad_power_sum_on(g, f, p, |_| true, grad)
}

/// [`grad_power_sum`] with the outer sum restricted to vertices where `keep` holds.
pub fn grad_power_sum_on(
    g: &WeightedGraph,
    f: &[f64],
    p: f64,
    keep: impl Fn(usize) -> bool,
    mut grad: Option<&mut [f64]>,
) -> f64 {
    let mut total = 0.0;
    for x in (0..g.vertex_count()).filter(|&x| keep(x)) {
        let fx = f[x];
        let q: f64 = 0.5 * g.neighbors(x).map(|(y, w)| w * (f[y] - fx) * (f[y] - fx)).sum::<f64>() / g.mass(x);
        if q <= 0.0 {
            continue;
        }
        total += g.mass(x) * q.powf(0.5 * p);
        if let Some(out) = grad.as_deref_mut() {
            let c = 0.5 * p * q.powf(0.5 * p - 1.0);
            for (y, w) in g.neighbors(x) {
                let t = c * w * (f[y] - fx);
                out[y] += t;
                out[x] -= t;
            }
        }
    }
    total
}

/// Adds the gradient of f ↦ ∇f(x) at one vertex into `grad`; zero where ∇f(x) = 0.
pub fn grad_point_subgradient(g: &WeightedGraph, f: &[f64], x: usize, scale: f64, grad: &mut [f64]) {
    let fx = f[x];
    let m = g.mass(x);
    let q: f64 = 0.5 * g.neighbors(x).map(|(y, w)| w * (f[y] - fx) * (f[y] - fx)).sum::<f64>() / m;
    if q <= 0.0 {
        return;
    }
    let c = scale * 0.5 / (q.sqrt() * m);
    for (y, w) in g.neighbors(x) {
        let t = c * w * (f[y] - fx);
        grad[y] += t;
        grad[x] -= t;
    }
}

/// df(x, y) = f(y) − f(x) on raw values.
pub fn d_values(g: &WeightedGraph, f: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(g.edge_count());
    for x in 0..g.vertex_count() {
        out.extend(g.neighbors(x).map(|(y, _)| f[y] - f[x]));
    }
    out
}

/// δG(x) = Σ_y p(x, y) G(x, y) on raw values.
pub fn delta_values(g: &WeightedGraph, h: &[f64]) -> Vec<f64> {
    (0..g.vertex_count())
        .map(|x| {
            let s: f64 = g.edge_range(x).map(|e| g.edge_weight(e) * h[e]).sum();
            s / g.mass(x)
        })
        .collect()
}

pub fn apply_p(g: &WeightedGraph, f: &VertexFunction) -> Result<VertexFunction> {
    f.check(g)?;
    VertexFunction::new(g, p_values(g, f.values()))
}

/// y ↦ p_k(x, y), by k sparse products starting from δ_x.
pub fn kernel_row(g: &WeightedGraph, x: usize, k: usize) -> Result<VertexFunction> {
    g.check_vertex(x)?;
    let mut row = vec![0.0; g.vertex_count()];
    row[x] = 1.0;
    for _ in 0..k {
        row = kernel_step(g, &row);
    }
    VertexFunction::new(g, row)
}

/// One step p_{k+1}(x, ·) = Σ_z p_k(x, z) p(z, ·).
pub fn kernel_step(g: &WeightedGraph, row: &[f64]) -> Vec<f64> {
    let mut next = vec![0.0; row.len()];
    for (z, &rz) in row.iter().enumerate() {
        if rz == 0.0 {
            continue;
        }
        let scale = rz / g.mass(z);
        for (y, w) in g.neighbors(z) {
            next[y] += scale * w;
        }
    }
    next
}

pub fn gradient(g: &WeightedGraph, f: &VertexFunction) -> Result<VertexFunction> {
    f.check(g)?;
    VertexFunction::new(g, grad_values(g, f.values()))
}

pub fn differential(g: &WeightedGraph, f: &VertexFunction) -> Result<EdgeFunction> {
    f.check(g)?;
    Ok(EdgeFunction { values: d_values(g, f.values()), graph: g.fingerprint() })
}

pub fn codifferential(g: &WeightedGraph, h: &EdgeFunction) -> Result<VertexFunction> {
    h.check(g)?;
    VertexFunction::new(g, delta_values(g, h.values()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gen_cycle, gen_grid};

    fn two_vertex() -> WeightedGraph {
        gen_grid(1, 2, 1.0).unwrap()
    }

    #[test]
    fn two_vertex_examples() {
        let g = two_vertex();
        let f = VertexFunction::new(&g, vec![1.0, -1.0]).unwrap();
        assert_eq!(apply_p(&g, &f).unwrap().values(), &[0.0, 0.0]);
        assert_eq!(gradient(&g, &f).unwrap().values(), &[1.0, 1.0]);
        let df = differential(&g, &f).unwrap();
        assert_eq!(df.values()[g.edge_index(0, 1).unwrap()], -2.0);
        assert_eq!(df.norm(&g, 2.0).powi(2), 4.0);
        assert_eq!(gradient(&g, &f).unwrap().norm(&g, 2.0).powi(2), 4.0);
    }

    #[test]
    fn kernel_rows() {
        let g = two_vertex();
        assert_eq!(kernel_row(&g, 0, 0).unwrap().values(), &[1.0, 0.0]);
        for k in 1..5 {
            assert_eq!(kernel_row(&g, 1, k).unwrap().values(), &[0.5, 0.5]);
        }
        let grid = gen_grid(2, 5, 0.5).unwrap();
        let row = kernel_row(&grid, 7, 13).unwrap();
        assert!((row.values().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cycle_fourier_mode_is_halved() {
        let g = gen_cycle(4, 2.0).unwrap();
        let f = VertexFunction::new(&g, vec![1.0, 0.0, -1.0, 0.0]).unwrap();
        assert_eq!(apply_p(&g, &f).unwrap().values(), &[0.5, 0.0, -0.5, 0.0]);
    }

    #[test]
    fn constants() {
        let g = gen_grid(2, 3, 1.0).unwrap();
        let c = VertexFunction::constant(&g, 2.5);
        for v in apply_p(&g, &c).unwrap().values() {
            assert!((v - 2.5).abs() < 1e-15);
        }
        assert!(gradient(&g, &c).unwrap().values().iter().all(|&v| v == 0.0));
        assert!(differential(&g, &c).unwrap().values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn path_linear_gradient() {
        // p(x, x±1) = 1/4 in the interior, so ∇f = (½ · 2 · ¼)^{1/2} = ½.
        let g = gen_grid(1, 9, 1.0).unwrap();
        let f = VertexFunction::from_fn(&g, |x| x as f64);
        let grad = gradient(&g, &f).unwrap();
        for x in 1..8 {
            assert!((grad.get(x) - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn antisymmetry_is_enforced() {
        let g = two_vertex();
        assert_eq!(EdgeFunction::new(&g, vec![0.0, 1.0, 1.0, 0.0]), Err(Error::NotAntisymmetric(0, 1)));
        assert_eq!(EdgeFunction::new(&g, vec![1.0, 1.0, -1.0, 0.0]), Err(Error::NotAntisymmetric(0, 0)));
        assert!(EdgeFunction::new(&g, vec![0.0, 1.0, -1.0, 0.0]).is_ok());
    }

    #[test]
    fn foreign_functions_are_rejected() {
        let a = two_vertex();
        let b = WeightedGraph::build(2, &[(0, 1, 2.0), (0, 0, 1.0), (1, 1, 1.0)]).unwrap();
        let f = VertexFunction::zeros(&a);
        assert_eq!(apply_p(&b, &f), Err(Error::GraphMismatch));
    }

    #[test]
    fn edge_sup_norm_carries_the_half() {
        let g = two_vertex();
        let f = EdgeFunction::from_upper(&g, |_, _| 3.0);
        assert_eq!(f.norm(&g, f64::INFINITY), 1.5);
    }

    #[test]
    fn gradient_power_sum_matches_finite_differences() {
        let g = gen_grid(2, 3, 0.5).unwrap();
        let f: Vec<f64> = (0..9).map(|i| ((i * 7) % 5) as f64 * 0.3 - 0.4).collect();
        for p in [1.5, 2.0, 4.0] {
            let mut grad = vec![0.0; 9];
            let s = grad_power_sum(&g, &f, p, Some(&mut grad));
            let direct: f64 = grad_values(&g, &f).iter().zip(g.masses()).map(|(v, m)| v.powf(p) * m).sum();
            assert!((s - direct).abs() < 1e-12);
            for z in 0..9 {
                let h = 1e-6;
                let (mut a, mut b) = (f.clone(), f.clone());
                a[z] += h;
                b[z] -= h;
                let fd = (grad_power_sum(&g, &a, p, None) - grad_power_sum(&g, &b, p, None)) / (2.0 * h);
                assert!((fd - grad[z]).abs() < 1e-6, "p={p} z={z}");
            }
        }
        let mut pg = vec![0.0; 9];
        grad_point_subgradient(&g, &f, 4, 1.0, &mut pg);
        for z in 0..9 {
            let h = 1e-6;
            let (mut a, mut b) = (f.clone(), f.clone());
            a[z] += h;
            b[z] -= h;
            let fd = (grad_values(&g, &a)[4] - grad_values(&g, &b)[4]) / (2.0 * h);
            assert!((fd - pg[z]).abs() < 1e-6);
        }
    }
}
