use super::{check_mean_zero, grad_values, p_values, SpectralDecomposition, VertexFunction};
use crate::coefficients::a_values;
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

/// ∇(I − P)^{−1/2} f for mean-zero f.
pub fn riesz_apply(g: &WeightedGraph, spec: &SpectralDecomposition, f: &VertexFunction) -> Result<VertexFunction> {
    f.check(g)?;
    spec.check(g)?;
    check_mean_zero(g, f.values())?;
    let u = spec.apply_mean_zero(|l| (1.0 - l).max(f64::MIN_POSITIVE).powf(-0.5), f.values());
    VertexFunction::new(g, grad_values(g, &u))
}

/// Σ_{l ≤ L} a_l P^l f by sparse iteration.
pub(crate) fn series_sum(g: &WeightedGraph, f: &[f64], terms: usize) -> Vec<f64> {
    let a = a_values(terms);
    let mut power = f.to_vec();
    let mut acc: Vec<f64> = f.to_vec();
    for &al in &a[1..] {
        power = p_values(g, &power);
        for (s, v) in acc.iter_mut().zip(&power) {
            *s += al * v;
        }
    }
    acc
}

/// ∇(Σ_{l ≤ L} a_l P^l f) for mean-zero f.
pub fn riesz_series(g: &WeightedGraph, f: &VertexFunction, terms: usize) -> Result<VertexFunction> {
    f.check(g)?;
    check_mean_zero(g, f.values())?;
    VertexFunction::new(g, grad_values(g, &series_sum(g, f.values(), terms)))
}

/// Σ_{l > L} a_l λ*^l with λ* the second modulus of the spectrum.
pub fn riesz_series_tail(spec: &SpectralDecomposition, terms: usize) -> Result<f64> {
    let lam = spec.second_modulus();
    if lam >= 1.0 {
        return Err(Error::TailNotCertified(f64::INFINITY));
    }
    Ok(a_tail(lam, terms))
}

/// Σ_{l > L} a_l x^l for 0 ≤ x < 1, with the geometric remainder bound added.
fn a_tail(x: f64, terms: usize) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let mut a = 1.0f64;
    let mut xp = 1.0f64;
    for l in 0..=terms {
        if l > 0 {
            a *= (2 * l - 1) as f64 / (2 * l) as f64;
            xp *= x;
        }
    }
    let mut sum = 0.0;
    let mut l = terms;
    loop {
        l += 1;
        a *= (2 * l - 1) as f64 / (2 * l) as f64;
        xp *= x;
        let term = a * xp;
        sum += term;
        // Remaining terms are bounded by a geometric series of ratio x.
        let rest = term * x / (1.0 - x);
        if rest <= 1e-17 * sum || term == 0.0 {
            return sum + rest;
        }
    }
}

/// Series Riesz transform with a truncation chosen from a certified error bound.
#[derive(Debug, Clone)]
pub struct CertifiedSeries {
    pub value: VertexFunction,
    pub terms: usize,
    /// Certified bound on sup_x |∇u_L(x) − ∇u(x)|.
    pub bound: f64,
}

/// Chooses L so that the pointwise error of [`riesz_series`] is at most `tol`.
///
/// The truncation error e satisfies ‖e‖₂ ≤ tail(L)‖f‖₂, |e(x)| ≤ ‖e‖₂/√m(x), and
/// ∇e(x) ≤ √2 sup|e|.
pub fn riesz_series_certified(
    g: &WeightedGraph,
    spec: &SpectralDecomposition,
    f: &VertexFunction,
    tol: f64,
) -> Result<CertifiedSeries> {
    spec.check(g)?;
    check_mean_zero(g, f.values())?;
    let m_min = g.masses().iter().copied().fold(f64::INFINITY, f64::min);
    let factor = std::f64::consts::SQRT_2 * f.norm(g, 2.0) / m_min.sqrt();
    let bound_at = |l: usize| -> Result<f64> { Ok(factor * riesz_series_tail(spec, l)?) };
    let mut terms = 0usize;
    let mut bound = bound_at(0)?;
    while bound > tol {
        terms = if terms == 0 { 1 } else { terms * 2 };
        if terms > 1 << 22 {
            return Err(Error::TailNotCertified(bound));
        }
        bound = bound_at(terms)?;
    }
    // Bisect down to the smallest admissible length.
    let (mut lo, mut hi) = (terms / 2, terms);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if bound_at(mid)? <= tol {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if bound_at(lo)? <= tol {
        hi = lo;
    }
    let value = riesz_series(g, f, hi)?;
    Ok(CertifiedSeries { value, terms: hi, bound: bound_at(hi)? })
}

/// Splits (I − P)^{1/2} b = T b + U b with T = Σ_{k ≤ r²} a_k (I − P) P^k.
pub fn sqrt_split(
    g: &WeightedGraph,
    spec: &SpectralDecomposition,
    b: &VertexFunction,
    r: usize,
) -> Result<(VertexFunction, VertexFunction)> {
    b.check(g)?;
    spec.check(g)?;
    if r == 0 {
        return Err(Error::InvalidParameter("split radius must be at least 1".into()));
    }
    let s = series_sum(g, b.values(), r * r);
    let ps = p_values(g, &s);
    let t: Vec<f64> = s.iter().zip(&ps).map(|(a, p)| a - p).collect();
    let full = spec.apply_mean_zero(|l| (1.0 - l).max(0.0).sqrt(), b.values());
    let u: Vec<f64> = full.iter().zip(&t).map(|(a, b)| a - b).collect();
    Ok((VertexFunction::new(g, t)?, VertexFunction::new(g, u)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gen_cycle, gen_grid};
    use crate::operators::{center, gradient, spectral_decompose};
    use crate::rng::{normal_vec, seeded};

    fn centred_random(g: &WeightedGraph, seed: u64) -> VertexFunction {
        VertexFunction::new(g, center(g, &normal_vec(&mut seeded(seed), g.vertex_count()))).unwrap()
    }

    #[test]
    fn two_vertex_riesz() {
        let g = gen_grid(1, 2, 1.0).unwrap();
        let s = spectral_decompose(&g).unwrap();
        let f = VertexFunction::new(&g, vec![1.0, -1.0]).unwrap();
        let r = riesz_apply(&g, &s, &f).unwrap();
        assert!((r.get(0) - 1.0).abs() < 1e-14 && (r.get(1) - 1.0).abs() < 1e-14);
        assert!((r.norm(&g, 2.0) - 2.0).abs() < 1e-14);
        assert_eq!(riesz_series(&g, &f, 1).unwrap().values(), &[1.0, 1.0]);
        assert_eq!(riesz_series_tail(&s, 1).unwrap(), 0.0);
    }

    #[test]
    fn l2_isometry_on_cycle() {
        let g = gen_cycle(4, 2.0).unwrap();
        let s = spectral_decompose(&g).unwrap();
        for seed in 0..10 {
            let f = centred_random(&g, seed);
            let r = riesz_apply(&g, &s, &f).unwrap();
            assert!((r.norm(&g, 2.0) / f.norm(&g, 2.0) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_and_mean_checks() {
        let g = gen_cycle(4, 2.0).unwrap();
        let s = spectral_decompose(&g).unwrap();
        let z = VertexFunction::zeros(&g);
        assert!(riesz_apply(&g, &s, &z).unwrap().values().iter().all(|&v| v == 0.0));
        let c = VertexFunction::constant(&g, 1.0);
        assert!(matches!(riesz_apply(&g, &s, &c), Err(Error::NotMeanZero(_))));
        assert!(matches!(riesz_series(&g, &c, 3), Err(Error::NotMeanZero(_))));
    }

    #[test]
    fn series_length_zero_is_the_gradient() {
        let g = gen_cycle(5, 1.0).unwrap();
        let f = centred_random(&g, 4);
        assert_eq!(riesz_series(&g, &f, 0).unwrap(), gradient(&g, &f).unwrap());
    }

    #[test]
    fn series_converges_on_cycle() {
        let g = gen_cycle(4, 2.0).unwrap();
        let s = spectral_decompose(&g).unwrap();
        let f = centred_random(&g, 9);
        let exact = riesz_apply(&g, &s, &f).unwrap();
        let approx = riesz_series(&g, &f, 60).unwrap();
        let err = exact.values().iter().zip(approx.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn certified_series_meets_its_bound() {
        let g = gen_grid(2, 5, 1.0).unwrap();
        let s = spectral_decompose(&g).unwrap();
        let f = centred_random(&g, 5);
        let cert = riesz_series_certified(&g, &s, &f, 1e-7).unwrap();
        let exact = riesz_apply(&g, &s, &f).unwrap();
        let err = exact.values().iter().zip(cert.value.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(cert.bound <= 1e-7 && err <= cert.bound + 1e-12);
        let f_scale = std::f64::consts::SQRT_2 * f.norm(&g, 2.0) / 2.0;
        assert!(f_scale * riesz_series_tail(&s, cert.terms - 1).unwrap() > 1e-7);
    }

    #[test]
    fn tail_matches_closed_form() {
        let x: f64 = 0.5;
        let head: f64 = a_values(10).iter().enumerate().map(|(l, a)| a * x.powi(l as i32)).sum();
        let want = (1.0 - x).powf(-0.5) - head;
        assert!((a_tail(x, 10) - want).abs() < 1e-15);
    }

    #[test]
    fn split_on_the_lazy_pair() {
        let g = gen_grid(1, 2, 1.0).unwrap();
        let s = spectral_decompose(&g).unwrap();
        let b = VertexFunction::new(&g, vec![1.0, -1.0]).unwrap();
        let (t, u) = sqrt_split(&g, &s, &b, 1).unwrap();
        assert!((t.get(0) - 1.0).abs() < 1e-14 && (t.get(1) + 1.0).abs() < 1e-14);
        assert!(u.values().iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn split_reconstructs_and_kills_constants() {
        let g = gen_grid(2, 4, 1.0).unwrap();
        let s = spectral_decompose(&g).unwrap();
        let b = VertexFunction::new(&g, normal_vec(&mut seeded(2), 16)).unwrap();
        let (t, u) = sqrt_split(&g, &s, &b, 2).unwrap();
        let full = s.apply_mean_zero(|l| (1.0 - l).max(0.0).sqrt(), b.values());
        for x in 0..16 {
            assert!((t.get(x) + u.get(x) - full[x]).abs() < 1e-10);
        }
        let (t, u) = sqrt_split(&g, &s, &VertexFunction::constant(&g, 3.0), 2).unwrap();
        assert!(t.values().iter().chain(u.values()).all(|v| v.abs() < 1e-12));
        let (_, u) = sqrt_split(&g, &s, &b, 20).unwrap();
        assert!(u.norm(&g, 2.0) < 1e-3 * b.norm(&g, 2.0));
    }
}
