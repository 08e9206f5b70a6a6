//! The scalar sequences a_l, d_l, α_l and checks of their decay bounds.

use crate::error::{Error, Result};
use crate::report::{InequalityReport, Method, Verdict};
use std::f64::consts::{FRAC_PI_2, PI};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoeffKind {
    /// Taylor coefficients of (1 − x)^{−1/2}.
    A,
    /// Coefficients of (1 − x)^{−1/2}(1 − x^{k²})^n.
    D,
    /// n-th backward differences of √l with step k².
    Alpha,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoeffSequence {
    pub kind: CoeffKind,
    pub n: Option<usize>,
    pub k: Option<usize>,
    /// Entries 0..=L.
    pub values: Vec<f64>,
}

/// a_0..=a_L by a_{l+1} = a_l (2l + 1)/(2l + 2).
pub fn a_values(len: usize) -> Vec<f64> {
    let mut a = Vec::with_capacity(len + 1);
    a.push(1.0);
    for l in 0..len {
        let prev = a[l];
        a.push(prev * (2 * l + 1) as f64 / (2 * l + 2) as f64);
    }
    a
}

pub fn a_coeffs(len: usize) -> CoeffSequence {
    CoeffSequence { kind: CoeffKind::A, n: None, k: None, values: a_values(len) }
}

fn binomial(n: usize, j: usize) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// d_l = Σ_{j ≤ n, jk² ≤ l} (−1)^j C(n, j) a_{l−jk²}.
pub fn d_coeffs(n: usize, k: usize, len: usize) -> Result<CoeffSequence> {
    check_nk(n, k)?;
    let a = a_values(len);
    let step = k * k;
    let values = (0..=len)
        .map(|l| (0..=n).take_while(|&j| j * step <= l).map(|j| sign(j) * binomial(n, j) * a[l - j * step]).sum())
        .collect();
    Ok(CoeffSequence { kind: CoeffKind::D, n: Some(n), k: Some(k), values })
}

/// α_l = Σ_{p ≤ n, pk² ≤ l} (−1)^p C(n, p) √(l − pk²).
pub fn alpha_coeffs(n: usize, k: usize, len: usize) -> Result<CoeffSequence> {
    check_nk(n, k)?;
    let values = (0..=len).map(|l| alpha_at(n, k * k, l)).collect();
    Ok(CoeffSequence { kind: CoeffKind::Alpha, n: Some(n), k: Some(k), values })
}

fn alpha_at(n: usize, step: usize, l: usize) -> f64 {
    if n == 1 && l >= step {
        // √l − √(l − h) without cancellation.
        let (a, b) = ((l as f64).sqrt(), ((l - step) as f64).sqrt());
        return step as f64 / (a + b);
    }
    if n == 2 && l >= 2 * step {
        let h = step as f64;
        let (a, b, c) = ((l as f64).sqrt(), ((l - step) as f64).sqrt(), ((l - 2 * step) as f64).sqrt());
        return -2.0 * h * h / ((a + c) * (a + b) * (b + c));
    }
    (0..=n).take_while(|&p| p * step <= l).map(|p| sign(p) * binomial(n, p) * ((l - p * step) as f64).sqrt()).sum()
}

fn sign(j: usize) -> f64 {
    if j.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

fn check_nk(n: usize, k: usize) -> Result<()> {
    if n == 0 || k == 0 {
        return Err(Error::InvalidParameter(format!("need n ≥ 1 and k ≥ 1, got n={n}, k={k}")));
    }
    Ok(())
}

/// Largest |d_l| · weight over the three index regimes of the decay bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimConstants {
    /// sup |d_l| √(l − mk²) over mk² < l < (m + 1)k², 0 ≤ m ≤ n.
    pub inner: f64,
    /// sup |d_l| over l = (m + 1)k², 0 ≤ m ≤ n.
    pub knots: f64,
    /// sup |d_l| l^{n+1/2} / k^{2n} over (n + 1)k² < l ≤ L.
    pub tail: f64,
    /// Index attaining `tail`.
    pub tail_argmax: usize,
}

pub fn estim_constants(n: usize, k: usize, len: usize) -> Result<EstimConstants> {
    let step = k * k;
    if len <= (n + 1) * step {
        return Err(Error::InvalidParameter(format!("L = {len} must exceed (n+1)k² = {}", (n + 1) * step)));
    }
    let d = d_coeffs(n, k, len)?.values;
    let mut c = EstimConstants { inner: 0.0, knots: 0.0, tail: 0.0, tail_argmax: 0 };
    for m in 0..=n {
        for l in (m * step + 1)..((m + 1) * step) {
            c.inner = c.inner.max(d[l].abs() * ((l - m * step) as f64).sqrt());
        }
        c.knots = c.knots.max(d[(m + 1) * step].abs());
    }
    let norm = (k as f64).powi(2 * n as i32);
    for (l, &dl) in d.iter().enumerate().skip((n + 1) * step + 1) {
        let v = dl.abs() * (l as f64).powf(n as f64 + 0.5) / norm;
        if v > c.tail {
            c.tail = v;
            c.tail_argmax = l;
        }
    }
    Ok(c)
}

/// Empirical constants of the three-regime bound on d_l, with a stability sweep over k ∈ {2, 4, 8}.
pub fn verify_estim_bounds(n: usize, k: usize, len: usize) -> Result<InequalityReport> {
    let base = estim_constants(n, k, len)?;
    let mut report =
        InequalityReport::new("COEFF_ESTIM", Method::Enumeration).param("n", n).param("k", k).param("L", len);
    report.push_constant("inner", base.inner, Method::Enumeration, "sup |d_l| sqrt(l - m k^2), m k^2 < l < (m+1) k^2");
    report.push_constant("knots", base.knots, Method::Enumeration, "sup |d_l| at l = (m+1) k^2");
    report.push_constant("tail", base.tail, Method::Enumeration, "sup |d_l| l^(n+1/2) / k^(2n), l > (n+1) k^2");
    report.push_constant(
        "tail_argmax",
        base.tail_argmax as f64,
        Method::Enumeration,
        "index attaining the tail constant",
    );

    let sweep_len = len.max(2 * (n + 1) * 64 + 1);
    let mut finite = [base.inner, base.knots, base.tail].iter().all(|v| v.is_finite());
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [0.0f64; 3];
    for kk in [2usize, 4, 8] {
        let c = estim_constants(n, kk, sweep_len)?;
        for (i, v) in [c.inner, c.knots, c.tail].into_iter().enumerate() {
            finite &= v.is_finite();
            lo[i] = lo[i].min(v);
            hi[i] = hi[i].max(v);
            report.push_row(["inner", "knots", "tail"][i], kk as f64, v);
        }
    }
    let mut stable = true;
    for (i, name) in ["inner", "knots", "tail"].iter().enumerate() {
        let ratio = hi[i] / lo[i];
        stable &= ratio <= 2.0;
        report.push_constant(&format!("{name}_drift"), ratio, Method::Enumeration, "max/min over k in {2,4,8}");
    }
    report.verdict = if finite && stable { Verdict::Pass } else { Verdict::Fail };
    Ok(report)
}

/// Σ_{l ≥ 1} (α_l²/l²) e^{−c 4^j k²/l}, truncated with a certified relative tail of `rel_tol`.
///
/// Beyond L the terms are bounded through |α_l| ≤ k^{2n} |φ^{(n)}(l − nk²)| with φ = √·,
/// which gives a tail of at most c_n² k^{4n} (L − nk² − 1)^{−2n} / (2n).
pub fn alpha_series(n: usize, k: usize, c: f64, j: u32, rel_tol: f64) -> Result<f64> {
    check_nk(n, k)?;
    if !(c > 0.0) {
        return Err(Error::InvalidParameter(format!("rate c = {c} must be positive")));
    }
    let step = k * k;
    let scale = c * 4f64.powi(j as i32) * step as f64;
    let cn = (0..n).fold(1.0, |acc, i| acc * (0.5 - i as f64).abs());
    let k4n = (step as f64).powi(2 * n as i32);
    let tail_bound = |len: usize| -> f64 {
        let u = (len - n * step - 1) as f64;
        cn * cn * k4n * u.powi(-2 * n as i32) / (2 * n) as f64
    };
    let mut len = ((n + 2) * step).max(64).max((16.0 * scale) as usize);
    let mut sum = 0.0;
    let mut l = 0usize;
    loop {
        while l < len {
            l += 1;
            let a = alpha_at(n, step, l);
            let lf = l as f64;
            sum += a * a / (lf * lf) * (-scale / lf).exp();
        }
        let tail = tail_bound(len);
        if tail <= rel_tol * sum {
            return Ok(sum);
        }
        if len > 1 << 31 {
            return Err(Error::TailNotCertified(tail));
        }
        len *= 2;
    }
}

/// sup_j of the α-series times 4^{2nj} over j = 2..=j_max.
pub fn verify_alpha_bound(n: usize, k: usize, c: f64, j_max: u32) -> Result<InequalityReport> {
    let mut report = InequalityReport::new("COEFF_ALPHA", Method::Enumeration)
        .param("n", n)
        .param("k", k)
        .param("c", c)
        .param("j_max", j_max);
    let mut sup = 0.0f64;
    for j in 2..=j_max.max(2) {
        let s = alpha_series(n, k, c, j, 1e-6)?;
        let scaled = s * 4f64.powi((2 * n) as i32 * j as i32);
        report.push_row("scaled_sum", j as f64, scaled);
        sup = sup.max(scaled);
    }
    report.push_constant("sup_scaled", sup, Method::Enumeration, "sup_j 4^(2nj) sum_l alpha_l^2/l^2 exp(-c 4^j k^2/l)");
    report.verdict = if sup.is_finite() { Verdict::Pass } else { Verdict::Fail };
    Ok(report)
}

/// 16-point Gauss–Legendre nodes and weights on [−1, 1], by Newton iteration on P_16.
fn gauss_legendre_16() -> &'static [(f64, f64); 16] {
    use std::sync::OnceLock;
    static RULE: OnceLock<[(f64, f64); 16]> = OnceLock::new();
    RULE.get_or_init(|| {
        const N: usize = 16;
        let mut rule = [(0.0, 0.0); N];
        for i in 0..N {
            let mut x = (PI * (i as f64 + 0.75) / (N as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for m in 2..=N {
                    let p2 = ((2 * m - 1) as f64 * x * p1 - (m - 1) as f64 * p0) / m as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = N as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            rule[i] = (x, 2.0 / ((1.0 - x * x) * dp * dp));
        }
        rule
    })
}

/// Composite 16-point Gauss–Legendre on [a, b] with `panels` equal panels.
pub fn composite_gl(f: &impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let rule = gauss_legendre_16();
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let (lo, half) = (a + p as f64 * h, 0.5 * h);
        let mid = lo + half;
        let s: f64 = rule.iter().map(|&(x, w)| w * f(mid + half * x)).sum();
        total += half * s;
    }
    total
}

/// Tolerance on the doubling-rule error estimate of the quadratures below.
const QUAD_TOL: f64 = 1e-11;

/// a_l = (2/π) ∫₀^{π/2} sin^{2l} t dt by composite Gauss–Legendre on about `quad_points` nodes.
pub fn a_wallis(l: usize, quad_points: usize) -> Result<f64> {
    if quad_points < 64 {
        return Err(Error::InvalidParameter(format!("quad_points {quad_points} < 64")));
    }
    let f = |t: f64| t.sin().powi(2 * l as i32);
    let panels = quad_points / 16;
    let fine = composite_gl(&f, 0.0, FRAC_PI_2, panels) / FRAC_PI_2;
    let coarse = composite_gl(&f, 0.0, FRAC_PI_2, (panels / 2).max(1)) / FRAC_PI_2;
    let estimate = (fine - coarse).abs();
    if estimate > QUAD_TOL {
        return Err(Error::QuadratureUnderResolved { estimate, tolerance: QUAD_TOL });
    }
    Ok(fine)
}

/// a_l from the recursion against the Wallis integral for l ≤ `l_max`, plus √(πl) a_l at
/// l = 1000. PASS when the relative gap stays within 1e-10 and the scaled value lies in
/// [0.999, 1].
pub fn wallis_report(l_max: usize, quad_points: usize) -> Result<InequalityReport> {
    let a = a_values(l_max.max(1000));
    let mut report =
        InequalityReport::new("WALLIS", Method::Enumeration).param("l_max", l_max).param("quad_points", quad_points);
    let mut worst = 0.0f64;
    for l in 0..=l_max {
        let w = a_wallis(l, quad_points)?;
        let rel = (w - a[l]).abs() / a[l];
        report.push_row("relative_gap", l as f64, rel);
        worst = worst.max(rel);
    }
    let scaled = (PI * 1000.0).sqrt() * a[1000];
    report.push_constant("max_relative_gap", worst, Method::Enumeration, "recursion against quadrature");
    report.push_constant("scaled_a_1000", scaled, Method::Enumeration, "sqrt(pi l) a_l at l = 1000");
    let ok = worst <= 1e-10 && (0.999..=1.0).contains(&scaled);
    report.verdict = if ok { Verdict::Pass } else { Verdict::Fail };
    Ok(report)
}

/// Octaves [π/2 · 2^{−(j+1)}, π/2 · 2^{−j}] used to resolve the logarithm near 0.
const OCTAVES: usize = 48;

fn graded_integral(f: &impl Fn(f64) -> f64, panels_per_octave: usize) -> f64 {
    let mut total = 0.0;
    for j in 0..OCTAVES {
        let hi = FRAC_PI_2 * 0.5f64.powi(j as i32);
        total += composite_gl(f, 0.5 * hi, hi, panels_per_octave);
    }
    // The uncovered [0, π/2 · 2^{−48}] contributes below t^{2x+1} |2 log t|^n, under 1e-28 for x > 1.
    total
}

/// φ^{(n)}(x) = (2/π) ∫₀^{π/2} (2 log sin t)^n sin^{2x} t dt.
pub fn phi_derivative(n: usize, x: f64, quad_points: usize) -> Result<f64> {
    if quad_points < 64 {
        return Err(Error::InvalidParameter(format!("quad_points {quad_points} < 64")));
    }
    let f = |t: f64| {
        let s = t.sin();
        (2.0 * s.ln()).powi(n as i32) * s.powf(2.0 * x)
    };
    let per = (quad_points / (16 * OCTAVES)).max(2);
    let fine = graded_integral(&f, per) / FRAC_PI_2;
    let coarse = graded_integral(&f, per / 2) / FRAC_PI_2;
    let estimate = (fine - coarse).abs();
    let tolerance = QUAD_TOL * fine.abs();
    if estimate > tolerance {
        return Err(Error::QuadratureUnderResolved { estimate, tolerance });
    }
    Ok(fine)
}

/// sup over the grid of x^{n+1/2} |φ^{(n)}(x)|.
pub fn phi_derivative_bound(n: usize, x_grid: &[f64], quad_points: usize) -> Result<InequalityReport> {
    if x_grid.is_empty() {
        return Err(Error::EmptySample);
    }
    if let Some(&x) = x_grid.iter().find(|&&x| !(x > 1.0)) {
        return Err(Error::InvalidParameter(format!("grid point {x} not in (1, ∞)")));
    }
    let mut report = InequalityReport::new("WALLIS", Method::Enumeration)
        .param("n", n)
        .param("quad_points", quad_points)
        .param("x_grid", x_grid.to_vec());
    let mut scaled = Vec::with_capacity(x_grid.len());
    for &x in x_grid {
        let v = phi_derivative(n, x, quad_points)?;
        let s = x.powf(n as f64 + 0.5) * v.abs();
        report.push_row("scaled_derivative", x, s);
        scaled.push(s);
    }
    let sup = scaled.iter().copied().fold(0.0, f64::max);
    report.push_constant("sup_scaled", sup, Method::Enumeration, "sup x^(n+1/2) |phi^(n)(x)|");
    // Bounded: the value at the largest x does not exceed twice the sup over the rest.
    let last = *scaled.last().expect("nonempty");
    let earlier = scaled[..scaled.len() - 1].iter().copied().fold(0.0, f64::max);
    let bounded = sup.is_finite() && (scaled.len() == 1 || last <= 2.0 * earlier);
    report.verdict = if bounded { Verdict::Pass } else { Verdict::Fail };
    Ok(report)
}
