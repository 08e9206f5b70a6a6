//! Rearrangements, K-functionals between Ẇ^{1,q} and Ẇ^{1,∞}, and Poincaré constants on balls.

use crate::czd::{decompose_from_maximal, DEFAULT_C1, DEFAULT_C2};
use crate::error::{Error, Result};
use crate::graph::{Ball, DistanceMatrix, WeightedGraph};
use crate::lab::ascent::{ascend, AscentOptions, LogRatio};
use crate::operators::{
    grad_point_subgradient, grad_power_sum, grad_power_sum_on, grad_values, maximal_values, VertexFunction,
};
use crate::report::{InequalityReport, Method, Verdict};
use nalgebra::DMatrix;

/// The decreasing rearrangement f* as a right-continuous step function of the mass coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct Rearrangement {
    /// 0 = t_0 < t_1 < … < t_n = m(Γ).
    pub breakpoints: Vec<f64>,
    /// f* = levels[i] on [t_i, t_{i+1}); strictly decreasing.
    pub levels: Vec<f64>,
}

impl Rearrangement {
    pub fn total_mass(&self) -> f64 {
        *self.breakpoints.last().unwrap_or(&0.0)
    }

    /// f*(t); zero from m(Γ) on.
    pub fn star(&self, t: f64) -> f64 {
        let i = self.breakpoints.partition_point(|&b| b <= t);
        if i == 0 || i > self.levels.len() {
            return if i == 0 { self.levels.first().copied().unwrap_or(0.0) } else { 0.0 };
        }
        self.levels[i - 1]
    }

    /// ∫₀^t f*, with f* = 0 past m(Γ).
    pub fn integral(&self, t: f64) -> f64 {
        let mut s = 0.0;
        for (i, &level) in self.levels.iter().enumerate() {
            let (a, b) = (self.breakpoints[i], self.breakpoints[i + 1]);
            if t <= a {
                break;
            }
            s += level * (t.min(b) - a);
        }
        s
    }

    /// (1/t)∫₀^t f* for any t > 0.
    fn average(&self, t: f64) -> f64 {
        self.integral(t) / t
    }
}

/// Sorts |f| decreasingly, merging equal values into one step of their combined mass.
pub fn rearrange_values(g: &WeightedGraph, f: &[f64]) -> Rearrangement {
    let mut pairs: Vec<(f64, f64)> = f.iter().zip(g.masses()).map(|(v, &m)| (v.abs(), m)).collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut breakpoints = vec![0.0];
    let mut levels: Vec<f64> = Vec::new();
    let mut t = 0.0;
    for (v, m) in pairs {
        t += m;
        if levels.last() == Some(&v) {
            *breakpoints.last_mut().unwrap() = t;
        } else {
            levels.push(v);
            breakpoints.push(t);
        }
    }
    Rearrangement { breakpoints, levels }
}

pub fn rearrange(g: &WeightedGraph, f: &VertexFunction) -> Result<Rearrangement> {
    f.check(g)?;
    Ok(rearrange_values(g, f.values()))
}

/// f**(t) = (1/t)∫₀^t f* for t ∈ (0, m(Γ)].
pub fn double_star(r: &Rearrangement, t: f64) -> Result<f64> {
    let total = r.total_mass();
    if !(t > 0.0 && t <= total) {
        return Err(Error::TOutOfRange { t, total });
    }
    Ok(r.average(t))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KOptions {
    pub iterations: usize,
}

impl Default for KOptions {
    fn default() -> Self {
        KOptions { iterations: 500 }
    }
}

/// Which decomposition the reported upper bound came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KCandidate {
    AllSobolev,
    AllLipschitz,
    CalderonZygmund,
    Descent,
    Pooled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KFunctionalResult {
    pub t: f64,
    pub q: f64,
    /// ‖∇h‖_q + t^{1/q}‖∇g_∞‖_∞ for the best f = h + g_∞ found.
    pub upper: f64,
    pub h: Vec<f64>,
    pub g_inf: Vec<f64>,
    /// t^{1/q} ((|∇f|^q)**(t))^{1/q}.
    pub reference: f64,
    /// upper / reference; NaN when the reference vanishes.
    pub ratio: f64,
    pub source: KCandidate,
}

/// The two parts ‖∇(f − g)‖_q and ‖∇g‖_∞ of the objective.
fn k_parts(g: &WeightedGraph, f: &[f64], gi: &[f64], q: f64) -> (f64, f64) {
    let h: Vec<f64> = f.iter().zip(gi).map(|(a, b)| a - b).collect();
    let a = grad_power_sum(g, &h, q, None).powf(1.0 / q);
    let b = grad_values(g, gi).into_iter().fold(0.0, f64::max);
    (a, b)
}

/// Objective value and a subgradient with respect to g_∞.
fn k_objective(g: &WeightedGraph, f: &[f64], gi: &[f64], q: f64, s: f64, sub: &mut [f64]) -> f64 {
    sub.iter_mut().for_each(|v| *v = 0.0);
    let h: Vec<f64> = f.iter().zip(gi).map(|(a, b)| a - b).collect();
    let ps = grad_power_sum(g, &h, q, Some(sub));
    let a = ps.powf(1.0 / q);
    if ps > 0.0 {
        let c = -(1.0 / q) * ps.powf(1.0 / q - 1.0);
        sub.iter_mut().for_each(|v| *v *= c);
    } else {
        sub.iter_mut().for_each(|v| *v = 0.0);
    }
    let gv = grad_values(g, gi);
    let (xs, b) = gv.iter().enumerate().fold((0, 0.0f64), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    grad_point_subgradient(g, gi, xs, s, sub);
    a + s * b
}

/// Projected subgradient descent with Polyak steps toward a target below the best value seen.
/// The target gap halves whenever ten iterations pass without a gain of half the gap.
fn polyak_descent(
    g: &WeightedGraph,
    f: &[f64],
    start: &[f64],
    q: f64,
    s: f64,
    iterations: usize,
) -> Result<(f64, Vec<f64>)> {
    let n = f.len();
    let mut sub = vec![0.0; n];
    let mut x = start.to_vec();
    let mut best = k_objective(g, f, &x, q, s, &mut sub);
    let mut best_x = x.clone();
    let mut gap = 0.05 * best;
    let mut stall = 0;
    for _ in 0..iterations {
        if !(gap > 0.0) {
            break;
        }
        let v = k_objective(g, f, &x, q, s, &mut sub);
        if !v.is_finite() {
            return Err(Error::DescentDiverged(v));
        }
        if v < best {
            if best - v >= 0.5 * gap {
                stall = 0;
            }
            best = v;
            best_x.clone_from(&x);
        }
        stall += 1;
        if stall > 10 {
            gap *= 0.5;
            stall = 0;
            x.clone_from(&best_x);
            continue;
        }
        let mean = sub.iter().sum::<f64>() / n as f64;
        sub.iter_mut().for_each(|v| *v -= mean);
        let n2: f64 = sub.iter().map(|v| v * v).sum();
        if n2 == 0.0 {
            break;
        }
        let step = (v - (best - gap)) / n2;
        x.iter_mut().zip(&sub).for_each(|(a, d)| *a -= step * d);
    }
    Ok((best, best_x))
}

/// The objective with ∇ floored at μ and the max replaced by a log-sum-exp of width μ; it
/// exceeds the exact objective by at most μ(m(Γ)^{1/q} + s(1 + log n)).
struct SmoothedK<'a> {
    g: &'a WeightedGraph,
    f: &'a [f64],
    q: f64,
    s: f64,
    mu: f64,
}

impl SmoothedK<'_> {
    /// Floored gradient values (½Σp|Δu|² + μ²)^{1/2} and, when asked, their partials.
    fn floored(&self, u: &[f64]) -> Vec<f64> {
        (0..u.len())
            .map(|x| {
                let sq: f64 = self.g.neighbors(x).map(|(y, w)| w * (u[y] - u[x]).powi(2)).sum::<f64>() / self.g.mass(x);
                (0.5 * sq + self.mu * self.mu).sqrt()
            })
            .collect()
    }

    /// Adds c_x ∂a_x/∂u for every x into `out`, where a = floored(u).
    fn pull_back(&self, u: &[f64], a: &[f64], c: &[f64], out: &mut [f64]) {
        for x in 0..u.len() {
            let k = c[x] * 0.5 / (a[x] * self.g.mass(x));
            for (y, w) in self.g.neighbors(x) {
                let t = k * w * (u[y] - u[x]);
                out[y] += t;
                out[x] -= t;
            }
        }
    }

    fn eval(&self, gi: &[f64], grad: Option<&mut [f64]>) -> f64 {
        let h: Vec<f64> = self.f.iter().zip(gi).map(|(a, b)| a - b).collect();
        let a = self.floored(&h);
        let ps: f64 = a.iter().zip(self.g.masses()).map(|(v, m)| m * v.powf(self.q)).sum();
        let big_a = ps.powf(1.0 / self.q);
        let b = self.floored(gi);
        let top = b.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = b.iter().map(|v| ((v - top) / self.mu).exp()).collect();
        let z: f64 = e.iter().sum();
        let value = big_a + self.s * (top + self.mu * z.ln());
        if let Some(out) = grad {
            out.iter_mut().for_each(|v| *v = 0.0);
            let scale = big_a.powf(1.0 - self.q);
            let ca: Vec<f64> = a.iter().zip(self.g.masses()).map(|(v, m)| -scale * m * v.powf(self.q - 1.0)).collect();
            self.pull_back(&h, &a, &ca, out);
            let cb: Vec<f64> = e.iter().map(|v| self.s * v / z).collect();
            self.pull_back(gi, &b, &cb, out);
        }
        value
    }
}

impl argmin::core::CostFunction for SmoothedK<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, x: &Vec<f64>) -> std::result::Result<f64, argmin::core::Error> {
        Ok(self.eval(x, None))
    }
}

impl argmin::core::Gradient for SmoothedK<'_> {
    type Param = Vec<f64>;
    type Gradient = Vec<f64>;

    fn gradient(&self, x: &Vec<f64>) -> std::result::Result<Vec<f64>, argmin::core::Error> {
        let mut out = vec![0.0; x.len()];
        self.eval(x, Some(&mut out));
        Ok(out)
    }
}

/// L-BFGS on [`SmoothedK`] with the width shrinking tenfold per stage, keeping whichever
/// iterate has the lowest exact objective. Subgradient steps stall where several vertices
/// share the largest gradient; the smoothing does not.
fn smoothed_polish(g: &WeightedGraph, f: &[f64], start: &[f64], q: f64, s: f64, iterations: usize) -> (f64, Vec<f64>) {
    use argmin::core::{Executor, State};
    use argmin::solver::linesearch::MoreThuenteLineSearch;
    use argmin::solver::quasinewton::LBFGS;

    let exact = |x: &[f64]| {
        let (a, b) = k_parts(g, f, x, q);
        a + s * b
    };
    let scale = grad_values(g, f).into_iter().fold(0.0, f64::max);
    let mut x = start.to_vec();
    let mut best = (exact(&x), x.clone());
    if !(scale > 0.0) {
        return best;
    }
    let mut mu = 1e-2 * scale;
    while mu >= 1e-9 * scale {
        let problem = SmoothedK { g, f, q, s, mu };
        let solver = LBFGS::new(MoreThuenteLineSearch::new(), 10);
        let run = Executor::new(problem, solver).configure(|st| st.param(x.clone()).max_iters(iterations as u64)).run();
        if let Ok(res) = run {
            if let Some(p) = res.state().get_best_param() {
                x.clone_from(p);
                let v = exact(&x);
                if v < best.0 {
                    best = (v, x.clone());
                }
            }
        }
        mu *= 0.1;
    }
    best
}

fn k_inputs(g: &WeightedGraph, f: &VertexFunction, t: f64, q: f64) -> Result<()> {
    f.check(g)?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("need t > 0, got {t}")));
    }
    if !(q >= 1.0) || !q.is_finite() {
        return Err(Error::InvalidParameter(format!("need q in [1, inf), got {q}")));
    }
    Ok(())
}

/// Upper bound for K(f, t^{1/q}; Ẇ^{1,q}, Ẇ^{1,∞}) from the best of the trivial splittings, the
/// Calderón–Zygmund splitting at α(t) = (M(|∇f|^q))*(t)^{1/q}, and convex descent from the best.
pub fn k_functional(
    g: &WeightedGraph,
    f: &VertexFunction,
    t: f64,
    q: f64,
    opts: &KOptions,
) -> Result<KFunctionalResult> {
    k_inputs(g, f, t, q)?;
    let dm = DistanceMatrix::new(g);
    let grad_q: Vec<f64> = grad_values(g, f.values()).into_iter().map(|v| v.powf(q)).collect();
    let maximal = maximal_values(g, &dm, &grad_q);
    k_functional_with(g, &dm, f.values(), &grad_q, &maximal, t, q, opts)
}

#[allow(clippy::too_many_arguments)]
fn k_functional_with(
    g: &WeightedGraph,
    dm: &DistanceMatrix,
    f: &[f64],
    grad_q: &[f64],
    maximal: &[f64],
    t: f64,
    q: f64,
    opts: &KOptions,
) -> Result<KFunctionalResult> {
    let n = f.len();
    let s = t.powf(1.0 / q);
    let reference = s * rearrange_values(g, grad_q).average(t).powf(1.0 / q);
    let sobolev = grad_q.iter().zip(g.masses()).map(|(v, m)| v * m).sum::<f64>().powf(1.0 / q);
    let lip = grad_q.iter().fold(0.0f64, |a, &v| a.max(v)).powf(1.0 / q);
    let mut best = (sobolev, vec![0.0; n], KCandidate::AllSobolev);
    if s * lip < best.0 {
        best = (s * lip, f.to_vec(), KCandidate::AllLipschitz);
    }
    if lip > 0.0 {
        let alpha = rearrange_values(g, maximal).star(t).powf(1.0 / q);
        if alpha > 0.0 {
            match decompose_from_maximal(g, dm, f, maximal.to_vec(), alpha, q, DEFAULT_C1, DEFAULT_C2) {
                Ok(dec) => {
                    let (a, b) = k_parts(g, f, &dec.good, q);
                    if a + s * b < best.0 {
                        best = (a + s * b, dec.good, KCandidate::CalderonZygmund);
                    }
                }
                Err(Error::OmegaIsEverything) => {}
                Err(e) => return Err(e),
            }
        }
        let (v, x) = polyak_descent(g, f, &best.1, q, s, opts.iterations)?;
        if v < best.0 {
            best = (v, x, KCandidate::Descent);
        }
        let (v, x) = smoothed_polish(g, f, &best.1, q, s, opts.iterations);
        if v < best.0 {
            best = (v, x, KCandidate::Descent);
        }
    }
    let (upper, g_inf, source) = best;
    let h = f.iter().zip(&g_inf).map(|(a, b)| a - b).collect();
    Ok(KFunctionalResult {
        t,
        q,
        upper,
        h,
        g_inf,
        reference,
        ratio: if reference > 0.0 { upper / reference } else { f64::NAN },
        source,
    })
}

/// [`k_functional`] over a grid of t, then improved by letting each t use the best splitting
/// found at any t. The pooled upper bounds are a minimum of concave nondecreasing functions of t.
pub fn k_functional_grid(
    g: &WeightedGraph,
    f: &VertexFunction,
    ts: &[f64],
    q: f64,
    opts: &KOptions,
) -> Result<Vec<KFunctionalResult>> {
    for &t in ts {
        k_inputs(g, f, t, q)?;
    }
    let dm = DistanceMatrix::new(g);
    let grad_q: Vec<f64> = grad_values(g, f.values()).into_iter().map(|v| v.powf(q)).collect();
    let maximal = maximal_values(g, &dm, &grad_q);
    let mut out = ts
        .iter()
        .map(|&t| k_functional_with(g, &dm, f.values(), &grad_q, &maximal, t, q, opts))
        .collect::<Result<Vec<_>>>()?;
    let parts: Vec<(f64, f64)> = out.iter().map(|r| k_parts(g, f.values(), &r.g_inf, q)).collect();
    let witnesses: Vec<Vec<f64>> = out.iter().map(|r| r.g_inf.clone()).collect();
    for r in &mut out {
        let s = r.t.powf(1.0 / q);
        for (j, &(a, b)) in parts.iter().enumerate() {
            let v = a + s * b;
            if v < r.upper {
                r.upper = v;
                r.g_inf.clone_from(&witnesses[j]);
                r.h = f.values().iter().zip(&r.g_inf).map(|(x, y)| x - y).collect();
                r.source = KCandidate::Pooled;
            }
        }
        r.ratio = if r.reference > 0.0 { r.upper / r.reference } else { f64::NAN };
    }
    Ok(out)
}

/// Two-sided comparison of K with t^{1/q}((|∇f|^q)**)^{1/q} over samples and a t-grid.
/// PASS when every finite ratio lies in one interval [c, C] with C/c ≤ `bound`.
pub fn k_sandwich_report(
    g: &WeightedGraph,
    fs: &[VertexFunction],
    q: f64,
    t_grid: &[f64],
    bound: f64,
    opts: &KOptions,
) -> Result<InequalityReport> {
    let total = g.total_mass();
    if let Some(&t) = t_grid.iter().find(|&&t| !(t > 0.0 && t <= total)) {
        return Err(Error::TOutOfRange { t, total });
    }
    let mut report = InequalityReport::new("KFUNC", Method::RandomSample)
        .param("q", q)
        .param("samples", fs.len())
        .param("t_points", t_grid.len())
        .param("bound", bound);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for (i, f) in fs.iter().enumerate() {
        let results = k_functional_grid(g, f, t_grid, q, opts)?;
        for r in results {
            if r.ratio.is_finite() {
                lo = lo.min(r.ratio);
                hi = hi.max(r.ratio);
                report.push_row(&format!("ratio/f{i}"), r.t, r.ratio);
            } else {
                report.flag("vanishing gradient: ratio skipped");
            }
        }
    }
    let spread = if hi > 0.0 { hi / lo } else { f64::NAN };
    report.push_constant("ratio_min", if hi > 0.0 { lo } else { f64::NAN }, Method::RandomSample, "min K / reference");
    report.push_constant("ratio_max", if hi > 0.0 { hi } else { f64::NAN }, Method::RandomSample, "max K / reference");
    report.push_constant("spread", spread, Method::RandomSample, "ratio_max / ratio_min");
    report.verdict = if hi == 0.0 {
        Verdict::Estimate
    } else if spread <= bound {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(report)
}

/// sup_t (Mf)*(t) / f**(t) over the given t.
pub fn maximal_rearrangement_constant(g: &WeightedGraph, f: &VertexFunction, t_grid: &[f64]) -> Result<f64> {
    f.check(g)?;
    let dm = DistanceMatrix::new(g);
    let mf = rearrange_values(g, &maximal_values(g, &dm, f.values()));
    let fr = rearrange_values(g, f.values());
    let mut c = 0.0f64;
    for &t in t_grid {
        let d = double_star(&fr, t)?;
        if d > 0.0 {
            c = c.max(mf.star(t) / d);
        }
    }
    Ok(c)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoincareResult {
    /// Best C in Σ_B |f − f_B|^p m ≤ C r^p Σ_B |∇f|^p m.
    pub constant: f64,
    /// Extremal function on the whole graph.
    pub witness: Vec<f64>,
    pub method: Method,
}

/// Vertices of B together with their neighbours, which ∇ on B can see.
fn neighbourhood(g: &WeightedGraph, ball: &Ball) -> Vec<usize> {
    let mut seen = vec![false; g.vertex_count()];
    for &x in &ball.members {
        seen[x] = true;
        for (y, _) in g.neighbors(x) {
            seen[y] = true;
        }
    }
    (0..g.vertex_count()).filter(|&x| seen[x]).collect()
}

pub fn poincare_constant(g: &WeightedGraph, ball: &Ball, p: f64) -> Result<f64> {
    Ok(poincare(g, ball, p, &AscentOptions::default())?.constant)
}

/// Exact generalized eigenvalue at p = 2, ascent lower bound otherwise.
pub fn poincare(g: &WeightedGraph, ball: &Ball, p: f64, opts: &AscentOptions) -> Result<PoincareResult> {
    if ball.members.len() < 2 || ball.radius == 0 {
        return Err(Error::DegenerateBall);
    }
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::InvalidParameter(format!("need p in [1, inf), got {p}")));
    }
    if ball.members.iter().any(|&x| x >= g.vertex_count()) {
        return Err(Error::GraphMismatch);
    }
    if p == 2.0 {
        poincare_two(g, ball)
    } else {
        poincare_ascent(g, ball, p, opts)
    }
}

fn poincare_two(g: &WeightedGraph, ball: &Ball) -> Result<PoincareResult> {
    let n = g.vertex_count();
    let members = &ball.members;
    let k = members.len();
    let mut local = vec![usize::MAX; n];
    for (i, &x) in members.iter().enumerate() {
        local[x] = i;
    }
    // Gradient form over B with the outside values minimized out. Each outside vertex z only
    // meets B through edges to B, so the minimization is a diagonal Schur complement.
    let mut s = DMatrix::<f64>::zeros(k, k);
    let mut outside: std::collections::BTreeMap<usize, Vec<(usize, f64)>> = Default::default();
    for (i, &y) in members.iter().enumerate() {
        for (z, w) in g.neighbors(y) {
            if z == y {
                continue;
            }
            let c = 0.5 * w;
            s[(i, i)] += c;
            match local[z] {
                usize::MAX => outside.entry(z).or_default().push((i, c)),
                j => {
                    s[(j, j)] += c;
                    s[(i, j)] -= c;
                    s[(j, i)] -= c;
                }
            }
        }
    }
    for couplings in outside.values() {
        let d: f64 = couplings.iter().map(|c| c.1).sum();
        for &(i, a) in couplings {
            for &(j, b) in couplings {
                s[(i, j)] -= a * b / d;
            }
        }
    }
    let masses: Vec<f64> = members.iter().map(|&x| g.mass(x)).collect();
    let volume: f64 = masses.iter().sum();
    let mut a = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        a[(i, i)] += masses[i];
        for j in 0..k {
            a[(i, j)] -= masses[i] * masses[j] / volume;
        }
    }
    // Both forms kill constants; pinning the last coordinate to 0 leaves a complement.
    let a = a.view((0, 0), (k - 1, k - 1)).into_owned();
    let s = s.view((0, 0), (k - 1, k - 1)).into_owned();
    let scale = s.diagonal().max();
    let chol = nalgebra::Cholesky::new(s.clone()).ok_or(Error::DegenerateBall)?;
    let l = chol.l();
    if l.diagonal().iter().any(|&d| d * d <= 1e-13 * scale) {
        return Err(Error::DegenerateBall);
    }
    let linv = l.clone().try_inverse().ok_or(Error::DegenerateBall)?;
    let c = &linv * &a * linv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let eig = nalgebra::SymmetricEigen::new(c);
    let (imax, lmax) =
        eig.eigenvalues.iter().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |acc, (i, &v)| {
                if v > acc.1 {
                    (i, v)
                } else {
                    acc
                }
            },
        );
    let v = linv.transpose() * eig.eigenvectors.column(imax);
    let mut witness = vec![0.0; n];
    for i in 0..k - 1 {
        witness[members[i]] = v[i];
    }
    for (&z, couplings) in &outside {
        let d: f64 = couplings.iter().map(|c| c.1).sum();
        witness[z] = couplings.iter().map(|&(i, c)| c * witness[members[i]]).sum::<f64>() / d;
    }
    let r2 = (ball.radius * ball.radius) as f64;
    Ok(PoincareResult { constant: lmax / r2, witness, method: Method::ExactSpectral })
}

/// Direct evaluation of Σ_B |f − f_B|^p m / (r^p Σ_B |∇f|^p m).
pub fn poincare_ratio(g: &WeightedGraph, ball: &Ball, p: f64, f: &[f64]) -> f64 {
    let mask = ball.mask(g.vertex_count());
    let volume: f64 = ball.members.iter().map(|&x| g.mass(x)).sum();
    let fb = ball.members.iter().map(|&x| f[x] * g.mass(x)).sum::<f64>() / volume;
    let num: f64 = ball.members.iter().map(|&x| (f[x] - fb).abs().powf(p) * g.mass(x)).sum();
    let den = grad_power_sum_on(g, f, p, |x| mask[x], None);
    num / ((ball.radius as f64).powf(p) * den)
}

struct PoincareObjective<'a> {
    g: &'a WeightedGraph,
    ball: &'a Ball,
    mask: Vec<bool>,
    volume: f64,
    p: f64,
}

impl LogRatio for PoincareObjective<'_> {
    fn dim(&self) -> usize {
        self.g.vertex_count()
    }

    fn eval(&self, f: &[f64], grad: &mut [f64]) -> Option<f64> {
        let g = self.g;
        let p = self.p;
        grad.iter_mut().for_each(|v| *v = 0.0);
        let fb = self.ball.members.iter().map(|&x| f[x] * g.mass(x)).sum::<f64>() / self.volume;
        let mut num = 0.0;
        let mut dnum = vec![0.0; f.len()];
        let mut total = 0.0;
        for &x in &self.ball.members {
            let u = f[x] - fb;
            num += u.abs().powf(p) * g.mass(x);
            let d = p * u.abs().powf(p - 1.0) * u.signum() * g.mass(x);
            dnum[x] += d;
            total += d;
        }
        for &x in &self.ball.members {
            dnum[x] -= total * g.mass(x) / self.volume;
        }
        let mut dden = vec![0.0; f.len()];
        let den = grad_power_sum_on(g, f, p, |x| self.mask[x], Some(&mut dden));
        if !(num > 0.0 && den > 0.0) {
            return None;
        }
        for ((o, a), b) in grad.iter_mut().zip(&dnum).zip(&dden) {
            *o = a / num - b / den;
        }
        Some((num / den).ln() - p * (self.ball.radius as f64).ln())
    }
}

fn poincare_ascent(g: &WeightedGraph, ball: &Ball, p: f64, opts: &AscentOptions) -> Result<PoincareResult> {
    let n = g.vertex_count();
    let near = neighbourhood(g, ball);
    let mut starts = Vec::new();
    // The p = 2 extremal is the natural first start.
    if let Ok(two) = poincare_two(g, ball) {
        starts.push(two.witness);
    }
    let mut rng = crate::rng::seeded(opts.seed);
    while starts.len() < opts.restarts {
        let noise = crate::rng::normal_vec(&mut rng, near.len());
        let mut v = vec![0.0; n];
        for (&x, z) in near.iter().zip(noise) {
            v[x] = z;
        }
        starts.push(v);
    }
    let obj =
        PoincareObjective { g, ball, mask: ball.mask(n), volume: ball.members.iter().map(|&x| g.mass(x)).sum(), p };
    let r = ascend(&obj, &starts, opts);
    if !(r.value > 0.0) {
        return Err(Error::DegenerateBall);
    }
    Ok(PoincareResult { constant: r.value, witness: r.witness, method: Method::RayleighAscent })
}

/// Scaled Poincaré constants C(B) over balls B(x, r) for every centre and radius, against r.
///
/// The verdict is PASS when, for every centre, max_r C / min_r C ≤ `spread_cap`, and FAIL with a
/// growth flag otherwise. At p ≠ 2 the constants are ascent lower bounds and the verdict is
/// ESTIMATE.
pub fn poincare_report(
    g: &WeightedGraph,
    centers: &[usize],
    radii: &[usize],
    p: f64,
    spread_cap: f64,
    opts: &AscentOptions,
) -> Result<InequalityReport> {
    if centers.is_empty() || radii.is_empty() {
        return Err(Error::EmptySample);
    }
    let exact = p == 2.0;
    let method = if exact { Method::ExactSpectral } else { Method::RayleighAscent };
    let name = if exact { "P2" } else { "PQ" };
    let mut report = InequalityReport::new(name, method)
        .param("p", p)
        .param("centers", centers.to_vec())
        .param("radii", radii.to_vec());
    let mut spread = 1.0f64;
    let mut increasing = true;
    for &c in centers {
        let mut values = Vec::with_capacity(radii.len());
        for &r in radii {
            let ball = Ball::new(g, c, r)?;
            if ball.is_clipped(g) {
                report.flag(format!("ball ({c}, {r}) is the whole graph"));
            }
            let v = poincare(g, &ball, p, opts)?.constant;
            report.push_row(&format!("x={c}"), r as f64, v);
            values.push(v);
        }
        let (lo, hi) = values.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
        spread = spread.max(hi / lo);
        increasing &= values.windows(2).all(|w| w[1] > w[0]);
    }
    report.push_constant("spread", spread, method, "max over centres of max_r C / min_r C");
    if spread > spread_cap {
        report.flag(if increasing {
            "scaled constant grows with the radius".to_string()
        } else {
            format!("scaled constant varies by more than {spread_cap}")
        });
    }
    report.verdict = match (exact, spread <= spread_cap) {
        (false, _) => Verdict::Estimate,
        (true, true) => Verdict::Pass,
        (true, false) => Verdict::Fail,
    };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gen_grid, gen_tree};
    use crate::rng::{normal_vec, seeded};
    use rand::Rng;

    fn two_vertex() -> WeightedGraph {
        gen_grid(1, 2, 1.0).unwrap()
    }

    #[test]
    fn rearrangement_of_two_values() {
        let g = two_vertex();
        let r = rearrange_values(&g, &[3.0, -1.0]);
        assert_eq!(r.breakpoints, vec![0.0, 2.0, 4.0]);
        assert_eq!(r.levels, vec![3.0, 1.0]);
        assert_eq!(r.star(0.0), 3.0);
        assert_eq!(r.star(1.999), 3.0);
        assert_eq!(r.star(2.0), 1.0);
        assert_eq!(double_star(&r, 2.0).unwrap(), 3.0);
        assert_eq!(double_star(&r, 4.0).unwrap(), 2.0);
        assert!(matches!(double_star(&r, 4.5), Err(Error::TOutOfRange { .. })));
        assert!(matches!(double_star(&r, 0.0), Err(Error::TOutOfRange { .. })));
    }

    #[test]
    fn constant_rearrangement() {
        let g = gen_grid(2, 4, 1.0).unwrap();
        let r = rearrange(&g, &VertexFunction::constant(&g, -2.5)).unwrap();
        assert_eq!(r.levels, vec![2.5]);
        for t in [0.5, 7.0, g.total_mass()] {
            assert_eq!(double_star(&r, t).unwrap(), 2.5);
        }
    }

    #[test]
    fn double_star_dominates_star() {
        let g = gen_grid(2, 5, 0.5).unwrap();
        let mut rng = seeded(3);
        let f = normal_vec(&mut rng, 25);
        let r = rearrange_values(&g, &f);
        let total: f64 = f.iter().zip(g.masses()).map(|(v, m)| v.abs() * m).sum();
        assert!((r.integral(g.total_mass()) - total).abs() <= 1e-12 * total);
        for _ in 0..100 {
            let t = rng.random_range(1e-6..g.total_mass());
            assert!(double_star(&r, t).unwrap() >= r.star(t) * (1.0 - 1e-15));
        }
    }

    fn brute_k(g: &WeightedGraph, f: &[f64], t: f64, q: f64) -> f64 {
        let s = t.powf(1.0 / q);
        let eval = |x: &[f64]| {
            let (a, b) = k_parts(g, f, x, q);
            a + s * b
        };
        let lo = f.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = f.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut center = [0.0; 3];
        let mut half = hi - lo;
        let mut best = f64::INFINITY;
        for _ in 0..8 {
            let step = half / 20.0;
            let mut arg = center;
            for i in 0..41 {
                for j in 0..41 {
                    for k in 0..41 {
                        let x = [
                            0.0,
                            center[0] + (i as f64 - 20.0) * step,
                            center[1] + (j as f64 - 20.0) * step,
                            center[2] + (k as f64 - 20.0) * step,
                        ];
                        let v = eval(&x);
                        if v < best {
                            best = v;
                            arg = [x[1], x[2], x[3]];
                        }
                    }
                }
            }
            center = arg;
            half = 4.0 * step;
        }
        best
    }

    #[test]
    fn descent_matches_grid_search_on_a_short_path() {
        let g = gen_grid(1, 4, 1.0).unwrap();
        let f = VertexFunction::new(&g, vec![0.0, 2.0, -1.0, 1.5]).unwrap();
        let total = g.total_mass();
        for t in [total / 2.0, total / 6.0] {
            let r = k_functional(&g, &f, t, 1.0, &KOptions::default()).unwrap();
            let oracle = brute_k(&g, f.values(), t, 1.0);
            assert!((r.upper - oracle).abs() <= 1e-3, "t={t}: {} vs {oracle}", r.upper);
        }
    }

    #[test]
    fn trivial_regimes() {
        let g = gen_grid(2, 5, 1.0).unwrap();
        let f = VertexFunction::new(&g, normal_vec(&mut seeded(4), 25)).unwrap();
        let gq = grad_values(&g, f.values());
        let nq: f64 = gq.iter().zip(g.masses()).map(|(v, m)| v * m).sum();
        let ninf = gq.iter().cloned().fold(0.0, f64::max);
        let big = k_functional(&g, &f, g.total_mass(), 1.0, &KOptions::default()).unwrap();
        assert!(big.upper <= nq * (1.0 + 1e-12));
        for t in [1e-3, 1e-6] {
            let small = k_functional(&g, &f, t, 2.0, &KOptions::default()).unwrap();
            assert!(small.upper <= t.sqrt() * ninf * (1.0 + 1e-12));
        }
    }

    #[test]
    fn pooled_grid_is_monotone_and_concave() {
        let g = gen_grid(2, 5, 1.0).unwrap();
        let f = VertexFunction::new(&g, normal_vec(&mut seeded(6), 25)).unwrap();
        let ts: Vec<f64> = (1..=8).map(|i| g.total_mass() * i as f64 / 8.0).collect();
        let rs = k_functional_grid(&g, &f, &ts, 1.0, &KOptions::default()).unwrap();
        for w in rs.windows(2) {
            assert!(w[1].upper >= w[0].upper - 1e-12);
        }
        for w in rs.windows(3) {
            assert!(w[1].upper >= 0.5 * (w[0].upper + w[2].upper) - 1e-12);
        }
    }

    #[test]
    fn constant_function_sandwich_is_skipped() {
        let g = gen_grid(1, 6, 1.0).unwrap();
        let rep =
            k_sandwich_report(&g, &[VertexFunction::constant(&g, 1.0)], 1.0, &[1.0, 2.0], 50.0, &KOptions::default())
                .unwrap();
        assert_eq!(rep.verdict, Verdict::Estimate);
        assert!(!rep.flags.is_empty());
    }

    #[test]
    fn poincare_on_two_vertices() {
        let g = two_vertex();
        let ball = Ball::new(&g, 0, 1).unwrap();
        assert!((poincare_constant(&g, &ball, 2.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn poincare_matches_sampled_rayleigh_quotients() {
        let g = gen_grid(2, 7, 1.0).unwrap();
        let ball = Ball::new(&g, 24, 2).unwrap();
        let res = poincare(&g, &ball, 2.0, &AscentOptions::default()).unwrap();
        assert!((poincare_ratio(&g, &ball, 2.0, &res.witness) - res.constant).abs() <= 1e-8 * res.constant);
        let near = neighbourhood(&g, &ball);
        let mut rng = seeded(12);
        let mut best = 0.0f64;
        for _ in 0..1000 {
            let mut f = vec![0.0; 49];
            for &x in &near {
                f[x] = rng.random_range(-1.0..1.0);
            }
            best = best.max(poincare_ratio(&g, &ball, 2.0, &f));
        }
        assert!(best <= res.constant * (1.0 + 1e-8));
    }

    #[test]
    fn poincare_scaling_on_a_path() {
        let g = gen_grid(1, 41, 1.0).unwrap();
        let cs: Vec<f64> =
            [2, 4, 8].iter().map(|&r| poincare_constant(&g, &Ball::new(&g, 20, r).unwrap(), 2.0).unwrap()).collect();
        let (lo, hi) = cs.iter().fold((f64::INFINITY, 0.0f64), |a, &c| (a.0.min(c), a.1.max(c)));
        assert!(hi / lo <= 4.0, "{cs:?}");
    }

    #[test]
    fn poincare_grows_on_a_tree() {
        let g = gen_tree(2, 9).unwrap();
        let cs: Vec<f64> =
            [2, 4, 8].iter().map(|&r| poincare_constant(&g, &Ball::new(&g, 0, r).unwrap(), 2.0).unwrap()).collect();
        assert!(cs[0] < cs[1] && cs[1] < cs[2], "{cs:?}");
    }

    #[test]
    fn poincare_report_verdicts() {
        let opts = AscentOptions::default();
        let path = gen_grid(1, 41, 1.0).unwrap();
        let rep = poincare_report(&path, &[20], &[2, 4, 8], 2.0, 4.0, &opts).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass);
        let tree = gen_tree(2, 9).unwrap();
        let rep = poincare_report(&tree, &[0], &[2, 4, 8], 2.0, 4.0, &opts).unwrap();
        assert_eq!(rep.verdict, Verdict::Fail);
        assert!(rep.flags.iter().any(|f| f.contains("grows")));
    }

    #[test]
    fn poincare_ascent_is_a_lower_bound() {
        let g = gen_grid(1, 15, 1.0).unwrap();
        let ball = Ball::new(&g, 7, 3).unwrap();
        let c = poincare(&g, &ball, 3.0, &AscentOptions { restarts: 4, steps: 100, ..Default::default() }).unwrap();
        assert_eq!(c.method, Method::RayleighAscent);
        assert!((poincare_ratio(&g, &ball, 3.0, &c.witness) - c.constant).abs() <= 1e-9 * c.constant);
    }

    #[test]
    fn degenerate_balls() {
        let g = gen_grid(1, 5, 1.0).unwrap();
        assert_eq!(poincare_constant(&g, &Ball::new(&g, 2, 0).unwrap(), 2.0), Err(Error::DegenerateBall));
    }
}
