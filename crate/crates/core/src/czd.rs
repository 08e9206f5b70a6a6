//! Whitney covers, partitions of unity and the Calderón–Zygmund decomposition of Sobolev functions.

use crate::error::{Error, Result};
use crate::graph::{DistanceMatrix, WeightedGraph};
use crate::operators::{grad_values, maximal_values, VertexFunction};
use crate::report::{InequalityReport, Method, Verdict};
use serde::Serialize;
use std::collections::BTreeMap;

/// Default C₁. The cutoff ψ is positive on C₁d/r < (1 + C₁)/2, which must exceed twice the
/// core radius r/C₁ for disjoint cores to leave no vertex of Ω uncovered; that needs C₁ > 3.
pub const DEFAULT_C1: f64 = 4.0;
/// Default C₂ = 4C₁.
pub const DEFAULT_C2: f64 = 16.0;

/// One Whitney ball. Radii are r = d(x, F)/2 and its multiples, floored when sets are built.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WhitneyBall {
    pub center: usize,
    /// d(center, F).
    pub depth: usize,
    /// r_i = depth / 2, kept exact.
    pub radius: f64,
    /// Integer radius ⌊r_i⌋ of B_i.
    pub ball_radius: usize,
    /// ⌊r_i / C₁⌋, radius of the core ball.
    pub core_radius: usize,
    /// ⌊C₂ r_i / C₁⌋, radius of the outer ball.
    pub outer_radius: usize,
    /// Sorted members of B_i.
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WhitneyCover {
    pub c1: f64,
    pub c2: f64,
    pub omega: Vec<bool>,
    pub balls: Vec<WhitneyBall>,
}

/// Results of checking a cover against the Whitney properties.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverCheck {
    pub cores_disjoint: bool,
    pub covers_omega: bool,
    pub balls_inside_omega: bool,
    pub outer_meets_complement: bool,
    pub overlap: usize,
}

fn psi(s: f64, c1: f64) -> f64 {
    let end = 0.5 * (1.0 + c1);
    if s <= 1.0 {
        1.0
    } else if s >= end {
        0.0
    } else {
        (end - s) / (end - 1.0)
    }
}

impl WhitneyBall {
    /// ψ(C₁ d(x_i, x) / r_i).
    fn bump(&self, d: usize, c1: f64) -> f64 {
        psi(c1 * d as f64 / self.radius, c1)
    }
}

fn omega_checks(omega: &[bool]) -> Result<()> {
    if !omega.iter().any(|&b| b) {
        return Err(Error::EmptyOmega);
    }
    if omega.iter().all(|&b| b) {
        return Err(Error::OmegaIsEverything);
    }
    Ok(())
}

/// Greedy cover: repeatedly take the vertex of Ω farthest from F (lowest index on ties) not yet
/// reached by a bump, and open a ball there. A vertex counts as reached once some chosen bump
/// is positive on it.
pub fn whitney_cover(g: &WeightedGraph, omega: &[bool], c1: f64, c2: f64) -> Result<WhitneyCover> {
    let dm = DistanceMatrix::new(g);
    whitney_cover_with(g, &dm, omega, c1, c2)
}

pub fn whitney_cover_with(
    g: &WeightedGraph,
    dm: &DistanceMatrix,
    omega: &[bool],
    c1: f64,
    c2: f64,
) -> Result<WhitneyCover> {
    if omega.len() != g.vertex_count() {
        return Err(Error::GraphMismatch);
    }
    if !(c1 > 1.0 && c2 > c1) {
        return Err(Error::InvalidParameter(format!("need C2 > C1 > 1, got C1={c1}, C2={c2}")));
    }
    omega_checks(omega)?;
    let n = g.vertex_count();
    let complement: Vec<bool> = omega.iter().map(|&b| !b).collect();
    let depth = dm.distance_to_set(&complement);
    let mut order: Vec<usize> = (0..n).filter(|&x| omega[x]).collect();
    order.sort_by(|&a, &b| depth[b].cmp(&depth[a]).then(a.cmp(&b)));

    let mut reached = vec![false; n];
    let mut balls = Vec::new();
    for &x in &order {
        if reached[x] {
            continue;
        }
        let dx = depth[x];
        let radius = dx as f64 / 2.0;
        let ball_radius = dx / 2;
        let ball = WhitneyBall {
            center: x,
            depth: dx,
            radius,
            ball_radius,
            core_radius: (radius / c1).floor() as usize,
            outer_radius: (c2 * radius / c1).floor() as usize,
            members: (0..n).filter(|&y| dm.get(x, y) <= ball_radius).collect(),
        };
        for &y in &ball.members {
            if ball.bump(dm.get(x, y), c1) > 0.0 {
                reached[y] = true;
            }
        }
        balls.push(ball);
    }
    Ok(WhitneyCover { c1, c2, omega: omega.to_vec(), balls })
}

impl WhitneyCover {
    /// Checks every Whitney property exactly.
    pub fn check(&self, dm: &DistanceMatrix, omega: &[bool]) -> CoverCheck {
        let n = omega.len();
        let mut cores_disjoint = true;
        for (i, a) in self.balls.iter().enumerate() {
            for b in &self.balls[i + 1..] {
                if dm.get(a.center, b.center) <= a.core_radius + b.core_radius {
                    cores_disjoint = false;
                }
            }
        }
        let mut count = vec![0usize; n];
        for b in &self.balls {
            for &y in &b.members {
                count[y] += 1;
            }
        }
        let covers_omega = (0..n).all(|x| !omega[x] || count[x] > 0);
        let balls_inside_omega = self.balls.iter().all(|b| b.members.iter().all(|&y| omega[y]));
        let outer_meets_complement =
            self.balls.iter().all(|b| (0..n).any(|y| !omega[y] && dm.get(b.center, y) <= b.outer_radius));
        CoverCheck {
            cores_disjoint,
            covers_omega,
            balls_inside_omega,
            outer_meets_complement,
            overlap: count.into_iter().max().unwrap_or(0),
        }
    }
}

/// χ_i restricted to the members of B_i, in the same order.
#[derive(Debug, Clone, PartialEq)]
pub struct Bump {
    pub values: Vec<f64>,
}

/// χ_i(x) = ψ(C₁d(x_i, x)/r_i) / Σ_k ψ(C₁d(x_k, x)/r_k) on Ω, and 0 off Ω.
pub fn partition_of_unity(g: &WeightedGraph, cover: &WhitneyCover) -> Result<Vec<VertexFunction>> {
    let dm = DistanceMatrix::new(g);
    let n = g.vertex_count();
    let bumps = bumps_with(&dm, cover, n)?;
    Ok(cover
        .balls
        .iter()
        .zip(bumps)
        .map(|(b, chi)| {
            let mut v = vec![0.0; n];
            for (&y, c) in b.members.iter().zip(chi.values) {
                v[y] = c;
            }
            VertexFunction::new(g, v).expect("length matches")
        })
        .collect())
}

fn bumps_with(dm: &DistanceMatrix, cover: &WhitneyCover, n: usize) -> Result<Vec<Bump>> {
    let mut denom = vec![0.0f64; n];
    let raw: Vec<Vec<f64>> = cover
        .balls
        .iter()
        .map(|b| {
            b.members
                .iter()
                .map(|&y| {
                    let v = b.bump(dm.get(b.center, y), cover.c1);
                    denom[y] += v;
                    v
                })
                .collect()
        })
        .collect();
    if let Some(x) = (0..n).find(|&x| cover.omega[x] && denom[x] <= 0.0) {
        return Err(Error::CoverDoesNotCover(x));
    }
    Ok(cover
        .balls
        .iter()
        .zip(raw)
        .map(|(b, r)| Bump {
            values: b.members.iter().zip(r).map(|(&y, v)| if v > 0.0 { v / denom[y] } else { 0.0 }).collect(),
        })
        .collect())
}

/// A bad part b_i, stored on the members of its ball.
#[derive(Debug, Clone, PartialEq)]
pub struct BadPart {
    pub ball: usize,
    /// f_{B_i}.
    pub mean: f64,
    pub chi: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CZDecomposition {
    pub alpha: f64,
    pub q: f64,
    pub omega: Vec<bool>,
    pub cover: WhitneyCover,
    pub bad: Vec<BadPart>,
    pub good: Vec<f64>,
    pub f: Vec<f64>,
    /// Dyadic groups j ↦ β_j = Σ_{⌊log₂ r_i⌋ = j} b_i / 2^j, as dense vectors.
    pub groups: BTreeMap<i32, Vec<f64>>,
    /// The maximal function M(|∇f|^q) that defined Ω.
    pub maximal: Vec<f64>,
}

impl CZDecomposition {
    /// Σ_i b_i as a dense vector.
    pub fn bad_sum(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.f.len()];
        for b in &self.bad {
            for (&y, v) in self.cover.balls[b.ball].members.iter().zip(&b.values) {
                s[y] += v;
            }
        }
        s
    }

    /// Dense b_i.
    pub fn bad_dense(&self, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; self.f.len()];
        let b = &self.bad[i];
        for (&y, val) in self.cover.balls[b.ball].members.iter().zip(&b.values) {
            v[y] = *val;
        }
        v
    }
}

/// Decomposes f = g + Σ b_i at level α with Ω = {M(|∇f|^q) > α^q}.
pub fn cz_decompose(g: &WeightedGraph, f: &VertexFunction, alpha: f64, q: f64) -> Result<CZDecomposition> {
    let dm = DistanceMatrix::new(g);
    cz_decompose_with(g, &dm, f, alpha, q, DEFAULT_C1, DEFAULT_C2)
}

/// M(|∇f|^q) on raw values.
pub fn gradient_maximal(g: &WeightedGraph, dm: &DistanceMatrix, f: &[f64], q: f64) -> Vec<f64> {
    let h: Vec<f64> = grad_values(g, f).into_iter().map(|v| v.powf(q)).collect();
    maximal_values(g, dm, &h)
}

pub fn cz_decompose_with(
    g: &WeightedGraph,
    dm: &DistanceMatrix,
    f: &VertexFunction,
    alpha: f64,
    q: f64,
    c1: f64,
    c2: f64,
) -> Result<CZDecomposition> {
    if !f.belongs_to(g) {
        return Err(Error::GraphMismatch);
    }
    if !(alpha > 0.0) || !(q >= 1.0) {
        return Err(Error::InvalidParameter(format!("need α > 0 and q ≥ 1, got α={alpha}, q={q}")));
    }
    let maximal = gradient_maximal(g, dm, f.values(), q);
    decompose_from_maximal(g, dm, f.values(), maximal, alpha, q, c1, c2)
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn decompose_from_maximal(
    g: &WeightedGraph,
    dm: &DistanceMatrix,
    f: &[f64],
    maximal: Vec<f64>,
    alpha: f64,
    q: f64,
    c1: f64,
    c2: f64,
) -> Result<CZDecomposition> {
    let n = g.vertex_count();
    let level = alpha.powf(q);
    let omega: Vec<bool> = maximal.iter().map(|&m| m > level).collect();
    if !omega.iter().any(|&b| b) {
        return Ok(CZDecomposition {
            alpha,
            q,
            cover: WhitneyCover { c1, c2, omega: omega.clone(), balls: Vec::new() },
            omega,
            bad: Vec::new(),
            good: f.to_vec(),
            f: f.to_vec(),
            groups: BTreeMap::new(),
            maximal,
        });
    }
    let cover = whitney_cover_with(g, dm, &omega, c1, c2)?;
    let bumps = bumps_with(dm, &cover, n)?;
    let mut bad = Vec::with_capacity(cover.balls.len());
    let mut good = f.to_vec();
    let mut groups: BTreeMap<i32, Vec<f64>> = BTreeMap::new();
    for (i, (ball, chi)) in cover.balls.iter().zip(bumps).enumerate() {
        let (mut num, mut den) = (0.0, 0.0);
        for &y in &ball.members {
            num += f[y] * g.mass(y);
            den += g.mass(y);
        }
        let mean = num / den;
        let values: Vec<f64> = ball.members.iter().zip(&chi.values).map(|(&y, c)| (f[y] - mean) * c).collect();
        let j = ball.radius.log2().floor() as i32;
        let scale = 2f64.powi(j);
        let group = groups.entry(j).or_insert_with(|| vec![0.0; n]);
        for (&y, v) in ball.members.iter().zip(&values) {
            good[y] -= v;
            group[y] += v / scale;
        }
        bad.push(BadPart { ball: i, mean, chi: chi.values, values });
    }
    Ok(CZDecomposition { alpha, q, omega, cover, bad, good, f: f.to_vec(), groups, maximal })
}

/// Empirical constants of the decomposition properties.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CZConstants {
    /// ‖∇g‖_∞ / α.
    pub good_gradient: f64,
    /// max_i Σ_{B_i} |∇b_i|^q m / (α^q V(B_i)).
    pub bad_gradient: f64,
    /// α^p Σ_i V(B_i) / Σ |∇f|^p m.
    pub ball_volume: f64,
    /// max_x ♯{i : x ∈ B_i}.
    pub overlap: usize,
    /// max_i V(B_i)^{−1/q} ‖b_i‖_q / (α r_i).
    pub bad_size: f64,
    /// sup |f − g − Σ b_i|.
    pub reconstruction: f64,
    /// sup |Σ_j 2^j β_j − Σ b_i|.
    pub regrouping: f64,
    pub supports_ok: bool,
    pub partition_ok: bool,
    /// max_i r_i ‖∇χ_i‖_∞.
    pub bump_lipschitz: f64,
}

pub fn cz_constants(g: &WeightedGraph, dm: &DistanceMatrix, dec: &CZDecomposition, p: f64) -> CZConstants {
    let n = g.vertex_count();
    let alpha = dec.alpha;
    let q = dec.q;
    let good_gradient = grad_values(g, &dec.good).into_iter().fold(0.0, f64::max) / alpha;
    let gf = grad_values(g, &dec.f);
    let grad_p: f64 = gf.iter().zip(g.masses()).map(|(v, m)| v.powf(p) * m).sum();

    let mut bad_gradient = 0.0f64;
    let mut bad_size = 0.0f64;
    let mut bump_lipschitz = 0.0f64;
    let mut total_volume = 0.0;
    let mut supports_ok = true;
    let mut chi_sum = vec![0.0; n];
    for (i, b) in dec.bad.iter().enumerate() {
        let ball = &dec.cover.balls[b.ball];
        let dense = dec.bad_dense(i);
        let volume: f64 = ball.members.iter().map(|&y| g.mass(y)).sum();
        total_volume += volume;
        let grad_b = grad_values(g, &dense);
        let mass_in: f64 = ball.members.iter().map(|&y| grad_b[y].powf(q) * g.mass(y)).sum();
        bad_gradient = bad_gradient.max(mass_in / (alpha.powf(q) * volume));
        let norm_q: f64 =
            ball.members.iter().zip(&b.values).map(|(&y, v)| v.abs().powf(q) * g.mass(y)).sum::<f64>().powf(1.0 / q);
        bad_size = bad_size.max(volume.powf(-1.0 / q) * norm_q / (alpha * ball.radius));
        // b_i is stored on B_i, so support outside B_i is impossible; check Ω containment too.
        supports_ok &= ball.members.iter().zip(&b.values).all(|(&y, v)| *v == 0.0 || dec.omega[y]);
        let mut chi_dense = vec![0.0; n];
        for (&y, c) in ball.members.iter().zip(&b.chi) {
            chi_dense[y] = *c;
            chi_sum[y] += c;
        }
        let lip = grad_values(g, &chi_dense).into_iter().fold(0.0, f64::max);
        bump_lipschitz = bump_lipschitz.max(ball.radius * lip);
    }
    let partition_ok = dec.bad.is_empty()
        || (0..n).all(|x| if dec.omega[x] { (chi_sum[x] - 1.0).abs() <= 1e-12 } else { chi_sum[x] == 0.0 });
    let bad_sum = dec.bad_sum();
    let reconstruction = (0..n).map(|x| (dec.f[x] - dec.good[x] - bad_sum[x]).abs()).fold(0.0, f64::max);
    let mut regrouped = vec![0.0; n];
    for (&j, beta) in &dec.groups {
        let s = 2f64.powi(j);
        for x in 0..n {
            regrouped[x] += s * beta[x];
        }
    }
    let regrouping = (0..n).map(|x| (regrouped[x] - bad_sum[x]).abs()).fold(0.0, f64::max);
    let overlap = if dec.bad.is_empty() { 0 } else { dec.cover.check(dm, &dec.omega).overlap };
    CZConstants {
        good_gradient,
        bad_gradient,
        ball_volume: if grad_p > 0.0 { alpha.powf(p) * total_volume / grad_p } else { 0.0 },
        overlap,
        bad_size,
        reconstruction,
        regrouping,
        supports_ok,
        partition_ok,
        bump_lipschitz,
    }
}

/// Report on a decomposition; PASS when the structural identities hold exactly.
pub fn verify_cz(g: &WeightedGraph, dec: &CZDecomposition, p: f64) -> Result<InequalityReport> {
    if !(p >= dec.q) {
        return Err(Error::InvalidParameter(format!("need p ≥ q, got p={p}, q={}", dec.q)));
    }
    let dm = DistanceMatrix::new(g);
    let c = cz_constants(g, &dm, dec, p);
    let mut report = InequalityReport::new("CZ", Method::Enumeration)
        .param("alpha", dec.alpha)
        .param("q", dec.q)
        .param("p", p)
        .param("balls", dec.cover.balls.len())
        .param("omega_size", dec.omega.iter().filter(|&&b| b).count());
    let m = Method::Enumeration;
    report.push_constant("good_gradient", c.good_gradient, m, "||grad g||_inf / alpha");
    report.push_constant("bad_gradient", c.bad_gradient, m, "max_i sum_{B_i} |grad b_i|^q m / (alpha^q V(B_i))");
    report.push_constant("ball_volume", c.ball_volume, m, "alpha^p sum_i V(B_i) / sum |grad f|^p m");
    report.push_constant("overlap", c.overlap as f64, m, "max_x #{i : x in B_i}");
    report.push_constant("bad_size", c.bad_size, m, "max_i V(B_i)^(-1/q) ||b_i||_q / (alpha r_i)");
    report.push_constant("bump_lipschitz", c.bump_lipschitz, m, "max_i r_i ||grad chi_i||_inf");
    report.push_constant("reconstruction", c.reconstruction, m, "sup |f - g - sum b_i|");
    report.push_constant("regrouping", c.regrouping, m, "sup |sum_j 2^j beta_j - sum_i b_i|");
    if dec.bad.is_empty() {
        report.flag("empty bad set: g = f");
    }
    let ok = c.reconstruction <= 1e-12 && c.regrouping <= 1e-12 && c.supports_ok && c.partition_ok;
    report.verdict = if ok { Verdict::Pass } else { Verdict::Fail };
    Ok(report)
}
