use super::WeightedGraph;
use crate::error::{Error, Result};
use crate::report::{InequalityReport, Method, Verdict};

/// Hop distance between `x` and `y`.
pub fn distance(g: &WeightedGraph, x: usize, y: usize) -> Result<usize> {
    g.check_vertex(x)?;
    g.check_vertex(y)?;
    Ok(g.bfs(x)[y])
}

/// Closed ball B(center, radius) in the hop metric.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ball {
    pub center: usize,
    pub radius: usize,
    /// Sorted vertex ids at distance at most `radius`.
    pub members: Vec<usize>,
}

impl Ball {
    pub fn new(g: &WeightedGraph, center: usize, radius: usize) -> Result<Self> {
        g.check_vertex(center)?;
        let dist = g.bfs(center);
        Ok(Self::from_distances(center, radius, &dist))
    }

    pub(crate) fn from_distances(center: usize, radius: usize, dist: &[usize]) -> Self {
        let members = (0..dist.len()).filter(|&y| dist[y] <= radius).collect();
        Ball { center, radius, members }
    }

    /// Same centre, radius ⌊factor · radius⌋.
    pub fn dilate(&self, g: &WeightedGraph, factor: f64) -> Result<Ball> {
        Ball::new(g, self.center, (factor * self.radius as f64).floor() as usize)
    }

    /// Same centre, radius `factor · radius` for an integer factor.
    pub fn scale(&self, g: &WeightedGraph, factor: usize) -> Result<Ball> {
        Ball::new(g, self.center, factor * self.radius)
    }

    pub fn contains(&self, y: usize) -> bool {
        self.members.binary_search(&y).is_ok()
    }

    /// Membership indicator over all vertices.
    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for &y in &self.members {
            m[y] = true;
        }
        m
    }

    /// True when the ball is the whole graph.
    pub fn is_clipped(&self, g: &WeightedGraph) -> bool {
        self.members.len() == g.vertex_count()
    }
}

/// V(B) = Σ_{y∈B} m(y), summed in vertex order.
pub fn volume(g: &WeightedGraph, ball: &Ball) -> f64 {
    ball.members.iter().map(|&y| g.mass(y)).sum()
}

/// Boundary ∂A = {x ∈ A : some neighbour of x lies outside A}.
pub fn boundary(g: &WeightedGraph, set: &[bool]) -> Vec<bool> {
    (0..g.vertex_count()).map(|x| set[x] && g.neighbors(x).any(|(y, _)| !set[y])).collect()
}

/// All-pairs hop distances, row-major.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<u32>,
}

impl DistanceMatrix {
    pub fn new(g: &WeightedGraph) -> Self {
        let n = g.vertex_count();
        let mut d = Vec::with_capacity(n * n);
        for x in 0..n {
            d.extend(g.bfs(x).into_iter().map(|v| v as u32));
        }
        DistanceMatrix { n, d }
    }

    pub fn get(&self, x: usize, y: usize) -> usize {
        self.d[x * self.n + y] as usize
    }

    pub fn row(&self, x: usize) -> &[u32] {
        &self.d[x * self.n..(x + 1) * self.n]
    }

    pub fn diameter(&self) -> usize {
        self.d.iter().copied().max().unwrap_or(0) as usize
    }

    /// d(x, S) for every x; `usize::MAX` when S is empty.
    pub fn distance_to_set(&self, set: &[bool]) -> Vec<usize> {
        (0..self.n)
            .map(|x| {
                let row = self.row(x);
                (0..self.n).filter(|&y| set[y]).map(|y| row[y] as usize).min().unwrap_or(usize::MAX)
            })
            .collect()
    }
}

/// Edge metric d(γ, γ′) = max(d(x, x′), d(y, y′)).
pub fn edge_metric(g: &WeightedGraph, a: (usize, usize), b: (usize, usize)) -> Result<usize> {
    for (x, y) in [a, b] {
        if g.edge_index(x, y).is_none() {
            return Err(Error::NotAnEdge(x, y));
        }
    }
    Ok(g.bfs(a.0)[b.0].max(g.bfs(a.1)[b.1]))
}

/// μ of the edge ball {γ′ : d(γ, γ′) ≤ r}.
pub fn edge_ball_measure(g: &WeightedGraph, gamma: (usize, usize), r: usize) -> Result<f64> {
    let (x, y) = gamma;
    if g.edge_index(x, y).is_none() {
        return Err(Error::NotAnEdge(x, y));
    }
    let dx = g.bfs(x);
    let dy = g.bfs(y);
    Ok(g.edges().iter().filter(|&&(u, v, _)| dx[u] <= r && dy[v] <= r).map(|&(_, _, w)| w).sum())
}

/// Largest α with μ_xy ≥ α m(x) on all edges, together with vertices lacking a self-loop.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaAlpha {
    pub alpha: f64,
    pub missing_self_loops: Vec<usize>,
}

pub fn delta_alpha(g: &WeightedGraph) -> DeltaAlpha {
    let missing: Vec<usize> = (0..g.vertex_count()).filter(|&x| g.edge_index(x, x).is_none()).collect();
    if !missing.is_empty() {
        return DeltaAlpha { alpha: 0.0, missing_self_loops: missing };
    }
    let alpha = (0..g.vertex_count())
        .flat_map(|x| g.neighbors(x).map(move |(_, w)| w / g.mass(x)))
        .fold(f64::INFINITY, f64::min);
    DeltaAlpha { alpha, missing_self_loops: missing }
}

/// Empirical doubling constant sup V(x, 2r)/V(x, r) and a fitted volume exponent.
pub fn doubling_report(g: &WeightedGraph, centers: &[usize], radii: &[usize]) -> Result<InequalityReport> {
    if centers.is_empty() || radii.is_empty() || radii.contains(&0) {
        return Err(Error::EmptySample);
    }
    let mut report =
        InequalityReport::new("D", Method::Enumeration).param("centers", centers.len()).param("radii", radii.to_vec());
    let mut sup = 0.0f64;
    let mut clipped = 0usize;
    let (mut sx, mut sy, mut sxx, mut sxy, mut count) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let mut per_radius = vec![0.0f64; radii.len()];
    for &x in centers {
        g.check_vertex(x)?;
        let dist = g.bfs(x);
        for (i, &r) in radii.iter().enumerate() {
            let v = volume(g, &Ball::from_distances(x, r, &dist));
            let outer = Ball::from_distances(x, 2 * r, &dist);
            if outer.is_clipped(g) {
                clipped += 1;
            }
            let ratio = volume(g, &outer) / v;
            per_radius[i] = per_radius[i].max(ratio);
            sup = sup.max(ratio);
            let (lr, lv) = ((r as f64).ln(), v.ln());
            sx += lr;
            sy += lv;
            sxx += lr * lr;
            sxy += lr * lv;
            count += 1.0;
        }
    }
    let denom = count * sxx - sx * sx;
    let exponent = if denom > 0.0 { (count * sxy - sx * sy) / denom } else { f64::NAN };
    for (i, &r) in radii.iter().enumerate() {
        report.push_row("doubling_ratio", r as f64, per_radius[i]);
    }
    report.push_constant("doubling", sup, Method::Enumeration, "sup V(x,2r)/V(x,r) over samples");
    report.push_constant("exponent", exponent, Method::Enumeration, "least-squares slope of log V against log r");
    if clipped > 0 {
        report.flag(format!("{clipped} sample(s) with B(x,2r) equal to the whole graph"));
    }
    report.verdict = Verdict::Estimate;
    Ok(report)
}
