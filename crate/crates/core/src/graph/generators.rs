use super::{WeightedGraph, DEFAULT_DENSE_CAP};
use crate::error::{Error, Result};

/// Lazy box grid {0..side−1}^dim with unit nearest-neighbour weights.
///
/// Each vertex carries a self-loop of weight `laziness · degree`, so
/// p(x, x) = laziness / (1 + laziness) everywhere.
pub fn gen_grid(dim: usize, side: usize, laziness: f64) -> Result<WeightedGraph> {
    gen_grid_capped(dim, side, laziness, DEFAULT_DENSE_CAP)
}

/// [`gen_grid`] with an explicit vertex cap.
pub fn gen_grid_capped(dim: usize, side: usize, laziness: f64, cap: usize) -> Result<WeightedGraph> {
    if !(1..=3).contains(&dim) {
        return Err(Error::InvalidParameter(format!("grid dimension {dim} not in 1..=3")));
    }
    if side < 2 {
        return Err(Error::InvalidParameter(format!("grid side {side} < 2")));
    }
    if !(laziness > 0.0) || !laziness.is_finite() {
        return Err(Error::InvalidParameter(format!("laziness {laziness} must be positive")));
    }
    let n = side
        .checked_pow(dim as u32)
        .filter(|&n| n <= cap)
        .ok_or(Error::SizeOverflow { requested: side.saturating_pow(dim as u32), cap })?;
    let mut entries = Vec::new();
    let mut degree = vec![0usize; n];
    let mut stride = 1;
    for _ in 0..dim {
        for v in 0..n {
            if (v / stride) % side + 1 < side {
                entries.push((v, v + stride, 1.0));
                degree[v] += 1;
                degree[v + stride] += 1;
            }
        }
        stride *= side;
    }
    entries.extend((0..n).map(|v| (v, v, laziness * degree[v] as f64)));
    WeightedGraph::build(n, &entries)
}

/// Two lazy `side × side` grids joined by one unit edge between their centre vertices.
///
/// Copy `c` occupies indices `c·side² .. (c+1)·side²`. The bridge endpoints get one
/// extra unit of self-loop weight so the laziness stays uniform.
pub fn gen_dumbbell(side: usize) -> Result<WeightedGraph> {
    if side < 3 {
        return Err(Error::InvalidParameter(format!("dumbbell side {side} < 3")));
    }
    let copy = side * side;
    if 2 * copy > DEFAULT_DENSE_CAP {
        return Err(Error::SizeOverflow { requested: 2 * copy, cap: DEFAULT_DENSE_CAP });
    }
    let grid = gen_grid(2, side, 1.0)?;
    let centre = (side / 2) * side + side / 2;
    let mut entries = Vec::new();
    for offset in [0, copy] {
        for (x, y, w) in grid.edges() {
            if x <= y {
                let bump = if x == centre && y == centre { 1.0 } else { 0.0 };
                entries.push((x + offset, y + offset, w + bump));
            }
        }
    }
    entries.push((centre, copy + centre, 1.0));
    WeightedGraph::build(2 * copy, &entries)
}

/// Bridge endpoints of [`gen_dumbbell`].
pub fn dumbbell_bridge(side: usize) -> (usize, usize) {
    let centre = (side / 2) * side + side / 2;
    (centre, side * side + centre)
}

/// Cycle on `n ≥ 3` vertices with unit edges and self-loops of weight `self_weight`.
pub fn gen_cycle(n: usize, self_weight: f64) -> Result<WeightedGraph> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("cycle length {n} < 3")));
    }
    if !(self_weight > 0.0) || !self_weight.is_finite() {
        return Err(Error::InvalidParameter(format!("self weight {self_weight} must be positive")));
    }
    if n > DEFAULT_DENSE_CAP {
        return Err(Error::SizeOverflow { requested: n, cap: DEFAULT_DENSE_CAP });
    }
    let mut entries: Vec<_> = (0..n).map(|v| (v, (v + 1) % n, 1.0)).collect();
    entries.extend((0..n).map(|v| (v, v, self_weight)));
    WeightedGraph::build(n, &entries)
}

/// Complete `branching`-ary tree with `depth` levels below the root, heap-ordered.
///
/// Self-loops equal the vertex degree (laziness 1).
pub fn gen_tree(branching: usize, depth: usize) -> Result<WeightedGraph> {
    if branching < 1 {
        return Err(Error::InvalidParameter("tree branching must be at least 1".into()));
    }
    let mut n: usize = 0;
    let mut level: usize = 1;
    for _ in 0..=depth {
        n = n
            .checked_add(level)
            .filter(|&n| n <= DEFAULT_DENSE_CAP)
            .ok_or(Error::SizeOverflow { requested: usize::MAX, cap: DEFAULT_DENSE_CAP })?;
        level = level.saturating_mul(branching);
    }
    let mut entries = Vec::new();
    let mut degree = vec![0usize; n];
    for child in 1..n {
        let parent = (child - 1) / branching;
        entries.push((parent, child, 1.0));
        degree[parent] += 1;
        degree[child] += 1;
    }
    entries.extend((0..n).map(|v| (v, v, degree[v].max(1) as f64)));
    WeightedGraph::build(n, &entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_vertex_grid_is_the_lazy_pair() {
        let g = gen_grid(1, 2, 1.0).unwrap();
        assert_eq!(g.edges(), vec![(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)]);
    }

    #[test]
    fn grid_interior_vertex_has_four_neighbours() {
        let g = gen_grid(2, 4, 1.0).unwrap();
        assert_eq!(g.vertex_count(), 16);
        let interior = 4 + 1;
        let nbrs: Vec<_> = g.neighbors(interior).map(|(y, _)| y).collect();
        assert_eq!(nbrs, vec![1, 4, 5, 6, 9]);
        assert_eq!(g.weight(interior, interior), 4.0);
    }

    #[test]
    fn three_dimensional_grid() {
        let g = gen_grid(3, 3, 0.5).unwrap();
        assert_eq!(g.vertex_count(), 27);
        assert_eq!(g.neighbors(13).count(), 7);
    }

    #[test]
    fn grid_cap() {
        assert!(matches!(gen_grid(2, 65, 1.0), Err(Error::SizeOverflow { .. })));
        assert!(gen_grid_capped(2, 65, 1.0, 10_000).is_ok());
    }

    #[test]
    fn dumbbell_has_one_bridge() {
        let g = gen_dumbbell(3).unwrap();
        assert_eq!(g.vertex_count(), 18);
        let crossing = g.edges().iter().filter(|&&(x, y, _)| x < 9 && y >= 9).count();
        assert_eq!(crossing, 1);
    }

    #[test]
    fn dumbbell_bridge_endpoint_degree() {
        let g = gen_dumbbell(4).unwrap();
        let (a, b) = dumbbell_bridge(4);
        for v in [a, b] {
            let others = g.neighbors(v).filter(|&(y, _)| y != v).count();
            assert_eq!(others, 5);
            assert_eq!(g.weight(v, v), 5.0);
        }
    }

    #[test]
    fn tree_vertex_count() {
        assert_eq!(gen_tree(2, 3).unwrap().vertex_count(), 15);
    }

    #[test]
    fn cycle_is_connected() {
        let g = gen_cycle(3, 1.0).unwrap();
        assert_eq!(g.vertex_count(), 3);
        assert!(g.masses().iter().all(|&m| m == 3.0));
    }
}
