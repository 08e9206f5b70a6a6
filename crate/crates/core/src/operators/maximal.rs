use super::VertexFunction;
use crate::error::Result;
use crate::graph::{DistanceMatrix, WeightedGraph};

/// Mf(x) = sup over balls B ∋ x of V(B)^{−1} Σ_B |f| m, enumerating every centre and radius.
pub fn maximal_function(g: &WeightedGraph, f: &VertexFunction) -> Result<VertexFunction> {
    f.check(g)?;
    let dm = DistanceMatrix::new(g);
    VertexFunction::new(g, maximal_values(g, &dm, f.values()))
}

/// [`maximal_function`] on raw values with a precomputed distance matrix.
///
/// For a centre z, write A(z, r) for the average over B(z, r) and S(z, ρ) = max_{r ≥ ρ} A(z, r).
/// The balls centred at z that contain x are those with r ≥ d(x, z), so
/// Mf(x) = max_z S(z, d(x, z)).
pub fn maximal_values(g: &WeightedGraph, dm: &DistanceMatrix, f: &[f64]) -> Vec<f64> {
    let n = g.vertex_count();
    let m = g.masses();
    let diam = dm.diameter();
    let mut best = vec![0.0f64; n];
    let mut shell_num = vec![0.0f64; diam + 1];
    let mut shell_den = vec![0.0f64; diam + 1];
    let mut suffix = vec![0.0f64; diam + 1];
    for z in 0..n {
        let row = dm.row(z);
        shell_num.iter_mut().for_each(|v| *v = 0.0);
        shell_den.iter_mut().for_each(|v| *v = 0.0);
        for y in 0..n {
            let r = row[y] as usize;
            shell_num[r] += f[y].abs() * m[y];
            shell_den[r] += m[y];
        }
        let (mut num, mut den) = (0.0, 0.0);
        for r in 0..=diam {
            num += shell_num[r];
            den += shell_den[r];
            suffix[r] = num / den;
        }
        // The point ball averages to |f(z)| exactly.
        suffix[0] = f[z].abs();
        for r in (0..diam).rev() {
            suffix[r] = suffix[r].max(suffix[r + 1]);
        }
        for x in 0..n {
            let s = suffix[row[x] as usize];
            if s > best[x] {
                best[x] = s;
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gen_grid, Ball};
    use crate::rng::{normal_vec, seeded};

    /// Direct enumeration of every ball containing x.
    fn brute(g: &WeightedGraph, f: &[f64]) -> Vec<f64> {
        let n = g.vertex_count();
        let mut out = vec![0.0f64; n];
        for z in 0..n {
            for r in 0..n {
                let b = Ball::new(g, z, r).unwrap();
                let v: f64 = b.members.iter().map(|&y| g.mass(y)).sum();
                let s: f64 = b.members.iter().map(|&y| f[y].abs() * g.mass(y)).sum();
                for &x in &b.members {
                    out[x] = out[x].max(s / v);
                }
            }
        }
        out
    }

    #[test]
    fn agrees_with_enumeration() {
        let g = gen_grid(2, 4, 0.5).unwrap();
        let f = normal_vec(&mut seeded(1), 16);
        let dm = DistanceMatrix::new(&g);
        let fast = maximal_values(&g, &dm, &f);
        for (a, b) in fast.iter().zip(brute(&g, &f)) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn constants_and_point_masses() {
        let g = gen_grid(1, 9, 1.0).unwrap();
        let c = VertexFunction::constant(&g, -2.0);
        for v in maximal_function(&g, &c).unwrap().values() {
            assert!((v - 2.0).abs() < 1e-14);
        }
        let delta = VertexFunction::from_fn(&g, |x| if x == 4 { 1.0 } else { 0.0 });
        assert_eq!(maximal_function(&g, &delta).unwrap().get(4), 1.0);
    }

    #[test]
    fn dominates_the_function() {
        let g = gen_grid(2, 5, 1.0).unwrap();
        let mut rng = seeded(2);
        for _ in 0..20 {
            let f = VertexFunction::new(&g, normal_vec(&mut rng, 25)).unwrap();
            let mf = maximal_function(&g, &f).unwrap();
            assert!(mf.values().iter().zip(f.values()).all(|(m, v)| *m >= v.abs()));
        }
    }
}
