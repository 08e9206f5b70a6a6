//! Ratios of L^p norms of linear images, in the shape the ascent engine expects.

use super::ascent::LogRatio;
use crate::graph::WeightedGraph;
use crate::operators::grad_power_sum;
use nalgebra::{DMatrix, DVector};

/// One side of a ratio: ‖∇(Ax)‖_p, ‖d(Ax)‖_{L^p(E)} or ‖Ax‖_p, with A the identity when absent.
pub enum Side {
    Grad(Option<DMatrix<f64>>),
    Edge(Option<DMatrix<f64>>),
    Lp(Option<DMatrix<f64>>),
}

impl Side {
    fn matrix(&self) -> Option<&DMatrix<f64>> {
        match self {
            Side::Grad(a) | Side::Edge(a) | Side::Lp(a) => a.as_ref(),
        }
    }

    /// Σ |·|^p m and its gradient with respect to x.
    fn power_sum(&self, g: &WeightedGraph, p: f64, x: &[f64], grad: &mut [f64]) -> f64 {
        let u: Vec<f64> = match self.matrix() {
            Some(a) => (a * DVector::from_column_slice(x)).as_slice().to_vec(),
            None => x.to_vec(),
        };
        let mut du = vec![0.0; u.len()];
        let s = match self {
            Side::Grad(_) => grad_power_sum(g, &u, p, Some(&mut du)),
            Side::Edge(_) => {
                let mut s = 0.0;
                for x in 0..u.len() {
                    for (y, w) in g.neighbors(x) {
                        let t = u[y] - u[x];
                        s += 0.5 * w * t.abs().powf(p);
                        let c = 0.5 * p * w * t.abs().powf(p - 1.0) * t.signum();
                        du[y] += c;
                        du[x] -= c;
                    }
                }
                s
            }
            Side::Lp(_) => {
                let mut s = 0.0;
                for ((d, v), m) in du.iter_mut().zip(&u).zip(g.masses()) {
                    let a = v.abs();
                    s += a.powf(p) * m;
                    *d = p * a.powf(p - 1.0) * v.signum() * m;
                }
                s
            }
        };
        match self.matrix() {
            Some(a) => grad.copy_from_slice((a.transpose() * DVector::from_vec(du)).as_slice()),
            None => grad.copy_from_slice(&du),
        }
        s
    }

    pub fn norm(&self, g: &WeightedGraph, p: f64, x: &[f64]) -> f64 {
        let mut scratch = vec![0.0; x.len()];
        self.power_sum(g, p, x, &mut scratch).powf(1.0 / p)
    }
}

/// ‖num(x)‖_p / ‖den(x)‖_p.
pub struct LinearRatio<'a> {
    pub g: &'a WeightedGraph,
    pub num: Side,
    pub den: Side,
    pub p: f64,
}

impl LinearRatio<'_> {
    pub fn value(&self, x: &[f64]) -> f64 {
        self.num.norm(self.g, self.p, x) / self.den.norm(self.g, self.p, x)
    }
}

impl LogRatio for LinearRatio<'_> {
    fn dim(&self) -> usize {
        self.g.vertex_count()
    }

    fn eval(&self, x: &[f64], grad: &mut [f64]) -> Option<f64> {
        let n = x.len();
        let mut gn = vec![0.0; n];
        let mut gd = vec![0.0; n];
        let a = self.num.power_sum(self.g, self.p, x, &mut gn);
        let b = self.den.power_sum(self.g, self.p, x, &mut gd);
        // Below this the denominator is rounding noise on a kernel element.
        if !(a > 0.0 && b > 1e-300) || !(a.is_finite() && b.is_finite()) {
            return None;
        }
        let xs: f64 = x.iter().zip(self.g.masses()).map(|(v, m)| v.abs().powf(self.p) * m).sum();
        if b <= 1e-24 * xs {
            return None;
        }
        for i in 0..n {
            grad[i] = (gn[i] / a - gd[i] / b) / self.p;
        }
        Some((a.ln() - b.ln()) / self.p)
    }
}
