//! Restarted normalized gradient ascent on the logarithm of a scale-invariant ratio.

use crate::rng::{normal_vec, seeded};

/// A degree-zero homogeneous ratio, given through its logarithm and gradient.
pub trait LogRatio: Sync {
    fn dim(&self) -> usize;
    /// log of the ratio at x, writing its gradient into `grad`. Returns `None` where undefined.
    fn eval(&self, x: &[f64], grad: &mut [f64]) -> Option<f64>;
    /// Projection onto the admissible subspace, applied to starts and steps.
    fn project(&self, _x: &mut [f64]) {}
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AscentOptions {
    pub restarts: usize,
    pub steps: usize,
    pub step: f64,
    pub seed: u64,
}

impl Default for AscentOptions {
    fn default() -> Self {
        AscentOptions { restarts: 20, steps: 300, step: 0.1, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AscentResult {
    /// Best ratio found (not its logarithm).
    pub value: f64,
    pub witness: Vec<f64>,
    /// Index of the start that produced the best value; random starts follow the given ones.
    pub start: usize,
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Runs one ascent per start. Given starts come first, then random Gaussian starts until
/// `restarts` runs in total. Steps move by step/√k of ‖x‖ along the normalized gradient.
pub fn ascend<R: LogRatio + ?Sized>(obj: &R, starts: &[Vec<f64>], opts: &AscentOptions) -> AscentResult {
    let n = obj.dim();
    let mut rng = seeded(opts.seed);
    let mut all: Vec<Vec<f64>> = starts.to_vec();
    while all.len() < opts.restarts.max(starts.len()) {
        all.push(normal_vec(&mut rng, n));
    }
    let mut best = AscentResult { value: 0.0, witness: vec![0.0; n], start: 0 };
    let mut best_log = f64::NEG_INFINITY;
    let mut grad = vec![0.0; n];
    for (si, start) in all.into_iter().enumerate() {
        let mut x = start;
        obj.project(&mut x);
        let Some(mut cur) = obj.eval(&x, &mut grad) else { continue };
        if cur > best_log {
            best_log = cur;
            best.witness = x.clone();
            best.start = si;
        }
        for k in 1..=opts.steps {
            obj.project(&mut grad);
            let (gn, xn) = (norm(&grad), norm(&x));
            if !(gn > 0.0) || !gn.is_finite() || !(xn > 0.0) {
                break;
            }
            let eta = opts.step / (k as f64).sqrt() * xn / gn;
            let trial: Vec<f64> = x.iter().zip(&grad).map(|(a, g)| a + eta * g).collect();
            let mut tg = vec![0.0; n];
            match obj.eval(&trial, &mut tg) {
                Some(v) if v.is_finite() => {
                    x = trial;
                    grad = tg;
                    cur = v;
                }
                _ => break,
            }
            if cur > best_log {
                best_log = cur;
                best.witness = x.clone();
                best.start = si;
            }
        }
    }
    best.value = if best_log.is_finite() { best_log.exp() } else { 0.0 };
    best
}

/// Evaluates a ratio on a list of candidates without ascent and returns the best.
pub fn best_of<R: LogRatio + ?Sized>(obj: &R, candidates: &[Vec<f64>]) -> AscentResult {
    let mut grad = vec![0.0; obj.dim()];
    let mut best = AscentResult { value: 0.0, witness: vec![0.0; obj.dim()], start: 0 };
    let mut best_log = f64::NEG_INFINITY;
    for (i, c) in candidates.iter().enumerate() {
        let mut x = c.clone();
        obj.project(&mut x);
        if let Some(v) = obj.eval(&x, &mut grad) {
            if v > best_log {
                best_log = v;
                best.witness = x;
                best.start = i;
            }
        }
    }
    best.value = if best_log.is_finite() { best_log.exp() } else { 0.0 };
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    /// log of the Rayleigh quotient xᵀAx / xᵀx for a diagonal A.
    struct Rayleigh(Vec<f64>);

    impl LogRatio for Rayleigh {
        fn dim(&self) -> usize {
            self.0.len()
        }
        fn eval(&self, x: &[f64], grad: &mut [f64]) -> Option<f64> {
            let num: f64 = x.iter().zip(&self.0).map(|(v, a)| a * v * v).sum();
            let den: f64 = x.iter().map(|v| v * v).sum();
            if num <= 0.0 || den <= 0.0 {
                return None;
            }
            for ((g, v), a) in grad.iter_mut().zip(x).zip(&self.0) {
                *g = 2.0 * a * v / num - 2.0 * v / den;
            }
            Some((num / den).ln())
        }
    }

    #[test]
    fn finds_the_top_eigenvalue() {
        let obj = Rayleigh(vec![1.0, 2.0, 5.0, 3.0]);
        let r = ascend(&obj, &[], &AscentOptions { steps: 2000, ..Default::default() });
        assert!(r.value <= 5.0 + 1e-12 && r.value > 4.99, "{}", r.value);
    }

    #[test]
    fn deterministic_for_a_seed() {
        let obj = Rayleigh(vec![1.0, 4.0, 2.0]);
        let o = AscentOptions { seed: 9, ..Default::default() };
        assert_eq!(ascend(&obj, &[], &o), ascend(&obj, &[], &o));
    }

    #[test]
    fn best_of_picks_the_largest() {
        let obj = Rayleigh(vec![1.0, 3.0]);
        let r = best_of(&obj, &[vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(r.start, 1);
        assert!((r.value - 3.0).abs() < 1e-14);
    }
}
