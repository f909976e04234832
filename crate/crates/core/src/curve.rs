//! Forward-variance curve: a step function on fixed nodes with exact
//! integration.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Node grid of the nine-segment curve, in year fractions.
pub const NINE_SEGMENT_NODES: [f64; 9] = [
    1.0 / 52.0,
    1.0 / 26.0,
    1.0 / 12.0,
    1.0 / 6.0,
    0.25,
    0.5,
    1.0,
    2.0,
    3.0,
];

/// Horizon covered by every curve; also the maximum maturity.
pub const CURVE_HORIZON: f64 = 3.0;

/// Piecewise-constant initial forward variance. Segment `j` covers
/// `(nodes[j-1], nodes[j]]` with the first segment starting at 0; lookup at
/// exactly a node returns the left segment's value, and `value_at(0)` returns
/// the first segment's value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForwardVarianceCurve {
    nodes: Vec<f64>,
    values: Vec<f64>,
}

impl ForwardVarianceCurve {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != values.len() {
            return Err(Error::domain(
                "curve needs one value per node and at least one segment",
            ));
        }
        if !nodes.windows(2).all(|w| w[0] < w[1]) || nodes[0] <= 0.0 {
            return Err(Error::domain("curve nodes must be positive and strictly increasing"));
        }
        if values.iter().any(|&v| !v.is_finite() || v < 0.0) {
            return Err(Error::domain("curve values must be finite and non-negative"));
        }
        Ok(ForwardVarianceCurve { nodes, values })
    }

    /// Single segment spanning the full horizon.
    pub fn constant(value: f64) -> Result<Self> {
        ForwardVarianceCurve::new(vec![CURVE_HORIZON], vec![value])
    }

    /// Nine-segment curve on the standard node grid.
    pub fn nine_segment(values: [f64; 9]) -> Result<Self> {
        ForwardVarianceCurve::new(NINE_SEGMENT_NODES.to_vec(), values.to_vec())
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn num_segments(&self) -> usize {
        self.values.len()
    }

    pub fn horizon(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    /// Step-function value at `t`.
    pub fn value_at(&self, t: f64) -> Result<f64> {
        if !(0.0..=self.horizon()).contains(&t) {
            return Err(Error::domain(format!(
                "curve lookup at t={t} outside [0, {}]",
                self.horizon()
            )));
        }
        let j = self.nodes.partition_point(|&n| n < t);
        Ok(self.values[j.min(self.values.len() - 1)])
    }

    /// Exact integral of the step function over `[a, b]`.
    pub fn integrate(&self, a: f64, b: f64) -> Result<f64> {
        if a > b {
            return Err(Error::domain("integrate: a > b"));
        }
        if a < 0.0 || b > self.horizon() + 1e-12 {
            return Err(Error::domain(format!(
                "integrate: [{a}, {b}] outside curve support [0, {}]",
                self.horizon()
            )));
        }
        let mut acc = 0.0;
        let mut left = a;
        for (j, &node) in self.nodes.iter().enumerate() {
            if left >= b {
                break;
            }
            let right = node.min(b);
            if right > left {
                acc += self.values[j] * (right - left);
                left = right;
            }
        }
        Ok(acc)
    }

    /// Root-mean-square volatility of the curve over `[t, T]`:
    /// `sqrt(integral of xi / (T - t))`, exact for the step function.
    pub fn avg_sigma(&self, t: f64, maturity: f64) -> Result<f64> {
        if t >= maturity {
            return Err(Error::domain("avg_sigma requires t < T"));
        }
        Ok((self.integrate(t, maturity)? / (maturity - t)).sqrt())
    }

    /// Time derivative of `avg_sigma(t, T)` with respect to `t`, away from
    /// nodes: d/dt sqrt(I(t,T)/(T-t)) = (sigma_bar^2 - xi(t)) / (2 sigma_bar (T-t)).
    pub fn avg_sigma_dt(&self, t: f64, maturity: f64) -> Result<f64> {
        let sbar = self.avg_sigma(t, maturity)?;
        if sbar == 0.0 {
            return Ok(0.0);
        }
        let xi_t = self.value_at(t)?;
        Ok((sbar * sbar - xi_t) / (2.0 * sbar * (maturity - t)))
    }

    /// Interior segment boundaries strictly inside `(a, b)`, used to align
    /// integration grids with the discontinuities.
    pub fn interior_nodes(&self, a: f64, b: f64) -> Vec<f64> {
        self.nodes
            .iter()
            .copied()
            .filter(|&n| n > a && n < b)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn constant_curve_avg_sigma() {
        let c = ForwardVarianceCurve::constant(0.04).unwrap();
        for &(t, mt) in &[(0.0, 1.0), (0.3, 2.7), (1.0, 1.0 + 1e-6)] {
            assert!((c.avg_sigma(t, mt).unwrap() - 0.2).abs() < 1e-12);
        }
        assert!(c.avg_sigma(1.0, 1.0).is_err());
    }

    #[test]
    fn two_segment_mean_variance() {
        let c = ForwardVarianceCurve::new(vec![1.0, 2.0], vec![0.01, 0.09]).unwrap();
        let got = c.avg_sigma(0.0, 2.0).unwrap();
        assert!((got - 0.05f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn node_lookup_uses_left_segment() {
        let c = ForwardVarianceCurve::new(vec![1.0, 2.0], vec![0.01, 0.09]).unwrap();
        assert_eq!(c.value_at(1.0).unwrap(), 0.01);
        assert_eq!(c.value_at(1.0 + 1e-12).unwrap(), 0.09);
        assert_eq!(c.value_at(0.0).unwrap(), 0.01);
        assert!(c.value_at(2.5).is_err());
    }

    #[test]
    fn nine_segment_matches_riemann_sum() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let mut vals = [0.0; 9];
            for v in &mut vals {
                *v = rng.gen_range(0.0025..0.25);
            }
            let c = ForwardVarianceCurve::nine_segment(vals).unwrap();
            let t = rng.gen_range(0.0..2.0);
            let mt = rng.gen_range(t + 0.1..3.0);
            // Fine Riemann sum with midpoint rule (never lands on a node).
            let n = 2_000_000;
            let h = (mt - t) / n as f64;
            let mut acc = 0.0;
            for i in 0..n {
                acc += c.value_at(t + (i as f64 + 0.5) * h).unwrap();
            }
            let oracle = (acc * h / (mt - t)).sqrt();
            let got = c.avg_sigma(t, mt).unwrap();
            assert!(
                (got - oracle).abs() / oracle <= 1e-6,
                "exact {got} vs riemann {oracle}"
            );
        }
    }

    #[test]
    fn refinement_invariance() {
        // Splitting a segment into equal-valued pieces must not change the average.
        let c1 = ForwardVarianceCurve::constant(0.09).unwrap();
        let c2 = ForwardVarianceCurve::new(vec![0.5, 1.1, 3.0], vec![0.09, 0.09, 0.09]).unwrap();
        for &(t, mt) in &[(0.0, 3.0), (0.2, 1.7), (1.05, 1.15)] {
            let a = c1.avg_sigma(t, mt).unwrap();
            let b = c2.avg_sigma(t, mt).unwrap();
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn avg_sigma_dt_matches_finite_differences() {
        let c = ForwardVarianceCurve::nine_segment([
            0.04, 0.05, 0.03, 0.08, 0.02, 0.06, 0.07, 0.04, 0.09,
        ])
        .unwrap();
        // Stay away from nodes where the derivative jumps.
        for &t in &[0.01, 0.1, 0.3, 0.7, 1.4] {
            let mt = 2.5;
            let h = 1e-7;
            let fd = (c.avg_sigma(t + h, mt).unwrap() - c.avg_sigma(t - h, mt).unwrap()) / (2.0 * h);
            let an = c.avg_sigma_dt(t, mt).unwrap();
            assert!((fd - an).abs() < 1e-6, "t={t}: fd {fd} vs analytic {an}");
        }
    }
}
