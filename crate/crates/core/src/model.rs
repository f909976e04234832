//! Two-factor Bergomi model state: parameters, instantaneous variance,
//! sampling-box bounds and the deterministic-factor boundary estimate.

use crate::analytic::{bs_vanilla, BsInputs, OptionKind};
use crate::curve::ForwardVarianceCurve;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Strike, fixed across the whole workbench.
pub const STRIKE: f64 = 100.0;

/// Model parameters. `k1 < k2` is the long/short factor naming convention;
/// the formulas are symmetric in the factors so it is not enforced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BergomiParams {
    /// Vol-of-vol scale.
    pub omega: f64,
    pub k1: f64,
    pub k2: f64,
    /// Mixing weight between the two factors, in [0, 1].
    pub theta: f64,
    /// Spot/factor correlations.
    pub rho1: f64,
    pub rho2: f64,
    /// Factor/factor correlation.
    pub rho12: f64,
    pub r: f64,
    pub q: f64,
    pub curve: ForwardVarianceCurve,
}

impl BergomiParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("omega", self.omega),
            ("k1", self.k1),
            ("k2", self.k2),
            ("theta", self.theta),
            ("rho1", self.rho1),
            ("rho2", self.rho2),
            ("rho12", self.rho12),
            ("r", self.r),
            ("q", self.q),
        ] {
            if !v.is_finite() {
                return Err(Error::domain(format!("non-finite parameter {name}")));
            }
        }
        if self.omega < 0.0 {
            return Err(Error::domain("omega must be non-negative"));
        }
        if self.k1 <= 0.0 || self.k2 <= 0.0 {
            return Err(Error::domain("mean reversions must be positive"));
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::domain("theta must lie in [0, 1]"));
        }
        for rho in [self.rho1, self.rho2, self.rho12] {
            if !(-1.0..=1.0).contains(&rho) {
                return Err(Error::domain("correlations must lie in [-1, 1]"));
            }
        }
        // Positive semidefiniteness of the 3x3 Brownian correlation matrix.
        let w = ((1.0 - self.rho1 * self.rho1) * (1.0 - self.rho2 * self.rho2)).sqrt();
        if self.rho12 < self.rho1 * self.rho2 - w - 1e-12
            || self.rho12 > self.rho1 * self.rho2 + w + 1e-12
        {
            return Err(Error::domain(
                "rho12 violates the positive-semidefiniteness bound",
            ));
        }
        Ok(())
    }
}

/// One evaluation point of the option surface: PDE variables plus every model
/// input. The strike is the global [`STRIKE`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamPoint {
    /// Log-price.
    pub s: f64,
    /// Current time.
    pub t: f64,
    pub x1: f64,
    pub x2: f64,
    pub maturity: f64,
    /// Barrier level; carried (and sampled) for vanilla kinds as well so that
    /// the network input layout is identical across kinds.
    pub barrier: f64,
    pub params: BergomiParams,
    pub kind: OptionKind,
}

impl ParamPoint {
    pub fn tau(&self) -> f64 {
        self.maturity - self.t
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(0.0 <= self.t && self.t <= self.maturity && self.maturity <= self.params.curve.horizon())
        {
            return Err(Error::domain(format!(
                "need 0 <= t <= T <= {}, got t={} T={}",
                self.params.curve.horizon(),
                self.t,
                self.maturity
            )));
        }
        if self.barrier <= 0.0 {
            return Err(Error::domain("barrier must be positive"));
        }
        let (x1b, x2b) = factor_bounds(&self.params);
        if self.x1.abs() > x1b + 1e-9 || self.x2.abs() > x2b + 1e-9 {
            return Err(Error::domain("factor value outside its sampling box"));
        }
        Ok(())
    }
}

/// Normalizer for the two-factor mixing weights:
/// `1 / sqrt((1-theta)^2 + theta^2 + 2 rho12 theta (1-theta))`.
pub fn alpha_theta(theta: f64, rho12: f64) -> Result<f64> {
    let radicand = (1.0 - theta) * (1.0 - theta) + theta * theta + 2.0 * rho12 * theta * (1.0 - theta);
    if radicand <= 0.0 {
        return Err(Error::domain(format!(
            "alpha_theta radicand {radicand} must be positive"
        )));
    }
    Ok(1.0 / radicand.sqrt())
}

/// Closed-form variance of the mixed factor x_t^t.
pub fn var_xtt(t: f64, k1: f64, k2: f64, theta: f64, rho12: f64) -> Result<f64> {
    if t < 0.0 {
        return Err(Error::domain("var_xtt requires t >= 0"));
    }
    let a = alpha_theta(theta, rho12)?;
    let one_m = 1.0 - theta;
    let term1 = one_m * one_m * (1.0 - (-2.0 * k1 * t).exp()) / (2.0 * k1);
    let term2 = theta * theta * (1.0 - (-2.0 * k2 * t).exp()) / (2.0 * k2);
    let cross = 2.0 * theta * one_m * rho12 * (1.0 - (-(k1 + k2) * t).exp()) / (k1 + k2);
    Ok(a * a * (term1 + term2 + cross))
}

/// Instantaneous variance `xi_t^t` given the factor values:
/// `xi_0^t exp(omega x_t^t - omega^2/2 var(x_t^t))`. The square root of this
/// is the diffusion coefficient of the pricing PDE.
pub fn xi_inst(t: f64, x1: f64, x2: f64, params: &BergomiParams) -> Result<f64> {
    let xi0 = params.curve.value_at(t)?;
    if params.omega == 0.0 {
        return Ok(xi0);
    }
    let a = alpha_theta(params.theta, params.rho12)?;
    let xtt = a * ((1.0 - params.theta) * x1 + params.theta * x2);
    let var = var_xtt(t, params.k1, params.k2, params.theta, params.rho12)?;
    Ok(xi0 * (params.omega * xtt - 0.5 * params.omega * params.omega * var).exp())
}

/// Half-width of the factor sampling box, `3 sqrt(1/(2 k_j) + 0.01)`: three
/// standard deviations of the stationary factor distribution plus the
/// variance floor used by the sampler.
pub fn factor_bound(k: f64) -> f64 {
    3.0 * (1.0 / (2.0 * k) + 0.01).sqrt()
}

pub fn factor_bounds(params: &BergomiParams) -> (f64, f64) {
    (factor_bound(params.k1), factor_bound(params.k2))
}

/// Training-box bounds for one point: the log-price interval (truncated at the
/// barrier for barrier kinds) and the symmetric factor intervals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainBounds {
    pub s_lo: f64,
    pub s_hi: f64,
    pub x1: f64,
    pub x2: f64,
}

/// Bounds used by the losses and the sampler. `ln(K/20) <= s <= ln(20 K)` for
/// vanillas, with the barrier side replaced by `ln B` for barrier kinds.
pub fn domain_bounds(kind: OptionKind, barrier: f64, params: &BergomiParams) -> DomainBounds {
    let (x1, x2) = factor_bounds(params);
    let lo = (STRIKE / 20.0).ln();
    let hi = (20.0 * STRIKE).ln();
    let (s_lo, s_hi) = match kind.zeta() {
        None => (lo, hi),
        Some(z) if z > 0.0 => (lo, barrier.ln()),
        Some(_) => (barrier.ln(), hi),
    };
    DomainBounds { s_lo, s_hi, x1, x2 }
}

/// Narrower log-price range used for held-out test points,
/// `ln(K/2) <= s <= ln(2K)` intersected with the barrier constraint.
pub fn test_s_range(kind: OptionKind, barrier: f64) -> (f64, f64) {
    let lo = (STRIKE / 2.0).ln();
    let hi = (2.0 * STRIKE).ln();
    match kind.zeta() {
        None => (lo, hi),
        Some(z) if z > 0.0 => (lo, barrier.ln()),
        Some(_) => (barrier.ln(), hi),
    }
}

/// Deterministic instantaneous variance along the drift-only factor paths
/// `x_j e^{-k_j (u - t)}`, used by [`boundary_estimate`].
fn xi_deterministic(u: f64, t: f64, x1: f64, x2: f64, params: &BergomiParams) -> Result<f64> {
    let xi0 = params.curve.value_at(u)?;
    if params.omega == 0.0 {
        return Ok(xi0);
    }
    let a = alpha_theta(params.theta, params.rho12)?;
    let xt = a
        * ((1.0 - params.theta) * x1 * (-params.k1 * (u - t)).exp()
            + params.theta * x2 * (-params.k2 * (u - t)).exp());
    let var = var_xtt(u, params.k1, params.k2, params.theta, params.rho12)?;
    Ok(xi0 * (params.omega * xt - 0.5 * params.omega * params.omega * var).exp())
}

/// Effective volatility of the degenerate model over `[t, T]`: the factors
/// follow their drift only, the variance becomes a deterministic function of
/// time and the model collapses to Black-Scholes. Composite Simpson with 64
/// subintervals per curve segment, so the step discontinuities of the curve
/// fall on panel boundaries.
pub fn boundary_effective_vol(point: &ParamPoint, x1: f64, x2: f64) -> Result<f64> {
    let (t, maturity) = (point.t, point.maturity);
    if t >= maturity {
        return Err(Error::domain("boundary estimate requires t < T"));
    }
    let p = &point.params;
    let mut cuts = vec![t];
    cuts.extend(p.curve.interior_nodes(t, maturity));
    cuts.push(maturity);

    let mut integral = 0.0;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let n = 64usize;
        let h = (b - a) / n as f64;
        let mut acc = xi_deterministic(a, t, x1, x2, p)? + xi_deterministic(b, t, x1, x2, p)?;
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * xi_deterministic(a + h * i as f64, t, x1, x2, p)?;
        }
        integral += acc * h / 3.0;
    }
    if !integral.is_finite() {
        return Err(Error::numeric("boundary estimate quadrature diverged"));
    }
    Ok((integral / (maturity - t)).sqrt())
}

/// Vanilla price of the degenerate (deterministic-factor) model at the given
/// factor values; the anchor value for the factor-boundary loss terms.
pub fn boundary_estimate_at(point: &ParamPoint, x1: f64, x2: f64) -> Result<f64> {
    if !point.kind.is_vanilla() {
        return Err(Error::usage(
            "boundary estimate is defined for vanilla kinds only",
        ));
    }
    let sigma = boundary_effective_vol(point, x1, x2)?;
    bs_vanilla(&BsInputs {
        s: point.s,
        strike: STRIKE,
        barrier: point.barrier,
        tau: point.tau(),
        sigma,
        r: point.params.r,
        q: point.params.q,
        kind: point.kind,
    })
}

/// [`boundary_estimate_at`] evaluated at the point's own factor values.
pub fn boundary_estimate(point: &ParamPoint) -> Result<f64> {
    boundary_estimate_at(point, point.x1, point.x2)
}

#[cfg(test)]
pub(crate) fn test_params(omega: f64, curve: ForwardVarianceCurve) -> BergomiParams {
    BergomiParams {
        omega,
        k1: 1.0,
        k2: 10.0,
        theta: 0.5,
        rho1: -0.5,
        rho2: -0.5,
        rho12: 0.0,
        r: 0.0,
        q: 0.0,
        curve,
    }
}
