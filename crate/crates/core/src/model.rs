//! Model parameters and the derived rate constants every other module consumes.

use crate::combin::binomial_f64;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Inputs of the two-community d-uniform hypergraph block model.
///
/// Monochromatic d-subsets appear with probability `a / C(n, d-1)`, mixed ones
/// with `b / C(n, d-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Vertex count.
    pub n: usize,
    /// Hyperedge size (d = 2 recovers ordinary graphs).
    pub d: usize,
    /// Same-community rate constant.
    pub a: f64,
    /// Cross-community rate constant.
    pub b: f64,
    /// RNG seed; all randomness of a run flows from it.
    pub seed: u64,
}

impl ModelParams {
    pub fn new(n: usize, d: usize, a: f64, b: f64, seed: u64) -> Result<Self> {
        let p = Self { n, d, a, b, seed };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::InvalidParams(format!("d = {} < 2", self.d)));
        }
        if self.n < self.d {
            return Err(Error::InvalidParams(format!(
                "n = {} < d = {}",
                self.n, self.d
            )));
        }
        if !(self.b > 0.0) || !(self.a >= self.b) {
            return Err(Error::InvalidParams(format!(
                "need a >= b > 0, got a = {}, b = {}",
                self.a, self.b
            )));
        }
        let denom = binomial_f64(self.n as u64, self.d as u64 - 1);
        if self.a / denom > 1.0 {
            return Err(Error::InvalidParams(format!(
                "p_n = a/C(n,d-1) = {} > 1 (n too small for a = {})",
                self.a / denom,
                self.a
            )));
        }
        if self.b / denom > 1.0 {
            return Err(Error::InvalidParams(format!(
                "q_n = b/C(n,d-1) = {} > 1 (n too small for b = {})",
                self.b / denom,
                self.b
            )));
        }
        Ok(())
    }

    /// C(n, d-1), the denominator of the inclusion probabilities.
    pub fn subset_denominator(&self) -> f64 {
        binomial_f64(self.n as u64, self.d as u64 - 1)
    }
}

/// Rate constants derived once from [`ModelParams`] and carried everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedRates {
    /// Expected-degree constant alpha = (d-1)(a + (2^{d-1}-1) b) / 2^{d-1}.
    pub alpha: f64,
    /// Signal constant beta = (d-1)(a - b) / 2^{d-1}.
    pub beta: f64,
    /// Variance constant kappa = ((d-1)(a-b) + 2^{d-1} b) / (a + (2^{d-1}-1) b).
    pub kappa: f64,
    /// Monochromatic subset inclusion probability a / C(n, d-1).
    pub p_n: f64,
    /// Mixed subset inclusion probability b / C(n, d-1).
    pub q_n: f64,
    /// Var(Delta_inf) = kappa / (beta^2/alpha - 1); defined only above threshold.
    pub var_delta_inf: Option<f64>,
    /// E[Delta_inf^2] = 1 + Var(Delta_inf); defined only above threshold.
    pub e_delta_inf_sq: Option<f64>,
    /// Copies of the defining parameters, kept so closed-form moments
    /// (which need d) can be evaluated without re-threading ModelParams.
    pub d: usize,
    pub a: f64,
    pub b: f64,
}

/// Evaluate the rate constants. Rejects parameter sets whose inclusion
/// probabilities exceed 1.
pub fn derive_rates(params: &ModelParams) -> Result<DerivedRates> {
    params.validate()?;
    let d = params.d;
    let (a, b) = (params.a, params.b);
    let pow = (2f64).powi(d as i32 - 1);
    let dm1 = (d - 1) as f64;
    let alpha = dm1 * (a + (pow - 1.0) * b) / pow;
    let beta = dm1 * (a - b) / pow;
    let kappa = (dm1 * (a - b) + pow * b) / (a + (pow - 1.0) * b);
    let denom = params.subset_denominator();
    let above = beta * beta > alpha;
    let var_delta_inf = above.then(|| kappa / (beta * beta / alpha - 1.0));
    Ok(DerivedRates {
        alpha,
        beta,
        kappa,
        p_n: a / denom,
        q_n: b / denom,
        var_delta_inf,
        e_delta_inf_sq: var_delta_inf.map(|v| 1.0 + v),
        d,
        a,
        b,
    })
}

/// True iff the parameters sit above the Kesten-Stigum line beta^2 > alpha.
pub fn above_kesten_stigum(rates: &DerivedRates) -> bool {
    rates.beta * rates.beta > rates.alpha
}

pub const DEFAULT_C_FRACTION: f64 = 0.96;

/// Walk depth l = max(1, floor(c_fraction * (1/8) * ln n / ln alpha)), i.e.
/// c * ln(alpha) = c_fraction / 8 stays strictly inside the 1/8 constraint.
pub fn recommended_depth(params: &ModelParams, c_fraction: f64) -> Result<usize> {
    let rates = derive_rates(params)?;
    if rates.alpha <= 1.0 {
        return Err(Error::InvalidParams(format!(
            "recommended_depth needs alpha > 1, got alpha = {}",
            rates.alpha
        )));
    }
    if !(c_fraction > 0.0 && c_fraction < 1.0) {
        return Err(Error::InvalidParams(format!(
            "c_fraction must lie in (0, 1), got {c_fraction}"
        )));
    }
    let l = (c_fraction * 0.125 * (params.n as f64).ln() / rates.alpha.ln()).floor();
    Ok((l as usize).max(1))
}

impl DerivedRates {
    /// Closed-form Var(M_t) = (d-1)(1 - alpha^{-t}) / (alpha - 1).
    pub fn var_m_t(&self, t: u32) -> f64 {
        (self.d as f64 - 1.0) * (1.0 - self.alpha.powi(-(t as i32))) / (self.alpha - 1.0)
    }

    /// Closed-form Var(Delta_t) = kappa (1 - (beta^2/alpha)^{-t}) / (beta^2/alpha - 1).
    pub fn var_delta_t(&self, t: u32) -> f64 {
        let r = self.beta * self.beta / self.alpha;
        self.kappa * (1.0 - r.powi(-(t as i32))) / (r - 1.0)
    }

    /// E[Delta_t^2] = 1 + Var(Delta_t): the finite-depth moment the
    /// thresholding statistic concentrates on.
    pub fn e_delta_t_sq(&self, t: u32) -> f64 {
        1.0 + self.var_delta_t(t)
    }
}
