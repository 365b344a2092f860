use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{QccError, Result};

/// Burn-in used for stationary i.i.d. draws unless overridden.
pub const DEFAULT_IID_BURN_IN: usize = 10_000;
/// Burn-in discarded before a dependent path.
pub const DEFAULT_PATH_BURN_IN: usize = 1_000;
/// Lower bound on the burn-in accepted for i.i.d. stationary draws.
pub const MIN_IID_BURN_IN: usize = 500;

/// GARCH(1,1) with unit stationary variance:
///
/// ```text
/// sigma2_t = w0 + w1 * e_{t-1}^2 + w2 * sigma2_{t-1},   e_t = sigma_t * eps_t
/// Z_t      = e_t / sqrt(w0 / (1 - w1 - w2))
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GarchParams {
    pub w0: f64,
    pub w1: f64,
    pub w2: f64,
    pub burn_in: usize,
}

impl GarchParams {
    pub fn new(w0: f64, w1: f64, w2: f64, burn_in: usize) -> Result<Self> {
        let p = Self { w0, w1, w2, burn_in };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let Self { w0, w1, w2, burn_in } = *self;
        if !(w0 > 0.0 && w0.is_finite()) {
            return Err(QccError::InvalidParameter(format!(
                "GARCH w0 must be positive, got {w0}"
            )));
        }
        if !(w1 >= 0.0 && w2 >= 0.0) {
            return Err(QccError::InvalidParameter(format!(
                "GARCH weights must be non-negative, got w1={w1}, w2={w2}"
            )));
        }
        if !(w1 + w2 < 1.0) {
            return Err(QccError::InvalidParameter(format!(
                "GARCH needs w1 + w2 < 1 for stationarity, got {}",
                w1 + w2
            )));
        }
        if burn_in == 0 {
            return Err(QccError::InvalidParameter(
                "GARCH burn-in must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Stationary variance of the unnormalised shock.
    pub fn stationary_variance(&self) -> f64 {
        self.w0 / (1.0 - self.w1 - self.w2)
    }
}

struct Recursion {
    w0: f64,
    w1: f64,
    w2: f64,
    sigma2: f64,
    shock: f64,
}

impl Recursion {
    fn start<R: Rng + ?Sized>(p: &GarchParams, rng: &mut R) -> Self {
        let sigma2 = p.stationary_variance();
        let eps: f64 = StandardNormal.sample(rng);
        Self {
            w0: p.w0,
            w1: p.w1,
            w2: p.w2,
            sigma2,
            shock: sigma2.sqrt() * eps,
        }
    }

    #[inline(always)]
    fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> f64 {
        self.sigma2 = self.w0 + self.w1 * self.shock * self.shock + self.w2 * self.sigma2;
        let eps: f64 = StandardNormal.sample(rng);
        self.shock = self.sigma2.sqrt() * eps;
        self.shock
    }
}

/// A dependent path: discard `burn_in` steps, keep the next `n` normalised values.
pub fn path<R: Rng + ?Sized>(p: &GarchParams, n: usize, rng: &mut R) -> Vec<f64> {
    let scale = p.stationary_variance().sqrt().recip();
    let mut rec = Recursion::start(p, rng);
    for _ in 0..p.burn_in {
        rec.step(rng);
    }
    (0..n).map(|_| rec.step(rng) * scale).collect()
}

/// `n` mutually independent draws from the stationary marginal, each the
/// endpoint of its own `burn_in`-step recursion.
pub fn iid<R: Rng + ?Sized>(p: &GarchParams, n: usize, rng: &mut R) -> Vec<f64> {
    let scale = p.stationary_variance().sqrt().recip();
    (0..n)
        .map(|_| {
            let mut rec = Recursion::start(p, rng);
            let mut last = rec.shock;
            for _ in 0..p.burn_in {
                last = rec.step(rng);
            }
            last * scale
        })
        .collect()
}
