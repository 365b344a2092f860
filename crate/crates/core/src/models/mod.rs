//! Reproducible samplers for the univariate and bivariate models.
//!
//! Every sampler is a pure function of `(parameters, n, rng state)`. The
//! seeded `sample_*` helpers wrap them for one-off use; batch code feeds
//! per-replicate streams from [`crate::rng`] through the
//! [`SeriesSampler`] and [`PairSampler`] traits.

pub mod garch;
mod parse;
pub mod stable;

use std::f64::consts::SQRT_2;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::error::{QccError, Result};
use crate::quantile::{Interval, QuantileSplit, Rectangle};
use crate::rng::{self, SimRng};

pub use garch::GarchParams;

fn invalid(msg: impl Into<String>) -> QccError {
    QccError::InvalidParameter(msg.into())
}

/// Additive corruption applied on top of a clean series.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseSpec {
    #[default]
    None,
    /// `+r` and `-r` with probability `p/2` each, `0` otherwise.
    DiscreteJump { r: f64, p: f64 },
    /// Symmetric stable `S(alpha, c)`.
    Stable { alpha: f64, c: f64 },
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseSpec::None => Ok(()),
            NoiseSpec::DiscreteJump { r, p } => {
                if !(r > 0.0 && r.is_finite()) {
                    return Err(invalid(format!("jump size must be positive, got {r}")));
                }
                if !(0.0..0.5).contains(&p) {
                    return Err(invalid(format!(
                        "jump probability must lie in [0, 0.5), got {p}"
                    )));
                }
                Ok(())
            }
            NoiseSpec::Stable { alpha, c } => stable::check_params(alpha, c),
        }
    }

    #[inline]
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            NoiseSpec::None => 0.0,
            NoiseSpec::DiscreteJump { r, p } => discrete_jump(r, p, rng),
            NoiseSpec::Stable { alpha, c } => stable::draw(alpha, c, rng),
        }
    }

    /// Adds freshly drawn noise to every element.
    pub fn apply<R: Rng + ?Sized>(&self, values: &mut [f64], rng: &mut R) {
        if matches!(self, NoiseSpec::None) {
            return;
        }
        for v in values.iter_mut() {
            *v += self.draw(rng);
        }
    }
}

#[inline]
fn discrete_jump<R: Rng + ?Sized>(r: f64, p: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    if u < p / 2.0 {
        r
    } else if u < p {
        -r
    } else {
        0.0
    }
}

/// MA(1) with unit variance: `Z_t = (theta e_{t-1} + e_t) / sqrt(1 + theta^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ma1Params {
    pub theta: f64,
}

/// AR(1) `Z_t = phi Z_{t-1} + e_t`, started from its stationary law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ar1Params {
    pub phi: f64,
}

impl Ar1Params {
    pub fn new(phi: f64) -> Result<Self> {
        if !(phi.abs() < 1.0) {
            return Err(invalid(format!("AR(1) needs |phi| < 1, got {phi}")));
        }
        Ok(Self { phi })
    }
}

pub fn gaussian_wn<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

pub fn ma1<R: Rng + ?Sized>(p: &Ma1Params, n: usize, rng: &mut R) -> Vec<f64> {
    let norm = (1.0 + p.theta * p.theta).sqrt();
    let (a, b) = (p.theta / norm, 1.0 / norm);
    let mut prev: f64 = StandardNormal.sample(rng);
    (0..n)
        .map(|_| {
            let e: f64 = StandardNormal.sample(rng);
            let z = a * prev + b * e;
            prev = e;
            z
        })
        .collect()
}

pub fn ar1<R: Rng + ?Sized>(p: &Ar1Params, n: usize, rng: &mut R) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return out;
    }
    let z0: f64 = StandardNormal.sample(rng);
    let mut z = z0 / (1.0 - p.phi * p.phi).sqrt();
    out.push(z);
    for _ in 1..n {
        let e: f64 = StandardNormal.sample(rng);
        z = p.phi * z + e;
        out.push(z);
    }
    out
}

/// Clean (uncorrupted) univariate models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum SeriesModel {
    GaussianWn,
    Ma1(Ma1Params),
    Ar1(Ar1Params),
    /// Dependent GARCH(1,1) path.
    Garch(GarchParams),
    /// Independent draws from the GARCH(1,1) stationary marginal.
    GarchIid(GarchParams),
    /// Independent Student-t draws.
    StudentT { dof: f64 },
}

impl SeriesModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            SeriesModel::GaussianWn => Ok(()),
            SeriesModel::Ma1(p) if !p.theta.is_finite() => {
                Err(invalid(format!("MA(1) theta must be finite, got {}", p.theta)))
            }
            SeriesModel::Ma1(_) => Ok(()),
            SeriesModel::Ar1(p) => Ar1Params::new(p.phi).map(|_| ()),
            SeriesModel::Garch(p) => p.validate(),
            SeriesModel::GarchIid(p) => {
                p.validate()?;
                if p.burn_in < garch::MIN_IID_BURN_IN {
                    return Err(invalid(format!(
                        "stationary GARCH draws need burn-in >= {}, got {}",
                        garch::MIN_IID_BURN_IN,
                        p.burn_in
                    )));
                }
                Ok(())
            }
            SeriesModel::StudentT { dof } if *dof > 0.0 && dof.is_finite() => Ok(()),
            SeriesModel::StudentT { dof } => {
                Err(invalid(format!("Student-t degrees of freedom must be positive, got {dof}")))
            }
        }
    }

    pub fn generate<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        match self {
            SeriesModel::GaussianWn => gaussian_wn(n, rng),
            SeriesModel::Ma1(p) => ma1(p, n, rng),
            SeriesModel::Ar1(p) => ar1(p, n, rng),
            SeriesModel::Garch(p) => garch::path(p, n, rng),
            SeriesModel::GarchIid(p) => garch::iid(p, n, rng),
            SeriesModel::StudentT { dof } => {
                let t = StudentT::new(*dof).expect("validated dof");
                (0..n).map(|_| t.sample(rng)).collect()
            }
        }
    }
}

/// Anything that can produce a univariate series from a replicate stream.
pub trait SeriesSampler: Sync {
    fn sample_series(&self, n: usize, rng: &mut SimRng) -> Result<Vec<f64>>;
}

/// A clean model plus additive noise: `X_t = Z_t + psi_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProcessSpec {
    pub model: SeriesModel,
    #[serde(default)]
    pub noise: NoiseSpec,
}

impl ProcessSpec {
    pub fn new(model: SeriesModel, noise: NoiseSpec) -> Result<Self> {
        model.validate()?;
        noise.validate()?;
        Ok(Self { model, noise })
    }

    pub fn clean(model: SeriesModel) -> Result<Self> {
        Self::new(model, NoiseSpec::None)
    }
}

impl SeriesSampler for ProcessSpec {
    fn sample_series(&self, n: usize, rng: &mut SimRng) -> Result<Vec<f64>> {
        let mut v = self.model.generate(n, rng);
        self.noise.apply(&mut v, rng);
        Ok(v)
    }
}

impl<F> SeriesSampler for F
where
    F: Fn(usize, &mut SimRng) -> Result<Vec<f64>> + Sync,
{
    fn sample_series(&self, n: usize, rng: &mut SimRng) -> Result<Vec<f64>> {
        self(n, rng)
    }
}

/// Bivariate normal with an SPD covariance matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BivariateNormal {
    pub mean: [f64; 2],
    pub cov: [[f64; 2]; 2],
}

impl BivariateNormal {
    pub fn new(mean: [f64; 2], cov: [[f64; 2]; 2]) -> Result<Self> {
        let d = Self { mean, cov };
        d.cholesky()?;
        Ok(d)
    }

    /// Lower Cholesky factor `(l11, l21, l22)`.
    fn cholesky(&self) -> Result<(f64, f64, f64)> {
        let [[a, b], [b2, c]] = self.cov;
        if b != b2 || !(a > 0.0) {
            return Err(QccError::NotPositiveDefinite);
        }
        let l11 = a.sqrt();
        let l21 = b / l11;
        let rest = c - l21 * l21;
        if !(rest > 0.0) || !rest.is_finite() {
            return Err(QccError::NotPositiveDefinite);
        }
        Ok((l11, l21, rest.sqrt()))
    }

    fn margin_quantile(&self, axis: usize, u: f64) -> f64 {
        let sd = self.cov[axis][axis].sqrt();
        self.mean[axis] + sd * standard_normal_quantile(u)
    }
}

fn standard_normal_quantile(u: f64) -> f64 {
    -SQRT_2 * statrs::function::erf::erfc_inv(2.0 * u)
}

/// Bivariate symmetric stable law whose spectral measure puts mass 1/4 on
/// each of `(+-sqrt(2)/2, +-sqrt(2)/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BivStable4Atom {
    pub alpha: f64,
}

impl BivStable4Atom {
    pub const ATOM_MASS: f64 = 0.25;

    pub fn new(alpha: f64) -> Result<Self> {
        stable::check_params(alpha, 1.0)?;
        Ok(Self { alpha })
    }

    /// Atoms of the spectral measure.
    pub fn atoms() -> [[f64; 2]; 4] {
        let s = SQRT_2 / 2.0;
        [[s, s], [-s, -s], [-s, s], [s, -s]]
    }

    /// Common scale of both margins: `sigma^alpha = sum_j mass_j |s_j1|^alpha`.
    pub fn margin_scale(&self) -> f64 {
        let sum: f64 = Self::atoms()
            .iter()
            .map(|a| Self::ATOM_MASS * a[0].abs().powf(self.alpha))
            .sum();
        sum.powf(1.0 / self.alpha)
    }

    /// `exp(-sum_j mass_j |<theta, s_j>|^alpha)`.
    pub fn characteristic_function(&self, theta: [f64; 2]) -> f64 {
        let e: f64 = Self::atoms()
            .iter()
            .map(|s| Self::ATOM_MASS * (theta[0] * s[0] + theta[1] * s[1]).abs().powf(self.alpha))
            .sum();
        (-e).exp()
    }

    #[inline]
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let g = Self::ATOM_MASS.powf(1.0 / self.alpha);
        let (mut x, mut y) = (0.0, 0.0);
        for s in Self::atoms() {
            let z = g * stable::draw(self.alpha, 1.0, rng);
            x += s[0] * z;
            y += s[1] * z;
        }
        (x, y)
    }
}

/// Anything that can produce a paired sample from a replicate stream.
pub trait PairSampler: Sync {
    fn sample_pairs(&self, n: usize, rng: &mut SimRng) -> Result<(Vec<f64>, Vec<f64>)>;

    /// The theoretical rectangle `[Q_X(p1), Q_X(q1)] x [Q_Y(p2), Q_Y(q2)]`
    /// when the marginal quantile functions are known.
    fn theoretical_rectangle(
        &self,
        _split_x: QuantileSplit,
        _split_y: QuantileSplit,
    ) -> Result<Rectangle> {
        Err(QccError::RequiresKnownQuantiles)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum PairModel {
    Normal(BivariateNormal),
    Stable4Atom(BivStable4Atom),
}

impl PairSampler for PairModel {
    fn sample_pairs(&self, n: usize, rng: &mut SimRng) -> Result<(Vec<f64>, Vec<f64>)> {
        Ok(match self {
            PairModel::Normal(d) => normal_pairs(d, n, rng)?,
            PairModel::Stable4Atom(d) => (0..n).map(|_| d.draw(rng)).unzip(),
        })
    }

    fn theoretical_rectangle(
        &self,
        split_x: QuantileSplit,
        split_y: QuantileSplit,
    ) -> Result<Rectangle> {
        match self {
            PairModel::Normal(d) => Ok(Rectangle::new(
                Interval::new(d.margin_quantile(0, split_x.p()), d.margin_quantile(0, split_x.q())),
                Interval::new(d.margin_quantile(1, split_y.p()), d.margin_quantile(1, split_y.q())),
            )),
            PairModel::Stable4Atom(d) => {
                let c = d.margin_scale();
                let q = |u| stable::quantile(d.alpha, c, u);
                Ok(Rectangle::new(
                    Interval::new(q(split_x.p())?, q(split_x.q())?),
                    Interval::new(q(split_y.p())?, q(split_y.q())?),
                ))
            }
        }
    }
}

fn normal_pairs<R: Rng + ?Sized>(
    d: &BivariateNormal,
    n: usize,
    rng: &mut R,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let (l11, l21, l22) = d.cholesky()?;
    Ok((0..n)
        .map(|_| {
            let a: f64 = StandardNormal.sample(rng);
            let b: f64 = StandardNormal.sample(rng);
            (d.mean[0] + l11 * a, d.mean[1] + l21 * a + l22 * b)
        })
        .unzip())
}

// Seeded one-shot samplers.

pub fn sample_gaussian_wn(n: usize, seed: u64) -> Vec<f64> {
    gaussian_wn(n, &mut rng::seeded(seed))
}

pub fn sample_bivariate_normal(
    mean: [f64; 2],
    cov: [[f64; 2]; 2],
    n: usize,
    seed: u64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let d = BivariateNormal::new(mean, cov)?;
    normal_pairs(&d, n, &mut rng::seeded(seed))
}

pub fn sample_sas(alpha: f64, c: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    stable::check_params(alpha, c)?;
    let mut r = rng::seeded(seed);
    Ok((0..n).map(|_| stable::draw(alpha, c, &mut r)).collect())
}

pub fn sample_biv_stable_4atom(
    spec: BivStable4Atom,
    n: usize,
    seed: u64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let spec = BivStable4Atom::new(spec.alpha)?;
    PairModel::Stable4Atom(spec).sample_pairs(n, &mut rng::seeded(seed))
}

pub fn sample_discrete_noise(r: f64, p: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    NoiseSpec::DiscreteJump { r, p }.validate()?;
    let mut g = rng::seeded(seed);
    Ok((0..n).map(|_| discrete_jump(r, p, &mut g)).collect())
}

pub fn sample_ma1(theta: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    let m = SeriesModel::Ma1(Ma1Params { theta });
    m.validate()?;
    Ok(m.generate(n, &mut rng::seeded(seed)))
}

pub fn sample_ar1(phi: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    let p = Ar1Params::new(phi)?;
    Ok(ar1(&p, n, &mut rng::seeded(seed)))
}

pub fn sample_garch11_path(params: GarchParams, n: usize, seed: u64) -> Result<Vec<f64>> {
    params.validate()?;
    Ok(garch::path(&params, n, &mut rng::seeded(seed)))
}

pub fn sample_garch11_iid(params: GarchParams, n: usize, seed: u64) -> Result<Vec<f64>> {
    let m = SeriesModel::GarchIid(params);
    m.validate()?;
    Ok(m.generate(n, &mut rng::seeded(seed)))
}

/// Elementwise addition of independent noise; `NoiseSpec::None` is the identity.
pub fn corrupt(series: &[f64], noise: NoiseSpec, seed: u64) -> Result<Vec<f64>> {
    noise.validate()?;
    let mut out = series.to_vec();
    noise.apply(&mut out, &mut rng::seeded(seed));
    Ok(out)
}
