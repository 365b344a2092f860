//! Compact text forms for model descriptors, e.g. `ma1:theta=0.5`,
//! `garch:w0=0.001,w1=0.6,w2=0.2,burn=1000`, `jump:r=10,p=0.05`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::garch::{DEFAULT_IID_BURN_IN, DEFAULT_PATH_BURN_IN};
use super::{
    Ar1Params, BivStable4Atom, BivariateNormal, GarchParams, Ma1Params, NoiseSpec, PairModel,
    SeriesModel,
};
use crate::error::{QccError, Result};

struct Args<'a> {
    kind: &'a str,
    map: BTreeMap<&'a str, &'a str>,
}

impl<'a> Args<'a> {
    fn parse(s: &'a str) -> Result<Self> {
        let s = s.trim();
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut map = BTreeMap::new();
        for part in rest.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| bad(s, format!("expected key=value, got `{part}`")))?;
            if map.insert(k.trim(), v.trim()).is_some() {
                return Err(bad(s, format!("duplicate key `{}`", k.trim())));
            }
        }
        Ok(Self { kind, map })
    }

    fn take_f64(&mut self, key: &str) -> Result<f64> {
        let v = self
            .map
            .remove(key)
            .ok_or_else(|| QccError::InvalidParameter(format!("`{}` needs `{key}=`", self.kind)))?;
        v.parse()
            .map_err(|_| QccError::InvalidParameter(format!("`{key}` is not a number: `{v}`")))
    }

    fn take_usize_or(&mut self, key: &str, default: usize) -> Result<usize> {
        match self.map.remove(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| {
                QccError::InvalidParameter(format!("`{key}` is not a non-negative integer: `{v}`"))
            }),
        }
    }

    fn finish(self) -> Result<()> {
        match self.map.keys().next() {
            None => Ok(()),
            Some(k) => Err(QccError::InvalidParameter(format!(
                "unknown key `{k}` for `{}`",
                self.kind
            ))),
        }
    }
}

fn bad(s: &str, msg: String) -> QccError {
    QccError::InvalidParameter(format!("cannot parse `{s}`: {msg}"))
}

fn garch(a: &mut Args<'_>, default_burn: usize) -> Result<GarchParams> {
    Ok(GarchParams {
        w0: a.take_f64("w0")?,
        w1: a.take_f64("w1")?,
        w2: a.take_f64("w2")?,
        burn_in: a.take_usize_or("burn", default_burn)?,
    })
}

impl FromStr for SeriesModel {
    type Err = QccError;

    fn from_str(s: &str) -> Result<Self> {
        let mut a = Args::parse(s)?;
        let m = match a.kind {
            "wn" => SeriesModel::GaussianWn,
            "ma1" => SeriesModel::Ma1(Ma1Params {
                theta: a.take_f64("theta")?,
            }),
            "ar1" => SeriesModel::Ar1(Ar1Params {
                phi: a.take_f64("phi")?,
            }),
            "garch" => SeriesModel::Garch(garch(&mut a, DEFAULT_PATH_BURN_IN)?),
            "garch-iid" => SeriesModel::GarchIid(garch(&mut a, DEFAULT_IID_BURN_IN)?),
            "t" => SeriesModel::StudentT {
                dof: a.take_f64("dof")?,
            },
            other => return Err(bad(s, format!("unknown model `{other}`"))),
        };
        a.finish()?;
        m.validate()?;
        Ok(m)
    }
}

impl fmt::Display for SeriesModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeriesModel::GaussianWn => write!(f, "wn"),
            SeriesModel::Ma1(p) => write!(f, "ma1:theta={}", p.theta),
            SeriesModel::Ar1(p) => write!(f, "ar1:phi={}", p.phi),
            SeriesModel::Garch(p) => {
                write!(f, "garch:w0={},w1={},w2={},burn={}", p.w0, p.w1, p.w2, p.burn_in)
            }
            SeriesModel::GarchIid(p) => {
                write!(f, "garch-iid:w0={},w1={},w2={},burn={}", p.w0, p.w1, p.w2, p.burn_in)
            }
            SeriesModel::StudentT { dof } => write!(f, "t:dof={dof}"),
        }
    }
}

impl FromStr for NoiseSpec {
    type Err = QccError;

    fn from_str(s: &str) -> Result<Self> {
        let mut a = Args::parse(s)?;
        let n = match a.kind {
            "none" => NoiseSpec::None,
            "jump" => NoiseSpec::DiscreteJump {
                r: a.take_f64("r")?,
                p: a.take_f64("p")?,
            },
            "stable" => NoiseSpec::Stable {
                alpha: a.take_f64("alpha")?,
                c: a.take_f64("c")?,
            },
            other => return Err(bad(s, format!("unknown noise `{other}`"))),
        };
        a.finish()?;
        n.validate()?;
        Ok(n)
    }
}

impl fmt::Display for NoiseSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoiseSpec::None => write!(f, "none"),
            NoiseSpec::DiscreteJump { r, p } => write!(f, "jump:r={r},p={p}"),
            NoiseSpec::Stable { alpha, c } => write!(f, "stable:alpha={alpha},c={c}"),
        }
    }
}

impl FromStr for PairModel {
    type Err = QccError;

    fn from_str(s: &str) -> Result<Self> {
        let mut a = Args::parse(s)?;
        let m = match a.kind {
            "bvn" => {
                let mx = a.take_f64("mx")?;
                let my = a.take_f64("my")?;
                let vx = a.take_f64("vx")?;
                let vy = a.take_f64("vy")?;
                let cov = a.take_f64("cov")?;
                PairModel::Normal(BivariateNormal::new([mx, my], [[vx, cov], [cov, vy]])?)
            }
            "bstable" => PairModel::Stable4Atom(BivStable4Atom::new(a.take_f64("alpha")?)?),
            other => return Err(bad(s, format!("unknown bivariate model `{other}`"))),
        };
        a.finish()?;
        Ok(m)
    }
}

impl fmt::Display for PairModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PairModel::Normal(d) => write!(
                f,
                "bvn:mx={},my={},vx={},vy={},cov={}",
                d.mean[0], d.mean[1], d.cov[0][0], d.cov[1][1], d.cov[0][1]
            ),
            PairModel::Stable4Atom(d) => write!(f, "bstable:alpha={}", d.alpha),
        }
    }
}
