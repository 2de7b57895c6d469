//! Ensemble catalog: closed-form recurrence coefficients `(a_{j,n}, b_{j,n})`,
//! finite-n edge locations and the slow-variation report.
//!
//! Row `j` (1-indexed) of the Jacobi matrix carries `b_{j-1}` on the diagonal and
//! `a_j` between rows `j` and `j+1`.
//!
//! Parameter keys accepted in [`EnsembleSpec::new`] and in the JSON form
//! `{"family": ..., "params": {...}}`:
//!
//! | family            | keys                                   |
//! |-------------------|----------------------------------------|
//! | `chebyshev2`      | none                                   |
//! | `modified_jacobi` | `gamma1`, `gamma2`, `expansion` (0/1)  |
//! | `laguerre`        | `gamma` (default 0)                    |
//! | `hermite`         | none                                   |
//! | `freud`           | `gamma`                                |
//! | `tricomi_carlitz` | `gamma`                                |
//! | `krawtchouk`      | `p`, `t` (K = round(t n))              |
//! | `hahn`            | `t1`, `t2`, `t3` (a, b, N = round(t n))|
//! | `log_singular`    | none                                   |
//!
//! The Hahn coefficients follow a closed form whose diagonal carries a factor
//! `(2j+a+b+N+1)` that does not match the classical Hahn recurrence; they are
//! reproduced verbatim; [`discrete_recurrence`] computes the recurrence of the
//! actual Hahn weight for comparison.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{Error, Result};
use crate::tridiag::TridiagonalMatrix;
use num_complex::Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Chebyshev2,
    ModifiedJacobi,
    Laguerre,
    Hermite,
    Freud,
    TricomiCarlitz,
    Krawtchouk,
    Hahn,
    LogSingular,
    Custom,
}

impl Family {
    pub const ALL: [Family; 10] = [
        Family::Chebyshev2,
        Family::ModifiedJacobi,
        Family::Laguerre,
        Family::Hermite,
        Family::Freud,
        Family::TricomiCarlitz,
        Family::Krawtchouk,
        Family::Hahn,
        Family::LogSingular,
        Family::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Chebyshev2 => "chebyshev2",
            Family::ModifiedJacobi => "modified_jacobi",
            Family::Laguerre => "laguerre",
            Family::Hermite => "hermite",
            Family::Freud => "freud",
            Family::TricomiCarlitz => "tricomi_carlitz",
            Family::Krawtchouk => "krawtchouk",
            Family::Hahn => "hahn",
            Family::LogSingular => "log_singular",
            Family::Custom => "custom",
        }
    }

    /// Parses a family name; `gue`, `lue` and `jacobi` are accepted as aliases.
    pub fn parse(name: &str) -> Option<Family> {
        let key = name.trim().to_ascii_lowercase().replace('-', "_");
        let alias = match key.as_str() {
            "gue" => Some(Family::Hermite),
            "lue" => Some(Family::Laguerre),
            "jacobi" | "jue" => Some(Family::ModifiedJacobi),
            _ => None,
        };
        alias.or_else(|| Family::ALL.into_iter().find(|f| f.name() == key))
    }

    fn keys(self) -> &'static [&'static str] {
        match self {
            Family::ModifiedJacobi => &["gamma1", "gamma2", "expansion"],
            Family::Laguerre | Family::Freud | Family::TricomiCarlitz => &["gamma"],
            Family::Krawtchouk => &["p", "t"],
            Family::Hahn => &["t1", "t2", "t3"],
            _ => &[],
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which end of the spectrum a study zooms into.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    /// `-1` on the left, `+1` on the right.
    pub fn sign(self) -> f64 {
        match self {
            Side::Left => -1.0,
            Side::Right => 1.0,
        }
    }

    pub fn parse(s: &str) -> Option<Side> {
        match s.trim().to_ascii_lowercase().as_str() {
            "left" | "l" => Some(Side::Left),
            "right" | "r" => Some(Side::Right),
            _ => None,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

/// User supplied coefficients: `(j, n) -> (a_j, b_j)` for `j >= 0` (`a_0` is ignored).
pub type CoefficientFn = dyn Fn(usize, usize) -> (f64, f64) + Send + Sync;

#[derive(Clone, Copy, Debug)]
enum Closed {
    Chebyshev2,
    Jacobi { g1: f64, g2: f64, expansion: bool },
    Laguerre { g: f64 },
    Hermite,
    Freud { g: f64, c: f64 },
    TricomiCarlitz { g: f64 },
    Krawtchouk { p: f64, t: f64 },
    Hahn { t1: f64, t2: f64, t3: f64 },
    LogSingular,
}

#[derive(Clone)]
enum Kind {
    Closed(Closed),
    Custom {
        coefficients: Arc<CoefficientFn>,
        varying: bool,
    },
}

/// An ensemble: a family plus its named parameters.
#[derive(Clone)]
pub struct EnsembleSpec {
    family: Family,
    params: BTreeMap<String, f64>,
    kind: Kind,
}

impl fmt::Debug for EnsembleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EnsembleSpec")
            .field("family", &self.family)
            .field("params", &self.params)
            .field("varying", &self.varying())
            .finish()
    }
}

impl PartialEq for EnsembleSpec {
    fn eq(&self, other: &Self) -> bool {
        match (&self.kind, &other.kind) {
            (Kind::Custom { coefficients: a, .. }, Kind::Custom { coefficients: b, .. }) => {
                Arc::ptr_eq(a, b)
            }
            (Kind::Closed(_), Kind::Closed(_)) => {
                self.family == other.family && self.params == other.params
            }
            _ => false,
        }
    }
}

fn get(params: &BTreeMap<String, f64>, family: Family, key: &str) -> Result<f64> {
    params
        .get(key)
        .copied()
        .ok_or_else(|| Error::params(family.name(), format!("missing parameter `{key}`")))
}

fn require(ok: bool, family: Family, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::params(family.name(), what))
    }
}

impl EnsembleSpec {
    /// Validates `params` against the family's key list and parameter ranges.
    pub fn new(family: Family, params: BTreeMap<String, f64>) -> Result<Self> {
        if family == Family::Custom {
            return Err(Error::params(
                "custom",
                "custom ensembles are built with EnsembleSpec::custom",
            ));
        }
        for (k, v) in &params {
            if !family.keys().contains(&k.as_str()) {
                return Err(Error::params(family.name(), format!("unknown parameter `{k}`")));
            }
            if !v.is_finite() {
                return Err(Error::params(family.name(), format!("`{k}` is not finite")));
            }
        }
        let closed = match family {
            Family::Chebyshev2 => Closed::Chebyshev2,
            Family::Hermite => Closed::Hermite,
            Family::LogSingular => Closed::LogSingular,
            Family::ModifiedJacobi => {
                let g1 = get(&params, family, "gamma1")?;
                let g2 = get(&params, family, "gamma2")?;
                require(g1 > -1.0 && g2 > -1.0, family, "need gamma1, gamma2 > -1")?;
                let e = params.get("expansion").copied().unwrap_or(0.0);
                require(e == 0.0 || e == 1.0, family, "`expansion` must be 0 or 1")?;
                Closed::Jacobi {
                    g1,
                    g2,
                    expansion: e == 1.0,
                }
            }
            Family::Laguerre => {
                let g = params.get("gamma").copied().unwrap_or(0.0);
                require(g > -1.0, family, "need gamma > -1")?;
                Closed::Laguerre { g }
            }
            Family::Freud => {
                let g = get(&params, family, "gamma")?;
                require(g > 0.0, family, "need gamma > 0")?;
                let ratio = gamma(g / 2.0) * gamma(0.5) / gamma((g + 1.0) / 2.0);
                Closed::Freud {
                    g,
                    c: 0.5 * ratio.powf(1.0 / g),
                }
            }
            Family::TricomiCarlitz => {
                let g = get(&params, family, "gamma")?;
                require(g > 1.0, family, "need gamma > 1")?;
                Closed::TricomiCarlitz { g }
            }
            Family::Krawtchouk => {
                let p = get(&params, family, "p")?;
                let t = get(&params, family, "t")?;
                require(p > 0.0 && p < 1.0, family, "need 0 < p < 1")?;
                require(t > 0.0, family, "need t > 0")?;
                Closed::Krawtchouk { p, t }
            }
            Family::Hahn => {
                let t1 = get(&params, family, "t1")?;
                let t2 = get(&params, family, "t2")?;
                let t3 = get(&params, family, "t3")?;
                require(t1 > 0.0 && t2 > 0.0, family, "need t1, t2 > 0")?;
                require(t3 >= 1.0, family, "need t3 >= 1")?;
                Closed::Hahn { t1, t2, t3 }
            }
            Family::Custom => unreachable!(),
        };
        Ok(EnsembleSpec {
            family,
            params,
            kind: Kind::Closed(closed),
        })
    }

    fn with(family: Family, pairs: &[(&str, f64)]) -> Result<Self> {
        let params = pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        EnsembleSpec::new(family, params)
    }

    /// Constant coefficients `a = 1`, `b = 0`.
    pub fn chebyshev2() -> Self {
        EnsembleSpec::with(Family::Chebyshev2, &[]).expect("no parameters")
    }

    /// Scaled Hermite weight `exp(-n x^2 / 2)`.
    pub fn hermite() -> Self {
        EnsembleSpec::with(Family::Hermite, &[]).expect("no parameters")
    }

    pub fn laguerre(gamma: f64) -> Result<Self> {
        EnsembleSpec::with(Family::Laguerre, &[("gamma", gamma)])
    }

    /// Jacobi weight on `[-2, 2]`. `gamma1 = gamma2 = 1/2` reproduces Chebyshev2.
    pub fn modified_jacobi(gamma1: f64, gamma2: f64) -> Result<Self> {
        EnsembleSpec::with(
            Family::ModifiedJacobi,
            &[("gamma1", gamma1), ("gamma2", gamma2)],
        )
    }

    /// Leading-order large-j expansion of the Jacobi coefficients.
    pub fn modified_jacobi_expansion(gamma1: f64, gamma2: f64) -> Result<Self> {
        EnsembleSpec::with(
            Family::ModifiedJacobi,
            &[("gamma1", gamma1), ("gamma2", gamma2), ("expansion", 1.0)],
        )
    }

    /// Freud weight `exp(-n |x|^gamma)`, leading term of the coefficient asymptotics.
    pub fn freud(gamma: f64) -> Result<Self> {
        EnsembleSpec::with(Family::Freud, &[("gamma", gamma)])
    }

    pub fn tricomi_carlitz(gamma: f64) -> Result<Self> {
        EnsembleSpec::with(Family::TricomiCarlitz, &[("gamma", gamma)])
    }

    pub fn krawtchouk(p: f64, t: f64) -> Result<Self> {
        EnsembleSpec::with(Family::Krawtchouk, &[("p", p), ("t", t)])
    }

    pub fn hahn(t1: f64, t2: f64, t3: f64) -> Result<Self> {
        EnsembleSpec::with(Family::Hahn, &[("t1", t1), ("t2", t2), ("t3", t3)])
    }

    pub fn log_singular() -> Self {
        EnsembleSpec::with(Family::LogSingular, &[]).expect("no parameters")
    }

    /// Wraps a coefficient callback `(j, n) -> (a_j, b_j)`.
    pub fn custom<F>(varying: bool, coefficients: F) -> Self
    where
        F: Fn(usize, usize) -> (f64, f64) + Send + Sync + 'static,
    {
        EnsembleSpec {
            family: Family::Custom,
            params: BTreeMap::new(),
            kind: Kind::Custom {
                coefficients: Arc::new(coefficients),
                varying,
            },
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn is_custom(&self) -> bool {
        matches!(self.kind, Kind::Custom { .. })
    }

    /// Fails for custom ensembles.
    pub fn require_closed_form(&self) -> Result<()> {
        if self.is_custom() {
            Err(Error::Unsupported(
                "operation needs a closed-form family, not a custom callback".into(),
            ))
        } else {
            Ok(())
        }
    }

    /// Whether the coefficients depend on `n`.
    pub fn varying(&self) -> bool {
        match &self.kind {
            Kind::Custom { varying, .. } => *varying,
            Kind::Closed(c) => !matches!(
                c,
                Closed::Chebyshev2 | Closed::Jacobi { .. } | Closed::LogSingular
            ),
        }
    }

    /// Determinacy of the moment problem (metadata). `Some(false)` for Freud with
    /// `gamma < 1`, `None` for custom ensembles.
    pub fn moment_problem_determinate(&self) -> Option<bool> {
        match &self.kind {
            Kind::Custom { .. } => None,
            Kind::Closed(Closed::Freud { g, .. }) => Some(*g >= 1.0),
            Kind::Closed(_) => Some(true),
        }
    }

    /// Largest `j` for which `(a_j, b_j)` is defined, for discrete families.
    pub fn last_index(&self, n: usize) -> Option<usize> {
        match &self.kind {
            Kind::Closed(Closed::Krawtchouk { t, .. }) => Some(round_size(*t, n)),
            Kind::Closed(Closed::Hahn { t3, .. }) => Some(round_size(*t3, n)),
            _ => None,
        }
    }

    fn check_index(&self, j: usize, n: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::InvalidInput("n must be at least 1".into()));
        }
        if let Some(last) = self.last_index(n) {
            if j > last {
                return Err(Error::OutOfDomain {
                    family: self.family.name().into(),
                    index: j,
                    last,
                });
            }
        }
        Ok(())
    }

    /// Common scale `s_n` with `a = a_raw / s_n` and `b = b_raw / s_n`. Raw values
    /// are integers where the closed forms allow it, which keeps exact
    /// cancellations exact in floating point.
    pub fn coefficient_scale(&self, n: usize) -> f64 {
        let nf = n as f64;
        match &self.kind {
            Kind::Closed(Closed::Laguerre { .. }) | Kind::Closed(Closed::Krawtchouk { .. }) => nf,
            Kind::Closed(Closed::Hermite) => nf.sqrt(),
            Kind::Closed(Closed::Freud { g, .. }) => nf.powf(1.0 / g),
            _ => 1.0,
        }
    }

    /// Unscaled off-diagonal coefficient, `j >= 1`.
    pub fn a_raw(&self, j: usize, n: usize) -> Result<f64> {
        if j == 0 {
            return Err(Error::InvalidInput("off-diagonal index starts at 1".into()));
        }
        self.check_index(j, n)?;
        let jf = j as f64;
        let nf = n as f64;
        let closed = match &self.kind {
            Kind::Custom { coefficients, .. } => return Ok(coefficients(j, n).0),
            Kind::Closed(c) => *c,
        };
        Ok(match closed {
            Closed::Chebyshev2 => 1.0,
            Closed::Jacobi {
                g1,
                g2,
                expansion: true,
            } => 1.0 + (1.0 - 2.0 * g1 * g1 - 2.0 * g2 * g2) / (8.0 * jf * jf),
            Closed::Jacobi { g1, g2, .. } => {
                let s = g1 + g2;
                let sq = if j == 1 {
                    // the factor (j + s) / (2j + s - 1) cancels at j = 1
                    16.0 * (1.0 + g1) * (1.0 + g2) / ((s + 2.0) * (s + 2.0) * (s + 3.0))
                } else {
                    let d = 2.0 * jf + s;
                    16.0 * jf * (jf + s) * (jf + g1) * (jf + g2) / ((d - 1.0) * d * d * (d + 1.0))
                };
                sq.sqrt()
            }
            Closed::Laguerre { g } => (jf * (jf + g)).sqrt(),
            Closed::Hermite => jf.sqrt(),
            Closed::Freud { g, c } => c * jf.powf(1.0 / g),
            Closed::TricomiCarlitz { g } => (jf * nf / ((jf + g - 1.0) * (jf + g))).sqrt(),
            Closed::Krawtchouk { p, t } => {
                let k = round_size(t, n) as f64;
                ((k - jf + 1.0) * jf * p * (1.0 - p)).sqrt()
            }
            Closed::Hahn { t1, t2, t3 } => {
                let (a, b, nn) = hahn_sizes(t1, t2, t3, n);
                let s = a + b;
                let front = jf * (jf + s + nn + 1.0) * (jf + b)
                    / (nn * (2.0 * jf + s) * (2.0 * jf + s + 1.0));
                let inner = (nn - jf) * (jf + s) * (a + jf) * (2.0 * jf + s + 1.0)
                    / (jf * (jf + s + nn + 1.0) * (b + jf) * (2.0 * jf + s - 1.0));
                front * inner.max(0.0).sqrt()
            }
            Closed::LogSingular => {
                let k = jf.max(2.0);
                let l = k.ln();
                0.5 - 1.0 / (16.0 * k * k) - 3.0 / (32.0 * k * k * l * l)
            }
        })
    }

    /// Unscaled diagonal coefficient, `j >= 0`.
    pub fn b_raw(&self, j: usize, n: usize) -> Result<f64> {
        self.check_index(j, n)?;
        let jf = j as f64;
        let closed = match &self.kind {
            Kind::Custom { coefficients, .. } => return Ok(coefficients(j, n).1),
            Kind::Closed(c) => *c,
        };
        Ok(match closed {
            Closed::Chebyshev2 | Closed::Hermite | Closed::Freud { .. } => 0.0,
            Closed::TricomiCarlitz { .. } => 0.0,
            Closed::Jacobi { g1, g2, expansion } => {
                let s = g1 + g2;
                if j == 0 {
                    2.0 * (g2 - g1) / (s + 2.0)
                } else if expansion {
                    (g2 * g2 - g1 * g1) / (2.0 * jf * jf)
                } else {
                    2.0 * (g2 * g2 - g1 * g1) / ((2.0 * jf + s) * (2.0 * jf + s + 2.0))
                }
            }
            Closed::Laguerre { g } => 2.0 * jf + g + 1.0,
            Closed::Krawtchouk { p, t } => {
                let k = round_size(t, n) as f64;
                (k - jf) * p + jf * (1.0 - p)
            }
            Closed::Hahn { t1, t2, t3 } => {
                let (a, b, nn) = hahn_sizes(t1, t2, t3, n);
                let s = a + b;
                (nn - jf) * (jf + s + 1.0) * (jf + a + 1.0)
                    / (nn * (2.0 * jf + s + nn + 1.0) * (2.0 * jf + s + 2.0))
            }
            Closed::LogSingular => {
                let k = jf.max(2.0);
                let l = k.ln();
                1.0 / (4.0 * k * k) - 3.0 / (16.0 * k * k * l * l)
            }
        })
    }

    /// Off-diagonal coefficient `a_{j,n}`, `j >= 1`.
    pub fn a(&self, j: usize, n: usize) -> Result<f64> {
        Ok(self.a_raw(j, n)? / self.coefficient_scale(n))
    }

    /// Diagonal coefficient `b_{j,n}`, `j >= 0`.
    pub fn b(&self, j: usize, n: usize) -> Result<f64> {
        Ok(self.b_raw(j, n)? / self.coefficient_scale(n))
    }

    /// `(a_{j,n}, b_{j,n})` for `j >= 1`.
    pub fn recurrence(&self, j: usize, n: usize) -> Result<(f64, f64)> {
        Ok((self.a(j, n)?, self.b(j, n)?))
    }

    /// `b_{n-1,n} -/+ 2 sqrt(|a_{n,n} a_{n-1,n}|)`; minus on the left.
    pub fn edge_location(&self, n: usize, side: Side) -> Result<f64> {
        if n < 2 {
            return Err(Error::InvalidInput("edge_location needs n >= 2".into()));
        }
        let b = self.b(n - 1, n)?;
        let r = (self.a(n, n)? * self.a(n - 1, n)?).abs().sqrt();
        Ok(b + side.sign() * 2.0 * r)
    }

    /// Rows `lo..=hi` (1-indexed) of the Jacobi matrix at scale `n`, zero shift.
    pub fn jacobi_block(&self, n: usize, lo: usize, hi: usize) -> Result<TridiagonalMatrix> {
        if lo == 0 || hi < lo {
            return Err(Error::InvalidInput(format!("bad row range {lo}..={hi}")));
        }
        let diag = (lo..=hi)
            .map(|j| self.b(j - 1, n))
            .collect::<Result<Vec<_>>>()?;
        let off = (lo..hi).map(|j| self.a(j, n)).collect::<Result<Vec<_>>>()?;
        TridiagonalMatrix::new(diag, off, Complex64::new(0.0, 0.0))
    }

    /// The leading `rows x rows` truncation.
    pub fn jacobi_matrix(&self, n: usize, rows: usize) -> Result<TridiagonalMatrix> {
        self.jacobi_block(n, 1, rows)
    }
}

fn round_size(t: f64, n: usize) -> usize {
    (t * n as f64).round().max(1.0) as usize
}

fn hahn_sizes(t1: f64, t2: f64, t3: f64, n: usize) -> (f64, f64, f64) {
    (
        round_size(t1, n) as f64,
        round_size(t2, n) as f64,
        round_size(t3, n) as f64,
    )
}

/// JSON form `{"family": "...", "params": {...}}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleJson {
    pub family: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl TryFrom<EnsembleJson> for EnsembleSpec {
    type Error = Error;

    fn try_from(j: EnsembleJson) -> Result<Self> {
        let family = Family::parse(&j.family)
            .ok_or_else(|| Error::Config(format!("unknown ensemble family `{}`", j.family)))?;
        EnsembleSpec::new(family, j.params)
    }
}

impl From<&EnsembleSpec> for EnsembleJson {
    fn from(s: &EnsembleSpec) -> Self {
        EnsembleJson {
            family: s.family.name().into(),
            params: s.params.clone(),
        }
    }
}

impl Serialize for EnsembleSpec {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_custom() {
            return Err(serde::ser::Error::custom("custom ensembles cannot be serialized"));
        }
        EnsembleJson::from(self).serialize(ser)
    }
}

impl<'de> Deserialize<'de> for EnsembleSpec {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let j = EnsembleJson::deserialize(de)?;
        EnsembleSpec::try_from(j).map_err(serde::de::Error::custom)
    }
}

impl EnsembleSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let j: EnsembleJson = serde_json::from_str(text)?;
        EnsembleSpec::try_from(j)
    }

    pub fn to_json(&self) -> Result<String> {
        self.require_closed_form()?;
        Ok(serde_json::to_string(&EnsembleJson::from(self))?)
    }
}

/// Recurrence coefficients of a discrete weight by Lanczos with full
/// reorthogonalization. Returns `(b_0..b_{count-1}, a_1..a_{count-1})`.
pub fn discrete_recurrence(
    nodes: &[f64],
    weights: &[f64],
    count: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = nodes.len();
    if m != weights.len() || count == 0 || count > m {
        return Err(Error::InvalidInput(
            "need matching nodes/weights and 1 <= count <= nodes".into(),
        ));
    }
    if weights.iter().any(|w| *w < 0.0 || !w.is_finite()) {
        return Err(Error::InvalidInput("weights must be finite and nonnegative".into()));
    }
    let total: f64 = weights.iter().sum();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(count);
    let mut q: Vec<f64> = weights.iter().map(|w| (w / total).sqrt()).collect();
    let mut diag = Vec::with_capacity(count);
    let mut off = Vec::with_capacity(count.saturating_sub(1));
    for k in 0..count {
        let mut v: Vec<f64> = q.iter().zip(nodes).map(|(qi, x)| qi * x).collect();
        let alpha: f64 = v.iter().zip(&q).map(|(a, b)| a * b).sum();
        diag.push(alpha);
        basis.push(q.clone());
        if k + 1 == count {
            break;
        }
        for _ in 0..2 {
            for b in &basis {
                let c: f64 = v.iter().zip(b).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(b).for_each(|(a, b)| *a -= c * b);
            }
        }
        let beta = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if beta == 0.0 {
            return Err(Error::Singular("Lanczos breakdown".into()));
        }
        off.push(beta);
        q = v.into_iter().map(|x| x / beta).collect();
    }
    Ok((diag, off))
}

/// Hahn weight `C(a+x, x) C(b+N-x, N-x)` on the nodes `x / n`, `x = 0..N`,
/// with `a, b, N = round(t n)`.
pub fn hahn_weight(t1: f64, t2: f64, t3: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let (a, b, nn) = hahn_sizes(t1, t2, t3, n);
    let ln_binom = |top: f64, k: f64| ln_gamma(top + 1.0) - ln_gamma(k + 1.0) - ln_gamma(top - k + 1.0);
    let logs: Vec<f64> = (0..=nn as usize)
        .map(|x| {
            let x = x as f64;
            ln_binom(a + x, x) + ln_binom(b + nn - x, nn - x)
        })
        .collect();
    let peak = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let nodes = (0..=nn as usize).map(|x| x as f64 / n as f64).collect();
    let weights = logs.iter().map(|l| (l - peak).exp()).collect();
    (nodes, weights)
}

/// A zoom at `x0` with exponent `alpha` and window exponent `epsilon`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub side: Side,
    pub x0: f64,
    pub alpha: f64,
    pub epsilon: f64,
}

impl EdgeSpec {
    pub fn new(side: Side, x0: f64, alpha: f64, epsilon: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(Error::InvalidInput(format!("alpha = {alpha} not in (0, 2)")));
        }
        if !(epsilon > 0.0 && epsilon < 1.0 - alpha / 2.0) {
            return Err(Error::InvalidInput(format!(
                "epsilon = {epsilon} not in (0, 1 - alpha/2)"
            )));
        }
        if !x0.is_finite() {
            return Err(Error::InvalidInput("x0 is not finite".into()));
        }
        Ok(EdgeSpec {
            side,
            x0,
            alpha,
            epsilon,
        })
    }

    /// Centre at the exact finite-n edge of `spec`.
    pub fn at_edge(spec: &EnsembleSpec, n: usize, side: Side, alpha: f64, epsilon: f64) -> Result<Self> {
        EdgeSpec::new(side, spec.edge_location(n, side)?, alpha, epsilon)
    }

    /// Index window `[n - n^(alpha/2+eps), n + n^(alpha/2+eps)]`.
    pub fn window(&self, n: usize) -> (usize, usize) {
        let w = (n as f64).powf(self.alpha / 2.0 + self.epsilon);
        let lo = (n as f64 - w).ceil().max(0.0) as usize;
        let hi = (n as f64 + w).floor() as usize;
        (lo, hi)
    }
}

/// Pass/fail thresholds for the scaled quantities of [`check_hypotheses`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisThresholds {
    pub slow_a: f64,
    pub slow_b: f64,
    pub second_difference: f64,
    pub edge_balance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisQuantity {
    pub max: f64,
    pub threshold: f64,
    pub pass: bool,
    /// Per-index values over the window, scaled.
    pub values: Vec<f64>,
}

impl HypothesisQuantity {
    fn new(values: Vec<f64>, threshold: f64) -> Self {
        let max = values.iter().cloned().fold(0.0, f64::max);
        HypothesisQuantity {
            max,
            threshold,
            pass: max <= threshold,
            values,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub n: usize,
    pub edge: EdgeSpec,
    pub window: (usize, usize),
    /// `|a_j - a_{j-1}| n`
    pub slow_a: HypothesisQuantity,
    /// `|b_j - b_{j-1}| n`
    pub slow_b: HypothesisQuantity,
    /// `|a_j a_{j-2} - a_{j-1}^2| n^(alpha+eps)`
    pub second_difference: HypothesisQuantity,
    /// `|(b_{j-1}-x0-a_j) a_{j-2} - (b_{j-2}-x0-a_{j-1}) a_{j-1}| n^(3alpha/2+eps)`
    pub edge_balance: HypothesisQuantity,
    pub min_abs_a: f64,
    pub max_abs_a: f64,
    pub min_abs_b: f64,
    pub max_abs_b: f64,
}

impl HypothesisReport {
    pub fn all_pass(&self) -> bool {
        self.slow_a.pass && self.slow_b.pass && self.second_difference.pass && self.edge_balance.pass
    }
}

/// Scaled slow-variation quantities over the window of `edge`.
///
/// Work is done on the unscaled coefficients so that exact cancellations stay
/// exact. On the right edge the matrix is reflected (`b -> -b`, `x0 -> -x0`);
/// `|a|` is used throughout. Without explicit thresholds, each threshold is ten
/// times the value observed for the same family at `n = 1000`.
pub fn check_hypotheses(
    spec: &EnsembleSpec,
    n: usize,
    edge: &EdgeSpec,
    thresholds: Option<&HypothesisThresholds>,
) -> Result<HypothesisReport> {
    let (lo, hi) = edge.window(n);
    if lo < 3 {
        return Err(Error::OutOfDomain {
            family: spec.family().name().into(),
            index: lo,
            last: 3,
        });
    }
    let s = spec.coefficient_scale(n);
    let sign = -edge.side.sign();
    let x0 = sign * edge.x0 * s;
    let a = |j: usize| spec.a_raw(j, n).map(f64::abs);
    let b = |j: usize| spec.b_raw(j, n).map(|v| sign * v);
    let nf = n as f64;
    let (mut da, mut db, mut sd, mut eb) = (vec![], vec![], vec![], vec![]);
    let (mut amin, mut amax, mut bmin, mut bmax) = (f64::INFINITY, 0.0f64, f64::INFINITY, 0.0f64);
    for j in lo..=hi {
        let (aj, aj1, aj2) = (a(j)?, a(j - 1)?, a(j - 2)?);
        let (bj, bj1, bj2) = (b(j)?, b(j - 1)?, b(j - 2)?);
        da.push((aj - aj1).abs() / s * nf);
        db.push((bj - bj1).abs() / s * nf);
        sd.push((aj * aj2 - aj1 * aj1).abs() / (s * s) * nf.powf(edge.alpha + edge.epsilon));
        let q = (bj1 - x0 - aj) * aj2 - (bj2 - x0 - aj1) * aj1;
        eb.push(q.abs() / (s * s) * nf.powf(1.5 * edge.alpha + edge.epsilon));
        amin = amin.min(aj / s);
        amax = amax.max(aj / s);
        bmin = bmin.min(bj.abs() / s);
        bmax = bmax.max(bj.abs() / s);
    }
    let th = match thresholds {
        Some(t) => *t,
        None => default_thresholds(spec, edge)?,
    };
    Ok(HypothesisReport {
        n,
        edge: *edge,
        window: (lo, hi),
        slow_a: HypothesisQuantity::new(da, th.slow_a),
        slow_b: HypothesisQuantity::new(db, th.slow_b),
        second_difference: HypothesisQuantity::new(sd, th.second_difference),
        edge_balance: HypothesisQuantity::new(eb, th.edge_balance),
        min_abs_a: amin,
        max_abs_a: amax,
        min_abs_b: bmin,
        max_abs_b: bmax,
    })
}

/// Ten times the maxima observed at `n = 1000` with `x0` at the exact edge.
pub fn default_thresholds(spec: &EnsembleSpec, edge: &EdgeSpec) -> Result<HypothesisThresholds> {
    const N_REF: usize = 1000;
    let reference = EdgeSpec {
        x0: spec.edge_location(N_REF, edge.side)?,
        ..*edge
    };
    let unlimited = HypothesisThresholds {
        slow_a: f64::INFINITY,
        slow_b: f64::INFINITY,
        second_difference: f64::INFINITY,
        edge_balance: f64::INFINITY,
    };
    let r = check_hypotheses(spec, N_REF, &reference, Some(&unlimited))?;
    Ok(HypothesisThresholds {
        slow_a: 10.0 * r.slow_a.max,
        slow_b: 10.0 * r.slow_b.max,
        second_difference: 10.0 * r.second_difference.max,
        edge_balance: 10.0 * r.edge_balance.max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chebyshev_is_constant() {
        let s = EnsembleSpec::chebyshev2();
        assert_eq!(s.recurrence(5, 17).unwrap(), (1.0, 0.0));
        assert_eq!(s.recurrence(5, 1000).unwrap(), (1.0, 0.0));
        assert!(!s.varying());
    }

    #[test]
    fn laguerre_substitution() {
        let s = EnsembleSpec::laguerre(0.0).unwrap();
        assert_eq!(s.recurrence(4, 2).unwrap(), (2.0, 4.5));
    }

    #[test]
    fn hermite_at_j_equals_n() {
        let s = EnsembleSpec::hermite();
        for n in [1, 7, 100, 4096] {
            assert_eq!(s.recurrence(n, n).unwrap(), (1.0, 0.0));
        }
    }

    #[test]
    fn jacobi_half_half_is_chebyshev() {
        let s = EnsembleSpec::modified_jacobi(0.5, 0.5).unwrap();
        for j in 1..50 {
            let (a, b) = s.recurrence(j, 1).unwrap();
            assert!((a - 1.0).abs() < 1e-15, "j={j} a={a}");
            assert_eq!(b, 0.0);
        }
        assert_eq!(s.b(0, 1).unwrap(), 0.0);
    }

    #[test]
    fn jacobi_first_coefficients_are_finite() {
        let s = EnsembleSpec::modified_jacobi(-0.5, -0.5).unwrap();
        // Chebyshev first kind on [-2, 2]: a_1 = sqrt(2), a_j = 1 afterwards.
        assert!((s.a(1, 1).unwrap() - 2f64.sqrt()).abs() < 1e-14);
        assert!((s.a(2, 1).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(s.b(0, 1).unwrap(), 0.0);
    }

    #[test]
    fn jacobi_expansion_tracks_exact() {
        let exact = EnsembleSpec::modified_jacobi(0.3, -0.4).unwrap();
        let approx = EnsembleSpec::modified_jacobi_expansion(0.3, -0.4).unwrap();
        let j = 400;
        let da = (exact.a(j, 1).unwrap() - approx.a(j, 1).unwrap()).abs();
        let db = (exact.b(j, 1).unwrap() - approx.b(j, 1).unwrap()).abs();
        assert!(da < 1e-7 && db < 1e-7, "{da} {db}");
    }

    #[test]
    fn edges() {
        let c = EnsembleSpec::chebyshev2();
        assert_eq!(c.edge_location(100, Side::Right).unwrap(), 2.0);
        assert_eq!(c.edge_location(100, Side::Left).unwrap(), -2.0);
        let l = EnsembleSpec::laguerre(0.0).unwrap();
        let e = l.edge_location(10, Side::Left).unwrap();
        assert!((e - (1.9 - 2.0 * 0.9f64.sqrt())).abs() < 1e-15);
        assert!((e - 0.002633403898972).abs() < 1e-12);
        let h = EnsembleSpec::hermite();
        let e = h.edge_location(100, Side::Right).unwrap();
        assert!((e - 1.994_981_139_867_362_3).abs() < 1e-14);
    }

    #[test]
    fn freud_two_matches_rescaled_hermite() {
        // exp(-n x^2) has a_{j,n} = sqrt(j / (2n))
        let f = EnsembleSpec::freud(2.0).unwrap();
        let a = f.a(300, 200).unwrap();
        assert!((a - (300.0f64 / 400.0).sqrt()).abs() < 1e-14);
        assert_eq!(f.moment_problem_determinate(), Some(true));
        assert_eq!(EnsembleSpec::freud(0.5).unwrap().moment_problem_determinate(), Some(false));
    }

    #[test]
    fn discrete_families_have_support() {
        let k = EnsembleSpec::krawtchouk(0.3, 2.0).unwrap();
        assert_eq!(k.last_index(50), Some(100));
        assert!(k.recurrence(100, 50).is_ok());
        assert!(matches!(k.recurrence(101, 50), Err(Error::OutOfDomain { .. })));
        let h = EnsembleSpec::hahn(1.0, 1.0, 1.5).unwrap();
        assert!(matches!(h.recurrence(76, 50), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(EnsembleSpec::laguerre(-1.0).is_err());
        assert!(EnsembleSpec::modified_jacobi(-1.5, 0.0).is_err());
        assert!(EnsembleSpec::freud(0.0).is_err());
        assert!(EnsembleSpec::tricomi_carlitz(1.0).is_err());
        assert!(EnsembleSpec::krawtchouk(1.0, 2.0).is_err());
        assert!(EnsembleSpec::hahn(1.0, 0.0, 2.0).is_err());
        assert!(EnsembleSpec::hahn(1.0, 1.0, 0.5).is_err());
        let mut p = BTreeMap::new();
        p.insert("beta".to_string(), 1.0);
        assert!(EnsembleSpec::new(Family::Laguerre, p).is_err());
    }

    #[test]
    fn json_round_trip_and_unknown_keys() {
        let s = EnsembleSpec::from_json(r#"{"family":"krawtchouk","params":{"p":0.25,"t":3}}"#).unwrap();
        assert_eq!(s.family(), Family::Krawtchouk);
        let back = EnsembleSpec::from_json(&s.to_json().unwrap()).unwrap();
        assert_eq!(back, s);
        assert!(EnsembleSpec::from_json(r#"{"family":"hermite","params":{},"extra":1}"#).is_err());
        assert!(EnsembleSpec::from_json(r#"{"family":"hermite","params":{"gamma":1}}"#).is_err());
        assert!(EnsembleSpec::from_json(r#"{"family":"nope"}"#).is_err());
    }

    #[test]
    fn custom_is_rejected_where_closed_forms_are_needed() {
        let c = EnsembleSpec::custom(false, |_, _| (1.0, 0.0));
        assert_eq!(c.recurrence(3, 3).unwrap(), (1.0, 0.0));
        assert!(c.require_closed_form().is_err());
        assert!(c.to_json().is_err());
    }

    #[test]
    fn laguerre_edge_balance_is_exactly_zero() {
        let s = EnsembleSpec::laguerre(0.0).unwrap();
        for n in [50, 400, 3000] {
            let edge = EdgeSpec::new(Side::Left, 0.0, 1.0, 0.1).unwrap();
            let r = check_hypotheses(&s, n, &edge, None).unwrap();
            assert!(r.edge_balance.values.iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn chebyshev_hypotheses_all_zero() {
        let s = EnsembleSpec::chebyshev2();
        let edge = EdgeSpec::new(Side::Right, 2.0, 0.7, 0.2).unwrap();
        let r = check_hypotheses(&s, 500, &edge, None).unwrap();
        for q in [&r.slow_a, &r.slow_b, &r.second_difference, &r.edge_balance] {
            assert_eq!(q.max, 0.0);
            assert!(q.pass);
        }
    }

    #[test]
    fn hermite_slow_variation_constant() {
        // max over the window of |sqrt(j/n) - sqrt((j-1)/n)| * n is close to 1/2
        let s = EnsembleSpec::hermite();
        let edge = EdgeSpec::at_edge(&s, 1000, Side::Right, 0.5, 0.1).unwrap();
        let r = check_hypotheses(&s, 1000, &edge, None).unwrap();
        assert!((r.slow_a.max - 0.502_900_053_011_345_9).abs() < 1e-12, "{}", r.slow_a.max);
    }

    #[test]
    fn window_too_close_to_origin() {
        let s = EnsembleSpec::hermite();
        let edge = EdgeSpec::new(Side::Right, 2.0, 1.9, 0.04).unwrap();
        assert!(matches!(
            check_hypotheses(&s, 3, &edge, None),
            Err(Error::OutOfDomain { .. })
        ));
    }
}
