//! Rational test functions `f(x) = sum_r Im(d_r / (x - lambda_r))`, `Im lambda_r > 0`.
//!
//! Text form (whitespace ignored):
//!
//! ```text
//! function := term { "+" term }
//! term     := ("im" | "re") ":" coef "/(x" ("-" | "+") pole ")"
//! coef     := real | "(" complex ")"
//! pole     := complex | "(" complex ")"
//! complex  := real | [real] ("+" | "-") [real] "i" | [real] "i"
//! ```
//!
//! `re:` terms are stored as `im:` terms with weight `i d`. Unparenthesized
//! poles read literally: `(x-0.5-3i)` has the pole `0.5+3i`. Examples:
//! `im:1/(x-i)`, `re:2/(x-(0.5+2i))`, `im:(1-i)/(x-3i) + re:0.25/(x+1-i)`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ResolventTestFunction {
    poles: Vec<Complex64>,
    weights: Vec<Complex64>,
}

impl ResolventTestFunction {
    /// Complex weights generalize the real-weight form; `Re(w/(x-p))` is the
    /// weight `i w`.
    pub fn new(poles: Vec<Complex64>, weights: Vec<Complex64>) -> Result<Self> {
        if poles.is_empty() || poles.len() != weights.len() {
            return Err(Error::InvalidInput(
                "need at least one pole and one weight per pole".into(),
            ));
        }
        if poles.iter().any(|p| !(p.im > 0.0) || !p.is_finite()) {
            return Err(Error::InvalidInput("poles must be finite with Im > 0".into()));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidInput("weights must be finite".into()));
        }
        Ok(ResolventTestFunction { poles, weights })
    }

    /// Real weights `d_r`.
    pub fn from_real(poles: Vec<Complex64>, weights: &[f64]) -> Result<Self> {
        ResolventTestFunction::new(poles, weights.iter().map(|d| Complex64::new(*d, 0.0)).collect())
    }

    /// `Im 1/(x - pole)`.
    pub fn im(pole: Complex64) -> Result<Self> {
        ResolventTestFunction::new(vec![pole], vec![Complex64::new(1.0, 0.0)])
    }

    /// `Re 1/(x - pole)`.
    pub fn re(pole: Complex64) -> Result<Self> {
        ResolventTestFunction::new(vec![pole], vec![I])
    }

    pub fn poles(&self) -> &[Complex64] {
        &self.poles
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    /// Conjugate-closed pairs `(c_r, eta_r)`, `r = 1..2M`, with
    /// `f(x) = sum c_r / (x - eta_r)`:
    /// `c_r = d_r / 2i`, `eta_r = lambda_r`, `c_{r+M} = -conj(d_r) / 2i`, `eta_{r+M} = conj(lambda_r)`.
    pub fn expanded(&self) -> Vec<(Complex64, Complex64)> {
        let up = self.poles.iter().zip(&self.weights).map(|(p, d)| (d / (2.0 * I), *p));
        let down = self
            .poles
            .iter()
            .zip(&self.weights)
            .map(|(p, d)| (-d.conj() / (2.0 * I), p.conj()));
        up.chain(down).collect()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.poles
            .iter()
            .zip(&self.weights)
            .map(|(p, d)| (d / (x - p)).im)
            .sum()
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.poles
            .iter()
            .zip(&self.weights)
            .map(|(p, d)| (-d / ((x - p) * (x - p))).im)
            .sum()
    }

    /// `x -> f(s x)` for `s > 0`.
    pub fn dilate(&self, s: f64) -> Result<Self> {
        if !(s > 0.0) {
            return Err(Error::InvalidInput("dilation factor must be positive".into()));
        }
        ResolventTestFunction::new(
            self.poles.iter().map(|p| p / s).collect(),
            self.weights.iter().map(|d| d / s).collect(),
        )
    }

    /// Sum of two functions.
    pub fn add(&self, other: &Self) -> Self {
        ResolventTestFunction {
            poles: self.poles.iter().chain(&other.poles).cloned().collect(),
            weights: self.weights.iter().chain(&other.weights).cloned().collect(),
        }
    }

    /// `s f`.
    pub fn scale(&self, s: f64) -> Self {
        ResolventTestFunction {
            poles: self.poles.clone(),
            weights: self.weights.iter().map(|w| w * s).collect(),
        }
    }

    /// `sum_r |c_r / Im eta_r|` over the expanded pairs.
    pub fn resolvent_norm_sum(&self) -> f64 {
        self.expanded().iter().map(|(c, e)| c.norm() / e.im.abs()).sum()
    }
}

/// Parses `a`, `bi`, `a+bi`, `a-bi`, `i`, `-i`, optionally in parentheses.
pub fn parse_complex(text: &str) -> Result<Complex64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let s = s.strip_prefix('(').and_then(|t| t.strip_suffix(')')).unwrap_or(&s);
    let bad = || Error::Config(format!("bad complex literal `{text}`"));
    if s.is_empty() {
        return Err(bad());
    }
    let real = |t: &str| t.parse::<f64>().map_err(|_| bad());
    let unit = |t: &str| match t {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        t => real(t),
    };
    let Some(body) = s.strip_suffix('i') else {
        return Ok(Complex64::new(real(s)?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match split {
        Some(k) => Ok(Complex64::new(real(&body[..k])?, unit(&body[k..])?)),
        None => Ok(Complex64::new(0.0, unit(body)?)),
    }
}

fn split_terms(s: &str) -> Vec<&str> {
    let mut out = vec![];
    let mut depth = 0i32;
    let mut start = 0;
    let b = s.as_bytes();
    for (k, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            '+' if depth == 0 && (b[k + 1..].starts_with(b"im:") || b[k + 1..].starts_with(b"re:")) => {
                out.push(&s[start..k]);
                start = k + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

impl FromStr for ResolventTestFunction {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let s: String = text.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_ascii_lowercase();
        let bad = |why: &str| Error::Config(format!("test function `{text}`: {why}"));
        let mut poles = vec![];
        let mut weights = vec![];
        for term in split_terms(&s) {
            let (part, rest) = term.split_once(':').ok_or_else(|| bad("missing `im:` or `re:`"))?;
            let k = rest.find("/(x").ok_or_else(|| bad("expected `/(x-pole)`"))?;
            let coef = parse_complex(&rest[..k])?;
            let tail = rest[k + 3..].strip_suffix(')').ok_or_else(|| bad("unbalanced parentheses"))?;
            // `x-(p)` and `x+(p)` group the pole; otherwise `x` is followed by a
            // signed complex literal `s` and the pole is `-s`
            let pole = match (tail.get(..1), tail.get(1..2)) {
                (Some("-"), Some("(")) => parse_complex(&tail[1..])?,
                (Some("+"), Some("(")) => -parse_complex(&tail[1..])?,
                (Some("-" | "+"), _) => -parse_complex(tail)?,
                _ => return Err(bad("expected `x-` or `x+`")),
            };
            let weight = match part {
                "im" => coef,
                "re" => I * coef,
                _ => return Err(bad("term must start with `im:` or `re:`")),
            };
            poles.push(pole);
            weights.push(weight);
        }
        ResolventTestFunction::new(poles, weights).map_err(|e| bad(&e.to_string()))
    }
}

fn fmt_complex(c: Complex64) -> String {
    format!("({:?}{:+?}i)", c.re, c.im)
}

impl fmt::Display for ResolventTestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .poles
            .iter()
            .zip(&self.weights)
            .map(|(p, d)| format!("im:{}/(x-{})", fmt_complex(*d), fmt_complex(*p)))
            .collect();
        f.write_str(&terms.join("+"))
    }
}

impl TryFrom<String> for ResolventTestFunction {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ResolventTestFunction> for String {
    fn from(f: ResolventTestFunction) -> String {
        f.to_string()
    }
}

/// Any real test function the runner accepts: the rational family above or one
/// of two compactly supported shapes, `bump` (`exp(-1/(1-x^2))` on `(-1, 1)`)
/// and `hat` (the triangle on `[0, 1]` with peak 1 at `1/2`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum TestFunction {
    Resolvent(ResolventTestFunction),
    Bump,
    Hat,
}

impl TestFunction {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            TestFunction::Resolvent(f) => f.eval(x),
            TestFunction::Bump if x.abs() < 1.0 => (-1.0 / (1.0 - x * x)).exp(),
            TestFunction::Hat => (1.0 - (2.0 * x - 1.0).abs()).max(0.0),
            TestFunction::Bump => 0.0,
        }
    }

    pub fn support(&self) -> Option<(f64, f64)> {
        match self {
            TestFunction::Resolvent(_) => None,
            TestFunction::Bump => Some((-1.0, 1.0)),
            TestFunction::Hat => Some((0.0, 1.0)),
        }
    }

    /// The rational form, or `Config` for the compactly supported shapes.
    pub fn resolvent(&self) -> Result<&ResolventTestFunction> {
        match self {
            TestFunction::Resolvent(f) => Ok(f),
            other => Err(Error::Config(format!("`{other}` is not of the form im:d/(x-pole)"))),
        }
    }
}

impl FromStr for TestFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "bump" => Ok(TestFunction::Bump),
            "hat" => Ok(TestFunction::Hat),
            other => Ok(TestFunction::Resolvent(other.parse()?)),
        }
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestFunction::Resolvent(r) => r.fmt(f),
            TestFunction::Bump => f.write_str("bump"),
            TestFunction::Hat => f.write_str("hat"),
        }
    }
}

impl TryFrom<String> for TestFunction {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<TestFunction> for String {
    fn from(f: TestFunction) -> String {
        f.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn complex_literals() {
        assert_eq!(parse_complex("i").unwrap(), c(0.0, 1.0));
        assert_eq!(parse_complex("-i").unwrap(), c(0.0, -1.0));
        assert_eq!(parse_complex("2.5").unwrap(), c(2.5, 0.0));
        assert_eq!(parse_complex("3i").unwrap(), c(0.0, 3.0));
        assert_eq!(parse_complex("1-2i").unwrap(), c(1.0, -2.0));
        assert_eq!(parse_complex("(1e-3+i)").unwrap(), c(1e-3, 1.0));
        assert_eq!(parse_complex("-1.5e+2-0.5i").unwrap(), c(-150.0, -0.5));
        assert!(parse_complex("1+").is_err());
        assert!(parse_complex("").is_err());
    }

    #[test]
    fn parse_single_terms() {
        let f: ResolventTestFunction = "im:1/(x-i)".parse().unwrap();
        assert_eq!(f, ResolventTestFunction::im(c(0.0, 1.0)).unwrap());
        let g: ResolventTestFunction = "re:1/(x-i)".parse().unwrap();
        assert_eq!(g, ResolventTestFunction::re(c(0.0, 1.0)).unwrap());
        assert!((f.eval(0.0) - 1.0).abs() < 1e-15);
        assert!(g.eval(0.0).abs() < 1e-15);
        assert!((g.eval(1.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn parse_sums_and_signs() {
        let f: ResolventTestFunction = "im:(1-i)/(x-(0.5+2i)) + re: 0.25/(x+1-i) + im:2/(x-0.5-3i)".parse().unwrap();
        assert_eq!(f.poles(), &[c(0.5, 2.0), c(-1.0, 1.0), c(0.5, 3.0)]);
        assert_eq!(f.weights(), &[c(1.0, -1.0), c(0.0, 0.25), c(2.0, 0.0)]);
        let back: ResolventTestFunction = f.to_string().parse().unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn rejects_bad_input() {
        for s in ["", "im:1/(x-(-i))", "xx:1/(x-i)", "im:1/(y-i)", "im:1/(x-i", "im:1/(x-2)"] {
            assert!(s.parse::<ResolventTestFunction>().is_err(), "{s}");
        }
    }

    #[test]
    fn expanded_form_is_real_on_the_line() {
        let f: ResolventTestFunction = "im:(1-i)/(x-(0.5+2i)) + re:3/(x-i)".parse().unwrap();
        for x in [-3.0, -0.2, 0.0, 1.7, 10.0] {
            let s: Complex64 = f.expanded().iter().map(|(cr, e)| cr / (x - e)).sum();
            assert!(s.im.abs() < 1e-15);
            assert!((s.re - f.eval(x)).abs() < 1e-14);
        }
    }

    #[test]
    fn derivative_matches_differences() {
        let f: ResolventTestFunction = "im:(1-i)/(x-(0.5+2i)) + re:3/(x-i)".parse().unwrap();
        let h = 1e-5;
        for x in [-1.0, 0.3, 2.0] {
            let fd = (f.eval(x + h) - f.eval(x - h)) / (2.0 * h);
            assert!((fd - f.derivative(x)).abs() < 1e-8);
        }
    }

    #[test]
    fn dilation() {
        let f = ResolventTestFunction::im(c(0.3, 1.0)).unwrap();
        let g = f.dilate(4.0).unwrap();
        assert!((g.eval(0.7) - f.eval(2.8)).abs() < 1e-15);
    }

    #[test]
    fn shapes() {
        let b: TestFunction = "bump".parse().unwrap();
        assert_eq!(b.eval(1.0), 0.0);
        assert!((b.eval(0.0) - (-1f64).exp()).abs() < 1e-16);
        let h: TestFunction = "hat".parse().unwrap();
        assert_eq!(h.eval(0.5), 1.0);
        assert_eq!(h.eval(-0.1), 0.0);
        assert!(h.resolvent().is_err());
        let r: TestFunction = "im:1/(x-i)".parse().unwrap();
        assert!((r.eval(0.0) - 1.0).abs() < 1e-15);
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(serde_json::from_str::<TestFunction>(&json).unwrap(), r);
    }
}
