//! Exact finite-n cumulants of the zoomed linear statistic
//! `X = sum_i f(n^alpha (x_i - x0))` from trace formulas on a truncated Jacobi matrix.
//!
//! `F = sum_r c_r (J - x0 - eta_r / n^alpha)^{-1}` so that `f(n^alpha (J - x0)) = n^{-alpha} F`
//! and the m-th cumulant of `X` is `n^{-m alpha} C_m(F)` with
//!
//! ```text
//! C_1 = Tr(P F P)
//! C_m = m! sum_{j=2}^m (-1)^(j+1)/j sum_{l_1+..+l_j=m} [Tr(F^l1 P .. F^lj P) - Tr(F^m P)] / (l_1! .. l_j!)
//! ```
//!
//! where `P` projects on the first `n` rows.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::{EdgeSpec, EnsembleSpec, Side};
use crate::error::{Error, Result};
use crate::testfn::ResolventTestFunction;
use crate::tridiag::Resolvent;

/// Largest supported cumulant order.
pub const M_MAX: usize = 6;

/// Scalars accepted by the trace routines (`f64` or `Complex64`).
pub trait Entry: ComplexField<RealField = f64> + Copy {
    fn to_c64(self) -> Complex64 {
        Complex64::new(self.real(), self.imaginary())
    }
}

impl Entry for f64 {}
impl Entry for Complex64 {}

/// Compensated complex sum.
#[derive(Clone, Copy, Default)]
struct Kahan {
    sum: Complex64,
    carry: Complex64,
}

impl Kahan {
    fn add(&mut self, v: Complex64) {
        let y = v - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }
}

/// `F` on the rows `low..=high` of the Jacobi matrix; `rank` is the number of
/// local rows that belong to the first `n`.
#[derive(Clone, Debug)]
pub struct OperatorF {
    pub matrix: DMatrix<f64>,
    pub low: usize,
    pub high: usize,
    pub rank: usize,
}

fn check_window(n: usize, alpha: f64, low: usize, high: usize) -> Result<()> {
    if low == 0 || low > n || high < n {
        return Err(Error::InvalidInput(format!(
            "window {low}..={high} must contain row {n}"
        )));
    }
    let required = (n as f64).powf(alpha / 2.0);
    let margin = (high - n).min(if low > 1 { n + 1 - low } else { usize::MAX });
    if (margin as f64) < required {
        return Err(Error::WindowTooSmall { margin, required });
    }
    Ok(())
}

fn resolvents(
    spec: &EnsembleSpec,
    n: usize,
    edge: &EdgeSpec,
    f: &ResolventTestFunction,
    low: usize,
    high: usize,
) -> Result<Vec<Resolvent>> {
    check_window(n, edge.alpha, low, high)?;
    let base = spec.jacobi_block(n, low, high)?;
    let na = (n as f64).powf(edge.alpha);
    f.poles()
        .par_iter()
        .map(|p| Resolvent::new(&base.with_shift(edge.x0 + p / na)))
        .collect()
}

/// `F` for the rows `low..=high`. The conjugate half of the expansion is folded
/// in as `2 Re(c_r G_r)`, so the result is real and symmetric by construction.
pub fn build_f(
    spec: &EnsembleSpec,
    n: usize,
    edge: &EdgeSpec,
    f: &ResolventTestFunction,
    window: (usize, usize),
) -> Result<OperatorF> {
    let (low, high) = window;
    let rs = resolvents(spec, n, edge, f, low, high)?;
    let size = high - low + 1;
    let mut out = DMatrix::zeros(size, size);
    for (res, (c, _)) in rs.iter().zip(f.expanded()) {
        res.add_real_part(2.0 * c, &mut out);
    }
    Ok(OperatorF {
        matrix: out,
        low,
        high,
        rank: n - low + 1,
    })
}

/// `F` summed over all `2M` expanded pairs in complex arithmetic; its imaginary
/// part measures how well the conjugate closure holds numerically.
pub fn build_f_expanded(
    spec: &EnsembleSpec,
    n: usize,
    edge: &EdgeSpec,
    f: &ResolventTestFunction,
    window: (usize, usize),
) -> Result<DMatrix<Complex64>> {
    let (low, high) = window;
    check_window(n, edge.alpha, low, high)?;
    let base = spec.jacobi_block(n, low, high)?;
    let na = (n as f64).powf(edge.alpha);
    let size = high - low + 1;
    let mut out = DMatrix::zeros(size, size);
    for (c, eta) in f.expanded() {
        let g = Resolvent::new(&base.with_shift(edge.x0 + eta / na))?.dense();
        out += g * c;
    }
    Ok(out)
}

/// Default margin beyond row `n`: `4 ceil(n^(alpha/2 + eps))`. Truncation
/// effects decay like `exp(-c n^eps)`, so higher cumulants of the truncated
/// operator carry a residual that vanishes as `n` grows.
pub fn default_margin(n: usize, edge: &EdgeSpec) -> usize {
    4 * (n as f64).powf(edge.alpha / 2.0 + edge.epsilon).ceil() as usize
}

/// Margin that pushes the reflection from the truncation boundary to about
/// `exp(-40)` at the free edge: `ceil(20 n^(alpha/2) / max(0.05, min_r Re sqrt(-/+ eta_r)))`,
/// never below [`default_margin`].
pub fn reflection_free_margin(n: usize, edge: &EdgeSpec, f: &ResolventTestFunction) -> usize {
    let decay = f
        .poles()
        .iter()
        .map(|p| match edge.side {
            Side::Left => (-p).sqrt().re,
            Side::Right => p.sqrt().re,
        })
        .fold(f64::INFINITY, f64::min)
        .max(0.05);
    let reflect = (20.0 * (n as f64).powf(edge.alpha / 2.0) / decay).ceil() as usize;
    default_margin(n, edge).max(reflect)
}

fn check_square<T: Entry>(f: &DMatrix<T>, n: usize) -> Result<()> {
    if !f.is_square() {
        return Err(Error::InvalidInput("F must be square".into()));
    }
    if n == 0 || n > f.nrows() {
        return Err(Error::InvalidInput(format!(
            "projection rank {n} outside 1..={}",
            f.nrows()
        )));
    }
    let scale = f.iter().map(|v| v.to_c64().norm()).fold(0.0, f64::max);
    let size = f.nrows();
    for i in 0..size {
        for k in i + 1..size {
            if (f[(i, k)].to_c64() - f[(k, i)].to_c64()).norm() > 1e-12 * scale {
                return Err(Error::InvalidInput("F must be symmetric".into()));
            }
        }
    }
    Ok(())
}

/// All compositions of `m` into `parts` positive integers.
fn compositions(m: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![m]];
    }
    (1..=m - (parts - 1))
        .flat_map(|first| {
            compositions(m - first, parts - 1).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}

/// Smallest rotation of the sequence or its reversal. Traces of products of
/// symmetric matrices are invariant under both.
fn canonical(seq: &[usize]) -> Vec<usize> {
    let k = seq.len();
    let mut rev = seq.to_vec();
    rev.reverse();
    let mut best = seq.to_vec();
    for s in [seq.to_vec(), rev] {
        for r in 0..k {
            let rot: Vec<usize> = s[r..].iter().chain(&s[..r]).cloned().collect();
            if rot < best {
                best = rot;
            }
        }
    }
    best
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|v| v as f64).product()
}

struct Products<'a, T: Entry> {
    blocks: &'a [DMatrix<T>],
    memo: HashMap<Vec<usize>, DMatrix<T>>,
}

impl<'a, T: Entry> Products<'a, T> {
    fn ensure(&mut self, seq: &[usize]) {
        if seq.len() < 2 || self.memo.contains_key(seq) {
            return;
        }
        self.ensure(&seq[..seq.len() - 1]);
        let prod = self.get(&seq[..seq.len() - 1]) * &self.blocks[seq[seq.len() - 1] - 1];
        self.memo.insert(seq.to_vec(), prod);
    }

    fn get(&self, seq: &[usize]) -> &DMatrix<T> {
        if seq.len() == 1 {
            &self.blocks[seq[0] - 1]
        } else {
            &self.memo[seq]
        }
    }

    /// `Tr(A_l1 .. A_lj)` as `sum_{ik} L_ik R_ki` over two halves.
    fn trace(&mut self, seq: &[usize]) -> Complex64 {
        let h = seq.len().div_ceil(2);
        let (l, r) = seq.split_at(h);
        self.ensure(l);
        self.ensure(r);
        let (lm, rm) = (self.get(l), self.get(r));
        let mut acc = Kahan::default();
        for i in 0..lm.nrows() {
            for k in 0..lm.ncols() {
                acc.add((lm[(i, k)] * rm[(k, i)]).to_c64());
            }
        }
        acc.sum
    }
}

/// `C_1..C_{m_max}` of `F` with `P` the projection on the first `n` rows.
pub fn cumulants<T: Entry>(f: &DMatrix<T>, n: usize, m_max: usize) -> Result<Vec<Complex64>> {
    if m_max == 0 || m_max > M_MAX {
        return Err(Error::InvalidInput(format!("order must be in 1..={M_MAX}")));
    }
    check_square(f, n)?;
    let mut out = Vec::with_capacity(m_max);
    let mut c1 = Kahan::default();
    for i in 0..n {
        c1.add(f[(i, i)].to_c64());
    }
    out.push(c1.sum);
    if m_max == 1 {
        return Ok(out);
    }
    // B_l = F^l P (N x n), A_l = P F^l P (n x n), l = 1..m_max-1
    let mut b: Vec<DMatrix<T>> = vec![f.columns(0, n).into_owned()];
    for _ in 1..m_max - 1 {
        let next = f * b.last().expect("nonempty");
        b.push(next);
    }
    let a: Vec<DMatrix<T>> = b.iter().map(|m| m.rows(0, n).into_owned()).collect();
    let mut prods = Products {
        blocks: &a,
        memo: HashMap::new(),
    };
    let mut traces: HashMap<Vec<usize>, Complex64> = HashMap::new();
    for m in 2..=m_max {
        // Tr(F^m P) = sum_{ki} (B_p)_{ki} (B_q)_{ki}, p + q = m
        let (p, q) = (m / 2, m - m / 2);
        let mut full = Kahan::default();
        for (x, y) in b[p - 1].iter().zip(b[q - 1].iter()) {
            full.add((*x * *y).to_c64());
        }
        let full = full.sum;
        let mut total = Kahan::default();
        for j in 2..=m {
            let sign = if j % 2 == 0 { -1.0 } else { 1.0 } / j as f64;
            for comp in compositions(m, j) {
                let key = canonical(&comp);
                let tr = match traces.get(&key) {
                    Some(t) => *t,
                    None => {
                        let t = prods.trace(&key);
                        traces.insert(key, t);
                        t
                    }
                };
                let denom: f64 = comp.iter().map(|l| factorial(*l)).product();
                total.add((tr - full) * (sign / denom));
            }
        }
        out.push(total.sum * factorial(m));
    }
    Ok(out)
}

/// Coefficient of the cyclic state word `states` (position 0 is `P`) in `C_m`,
/// obtained by expanding every `F` in the composition sum as `(P+Q) F (P+Q)`.
fn word_coefficient(states: &[bool], m: usize) -> f64 {
    let mut total = 0.0;
    for j in 2..=m {
        let sign = if j % 2 == 0 { -1.0 } else { 1.0 } / j as f64;
        for comp in compositions(m, j) {
            let mut cut = 0;
            let mut inside = true;
            for l in &comp[..j - 1] {
                cut += l;
                inside &= !states[cut];
            }
            if !inside {
                let denom: f64 = comp.iter().map(|l| factorial(*l)).product();
                total -= sign / denom;
            }
        }
    }
    total * factorial(m)
}

/// `C_1..C_{m_max}` from the block expansion `F = [[A, B], [B^T, D]]` in the
/// `P`/`Q` splitting. Every surviving word contains `B` at least twice, so the
/// traces live near row `n` and the large `Tr(F^m P)` cancellation of
/// [`cumulants`] never happens. Cost is `O(m N^2 (N - n))` per word.
pub fn cumulants_boundary<T: Entry>(f: &DMatrix<T>, n: usize, m_max: usize) -> Result<Vec<Complex64>> {
    if m_max == 0 || m_max > M_MAX {
        return Err(Error::InvalidInput(format!("order must be in 1..={M_MAX}")));
    }
    check_square(f, n)?;
    let size = f.nrows();
    let q = size - n;
    let mut c1 = Kahan::default();
    for i in 0..n {
        c1.add(f[(i, i)].to_c64());
    }
    let mut out = vec![c1.sum];
    // block of F between states (true = Q)
    let block = |s: bool, t: bool| {
        let (r0, nr) = if s { (n, q) } else { (0, n) };
        let (c0, nc) = if t { (n, q) } else { (0, n) };
        f.view((r0, c0), (nr, nc))
    };
    let mut words: HashMap<Vec<bool>, Complex64> = HashMap::new();
    for m in 2..=m_max {
        let mut coef: BTreeMap<Vec<bool>, f64> = BTreeMap::new();
        for mask in 1u32..(1 << (m - 1)) {
            let states: Vec<bool> = (0..m).map(|i| i > 0 && mask & (1 << (i - 1)) != 0).collect();
            let c = word_coefficient(&states, m);
            if c != 0.0 {
                *coef.entry(canonical_word(&states)).or_default() += c;
            }
        }
        let mut total = Kahan::default();
        for (word, c) in coef {
            if c.abs() < 1e-9 || q == 0 {
                continue;
            }
            let w = match words.get(&word) {
                Some(w) => *w,
                None => {
                    // canonical words start in Q: evaluate right to left on q columns
                    let mut r: DMatrix<T> = block(word[m - 1], word[0]).into_owned();
                    for i in (1..m - 1).rev() {
                        r = block(word[i], word[i + 1]) * r;
                    }
                    let r = block(word[0], word[1]) * r;
                    let mut acc = Kahan::default();
                    for i in 0..q {
                        acc.add(r[(i, i)].to_c64());
                    }
                    words.insert(word.clone(), acc.sum);
                    acc.sum
                }
            };
            total.add(w * c);
        }
        out.push(total.sum);
    }
    Ok(out)
}

/// Largest rotation or reversal of a cyclic state word, so that it starts in `Q`.
fn canonical_word(states: &[bool]) -> Vec<bool> {
    let k = states.len();
    let mut rev = states.to_vec();
    rev.reverse();
    let mut best = states.to_vec();
    for s in [states.to_vec(), rev] {
        for r in 0..k {
            let rot: Vec<bool> = s[r..].iter().chain(&s[..r]).cloned().collect();
            if rot > best {
                best = rot;
            }
        }
    }
    best
}

/// `C_m(F)` for a single order.
pub fn cumulant<T: Entry>(f: &DMatrix<T>, n: usize, m: usize) -> Result<Complex64> {
    Ok(cumulants(f, n, m)?[m - 1])
}

/// `C_2 = Tr(P F Q F P) = sum_{k >= n, i < n} F_ki^2` with `Q = I - P`.
pub fn c2_off_block<T: Entry>(f: &DMatrix<T>, n: usize) -> Result<Complex64> {
    check_square(f, n)?;
    let mut acc = Kahan::default();
    for i in 0..n {
        for k in n..f.nrows() {
            acc.add((f[(k, i)] * f[(k, i)]).to_c64());
        }
    }
    Ok(acc.sum)
}

/// `C_2 = -1/2 Tr([F, P]^2)`, which is `1/2 ||[F, P]||^2` for real `F`.
pub fn c2_commutator<T: Entry>(f: &DMatrix<T>, n: usize) -> Result<Complex64> {
    check_square(f, n)?;
    let size = f.nrows();
    let comm = DMatrix::from_fn(size, size, |i, k| {
        let fp = if k < n { f[(i, k)] } else { T::zero() };
        let pf = if i < n { f[(i, k)] } else { T::zero() };
        fp - pf
    });
    let mut acc = Kahan::default();
    for i in 0..size {
        for k in 0..size {
            acc.add((comm[(i, k)] * comm[(k, i)]).to_c64());
        }
    }
    Ok(acc.sum * -0.5)
}

/// Spectral norm of `F` from power iteration on `F F^H`.
pub fn operator_norm_estimate<T: Entry>(f: &DMatrix<T>, iterations: usize) -> f64 {
    let size = f.ncols();
    let mut v = DVector::<T>::from_fn(size, |i, _| T::from_f64(1.0 + (i % 5) as f64 * 0.1).expect("f64"));
    let mut est = 0.0;
    for _ in 0..iterations.max(1) {
        let nv = v.norm();
        if nv == 0.0 {
            return 0.0;
        }
        v.unscale_mut(nv);
        let w = f.ad_mul(&v);
        let u = f * w;
        est = u.norm().sqrt();
        v = u;
    }
    est
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub m: usize,
    pub cumulant_abs: f64,
    pub c2: f64,
    pub op_norm: f64,
    /// `sqrt(2/pi) m! m^(3/2) ||F||^(m-2) e^m C_2`
    pub bound: f64,
    pub holds: bool,
    /// `bound / |C_m|`, infinite when `C_m = 0`
    pub slack: f64,
}

/// Compares `|C_m|` with the domination bound in terms of `C_2` and `||F||`.
pub fn cumulant_bound_check<T: Entry>(f: &DMatrix<T>, n: usize, m: usize) -> Result<BoundReport> {
    if !(3..=M_MAX).contains(&m) {
        return Err(Error::InvalidInput(format!("bound check needs 3 <= m <= {M_MAX}")));
    }
    let cs = cumulants(f, n, m)?;
    let cm = cs[m - 1].norm();
    let c2 = cs[1].re.max(0.0);
    let op_norm = operator_norm_estimate(f, 50);
    let mf = m as f64;
    let bound = (2.0 / std::f64::consts::PI).sqrt()
        * factorial(m)
        * mf.powf(1.5)
        * op_norm.powi(m as i32 - 2)
        * mf.exp()
        * c2;
    Ok(BoundReport {
        m,
        cumulant_abs: cm,
        c2,
        op_norm,
        bound,
        holds: cm <= bound * (1.0 + 1e-12),
        slack: if cm > 0.0 { bound / cm } else { f64::INFINITY },
    })
}

/// Zoom parameters for a sweep; `x0 = None` centres each `n` at its exact edge.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeConfig {
    pub side: Side,
    pub alpha: f64,
    pub epsilon: f64,
    #[serde(default)]
    pub x0: Option<f64>,
}

impl EdgeConfig {
    pub fn at(&self, spec: &EnsembleSpec, n: usize) -> Result<EdgeSpec> {
        let x0 = match self.x0 {
            Some(x) => x,
            None => spec.edge_location(n, self.side)?,
        };
        EdgeSpec::new(self.side, x0, self.alpha, self.epsilon)
    }
}

/// Rows kept beyond `n`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Margin {
    #[default]
    Default,
    ReflectionFree,
    Fixed(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub m_max: usize,
    pub margin: Margin,
    /// Multiplies the margin (truncation-stability studies).
    pub margin_factor: f64,
    /// Trim the window on both sides of row `n`.
    pub two_sided: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            m_max: 4,
            margin: Margin::Default,
            margin_factor: 1.0,
            two_sided: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CumulantReport {
    pub n: usize,
    pub alpha: f64,
    pub x0: f64,
    pub side: Side,
    /// `m -> n^(-m alpha) C_m`
    pub scaled_cumulants: BTreeMap<usize, Complex64>,
    pub window: (usize, usize),
    pub margin: usize,
    pub op_norm_estimate: f64,
    /// `n^(-2 alpha) Tr(P F Q F P)`, a second route to the variance
    pub scaled_c2_off_block: f64,
}

impl CumulantReport {
    pub fn scaled(&self, m: usize) -> Complex64 {
        self.scaled_cumulants[&m]
    }
}

/// Cumulants of one `n`.
pub fn cumulant_report(
    spec: &EnsembleSpec,
    n: usize,
    edge: &EdgeSpec,
    f: &ResolventTestFunction,
    opts: &SweepOptions,
) -> Result<CumulantReport> {
    if !(opts.margin_factor >= 1.0) {
        return Err(Error::InvalidInput("margin_factor must be >= 1".into()));
    }
    let base = match opts.margin {
        Margin::Default => default_margin(n, edge),
        Margin::ReflectionFree => reflection_free_margin(n, edge, f),
        Margin::Fixed(m) => m,
    };
    let margin = (base as f64 * opts.margin_factor).ceil() as usize;
    let low = if opts.two_sided { n.saturating_sub(margin).max(1) } else { 1 };
    let op = build_f(spec, n, edge, f, (low, n + margin))?;
    let raw = cumulants_boundary(&op.matrix, op.rank, opts.m_max)?;
    let na = (n as f64).powf(edge.alpha);
    let scaled_cumulants = raw
        .iter()
        .enumerate()
        .map(|(i, c)| (i + 1, c / na.powi(i as i32 + 1)))
        .collect();
    Ok(CumulantReport {
        n,
        alpha: edge.alpha,
        x0: edge.x0,
        side: edge.side,
        scaled_cumulants,
        window: (op.low, op.high),
        margin,
        op_norm_estimate: operator_norm_estimate(&op.matrix, 50),
        scaled_c2_off_block: c2_off_block(&op.matrix, op.rank)?.re / (na * na),
    })
}

/// One report per `n`, in order.
pub fn convergence_sweep(
    spec: &EnsembleSpec,
    edge: &EdgeConfig,
    f: &ResolventTestFunction,
    n_list: &[usize],
    opts: &SweepOptions,
) -> Result<Vec<CumulantReport>> {
    if n_list.is_empty() || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("n_list must be nonempty and strictly ascending".into()));
    }
    n_list
        .iter()
        .map(|&n| cumulant_report(spec, n, &edge.at(spec, n)?, f, opts))
        .collect()
}

/// CSV `n,alpha,m,value_re,value_im` with 17 significant digits.
pub fn write_reports_csv<W: Write>(reports: &[CumulantReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "alpha", "m", "value_re", "value_im"])?;
    for r in reports {
        for (m, v) in &r.scaled_cumulants {
            w.write_record([
                r.n.to_string(),
                format!("{:.16e}", r.alpha),
                m.to_string(),
                format!("{:.16e}", v.re),
                format!("{:.16e}", v.im),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
