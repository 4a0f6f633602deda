//! Scalar inequalities behind the moment argument, and calculators for the
//! security bounds of the main theorem and its applications.
//!
//! Asymptotic constants are explicit (`c`, default 1). With an untrusted
//! constant every value is illustrative, never a proven bound.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const WEIGHT_TOL: f64 = 1e-12;

/// A distribution `c_i` paired with nonnegative values `p_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedValues {
    weights: Vec<f64>,
    values: Vec<f64>,
}

impl WeightedValues {
    pub fn new(weights: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if weights.len() != values.len() || weights.is_empty() {
            return Err(Error::InvalidParameter("weights and values must be nonempty and equally long".into()));
        }
        if weights.iter().chain(&values).any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::InvalidParameter("weights and values must be finite and nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidParameter(format!("weights sum to {total}")));
        }
        Ok(Self { weights, values })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `Σ c_i p_i^k`.
    pub fn moment(&self, k: i32) -> f64 {
        self.weights.iter().zip(&self.values).map(|(c, p)| c * p.powi(k)).sum()
    }
}

/// `(Σ α_i p_i, Σ β_i p_i)` with `β_i = α_i p_i / Σ α_j p_j`.
pub fn reweight_check(alpha: &WeightedValues) -> Result<(f64, f64)> {
    let mean = alpha.moment(1);
    if mean <= 0.0 {
        return Err(Error::ZeroMean);
    }
    Ok((mean, alpha.moment(2) / mean))
}

/// `S_k = Σ c p^k / Σ c p^{k−1}` for `k = 1..=k_max`; stops once a denominator vanishes.
pub fn moment_ratio_sequence(cp: &WeightedValues, k_max: usize) -> Result<Vec<f64>> {
    if cp.moment(1) <= 0.0 {
        return Err(Error::ZeroMean);
    }
    let mut out = Vec::with_capacity(k_max);
    for k in 1..=k_max as i32 {
        let den = cp.moment(k - 1);
        if den <= 0.0 {
            break;
        }
        out.push(cp.moment(k) / den);
    }
    Ok(out)
}

/// `(Σ c_i p_i, (Σ c_i p_i^g)^{1/g})`.
pub fn jensen_bound(cp: &WeightedValues, g: u32) -> Result<(f64, f64)> {
    if g == 0 {
        return Err(Error::InvalidParameter("g must be at least 1".into()));
    }
    Ok((cp.moment(1), cp.moment(g as i32).powf(1.0 / g as f64)))
}

/// `2 ≤ (1+γ)^{1/γ}` for `γ ∈ (0, 1]`.
pub fn gamma_inequality_holds(gamma: f64) -> bool {
    gamma > 0.0 && gamma <= 1.0 && (1.0 + gamma).powf(1.0 / gamma) >= 2.0 - 1e-15
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum BoundMode {
    /// `min(1, 2ν(P, T))`.
    General,
    /// `min_γ ν(P/γ, T) + γ` over `grid`, optionally refined by golden-section search.
    Decision { grid: Vec<f64>, refine: bool },
}

/// Parameters recorded alongside a bound; unused ones stay `None`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub s: Option<f64>,
    pub t: Option<f64>,
    pub n: Option<f64>,
    pub m: Option<f64>,
    pub k: Option<f64>,
    pub t_samp: Option<f64>,
    pub t_verify: Option<f64>,
    /// `ν(T)` (salting) or `ν(P, T)` (classical analog), supplied numerically.
    pub nu: Option<f64>,
    pub c: f64,
    /// Set when the caller vouches that `c` makes the formula a proven bound.
    pub trusted_constant: bool,
}

impl BoundParams {
    pub fn new() -> Self {
        Self { c: 1.0, ..Default::default() }
    }

    fn need(v: Option<f64>, name: &'static str) -> Result<f64> {
        match v {
            Some(x) if x.is_finite() && x >= 0.0 => Ok(x),
            Some(x) => Err(Error::InvalidParameter(format!("{name} = {x}"))),
            None => Err(Error::MissingParam(name)),
        }
    }

    fn positive(v: Option<f64>, name: &'static str) -> Result<f64> {
        let x = Self::need(v, name)?;
        if x <= 0.0 {
            return Err(Error::InvalidParameter(format!("{name} must be positive")));
        }
        Ok(x)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub name: String,
    pub params: BoundParams,
    /// `min(1, raw)`.
    pub value: f64,
    pub raw: f64,
    /// `P = S(T + T_Samp + T_Verify)` where it applies.
    pub p: Option<f64>,
    pub gamma: Option<f64>,
    pub note: String,
}

fn clamp01(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

fn constant_note(p: &BoundParams) -> String {
    if p.trusted_constant {
        format!("constant c = {} supplied as trusted", p.c)
    } else {
        format!("illustrative: c = {} is not a proven constant", p.c)
    }
}

/// The main theorem: from a bit-fixing bound `ν(P, T)` to an `(S, T)` non-uniform bound.
pub fn main_theorem_bound(
    nu: &dyn Fn(f64, f64) -> f64,
    s: f64,
    t: f64,
    t_samp: f64,
    t_verify: f64,
    mode: &BoundMode,
) -> Result<BoundReport> {
    let p = s * (t + t_samp + t_verify);
    let params = BoundParams { s: Some(s), t: Some(t), t_samp: Some(t_samp), t_verify: Some(t_verify), ..BoundParams::new() };
    match mode {
        BoundMode::General => {
            let raw = 2.0 * nu(p, t);
            Ok(BoundReport {
                name: "main_general".into(),
                params,
                value: clamp01(raw),
                raw,
                p: Some(p),
                gamma: None,
                note: "2·ν(P, T)".into(),
            })
        }
        BoundMode::Decision { grid, refine } => {
            if grid.is_empty() {
                return Err(Error::EmptyGrid);
            }
            if grid.iter().any(|&g| !(g > 0.0 && g <= 1.0)) {
                return Err(Error::InvalidParameter("γ grid must lie in (0, 1]".into()));
            }
            let f = |g: f64| nu(p / g, t) + g;
            let (mut best_g, mut best) = grid
                .iter()
                .map(|&g| (g, f(g)))
                .fold((f64::NAN, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
            if *refine {
                let mut sorted = grid.clone();
                sorted.sort_by(f64::total_cmp);
                let i = sorted.iter().position(|&g| g == best_g).unwrap_or(0);
                let lo = if i == 0 { sorted[0] / 2.0 } else { sorted[i - 1] };
                let hi = if i + 1 == sorted.len() { 1.0f64.min(sorted[i] * 2.0) } else { sorted[i + 1] };
                let (g, v) = golden_section(&f, lo, hi, 100);
                if v < best {
                    best_g = g;
                    best = v;
                }
            }
            Ok(BoundReport {
                name: "main_decision".into(),
                params,
                value: clamp01(best),
                raw: best,
                p: Some(p),
                gamma: Some(best_g),
                note: "min over γ of ν(P/γ, T) + γ".into(),
            })
        }
    }
}

fn golden_section(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..iters {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        }
    }
    if f1 < f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Application {
    Owf,
    Prg,
    SaltGeneral,
    SaltDecision,
    ClassicalGeneral,
}

impl Application {
    pub const ALL: [Application; 5] = [
        Application::Owf,
        Application::Prg,
        Application::SaltGeneral,
        Application::SaltDecision,
        Application::ClassicalGeneral,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Application::Owf => "owf",
            Application::Prg => "prg",
            Application::SaltGeneral => "salt_general",
            Application::SaltDecision => "salt_decision",
            Application::ClassicalGeneral => "classical_general",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let norm = s.to_ascii_lowercase().replace('-', "_");
        Self::ALL
            .into_iter()
            .find(|a| a.name() == norm)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown bound '{s}'")))
    }

    /// `(T_Samp, T_Verify)` used when the caller leaves them unset.
    pub fn default_query_costs(self) -> Option<(f64, f64)> {
        match self {
            Application::Owf => Some((1.0, 2.0)),
            Application::Prg => Some((1.0, 0.0)),
            _ => None,
        }
    }
}

/// Closed-form bound for one application, clamped to `[0, 1]`.
pub fn application_bound(which: Application, params: &BoundParams) -> Result<BoundReport> {
    let c = params.c;
    if !(c.is_finite() && c >= 0.0) {
        return Err(Error::InvalidParameter(format!("c = {c}")));
    }
    let mut params = params.clone();
    if let Some((ts, tv)) = which.default_query_costs() {
        params.t_samp.get_or_insert(ts);
        params.t_verify.get_or_insert(tv);
    }
    let s = BoundParams::need(params.s, "s")?;
    let t = BoundParams::need(params.t, "t")?;
    let queries = || -> Result<f64> {
        Ok(t + BoundParams::need(params.t_samp, "t_samp")? + BoundParams::need(params.t_verify, "t_verify")?)
    };
    let (raw, p, formula) = match which {
        Application::Owf => {
            let n = BoundParams::positive(params.n, "n")?;
            let m = BoundParams::positive(params.m, "m")?;
            let p = s * queries()?;
            let nu = c * (p + t * t) / n.min(m);
            (2.0 * nu, Some(p), "2·c(P + T²)/min(N, M)")
        }
        Application::Prg => {
            let n = BoundParams::positive(params.n, "n")?;
            (0.5 + c * (t * t / n).sqrt() + c * (s * t / n).cbrt(), None, "1/2 + c(T²/N)^{1/2} + c(ST/N)^{1/3}")
        }
        Application::SaltGeneral => {
            let k = BoundParams::positive(params.k, "k")?;
            let nu = BoundParams::need(params.nu, "nu")?;
            let p = s * queries()?;
            (4.0 * nu + c * p / k, Some(p), "4ν(T) + c·S(T + T_Samp + T_Verify)/K")
        }
        Application::SaltDecision => {
            let k = BoundParams::positive(params.k, "k")?;
            let nu = BoundParams::need(params.nu, "nu")?;
            let p = s * queries()?;
            (nu + c * (p / k).cbrt(), Some(p), "ν(T) + c(S(T + T_Samp + T_Verify)/K)^{1/3}")
        }
        Application::ClassicalGeneral => {
            let nu = BoundParams::need(params.nu, "nu")?;
            (2.0 * nu, Some(s * queries()?), "2·ν(P, T), classical advice")
        }
    };
    Ok(BoundReport {
        name: which.name().into(),
        note: format!("{formula}; {}", constant_note(&params)),
        params,
        value: clamp01(raw),
        raw,
        p,
        gamma: None,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Comparison {
    pub name: String,
    pub empirical: f64,
    pub bound: f64,
    pub slack: f64,
    /// Empirical value above the formula, whatever the constant.
    pub exceeds: bool,
    /// Only raised when the constant is trusted.
    pub violation: bool,
}

pub fn empirical_vs_bound(empirical: f64, bound: &BoundReport) -> Result<Comparison> {
    if !(0.0..=1.0).contains(&empirical) || !(0.0..=1.0).contains(&bound.value) {
        return Err(Error::InvalidParameter("values must lie in [0, 1]".into()));
    }
    let exceeds = empirical > bound.value + 1e-12;
    Ok(Comparison {
        name: bound.name.clone(),
        empirical,
        bound: bound.value,
        slack: bound.value - empirical,
        exceeds,
        violation: exceeds && bound.params.trusted_constant,
    })
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub const BOUND_CSV_HEADER: [&str; 15] =
    ["name", "value", "raw", "P", "gamma", "S", "T", "N", "M", "K", "t_samp", "t_verify", "nu", "c", "note"];

/// One CSV record per report, columns as in [`BOUND_CSV_HEADER`].
pub fn bound_record(r: &BoundReport) -> Vec<String> {
    let p = &r.params;
    vec![
        r.name.clone(),
        format!("{:.12}", r.value),
        format!("{:.12}", r.raw),
        opt(r.p),
        opt(r.gamma),
        opt(p.s),
        opt(p.t),
        opt(p.n),
        opt(p.m),
        opt(p.k),
        opt(p.t_samp),
        opt(p.t_verify),
        opt(p.nu),
        p.c.to_string(),
        r.note.clone(),
    ]
}

pub fn write_bounds_csv<W: Write>(out: W, reports: &[BoundReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(BOUND_CSV_HEADER)?;
    for r in reports {
        w.write_record(bound_record(r))?;
    }
    w.flush()?;
    Ok(())
}
