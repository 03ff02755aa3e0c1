//! Closed-form tail bounds for random exponential sums and the rules that
//! pick the sector count ν.
//!
//! All logarithms are natural. Every bound is returned as computed; values
//! of 1 or more are flagged as vacuous in a [`BoundReport`], never clamped.

use std::collections::BTreeMap;
use std::f64::consts::{E, LN_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::arith::require_prime_ge5;
use crate::error::{Error, Result};

fn check_n_delta(n: u64, delta: f64) -> Result<()> {
    if n < 2 {
        return Err(Error::param(format!("n must be >= 2 (got {n})")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param(format!(
            "delta must lie in (0, 1) (got {delta})"
        )));
    }
    Ok(())
}

fn check_nu(nu: u32) -> Result<()> {
    if nu < 3 {
        Err(Error::param(format!("nu must be >= 3 (got {nu})")))
    } else {
        Ok(())
    }
}

fn check_c(c: f64) -> Result<()> {
    if !c.is_finite() || c <= 1.0 {
        Err(Error::param(format!("C must be > 1 (got {c})")))
    } else {
        Ok(())
    }
}

/// `a² = cos²(π/ν)`, the sector contraction factor.
pub fn sector_factor(nu: u32) -> f64 {
    (PI / nu as f64).cos().powi(2)
}

/// Frequency range `(1/2) 2^{nδ²/4}` guaranteed by the moment method.
pub fn theorem_a_range(n: u64, delta: f64) -> Result<f64> {
    Ok(log_theorem_a_range(n, delta)?.exp())
}

/// Natural log of [`theorem_a_range`]; finite where the range overflows.
pub fn log_theorem_a_range(n: u64, delta: f64) -> Result<f64> {
    check_n_delta(n, delta)?;
    Ok((n as f64 * delta * delta / 4.0 - 1.0) * LN_2)
}

/// `M ν exp(-nδ² cos²(π/ν))`: bound on the probability that some
/// `1 <= m <= M` has `|Σ e(m x_j)| >= δn` for uniform points on the circle.
pub fn theorem1_failure(max_m: u64, n: u64, delta: f64, nu: u32) -> Result<f64> {
    check_n_delta(n, delta)?;
    check_nu(nu)?;
    if max_m < 1 {
        return Err(Error::param("M must be >= 1"));
    }
    Ok(max_m as f64 * nu as f64 * (-(n as f64) * delta * delta * sector_factor(nu)).exp())
}

/// Result of a ν selection rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NuChoice {
    pub nu: u32,
    /// The raw formula fell below 3 and was raised to 3.
    pub clamped: bool,
}

/// `ν = ⌊δπ√(2n)⌋`, raised to 3 when smaller.
pub fn optimal_nu_theorem1(n: u64, delta: f64) -> Result<NuChoice> {
    check_n_delta(n, delta)?;
    let raw = (delta * PI * (2.0 * n as f64).sqrt()).floor();
    Ok(if raw < 3.0 {
        NuChoice {
            nu: 3,
            clamped: true,
        }
    } else {
        NuChoice {
            nu: raw as u32,
            clamped: false,
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RangeComparison {
    /// `(1/ν) e^{nδ²a²}`
    pub new_range: f64,
    /// `(1/2) 2^{nδ²/4}`
    pub old_range: f64,
    pub improves: bool,
}

pub fn theorem_a_comparison(n: u64, delta: f64, nu: u32) -> Result<RangeComparison> {
    check_n_delta(n, delta)?;
    check_nu(nu)?;
    let exponent = n as f64 * delta * delta;
    let log_new = exponent * sector_factor(nu) - (nu as f64).ln();
    let log_old = log_theorem_a_range(n, delta)?;
    Ok(RangeComparison {
        new_range: log_new.exp(),
        old_range: log_old.exp(),
        improves: log_new > log_old,
    })
}

/// Range `exp((δ/6)√(n log n) − 3 log n)` reachable by the explicit
/// prime-based construction with `c(A) = 6A + 3`.
pub fn tijdeman_range(n: u64, delta: f64) -> Result<f64> {
    Ok(log_tijdeman_range(n, delta)?.exp())
}

pub fn log_tijdeman_range(n: u64, delta: f64) -> Result<f64> {
    if n < 3 {
        return Err(Error::param(format!("n must be >= 3 (got {n})")));
    }
    check_n_delta(n, delta)?;
    let ln = (n as f64).ln();
    Ok(delta / 6.0 * (n as f64 * ln).sqrt() - 3.0 * ln)
}

/// `c = 4a²/log 2 − 1`; with `M = (1/2) 2^{nδ²/4}` the failure bound is
/// `(ν/2) M^{-c}`.
pub fn explicitness_exponent(nu: u32) -> Result<f64> {
    check_nu(nu)?;
    Ok(4.0 * sector_factor(nu) / LN_2 - 1.0)
}

/// `((N−1)/2) ν exp(−nδ²a²)` for uniform frequencies on Z_N, N prime >= 5.
pub fn theorem2_failure(modulus: usize, n: u64, delta: f64, nu: u32) -> Result<f64> {
    require_prime_ge5(modulus)?;
    check_n_delta(n, delta)?;
    check_nu(nu)?;
    Ok((modulus as f64 - 1.0) / 2.0
        * nu as f64
        * (-(n as f64) * delta * delta * sector_factor(nu)).exp())
}

/// `n = ⌈4 C T² log N⌉`.
pub fn sample_count(modulus: usize, sparsity: u64, c: f64) -> u64 {
    (4.0 * c * (sparsity * sparsity) as f64 * (modulus as f64).ln()).ceil() as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SparseBound {
    pub failure: f64,
    pub n: u64,
    pub nu: u32,
}

/// `(ν/2) N^{1 − C a²}`, together with the sample count it presumes.
pub fn theorem3_failure(modulus: usize, sparsity: u64, c: f64, nu: u32) -> Result<SparseBound> {
    require_prime_ge5(modulus)?;
    check_c(c)?;
    check_nu(nu)?;
    if sparsity < 1 {
        return Err(Error::param("T must be >= 1"));
    }
    let failure = nu as f64 / 2.0 * (modulus as f64).powf(1.0 - c * sector_factor(nu));
    Ok(SparseBound {
        failure,
        n: sample_count(modulus, sparsity, c),
        nu,
    })
}

/// ν from `sin²(π/ν) = 1/(2C log N)` (floored, at least 3) and the closed
/// form `(π/2) √(2Ce log N) N^{1−C}`.
pub fn refined_nu_and_bound(modulus: usize, sparsity: u64, c: f64) -> Result<SparseBound> {
    require_prime_ge5(modulus)?;
    check_c(c)?;
    if sparsity < 1 {
        return Err(Error::param("T must be >= 1"));
    }
    let two_c_log = 2.0 * c * (modulus as f64).ln();
    if two_c_log <= 1.0 {
        return Err(Error::param("2 C log N must exceed 1"));
    }
    let nu = ((PI / (1.0 / two_c_log.sqrt()).asin()).floor() as u32).max(3);
    Ok(SparseBound {
        failure: refined_closed_form(modulus, c),
        n: sample_count(modulus, sparsity, c),
        nu,
    })
}

fn refined_closed_form(modulus: usize, c: f64) -> f64 {
    let log_n = (modulus as f64).ln();
    PI / 2.0 * (2.0 * c * E * log_n).sqrt() * (modulus as f64).powf(1.0 - c)
}

/// Values printed in the published N=997, T=2 example, keyed by C.
const PUBLISHED_ROWS: [(usize, u64, f64, u64); 2] = [(997, 2, 2.0, 242), (997, 2, 3.0, 332)];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub c: f64,
    pub n: u64,
    pub p: f64,
    pub flags: Vec<String>,
}

/// Rows `(C, ⌈4CT² log N⌉, (π/2)√(2Ce log N) N^{1−C})`.
pub fn paper_example_table(
    modulus: usize,
    sparsity: u64,
    c_values: &[f64],
) -> Result<Vec<TableRow>> {
    require_prime_ge5(modulus)?;
    if sparsity < 1 {
        return Err(Error::param("T must be >= 1"));
    }
    c_values
        .iter()
        .map(|&c| {
            if !c.is_finite() || c <= 0.0 {
                return Err(Error::param(format!("C must be positive (got {c})")));
            }
            let n = sample_count(modulus, sparsity, c);
            let mut flags = Vec::new();
            let p = if c > 1.0 {
                refined_nu_and_bound(modulus, sparsity, c)?.failure
            } else {
                flags.push("C<=1 outside hypotheses".to_string());
                refined_closed_form(modulus, c)
            };
            if p >= 1.0 {
                flags.push("vacuous".to_string());
            }
            for &(pn, pt, pc, printed) in &PUBLISHED_ROWS {
                if pn == modulus && pt == sparsity && pc == c && printed != n {
                    flags.push(format!(
                        "published table prints n={printed}; formula gives {n}"
                    ));
                }
            }
            Ok(TableRow { c, n, p, flags })
        })
        .collect()
}

/// `C,n,p,flags`; flags joined by `;`, numbers at 17 significant digits.
pub fn table_to_csv(rows: &[TableRow]) -> String {
    let mut out = String::from("C,n,p,flags\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{:.16e},{}\n",
            r.c,
            r.n,
            r.p,
            r.flags.join(";")
        ));
    }
    out
}

/// Every bound the CLI can evaluate by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundName {
    TheoremA,
    Theorem1,
    OptimalNu,
    Comparison,
    Tijdeman,
    Exponent,
    Theorem2,
    Theorem3,
    Refined,
}

impl BoundName {
    pub const ALL: [BoundName; 9] = [
        BoundName::TheoremA,
        BoundName::Theorem1,
        BoundName::OptimalNu,
        BoundName::Comparison,
        BoundName::Tijdeman,
        BoundName::Exponent,
        BoundName::Theorem2,
        BoundName::Theorem3,
        BoundName::Refined,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BoundName::TheoremA => "theorem-a",
            BoundName::Theorem1 => "theorem1",
            BoundName::OptimalNu => "optimal-nu",
            BoundName::Comparison => "comparison",
            BoundName::Tijdeman => "tijdeman",
            BoundName::Exponent => "exponent",
            BoundName::Theorem2 => "theorem2",
            BoundName::Theorem3 => "theorem3",
            BoundName::Refined => "refined",
        }
    }
}

impl fmt::Display for BoundName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        BoundName::ALL
            .into_iter()
            .find(|b| b.as_str() == s)
            .ok_or_else(|| Error::param(format!("unknown bound name {s:?}")))
    }
}

/// Parameter bundle; fields a bound does not use are ignored.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundQuery {
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub modulus: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(rename = "M", skip_serializing_if = "Option::is_none")]
    pub max_m: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu: Option<u32>,
    #[serde(rename = "C", skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(rename = "T", skip_serializing_if = "Option::is_none")]
    pub t: Option<u64>,
}

impl BoundQuery {
    fn need<T: Copy>(v: Option<T>, name: &str) -> Result<T> {
        v.ok_or_else(|| Error::param(format!("missing parameter {name}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub bound_name: BoundName,
    /// Probability bound, for the bounds that are probabilities.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure_bound: Option<f64>,
    /// Non-probability output (ranges, exponents).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    pub params_used: BoundQuery,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu_chosen: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    pub vacuous: bool,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl BoundReport {
    fn new(name: BoundName, q: &BoundQuery) -> Self {
        Self {
            bound_name: name,
            failure_bound: None,
            value: None,
            params_used: q.clone(),
            nu_chosen: None,
            n: None,
            vacuous: false,
            details: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    fn with_failure(mut self, p: f64) -> Self {
        self.failure_bound = Some(p);
        if p >= 1.0 {
            self.vacuous = true;
            self.notes.push(format!("bound {p:.6e} >= 1 is vacuous"));
        }
        self
    }

    fn with_nu(mut self, choice: NuChoice) -> Self {
        self.nu_chosen = Some(choice.nu);
        if choice.clamped {
            self.notes.push("nu formula gave < 3; clamped to 3".into());
        }
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    /// `bound_name,failure_bound,value,nu,n,vacuous,notes` with header.
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.16e}")).unwrap_or_default();
        format!(
            "bound_name,failure_bound,value,nu,n,vacuous,notes\n{},{},{},{},{},{},{}\n",
            self.bound_name,
            opt(self.failure_bound),
            opt(self.value),
            self.nu_chosen.map(|v| v.to_string()).unwrap_or_default(),
            self.n.map(|v| v.to_string()).unwrap_or_default(),
            self.vacuous,
            self.notes.join(";").replace(',', " ")
        )
    }
}

/// ν from the query, or from `optimal_nu_theorem1(n, δ)` when absent.
fn nu_or_optimal(q: &BoundQuery, n: u64, delta: f64) -> Result<NuChoice> {
    match q.nu {
        Some(nu) => {
            check_nu(nu)?;
            Ok(NuChoice { nu, clamped: false })
        }
        None => optimal_nu_theorem1(n, delta),
    }
}

/// Evaluates one named bound on a query.
pub fn evaluate(name: BoundName, q: &BoundQuery) -> Result<BoundReport> {
    use BoundQuery as Q;
    let report = BoundReport::new(name, q);
    Ok(match name {
        BoundName::TheoremA => {
            let (n, d) = (Q::need(q.n, "n")?, Q::need(q.delta, "delta")?);
            let mut r = report;
            r.value = Some(theorem_a_range(n, d)?);
            r.details
                .insert("log_value".into(), log_theorem_a_range(n, d)?);
            r
        }
        BoundName::Theorem1 => {
            let (n, d) = (Q::need(q.n, "n")?, Q::need(q.delta, "delta")?);
            let m = Q::need(q.max_m, "M")?;
            let nu = nu_or_optimal(q, n, d)?;
            report
                .with_nu(nu)
                .with_failure(theorem1_failure(m, n, d, nu.nu)?)
        }
        BoundName::OptimalNu => {
            let (n, d) = (Q::need(q.n, "n")?, Q::need(q.delta, "delta")?);
            let nu = optimal_nu_theorem1(n, d)?;
            let mut r = report.with_nu(nu);
            r.value = Some(nu.nu as f64);
            r
        }
        BoundName::Comparison => {
            let (n, d) = (Q::need(q.n, "n")?, Q::need(q.delta, "delta")?);
            let nu = nu_or_optimal(q, n, d)?;
            let cmp = theorem_a_comparison(n, d, nu.nu)?;
            let mut r = report.with_nu(nu);
            r.value = Some(cmp.new_range);
            r.details.insert("new_range".into(), cmp.new_range);
            r.details.insert("old_range".into(), cmp.old_range);
            r.details
                .insert("improves".into(), if cmp.improves { 1.0 } else { 0.0 });
            r
        }
        BoundName::Tijdeman => {
            let (n, d) = (Q::need(q.n, "n")?, Q::need(q.delta, "delta")?);
            let log_v = log_tijdeman_range(n, d)?;
            let mut r = report;
            r.value = Some(log_v.exp());
            r.details.insert("log_value".into(), log_v);
            r.details
                .insert("log_theorem_a_range".into(), log_theorem_a_range(n, d)?);
            if log_v < 0.0 {
                r.vacuous = true;
                r.notes
                    .push("range below 1: explicit construction guarantees nothing".into());
            }
            r
        }
        BoundName::Exponent => {
            let nu = Q::need(q.nu, "nu")?;
            let mut r = report.with_nu(NuChoice { nu, clamped: false });
            r.value = Some(explicitness_exponent(nu)?);
            r
        }
        BoundName::Theorem2 => {
            let modulus = Q::need(q.modulus, "N")?;
            let (n, d) = (Q::need(q.n, "n")?, Q::need(q.delta, "delta")?);
            require_prime_ge5(modulus)?;
            let nu = nu_or_optimal(q, n, d)?;
            report
                .with_nu(nu)
                .with_failure(theorem2_failure(modulus, n, d, nu.nu)?)
        }
        BoundName::Theorem3 => {
            let modulus = Q::need(q.modulus, "N")?;
            let (t, c) = (Q::need(q.t, "T")?, Q::need(q.c, "C")?);
            match q.nu {
                Some(nu) => {
                    let b = theorem3_failure(modulus, t, c, nu)?;
                    let mut r = report
                        .with_nu(NuChoice { nu, clamped: false })
                        .with_failure(b.failure);
                    r.n = Some(b.n);
                    r
                }
                None => {
                    let refined = refined_nu_and_bound(modulus, t, c)?;
                    let exact = theorem3_failure(modulus, t, c, refined.nu)?;
                    let mut r = report
                        .with_nu(NuChoice {
                            nu: refined.nu,
                            clamped: false,
                        })
                        .with_failure(refined.failure);
                    r.n = Some(refined.n);
                    r.details.insert("failure_at_nu".into(), exact.failure);
                    r.notes
                        .push("nu by the refined rule; failure_bound is the closed form".into());
                    r
                }
            }
        }
        BoundName::Refined => {
            let modulus = Q::need(q.modulus, "N")?;
            let (t, c) = (Q::need(q.t, "T")?, Q::need(q.c, "C")?);
            let b = refined_nu_and_bound(modulus, t, c)?;
            let mut r = report
                .with_nu(NuChoice {
                    nu: b.nu,
                    clamped: false,
                })
                .with_failure(b.failure);
            r.n = Some(b.n);
            r
        }
    })
}
