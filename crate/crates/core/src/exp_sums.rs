//! Random exponential sums `S(m) = Σ_j e(m X_j / N)`, the kernel they define
//! on Z_N, and the moment/MGF facts behind the Chernoff bounds.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{check_modulus, mul_mod, CyclicIndex};
use crate::error::{Error, Result};
use crate::group_fourier::UnitRoots;

/// Ordered tuple of frequencies `(X_1, ..., X_n)` in Z_N. Repeats are kept.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrequencyDraw {
    modulus: usize,
    points: Vec<usize>,
}

impl FrequencyDraw {
    pub fn new(modulus: usize, points: Vec<usize>) -> Result<Self> {
        check_modulus(modulus)?;
        if points.is_empty() {
            return Err(Error::param("a frequency draw needs at least one point"));
        }
        if let Some(p) = points.iter().find(|&&p| p >= modulus) {
            return Err(Error::param(format!("frequency {p} not in [0, {modulus})")));
        }
        Ok(Self { modulus, points })
    }

    /// Each element of `omega` once: the unit-coefficient kernel `K`.
    pub fn from_set(modulus: usize, omega: &[usize]) -> Result<Self> {
        let mut pts = omega.to_vec();
        pts.sort_unstable();
        pts.dedup();
        Self::new(modulus, pts)
    }

    pub fn modulus(&self) -> usize {
        self.modulus
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Ω, the set of values taken by the draw, ascending.
    pub fn range(&self) -> Vec<usize> {
        self.multiplicities().into_keys().collect()
    }

    /// Multiplicity of each frequency in Ω; these are the kernel
    /// coefficients `L̂(ω)`.
    pub fn multiplicities(&self) -> BTreeMap<usize, usize> {
        let mut m = BTreeMap::new();
        for &p in &self.points {
            *m.entry(p).or_insert(0) += 1;
        }
        m
    }

    /// The draw `(m X_1, ..., m X_n)`.
    pub fn dilated(&self, m: usize) -> Self {
        let points = self
            .points
            .iter()
            .map(|&p| mul_mod(p, m, self.modulus))
            .collect();
        Self {
            modulus: self.modulus,
            points,
        }
    }
}

/// Points of [0, 1) for the continuous (circle) model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuousDraw {
    points: Vec<f64>,
}

impl ContinuousDraw {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::param("a draw needs at least one point"));
        }
        if let Some(p) = points.iter().find(|p| !(0.0..1.0).contains(*p)) {
            return Err(Error::param(format!("point {p} not in [0, 1)")));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `Σ_j e(m x_j)`, with `m x_j` reduced mod 1 before taking the phase.
    pub fn exp_sum(&self, m: u64) -> Complex64 {
        self.points
            .iter()
            .map(|&x| Complex64::from_polar(1.0, 2.0 * PI * (m as f64 * x).fract()))
            .sum()
    }

    /// `max_{1<=m<=M} |S(m)|`.
    pub fn sup_abs(&self, max_m: u64) -> f64 {
        (1..=max_m)
            .map(|m| self.exp_sum(m).norm())
            .fold(0.0, f64::max)
    }
}

/// `S(m) = Σ_j e(m X_j / N)`.
pub fn exp_sum_discrete(draw: &FrequencyDraw, m: CyclicIndex) -> Result<Complex64> {
    if m.modulus() != draw.modulus {
        return Err(Error::ModulusMismatch {
            expected: draw.modulus,
            got: m.modulus(),
        });
    }
    let roots = UnitRoots::new(draw.modulus);
    Ok(exp_sum_with(&roots, &draw.multiplicities(), m.value()))
}

fn exp_sum_with(roots: &UnitRoots, mult: &BTreeMap<usize, usize>, m: usize) -> Complex64 {
    let n = roots.modulus();
    let mut acc = Complex64::new(0.0, 0.0);
    for (&w, &c) in mult {
        acc += roots.get(mul_mod(m, w, n)) * c as f64;
    }
    acc
}

/// The function `L(t) = Σ_{ω∈Ω} L̂(ω) e(tω/N)` tabulated over Z_N.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelProfile {
    pub modulus: usize,
    pub values: Vec<Complex64>,
    /// `L(0)`.
    pub peak: f64,
    /// `max_{t != 0} |L(t)|`.
    pub offpeak_sup: f64,
    /// Smallest `t != 0` attaining `offpeak_sup`.
    pub argmax: usize,
}

impl KernelProfile {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }
}

pub fn kernel_profile(draw: &FrequencyDraw) -> KernelProfile {
    let n = draw.modulus;
    let roots = UnitRoots::new(n);
    let mult = draw.multiplicities();
    let values: Vec<Complex64> = (0..n).map(|m| exp_sum_with(&roots, &mult, m)).collect();
    let (argmax, offpeak_sup) = offpeak_max(&values);
    KernelProfile {
        modulus: n,
        peak: values[0].re,
        values,
        offpeak_sup,
        argmax,
    }
}

/// `max_{m != 0} |S(m)|` without keeping the table. Same arithmetic as
/// [`kernel_profile`].
pub fn offpeak_sup(draw: &FrequencyDraw, roots: &UnitRoots) -> f64 {
    debug_assert_eq!(roots.modulus(), draw.modulus);
    let mult = draw.multiplicities();
    (1..draw.modulus)
        .map(|m| exp_sum_with(roots, &mult, m).norm())
        .fold(0.0, f64::max)
}

fn offpeak_max(values: &[Complex64]) -> (usize, f64) {
    let mut best = (1, values[1].norm());
    for (t, v) in values.iter().enumerate().skip(2) {
        let a = v.norm();
        if a > best.1 {
            best = (t, a);
        }
    }
    best
}

/// Outcome of the dual-certificate test `sup_{t≠0} |L(t)| < L(0)/(2T)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertificateVerdict {
    pub holds: bool,
    /// `L(0)/(2T) - sup_{t≠0}|L(t)|`; the certificate holds iff this is > 0.
    pub margin: f64,
}

pub fn certificate_check(profile: &KernelProfile, sparsity: u64) -> Result<CertificateVerdict> {
    if sparsity < 1 {
        return Err(Error::param("T must be >= 1"));
    }
    let margin = profile.peak / (2.0 * sparsity as f64) - profile.offpeak_sup;
    Ok(CertificateVerdict {
        holds: margin > 0.0,
        margin,
    })
}

fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

pub(crate) fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * i)
}

/// `E|Σ_{j=1}^n e(x_j)|^{2p}` for iid uniform `x_j` on the circle:
/// the sum over compositions `p_1+...+p_n = p` of squared multinomials.
/// Always an integer.
pub fn moment_exact(n: u64, p: u64) -> Result<BigUint> {
    if n < 1 {
        return Err(Error::param("n must be >= 1"));
    }
    // f_k(q) = Σ over compositions of q into k parts; f_k = Σ_r C(q,r)^2 f_{k-1}(q-r).
    let mut f: Vec<BigUint> = (0..=p)
        .map(|q| {
            if q == 0 {
                BigUint::one()
            } else {
                BigUint::zero()
            }
        })
        .collect();
    for _ in 0..n {
        let next = (0..=p)
            .map(|q| {
                (0..=q)
                    .map(|r| binomial(q, r).pow(2) * &f[(q - r) as usize])
                    .sum()
            })
            .collect();
        f = next;
    }
    Ok(f[p as usize].clone())
}

/// `J_k = E cos^k(2πX/N)` for X uniform on Z_N, exactly:
/// `2^{-k} Σ_{j : N | k-2j} C(k, j)`.
pub fn j_moment(modulus: usize, k: u64) -> Result<BigRational> {
    check_modulus(modulus)?;
    let n = modulus as i64;
    let num: BigUint = (0..=k)
        .filter(|&j| (k as i64 - 2 * j as i64).rem_euclid(n) == 0)
        .map(|j| binomial(k, j))
        .sum();
    let den = BigUint::one() << k as usize;
    Ok(BigRational::new(BigInt::from(num), BigInt::from(den)))
}

/// Left side of the termwise comparison in the lemma's proof:
/// `2k J_{2k-1} + J_{2k} + J_{2k+1}/(2k+1)`.
pub fn lemma_series_lhs(modulus: usize, k: u64) -> Result<BigRational> {
    if k < 1 {
        return Err(Error::param("k must be >= 1"));
    }
    let two_k = BigInt::from(2 * k);
    Ok(
        j_moment(modulus, 2 * k - 1)? * BigRational::from_integer(two_k.clone())
            + j_moment(modulus, 2 * k)?
            + j_moment(modulus, 2 * k + 1)? / BigRational::from_integer(two_k + 1),
    )
}

/// Right side: `(2k)! / (4^k k!)`.
pub fn lemma_series_rhs(k: u64) -> BigRational {
    let num = BigInt::from(factorial(2 * k));
    let den = BigInt::from(factorial(k)) * (BigInt::one() << (2 * k as usize));
    BigRational::new(num, den)
}

/// `E exp(u cos(2πX/N))`, the exact N-term average.
pub fn mgf_discrete(modulus: usize, u: f64) -> Result<f64> {
    rotated_mgf(modulus, u, 0.0)
}

/// `E exp(u cos(2πX/N - φ))`.
pub fn rotated_mgf(modulus: usize, u: f64, phi: f64) -> Result<f64> {
    check_modulus(modulus)?;
    if u < 0.0 || !u.is_finite() {
        return Err(Error::param(format!(
            "u must be a finite nonnegative real (got {u})"
        )));
    }
    let n = modulus as f64;
    let sum: f64 = (0..modulus)
        .map(|x| (u * (2.0 * PI * x as f64 / n - phi).cos()).exp())
        .sum();
    Ok(sum / n)
}

/// `(1/2π) ∫ exp(u cos θ) dθ = Σ_k (u/2)^{2k} / (k!)²`, i.e. the modified
/// Bessel function I₀.
pub fn mgf_continuous(u: f64) -> f64 {
    let q = u * u / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    while term > sum * 1e-17 {
        term *= q / (k * k);
        sum += term;
        k += 1.0;
    }
    sum
}
