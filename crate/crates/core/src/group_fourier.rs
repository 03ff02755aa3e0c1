//! Signals and spectra on the cyclic group Z_N and the unitary DFT
//!
//! `x̂(ω) = N^{-1/2} Σ_t x(t) e(-tω/N)` with `e(u) = exp(2πiu)`, and the
//! inverse `x(t) = N^{-1/2} Σ_ω x̂(ω) e(tω/N)`. The direct O(N²) sum is the
//! reference; [`FourierPlan`] wraps an FFT for the recovery solver and is
//! tested against the reference.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::arith::{check_modulus, mul_mod};
use crate::error::{Error, Result};

/// Time-domain signal `x: Z_N -> C`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Signal {
    modulus: usize,
    values: Vec<Complex64>,
}

/// Frequency-domain function on the dual group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    modulus: usize,
    values: Vec<Complex64>,
}

macro_rules! impl_group_function {
    ($ty:ident) => {
        impl $ty {
            pub fn new(values: Vec<Complex64>) -> Result<Self> {
                check_modulus(values.len())?;
                Ok(Self {
                    modulus: values.len(),
                    values,
                })
            }

            pub fn zeros(modulus: usize) -> Result<Self> {
                Self::new(vec![Complex64::new(0.0, 0.0); modulus])
            }

            /// `scale` at index `at`, zero elsewhere.
            pub fn indicator(modulus: usize, at: usize, scale: Complex64) -> Result<Self> {
                let mut s = Self::zeros(modulus)?;
                if at >= modulus {
                    return Err(Error::param(format!("index {at} not in [0, {modulus})")));
                }
                s.values[at] = scale;
                Ok(s)
            }

            pub fn from_real(values: &[f64]) -> Result<Self> {
                Self::new(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
            }

            pub fn modulus(&self) -> usize {
                self.modulus
            }

            pub fn values(&self) -> &[Complex64] {
                &self.values
            }

            pub fn into_values(self) -> Vec<Complex64> {
                self.values
            }

            pub fn scaled(&self, c: Complex64) -> Self {
                Self {
                    modulus: self.modulus,
                    values: self.values.iter().map(|v| v * c).collect(),
                }
            }

            pub fn l2_norm(&self) -> f64 {
                self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
            }

            /// Largest entrywise distance to `other`.
            pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
                same_modulus(self.modulus, other.modulus)?;
                Ok(self
                    .values
                    .iter()
                    .zip(&other.values)
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max))
            }

            /// Checks the serialized invariant `values.len() == modulus`.
            pub fn validate(&self) -> Result<()> {
                check_modulus(self.modulus)?;
                same_modulus(self.modulus, self.values.len())
            }

            pub fn to_json(&self) -> String {
                serde_json::to_string(self).expect("serializable")
            }

            pub fn from_json(s: &str) -> Result<Self> {
                let parsed: Self =
                    serde_json::from_str(s).map_err(|e| Error::param(format!("bad JSON: {e}")))?;
                parsed.validate()?;
                Ok(parsed)
            }
        }
    };
}

impl_group_function!(Signal);
impl_group_function!(Spectrum);

impl Signal {
    /// Time shift `t -> x(t - a)`.
    pub fn translated(&self, a: usize) -> Self {
        let n = self.modulus;
        let values = (0..n).map(|t| self.values[(t + n - a % n) % n]).collect();
        Self { modulus: n, values }
    }

    /// `(‖x‖₀, ‖x‖₁, ‖x‖₂)`; see [`norms_with_threshold`].
    pub fn norms(&self) -> Norms {
        norms_with_threshold(self, 0.0)
    }

    /// Positions whose magnitude exceeds `threshold`.
    pub fn support(&self, threshold: f64) -> Vec<usize> {
        (0..self.modulus)
            .filter(|&t| self.values[t].norm() > threshold)
            .collect()
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).sum()
    }
}

impl Spectrum {
    /// Wiener-algebra norm `‖x̂‖_A = ‖x‖₁`, evaluated through the inverse
    /// transform.
    pub fn a_norm(&self) -> f64 {
        idft(self).expect("well-formed spectrum").l1_norm()
    }
}

fn same_modulus(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::ModulusMismatch { expected, got })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Norms {
    pub l0: usize,
    pub l1: f64,
    pub l2: f64,
}

/// Norms with entries of magnitude `<= threshold` treated as zero for the
/// support count. Use `0.0` for synthetic inputs and about `1e-10` for
/// solver output.
pub fn norms_with_threshold(x: &Signal, threshold: f64) -> Norms {
    Norms {
        l0: x.support(threshold).len(),
        l1: x.l1_norm(),
        l2: x.l2_norm(),
    }
}

/// `e(k/N)` for `k = 0..N`, built once so that phases are indexed by exact
/// residues rather than accumulated floating point angles.
#[derive(Debug, Clone)]
pub struct UnitRoots {
    roots: Vec<Complex64>,
}

impl UnitRoots {
    pub fn new(modulus: usize) -> Self {
        let roots = (0..modulus)
            .map(|k| {
                let theta = 2.0 * PI * k as f64 / modulus as f64;
                Complex64::new(theta.cos(), theta.sin())
            })
            .collect();
        Self { roots }
    }

    #[inline]
    pub fn get(&self, k: usize) -> Complex64 {
        self.roots[k % self.roots.len()]
    }

    pub fn modulus(&self) -> usize {
        self.roots.len()
    }
}

fn direct_transform(values: &[Complex64], sign: isize) -> Vec<Complex64> {
    let n = values.len();
    let roots = UnitRoots::new(n);
    let scale = 1.0 / (n as f64).sqrt();
    (0..n)
        .map(|w| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (t, v) in values.iter().enumerate() {
                let k = mul_mod(t, w, n);
                let k = if sign < 0 { (n - k) % n } else { k };
                acc += v * roots.get(k);
            }
            acc * scale
        })
        .collect()
}

/// Unitary forward transform by direct summation.
pub fn dft(x: &Signal) -> Result<Spectrum> {
    x.validate()?;
    Spectrum::new(direct_transform(&x.values, -1))
}

/// Unitary inverse transform by direct summation.
pub fn idft(s: &Spectrum) -> Result<Signal> {
    s.validate()?;
    Signal::new(direct_transform(&s.values, 1))
}

/// Precomputed FFT pair with the same normalization as [`dft`]/[`idft`].
#[derive(Clone)]
pub struct FourierPlan {
    modulus: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scale: f64,
}

impl std::fmt::Debug for FourierPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FourierPlan")
            .field("modulus", &self.modulus)
            .finish()
    }
}

impl FourierPlan {
    pub fn new(modulus: usize) -> Result<Self> {
        check_modulus(modulus)?;
        let mut planner = FftPlanner::new();
        Ok(Self {
            modulus,
            forward: planner.plan_fft_forward(modulus),
            inverse: planner.plan_fft_inverse(modulus),
            scale: 1.0 / (modulus as f64).sqrt(),
        })
    }

    pub fn modulus(&self) -> usize {
        self.modulus
    }

    /// In-place forward transform of a raw buffer of length N.
    pub fn forward_in_place(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.modulus);
        self.forward.process(buf);
        buf.iter_mut().for_each(|v| *v *= self.scale);
    }

    pub fn inverse_in_place(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.modulus);
        self.inverse.process(buf);
        buf.iter_mut().for_each(|v| *v *= self.scale);
    }

    pub fn dft(&self, x: &Signal) -> Result<Spectrum> {
        same_modulus(self.modulus, x.modulus)?;
        let mut buf = x.values.clone();
        self.forward_in_place(&mut buf);
        Spectrum::new(buf)
    }

    pub fn idft(&self, s: &Spectrum) -> Result<Signal> {
        same_modulus(self.modulus, s.modulus)?;
        let mut buf = s.values.clone();
        self.inverse_in_place(&mut buf);
        Signal::new(buf)
    }
}
