//! Basis pursuit from partial Fourier data.
//!
//! Given `x̂` on Ω, find the signal of least ℓ¹ norm whose transform agrees
//! with the observations on Ω. The solver is Douglas–Rachford splitting of
//! `‖z‖₁ + ι{dft(z)|_Ω = x̂|_Ω}`: complex soft thresholding for the first
//! term and, because the transform is unitary, an exact projection for the
//! second (overwrite the Ω coordinates of the spectrum).

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exp_sums::{certificate_check, kernel_profile, CertificateVerdict, FrequencyDraw};
use crate::group_fourier::{dft, FourierPlan, Signal, Spectrum};
use crate::seed::SeedStream;

/// Observations `x̂(ω)` for ω ∈ Ω; `observed[i]` belongs to `omega[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSet {
    modulus: usize,
    omega: Vec<usize>,
    observed: Vec<Complex64>,
}

impl MeasurementSet {
    pub fn new(modulus: usize, omega: Vec<usize>, observed: Vec<Complex64>) -> Result<Self> {
        crate::arith::check_modulus(modulus)?;
        let m = Self {
            modulus,
            omega,
            observed,
        };
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<()> {
        if self.omega.is_empty() {
            return Err(Error::param("Ω must be nonempty"));
        }
        if self.omega.len() != self.observed.len() {
            return Err(Error::param("one observation per frequency required"));
        }
        let mut seen = vec![false; self.modulus];
        for &w in &self.omega {
            if w >= self.modulus {
                return Err(Error::param(format!(
                    "frequency {w} not in [0, {})",
                    self.modulus
                )));
            }
            if std::mem::replace(&mut seen[w], true) {
                return Err(Error::param(format!("frequency {w} repeated in Ω")));
            }
        }
        Ok(())
    }

    pub fn modulus(&self) -> usize {
        self.modulus
    }

    pub fn omega(&self) -> &[usize] {
        &self.omega
    }

    pub fn observed(&self) -> &[Complex64] {
        &self.observed
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            modulus: self.modulus,
            omega: self.omega.clone(),
            observed: self.observed.iter().map(|v| v * c).collect(),
        }
    }

    /// The minimum ℓ² extension, zero off Ω.
    fn zero_filled(&self) -> Vec<Complex64> {
        let mut spec = vec![Complex64::new(0.0, 0.0); self.modulus];
        for (&w, &v) in self.omega.iter().zip(&self.observed) {
            spec[w] = v;
        }
        spec
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: Self =
            serde_json::from_str(s).map_err(|e| Error::param(format!("bad JSON: {e}")))?;
        crate::arith::check_modulus(m.modulus)?;
        m.validate()?;
        Ok(m)
    }
}

/// `x̂|_Ω`; Ω is deduplicated and sorted.
pub fn measure(x: &Signal, omega: &[usize]) -> Result<MeasurementSet> {
    let mut omega = omega.to_vec();
    omega.sort_unstable();
    omega.dedup();
    if omega.is_empty() {
        return Err(Error::param("Ω must be nonempty"));
    }
    let spec = dft(x)?;
    let observed = omega
        .iter()
        .map(|&w| {
            spec.values()
                .get(w)
                .copied()
                .ok_or_else(|| Error::param(format!("frequency {w} out of range")))
        })
        .collect::<Result<Vec<_>>>()?;
    MeasurementSet::new(x.modulus(), omega, observed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Converged,
    MaxIter,
    /// Never produced: any extension of the data is feasible.
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryResult {
    pub reconstruction: Signal,
    pub objective: f64,
    pub residual: f64,
    pub iterations: usize,
    pub status: SolveStatus,
}

impl RecoveryResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Bound on both the final Douglas–Rachford step and the constraint
    /// residual.
    pub tol: f64,
    pub max_iter: usize,
    /// Threshold level relative to the largest entry of the zero-filled
    /// reconstruction.
    pub step: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 20_000,
            step: 0.2,
        }
    }
}

#[inline]
fn soft_threshold(v: Complex64, level: f64) -> Complex64 {
    let r = v.norm();
    if r <= level {
        Complex64::new(0.0, 0.0)
    } else {
        v * ((r - level) / r)
    }
}

struct Projector<'a> {
    plan: FourierPlan,
    meas: &'a MeasurementSet,
    buf: Vec<Complex64>,
}

impl<'a> Projector<'a> {
    fn new(meas: &'a MeasurementSet) -> Result<Self> {
        Ok(Self {
            plan: FourierPlan::new(meas.modulus)?,
            meas,
            buf: vec![Complex64::new(0.0, 0.0); meas.modulus],
        })
    }

    /// Writes the projection of `v` onto the feasible set into `out`.
    fn project(&mut self, v: &[Complex64], out: &mut [Complex64]) {
        self.buf.copy_from_slice(v);
        self.plan.forward_in_place(&mut self.buf);
        for (&w, &obs) in self.meas.omega.iter().zip(&self.meas.observed) {
            self.buf[w] = obs;
        }
        self.plan.inverse_in_place(&mut self.buf);
        out.copy_from_slice(&self.buf);
    }

    fn residual(&mut self, z: &[Complex64]) -> f64 {
        self.buf.copy_from_slice(z);
        self.plan.forward_in_place(&mut self.buf);
        self.meas
            .omega
            .iter()
            .zip(&self.meas.observed)
            .map(|(&w, obs)| (self.buf[w] - obs).norm())
            .fold(0.0, f64::max)
    }
}

/// Minimizes `‖z‖₁` subject to `dft(z)|_Ω = observed`.
pub fn basis_pursuit(meas: &MeasurementSet, config: &SolverConfig) -> Result<RecoveryResult> {
    if config.tol.is_nan() || config.tol <= 0.0 {
        return Err(Error::param("tol must be > 0"));
    }
    if config.step.is_nan() || config.step <= 0.0 {
        return Err(Error::param("step must be > 0"));
    }
    let n = meas.modulus;
    let mut proj = Projector::new(meas)?;
    let mut start = meas.zero_filled();
    proj.plan.inverse_in_place(&mut start);

    let finish =
        |z: Vec<Complex64>, iterations, status, proj: &mut Projector| -> Result<RecoveryResult> {
            let residual = proj.residual(&z);
            let reconstruction = Signal::new(z)?;
            Ok(RecoveryResult {
                objective: reconstruction.l1_norm(),
                reconstruction,
                residual,
                iterations,
                status,
            })
        };

    // Ω = Z_N pins down a single feasible point.
    if meas.omega.len() == n {
        return finish(start, 0, SolveStatus::Converged, &mut proj);
    }
    let scale = start.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return finish(start, 0, SolveStatus::Converged, &mut proj);
    }
    let level = config.step * scale;

    let mut y = start;
    let mut zf = vec![Complex64::new(0.0, 0.0); n];
    let mut reflect = vec![Complex64::new(0.0, 0.0); n];
    let mut zg = vec![Complex64::new(0.0, 0.0); n];
    for iter in 1..=config.max_iter {
        for i in 0..n {
            zf[i] = soft_threshold(y[i], level);
            reflect[i] = 2.0 * zf[i] - y[i];
        }
        proj.project(&reflect, &mut zg);
        let mut change: f64 = 0.0;
        for i in 0..n {
            let d = zg[i] - zf[i];
            y[i] += d;
            change = change.max(d.norm());
        }
        if change <= config.tol {
            let result = finish(zg.clone(), iter, SolveStatus::Converged, &mut proj)?;
            if result.residual <= config.tol {
                return Ok(result);
            }
        }
    }
    finish(zg, config.max_iter, SolveStatus::MaxIter, &mut proj)
}

/// Three-way answer: the solver may fail to converge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AlphaVerdict {
    Holds,
    Fails,
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaCheck {
    pub verdict: AlphaVerdict,
    /// `max_t |z(t) − x(t)|`.
    pub error: f64,
    /// `‖z‖₁ − ‖x‖₁`.
    pub objective_gap: f64,
    pub iterations: usize,
}

/// Does ℓ¹ minimization over the data `x̂|_Ω` return `x` itself?
pub fn verify_alpha(
    x: &Signal,
    omega: &[usize],
    tol: f64,
    config: &SolverConfig,
) -> Result<AlphaCheck> {
    let result = basis_pursuit(&measure(x, omega)?, config)?;
    let error = result.reconstruction.max_abs_diff(x)?;
    let objective_gap = result.objective - x.l1_norm();
    let verdict = match result.status {
        SolveStatus::Converged if error <= tol && objective_gap.abs() <= tol => AlphaVerdict::Holds,
        SolveStatus::Converged => AlphaVerdict::Fails,
        _ => AlphaVerdict::Indeterminate,
    };
    Ok(AlphaCheck {
        verdict,
        error,
        objective_gap,
        iterations: result.iterations,
    })
}

/// A T-sparse signal: uniform support, standard complex Gaussian amplitudes.
pub fn random_sparse_signal<R: Rng + ?Sized>(
    rng: &mut R,
    modulus: usize,
    sparsity: usize,
) -> Result<Signal> {
    if sparsity > modulus {
        return Err(Error::param(format!(
            "T = {sparsity} exceeds N = {modulus}"
        )));
    }
    let mut values = vec![Complex64::new(0.0, 0.0); modulus];
    let half = std::f64::consts::FRAC_1_SQRT_2;
    for t in rand::seq::index::sample(rng, modulus, sparsity) {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        values[t] = Complex64::new(re * half, im * half);
    }
    Signal::new(values)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryCheckReport {
    pub certificate: CertificateVerdict,
    pub trials: usize,
    pub successes: usize,
    pub failures: usize,
    pub indeterminate: usize,
    pub max_error: f64,
}

/// Evaluates the kernel certificate of `draw` at sparsity T and runs
/// `trials` random T-sparse signals through [`verify_alpha`] with Ω equal
/// to the draw's range. When the certificate holds every trial must
/// succeed.
pub fn guaranteed_recovery_check(
    draw: &FrequencyDraw,
    sparsity: u64,
    trials: usize,
    seed: u64,
    tol: f64,
    config: &SolverConfig,
) -> Result<RecoveryCheckReport> {
    let certificate = certificate_check(&kernel_profile(draw), sparsity)?;
    let omega = draw.range();
    let stream = SeedStream::new(seed, "sparse-signal");
    let mut report = RecoveryCheckReport {
        certificate,
        trials,
        successes: 0,
        failures: 0,
        indeterminate: 0,
        max_error: 0.0,
    };
    for i in 0..trials {
        let x = random_sparse_signal(&mut stream.rng(i as u64), draw.modulus(), sparsity as usize)?;
        let check = verify_alpha(&x, &omega, tol, config)?;
        report.max_error = report.max_error.max(check.error);
        match check.verdict {
            AlphaVerdict::Holds => report.successes += 1,
            AlphaVerdict::Fails => report.failures += 1,
            AlphaVerdict::Indeterminate => report.indeterminate += 1,
        }
    }
    Ok(report)
}

/// Spectrum with `observed` on Ω and zero elsewhere, for callers that want
/// the minimum-energy extension.
pub fn zero_filled_spectrum(meas: &MeasurementSet) -> Spectrum {
    Spectrum::new(meas.zero_filled()).expect("modulus checked")
}
