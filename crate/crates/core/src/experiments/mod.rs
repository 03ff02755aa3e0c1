//! Monte Carlo runs comparing empirical frequencies with the analytic
//! bounds.
//!
//! Trial `i` of a run draws its randomness from
//! `SeedStream::new(master_seed, tag).rng(i)`, so a run's output does not
//! depend on how trials are scheduled. Aggregates are computed from the
//! index-ordered trial vector.

mod config;
mod runner;

pub use config::{ExperimentConfig, ExperimentKind, OneOrMany, Params};
pub use runner::{run_experiment, write_outputs, ExperimentOutcome};

use serde::{Deserialize, Serialize};

use crate::arith::require_prime_ge5;
use crate::error::{Error, Result};
use crate::exp_sums::{
    certificate_check, kernel_profile, offpeak_sup, ContinuousDraw, FrequencyDraw,
};
use crate::group_fourier::UnitRoots;
use crate::omega_models::{
    model_calibration, sample_draw, sample_omega_with, size_distribution, ModelKind, OmegaModel,
};
use crate::parallel::Execution;
use crate::recovery::{guaranteed_recovery_check, SolverConfig};
use crate::seed::SeedStream;
use crate::tail_bounds::{
    optimal_nu_theorem1, refined_nu_and_bound, sample_count, theorem1_failure, theorem2_failure,
};

/// Statistical slack, in binomial standard errors, allowed before a
/// dominance check fails.
pub const SIGMA_TOLERANCE: f64 = 4.0;

/// Largest `n = ⌈4CT² log N⌉` the certificate runs accept.
pub const MAX_SAMPLE_COUNT: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub trial_index: u64,
    /// Normalized sup statistic `max |S(m)| / n`, in [0, 1].
    pub statistic: f64,
    /// Whether the trial's event (sup >= δn, or certificate) occurred.
    pub event: bool,
    pub seed_used: u64,
}

fn binomial_stderr(p: f64, trials: usize) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

fn check_trials(trials: usize) -> Result<()> {
    if trials < 1 {
        Err(Error::param("trials must be >= 1"))
    } else {
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailRun {
    pub trials: usize,
    pub failures: usize,
    pub empirical_failure: f64,
    pub stderr: f64,
    /// `None` when the parameters fall outside the bound's hypotheses
    /// (n < 2 or δ outside (0, 1)).
    pub bound: Option<f64>,
    pub nu: Option<u32>,
    pub reports: Vec<TrialReport>,
}

impl TailRun {
    fn from_reports(reports: Vec<TrialReport>, bound: Option<(f64, u32)>) -> Self {
        let trials = reports.len();
        let failures = reports.iter().filter(|r| r.event).count();
        let p = failures as f64 / trials as f64;
        Self {
            trials,
            failures,
            empirical_failure: p,
            stderr: binomial_stderr(p, trials),
            bound: bound.map(|b| b.0),
            nu: bound.map(|b| b.1),
            reports,
        }
    }

    /// `empirical <= bound + 4σ`; vacuously true without a bound.
    pub fn dominated(&self) -> bool {
        self.bound
            .is_none_or(|b| self.empirical_failure <= b + SIGMA_TOLERANCE * self.stderr)
    }
}

/// Frequency of `max_{m≠0} |Σ_j e(m X_j/N)| >= δn` over `trials` draws of n
/// uniform points of Z_N, against the discrete bound at the optimal ν.
pub fn run_tail2(
    modulus: usize,
    n: usize,
    delta: f64,
    trials: usize,
    seed: u64,
    exec: Execution,
) -> Result<TailRun> {
    require_prime_ge5(modulus)?;
    check_trials(trials)?;
    if n < 1 {
        return Err(Error::param("n must be >= 1"));
    }
    let bound = match optimal_nu_theorem1(n as u64, delta) {
        Ok(nu) => Some((theorem2_failure(modulus, n as u64, delta, nu.nu)?, nu.nu)),
        Err(_) => None,
    };
    let stream = SeedStream::new(seed, "tail2");
    let roots = UnitRoots::new(modulus);
    let threshold = delta * n as f64;
    let reports = exec.map(trials, |i| {
        let i = i as u64;
        let draw = sample_draw(&mut stream.rng(i), modulus, n);
        let sup = offpeak_sup(&draw, &roots);
        TrialReport {
            trial_index: i,
            statistic: sup / n as f64,
            event: sup >= threshold,
            seed_used: stream.seed(i),
        }
    });
    Ok(TailRun::from_reports(reports, bound))
}

/// Continuous analogue: n uniform points of [0, 1), frequencies `1..=M`.
pub fn run_tail1(
    max_m: u64,
    n: usize,
    delta: f64,
    trials: usize,
    seed: u64,
    exec: Execution,
) -> Result<TailRun> {
    check_trials(trials)?;
    if max_m < 1 || n < 1 {
        return Err(Error::param("M and n must be >= 1"));
    }
    let bound = match optimal_nu_theorem1(n as u64, delta) {
        Ok(nu) => Some((theorem1_failure(max_m, n as u64, delta, nu.nu)?, nu.nu)),
        Err(_) => None,
    };
    let stream = SeedStream::new(seed, "tail1");
    let threshold = delta * n as f64;
    let reports = exec.map(trials, |i| {
        use rand::Rng;
        let i = i as u64;
        let mut rng = stream.rng(i);
        let points = (0..n).map(|_| rng.random::<f64>()).collect();
        let draw = ContinuousDraw::new(points).expect("points in [0, 1)");
        let sup = draw.sup_abs(max_m);
        TrialReport {
            trial_index: i,
            statistic: sup / n as f64,
            event: sup >= threshold,
            seed_used: stream.seed(i),
        }
    });
    Ok(TailRun::from_reports(reports, bound))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateRun {
    pub n: u64,
    pub nu: u32,
    pub trials: usize,
    pub certified: usize,
    pub cert_rate: f64,
    pub stderr: f64,
    /// Closed-form failure bound `(π/2)√(2Ce log N) N^{1−C}`.
    pub bound_pred: f64,
    /// `T >= N/2`: threshold too small for the certificate to be expected.
    pub degenerate: bool,
    pub reports: Vec<TrialReport>,
}

impl CertificateRun {
    /// `cert_rate >= 1 − bound − 4σ`.
    pub fn dominated(&self) -> bool {
        self.cert_rate >= 1.0 - self.bound_pred - SIGMA_TOLERANCE * self.stderr
    }
}

fn certificate_params(modulus: usize, sparsity: u64, c: f64) -> Result<(u64, u32, f64)> {
    require_prime_ge5(modulus)?;
    let refined = refined_nu_and_bound(modulus, sparsity, c)?;
    let n = sample_count(modulus, sparsity, c);
    if n > MAX_SAMPLE_COUNT {
        return Err(Error::param(format!(
            "n = {n} exceeds the cap {MAX_SAMPLE_COUNT}"
        )));
    }
    Ok((n, refined.nu, refined.failure))
}

/// Fraction of occupancy draws with `n = ⌈4CT² log N⌉` whose kernel passes
/// the certificate test at sparsity T.
pub fn run_certificate(
    modulus: usize,
    sparsity: u64,
    c: f64,
    trials: usize,
    seed: u64,
    exec: Execution,
) -> Result<CertificateRun> {
    check_trials(trials)?;
    let (n, nu, bound_pred) = certificate_params(modulus, sparsity, c)?;
    let stream = SeedStream::new(seed, "certificate");
    let reports = exec.map(trials, |i| {
        let i = i as u64;
        let draw = sample_draw(&mut stream.rng(i), modulus, n as usize);
        let profile = kernel_profile(&draw);
        let verdict = certificate_check(&profile, sparsity).expect("T >= 1");
        TrialReport {
            trial_index: i,
            statistic: profile.offpeak_sup / profile.peak,
            event: verdict.holds,
            seed_used: stream.seed(i),
        }
    });
    let certified = reports.iter().filter(|r| r.event).count();
    let rate = certified as f64 / trials as f64;
    Ok(CertificateRun {
        n,
        nu,
        trials,
        certified,
        cert_rate: rate,
        stderr: binomial_stderr(rate, trials),
        bound_pred,
        degenerate: 2 * sparsity as usize >= modulus,
        reports,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmegaTrial {
    pub trial_index: u64,
    pub omega_size: usize,
    pub certified: bool,
    pub margin: f64,
    pub successes: usize,
    pub failures: usize,
    pub indeterminate: usize,
    pub max_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryRun {
    pub n: u64,
    pub bound_pred: f64,
    pub omega_draws: usize,
    pub certified_draws: usize,
    /// Signals tried on certified draws, and how they fared.
    pub certified_signals: usize,
    pub certified_recovered: usize,
    pub certified_failed: usize,
    /// Non-converged solves, over all draws.
    pub indeterminate: usize,
    pub uncertified_signals: usize,
    pub uncertified_recovered: usize,
    pub per_omega: Vec<OmegaTrial>,
}

impl RecoveryRun {
    pub fn cert_rate(&self) -> f64 {
        self.certified_draws as f64 / self.omega_draws as f64
    }

    pub fn indeterminate_fraction(&self) -> f64 {
        self.indeterminate as f64
            / (self.certified_signals + self.uncertified_signals).max(1) as f64
    }

    /// Every converged solve on a certified draw recovered the signal, and at
    /// most 1% of all solves failed to converge.
    pub fn passed(&self) -> bool {
        self.certified_failed == 0 && self.indeterminate_fraction() <= 0.01
    }
}

/// Full pipeline: occupancy Ω, certificate at sparsity T, then basis
/// pursuit on `trials_x` random T-sparse signals per Ω.
#[allow(clippy::too_many_arguments)]
pub fn run_recovery(
    modulus: usize,
    sparsity: u64,
    c: f64,
    trials_omega: usize,
    trials_x: usize,
    seed: u64,
    tol: f64,
    solver: &SolverConfig,
    exec: Execution,
) -> Result<RecoveryRun> {
    check_trials(trials_omega)?;
    check_trials(trials_x)?;
    let (n, _, bound_pred) = certificate_params(modulus, sparsity, c)?;
    let stream = SeedStream::new(seed, "recovery");
    let per_omega = exec
        .map(trials_omega, |i| {
            let i = i as u64;
            let draw = sample_draw(&mut stream.rng(i), modulus, n as usize);
            let report = guaranteed_recovery_check(
                &draw,
                sparsity,
                trials_x,
                stream.child("signals").seed(i),
                tol,
                solver,
            )?;
            Ok(OmegaTrial {
                trial_index: i,
                omega_size: draw.range().len(),
                certified: report.certificate.holds,
                margin: report.certificate.margin,
                successes: report.successes,
                failures: report.failures,
                indeterminate: report.indeterminate,
                max_error: report.max_error,
            })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mut run = RecoveryRun {
        n,
        bound_pred,
        omega_draws: trials_omega,
        certified_draws: 0,
        certified_signals: 0,
        certified_recovered: 0,
        certified_failed: 0,
        indeterminate: 0,
        uncertified_signals: 0,
        uncertified_recovered: 0,
        per_omega,
    };
    for t in &run.per_omega {
        run.indeterminate += t.indeterminate;
        if t.certified {
            run.certified_draws += 1;
            run.certified_signals += trials_x;
            run.certified_recovered += t.successes;
            run.certified_failed += t.failures;
        } else {
            run.uncertified_signals += trials_x;
            run.uncertified_recovered += t.successes;
        }
    }
    Ok(run)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub model: OmegaModel,
    pub exact_mean: f64,
    pub empirical_mean: f64,
    pub empirical_mean_stderr: f64,
    pub cert_rate: f64,
    /// `histogram[k]` = number of trials with |Ω| = k.
    pub histogram: Vec<usize>,
    pub exact: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelComparison {
    pub modulus: usize,
    pub n: usize,
    pub reference_t: u64,
    pub trials: usize,
    pub models: Vec<ModelSummary>,
}

/// The four Ω models calibrated to the occupancy model with n draws.
pub fn calibrated_models(n: usize, modulus: usize) -> Result<Vec<OmegaModel>> {
    let cal = model_calibration(n, modulus)?;
    // The Bernoulli model needs τ < 1; saturation is clipped just below.
    let tau_b = cal.tau.min(1.0 - 1e-12);
    [
        ModelKind::UniformSubset { f: cal.f },
        ModelKind::BernoulliSelection { tau: tau_b },
        ModelKind::OccupationRange { n },
        ModelKind::PoissonProcess { tau: cal.tau },
    ]
    .into_iter()
    .map(|k| OmegaModel::new(k, modulus))
    .collect()
}

/// Empirical |Ω| histograms and certificate rates for the four calibrated
/// models. The occupancy model is certified with multiplicity weights; the
/// others with unit weights on Ω. An empty Ω never certifies.
pub fn run_model_compare(
    modulus: usize,
    n: usize,
    reference_t: u64,
    trials: usize,
    seed: u64,
    exec: Execution,
) -> Result<ModelComparison> {
    check_trials(trials)?;
    if reference_t < 1 {
        return Err(Error::param("reference T must be >= 1"));
    }
    let models = calibrated_models(n, modulus)?;
    let root = SeedStream::new(seed, "model-compare");
    let summaries = models
        .iter()
        .map(|model| {
            let stream = root.child(model.name());
            let outcomes = exec.map(trials, |i| {
                let sample = sample_omega_with(model, &mut stream.rng(i as u64));
                let draw = match sample.draw {
                    Some(d) => Some(d),
                    None if sample.omega.is_empty() => None,
                    None => {
                        Some(FrequencyDraw::from_set(modulus, &sample.omega).expect("nonempty"))
                    }
                };
                let cert = draw
                    .map(|d| {
                        certificate_check(&kernel_profile(&d), reference_t)
                            .expect("T >= 1")
                            .holds
                    })
                    .unwrap_or(false);
                (sample.omega.len(), cert)
            });
            let mut histogram = vec![0usize; modulus + 1];
            let mut certified = 0usize;
            for &(k, cert) in &outcomes {
                histogram[k] += 1;
                certified += cert as usize;
            }
            let mean = outcomes.iter().map(|o| o.0 as f64).sum::<f64>() / trials as f64;
            let var = outcomes
                .iter()
                .map(|o| (o.0 as f64 - mean).powi(2))
                .sum::<f64>()
                / trials as f64;
            let dist = size_distribution(model);
            ModelSummary {
                model: *model,
                exact_mean: dist.mean(),
                empirical_mean: mean,
                empirical_mean_stderr: (var / trials as f64).sqrt(),
                cert_rate: certified as f64 / trials as f64,
                histogram,
                exact: dist.probabilities,
            }
        })
        .collect();
    Ok(ModelComparison {
        modulus,
        n,
        reference_t,
        trials,
        models: summaries,
    })
}
