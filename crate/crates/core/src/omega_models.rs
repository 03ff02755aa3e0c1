//! Random frequency sets Ω ⊆ Z_N: uniform f-subsets, independent Bernoulli
//! selection, the range of n uniform draws (occupancy), and a Poisson
//! point process. All four are exchangeable, so each is determined by the
//! law of |Ω|, which [`size_distribution`] gives exactly.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::arith::check_modulus;
use crate::error::{Error, Result};
use crate::exp_sums::FrequencyDraw;
use crate::seed::TrialRng;

/// Above this modulus the binomial law is computed in log space instead of
/// exact rationals.
const EXACT_BINOMIAL_MAX_N: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelKind {
    UniformSubset { f: usize },
    BernoulliSelection { tau: f64 },
    OccupationRange { n: usize },
    PoissonProcess { tau: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmegaModel {
    pub kind: ModelKind,
    pub modulus: usize,
}

impl OmegaModel {
    pub fn new(kind: ModelKind, modulus: usize) -> Result<Self> {
        check_modulus(modulus)?;
        match kind {
            ModelKind::UniformSubset { f } if f > modulus => {
                return Err(Error::param(format!("f must lie in [0, N] (got {f})")))
            }
            ModelKind::BernoulliSelection { tau } if !(tau > 0.0 && tau < 1.0) => {
                return Err(Error::param(format!("tau must lie in (0, 1) (got {tau})")))
            }
            ModelKind::OccupationRange { n } if n < 1 => {
                return Err(Error::param("n must be >= 1"))
            }
            ModelKind::PoissonProcess { tau } if !(tau > 0.0 && tau.is_finite()) => {
                return Err(Error::param(format!("tau must be > 0 (got {tau})")))
            }
            _ => {}
        }
        Ok(Self { kind, modulus })
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            ModelKind::UniformSubset { .. } => "uniform_subset",
            ModelKind::BernoulliSelection { .. } => "bernoulli_selection",
            ModelKind::OccupationRange { .. } => "occupation_range",
            ModelKind::PoissonProcess { .. } => "poisson_process",
        }
    }
}

/// A sampled Ω (ascending) and, for the occupancy model, the tuple that
/// produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaSample {
    pub omega: Vec<usize>,
    #[serde(with = "draw_points")]
    pub draw: Option<FrequencyDraw>,
}

mod draw_points {
    use super::FrequencyDraw;
    use serde::{Serialize, Serializer};

    pub fn serialize<S: Serializer>(d: &Option<FrequencyDraw>, s: S) -> Result<S::Ok, S::Error> {
        d.as_ref().map(|d| d.points().to_vec()).serialize(s)
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(
        _: D,
    ) -> Result<Option<FrequencyDraw>, D::Error> {
        // modulus is not part of the wire format; readers use `omega`.
        Ok(None)
    }
}

impl OmegaSample {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }
}

/// Samples Ω from `model` with a generator seeded by `seed`.
pub fn sample_omega(model: &OmegaModel, seed: u64) -> OmegaSample {
    use rand::SeedableRng;
    sample_omega_with(model, &mut TrialRng::seed_from_u64(seed))
}

pub fn sample_omega_with<R: Rng + ?Sized>(model: &OmegaModel, rng: &mut R) -> OmegaSample {
    let n = model.modulus;
    match model.kind {
        ModelKind::UniformSubset { f } => OmegaSample {
            omega: uniform_subset(rng, n, f),
            draw: None,
        },
        ModelKind::BernoulliSelection { tau } => OmegaSample {
            omega: (0..n).filter(|_| rng.random_bool(tau)).collect(),
            draw: None,
        },
        ModelKind::OccupationRange { n: count } => {
            let draw = sample_draw(rng, n, count);
            OmegaSample {
                omega: draw.range(),
                draw: Some(draw),
            }
        }
        ModelKind::PoissonProcess { tau } => {
            let probs = truncated_poisson(tau * n as f64, n);
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut size = n;
            for (k, p) in probs.iter().enumerate() {
                acc += p;
                if u < acc {
                    size = k;
                    break;
                }
            }
            OmegaSample {
                omega: uniform_subset(rng, n, size),
                draw: None,
            }
        }
    }
}

/// `count` iid uniform frequencies on Z_N.
pub fn sample_draw<R: Rng + ?Sized>(rng: &mut R, modulus: usize, count: usize) -> FrequencyDraw {
    let points = (0..count).map(|_| rng.random_range(0..modulus)).collect();
    FrequencyDraw::new(modulus, points).expect("valid draw")
}

fn uniform_subset<R: Rng + ?Sized>(rng: &mut R, n: usize, size: usize) -> Vec<usize> {
    let mut v = rand::seq::index::sample(rng, n, size).into_vec();
    v.sort_unstable();
    v
}

/// Law of |Ω| on `0..=N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeDistribution {
    pub model: OmegaModel,
    /// `probabilities[k] = P(|Ω| = k)`.
    pub probabilities: Vec<f64>,
    /// Exact masses when computed in rational arithmetic.
    #[serde(skip)]
    pub exact: Option<Vec<BigRational>>,
    pub notes: Vec<String>,
}

impl SizeDistribution {
    pub fn mean(&self) -> f64 {
        self.probabilities
            .iter()
            .enumerate()
            .map(|(k, p)| k as f64 * p)
            .sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.probabilities
            .iter()
            .enumerate()
            .map(|(k, p)| (k as f64 - m).powi(2) * p)
            .sum()
    }

    /// `k,probability` rows for k with positive mass.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,probability\n");
        for (k, p) in self.probabilities.iter().enumerate() {
            if *p > 0.0 {
                out.push_str(&format!("{k},{p:.16e}\n"));
            }
        }
        out
    }
}

pub fn size_distribution(model: &OmegaModel) -> SizeDistribution {
    let n = model.modulus;
    let mut notes = Vec::new();
    let (exact, probabilities) = match model.kind {
        ModelKind::UniformSubset { f } => {
            let exact: Vec<BigRational> = (0..=n)
                .map(|k| {
                    if k == f {
                        BigRational::one()
                    } else {
                        BigRational::zero()
                    }
                })
                .collect();
            (Some(exact), None)
        }
        ModelKind::BernoulliSelection { tau } if n <= EXACT_BINOMIAL_MAX_N => {
            (Some(binomial_exact(n, tau)), None)
        }
        ModelKind::BernoulliSelection { tau } => {
            notes.push("binomial masses computed in log space".into());
            (None, Some(binomial_log_space(n, tau)))
        }
        ModelKind::OccupationRange { n: count } => (Some(occupancy_exact(n, count)), None),
        ModelKind::PoissonProcess { tau } => {
            notes.push(format!(
                "Poisson({}) truncated to [0, {n}] and renormalized",
                tau * n as f64
            ));
            (None, Some(truncated_poisson(tau * n as f64, n)))
        }
    };
    let probabilities = probabilities.unwrap_or_else(|| {
        exact
            .as_ref()
            .expect("exact masses")
            .iter()
            .map(|r| r.to_f64().unwrap_or(0.0))
            .collect()
    });
    SizeDistribution {
        model: *model,
        probabilities,
        exact,
        notes,
    }
}

fn big_binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    (0..k).fold(BigUint::one(), |acc, i| acc * (n - i) / (i + 1))
}

fn binomial_exact(n: usize, tau: f64) -> Vec<BigRational> {
    let t = BigRational::from_float(tau).expect("finite tau");
    let (a, d) = (t.numer().clone(), t.denom().clone());
    let b = &d - &a;
    let den = num_traits::pow(d, n);
    (0..=n)
        .map(|k| {
            let num = BigInt::from(big_binomial(n, k))
                * num_traits::pow(a.clone(), k)
                * num_traits::pow(b.clone(), n - k);
            BigRational::new(num, den.clone())
        })
        .collect()
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut v = vec![0.0; n + 1];
    for k in 1..=n {
        v[k] = v[k - 1] + (k as f64).ln();
    }
    v
}

fn binomial_log_space(n: usize, tau: f64) -> Vec<f64> {
    let lf = ln_factorials(n);
    normalize_logs(
        (0..=n)
            .map(|k| {
                lf[n] - lf[k] - lf[n - k] + k as f64 * tau.ln() + (n - k) as f64 * (1.0 - tau).ln()
            })
            .collect(),
    )
}

fn truncated_poisson(lambda: f64, n: usize) -> Vec<f64> {
    let lf = ln_factorials(n);
    normalize_logs(
        (0..=n)
            .map(|k| k as f64 * lambda.ln() - lambda - lf[k])
            .collect(),
    )
}

fn normalize_logs(logs: Vec<f64>) -> Vec<f64> {
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

/// Stirling numbers of the second kind `S(n, k)` for `k = 0..=n`.
pub fn stirling_second_row(n: usize) -> Vec<BigUint> {
    let mut row = vec![BigUint::one()];
    for i in 1..=n {
        let mut next = vec![BigUint::zero(); i + 1];
        for k in 1..=i {
            let carry = if k < row.len() {
                &row[k] * k
            } else {
                BigUint::zero()
            };
            next[k] = carry + &row[k - 1];
        }
        row = next;
    }
    row
}

/// `P(|Ω| = k) = C(N, k) k! S(n, k) / N^n` for the range of n uniform draws.
fn occupancy_exact(modulus: usize, count: usize) -> Vec<BigRational> {
    let stirling = stirling_second_row(count);
    let den = BigInt::from(BigUint::from(modulus).pow(count as u32));
    (0..=modulus)
        .map(|k| {
            if k > count || k == 0 {
                return BigRational::zero();
            }
            let surj = crate::exp_sums::factorial(k as u64) * &stirling[k];
            BigRational::new(BigInt::from(big_binomial(modulus, k) * surj), den.clone())
        })
        .collect()
}

/// Parameters of the uniform and Bernoulli models matched to the occupancy
/// model by mean size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    /// `E|Ω| = N (1 − (1 − 1/N)^n)`.
    pub expected_size: f64,
    pub f: usize,
    pub tau: f64,
}

pub fn model_calibration(n: usize, modulus: usize) -> Result<Calibration> {
    check_modulus(modulus)?;
    if n < 1 {
        return Err(Error::param("n must be >= 1"));
    }
    let nf = modulus as f64;
    let expected_size = nf * (1.0 - (1.0 - 1.0 / nf).powi(n as i32));
    Ok(Calibration {
        expected_size,
        f: expected_size.round() as usize,
        tau: expected_size / nf,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn rat(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn validation() {
        assert!(OmegaModel::new(ModelKind::UniformSubset { f: 6 }, 5).is_err());
        assert!(OmegaModel::new(ModelKind::BernoulliSelection { tau: 1.0 }, 5).is_err());
        assert!(OmegaModel::new(ModelKind::OccupationRange { n: 0 }, 5).is_err());
        assert!(OmegaModel::new(ModelKind::PoissonProcess { tau: 0.0 }, 5).is_err());
        assert!(OmegaModel::new(ModelKind::PoissonProcess { tau: 2.0 }, 5).is_ok());
        assert!(OmegaModel::new(ModelKind::UniformSubset { f: 1 }, 1).is_err());
    }

    #[test]
    fn sampler_examples() {
        let full = OmegaModel::new(ModelKind::UniformSubset { f: 9 }, 9).unwrap();
        for seed in 0..20 {
            assert_eq!(sample_omega(&full, seed).omega, (0..9).collect::<Vec<_>>());
        }
        let single = OmegaModel::new(ModelKind::OccupationRange { n: 1 }, 7).unwrap();
        let mut seen = [0usize; 7];
        for seed in 0..7000 {
            let s = sample_omega(&single, seed);
            assert_eq!(s.omega.len(), 1);
            assert_eq!(s.draw.as_ref().unwrap().points(), &s.omega[..]);
            seen[s.omega[0]] += 1;
        }
        assert!(seen.iter().all(|&c| c > 850 && c < 1150), "{seen:?}");
        let m = OmegaModel::new(ModelKind::PoissonProcess { tau: 0.4 }, 31).unwrap();
        assert_eq!(sample_omega(&m, 42), sample_omega(&m, 42));
    }

    #[test]
    fn sample_json() {
        let m = OmegaModel::new(ModelKind::OccupationRange { n: 3 }, 5).unwrap();
        let v: serde_json::Value = serde_json::from_str(&sample_omega(&m, 1).to_json()).unwrap();
        assert!(v["omega"].is_array());
        assert_eq!(v["draw"].as_array().unwrap().len(), 3);
        let u = OmegaModel::new(ModelKind::UniformSubset { f: 2 }, 5).unwrap();
        let v: serde_json::Value = serde_json::from_str(&sample_omega(&u, 1).to_json()).unwrap();
        assert!(v["draw"].is_null());
    }

    #[test]
    fn occupancy_small() {
        let m = OmegaModel::new(ModelKind::OccupationRange { n: 2 }, 5).unwrap();
        let d = size_distribution(&m);
        let exact = d.exact.as_ref().unwrap();
        assert_eq!(exact[1], rat(1, 5));
        assert_eq!(exact[2], rat(4, 5));
        assert!(exact[0].is_zero() && exact[3].is_zero());
        for modulus in 2..8 {
            let m = OmegaModel::new(ModelKind::OccupationRange { n: 1 }, modulus).unwrap();
            let e = size_distribution(&m).exact.unwrap();
            assert_eq!(e[1], BigRational::one());
        }
    }

    #[test]
    fn stirling_rows() {
        let r: Vec<u64> = stirling_second_row(5)
            .iter()
            .map(|v| v.to_u64().unwrap())
            .collect();
        assert_eq!(r, vec![0, 1, 15, 25, 10, 1]);
        assert_eq!(stirling_second_row(0), vec![BigUint::one()]);
    }

    #[test]
    fn masses_sum_to_one() {
        let models = [
            ModelKind::UniformSubset { f: 3 },
            ModelKind::BernoulliSelection { tau: 0.3 },
            ModelKind::OccupationRange { n: 9 },
        ];
        for kind in models {
            let d = size_distribution(&OmegaModel::new(kind, 13).unwrap());
            let total: BigRational = d.exact.as_ref().unwrap().iter().cloned().sum();
            assert_eq!(total, BigRational::one(), "{kind:?}");
        }
        for kind in [
            ModelKind::PoissonProcess { tau: 0.7 },
            ModelKind::BernoulliSelection { tau: 0.37 },
        ] {
            let d = size_distribution(&OmegaModel::new(kind, 997).unwrap());
            assert!(d.exact.is_none());
            assert_abs_diff_eq!(d.probabilities.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn bernoulli_moments() {
        for (n, tau) in [(20usize, 0.25), (50, 0.5), (997, 0.1)] {
            let d = size_distribution(
                &OmegaModel::new(ModelKind::BernoulliSelection { tau }, n).unwrap(),
            );
            assert_abs_diff_eq!(d.mean(), tau * n as f64, epsilon = 1e-9);
            assert_abs_diff_eq!(d.variance(), tau * (1.0 - tau) * n as f64, epsilon = 1e-8);
        }
        // both paths agree at the switch-over size
        let exact = binomial_exact(150, 0.3);
        let logs = binomial_log_space(150, 0.3);
        for (e, l) in exact.iter().zip(&logs) {
            assert!((e.to_f64().unwrap() - l).abs() < 1e-12);
        }
    }

    #[test]
    fn calibration_examples() {
        let c = model_calibration(1, 17).unwrap();
        assert_eq!(c.f, 1);
        assert_abs_diff_eq!(c.tau, 1.0 / 17.0, epsilon = 1e-15);
        let c = model_calibration(2, 5).unwrap();
        assert_abs_diff_eq!(c.expected_size, 9.0 / 5.0, epsilon = 1e-12);
        assert_eq!(c.f, 2);
        assert_abs_diff_eq!(c.tau, 0.36, epsilon = 1e-12);
        let c = model_calibration(10_000, 31).unwrap();
        assert_abs_diff_eq!(c.tau, 1.0, epsilon = 1e-12);
        assert_eq!(c.f, 31);
        // agrees with the mean of the exact law, and E|Ω| <= n
        for n in 1..10 {
            let d =
                size_distribution(&OmegaModel::new(ModelKind::OccupationRange { n }, 7).unwrap());
            let c = model_calibration(n, 7).unwrap();
            assert_abs_diff_eq!(d.mean(), c.expected_size, epsilon = 1e-12);
            assert!(c.expected_size <= n as f64 + 1e-12);
            if n > 1 {
                assert!(c.expected_size < n as f64);
            }
        }
    }

    #[test]
    fn csv_output() {
        let d =
            size_distribution(&OmegaModel::new(ModelKind::OccupationRange { n: 2 }, 5).unwrap());
        assert_eq!(
            d.to_csv(),
            "k,probability\n1,2.0000000000000001e-1\n2,8.0000000000000004e-1\n"
        );
    }
}
