//! Simultaneous-perturbation stochastic approximation.
//!
//! Each iteration draws a Rademacher direction `delta` and evaluates the
//! objective at `theta +- c_k delta`, giving the gradient estimate
//! `(f+ - f-) / (2 c_k) * delta` (`1/delta_i = delta_i`). Gains follow
//! `a_k = a / (k + 1 + A)^alpha` and `c_k = c / (k + 1)^gamma`.

use log::debug;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::hamiltonian::{EnergyEstimate, HamiltonianError};

/// First update per parameter that gain calibration aims for (2 pi / 10).
pub const DEFAULT_FIRST_STEP: f64 = std::f64::consts::TAU / 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SpsaConfig {
    pub max_iterations: usize,
    /// Step-size magnitude; calibrated from `calibration_samples` probes at
    /// the starting point when `None`.
    pub a: Option<f64>,
    pub c: f64,
    pub alpha: f64,
    pub gamma: f64,
    /// Stability offset `A`; `None` means `0.1 * max_iterations`.
    pub stability: Option<f64>,
    pub calibration_samples: usize,
    /// Size of the first update per parameter that calibration aims for.
    pub target_first_step: f64,
    pub seed: u64,
}

impl Default for SpsaConfig {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            a: None,
            c: 0.1,
            alpha: 0.602,
            gamma: 0.101,
            stability: None,
            calibration_samples: 25,
            target_first_step: DEFAULT_FIRST_STEP,
            seed: 0,
        }
    }
}

impl SpsaConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn stability_offset(&self) -> f64 {
        self.stability.unwrap_or(0.1 * self.max_iterations as f64)
    }

    /// Objective calls `spsa_minimize` will make.
    pub fn evaluation_budget(&self) -> usize {
        let calibration = if self.a.is_none() { self.calibration_samples } else { 0 };
        2 * (self.max_iterations + calibration)
    }

    pub fn validate(&self) -> Result<(), SpsaError> {
        let bad = |m: &str| Err(SpsaError::InvalidConfig(m.to_string()));
        if self.max_iterations == 0 {
            return bad("max_iterations must be at least 1");
        }
        if let Some(a) = self.a {
            if !(a > 0.0 && a.is_finite()) {
                return bad("a must be positive");
            }
        } else if self.calibration_samples == 0 {
            return bad("calibration needs at least one sample when a is not set");
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return bad("c must be positive");
        }
        if !(0.0 < self.gamma && self.gamma < self.alpha && self.alpha <= 1.0) {
            return bad("need 0 < gamma < alpha <= 1");
        }
        if !(self.stability_offset() >= 0.0 && self.stability_offset().is_finite()) {
            return bad("stability offset must be non-negative");
        }
        if !(self.target_first_step > 0.0 && self.target_first_step.is_finite()) {
            return bad("target_first_step must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpsaError {
    #[error("invalid SPSA configuration: {0}")]
    InvalidConfig(String),
    #[error("objective is not finite ({value}) at iteration {iteration}, theta = {theta:?}")]
    NonFinite {
        iteration: usize,
        value: f64,
        theta: Vec<f64>,
    },
    #[error("empty parameter vector")]
    NoParameters,
    #[error(transparent)]
    Objective(#[from] HamiltonianError),
}

/// One recorded point per iteration: the better of the two perturbed
/// evaluations.
#[derive(Debug, Clone, PartialEq)]
pub struct TracePoint {
    pub iteration: usize,
    pub theta: Vec<f64>,
    pub estimate: EnergyEstimate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpsaOutcome {
    /// Parameters of the lowest recorded objective value.
    pub best_theta: Vec<f64>,
    pub best_estimate: EnergyEstimate,
    pub final_theta: Vec<f64>,
    pub trace: Vec<TracePoint>,
    pub calibrated_a: f64,
    pub evaluations: usize,
}

pub fn spsa_minimize<F>(
    mut objective: F,
    theta0: &[f64],
    config: &SpsaConfig,
) -> Result<SpsaOutcome, SpsaError>
where
    F: FnMut(&[f64]) -> Result<EnergyEstimate, HamiltonianError>,
{
    config.validate()?;
    if theta0.is_empty() {
        return Err(SpsaError::NoParameters);
    }
    let dim = theta0.len();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut evaluations = 0usize;
    let mut eval = |theta: &[f64], iteration: usize| -> Result<EnergyEstimate, SpsaError> {
        evaluations += 1;
        let e = objective(theta)?;
        if !e.value.is_finite() {
            return Err(SpsaError::NonFinite {
                iteration,
                value: e.value,
                theta: theta.to_vec(),
            });
        }
        Ok(e)
    };
    let rademacher = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..dim)
            .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
            .collect()
    };
    let shifted = |theta: &[f64], delta: &[f64], step: f64| -> Vec<f64> {
        theta.iter().zip(delta).map(|(t, d)| t + step * d).collect()
    };

    let big_a = config.stability_offset();
    let a = match config.a {
        Some(a) => a,
        None => {
            let mut total = 0.0;
            for _ in 0..config.calibration_samples {
                let delta = rademacher(&mut rng);
                let plus = eval(&shifted(theta0, &delta, config.c), 0)?;
                let minus = eval(&shifted(theta0, &delta, -config.c), 0)?;
                total += (plus.value - minus.value).abs() / (2.0 * config.c);
            }
            let magnitude = total / config.calibration_samples as f64;
            let scale = (big_a + 1.0).powf(config.alpha);
            if magnitude > 0.0 {
                config.target_first_step * scale / magnitude
            } else {
                debug!("flat objective during SPSA calibration; using unit gradient scale");
                config.target_first_step * scale
            }
        }
    };

    let mut theta = theta0.to_vec();
    let mut trace = Vec::with_capacity(config.max_iterations);
    for k in 0..config.max_iterations {
        let ak = a / (k as f64 + 1.0 + big_a).powf(config.alpha);
        let ck = config.c / (k as f64 + 1.0).powf(config.gamma);
        let delta = rademacher(&mut rng);
        let theta_plus = shifted(&theta, &delta, ck);
        let theta_minus = shifted(&theta, &delta, -ck);
        let plus = eval(&theta_plus, k)?;
        let minus = eval(&theta_minus, k)?;
        let slope = (plus.value - minus.value) / (2.0 * ck);
        let (better_theta, better) = if plus.value <= minus.value {
            (theta_plus, plus)
        } else {
            (theta_minus, minus)
        };
        trace.push(TracePoint {
            iteration: k,
            theta: better_theta,
            estimate: better,
        });
        for (t, d) in theta.iter_mut().zip(&delta) {
            *t -= ak * slope * d;
        }
    }

    let best = trace
        .iter()
        .min_by(|x, y| x.estimate.value.total_cmp(&y.estimate.value))
        .expect("at least one iteration");
    Ok(SpsaOutcome {
        best_theta: best.theta.clone(),
        best_estimate: best.estimate,
        final_theta: theta,
        trace,
        calibrated_a: a,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact(value: f64) -> Result<EnergyEstimate, HamiltonianError> {
        Ok(EnergyEstimate {
            value,
            standard_error: 0.0,
            shots_used: 0,
        })
    }

    #[test]
    fn convex_bowl() {
        let out = spsa_minimize(
            |t: &[f64]| exact(t.iter().map(|x| x * x).sum()),
            &[1.0; 4],
            &SpsaConfig::default(),
        )
        .unwrap();
        assert!(out.best_estimate.value < 1e-2, "{}", out.best_estimate.value);
    }

    #[test]
    fn shifted_parabola() {
        let out = spsa_minimize(
            |t: &[f64]| exact((t[0] - 1.0).powi(2)),
            &[5.0],
            &SpsaConfig::default().with_seed(3),
        )
        .unwrap();
        assert!((out.best_theta[0] - 1.0).abs() < 0.1, "{:?}", out.best_theta);
    }

    #[test]
    fn evaluation_count_is_exact() {
        for (iters, a) in [(1, None), (17, None), (50, Some(0.3))] {
            let config = SpsaConfig {
                max_iterations: iters,
                a,
                ..SpsaConfig::default()
            };
            let mut calls = 0;
            let out = spsa_minimize(
                |t: &[f64]| {
                    calls += 1;
                    exact(t[0].sin() + t[1].cos())
                },
                &[0.2, 0.4],
                &config,
            )
            .unwrap();
            assert_eq!(calls, config.evaluation_budget());
            assert_eq!(out.evaluations, calls);
            assert_eq!(out.trace.len(), iters);
        }
        assert_eq!(SpsaConfig::default().evaluation_budget(), 450);
    }

    #[test]
    fn best_is_minimum_of_trace_and_deterministic() {
        let f = |t: &[f64]| exact((t[0] - 0.5).powi(2) + (3.0 * t[1]).sin());
        let config = SpsaConfig::default().with_seed(8);
        let a = spsa_minimize(f, &[2.0, 2.0], &config).unwrap();
        let b = spsa_minimize(f, &[2.0, 2.0], &config).unwrap();
        assert_eq!(a, b);
        assert!(a.trace.iter().all(|p| a.best_estimate.value <= p.estimate.value));
    }

    #[test]
    fn rejects_bad_input() {
        let f = |_: &[f64]| exact(0.0);
        let bad = SpsaConfig {
            gamma: 0.7,
            ..SpsaConfig::default()
        };
        assert!(matches!(spsa_minimize(f, &[0.0], &bad), Err(SpsaError::InvalidConfig(_))));
        let bad = SpsaConfig {
            max_iterations: 0,
            ..SpsaConfig::default()
        };
        assert!(spsa_minimize(f, &[0.0], &bad).is_err());
        assert!(matches!(
            spsa_minimize(f, &[], &SpsaConfig::default()),
            Err(SpsaError::NoParameters)
        ));
        let nan = |_: &[f64]| exact(f64::NAN);
        assert!(matches!(
            spsa_minimize(nan, &[0.0], &SpsaConfig::default()),
            Err(SpsaError::NonFinite { .. })
        ));
    }
}
