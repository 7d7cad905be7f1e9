//! Proactive substation security assessment: the binary decision model the
//! port controller runs when an alert arrives.
//!
//! Given an attack vector over the protection IEDs, the model decides which
//! IED ports to disable (`D`), whether to enable the standby CIED (`E`), and
//! which trip subscriptions to redirect (`F`), scoring the outcome with a
//! weighted disruption objective. The constraints pin every variable, so
//! [`solve`](PssaInstance::solve) is constraint propagation plus evaluation;
//! [`enumerate_oracle`](PssaInstance::enumerate_oracle) brute-forces the full
//! binary cube to certify that reading and to guard regressions.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PssaError {
    #[error("vector lengths disagree: {weights} weights, {attacks} attack bits, {disableable} disableable bits")]
    LengthMismatch {
        weights: usize,
        attacks: usize,
        disableable: usize,
    },
    #[error("weight for IED {index} is {value}; weights must be positive and finite")]
    BadWeight { index: usize, value: f64 },
    #[error("gamma is {0}; it must be positive and finite")]
    BadGamma(f64),
}

/// One decision problem: per-IED impact weights, the CIED enable weight, the
/// observed attack vector, and per-IED operational flags saying whether the
/// IED's ports may be disabled at all.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PssaInstance {
    pub weights: Vec<f64>,
    pub gamma: f64,
    pub attacks: Vec<bool>,
    pub disableable: Vec<bool>,
}

/// A full assignment of the decision variables plus its objective value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PssaSolution {
    /// `D`: disable the ports of IED `i`.
    pub disable: Vec<bool>,
    /// `E`: bring the CIED online.
    pub enable_cied: bool,
    /// `F`: redirect IED `i`'s trip subscription to the CIED.
    pub redirect: Vec<bool>,
    pub objective: f64,
}

/// CIED enable bit: 1 as soon as at least one IED is under attack.
pub fn cied_enable(attacks: &[bool]) -> bool {
    attacks.iter().any(|&a| a)
}

impl PssaInstance {
    pub fn new(
        weights: Vec<f64>,
        gamma: f64,
        attacks: Vec<bool>,
        disableable: Vec<bool>,
    ) -> Result<PssaInstance, PssaError> {
        if weights.len() != attacks.len() || weights.len() != disableable.len() {
            return Err(PssaError::LengthMismatch {
                weights: weights.len(),
                attacks: attacks.len(),
                disableable: disableable.len(),
            });
        }
        for (index, &value) in weights.iter().enumerate() {
            if !(value.is_finite() && value > 0.0) {
                return Err(PssaError::BadWeight { index, value });
            }
        }
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(PssaError::BadGamma(gamma));
        }
        Ok(PssaInstance {
            weights,
            gamma,
            attacks,
            disableable,
        })
    }

    /// Convenience constructor for the common case where every IED may be
    /// disabled.
    pub fn all_disableable(
        weights: Vec<f64>,
        gamma: f64,
        attacks: Vec<bool>,
    ) -> Result<PssaInstance, PssaError> {
        let n = attacks.len();
        PssaInstance::new(weights, gamma, attacks, vec![true; n])
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    /// Propagates the constraints and evaluates the objective.
    ///
    /// An attacked IED is disabled when operations permit (`D_i = A_i`,
    /// else `D_i = 0`), the CIED comes online if anything is attacked, and
    /// every attacked IED's subscription is redirected (`F_i = A_i`) — even
    /// when its ports cannot be disabled, since the standby is the only
    /// trustworthy source once the IED is compromised.
    pub fn solve(&self) -> PssaSolution {
        let disable: Vec<bool> = self
            .attacks
            .iter()
            .zip(&self.disableable)
            .map(|(&a, &d)| a && d)
            .collect();
        let enable_cied = cied_enable(&self.attacks);
        let redirect = self.attacks.clone();

        let mut objective = 0.0;
        for (i, &d) in disable.iter().enumerate() {
            if d {
                objective += self.weights[i];
            }
        }
        if enable_cied {
            objective += self.gamma;
        }
        for (i, &f) in redirect.iter().enumerate() {
            if self.attacks[i] && f {
                objective += 1.0;
            }
        }

        PssaSolution {
            disable,
            enable_cied,
            redirect,
            objective,
        }
    }

    /// Brute-force reference: walks every assignment of `(D, E, F)` over the
    /// `2^(2n+1)` cube, discards infeasible points, and returns the one with
    /// the smallest objective.
    ///
    /// Intended for tests with small `n` (the cube doubles per variable);
    /// callers keep `n` at or below roughly 10.
    pub fn enumerate_oracle(&self) -> PssaSolution {
        let n = self.n();
        assert!(2 * n + 1 < 64, "enumeration cube exceeds u64 mask");
        let mut best: Option<PssaSolution> = None;

        // Bit layout: D occupies bits 0..n, E is bit n, F is bits n+1..2n+1.
        'mask: for mask in 0u64..1u64 << (2 * n + 1) {
            for i in 0..n {
                let d = mask >> i & 1 == 1;
                let required = self.attacks[i] && self.disableable[i];
                if d != required {
                    continue 'mask;
                }
            }
            let e = mask >> n & 1 == 1;
            if e != self.attacks.iter().any(|&a| a) {
                continue;
            }
            for i in 0..n {
                let f = mask >> (n + 1 + i) & 1 == 1;
                if f != self.attacks[i] {
                    continue 'mask;
                }
            }

            let mut objective = 0.0;
            for i in 0..n {
                if mask >> i & 1 == 1 {
                    objective += self.weights[i];
                }
            }
            if e {
                objective += self.gamma;
            }
            for i in 0..n {
                if self.attacks[i] && mask >> (n + 1 + i) & 1 == 1 {
                    objective += 1.0;
                }
            }

            if best.as_ref().is_none_or(|b| objective < b.objective) {
                best = Some(PssaSolution {
                    disable: (0..n).map(|i| mask >> i & 1 == 1).collect(),
                    enable_cied: e,
                    redirect: (0..n).map(|i| mask >> (n + 1 + i) & 1 == 1).collect(),
                    objective,
                });
            }
        }
        best.expect("constraint set always admits one assignment")
    }
}
