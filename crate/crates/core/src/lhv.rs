//! Finite local-hidden-variable models.
//!
//! A model is a weighted mixture of hidden states λ. In each λ both sides
//! answer deterministically: a table from the local setting (0 or 1) to an
//! outcome in {−1, 0, +1}. Three evaluators are provided:
//!
//! * [`chsh_of_model`]: the standard CHSH combination for dichotomic models.
//! * [`full_ensemble_chsh`]: zero outcomes contribute 0 to every correlator.
//! * [`postselected_chsh`]: correlators computed only on the pairs where both
//!   sides answered ±1, a selection that depends on the settings tested.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::outcome::{chsh_sign, setting_pairs, Outcome, Setting};

/// Tolerance on the total weight of a model.
pub const WEIGHT_TOL: f64 = 1e-12;

/// Minimum selected weight for a post-selected correlator to be defined.
pub const SELECTION_FLOOR: f64 = 1e-12;

/// Deterministic response table of one side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LocalStrategy {
    pub responses: [Outcome; 2],
}

impl LocalStrategy {
    pub const fn new(unprimed: Outcome, primed: Outcome) -> Self {
        Self {
            responses: [unprimed, primed],
        }
    }

    pub fn respond(&self, setting: Setting) -> Outcome {
        self.responses[setting.index()]
    }

    pub fn is_dichotomic(&self) -> bool {
        self.responses.iter().all(|o| !o.is_zero())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub weight: f64,
    pub alice: LocalStrategy,
    pub bob: LocalStrategy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LhvModel {
    components: Vec<Component>,
}

impl LhvModel {
    /// Weights must be positive and sum to 1 within 1e-12.
    pub fn new(components: Vec<Component>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidModel {
                reason: "model has no components".into(),
            });
        }
        if let Some(c) = components
            .iter()
            .find(|c| !c.weight.is_finite() || c.weight <= 0.0)
        {
            return Err(Error::InvalidModel {
                reason: format!(
                    "component weight {} is not a positive finite number",
                    c.weight
                ),
            });
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidModel {
                reason: format!("weights sum to {total}"),
            });
        }
        Ok(Self { components })
    }

    /// Uniform mixture of the given strategy pairs.
    pub fn uniform(pairs: &[(LocalStrategy, LocalStrategy)]) -> Result<Self> {
        let w = 1.0 / pairs.len().max(1) as f64;
        Self::new(
            pairs
                .iter()
                .map(|&(alice, bob)| Component {
                    weight: w,
                    alice,
                    bob,
                })
                .collect(),
        )
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn is_dichotomic(&self) -> bool {
        self.components
            .iter()
            .all(|c| c.alice.is_dichotomic() && c.bob.is_dichotomic())
    }

    /// Splits component `k` into two halves of equal weight; the mixture is unchanged.
    pub fn refine(&self, k: usize) -> Self {
        let mut components = self.components.clone();
        let mut half = components[k];
        half.weight /= 2.0;
        components[k] = half;
        components.insert(k + 1, half);
        Self { components }
    }
}

fn product(c: &Component, a: Setting, b: Setting) -> f64 {
    (c.alice.respond(a).value() * c.bob.respond(b).value()) as f64
}

/// Σ_λ w_λ·[a₀b₀ + a₀b₁ + a₁b₀ − a₁b₁] for models without zero outcomes.
pub fn chsh_of_model(m: &LhvModel) -> Result<f64> {
    if !m.is_dichotomic() {
        return Err(Error::ZeroOutcome);
    }
    Ok(full_ensemble_chsh(m))
}

/// E(a, b) over the whole ensemble, with zero outcomes contributing 0.
pub fn full_ensemble_correlator(m: &LhvModel, a: Setting, b: Setting) -> f64 {
    m.components
        .iter()
        .map(|c| c.weight * product(c, a, b))
        .sum()
}

pub fn full_ensemble_chsh(m: &LhvModel) -> f64 {
    setting_pairs()
        .iter()
        .map(|&(a, b)| chsh_sign(a, b) * full_ensemble_correlator(m, a, b))
        .sum()
}

/// Weight of the pairs where both sides answer ±1 under settings (a, b).
pub fn selected_weight(m: &LhvModel, a: Setting, b: Setting) -> f64 {
    m.components
        .iter()
        .filter(|c| !c.alice.respond(a).is_zero() && !c.bob.respond(b).is_zero())
        .map(|c| c.weight)
        .sum()
}

/// E(a, b) restricted to the subensemble where both sides answered ±1.
pub fn conditional_correlator(m: &LhvModel, a: Setting, b: Setting) -> Result<f64> {
    let selected = selected_weight(m, a, b);
    if selected <= SELECTION_FLOOR {
        return Err(Error::EmptySelection {
            alice: a.index(),
            bob: b.index(),
        });
    }
    let vacuous = m
        .components
        .iter()
        .all(|c| !c.alice.respond(a).is_zero() && !c.bob.respond(b).is_zero());
    let full = full_ensemble_correlator(m, a, b);
    // Nothing was discarded: the selected weight is 1 up to rounding.
    Ok(if vacuous { full } else { full / selected })
}

/// CHSH assembled from the post-selected correlators.
pub fn postselected_chsh(m: &LhvModel) -> Result<f64> {
    setting_pairs()
        .iter()
        .map(|&(a, b)| conditional_correlator(m, a, b).map(|e| chsh_sign(a, b) * e))
        .sum()
}

/// All four deterministic ±1 response tables of one side, in lexicographic order.
pub fn dichotomic_strategies() -> Vec<LocalStrategy> {
    let signs = [Outcome::Minus, Outcome::Plus];
    signs
        .iter()
        .flat_map(|&u| signs.iter().map(move |&p| LocalStrategy::new(u, p)))
        .collect()
}

/// Result of exhaustively scoring every deterministic dichotomic strategy pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeterministicEnumeration {
    pub pairs: usize,
    pub max: f64,
    pub min: f64,
    pub maximizers: usize,
    /// Lexicographically first pair attaining the maximum.
    pub argmax: (LocalStrategy, LocalStrategy),
}

pub fn enumerate_deterministic() -> DeterministicEnumeration {
    let strategies = dichotomic_strategies();
    let scored: Vec<((LocalStrategy, LocalStrategy), f64)> = strategies
        .iter()
        .flat_map(|&alice| {
            strategies.iter().map(move |&bob| {
                let c = Component {
                    weight: 1.0,
                    alice,
                    bob,
                };
                let value: f64 = setting_pairs()
                    .iter()
                    .map(|&(a, b)| chsh_sign(a, b) * product(&c, a, b))
                    .sum();
                ((alice, bob), value)
            })
        })
        .collect();
    let max = scored.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    let min = scored.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    let argmax = scored
        .iter()
        .find(|s| s.1 == max)
        .expect("non-empty enumeration")
        .0;
    DeterministicEnumeration {
        pairs: scored.len(),
        max,
        min,
        maximizers: scored.iter().filter(|s| s.1 == max).count(),
        argmax,
    }
}

/// Largest CHSH value of any deterministic dichotomic strategy pair (2).
pub fn max_deterministic_chsh() -> f64 {
    enumerate_deterministic().max
}

/// Four equal-weight hidden states; state k answers ±1 only under the k-th
/// setting pair, with signs (+, +, +, −) so each selected correlator carries
/// its CHSH sign.
pub fn loophole_demo_model() -> LhvModel {
    let answer = |active: Setting, o: Outcome| {
        let mut r = [Outcome::Zero; 2];
        r[active.index()] = o;
        LocalStrategy { responses: r }
    };
    let components = setting_pairs()
        .into_iter()
        .map(|(a, b)| {
            let bob_sign = if chsh_sign(a, b) > 0.0 {
                Outcome::Plus
            } else {
                Outcome::Minus
            };
            Component {
                weight: 0.25,
                alice: answer(a, Outcome::Plus),
                bob: answer(b, bob_sign),
            }
        })
        .collect();
    LhvModel::new(components).expect("weights sum to one")
}

/// Per-setting-pair view of a model, in the order of [`setting_pairs`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostselectionReport {
    pub model: LhvModel,
    pub selected_weights: [f64; 4],
    pub conditional_correlators: [f64; 4],
    pub full_correlators: [f64; 4],
    pub postselected_chsh: f64,
    pub full_ensemble_chsh: f64,
}

pub fn postselection_report(m: &LhvModel) -> Result<PostselectionReport> {
    let pairs = setting_pairs();
    let mut selected_weights = [0.0; 4];
    let mut conditional_correlators = [0.0; 4];
    let mut full_correlators = [0.0; 4];
    for (k, &(a, b)) in pairs.iter().enumerate() {
        selected_weights[k] = selected_weight(m, a, b);
        conditional_correlators[k] = conditional_correlator(m, a, b)?;
        full_correlators[k] = full_ensemble_correlator(m, a, b);
    }
    Ok(PostselectionReport {
        model: m.clone(),
        selected_weights,
        conditional_correlators,
        full_correlators,
        postselected_chsh: postselected_chsh(m)?,
        full_ensemble_chsh: full_ensemble_chsh(m),
    })
}

/// Particle-1 response statistics of one hidden state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaMarginals {
    pub weight: f64,
    /// P(outcome 0 | λ) under A and A′.
    pub zero_prob: [f64; 2],
    /// P(outcome ±1 | λ) under A and A′.
    pub pm_mass: [f64; 2],
    pub zero_gap: f64,
    pub pm_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalReport {
    /// Ensemble-averaged P(outcome 0) under A and A′.
    pub averaged_zero_prob: [f64; 2],
    /// Ensemble-averaged P(outcome ±1) under A and A′.
    pub averaged_pm_mass: [f64; 2],
    pub per_lambda: Vec<LambdaMarginals>,
    /// The averaged probabilities agree across A and A′ (within 1e-12).
    pub averaged_equal: bool,
    /// Some λ answers differently under A and A′.
    pub pointwise_differs: bool,
}

pub fn marginal_report(m: &LhvModel) -> MarginalReport {
    let per_lambda: Vec<LambdaMarginals> = m
        .components()
        .iter()
        .map(|c| {
            let zero = Setting::ALL.map(|s| {
                if c.alice.respond(s).is_zero() {
                    1.0
                } else {
                    0.0
                }
            });
            let pm = zero.map(|z| 1.0 - z);
            LambdaMarginals {
                weight: c.weight,
                zero_prob: zero,
                pm_mass: pm,
                zero_gap: (zero[0] - zero[1]).abs(),
                pm_gap: (pm[0] - pm[1]).abs(),
            }
        })
        .collect();
    let avg = |f: &dyn Fn(&LambdaMarginals) -> f64| {
        per_lambda.iter().map(|l| l.weight * f(l)).sum::<f64>()
    };
    let averaged_zero_prob = [avg(&|l| l.zero_prob[0]), avg(&|l| l.zero_prob[1])];
    let averaged_pm_mass = [avg(&|l| l.pm_mass[0]), avg(&|l| l.pm_mass[1])];
    MarginalReport {
        averaged_equal: (averaged_zero_prob[0] - averaged_zero_prob[1]).abs() <= WEIGHT_TOL
            && (averaged_pm_mass[0] - averaged_pm_mass[1]).abs() <= WEIGHT_TOL,
        pointwise_differs: per_lambda.iter().any(|l| l.zero_gap > 0.0),
        averaged_zero_prob,
        averaged_pm_mass,
        per_lambda,
    }
}

/// Two equal-weight hidden states: λ₁ answers 0 under A and +1 under A′,
/// λ₂ the reverse. Averaged over λ, outcome 0 is equally likely under A and
/// A′, yet for each λ the two probabilities differ by 1.
pub fn marginal_consistency_demo() -> (LhvModel, MarginalReport) {
    let bob = LocalStrategy::new(Outcome::Plus, Outcome::Plus);
    let model = LhvModel::new(vec![
        Component {
            weight: 0.5,
            alice: LocalStrategy::new(Outcome::Zero, Outcome::Plus),
            bob,
        },
        Component {
            weight: 0.5,
            alice: LocalStrategy::new(Outcome::Plus, Outcome::Zero),
            bob,
        },
    ])
    .expect("weights sum to one");
    let report = marginal_report(&model);
    (model, report)
}
