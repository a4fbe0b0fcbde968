//! Ideal projective measurements: Born-rule probabilities, projection of the
//! state onto the observed eigenspace, the two-stage filter-then-CHSH
//! protocol and its seeded Monte-Carlo sampling.
//!
//! The protocol first measures P = |1⟩⟨1| + |2⟩⟨2| on particle 1 and the
//! analogous Q on particle 2, splitting the ensemble into four branches
//! labelled by the (P, Q) results. Only afterwards does each side pick one of
//! its two CHSH observables and measure it on the branch state.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chsh::{ChshSettings, Party};
use crate::error::{Error, Result};
use crate::outcome::{chsh_sign, setting_pairs, Outcome, Setting};
use crate::quantum_core::{ComplexMatrix, DensityMatrix, Observable, STRUCTURAL_TOL};
use crate::werner::{werner, MIN_D};

/// Branches with probability below this carry no post-measurement state.
pub const PRUNE_THRESHOLD: f64 = 1e-12;

/// The local rank-2 filters P (particle 1) and Q (particle 2).
#[derive(Debug, Clone)]
pub struct FilterProjectors {
    pub p: Observable,
    pub q: Observable,
}

impl FilterProjectors {
    pub fn local_dim(&self) -> usize {
        self.p.dim()
    }

    /// P ⊗ I on the joint space.
    pub fn p_joint(&self) -> Result<Observable> {
        self.p.kron(&Observable::identity(self.local_dim()))
    }

    /// I ⊗ Q on the joint space.
    pub fn q_joint(&self) -> Result<Observable> {
        Observable::identity(self.local_dim()).kron(&self.q)
    }

    /// P ⊗ Q, the projector selecting the (1, 1) branch.
    pub fn product(&self) -> Result<Observable> {
        self.p.kron(&self.q)
    }

    /// Joint projector for first-stage results (p, q) ∈ {0, 1}².
    pub fn branch_projector(&self, p: u8, q: u8) -> Result<Observable> {
        let pick = |proj: &Observable, bit: u8| {
            if bit == 1 {
                proj.clone()
            } else {
                proj.complement()
            }
        };
        pick(&self.p, p).kron(&pick(&self.q, q))
    }
}

pub fn filter_projectors(d: usize) -> Result<FilterProjectors> {
    if d < MIN_D {
        return Err(Error::DimensionTooSmall { d, min: MIN_D });
    }
    let mut diag = vec![0.0; d];
    diag[0] = 1.0;
    diag[1] = 1.0;
    let p = Observable::new(ComplexMatrix::from_diag(&diag))?;
    Ok(FilterProjectors { q: p.clone(), p })
}

/// Complete family of mutually orthogonal labelled projectors.
#[derive(Debug, Clone)]
pub struct ProjectiveMeasurement {
    dim: usize,
    projectors: Vec<(String, Observable)>,
}

impl ProjectiveMeasurement {
    pub fn new(projectors: Vec<(String, Observable)>) -> Result<Self> {
        let invalid = |reason: String| Error::InvalidMeasurement { reason };
        let dim = projectors
            .first()
            .ok_or_else(|| invalid("no projectors".into()))?
            .1
            .dim();
        let mut total = ComplexMatrix::zeros(dim, dim);
        for (k, (label, proj)) in projectors.iter().enumerate() {
            if proj.dim() != dim {
                return Err(invalid(format!(
                    "projector {label} has dimension {}",
                    proj.dim()
                )));
            }
            let dev = proj.idempotency_deviation();
            if dev > STRUCTURAL_TOL {
                return Err(invalid(format!(
                    "projector {label} is not idempotent ({dev:e})"
                )));
            }
            for (other_label, other) in &projectors[k + 1..] {
                let overlap = proj.matrix().matmul(other.matrix())?;
                let dev = overlap
                    .entries()
                    .iter()
                    .map(|z| z.norm())
                    .fold(0.0, f64::max);
                if dev > STRUCTURAL_TOL {
                    return Err(invalid(format!(
                        "projectors {label} and {other_label} are not orthogonal ({dev:e})"
                    )));
                }
            }
            total = total.add(proj.matrix())?;
        }
        let dev = total.max_abs_diff(&ComplexMatrix::identity(dim))?;
        if dev > STRUCTURAL_TOL {
            return Err(invalid(format!(
                "projectors do not sum to identity ({dev:e})"
            )));
        }
        Ok(Self { dim, projectors })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn projectors(&self) -> &[(String, Observable)] {
        &self.projectors
    }
}

/// First-stage measurement with branches labelled "00", "01", "10", "11" (p then q).
pub fn filter_measurement(d: usize) -> Result<ProjectiveMeasurement> {
    let f = filter_projectors(d)?;
    let mut projectors = Vec::with_capacity(4);
    for (p, q) in FIRST_STAGE_ORDER {
        projectors.push((format!("{p}{q}"), f.branch_projector(p, q)?));
    }
    ProjectiveMeasurement::new(projectors)
}

/// Branch order shared by exact statistics, sampling and reports.
pub const FIRST_STAGE_ORDER: [(u8, u8); 4] = [(0, 0), (0, 1), (1, 0), (1, 1)];

#[derive(Debug, Clone)]
pub struct OutcomeBranch {
    pub label: String,
    pub probability: f64,
    /// Absent when the probability is below [`PRUNE_THRESHOLD`].
    pub post_state: Option<DensityMatrix>,
}

fn born_probability(rho: &DensityMatrix, projector: &Observable) -> Result<f64> {
    let z = projector.matrix().trace_of_product(rho.matrix())?;
    if z.im.abs() > STRUCTURAL_TOL {
        return Err(Error::ComplexExpectation { imag: z.im });
    }
    Ok(z.re.max(0.0))
}

fn project(rho: &DensityMatrix, projector: &Observable, probability: f64) -> Result<DensityMatrix> {
    let pi = projector.matrix();
    let m = pi
        .matmul(rho.matrix())?
        .matmul(pi)?
        .scale_real(1.0 / probability);
    // A projection of a positive operator stays positive.
    DensityMatrix::check_cheap(m)
}

pub fn measure(rho: &DensityMatrix, m: &ProjectiveMeasurement) -> Result<Vec<OutcomeBranch>> {
    if rho.dim() != m.dim() {
        return Err(Error::DimensionMismatch {
            op: "measure",
            left: rho.matrix().shape(),
            right: (m.dim(), m.dim()),
        });
    }
    let mut branches = Vec::with_capacity(m.projectors().len());
    for (label, proj) in m.projectors() {
        let probability = born_probability(rho, proj)?;
        let post_state = if probability >= PRUNE_THRESHOLD {
            Some(project(rho, proj, probability)?)
        } else {
            None
        };
        branches.push(OutcomeBranch {
            label: label.clone(),
            probability,
            post_state,
        });
    }
    if branches.iter().all(|b| b.post_state.is_none()) {
        return Err(Error::AllBranchesPruned);
    }
    let total: f64 = branches.iter().map(|b| b.probability).sum();
    if (total - 1.0).abs() > STRUCTURAL_TOL {
        return Err(Error::InvalidMeasurement {
            reason: format!("branch probabilities sum to {total}"),
        });
    }
    Ok(branches)
}

/// Probability of the projector's event and the normalized projected state.
pub fn condition(rho: &DensityMatrix, projector: &Observable) -> Result<(f64, DensityMatrix)> {
    if rho.dim() != projector.dim() {
        return Err(Error::DimensionMismatch {
            op: "condition",
            left: rho.matrix().shape(),
            right: projector.matrix().shape(),
        });
    }
    let dev = projector.idempotency_deviation();
    if dev > STRUCTURAL_TOL {
        return Err(Error::InvalidMeasurement {
            reason: format!("conditioning operator is not idempotent ({dev:e})"),
        });
    }
    let probability = born_probability(rho, projector)?;
    if probability < PRUNE_THRESHOLD {
        return Err(Error::NullEvent { probability });
    }
    Ok((probability, project(rho, projector, probability)?))
}

/// Joint distribution of (a_result, b_result), indexed by [`Outcome::index`].
pub type JointDistribution = [[f64; 3]; 3];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BranchStatistics {
    pub p_outcome: u8,
    pub q_outcome: u8,
    pub probability: f64,
    /// `[a_setting][b_setting]`; absent for pruned branches.
    pub joint: Option<[[JointDistribution; 2]; 2]>,
}

impl BranchStatistics {
    pub fn distribution(&self, a: Setting, b: Setting) -> Option<&JointDistribution> {
        self.joint.as_ref().map(|j| &j[a.index()][b.index()])
    }

    pub fn correlator(&self, a: Setting, b: Setting) -> Option<f64> {
        self.distribution(a, b).map(|dist| {
            let mut e = 0.0;
            for oa in Outcome::ALL {
                for ob in Outcome::ALL {
                    e += (oa.value() * ob.value()) as f64 * dist[oa.index()][ob.index()];
                }
            }
            e
        })
    }

    pub fn chsh(&self) -> Option<f64> {
        setting_pairs()
            .iter()
            .map(|&(a, b)| self.correlator(a, b).map(|e| chsh_sign(a, b) * e))
            .sum()
    }

    /// Probability of `outcome` on particle 1 under setting `a` (averaged over
    /// Bob's result for Bob's unprimed setting; the marginal does not depend on it).
    pub fn alice_marginal(&self, a: Setting, outcome: Outcome) -> Option<f64> {
        self.distribution(a, Setting::Unprimed)
            .map(|dist| dist[outcome.index()].iter().sum())
    }

    pub fn bob_marginal(&self, b: Setting, outcome: Outcome) -> Option<f64> {
        self.distribution(Setting::Unprimed, b)
            .map(|dist| dist.iter().map(|row| row[outcome.index()]).sum())
    }
}

/// Exact protocol statistics for the four first-stage branches, in
/// [`FIRST_STAGE_ORDER`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProtocolStatistics {
    pub d: usize,
    pub branches: Vec<BranchStatistics>,
}

impl ProtocolStatistics {
    pub fn branch(&self, p: u8, q: u8) -> &BranchStatistics {
        self.branches
            .iter()
            .find(|b| b.p_outcome == p && b.q_outcome == q)
            .expect("all four branches present")
    }

    /// Σ over branches of probability × conditional correlator.
    pub fn total_correlator(&self, a: Setting, b: Setting) -> f64 {
        self.branches
            .iter()
            .filter_map(|br| br.correlator(a, b).map(|e| br.probability * e))
            .sum()
    }
}

/// Exact statistics of the two-stage protocol on the Werner state of dimension `d`.
pub fn run_protocol_exact(d: usize, settings: &ChshSettings) -> Result<ProtocolStatistics> {
    let w = werner(d)?;
    protocol_statistics(w.rho(), &filter_projectors(d)?, settings)
}

/// Exact statistics of the two-stage protocol on an arbitrary bipartite state.
pub fn protocol_statistics(
    rho: &DensityMatrix,
    filter: &FilterProjectors,
    settings: &ChshSettings,
) -> Result<ProtocolStatistics> {
    let d = filter.local_dim();
    if settings.local_dim() != d {
        return Err(Error::InvalidSettings {
            reason: format!(
                "settings act on dimension {}, filter on {d}",
                settings.local_dim()
            ),
        });
    }
    let first_stage = filter_measurement(d)?;
    let branches = measure(rho, &first_stage)?;

    // Joint second-stage projectors E_a(x) ⊗ E_b(y), shared across branches.
    let mut joint_projectors = Vec::with_capacity(36);
    for (a, b) in setting_pairs() {
        for oa in Outcome::ALL {
            for ob in Outcome::ALL {
                let ea = settings.outcome_projector(Party::Alice, a, oa);
                let eb = settings.outcome_projector(Party::Bob, b, ob);
                joint_projectors.push(((a, b, oa, ob), ea.kron(eb)?));
            }
        }
    }

    let mut out = Vec::with_capacity(4);
    for (&(p, q), branch) in FIRST_STAGE_ORDER.iter().zip(&branches) {
        let joint = match &branch.post_state {
            None => None,
            Some(state) => {
                let mut joint = [[[[0.0; 3]; 3]; 2]; 2];
                for ((a, b, oa, ob), proj) in &joint_projectors {
                    let z = proj.trace_of_product(state.matrix())?;
                    joint[a.index()][b.index()][oa.index()][ob.index()] = z.re.max(0.0);
                }
                Some(joint)
            }
        };
        out.push(BranchStatistics {
            p_outcome: p,
            q_outcome: q,
            probability: branch.probability,
            joint,
        });
    }
    Ok(ProtocolStatistics { d, branches: out })
}

/// One trial of the sampled protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtocolRecord {
    #[serde(rename = "p")]
    pub p_outcome: u8,
    #[serde(rename = "q")]
    pub q_outcome: u8,
    pub a_setting: Setting,
    pub b_setting: Setting,
    pub a_result: Outcome,
    pub b_result: Outcome,
}

/// Inverse-CDF draw over `probs` in index order, skipping zero-mass entries.
fn inverse_cdf(probs: &[f64], u: f64) -> usize {
    let total: f64 = probs.iter().sum();
    let target = u * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = i;
        if target < acc {
            return i;
        }
    }
    last
}

/// Samples `trials` records from exact statistics. Trial `t` draws from the
/// ChaCha8 stream `t` of a generator keyed by `seed`, so the output does not
/// depend on how trials are scheduled across threads.
pub fn sample_records(
    stats: &ProtocolStatistics,
    seed: u64,
    trials: usize,
) -> Result<Vec<ProtocolRecord>> {
    if trials == 0 {
        return Err(Error::NoTrials);
    }
    let branch_probs: Vec<f64> = stats
        .branches
        .iter()
        .map(|b| {
            if b.joint.is_some() {
                b.probability
            } else {
                0.0
            }
        })
        .collect();
    // Flattened 9-outcome tables per (branch, a_setting, b_setting).
    let tables: Vec<Option<[[[f64; 9]; 2]; 2]>> = stats
        .branches
        .iter()
        .map(|b| {
            b.joint.map(|j| {
                let mut t = [[[0.0; 9]; 2]; 2];
                for x in 0..2 {
                    for y in 0..2 {
                        for ia in 0..3 {
                            for ib in 0..3 {
                                t[x][y][ia * 3 + ib] = j[x][y][ia][ib];
                            }
                        }
                    }
                }
                t
            })
        })
        .collect();
    let base = ChaCha8Rng::seed_from_u64(seed);

    let records = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = base.clone();
            rng.set_stream(t);
            let k = inverse_cdf(&branch_probs, rng.random::<f64>());
            let a_setting = if rng.random_bool(0.5) {
                Setting::Primed
            } else {
                Setting::Unprimed
            };
            let b_setting = if rng.random_bool(0.5) {
                Setting::Primed
            } else {
                Setting::Unprimed
            };
            let table = tables[k]
                .as_ref()
                .expect("sampled branch has positive probability");
            let cell = inverse_cdf(
                &table[a_setting.index()][b_setting.index()],
                rng.random::<f64>(),
            );
            let (p_outcome, q_outcome) = FIRST_STAGE_ORDER[k];
            ProtocolRecord {
                p_outcome,
                q_outcome,
                a_setting,
                b_setting,
                a_result: Outcome::ALL[cell / 3],
                b_result: Outcome::ALL[cell % 3],
            }
        })
        .collect();
    Ok(records)
}

/// Seeded Monte-Carlo run of the two-stage protocol on the Werner state.
pub fn sample_protocol(
    seed: u64,
    d: usize,
    settings: &ChshSettings,
    trials: usize,
) -> Result<Vec<ProtocolRecord>> {
    if trials == 0 {
        return Err(Error::NoTrials);
    }
    let stats = run_protocol_exact(d, settings)?;
    sample_records(&stats, seed, trials)
}

/// Empirical CHSH estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalChsh {
    pub value: f64,
    pub std_error: f64,
    /// Trials per setting pair, in the order of [`setting_pairs`].
    pub counts: [u64; 4],
}

#[derive(Debug, Clone, Default)]
struct PairTally {
    n: u64,
    sum: f64,
    sum_sq: f64,
}

/// Counts aggregated from sampled records.
#[derive(Debug, Clone)]
pub struct EmpiricalStatistics {
    total: u64,
    branch_counts: [u64; 4],
    // [branch][a_setting][b_setting]
    pairs: Vec<[[PairTally; 2]; 2]>,
}

fn branch_slot(p: u8, q: u8) -> usize {
    (p as usize) * 2 + q as usize
}

impl EmpiricalStatistics {
    pub fn from_records(records: &[ProtocolRecord]) -> Self {
        let mut stats = Self {
            total: 0,
            branch_counts: [0; 4],
            pairs: vec![Default::default(); 4],
        };
        for r in records {
            let k = branch_slot(r.p_outcome, r.q_outcome);
            stats.total += 1;
            stats.branch_counts[k] += 1;
            let prod = (r.a_result.value() * r.b_result.value()) as f64;
            let tally = &mut stats.pairs[k][r.a_setting.index()][r.b_setting.index()];
            tally.n += 1;
            tally.sum += prod;
            tally.sum_sq += prod * prod;
        }
        stats
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn branch_count(&self, p: u8, q: u8) -> u64 {
        self.branch_counts[branch_slot(p, q)]
    }

    pub fn branch_frequency(&self, p: u8, q: u8) -> f64 {
        self.branch_count(p, q) as f64 / self.total.max(1) as f64
    }

    /// CHSH on branch (p, q); `None` if any setting pair has fewer than two trials.
    pub fn chsh(&self, p: u8, q: u8) -> Option<EmpiricalChsh> {
        let k = branch_slot(p, q);
        let mut value = 0.0;
        let mut var = 0.0;
        let mut counts = [0u64; 4];
        for (slot, (a, b)) in setting_pairs().into_iter().enumerate() {
            let t = &self.pairs[k][a.index()][b.index()];
            if t.n < 2 {
                return None;
            }
            let n = t.n as f64;
            let mean = t.sum / n;
            let sample_var = (t.sum_sq / n - mean * mean) * n / (n - 1.0);
            value += chsh_sign(a, b) * mean;
            var += sample_var / n;
            counts[slot] = t.n;
        }
        Some(EmpiricalChsh {
            value,
            std_error: var.sqrt(),
            counts,
        })
    }
}
