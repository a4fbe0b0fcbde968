//! CHSH observables with spectrum {+1, −1, 0}, CHSH evaluation, the
//! closed-form filtered Werner state and the dimension sweep of the
//! filtered violation.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::{condition, filter_projectors};
use crate::outcome::{Outcome, Setting};
use crate::quantum_core::{
    eig_hermitian, expectation, ComplexMatrix, DensityMatrix, Observable, STRUCTURAL_TOL,
};
use crate::werner::{singlet, werner_capped, DEFAULT_MAX_D};

/// Eigenvalue tolerance for the {+1, −1, 0} spectrum check.
pub const SPECTRUM_TOL: f64 = 1e-8;

/// Classical CHSH bound.
pub const CLASSICAL_BOUND: f64 = 2.0;

/// 2√2, the CHSH value of the canonical settings on |S₁₂⟩.
pub const TSIRELSON: f64 = 2.0 * SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Party {
    Alice,
    Bob,
}

/// A, A′ for particle 1 and B, B′ for particle 2, each with eigenvalues
/// +1 and −1 (simple, supported on span{|1⟩, |2⟩}) and 0 elsewhere.
#[derive(Debug, Clone)]
pub struct ChshSettings {
    d: usize,
    observables: [[Observable; 2]; 2],
    // [party][setting][outcome index], outcome order −1, 0, +1
    spectral: [[[ComplexMatrix; 3]; 2]; 2],
}

impl ChshSettings {
    pub fn new(
        a: Observable,
        a_prime: Observable,
        b: Observable,
        b_prime: Observable,
    ) -> Result<Self> {
        let d = a.dim();
        for o in [&a_prime, &b, &b_prime] {
            if o.dim() != d {
                return Err(Error::InvalidSettings {
                    reason: format!("observable dimensions differ ({} vs {d})", o.dim()),
                });
            }
        }
        let filter = local_filter(d);
        let observables = [[a, a_prime], [b, b_prime]];
        let mut spectral: Vec<[ComplexMatrix; 3]> = Vec::with_capacity(4);
        for (party, pair) in observables.iter().enumerate() {
            for (setting, obs) in pair.iter().enumerate() {
                let name = format!("{}{}", ["A", "B"][party], ["", "'"][setting]);
                spectral.push(spectral_split(obs, &filter, &name)?);
            }
        }
        let mut it = spectral.into_iter();
        let mut next = || it.next().unwrap();
        let spectral = [[next(), next()], [next(), next()]];
        Ok(Self {
            d,
            observables,
            spectral,
        })
    }

    pub fn local_dim(&self) -> usize {
        self.d
    }

    pub fn observable(&self, party: Party, setting: Setting) -> &Observable {
        &self.observables[party_index(party)][setting.index()]
    }

    pub fn a(&self) -> &Observable {
        self.observable(Party::Alice, Setting::Unprimed)
    }

    pub fn a_prime(&self) -> &Observable {
        self.observable(Party::Alice, Setting::Primed)
    }

    pub fn b(&self) -> &Observable {
        self.observable(Party::Bob, Setting::Unprimed)
    }

    pub fn b_prime(&self) -> &Observable {
        self.observable(Party::Bob, Setting::Primed)
    }

    /// Local spectral projector for `outcome` (zero matrix when the eigenvalue is absent).
    pub fn outcome_projector(
        &self,
        party: Party,
        setting: Setting,
        outcome: Outcome,
    ) -> &ComplexMatrix {
        &self.spectral[party_index(party)][setting.index()][outcome.index()]
    }

    /// Exchanges the particle roles: (A, A′) ↔ (B, B′).
    pub fn swapped(&self) -> Self {
        Self {
            d: self.d,
            observables: [self.observables[1].clone(), self.observables[0].clone()],
            spectral: [self.spectral[1].clone(), self.spectral[0].clone()],
        }
    }

    /// A⊗B + A⊗B′ + A′⊗B − A′⊗B′ on the joint space.
    pub fn chsh_operator(&self) -> Result<Observable> {
        let ab = self.a().kron(self.b())?.into_matrix();
        let abp = self.a().kron(self.b_prime())?.into_matrix();
        let apb = self.a_prime().kron(self.b())?.into_matrix();
        let apbp = self.a_prime().kron(self.b_prime())?.into_matrix();
        Observable::new(ab.add(&abp)?.add(&apb)?.sub(&apbp)?)
    }
}

fn party_index(p: Party) -> usize {
    match p {
        Party::Alice => 0,
        Party::Bob => 1,
    }
}

fn local_filter(d: usize) -> ComplexMatrix {
    let mut diag = vec![0.0; d];
    diag[0] = 1.0;
    if d > 1 {
        diag[1] = 1.0;
    }
    ComplexMatrix::from_diag(&diag)
}

/// Checks the {+1, −1, 0} spectrum and the ±1 support, returning the three
/// spectral projectors in outcome order −1, 0, +1.
fn spectral_split(
    obs: &Observable,
    filter: &ComplexMatrix,
    name: &str,
) -> Result<[ComplexMatrix; 3]> {
    let d = obs.dim();
    let eig = eig_hermitian(obs)?;
    let mut proj = [
        ComplexMatrix::zeros(d, d),
        ComplexMatrix::zeros(d, d),
        ComplexMatrix::zeros(d, d),
    ];
    let mut counts = [0usize; 3];
    for (&lambda, v) in eig.eigenvalues.iter().zip(&eig.eigenvectors) {
        let slot = [-1.0, 0.0, 1.0]
            .iter()
            .position(|&t| (lambda - t).abs() <= SPECTRUM_TOL)
            .ok_or_else(|| Error::InvalidSettings {
                reason: format!("{name} has eigenvalue {lambda} outside {{-1, 0, +1}}"),
            })?;
        counts[slot] += 1;
        proj[slot].add_outer_assign(v.amplitudes(), 1.0)?;
    }
    if counts[0] != 1 || counts[2] != 1 {
        return Err(Error::InvalidSettings {
            reason: format!(
                "{name} must have simple eigenvalues +1 and -1 (multiplicities {} and {})",
                counts[2], counts[0]
            ),
        });
    }
    let support = proj[0].add(&proj[2])?;
    let dev = support.max_abs_diff(filter)?;
    if dev > STRUCTURAL_TOL {
        return Err(Error::InvalidSettings {
            reason: format!(
                "{name} ±1 eigenvectors do not span span{{|1>, |2>}} (deviation {dev:e})"
            ),
        });
    }
    Ok(proj)
}

fn embed_block(d: usize, block: [f64; 4]) -> Result<Observable> {
    let mut m = ComplexMatrix::zeros(d, d);
    for (k, &x) in block.iter().enumerate() {
        m.set(k / 2, k % 2, x.into());
    }
    Observable::new(m)
}

/// A = σz, A′ = σx, B = −(σz+σx)/√2, B′ = (σx−σz)/√2 on span{|1⟩, |2⟩}, zero elsewhere.
pub fn canonical_settings(d: usize) -> Result<ChshSettings> {
    if d < 2 {
        return Err(Error::DimensionTooSmall { d, min: 2 });
    }
    let h = FRAC_1_SQRT_2;
    let a = embed_block(d, [1.0, 0.0, 0.0, -1.0])?;
    let a_prime = embed_block(d, [0.0, 1.0, 1.0, 0.0])?;
    let b = embed_block(d, [-h, -h, -h, h])?;
    let b_prime = embed_block(d, [-h, h, h, h])?;
    ChshSettings::new(a, a_prime, b, b_prime)
}

/// ⟨A⊗B + A⊗B′ + A′⊗B − A′⊗B′⟩ in `rho`.
pub fn chsh_value(rho: &DensityMatrix, settings: &ChshSettings) -> Result<f64> {
    expectation(rho, &settings.chsh_operator()?)
}

/// (2d/(2d+4))·[(1/(2d))·I_sub + |S₁₂⟩⟨S₁₂|], with I_sub the identity on
/// span{|1⟩,|2⟩}⊗span{|1⟩,|2⟩}.
pub fn conditional_state_closed_form(d: usize) -> Result<DensityMatrix> {
    if d < 2 {
        return Err(Error::DimensionTooSmall { d, min: 2 });
    }
    let df = d as f64;
    let n = d * d;
    let prefactor = 2.0 * df / (2.0 * df + 4.0);
    let mut m = ComplexMatrix::zeros(n, n);
    for i in 0..2 {
        for j in 0..2 {
            let k = i * d + j;
            m.set(k, k, (prefactor / (2.0 * df)).into());
        }
    }
    m.add_outer_assign(singlet(d, 1, 2)?.amplitudes(), prefactor)?;
    DensityMatrix::check_cheap(m)
}

/// (2d/(2d+4))·2√2, which exceeds 2 exactly when d ≥ 5.
pub fn violation_value(d: usize) -> f64 {
    let df = d as f64;
    2.0 * df / (2.0 * df + 4.0) * TSIRELSON
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub d: usize,
    pub closed_form: f64,
    pub numeric: f64,
    pub violates: bool,
}

/// CHSH of the filtered Werner state for each d in `d_min..=d_max`, from the
/// closed form and from numerical conditioning of W on P⊗Q.
pub fn violation_sweep(d_min: usize, d_max: usize) -> Result<Vec<SweepRow>> {
    violation_sweep_capped(d_min, d_max, DEFAULT_MAX_D)
}

pub fn violation_sweep_capped(d_min: usize, d_max: usize, cap: usize) -> Result<Vec<SweepRow>> {
    if d_min < 2 || d_min > d_max {
        return Err(Error::InvalidRange { d_min, d_max });
    }
    if d_max > cap {
        return Err(Error::DimensionTooLarge { d: d_max, cap });
    }
    (d_min..=d_max)
        .into_par_iter()
        .map(|d| {
            let closed_form = violation_value(d);
            let w = werner_capped(d, cap)?;
            let filter = filter_projectors(d)?;
            let (_, conditioned) = condition(w.rho(), &filter.product()?)?;
            let numeric = chsh_value(&conditioned, &canonical_settings(d)?)?;
            Ok(SweepRow {
                d,
                closed_form,
                numeric,
                violates: closed_form > CLASSICAL_BOUND,
            })
        })
        .collect()
}
