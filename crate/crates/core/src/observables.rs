//! Scalar diagnostics of the central spin: occupation probability, coherence
//! and its normalized decoherence ratio, Bloch vector, long-time fluctuation,
//! von Neumann entropy, mutual information, and the Gibbs reference state a
//! memoryless bath would produce.

use ndarray::prelude::*;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::evolution::{TimeGrid, TrajectoryResult};
use crate::linalg::{entropy_bits, hermitian_eigvals};
use crate::model::CentralState;
use crate::symmetry::Beta;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObservableKind {
    Probability,
    Coherence,
    CoherenceRatio,
    MutualEntropy,
    SigmaX,
    SigmaY,
    SigmaZ,
}

/// A time series of one observable on a uniform grid.
#[derive(Debug, Clone)]
pub struct ObservableSeries<T> {
    pub grid: TimeGrid,
    pub values: Vec<T>,
    pub kind: ObservableKind,
}

impl<T> ObservableSeries<T> {
    pub fn new(grid: TimeGrid, values: Vec<T>, kind: ObservableKind) -> Result<Self> {
        if values.len() != grid.n_steps {
            return Err(Error::InvalidInput(format!(
                "series length {} does not match grid length {}",
                values.len(),
                grid.n_steps
            )));
        }
        Ok(Self { grid, values, kind })
    }
}

impl ObservableSeries<Complex64> {
    pub fn magnitudes(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.norm()).collect()
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.re).collect()
    }
}

/// `<up| rho^S |up>`; the imaginary residue of the diagonal stays below
/// 1e-13 for states produced by the evolution.
pub fn probability_up(rho_s: &CentralState) -> f64 {
    rho_s.rho[[0, 0]].re
}

/// `<down| rho^S |up>`.
pub fn coherence(rho_s: &CentralState) -> Complex64 {
    rho_s.rho[[1, 0]]
}

/// Bloch components `(x, y, z) = (<sigma_x>, <sigma_y>, <sigma_z>)`.
pub fn bloch_vector(rho_s: &CentralState) -> (f64, f64, f64) {
    let up_dn = rho_s.rho[[0, 1]];
    (
        2.0 * up_dn.re,
        -2.0 * up_dn.im,
        rho_s.rho[[0, 0]].re - rho_s.rho[[1, 1]].re,
    )
}

/// Probability series `P(t)` of a trajectory.
pub fn probability_series(traj: &TrajectoryResult) -> ObservableSeries<f64> {
    ObservableSeries {
        grid: traj.grid,
        values: traj.central_states.iter().map(probability_up).collect(),
        kind: ObservableKind::Probability,
    }
}

/// Coherence series `C(t)` of a trajectory.
pub fn coherence_series(traj: &TrajectoryResult) -> ObservableSeries<Complex64> {
    ObservableSeries {
        grid: traj.grid,
        values: traj.central_states.iter().map(coherence).collect(),
        kind: ObservableKind::Coherence,
    }
}

/// Decoherence ratio `L(t) = C(t) / C(0)`; exact 1 at `t = 0`.
pub fn coherence_ratio(
    series: &ObservableSeries<Complex64>,
) -> Result<ObservableSeries<Complex64>> {
    let c0 = *series
        .values
        .first()
        .ok_or_else(|| Error::InvalidInput("empty coherence series".into()))?;
    if c0.norm() < 1e-300 {
        return Err(Error::UndefinedRatio);
    }
    Ok(ObservableSeries {
        grid: series.grid,
        values: series.values.iter().map(|c| c / c0).collect(),
        kind: ObservableKind::CoherenceRatio,
    })
}

/// Mean of the series over grid times strictly greater than `t_min`.
pub fn window_mean(series: &ObservableSeries<f64>, t_min: f64) -> Result<f64> {
    let vals: Vec<f64> = series
        .grid
        .times()
        .zip(series.values.iter())
        .filter(|(t, _)| *t > t_min)
        .map(|(_, v)| *v)
        .collect();
    if vals.is_empty() {
        return Err(Error::InvalidWindow(format!(
            "no grid points beyond t_min = {t_min} (t_max = {})",
            series.grid.t_max()
        )));
    }
    Ok(vals.iter().sum::<f64>() / vals.len() as f64)
}

/// Fluctuation `Delta P = mean over t > t_min of (P(t) - mean P)^2`.
pub fn fluctuation(series: &ObservableSeries<f64>, t_min: f64) -> Result<f64> {
    let vals: Vec<f64> = series
        .grid
        .times()
        .zip(series.values.iter())
        .filter(|(t, _)| *t > t_min)
        .map(|(_, v)| *v)
        .collect();
    if vals.is_empty() {
        return Err(Error::InvalidWindow(format!(
            "no grid points beyond t_min = {t_min} (t_max = {})",
            series.grid.t_max()
        )));
    }
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    Ok(vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / vals.len() as f64)
}

/// Von Neumann entropy in bits of an arbitrary-dimension density matrix.
pub fn von_neumann_entropy(rho: &ArrayView2<Complex64>) -> Result<f64> {
    let n = rho.nrows();
    if n != rho.ncols() {
        return Err(Error::InvalidState("density matrix must be square".into()));
    }
    let mut herm: f64 = 0.0;
    let mut tr = Complex64::new(0.0, 0.0);
    for i in 0..n {
        tr += rho[[i, i]];
        for k in 0..n {
            herm = herm.max((rho[[i, k]] - rho[[k, i]].conj()).norm());
        }
    }
    if herm > 1e-8 {
        return Err(Error::InvalidState(format!(
            "density matrix not Hermitian (residue {herm:.2e})"
        )));
    }
    if (tr.re - 1.0).abs() > 1e-8 || tr.im.abs() > 1e-8 {
        return Err(Error::InvalidState(format!("trace = {tr}, expected 1")));
    }
    let eigs = hermitian_eigvals(rho)?;
    entropy_bits(&eigs, 1e-10)
}

/// Mutual information series `I(t) = S(rho^S) + S(rho^B) - S(rho^SB)` of a
/// trajectory run with entropies enabled.
pub fn mutual_entropy_series(traj: &TrajectoryResult) -> Result<ObservableSeries<f64>> {
    let ent = traj
        .entropies
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("trajectory was run without entropies".into()))?;
    ObservableSeries::new(traj.grid, ent.mutual.clone(), ObservableKind::MutualEntropy)
}

/// Gibbs state of the free central spin at inverse temperature `beta` and its
/// up-state probability `P(inf) = 1/2 - tanh(beta omega0 / 2) / 2`; this is
/// the end point a Markovian bath would impose.
pub fn thermal_reference(beta: Beta, omega0: f64) -> (CentralState, f64) {
    match beta {
        Beta::Infinite => (CentralState::down(), 0.0),
        Beta::Finite(b) => {
            let p_up = 0.5 - 0.5 * (b * omega0 / 2.0).tanh();
            let mut rho = Array2::zeros((2, 2));
            rho[[0, 0]] = Complex64::new(p_up, 0.0);
            rho[[1, 1]] = Complex64::new(1.0 - p_up, 0.0);
            (CentralState { rho }, p_up)
        }
    }
}
