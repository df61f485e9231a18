//! Spectral propagation of sector blocks and the trajectory runner.
//!
//! Each block is eigendecomposed once; evolution to any time is then a
//! diagonal phase twist, exact to machine precision at arbitrary `t`. The
//! trajectory runner aggregates reduced central-spin states over sectors with
//! their thermal weights, optionally carrying the entropy bookkeeping needed
//! for the mutual information.

mod sector;

use ndarray::prelude::*;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{cmatmul, entropy_bits, LN_2};
use crate::model::{BlockOperator, BlockState, CentralState};
use crate::symmetry::{sector_weights, Beta, BlockLabel, ModelParams, SectorWeight};

pub(crate) use sector::SectorEngine;

/// Relative Hermiticity tolerance accepted by [`eigendecompose`].
const EIG_HERMITICITY_TOL: f64 = 1e-10;

/// Eigendecomposition of a block Hamiltonian.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub label: BlockLabel,
    /// Ascending eigenvalues.
    pub eigenvalues: Array1<f64>,
    /// Unitary matrix of eigenvectors (columns).
    pub eigenvectors: Array2<Complex64>,
}

/// Hermitian eigendecomposition of a block operator.
pub fn eigendecompose(h: &BlockOperator) -> Result<EigenSystem> {
    let d = h.matrix.nrows();
    if h.matrix.ncols() != d {
        return Err(Error::InvalidOperator("operator is not square".into()));
    }
    let mut max_entry: f64 = 0.0;
    let mut herm: f64 = 0.0;
    for i in 0..d {
        for k in 0..d {
            max_entry = max_entry.max(h.matrix[[i, k]].norm());
            herm = herm.max((h.matrix[[i, k]] - h.matrix[[k, i]].conj()).norm());
        }
    }
    if herm > EIG_HERMITICITY_TOL * max_entry.max(1.0) {
        return Err(Error::InvalidOperator(format!(
            "operator not Hermitian (residue {herm:.2e})"
        )));
    }
    let (eigenvalues, eigenvectors) = crate::linalg::hermitian_eigh(&h.matrix.view())?;
    Ok(EigenSystem { label: h.label, eigenvalues, eigenvectors })
}

/// Unitary evolution `rho(t) = U rho(0) U^dagger` with
/// `U = V exp(-i lambda t) V^dagger`.
pub fn evolve_block(eig: &EigenSystem, state0: &BlockState, t: f64) -> Result<BlockState> {
    if eig.label != state0.label {
        return Err(Error::SectorMismatch {
            expected: eig.label.two_j,
            got: state0.label.two_j,
        });
    }
    let mut u = eig.eigenvectors.clone();
    for (a, mut col) in u.columns_mut().into_iter().enumerate() {
        let phase = Complex64::from_polar(1.0, -eig.eigenvalues[a] * t);
        col.map_inplace(|z| *z *= phase);
    }
    // U = (V e^{-i lambda t}) V^dagger
    let vd = eig.eigenvectors.t().mapv(|z| z.conj());
    let u = cmatmul(&u.view(), &vd.view());
    let ud = u.t().mapv(|z| z.conj());
    let rho_t = cmatmul(&cmatmul(&u.view(), &state0.rho.view()).view(), &ud.view());
    Ok(BlockState { label: state0.label, rho: rho_t })
}

/// Partial trace over the bath sector: `rho^S_{mu nu} = sum_k rho[(mu,k),(nu,k)]`.
pub fn reduce_to_central(state: &BlockState) -> CentralState {
    let b = state.label.bath_dim();
    let mut rho = Array2::zeros((2, 2));
    for mu in 0..2 {
        for nu in 0..2 {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..b {
                acc += state.rho[[state.label.flat(mu, k), state.label.flat(nu, k)]];
            }
            rho[[mu, nu]] = acc;
        }
    }
    CentralState { rho }
}

/// Partial trace over the central spin: a `(2j+1)`-dimensional bath state.
pub fn reduce_to_bath(state: &BlockState) -> Array2<Complex64> {
    let b = state.label.bath_dim();
    let mut rho = Array2::zeros((b, b));
    for k in 0..b {
        for kp in 0..b {
            let mut acc = Complex64::new(0.0, 0.0);
            for mu in 0..2 {
                acc += state.rho[[state.label.flat(mu, k), state.label.flat(mu, kp)]];
            }
            rho[[k, kp]] = acc;
        }
    }
    rho
}

/// Uniform time grid starting at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub dt: f64,
    pub n_steps: usize,
}

impl TimeGrid {
    pub fn new(dt: f64, n_steps: usize) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidGrid(format!("dt must be positive, got {dt}")));
        }
        if n_steps == 0 {
            return Err(Error::InvalidGrid("grid needs at least one step".into()));
        }
        Ok(Self { dt, n_steps })
    }

    /// Grid covering `[0, t_max]` with spacing `dt`.
    pub fn from_t_max(dt: f64, t_max: f64) -> Result<Self> {
        if !(t_max >= 0.0) || !t_max.is_finite() {
            return Err(Error::InvalidGrid(format!("t_max must be >= 0, got {t_max}")));
        }
        let n = (t_max / dt).round() as usize + 1;
        Self::new(dt, n)
    }

    pub fn t_max(&self) -> f64 {
        self.dt * (self.n_steps - 1) as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_steps).map(|i| self.time(i))
    }
}

/// Per-time entropies of the aggregated state, in bits.
#[derive(Debug, Clone)]
pub struct EntropySeries {
    /// S(rho^S(t)).
    pub s_system: Vec<f64>,
    /// S(rho^B(t)).
    pub s_bath: Vec<f64>,
    /// S(rho^SB(t)).
    pub s_joint: Vec<f64>,
    /// I(t) = S(rho^S) + S(rho^B) - S(rho^SB), evaluated without forming the
    /// large weight-entropy terms that cancel between bath and joint parts.
    pub mutual: Vec<f64>,
}

/// Aggregated trajectory of the central spin.
#[derive(Debug, Clone)]
pub struct TrajectoryResult {
    pub params: ModelParams,
    pub grid: TimeGrid,
    pub central_states: Vec<CentralState>,
    pub entropies: Option<EntropySeries>,
}

/// Evolve every thermally occupied sector and aggregate the reduced
/// central-spin state `rho^S(t) = sum_j w_j rho^S_j(t)`.
///
/// At `beta = inf` only the `two_j = N` sector carries weight and is the only
/// one evolved. With `want_entropies`, the von Neumann entropies of the
/// system, bath, and joint state are recorded per grid time using the
/// orthogonal-support decomposition over sectors.
pub fn run_trajectory(
    params: &ModelParams,
    rho_s0: &CentralState,
    grid: &TimeGrid,
    want_entropies: bool,
) -> Result<TrajectoryResult> {
    params.validate()?;
    rho_s0.validate()?;
    let weights = sector_weights(params)?;
    let active: Vec<SectorWeight> = match params.beta {
        Beta::Infinite => weights
            .sectors
            .iter()
            .copied()
            .filter(|s| s.label.two_j == params.n_spins)
            .collect(),
        Beta::Finite(_) => weights.sectors.clone(),
    };

    let per_sector: Vec<(SectorWeight, sector::SectorSeries)> = active
        .par_iter()
        .map(|sw| {
            let engine = SectorEngine::new(params, rho_s0, sw.label, want_entropies)?;
            Ok((*sw, engine.evaluate_grid(grid)))
        })
        .collect::<Result<Vec<_>>>()?;

    // Deterministic aggregation: fixed fold order over ascending two_j,
    // independent of how the sector work was scheduled.
    let mut ordered: Vec<&(SectorWeight, sector::SectorSeries)> = per_sector.iter().collect();
    ordered.sort_by_key(|(sw, _)| sw.label.two_j);

    let n = grid.n_steps;
    let mut central_states = Vec::with_capacity(n);
    let mut s_system = Vec::new();
    let mut s_bath_core = vec![0.0; if want_entropies { n } else { 0 }];
    let mut s_joint_core = vec![0.0; if want_entropies { n } else { 0 }];

    for i in 0..n {
        let mut p_up = Complex64::new(0.0, 0.0);
        let mut p_dn = Complex64::new(0.0, 0.0);
        let mut coh = Complex64::new(0.0, 0.0);
        for (sw, series) in ordered.iter() {
            let w = sw.weight();
            if w == 0.0 {
                continue;
            }
            p_up += w * series.p_up[i];
            p_dn += w * series.p_dn[i];
            coh += w * series.coh[i];
            if want_entropies {
                s_bath_core[i] += w * series.s_bath.as_ref().unwrap()[i];
                s_joint_core[i] += w * series.s_joint.as_ref().unwrap()[i];
            }
        }
        let rho = array![[p_up, coh.conj()], [coh, p_dn]];
        central_states.push(CentralState { rho });
    }

    let entropies = if want_entropies {
        // Weight-entropy of the per-copy distribution {Z_j/Z}; identical for
        // the bath and joint decompositions, so it cancels inside I(t).
        let h_w = match params.beta {
            Beta::Infinite => 0.0,
            Beta::Finite(_) => {
                let mut acc = 0.0;
                for (sw, _) in ordered.iter() {
                    let w = sw.weight();
                    if w > 0.0 {
                        acc -= w * (sw.log_zj - weights.log_partition) / LN_2;
                    }
                }
                acc
            }
        };
        for state in &central_states {
            let [(q0, _), (q1, _)] = state.eigen_pairs();
            s_system.push(entropy_bits(&[q0, q1], 1e-9)?);
        }
        let mutual = (0..n)
            .map(|i| s_system[i] + (s_bath_core[i] - s_joint_core[i]))
            .collect();
        Some(EntropySeries {
            s_bath: s_bath_core.iter().map(|c| c + h_w).collect(),
            s_joint: s_joint_core.iter().map(|c| c + h_w).collect(),
            s_system,
            mutual,
        })
    } else {
        None
    };

    Ok(TrajectoryResult {
        params: *params,
        grid: *grid,
        central_states,
        entropies,
    })
}
