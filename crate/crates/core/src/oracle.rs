//! Brute-force simulator on the full `2^(N+1)`-dimensional Hilbert space.
//!
//! Ground truth for the block decomposition at small `N`. Nothing here knows
//! about angular-momentum sectors: states live in the qubit tensor basis
//! (central spin as the most significant bit), the thermal bath is the
//! explicit product Gibbs state over individual spins, and partial traces are
//! plain index sums over that layout.
//!
//! The density matrix is carried as an ensemble factor: the exact initial
//! eigendecomposition `rho(0) = P P^dagger` (its eigenbasis is the product
//! basis), evolved column-wise as `F(t) = V exp(-i lambda t) V^T P`. Reduced
//! states are outer products of `F`'s rows; spectra of `rho^SB(t)` come from
//! the Gram matrix `F^dagger F`.

use ndarray::prelude::*;
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::evolution::{EntropySeries, TimeGrid, TrajectoryResult};
use crate::linalg::{entropy_bits, product_eigvals, SplitMat};
use crate::model::{build_full_hamiltonian, CentralState};
use crate::symmetry::{Beta, ModelParams};

/// Default cap on bath size for full-space work (dimension `2^(cap+1)`).
pub const DEFAULT_ORACLE_CAP: usize = 12;

/// Density matrix of the global system in the qubit tensor basis; the
/// central spin is the most significant qubit, bath spins follow, and bit
/// value 0 means spin up.
#[derive(Debug, Clone)]
pub struct FullState {
    pub rho: Array2<Complex64>,
    pub n_spins: usize,
}

impl FullState {
    pub fn validate(&self) -> Result<()> {
        let d = 1usize << (self.n_spins + 1);
        if self.rho.dim() != (d, d) {
            return Err(Error::InvalidState(format!(
                "full state dimension {:?}, expected {d}",
                self.rho.dim()
            )));
        }
        let mut herm: f64 = 0.0;
        let mut tr = Complex64::new(0.0, 0.0);
        for i in 0..d {
            tr += self.rho[[i, i]];
            for k in 0..d {
                herm = herm.max((self.rho[[i, k]] - self.rho[[k, i]].conj()).norm());
            }
        }
        if herm > 1e-12 || (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::InvalidState(format!(
                "full state invalid: hermiticity residue {herm:.2e}, trace {tr}"
            )));
        }
        Ok(())
    }
}

/// Per-spin thermal occupation (p_up, p_down) of one bath spin.
fn single_spin_thermal(params: &ModelParams) -> (f64, f64) {
    match params.beta {
        Beta::Infinite => (0.0, 1.0),
        Beta::Finite(beta) => {
            let p_up = 1.0 / (1.0 + (beta * params.omega).exp());
            (p_up, 1.0 - p_up)
        }
    }
}

/// Thermal weight of each bath configuration (product Gibbs state diagonal).
fn bath_config_weights(params: &ModelParams) -> Vec<f64> {
    let n = params.n_spins;
    let dim = 1usize << n;
    match params.beta {
        Beta::Infinite => {
            let mut w = vec![0.0; dim];
            w[dim - 1] = 1.0; // all spins down
            w
        }
        Beta::Finite(_) => {
            let (p_up, p_dn) = single_spin_thermal(params);
            (0..dim)
                .map(|x| {
                    let down = x.count_ones();
                    p_up.powi((n as u32 - down) as i32) * p_dn.powi(down as i32)
                })
                .collect()
        }
    }
}

/// Materialized initial state `rho_s0 (x) product-Gibbs`, for validation and
/// small-N tests.
pub fn initial_full_state(
    params: &ModelParams,
    rho_s0: &CentralState,
    cap: usize,
) -> Result<FullState> {
    params.validate()?;
    rho_s0.validate()?;
    let n = params.n_spins;
    if n > cap {
        return Err(Error::ResourceLimit { n_spins: n, cap });
    }
    let bath_dim = 1usize << n;
    let weights = bath_config_weights(params);
    let d = 2 * bath_dim;
    let mut rho = Array2::zeros((d, d));
    for mu in 0..2 {
        for nu in 0..2 {
            for x in 0..bath_dim {
                rho[[mu * bath_dim + x, nu * bath_dim + x]] = rho_s0.rho[[mu, nu]] * weights[x];
            }
        }
    }
    Ok(FullState { rho, n_spins: n })
}

/// Partial trace over all bath qubits.
pub fn trace_out_bath(state: &FullState) -> CentralState {
    let bath_dim = 1usize << state.n_spins;
    let mut rho = Array2::zeros((2, 2));
    for mu in 0..2 {
        for nu in 0..2 {
            let mut acc = Complex64::new(0.0, 0.0);
            for x in 0..bath_dim {
                acc += state.rho[[mu * bath_dim + x, nu * bath_dim + x]];
            }
            rho[[mu, nu]] = acc;
        }
    }
    CentralState { rho }
}

/// Partial trace over the central qubit.
pub fn trace_out_central(state: &FullState) -> Array2<Complex64> {
    let bath_dim = 1usize << state.n_spins;
    let mut rho = Array2::zeros((bath_dim, bath_dim));
    for x in 0..bath_dim {
        for y in 0..bath_dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for mu in 0..2 {
                acc += state.rho[[mu * bath_dim + x, mu * bath_dim + y]];
            }
            rho[[x, y]] = acc;
        }
    }
    rho
}

/// Full-space trajectory with entropies, for `n_spins <= cap`.
pub fn run_full_trajectory(
    params: &ModelParams,
    rho_s0: &CentralState,
    grid: &TimeGrid,
    cap: usize,
) -> Result<TrajectoryResult> {
    params.validate()?;
    rho_s0.validate()?;
    let n = params.n_spins;
    if n > cap {
        return Err(Error::ResourceLimit { n_spins: n, cap });
    }
    let bath_dim = 1usize << n;
    let d = 2 * bath_dim;

    let h = build_full_hamiltonian(params, cap)?;
    let (eigvals, vecs) = h
        .eigh(UPLO::Lower)
        .map_err(|e| Error::Backend(format!("full eigensolve failed: {e}")))?;

    // exact ensemble decomposition of rho(0): columns (s, x)
    let weights = bath_config_weights(params);
    let pairs = rho_s0.eigen_pairs();
    let mut col_defs: Vec<(usize, usize, f64)> = Vec::new();
    for (s, (q, _)) in pairs.iter().enumerate() {
        if *q <= 0.0 {
            continue;
        }
        for (x, &w) in weights.iter().enumerate() {
            if q * w > 0.0 {
                col_defs.push((s, x, (q * w).sqrt()));
            }
        }
    }
    let r = col_defs.len();
    // C = V^T P, assembled from rows of V
    let mut c_re = Array2::<f64>::zeros((d, r));
    let mut c_im = Array2::<f64>::zeros((d, r));
    for (col, &(s, x, sw)) in col_defs.iter().enumerate() {
        let chi = pairs[s].1;
        for mu in 0..2 {
            let amp = chi[mu] * sw;
            if amp.norm() == 0.0 {
                continue;
            }
            let row = vecs.row(mu * bath_dim + x);
            for a in 0..d {
                c_re[[a, col]] += amp.re * row[a];
                c_im[[a, col]] += amp.im * row[a];
            }
        }
    }

    struct Step {
        p_up: f64,
        p_dn: f64,
        coh: Complex64,
        s_sys: f64,
        s_bath: f64,
        s_joint: f64,
    }

    let steps: Vec<Step> = (0..grid.n_steps)
        .into_par_iter()
        .map(|i| -> Result<Step> {
            let t = grid.time(i);
            // F(t) = V diag(e^{-i lambda t}) C
            let mut sc_re = Array2::<f64>::zeros((d, r));
            let mut sc_im = Array2::<f64>::zeros((d, r));
            for a in 0..d {
                let (s, c) = (eigvals[a] * t).sin_cos();
                for col in 0..r {
                    let vr = c_re[[a, col]];
                    let vi = c_im[[a, col]];
                    sc_re[[a, col]] = c * vr + s * vi;
                    sc_im[[a, col]] = c * vi - s * vr;
                }
            }
            let f = SplitMat {
                re: vecs.dot(&sc_re),
                im: vecs.dot(&sc_im),
            };

            // reduced central state from explicit bath-index sums
            let mut p_up = 0.0;
            let mut p_dn = 0.0;
            let mut coh = Complex64::new(0.0, 0.0);
            for x in 0..bath_dim {
                for col in 0..r {
                    let up = Complex64::new(f.re[[x, col]], f.im[[x, col]]);
                    let dn = Complex64::new(
                        f.re[[bath_dim + x, col]],
                        f.im[[bath_dim + x, col]],
                    );
                    p_up += up.norm_sqr();
                    p_dn += dn.norm_sqr();
                    coh += dn * up.conj();
                }
            }
            let s_sys = {
                let rho = array![
                    [Complex64::new(p_up, 0.0), coh.conj()],
                    [coh, Complex64::new(p_dn, 0.0)]
                ];
                let st = CentralState { rho };
                let [(q0, _), (q1, _)] = st.eigen_pairs();
                entropy_bits(&[q0, q1], 1e-9)?
            };

            // bath spectrum from rho^B = sum_mu F_mu F_mu^dagger
            let bath_factor = SplitMat {
                re: ndarray::concatenate![
                    Axis(1),
                    f.re.slice(s![..bath_dim, ..]),
                    f.re.slice(s![bath_dim.., ..])
                ],
                im: ndarray::concatenate![
                    Axis(1),
                    f.im.slice(s![..bath_dim, ..]),
                    f.im.slice(s![bath_dim.., ..])
                ],
            };
            let s_bath = entropy_bits(&product_eigvals(&bath_factor)?, 1e-9)?;
            // joint spectrum from the Gram side of F
            let s_joint = entropy_bits(&product_eigvals(&f)?, 1e-9)?;
            Ok(Step { p_up, p_dn, coh, s_sys, s_bath, s_joint })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut central_states = Vec::with_capacity(steps.len());
    let mut s_system = Vec::with_capacity(steps.len());
    let mut s_bath = Vec::with_capacity(steps.len());
    let mut s_joint = Vec::with_capacity(steps.len());
    let mut mutual = Vec::with_capacity(steps.len());
    for st in steps {
        central_states.push(CentralState {
            rho: array![
                [Complex64::new(st.p_up, 0.0), st.coh.conj()],
                [st.coh, Complex64::new(st.p_dn, 0.0)]
            ],
        });
        s_system.push(st.s_sys);
        s_bath.push(st.s_bath);
        s_joint.push(st.s_joint);
        mutual.push(st.s_sys + st.s_bath - st.s_joint);
    }

    Ok(TrajectoryResult {
        params: *params,
        grid: *grid,
        central_states,
        entropies: Some(EntropySeries { s_system, s_bath, s_joint, mutual }),
    })
}
