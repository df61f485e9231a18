//! Collective angular-momentum structure of the bath: allowed total-spin
//! sectors, their multiplicities, thermal sector weights, and spin-j operator
//! matrices.
//!
//! Multiplicities grow like binomials of `N` (about `10^59` at `N = 201`), so
//! every weight is carried as a natural logarithm and combined with
//! log-sum-exp; exact big-integer arithmetic is reserved for cross-checks at
//! small `N`.

use ndarray::prelude::*;
use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::linalg::{ln_binomial, ln_one_minus_exp, logsumexp};

/// Inverse bath temperature. Zero is the infinite-temperature limit; the
/// distinguished [`Beta::Infinite`] value is the zero-temperature limit in
/// which the bath occupies the global ground state `|j = N/2, m = -N/2>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Beta {
    Finite(f64),
    Infinite,
}

impl Beta {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Beta::Infinite)
    }
}

impl std::fmt::Display for Beta {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Beta::Finite(b) => write!(f, "{b}"),
            Beta::Infinite => write!(f, "inf"),
        }
    }
}

/// Physical parameters of one simulation. Units: `hbar = k_B = 1`, and all
/// frequencies are quoted in units of the bath level spacing `omega`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Central-spin level spacing.
    pub omega0: f64,
    /// Bath-spin level spacing (the frequency unit; must be positive).
    pub omega: f64,
    /// Coupling strength of the central spin to each bath spin.
    pub g: f64,
    /// Number of bath spins.
    pub n_spins: usize,
    /// Inverse bath temperature.
    pub beta: Beta,
}

impl ModelParams {
    pub fn new(omega0: f64, omega: f64, g: f64, n_spins: usize, beta: Beta) -> Result<Self> {
        let p = Self { omega0, omega, g, n_spins, beta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_spins < 1 {
            return Err(Error::InvalidParameter(format!(
                "n_spins must be at least 1, got {}",
                self.n_spins
            )));
        }
        if !(self.omega > 0.0) || !self.omega.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "omega must be positive and finite, got {}",
                self.omega
            )));
        }
        if !self.omega0.is_finite() || !self.g.is_finite() {
            return Err(Error::InvalidParameter(
                "omega0 and g must be finite".into(),
            ));
        }
        if let Beta::Finite(b) = self.beta {
            if !(b >= 0.0) || !b.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "beta must be >= 0 or inf, got {b}"
                )));
            }
        }
        Ok(())
    }
}

/// One angular-momentum sector, identified by `2j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockLabel {
    pub two_j: usize,
}

impl BlockLabel {
    pub fn new(two_j: usize) -> Self {
        Self { two_j }
    }

    /// Spin quantum number `j`.
    pub fn j(&self) -> f64 {
        self.two_j as f64 / 2.0
    }

    /// Dimension `2j + 1` of the bath sector.
    pub fn bath_dim(&self) -> usize {
        self.two_j + 1
    }

    /// Dimension `2(2j + 1)` of the sector including the central spin.
    pub fn block_dim(&self) -> usize {
        2 * self.bath_dim()
    }

    /// `m` value of bath basis state `k` (basis ordered by `m` ascending).
    pub fn m_of(&self, k: usize) -> f64 {
        k as f64 - self.j()
    }

    /// Flat block index of `(mu, k)`: central spin `mu` is the major index.
    pub fn flat(&self, mu: usize, k: usize) -> usize {
        mu * self.bath_dim() + k
    }
}

fn check_sector(n_spins: usize, two_j: usize) -> Result<()> {
    if n_spins < 1 {
        return Err(Error::InvalidParameter(format!(
            "n_spins must be at least 1, got {n_spins}"
        )));
    }
    if two_j > n_spins || (n_spins - two_j) % 2 != 0 {
        return Err(Error::InvalidSector { n_spins, two_j });
    }
    Ok(())
}

/// Allowed sectors for `n_spins` bath spins: `2j = N, N-2, ..., N mod 2`,
/// in descending order.
pub fn allowed_two_j(n_spins: usize) -> Result<Vec<BlockLabel>> {
    if n_spins < 1 {
        return Err(Error::InvalidParameter(format!(
            "n_spins must be at least 1, got {n_spins}"
        )));
    }
    let mut labels: Vec<BlockLabel> = (n_spins % 2..=n_spins)
        .step_by(2)
        .map(BlockLabel::new)
        .collect();
    labels.reverse();
    Ok(labels)
}

/// Exact multiplicity `alpha_j = C(N, N/2 - j) - C(N, N/2 - j - 1)` of the
/// spin-`j` sector, as a big integer.
pub fn degeneracy_exact(n_spins: usize, two_j: usize) -> Result<BigUint> {
    check_sector(n_spins, two_j)?;
    let q = (n_spins - two_j) / 2;
    let c1 = big_binomial(n_spins, q);
    if q == 0 {
        return Ok(c1);
    }
    Ok(c1 - big_binomial(n_spins, q - 1))
}

fn big_binomial(n: usize, k: usize) -> BigUint {
    let k = k.min(n - k);
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// Natural log of the sector multiplicity, stable for large `N` where the
/// binomials overflow f64.
pub fn degeneracy_log(n_spins: usize, two_j: usize) -> Result<f64> {
    check_sector(n_spins, two_j)?;
    let q = (n_spins - two_j) / 2;
    let ln_c1 = ln_binomial(n_spins, q);
    if q == 0 {
        return Ok(0.0);
    }
    let ln_c2 = ln_binomial(n_spins, q - 1);
    // alpha = C1 - C2 with C2 < C1 strictly for every allowed sector.
    Ok(ln_c1 + ln_one_minus_exp(ln_c2 - ln_c1))
}

/// Log-domain weight data of one sector.
#[derive(Debug, Clone, Copy)]
pub struct SectorWeight {
    pub label: BlockLabel,
    /// ln alpha_j.
    pub log_alpha: f64,
    /// ln Z_j, with Z_j = sum_m exp(-beta omega m). `+inf` at beta = inf.
    pub log_zj: f64,
    /// ln of the aggregated sector weight w_j = alpha_j Z_j / Z.
    pub log_weight: f64,
}

impl SectorWeight {
    /// The aggregated weight w_j; these sum to one over all sectors.
    pub fn weight(&self) -> f64 {
        self.log_weight.exp()
    }
}

/// Thermal weights of all sectors plus the log partition function.
#[derive(Debug, Clone)]
pub struct SectorWeights {
    /// Per-sector weights, ordered by descending `two_j` (as [`allowed_two_j`]).
    pub sectors: Vec<SectorWeight>,
    /// ln Z of the full bath.
    pub log_partition: f64,
}

/// Thermal sector weights for the bath Gibbs state.
///
/// At `beta = inf` all weight collapses onto the `two_j = N` sector (the one
/// containing the global ground state), and `Z` diverges; `log_zj` and
/// `log_partition` are `+inf` there while the weights stay well defined.
pub fn sector_weights(params: &ModelParams) -> Result<SectorWeights> {
    params.validate()?;
    let labels = allowed_two_j(params.n_spins)?;
    match params.beta {
        Beta::Infinite => {
            let sectors = labels
                .iter()
                .map(|&label| {
                    let top = label.two_j == params.n_spins;
                    Ok(SectorWeight {
                        label,
                        log_alpha: degeneracy_log(params.n_spins, label.two_j)?,
                        log_zj: f64::INFINITY,
                        log_weight: if top { 0.0 } else { f64::NEG_INFINITY },
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(SectorWeights { sectors, log_partition: f64::INFINITY })
        }
        Beta::Finite(beta) => {
            let bw = beta * params.omega;
            let mut partial = Vec::with_capacity(labels.len());
            for &label in &labels {
                let log_alpha = degeneracy_log(params.n_spins, label.two_j)?;
                let terms: Vec<f64> = (0..label.bath_dim())
                    .map(|k| -bw * label.m_of(k))
                    .collect();
                let log_zj = logsumexp(&terms);
                partial.push((label, log_alpha, log_zj));
            }
            let joint: Vec<f64> = partial.iter().map(|(_, a, z)| a + z).collect();
            let log_partition = logsumexp(&joint);
            let sectors = partial
                .into_iter()
                .map(|(label, log_alpha, log_zj)| SectorWeight {
                    label,
                    log_alpha,
                    log_zj,
                    log_weight: log_alpha + log_zj - log_partition,
                })
                .collect();
            Ok(SectorWeights { sectors, log_partition })
        }
    }
}

/// Dense spin-j operators in the `|j,m>` basis, `m` ascending.
#[derive(Debug, Clone)]
pub struct AngularMomentumOps {
    pub jz: Array2<f64>,
    pub jx: Array2<f64>,
    pub jplus: Array2<f64>,
    pub jminus: Array2<f64>,
}

/// Matrices of `J_z`, `J_x`, `J_+`, `J_-` for total spin `j = two_j / 2`.
pub fn angular_momentum_matrices(two_j: usize) -> AngularMomentumOps {
    let label = BlockLabel::new(two_j);
    let dim = label.bath_dim();
    let j = label.j();
    let mut jz = Array2::zeros((dim, dim));
    let mut jplus = Array2::zeros((dim, dim));
    for k in 0..dim {
        let m = label.m_of(k);
        jz[[k, k]] = m;
        if k + 1 < dim {
            // <j, m+1| J+ |j, m> = sqrt(j(j+1) - m(m+1))
            jplus[[k + 1, k]] = (j * (j + 1.0) - m * (m + 1.0)).sqrt();
        }
    }
    let jminus = jplus.t().to_owned();
    let jx = (&jplus + &jminus) * 0.5;
    AngularMomentumOps { jz, jx, jplus, jminus }
}
