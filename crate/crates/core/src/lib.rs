//! Exact dynamics of a spin star: one central spin-1/2 homogeneously coupled
//! to `N` identical, mutually non-interacting bath spins.
//!
//! The global Hamiltonian
//!
//! ```text
//! H = (omega0/2) sigma_z^(0) + omega J_z + 2 g sigma_x^(0) J_x
//! ```
//!
//! commutes with the total bath angular momentum `J^2`, so the
//! `2^(N+1)`-dimensional problem splits into independent blocks of dimension
//! `2(2j+1)`, one per allowed total spin `j`, each occurring with a
//! combinatorial multiplicity `alpha_j`. This crate builds those blocks,
//! propagates them exactly by spectral decomposition, and aggregates reduced
//! observables of the central spin (occupation, coherence, Bloch vector,
//! fluctuation statistics, von Neumann and mutual entropies) together with
//! frequency-domain diagnostics.
//!
//! A brute-force full-Hilbert-space simulator ([`oracle`]) provides ground
//! truth for small `N`; it shares no code with the block decomposition.
//!
//! Conventions used throughout:
//! * `hbar = 1`, `k_B = 1`; all frequencies in units of the bath spacing.
//! * Bath sector basis `|j,m>` is ordered by `m` ascending, `m = k - j` for
//!   `k = 0..2j`.
//! * Block basis index is `i = mu*(2j+1) + k` with `mu = 0` for the central
//!   spin up, `mu = 1` for down.
//! * Entropies are reported in bits (log base 2).

pub mod analytic;
pub mod error;
pub(crate) mod linalg;
pub mod model;
pub mod observables;
pub mod oracle;
pub mod spectral;
pub mod symmetry;

pub mod evolution;

pub use error::{Error, Result};
pub use evolution::{EigenSystem, EntropySeries, TimeGrid, TrajectoryResult};
pub use model::{BlockOperator, BlockState, CentralState};
pub use symmetry::{Beta, BlockLabel, ModelParams, SectorWeights};
