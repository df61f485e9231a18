//! Hamiltonians and initial states: the per-sector blocks used by the
//! production path, the explicit `2^(N+1)` tensor-product Hamiltonian used by
//! the brute-force oracle, the truncated single-bath-mode approximation valid
//! at zero temperature, and the conserved parity operator.

use ndarray::prelude::*;
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigvals, logsumexp};
use crate::symmetry::{angular_momentum_matrices, Beta, BlockLabel, ModelParams};

/// Hermiticity tolerance enforced on constructed operators.
pub const HERMITICITY_TOL: f64 = 1e-13;
/// Tolerances for density-matrix validation.
pub const STATE_HERMITICITY_TOL: f64 = 1e-12;
pub const STATE_TRACE_TOL: f64 = 1e-12;
pub const STATE_PSD_TOL: f64 = 1e-10;

/// 2x2 reduced density matrix of the central spin in the basis `{|up>, |down>}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralState {
    pub rho: Array2<Complex64>,
}

impl CentralState {
    pub fn new(rho: Array2<Complex64>) -> Result<Self> {
        let s = Self { rho };
        s.validate()?;
        Ok(s)
    }

    /// `|up><up|`.
    pub fn up() -> Self {
        Self::from_diagonal_unchecked(1.0)
    }

    /// `|down><down|`.
    pub fn down() -> Self {
        Self::from_diagonal_unchecked(0.0)
    }

    /// `(|up> + |down>)(<up| + <down|) / 2`.
    pub fn plus() -> Self {
        let h = Complex64::new(0.5, 0.0);
        Self { rho: array![[h, h], [h, h]] }
    }

    /// Pure state `a|up> + b|down>`; `|a|^2 + |b|^2` must be 1 within 1e-10
    /// and is renormalized exactly afterwards.
    pub fn from_amplitudes(a: Complex64, b: Complex64) -> Result<Self> {
        let n2 = a.norm_sqr() + b.norm_sqr();
        if (n2 - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidState(format!(
                "|a|^2 + |b|^2 = {n2}, expected 1 within 1e-10"
            )));
        }
        let a = a / n2.sqrt();
        let b = b / n2.sqrt();
        Ok(Self {
            rho: array![
                [a * a.conj(), a * b.conj()],
                [b * a.conj(), b * b.conj()]
            ],
        })
    }

    /// Dephased mixture `p|up><up| + (1-p)|down><down|`.
    pub fn from_diagonal(p_up: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_up) {
            return Err(Error::InvalidState(format!(
                "diagonal population {p_up} outside [0, 1]"
            )));
        }
        Ok(Self::from_diagonal_unchecked(p_up))
    }

    fn from_diagonal_unchecked(p_up: f64) -> Self {
        let mut rho = Array2::zeros((2, 2));
        rho[[0, 0]] = Complex64::new(p_up, 0.0);
        rho[[1, 1]] = Complex64::new(1.0 - p_up, 0.0);
        Self { rho }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rho.dim() != (2, 2) {
            return Err(Error::InvalidState("central state must be 2x2".into()));
        }
        let herm = (self.rho[[0, 1]] - self.rho[[1, 0]].conj()).norm()
            .max(self.rho[[0, 0]].im.abs())
            .max(self.rho[[1, 1]].im.abs());
        if herm > STATE_HERMITICITY_TOL {
            return Err(Error::InvalidState(format!(
                "central state is not Hermitian (residue {herm:.2e})"
            )));
        }
        let trace = self.rho[[0, 0]].re + self.rho[[1, 1]].re;
        if (trace - 1.0).abs() > STATE_TRACE_TOL {
            return Err(Error::InvalidState(format!(
                "central state trace = {trace}, expected 1"
            )));
        }
        let (q_lo, _) = self.eigen_pairs()[1];
        if q_lo < -STATE_PSD_TOL {
            return Err(Error::InvalidState(format!(
                "central state has negative eigenvalue {q_lo:.2e}"
            )));
        }
        Ok(())
    }

    /// Analytic eigendecomposition, eigenvalues descending.
    pub fn eigen_pairs(&self) -> [(f64, [Complex64; 2]); 2] {
        let a = self.rho[[0, 0]].re;
        let b = self.rho[[1, 1]].re;
        let c = self.rho[[0, 1]]; // <up| rho |down>
        let half_diff = 0.5 * (a - b);
        let mean = 0.5 * (a + b);
        let r = (half_diff * half_diff + c.norm_sqr()).sqrt();
        let (hi, lo) = (mean + r, mean - r);
        if c.norm() < 1e-300 {
            // already diagonal
            let up = (a, [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
            let dn = (b, [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]);
            return if a >= b { [up, dn] } else { [dn, up] };
        }
        // eigenvector for lambda: (c, lambda - a), nonzero since c != 0
        let mk = |lambda: f64| {
            let v0 = c;
            let v1 = Complex64::new(lambda - a, 0.0);
            let norm = (v0.norm_sqr() + v1.norm_sqr()).sqrt();
            [v0 / norm, v1 / norm]
        };
        [(hi, mk(hi)), (lo, mk(lo))]
    }
}

/// Dense Hermitian operator on one angular-momentum block.
#[derive(Debug, Clone)]
pub struct BlockOperator {
    pub label: BlockLabel,
    pub matrix: Array2<Complex64>,
}

/// Sector-normalized density matrix on one block.
#[derive(Debug, Clone)]
pub struct BlockState {
    pub label: BlockLabel,
    pub rho: Array2<Complex64>,
}

impl BlockState {
    pub fn validate(&self) -> Result<()> {
        let d = self.label.block_dim();
        if self.rho.dim() != (d, d) {
            return Err(Error::InvalidState(format!(
                "block state dimension {:?} does not match sector {}",
                self.rho.dim(),
                d
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
        if herm > STATE_HERMITICITY_TOL {
            return Err(Error::InvalidState(format!(
                "block state not Hermitian (residue {herm:.2e})"
            )));
        }
        if (tr.re - 1.0).abs() > STATE_TRACE_TOL || tr.im.abs() > STATE_TRACE_TOL {
            return Err(Error::InvalidState(format!(
                "block state trace = {tr}, expected 1"
            )));
        }
        let eigs = hermitian_eigvals(&self.rho.view())?;
        if let Some(&min) = eigs.first() {
            if min < -STATE_PSD_TOL {
                return Err(Error::InvalidState(format!(
                    "block state has negative eigenvalue {min:.2e}"
                )));
            }
        }
        Ok(())
    }
}

fn require_sector(params: &ModelParams, label: &BlockLabel) -> Result<()> {
    if label.two_j > params.n_spins || (params.n_spins - label.two_j) % 2 != 0 {
        return Err(Error::InvalidSector {
            n_spins: params.n_spins,
            two_j: label.two_j,
        });
    }
    Ok(())
}

/// Real symmetric representation of the block Hamiltonian; every matrix
/// element of `H_j` is real in the chosen basis.
pub(crate) fn block_hamiltonian_real(params: &ModelParams, label: &BlockLabel) -> Array2<f64> {
    let b = label.bath_dim();
    let d = label.block_dim();
    let jx = angular_momentum_matrices(label.two_j).jx;
    let mut h = Array2::zeros((d, d));
    for mu in 0..2 {
        let sign = if mu == 0 { 1.0 } else { -1.0 };
        for k in 0..b {
            h[[label.flat(mu, k), label.flat(mu, k)]] =
                sign * params.omega0 / 2.0 + params.omega * label.m_of(k);
        }
    }
    // sigma_x flips the central spin with unit amplitude; the bath ladder
    // element comes from 2 g Jx.
    for kp in 0..b {
        for k in 0..b {
            let v = 2.0 * params.g * jx[[kp, k]];
            if v != 0.0 {
                h[[label.flat(0, kp), label.flat(1, k)]] = v;
                h[[label.flat(1, k), label.flat(0, kp)]] = v;
            }
        }
    }
    h
}

/// Block Hamiltonian `H_j` of the sector `label`, as a dense Hermitian
/// complex matrix (symmetrized on output).
pub fn build_block_hamiltonian(params: &ModelParams, label: &BlockLabel) -> Result<BlockOperator> {
    params.validate()?;
    require_sector(params, label)?;
    let h = block_hamiltonian_real(params, label);
    let sym = (&h + &h.t()) * 0.5;
    Ok(BlockOperator {
        label: *label,
        matrix: sym.mapv(|x| Complex64::new(x, 0.0)),
    })
}

/// Thermal occupation probabilities of the bath sector, `m` ascending.
/// At `beta = inf` this is the pure projector onto `m = -j`.
pub(crate) fn thermal_bath_probs(params: &ModelParams, label: &BlockLabel) -> Vec<f64> {
    let b = label.bath_dim();
    match params.beta {
        Beta::Infinite => {
            let mut p = vec![0.0; b];
            p[0] = 1.0;
            p
        }
        Beta::Finite(beta) => {
            let bw = beta * params.omega;
            let logs: Vec<f64> = (0..b).map(|k| -bw * label.m_of(k)).collect();
            let log_zj = logsumexp(&logs);
            logs.iter().map(|&l| (l - log_zj).exp()).collect()
        }
    }
}

/// Initial block state `rho_s0 (x) diag_m(exp(-beta omega m)/Z_j)`.
pub fn build_block_initial_state(
    params: &ModelParams,
    rho_s0: &CentralState,
    label: &BlockLabel,
) -> Result<BlockState> {
    params.validate()?;
    require_sector(params, label)?;
    rho_s0.validate()?;
    let b = label.bath_dim();
    let d = label.block_dim();
    let probs = thermal_bath_probs(params, label);
    let mut rho = Array2::zeros((d, d));
    for mu in 0..2 {
        for nu in 0..2 {
            for k in 0..b {
                rho[[label.flat(mu, k), label.flat(nu, k)]] =
                    rho_s0.rho[[mu, nu]] * probs[k];
            }
        }
    }
    Ok(BlockState { label: *label, rho })
}

/// Explicit `2^(N+1)`-dimensional Hamiltonian as tensor products of Pauli
/// operators. Qubit 0 (the central spin) is the most significant bit; bit
/// value 0 means spin up. Only available up to `cap` bath spins.
pub fn build_full_hamiltonian(params: &ModelParams, cap: usize) -> Result<Array2<f64>> {
    params.validate()?;
    let n = params.n_spins;
    if n > cap {
        return Err(Error::ResourceLimit { n_spins: n, cap });
    }
    let dim = 1usize << (n + 1);
    let central_bit = n; // most significant
    let mut h = Array2::zeros((dim, dim));
    let sz = |state: usize, bit: usize| -> f64 {
        if (state >> bit) & 1 == 0 {
            1.0
        } else {
            -1.0
        }
    };
    for i in 0..dim {
        let mut diag = params.omega0 / 2.0 * sz(i, central_bit);
        for q in 0..n {
            diag += params.omega / 2.0 * sz(i, q);
        }
        h[[i, i]] = diag;
        for q in 0..n {
            let fl = i ^ (1 << central_bit) ^ (1 << q);
            h[[fl, i]] += params.g;
        }
    }
    Ok(h)
}

/// Truncated single-mode Hamiltonian `omega b'b + (omega0/2) sigma_z +
/// g sqrt(N) sigma_x (b' + b)` on `cutoff` Fock levels; flat index is
/// `s * cutoff + n` with `s = 0` for the central spin up.
pub fn build_single_mode_hamiltonian(params: &ModelParams, cutoff: usize) -> Result<Array2<f64>> {
    params.validate()?;
    if cutoff < 2 {
        return Err(Error::InvalidParameter(format!(
            "Fock cutoff must be at least 2, got {cutoff}"
        )));
    }
    let lambda = params.g * (params.n_spins as f64).sqrt();
    let dim = 2 * cutoff;
    let mut h = Array2::zeros((dim, dim));
    for s in 0..2 {
        let sign = if s == 0 { 1.0 } else { -1.0 };
        for n in 0..cutoff {
            let i = s * cutoff + n;
            h[[i, i]] = params.omega * n as f64 + sign * params.omega0 / 2.0;
            // sigma_x (b' + b)
            let sbar = 1 - s;
            if n + 1 < cutoff {
                let v = lambda * ((n + 1) as f64).sqrt();
                h[[sbar * cutoff + n + 1, i]] = v;
                h[[i, sbar * cutoff + n + 1]] = v;
            }
        }
    }
    Ok(h)
}

/// One oscillation line of the single-mode model: angular frequency and
/// signed amplitude of its contribution to `P(t)` from the `|up, n=0>`
/// initial state.
#[derive(Debug, Clone, Copy)]
pub struct SpectralLine {
    pub frequency: f64,
    pub amplitude: f64,
}

/// Dominant oscillation frequencies of `P(t)` in the single-mode model,
/// strongest first. The cutoff is raised until the ground state has
/// population below 1e-8 in the top two Fock levels.
pub fn single_mode_spectral_lines(
    params: &ModelParams,
    cutoff: usize,
    max_lines: usize,
) -> Result<Vec<SpectralLine>> {
    let mut cutoff = cutoff.max(2);
    let (energies, vecs, dim_fock) = loop {
        let h = build_single_mode_hamiltonian(params, cutoff)?;
        let (vals, vecs) = h
            .eigh(UPLO::Lower)
            .map_err(|e| Error::Backend(format!("single-mode eigensolve failed: {e}")))?;
        let ground = vecs.column(0);
        let mut tail = 0.0;
        for s in 0..2 {
            for n in cutoff.saturating_sub(2)..cutoff {
                tail += ground[s * cutoff + n].powi(2);
            }
        }
        if tail < 1e-8 {
            break (vals, vecs, cutoff);
        }
        cutoff = cutoff * 3 / 2 + 1;
        if cutoff > 4096 {
            return Err(Error::InvalidParameter(
                "single-mode cutoff did not converge below 4096 Fock levels".into(),
            ));
        }
    };
    let dim = 2 * dim_fock;
    // overlap of each eigenstate with |up, n=0>
    let c: Vec<f64> = (0..dim).map(|a| vecs[[0, a]]).collect();
    // spin-up projector in the eigenbasis
    let v_up = vecs.slice(s![0..dim_fock, ..]);
    let proj = v_up.t().dot(&v_up);
    let mut lines: Vec<SpectralLine> = Vec::new();
    for a in 0..dim {
        for b in (a + 1)..dim {
            let freq = (energies[b] - energies[a]).abs();
            let amp = 2.0 * c[a] * c[b] * proj[[b, a]];
            if freq > 1e-9 && amp.abs() > 1e-14 {
                lines.push(SpectralLine { frequency: freq, amplitude: amp });
            }
        }
    }
    // merge coincident frequencies (amplitudes add coherently)
    lines.sort_by(|x, y| x.frequency.total_cmp(&y.frequency));
    let mut merged: Vec<SpectralLine> = Vec::new();
    for line in lines {
        match merged.last_mut() {
            Some(last) if (line.frequency - last.frequency).abs() < 1e-6 => {
                last.amplitude += line.amplitude;
            }
            _ => merged.push(line),
        }
    }
    merged.sort_by(|x, y| y.amplitude.abs().total_cmp(&x.amplitude.abs()));
    merged.truncate(max_lines);
    Ok(merged)
}

/// Diagonal of the parity operator on one block: entry at `(mu, m)` is
/// `exp(i pi [m + s_z + (1 + (-1)^N)/4])`, which is +-1 for every allowed
/// combination.
pub fn parity_diagonal(label: &BlockLabel, n_spins: usize) -> Result<Array1<f64>> {
    if label.two_j > n_spins || (n_spins - label.two_j) % 2 != 0 {
        return Err(Error::InvalidSector { n_spins, two_j: label.two_j });
    }
    let b = label.bath_dim();
    let mut diag = Array1::zeros(label.block_dim());
    for mu in 0..2i64 {
        let s2 = 1 - 2 * mu; // 2 s_z
        for k in 0..b {
            // twice the exponent; always even
            let e2 = (2 * k as i64 - label.two_j as i64)
                + s2
                + if n_spins % 2 == 0 { 1 } else { 0 };
            debug_assert_eq!(e2.rem_euclid(2), 0);
            let exponent = e2 / 2;
            diag[label.flat(mu as usize, k)] =
                if exponent.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        }
    }
    Ok(diag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symmetry::{allowed_two_j, degeneracy_exact};
    use approx::assert_abs_diff_eq;

    fn params(n: usize, beta: Beta) -> ModelParams {
        ModelParams::new(1.0, 1.0, 0.1, n, beta).unwrap()
    }

    #[test]
    fn central_state_constructors() {
        assert_eq!(observ_up(&CentralState::up()), 1.0);
        assert_eq!(observ_up(&CentralState::down()), 0.0);
        assert_eq!(observ_up(&CentralState::plus()), 0.5);
        let s = CentralState::from_amplitudes(
            Complex64::new(0.6, 0.0),
            Complex64::new(0.0, 0.8),
        )
        .unwrap();
        assert_abs_diff_eq!(observ_up(&s), 0.36, epsilon = 1e-12);
        s.validate().unwrap();
        assert!(CentralState::from_amplitudes(
            Complex64::new(1.0, 0.0),
            Complex64::new(0.1, 0.0)
        )
        .is_err());
    }

    fn observ_up(s: &CentralState) -> f64 {
        s.rho[[0, 0]].re
    }

    #[test]
    fn central_state_eigen_pairs_match_lapack() {
        let states = [
            CentralState::plus(),
            CentralState::from_amplitudes(Complex64::new(0.6, 0.0), Complex64::new(0.48, 0.64))
                .unwrap(),
            CentralState::from_diagonal(0.3).unwrap(),
        ];
        for s in states {
            let want = hermitian_eigvals(&s.rho.view()).unwrap();
            let got = s.eigen_pairs();
            assert_abs_diff_eq!(got[0].0, want[1], epsilon = 1e-12);
            assert_abs_diff_eq!(got[1].0, want[0], epsilon = 1e-12);
            // eigenvector residual |rho v - q v|
            for (q, v) in got {
                for row in 0..2 {
                    let rv = s.rho[[row, 0]] * v[0] + s.rho[[row, 1]] * v[1];
                    assert!((rv - v[row] * q).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn free_block_hamiltonian_is_diagonal() {
        let p = ModelParams::new(0.7, 1.0, 0.0, 5, Beta::Finite(1.0)).unwrap();
        let label = BlockLabel::new(3);
        let h = build_block_hamiltonian(&p, &label).unwrap();
        for i in 0..label.block_dim() {
            for k in 0..label.block_dim() {
                if i != k {
                    assert_eq!(h.matrix[[i, k]], Complex64::new(0.0, 0.0));
                }
            }
        }
        // diagonal entries: +-omega0/2 + omega m
        assert_abs_diff_eq!(h.matrix[[0, 0]].re, 0.35 - 1.5, epsilon = 1e-14);
        assert_abs_diff_eq!(
            h.matrix[[label.flat(1, 3), label.flat(1, 3)]].re,
            -0.35 + 1.5,
            epsilon = 1e-14
        );
    }

    #[test]
    fn n1_block_matches_two_spin_tensor_hamiltonian() {
        // For N = 1 the only sector is the full two-spin space; compare
        // against the explicit tensor construction after basis reordering.
        let p = ModelParams::new(0.9, 1.0, 0.23, 1, Beta::Finite(0.0)).unwrap();
        let label = BlockLabel::new(1);
        let block = build_block_hamiltonian(&p, &label).unwrap();
        let full = build_full_hamiltonian(&p, 12).unwrap();
        // full basis |c b> with bit 0 meaning up: index 2*(1-c_up)+(1-b_up)...
        // map (mu, k): mu=0 up, k: m=-1/2 -> bath down. full bit: central bit 1,
        // bath bit 0; value 0 = up.
        let map = |mu: usize, k: usize| -> usize {
            let cbit = mu; // up -> 0
            let bbit = if k == 0 { 1 } else { 0 }; // m=-1/2 -> down -> 1
            (cbit << 1) | bbit
        };
        for mu in 0..2 {
            for k in 0..2 {
                for nu in 0..2 {
                    for kp in 0..2 {
                        let a = block.matrix[[label.flat(mu, k), label.flat(nu, kp)]].re;
                        let b = full[[map(mu, k), map(nu, kp)]];
                        assert_abs_diff_eq!(a, b, epsilon = 1e-13);
                    }
                }
            }
        }
    }

    #[test]
    fn big_sector_offdiagonal_count() {
        let p = params(201, Beta::Finite(1.0));
        let label = BlockLabel::new(201);
        let h = build_block_hamiltonian(&p, &label).unwrap();
        let d = label.block_dim();
        assert_eq!(d, 404);
        let mut nonzero_offdiag = 0;
        let mut herm: f64 = 0.0;
        for i in 0..d {
            for k in 0..d {
                herm = herm.max((h.matrix[[i, k]] - h.matrix[[k, i]].conj()).norm());
                if i != k && h.matrix[[i, k]].norm() > 0.0 {
                    nonzero_offdiag += 1;
                }
            }
        }
        assert_eq!(nonzero_offdiag, 2 * (2 * 201));
        assert!(herm <= HERMITICITY_TOL);
    }

    #[test]
    fn invalid_sector_rejected() {
        let p = params(4, Beta::Finite(0.0));
        assert!(matches!(
            build_block_hamiltonian(&p, &BlockLabel::new(3)),
            Err(Error::InvalidSector { .. })
        ));
    }

    #[test]
    fn initial_state_thermal_diagonal() {
        let p = params(4, Beta::Finite(1.0));
        let label = BlockLabel::new(2);
        let st = build_block_initial_state(&p, &CentralState::up(), &label).unwrap();
        st.validate().unwrap();
        // bath diagonal proportional to (e^omega, 1, e^-omega)
        let z = 1.0f64.exp() + 1.0 + (-1.0f64).exp();
        for (k, want) in [(0usize, 1.0f64.exp() / z), (1, 1.0 / z), (2, (-1.0f64).exp() / z)] {
            assert_abs_diff_eq!(
                st.rho[[label.flat(0, k), label.flat(0, k)]].re,
                want,
                epsilon = 1e-13
            );
        }
        // infinite temperature: bath factor = I / (2j+1)
        let p0 = params(4, Beta::Finite(0.0));
        let st0 = build_block_initial_state(&p0, &CentralState::up(), &label).unwrap();
        for k in 0..3 {
            assert_abs_diff_eq!(
                st0.rho[[label.flat(0, k), label.flat(0, k)]].re,
                1.0 / 3.0,
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn initial_state_zero_temperature_is_rank_one() {
        let p = params(5, Beta::Infinite);
        let label = BlockLabel::new(5);
        let st = build_block_initial_state(&p, &CentralState::up(), &label).unwrap();
        st.validate().unwrap();
        let eigs = hermitian_eigvals(&st.rho.view()).unwrap();
        let top = eigs.last().unwrap();
        assert_abs_diff_eq!(*top, 1.0, epsilon = 1e-12);
        assert!(eigs[eigs.len() - 2].abs() < 1e-12);
        // projector onto |up; m=-j> = flat(0, 0)
        assert_abs_diff_eq!(st.rho[[0, 0]].re, 1.0, epsilon = 1e-13);
    }

    #[test]
    fn full_hamiltonian_n1_free_diagonal() {
        let p = ModelParams::new(0.8, 1.0, 0.0, 1, Beta::Finite(0.0)).unwrap();
        let h = build_full_hamiltonian(&p, 12).unwrap();
        // basis |up up>, |up dn>, |dn up>, |dn dn>
        let want = [0.4 + 0.5, 0.4 - 0.5, -0.4 + 0.5, -0.4 - 0.5];
        for (i, w) in want.iter().enumerate() {
            assert_abs_diff_eq!(h[[i, i]], *w, epsilon = 1e-14);
        }
    }

    #[test]
    fn full_hamiltonian_n1_coupling_antidiagonal() {
        let p = ModelParams::new(1.0, 1.0, 0.1, 1, Beta::Finite(0.0)).unwrap();
        let h = build_full_hamiltonian(&p, 12).unwrap();
        for i in 0..4 {
            for k in 0..4 {
                let want = if i + k == 3 { 0.1 } else { 0.0 };
                if i != k {
                    assert_abs_diff_eq!(h[[i, k]], want, epsilon = 1e-15);
                }
            }
        }
    }

    #[test]
    fn full_hamiltonian_respects_cap() {
        let p = params(13, Beta::Finite(0.0));
        assert!(matches!(
            build_full_hamiltonian(&p, 12),
            Err(Error::ResourceLimit { .. })
        ));
    }

    #[test]
    fn full_spectrum_equals_block_spectra_with_multiplicity() {
        for n in [2usize, 3, 6] {
            let p = ModelParams::new(0.9, 1.0, 0.17, n, Beta::Finite(0.0)).unwrap();
            let full = build_full_hamiltonian(&p, 12).unwrap();
            let mut full_eigs = crate::linalg::symmetric_eigvals(&full.view()).unwrap();
            let mut block_eigs = Vec::new();
            for label in allowed_two_j(n).unwrap() {
                let h = block_hamiltonian_real(&p, &label);
                let eigs = crate::linalg::symmetric_eigvals(&h.view()).unwrap();
                let alpha: usize = degeneracy_exact(n, label.two_j)
                    .unwrap()
                    .try_into()
                    .unwrap();
                for e in eigs {
                    for _ in 0..alpha {
                        block_eigs.push(e);
                    }
                }
            }
            block_eigs.sort_by(f64::total_cmp);
            full_eigs.sort_by(f64::total_cmp);
            assert_eq!(full_eigs.len(), block_eigs.len());
            for (a, b) in full_eigs.iter().zip(block_eigs.iter()) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn single_mode_free_case_diagonal() {
        let p = ModelParams::new(0.8, 1.0, 0.0, 4, Beta::Infinite).unwrap();
        let h = build_single_mode_hamiltonian(&p, 3).unwrap();
        for n in 0..3 {
            assert_abs_diff_eq!(h[[n, n]], n as f64 + 0.4, epsilon = 1e-14);
            assert_abs_diff_eq!(h[[3 + n, 3 + n]], n as f64 - 0.4, epsilon = 1e-14);
        }
        assert!(build_single_mode_hamiltonian(&p, 1).is_err());
    }

    #[test]
    fn single_mode_small_cutoff_ground_energy() {
        // cutoff 2 keeps the 4x4 matrix small enough to check directly
        let p = ModelParams::new(1.0, 1.0, 0.25, 4, Beta::Infinite).unwrap();
        let h = build_single_mode_hamiltonian(&p, 2).unwrap();
        let eigs = crate::linalg::symmetric_eigvals(&h.view()).unwrap();
        let direct = crate::linalg::symmetric_eigvals(&h.view()).unwrap();
        assert_abs_diff_eq!(eigs[0], direct[0], epsilon = 1e-13);
        assert_eq!(h.dim(), (4, 4));
    }

    #[test]
    fn parity_values_match_formula() {
        // N even, m = 0, mu = up: exponent 1 -> -1
        let label = BlockLabel::new(2);
        let d = parity_diagonal(&label, 4).unwrap();
        assert_eq!(d[label.flat(0, 1)], -1.0); // k=1 -> m=0
        // N odd, m = -1/2, mu = up: exponent 0 -> +1
        let label = BlockLabel::new(1);
        let d = parity_diagonal(&label, 5).unwrap();
        assert_eq!(d[label.flat(0, 0)], 1.0);
    }

    #[test]
    fn parity_commutes_with_block_hamiltonian() {
        for (n, two_j) in [(4usize, 2usize), (5, 3), (6, 6), (9, 1)] {
            let p = params(n, Beta::Finite(0.5));
            let label = BlockLabel::new(two_j);
            let h = build_block_hamiltonian(&p, &label).unwrap();
            let par = parity_diagonal(&label, n).unwrap();
            let d = label.block_dim();
            for i in 0..d {
                for k in 0..d {
                    let conj = par[i] * h.matrix[[i, k]].re * par[k];
                    assert_abs_diff_eq!(conj, h.matrix[[i, k]].re, epsilon = 1e-13);
                }
            }
        }
    }

    #[test]
    fn parity_anticommutes_with_central_flips() {
        // P Sigma P = -Sigma for Sigma = sigma_x^(0) (x) I and sigma_y^(0) (x) I
        let n = 5;
        let label = BlockLabel::new(3);
        let par = parity_diagonal(&label, n).unwrap();
        let b = label.bath_dim();
        for k in 0..b {
            let i_up = label.flat(0, k);
            let i_dn = label.flat(1, k);
            // sigma_x entry |up><dn| at (i_up, i_dn): conjugation multiplies
            // by par[i_up] par[i_dn], which must be -1.
            assert_eq!(par[i_up] * par[i_dn], -1.0);
        }
    }
}
