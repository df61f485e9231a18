//! Per-sector propagation engine.
//!
//! The block Hamiltonian is real symmetric and commutes with the parity
//! operator, whose diagonal splits the `2(2j+1)` block basis into two
//! equal-size sub-blocks of dimension `2j+1`. Working in the two parity
//! eigenbases quarters the cost of every dense product in the time loop.
//!
//! Observables need no state reconstruction at all: with
//! `rho~(t) = diag(u) rho~(0) diag(u)^*` in an eigenbasis, any fixed
//! observable is a bilinear form `u^T M u^*` with a precomputed `M`,
//! evaluated in O(dim^2) per time.
//!
//! Entropies need spectra of reduced states. The initial state is expanded
//! in its eigenbasis of product columns; evolving the column factor `F(t) =
//! V diag(u) C` costs two real GEMMs per parity block, and the bath/joint
//! spectra follow from Gram matrices of `F`, taken on whichever side is
//! smaller.

use ndarray::prelude::*;
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::Result;
use crate::linalg::{entropy_bits, hermitian_eigvals, product_eigvals, SplitMat};
use crate::model::{block_hamiltonian_real, parity_diagonal, thermal_bath_probs, CentralState};
use crate::symmetry::{BlockLabel, ModelParams};

/// Slack accepted when clipping reduced-state spectra to [0, 1].
const ENTROPY_EIG_SLACK: f64 = 1e-9;

struct BlockEig {
    eigvals: Vec<f64>,
    /// b x b orthogonal matrix; rows are block positions, columns eigenvectors.
    vecs: Array2<f64>,
    /// Rows `0..n_up` carry the central spin up, the rest down.
    n_up: usize,
}

struct CohForm {
    /// Bilinear kernel between source-block and partner-block eigenbases.
    m: SplitMat,
}

struct EntropyData {
    /// Column factor of the initial state in each block eigenbasis, b x r_blk.
    c_re: [Array2<f64>; 2],
    c_im: [Option<Array2<f64>>; 2],
    /// Global column (eigen-ensemble) indices held by each block.
    sup: [Vec<usize>; 2],
    disjoint: bool,
    r_total: usize,
    /// S(rho_j^SB) in bits; unitary evolution keeps the block spectrum, so
    /// this is computed once from the initial factor.
    joint_bits: f64,
}

pub(crate) struct SectorEngine {
    label: BlockLabel,
    blocks: [BlockEig; 2],
    /// (block, position) of every flat block index.
    place: Vec<(usize, usize)>,
    m_up: [Array2<f64>; 2],
    m_dn: [Array2<f64>; 2],
    coh: Option<[CohForm; 2]>,
    entropy: Option<EntropyData>,
}

pub(crate) struct SectorSeries {
    pub p_up: Vec<Complex64>,
    pub p_dn: Vec<Complex64>,
    pub coh: Vec<Complex64>,
    pub s_bath: Option<Vec<f64>>,
    pub s_joint: Option<Vec<f64>>,
}

struct Sample {
    p_up: Complex64,
    p_dn: Complex64,
    coh: Complex64,
    ent: Option<(f64, f64)>,
}

fn scale_rows(m: &ArrayView2<f64>, w: &[f64]) -> Array2<f64> {
    let mut out = m.to_owned();
    for (mut row, &s) in out.rows_mut().into_iter().zip(w.iter()) {
        row.map_inplace(|x| *x *= s);
    }
    out
}

impl SectorEngine {
    pub fn new(
        params: &ModelParams,
        rho_s0: &CentralState,
        label: BlockLabel,
        want_entropies: bool,
    ) -> Result<Self> {
        params.validate()?;
        rho_s0.validate()?;
        let b = label.bath_dim();
        let d = label.block_dim();
        let h = block_hamiltonian_real(params, &label);
        let parity = parity_diagonal(&label, params.n_spins)?;

        // split flat indices by parity sign; ascending flat order groups the
        // spin-up rows first within each block
        let mut flats: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
        let mut place = vec![(0usize, 0usize); d];
        for i in 0..d {
            let blk = if parity[i] > 0.0 { 0 } else { 1 };
            place[i] = (blk, flats[blk].len());
            flats[blk].push(i);
        }
        debug_assert_eq!(flats[0].len(), b);
        debug_assert_eq!(flats[1].len(), b);

        let blocks: [BlockEig; 2] = [0, 1].map(|blk| {
            let idx = &flats[blk];
            let mut hb = Array2::zeros((b, b));
            for (r, &fi) in idx.iter().enumerate() {
                for (c, &fk) in idx.iter().enumerate() {
                    hb[[r, c]] = h[[fi, fk]];
                }
            }
            let n_up = idx.iter().filter(|&&f| f < b).count();
            let (eigvals, vecs) = hb.eigh(UPLO::Lower).expect("block eigensolve");
            BlockEig { eigvals: eigvals.to_vec(), vecs, n_up }
        });
        #[cfg(debug_assertions)]
        for &fi in &flats[0] {
            for &fk in &flats[1] {
                debug_assert_eq!(h[[fi, fk]], 0.0, "parity blocks must not couple");
            }
        }

        let pi = thermal_bath_probs(params, &label);
        let k_up = |blk: usize| -> Vec<usize> {
            flats[blk][..blocks[blk].n_up].to_vec() // flat == k for mu = 0
        };
        let k_dn = |blk: usize| -> Vec<usize> {
            flats[blk][blocks[blk].n_up..]
                .iter()
                .map(|&f| f - b)
                .collect()
        };

        // bilinear kernels for the populations
        let q_up = rho_s0.rho[[0, 0]].re;
        let q_dn = rho_s0.rho[[1, 1]].re;
        let mut m_up: [Array2<f64>; 2] = [Array2::zeros((0, 0)), Array2::zeros((0, 0))];
        let mut m_dn = m_up.clone();
        for blk in 0..2 {
            let eig = &blocks[blk];
            let v_up = eig.vecs.slice(s![..eig.n_up, ..]);
            let v_dn = eig.vecs.slice(s![eig.n_up.., ..]);
            let pi_up: Vec<f64> = k_up(blk).iter().map(|&k| pi[k]).collect();
            let pi_dn: Vec<f64> = k_dn(blk).iter().map(|&k| pi[k]).collect();
            let rho0 = scale_rows(&v_up, &pi_up).t().dot(&v_up) * q_up
                + scale_rows(&v_dn, &pi_dn).t().dot(&v_dn) * q_dn;
            let proj_up = v_up.t().dot(&v_up);
            let proj_dn = v_dn.t().dot(&v_dn);
            m_up[blk] = &rho0 * &proj_up.t();
            m_dn[blk] = &rho0 * &proj_dn.t();
        }

        // cross-parity kernel for the coherence; absent for populations
        // diagonal in the energy basis of the central spin
        let c01 = rho_s0.rho[[0, 1]];
        let coh = if c01.norm() > 0.0 {
            let c10 = rho_s0.rho[[1, 0]];
            let forms = [0, 1].map(|r| {
                let rb = 1 - r;
                let v_up_r = blocks[r].vecs.slice(s![..blocks[r].n_up, ..]);
                let v_dn_r = blocks[r].vecs.slice(s![blocks[r].n_up.., ..]);
                let v_up_rb = blocks[rb].vecs.slice(s![..blocks[rb].n_up, ..]);
                let v_dn_rb = blocks[rb].vecs.slice(s![blocks[rb].n_up.., ..]);
                let pi_up_r: Vec<f64> = k_up(r).iter().map(|&k| pi[k]).collect();
                let pi_dn_r: Vec<f64> = k_dn(r).iter().map(|&k| pi[k]).collect();
                // rho~0 cross block: rows k of (mu=0, r) align with (mu=1, rb)
                let a = scale_rows(&v_up_r, &pi_up_r).t().dot(&v_dn_rb);
                let bmat = scale_rows(&v_dn_r, &pi_dn_r).t().dot(&v_up_rb);
                let rho0_cross = SplitMat {
                    re: &a * c01.re + &bmat * c10.re,
                    im: &a * c01.im + &bmat * c10.im,
                };
                // coherence observable in the eigenbases
                let obs = v_up_rb.t().dot(&v_dn_r);
                CohForm {
                    m: SplitMat {
                        re: &rho0_cross.re * &obs.t(),
                        im: &rho0_cross.im * &obs.t(),
                    },
                }
            });
            Some(forms)
        } else {
            None
        };

        let entropy = if want_entropies {
            Some(Self::build_entropy_data(rho_s0, &blocks, &place, &pi, b)?)
        } else {
            None
        };

        Ok(Self { label, blocks, place, m_up, m_dn, coh, entropy })
    }

    fn build_entropy_data(
        rho_s0: &CentralState,
        blocks: &[BlockEig; 2],
        place: &[(usize, usize)],
        pi: &[f64],
        b: usize,
    ) -> EntropyData {
        let pairs = rho_s0.eigen_pairs();
        // ensemble columns (s, k) with positive weight
        let mut cols: Vec<(usize, usize, f64)> = Vec::new();
        for (s, (q, _)) in pairs.iter().enumerate() {
            if *q <= 0.0 {
                continue;
            }
            for (k, &p) in pi.iter().enumerate() {
                let w = q * p;
                if w > 0.0 {
                    cols.push((s, k, w.sqrt()));
                }
            }
        }
        let r_total = cols.len();
        let mut sup: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
        let mut entries: [Vec<(usize, Complex64, usize)>; 2] = [Vec::new(), Vec::new()];
        for (alpha, &(s, k, sw)) in cols.iter().enumerate() {
            let chi = pairs[s].1;
            for mu in 0..2 {
                let amp = chi[mu] * sw;
                if amp.norm() == 0.0 {
                    continue;
                }
                let (blk, pos) = place[mu * b + k];
                sup[blk].push(alpha);
                entries[blk].push((pos, amp, alpha));
            }
        }
        let mut c_re: [Array2<f64>; 2] = [Array2::zeros((0, 0)), Array2::zeros((0, 0))];
        let mut c_im: [Option<Array2<f64>>; 2] = [None, None];
        for blk in 0..2 {
            let r_blk = sup[blk].len();
            let mut re = Array2::zeros((b, r_blk));
            let mut im = Array2::zeros((b, r_blk));
            let mut any_im = false;
            for (local, &(pos, amp, _)) in entries[blk].iter().enumerate() {
                // column = amp * (row `pos` of the block eigenvector matrix)
                for a in 0..b {
                    let v = blocks[blk].vecs[[pos, a]];
                    re[[a, local]] += amp.re * v;
                    if amp.im != 0.0 {
                        im[[a, local]] += amp.im * v;
                        any_im = true;
                    }
                }
            }
            c_re[blk] = re;
            c_im[blk] = if any_im { Some(im) } else { None };
        }
        let disjoint = {
            let mut seen = vec![false; r_total];
            for &a in &sup[0] {
                seen[a] = true;
            }
            !sup[1].iter().any(|&a| seen[a])
        };
        EntropyData { c_re, c_im, sup, disjoint, r_total }
    }

    fn phases(&self, t: f64) -> [(Vec<f64>, Vec<f64>); 2] {
        [0, 1].map(|blk| {
            let mut cos_v = Vec::with_capacity(self.blocks[blk].eigvals.len());
            let mut sin_v = Vec::with_capacity(self.blocks[blk].eigvals.len());
            for &lam in &self.blocks[blk].eigvals {
                let (s, c) = (lam * t).sin_cos();
                cos_v.push(c);
                sin_v.push(s);
            }
            (cos_v, sin_v)
        })
    }

    /// sum_ab u_a M_ab conj(u_b) for a real kernel, u = cos - i sin.
    fn bilinear_real(m: &Array2<f64>, cos_v: &[f64], sin_v: &[f64]) -> Complex64 {
        let cos_a = ArrayView1::from(cos_v);
        let sin_a = ArrayView1::from(sin_v);
        let v_re = m.dot(&cos_a);
        let v_im = m.dot(&sin_a);
        let mut re = 0.0;
        let mut im = 0.0;
        for a in 0..cos_v.len() {
            re += cos_v[a] * v_re[a] + sin_v[a] * v_im[a];
            im += cos_v[a] * v_im[a] - sin_v[a] * v_re[a];
        }
        Complex64::new(re, im)
    }

    /// sum_ab u^r_a M_ab conj(u^rb_b) for a complex kernel.
    fn bilinear_cross(
        m: &SplitMat,
        row_phases: &(Vec<f64>, Vec<f64>),
        col_phases: &(Vec<f64>, Vec<f64>),
    ) -> Complex64 {
        let (cos_c, sin_c) = col_phases;
        let cc = ArrayView1::from(cos_c.as_slice());
        let sc = ArrayView1::from(sin_c.as_slice());
        // v = M conj(u^rb), conj(u) = cos + i sin
        let v_re = m.re.dot(&cc) - m.im.dot(&sc);
        let v_im = m.re.dot(&sc) + m.im.dot(&cc);
        let (cos_r, sin_r) = row_phases;
        let mut re = 0.0;
        let mut im = 0.0;
        for a in 0..cos_r.len() {
            re += cos_r[a] * v_re[a] + sin_r[a] * v_im[a];
            im += cos_r[a] * v_im[a] - sin_r[a] * v_re[a];
        }
        Complex64::new(re, im)
    }

    fn evolved_factor(&self, ent: &EntropyData, blk: usize, ph: &(Vec<f64>, Vec<f64>)) -> SplitMat {
        let (cos_v, sin_v) = ph;
        let re = &ent.c_re[blk];
        let (rows, cols) = re.dim();
        let mut sc_re = Array2::zeros((rows, cols));
        let mut sc_im = Array2::zeros((rows, cols));
        match &ent.c_im[blk] {
            None => {
                for a in 0..rows {
                    let (c, s) = (cos_v[a], sin_v[a]);
                    for x in 0..cols {
                        let v = re[[a, x]];
                        sc_re[[a, x]] = c * v;
                        sc_im[[a, x]] = -s * v;
                    }
                }
            }
            Some(im) => {
                for a in 0..rows {
                    let (c, s) = (cos_v[a], sin_v[a]);
                    for x in 0..cols {
                        let vr = re[[a, x]];
                        let vi = im[[a, x]];
                        sc_re[[a, x]] = c * vr + s * vi;
                        sc_im[[a, x]] = c * vi - s * vr;
                    }
                }
            }
        }
        SplitMat {
            re: self.blocks[blk].vecs.dot(&sc_re),
            im: self.blocks[blk].vecs.dot(&sc_im),
        }
    }

    fn entropies_at(&self, ent: &EntropyData, phases: &[(Vec<f64>, Vec<f64>); 2]) -> Result<(f64, f64)> {
        let b = self.label.bath_dim();
        let f: [SplitMat; 2] = [0, 1].map(|blk| self.evolved_factor(ent, blk, &phases[blk]));

        let joint_eigs = if ent.disjoint {
            let mut eigs = product_eigvals(&f[0])?;
            eigs.extend(product_eigvals(&f[1])?);
            eigs
        } else {
            // shared columns: accumulate the full Gram over the joint support
            let mut g_re = Array2::zeros((ent.r_total, ent.r_total));
            let mut g_im = Array2::zeros((ent.r_total, ent.r_total));
            for blk in 0..2 {
                let g = f[blk].inner_gram();
                for (i, &gi) in ent.sup[blk].iter().enumerate() {
                    for (k, &gk) in ent.sup[blk].iter().enumerate() {
                        g_re[[gi, gk]] += g.re[[i, k]];
                        g_im[[gi, gk]] += g.im[[i, k]];
                    }
                }
            }
            hermitian_eigvals(&SplitMat { re: g_re, im: g_im }.to_c64().view())?
        };
        let s_joint = entropy_bits(&joint_eigs, ENTROPY_EIG_SLACK)?;

        let bath_eigs = if ent.disjoint {
            // bath state is block diagonal over the two k-parity groups
            let mut eigs = Vec::with_capacity(b);
            for g in 0..2 {
                let n_rows = self.blocks[g].n_up;
                let up = &f[g];
                let dn = &f[1 - g];
                let dn_start = self.blocks[1 - g].n_up;
                debug_assert_eq!(b - dn_start, n_rows);
                let stack = SplitMat {
                    re: ndarray::concatenate![
                        Axis(1),
                        up.re.slice(s![..n_rows, ..]),
                        dn.re.slice(s![dn_start.., ..])
                    ],
                    im: ndarray::concatenate![
                        Axis(1),
                        up.im.slice(s![..n_rows, ..]),
                        dn.im.slice(s![dn_start.., ..])
                    ],
                };
                eigs.extend(product_eigvals(&stack)?);
            }
            eigs
        } else {
            // scatter block rows into full bath-indexed factors
            let mut a_re = Array2::zeros((b, 2 * ent.r_total));
            let mut a_im = Array2::zeros((b, 2 * ent.r_total));
            for k in 0..b {
                for mu in 0..2 {
                    let (blk, pos) = self.place[mu * b + k];
                    for (local, &alpha) in ent.sup[blk].iter().enumerate() {
                        a_re[[k, mu * ent.r_total + alpha]] = f[blk].re[[pos, local]];
                        a_im[[k, mu * ent.r_total + alpha]] = f[blk].im[[pos, local]];
                    }
                }
            }
            product_eigvals(&SplitMat { re: a_re, im: a_im })?
        };
        let s_bath = entropy_bits(&bath_eigs, ENTROPY_EIG_SLACK)?;
        Ok((s_bath, s_joint))
    }

    fn evaluate(&self, t: f64) -> Result<Sample> {
        let phases = self.phases(t);
        let mut p_up = Complex64::new(0.0, 0.0);
        let mut p_dn = Complex64::new(0.0, 0.0);
        for blk in 0..2 {
            let (cos_v, sin_v) = &phases[blk];
            p_up += Self::bilinear_real(&self.m_up[blk], cos_v, sin_v);
            p_dn += Self::bilinear_real(&self.m_dn[blk], cos_v, sin_v);
        }
        let mut coh = Complex64::new(0.0, 0.0);
        if let Some(forms) = &self.coh {
            for r in 0..2 {
                coh += Self::bilinear_cross(&forms[r].m, &phases[r], &phases[1 - r]);
            }
        }
        let ent = match &self.entropy {
            Some(data) => Some(self.entropies_at(data, &phases)?),
            None => None,
        };
        Ok(Sample { p_up, p_dn, coh, ent })
    }

    pub fn evaluate_grid(&self, grid: &super::TimeGrid) -> SectorSeries {
        let samples: Vec<Sample> = (0..grid.n_steps)
            .into_par_iter()
            .map(|i| self.evaluate(grid.time(i)).expect("sector evaluation"))
            .collect();
        let mut series = SectorSeries {
            p_up: Vec::with_capacity(samples.len()),
            p_dn: Vec::with_capacity(samples.len()),
            coh: Vec::with_capacity(samples.len()),
            s_bath: self.entropy.as_ref().map(|_| Vec::with_capacity(samples.len())),
            s_joint: self.entropy.as_ref().map(|_| Vec::with_capacity(samples.len())),
        };
        for s in samples {
            series.p_up.push(s.p_up);
            series.p_dn.push(s.p_dn);
            series.coh.push(s.coh);
            if let Some((sb, sj)) = s.ent {
                series.s_bath.as_mut().unwrap().push(sb);
                series.s_joint.as_mut().unwrap().push(sj);
            }
        }
        series
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::{eigendecompose, evolve_block, reduce_to_bath, reduce_to_central};
    use crate::model::{build_block_hamiltonian, build_block_initial_state};
    use crate::symmetry::{allowed_two_j, Beta};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Exhaustive cross-check of the parity-split engine against the plain
    /// dense operations, over sectors, temperatures, and initial states.
    #[test]
    fn engine_matches_plain_path() {
        let inits = [
            CentralState::up(),
            CentralState::down(),
            CentralState::plus(),
            CentralState::from_diagonal(0.3).unwrap(),
            CentralState::from_amplitudes(c(0.6, 0.0), c(0.48, 0.64)).unwrap(),
        ];
        for n in [1usize, 2, 3, 4, 5, 6] {
            for beta in [Beta::Finite(0.0), Beta::Finite(0.9), Beta::Infinite] {
                let params = ModelParams::new(0.8, 1.0, 0.21, n, beta).unwrap();
                for label in allowed_two_j(n).unwrap() {
                    for init in &inits {
                        let engine = SectorEngine::new(&params, init, label, true).unwrap();
                        let h = build_block_hamiltonian(&params, &label).unwrap();
                        let eig = eigendecompose(&h).unwrap();
                        let st0 = build_block_initial_state(&params, init, &label).unwrap();
                        for t in [0.0, 0.37, 2.9, 11.0] {
                            let sample = engine.evaluate(t).unwrap();
                            let evolved = evolve_block(&eig, &st0, t).unwrap();
                            let rc = reduce_to_central(&evolved);
                            let diff_up = (sample.p_up - rc.rho[[0, 0]]).norm();
                            let diff_dn = (sample.p_dn - rc.rho[[1, 1]]).norm();
                            let diff_coh = (sample.coh - rc.rho[[1, 0]]).norm();
                            assert!(
                                diff_up < 1e-11 && diff_dn < 1e-11 && diff_coh < 1e-11,
                                "N={n} two_j={} beta={beta:?} t={t}: {diff_up:.2e} {diff_dn:.2e} {diff_coh:.2e}",
                                label.two_j
                            );

                            // entropies vs dense partial traces
                            let (sb, sj) = sample.ent.unwrap();
                            let rb = reduce_to_bath(&evolved);
                            let want_sb = entropy_bits(
                                &hermitian_eigvals(&rb.view()).unwrap(),
                                1e-9,
                            )
                            .unwrap();
                            let want_sj = entropy_bits(
                                &hermitian_eigvals(&evolved.rho.view()).unwrap(),
                                1e-9,
                            )
                            .unwrap();
                            assert!(
                                (sb - want_sb).abs() < 1e-9,
                                "bath entropy N={n} two_j={} beta={beta:?} t={t}: {sb} vs {want_sb}",
                                label.two_j
                            );
                            assert!(
                                (sj - want_sj).abs() < 1e-9,
                                "joint entropy N={n} two_j={} beta={beta:?} t={t}: {sj} vs {want_sj}",
                                label.two_j
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn engine_population_trace_is_one() {
        let params = ModelParams::new(1.0, 1.0, 0.1, 21, Beta::Finite(0.5)).unwrap();
        let label = BlockLabel::new(11);
        let engine = SectorEngine::new(&params, &CentralState::plus(), label, false).unwrap();
        for t in [0.0, 1.7, 23.0] {
            let s = engine.evaluate(t).unwrap();
            let tr = s.p_up + s.p_dn;
            assert!((tr - c(1.0, 0.0)).norm() < 1e-12);
            assert!(s.p_up.im.abs() < 1e-13);
        }
    }

    #[test]
    fn diagonal_initial_states_have_exactly_zero_coherence() {
        let params = ModelParams::new(1.0, 1.0, 0.2, 8, Beta::Finite(0.3)).unwrap();
        let label = BlockLabel::new(4);
        let engine = SectorEngine::new(&params, &CentralState::up(), label, false).unwrap();
        for t in [0.0, 3.3, 47.0] {
            let s = engine.evaluate(t).unwrap();
            assert_eq!(s.coh, c(0.0, 0.0));
        }
    }
}
