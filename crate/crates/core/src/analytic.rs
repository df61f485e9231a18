//! Closed-form reference quantities: the bath correlation function in the
//! interaction picture, its brute-force numerical counterpart, and the
//! collective Rabi frequency.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::symmetry::{Beta, ModelParams};

/// One sample of the bath correlation function at time difference `dt`.
#[derive(Debug, Clone, Copy)]
pub struct CorrelationSample {
    pub dt: f64,
    pub value: Complex64,
}

/// Occupation `<sigma_+ sigma_->` of a single thermal bath spin,
/// `exp(-beta omega / 2) / (2 cosh(beta omega / 2))`.
fn thermal_up_population(params: &ModelParams) -> f64 {
    match params.beta {
        Beta::Infinite => 0.0,
        // e^{-x}/(2 cosh x) = 1/(1 + e^{2x}), stable for any beta >= 0
        Beta::Finite(beta) => 1.0 / (1.0 + (beta * params.omega).exp()),
    }
}

/// Bath correlation function `<Gamma'(t') Gamma(t)>` as a function of
/// `dt = t - t'`, in the closed form
/// `g^2 N exp(-beta omega/2) / (2 cosh(beta omega/2)) * exp(-i omega dt / 2)`.
///
/// The modulus carries no `dt` dependence: the bath never loses memory. The
/// phase exponent is implemented with the factor 1/2 exactly as the formula
/// states it; [`correlation_phase_report`] compares it against the phase the
/// microscopic average actually produces.
pub fn bath_correlation(params: &ModelParams, dt: f64) -> CorrelationSample {
    let modulus = params.g * params.g * params.n_spins as f64 * thermal_up_population(params);
    let value = Complex64::from_polar(modulus, -params.omega * dt / 2.0);
    CorrelationSample { dt, value }
}

/// Brute-force `<Gamma'(t') Gamma(t)>` over the exact product thermal state,
/// with `Gamma(t) = g sum_i sigma_-^(i)` evolved numerically in the
/// interaction picture of the free bath Hamiltonian. Exponential in `N`;
/// gated by `cap`.
pub fn bath_correlation_numeric(
    params: &ModelParams,
    t: f64,
    t_prime: f64,
    cap: usize,
) -> Result<Complex64> {
    params.validate()?;
    let n = params.n_spins;
    if n > cap {
        return Err(Error::ResourceLimit { n_spins: n, cap });
    }
    let dim = 1usize << n;
    // free bath energies; bit value 0 is spin up
    let energy = |x: usize| -> f64 {
        let down = x.count_ones() as f64;
        params.omega / 2.0 * ((n as f64 - down) - down)
    };
    // thermal weights of the product Gibbs state
    let weights: Vec<f64> = match params.beta {
        Beta::Infinite => (0..dim).map(|x| if x == dim - 1 { 1.0 } else { 0.0 }).collect(),
        Beta::Finite(beta) => {
            let p_up = 1.0 / (1.0 + (beta * params.omega).exp());
            let p_dn = 1.0 - p_up;
            (0..dim)
                .map(|x| {
                    let down = x.count_ones();
                    p_up.powi((n as u32 - down) as i32) * p_dn.powi(down as i32)
                })
                .collect()
        }
    };
    // Gamma(t)[y, x] = g e^{i(e_y - e_x) t} (sum_i sigma_-)[y, x]
    let mut acc = Complex64::new(0.0, 0.0);
    for x in 0..dim {
        if weights[x] == 0.0 {
            continue;
        }
        for i in 0..n {
            if (x >> i) & 1 == 0 {
                // spin i is up: sigma_-^(i) maps |x> to |y>
                let y = x | (1 << i);
                let phase = (energy(y) - energy(x)) * (t - t_prime);
                acc += weights[x]
                    * params.g
                    * params.g
                    * Complex64::from_polar(1.0, phase);
            }
        }
    }
    Ok(acc)
}

/// Collective Rabi frequency `2 sqrt(N) g`.
pub fn rabi_frequency(params: &ModelParams) -> f64 {
    2.0 * (params.n_spins as f64).sqrt() * params.g
}

/// Comparison of the phase exponent of the printed correlation formula
/// against the numerically observed one.
#[derive(Debug, Clone, Copy)]
pub struct PhaseReport {
    /// Angular frequency of the phase in the printed formula (`omega / 2`).
    pub formula_frequency: f64,
    /// Angular frequency observed in the microscopic thermal average.
    pub observed_frequency: f64,
    pub formula_modulus: f64,
    pub observed_modulus: f64,
}

impl PhaseReport {
    /// Ratio observed/formula; 1 would mean the printed exponent matches.
    pub fn frequency_ratio(&self) -> f64 {
        self.observed_frequency / self.formula_frequency
    }
}

/// Measure the correlation phase frequency from the numerical average and
/// set it against the printed formula. Requires a finite-temperature bath
/// with nonzero coupling so the correlation does not vanish.
pub fn correlation_phase_report(params: &ModelParams, cap: usize) -> Result<PhaseReport> {
    if params.beta.is_infinite() {
        return Err(Error::InvalidParameter(
            "phase comparison needs a nonvanishing correlation (finite beta)".into(),
        ));
    }
    if params.g == 0.0 {
        return Err(Error::InvalidParameter(
            "phase comparison needs g != 0".into(),
        ));
    }
    // |arg| stays below pi for omega * dt / 2 < pi; one sample suffices for a
    // pure exponential, a second confirms linearity.
    let dt = 0.5 / params.omega;
    let c1 = bath_correlation_numeric(params, dt, 0.0, cap)?;
    let c2 = bath_correlation_numeric(params, 2.0 * dt, 0.0, cap)?;
    let f1 = -c1.arg() / dt;
    let f2 = -c2.arg() / (2.0 * dt);
    if (f1 - f2).abs() > 1e-8 * params.omega {
        return Err(Error::InvalidInput(format!(
            "correlation phase is not a single exponential: {f1} vs {f2}"
        )));
    }
    Ok(PhaseReport {
        formula_frequency: params.omega / 2.0,
        observed_frequency: f1,
        formula_modulus: bath_correlation(params, dt).value.norm(),
        observed_modulus: c1.norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn params(n: usize, beta: Beta, g: f64) -> ModelParams {
        ModelParams::new(1.0, 1.0, g, n, beta).unwrap()
    }

    #[test]
    fn infinite_temperature_modulus() {
        // beta = 0: modulus g^2 N / 2
        let p = params(5, Beta::Finite(0.0), 0.3);
        let c = bath_correlation(&p, 0.8);
        assert_abs_diff_eq!(c.value.norm(), 0.3 * 0.3 * 5.0 / 2.0, epsilon = 1e-14);
    }

    #[test]
    fn zero_temperature_correlation_vanishes() {
        let p = params(4, Beta::Infinite, 0.2);
        assert_eq!(bath_correlation(&p, 1.3).value.norm(), 0.0);
        assert_eq!(
            bath_correlation_numeric(&p, 2.0, 0.5, 12).unwrap().norm(),
            0.0
        );
    }

    #[test]
    fn equal_times_value_is_real_positive() {
        let p = params(6, Beta::Finite(1.0), 0.1);
        let c = bath_correlation(&p, 0.0);
        assert_abs_diff_eq!(c.value.im, 0.0, epsilon = 1e-15);
        let want = 0.01 * 6.0 * (-0.5f64).exp() / (2.0 * (0.5f64).cosh());
        assert_abs_diff_eq!(c.value.re, want, epsilon = 1e-14);
    }

    #[test]
    fn modulus_constant_in_dt() {
        let p = params(7, Beta::Finite(0.7), 0.15);
        let m0 = bath_correlation(&p, 0.0).value.norm();
        for dt in [0.3, 1.7, 42.0, 500.0] {
            assert_eq!(bath_correlation(&p, dt).value.norm(), m0);
        }
    }

    #[test]
    fn numeric_oracle_matches_modulus() {
        for n in [1usize, 3, 6, 8] {
            for beta in [0.0, 0.5, 1.0, 3.0] {
                let p = params(n, Beta::Finite(beta), 0.1);
                for (t, tp) in [(0.0, 0.0), (1.3, 0.4), (7.0, 2.2)] {
                    let numeric = bath_correlation_numeric(&p, t, tp, 12).unwrap();
                    let formula = bath_correlation(&p, t - tp);
                    assert!(
                        (numeric.norm() - formula.value.norm()).abs() <= 1e-12,
                        "N={n} beta={beta} t={t} t'={tp}"
                    );
                }
            }
        }
    }

    #[test]
    fn single_spin_infinite_temperature() {
        let p = params(1, Beta::Finite(0.0), 0.2);
        let c = bath_correlation_numeric(&p, 1.0, 1.0, 12).unwrap();
        assert_abs_diff_eq!(c.re, 0.04 / 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(c.im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn numeric_cap_enforced() {
        let p = params(13, Beta::Finite(0.5), 0.1);
        assert!(matches!(
            bath_correlation_numeric(&p, 0.0, 0.0, 12),
            Err(Error::ResourceLimit { .. })
        ));
    }

    #[test]
    fn observed_phase_runs_at_omega_not_half() {
        let p = params(6, Beta::Finite(1.0), 0.1);
        let report = correlation_phase_report(&p, 12).unwrap();
        assert_abs_diff_eq!(report.observed_frequency, p.omega, epsilon = 1e-10);
        assert_abs_diff_eq!(report.formula_frequency, p.omega / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(report.frequency_ratio(), 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(
            report.observed_modulus,
            report.formula_modulus,
            epsilon = 1e-12
        );
    }

    #[test]
    fn rabi_frequency_values() {
        assert_abs_diff_eq!(rabi_frequency(&params(1, Beta::Finite(0.0), 0.5)), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(rabi_frequency(&params(4, Beta::Finite(0.0), 0.1)), 0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(
            rabi_frequency(&params(201, Beta::Finite(0.0), 0.1)),
            2.8355,
            epsilon = 5e-4
        );
    }
}
