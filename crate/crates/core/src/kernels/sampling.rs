//! Inverse-transform samplers for the heavy-tailed laws.

use crate::error::{Error, Result};
use crate::kernels::params::{LwParams, StepLenParams};

fn check_unit(u: f64) -> Result<()> {
    if u > 0.0 && u < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("uniform variate must lie in (0, 1), got {u}")))
    }
}

/// Flight time from the Lomax density `psi(tau) = gamma tau0^gamma / (tau + tau0)^(1 + gamma)`.
///
/// Inverts `F(tau) = 1 - (tau0 / (tau + tau0))^gamma`, giving
/// `tau = tau0 (u^(-1/gamma) - 1)`.
pub fn sample_flight_time(params: &LwParams, u: f64) -> Result<f64> {
    params.validate()?;
    check_unit(u)?;
    Ok(flight_time_from_exp(params, -u.ln()))
}

/// Same inversion written in terms of `e = -ln u`, which keeps precision as `u -> 1`.
#[inline]
pub(crate) fn flight_time_from_exp(params: &LwParams, e: f64) -> f64 {
    params.tau0 * (e / params.levy_exponent).exp_m1()
}

/// Step length from the Pareto density `p(l) = nu l_min^nu / l^(nu + 1)`, `l >= l_min`.
pub fn sample_step_length(params: &StepLenParams, u: f64) -> Result<f64> {
    params.validate()?;
    check_unit(u)?;
    Ok(params.l_min * (-u.ln() / params.nu).exp())
}

/// Lomax CDF used by the flight-time sampler.
pub fn flight_time_cdf(params: &LwParams, tau: f64) -> f64 {
    if tau <= 0.0 {
        0.0
    } else {
        1.0 - (params.tau0 / (tau + params.tau0)).powf(params.levy_exponent)
    }
}
