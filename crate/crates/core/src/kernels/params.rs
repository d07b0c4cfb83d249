use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of the two-phase intermittent-search process.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsParams {
    /// Diffusion coefficient `D`; the diffusive step is `D * eta * sqrt(dt)` per axis.
    #[serde(rename = "D")]
    pub diffusion_coeff: f64,
    /// Ballistic speed `V_B`.
    #[serde(rename = "V_B")]
    pub ballistic_speed: f64,
    /// Switching rate ballistic -> diffusive.
    #[serde(rename = "lambda_BD")]
    pub rate_bd: f64,
    /// Switching rate diffusive -> ballistic.
    #[serde(rename = "lambda_DB")]
    pub rate_db: f64,
}

impl IsParams {
    pub const N_PARAMS: usize = 4;
    pub const NAMES: [&'static str; 4] = ["D", "V_B", "lambda_BD", "lambda_DB"];

    pub fn new(diffusion_coeff: f64, ballistic_speed: f64, rate_bd: f64, rate_db: f64) -> Result<Self> {
        let p = IsParams {
            diffusion_coeff,
            ballistic_speed,
            rate_bd,
            rate_db,
        };
        p.validate()?;
        Ok(p)
    }

    /// Checks the field invariants. Both rates being zero is accepted here;
    /// the simulator rejects it unless an initial phase is forced.
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("D", self.diffusion_coeff),
            ("V_B", self.ballistic_speed),
            ("lambda_BD", self.rate_bd),
            ("lambda_DB", self.rate_db),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(Error::validation(format!("{name} must be finite, got {value}")));
            }
            if value < 0.0 {
                return Err(Error::validation(format!("{name} must be non-negative, got {value}")));
            }
        }
        if self.diffusion_coeff == 0.0 && self.ballistic_speed == 0.0 {
            return Err(Error::validation("D and V_B cannot both be zero"));
        }
        Ok(())
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.diffusion_coeff, self.ballistic_speed, self.rate_bd, self.rate_db]
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        match v {
            &[d, vb, bd, db] => IsParams::new(d, vb, bd, db),
            _ => Err(Error::validation(format!("expected 4 IS parameters, got {}", v.len()))),
        }
    }

    /// Stationary probability of the ballistic phase, `None` when both rates vanish.
    pub fn stationary_ballistic(&self) -> Option<f64> {
        let total = self.rate_bd + self.rate_db;
        (total > 0.0).then(|| self.rate_db / total)
    }
}

/// Parameters of the planar constant-speed Lévy walk.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LwParams {
    /// Flight-time scale `tau0`.
    pub tau0: f64,
    /// Tail exponent `gamma` of the flight-time density.
    #[serde(rename = "gamma")]
    pub levy_exponent: f64,
    /// Walker speed `v`.
    #[serde(rename = "v")]
    pub speed: f64,
}

impl LwParams {
    pub const N_PARAMS: usize = 3;
    pub const NAMES: [&'static str; 3] = ["tau0", "gamma", "v"];

    pub fn new(tau0: f64, levy_exponent: f64, speed: f64) -> Result<Self> {
        let p = LwParams {
            tau0,
            levy_exponent,
            speed,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [("tau0", self.tau0), ("gamma", self.levy_exponent), ("v", self.speed)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::validation(format!(
                    "{name} must be finite and positive, got {value}"
                )));
            }
        }
        Ok(())
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.tau0, self.levy_exponent, self.speed]
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        match v {
            &[tau0, gamma, speed] => LwParams::new(tau0, gamma, speed),
            _ => Err(Error::validation(format!("expected 3 LW parameters, got {}", v.len()))),
        }
    }

    /// Mean flight time `tau0 / (gamma - 1)`, infinite for `gamma <= 1`.
    pub fn mean_flight_time(&self) -> f64 {
        if self.levy_exponent > 1.0 {
            self.tau0 / (self.levy_exponent - 1.0)
        } else {
            f64::INFINITY
        }
    }
}

/// Parameters of the power-law step-length density `p(l) = nu l_min^nu / l^(nu+1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepLenParams {
    pub l_min: f64,
    pub nu: f64,
}

impl StepLenParams {
    pub fn new(l_min: f64, nu: f64) -> Result<Self> {
        let p = StepLenParams { l_min, nu };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.l_min.is_finite() && self.l_min > 0.0) {
            return Err(Error::validation(format!("l_min must be positive, got {}", self.l_min)));
        }
        if !(self.nu > 1.0 && self.nu < 2.0) {
            return Err(Error::validation(format!("nu must lie in (1, 2), got {}", self.nu)));
        }
        Ok(())
    }
}

/// Phase of the intermittent process.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PhaseLabel {
    Ballistic,
    Diffusive,
}

impl PhaseLabel {
    pub fn flipped(self) -> Self {
        match self {
            PhaseLabel::Ballistic => PhaseLabel::Diffusive,
            PhaseLabel::Diffusive => PhaseLabel::Ballistic,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn is_params_reject_degenerate() {
        assert!(IsParams::new(0.0, 0.0, 1.0, 1.0).is_err());
        assert!(IsParams::new(-1.0, 1.0, 1.0, 1.0).is_err());
        assert!(IsParams::new(1.0, f64::NAN, 1.0, 1.0).is_err());
        assert!(IsParams::new(1.0, 0.0, 0.0, 0.0).is_ok());
    }

    #[test]
    fn stationary_distribution() {
        let p = IsParams::new(1.0, 1.0, 0.1, 0.3).unwrap();
        assert!((p.stationary_ballistic().unwrap() - 0.75).abs() < 1e-15);
        let p = IsParams::new(1.0, 1.0, 0.0, 0.3).unwrap();
        assert_eq!(p.stationary_ballistic(), Some(1.0));
        let p = IsParams::new(1.0, 1.0, 0.0, 0.0).unwrap();
        assert_eq!(p.stationary_ballistic(), None);
    }

    #[test]
    fn lw_params_validate() {
        assert!(LwParams::new(1.0, 1.5, 1.0).is_ok());
        assert!(LwParams::new(0.0, 1.5, 1.0).is_err());
        assert!(LwParams::new(1.0, -1.0, 1.0).is_err());
        assert!(LwParams::new(1.0, 1.5, f64::INFINITY).is_err());
    }

    #[test]
    fn step_len_exponent_range() {
        assert!(StepLenParams::new(1.0, 1.5).is_ok());
        assert!(StepLenParams::new(1.0, 2.0).is_err());
        assert!(StepLenParams::new(1.0, 1.0).is_err());
        assert!(StepLenParams::new(0.0, 1.5).is_err());
    }

    #[test]
    fn params_serialize_with_symbol_names() {
        let p = IsParams::new(1.0, 2.0, 0.05, 0.05).unwrap();
        let json = serde_json::to_value(p).unwrap();
        assert_eq!(json["V_B"], 2.0);
        assert_eq!(json["lambda_DB"], 0.05);
        let lw = LwParams::new(5.0, 1.5, 1.0).unwrap();
        let json = serde_json::to_value(lw).unwrap();
        assert_eq!(json["gamma"], 1.5);
    }
}
