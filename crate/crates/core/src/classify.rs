//! Γ-score classification between the intermittent and Lévy models.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitting::{fit_model, DataMeta, FitConfig, FitReport, ModelKind, FORMAT_VERSION};
use crate::moments::{empirical_moments, LagGrid, MomentCurve};
use crate::rng::derive_seed;
use crate::trajectory::Trajectory;

const TAG_FIT_IS: u64 = 1;
const TAG_FIT_LW: u64 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Intermittent,
    Levy,
}

impl Label {
    /// `Intermittent` iff `gamma > 0`; a zero score favours the Lévy walk.
    pub fn from_gamma(gamma: f64) -> Self {
        if gamma > 0.0 {
            Label::Intermittent
        } else {
            Label::Levy
        }
    }
}

/// `Γ = R̄²_IS - R̄²_LW`.
pub fn gamma_score(r2_is: f64, r2_lw: f64) -> Result<f64> {
    for r in [r2_is, r2_lw] {
        if !r.is_finite() {
            return Err(Error::domain(format!("adjusted R² must be finite, got {r}")));
        }
        if r > 1.0 {
            return Err(Error::domain(format!("adjusted R² cannot exceed 1, got {r}")));
        }
    }
    Ok(r2_is - r2_lw)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub format_version: u32,
    pub gamma: f64,
    pub label: Label,
    pub fit_is: FitReport,
    pub fit_lw: FitReport,
    pub data_curve: MomentCurve,
}

impl ClassificationReport {
    /// Checks that `gamma` and `label` agree with the embedded fits.
    pub fn is_consistent(&self) -> bool {
        self.gamma == self.fit_is.r2_adjusted - self.fit_lw.r2_adjusted && self.label == Label::from_gamma(self.gamma)
    }
}

/// Fits that completed before a classification failed.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PartialFits {
    pub fit_is: Option<FitReport>,
    pub fit_lw: Option<FitReport>,
}

/// Fits both families to the trajectory's moments and classifies by the sign of Γ.
///
/// The two fits share the data curve and use independent seeds derived from `seed`.
pub fn classify_trajectory(
    traj: &Trajectory,
    grid: &LagGrid,
    config: &FitConfig,
    seed: u64,
) -> Result<ClassificationReport> {
    config.validate()?;
    grid.check_fits_within(traj.n_steps())?;
    let data_curve = empirical_moments(traj, grid)?;
    let meta = DataMeta {
        dt: traj.dt(),
        n_steps: traj.n_steps(),
    };
    let (is, lw) = rayon::join(
        || fit_model(ModelKind::Intermittent, &data_curve, meta, config, derive_seed(seed, TAG_FIT_IS)),
        || fit_model(ModelKind::Levy, &data_curve, meta, config, derive_seed(seed, TAG_FIT_LW)),
    );
    let (fit_is, fit_lw) = match (is, lw) {
        (Ok(a), Ok(b)) => (a, b),
        (is, lw) => {
            let message = [is.as_ref().err(), lw.as_ref().err()]
                .into_iter()
                .flatten()
                .map(|e| e.to_string())
                .collect::<Vec<_>>()
                .join("; ");
            return Err(Error::Classification {
                message,
                partial: Box::new(PartialFits {
                    fit_is: is.ok(),
                    fit_lw: lw.ok(),
                }),
            });
        }
    };
    let gamma = gamma_score(fit_is.r2_adjusted, fit_lw.r2_adjusted)?;
    Ok(ClassificationReport {
        format_version: FORMAT_VERSION,
        gamma,
        label: Label::from_gamma(gamma),
        fit_is,
        fit_lw,
        data_curve,
    })
}
