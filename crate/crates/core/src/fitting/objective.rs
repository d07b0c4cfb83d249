//! Squared-log moment distances and the pooled adjusted R².

use crate::error::{Error, Result};
use crate::moments::MomentCurve;

fn check_positive(value: f64, what: &str) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("{what} must be positive and finite, got {value}")))
    }
}

/// `[ln(m_model / m_data)]^2`.
///
/// The ratio is always formed as larger over smaller, which makes the value
/// bitwise symmetric in its arguments and zero only for equal inputs.
pub fn log_distance(m_model: f64, m_data: f64) -> Result<f64> {
    check_positive(m_model, "model moment")?;
    check_positive(m_data, "data moment")?;
    let ratio = if m_model >= m_data { m_model / m_data } else { m_data / m_model };
    let l = ratio.ln();
    Ok(l * l)
}

/// Per-lag distances `(d_2, d_4)` between two curves on the same grid.
pub fn per_lag_distances(model: &MomentCurve, data: &MomentCurve) -> Result<(Vec<f64>, Vec<f64>)> {
    model.check_same_grid(data)?;
    let d2 = model.m2.iter().zip(&data.m2).map(|(&a, &b)| log_distance(a, b)).collect::<Result<Vec<_>>>()?;
    let d4 = model.m4.iter().zip(&data.m4).map(|(&a, &b)| log_distance(a, b)).collect::<Result<Vec<_>>>()?;
    Ok((d2, d4))
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Fit objective `J = mean_lags(d_2) + mean_lags(d_4)`.
pub fn objective(model: &MomentCurve, data: &MomentCurve) -> Result<f64> {
    let (d2, d4) = per_lag_distances(model, data)?;
    Ok(mean(&d2) + mean(&d4))
}

/// Wherry adjustment `1 - (1 - r2) (n - 1) / (n - p - 1)`.
pub fn adjust_r2(r2: f64, n_points: usize, n_params: usize) -> Result<f64> {
    if n_points <= n_params + 1 {
        return Err(Error::validation(format!(
            "{n_points} points cannot score a model with {n_params} parameters"
        )));
    }
    let n = n_points as f64;
    let p = n_params as f64;
    Ok(1.0 - (1.0 - r2) * (n - 1.0) / (n - p - 1.0))
}

/// Adjusted R² on pooled log-moment residuals.
///
/// Residuals `ln m_model - ln m_data` are pooled over both orders and every
/// lag (`n = 2 * lags` points); the total sum of squares is that of
/// `ln m_data` about its pooled mean. Constant data with a perfect fit scores
/// 1; constant data with any residual cannot be scored.
pub fn adjusted_r2(model: &MomentCurve, data: &MomentCurve, n_params: usize) -> Result<f64> {
    model.check_same_grid(data)?;
    for (&m, &d) in model.m2.iter().chain(&model.m4).zip(data.m2.iter().chain(&data.m4)) {
        check_positive(m, "model moment")?;
        check_positive(d, "data moment")?;
    }
    let log_data: Vec<f64> = data.m2.iter().chain(&data.m4).map(|m| m.ln()).collect();
    let log_model: Vec<f64> = model.m2.iter().chain(&model.m4).map(|m| m.ln()).collect();
    let n_points = log_data.len();
    let centre = mean(&log_data);
    let ss_tot: f64 = log_data.iter().map(|l| (l - centre).powi(2)).sum();
    let ss_res: f64 = log_model.iter().zip(&log_data).map(|(m, d)| (m - d).powi(2)).sum();
    if ss_tot == 0.0 {
        return if ss_res == 0.0 {
            Ok(1.0)
        } else {
            Err(Error::domain("non-scorable fit: data moments are constant"))
        };
    }
    adjust_r2(1.0 - ss_res / ss_tot, n_points, n_params)
}
