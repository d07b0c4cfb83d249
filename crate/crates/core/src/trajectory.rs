use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A planar path sampled on a uniform time grid. Index `i` holds the position
/// after `i` steps of length `dt`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTrajectory")]
pub struct Trajectory {
    dt: f64,
    xs: Vec<f64>,
    ys: Vec<f64>,
}

#[derive(Deserialize)]
struct RawTrajectory {
    dt: f64,
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl TryFrom<RawTrajectory> for Trajectory {
    type Error = Error;

    fn try_from(raw: RawTrajectory) -> Result<Self> {
        Trajectory::new(raw.dt, raw.xs, raw.ys)
    }
}

impl Trajectory {
    pub fn new(dt: f64, xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        validate_columns(dt, &xs, &ys)?;
        Ok(Trajectory { dt, xs, ys })
    }

    /// Built by the simulators, which guarantee the invariants.
    pub(crate) fn from_parts(dt: f64, xs: Vec<f64>, ys: Vec<f64>) -> Self {
        debug_assert!(validate_columns(dt, &xs, &ys).is_ok());
        Trajectory { dt, xs, ys }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    /// Number of samples, `n_steps + 1`.
    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn n_steps(&self) -> usize {
        self.xs.len() - 1
    }

    pub fn duration(&self) -> f64 {
        self.n_steps() as f64 * self.dt
    }

    /// Displacement over step `i`, i.e. from sample `i` to `i + 1`.
    pub fn step(&self, i: usize) -> (f64, f64) {
        (self.xs[i + 1] - self.xs[i], self.ys[i + 1] - self.ys[i])
    }

    /// Applies `(x, y) -> f(x, y)` to every sample.
    pub fn map_points(&self, f: impl Fn(f64, f64) -> (f64, f64)) -> Result<Self> {
        let (xs, ys) = self.xs.iter().zip(&self.ys).map(|(&x, &y)| f(x, y)).unzip();
        Trajectory::new(self.dt, xs, ys)
    }

    pub fn into_parts(self) -> (f64, Vec<f64>, Vec<f64>) {
        (self.dt, self.xs, self.ys)
    }
}

pub(crate) fn validate_columns(dt: f64, xs: &[f64], ys: &[f64]) -> Result<()> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::validation(format!("dt must be finite and positive, got {dt}")));
    }
    if xs.len() != ys.len() {
        return Err(Error::validation(format!(
            "x and y series differ in length ({} vs {})",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::validation(format!(
            "a trajectory needs at least 2 samples, got {}",
            xs.len()
        )));
    }
    if let Some(i) = xs.iter().zip(ys).position(|(x, y)| !(x.is_finite() && y.is_finite())) {
        return Err(Error::validation(format!("non-finite coordinate at sample {i}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes() {
        assert!(Trajectory::new(1.0, vec![0.0], vec![0.0]).is_err());
        assert!(Trajectory::new(1.0, vec![0.0, 1.0], vec![0.0]).is_err());
        assert!(Trajectory::new(0.0, vec![0.0, 1.0], vec![0.0, 1.0]).is_err());
        assert!(Trajectory::new(1.0, vec![0.0, f64::NAN], vec![0.0, 1.0]).is_err());
        let t = Trajectory::new(0.5, vec![0.0, 1.0, 3.0], vec![0.0, 0.0, 1.0]).unwrap();
        assert_eq!(t.n_steps(), 2);
        assert_eq!(t.duration(), 1.0);
        assert_eq!(t.step(1), (2.0, 1.0));
    }

    #[test]
    fn deserialize_validates() {
        let bad = r#"{"dt": 1.0, "xs": [0.0], "ys": [0.0]}"#;
        assert!(serde_json::from_str::<Trajectory>(bad).is_err());
        let good = r#"{"dt": 1.0, "xs": [0.0, 1.0], "ys": [0.0, 2.0]}"#;
        assert_eq!(serde_json::from_str::<Trajectory>(good).unwrap().n_steps(), 1);
    }
}
