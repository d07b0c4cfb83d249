//! Empirical velocity moments over a lag grid, and Monte-Carlo model moments.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::intermittent::{self, IsNoise};
use crate::kernels::levy;
use crate::kernels::{IsParams, LwParams, PhaseLabel};
use crate::trajectory::Trajectory;

/// Minimum number of lags a grid must hold.
pub const MIN_LAGS: usize = 4;
/// Default number of log-spaced lags before integer snapping.
pub const DEFAULT_LAG_COUNT: usize = 25;

/// Strictly increasing lag times, each a whole number of steps of `dt`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLagGrid")]
pub struct LagGrid {
    dt: f64,
    steps: Vec<usize>,
}

#[derive(Deserialize)]
struct RawLagGrid {
    dt: f64,
    steps: Vec<usize>,
}

impl TryFrom<RawLagGrid> for LagGrid {
    type Error = Error;

    fn try_from(raw: RawLagGrid) -> Result<Self> {
        LagGrid::from_steps(raw.dt, raw.steps)
    }
}

impl LagGrid {
    pub fn from_steps(dt: f64, steps: Vec<usize>) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::validation(format!("dt must be finite and positive, got {dt}")));
        }
        if steps.len() < MIN_LAGS {
            return Err(Error::validation(format!(
                "a lag grid needs at least {MIN_LAGS} lags, got {}",
                steps.len()
            )));
        }
        if steps[0] == 0 {
            return Err(Error::validation("lags must be at least one time step"));
        }
        if steps.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::validation("lags must be strictly increasing"));
        }
        Ok(LagGrid { dt, steps })
    }

    /// Builds a grid from lag times, which must be whole multiples of `dt`
    /// up to a relative tolerance of 1e-9.
    pub fn from_times(dt: f64, times: &[f64]) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::validation(format!("dt must be finite and positive, got {dt}")));
        }
        let steps = times
            .iter()
            .map(|&t| {
                let k = (t / dt).round();
                if !t.is_finite() || k < 1.0 || (t - k * dt).abs() > 1e-9 * t.abs().max(dt) {
                    Err(Error::validation(format!("lag {t} is not a positive multiple of dt = {dt}")))
                } else {
                    Ok(k as usize)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        LagGrid::from_steps(dt, steps)
    }

    /// `count` log-spaced lags from `dt` to `duration / 10`, snapped to whole
    /// steps and deduplicated.
    pub fn log_spaced(dt: f64, n_steps: usize, count: usize) -> Result<Self> {
        if count < MIN_LAGS {
            return Err(Error::validation(format!("lag count must be at least {MIN_LAGS}")));
        }
        let max_step = (n_steps / 10).max(1);
        let ln_max = (max_step as f64).ln();
        let mut steps: Vec<usize> = (0..count)
            .map(|j| {
                let frac = j as f64 / (count - 1) as f64;
                ((frac * ln_max).exp().round() as usize).clamp(1, max_step)
            })
            .collect();
        steps.dedup();
        LagGrid::from_steps(dt, steps)
            .map_err(|e| Error::validation(format!("trajectory too short for a lag grid ({e})")))
    }

    /// Default grid for a trajectory.
    pub fn default_for(traj: &Trajectory) -> Result<Self> {
        LagGrid::log_spaced(traj.dt(), traj.n_steps(), DEFAULT_LAG_COUNT)
    }

    /// Checks that the longest lag is at most a quarter of the series
    /// duration, as fitting requires.
    pub fn check_fits_within(&self, n_steps: usize) -> Result<()> {
        let max = *self.steps.last().expect("grid is non-empty");
        if 4 * max > n_steps {
            return Err(Error::validation(format!(
                "longest lag ({max} steps) exceeds a quarter of the series ({n_steps} steps)"
            )));
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> &[usize] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.steps.iter().map(|&k| k as f64 * self.dt).collect()
    }

    fn same_as(&self, other: &LagGrid) -> bool {
        self.steps == other.steps && self.dt == other.dt
    }
}

/// Second and fourth velocity moments per lag.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentCurve {
    pub lags: LagGrid,
    pub m2: Vec<f64>,
    pub m4: Vec<f64>,
    pub n_pairs: Vec<u64>,
}

impl MomentCurve {
    pub fn new(lags: LagGrid, m2: Vec<f64>, m4: Vec<f64>, n_pairs: Vec<u64>) -> Result<Self> {
        let n = lags.len();
        if m2.len() != n || m4.len() != n || n_pairs.len() != n {
            return Err(Error::validation("moment arrays must match the lag count"));
        }
        Ok(MomentCurve { lags, m2, m4, n_pairs })
    }

    pub fn len(&self) -> usize {
        self.lags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lags.is_empty()
    }

    pub(crate) fn check_same_grid(&self, other: &MomentCurve) -> Result<()> {
        if self.lags.same_as(&other.lags) {
            Ok(())
        } else {
            Err(Error::validation("moment curves are defined on different lag grids"))
        }
    }

    /// True when every moment is strictly positive and finite.
    pub fn is_scorable(&self) -> bool {
        self.m2.iter().chain(&self.m4).all(|m| m.is_finite() && *m > 0.0)
    }
}

/// Sums of `s` and `s^2` over all start indices, where `s = |r(t + lag) - r(t)|^2`.
fn displacement_power_sums(xs: &[f64], ys: &[f64], lag: usize) -> (f64, f64) {
    #[cfg(target_arch = "x86_64")]
    if is_x86_feature_detected!("avx2") {
        // SAFETY: the CPU supports AVX2.
        return unsafe { power_sums_avx2(xs, ys, lag) };
    }
    power_sums(xs, ys, lag)
}

// Wider registers only; no FMA, so results match the baseline build bit for bit.
#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2")]
unsafe fn power_sums_avx2(xs: &[f64], ys: &[f64], lag: usize) -> (f64, f64) {
    power_sums(xs, ys, lag)
}

/// Squared displacements are staged through a small block buffer and reduced
/// into eight fixed accumulators; the summation order depends only on the
/// series length, never on the target CPU.
#[inline(always)]
fn power_sums(xs: &[f64], ys: &[f64], lag: usize) -> (f64, f64) {
    const LANES: usize = 8;
    const BLOCK: usize = 256;
    let m = xs.len() - lag;
    let (x0, x1) = (&xs[..m], &xs[lag..]);
    let (y0, y1) = (&ys[..m], &ys[lag..]);
    let mut acc2 = [0.0f64; LANES];
    let mut acc4 = [0.0f64; LANES];
    let mut block = [0.0f64; BLOCK];
    let mut start = 0;
    while start + BLOCK <= m {
        let end = start + BLOCK;
        let (xa, xb) = (&x0[start..end], &x1[start..end]);
        let (ya, yb) = (&y0[start..end], &y1[start..end]);
        for i in 0..BLOCK {
            let dx = xb[i] - xa[i];
            let dy = yb[i] - ya[i];
            block[i] = dx * dx + dy * dy;
        }
        for chunk in block.chunks_exact(LANES) {
            let chunk: &[f64; LANES] = chunk.try_into().unwrap();
            for l in 0..LANES {
                acc2[l] += chunk[l];
                acc4[l] += chunk[l] * chunk[l];
            }
        }
        start = end;
    }
    let mut s2 = 0.0;
    let mut s4 = 0.0;
    for l in 0..LANES {
        s2 += acc2[l];
        s4 += acc4[l];
    }
    for i in start..m {
        let dx = x1[i] - x0[i];
        let dy = y1[i] - y0[i];
        let s = dx * dx + dy * dy;
        s2 += s;
        s4 += s * s;
    }
    (s2, s4)
}

fn moments_of_columns(xs: &[f64], ys: &[f64], dt: f64, grid: &LagGrid) -> Result<MomentCurve> {
    if (grid.dt - dt).abs() > 1e-9 * dt {
        return Err(Error::validation(format!(
            "lag grid step {} does not match trajectory dt {dt}",
            grid.dt
        )));
    }
    let n_steps = xs.len() - 1;
    let mut m2 = Vec::with_capacity(grid.len());
    let mut m4 = Vec::with_capacity(grid.len());
    let mut n_pairs = Vec::with_capacity(grid.len());
    for &k in &grid.steps {
        if k >= n_steps {
            return Err(Error::validation(format!(
                "lag of {k} steps is not shorter than the series ({n_steps} steps)"
            )));
        }
        let (s2, s4) = displacement_power_sums(xs, ys, k);
        let pairs = xs.len() - k;
        let t_s = k as f64 * dt;
        let t2 = t_s * t_s;
        m2.push(s2 / pairs as f64 / t2);
        m4.push(s4 / pairs as f64 / (t2 * t2));
        n_pairs.push(pairs as u64);
    }
    Ok(MomentCurve {
        lags: grid.clone(),
        m2,
        m4,
        n_pairs,
    })
}

/// Time-averaged moments `m_k(t_s) = < |v(t, t_s)|^k >_t` for `k = 2, 4`,
/// with `v(t, t_s) = (r(t + t_s) - r(t)) / t_s`, averaged over every start
/// index.
pub fn empirical_moments(traj: &Trajectory, grid: &LagGrid) -> Result<MomentCurve> {
    moments_of_columns(traj.xs(), traj.ys(), traj.dt(), grid)
}

/// Model family together with its parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelParams {
    Intermittent(IsParams),
    Levy(LwParams),
}

/// Size and seeding of a Monte-Carlo ensemble.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub size: usize,
    pub n_steps: usize,
    pub seed: u64,
}

impl EnsembleSpec {
    fn validate(&self) -> Result<()> {
        if self.size < 1 {
            return Err(Error::validation("ensemble size must be at least 1"));
        }
        if self.n_steps < 1 {
            return Err(Error::validation("ensemble trajectories need at least one step"));
        }
        Ok(())
    }
}

/// Member-wise accumulation in index order keeps the mean independent of
/// how members were scheduled across threads.
fn ensemble_mean(grid: &LagGrid, members: Vec<MomentCurve>) -> MomentCurve {
    let n = grid.len();
    let mut m2 = vec![0.0; n];
    let mut m4 = vec![0.0; n];
    let mut n_pairs = vec![0u64; n];
    let count = members.len() as f64;
    for c in &members {
        for j in 0..n {
            m2[j] += c.m2[j];
            m4[j] += c.m4[j];
            n_pairs[j] += c.n_pairs[j];
        }
    }
    for j in 0..n {
        m2[j] /= count;
        m4[j] /= count;
    }
    MomentCurve {
        lags: grid.clone(),
        m2,
        m4,
        n_pairs,
    }
}

/// Ensemble-averaged model moments.
///
/// Member `i` uses the random streams of path index `i` under
/// `ensemble.seed`, so member 0 reproduces `simulate_*(…, seed)` exactly and
/// the result does not depend on the number of worker threads.
/// `initial_phase` only applies to the intermittent model.
pub fn model_moments(
    model: &ModelParams,
    grid: &LagGrid,
    ensemble: &EnsembleSpec,
    dt: f64,
    initial_phase: Option<PhaseLabel>,
) -> Result<MomentCurve> {
    ensemble.validate()?;
    let members = (0..ensemble.size as u64)
        .into_par_iter()
        .map(|i| {
            let mut xs = vec![0.0; ensemble.n_steps + 1];
            let mut ys = vec![0.0; ensemble.n_steps + 1];
            match model {
                ModelParams::Intermittent(p) => {
                    let noise = IsNoise::draw(ensemble.seed, i, ensemble.n_steps);
                    intermittent::simulate_with_noise(p, dt, &noise, initial_phase, &mut xs, &mut ys)?;
                }
                ModelParams::Levy(p) => levy::simulate_into(p, dt, ensemble.seed, i, &mut xs, &mut ys)?,
            }
            moments_of_columns(&xs, &ys, dt, grid)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ensemble_mean(grid, members))
}

/// Model-moment evaluator with the ensemble's random inputs drawn once.
///
/// Repeated evaluations reuse the same intermittent noise (common random
/// numbers), so the output is a deterministic function of the parameters and
/// bit-identical to [`model_moments`] with the same ensemble.
pub struct MomentEngine {
    grid: LagGrid,
    ensemble: EnsembleSpec,
    dt: f64,
    is_noise: Vec<IsNoise>,
}

impl MomentEngine {
    /// `with_is_cache` pre-draws the intermittent noise (about 40 bytes per
    /// step per member); Lévy flights are always generated on the fly.
    pub fn new(grid: LagGrid, ensemble: EnsembleSpec, dt: f64, with_is_cache: bool) -> Result<Self> {
        ensemble.validate()?;
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::validation(format!("dt must be finite and positive, got {dt}")));
        }
        let is_noise = if with_is_cache {
            (0..ensemble.size as u64)
                .into_par_iter()
                .map(|i| IsNoise::draw(ensemble.seed, i, ensemble.n_steps))
                .collect()
        } else {
            Vec::new()
        };
        Ok(MomentEngine {
            grid,
            ensemble,
            dt,
            is_noise,
        })
    }

    pub fn grid(&self) -> &LagGrid {
        &self.grid
    }

    pub fn ensemble(&self) -> &EnsembleSpec {
        &self.ensemble
    }

    pub fn evaluate(&self, model: &ModelParams) -> Result<MomentCurve> {
        self.evaluate_members(model, self.ensemble.size)
    }

    /// Mean over the first `members` ensemble members only; equal to
    /// [`model_moments`] on an ensemble of that size with the same seed.
    pub fn evaluate_members(&self, model: &ModelParams, members: usize) -> Result<MomentCurve> {
        if members < 1 || members > self.ensemble.size {
            return Err(Error::validation(format!(
                "member count must be in 1..={}, got {members}",
                self.ensemble.size
            )));
        }
        match model {
            ModelParams::Intermittent(p) if !self.is_noise.is_empty() => {
                let n = self.ensemble.n_steps;
                let curves = self.is_noise[..members]
                    .par_iter()
                    .map(|noise| {
                        let mut xs = vec![0.0; n + 1];
                        let mut ys = vec![0.0; n + 1];
                        intermittent::simulate_with_noise(p, self.dt, noise, None, &mut xs, &mut ys)?;
                        moments_of_columns(&xs, &ys, self.dt, &self.grid)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(ensemble_mean(&self.grid, curves))
            }
            _ => {
                let spec = EnsembleSpec { size: members, ..self.ensemble };
                model_moments(model, &self.grid, &spec, self.dt, None)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(speed: f64, heading: f64, n: usize, dt: f64) -> Trajectory {
        let (s, c) = heading.sin_cos();
        let xs = (0..=n).map(|i| speed * c * i as f64 * dt).collect();
        let ys = (0..=n).map(|i| speed * s * i as f64 * dt).collect();
        Trajectory::new(dt, xs, ys).unwrap()
    }

    #[test]
    fn log_spaced_grid() {
        let g = LagGrid::log_spaced(1.0, 20_000, 25).unwrap();
        assert_eq!(g.steps()[0], 1);
        assert_eq!(*g.steps().last().unwrap(), 2000);
        assert!(g.len() <= 25 && g.len() >= MIN_LAGS);
        assert!(g.steps().windows(2).all(|w| w[0] < w[1]));
        // Short series collapse to fewer unique lags.
        let g = LagGrid::log_spaced(0.5, 100, 25).unwrap();
        assert_eq!(g.steps(), &[1, 2, 3, 4, 5, 6, 7, 8, 9, 10]);
        assert!(LagGrid::log_spaced(1.0, 20, 25).is_err());
    }

    #[test]
    fn grid_validation() {
        assert!(LagGrid::from_steps(1.0, vec![1, 2, 2, 3]).is_err());
        assert!(LagGrid::from_steps(1.0, vec![0, 1, 2, 3]).is_err());
        assert!(LagGrid::from_steps(1.0, vec![1, 2, 3]).is_err());
        assert!(LagGrid::from_times(0.1, &[0.1, 0.2, 0.4, 0.8]).is_ok());
        assert!(matches!(LagGrid::from_times(0.1, &[0.1, 0.25, 0.4, 0.8]), Err(Error::Validation(_))));
        let g = LagGrid::from_steps(1.0, vec![1, 2, 4, 8]).unwrap();
        assert!(g.check_fits_within(32).is_ok());
        assert!(g.check_fits_within(31).is_err());
    }

    #[test]
    fn straight_line_moments_are_exact() {
        let t = line(2.0, 0.7, 400, 0.5);
        let g = LagGrid::from_steps(0.5, vec![1, 3, 10, 50, 99]).unwrap();
        let c = empirical_moments(&t, &g).unwrap();
        for j in 0..g.len() {
            assert!((c.m2[j] - 4.0).abs() < 1e-12);
            assert!((c.m4[j] - 16.0).abs() < 1e-11);
            assert_eq!(c.n_pairs[j], (t.len() - g.steps()[j]) as u64);
        }
    }

    #[test]
    fn lag_errors() {
        let t = line(1.0, 0.0, 10, 1.0);
        let g = LagGrid::from_steps(1.0, vec![1, 2, 3, 10]).unwrap();
        assert!(matches!(empirical_moments(&t, &g), Err(Error::Validation(_))));
        let g = LagGrid::from_steps(0.3, vec![1, 2, 3, 4]).unwrap();
        assert!(matches!(empirical_moments(&t, &g), Err(Error::Validation(_))));
    }

    #[test]
    fn power_sums_match_naive_loop() {
        let xs: Vec<f64> = (0..1103).map(|i| ((i * 37 % 17) as f64).sin()).collect();
        let ys: Vec<f64> = (0..1103).map(|i| ((i * 11 % 13) as f64).cos()).collect();
        for lag in [1, 5, 9, 50, 700, 1100] {
            let (s2, s4) = displacement_power_sums(&xs, &ys, lag);
            let (mut n2, mut n4) = (0.0, 0.0);
            for i in 0..xs.len() - lag {
                let s = (xs[i + lag] - xs[i]).powi(2) + (ys[i + lag] - ys[i]).powi(2);
                n2 += s;
                n4 += s * s;
            }
            assert!((s2 - n2).abs() < 1e-12 * n2);
            assert!((s4 - n4).abs() < 1e-12 * n4);
            let (b2, b4) = power_sums(&xs, &ys, lag);
            assert_eq!((s2.to_bits(), s4.to_bits()), (b2.to_bits(), b4.to_bits()));
        }
    }

    #[test]
    fn pure_ballistic_model_moments() {
        let p = IsParams::new(1.0, 3.0, 0.0, 0.0).unwrap();
        let g = LagGrid::from_steps(1.0, vec![1, 2, 5, 10, 20]).unwrap();
        let e = EnsembleSpec { size: 4, n_steps: 200, seed: 1 };
        let c = model_moments(&ModelParams::Intermittent(p), &g, &e, 1.0, Some(PhaseLabel::Ballistic)).unwrap();
        for j in 0..g.len() {
            assert!((c.m2[j] - 9.0).abs() < 1e-10);
            assert!((c.m4[j] - 81.0).abs() < 1e-9);
        }
        assert_eq!(c.n_pairs[0], 4 * 200);
    }

    #[test]
    fn member_zero_matches_single_simulation() {
        let p = IsParams::new(0.8, 1.5, 0.2, 0.1).unwrap();
        let g = LagGrid::from_steps(1.0, vec![1, 2, 4, 8]).unwrap();
        let e = EnsembleSpec { size: 1, n_steps: 300, seed: 42 };
        let c = model_moments(&ModelParams::Intermittent(p), &g, &e, 1.0, None).unwrap();
        let t = crate::kernels::simulate_intermittent(&p, 300, 1.0, 42, None).unwrap();
        assert_eq!(c.m2, empirical_moments(&t, &g).unwrap().m2);

        let lw = LwParams::new(2.0, 1.5, 1.0).unwrap();
        let c = model_moments(&ModelParams::Levy(lw), &g, &e, 1.0, None).unwrap();
        let t = crate::kernels::simulate_levy(&lw, 300, 1.0, 42).unwrap();
        assert_eq!(c.m4, empirical_moments(&t, &g).unwrap().m4);
    }

    #[test]
    fn engine_matches_model_moments_bitwise() {
        let g = LagGrid::from_steps(1.0, vec![1, 2, 4, 8, 16]).unwrap();
        let e = EnsembleSpec { size: 6, n_steps: 500, seed: 9 };
        let engine = MomentEngine::new(g.clone(), e, 1.0, true).unwrap();
        for model in [
            ModelParams::Intermittent(IsParams::new(1.0, 2.0, 0.05, 0.05).unwrap()),
            ModelParams::Intermittent(IsParams::new(0.3, 5.0, 0.5, 0.01).unwrap()),
            ModelParams::Levy(LwParams::new(3.0, 1.2, 0.5).unwrap()),
        ] {
            let direct = model_moments(&model, &g, &e, 1.0, None).unwrap();
            let cached = engine.evaluate(&model).unwrap();
            assert_eq!(direct, cached);
            assert_eq!(cached, engine.evaluate(&model).unwrap());
            let sub = EnsembleSpec { size: 2, ..e };
            assert_eq!(engine.evaluate_members(&model, 2).unwrap(), model_moments(&model, &g, &sub, 1.0, None).unwrap());
        }
        assert!(engine.evaluate_members(&ModelParams::Levy(LwParams::new(3.0, 1.2, 0.5).unwrap()), 7).is_err());
    }

    #[test]
    fn curve_json_round_trip() {
        let t = line(1.0, 0.2, 100, 0.1);
        let g = LagGrid::from_steps(0.1, vec![1, 2, 4, 8]).unwrap();
        let c = empirical_moments(&t, &g).unwrap();
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<MomentCurve>(&json).unwrap(), c);
    }
}
