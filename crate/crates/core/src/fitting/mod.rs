//! Simulation-based fitting of the two model families to a moment curve.
//!
//! Each fit runs `n_starts` Nelder–Mead searches in log-parameter space from
//! start points drawn uniformly in the log bound box. Model moments come from
//! a seeded ensemble whose random inputs stay fixed for the whole fit, so the
//! objective is a deterministic function of the parameters.
//!
//! By default the search is two-stage: every start is first run against the
//! leading members of the ensemble, and the most promising starts are then
//! refined against the full ensemble. All reported objectives use the full
//! ensemble.
//!
//! The best few starts are finally polished: each coordinate is scanned over
//! its whole range with the others held fixed, and the search restarts from
//! the best scan point whenever that beats the current optimum. This moves
//! searches off flat directions such as a negligible diffusion coefficient.

pub mod objective;
pub mod simplex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{IsParams, LwParams};
use crate::moments::{model_moments, EnsembleSpec, MomentCurve, MomentEngine, ModelParams};
use crate::rng::{derive_seed, open_unit, stream};

pub use objective::{adjust_r2, adjusted_r2, log_distance, objective, per_lag_distances};
pub use simplex::{minimize, SimplexOptions, SimplexResult};

const TAG_ENSEMBLE: u64 = 0x656e_7365_6d62_6c65;
const TAG_STARTS: u64 = 0x7374_6172_7473;
const TAG_FRESH: u64 = 0x6672_6573_68;

/// JSON/report format version.
pub const FORMAT_VERSION: u32 = 1;

/// Candidate model family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "IS")]
    Intermittent,
    #[serde(rename = "LW")]
    Levy,
}

impl ModelKind {
    pub fn n_params(self) -> usize {
        match self {
            ModelKind::Intermittent => IsParams::N_PARAMS,
            ModelKind::Levy => LwParams::N_PARAMS,
        }
    }

    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            ModelKind::Intermittent => &IsParams::NAMES,
            ModelKind::Levy => &LwParams::NAMES,
        }
    }

    /// Default search box for series sampled every `dt`.
    pub fn default_bounds(self, dt: f64) -> Vec<Bound> {
        match self {
            ModelKind::Intermittent => vec![
                Bound::new(1e-3, 1e3),
                Bound::new(1e-3, 1e3),
                Bound::new(1e-4 / dt, 1.0 / dt),
                Bound::new(1e-4 / dt, 1.0 / dt),
            ],
            ModelKind::Levy => vec![
                Bound::new(dt / 10.0, 1e3 * dt),
                Bound::new(0.3, 4.0),
                Bound::new(1e-3, 1e3),
            ],
        }
    }

    pub fn params_from(self, values: &[f64]) -> Result<ModelParams> {
        Ok(match self {
            ModelKind::Intermittent => ModelParams::Intermittent(IsParams::from_slice(values)?),
            ModelKind::Levy => ModelParams::Levy(LwParams::from_slice(values)?),
        })
    }
}

impl ModelParams {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelParams::Intermittent(_) => ModelKind::Intermittent,
            ModelParams::Levy(_) => ModelKind::Levy,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        match self {
            ModelParams::Intermittent(p) => p.to_array().to_vec(),
            ModelParams::Levy(p) => p.to_array().to_vec(),
        }
    }
}

/// Closed parameter interval in natural units; searched on a log scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub lower: f64,
    pub upper: f64,
}

impl Bound {
    pub fn new(lower: f64, upper: f64) -> Self {
        Bound { lower, upper }
    }

    fn validate(&self) -> Result<()> {
        if !(self.lower.is_finite() && self.upper.is_finite() && self.lower > 0.0 && self.lower < self.upper) {
            return Err(Error::validation(format!(
                "bound [{}, {}] must be finite, positive and non-empty",
                self.lower, self.upper
            )));
        }
        Ok(())
    }
}

/// Loop controls of a fit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub n_starts: usize,
    /// Simplex iterations per start.
    pub max_iters: usize,
    /// Convergence threshold on the simplex objective spread.
    pub tolerance: f64,
    /// Convergence threshold on the simplex size in log-parameter space.
    pub x_tolerance: f64,
    /// Per-parameter bounds; `None` uses [`ModelKind::default_bounds`].
    pub bounds: Option<Vec<Bound>>,
    pub ensemble_size: usize,
    /// Steps per ensemble trajectory; `None` matches the data series.
    pub ensemble_steps: Option<usize>,
    /// Ensemble seed; `None` derives it from the fit seed.
    pub ensemble_seed: Option<u64>,
    /// When false every objective evaluation draws a fresh ensemble.
    pub common_random_numbers: bool,
    /// Members used by the screening stage; `None` picks an eighth of the
    /// ensemble (at least 8). A value of `ensemble_size` or more disables
    /// screening.
    pub screening_size: Option<usize>,
    /// Simplex size threshold of the screening stage.
    pub screening_x_tolerance: f64,
    /// Relative objective spread threshold of the screening stage.
    pub screening_rel_tolerance: f64,
    /// Starts carried from screening into full-ensemble refinement.
    pub refine_starts: usize,
    /// Simplex restarts after convergence, per full-ensemble search.
    pub max_restarts: usize,
    /// Points per coordinate in the polishing scan; 0 disables polishing.
    pub scan_points: usize,
    /// Scan-and-restart rounds per polished start.
    pub scan_rounds: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            n_starts: 16,
            max_iters: 400,
            tolerance: 1e-6,
            x_tolerance: 1e-3,
            bounds: None,
            ensemble_size: 64,
            ensemble_steps: None,
            ensemble_seed: None,
            common_random_numbers: true,
            screening_size: None,
            screening_x_tolerance: 3e-2,
            screening_rel_tolerance: 1e-2,
            refine_starts: 2,
            max_restarts: 1,
            scan_points: 8,
            scan_rounds: 2,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_starts < 1 {
            return Err(Error::validation("n_starts must be at least 1"));
        }
        if self.max_iters < 1 {
            return Err(Error::validation("max_iters must be at least 1"));
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(Error::validation("tolerance must be positive"));
        }
        if !(self.x_tolerance.is_finite() && self.x_tolerance > 0.0) {
            return Err(Error::validation("x_tolerance must be positive"));
        }
        if self.ensemble_size < 1 {
            return Err(Error::validation("ensemble size must be at least 1"));
        }
        if self.screening_size == Some(0) {
            return Err(Error::validation("screening size must be at least 1"));
        }
        if !(self.screening_x_tolerance.is_finite() && self.screening_x_tolerance > 0.0) {
            return Err(Error::validation("screening_x_tolerance must be positive"));
        }
        if !(self.screening_rel_tolerance.is_finite() && self.screening_rel_tolerance >= 0.0) {
            return Err(Error::validation("screening_rel_tolerance must be non-negative"));
        }
        if self.refine_starts < 1 {
            return Err(Error::validation("refine_starts must be at least 1"));
        }
        if let Some(bounds) = &self.bounds {
            bounds.iter().try_for_each(Bound::validate)?;
        }
        Ok(())
    }

    /// Screening member count, or `None` for a single full-ensemble stage.
    pub fn screening_members(&self) -> Option<usize> {
        let m = self.screening_size.unwrap_or((self.ensemble_size / 8).max(8));
        (self.common_random_numbers && m < self.ensemble_size).then_some(m)
    }

    fn resolved_bounds(&self, kind: ModelKind, dt: f64) -> Result<Vec<Bound>> {
        let bounds = self.bounds.clone().unwrap_or_else(|| kind.default_bounds(dt));
        if bounds.len() != kind.n_params() {
            return Err(Error::validation(format!(
                "{:?} needs {} bounds, got {}",
                kind,
                kind.n_params(),
                bounds.len()
            )));
        }
        Ok(bounds)
    }
}

/// Sampling of the data series being fitted.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataMeta {
    pub dt: f64,
    pub n_steps: usize,
}

/// Outcome of one start. Objectives are full-ensemble values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StartSummary {
    pub start: Vec<f64>,
    pub start_objective: f64,
    /// Best screening-stage objective, when screening ran.
    pub screening_objective: Option<f64>,
    pub refined: bool,
    /// Polishing rounds that moved the start to a better point.
    pub scan_moves: usize,
    /// Parameters the start ended at; never worse than the start point.
    pub params: Vec<f64>,
    pub objective: f64,
    pub iters: usize,
    pub evals: usize,
    pub converged: bool,
}

/// Inputs of a fit after defaults were resolved.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub config: FitConfig,
    pub seed: u64,
    pub bounds: Vec<Bound>,
    pub ensemble: EnsembleSpec,
    pub data: DataMeta,
}

/// Result of fitting one model family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub format_version: u32,
    pub model: ModelKind,
    pub params: ModelParams,
    /// `mean(d_2) + mean(d_4)` at the returned parameters.
    pub objective: f64,
    pub r2_adjusted: f64,
    pub per_lag_d2: Vec<f64>,
    pub per_lag_d4: Vec<f64>,
    pub n_starts_converged: usize,
    pub model_curve: MomentCurve,
    pub starts: Vec<StartSummary>,
    pub config_echo: ConfigEcho,
}

struct Problem<'a> {
    kind: ModelKind,
    data: &'a MomentCurve,
    engine: MomentEngine,
    crn: bool,
    dt: f64,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Problem<'_> {
    fn curve_at(&self, params: &ModelParams, members: usize, fresh_seed: Option<u64>) -> Result<MomentCurve> {
        match fresh_seed {
            None => self.engine.evaluate_members(params, members),
            Some(seed) => {
                let spec = EnsembleSpec { seed, size: members, ..*self.engine.ensemble() };
                model_moments(params, self.engine.grid(), &spec, self.dt, None)
            }
        }
    }

    fn objective_at(&self, log_params: &[f64], members: usize, fresh_seed: Option<u64>) -> f64 {
        let values: Vec<f64> = log_params.iter().map(|l| l.exp()).collect();
        let Ok(params) = self.kind.params_from(&values) else {
            return f64::INFINITY;
        };
        match self.curve_at(&params, members, fresh_seed).and_then(|c| objective(&c, self.data)) {
            Ok(j) => j,
            Err(_) => f64::INFINITY,
        }
    }

    fn full_objective(&self, log_params: &[f64]) -> f64 {
        self.objective_at(log_params, self.engine.ensemble().size, None)
    }

    /// Full objective with `x[axis]` replaced by each of `points` cell centres
    /// of the bound range; returns the best point found.
    fn scan(&self, x: &[f64], points: usize) -> (Vec<f64>, f64, usize) {
        let candidates: Vec<Vec<f64>> = (0..x.len())
            .flat_map(|axis| {
                (0..points).map(move |k| {
                    let mut y = x.to_vec();
                    y[axis] = self.lower[axis] + (self.upper[axis] - self.lower[axis]) * (k as f64 + 0.5) / points as f64;
                    y
                })
            })
            .collect();
        let values: Vec<f64> = candidates.par_iter().map(|y| self.full_objective(y)).collect();
        let mut best = 0;
        for (i, v) in values.iter().enumerate() {
            if *v < values[best] {
                best = i;
            }
        }
        (candidates[best].clone(), values[best], candidates.len())
    }

    fn search(&self, index: usize, stage: u64, start: &[f64], members: usize, opts: &SimplexOptions) -> SimplexResult {
        let mut counter = 0u64;
        let base = derive_seed(self.engine.ensemble().seed, TAG_FRESH ^ index as u64);
        let crn = self.crn;
        minimize(
            |x| {
                let fresh = (!crn).then(|| {
                    counter += 1;
                    derive_seed(derive_seed(base, stage), counter)
                });
                self.objective_at(x, members, fresh)
            },
            start,
            &self.lower,
            &self.upper,
            opts,
        )
    }
}

struct StartState {
    start: Vec<f64>,
    start_objective: f64,
    screening: Option<SimplexResult>,
    refined: Option<SimplexResult>,
    polish: Vec<SimplexResult>,
    scan_evals: usize,
    x: Vec<f64>,
    f: f64,
}

impl StartState {
    fn converged(&self) -> bool {
        self.refined.as_ref().or(self.screening.as_ref()).is_some_and(|r| r.converged)
    }

    fn summary(&self) -> StartSummary {
        let runs: Vec<&SimplexResult> = self.screening.iter().chain(&self.refined).chain(&self.polish).collect();
        StartSummary {
            start: self.start.iter().map(|l| l.exp()).collect(),
            start_objective: self.start_objective,
            screening_objective: self.screening.as_ref().map(|r| r.f),
            refined: self.refined.is_some(),
            scan_moves: self.polish.len(),
            params: self.x.iter().map(|l| l.exp()).collect(),
            objective: self.f,
            iters: runs.iter().map(|r| r.iters).sum(),
            evals: runs.iter().map(|r| r.evals).sum::<usize>() + self.scan_evals,
            converged: self.converged(),
        }
    }

    /// Keeps `x` if it beats the current point on the full objective.
    fn offer(&mut self, x: &[f64], f: f64) {
        if f < self.f {
            self.x = x.to_vec();
            self.f = f;
        }
    }
}

/// Fits `kind` to `data` by multi-start simplex search.
///
/// The returned parameters are those of the start with the lowest final
/// objective, ties going to the lowest start index.
pub fn fit_model(
    kind: ModelKind,
    data: &MomentCurve,
    meta: DataMeta,
    config: &FitConfig,
    seed: u64,
) -> Result<FitReport> {
    config.validate()?;
    if !data.is_scorable() {
        return Err(Error::validation("data moments must be positive and finite"));
    }
    if (meta.dt - data.lags.dt()).abs() > 1e-9 * meta.dt {
        return Err(Error::validation("data dt does not match the lag grid"));
    }
    let bounds = config.resolved_bounds(kind, meta.dt)?;
    let ensemble = EnsembleSpec {
        size: config.ensemble_size,
        n_steps: config.ensemble_steps.unwrap_or(meta.n_steps),
        seed: config.ensemble_seed.unwrap_or_else(|| derive_seed(seed, TAG_ENSEMBLE)),
    };
    let max_lag = *data.lags.steps().last().expect("grid is non-empty");
    if max_lag >= ensemble.n_steps {
        return Err(Error::validation("ensemble trajectories are shorter than the longest lag"));
    }

    let lower: Vec<f64> = bounds.iter().map(|b| b.lower.ln()).collect();
    let upper: Vec<f64> = bounds.iter().map(|b| b.upper.ln()).collect();
    let cache = kind == ModelKind::Intermittent && config.common_random_numbers;
    let problem = Problem {
        kind,
        data,
        engine: MomentEngine::new(data.lags.clone(), ensemble, meta.dt, cache)?,
        crn: config.common_random_numbers,
        dt: meta.dt,
        lower: lower.clone(),
        upper: upper.clone(),
    };

    let mut start_rng = stream(derive_seed(seed, TAG_STARTS), 0);
    let starts: Vec<Vec<f64>> = (0..config.n_starts)
        .map(|_| lower.iter().zip(&upper).map(|(lo, hi)| lo + (hi - lo) * open_unit(&mut start_rng)).collect())
        .collect();
    let width: Vec<f64> = lower.iter().zip(&upper).map(|(lo, hi)| hi - lo).collect();
    let opts = SimplexOptions {
        max_iters: config.max_iters,
        f_tol: config.tolerance,
        f_rel_tol: 0.0,
        x_tol: config.x_tolerance,
        initial_step: width.iter().map(|w| 0.1 * w).collect(),
        max_restarts: config.max_restarts,
    };
    let screening = config.screening_members();
    let first_members = screening.unwrap_or(ensemble.size);
    let first_opts = match screening {
        Some(_) => SimplexOptions {
            x_tol: config.screening_x_tolerance,
            f_rel_tol: config.screening_rel_tolerance,
            max_restarts: 0,
            ..opts.clone()
        },
        None => opts.clone(),
    };

    let mut states: Vec<StartState> = starts
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            let start_objective = problem.full_objective(s);
            let run = problem.search(i, 0, s, first_members, &first_opts);
            let mut state = StartState {
                start: s.clone(),
                start_objective,
                screening: None,
                refined: None,
                polish: Vec::new(),
                scan_evals: 0,
                x: s.clone(),
                f: start_objective,
            };
            if screening.is_some() {
                state.screening = Some(run);
            } else {
                // Without CRN the search value is noisy; re-score on the fixed ensemble.
                let f = if problem.crn { run.f } else { problem.full_objective(&run.x) };
                state.offer(&run.x, f);
                state.refined = Some(run);
            }
            state
        })
        .collect();

    if screening.is_some() {
        let mut order: Vec<usize> = (0..states.len()).collect();
        order.sort_by(|&a, &b| {
            let fa = states[a].screening.as_ref().map_or(f64::INFINITY, |r| r.f);
            let fb = states[b].screening.as_ref().map_or(f64::INFINITY, |r| r.f);
            fa.total_cmp(&fb)
        });
        let chosen: Vec<usize> = order.into_iter().take(config.refine_starts).collect();
        let refine_opts = SimplexOptions {
            initial_step: width.iter().map(|w| 0.02 * w).collect(),
            ..opts.clone()
        };
        let refined: Vec<(usize, SimplexResult)> = chosen
            .par_iter()
            .map(|&i| {
                let x = &states[i].screening.as_ref().expect("screening ran").x;
                (i, problem.search(i, 1, x, ensemble.size, &refine_opts))
            })
            .collect();
        for (i, run) in refined {
            states[i].offer(&run.x, run.f);
            states[i].refined = Some(run);
        }
        // Starts left unrefined still get a full-ensemble score at their screening optimum.
        let rescored: Vec<(usize, Vec<f64>, f64)> = states
            .par_iter()
            .enumerate()
            .filter(|(_, st)| st.refined.is_none())
            .map(|(i, st)| {
                let x = st.screening.as_ref().expect("screening ran").x.clone();
                let f = problem.full_objective(&x);
                (i, x, f)
            })
            .collect();
        for (i, x, f) in rescored {
            states[i].offer(&x, f);
        }
    }

    if config.scan_points > 0 {
        let mut order: Vec<usize> = (0..states.len()).collect();
        order.sort_by(|&a, &b| states[a].f.total_cmp(&states[b].f));
        for &i in order.iter().take(config.refine_starts) {
            let st = &mut states[i];
            for round in 0..config.scan_rounds {
                if !st.f.is_finite() {
                    break;
                }
                let (y, fy, evals) = problem.scan(&st.x, config.scan_points);
                st.scan_evals += evals;
                if !(fy < st.f - config.tolerance) {
                    break;
                }
                let run = problem.search(i, 2 + round as u64, &y, ensemble.size, &opts);
                let f = if problem.crn { run.f } else { problem.full_objective(&run.x) };
                st.offer(&y, fy);
                st.offer(&run.x, f);
                st.polish.push(run);
            }
        }
    }

    let mut best: Option<usize> = None;
    for (i, st) in states.iter().enumerate() {
        if st.f.is_finite() && best.is_none_or(|b| st.f < states[b].f) {
            best = Some(i);
        }
    }
    let Some(best) = best else {
        return Err(Error::FitFailure(format!(
            "{kind:?}: none of the {} starts reached a finite objective",
            config.n_starts
        )));
    };

    let values: Vec<f64> = states[best].x.iter().map(|l| l.exp()).collect();
    let params = kind.params_from(&values)?;
    let model_curve = problem.engine.evaluate(&params)?;
    let (per_lag_d2, per_lag_d4) = per_lag_distances(&model_curve, data)?;
    let objective = objective(&model_curve, data)?;
    let r2_adjusted = adjusted_r2(&model_curve, data, kind.n_params())?;

    Ok(FitReport {
        format_version: FORMAT_VERSION,
        model: kind,
        params,
        objective,
        r2_adjusted,
        per_lag_d2,
        per_lag_d4,
        n_starts_converged: states.iter().filter(|st| st.converged()).count(),
        model_curve,
        starts: states.iter().map(StartState::summary).collect(),
        config_echo: ConfigEcho {
            config: config.clone(),
            seed,
            bounds,
            ensemble,
            data: meta,
        },
    })
}
