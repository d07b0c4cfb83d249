//! Two-phase intermittent-search simulator.
//!
//! Each step first decides whether to switch phase, then moves. A phase with
//! rate `lambda` is left at each step with probability `1 - exp(-lambda dt)`;
//! the simulator draws the number of steps until that happens directly as
//! `floor(E / (lambda dt))` with `E ~ Exp(1)`, which is the same geometric law
//! as checking a Bernoulli coin at every step. Random inputs live on three
//! separate streams (events, headings, noise) and the diffusive noise of step
//! `i` is always the `i`-th normal pair, so paths with nearby parameters share
//! their randomness.

use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::kernels::params::{IsParams, PhaseLabel};
use crate::rng::{open_unit, path_stream, standard_exp, unit_heading, Purpose};
use crate::trajectory::Trajectory;

/// Random inputs consumed by one intermittent path.
#[derive(Clone, Debug)]
pub(crate) struct IsNoise {
    phase_u: f64,
    holding: Vec<f64>,
    headings: Vec<(f64, f64)>,
    normals: Vec<f64>,
}

impl IsNoise {
    pub(crate) fn draw(seed: u64, path_index: u64, n_steps: usize) -> Self {
        let mut events = path_stream(seed, path_index, Purpose::Events);
        let phase_u = open_unit(&mut events);
        // One draw for the first phase plus at most one per step.
        let holding = (0..=n_steps).map(|_| standard_exp(&mut events)).collect();

        let mut heading_rng = path_stream(seed, path_index, Purpose::Headings);
        let headings = (0..n_steps / 2 + 2)
            .map(|_| unit_heading(&mut heading_rng))
            .collect();

        let mut noise_rng = path_stream(seed, path_index, Purpose::Noise);
        let normals = (0..2 * n_steps).map(|_| StandardNormal.sample(&mut noise_rng)).collect();

        IsNoise {
            phase_u,
            holding,
            headings,
            normals,
        }
    }

    pub(crate) fn n_steps(&self) -> usize {
        self.normals.len() / 2
    }
}

pub(crate) fn resolve_initial_phase(
    params: &IsParams,
    initial_phase: Option<PhaseLabel>,
    phase_u: f64,
) -> Result<PhaseLabel> {
    if let Some(phase) = initial_phase {
        return Ok(phase);
    }
    match params.stationary_ballistic() {
        Some(p_ballistic) if phase_u < p_ballistic => Ok(PhaseLabel::Ballistic),
        Some(_) => Ok(PhaseLabel::Diffusive),
        None => Err(Error::validation(
            "both switching rates are zero; an initial phase must be given",
        )),
    }
}

fn check_inputs(params: &IsParams, n_steps: usize, dt: f64) -> Result<()> {
    params.validate()?;
    if n_steps < 1 {
        return Err(Error::validation("n_steps must be at least 1"));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::validation(format!("dt must be finite and positive, got {dt}")));
    }
    Ok(())
}

#[inline]
fn holding_steps(exp_variate: f64, rate_dt: f64) -> usize {
    if rate_dt > 0.0 {
        // Float-to-int casts floor positive values and saturate at usize::MAX.
        (exp_variate / rate_dt) as usize
    } else {
        usize::MAX
    }
}

/// Fills `xs`, `ys` (length `n_steps + 1`) with a path driven by `noise`.
pub(crate) fn run_intermittent(
    params: &IsParams,
    dt: f64,
    noise: &IsNoise,
    start: PhaseLabel,
    xs: &mut [f64],
    ys: &mut [f64],
    mut phases: Option<&mut Vec<PhaseLabel>>,
) {
    let n = xs.len() - 1;
    debug_assert!(n <= noise.n_steps());
    let ballistic_step = params.ballistic_speed * dt;
    let diffusive_step = params.diffusion_coeff * dt.sqrt();
    let rate_dt = |phase: PhaseLabel| match phase {
        PhaseLabel::Ballistic => params.rate_bd * dt,
        PhaseLabel::Diffusive => params.rate_db * dt,
    };

    let mut phase = start;
    let mut next_hold = 0;
    let mut next_heading = 0;
    let mut heading = (1.0, 0.0);
    let first_run = holding_steps(noise.holding[next_hold], rate_dt(phase));
    next_hold += 1;
    if phase == PhaseLabel::Ballistic {
        heading = noise.headings[next_heading];
        next_heading += 1;
    }

    let (mut x, mut y) = (0.0, 0.0);
    xs[0] = x;
    ys[0] = y;
    // The current phase covers steps i..i+run; the step after it switches.
    let mut i = 0usize;
    let mut run = first_run;
    loop {
        let end = n.min(i.saturating_add(run));
        match phase {
            PhaseLabel::Ballistic => {
                let (dx, dy) = (ballistic_step * heading.0, ballistic_step * heading.1);
                for j in i..end {
                    x += dx;
                    y += dy;
                    xs[j + 1] = x;
                    ys[j + 1] = y;
                }
            }
            PhaseLabel::Diffusive => {
                let normals = &noise.normals[2 * i..2 * end];
                for (j, eta) in (i..end).zip(normals.chunks_exact(2)) {
                    x += diffusive_step * eta[0];
                    y += diffusive_step * eta[1];
                    xs[j + 1] = x;
                    ys[j + 1] = y;
                }
            }
        }
        if let Some(p) = phases.as_deref_mut() {
            p.extend(std::iter::repeat_n(phase, end - i));
        }
        i = end;
        if i >= n {
            break;
        }
        phase = phase.flipped();
        run = 1usize.saturating_add(holding_steps(noise.holding[next_hold], rate_dt(phase)));
        next_hold += 1;
        if phase == PhaseLabel::Ballistic {
            heading = noise.headings[next_heading];
            next_heading += 1;
        }
    }
}

/// Simulates `n_steps` steps of the intermittent process from the origin.
///
/// Without `initial_phase` the first phase is drawn from the stationary law
/// `P(Ballistic) = lambda_DB / (lambda_BD + lambda_DB)`. A fresh uniform
/// heading is drawn every time the ballistic phase is entered.
pub fn simulate_intermittent(
    params: &IsParams,
    n_steps: usize,
    dt: f64,
    seed: u64,
    initial_phase: Option<PhaseLabel>,
) -> Result<Trajectory> {
    simulate_path(params, n_steps, dt, seed, 0, initial_phase, None)
}

/// Like [`simulate_intermittent`], also returning the phase of every step.
pub fn simulate_intermittent_traced(
    params: &IsParams,
    n_steps: usize,
    dt: f64,
    seed: u64,
    initial_phase: Option<PhaseLabel>,
) -> Result<(Trajectory, Vec<PhaseLabel>)> {
    let mut phases = Vec::with_capacity(n_steps);
    let traj = simulate_path(params, n_steps, dt, seed, 0, initial_phase, Some(&mut phases))?;
    Ok((traj, phases))
}

pub(crate) fn simulate_path(
    params: &IsParams,
    n_steps: usize,
    dt: f64,
    seed: u64,
    path_index: u64,
    initial_phase: Option<PhaseLabel>,
    phases: Option<&mut Vec<PhaseLabel>>,
) -> Result<Trajectory> {
    check_inputs(params, n_steps, dt)?;
    let noise = IsNoise::draw(seed, path_index, n_steps);
    let start = resolve_initial_phase(params, initial_phase, noise.phase_u)?;
    let mut xs = vec![0.0; n_steps + 1];
    let mut ys = vec![0.0; n_steps + 1];
    run_intermittent(params, dt, &noise, start, &mut xs, &mut ys, phases);
    Ok(Trajectory::from_parts(dt, xs, ys))
}

/// Simulates into caller buffers using pre-drawn noise; used by ensembles.
pub(crate) fn simulate_with_noise(
    params: &IsParams,
    dt: f64,
    noise: &IsNoise,
    initial_phase: Option<PhaseLabel>,
    xs: &mut [f64],
    ys: &mut [f64],
) -> Result<()> {
    check_inputs(params, xs.len() - 1, dt)?;
    let start = resolve_initial_phase(params, initial_phase, noise.phase_u)?;
    run_intermittent(params, dt, noise, start, xs, ys, None);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn norms(t: &Trajectory) -> Vec<f64> {
        (0..t.n_steps()).map(|i| {
            let (dx, dy) = t.step(i);
            dx.hypot(dy)
        }).collect()
    }

    #[test]
    fn shape_and_origin() {
        let p = IsParams::new(1.0, 2.0, 0.3, 0.2).unwrap();
        let t = simulate_intermittent(&p, 5, 0.1, 3, None).unwrap();
        assert_eq!(t.len(), 6);
        assert_eq!((t.xs()[0], t.ys()[0]), (0.0, 0.0));
    }

    #[test]
    fn pure_ballistic_has_constant_step() {
        let p = IsParams::new(7.0, 1.0, 0.0, 0.0).unwrap();
        let t = simulate_intermittent(&p, 1000, 0.1, 9, Some(PhaseLabel::Ballistic)).unwrap();
        for n in norms(&t) {
            assert!((n - 0.1).abs() <= 1e-12, "{n}");
        }
        // A single heading: the endpoint lies at distance n * V_B * dt.
        let end = t.xs()[1000].hypot(t.ys()[1000]);
        assert!((end - 100.0).abs() < 1e-9);
    }

    #[test]
    fn pure_diffusive_increment_statistics() {
        let p = IsParams::new(1.0, 0.0, 0.0, 0.0).unwrap();
        let n = 100_000;
        let t = simulate_intermittent(&p, n, 1.0, 21, Some(PhaseLabel::Diffusive)).unwrap();
        let dx: Vec<f64> = (0..n).map(|i| t.step(i).0).collect();
        let mean = dx.iter().sum::<f64>() / n as f64;
        let var = dx.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((var - 1.0).abs() < 0.03, "variance {var}");
        assert!(mean.abs() < 0.02);
        let lag1 = dx.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum::<f64>() / (n - 1) as f64 / var;
        assert!(lag1.abs() < 0.01, "lag-1 autocorrelation {lag1}");
    }

    #[test]
    fn symmetric_rates_give_half_ballistic() {
        let p = IsParams::new(1.0, 1.0, 0.5, 0.5).unwrap();
        let (_, phases) = simulate_intermittent_traced(&p, 1_000_000, 0.1, 4, None).unwrap();
        let frac = phases.iter().filter(|&&ph| ph == PhaseLabel::Ballistic).count() as f64 / phases.len() as f64;
        assert!((frac - 0.5).abs() < 0.5 * 0.02, "ballistic fraction {frac}");
    }

    #[test]
    fn deterministic_given_seed() {
        let p = IsParams::new(0.5, 2.0, 0.1, 0.2).unwrap();
        let a = simulate_intermittent(&p, 2000, 0.5, 77, None).unwrap();
        let b = simulate_intermittent(&p, 2000, 0.5, 77, None).unwrap();
        let c = simulate_intermittent(&p, 2000, 0.5, 78, None).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn zero_rates_need_initial_phase() {
        let p = IsParams::new(1.0, 1.0, 0.0, 0.0).unwrap();
        assert!(matches!(simulate_intermittent(&p, 10, 1.0, 1, None), Err(Error::Validation(_))));
        assert!(simulate_intermittent(&p, 0, 1.0, 1, Some(PhaseLabel::Ballistic)).is_err());
        assert!(simulate_intermittent(&p, 10, -1.0, 1, Some(PhaseLabel::Ballistic)).is_err());
    }

    #[test]
    fn single_reachable_phase_is_forced() {
        // lambda_BD = 0: once ballistic, always ballistic; stationary start is ballistic.
        let p = IsParams::new(1.0, 1.0, 0.0, 0.7).unwrap();
        for seed in 0..20 {
            let (_, phases) = simulate_intermittent_traced(&p, 50, 1.0, seed, None).unwrap();
            assert!(phases.iter().all(|&ph| ph == PhaseLabel::Ballistic));
        }
    }

    #[test]
    fn switching_probability_per_step() {
        // Empirical switch probability out of the ballistic phase equals 1 - exp(-lambda dt),
        // even when lambda dt is large.
        let p = IsParams::new(1.0, 1.0, 1.5, 1.5).unwrap();
        let (_, phases) = simulate_intermittent_traced(&p, 400_000, 1.0, 8, None).unwrap();
        let mut stay = 0usize;
        let mut leave = 0usize;
        for w in phases.windows(2) {
            if w[0] == PhaseLabel::Ballistic {
                if w[1] == PhaseLabel::Ballistic { stay += 1 } else { leave += 1 }
            }
        }
        let p_switch = leave as f64 / (stay + leave) as f64;
        let expected = 1.0 - (-1.5f64).exp();
        assert!((p_switch - expected).abs() < 0.005, "{p_switch} vs {expected}");
    }
}
