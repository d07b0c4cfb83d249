//! Constant-speed planar Lévy walk sampled on a uniform grid.
//!
//! Flights are drawn on the path's event stream as pairs (flight time,
//! heading). A flight that ends inside a grid interval is split there, so
//! every grid sample lies on the continuous piecewise-linear path.

use crate::error::{Error, Result};
use crate::kernels::params::LwParams;
use crate::kernels::sampling::flight_time_from_exp;
use crate::rng::{path_stream, standard_exp, unit_heading, Purpose, StreamRng};
use crate::trajectory::Trajectory;

/// Result of a traced Lévy-walk simulation.
#[derive(Clone, Debug)]
pub struct LevySimulation {
    pub trajectory: Trajectory,
    /// Times at which a flight ended and a new one started, in `(0, n_steps * dt]`.
    pub turn_times: Vec<f64>,
}

struct Flight {
    cos: f64,
    sin: f64,
    remaining: f64,
}

#[inline]
fn next_flight(params: &LwParams, rng: &mut StreamRng) -> Flight {
    let remaining = flight_time_from_exp(params, standard_exp(rng));
    let (cos, sin) = unit_heading(rng);
    Flight { cos, sin, remaining }
}

fn check_inputs(params: &LwParams, n_steps: usize, dt: f64) -> Result<()> {
    params.validate()?;
    if n_steps < 1 {
        return Err(Error::validation("n_steps must be at least 1"));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::validation(format!("dt must be finite and positive, got {dt}")));
    }
    Ok(())
}

pub(crate) fn run_levy(
    params: &LwParams,
    dt: f64,
    seed: u64,
    path_index: u64,
    xs: &mut [f64],
    ys: &mut [f64],
    mut turns: Option<&mut Vec<f64>>,
) {
    let n = xs.len() - 1;
    let v = params.speed;
    let mut rng = path_stream(seed, path_index, Purpose::Events);
    let mut flight = next_flight(params, &mut rng);
    let (mut x, mut y) = (0.0, 0.0);
    xs[0] = x;
    ys[0] = y;
    for i in 0..n {
        let mut left = dt;
        while flight.remaining < left {
            x += v * flight.remaining * flight.cos;
            y += v * flight.remaining * flight.sin;
            left -= flight.remaining;
            if let Some(t) = turns.as_deref_mut() {
                t.push((i + 1) as f64 * dt - left);
            }
            flight = next_flight(params, &mut rng);
        }
        x += v * left * flight.cos;
        y += v * left * flight.sin;
        flight.remaining -= left;
        xs[i + 1] = x;
        ys[i + 1] = y;
    }
}

/// Simulates `n_steps` grid steps of a Lévy walk from the origin.
pub fn simulate_levy(params: &LwParams, n_steps: usize, dt: f64, seed: u64) -> Result<Trajectory> {
    check_inputs(params, n_steps, dt)?;
    let mut xs = vec![0.0; n_steps + 1];
    let mut ys = vec![0.0; n_steps + 1];
    run_levy(params, dt, seed, 0, &mut xs, &mut ys, None);
    Ok(Trajectory::from_parts(dt, xs, ys))
}

/// Like [`simulate_levy`], also returning the turn times.
pub fn simulate_levy_traced(params: &LwParams, n_steps: usize, dt: f64, seed: u64) -> Result<LevySimulation> {
    check_inputs(params, n_steps, dt)?;
    let mut xs = vec![0.0; n_steps + 1];
    let mut ys = vec![0.0; n_steps + 1];
    let mut turn_times = Vec::new();
    run_levy(params, dt, seed, 0, &mut xs, &mut ys, Some(&mut turn_times));
    Ok(LevySimulation {
        trajectory: Trajectory::from_parts(dt, xs, ys),
        turn_times,
    })
}

pub(crate) fn simulate_into(
    params: &LwParams,
    dt: f64,
    seed: u64,
    path_index: u64,
    xs: &mut [f64],
    ys: &mut [f64],
) -> Result<()> {
    check_inputs(params, xs.len() - 1, dt)?;
    run_levy(params, dt, seed, path_index, xs, ys, None);
    Ok(())
}
