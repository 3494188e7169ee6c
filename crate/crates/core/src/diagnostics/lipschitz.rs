use std::sync::Arc;

use crate::dynamics::{evolve, EvolveConfig, Trajectory};
use crate::geometry::{HolderMode, SampledLoop};
use crate::kernel::KernelField;
use crate::rough::{lift_controlled, piecewise_linear_lift, rough_distance, ControlledLoop, RoughLoop};
use crate::{Error, Result, Scalar};

/// Distances at or below this multiple of `C_X = 1 + ‖X‖_γ + ‖𝕏²‖_{2γ}` count as rounding.
pub const EXACT_MATCH_FLOOR: f64 = 1e-11;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Ratio {
    Finite(f64),
    /// Both distances are at rounding level.
    ExactMatch,
    /// Input distance is at rounding level but the output is not.
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LipschitzRow {
    pub delta: f64,
    /// `d(𝕏, 𝕏̃)`
    pub input_distance: f64,
    /// `sup_t d(𝕐(t), 𝕐̃(t))` over the common stored times.
    pub output_distance: f64,
    pub ratio: Ratio,
    /// Either branch stopped early.
    pub blown_up: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LipschitzTable {
    pub rows: Vec<LipschitzRow>,
}

impl LipschitzTable {
    /// `max / min` over finite, nonzero ratios; `None` with fewer than two.
    pub fn spread(&self) -> Option<f64> {
        let r: Vec<f64> = self
            .rows
            .iter()
            .filter_map(|row| match row.ratio {
                Ratio::Finite(v) if v > 0.0 => Some(v),
                _ => None,
            })
            .collect();
        if r.len() < 2 {
            return None;
        }
        let max = r.iter().cloned().fold(f64::MIN, f64::max);
        let min = r.iter().cloned().fold(f64::MAX, f64::min);
        Some(max / min)
    }
}

fn lifted<T: Scalar>(traj: &Trajectory<T>, x: &Arc<RoughLoop<T>>) -> Result<Vec<(T, RoughLoop<T>)>> {
    traj.snapshots
        .iter()
        .map(|s| {
            let y = ControlledLoop::new(x.clone(), s.values.clone(), s.derivative.clone())?;
            Ok((s.t, lift_controlled(&y)?))
        })
        .collect()
}

/// Runs `X` and `X + δ·bump` (re-lifted piecewise linearly) for each `δ` and tabulates
/// `sup_t d(𝕐, 𝕐̃) / d(𝕏, 𝕏̃)` with `d` the inhomogeneous rough distance at the reference γ.
///
/// `X` itself must carry piecewise-linear areas for the comparison to isolate the
/// perturbation.
pub fn lipschitz_experiment<T: Scalar>(
    x: &RoughLoop<T>,
    bump: &SampledLoop<T>,
    deltas: &[T],
    k: &KernelField<T>,
    cfg: &EvolveConfig<T>,
) -> Result<LipschitzTable> {
    if bump.intervals() != x.intervals() {
        return Err(Error::GridMismatch {
            expected: x.intervals(),
            got: bump.intervals(),
        });
    }
    let mode = HolderMode::auto(x.intervals());
    let xa = Arc::new(x.clone());
    let base = evolve(xa.clone(), k, cfg)?;
    let base_lifts = lifted(&base, &xa)?;
    let floor = EXACT_MATCH_FLOOR * x.control_constant(mode)?.to_f64_lossy();
    let mut rows = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let pts = x
            .path()
            .values()
            .iter()
            .zip(bump.values())
            .map(|(p, b)| *p + *b * delta)
            .collect();
        let xt = Arc::new(piecewise_linear_lift(&SampledLoop::new(pts)?, x.gamma())?);
        let input = rough_distance(x, &xt, mode)?.to_f64_lossy();
        let pert = evolve(xt.clone(), k, cfg)?;
        let pert_lifts = lifted(&pert, &xt)?;
        let mut output = 0.0f64;
        for ((_, a), (_, b)) in base_lifts.iter().zip(&pert_lifts) {
            output = output.max(rough_distance(a, b, mode)?.to_f64_lossy());
        }
        let ratio = if input <= floor {
            if output <= floor {
                Ratio::ExactMatch
            } else {
                Ratio::Unbounded
            }
        } else {
            Ratio::Finite(output / input)
        };
        rows.push(LipschitzRow {
            delta: delta.to_f64_lossy(),
            input_distance: input,
            output_distance: output,
            ratio,
            blown_up: base.blown_up() || pert.blown_up(),
        });
    }
    Ok(LipschitzTable { rows })
}
