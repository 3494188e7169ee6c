//! Coupled evolution of a controlled loop `(Y, Y′)`:
//! `dY_ξ/dt = V^Y(Y_ξ)`, `dY′_ξ/dt = ∇V^Y(Y_ξ) Y′_ξ`, with `Y(0) = X`, `Y′(0) = Id`.

mod blowup;
mod horizon;
mod picard;
mod velocity;

pub use blowup::{blowup_report, BlowupFit, BLOWUP_RESIDUAL_LIMIT};
pub use horizon::horizon_heuristic;
pub use picard::{constant_family, family_distance, picard_map, Family};
pub use velocity::{
    grad_velocity_rough, grad_velocity_rough_generic, hessian_velocity_rough, velocity_rough,
    velocity_rough_generic, Regime, VelocityField,
};

use std::sync::Arc;

use crate::geometry::{HolderExponent, HolderMode, Mat3, SampledLoop, Vec3};
use crate::kernel::KernelField;
use crate::rough::{ControlledLoop, RoughLoop};
use crate::{Error, Result, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scheme {
    Euler,
    Heun,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvolveConfig<T> {
    pub dt: T,
    pub t_end: T,
    pub scheme: Scheme,
    /// Run stops once `‖Y(t)‖_γ` exceeds this.
    pub blowup_threshold: T,
    pub gamma: HolderExponent<T>,
    pub snapshot_stride: usize,
    pub regime: Regime,
}

impl<T: Scalar> EvolveConfig<T> {
    pub fn new(dt: T, t_end: T, scheme: Scheme, gamma: HolderExponent<T>) -> Self {
        Self {
            dt,
            t_end,
            scheme,
            blowup_threshold: T::infinity(),
            gamma,
            snapshot_stride: 1,
            regime: Regime::Rough,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > T::zero()) || !self.dt.is_finite() {
            return Err(Error::OutOfRange {
                key: "evolve.dt",
                value: format!("{}", self.dt),
                range: "(0, inf)",
            });
        }
        if !(self.t_end >= T::zero()) || !self.t_end.is_finite() {
            return Err(Error::OutOfRange {
                key: "evolve.t_end",
                value: format!("{}", self.t_end),
                range: "[0, inf)",
            });
        }
        if self.snapshot_stride == 0 {
            return Err(Error::OutOfRange {
                key: "evolve.snapshot_stride",
                value: "0".into(),
                range: "[1, inf)",
            });
        }
        if self.blowup_threshold.is_nan() {
            return Err(Error::OutOfRange {
                key: "evolve.blowup_threshold",
                value: "NaN".into(),
                range: "(‖X‖_γ, inf]",
            });
        }
        Ok(())
    }

    /// `round(t_end / dt)`.
    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round().to_usize().unwrap_or(0)
    }
}

/// `(t, Y, Y′)` with the velocity data evaluated at the current nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionState<T> {
    pub t: T,
    pub y: ControlledLoop<T>,
    /// `V^Y(Y_ξ)`
    pub velocity: Vec<Vec3<T>>,
    /// `∇V^Y(Y_ξ)`
    pub gradient: Vec<Mat3<T>>,
    /// `‖Y‖_γ`
    pub holder: T,
}

impl<T: Scalar> EvolutionState<T> {
    pub fn new(
        t: T,
        y: ControlledLoop<T>,
        k: &KernelField<T>,
        regime: Regime,
        gamma: HolderExponent<T>,
    ) -> Result<Self> {
        let (velocity, gradient) = VelocityField::new(&y, k, regime).on_loop();
        let holder = y
            .values()
            .holder_seminorm(gamma.value(), HolderMode::auto(y.intervals()))?;
        Ok(Self {
            t,
            y,
            velocity,
            gradient,
            holder,
        })
    }

    /// `Y = X`, `Y′ = Id` at `t = 0`.
    pub fn initial(x: Arc<RoughLoop<T>>, k: &KernelField<T>, cfg: &EvolveConfig<T>) -> Result<Self> {
        Self::new(T::zero(), ControlledLoop::identity(x), k, cfg.regime, cfg.gamma)
    }

    /// Same shape translated by `c` (reference translated as well).
    pub fn translate(&self, c: Vec3<T>) -> Result<Self> {
        let x = Arc::new(self.y.reference().translate(c)?);
        let y = ControlledLoop::new(x, self.y.values().translate(c)?, self.y.derivative().to_vec())?;
        Ok(Self {
            t: self.t,
            y,
            velocity: self.velocity.clone(),
            gradient: self.gradient.clone(),
            holder: self.holder,
        })
    }
}

fn advance<T: Scalar>(
    y: &ControlledLoop<T>,
    dv: &[Vec3<T>],
    dd: &[Mat3<T>],
    dt: T,
    t: T,
) -> Result<ControlledLoop<T>> {
    let vals: Vec<Vec3<T>> = y
        .values()
        .values()
        .iter()
        .zip(dv)
        .map(|(p, v)| *p + *v * dt)
        .collect();
    let der: Vec<Mat3<T>> = y.derivative().iter().zip(dd).map(|(m, d)| *m + *d * dt).collect();
    check_finite(&vals, &der, t)?;
    y.with_state(SampledLoop::new(vals)?, der)
}

fn check_finite<T: Scalar>(vals: &[Vec3<T>], der: &[Mat3<T>], t: T) -> Result<()> {
    let bad = vals
        .iter()
        .position(|v| !v.is_finite())
        .or_else(|| der.iter().position(|m| !m.is_finite()));
    match bad {
        Some(node) => Err(Error::NonFinite {
            node,
            t: t.to_f64_lossy(),
        }),
        None => Ok(()),
    }
}

/// `(V, ∇V·Y′)` at every node.
fn rates<T: Scalar>(s: &EvolutionState<T>) -> Vec<Mat3<T>> {
    s.gradient
        .iter()
        .zip(s.y.derivative())
        .map(|(g, d)| g.matmul(d))
        .collect()
}

/// One step of `cfg.scheme`; `t` advances to `t_next` (callers pass `(step + 1) dt`).
pub fn step_to<T: Scalar>(
    state: &EvolutionState<T>,
    k: &KernelField<T>,
    cfg: &EvolveConfig<T>,
    t_next: T,
) -> Result<EvolutionState<T>> {
    let dt = t_next - state.t;
    let d0 = rates(state);
    let y = match cfg.scheme {
        Scheme::Euler => advance(&state.y, &state.velocity, &d0, dt, t_next)?,
        Scheme::Heun => {
            let pred = advance(&state.y, &state.velocity, &d0, dt, t_next)?;
            let mid = EvolutionState::new(t_next, pred, k, cfg.regime, cfg.gamma)?;
            let d1 = rates(&mid);
            let half = T::lit(0.5);
            let v: Vec<_> = state
                .velocity
                .iter()
                .zip(&mid.velocity)
                .map(|(a, b)| (*a + *b) * half)
                .collect();
            let d: Vec<_> = d0.iter().zip(&d1).map(|(a, b)| (*a + *b) * half).collect();
            advance(&state.y, &v, &d, dt, t_next)?
        }
    };
    let next = EvolutionState::new(t_next, y, k, cfg.regime, cfg.gamma)?;
    check_finite(next.y.values().values(), next.y.derivative(), t_next)?;
    if let Some(node) = next
        .velocity
        .iter()
        .position(|v| !v.is_finite())
        .or_else(|| next.gradient.iter().position(|m| !m.is_finite()))
    {
        return Err(Error::NonFinite {
            node,
            t: t_next.to_f64_lossy(),
        });
    }
    Ok(next)
}

/// One step of length `cfg.dt`.
pub fn step<T: Scalar>(
    state: &EvolutionState<T>,
    k: &KernelField<T>,
    cfg: &EvolveConfig<T>,
) -> Result<EvolutionState<T>> {
    step_to(state, k, cfg, state.t + cfg.dt)
}

/// A stored state of a run.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot<T> {
    pub step: usize,
    pub t: T,
    pub values: SampledLoop<T>,
    pub derivative: Vec<Mat3<T>>,
    pub gradient: Vec<Mat3<T>>,
}

impl<T: Scalar> Snapshot<T> {
    fn of(step: usize, s: &EvolutionState<T>) -> Self {
        Self {
            step,
            t: s.t,
            values: s.y.values().clone(),
            derivative: s.y.derivative().to_vec(),
            gradient: s.gradient.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum BlowupCause {
    /// `‖Y(t)‖_γ` passed the threshold.
    Threshold { t: f64, holder: f64 },
    /// A step produced non-finite values.
    NonFinite { node: usize, t: f64 },
}

#[derive(Clone, Debug)]
pub struct Trajectory<T> {
    pub snapshots: Vec<Snapshot<T>>,
    /// `(t, ‖Y(t)‖_γ)` at every step.
    pub holder_series: Vec<(T, T)>,
    pub blowup: Option<BlowupCause>,
    /// Last computed state.
    pub last: EvolutionState<T>,
    /// Index of the last computed step.
    pub last_step: usize,
}

impl<T> Trajectory<T> {
    pub fn blown_up(&self) -> bool {
        self.blowup.is_some()
    }
}

/// Runs from `Y = X`, `Y′ = Id`.
pub fn evolve<T: Scalar>(
    initial: Arc<RoughLoop<T>>,
    k: &KernelField<T>,
    cfg: &EvolveConfig<T>,
) -> Result<Trajectory<T>> {
    cfg.validate()?;
    let s0 = EvolutionState::initial(initial, k, cfg)?;
    if !(cfg.blowup_threshold > s0.holder) {
        return Err(Error::OutOfRange {
            key: "evolve.blowup_threshold",
            value: format!("{}", cfg.blowup_threshold),
            range: "above the initial Hölder seminorm",
        });
    }
    evolve_from(s0, 0, k, cfg)
}

/// Continues a run whose state `s` sits at step `start`; times are `step · dt`.
pub fn evolve_from<T: Scalar>(
    s: EvolutionState<T>,
    start: usize,
    k: &KernelField<T>,
    cfg: &EvolveConfig<T>,
) -> Result<Trajectory<T>> {
    cfg.validate()?;
    let total = cfg.steps();
    let mut snapshots = vec![Snapshot::of(start, &s)];
    let mut holder_series = vec![(s.t, s.holder)];
    let mut cur = s;
    let mut blowup = None;
    let mut last_step = start;
    for n in start..total {
        let t_next = T::from_count(n + 1) * cfg.dt;
        match step_to(&cur, k, cfg, t_next) {
            Ok(next) => {
                cur = next;
                last_step = n + 1;
                holder_series.push((cur.t, cur.holder));
                if last_step % cfg.snapshot_stride == 0 || last_step == total {
                    snapshots.push(Snapshot::of(last_step, &cur));
                }
                if cur.holder > cfg.blowup_threshold {
                    blowup = Some(BlowupCause::Threshold {
                        t: cur.t.to_f64_lossy(),
                        holder: cur.holder.to_f64_lossy(),
                    });
                    if snapshots.last().map(|s| s.step) != Some(last_step) {
                        snapshots.push(Snapshot::of(last_step, &cur));
                    }
                    break;
                }
            }
            Err(Error::NonFinite { node, t }) => {
                blowup = Some(BlowupCause::NonFinite { node, t });
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(Trajectory {
        snapshots,
        holder_series,
        blowup,
        last: cur,
        last_step,
    })
}

/// `∫_0^1 (1 − w) ∇²V(Y_i + w Y_{ij})[Y_{ij}, Y_{ij}] dw` by composite 5-point Gauss–Legendre, the
/// source term of `dR_{ij}/dt = ∇V(Y_i) R_{ij} + (…)`.
pub fn remainder_source<T: Scalar>(
    y: &ControlledLoop<T>,
    k: &KernelField<T>,
    i: usize,
    j: usize,
) -> Vec3<T> {
    const NODES: [f64; 5] = [
        0.0,
        -0.538_469_310_105_683_1,
        0.538_469_310_105_683_1,
        -0.906_179_845_938_664,
        0.906_179_845_938_664,
    ];
    const WEIGHTS: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    let p = y.values().values();
    let d = p[j] - p[i];
    // eight panels per kernel width along the chord keep the Gauss rule at rounding level
    let panels = (d.norm() * T::lit(8.0) / k.mu()).to_f64_lossy().ceil().max(1.0) as usize;
    let width = 1.0 / panels as f64;
    let mut acc = Vec3::zero();
    for panel in 0..panels {
        for (xn, wt) in NODES.iter().zip(WEIGHTS) {
            let w = T::lit(width * (panel as f64 + 0.5 * (xn + 1.0)));
            let h = hessian_velocity_rough(y, k, &(p[i] + d * w));
            let mut v = Vec3::zero();
            for m in 0..3 {
                for l in 0..3 {
                    for n in 0..3 {
                        v[m] += h.0[m][l][n] * d[l] * d[n];
                    }
                }
            }
            acc += v * (T::lit(0.5 * width * wt) * (T::one() - w));
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::rotation;
    use crate::loops::circle_loop;
    use crate::rough::piecewise_linear_lift;

    fn circle(n: usize) -> Arc<RoughLoop<f64>> {
        let lp = circle_loop(1.0, Vec3::zero(), Vec3::unit(2), n).unwrap();
        Arc::new(piecewise_linear_lift(&lp, HolderExponent::new(0.9).unwrap()).unwrap())
    }

    fn cfg(scheme: Scheme, dt: f64, t_end: f64) -> EvolveConfig<f64> {
        EvolveConfig::new(dt, t_end, scheme, HolderExponent::new(0.9).unwrap())
    }

    #[test]
    fn zero_intensity_keeps_everything() {
        let x = circle(64);
        let k = KernelField::new(0.0, 0.5).unwrap();
        let tr = evolve(x.clone(), &k, &cfg(Scheme::Heun, 0.1, 0.5)).unwrap();
        assert_eq!(tr.snapshots.len(), 6);
        for s in &tr.snapshots {
            assert_eq!(&s.values, x.path());
            assert!(s.derivative.iter().all(|m| *m == Mat3::identity()));
        }
        assert!((tr.last.t - 0.5).abs() < 1e-15);
    }

    #[test]
    fn closure_is_bitwise() {
        let x = circle(64);
        let k = KernelField::new(2.0, 0.3).unwrap();
        let tr = evolve(x, &k, &cfg(Scheme::Euler, 0.01, 0.05)).unwrap();
        for s in &tr.snapshots {
            let v = s.values.values();
            assert_eq!(v[0], v[64]);
            assert_eq!(s.derivative[0], s.derivative[64]);
        }
    }

    #[test]
    fn step_commutes_with_translation() {
        let x = circle(64);
        let k = KernelField::new(2.0, 0.3).unwrap();
        let c = cfg(Scheme::Heun, 0.01, 0.01);
        let s = EvolutionState::initial(x, &k, &c).unwrap();
        let shift = Vec3::new(0.5, -1.0, 2.0);
        let a = step(&s.translate(shift).unwrap(), &k, &c).unwrap();
        let b = step(&s, &k, &c).unwrap().translate(shift).unwrap();
        for (p, q) in a.y.values().values().iter().zip(b.y.values().values()) {
            assert!((*p - *q).max_abs() < 1e-12);
        }
        for (p, q) in a.y.derivative().iter().zip(b.y.derivative()) {
            assert!((*p - *q).max_abs() < 1e-12);
        }
    }

    #[test]
    fn rotation_equivariance_of_evolve() {
        let x = circle(64);
        let k = KernelField::new(2.0, 0.3).unwrap();
        let r = rotation(Vec3::new(0.2, 1.0, 0.5), 0.9);
        let c = cfg(Scheme::Heun, 0.02, 0.1);
        let a = evolve(x.clone(), &k, &c).unwrap();
        let b = evolve(Arc::new(x.rotate(&r).unwrap()), &k, &c).unwrap();
        for (sa, sb) in a.snapshots.iter().zip(&b.snapshots) {
            let ra = sa.values.rotate(&r).unwrap();
            for (p, q) in ra.values().iter().zip(sb.values.values()) {
                assert!((*p - *q).max_abs() < 1e-12);
            }
        }
    }

    #[test]
    fn blowup_threshold_stops_the_run() {
        let x = circle(32);
        let k = KernelField::new(50.0, 0.05).unwrap();
        let mut c = cfg(Scheme::Euler, 0.05, 5.0);
        let h0 = x.path().holder_seminorm(0.9, HolderMode::Exact).unwrap();
        c.blowup_threshold = h0 * 1.0001;
        let tr = evolve(x.clone(), &k, &c).unwrap();
        assert!(tr.blown_up());
        assert!(tr.last_step < c.steps());
        c.blowup_threshold = h0 * 0.5;
        assert!(evolve(x, &k, &c).is_err());
    }

    #[test]
    fn resumed_run_matches_straight_run() {
        let x = circle(48);
        let k = KernelField::new(3.0, 0.3).unwrap();
        let c = cfg(Scheme::Heun, 0.01, 0.06);
        let full = evolve(x.clone(), &k, &c).unwrap();
        let mut half_cfg = c.clone();
        half_cfg.t_end = 0.03;
        let half = evolve(x, &k, &half_cfg).unwrap();
        let rest = evolve_from(half.last.clone(), half.last_step, &k, &c).unwrap();
        assert_eq!(rest.last, full.last);
    }

    #[test]
    fn config_validation() {
        let mut c = cfg(Scheme::Euler, 0.0, 1.0);
        assert!(c.validate().is_err());
        c.dt = 0.1;
        c.snapshot_stride = 0;
        assert!(c.validate().is_err());
        c.snapshot_stride = 2;
        assert!(c.validate().is_ok());
        assert_eq!(c.steps(), 10);
    }
}
