use std::sync::Arc;

use crate::geometry::{SampledLoop, Vec3};
use crate::kernel::KernelField;
use crate::rough::{ControlledLoop, RoughLoop};
use crate::{Error, Result, Scalar};

use super::velocity::{Regime, VelocityField};

/// A time-indexed family `s ↦ (Y(s), Y′(s))` on a fixed time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Family<T> {
    pub times: Vec<T>,
    pub members: Vec<ControlledLoop<T>>,
}

impl<T: Scalar> Family<T> {
    pub fn new(times: Vec<T>, members: Vec<ControlledLoop<T>>) -> Result<Self> {
        if times.is_empty() || times.len() != members.len() {
            return Err(Error::InvalidInput(format!(
                "family needs matching non-empty time grid and members ({} vs {})",
                times.len(),
                members.len()
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("family times must increase strictly".into()));
        }
        Ok(Self { times, members })
    }

    pub fn last(&self) -> &ControlledLoop<T> {
        self.members.last().expect("non-empty family")
    }
}

/// `Y(s) ≡ X`, `Y′(s) ≡ Id` on `M + 1` uniform times in `[0, T]`.
pub fn constant_family<T: Scalar>(x: Arc<RoughLoop<T>>, horizon: T, m: usize) -> Result<Family<T>> {
    if m == 0 {
        return Err(Error::InvalidInput("family needs at least one time step".into()));
    }
    let times = (0..=m).map(|i| horizon * T::from_count(i) / T::from_count(m)).collect();
    let y = ControlledLoop::identity(x);
    Family::new(times, vec![y; m + 1])
}

/// `F(Y)(t)_ξ = X_ξ + ∫_0^t V^{Y(s)}(Y(s)_ξ) ds` with
/// `F(Y)′(t)_ξ = Id + ∫_0^t ∇V^{Y(s)}(Y(s)_ξ) Y′(s)_ξ ds`, trapezoid rule on the family's times.
pub fn picard_map<T: Scalar>(
    family: &Family<T>,
    x: &Arc<RoughLoop<T>>,
    k: &KernelField<T>,
    regime: Regime,
) -> Result<Family<T>> {
    let n = x.intervals();
    let rates: Vec<(Vec<Vec3<T>>, Vec<_>)> = family
        .members
        .iter()
        .map(|y| {
            let (v, g) = VelocityField::new(y, k, regime).on_loop();
            let d: Vec<_> = g.iter().zip(y.derivative()).map(|(a, b)| a.matmul(b)).collect();
            (v, d)
        })
        .collect();
    let start = ControlledLoop::identity(x.clone());
    let mut vals = start.values().values().to_vec();
    let mut der = start.derivative().to_vec();
    let mut out = vec![start];
    let half = T::lit(0.5);
    for s in 1..family.times.len() {
        let h = (family.times[s] - family.times[s - 1]) * half;
        let (v0, d0) = &rates[s - 1];
        let (v1, d1) = &rates[s];
        for i in 0..=n {
            vals[i] += (v0[i] + v1[i]) * h;
            der[i] += (d0[i] + d1[i]) * h;
        }
        out.push(ControlledLoop::new(x.clone(), SampledLoop::new(vals.clone())?, der.clone())?);
    }
    Family::new(family.times.clone(), out)
}

/// `sup_s max_ξ (|Y_ξ − Ỹ_ξ| + |Y′_ξ − Ỹ′_ξ|)` over two families on the same grid.
pub fn family_distance<T: Scalar>(a: &Family<T>, b: &Family<T>) -> Result<T> {
    if a.times != b.times {
        return Err(Error::InvalidInput("families use different time grids".into()));
    }
    let mut d = T::zero();
    for (p, q) in a.members.iter().zip(&b.members) {
        if p.intervals() != q.intervals() {
            return Err(Error::GridMismatch {
                expected: p.intervals(),
                got: q.intervals(),
            });
        }
        for ((u, v), (du, dv)) in p
            .values()
            .values()
            .iter()
            .zip(q.values().values())
            .zip(p.derivative().iter().zip(q.derivative()))
        {
            d = d.max((*u - *v).norm() + (*du - *dv).sum_norm());
        }
    }
    Ok(d)
}
