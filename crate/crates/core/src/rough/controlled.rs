use std::sync::Arc;

use crate::geometry::{matrix_path_seminorm, pair_scan, HolderMode, Mat3, SampledLoop, Vec3};
use crate::rough::RoughLoop;
use crate::{Error, Result, Scalar};

/// A loop `Y` with Gubinelli derivative `Y′` relative to a reference rough loop `X`:
/// `Y_ξ − Y_η = Y′_η (X_ξ − X_η) + R^Y_{ηξ}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlledLoop<T> {
    reference: Arc<RoughLoop<T>>,
    values: SampledLoop<T>,
    derivative: Vec<Mat3<T>>,
}

/// Norm estimates of a controlled loop; matrices use the entrywise norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ControlledNorms<T> {
    /// `‖Y′‖_∞`
    pub derivative_sup: T,
    /// `‖Y′‖_γ`
    pub derivative_holder: T,
    /// `‖R^Y‖_{2γ}`
    pub remainder_holder: T,
    /// `‖Y‖_∞`
    pub sup: T,
    /// `‖Y‖_D = ‖Y′‖_γ + ‖R^Y‖_{2γ} + ‖Y′‖_∞`
    pub d_norm: T,
    /// `‖Y‖*_D = ‖Y‖_D + ‖Y‖_∞`
    pub d_norm_star: T,
}

impl<T: Scalar> ControlledLoop<T> {
    pub fn new(
        reference: Arc<RoughLoop<T>>,
        values: SampledLoop<T>,
        derivative: Vec<Mat3<T>>,
    ) -> Result<Self> {
        let n = reference.intervals();
        if values.intervals() != n {
            return Err(Error::GridMismatch {
                expected: n,
                got: values.intervals(),
            });
        }
        if derivative.len() != n + 1 {
            return Err(Error::GridMismatch {
                expected: n,
                got: derivative.len().saturating_sub(1),
            });
        }
        if let Some(i) = derivative.iter().position(|m| !m.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite derivative at node {i}")));
        }
        Ok(Self {
            reference,
            values,
            derivative,
        })
    }

    /// `Y = X`, `Y′ = Id`.
    pub fn identity(reference: Arc<RoughLoop<T>>) -> Self {
        let n = reference.intervals();
        let values = reference.path().clone();
        Self {
            reference,
            values,
            derivative: vec![Mat3::identity(); n + 1],
        }
    }

    /// A new state controlled by the same reference.
    pub fn with_state(&self, values: SampledLoop<T>, derivative: Vec<Mat3<T>>) -> Result<Self> {
        Self::new(self.reference.clone(), values, derivative)
    }

    pub fn reference(&self) -> &Arc<RoughLoop<T>> {
        &self.reference
    }

    pub fn values(&self) -> &SampledLoop<T> {
        &self.values
    }

    pub fn derivative(&self) -> &[Mat3<T>] {
        &self.derivative
    }

    pub fn intervals(&self) -> usize {
        self.values.intervals()
    }

    /// `R^Y_{ij} = (Y_j − Y_i) − Y′_i (X_j − X_i)`.
    pub fn remainder(&self, i: usize, j: usize) -> Vec3<T> {
        let (y, x) = (self.values.values(), self.reference.path().values());
        (y[j] - y[i]) - self.derivative[i].mul_vec(&(x[j] - x[i]))
    }

    /// `(Y + c, Y′)` against the same reference.
    pub fn translate(&self, c: Vec3<T>) -> Result<Self> {
        self.with_state(self.values.translate(c)?, self.derivative.clone())
    }

    /// `(RY, R Y′ Rᵀ)` controlled by the rotated reference `(RX, R 𝕏² Rᵀ)`.
    pub fn rotate(&self, r: &Mat3<T>) -> Result<Self> {
        Self::new(
            Arc::new(self.reference.rotate(r)?),
            self.values.rotate(r)?,
            self.derivative.iter().map(|m| r.congruence(m)).collect(),
        )
    }

    pub fn norms(&self, mode: HolderMode) -> Result<ControlledNorms<T>> {
        let g = self.reference.gamma().value();
        let n = self.intervals();
        let derivative_sup = self
            .derivative
            .iter()
            .fold(T::zero(), |m, d| m.max(d.sum_norm()));
        let derivative_holder = matrix_path_seminorm(&self.derivative, g, mode)?;
        let remainder_holder = pair_scan(n, T::lit(2.0) * g, mode, |i, j| {
            self.remainder(i, j).norm()
        })?;
        let sup = self.values.sup_norm();
        let d_norm = derivative_holder + remainder_holder + derivative_sup;
        Ok(ControlledNorms {
            derivative_sup,
            derivative_holder,
            remainder_holder,
            sup,
            d_norm,
            d_norm_star: d_norm + sup,
        })
    }
}

/// Free-function form of [`ControlledLoop::norms`].
pub fn controlled_norm<T: Scalar>(y: &ControlledLoop<T>, mode: HolderMode) -> Result<ControlledNorms<T>> {
    y.norms(mode)
}
