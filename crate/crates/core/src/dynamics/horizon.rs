use crate::geometry::HolderMode;
use crate::kernel::KernelField;
use crate::rough::{ControlledLoop, RoughLoop};
use crate::{Result, Scalar};

/// Advisory existence horizon `T₀ = c / (‖∇A‖₃ (1 + C_X)⁵ (1 + ‖X‖_D)³)` with `c = 1/60`,
/// `C_X = 1 + ‖X‖_γ + ‖𝕏²‖_{2γ}` and `‖X‖_D` the norm of `(X, Id)`.
///
/// Returns `+∞` when `Γ = 0`.
pub fn horizon_heuristic<T: Scalar>(x: &RoughLoop<T>, k: &KernelField<T>) -> Result<T> {
    let mode = HolderMode::auto(x.intervals());
    let cx = x.control_constant(mode)?;
    let id = ControlledLoop::identity(std::sync::Arc::new(x.clone()));
    let dn = id.norms(mode)?.d_norm;
    let bound = k.gradient_norm(3)?;
    let one = T::one();
    let denom = bound * (one + cx).powi(5) * (one + dn).powi(3);
    Ok(T::lit(1.0 / 60.0) / denom)
}
