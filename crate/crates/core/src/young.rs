//! Left-point Riemann–Stieltjes sums and the Young-regime velocity field.

use rayon::prelude::*;

use crate::geometry::{Mat3, SampledLoop, SampledPath, Vec3};
use crate::kernel::KernelField;
use crate::{Error, Result, Scalar};

/// `Σ_{a ≤ i < b} f_i (g_{i+1} − g_i)` for matrix samples `f` on the grid of `g`.
pub fn young_integral<T: Scalar>(
    f: &[Mat3<T>],
    g: &SampledPath<T>,
    a: usize,
    b: usize,
) -> Result<Vec3<T>> {
    let n = g.grid().intervals();
    if f.len() != n + 1 {
        return Err(Error::GridMismatch {
            expected: n,
            got: f.len().saturating_sub(1),
        });
    }
    if b > n {
        return Err(Error::IndexOutOfRange { index: b, max: n });
    }
    if a > b {
        return Err(Error::InvalidInput(format!("subinterval [{a}, {b}] is reversed")));
    }
    let mut acc = Vec3::zero();
    for i in a..b {
        acc += f[i].mul_vec(&g.increment(i));
    }
    Ok(acc)
}

/// `V(x) = Σ_i A(x − Y_i) δY_i` over the whole loop.
///
/// `A(z) δ = c δ × u(z)`, so the matrix is never formed.
pub fn velocity_young<T: Scalar>(lp: &SampledLoop<T>, k: &KernelField<T>, x: &Vec3<T>) -> Vec3<T> {
    let y = lp.values();
    let mut acc = Vec3::zero();
    for i in 0..lp.intervals() {
        let d = y[i + 1] - y[i];
        acc += d.cross(&k.u(&(*x - y[i])));
    }
    acc * k.prefactor()
}

/// `∂_l V^m(x) = Σ_i ∂_l A^{mj}(x − Y_i) δY^j_i`, as a matrix `[m][l]`.
pub fn grad_velocity_young<T: Scalar>(
    lp: &SampledLoop<T>,
    k: &KernelField<T>,
    x: &Vec3<T>,
) -> Mat3<T> {
    let y = lp.values();
    let mut acc = Mat3::zero();
    for i in 0..lp.intervals() {
        let d = y[i + 1] - y[i];
        let du = k.du(&(*x - y[i]));
        for l in 0..3 {
            let c = d.cross(&du.col(l));
            for m in 0..3 {
                acc.0[m][l] += c[m];
            }
        }
    }
    acc * k.prefactor()
}

/// Velocity at every node of the loop itself, evaluated in parallel.
pub fn velocity_young_on_loop<T: Scalar>(lp: &SampledLoop<T>, k: &KernelField<T>) -> Vec<Vec3<T>> {
    lp.values()
        .par_iter()
        .map(|x| velocity_young(lp, k, x))
        .collect()
}
