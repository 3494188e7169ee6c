//! The regularized (Rosenhead) Biot–Savart matrix kernel and its closed-form derivatives.
//!
//! `A^{ij}(x) = −(Γ/4π) Σ_k ε_{ijk} x^k (|x|² + μ²)^{−3/2}`. Everything is expressed
//! through the vector field `u(x) = x (|x|² + μ²)^{−3/2}`, which is the gradient of
//! `−(|x|² + μ²)^{−1/2}`; its derivatives are symmetric in all indices.

use crate::geometry::{levi_civita, Mat3, Tensor3, Tensor4, Vec3};
use crate::{Error, Result, Scalar};

/// Kernel parameters: circulation intensity `Γ` and regularization length `μ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelField<T> {
    intensity: T,
    mu: T,
}

/// Radial powers `(|x|² + μ²)^{−q/2}` for odd `q`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Radial<T> {
    pub g3: T,
    pub g5: T,
    pub g7: T,
    pub g9: T,
}

impl<T: Scalar> KernelField<T> {
    /// `Γ ≥ 0` (zero gives the trivial static field) and `μ > 0`.
    pub fn new(intensity: T, mu: T) -> Result<Self> {
        if !(intensity >= T::zero()) || !intensity.is_finite() {
            return Err(Error::OutOfRange {
                key: "kernel.gamma_intensity",
                value: format!("{intensity}"),
                range: "[0, inf)",
            });
        }
        if !(mu > T::zero()) || !mu.is_finite() {
            return Err(Error::OutOfRange {
                key: "kernel.mu",
                value: format!("{mu}"),
                range: "(0, inf)",
            });
        }
        Ok(Self { intensity, mu })
    }

    pub fn intensity(&self) -> T {
        self.intensity
    }

    pub fn mu(&self) -> T {
        self.mu
    }

    /// `−Γ/4π`.
    #[inline]
    pub fn prefactor(&self) -> T {
        -self.intensity / (T::lit(4.0) * T::PI())
    }

    #[inline]
    pub(crate) fn radial(&self, x: &Vec3<T>) -> Radial<T> {
        let w = T::one() / (x.norm_sq() + self.mu * self.mu);
        let g3 = w * w.sqrt();
        let g5 = g3 * w;
        let g7 = g5 * w;
        Radial {
            g3,
            g5,
            g7,
            g9: g7 * w,
        }
    }

    /// `u(x) = x (|x|² + μ²)^{−3/2}`.
    pub fn u(&self, x: &Vec3<T>) -> Vec3<T> {
        *x * self.radial(x).g3
    }

    /// `∂_l u^k`, symmetric.
    pub fn du(&self, x: &Vec3<T>) -> Mat3<T> {
        let r = self.radial(x);
        let three = T::lit(3.0);
        let mut m = Mat3::zero();
        for k in 0..3 {
            for l in 0..3 {
                let d = if k == l { r.g3 } else { T::zero() };
                m.0[k][l] = d - three * r.g5 * x[k] * x[l];
            }
        }
        m
    }

    /// `∂_m ∂_l u^k` stored as `[k][l][m]`.
    pub fn d2u(&self, x: &Vec3<T>) -> Tensor3<T> {
        let r = self.radial(x);
        let (three, fifteen) = (T::lit(3.0), T::lit(15.0));
        let d = |a: usize, b: usize| if a == b { T::one() } else { T::zero() };
        let mut t = Tensor3::zero();
        for k in 0..3 {
            for l in 0..3 {
                for m in 0..3 {
                    t.0[k][l][m] = -three
                        * r.g5
                        * (d(k, l) * x[m] + d(k, m) * x[l] + d(l, m) * x[k])
                        + fifteen * r.g7 * x[k] * (x[l] * x[m]);
                }
            }
        }
        t
    }

    /// `∂_n ∂_m ∂_l u^k` stored as `[k][l][m][n]`.
    pub fn d3u(&self, x: &Vec3<T>) -> Tensor4<T> {
        let r = self.radial(x);
        let (three, fifteen, c105) = (T::lit(3.0), T::lit(15.0), T::lit(105.0));
        let d = |a: usize, b: usize| if a == b { T::one() } else { T::zero() };
        let mut t = Tensor4::zero();
        for k in 0..3 {
            for l in 0..3 {
                for m in 0..3 {
                    for n in 0..3 {
                        let dd = d(k, l) * d(m, n) + d(k, m) * d(l, n) + d(l, m) * d(k, n);
                        let dxx = d(k, l) * x[m] * x[n]
                            + d(k, m) * x[l] * x[n]
                            + d(l, m) * x[k] * x[n]
                            + d(k, n) * x[l] * x[m]
                            + d(l, n) * x[k] * x[m]
                            + d(m, n) * x[k] * x[l];
                        t.0[k][l][m][n] = -three * r.g5 * dd + fifteen * r.g7 * dxx
                            - c105 * r.g9 * x[k] * x[l] * x[m] * x[n];
                    }
                }
            }
        }
        t
    }

    /// `A(x)`.
    pub fn eval_a(&self, x: &Vec3<T>) -> Mat3<T> {
        let u = self.u(x) * self.prefactor();
        let z = T::zero();
        // c ε_{ijk} u^k
        Mat3([[z, u[2], -u[1]], [-u[2], z, u[0]], [u[1], -u[0], z]])
    }

    /// `∂_l A^{ij}(x)` stored as `[i][j][l]`.
    pub fn grad_a(&self, x: &Vec3<T>) -> Tensor3<T> {
        let du = self.du(x);
        let c = self.prefactor();
        let mut t = Tensor3::zero();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    let e = levi_civita::<T>(i, j, k);
                    if e == T::zero() {
                        continue;
                    }
                    for l in 0..3 {
                        t.0[i][j][l] += c * e * du.0[k][l];
                    }
                }
            }
        }
        t
    }

    /// `∂_m ∂_l A^{ij}(x)` stored as `[i][j][l][m]`.
    pub fn grad2_a(&self, x: &Vec3<T>) -> Tensor4<T> {
        let d2 = self.d2u(x);
        let c = self.prefactor();
        let mut t = Tensor4::zero();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    let e = levi_civita::<T>(i, j, k);
                    if e == T::zero() {
                        continue;
                    }
                    for l in 0..3 {
                        for m in 0..3 {
                            t.0[i][j][l][m] += c * e * d2.0[k][l][m];
                        }
                    }
                }
            }
        }
        t
    }

    /// Third derivatives: `out[n].0[i][j][l][m] = ∂_n ∂_m ∂_l A^{ij}(x)`.
    pub fn grad3_a(&self, x: &Vec3<T>) -> [Tensor4<T>; 3] {
        let d3 = self.d3u(x);
        let c = self.prefactor();
        let mut out = [Tensor4::zero(); 3];
        for (n, slot) in out.iter_mut().enumerate() {
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        let e = levi_civita::<T>(i, j, k);
                        if e == T::zero() {
                            continue;
                        }
                        for l in 0..3 {
                            for m in 0..3 {
                                slot.0[i][j][l][m] += c * e * d3.0[k][l][m][n];
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Upper bound of `sup_x |∇^order A(x)|` (entrywise norm) for `order ≤ 4`.
    ///
    /// The entrywise norm of `∇^m u` is majorized by a radial profile using
    /// `|x|_1 ≤ √3 |x|`; the profile is maximized over `|x|` by a grid scan
    /// refined with golden-section search.
    pub fn derivative_sup_bound(&self, order: usize) -> Result<T> {
        if order > 4 {
            return Err(Error::UnsupportedOrder(order));
        }
        let s3 = 3f64.sqrt();
        // profile in the dimensionless radius s = |x|/μ; g_q = (1 + s²)^{−q/2}
        let profile = move |s: f64| -> f64 {
            let w = 1.0 / (1.0 + s * s);
            let g = |q: i32| w.powf(q as f64 / 2.0);
            match order {
                0 => s3 * s * g(3),
                1 => 3.0 * g(3) + 9.0 * s * s * g(5),
                2 => 27.0 * s3 * s * g(5) + 45.0 * s3 * s.powi(3) * g(7),
                3 => 81.0 * g(5) + 810.0 * s * s * g(7) + 945.0 * s.powi(4) * g(9),
                _ => {
                    2025.0 * s3 * s * g(7)
                        + 9450.0 * s3 * s.powi(3) * g(9)
                        + 8505.0 * s3 * s.powi(5) * g(11)
                }
            }
        };
        let peak = maximize_profile(profile, 0.0, 10.0);
        let mu = self.mu.to_f64_lossy();
        let scale = 2.0 * self.prefactor().abs().to_f64_lossy() * mu.powi(-(order as i32 + 2));
        Ok(T::lit(peak * scale * (1.0 + 1e-8)))
    }

    /// Upper bound of `sup_x |∇^{n+1} A(x)|` for `n ≤ 3`.
    pub fn kernel_norm_bounds(&self, n: usize) -> Result<T> {
        if n > 3 {
            return Err(Error::UnsupportedOrder(n));
        }
        self.derivative_sup_bound(n + 1)
    }

    /// `‖∇A‖_n = Σ_{k=0}^{n} sup |∇^{k+1} A|`.
    pub fn gradient_norm(&self, n: usize) -> Result<T> {
        (0..=n).map(|k| self.kernel_norm_bounds(k)).sum()
    }
}

/// Grid scan on `[lo, hi]` followed by golden-section refinement to `1e-8` relative.
fn maximize_profile(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let n = 4000;
    let h = (hi - lo) / n as f64;
    let (mut best_i, mut best) = (0usize, f(lo));
    for i in 1..=n {
        let v = f(lo + h * i as f64);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let mut a = lo + h * best_i.saturating_sub(1) as f64;
    let mut b = (lo + h * (best_i + 1) as f64).min(hi);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a) > 1e-8 * b.abs().max(1e-12) {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    best.max(fc).max(fd).max(f(a)).max(f(b))
}

/// Free-function form of [`KernelField::eval_a`].
pub fn eval_a<T: Scalar>(k: &KernelField<T>, x: &Vec3<T>) -> Mat3<T> {
    k.eval_a(x)
}

/// Free-function form of [`KernelField::grad_a`].
pub fn grad_a<T: Scalar>(k: &KernelField<T>, x: &Vec3<T>) -> Tensor3<T> {
    k.grad_a(x)
}

/// Free-function form of [`KernelField::grad2_a`].
pub fn grad2_a<T: Scalar>(k: &KernelField<T>, x: &Vec3<T>) -> Tensor4<T> {
    k.grad2_a(x)
}
