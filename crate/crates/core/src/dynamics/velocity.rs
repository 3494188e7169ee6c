//! Velocity field of a controlled loop and its derivatives.
//!
//! With `z = x − Y_i`, `P_i = Y′_i 𝕏²_i Y′_iᵀ` and `c = −Γ/4π`, the compensated sum for
//! `V(x) = ∫ A(x − Y) dY` collapses to
//! `c Σ_i [δY_i × u(z) − f3 axial(P_i) − 3 f5 z × (P_iᵀ z)]`, `f_q = (|z|² + μ²)^{−q/2}`.

use rayon::prelude::*;

use crate::geometry::{Mat3, Tensor3, Vec3};
use crate::kernel::KernelField;
use crate::rough::{rough_integral, ControlledLoop};
use crate::Scalar;

/// Which line integral defines the velocity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Regime {
    /// Compensated rough sum.
    Rough,
    /// Left-point Riemann–Stieltjes sum.
    Young,
}

/// Per-step data shared by all evaluation points.
pub struct VelocityField<'a, T> {
    kernel: &'a KernelField<T>,
    points: &'a [Vec3<T>],
    increments: Vec<Vec3<T>>,
    /// `P_i`, absent in the Young regime.
    corrections: Option<Vec<Mat3<T>>>,
}

impl<'a, T: Scalar> VelocityField<'a, T> {
    pub fn new(y: &'a ControlledLoop<T>, kernel: &'a KernelField<T>, regime: Regime) -> Self {
        let points = y.values().values();
        let increments = points.windows(2).map(|w| w[1] - w[0]).collect();
        let corrections = match regime {
            Regime::Young => None,
            Regime::Rough => {
                let blocks = y.reference().area().blocks();
                let d = y.derivative();
                Some(
                    blocks
                        .iter()
                        .enumerate()
                        .map(|(i, b)| d[i].congruence(b))
                        .collect(),
                )
            }
        };
        Self {
            kernel,
            points,
            increments,
            corrections,
        }
    }

    /// `V(x)`.
    pub fn velocity(&self, x: &Vec3<T>) -> Vec3<T> {
        let three = T::lit(3.0);
        let mut acc = Vec3::zero();
        for (i, d) in self.increments.iter().enumerate() {
            let z = *x - self.points[i];
            let r = self.kernel.radial(&z);
            acc += d.cross(&(z * r.g3));
            if let Some(p) = &self.corrections {
                let p = &p[i];
                let q = p.tr_mul_vec(&z);
                acc -= p.axial() * r.g3 + z.cross(&q) * (three * r.g5);
            }
        }
        acc * self.kernel.prefactor()
    }

    /// `V(x)` and `∇V(x)` (`[m][l] = ∂_l V^m`).
    pub fn velocity_and_gradient(&self, x: &Vec3<T>) -> (Vec3<T>, Mat3<T>) {
        let (three, fifteen) = (T::lit(3.0), T::lit(15.0));
        let mut v = Vec3::zero();
        let mut g = Mat3::zero();
        for (i, d) in self.increments.iter().enumerate() {
            let z = *x - self.points[i];
            let r = self.kernel.radial(&z);
            v += d.cross(&(z * r.g3));
            // columns of Du = f3 I − 3 f5 z zᵀ
            for l in 0..3 {
                let col = Vec3::unit(l) * r.g3 - z * (three * r.g5 * z[l]);
                let c = d.cross(&col);
                for m in 0..3 {
                    g.0[m][l] += c[m];
                }
            }
            if let Some(p) = &self.corrections {
                let p = &p[i];
                let q = p.tr_mul_vec(&z);
                let ax = p.axial();
                let zq = z.cross(&q);
                v -= ax * r.g3 + zq * (three * r.g5);
                for l in 0..3 {
                    let el = Vec3::unit(l);
                    // axial(∂_l(Du) P)
                    let inner = (ax * z[l] - el.cross(&q) - z.cross(&p.row(l))) * (-three * r.g5)
                        - zq * (fifteen * r.g7 * z[l]);
                    for m in 0..3 {
                        g.0[m][l] -= inner[m];
                    }
                }
            }
        }
        let c = self.kernel.prefactor();
        (v * c, g * c)
    }

    /// `∇V(x)`.
    pub fn gradient(&self, x: &Vec3<T>) -> Mat3<T> {
        self.velocity_and_gradient(x).1
    }

    /// Velocity and gradient at every node of the loop, in parallel with a fixed
    /// per-target summation order.
    pub fn on_loop(&self) -> (Vec<Vec3<T>>, Vec<Mat3<T>>) {
        self.points
            .par_iter()
            .map(|x| self.velocity_and_gradient(x))
            .unzip()
    }

    /// Velocity only, at every node.
    pub fn velocity_on_loop(&self) -> Vec<Vec3<T>> {
        self.points.par_iter().map(|x| self.velocity(x)).collect()
    }
}

/// `V^Y(x)` by the compensated rough sum.
pub fn velocity_rough<T: Scalar>(y: &ControlledLoop<T>, k: &KernelField<T>, x: &Vec3<T>) -> Vec3<T> {
    VelocityField::new(y, k, Regime::Rough).velocity(x)
}

/// `∇V^Y(x)`, `[m][l] = ∂_l V^m`.
pub fn grad_velocity_rough<T: Scalar>(
    y: &ControlledLoop<T>,
    k: &KernelField<T>,
    x: &Vec3<T>,
) -> Mat3<T> {
    VelocityField::new(y, k, Regime::Rough).gradient(x)
}

/// `Z′^{mj,k} = −Σ_n ∂_n Φ^{mj} Y′^{nk}` for a composite integrand `Φ(x − Y)`.
fn chain<T: Scalar>(grad: impl Fn(usize, usize, usize) -> T, yd: &Mat3<T>) -> Tensor3<T> {
    let mut t = Tensor3::zero();
    for m in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                let mut s = T::zero();
                for n in 0..3 {
                    s += grad(m, j, n) * yd.0[n][k];
                }
                t.0[m][j][k] = -s;
            }
        }
    }
    t
}

/// `V^Y(x)` through the general [`rough_integral`] with `Z = A(x − Y)`.
pub fn velocity_rough_generic<T: Scalar>(
    y: &ControlledLoop<T>,
    k: &KernelField<T>,
    x: &Vec3<T>,
) -> Vec3<T> {
    let n = y.intervals();
    let pts = y.values().values();
    let z: Vec<_> = pts.iter().map(|p| k.eval_a(&(*x - *p))).collect();
    let zp: Vec<_> = (0..=n)
        .map(|i| {
            let g = k.grad_a(&(*x - pts[i]));
            chain(|m, j, l| g.0[m][j][l], &y.derivative()[i])
        })
        .collect();
    rough_integral(&z, &zp, y, 0, n).expect("consistent grid")
}

/// `∇V^Y(x)` through [`rough_integral`] with `Z = ∂_l A(x − Y)` per column.
pub fn grad_velocity_rough_generic<T: Scalar>(
    y: &ControlledLoop<T>,
    k: &KernelField<T>,
    x: &Vec3<T>,
) -> Mat3<T> {
    let n = y.intervals();
    let pts = y.values().values();
    let g1: Vec<_> = pts.iter().map(|p| k.grad_a(&(*x - *p))).collect();
    let g2: Vec<_> = pts.iter().map(|p| k.grad2_a(&(*x - *p))).collect();
    let mut out = Mat3::zero();
    for l in 0..3 {
        let z: Vec<_> = g1.iter().map(|g| g.slice_last(l)).collect();
        let zp: Vec<_> = (0..=n)
            .map(|i| chain(|m, j, p| g2[i].0[m][j][l][p], &y.derivative()[i]))
            .collect();
        let col = rough_integral(&z, &zp, y, 0, n).expect("consistent grid");
        for m in 0..3 {
            out.0[m][l] = col[m];
        }
    }
    out
}

/// Second derivatives `[m][l][n] = ∂_n ∂_l V^m(x)` through [`rough_integral`].
pub fn hessian_velocity_rough<T: Scalar>(
    y: &ControlledLoop<T>,
    k: &KernelField<T>,
    x: &Vec3<T>,
) -> Tensor3<T> {
    let n = y.intervals();
    let pts = y.values().values();
    let g2: Vec<_> = pts.iter().map(|p| k.grad2_a(&(*x - *p))).collect();
    let g3: Vec<_> = pts.iter().map(|p| k.grad3_a(&(*x - *p))).collect();
    let mut out = Tensor3::zero();
    for l in 0..3 {
        for q in 0..3 {
            let z: Vec<_> = g2
                .iter()
                .map(|g| {
                    let mut m = Mat3::zero();
                    for a in 0..3 {
                        for b in 0..3 {
                            m.0[a][b] = g.0[a][b][l][q];
                        }
                    }
                    m
                })
                .collect();
            let zp: Vec<_> = (0..=n)
                .map(|i| chain(|a, b, p| g3[i][p].0[a][b][l][q], &y.derivative()[i]))
                .collect();
            let v = rough_integral(&z, &zp, y, 0, n).expect("consistent grid");
            for m in 0..3 {
                out.0[m][l][q] = v[m];
            }
        }
    }
    out
}
