//! Fixed-size vector, matrix and higher-rank tensor primitives in 3-space.
//!
//! Tensor norms follow the entrywise convention `|M| = Σ |M^{i…}|` used by all
//! the bounds in this crate; vectors additionally expose the Euclidean norm.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use crate::Scalar;

/// A point or increment in 3-space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vec3<T>(pub [T; 3]);

/// A 3×3 matrix stored row-major: `m[i][j]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat3<T>(pub [[T; 3]; 3]);

/// A rank-3 tensor `t[i][j][k]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tensor3<T>(pub [[[T; 3]; 3]; 3]);

/// A rank-4 tensor `t[i][j][k][l]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tensor4<T>(pub [[[[T; 3]; 3]; 3]; 3]);

/// Levi-Civita symbol with `ε_{012} = 1`.
#[inline]
pub fn levi_civita<T: Scalar>(i: usize, j: usize, k: usize) -> T {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => T::one(),
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -T::one(),
        _ => T::zero(),
    }
}

impl<T: Scalar> Vec3<T> {
    #[inline]
    pub fn new(x: T, y: T, z: T) -> Self {
        Vec3([x, y, z])
    }

    #[inline]
    pub fn zero() -> Self {
        Vec3([T::zero(); 3])
    }

    pub fn unit(axis: usize) -> Self {
        let mut v = Self::zero();
        v.0[axis] = T::one();
        v
    }

    #[inline]
    pub fn dot(&self, o: &Self) -> T {
        self.0[0] * o.0[0] + self.0[1] * o.0[1] + self.0[2] * o.0[2]
    }

    #[inline]
    pub fn cross(&self, o: &Self) -> Self {
        let a = &self.0;
        let b = &o.0;
        Vec3([
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ])
    }

    #[inline]
    pub fn norm_sq(&self) -> T {
        self.dot(self)
    }

    /// Euclidean norm.
    #[inline]
    pub fn norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    /// Entrywise `Σ|v^i|`.
    pub fn sum_norm(&self) -> T {
        self.0.iter().map(|v| v.abs()).sum()
    }

    pub fn max_abs(&self) -> T {
        self.0.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn outer(&self, o: &Self) -> Mat3<T> {
        let mut m = Mat3::zero();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = self.0[i] * o.0[j];
            }
        }
        m
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> Vec3<U> {
        Vec3([f(self.0[0]), f(self.0[1]), f(self.0[2])])
    }
}

impl<T: Scalar> Add for Vec3<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Vec3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl<T: Scalar> Sub for Vec3<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Vec3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl<T: Scalar> AddAssign for Vec3<T> {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        for i in 0..3 {
            self.0[i] += o.0[i];
        }
    }
}

impl<T: Scalar> SubAssign for Vec3<T> {
    #[inline]
    fn sub_assign(&mut self, o: Self) {
        for i in 0..3 {
            self.0[i] -= o.0[i];
        }
    }
}

impl<T: Scalar> Mul<T> for Vec3<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        Vec3([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }
}

impl<T: Scalar> Neg for Vec3<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Vec3([-self.0[0], -self.0[1], -self.0[2]])
    }
}

impl<T> Index<usize> for Vec3<T> {
    type Output = T;
    #[inline]
    fn index(&self, i: usize) -> &T {
        &self.0[i]
    }
}

impl<T> IndexMut<usize> for Vec3<T> {
    #[inline]
    fn index_mut(&mut self, i: usize) -> &mut T {
        &mut self.0[i]
    }
}

impl<T: Scalar> Mat3<T> {
    #[inline]
    pub fn zero() -> Self {
        Mat3([[T::zero(); 3]; 3])
    }

    pub fn identity() -> Self {
        Self::diagonal(T::one())
    }

    pub fn diagonal(d: T) -> Self {
        let mut m = Self::zero();
        for i in 0..3 {
            m.0[i][i] = d;
        }
        m
    }

    pub fn from_rows(r: [[T; 3]; 3]) -> Self {
        Mat3(r)
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = self.0[j][i];
            }
        }
        m
    }

    #[inline]
    pub fn mul_vec(&self, v: &Vec3<T>) -> Vec3<T> {
        let m = &self.0;
        Vec3([
            m[0][0] * v.0[0] + m[0][1] * v.0[1] + m[0][2] * v.0[2],
            m[1][0] * v.0[0] + m[1][1] * v.0[1] + m[1][2] * v.0[2],
            m[2][0] * v.0[0] + m[2][1] * v.0[1] + m[2][2] * v.0[2],
        ])
    }

    /// `Mᵀ v`.
    #[inline]
    pub fn tr_mul_vec(&self, v: &Vec3<T>) -> Vec3<T> {
        let m = &self.0;
        Vec3([
            m[0][0] * v.0[0] + m[1][0] * v.0[1] + m[2][0] * v.0[2],
            m[0][1] * v.0[0] + m[1][1] * v.0[1] + m[2][1] * v.0[2],
            m[0][2] * v.0[0] + m[1][2] * v.0[1] + m[2][2] * v.0[2],
        ])
    }

    pub fn matmul(&self, o: &Self) -> Self {
        let mut m = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                let mut s = T::zero();
                for k in 0..3 {
                    s += self.0[i][k] * o.0[k][j];
                }
                m.0[i][j] = s;
            }
        }
        m
    }

    /// `M B Mᵀ`.
    pub fn congruence(&self, b: &Self) -> Self {
        self.matmul(b).matmul(&self.transpose())
    }

    pub fn row(&self, i: usize) -> Vec3<T> {
        Vec3(self.0[i])
    }

    pub fn col(&self, j: usize) -> Vec3<T> {
        Vec3([self.0[0][j], self.0[1][j], self.0[2][j]])
    }

    pub fn trace(&self) -> T {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn determinant(&self) -> T {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Entrywise `Σ|M^{ij}|`.
    pub fn sum_norm(&self) -> T {
        self.0.iter().flatten().map(|v| v.abs()).sum()
    }

    pub fn max_abs(&self) -> T {
        self.0.iter().flatten().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|v| v.is_finite())
    }

    pub fn symmetric_part(&self) -> Self {
        let half = T::lit(0.5);
        let mut m = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = (self.0[i][j] + self.0[j][i]) * half;
            }
        }
        m
    }

    pub fn antisymmetric_part(&self) -> Self {
        let half = T::lit(0.5);
        let mut m = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = (self.0[i][j] - self.0[j][i]) * half;
            }
        }
        m
    }

    /// `Σ_{jk} ε_{ijk} M^{kj}`, i.e. `(M21−M12, M02−M20, M10−M01)`.
    #[inline]
    pub fn axial(&self) -> Vec3<T> {
        let m = &self.0;
        Vec3([m[2][1] - m[1][2], m[0][2] - m[2][0], m[1][0] - m[0][1]])
    }

    /// Skew matrix `[w]×` with `[w]× v = w × v`.
    pub fn skew(w: &Vec3<T>) -> Self {
        let z = T::zero();
        Mat3([[z, -w.0[2], w.0[1]], [w.0[2], z, -w.0[0]], [-w.0[1], w.0[0], z]])
    }

    /// Exponential of an antisymmetric matrix by the Rodrigues formula; the result is a
    /// rotation to rounding. Only the antisymmetric part of `self` is used.
    pub fn exp_skew(&self) -> Self {
        let w = self.antisymmetric_part().axial() * T::lit(0.5);
        let theta = w.norm();
        let k = Self::skew(&w);
        let k2 = k.matmul(&k);
        let (a, b) = if theta < T::lit(1e-4) {
            let t2 = theta * theta;
            (
                T::one() - t2 / T::lit(6.0) + t2 * t2 / T::lit(120.0),
                T::lit(0.5) - t2 / T::lit(24.0) + t2 * t2 / T::lit(720.0),
            )
        } else {
            (theta.sin() / theta, (T::one() - theta.cos()) / (theta * theta))
        };
        Self::identity() + k * a + k2 * b
    }

    /// General matrix exponential: scaling and squaring around a degree-16 Taylor polynomial.
    pub fn exp(&self) -> Self {
        let norm = self.sum_norm();
        let mut squarings = 0u32;
        let mut scale = T::one();
        while norm * scale > T::lit(0.5) && squarings < 64 {
            scale = scale * T::lit(0.5);
            squarings += 1;
        }
        let a = *self * scale;
        let mut term = Self::identity();
        let mut sum = Self::identity();
        for k in 1..=16 {
            term = term.matmul(&a) * (T::one() / T::from_count(k));
            sum += term;
        }
        for _ in 0..squarings {
            sum = sum.matmul(&sum);
        }
        sum
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> Mat3<U> {
        let mut m = Mat3::<U>::zero();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = f(self.0[i][j]);
            }
        }
        m
    }
}

impl<T: Scalar> Add for Mat3<T> {
    type Output = Self;
    fn add(mut self, o: Self) -> Self {
        self += o;
        self
    }
}

impl<T: Scalar> Sub for Mat3<T> {
    type Output = Self;
    fn sub(mut self, o: Self) -> Self {
        self -= o;
        self
    }
}

impl<T: Scalar> AddAssign for Mat3<T> {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        for i in 0..3 {
            for j in 0..3 {
                self.0[i][j] += o.0[i][j];
            }
        }
    }
}

impl<T: Scalar> SubAssign for Mat3<T> {
    #[inline]
    fn sub_assign(&mut self, o: Self) {
        for i in 0..3 {
            for j in 0..3 {
                self.0[i][j] -= o.0[i][j];
            }
        }
    }
}

impl<T: Scalar> Mul<T> for Mat3<T> {
    type Output = Self;
    fn mul(mut self, s: T) -> Self {
        for i in 0..3 {
            for j in 0..3 {
                self.0[i][j] *= s;
            }
        }
        self
    }
}

impl<T: Scalar> Neg for Mat3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        self * -T::one()
    }
}

impl<T: Scalar> Tensor3<T> {
    pub fn zero() -> Self {
        Tensor3([[[T::zero(); 3]; 3]; 3])
    }

    pub fn sum_norm(&self) -> T {
        self.0.iter().flatten().flatten().map(|v| v.abs()).sum()
    }

    pub fn max_abs(&self) -> T {
        self.0
            .iter()
            .flatten()
            .flatten()
            .fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// The matrix `t[·][·][k]` for fixed last index.
    pub fn slice_last(&self, k: usize) -> Mat3<T> {
        let mut m = Mat3::zero();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = self.0[i][j][k];
            }
        }
        m
    }

    /// Contracts the last index with a matrix: `(t·M)[i][j][l] = Σ_k t[i][j][k] M[k][l]`.
    pub fn contract_last(&self, m: &Mat3<T>) -> Self {
        let mut out = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                for l in 0..3 {
                    let mut s = T::zero();
                    for k in 0..3 {
                        s += self.0[i][j][k] * m.0[k][l];
                    }
                    out.0[i][j][l] = s;
                }
            }
        }
        out
    }
}

impl<T: Scalar> Sub for Tensor3<T> {
    type Output = Self;
    fn sub(mut self, o: Self) -> Self {
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    self.0[i][j][k] -= o.0[i][j][k];
                }
            }
        }
        self
    }
}

impl<T: Scalar> Mul<T> for Tensor3<T> {
    type Output = Self;
    fn mul(mut self, s: T) -> Self {
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    self.0[i][j][k] *= s;
                }
            }
        }
        self
    }
}

impl<T: Scalar> Tensor4<T> {
    pub fn zero() -> Self {
        Tensor4([[[[T::zero(); 3]; 3]; 3]; 3])
    }

    pub fn sum_norm(&self) -> T {
        self.0
            .iter()
            .flatten()
            .flatten()
            .flatten()
            .map(|v| v.abs())
            .sum()
    }

    pub fn max_abs(&self) -> T {
        self.0
            .iter()
            .flatten()
            .flatten()
            .flatten()
            .fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// The rank-3 slice `t[·][·][·][l]`.
    pub fn slice_last(&self, l: usize) -> Tensor3<T> {
        let mut out = Tensor3::zero();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    out.0[i][j][k] = self.0[i][j][k][l];
                }
            }
        }
        out
    }
}

impl<T: Scalar> Sub for Tensor4<T> {
    type Output = Self;
    fn sub(mut self, o: Self) -> Self {
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        self.0[i][j][k][l] -= o.0[i][j][k][l];
                    }
                }
            }
        }
        self
    }
}

impl<T: Scalar> Mul<T> for Tensor4<T> {
    type Output = Self;
    fn mul(mut self, s: T) -> Self {
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        self.0[i][j][k][l] *= s;
                    }
                }
            }
        }
        self
    }
}

/// Rotation about a unit axis by `angle` (right-handed).
pub fn rotation<T: Scalar>(axis: Vec3<T>, angle: T) -> Mat3<T> {
    let k = Mat3::skew(&(axis * (T::one() / axis.norm())));
    let k2 = k.matmul(&k);
    Mat3::identity() + k * angle.sin() + k2 * (T::one() - angle.cos())
}
