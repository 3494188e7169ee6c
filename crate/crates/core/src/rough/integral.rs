use rayon::prelude::*;

use crate::geometry::{Mat3, Tensor3, Vec3};
use crate::rough::{AreaBlocks, ControlledLoop, RoughLoop};
use crate::{Error, Result, Scalar};

/// One compensated term `Z δY + Σ_{jkl} Z′^{mj,k} Y′^{jl} 𝕏²^{kl}`.
#[inline]
pub fn rough_increment<T: Scalar>(
    z: &Mat3<T>,
    z_prime: &Tensor3<T>,
    dy: &Vec3<T>,
    y_prime: &Mat3<T>,
    area: &Mat3<T>,
) -> Vec3<T> {
    // M^{jk} = Σ_l Y′^{jl} 𝕏²^{kl}
    let m = y_prime.matmul(&area.transpose());
    let mut out = z.mul_vec(dy);
    for a in 0..3 {
        let mut s = T::zero();
        for j in 0..3 {
            for k in 0..3 {
                s += z_prime.0[a][j][k] * m.0[j][k];
            }
        }
        out[a] += s;
    }
    out
}

/// Compensated sum of `∫_a^b Z dY` for a matrix integrand `Z` with derivative `Z′`
/// (`Z′^{mj,k}` stored as `[m][j][k]`) controlled by the same reference as `Y`.
pub fn rough_integral<T: Scalar>(
    z: &[Mat3<T>],
    z_prime: &[Tensor3<T>],
    y: &ControlledLoop<T>,
    a: usize,
    b: usize,
) -> Result<Vec3<T>> {
    let n = y.intervals();
    for len in [z.len(), z_prime.len()] {
        if len != n + 1 {
            return Err(Error::GridMismatch {
                expected: n,
                got: len.saturating_sub(1),
            });
        }
    }
    if b > n {
        return Err(Error::IndexOutOfRange { index: b, max: n });
    }
    if a > b {
        return Err(Error::InvalidInput(format!("subinterval [{a}, {b}] is reversed")));
    }
    let (yv, yd) = (y.values().values(), y.derivative());
    let blocks = y.reference().area().blocks();
    let mut acc = Vec3::zero();
    for i in a..b {
        acc += rough_increment(&z[i], &z_prime[i], &(yv[i + 1] - yv[i]), &yd[i], &blocks[i]);
    }
    Ok(acc)
}

/// Areas of `Y` from `∫ (Y − Y_{ξ_i}) ⊗ dY` on every elementary interval.
///
/// Row `p` of a block is the rough integral of `Z^{mj} = δ_{mj} (Y − Y_{ξ_i})^p`,
/// whose derivative is `Z′^{mj,k} = δ_{mj} Y′^{pk}`.
pub fn lift_controlled<T: Scalar>(y: &ControlledLoop<T>) -> Result<RoughLoop<T>> {
    let yv = y.values().values();
    let yd = y.derivative();
    let blocks = y.reference().area().blocks();
    let out: Vec<Mat3<T>> = (0..y.intervals())
        .into_par_iter()
        .map(|i| {
            let dy = yv[i + 1] - yv[i];
            let mut block = Mat3::zero();
            for p in 0..3 {
                let mut zp = Tensor3::zero();
                for m in 0..3 {
                    for k in 0..3 {
                        zp.0[m][m][k] = yd[i].0[p][k];
                    }
                }
                // Z vanishes at the left node
                let row = rough_increment(&Mat3::zero(), &zp, &dy, &yd[i], &blocks[i]);
                for m in 0..3 {
                    block.0[p][m] = row[m];
                }
            }
            block
        })
        .collect();
    RoughLoop::new(y.values().clone(), AreaBlocks::new(out)?, y.reference().gamma())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{HolderExponent, SampledLoop, SampledPath};
    use crate::rough::{chen_residual, piecewise_linear_lift, RoughPath};
    use proptest::prelude::*;
    use std::sync::Arc;

    fn gamma() -> HolderExponent<f64> {
        HolderExponent::new(0.45).unwrap()
    }

    fn wiggly(n: usize) -> Arc<RoughLoop<f64>> {
        let lp = SampledLoop::new(
            (0..=n)
                .map(|i| {
                    let t = std::f64::consts::TAU * i as f64 / n as f64;
                    Vec3::new(t.cos() + 0.2 * (5.0 * t).sin(), t.sin(), 0.3 * (3.0 * t).cos())
                })
                .collect(),
        )
        .unwrap();
        Arc::new(piecewise_linear_lift(&lp, gamma()).unwrap())
    }

    #[test]
    fn constant_integrand_telescopes() {
        let y = ControlledLoop::identity(wiggly(64));
        let c = Mat3::from_rows([[1.0, -2.0, 0.0], [0.3, 0.0, 1.0], [2.0, 1.0, 1.0]]);
        let r = rough_integral(&vec![c; 65], &vec![Tensor3::zero(); 65], &y, 0, 64).unwrap();
        assert!(r.max_abs() < 1e-13);
    }

    #[test]
    fn linear_path_self_integral_is_exact_at_one_interval() {
        // ∫_0^1 X^p dX^m for X = vξ: Z^{mj} = δ_{mj} X^p, Z′^{mj,k} = δ_{mj} δ_{pk}
        let v = Vec3::new(0.7, -1.3, 2.0);
        for n in [1usize, 3, 10] {
            let path = SampledPath::new((0..=n).map(|i| v * (i as f64 / n as f64)).collect()).unwrap();
            let rp = RoughPath::piecewise_linear(path).unwrap();
            let xv = rp.path().values();
            let mut got = Mat3::zero();
            for p in 0..3 {
                let mut acc = Vec3::zero();
                for i in 0..n {
                    let mut zp = Tensor3::zero();
                    for m in 0..3 {
                        zp.0[m][m][p] = 1.0;
                    }
                    let z = Mat3::diagonal(xv[i][p]);
                    acc += rough_increment(&z, &zp, &(xv[i + 1] - xv[i]), &Mat3::identity(), &rp.area().block(i));
                }
                for m in 0..3 {
                    got.0[p][m] = acc[m];
                }
            }
            assert!((got - v.outer(&v) * 0.5).max_abs() < 1e-14);
        }
    }

    #[test]
    fn lift_of_identity_path_is_identity_on_areas() {
        let x = wiggly(64);
        let l = lift_controlled(&ControlledLoop::identity(x.clone())).unwrap();
        for (a, b) in l.area().blocks().iter().zip(x.area().blocks()) {
            assert!((*a - *b).max_abs() < 1e-13);
        }
        assert!(chen_residual(&l) < 1e-13);
    }

    #[test]
    fn lift_of_translate_keeps_areas() {
        let x = wiggly(64);
        let y = ControlledLoop::identity(x.clone()).translate(Vec3::new(5.0, -1.0, 2.0)).unwrap();
        let l = lift_controlled(&y).unwrap();
        for (a, b) in l.area().blocks().iter().zip(x.area().blocks()) {
            assert!((*a - *b).max_abs() < 1e-13);
        }
    }

    #[test]
    fn lift_of_linear_image_is_congruent() {
        let x = wiggly(64);
        let m = Mat3::from_rows([[1.0, 0.5, 0.0], [-0.3, 2.0, 1.0], [0.0, 0.4, -1.0]]);
        let y = ControlledLoop::new(x.clone(), x.path().rotate(&m).unwrap(), vec![m; 65]).unwrap();
        let l = lift_controlled(&y).unwrap();
        for i in 0..=64 {
            for j in i..=64 {
                let lhs = l.compose(i, j).unwrap();
                let rhs = m.congruence(&x.compose(i, j).unwrap());
                assert!((lhs - rhs).max_abs() < 1e-12, "{i} {j}");
            }
        }
    }

    proptest! {
        #[test]
        fn affine_data_is_integrated_exactly(
            v in proptest::collection::vec(-2.0..2.0f64, 3),
            b in proptest::collection::vec(-1.0..1.0f64, 9),
            c in proptest::collection::vec(-1.0..1.0f64, 27),
            n in 1usize..12,
        ) {
            // X = vξ, Z^{mj}(ξ) = B^{mj} + Σ_k C^{mj,k} X^k ; exact ∫Z dX = B v + ½ C[v, v]
            let v = Vec3::new(v[0], v[1], v[2]);
            let bm = Mat3::from_rows([[b[0], b[1], b[2]], [b[3], b[4], b[5]], [b[6], b[7], b[8]]]);
            let mut cz = Tensor3::zero();
            for m in 0..3 { for j in 0..3 { for k in 0..3 { cz.0[m][j][k] = c[9 * m + 3 * j + k]; }}}
            let path = SampledPath::new((0..=n).map(|i| v * (i as f64 / n as f64)).collect()).unwrap();
            let rp = RoughPath::piecewise_linear(path).unwrap();
            let xv = rp.path().values();
            let mut acc = Vec3::zero();
            for i in 0..n {
                let mut z = bm;
                for m in 0..3 { for j in 0..3 { for k in 0..3 { z.0[m][j] += cz.0[m][j][k] * xv[i][k]; }}}
                acc += rough_increment(&z, &cz, &(xv[i + 1] - xv[i]), &Mat3::identity(), &rp.area().block(i));
            }
            let mut exact = bm.mul_vec(&v);
            for m in 0..3 { for j in 0..3 { for k in 0..3 { exact[m] += 0.5 * cz.0[m][j][k] * v[k] * v[j]; }}}
            prop_assert!((acc - exact).max_abs() < 1e-12);
        }
    }
}
