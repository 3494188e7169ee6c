//! Test-side oracles that share no code with the library's integrators.
#![allow(dead_code)]

use std::f64::consts::TAU;

use filament_core::geometry::{HolderExponent, Mat3, SampledLoop, Vec3};
use filament_core::rough::{AreaBlocks, RoughLoop};

/// Adaptive Simpson on `[a, b]` for a vector-valued integrand, to absolute tolerance `tol`.
pub fn adaptive_simpson<const D: usize>(
    f: &dyn Fn(f64) -> [f64; D],
    a: f64,
    b: f64,
    tol: f64,
) -> [f64; D] {
    fn simpson<const D: usize>(fa: &[f64; D], fm: &[f64; D], fb: &[f64; D], h: f64) -> [f64; D] {
        let mut out = [0.0; D];
        for k in 0..D {
            out[k] = h / 6.0 * (fa[k] + 4.0 * fm[k] + fb[k]);
        }
        out
    }
    #[allow(clippy::too_many_arguments)]
    fn rec<const D: usize>(
        f: &dyn Fn(f64) -> [f64; D],
        a: f64,
        b: f64,
        fa: [f64; D],
        fm: [f64; D],
        fb: [f64; D],
        whole: [f64; D],
        tol: f64,
        depth: u32,
    ) -> [f64; D] {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(&fa, &flm, &fm, m - a);
        let right = simpson(&fm, &frm, &fb, b - m);
        let err = (0..D)
            .map(|k| (left[k] + right[k] - whole[k]).abs())
            .fold(0.0, f64::max);
        if depth == 0 || err <= 15.0 * tol {
            let mut out = [0.0; D];
            for k in 0..D {
                out[k] = left[k] + right[k] + (left[k] + right[k] - whole[k]) / 15.0;
            }
            return out;
        }
        let l = rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1);
        let r = rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
        let mut out = [0.0; D];
        for k in 0..D {
            out[k] = l[k] + r[k];
        }
        out
    }
    // split first so that periodic integrands cannot fool the initial estimate
    let pieces = 16;
    let mut total = [0.0; D];
    for p in 0..pieces {
        let lo = a + (b - a) * p as f64 / pieces as f64;
        let hi = a + (b - a) * (p + 1) as f64 / pieces as f64;
        let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
        let whole = simpson(&fa, &fm, &fb, hi - lo);
        let part = rec(f, lo, hi, fa, fm, fb, whole, tol / pieces as f64, 40);
        for k in 0..D {
            total[k] += part[k];
        }
    }
    total
}

/// Unit circle `(cos 2πξ, sin 2πξ, 0)` and its derivative.
pub fn circle_point(xi: f64) -> ([f64; 3], [f64; 3]) {
    let t = TAU * xi;
    ([t.cos(), t.sin(), 0.0], [-TAU * t.sin(), TAU * t.cos(), 0.0])
}

pub fn circle_nodes(n: usize) -> Vec<Vec3<f64>> {
    (0..=n)
        .map(|i| {
            let (p, _) = circle_point(i as f64 / n as f64);
            Vec3::new(p[0], p[1], p[2])
        })
        .collect()
}

/// Closed-form `∫_a^b (X − X_a) ⊗ dX` of the smooth unit circle.
pub fn circle_area(a: f64, b: f64) -> Mat3<f64> {
    let (ta, tb) = (TAU * a, TAU * b);
    let (ca, sa) = (ta.cos(), ta.sin());
    let (cb, sb) = (tb.cos(), tb.sin());
    let d = tb - ta;
    // ∫ cos t d(cos t) = (cb² − ca²)/2, ∫ cos t d(sin t) = d/2 + (sin 2tb − sin 2ta)/4, …
    let cc = 0.5 * (cb * cb - ca * ca);
    let ss = 0.5 * (sb * sb - sa * sa);
    let cs = 0.5 * d + 0.25 * ((2.0 * tb).sin() - (2.0 * ta).sin());
    let sc = -0.5 * d + 0.25 * ((2.0 * tb).sin() - (2.0 * ta).sin());
    let mut m = Mat3::zero();
    m.0[0][0] = cc - ca * (cb - ca);
    m.0[0][1] = cs - ca * (sb - sa);
    m.0[1][0] = sc - sa * (cb - ca);
    m.0[1][1] = ss - sa * (sb - sa);
    m
}

/// The unit circle with its exact (smooth-path) areas.
pub fn circle_exact_lift(n: usize, gamma: f64) -> RoughLoop<f64> {
    let blocks = (0..n)
        .map(|i| circle_area(i as f64 / n as f64, (i + 1) as f64 / n as f64))
        .collect();
    RoughLoop::new(
        SampledLoop::new(circle_nodes(n)).unwrap(),
        AreaBlocks::new(blocks).unwrap(),
        HolderExponent::new(gamma).unwrap(),
    )
    .unwrap()
}

/// A smooth non-planar closed curve.
pub fn wobbly_loop(n: usize) -> SampledLoop<f64> {
    SampledLoop::new(
        (0..=n)
            .map(|i| {
                let t = TAU * i as f64 / n as f64;
                Vec3::new(
                    t.cos() + 0.25 * (2.0 * t).cos(),
                    t.sin() - 0.2 * (3.0 * t).sin(),
                    0.3 * (2.0 * t).sin(),
                )
            })
            .collect(),
    )
    .unwrap()
}

/// Least-squares slope of `log e` against `log h`.
pub fn fitted_order(h: &[f64], e: &[f64]) -> f64 {
    let x: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Reference `A(z) = −(Γ/4π) [z]× (|z|² + μ²)^{-3/2}` written out entrywise.
pub fn kernel_reference(gamma: f64, mu: f64, z: [f64; 3]) -> [[f64; 3]; 3] {
    let r2 = z[0] * z[0] + z[1] * z[1] + z[2] * z[2];
    let c = -gamma / (4.0 * std::f64::consts::PI) * (r2 + mu * mu).powf(-1.5);
    [
        [0.0, c * z[2], -c * z[1]],
        [-c * z[2], 0.0, c * z[0]],
        [c * z[1], -c * z[0], 0.0],
    ]
}

/// Smooth parametrization of [`wobbly_loop`] and its derivative.
pub fn wobbly_point(xi: f64) -> ([f64; 3], [f64; 3]) {
    let t = TAU * xi;
    (
        [t.cos() + 0.25 * (2.0 * t).cos(), t.sin() - 0.2 * (3.0 * t).sin(), 0.3 * (2.0 * t).sin()],
        [
            TAU * (-t.sin() - 0.5 * (2.0 * t).sin()),
            TAU * (t.cos() - 0.6 * (3.0 * t).cos()),
            TAU * 0.6 * (2.0 * t).cos(),
        ],
    )
}

/// `∫_0^1 A(x − X_ξ) X′_ξ dξ` for a smooth parametrization, by adaptive Simpson.
pub fn velocity_oracle(
    curve: fn(f64) -> ([f64; 3], [f64; 3]),
    gamma: f64,
    mu: f64,
    x: [f64; 3],
) -> [f64; 3] {
    let f = |xi: f64| {
        let (p, dp) = curve(xi);
        let a = kernel_reference(gamma, mu, [x[0] - p[0], x[1] - p[1], x[2] - p[2]]);
        let mut out = [0.0; 3];
        for m in 0..3 {
            for j in 0..3 {
                out[m] += a[m][j] * dp[j];
            }
        }
        out
    };
    adaptive_simpson(&f, 0.0, 1.0, 1e-14)
}
