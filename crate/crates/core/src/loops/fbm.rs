//! Fractional Gaussian noise on a uniform grid.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::rng::normals;
use crate::{Error, Result};

/// Largest grid accepted by the exact sampler.
pub const EXACT_SAMPLER_LIMIT: usize = 1 << 14;

/// How fractional Gaussian noise is drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FbmSampler {
    /// Durbin–Levinson recursion on the exact Toeplitz covariance (sequential Cholesky).
    Exact,
    /// Circulant embedding diagonalized by FFT.
    Circulant,
}

/// `Cov(ΔB_j, ΔB_{j+k})` for increments of standard fBm on a grid of step `h`.
pub fn fgn_autocovariance(hurst: f64, h: f64, k: usize) -> f64 {
    let e = 2.0 * hurst;
    let k = k as f64;
    let lower = if k >= 1.0 { (k - 1.0).powf(e) } else { 1.0 };
    0.5 * h.powf(e) * ((k + 1.0).powf(e) - 2.0 * k.powf(e) + lower)
}

/// Three independent noise sequences of length `n` (one per component).
pub fn sample_fgn(
    hurst: f64,
    n: usize,
    seed: u64,
    sampler: FbmSampler,
) -> Result<[Vec<f64>; 3]> {
    let h = 1.0 / n as f64;
    if hurst == 0.5 {
        // white noise; both samplers reduce to it
        let s = h.sqrt();
        return Ok([0u64, 1, 2].map(|c| normals(seed, c, 0, n).into_iter().map(|z| z * s).collect()));
    }
    if hurst == 1.0 {
        // fully correlated increments: B_ξ = ξ Z
        return Ok([0u64, 1, 2].map(|c| vec![normals(seed, c, 0, 1)[0] * h; n]));
    }
    let r: Vec<f64> = (0..=n).map(|k| fgn_autocovariance(hurst, h, k)).collect();
    match sampler {
        FbmSampler::Exact => {
            if n > EXACT_SAMPLER_LIMIT {
                return Err(Error::OutOfRange {
                    key: "loop.N_fine",
                    value: n.to_string(),
                    range: "[1, 16384] for the exact sampler",
                });
            }
            let noise = [0u64, 1, 2].map(|c| normals(seed, c, 0, n));
            durbin_levinson(&r[..n], &noise)
        }
        FbmSampler::Circulant => circulant(&r, seed),
    }
}

/// `X_k = Σ_{j=1}^{k} φ_{kj} X_{k−j} + √v_k ε_k`, run for all components at once.
fn durbin_levinson(r: &[f64], noise: &[Vec<f64>; 3]) -> Result<[Vec<f64>; 3]> {
    let n = r.len();
    let mut out = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut v = r[0];
    if !(v > 0.0) {
        return Err(Error::Factorization {
            step: 0,
            detail: format!("variance {v}"),
        });
    }
    for c in 0..3 {
        out[c][0] = v.sqrt() * noise[c][0];
    }
    let mut phi: Vec<f64> = Vec::with_capacity(n);
    let mut next: Vec<f64> = Vec::with_capacity(n);
    for k in 1..n {
        let mut acc = r[k];
        for j in 1..k {
            acc -= phi[j - 1] * r[k - j];
        }
        let kappa = acc / v;
        next.clear();
        for j in 1..k {
            next.push(phi[j - 1] - kappa * phi[k - j - 1]);
        }
        next.push(kappa);
        std::mem::swap(&mut phi, &mut next);
        v *= 1.0 - kappa * kappa;
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Factorization {
                step: k,
                detail: format!("innovation variance {v} (reflection coefficient {kappa})"),
            });
        }
        let s = v.sqrt();
        for c in 0..3 {
            let x = &out[c];
            let mut pred = 0.0;
            for j in 1..=k {
                pred += phi[j - 1] * x[k - j];
            }
            out[c][k] = pred + s * noise[c][k];
        }
    }
    Ok(out)
}

/// Davies–Harte embedding with first row `r_0..r_n, r_{n−1}..r_1`; `r` holds `r_0..=r_n`.
fn circulant(r: &[f64], seed: u64) -> Result<[Vec<f64>; 3]> {
    let n = r.len() - 1;
    let m = 2 * n;
    let mut row: Vec<Complex<f64>> = r.iter().map(|&v| Complex::new(v, 0.0)).collect();
    row.extend((1..n).rev().map(|k| Complex::new(r[k], 0.0)));
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(m);
    fft.process(&mut row);
    let scale = row.iter().fold(0.0f64, |a, z| a.max(z.re.abs()));
    let mut sqrt_l = Vec::with_capacity(m);
    for (k, z) in row.iter().enumerate() {
        if z.re < -1e-10 * scale {
            return Err(Error::Factorization {
                step: k,
                detail: format!("negative circulant eigenvalue {}", z.re),
            });
        }
        sqrt_l.push((z.re.max(0.0) / m as f64).sqrt());
    }
    let mut out = [Vec::new(), Vec::new(), Vec::new()];
    for (c, slot) in out.iter_mut().enumerate() {
        let re = normals(seed, 8 + 2 * c as u64, 0, m);
        let im = normals(seed, 9 + 2 * c as u64, 0, m);
        let mut w: Vec<Complex<f64>> = (0..m)
            .map(|k| Complex::new(re[k], im[k]) * sqrt_l[k])
            .collect();
        fft.process(&mut w);
        *slot = w[..n].iter().map(|z| z.re).collect();
    }
    Ok(out)
}

/// Cumulative sums `B_0 = 0, B_k = Σ_{j<k} ΔB_j`.
pub fn cumulative(noise: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(noise.len() + 1);
    let mut acc = 0.0;
    out.push(acc);
    for d in noise {
        acc += d;
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn autocovariance_special_values() {
        assert_eq!(fgn_autocovariance(0.5, 0.25, 0), 0.25);
        assert_eq!(fgn_autocovariance(0.5, 0.25, 3), 0.0);
        // sum over a window telescopes to the fBm variance: Var(B_n h) = (nh)^{2H}
        let (hu, h, n) = (0.7, 0.01, 40);
        let mut var = 0.0;
        for i in 0..n {
            for j in 0..n {
                var += fgn_autocovariance(hu, h, (i as i64 - j as i64).unsigned_abs() as usize);
            }
        }
        assert!((var - (n as f64 * h).powf(2.0 * hu)).abs() < 1e-12);
    }

    #[test]
    fn exact_sampler_reproduces_covariance() {
        // empirical lag covariances over many seeds
        let (hu, n, seeds) = (0.35, 16, 4000);
        let h = 1.0 / n as f64;
        let mut acc = vec![0.0; 4];
        for s in 0..seeds {
            let x = sample_fgn(hu, n, s, FbmSampler::Exact).unwrap();
            for c in 0..3 {
                for lag in 0..4 {
                    acc[lag] += x[c][3] * x[c][3 + lag];
                }
            }
        }
        for lag in 0..4 {
            let emp = acc[lag] / (3 * seeds) as f64;
            let exact = fgn_autocovariance(hu, h, lag);
            let se = fgn_autocovariance(hu, h, 0) * (2.0 / (3 * seeds) as f64).sqrt();
            assert!((emp - exact).abs() < 4.0 * se, "lag {lag}: {emp} vs {exact}");
        }
    }

    #[test]
    fn circulant_embedding_is_nonnegative_and_matches_variance() {
        for hu in [0.35, 0.45, 0.6, 0.8, 0.95] {
            let n = 256;
            let mut v = 0.0;
            let mut c1 = 0.0;
            let seeds = 200;
            for s in 0..seeds {
                let x = sample_fgn(hu, n, s, FbmSampler::Circulant).unwrap();
                for c in 0..3 {
                    v += x[c].iter().map(|a| a * a).sum::<f64>();
                    c1 += x[c].windows(2).map(|w| w[0] * w[1]).sum::<f64>();
                }
            }
            let cnt = (3 * seeds as usize * n) as f64;
            let h = 1.0 / n as f64;
            let r0 = fgn_autocovariance(hu, h, 0);
            let r1 = fgn_autocovariance(hu, h, 1);
            // long-range dependence leaves ~600 effective samples when H is close to 1
            let tol = if hu > 0.9 { 4.0 * (2.0f64 / 600.0).sqrt() } else { 0.03 };
            assert!((v / cnt / r0 - 1.0).abs() < tol, "H={hu}");
            assert!((c1 / (cnt - (3 * seeds) as f64) - r1).abs() < tol * r0, "H={hu}");
        }
    }

    #[test]
    fn oversized_exact_request_is_rejected() {
        assert!(sample_fgn(0.4, EXACT_SAMPLER_LIMIT * 2, 0, FbmSampler::Exact).is_err());
        assert!(sample_fgn(0.4, EXACT_SAMPLER_LIMIT * 2, 0, FbmSampler::Circulant).is_ok());
    }

    #[test]
    fn cumulative_starts_at_zero() {
        assert_eq!(cumulative(&[1.0, 2.0, -0.5]), vec![0.0, 1.0, 3.0, 2.5]);
    }
}
