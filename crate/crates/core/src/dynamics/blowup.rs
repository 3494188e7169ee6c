use crate::{Error, Result};

/// Largest relative RMS misfit of `1/y²` accepted as a blow-up fit.
pub const BLOWUP_RESIDUAL_LIMIT: f64 = 1e-2;

/// Fit of `y(t) ≈ C (t̂ − t)^{-1/2}` on the tail of a norm series.
#[derive(Clone, Debug, PartialEq)]
pub struct BlowupFit {
    pub t_hat: f64,
    pub c: f64,
    /// Relative RMS residual of the linear fit of `1/y²`.
    pub residual: f64,
    /// Number of tail points used.
    pub points: usize,
    /// Fit passed the shape test.
    pub accepted: bool,
    /// Every tail point lies on or above the fitted lower-bound shape (0.1% slack).
    pub above_bound: bool,
}

/// Least-squares fit of `1/y² = a + b t` on the last `max(5, len/2)` points; `t̂ = −a/b`,
/// `C = (−b)^{-1/2}`. Rejected when `b ≥ 0` or the residual exceeds [`BLOWUP_RESIDUAL_LIMIT`].
pub fn blowup_report(series: &[(f64, f64)]) -> Result<BlowupFit> {
    if series.len() < 5 {
        return Err(Error::InsufficientData(format!(
            "blow-up fit needs at least 5 points, got {}",
            series.len()
        )));
    }
    let take = (series.len() / 2).max(5);
    let tail = &series[series.len() - take..];
    if let Some(p) = tail.iter().find(|(t, y)| !t.is_finite() || !y.is_finite() || *y <= 0.0) {
        return Err(Error::InvalidInput(format!("unusable series point {p:?}")));
    }
    let pts: Vec<(f64, f64)> = tail.iter().map(|&(t, y)| (t, 1.0 / (y * y))).collect();
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mu = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let stt: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let stu: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - mu)).sum();
    if stt == 0.0 {
        return Err(Error::InsufficientData("tail times are all equal".into()));
    }
    let b = stu / stt;
    let a = mu - b * mt;
    let rms = (pts.iter().map(|p| (p.1 - a - b * p.0).powi(2)).sum::<f64>() / n).sqrt();
    let scale = (pts.iter().map(|p| p.1 * p.1).sum::<f64>() / n).sqrt();
    let residual = if scale > 0.0 { rms / scale } else { f64::INFINITY };
    let (t_hat, c) = if b < 0.0 {
        (-a / b, 1.0 / (-b).sqrt())
    } else {
        (f64::INFINITY, f64::NAN)
    };
    let accepted = b < 0.0 && residual <= BLOWUP_RESIDUAL_LIMIT;
    let above_bound = accepted
        && tail
            .iter()
            .all(|&(t, y)| t >= t_hat || y >= (1.0 - 1e-3) * c / (t_hat - t).sqrt());
    Ok(BlowupFit {
        t_hat,
        c,
        residual,
        points: take,
        accepted,
        above_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_inverse_square_root() {
        let s: Vec<_> = (0..50)
            .map(|i| {
                let t = 0.9 * i as f64 / 49.0;
                (t, (1.0 - t).powf(-0.5))
            })
            .collect();
        let f = blowup_report(&s).unwrap();
        assert!(f.accepted && f.above_bound);
        assert!((f.t_hat - 1.0).abs() < 1e-10);
        assert!((f.c - 1.0).abs() < 1e-10);
    }

    #[test]
    fn bounded_series_is_rejected() {
        let s: Vec<_> = (0..50)
            .map(|i| {
                let t = i as f64 / 49.0;
                (t, 1.0 + 0.3 * (6.0 * t).sin())
            })
            .collect();
        assert!(!blowup_report(&s).unwrap().accepted);
        let flat: Vec<_> = (0..10).map(|i| (i as f64, 2.0)).collect();
        assert!(!blowup_report(&flat).unwrap().accepted);
    }

    #[test]
    fn short_series_errors() {
        let s = vec![(0.0, 1.0), (0.1, 1.1), (0.2, 1.2), (0.3, 1.4)];
        assert!(matches!(blowup_report(&s), Err(Error::InsufficientData(_))));
    }
}
