use crate::dynamics::{Scheme, Trajectory};
use crate::geometry::Mat3;
use crate::{Error, Result, Scalar};

/// Rotation and stretching of the local frame at one stored time, per node.
#[derive(Clone, Debug, PartialEq)]
pub struct StretchFrame<T> {
    pub t: T,
    /// `S = sym ∇V`
    pub sym: Vec<Mat3<T>>,
    /// `T = antisym ∇V`
    pub skew: Vec<Mat3<T>>,
    /// `dQ/dt = −QT`, `Q(0) = Id`
    pub q: Vec<Mat3<T>>,
    /// Time-ordered `dE/dt = S̃E`, `E(0) = Id`, with `S̃ = QSQᵀ`.
    pub ordered: Vec<Mat3<T>>,
    /// `∫_0^t S̃ ds`
    pub sym_integral: Vec<Mat3<T>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StretchSeries<T> {
    pub frames: Vec<StretchFrame<T>>,
}

/// Integrates `Q` and `E` from samples `∇V(Y(t_k)_ξ)` at increasing times.
///
/// `Q` advances as `Q_{k+1} = Q_k exp(−Δt T̄)` and `E` as `E_{k+1} = exp(Δt S̃̄) E_k`, with
/// `T̄`, `S̃̄` the left value (euler) or the two-point average (heun).
pub fn stretching_decomposition<T: Scalar>(
    times: &[T],
    gradients: &[Vec<Mat3<T>>],
    scheme: Scheme,
) -> Result<StretchSeries<T>> {
    if times.is_empty() || times.len() != gradients.len() {
        return Err(Error::InsufficientData(format!(
            "stretching needs gradient samples at every stored time ({} times, {} samples)",
            times.len(),
            gradients.len()
        )));
    }
    let nodes = gradients[0].len();
    if gradients.iter().any(|g| g.len() != nodes) {
        return Err(Error::InvalidInput("gradient samples differ in node count".into()));
    }
    let split = |g: &[Mat3<T>]| -> (Vec<Mat3<T>>, Vec<Mat3<T>>) {
        g.iter().map(|h| (h.symmetric_part(), h.antisymmetric_part())).unzip()
    };
    let (s0, t0) = split(&gradients[0]);
    let id = vec![Mat3::identity(); nodes];
    let mut frames = vec![StretchFrame {
        t: times[0],
        sym: s0,
        skew: t0,
        q: id.clone(),
        ordered: id,
        sym_integral: vec![Mat3::zero(); nodes],
    }];
    let half = T::lit(0.5);
    for k in 1..times.len() {
        let dt = times[k] - times[k - 1];
        let prev = &frames[k - 1];
        let (sym, skew) = split(&gradients[k]);
        let mut q = Vec::with_capacity(nodes);
        let mut ordered = Vec::with_capacity(nodes);
        let mut sym_integral = Vec::with_capacity(nodes);
        for i in 0..nodes {
            let s_prev = prev.q[i].congruence(&prev.sym[i]);
            let t_bar = match scheme {
                Scheme::Euler => prev.skew[i],
                Scheme::Heun => (prev.skew[i] + skew[i]) * half,
            };
            let qi = prev.q[i].matmul(&(t_bar * (-dt)).exp_skew());
            let s_bar = match scheme {
                Scheme::Euler => s_prev,
                Scheme::Heun => (s_prev + qi.congruence(&sym[i])) * half,
            };
            ordered.push((s_bar * dt).exp().matmul(&prev.ordered[i]));
            sym_integral.push(prev.sym_integral[i] + s_bar * dt);
            q.push(qi);
        }
        frames.push(StretchFrame {
            t: times[k],
            sym,
            skew,
            q,
            ordered,
            sym_integral,
        });
    }
    Ok(StretchSeries { frames })
}

/// Decomposition along the stored snapshots of a run.
pub fn stretching_from_trajectory<T: Scalar>(
    traj: &Trajectory<T>,
    scheme: Scheme,
) -> Result<StretchSeries<T>> {
    if traj.snapshots.len() < 2 {
        return Err(Error::InsufficientData(
            "stretching needs at least two stored snapshots".into(),
        ));
    }
    let times: Vec<T> = traj.snapshots.iter().map(|s| s.t).collect();
    let grads: Vec<Vec<Mat3<T>>> = traj.snapshots.iter().map(|s| s.gradient.clone()).collect();
    stretching_decomposition(&times, &grads, scheme)
}

impl<T: Scalar> StretchSeries<T> {
    /// `max ‖Q Qᵀ − Id‖` over all frames and nodes.
    pub fn orthogonality_defect(&self) -> T {
        let id = Mat3::identity();
        self.frames
            .iter()
            .flat_map(|f| f.q.iter())
            .fold(T::zero(), |m, q| m.max((q.matmul(&q.transpose()) - id).sum_norm()))
    }
}

impl<T: Scalar> StretchFrame<T> {
    /// `Qᵀ E` at node `i`; `ordered = false` replaces `E` by `exp ∫S̃`.
    pub fn frame_map(&self, i: usize, ordered: bool) -> Mat3<T> {
        let e = if ordered {
            self.ordered[i]
        } else {
            self.sym_integral[i].exp()
        };
        self.q[i].transpose().matmul(&e)
    }

    /// `dW(t) = Qᵀ E dW(0) Eᵀ Q` at node `i`.
    pub fn reconstruct(&self, i: usize, dw0: &Mat3<T>, ordered: bool) -> Mat3<T> {
        self.frame_map(i, ordered).congruence(dw0)
    }

    /// `max_i |Y′ dW₀ Y′ᵀ − Qᵀ E dW₀ Eᵀ Q| / max_i |Y′ dW₀ Y′ᵀ|` against the evolved `Y′`.
    pub fn reconstruction_residual(
        &self,
        y_prime: &[Mat3<T>],
        dw0: &[Mat3<T>],
        ordered: bool,
    ) -> Result<T> {
        if y_prime.len() != self.q.len() || dw0.len() != self.q.len() {
            return Err(Error::GridMismatch {
                expected: self.q.len().saturating_sub(1),
                got: y_prime.len().min(dw0.len()).saturating_sub(1),
            });
        }
        let mut num = T::zero();
        let mut den = T::zero();
        for i in 0..self.q.len() {
            let lhs = y_prime[i].congruence(&dw0[i]);
            num = num.max((lhs - self.reconstruct(i, &dw0[i], ordered)).sum_norm());
            den = den.max(lhs.sum_norm());
        }
        Ok(if den > T::zero() { num / den } else { num })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_field_gives_identity() {
        let times: Vec<f64> = (0..6).map(|k| 0.1 * k as f64).collect();
        let grads = vec![vec![Mat3::zero(); 4]; 6];
        let s = stretching_decomposition(&times, &grads, Scheme::Heun).unwrap();
        for f in &s.frames {
            for i in 0..4 {
                assert_eq!(f.q[i], Mat3::identity());
                assert_eq!(f.sym[i], Mat3::zero());
                assert_eq!(f.reconstruct(i, &Mat3::diagonal(2.0), true), Mat3::diagonal(2.0));
            }
        }
    }

    #[test]
    fn constant_rotation_matches_exponential() {
        let t0 = Mat3::from_rows([[0.0, 0.7, -0.2], [-0.7, 0.0, 1.1], [0.2, -1.1, 0.0]]);
        let times: Vec<f64> = (0..=100).map(|k| 0.02 * k as f64).collect();
        let grads = vec![vec![t0]; times.len()];
        for scheme in [Scheme::Euler, Scheme::Heun] {
            let s = stretching_decomposition(&times, &grads, scheme).unwrap();
            assert!(s.orthogonality_defect() < 1e-10);
            let last = s.frames.last().unwrap();
            let want = (t0 * -2.0).exp();
            assert!((last.q[0] - want).max_abs() < 1e-12);
        }
    }

    #[test]
    fn general_exponential_agrees_with_rodrigues_and_diagonal() {
        let w = Mat3::from_rows([[0.0, 3.0, -1.0], [-3.0, 0.0, 2.5], [1.0, -2.5, 0.0]]);
        assert!((w.exp() - w.exp_skew()).max_abs() < 1e-12);
        let d = Mat3::from_rows([[1.5, 0.0, 0.0], [0.0, -0.5, 0.0], [0.0, 0.0, 4.0]]);
        let e = d.exp();
        for (i, v) in [1.5f64, -0.5, 4.0].iter().enumerate() {
            assert!((e.0[i][i] - v.exp()).abs() < 1e-12 * v.exp());
        }
    }

    #[test]
    fn constant_gradient_reconstructs_flow_map() {
        // ∇V ≡ H: Y′(t) = exp(tH) exactly; Qᵀ E must reproduce it.
        let h = Mat3::from_rows([[0.3, 0.5, 0.0], [-0.2, -0.1, 0.4], [0.1, -0.6, -0.2]]);
        let m = 400;
        let times: Vec<f64> = (0..=m).map(|k| k as f64 / m as f64).collect();
        let grads = vec![vec![h]; m + 1];
        let s = stretching_decomposition(&times, &grads, Scheme::Heun).unwrap();
        let yp = vec![h.exp()];
        let r = s.frames[m].reconstruction_residual(&yp, &[Mat3::identity()], true).unwrap();
        assert!(r < 1e-4, "{r}");
    }

    #[test]
    fn empty_history_errors() {
        assert!(stretching_decomposition::<f64>(&[], &[], Scheme::Euler).is_err());
    }
}
