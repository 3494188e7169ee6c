use crate::geometry::{Mat3, ParamGrid, SampledLoop, Vec3};
use crate::{Error, Result, Scalar};

/// `ξ_i ↦ [Y, Y*]_{ξ_i}` on the loop grid, estimated at mesh `ε`.
#[derive(Clone, Debug, PartialEq)]
pub struct CovariationSeries<T> {
    grid: ParamGrid,
    values: Vec<Mat3<T>>,
    mesh: T,
}

impl<T: Scalar> CovariationSeries<T> {
    pub fn new(values: Vec<Mat3<T>>, mesh: T) -> Result<Self> {
        let grid = ParamGrid::new(values.len().saturating_sub(1))?;
        Ok(Self { grid, values, mesh })
    }

    pub fn grid(&self) -> ParamGrid {
        self.grid
    }

    pub fn values(&self) -> &[Mat3<T>] {
        &self.values
    }

    pub fn mesh(&self) -> T {
        self.mesh
    }

    /// Value at the node nearest to `ξ`.
    pub fn at(&self, xi: T) -> Mat3<T> {
        let n = self.grid.intervals();
        let i = (xi * T::from_count(n)).round().to_usize().unwrap_or(0).min(n);
        self.values[i]
    }

    /// Smallest eigenvalue-like test value: the minimum over increments of `min_v vᵀ ΔW v`
    /// on the coordinate and diagonal directions, normalized by `|W_1|`.
    pub fn monotonicity_defect(&self) -> T {
        let scale = self.values.last().map(|m| m.sum_norm()).unwrap_or(T::zero());
        if scale == T::zero() {
            return T::zero();
        }
        let one = T::one();
        let dirs = [
            Vec3::new(one, T::zero(), T::zero()),
            Vec3::new(T::zero(), one, T::zero()),
            Vec3::new(T::zero(), T::zero(), one),
            Vec3::new(one, one, one),
            Vec3::new(one, -one, T::zero()),
        ];
        let mut worst = T::zero();
        for w in self.values.windows(2) {
            let d = w[1] - w[0];
            for v in &dirs {
                worst = worst.min(v.dot(&d.mul_vec(v)) / v.norm_sq());
            }
        }
        -worst / scale
    }
}

fn mesh_cells<T: Scalar>(n: usize, eps: T) -> Result<usize> {
    let cells = eps * T::from_count(n);
    let m = cells.round();
    if cells < T::one() - T::lit(1e-9) {
        return Err(Error::MeshTooFine {
            mesh: eps.to_f64_lossy(),
            n,
        });
    }
    if (cells - m).abs() > T::lit(1e-6) * m {
        return Err(Error::MeshMismatch {
            mesh: eps.to_f64_lossy(),
            n,
        });
    }
    Ok(m.to_usize().unwrap_or(1).max(1))
}

/// `Σ_k (Y_{ρ_{k+1}∧ξ} − Y_{ρ_k∧ξ}) ⊗ (same)` over the subdivision `ρ_k = kε`, with
/// `Y_ξ = Y_1` past `ξ = 1`; `ε` must be a multiple of `1/N`.
pub fn covariation_estimate<T: Scalar>(lp: &SampledLoop<T>, eps: T) -> Result<CovariationSeries<T>> {
    let n = lp.intervals();
    let m = mesh_cells(n, eps)?;
    let y = lp.values();
    let mut out = Vec::with_capacity(n + 1);
    let mut full = Mat3::zero();
    for j in 0..=n {
        let start = (j / m) * m;
        if j > 0 && j % m == 0 {
            let d = y[j] - y[j - m];
            full += d.outer(&d);
        }
        let d = y[j] - y[start];
        out.push(full + d.outer(&d));
    }
    CovariationSeries::new(out, eps)
}

/// Shift form `ε⁻¹ ∫_0^ξ (Y_{ρ+ε} − Y_ρ) ⊗ (Y_{ρ+ε} − Y_ρ) dρ` by a left-point sum on the grid.
pub fn covariation_shift_estimate<T: Scalar>(
    lp: &SampledLoop<T>,
    eps: T,
) -> Result<CovariationSeries<T>> {
    let n = lp.intervals();
    let m = mesh_cells(n, eps)?;
    let y = lp.values();
    let w = T::one() / T::from_count(m);
    let mut acc = Mat3::zero();
    let mut out = vec![acc];
    for i in 0..n {
        let d = y[(i + m).min(n)] - y[i];
        acc += d.outer(&d) * w;
        out.push(acc);
    }
    CovariationSeries::new(out, eps)
}

/// `Σ_ρ Y′_ρ Δ[X, X*]_ρ Y′_ρᵀ` against the increments of `base`, left-point.
pub fn covariation_predicted<T: Scalar>(
    y_prime: &[Mat3<T>],
    base: &CovariationSeries<T>,
) -> Result<CovariationSeries<T>> {
    let n = base.grid().intervals();
    if y_prime.len() != n + 1 {
        return Err(Error::GridMismatch {
            expected: n,
            got: y_prime.len().saturating_sub(1),
        });
    }
    let b = base.values();
    // accumulated as base + Σ (Y′ΔY′ᵀ − Δ) so that Y′ = Id returns the base bitwise
    let mut excess = Mat3::zero();
    let mut out = vec![b[0]];
    for i in 0..n {
        let d = b[i + 1] - b[i];
        excess += y_prime[i].congruence(&d) - d;
        out.push(b[i + 1] + excess);
    }
    CovariationSeries::new(out, base.mesh())
}
