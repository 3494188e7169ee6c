//! Level-2 rough paths over sampled curves.
//!
//! Areas follow `𝕏²_{ab} = ∫_a^b (X_ρ − X_a) ⊗ dX_ρ`. Only elementary blocks
//! `𝕏²_{ξ_i ξ_{i+1}}` are stored; other pairs are recovered by Chen composition.

mod controlled;
mod integral;

pub use controlled::{controlled_norm, ControlledLoop, ControlledNorms};
pub use integral::{lift_controlled, rough_increment, rough_integral};

use rayon::prelude::*;

use crate::geometry::{
    pair_scan, HolderExponent, HolderMode, Mat3, ParamGrid, SampledLoop, SampledPath, Vec3,
};
use crate::{Error, Result, Scalar};

/// Elementary area blocks `block[i] = 𝕏²_{ξ_i ξ_{i+1}}`.
#[derive(Clone, Debug, PartialEq)]
pub struct AreaBlocks<T> {
    blocks: Vec<Mat3<T>>,
}

impl<T: Scalar> AreaBlocks<T> {
    pub fn new(blocks: Vec<Mat3<T>>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidInput("no area blocks".into()));
        }
        if let Some(i) = blocks.iter().position(|b| !b.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite area block {i}")));
        }
        Ok(Self { blocks })
    }

    /// `½ δX_i ⊗ δX_i` for every interval.
    pub fn piecewise_linear(values: &[Vec3<T>]) -> Result<Self> {
        let half = T::lit(0.5);
        Self::new(
            values
                .windows(2)
                .map(|w| {
                    let d = w[1] - w[0];
                    d.outer(&d) * half
                })
                .collect(),
        )
    }

    pub fn grid(&self) -> ParamGrid {
        ParamGrid::new(self.blocks.len()).expect("nonempty")
    }

    pub fn intervals(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[Mat3<T>] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> Mat3<T> {
        self.blocks[i]
    }

    pub fn map(&self, f: impl Fn(&Mat3<T>) -> Mat3<T>) -> Result<Self> {
        Self::new(self.blocks.iter().map(f).collect())
    }
}

/// `𝕏²_{ξ_i ξ_j}` by left-to-right composition
/// `𝕏²_{ac} = 𝕏²_{ab} + 𝕏²_{bc} + (X_b − X_a) ⊗ (X_c − X_b)`.
pub fn compose_blocks<T: Scalar>(
    values: &[Vec3<T>],
    blocks: &[Mat3<T>],
    i: usize,
    j: usize,
) -> Result<Mat3<T>> {
    let n = blocks.len();
    if values.len() != n + 1 {
        return Err(Error::GridMismatch {
            expected: n,
            got: values.len().saturating_sub(1),
        });
    }
    if j > n {
        return Err(Error::IndexOutOfRange { index: j, max: n });
    }
    if i > j {
        return Err(Error::IndexOutOfRange { index: i, max: j });
    }
    let mut acc = Mat3::zero();
    for m in i..j {
        acc += blocks[m] + (values[m] - values[i]).outer(&(values[m + 1] - values[m]));
    }
    Ok(acc)
}

/// [`compose_blocks`] on a loop and its blocks.
pub fn chen_compose<T: Scalar>(
    area: &AreaBlocks<T>,
    path: &SampledLoop<T>,
    i: usize,
    j: usize,
) -> Result<Mat3<T>> {
    compose_blocks(path.values(), area.blocks(), i, j)
}

/// Merges every `factor` consecutive blocks by Chen composition.
pub fn coarsen_blocks<T: Scalar>(
    values: &[Vec3<T>],
    blocks: &[Mat3<T>],
    factor: usize,
) -> Result<Vec<Mat3<T>>> {
    let n = blocks.len();
    if factor == 0 || n % factor != 0 {
        return Err(Error::InvalidInput(format!(
            "coarsening factor {factor} does not divide {n}"
        )));
    }
    (0..n / factor)
        .into_par_iter()
        .map(|c| compose_blocks(values, blocks, c * factor, (c + 1) * factor))
        .collect()
}

/// Pair areas from prefix areas `P_j = 𝕏²_{0j}`:
/// `𝕏²_{ij} = P_j − P_i − (X_i − X_0) ⊗ (X_j − X_i)`.
pub(crate) struct AreaPrefix<'a, T> {
    values: &'a [Vec3<T>],
    prefix: Vec<Mat3<T>>,
}

impl<'a, T: Scalar> AreaPrefix<'a, T> {
    pub(crate) fn new(values: &'a [Vec3<T>], blocks: &[Mat3<T>]) -> Self {
        let mut prefix = Vec::with_capacity(blocks.len() + 1);
        let mut acc = Mat3::zero();
        prefix.push(acc);
        for (m, b) in blocks.iter().enumerate() {
            acc += *b + (values[m] - values[0]).outer(&(values[m + 1] - values[m]));
            prefix.push(acc);
        }
        Self { values, prefix }
    }

    #[inline]
    pub(crate) fn pair(&self, i: usize, j: usize) -> Mat3<T> {
        let v = self.values;
        self.prefix[j] - self.prefix[i] - (v[i] - v[0]).outer(&(v[j] - v[i]))
    }
}

/// An open path with elementary area blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct RoughPath<T> {
    path: SampledPath<T>,
    area: AreaBlocks<T>,
}

impl<T: Scalar> RoughPath<T> {
    pub fn new(path: SampledPath<T>, area: AreaBlocks<T>) -> Result<Self> {
        if path.grid().intervals() != area.intervals() {
            return Err(Error::GridMismatch {
                expected: path.grid().intervals(),
                got: area.intervals(),
            });
        }
        Ok(Self { path, area })
    }

    pub fn piecewise_linear(path: SampledPath<T>) -> Result<Self> {
        let area = AreaBlocks::piecewise_linear(path.values())?;
        Self::new(path, area)
    }

    pub fn path(&self) -> &SampledPath<T> {
        &self.path
    }

    pub fn area(&self) -> &AreaBlocks<T> {
        &self.area
    }

    pub fn compose(&self, i: usize, j: usize) -> Result<Mat3<T>> {
        compose_blocks(self.path.values(), self.area.blocks(), i, j)
    }

    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        let blocks = coarsen_blocks(self.path.values(), self.area.blocks(), factor)?;
        Self::new(self.path.subsample(factor)?, AreaBlocks::new(blocks)?)
    }
}

/// A closed curve with a compatible area process.
#[derive(Clone, Debug, PartialEq)]
pub struct RoughLoop<T> {
    path: SampledLoop<T>,
    area: AreaBlocks<T>,
    gamma: HolderExponent<T>,
}

impl<T: Scalar> RoughLoop<T> {
    pub fn new(path: SampledLoop<T>, area: AreaBlocks<T>, gamma: HolderExponent<T>) -> Result<Self> {
        if path.intervals() != area.intervals() {
            return Err(Error::GridMismatch {
                expected: path.intervals(),
                got: area.intervals(),
            });
        }
        Ok(Self { path, area, gamma })
    }

    pub fn path(&self) -> &SampledLoop<T> {
        &self.path
    }

    pub fn area(&self) -> &AreaBlocks<T> {
        &self.area
    }

    pub fn gamma(&self) -> HolderExponent<T> {
        self.gamma
    }

    pub fn intervals(&self) -> usize {
        self.path.intervals()
    }

    pub fn compose(&self, i: usize, j: usize) -> Result<Mat3<T>> {
        chen_compose(&self.area, &self.path, i, j)
    }

    /// Same areas on a translated curve.
    pub fn translate(&self, c: Vec3<T>) -> Result<Self> {
        Self::new(self.path.translate(c)?, self.area.clone(), self.gamma)
    }

    /// `(RX, R 𝕏² Rᵀ)`.
    pub fn rotate(&self, r: &Mat3<T>) -> Result<Self> {
        Self::new(
            self.path.rotate(r)?,
            self.area.map(|b| r.congruence(b))?,
            self.gamma,
        )
    }

    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        let blocks = coarsen_blocks(self.path.values(), self.area.blocks(), factor)?;
        Self::new(self.path.subsample(factor)?, AreaBlocks::new(blocks)?, self.gamma)
    }

    /// `‖X‖_γ`.
    pub fn path_seminorm(&self, mode: HolderMode) -> Result<T> {
        self.path.holder_seminorm(self.gamma.value(), mode)
    }

    /// `‖𝕏²‖_{2γ} = max |𝕏²_{ij}| / |ξ_j − ξ_i|^{2γ}` (entrywise norm).
    pub fn area_seminorm(&self, mode: HolderMode) -> Result<T> {
        let pre = AreaPrefix::new(self.path.values(), self.area.blocks());
        let two = T::lit(2.0);
        pair_scan(self.intervals(), two * self.gamma.value(), mode, |i, j| {
            pre.pair(i, j).sum_norm()
        })
    }

    /// `1 + ‖X‖_γ + ‖𝕏²‖_{2γ}`.
    pub fn control_constant(&self, mode: HolderMode) -> Result<T> {
        Ok(T::one() + self.path_seminorm(mode)? + self.area_seminorm(mode)?)
    }
}

/// `(X, ½ δX ⊗ δX)` on every interval.
pub fn piecewise_linear_lift<T: Scalar>(
    lp: &SampledLoop<T>,
    gamma: HolderExponent<T>,
) -> Result<RoughLoop<T>> {
    let area = AreaBlocks::piecewise_linear(lp.values())?;
    RoughLoop::new(lp.clone(), area, gamma)
}

/// `‖X − X̃‖_γ + ‖𝕏² − 𝕏̃²‖_{2γ}` at the exponent of `a`.
pub fn rough_distance<T: Scalar>(a: &RoughLoop<T>, b: &RoughLoop<T>, mode: HolderMode) -> Result<T> {
    if a.intervals() != b.intervals() {
        return Err(Error::GridMismatch {
            expected: a.intervals(),
            got: b.intervals(),
        });
    }
    let g = a.gamma.value();
    let (va, vb) = (a.path.values(), b.path.values());
    let path = pair_scan(a.intervals(), g, mode, |i, j| {
        ((va[j] - va[i]) - (vb[j] - vb[i])).norm()
    })?;
    let (pa, pb) = (
        AreaPrefix::new(va, a.area.blocks()),
        AreaPrefix::new(vb, b.area.blocks()),
    );
    let area = pair_scan(a.intervals(), T::lit(2.0) * g, mode, |i, j| {
        (pa.pair(i, j) - pb.pair(i, j)).sum_norm()
    })?;
    Ok(path + area)
}

/// A path with an area defined on every pair of grid nodes.
pub trait AreaProcess<T: Scalar> {
    fn intervals(&self) -> usize;
    fn point(&self, i: usize) -> Vec3<T>;
    /// `𝕏²_{ξ_i ξ_j}` for `i ≤ j`.
    fn area(&self, i: usize, j: usize) -> Mat3<T>;
}

impl<T: Scalar> AreaProcess<T> for RoughLoop<T> {
    fn intervals(&self) -> usize {
        self.path.intervals()
    }

    fn point(&self, i: usize) -> Vec3<T> {
        self.path.values()[i]
    }

    fn area(&self, i: usize, j: usize) -> Mat3<T> {
        self.compose(i, j).expect("indices in range")
    }
}

impl<T: Scalar> AreaProcess<T> for RoughPath<T> {
    fn intervals(&self) -> usize {
        self.path.grid().intervals()
    }

    fn point(&self, i: usize) -> Vec3<T> {
        self.path.values()[i]
    }

    fn area(&self, i: usize, j: usize) -> Mat3<T> {
        self.compose(i, j).expect("indices in range")
    }
}

/// Areas stored independently for every pair `i ≤ j`, for validating external data.
#[derive(Clone, Debug)]
pub struct AreaTable<T> {
    values: Vec<Vec3<T>>,
    // upper triangle stored row by row
    table: Vec<Mat3<T>>,
}

impl<T: Scalar> AreaTable<T> {
    pub fn from_process(p: &impl AreaProcess<T>) -> Self {
        let n = p.intervals();
        let values: Vec<_> = (0..=n).map(|i| p.point(i)).collect();
        let mut table = Vec::with_capacity((n + 1) * (n + 2) / 2);
        for i in 0..=n {
            for j in i..=n {
                table.push(p.area(i, j));
            }
        }
        Self { values, table }
    }

    /// Mutable access to the stored `𝕏²_{ij}`.
    pub fn entry_mut(&mut self, i: usize, j: usize) -> &mut Mat3<T> {
        let k = self.slot(i, j);
        &mut self.table[k]
    }

    // row i holds j = i..=N and starts at Σ_{r<i} (N + 1 − r)
    fn slot(&self, i: usize, j: usize) -> usize {
        let n1 = self.values.len();
        i * n1 - i * i.saturating_sub(1) / 2 + (j - i)
    }
}

impl<T: Scalar> AreaProcess<T> for AreaTable<T> {
    fn intervals(&self) -> usize {
        self.values.len() - 1
    }

    fn point(&self, i: usize) -> Vec3<T> {
        self.values[i]
    }

    fn area(&self, i: usize, j: usize) -> Mat3<T> {
        self.table[self.slot(i, j)]
    }
}

/// `max |𝕏²_{ik} − 𝕏²_{ij} − 𝕏²_{jk} − (X_j − X_i) ⊗ (X_k − X_j)|` over a set of triples
/// `i < j < k` (entrywise norm).
///
/// All triples are checked when `N ≤ 48`. Otherwise: all triples on a node subset of at most
/// 48 evenly spaced nodes, every consecutive triple, and every `(0, j, N)` split.
pub fn chen_residual<T: Scalar>(p: &(impl AreaProcess<T> + Sync)) -> T {
    let n = p.intervals();
    let defect = |i: usize, j: usize, k: usize| -> T {
        let (xi, xj, xk) = (p.point(i), p.point(j), p.point(k));
        (p.area(i, k) - p.area(i, j) - p.area(j, k) - (xj - xi).outer(&(xk - xj))).sum_norm()
    };
    let subset: Vec<usize> = if n <= 48 {
        (0..=n).collect()
    } else {
        let mut s: Vec<usize> = (0..48).map(|m| m * n / 47).collect();
        s.dedup();
        s
    };
    let dense = (0..subset.len())
        .into_par_iter()
        .map(|a| {
            let mut m = T::zero();
            for b in a + 1..subset.len() {
                for c in b + 1..subset.len() {
                    m = m.max(defect(subset[a], subset[b], subset[c]));
                }
            }
            m
        })
        .reduce(T::zero, |a, b| a.max(b));
    if n <= 48 {
        return dense;
    }
    let local = (0..n - 1)
        .into_par_iter()
        .map(|i| defect(i, i + 1, i + 2).max(defect(0, i + 1, n)))
        .reduce(T::zero, |a, b| a.max(b));
    dense.max(local)
}
