//! Uniform parameter grids, closed curves in 3-space and Hölder-type estimates.

mod tensor;

pub use tensor::{levi_civita, rotation, Mat3, Tensor3, Tensor4, Vec3};

use rayon::prelude::*;

use crate::{Error, Result, Scalar};

/// Largest grid for which the all-pairs Hölder scan is allowed.
pub const EXACT_SCAN_LIMIT: usize = 4096;

/// Uniform grid `ξ_i = i/N`, `i = 0..=N`, on `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ParamGrid {
    intervals: usize,
}

impl ParamGrid {
    pub fn new(intervals: usize) -> Result<Self> {
        if intervals == 0 {
            return Err(Error::InvalidInput("grid needs at least one interval".into()));
        }
        Ok(Self { intervals })
    }

    /// Number of intervals `N`.
    #[inline]
    pub fn intervals(&self) -> usize {
        self.intervals
    }

    /// Number of nodes `N + 1`.
    #[inline]
    pub fn nodes(&self) -> usize {
        self.intervals + 1
    }

    #[inline]
    pub fn node<T: Scalar>(&self, i: usize) -> T {
        if i == self.intervals {
            T::one()
        } else {
            T::from_count(i) / T::from_count(self.intervals)
        }
    }

    #[inline]
    pub fn spacing<T: Scalar>(&self) -> T {
        T::one() / T::from_count(self.intervals)
    }
}

/// Regularity index `γ ∈ (1/3, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HolderExponent<T>(T);

impl<T: Scalar> HolderExponent<T> {
    pub fn new(gamma: T) -> Result<Self> {
        if !(gamma > T::one() / T::lit(3.0) && gamma <= T::one()) {
            return Err(Error::OutOfRange {
                key: "gamma",
                value: format!("{gamma}"),
                range: "(1/3, 1]",
            });
        }
        Ok(Self(gamma))
    }

    #[inline]
    pub fn value(&self) -> T {
        self.0
    }

    /// Whether line integrals can be taken in the Young sense (`γ > 1/2`).
    pub fn is_young(&self) -> bool {
        self.0 > T::lit(0.5)
    }
}

/// Pair selection for Hölder-type scans.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HolderMode {
    /// All pairs `i < j`; `O(N²)`.
    Exact,
    /// Pairs at dyadic separations `2^k` only; a lower bound of the exact value.
    Dyadic,
}

impl HolderMode {
    /// Exact when affordable, dyadic otherwise.
    pub fn auto(intervals: usize) -> Self {
        if intervals <= EXACT_SCAN_LIMIT {
            HolderMode::Exact
        } else {
            HolderMode::Dyadic
        }
    }
}

/// `max_{i<j} f(i, j) / ((j − i)/N)^exponent` over the pairs selected by `mode`.
///
/// `f` must be nonnegative. Used by every seminorm estimate in the crate.
pub fn pair_scan<T, F>(intervals: usize, exponent: T, mode: HolderMode, f: F) -> Result<T>
where
    T: Scalar,
    F: Fn(usize, usize) -> T + Sync,
{
    let n = intervals;
    let h = T::one() / T::from_count(n);
    let weights: Vec<T> = (0..=n)
        .map(|d| {
            if d == 0 {
                T::zero()
            } else {
                (T::from_count(d) * h).powf(-exponent)
            }
        })
        .collect();
    match mode {
        HolderMode::Exact => {
            if n > EXACT_SCAN_LIMIT {
                return Err(Error::ExactScanTooLarge(n));
            }
            Ok((0..n)
                .into_par_iter()
                .map(|i| {
                    let mut m = T::zero();
                    for j in i + 1..=n {
                        m = m.max(f(i, j) * weights[j - i]);
                    }
                    m
                })
                .reduce(T::zero, |a, b| a.max(b)))
        }
        HolderMode::Dyadic => {
            let mut seps = Vec::new();
            let mut d = 1usize;
            while d <= n {
                seps.push(d);
                d *= 2;
            }
            Ok(seps
                .into_par_iter()
                .map(|d| {
                    let mut m = T::zero();
                    for i in 0..=n - d {
                        m = m.max(f(i, i + d) * weights[d]);
                    }
                    m
                })
                .reduce(T::zero, |a, b| a.max(b)))
        }
    }
}

fn check_finite<T: Scalar>(values: &[Vec3<T>]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::InvalidInput(format!("non-finite value at node {i}"))),
        None => Ok(()),
    }
}

/// A path sampled on a uniform grid; not necessarily closed.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledPath<T> {
    grid: ParamGrid,
    values: Vec<Vec3<T>>,
}

impl<T: Scalar> SampledPath<T> {
    /// `values` holds the `N + 1` node values.
    pub fn new(values: Vec<Vec3<T>>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidInput("path needs at least two nodes".into()));
        }
        check_finite(&values)?;
        Ok(Self {
            grid: ParamGrid::new(values.len() - 1)?,
            values,
        })
    }

    pub fn grid(&self) -> ParamGrid {
        self.grid
    }

    pub fn values(&self) -> &[Vec3<T>] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Vec3<T>> {
        self.values
    }

    pub fn increment(&self, i: usize) -> Vec3<T> {
        self.values[i + 1] - self.values[i]
    }

    /// Keeps every `factor`-th node.
    pub fn subsample(&self, factor: usize) -> Result<Self> {
        if factor == 0 || self.grid.intervals() % factor != 0 {
            return Err(Error::InvalidInput(format!(
                "subsampling factor {factor} does not divide {}",
                self.grid.intervals()
            )));
        }
        Self::new(self.values.iter().step_by(factor).copied().collect())
    }

    pub fn holder_seminorm(&self, gamma: T, mode: HolderMode) -> Result<T> {
        let v = &self.values;
        pair_scan(self.grid.intervals(), gamma, mode, |i, j| (v[j] - v[i]).norm())
    }

    pub fn sup_norm(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.norm()))
    }
}

/// A closed curve on a uniform grid; `values[0] == values[N]` bitwise.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledLoop<T> {
    path: SampledPath<T>,
}

impl<T: Scalar> SampledLoop<T> {
    /// Builds a loop from `N + 1` node values, overwriting the last with the first.
    pub fn new(mut values: Vec<Vec3<T>>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidInput("loop needs at least two nodes".into()));
        }
        let last = values.len() - 1;
        values[last] = values[0];
        Ok(Self {
            path: SampledPath::new(values)?,
        })
    }

    /// Builds a loop from the `N` distinct nodes `ξ_0..ξ_{N-1}`; the closing node is appended.
    pub fn from_open_nodes(mut values: Vec<Vec3<T>>) -> Result<Self> {
        let first = *values
            .first()
            .ok_or_else(|| Error::InvalidInput("empty loop".into()))?;
        values.push(first);
        Self::new(values)
    }

    pub fn grid(&self) -> ParamGrid {
        self.path.grid
    }

    #[inline]
    pub fn intervals(&self) -> usize {
        self.path.grid.intervals()
    }

    #[inline]
    pub fn values(&self) -> &[Vec3<T>] {
        &self.path.values
    }

    pub fn as_path(&self) -> &SampledPath<T> {
        &self.path
    }

    pub fn into_values(self) -> Vec<Vec3<T>> {
        self.path.values
    }

    #[inline]
    pub fn increment(&self, i: usize) -> Vec3<T> {
        self.path.increment(i)
    }

    pub fn map_points(&self, f: impl Fn(&Vec3<T>) -> Vec3<T>) -> Result<Self> {
        Self::new(self.values().iter().map(f).collect())
    }

    pub fn translate(&self, c: Vec3<T>) -> Result<Self> {
        self.map_points(|v| *v + c)
    }

    pub fn rotate(&self, r: &Mat3<T>) -> Result<Self> {
        self.map_points(|v| r.mul_vec(v))
    }

    pub fn scale(&self, s: T) -> Result<Self> {
        self.map_points(|v| *v * s)
    }

    pub fn subsample(&self, factor: usize) -> Result<Self> {
        Self::new(self.path.subsample(factor)?.values)
    }

    /// `max |X_ξ − X_η| / |ξ − η|^γ` over the sampled pairs.
    pub fn holder_seminorm(&self, gamma: T, mode: HolderMode) -> Result<T> {
        self.path.holder_seminorm(gamma, mode)
    }

    /// `max_i |X_{ξ_i}|` (Euclidean).
    pub fn sup_norm(&self) -> T {
        self.path.sup_norm()
    }

    /// Largest Euclidean distance between two nodes.
    pub fn diameter(&self) -> T {
        let v = self.values();
        let mut d = T::zero();
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                d = d.max((v[j] - v[i]).norm());
            }
        }
        d
    }
}

/// Free-function form of [`SampledLoop::holder_seminorm`].
pub fn holder_seminorm<T: Scalar>(
    lp: &SampledLoop<T>,
    gamma: HolderExponent<T>,
    mode: HolderMode,
) -> Result<T> {
    lp.holder_seminorm(gamma.value(), mode)
}

/// Free-function form of [`SampledLoop::sup_norm`].
pub fn sup_norm<T: Scalar>(lp: &SampledLoop<T>) -> T {
    lp.sup_norm()
}

/// Hölder-type seminorm of a matrix-valued path, entrywise norm.
pub fn matrix_path_seminorm<T: Scalar>(
    values: &[Mat3<T>],
    exponent: T,
    mode: HolderMode,
) -> Result<T> {
    if values.len() < 2 {
        return Err(Error::InvalidInput("matrix path needs two nodes".into()));
    }
    pair_scan(values.len() - 1, exponent, mode, |i, j| {
        (values[j] - values[i]).sum_norm()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn circle(n: usize, r: f64) -> SampledLoop<f64> {
        SampledLoop::new(
            (0..=n)
                .map(|i| {
                    let t = 2.0 * PI * i as f64 / n as f64;
                    Vec3::new(r * t.sin(), r * (t.cos() - 1.0), 0.0)
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn constant_loop_has_zero_seminorm() {
        let lp = SampledLoop::new(vec![Vec3::new(1.0, 2.0, 3.0); 33]).unwrap();
        assert_eq!(lp.holder_seminorm(0.5, HolderMode::Exact).unwrap(), 0.0);
    }

    #[test]
    fn circle_lipschitz_constant_is_circumference() {
        // the all-pairs maximum is attained by neighbours: 2 sin(π/N) N r
        let n = 1024;
        let r = 1.7;
        let got = circle(n, r).holder_seminorm(1.0, HolderMode::Exact).unwrap();
        let brute = 2.0 * (PI / n as f64).sin() * n as f64 * r;
        assert!((got - brute).abs() < 1e-12 * brute);
        assert!((got - 2.0 * PI * r).abs() < 1e-4 * 2.0 * PI * r);
    }

    #[test]
    fn linear_segment_ratio_is_speed() {
        let v = Vec3::new(0.3, -0.4, 1.2);
        let n = 50;
        let path =
            SampledPath::new((0..=n).map(|i| v * (i as f64 / n as f64)).collect()).unwrap();
        let g = path.holder_seminorm(1.0, HolderMode::Exact).unwrap();
        assert!((g - v.norm()).abs() < 1e-12);
    }

    #[test]
    fn sup_norm_cases() {
        let zero = SampledLoop::<f64>::new(vec![Vec3::zero(); 8]).unwrap();
        assert_eq!(zero.sup_norm(), 0.0);
        let r = 2.5;
        let centered = SampledLoop::new(
            (0..=64)
                .map(|i| {
                    let t = 2.0 * PI * i as f64 / 64.0;
                    Vec3::new(r * t.cos(), r * t.sin(), 0.0)
                })
                .collect(),
        )
        .unwrap();
        assert!((centered.sup_norm() - r).abs() < 1e-14);
        let c = Vec3::new(3.0, -1.0, 0.5);
        let shifted = centered.translate(c).unwrap();
        let brute = shifted
            .values()
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max);
        assert_eq!(shifted.sup_norm(), brute);
        assert!(brute >= c.norm() - r && brute <= c.norm() + r);
    }

    #[test]
    fn non_finite_rejected() {
        let mut v = vec![Vec3::zero(); 4];
        v[2] = Vec3::new(f64::NAN, 0.0, 0.0);
        assert!(matches!(SampledLoop::new(v), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn exact_mode_limited() {
        let lp = SampledLoop::new(vec![Vec3::zero(); EXACT_SCAN_LIMIT + 2]).unwrap();
        assert!(matches!(
            lp.holder_seminorm(0.5, HolderMode::Exact),
            Err(Error::ExactScanTooLarge(_))
        ));
        assert!(lp.holder_seminorm(0.5, HolderMode::Dyadic).is_ok());
    }

    #[test]
    fn gamma_range() {
        assert!(HolderExponent::new(0.34).is_ok());
        assert!(HolderExponent::new(1.0).is_ok());
        assert!(HolderExponent::new(1.0 / 3.0).is_err());
        assert!(HolderExponent::new(1.01).is_err());
    }

    fn arb_loop() -> impl Strategy<Value = Vec<Vec3<f64>>> {
        prop::collection::vec(
            (-5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64).prop_map(|(a, b, c)| Vec3::new(a, b, c)),
            2..40,
        )
    }

    proptest! {
        #[test]
        fn closure_and_scan_properties(values in arb_loop(), c in -3.0..3.0f64, g in 0.34..1.0f64) {
            let lp = SampledLoop::new(values).unwrap();
            let n = lp.intervals();
            prop_assert_eq!(lp.values()[0], lp.values()[n]);
            let exact = lp.holder_seminorm(g, HolderMode::Exact).unwrap();
            let dyadic = lp.holder_seminorm(g, HolderMode::Dyadic).unwrap();
            prop_assert!(dyadic <= exact);
            let scaled = lp.scale(c).unwrap().holder_seminorm(g, HolderMode::Exact).unwrap();
            prop_assert!((scaled - c.abs() * exact).abs() <= 1e-12 * (1.0 + exact * c.abs()));
            let t = lp.translate(Vec3::new(c, -c, 2.0 * c)).unwrap();
            prop_assert_eq!(t.values()[0], t.values()[n]);
        }

        #[test]
        fn per_pair_ratio_monotone_in_gamma(values in arb_loop(), g1 in 0.34..1.0f64, g2 in 0.34..1.0f64) {
            // for |ξ − η| ≤ 1 the ratio |δX| / |ξ−η|^γ is nondecreasing in γ
            let lp = SampledLoop::new(values).unwrap();
            let (lo, hi) = if g1 < g2 { (g1, g2) } else { (g2, g1) };
            let n = lp.intervals();
            let v = lp.values();
            for i in 0..n {
                for j in i + 1..=n {
                    let gap = (j - i) as f64 / n as f64;
                    let d = (v[j] - v[i]).norm();
                    prop_assert!(d / gap.powf(lo) <= d / gap.powf(hi) * (1.0 + 1e-12));
                }
            }
        }
    }
}
