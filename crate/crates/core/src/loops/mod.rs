//! Random and deterministic closed curves with their area processes.

mod fbm;
pub mod rng;

pub use fbm::{cumulative, fgn_autocovariance, sample_fgn, FbmSampler, EXACT_SAMPLER_LIMIT};

use crate::geometry::{HolderExponent, Mat3, SampledLoop, SampledPath, Vec3};
use crate::rough::{
    chen_residual, compose_blocks, AreaBlocks, AreaProcess, AreaTable, RoughLoop, RoughPath,
};
use crate::{Error, Result, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LoopKind {
    Brownian,
    Fractional,
    Circle,
}

/// Generator parameters. For circles `x0` is the center and `radius`, `axis` apply.
#[derive(Clone, Debug, PartialEq)]
pub struct LoopSpec {
    pub kind: LoopKind,
    pub hurst: f64,
    pub x0: [f64; 3],
    pub n_fine: usize,
    pub n: usize,
    pub seed: u64,
    pub radius: f64,
    pub axis: [f64; 3],
    pub sampler: FbmSampler,
    /// Regularity attached to the output; defaults to [`default_gamma`].
    pub gamma: Option<f64>,
}

impl LoopSpec {
    pub fn brownian(n_fine: usize, n: usize, seed: u64) -> Self {
        Self {
            kind: LoopKind::Brownian,
            hurst: 0.5,
            x0: [0.0; 3],
            n_fine,
            n,
            seed,
            radius: 1.0,
            axis: [0.0, 0.0, 1.0],
            sampler: FbmSampler::Exact,
            gamma: None,
        }
    }

    pub fn fractional(hurst: f64, n_fine: usize, n: usize, seed: u64) -> Self {
        Self {
            kind: LoopKind::Fractional,
            hurst,
            ..Self::brownian(n_fine, n, seed)
        }
    }

    pub fn circle(radius: f64, n: usize) -> Self {
        Self {
            kind: LoopKind::Circle,
            radius,
            n_fine: n,
            ..Self::brownian(n, n, 0)
        }
    }

    /// The Hurst index actually used.
    pub fn effective_hurst(&self) -> f64 {
        match self.kind {
            LoopKind::Brownian => 0.5,
            LoopKind::Fractional => self.hurst,
            LoopKind::Circle => 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::OutOfRange {
                key: "loop.N",
                value: self.n.to_string(),
                range: "[1, inf)",
            });
        }
        if self.kind == LoopKind::Fractional && !(self.hurst > 1.0 / 3.0 && self.hurst <= 1.0) {
            return Err(Error::OutOfRange {
                key: "loop.H",
                value: self.hurst.to_string(),
                range: "(1/3, 1]",
            });
        }
        if self.kind != LoopKind::Circle {
            if self.n_fine == 0 || self.n_fine % self.n != 0 {
                return Err(Error::OutOfRange {
                    key: "loop.N_fine",
                    value: self.n_fine.to_string(),
                    range: "a positive multiple of loop.N",
                });
            }
        } else {
            if !(self.radius > 0.0) || !self.radius.is_finite() {
                return Err(Error::OutOfRange {
                    key: "loop.radius",
                    value: self.radius.to_string(),
                    range: "(0, inf)",
                });
            }
            let a = self.axis;
            if !(a[0] * a[0] + a[1] * a[1] + a[2] * a[2] > 0.0) {
                return Err(Error::OutOfRange {
                    key: "loop.axis",
                    value: format!("{a:?}"),
                    range: "nonzero vectors",
                });
            }
        }
        if !self.x0.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput("loop.x0 must be finite".into()));
        }
        if let Some(g) = self.gamma {
            HolderExponent::new(g).map_err(|_| Error::OutOfRange {
                key: "gamma",
                value: g.to_string(),
                range: "(1/3, 1]",
            })?;
        }
        Ok(())
    }

    fn gamma<T: Scalar>(&self) -> Result<HolderExponent<T>> {
        HolderExponent::new(T::lit(self.gamma.unwrap_or_else(|| default_gamma(self.effective_hurst()))))
    }
}

/// `max(H − 0.05, (H + 1/3)/2)`: below `H` and above `1/3`.
pub fn default_gamma(hurst: f64) -> f64 {
    (hurst - 0.05).max(0.5 * (hurst + 1.0 / 3.0)).min(1.0)
}

/// `C(ξ, η) = |ξ|^{2H} + |η|^{2H} − |ξ − η|^{2H}`.
pub fn fbl_covariance(hurst: f64, xi: f64, eta: f64) -> f64 {
    let e = 2.0 * hurst;
    xi.abs().powf(e) + eta.abs().powf(e) - (xi - eta).abs().powf(e)
}

/// `C(ξ, 1) / C(1, 1)`.
pub fn bridge_weight(hurst: f64, xi: f64) -> f64 {
    fbl_covariance(hurst, xi, 1.0) / fbl_covariance(hurst, 1.0, 1.0)
}

/// Planar circle `center + r (cos 2πξ e_1 + sin 2πξ e_2)` with `e_1 × e_2 = axis/|axis|`.
pub fn circle_loop<T: Scalar>(
    radius: T,
    center: Vec3<T>,
    axis: Vec3<T>,
    n: usize,
) -> Result<SampledLoop<T>> {
    if !(radius > T::zero()) {
        return Err(Error::InvalidInput(format!("circle radius {radius}")));
    }
    let an = axis.norm();
    if !(an > T::zero()) || !an.is_finite() {
        return Err(Error::InvalidInput("circle axis must be a nonzero vector".into()));
    }
    let a = axis * (T::one() / an);
    let seed = if a[0].abs() < T::lit(0.9) {
        Vec3::unit(0)
    } else {
        Vec3::unit(1)
    };
    let e1 = seed - a * seed.dot(&a);
    let e1 = e1 * (T::one() / e1.norm());
    let e2 = a.cross(&e1);
    let tau = T::lit(2.0) * T::PI();
    let pts = (0..n)
        .map(|i| {
            let t = tau * T::from_count(i) / T::from_count(n);
            center + e1 * (radius * t.cos()) + e2 * (radius * t.sin())
        })
        .collect();
    SampledLoop::from_open_nodes(pts)
}

/// Fine open fBm `X̃` (started at 0) with its piecewise-linear area.
pub fn sample_fbm_path<T: Scalar>(spec: &LoopSpec) -> Result<RoughPath<T>> {
    spec.validate()?;
    let noise = sample_fgn(spec.effective_hurst(), spec.n_fine, spec.seed, spec.sampler)?;
    let comps = [cumulative(&noise[0]), cumulative(&noise[1]), cumulative(&noise[2])];
    let pts: Vec<Vec3<T>> = (0..=spec.n_fine)
        .map(|k| Vec3::new(T::lit(comps[0][k]), T::lit(comps[1][k]), T::lit(comps[2][k])))
        .collect();
    RoughPath::piecewise_linear(SampledPath::new(pts)?)
}

/// Fine bridge `X_ξ = X̃_ξ − (C(ξ,1)/C(1,1)) X̃_1 + x0` on the fine grid; closure exact.
pub fn bridge_nodes<T: Scalar>(fbm: &SampledPath<T>, hurst: f64, x0: Vec3<T>) -> Vec<Vec3<T>> {
    let v = fbm.values();
    let n = v.len() - 1;
    let end = v[n];
    let mut out: Vec<Vec3<T>> = (0..=n)
        .map(|k| {
            let w = T::lit(bridge_weight(hurst, k as f64 / n as f64));
            v[k] - end * w + x0
        })
        .collect();
    out[n] = out[0];
    out
}

/// Fractional Brownian loop: fine bridge, piecewise-linear lift, Chen coarsening to `N`.
pub fn sample_fbl<T: Scalar>(spec: &LoopSpec) -> Result<RoughLoop<T>> {
    spec.validate()?;
    if spec.kind == LoopKind::Circle {
        return Err(Error::InvalidInput("sample_fbl needs a random loop kind".into()));
    }
    let fbm = sample_fbm_path::<T>(spec)?;
    let x0 = Vec3::new(T::lit(spec.x0[0]), T::lit(spec.x0[1]), T::lit(spec.x0[2]));
    let nodes = bridge_nodes(fbm.path(), spec.effective_hurst(), x0);
    let area = AreaBlocks::piecewise_linear(&nodes)?;
    let fine = RoughLoop::new(SampledLoop::new(nodes)?, area, spec.gamma()?)?;
    fine.coarsen(spec.n_fine / spec.n)
}

/// Brownian loop: [`sample_fbl`] at `H = 1/2`.
pub fn sample_brownian_loop<T: Scalar>(spec: &LoopSpec) -> Result<RoughLoop<T>> {
    let s = LoopSpec {
        kind: LoopKind::Brownian,
        hurst: 0.5,
        ..spec.clone()
    };
    sample_fbl(&s)
}

/// Any kind of loop described by `spec`; circles get the piecewise-linear lift.
pub fn generate<T: Scalar>(spec: &LoopSpec) -> Result<RoughLoop<T>> {
    match spec.kind {
        LoopKind::Circle => {
            spec.validate()?;
            let c = Vec3::new(T::lit(spec.x0[0]), T::lit(spec.x0[1]), T::lit(spec.x0[2]));
            let a = Vec3::new(T::lit(spec.axis[0]), T::lit(spec.axis[1]), T::lit(spec.axis[2]));
            let lp = circle_loop(T::lit(spec.radius), c, a, spec.n)?;
            crate::rough::piecewise_linear_lift(&lp, spec.gamma()?)
        }
        _ => sample_fbl(spec),
    }
}

/// Areas of the bridge `X = X̃ + h` (`h_ξ = −(C(ξ,1)/C(1,1)) X̃_1`) on every pair of a grid,
/// from the areas of `X̃`:
/// `𝕏² = 𝕏̃² + ∫(h − h_a)⊗dX̃ + ∫(X̃ − X̃_a)⊗dh + ∫(h − h_a)⊗dh`,
/// the last three as left-point Young sums on the grid of `X̃`.
#[derive(Clone, Debug)]
pub struct TranslatedArea<T> {
    fbm: RoughPath<T>,
    h: Vec<Vec3<T>>,
    bridge: Vec<Vec3<T>>,
    stride: usize,
}

impl<T: Scalar> TranslatedArea<T> {
    /// `fbm` on its own grid; areas are reported on the grid coarsened by `stride`.
    pub fn new(fbm: RoughPath<T>, hurst: f64, stride: usize) -> Result<Self> {
        let v = fbm.path().values();
        let n = v.len() - 1;
        if stride == 0 || n % stride != 0 {
            return Err(Error::InvalidInput(format!("stride {stride} does not divide {n}")));
        }
        let end = v[n];
        let h: Vec<_> = (0..=n)
            .map(|k| -end * T::lit(bridge_weight(hurst, k as f64 / n as f64)))
            .collect();
        let bridge = v.iter().zip(&h).map(|(a, b)| *a + *b).collect();
        Ok(Self {
            fbm,
            h,
            bridge,
            stride,
        })
    }

    fn fine_area(&self, a: usize, b: usize) -> Mat3<T> {
        let x = self.fbm.path().values();
        let h = &self.h;
        let mut acc = self.fbm.compose(a, b).expect("in range");
        for i in a..b {
            let dx = x[i + 1] - x[i];
            let dh = h[i + 1] - h[i];
            acc += (h[i] - h[a]).outer(&dx) + (x[i] - x[a]).outer(&dh) + (h[i] - h[a]).outer(&dh);
        }
        acc
    }

    /// Elementary blocks on the coarse grid.
    pub fn blocks(&self) -> Result<AreaBlocks<T>> {
        let n = self.intervals();
        AreaBlocks::new((0..n).map(|i| self.area(i, i + 1)).collect())
    }
}

impl<T: Scalar> AreaProcess<T> for TranslatedArea<T> {
    fn intervals(&self) -> usize {
        (self.bridge.len() - 1) / self.stride
    }

    fn point(&self, i: usize) -> Vec3<T> {
        self.bridge[i * self.stride]
    }

    fn area(&self, i: usize, j: usize) -> Mat3<T> {
        self.fine_area(i * self.stride, j * self.stride)
    }
}

/// Bridge areas on `out_intervals` from fBm rough data through the translation formula.
pub fn fbl_area_translation<T: Scalar>(
    fbm: &RoughPath<T>,
    hurst: f64,
    out_intervals: usize,
) -> Result<AreaBlocks<T>> {
    let n = fbm.path().grid().intervals();
    if out_intervals == 0 || n % out_intervals != 0 {
        return Err(Error::InvalidInput(format!(
            "{out_intervals} intervals do not divide the fBm grid {n}"
        )));
    }
    TranslatedArea::new(fbm.clone(), hurst, n / out_intervals)?.blocks()
}

/// Chen residual of the translation formula evaluated independently on every pair
/// (dense table), for validation.
pub fn translated_area_residual<T: Scalar>(t: &TranslatedArea<T>) -> T {
    chen_residual(&AreaTable::from_process(t))
}

/// Coarsened blocks of the fine piecewise-linear bridge lift, for comparisons.
pub fn lifted_bridge_blocks<T: Scalar>(
    fbm: &SampledPath<T>,
    hurst: f64,
    out_intervals: usize,
) -> Result<Vec<Mat3<T>>> {
    let nodes = bridge_nodes(fbm, hurst, Vec3::zero());
    let blocks = AreaBlocks::piecewise_linear(&nodes)?;
    let n = nodes.len() - 1;
    let f = n / out_intervals;
    (0..out_intervals)
        .map(|c| compose_blocks(&nodes, blocks.blocks(), c * f, (c + 1) * f))
        .collect()
}
