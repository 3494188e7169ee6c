//! Flat `key = value` run configuration with dotted keys.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use sha2::{Digest, Sha256};

use filament_core::dynamics::{EvolveConfig, Regime, Scheme};
use filament_core::geometry::HolderExponent;
use filament_core::kernel::KernelField;
use filament_core::loops::{default_gamma, FbmSampler, LoopKind, LoopSpec, EXACT_SAMPLER_LIMIT};

pub const KEYS: &[&str] = &[
    "loop.kind",
    "loop.H",
    "loop.x0",
    "loop.N_fine",
    "loop.N",
    "loop.seed",
    "loop.radius",
    "loop.axis",
    "loop.gamma",
    "loop.sampler",
    "kernel.gamma_intensity",
    "kernel.mu",
    "evolve.dt",
    "evolve.t_end",
    "evolve.scheme",
    "evolve.blowup_threshold",
    "evolve.gamma",
    "evolve.snapshot_stride",
    "evolve.regime",
    "diagnose.covariation",
    "diagnose.epsilon",
    "diagnose.stretching",
    "diagnose.lipschitz",
    "diagnose.deltas",
    "diagnose.covariation_ensemble",
    "converge.experiment",
    "converge.levels",
    "output.dir",
    "run.seed",
    "run.threads",
];

const NON_SEMANTIC: &[&str] = &["output.dir", "run.threads"];

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
}

impl RunConfig {
    /// Blank lines and `#` comments are skipped; duplicate and unknown keys are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected `key = value`, found {line:?}", n + 1))?;
            let (k, v) = (k.trim(), v.trim());
            if cfg.values.contains_key(k) {
                bail!("line {}: duplicate key `{k}`", n + 1);
            }
            cfg.set(k, v).with_context(|| format!("line {}", n + 1))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn set(&mut self, key: &str, value: impl Display) -> Result<()> {
        if !KEYS.contains(&key) {
            bail!("unknown config key `{key}`");
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    /// Entries that can change results; output location and thread count cannot.
    pub fn entries(&self) -> BTreeMap<&str, &str> {
        self.values
            .iter()
            .filter(|(k, _)| !NON_SEMANTIC.contains(&k.as_str()))
            .map(|(k, v)| (k.as_str(), v.as_str()))
            .collect()
    }

    /// Canonical `key=value` lines of [`entries`](Self::entries) in key order.
    pub fn canonical(&self) -> String {
        self.entries().iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    /// SHA-256 of [`canonical`](Self::canonical).
    pub fn hash(&self) -> String {
        hex(&Sha256::digest(self.canonical().as_bytes()))
    }

    pub fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.values.get(key) {
            Some(v) => parse_value(key, v),
            None => Ok(default),
        }
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T> {
        match self.values.get(key) {
            Some(v) => parse_value(key, v),
            None => bail!("missing required key `{key}`"),
        }
    }

    pub fn list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.values.get(key) {
            Some(v) => v.split(',').map(|s| parse_value(key, s.trim())).collect(),
            None => Ok(default.to_vec()),
        }
    }

    fn vec3(&self, key: &str, default: [f64; 3]) -> Result<[f64; 3]> {
        let v = self.list(key, &default)?;
        v.try_into()
            .map_err(|v: Vec<f64>| anyhow!("`{key}` needs three comma-separated numbers, got {}", v.len()))
    }

    pub fn flag(&self, key: &str) -> Result<bool> {
        self.get(key, false)
    }

    pub fn seed(&self) -> Result<u64> {
        self.get("run.seed", 0)
    }

    pub fn threads(&self) -> Result<usize> {
        self.get("run.threads", 0)
    }

    pub fn loop_kind(&self) -> Result<LoopKind> {
        match self.values.get("loop.kind").map(String::as_str).unwrap_or("circle") {
            "circle" => Ok(LoopKind::Circle),
            "brownian" => Ok(LoopKind::Brownian),
            "fractional" => Ok(LoopKind::Fractional),
            other => bail!("`loop.kind` = {other} is not one of circle, brownian, fractional"),
        }
    }

    /// Validated generator parameters; `loop.seed` defaults to `run.seed`.
    pub fn loop_spec(&self) -> Result<LoopSpec> {
        let kind = self.loop_kind()?;
        let n: usize = self.get("loop.N", 128)?;
        let default_fine = if kind == LoopKind::Circle { n } else { 8 * n };
        let n_fine: usize = self.get("loop.N_fine", default_fine)?;
        let sampler = match self.values.get("loop.sampler").map(String::as_str).unwrap_or("auto") {
            "auto" if n_fine <= EXACT_SAMPLER_LIMIT => FbmSampler::Exact,
            "auto" => FbmSampler::Circulant,
            "exact" => FbmSampler::Exact,
            "circulant" => FbmSampler::Circulant,
            other => bail!("`loop.sampler` = {other} is not one of auto, exact, circulant"),
        };
        let spec = LoopSpec {
            kind,
            hurst: self.get("loop.H", 0.5)?,
            x0: self.vec3("loop.x0", [0.0; 3])?,
            n_fine,
            n,
            seed: self.get("loop.seed", self.seed()?)?,
            radius: self.get("loop.radius", 1.0)?,
            axis: self.vec3("loop.axis", [0.0, 0.0, 1.0])?,
            sampler,
            gamma: match self.values.get("loop.gamma") {
                Some(v) => Some(parse_value("loop.gamma", v)?),
                None => None,
            },
        };
        spec.validate()?;
        Ok(spec)
    }

    /// The regularity the generated loop carries.
    pub fn loop_gamma(&self) -> Result<f64> {
        let spec = self.loop_spec()?;
        Ok(spec.gamma.unwrap_or_else(|| default_gamma(spec.effective_hurst())))
    }

    pub fn kernel(&self) -> Result<KernelField<f64>> {
        Ok(KernelField::new(
            self.require("kernel.gamma_intensity")?,
            self.require("kernel.mu")?,
        )?)
    }

    /// `evolve.gamma` falls back to `gamma` (the regularity of the reference loop).
    pub fn evolve(&self, gamma: f64) -> Result<EvolveConfig<f64>> {
        let scheme = match self.values.get("evolve.scheme").map(String::as_str).unwrap_or("heun") {
            "euler" => Scheme::Euler,
            "heun" => Scheme::Heun,
            other => bail!("`evolve.scheme` = {other} is not one of euler, heun"),
        };
        let g: f64 = self.get("evolve.gamma", gamma)?;
        let g = HolderExponent::new(g).map_err(|_| anyhow!("`evolve.gamma` = {g} is outside (1/3, 1]"))?;
        let mut cfg = EvolveConfig::new(self.require("evolve.dt")?, self.require("evolve.t_end")?, scheme, g);
        cfg.blowup_threshold = self.get("evolve.blowup_threshold", f64::INFINITY)?;
        cfg.snapshot_stride = self.get("evolve.snapshot_stride", 1)?;
        cfg.regime = match self.values.get("evolve.regime").map(String::as_str).unwrap_or("rough") {
            "rough" => Regime::Rough,
            "young" => Regime::Young,
            other => bail!("`evolve.regime` = {other} is not one of rough, young"),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_value<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| anyhow!("`{key}` = {v:?} cannot be parsed as {}", std::any::type_name::<T>()))
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
