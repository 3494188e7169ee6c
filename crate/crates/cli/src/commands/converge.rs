use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Result};
use serde_json::json;

use filament_core::dynamics::{evolve, EvolutionState, VelocityField};
use filament_core::geometry::Vec3;
use filament_core::loops::{generate, LoopKind, LoopSpec};
use filament_core::rough::{ControlledLoop, RoughLoop};

use crate::config::RunConfig;
use crate::output::Output;

/// `log₂(d_l / d_{l+1})` for successive-difference sizes `d`.
fn orders(diffs: &[f64]) -> Vec<Option<f64>> {
    std::iter::once(None)
        .chain(diffs.windows(2).map(|w| Some((w[0] / w[1]).log2())))
        .collect()
}

fn state_gap(a: &EvolutionState<f64>, b: &EvolutionState<f64>) -> f64 {
    let (av, bv) = (a.y.values().values(), b.y.values().values());
    let mut d = 0.0f64;
    for i in 0..av.len() {
        d = d.max((av[i] - bv[i]).max_abs());
        d = d.max((a.y.derivative()[i] - b.y.derivative()[i]).max_abs());
    }
    d
}

/// Velocity of the circle at fixed probes and at the node `ξ = 0`, for `N·2^l`.
fn velocity_levels(cfg: &RunConfig, spec: &LoopSpec, levels: usize) -> Result<Vec<(usize, Vec<Vec3<f64>>)>> {
    if spec.kind != LoopKind::Circle {
        bail!("converge.experiment = velocity needs loop.kind = circle");
    }
    let k = cfg.kernel()?;
    let regime = cfg.evolve(cfg.loop_gamma()?)?.regime;
    let c = Vec3::new(spec.x0[0], spec.x0[1], spec.x0[2]);
    let r = spec.radius;
    let probes = [
        c + Vec3::new(0.3, 0.2, 0.1) * r,
        c + Vec3::new(2.0, 0.5, 0.3) * r,
        c + Vec3::new(spec.axis[0], spec.axis[1], spec.axis[2]) * (0.5 * r),
    ];
    (0..levels)
        .map(|l| {
            let n = spec.n << l;
            let x: RoughLoop<f64> = generate(&LoopSpec { n, n_fine: n, ..spec.clone() })?;
            let y = ControlledLoop::identity(Arc::new(x));
            let f = VelocityField::new(&y, &k, regime);
            let mut v: Vec<_> = probes.iter().map(|p| f.velocity(p)).collect();
            v.push(f.velocity(&y.values().values()[0]));
            Ok((n, v))
        })
        .collect()
}

pub fn run(cfg: &RunConfig, out: &Path) -> Result<()> {
    let levels: usize = cfg.get("converge.levels", 3)?;
    if levels < 3 {
        bail!("converge.levels = {levels}: an order estimate needs at least 3 levels");
    }
    let experiment: String = cfg.require("converge.experiment")?;
    let spec = cfg.loop_spec()?;
    let mut o = Output::create(out)?;
    let (csv, orders) = match experiment.as_str() {
        "velocity" => {
            let lv = velocity_levels(cfg, &spec, levels)?;
            let diffs: Vec<f64> = lv
                .windows(2)
                .map(|w| {
                    w[0].1
                        .iter()
                        .zip(&w[1].1)
                        .map(|(a, b)| (*a - *b).norm())
                        .fold(0.0, f64::max)
                })
                .collect();
            let ord = orders(&diffs);
            let mut csv = String::from("N,N_next,difference,order\n");
            for ((w, d), q) in lv.windows(2).zip(&diffs).zip(&ord) {
                let _ = writeln!(csv, "{},{},{d:.16e},{}", w[0].0, w[1].0, q.map_or(String::new(), |q| format!("{q:.6}")));
            }
            (csv, ord)
        }
        "time" => {
            let k = cfg.kernel()?;
            let x = Arc::new(generate::<f64>(&spec)?);
            let base = cfg.evolve(cfg.loop_gamma()?)?;
            let mut finals = Vec::new();
            for l in 0..levels {
                let mut c = base.clone();
                c.dt = base.dt / (1u64 << l) as f64;
                c.snapshot_stride = usize::MAX;
                let tr = evolve(x.clone(), &k, &c)?;
                if tr.blown_up() {
                    bail!("run at dt = {} stopped early; shorten evolve.t_end", c.dt);
                }
                finals.push((c.dt, tr.last));
            }
            let diffs: Vec<f64> = finals.windows(2).map(|w| state_gap(&w[0].1, &w[1].1)).collect();
            let ord = orders(&diffs);
            let mut csv = String::from("dt,dt_next,difference,order\n");
            for ((w, d), q) in finals.windows(2).zip(&diffs).zip(&ord) {
                let _ = writeln!(csv, "{:.16e},{:.16e},{d:.16e},{}", w[0].0, w[1].0, q.map_or(String::new(), |q| format!("{q:.6}")));
            }
            (csv, ord)
        }
        other => bail!("`converge.experiment` = {other} is not one of velocity, time"),
    };
    o.write("converge.csv", &csv)?;
    let orders: Vec<f64> = orders.into_iter().flatten().collect();
    log::info!("empirical orders {orders:?}");
    o.finish("converge", cfg, json!({ "experiment": experiment, "levels": levels, "orders": orders }))
}
