use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use serde_json::{json, Value};

use filament_core::dynamics::{evolve, evolve_from, BlowupCause, EvolutionState, Regime, Scheme, Trajectory};
use filament_core::io::{area_to_csv, derivative_from_csv, derivative_to_csv, gradient_to_csv, loop_from_csv, loop_to_csv};
use filament_core::loops::generate;
use filament_core::rough::{ControlledLoop, RoughLoop};

use crate::config::RunConfig;
use crate::output::{manifest_f64, read_manifest, read_rough_loop, read_text, Output};

pub const REFERENCE_LOOP: &str = "reference_loop.csv";
pub const REFERENCE_AREA: &str = "reference_area.csv";

pub fn snapshot_name(step: usize, what: &str) -> String {
    format!("snapshots/step_{step:06}_{what}.csv")
}

#[derive(Clone, Debug, Default)]
pub struct EvolveArgs {
    /// Directory written by `generate`.
    pub input: Option<PathBuf>,
    /// Directory written by an earlier `evolve`.
    pub resume: Option<PathBuf>,
    pub resume_step: Option<usize>,
}

fn scheme_name(s: Scheme) -> &'static str {
    match s {
        Scheme::Euler => "euler",
        Scheme::Heun => "heun",
    }
}

fn regime_name(r: Regime) -> &'static str {
    match r {
        Regime::Rough => "rough",
        Regime::Young => "young",
    }
}

pub fn parse_scheme(m: &Value) -> Scheme {
    match m.get("scheme").and_then(Value::as_str) {
        Some("euler") => Scheme::Euler,
        _ => Scheme::Heun,
    }
}

/// Snapshot steps listed in an evolve manifest.
pub fn snapshot_steps(m: &Value, dir: &Path) -> Result<Vec<usize>> {
    m.get("snapshot_steps")
        .and_then(Value::as_array)
        .map(|a| a.iter().filter_map(|v| v.as_u64().map(|s| s as usize)).collect())
        .with_context(|| format!("manifest in {} lacks `snapshot_steps`", dir.display()))
}

fn load_initial(cfg: &RunConfig, input: Option<&Path>) -> Result<(RoughLoop<f64>, f64)> {
    match input {
        Some(dir) => {
            let m = read_manifest(dir)?;
            let gamma = manifest_f64(&m, "gamma", dir)?;
            Ok((read_rough_loop(dir, "loop.csv", "area.csv", gamma)?, gamma))
        }
        None => {
            let spec = cfg.loop_spec()?;
            Ok((generate(&spec)?, cfg.loop_gamma()?))
        }
    }
}

pub fn run(cfg: &RunConfig, out: &Path, args: &EvolveArgs) -> Result<()> {
    let k = cfg.kernel()?;
    let (traj, x, gamma, evcfg, start) = if let Some(dir) = &args.resume {
        let m = read_manifest(dir)?;
        let gamma = manifest_f64(&m, "gamma", dir)?;
        let evcfg = cfg.evolve(gamma)?;
        let old_dt = manifest_f64(&m, "dt", dir)?;
        if old_dt != evcfg.dt {
            bail!("evolve.dt = {} differs from the resumed run's dt = {old_dt}", evcfg.dt);
        }
        let steps = snapshot_steps(&m, dir)?;
        let step = match args.resume_step {
            Some(s) if steps.contains(&s) => s,
            Some(s) => bail!("step {s} is not a stored snapshot of {}", dir.display()),
            None => *steps.last().with_context(|| format!("no snapshots in {}", dir.display()))?,
        };
        let x = Arc::new(read_rough_loop(dir, REFERENCE_LOOP, REFERENCE_AREA, gamma)?);
        let vp = dir.join(snapshot_name(step, "loop"));
        let values = loop_from_csv(&read_text(&vp)?).with_context(|| format!("in {}", vp.display()))?;
        let dp = dir.join(snapshot_name(step, "derivative"));
        let deriv = derivative_from_csv(&read_text(&dp)?).with_context(|| format!("in {}", dp.display()))?;
        let y = ControlledLoop::new(x.clone(), values, deriv)?;
        let s = EvolutionState::new(step as f64 * evcfg.dt, y, &k, evcfg.regime, evcfg.gamma)?;
        log::info!("resuming {} at step {step}", dir.display());
        (evolve_from(s, step, &k, &evcfg)?, x, gamma, evcfg, step)
    } else {
        let (x, gamma) = load_initial(cfg, args.input.as_deref())?;
        let evcfg = cfg.evolve(gamma)?;
        let x = Arc::new(x);
        log::info!("evolving N = {} for {} steps", x.intervals(), evcfg.steps());
        (evolve(x.clone(), &k, &evcfg)?, x, gamma, evcfg, 0)
    };
    write(cfg, out, &traj, &x, gamma, &evcfg, start)
}

fn blowup_json(b: &Option<BlowupCause>) -> Value {
    match b {
        None => json!({ "flag": false }),
        Some(BlowupCause::Threshold { t, holder }) => {
            json!({ "flag": true, "cause": "threshold", "t": t, "holder": holder })
        }
        Some(BlowupCause::NonFinite { node, t }) => {
            json!({ "flag": true, "cause": "non_finite", "t": t, "node": node })
        }
    }
}

fn write(
    cfg: &RunConfig,
    out: &Path,
    traj: &Trajectory<f64>,
    x: &RoughLoop<f64>,
    gamma: f64,
    evcfg: &filament_core::Config,
    start: usize,
) -> Result<()> {
    let mut o = Output::create(out)?;
    o.write(REFERENCE_LOOP, &loop_to_csv(x.path()))?;
    o.write(REFERENCE_AREA, &area_to_csv(x.area()))?;
    for s in &traj.snapshots {
        o.write(&snapshot_name(s.step, "loop"), &loop_to_csv(&s.values))?;
        o.write(&snapshot_name(s.step, "derivative"), &derivative_to_csv(&s.derivative))?;
        o.write(&snapshot_name(s.step, "gradient"), &gradient_to_csv(&s.gradient))?;
    }
    let mut holder = String::from("t,holder\n");
    for (t, h) in &traj.holder_series {
        holder.push_str(&format!("{t:.16e},{h:.16e}\n"));
    }
    o.write("holder.csv", &holder)?;
    if let Some(b) = &traj.blowup {
        log::info!("run stopped early: {b:?}");
    }
    o.finish(
        "evolve",
        cfg,
        json!({
            "gamma": gamma,
            "dt": evcfg.dt,
            "t_end": evcfg.t_end,
            "scheme": scheme_name(evcfg.scheme),
            "regime": regime_name(evcfg.regime),
            "start_step": start,
            "last_step": traj.last_step,
            "snapshot_steps": traj.snapshots.iter().map(|s| s.step).collect::<Vec<_>>(),
            "times": traj.snapshots.iter().map(|s| s.t).collect::<Vec<_>>(),
            "holder_series": traj.holder_series.iter().map(|(t, h)| [*t, *h]).collect::<Vec<_>>(),
            "blowup": blowup_json(&traj.blowup),
        }),
    )
}
