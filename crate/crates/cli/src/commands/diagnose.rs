use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde_json::{json, Map, Value};

use filament_core::diagnostics::{
    covariation_estimate, covariation_predicted, lipschitz_experiment, stretching_decomposition, Ratio,
};
use filament_core::geometry::{Mat3, SampledLoop, Vec3};
use filament_core::io::{derivative_from_csv, gradient_from_csv, loop_from_csv};
use filament_core::loops::{sample_fbl, LoopKind, LoopSpec};
use filament_core::rough::RoughLoop;

use super::evolve::{parse_scheme, snapshot_name, snapshot_steps, REFERENCE_AREA, REFERENCE_LOOP};
use crate::config::RunConfig;
use crate::output::{manifest_f64, read_manifest, read_rough_loop, read_text, Output};

struct Stored {
    step: usize,
    t: f64,
    values: SampledLoop<f64>,
    derivative: Vec<Mat3<f64>>,
    gradient: Vec<Mat3<f64>>,
}

struct StoredRun {
    manifest: Value,
    reference: RoughLoop<f64>,
    snapshots: Vec<Stored>,
}

fn load_run(dir: &Path) -> Result<StoredRun> {
    let manifest = read_manifest(dir)?;
    let gamma = manifest_f64(&manifest, "gamma", dir)?;
    let dt = manifest_f64(&manifest, "dt", dir)?;
    let reference = read_rough_loop(dir, REFERENCE_LOOP, REFERENCE_AREA, gamma)?;
    let mut snapshots = Vec::new();
    for step in snapshot_steps(&manifest, dir)? {
        let read = |what: &str| -> Result<(String, String)> {
            let p = dir.join(snapshot_name(step, what));
            Ok((read_text(&p)?, p.display().to_string()))
        };
        let (lt, lp) = read("loop")?;
        let (dt_, dp) = read("derivative")?;
        let (gt, gp) = read("gradient")?;
        snapshots.push(Stored {
            step,
            t: step as f64 * dt,
            values: loop_from_csv(&lt).with_context(|| format!("in {lp}"))?,
            derivative: derivative_from_csv(&dt_).with_context(|| format!("in {dp}"))?,
            gradient: gradient_from_csv(&gt).with_context(|| format!("in {gp}"))?,
        });
    }
    Ok(StoredRun {
        manifest,
        reference,
        snapshots,
    })
}

fn push_matrix(s: &mut String, m: &Mat3<f64>) {
    for r in 0..3 {
        for c in 0..3 {
            let _ = write!(s, ",{:.16e}", m.0[r][c]);
        }
    }
}

fn matrix_header(prefix: char) -> String {
    let mut h = String::new();
    for r in 1..=3 {
        for c in 1..=3 {
            let _ = write!(h, ",{prefix}{r}{c}");
        }
    }
    h
}

/// Entrywise `max |a − b|` normalized by `tr b / 3`.
fn relative_gap(a: &Mat3<f64>, b: &Mat3<f64>) -> f64 {
    (*a - *b).max_abs() / (b.trace().abs() / 3.0).max(f64::MIN_POSITIVE)
}

const PROBES: [f64; 3] = [0.25, 0.5, 0.75];

fn covariation(run: &StoredRun, eps: f64, o: &mut Output) -> Result<Value> {
    let base = covariation_estimate(run.reference.path(), eps)?;
    let mut csv = format!("step,t,xi{}{}\n", matrix_header('e'), matrix_header('p'));
    let mut worst = 0.0f64;
    for s in &run.snapshots {
        let est = covariation_estimate(&s.values, eps)?;
        let pred = covariation_predicted(&s.derivative, &base)?;
        let grid = est.grid();
        for (i, (e, p)) in est.values().iter().zip(pred.values()).enumerate() {
            let _ = write!(csv, "{},{:.16e},{:.16e}", s.step, s.t, grid.node::<f64>(i));
            push_matrix(&mut csv, e);
            push_matrix(&mut csv, p);
            csv.push('\n');
        }
        for xi in PROBES {
            worst = worst.max(relative_gap(&est.at(xi), &pred.at(xi)));
        }
    }
    o.write("covariation.csv", &csv)?;
    Ok(json!({ "epsilon": eps, "max_relative_gap_at_probes": worst }))
}

fn stretching(run: &StoredRun, o: &mut Output) -> Result<Value> {
    let times: Vec<f64> = run.snapshots.iter().map(|s| s.t).collect();
    let grads: Vec<Vec<Mat3<f64>>> = run.snapshots.iter().map(|s| s.gradient.clone()).collect();
    let series = stretching_decomposition(&times, &grads, parse_scheme(&run.manifest))?;
    let mut csv = String::from("step,t,orthogonality_defect,q_identity_defect,residual,residual_ordered\n");
    let mut worst = (0.0f64, 0.0f64);
    for (f, s) in series.frames.iter().zip(&run.snapshots) {
        let dw0 = vec![Mat3::identity(); s.derivative.len()];
        let orth = f
            .q
            .iter()
            .map(|q| (q.matmul(&q.transpose()) - Mat3::identity()).max_abs())
            .fold(0.0, f64::max);
        let qid = f.q.iter().map(|q| (*q - Mat3::identity()).max_abs()).fold(0.0, f64::max);
        let r = f.reconstruction_residual(&s.derivative, &dw0, false)?;
        let ro = f.reconstruction_residual(&s.derivative, &dw0, true)?;
        worst = (worst.0.max(orth), worst.1.max(r));
        let _ = writeln!(csv, "{},{:.16e},{orth:.16e},{qid:.16e},{r:.16e},{ro:.16e}", s.step, s.t);
    }
    o.write("stretching.csv", &csv)?;
    let last = series.frames.last().expect("at least one frame");
    let qid = last.q.iter().map(|q| (*q - Mat3::identity()).max_abs()).fold(0.0, f64::max);
    Ok(json!({
        "orthogonality_defect": worst.0,
        "max_reconstruction_residual": worst.1,
        "final_q_identity_defect": qid,
    }))
}

/// Smooth closed perturbation scaled to the loop's diameter.
fn bump(x: &RoughLoop<f64>) -> Result<SampledLoop<f64>> {
    let n = x.intervals();
    let d = x.path().diameter().max(f64::MIN_POSITIVE);
    Ok(SampledLoop::new(
        (0..=n)
            .map(|i| {
                let t = std::f64::consts::TAU * (i % n) as f64 / n as f64;
                Vec3::new(0.3 * (3.0 * t).cos(), 0.2 * (2.0 * t).sin(), 0.5 * t.sin()) * d
            })
            .collect(),
    )?)
}

fn lipschitz(cfg: &RunConfig, run: &StoredRun, o: &mut Output) -> Result<Value> {
    let k = cfg.kernel()?;
    let evcfg = cfg.evolve(run.reference.gamma().value())?;
    let deltas = cfg.list("diagnose.deltas", &[1e-2, 1e-3, 1e-4])?;
    let table = lipschitz_experiment(&run.reference, &bump(&run.reference)?, &deltas, &k, &evcfg)?;
    let mut csv = String::from("delta,input_distance,output_distance,ratio,kind,blown_up\n");
    for r in &table.rows {
        let (v, kind) = match r.ratio {
            Ratio::Finite(v) => (v, "finite"),
            Ratio::ExactMatch => (f64::NAN, "exact_match"),
            Ratio::Unbounded => (f64::INFINITY, "unbounded"),
        };
        let _ = writeln!(
            csv,
            "{:.16e},{:.16e},{:.16e},{v:.16e},{kind},{}",
            r.delta, r.input_distance, r.output_distance, r.blown_up
        );
    }
    o.write("lipschitz.csv", &csv)?;
    Ok(json!({ "deltas": deltas, "spread": table.spread() }))
}

/// Mean covariation at `t = 0` over `count` seeds against `ξ·Id`.
fn ensemble(cfg: &RunConfig, count: usize, eps: f64, o: &mut Output) -> Result<Value> {
    let spec = cfg.loop_spec()?;
    if spec.kind != LoopKind::Brownian {
        bail!("diagnose.covariation_ensemble needs loop.kind = brownian");
    }
    let mut mean = [Mat3::zero(); 3];
    for s in 0..count as u64 {
        let x: RoughLoop<f64> = sample_fbl(&LoopSpec {
            seed: spec.seed.wrapping_add(s),
            ..spec.clone()
        })?;
        let c = covariation_estimate(x.path(), eps)?;
        for (m, xi) in mean.iter_mut().zip(PROBES) {
            *m += c.at(xi) * (1.0 / count as f64);
        }
    }
    let mut csv = format!("xi{}\n", matrix_header('m'));
    let mut worst = 0.0f64;
    for (m, xi) in mean.iter().zip(PROBES) {
        let _ = write!(csv, "{xi:.16e}");
        push_matrix(&mut csv, m);
        csv.push('\n');
        worst = worst.max((*m - Mat3::diagonal(xi)).max_abs() / xi);
    }
    o.write("ensemble.csv", &csv)?;
    Ok(json!({ "seeds": count, "epsilon": eps, "max_relative_deviation": worst }))
}

pub fn run(cfg: &RunConfig, out: &Path, input: Option<&Path>) -> Result<()> {
    let want_cov = cfg.flag("diagnose.covariation")?;
    let want_stretch = cfg.flag("diagnose.stretching")?;
    let want_lip = cfg.flag("diagnose.lipschitz")?;
    let count: usize = cfg.get("diagnose.covariation_ensemble", 0)?;
    let eps: f64 = cfg.get("diagnose.epsilon", 1.0 / 64.0)?;
    if want_lip {
        cfg.kernel()?;
    }
    if count > 0 {
        cfg.loop_spec()?;
    }
    let needs_run = want_cov || want_stretch || want_lip;
    let run = match (needs_run, input) {
        (true, Some(dir)) => Some(load_run(dir)?),
        (true, None) => bail!("the selected diagnostics need --input pointing at an evolve output"),
        (false, _) => None,
    };
    let mut o = Output::create(out)?;
    let mut body = Map::new();
    if let Some(run) = &run {
        if want_cov {
            body.insert("covariation".into(), covariation(run, eps, &mut o)?);
        }
        if want_stretch {
            body.insert("stretching".into(), stretching(run, &mut o)?);
        }
        if want_lip {
            body.insert("lipschitz".into(), lipschitz(cfg, run, &mut o)?);
        }
    }
    if count > 0 {
        body.insert("ensemble".into(), ensemble(cfg, count, eps, &mut o)?);
    }
    if let Some(dir) = input {
        body.insert("input".into(), json!(dir.display().to_string()));
    }
    o.finish("diagnose", cfg, Value::Object(body))
}
