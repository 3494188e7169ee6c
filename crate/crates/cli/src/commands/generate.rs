use std::path::Path;

use anyhow::Result;
use serde_json::json;

use filament_core::io::{area_to_csv, loop_to_csv};
use filament_core::loops::generate;
use filament_core::rough::{chen_residual, RoughLoop};

use crate::config::RunConfig;
use crate::output::Output;

pub fn run(cfg: &RunConfig, out: &Path) -> Result<()> {
    let spec = cfg.loop_spec()?;
    let gamma = cfg.loop_gamma()?;
    log::info!("generating {:?} loop, N = {}, seed {}", spec.kind, spec.n, spec.seed);
    let x: RoughLoop<f64> = generate(&spec)?;
    let mut o = Output::create(out)?;
    o.write("loop.csv", &loop_to_csv(x.path()))?;
    o.write("area.csv", &area_to_csv(x.area()))?;
    o.finish(
        "generate",
        cfg,
        json!({
            "gamma": gamma,
            "loop": {
                "kind": format!("{:?}", spec.kind).to_lowercase(),
                "hurst": spec.effective_hurst(),
                "n": spec.n,
                "n_fine": spec.n_fine,
                "seed": spec.seed,
            },
            "chen_residual": chen_residual(&x),
        }),
    )
}
