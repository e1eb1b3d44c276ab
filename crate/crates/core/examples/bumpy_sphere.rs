//! Fits an icosphere template to a bumpy sphere and reports surface distances.
//!
//! Usage: `cargo run --release --example bumpy_sphere -- [seed] [classic]`
//!
//! `FIT_CONFIG` may hold a full `DeformConfig` JSON replacing the defaults.

use std::collections::BTreeMap;
use std::time::Instant;

use cortexgeo::losses::{ChamferMode, ClassWeights, LossWeights};
use cortexgeo::metrics::{assd, assd_in_region, high_curvature_faces};
use cortexgeo::optimizer::{fit, DeformConfig};
use cortexgeo::template::make_icosphere;
use cortexgeo::Vec3;

fn bumpy(v: &Vec3) -> Vec3 {
    let u = v.normalize();
    let theta = u.z.clamp(-1.0, 1.0).acos();
    let phi = u.y.atan2(u.x);
    u * (1.0 + 0.15 * (6.0 * theta).sin() * (6.0 * phi).sin())
}

fn main() -> cortexgeo::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let seed: u64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let classic = args.iter().any(|a| a == "classic");
    let template = make_icosphere(4, [1.0; 3])?;
    let target = make_icosphere(5, [1.0; 3])?.map_vertices(bumpy)?;
    let mut config = DeformConfig {
        weights: LossWeights::single("wm", ClassWeights::WHITE_MATTER)?,
        ..DeformConfig::default()
    };
    if let Ok(text) = std::env::var("FIT_CONFIG") {
        config = DeformConfig::from_json_str(&text)?;
    }
    if classic {
        config.losses.chamfer = ChamferMode::Classic;
    }
    let start = Instant::now();
    let result = fit(
        &BTreeMap::from([("wm".to_string(), template)]),
        &BTreeMap::from([("wm".to_string(), target.clone())]),
        &config,
        seed,
    )?;
    let elapsed = start.elapsed();
    let out = result.final_mesh("wm").unwrap();
    for stage in 1..=config.stages {
        let acc = result.accepted_totals(stage);
        println!(
            "stage {stage}: {} accepted, loss {:.6e} -> {:.6e}",
            acc.len(),
            acc[0],
            acc[acc.len() - 1]
        );
    }
    for row in result.trace.iter().filter(|r| r.iteration == 0 || r.iteration % 50 == 0) {
        let t = row.breakdown.summed_terms();
        println!(
            "s{} it{} acc={} rate={:.2e} chamfer={:.3e} inter={:.3e} lap={:.3e} intra={:.3e} edge={:.3e} total={:.4e}",
            row.stage, row.iteration, row.accepted, row.step_rate, t.chamfer, t.inter_nc, t.laplacian, t.intra_nc, t.edge, row.breakdown.total
        );
    }
    let rejected = result.trace.iter().filter(|r| !r.accepted).count();
    println!("rejected trials {rejected}, rows {}", result.trace.len());
    let region = high_curvature_faces(&target, 0.1)?;
    println!("fit time {:.2?}", elapsed);
    println!("assd {:.5}", assd(out, &target, 100_000, 0)?);
    println!("region assd {:.5}", assd_in_region(out, &target, &region, 100_000, 0)?);
    println!("self intersections {}", result.self_intersections["wm"]);
    Ok(())
}
