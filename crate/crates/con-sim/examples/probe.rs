use con_sim::eval::*;
use con_sim::world::{Scenario, TeacherWalkParams, WorldGenParams};
use std::time::Instant;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let worlds: usize = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(4);
    let seeds: usize = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(1);
    let config = ExperimentConfig {
        world_seed: 42,
        worlds,
        targets_per_world: 5,
        seeds_per_target: seeds,
        scenarios: vec![Scenario::ConstrainedStart],
        methods: vec![Method::Proposed, Method::WithoutMerge, Method::Frontier],
        pe_values: vec![0.0, 0.2, 0.5, 0.8, 1.0],
        world_gen: WorldGenParams::default(),
        descriptor_dim: 64,
        sim: SimParams::default(),
    };
    let t0 = Instant::now();
    let summary = run_experiment(&config).unwrap();
    let dt = t0.elapsed();
    println!("episodes: {} skipped: {} in {:.1}s ({:.1} ms/ep)",
        summary.rows.len(), summary.skipped, dt.as_secs_f64(),
        dt.as_secs_f64() * 1000.0 / summary.rows.len() as f64);
    print!("{}", write_curve_report(&summary.curves));
}
