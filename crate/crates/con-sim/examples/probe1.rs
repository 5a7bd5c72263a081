use con_sim::eval::*;
use con_sim::grid::*;
use con_sim::perception::*;
use con_sim::planner::*;
use con_sim::protocol::*;
use con_sim::world::*;
use rand::SeedableRng;

fn main() {
    let params = WorldGenParams::default();
    let world = generate_world(0, &params).unwrap();
    let embeddings = WorldEmbeddings::new(&world, EmbeddingSpace::default());
    let sim = SimParams::default();
    let target: u32 = 1;
    let scn = Scenario::ConstrainedStart;
    let seed = episode_seed(0, target, scn, 0);
    let setup = prepare_episode(&world, &embeddings, &sim, scn, target, seed, false).unwrap();
    let wspec = *world.spec();
    let fov = sim.fov;
    let tcell = world.target_cell(target).unwrap();

    let mut agent = AgentState::new(setup.student_start);
    let mut omap = ObstacleMap::new(wspec);
    let mut visited = VisitedMask::new(wspec, 1.0);
    visited.insert(agent.pose.position());
    let mut own = ScoredGrid::new(wspec); // simplified accum (max/sum direct)
    let mut steps = 0u32;
    let mut visible = omap.observe(&world, &agent.pose, &fov);

    let mut events = 0;
    loop {
        events += 1;
        if steps >= 2500 || events > 400 { println!("BUDGET/EVENTS OUT ev {events} steps {steps}"); break; }
        let here = agent.cell(&wspec);
        let mut object_map = own.clone();
        object_map.retain_primary_at_least(0.05);
        let mut scorer = SubgoalScorer::new(&omap, &agent.pose, &fov, 0.5);
        let mut cands = vec![];
        for cell in frontier_cells(&omap) {
            if cell == here { continue; }
            if let Some(sg) = scorer.score(cell, &object_map, &visited) { cands.push(sg); }
        }
        let Some(sg) = select_subgoal(&cands) else { println!("EXPLORATION COMPLETE ev {events} steps {steps}"); break; };
        if events % 10 == 0 || events < 15 {
            let d2t = ((agent.pose.x - 4.75).powi(2) + (agent.pose.y - 1.15).powi(2)).sqrt();
            println!("ev {events:3} steps {steps:4} at ({:4.1},{:4.1}) d2t {d2t:4.1} sg ({},{}) v ({:.3},{:.3}) mapmax {:.3} cands {} excl_t {}",
                agent.pose.x, agent.pose.y, sg.cell.ix, sg.cell.iy, sg.primary_value, sg.secondary_value,
                object_map.max_primary(), cands.len(), visited.excludes(tcell));
        }
        let Some(mut lp) = LocalPlanner::new(&omap, here, sg) else { continue; };
        loop {
            if steps >= 2500 { break; }
            match lp.next_step(&omap, &agent.pose) {
                LocalStep::Done(_) => break,
                LocalStep::Move { action, dest } => {
                    match step_agent(&world, &mut agent, action) {
                        Err(_) => { omap.set_occupied(dest); break; }
                        Ok(()) => {
                            lp.advance(); steps += 1;
                            visited.insert(agent.pose.position());
                            visible = omap.observe(&world, &agent.pose, &fov);
                            let view = embed_visible(&world, &visible, &embeddings);
                            let s = similarity(&setup.target_query, &view);
                            if s > 0.0 { for &c in &visible { own.fold_cell(c, s, s); } }
                            if detect_target(&world, &agent.pose, target, &fov).unwrap() {
                                println!("SUCCESS steps {steps}"); return;
                            }
                        }
                    }
                }
            }
        }
    }
}
