use planar_homotopy_core::scene::{builtin_scene, SceneName};
use planar_homotopy_core::tiler::run_stages;

fn main() {
    let s = builtin_scene(SceneName::Sierpinski, 2, 8).unwrap();
    let t = run_stages(&s, 3).unwrap();
    println!("domains={} coverage={:?}", t.domains.len(), t.coverage);
    let by_stage: Vec<usize> = (1..=3).map(|i| t.domains.iter().filter(|d| d.stage == i).count()).collect();
    println!("per-stage={by_stage:?} residual_cells={}", t.residual.count());
    for c in &t.claims { if !c.passed { println!("FAILED {} {}", c.id, c.note); } }
}
