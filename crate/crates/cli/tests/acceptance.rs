//! Acceptance suite: one test per criterion, each printing a pass/fail
//! line. Run with `cargo test -p planar-homotopy --test acceptance`.

use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use planar_homotopy_core::dyadic::DyadicPoint;
use planar_homotopy_core::quotient::{
    cancellation_lamination, ideal_triangulation, injectivity_probe, loop_word_in_m,
    loop_word_with_cuts, reduce, CirclePt, CutSystem, Letter,
};
use planar_homotopy_core::raster::{diameter_of_cells, label_components, Adjacency, Raster};
use planar_homotopy_core::retractor::build_spine;
use planar_homotopy_core::scene::{builtin_scene, sierpinski_carpet_raster, SceneName};
use planar_homotopy_core::tiler::run_stages;
use planar_homotopy_core::Dyadic;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_planar-homotopy"))
}

fn tmp(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("ph-acceptance-{name}"));
    p
}

fn make_scene_file(name: &str, depth: u8, k: u8, out: &PathBuf) {
    let status = bin()
        .args([
            "scene",
            "--name",
            name,
            "--depth",
            &depth.to_string(),
            "--k",
            &k.to_string(),
            "--out",
            out.to_str().unwrap(),
        ])
        .status()
        .expect("scene generation runs");
    assert!(status.success(), "scene {name} generation failed");
}

fn run_check(scene: &PathBuf, report: &PathBuf) -> (i32, String) {
    let status = bin()
        .args([
            "check",
            "--scene",
            scene.to_str().unwrap(),
            "--schedule",
            "1/2,1/4,1/8",
            "--report",
            report.to_str().unwrap(),
        ])
        .status()
        .expect("check runs");
    let text = std::fs::read_to_string(report).expect("report written");
    (status.code().unwrap_or(-1), text)
}

#[test]
fn criterion_1_zastrow_reproduction() {
    let scene_good = tmp("c1-sierpinski.phs");
    let scene_bad = tmp("c1-filled.phs");
    make_scene_file("sierpinski", 2, 8, &scene_good);
    make_scene_file("sierpinski_filled_hole", 2, 8, &scene_bad);

    let t0 = Instant::now();
    let (code, text) = run_check(&scene_bad, &tmp("c1-filled.txt"));
    let bad_time = t0.elapsed();
    assert_eq!(code, 1, "filled hole must exit 1");
    assert!(text.contains("VERDICT=equals-2"), "{text}");
    // the witness is the central hole: its bbox straddles cell 128
    let witness = text
        .lines()
        .find(|l| l.starts_with("witness"))
        .expect("witness line present");
    let bbox: Vec<u32> = witness
        .split("bbox=")
        .nth(1)
        .unwrap()
        .split_whitespace()
        .next()
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    assert!(bbox[0] <= 128 && 128 <= bbox[2] && bbox[1] <= 128 && 128 <= bbox[3]);

    let t1 = Instant::now();
    let (code, text) = run_check(&scene_good, &tmp("c1-good.txt"));
    let good_time = t1.elapsed();
    assert_eq!(code, 0, "sierpinski must exit 0");
    assert!(text.contains("VERDICT=at-most-1"), "{text}");

    assert!(bad_time.as_secs_f64() < 10.0, "filled check took {bad_time:?}");
    assert!(good_time.as_secs_f64() < 10.0, "good check took {good_time:?}");
    println!("criterion 1 (Zastrow reproduction): pass");
}

#[test]
fn criterion_2_figure_two_reproduction() {
    let one = tmp("c2-one.phs");
    let two = tmp("c2-two.phs");
    make_scene_file("comb_one_sided", 4, 8, &one);
    make_scene_file("comb_two_sided", 4, 8, &two);

    let t0 = Instant::now();
    let (code, text) = run_check(&one, &tmp("c2-one.txt"));
    assert_eq!(code, 1, "one-sided comb must exit 1: {text}");
    assert!(text.contains("cond2=fail"), "{text}");
    assert!(text.contains("VERDICT=equals-2"), "{text}");
    assert!(
        text.lines().any(|l| l.starts_with("witness")),
        "not-null witness family expected: {text}"
    );

    let (code, text) = run_check(&two, &tmp("c2-two.txt"));
    assert_eq!(code, 0, "two-sided comb must exit 0: {text}");
    assert!(text.contains("cond1=pass") && text.contains("cond2=pass"), "{text}");
    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "comb checks took {elapsed:?}");
    println!("criterion 2 (Figure-2 reproduction): pass");
}

#[test]
fn criterion_3_tiling_ledger() {
    let t0 = Instant::now();
    let scene = builtin_scene(SceneName::Sierpinski, 2, 8).unwrap();
    let tiling = run_stages(&scene, 3).unwrap();

    // every lettered claim executed and passed
    for id in ["iii", "iv", "v", "vi", "vii", "viii", "ix", "x", "xi"] {
        let ran: Vec<_> = tiling.claims.iter().filter(|c| c.id == id).collect();
        assert!(!ran.is_empty(), "claim ({id}) never executed");
        assert!(ran.iter().all(|c| c.passed), "claim ({id}) failed");
    }
    // pairwise disjoint, punctured, stage diameter bounds
    for i in 0..tiling.domains.len() {
        for j in i + 1..tiling.domains.len() {
            assert!(
                !tiling.domains[i].cells.intersects(&tiling.domains[j].cells),
                "domains {i},{j} overlap"
            );
        }
    }
    for (di, d) in tiling.domains.iter().enumerate() {
        assert!(!d.punctures.is_empty(), "domain {di} unpunctured");
        let cells: Vec<(u32, u32)> = d.cells.cells().collect();
        let diam = diameter_of_cells(&cells, d.cells.side()).unwrap();
        assert!(
            diam <= 1.0 / d.stage as f64 + 1e-9,
            "stage {} domain diameter {diam}",
            d.stage
        );
    }
    assert!(
        tiling.coverage.windows(2).all(|w| w[1] >= w[0]),
        "coverage not monotone: {:?}",
        tiling.coverage
    );
    // regression baseline from the first verified run: the depth-2 carpet
    // tiles completely at stage 1
    assert!(*tiling.coverage.last().unwrap() >= 0.9);
    assert_eq!(tiling.coverage, vec![1.0, 1.0, 1.0]);
    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "tiling took {elapsed:?}");
    println!("criterion 3 (tiling ledger): pass");
}

/// Seeded generator for blobby rectilinear domains with interior punctures.
fn random_domain(rng: &mut ChaCha8Rng) -> (Raster, Vec<DyadicPoint>) {
    let k = 7u8;
    let side = 1u32 << k;
    let mut u = Raster::empty(k);
    let nrect = rng.gen_range(1..=4);
    let mut anchor = (rng.gen_range(8..side - 48), rng.gen_range(8..side - 48));
    for i in 0..nrect {
        let w = rng.gen_range(14..40);
        let h = rng.gen_range(14..40);
        let (c0, r0) = if i == 0 {
            anchor
        } else {
            // start inside the previous rectangle so the union stays
            // connected, clamped away from the frame
            (
                rng.gen_range(anchor.0..anchor.0 + 10).min(side - w - 2),
                rng.gen_range(anchor.1..anchor.1 + 10).min(side - h - 2),
            )
        };
        for r in r0..r0 + h {
            for c in c0..c0 + w {
                u.set(c, r, true);
            }
        }
        anchor = (c0, r0);
    }
    // punctures: deep interior cells (5x5 neighborhood inside u), pairwise
    // >= 5 apart
    let deep: Vec<(u32, u32)> = u
        .cells()
        .filter(|&(c, r)| {
            c >= 2
                && r >= 2
                && c + 2 < side
                && r + 2 < side
                && (0..5).all(|dr| (0..5).all(|dc| u.get(c + dc - 2, r + dr - 2)))
        })
        .collect();
    if deep.is_empty() {
        return (u, Vec::new());
    }
    let want = rng.gen_range(1..=5usize);
    let mut chosen: Vec<(u32, u32)> = Vec::new();
    let mut tries = 0;
    while chosen.len() < want && tries < 400 {
        tries += 1;
        let &(c, r) = &deep[rng.gen_range(0..deep.len())];
        if chosen
            .iter()
            .all(|&(pc, pr)| (pc as i64 - c as i64).abs().max((pr as i64 - r as i64).abs()) >= 5)
        {
            chosen.push((c, r));
        }
    }
    let punctures = chosen
        .iter()
        .map(|&(c, r)| {
            DyadicPoint::new(
                Dyadic::new(2 * c as u64 + 1, k + 1),
                Dyadic::new(2 * r as u64 + 1, k + 1),
            )
        })
        .collect();
    (u, punctures)
}

#[test]
fn criterion_4_spine_properties() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce_0004);
    let mut built = 0;
    while built < 50 {
        let (u, punctures) = random_domain(&mut rng);
        if punctures.is_empty() {
            continue;
        }
        let spine = build_spine(&u, &punctures)
            .unwrap_or_else(|e| panic!("case {built}: spine build failed: {e}"));
        // region-puncture bijection
        assert_eq!(spine.regions.len(), punctures.len(), "case {built}");
        for (region, p) in spine.regions.iter().zip(&punctures) {
            let (c, r) = p.cell_at(7);
            assert!(region.get(c, r), "case {built}: region misses its puncture");
        }
        // no 2x2 block anywhere in the skeleton
        assert!(
            spine.skeleton.find_2x2_block().is_none(),
            "case {built}: skeleton has a 2x2 block"
        );
        built += 1;
    }
    println!("criterion 4 (spine properties): pass (50/50)");
}

/// Rectangle loop on the boundary of [c0,c1]x[r0,r1], starting at (c0,r1).
fn rect_loop(c0: u32, r0: u32, c1: u32, r1: u32) -> Vec<(u32, u32)> {
    let mut cells = Vec::new();
    for c in c0..=c1 {
        cells.push((c, r1));
    }
    for r in (r0..r1).rev() {
        cells.push((c1, r));
    }
    for c in (c0..c1).rev() {
        cells.push((c, r0));
    }
    for r in r0 + 1..r1 {
        cells.push((c0, r));
    }
    cells
}

fn loop_in(m: &Raster, cells: &[(u32, u32)]) -> bool {
    cells.iter().all(|&(c, r)| m.get(c, r))
}

fn random_rect_loop(rng: &mut ChaCha8Rng, m: &Raster) -> Vec<(u32, u32)> {
    let side = m.side();
    loop {
        let c0 = rng.gen_range(1..side - 8);
        let r0 = rng.gen_range(1..side - 8);
        let c1 = rng.gen_range(c0 + 2..(c0 + 60).min(side - 1));
        let r1 = rng.gen_range(r0 + 2..(r0 + 60).min(side - 1));
        let cells = rect_loop(c0, r0, c1, r1);
        if loop_in(m, &cells) {
            return cells;
        }
    }
}

#[test]
fn criterion_5_pi1_probes() {
    let m = sierpinski_carpet_raster(2, 7);
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce_0005);

    // 200 random loops, all consistent
    let mut consistent = 0;
    let mut nontrivial = 0;
    for _ in 0..200 {
        let cells = random_rect_loop(&mut rng, &m);
        let rec = injectivity_probe(&m, &cells).unwrap();
        assert!(!rec.projection_flagged, "projection sanity flagged");
        if rec.consistent {
            consistent += 1;
        }
        if !rec.word_m.is_trivial() {
            nontrivial += 1;
        }
    }
    assert_eq!(consistent, 200, "consistency {consistent}/200");
    assert!(nontrivial > 0, "the suite never encircled a hole");

    // homomorphism on 100 random concatenation pairs at a shared basepoint
    for _ in 0..100 {
        let a = random_rect_loop(&mut rng, &m);
        let base = a[0];
        let b = loop {
            let cand = random_rect_loop(&mut rng, &m);
            if let Some(at) = cand.iter().position(|&c| c == base) {
                let mut rotated = cand.clone();
                rotated.rotate_left(at);
                break rotated;
            }
            // translate a fresh rectangle to start at the basepoint when
            // random search misses
            let c0 = base.0;
            let r1 = base.1;
            if r1 >= 4 && c0 + 4 < m.side() {
                let cand = rect_loop(c0, r1 - rng.gen_range(2..=r1.min(20)), c0 + rng.gen_range(2..=20).min(m.side() - 1 - c0), r1);
                if loop_in(&m, &cand) {
                    break cand;
                }
            }
        };
        let mut ab = a.clone();
        ab.extend(b.iter().copied());
        let wa = loop_word_in_m(&m, &a).unwrap();
        let wb = loop_word_in_m(&m, &b).unwrap();
        let wab = loop_word_in_m(&m, &ab).unwrap();
        assert_eq!(wab, wa.concat(&wb), "homomorphism property");
    }

    // emptiness verdict invariant under 5 random cut reassignments
    let holes = planar_homotopy_core::quotient::bounded_holes(&m);
    let loops: Vec<Vec<(u32, u32)>> = (0..10).map(|_| random_rect_loop(&mut rng, &m)).collect();
    let base: Vec<bool> = loops
        .iter()
        .map(|l| loop_word_in_m(&m, l).unwrap().is_trivial())
        .collect();
    for _ in 0..5 {
        let cols: Vec<u32> = holes
            .iter()
            .map(|hole| {
                let mut cols: Vec<u32> = hole.iter().map(|&(c, _)| c).collect();
                cols.sort_unstable();
                cols.dedup();
                cols[rng.gen_range(0..cols.len())]
            })
            .collect();
        let cuts = match CutSystem::with_columns(&m, &cols) {
            Ok(c) => c,
            Err(_) => continue, // collision between hole columns: resample
        };
        for (l, &expect) in loops.iter().zip(&base) {
            let (w, _) = loop_word_with_cuts(&m, l, &cuts).unwrap();
            assert_eq!(w.is_trivial(), expect, "emptiness changed under reassignment");
        }
    }
    println!("criterion 5 (pi1 probes): pass (200/200 consistent)");
}

#[test]
fn criterion_6_triangulation() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce_0006);
    let mut cases = 0;
    for n in 3..=40usize {
        for _ in 0..10 {
            // n distinct dyadic circle parameters in random insertion order
            let mut nums: Vec<u64> = Vec::new();
            while nums.len() < n {
                let v = rng.gen_range(0..4096u64);
                if !nums.contains(&v) {
                    nums.push(v);
                }
            }
            let pts: Vec<CirclePt> = nums.iter().map(|&v| CirclePt::new(v, 4096)).collect();
            let tri = ideal_triangulation(&pts).unwrap();
            assert_eq!(tri.triangles.len(), n - 2, "n={n}");
            assert!(tri.interiors_disjoint(), "n={n}");
            // prefix-extendability
            if n > 3 {
                let part = ideal_triangulation(&pts[..n - 1]).unwrap();
                assert_eq!(part.triangles[..], tri.triangles[..n - 3], "n={n}");
            }
            cases += 1;
        }
    }
    assert_eq!(cases, 380);
    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "triangulation took {elapsed:?}");
    println!("criterion 6 (triangulation): pass (380/380)");
}

/// A random trivial word built by repeatedly inserting cancelling pairs.
fn random_trivial_word(rng: &mut ChaCha8Rng, max_len: usize) -> Vec<Letter> {
    let pairs = rng.gen_range(1..=max_len / 2);
    let mut word: Vec<Letter> = Vec::new();
    for _ in 0..pairs {
        let gen = rng.gen_range(0..4u32);
        let inverse = rng.gen_bool(0.5);
        let at = rng.gen_range(0..=word.len());
        word.insert(at, Letter { gen, inverse: !inverse });
        word.insert(at, Letter { gen, inverse });
    }
    word
}

#[test]
fn criterion_7_lamination() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce_0007);
    for case in 0..100 {
        let word = random_trivial_word(&mut rng, 40);
        assert!(reduce(word.clone()).is_empty());
        let lam = cancellation_lamination(&word).unwrap();
        assert!(lam.constant_on_elements(&word), "case {case}: property (1)");
        assert!(lam.noncrossing(), "case {case}: property (2)");
        let grid = 64u32;
        let tol = 2.0 * 2.0 / grid as f64;
        let coverage = lam.filling_coverage(grid, tol);
        assert!(
            coverage >= 1.0,
            "case {case}: filling coverage {coverage}"
        );
    }
    println!("criterion 7 (lamination): pass (100/100)");
}

#[test]
fn criterion_8_oracle_equivalence() {
    // labeling vs flood fill on 1000 random rasters
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce_0008);
    for trial in 0..1000 {
        let k = rng.gen_range(2..=6);
        let mut r = Raster::empty(k);
        let side = r.side();
        for row in 0..side {
            for col in 0..side {
                if rng.gen_bool(0.45) {
                    r.set(col, row, true);
                }
            }
        }
        let fam = label_components(&r, Adjacency::Four);
        // oracle: recursive fill with an explicit stack
        let mut seen = vec![false; (side * side) as usize];
        let mut count = 0;
        for row in 0..side {
            for col in 0..side {
                if !r.get(col, row) || seen[(row * side + col) as usize] {
                    continue;
                }
                count += 1;
                let mut stack = vec![(col, row)];
                seen[(row * side + col) as usize] = true;
                while let Some((c, rr)) = stack.pop() {
                    for (dc, dr) in [(0i64, 1i64), (0, -1), (1, 0), (-1, 0)] {
                        let (nc, nr) = (c as i64 + dc, rr as i64 + dr);
                        if nc < 0 || nr < 0 || nc >= side as i64 || nr >= side as i64 {
                            continue;
                        }
                        let (nc, nr) = (nc as u32, nr as u32);
                        if r.get(nc, nr) && !seen[(nr * side + nc) as usize] {
                            seen[(nr * side + nc) as usize] = true;
                            stack.push((nc, nr));
                        }
                    }
                }
            }
        }
        assert_eq!(fam.members.len(), count, "trial {trial}");
    }

    // run-graph counts vs brute-force run merging on 200 random rasters
    for trial in 0..200 {
        let k = rng.gen_range(2..=6);
        let mut m = Raster::empty(k);
        let side = m.side();
        for row in 0..side {
            for col in 0..side {
                if rng.gen_bool(0.55) {
                    m.set(col, row, true);
                }
            }
        }
        if m.is_empty() {
            continue;
        }
        let g = planar_homotopy_core::quotient::build_run_graph(&m).unwrap();
        let mut runs: Vec<(u32, u32, u32)> = Vec::new();
        for col in 0..side {
            let mut top: Option<u32> = None;
            for row in 0..=side {
                let occ = row < side && m.get(col, row);
                match (occ, top) {
                    (true, None) => top = Some(row),
                    (false, Some(t)) => {
                        runs.push((col, t, row - 1));
                        top = None;
                    }
                    _ => {}
                }
            }
        }
        let mut edges = 0;
        for (i, &(c1, t1, b1)) in runs.iter().enumerate() {
            for &(c2, t2, b2) in runs.iter().skip(i + 1) {
                if c2 == c1 + 1 && t1.max(t2) <= b1.min(b2) {
                    edges += 1;
                }
            }
        }
        assert_eq!(g.node_count(), runs.len(), "trial {trial}");
        assert_eq!(g.edge_count(), edges, "trial {trial}");
    }
    println!("criterion 8 (oracle equivalence): pass");
}

#[test]
fn criterion_9_determinism() {
    let scene = tmp("c9.phs");
    make_scene_file("sierpinski", 2, 8, &scene);
    let r1 = tmp("c9-a.txt");
    let r2 = tmp("c9-b.txt");
    for (report, seed) in [(&r1, "7"), (&r2, "7")] {
        let status = bin()
            .args([
                "check",
                "--scene",
                scene.to_str().unwrap(),
                "--schedule",
                "1/2,1/4,1/8",
                "--report",
                report.to_str().unwrap(),
                "--seed",
                seed,
            ])
            .status()
            .expect("check runs");
        assert_eq!(status.code(), Some(0));
    }
    let a = std::fs::read(&r1).unwrap();
    let b = std::fs::read(&r2).unwrap();
    assert_eq!(a, b, "check reports differ across identical runs");

    // a second command family: tile
    let t1 = tmp("c9-t1.txt");
    let t2 = tmp("c9-t2.txt");
    let out1 = tmp("c9-t1.pht");
    let out2 = tmp("c9-t2.pht");
    for (out, report) in [(&out1, &t1), (&out2, &t2)] {
        let status = bin()
            .args([
                "tile",
                "--scene",
                scene.to_str().unwrap(),
                "--stages",
                "2",
                "--out",
                out.to_str().unwrap(),
                "--report",
                report.to_str().unwrap(),
                "--seed",
                "7",
            ])
            .status()
            .expect("tile runs");
        assert_eq!(status.code(), Some(0));
    }
    assert_eq!(
        std::fs::read(&t1).unwrap(),
        std::fs::read(&t2).unwrap(),
        "tile reports differ"
    );
    assert_eq!(
        std::fs::read(&out1).unwrap(),
        std::fs::read(&out2).unwrap(),
        "tiling files differ"
    );
    println!("criterion 9 (determinism): pass");
}
