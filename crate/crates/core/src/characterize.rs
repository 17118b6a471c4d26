//! The two-condition homotopy-dimension criterion and the local-connectivity
//! style checks it rests on.
//!
//! Condition (1): every component of the complement of the bad set contains
//! a puncture (infinity counts for the outer component). Condition (2): for
//! every probe square, the unpunctured components of probe-minus-bad pass
//! the null-sequence surrogate across the resolution ladder.
//!
//! Probe squares are dyadic squares, not round disks; every report carries
//! the "desk-scale surrogate" flag.

use rayon::prelude::*;

use crate::raster::{
    diameter_of_cells, label_components, label_window_components, probe_disks, Adjacency,
    ProbeRect, Raster,
};
use crate::scene::Scene;
use crate::sequences::{default_schedule, null_sequence_verdict_with_slack, Verdict};
use crate::Dyadic;

/// Scales of the dyadic probe family used by condition (2) and the Peano
/// criteria: 0 up to min(4, coarsest-2).
pub fn probe_scales_for(coarsest_k: u8) -> (u8, u8) {
    (0, 4u8.min(coarsest_k.saturating_sub(2)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckVerdict {
    Pass,
    Fail,
    Inconclusive,
}

impl CheckVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            CheckVerdict::Pass => "pass",
            CheckVerdict::Fail => "fail",
            CheckVerdict::Inconclusive => "inconclusive",
        }
    }
}

/// A failing component descriptor.
#[derive(Debug, Clone)]
pub struct ComponentWitness {
    pub probe: Option<ProbeRect>,
    /// (col0, row0, col1, row1) inclusive, at the finest resolution involved.
    pub bbox: (u32, u32, u32, u32),
    pub cells: usize,
    pub note: String,
}

impl std::fmt::Display for ComponentWitness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if let Some(p) = self.probe {
            write!(f, "probe={p} ")?;
        }
        write!(
            f,
            "bbox={},{},{},{} cells={} {}",
            self.bbox.0, self.bbox.1, self.bbox.2, self.bbox.3, self.cells, self.note
        )
    }
}

/// Report for one of the two conditions.
#[derive(Debug, Clone)]
pub struct ConditionReport {
    pub condition: u8,
    pub verdict: CheckVerdict,
    pub witnesses: Vec<ComponentWitness>,
    /// One line per probe (condition 2) or per component count (condition 1).
    pub lines: Vec<String>,
}

impl ConditionReport {
    pub fn passed(&self) -> bool {
        self.verdict == CheckVerdict::Pass
    }
}

/// Condition (1) at resolution k: label the complement of the bad set with
/// 8-adjacency (infinity included) and require a puncture in every
/// component.
pub fn condition1(scene: &Scene, k: u8, depth: u8) -> ConditionReport {
    let bad = scene.bad_at(k).expect("k in ladder");
    let mut comp = bad.complement();
    comp.set_infinity(true); // the outer cell is never bad
    let fam = label_components(&comp, Adjacency::Eight);
    let punctures: Vec<(u32, u32)> = scene
        .punctures_up_to(depth)
        .iter()
        .map(|p| p.cell_at(k))
        .collect();
    let mut witnesses = Vec::new();
    for m in &fam.members {
        let punctured = (m.includes_infinity && scene.infinity)
            || punctures
                .iter()
                .any(|&(c, r)| m.contains_cell(fam.side, c, r));
        if !punctured {
            witnesses.push(ComponentWitness {
                probe: None,
                bbox: m.bbox,
                cells: m.cells.len(),
                note: "unpunctured complement component".into(),
            });
        }
    }
    let lines = vec![format!(
        "cond1 k={k} components={} unpunctured={}",
        fam.members.len(),
        witnesses.len()
    )];
    ConditionReport {
        condition: 1,
        verdict: if witnesses.is_empty() {
            CheckVerdict::Pass
        } else {
            CheckVerdict::Fail
        },
        witnesses,
        lines,
    }
}

/// Unpunctured-component diameter multiset for one probe window at one
/// resolution.
fn unpunctured_diameters(
    bad: &Raster,
    probe: &ProbeRect,
    puncture_cells: &[(u32, u32)],
    collect_witness: bool,
) -> (Vec<f64>, Vec<((u32, u32, u32, u32), usize)>) {
    let k = bad.resolution();
    let window = probe.cell_range(k);
    let comps = label_window_components(window, |c, r| !bad.get(c, r), Adjacency::Eight);
    let mut diams = Vec::with_capacity(comps.len());
    let mut boxes = Vec::new();
    for cells in &comps {
        let punctured = puncture_cells
            .iter()
            .any(|p| cells.binary_search_by_key(&(p.1, p.0), |&(c, r)| (r, c)).is_ok());
        if punctured {
            continue;
        }
        let d = diameter_of_cells(cells, bad.side()).unwrap_or(0.0);
        diams.push(d);
        if collect_witness {
            let bbox = cells.iter().fold(
                (u32::MAX, u32::MAX, 0u32, 0u32),
                |(a, b, c2, d2), &(c, r)| (a.min(c), b.min(r), c2.max(c), d2.max(r)),
            );
            boxes.push((bbox, cells.len()));
        }
    }
    (diams, boxes)
}

/// Condition (2): every probe square's unpunctured complement components
/// must be null-consistent across the ladder.
pub fn condition2(scene: &Scene, schedule: &[Dyadic], depth: u8) -> ConditionReport {
    assert!(scene.ladder.len() >= 2, "condition 2 needs >= 2 resolutions");
    let (lo, hi) = probe_scales_for(scene.coarsest_k());
    let probes = probe_disks(lo, hi);
    let puncture_cells_per_k: Vec<Vec<(u32, u32)>> = scene
        .ladder
        .iter()
        .map(|&k| {
            scene
                .punctures_up_to(depth)
                .iter()
                .map(|p| p.cell_at(k))
                .collect()
        })
        .collect();

    let slacks: Vec<f64> = scene.bad.iter().map(|b| 4.0 * b.cell_width()).collect();
    let per_probe: Vec<(Verdict, Vec<String>, Vec<ComponentWitness>)> = probes
        .par_iter()
        .map(|probe| {
            let mut families = Vec::with_capacity(scene.ladder.len());
            let mut witnesses = Vec::new();
            for (i, bad) in scene.bad.iter().enumerate() {
                let last = i + 1 == scene.bad.len();
                let (diams, boxes) =
                    unpunctured_diameters(bad, probe, &puncture_cells_per_k[i], last);
                if last {
                    for (bbox, cells) in boxes {
                        witnesses.push(ComponentWitness {
                            probe: Some(*probe),
                            bbox,
                            cells,
                            note: "unpunctured".into(),
                        });
                    }
                }
                families.push(diams);
            }
            let nv = null_sequence_verdict_with_slack(&families, schedule, &slacks)
                .expect("schedule validated");
            let line = format!("probe={} verdict={}", probe, nv.verdict.as_str());
            let witnesses = if nv.verdict == Verdict::NotNull {
                // keep only large persistent components as witnesses
                let eps_min = schedule.last().map(|e| e.to_f64()).unwrap_or(0.0);
                witnesses
                    .into_iter()
                    .filter(|w| {
                        let (c0, r0, c1, r1) = w.bbox;
                        let side = scene.bad.last().unwrap().side() as f64;
                        let span = ((c1 - c0).max(r1 - r0) as f64 + 1.0) / side;
                        span >= eps_min
                    })
                    .collect()
            } else {
                Vec::new()
            };
            (nv.verdict, vec![line], witnesses)
        })
        .collect();

    let mut lines = vec![format!(
        "cond2 probes={} scales={lo}..{hi} note=desk-scale-surrogate",
        probes.len()
    )];
    let mut witnesses = Vec::new();
    let mut any_not_null = false;
    let mut any_inconclusive = false;
    for (v, ls, ws) in per_probe {
        match v {
            Verdict::NotNull => any_not_null = true,
            Verdict::Inconclusive => any_inconclusive = true,
            Verdict::NullConsistent => {}
        }
        if v != Verdict::NullConsistent {
            lines.extend(ls);
        }
        witnesses.extend(ws);
    }
    let verdict = if any_not_null {
        CheckVerdict::Fail
    } else if any_inconclusive {
        CheckVerdict::Inconclusive
    } else {
        CheckVerdict::Pass
    };
    ConditionReport {
        condition: 2,
        verdict,
        witnesses,
        lines,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HomotopyDimension {
    AtMostOne,
    EqualsTwo,
    Inconclusive,
}

impl HomotopyDimension {
    pub fn as_str(&self) -> &'static str {
        match self {
            HomotopyDimension::AtMostOne => "at-most-1",
            HomotopyDimension::EqualsTwo => "equals-2",
            HomotopyDimension::Inconclusive => "inconclusive",
        }
    }
}

/// Combined verdict for a scene.
#[derive(Debug, Clone)]
pub struct DimensionVerdict {
    pub scene_id: String,
    pub cond1: ConditionReport,
    pub cond2: ConditionReport,
    pub verdict: HomotopyDimension,
}

/// Condition (1) at the finest resolution, condition (2) across the ladder;
/// at-most-1 iff both pass, equals-2 iff either fails.
pub fn homotopy_dimension_verdict(scene: &Scene, schedule: &[Dyadic]) -> DimensionVerdict {
    let depth = scene.max_depth();
    let cond1 = condition1(scene, scene.finest_k(), depth);
    let cond2 = condition2(scene, schedule, depth);
    let verdict = match (cond1.verdict, cond2.verdict) {
        (CheckVerdict::Fail, _) | (_, CheckVerdict::Fail) => HomotopyDimension::EqualsTwo,
        (CheckVerdict::Pass, CheckVerdict::Pass) => HomotopyDimension::AtMostOne,
        _ => HomotopyDimension::Inconclusive,
    };
    DimensionVerdict {
        scene_id: scene.name.clone(),
        cond1,
        cond2,
        verdict,
    }
}

pub fn default_check_schedule(scene: &Scene) -> Vec<Dyadic> {
    default_schedule(scene.finest_k())
}

/// Per-criterion report for the Peano continuum / Peano domain checks.
#[derive(Debug, Clone)]
pub struct PeanoReport {
    pub criterion: &'static str,
    pub verdict: CheckVerdict,
    pub witnesses: Vec<ComponentWitness>,
}

fn null_probe_sweep(
    rasters: &[&Raster],
    schedule: &[Dyadic],
    occupied_side: bool, // true: intersection components; false: complement
    adjacency: Adjacency,
) -> (CheckVerdict, Vec<ComponentWitness>) {
    let coarsest = rasters
        .iter()
        .map(|r| r.resolution())
        .min()
        .expect("nonempty ladder");
    let (lo, hi) = probe_scales_for(coarsest);
    let probes = probe_disks(lo, hi);
    let slacks: Vec<f64> = rasters.iter().map(|r| 4.0 * r.cell_width()).collect();
    let results: Vec<(Verdict, Option<ComponentWitness>)> = probes
        .par_iter()
        .map(|probe| {
            let mut families = Vec::with_capacity(rasters.len());
            let mut witness = None;
            for (i, m) in rasters.iter().enumerate() {
                let window = probe.cell_range(m.resolution());
                let comps = label_window_components(
                    window,
                    |c, r| m.get(c, r) == occupied_side,
                    adjacency,
                );
                let diams: Vec<f64> = comps
                    .iter()
                    .map(|cells| diameter_of_cells(cells, m.side()).unwrap_or(0.0))
                    .collect();
                if i + 1 == rasters.len() {
                    if let Some(cells) = comps.iter().max_by_key(|c| c.len()) {
                        let bbox = cells.iter().fold(
                            (u32::MAX, u32::MAX, 0u32, 0u32),
                            |(a, b, c2, d2), &(c, r)| (a.min(c), b.min(r), c2.max(c), d2.max(r)),
                        );
                        witness = Some(ComponentWitness {
                            probe: Some(*probe),
                            bbox,
                            cells: cells.len(),
                            note: "largest component at finest scale".into(),
                        });
                    }
                }
                families.push(diams);
            }
            let nv = null_sequence_verdict_with_slack(&families, schedule, &slacks)
                .expect("schedule validated");
            (nv.verdict, witness)
        })
        .collect();
    let mut verdict = CheckVerdict::Pass;
    let mut witnesses = Vec::new();
    for (v, w) in results {
        match v {
            Verdict::NotNull => {
                verdict = CheckVerdict::Fail;
                witnesses.extend(w);
            }
            Verdict::Inconclusive => {
                if verdict == CheckVerdict::Pass {
                    verdict = CheckVerdict::Inconclusive;
                }
            }
            Verdict::NullConsistent => {}
        }
    }
    (verdict, witnesses)
}

/// Local connectivity of a continuum M given at several resolutions:
/// criterion (1) complement components per probe, criterion (1')
/// intersection components per probe, both through the null surrogate.
pub fn peano_continuum_check(m_ladder: &[&Raster], schedule: &[Dyadic]) -> Vec<PeanoReport> {
    assert!(m_ladder.len() >= 2, "need >= 2 resolutions");
    let (v1, w1) = null_probe_sweep(m_ladder, schedule, false, Adjacency::Eight);
    let (v1p, w1p) = null_probe_sweep(m_ladder, schedule, true, Adjacency::Four);
    vec![
        PeanoReport {
            criterion: "complement-components",
            verdict: v1,
            witnesses: w1,
        },
        PeanoReport {
            criterion: "intersection-components",
            verdict: v1p,
            witnesses: w1p,
        },
    ]
}

/// Peano-domain criterion for an open set U given at several resolutions:
/// intersection components per probe must be null-consistent.
pub fn peano_domain_check(u_ladder: &[&Raster], schedule: &[Dyadic]) -> PeanoReport {
    assert!(u_ladder.len() >= 2, "need >= 2 resolutions");
    let (v, w) = null_probe_sweep(u_ladder, schedule, true, Adjacency::Eight);
    PeanoReport {
        criterion: "open-intersection-components",
        verdict: v,
        witnesses: w,
    }
}
