//! The 1-dimensional spine of a punctured domain: the deformation-retraction
//! target containing the domain's boundary.
//!
//! Round disks become 1-cell-thick square rings around each non-root
//! puncture and radial arcs become shortest grid paths from ring to
//! boundary; the cut system is combinatorially the same. The root puncture
//! needs neither ring nor arc: its region is everything left over.

use std::collections::VecDeque;

use thiserror::Error;

use crate::dyadic::DyadicPoint;
use crate::raster::{label_components, Adjacency, Raster};
use crate::scene::Scene;
use crate::tiler::PeanoTiling;

#[derive(Debug, Error)]
pub enum SpineError {
    #[error("resolution too coarse: {0}")]
    ResolutionTooCoarse(String),
    #[error("domain is empty or disconnected")]
    BadDomain,
    #[error("puncture {0} outside the domain")]
    PunctureOutside(DyadicPoint),
}

/// The spine: a 1-dimensional skeleton containing the domain's boundary
/// ring, with the regions it cuts the domain into.
#[derive(Debug, Clone)]
pub struct Spine {
    /// Boundary ring + puncture rings + radial arcs.
    pub skeleton: Raster,
    /// The outer boundary ring alone (complement cells adjacent to u).
    pub boundary: Raster,
    /// Puncture rings, one per non-root puncture, in puncture order.
    pub puncture_rings: Vec<Vec<(u32, u32)>>,
    /// Radial arcs from each ring to the boundary, in puncture order.
    pub radial_arcs: Vec<Vec<(u32, u32)>>,
    /// Components of the domain minus rings and arcs, one per puncture:
    /// regions[i] belongs to punctures[i].
    pub regions: Vec<Raster>,
}

/// Builds the spine of a punctured domain.
///
/// Preconditions: punctures nonempty and inside `u`; non-root punctures
/// pairwise >= 4 cells apart (Chebyshev) and >= 2 cells from the domain
/// boundary.
pub fn build_spine(u: &Raster, punctures: &[DyadicPoint]) -> Result<Spine, SpineError> {
    let k = u.resolution();
    let side = u.side();
    if punctures.is_empty() {
        return Err(SpineError::BadDomain);
    }
    if u.is_empty() {
        return Err(SpineError::BadDomain);
    }
    let fam = label_components(u, Adjacency::Eight);
    if fam.members.len() != 1 {
        return Err(SpineError::BadDomain);
    }
    let cells: Vec<(u32, u32)> = punctures.iter().map(|p| p.cell_at(k)).collect();
    for (p, &(c, r)) in punctures.iter().zip(&cells) {
        if !u.get(c, r) {
            return Err(SpineError::PunctureOutside(*p));
        }
    }
    // spacing preconditions for the non-root punctures
    for i in 0..cells.len() {
        for j in i + 1..cells.len() {
            let dc = (cells[i].0 as i64 - cells[j].0 as i64).abs();
            let dr = (cells[i].1 as i64 - cells[j].1 as i64).abs();
            if dc.max(dr) < 4 {
                return Err(SpineError::ResolutionTooCoarse(format!(
                    "punctures {} and {} within 4 cells",
                    punctures[i], punctures[j]
                )));
            }
        }
    }
    let dist_to_boundary = |c: u32, r: u32| -> i64 {
        let mut best = i64::MAX;
        for (bc, br) in boundary_ring(u) {
            let d = (bc as i64 - c as i64).abs().max((br as i64 - r as i64).abs());
            best = best.min(d);
        }
        best
    };
    for (i, &(c, r)) in cells.iter().enumerate().skip(1) {
        if dist_to_boundary(c, r) < 2 {
            return Err(SpineError::ResolutionTooCoarse(format!(
                "puncture {} within 2 cells of the boundary",
                punctures[i]
            )));
        }
    }

    let mut boundary = Raster::empty(k);
    for (c, r) in boundary_ring(u) {
        boundary.set(c, r, true);
    }

    // rings around the non-root punctures
    let mut skeleton_in_u = Raster::empty(k); // rings + arcs, inside u
    let mut puncture_rings = Vec::new();
    for &(c, r) in cells.iter().skip(1) {
        let mut ring = Vec::new();
        for dr in -1i64..=1 {
            for dc in -1i64..=1 {
                if dc == 0 && dr == 0 {
                    continue;
                }
                let (nc, nr) = (c as i64 + dc, r as i64 + dr);
                if nc < 0 || nr < 0 || nc >= side as i64 || nr >= side as i64 {
                    return Err(SpineError::ResolutionTooCoarse(format!(
                        "ring around ({c},{r}) leaves the square"
                    )));
                }
                let (nc, nr) = (nc as u32, nr as u32);
                if !u.get(nc, nr) {
                    return Err(SpineError::ResolutionTooCoarse(format!(
                        "ring around ({c},{r}) leaves the domain"
                    )));
                }
                ring.push((nc, nr));
                skeleton_in_u.set(nc, nr, true);
            }
        }
        ring.sort_unstable_by_key(|&(cc, rr)| (rr, cc));
        puncture_rings.push(ring);
    }

    // radial arcs: shortest 4-connected path from each ring to a cell
    // adjacent to the outside, avoiding other rings, prior arcs, and
    // every puncture cell
    let mut radial_arcs = Vec::new();
    for (pi, &(c, r)) in cells.iter().enumerate().skip(1) {
        let own_ring = &puncture_rings[pi - 1];
        let start = own_ring
            .iter()
            .copied()
            .min_by_key(|&(cc, rr)| (rr, cc))
            .expect("ring nonempty");
        let permitted = |cc: u32, rr: u32| {
            if !u.get(cc, rr) {
                return false;
            }
            if cells.contains(&(cc, rr)) {
                return false;
            }
            // own ring cells allowed (the arc starts there), others not,
            // except interior cell of own puncture never reached anyway
            if skeleton_in_u.get(cc, rr) && !own_ring.contains(&(cc, rr)) {
                return false;
            }
            if (cc, rr) == (c, r) {
                return false;
            }
            true
        };
        let is_target = |cc: u32, rr: u32| {
            [(0i64, -1i64), (-1, 0), (1, 0), (0, 1)].iter().any(|&(dx, dy)| {
                let (nc, nr) = (cc as i64 + dx, rr as i64 + dy);
                nc < 0
                    || nr < 0
                    || nc >= side as i64
                    || nr >= side as i64
                    || !u.get(nc as u32, nr as u32)
            })
        };
        let path = bfs_path(start, permitted, is_target, side).ok_or_else(|| {
            SpineError::ResolutionTooCoarse(format!("no radial arc from ring {pi}"))
        })?;
        for &(cc, rr) in &path {
            skeleton_in_u.set(cc, rr, true);
        }
        radial_arcs.push(path);
    }

    // full skeleton: boundary ring + rings + arcs
    let mut skeleton = boundary.clone();
    skeleton.union_with(&skeleton_in_u);

    // regions: components of u minus the in-domain skeleton
    let mut interior = u.clone();
    interior.subtract(&skeleton_in_u);
    let region_fam = label_components(&interior, Adjacency::Eight);
    let mut regions: Vec<Option<Raster>> = vec![None; punctures.len()];
    let mut extra = Vec::new();
    for m in &region_fam.members {
        let mut raster = Raster::empty(k);
        for (cc, rr) in m.cell_coords(side) {
            raster.set(cc, rr, true);
        }
        let mut holder = None;
        for (pi, &(pc, pr)) in cells.iter().enumerate() {
            if raster.get(pc, pr) {
                holder = Some(pi);
                break;
            }
        }
        match holder {
            Some(pi) if regions[pi].is_none() => regions[pi] = Some(raster),
            _ => extra.push(raster),
        }
    }
    if regions.iter().any(|r| r.is_none()) || !extra.is_empty() {
        return Err(SpineError::ResolutionTooCoarse(format!(
            "region-puncture mismatch: {} punctures, {} matched, {} stray regions",
            punctures.len(),
            regions.iter().filter(|r| r.is_some()).count(),
            extra.len()
        )));
    }

    Ok(Spine {
        skeleton,
        boundary,
        puncture_rings,
        radial_arcs,
        regions: regions.into_iter().map(|r| r.unwrap()).collect(),
    })
}

/// Complement cells 4-adjacent to the domain (the outer boundary ring).
fn boundary_ring(u: &Raster) -> Vec<(u32, u32)> {
    let side = u.side();
    let mut out = Vec::new();
    for r in 0..side {
        for c in 0..side {
            if u.get(c, r) {
                continue;
            }
            let touches = [(0i64, -1i64), (-1, 0), (1, 0), (0, 1)].iter().any(|&(dx, dy)| {
                let (nc, nr) = (c as i64 + dx, r as i64 + dy);
                nc >= 0
                    && nr >= 0
                    && nc < side as i64
                    && nr < side as i64
                    && u.get(nc as u32, nr as u32)
            });
            if touches {
                out.push((c, r));
            }
        }
    }
    out
}

fn bfs_path(
    start: (u32, u32),
    permitted: impl Fn(u32, u32) -> bool,
    is_target: impl Fn(u32, u32) -> bool,
    side: u32,
) -> Option<Vec<(u32, u32)>> {
    let mut prev: std::collections::HashMap<(u32, u32), (u32, u32)> =
        std::collections::HashMap::new();
    let mut seen = std::collections::HashSet::new();
    let mut queue = VecDeque::new();
    queue.push_back(start);
    seen.insert(start);
    while let Some(cur) = queue.pop_front() {
        if is_target(cur.0, cur.1) {
            let mut path = vec![cur];
            let mut at = cur;
            while at != start {
                at = prev[&at];
                path.push(at);
            }
            path.reverse();
            return Some(path);
        }
        for (dx, dy) in [(0i64, -1i64), (-1, 0), (1, 0), (0, 1)] {
            let (nc, nr) = (cur.0 as i64 + dx, cur.1 as i64 + dy);
            if nc < 0 || nr < 0 || nc >= side as i64 || nr >= side as i64 {
                continue;
            }
            let next = (nc as u32, nr as u32);
            if !seen.contains(&next) && permitted(next.0, next.1) {
                seen.insert(next);
                prev.insert(next, cur);
                queue.push_back(next);
            }
        }
    }
    None
}

/// Report of the union-dimension check over a tiling's spines.
#[derive(Debug, Clone)]
pub struct SpineUnionReport {
    pub passed: bool,
    /// A fully occupied 2x2 block, if one exists.
    pub witness: Option<(u32, u32)>,
    pub spine_count: usize,
}

/// Verifies that the union of all domain spines and the bad set has empty
/// interior at the working resolution. Boundary cells claimed by another
/// domain are not part of the union: the shared seam between two adjacent
/// open domains carries no cells of its own at raster scale.
pub fn spine_union_dimension_check(
    tiling: &PeanoTiling,
    scene: &Scene,
) -> Result<SpineUnionReport, SpineError> {
    let k = tiling.resolution;
    let mut union = scene
        .bad_at(k)
        .cloned()
        .unwrap_or_else(|| Raster::empty(k));
    let mut all_domains = Raster::empty(k);
    for d in &tiling.domains {
        all_domains.union_with(&d.cells);
    }
    let mut count = 0;
    for d in &tiling.domains {
        let spine = build_spine(&d.cells, &d.punctures)?;
        count += 1;
        // boundary cells inside other domains belong to the seam, not the
        // union target
        let mut boundary = spine.boundary.clone();
        let foreign: Vec<(u32, u32)> = boundary
            .cells()
            .filter(|&(c, r)| all_domains.get(c, r) && !d.cells.get(c, r))
            .collect();
        for (c, r) in foreign {
            boundary.set(c, r, false);
        }
        union.union_with(&boundary);
        let mut inner = spine.skeleton.clone();
        inner.subtract(&spine.boundary);
        union.union_with(&inner);
    }
    let witness = union.find_2x2_block();
    Ok(SpineUnionReport {
        passed: witness.is_none(),
        witness,
        spine_count: count,
    })
}
