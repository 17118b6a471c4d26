//! Deterministic integer geometry on dyadic bit-grids over the unit square,
//! with a single abstract outer cell standing in for the point at infinity
//! of the sphere model.
//!
//! Conventions used throughout the crate:
//! - resolution exponent `k` gives a `2^k x 2^k` grid of cells of side `2^-k`;
//! - cell `(col, row)` covers `[col*w, (col+1)*w] x [row*w, (row+1)*w]`,
//!   row 0 at the top of the text serialization;
//! - occupied sets are labeled with 4-adjacency by default, complements with
//!   8-adjacency (the Jordan-safe pairing);
//! - the infinity cell is adjacent to every boundary cell of the square;
//! - all distances are between cell centers, measured exactly in integer
//!   half-cell units and converted to `f64` once at the end.

use std::fmt::Write as _;

use thiserror::Error;

use crate::dyadic::DyadicPoint;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RasterError {
    #[error("empty set has no diameter")]
    EmptyDiameter,
    #[error("Hausdorff undefined on empty set")]
    HausdorffEmpty,
    #[error("resolution mismatch: {0} vs {1}")]
    ResolutionMismatch(u8, u8),
    #[error("malformed raster file: {0}")]
    Parse(String),
}

/// Neighborhood model for component labeling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Adjacency {
    Four,
    Eight,
}

impl Adjacency {
    pub(crate) fn offsets(self) -> &'static [(i32, i32)] {
        const FOUR: [(i32, i32); 4] = [(0, -1), (-1, 0), (1, 0), (0, 1)];
        const EIGHT: [(i32, i32); 8] = [
            (-1, -1),
            (0, -1),
            (1, -1),
            (-1, 0),
            (1, 0),
            (-1, 1),
            (0, 1),
            (1, 1),
        ];
        match self {
            Adjacency::Four => &FOUR,
            Adjacency::Eight => &EIGHT,
        }
    }
}

/// Occupancy bit-grid at resolution `k` plus the infinity flag.
#[derive(Clone, PartialEq, Eq)]
pub struct Raster {
    k: u8,
    side: u32,
    bits: Vec<u64>,
    includes_infinity: bool,
}

impl std::fmt::Debug for Raster {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "Raster(k={}, occupied={}, inf={})",
            self.k,
            self.count(),
            self.includes_infinity
        )
    }
}

impl Raster {
    pub fn empty(k: u8) -> Raster {
        assert!(k <= 14, "resolution exponent too large");
        let side = 1u32 << k;
        let words = ((side as usize * side as usize) + 63) / 64;
        Raster {
            k,
            side,
            bits: vec![0; words],
            includes_infinity: false,
        }
    }

    pub fn full(k: u8) -> Raster {
        let mut r = Raster::empty(k);
        let cells = r.side as usize * r.side as usize;
        for (i, w) in r.bits.iter_mut().enumerate() {
            let lo = i * 64;
            if lo + 64 <= cells {
                *w = u64::MAX;
            } else {
                for b in 0..cells - lo {
                    *w |= 1 << b;
                }
            }
        }
        r
    }

    pub fn resolution(&self) -> u8 {
        self.k
    }

    pub fn side(&self) -> u32 {
        self.side
    }

    pub fn cell_width(&self) -> f64 {
        1.0 / self.side as f64
    }

    pub fn includes_infinity(&self) -> bool {
        self.includes_infinity
    }

    pub fn set_infinity(&mut self, v: bool) {
        self.includes_infinity = v;
    }

    #[inline]
    fn idx(&self, col: u32, row: u32) -> usize {
        debug_assert!(col < self.side && row < self.side);
        row as usize * self.side as usize + col as usize
    }

    #[inline]
    pub fn get(&self, col: u32, row: u32) -> bool {
        let i = self.idx(col, row);
        self.bits[i >> 6] >> (i & 63) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, col: u32, row: u32, v: bool) {
        let i = self.idx(col, row);
        if v {
            self.bits[i >> 6] |= 1 << (i & 63);
        } else {
            self.bits[i >> 6] &= !(1 << (i & 63));
        }
    }

    /// Number of occupied finite cells.
    pub fn count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        !self.includes_infinity && self.bits.iter().all(|&w| w == 0)
    }

    /// Occupied finite cells in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        let side = self.side;
        (0..side).flat_map(move |row| {
            (0..side).filter_map(move |col| self.get(col, row).then_some((col, row)))
        })
    }

    pub fn union_with(&mut self, other: &Raster) {
        assert_eq!(self.k, other.k);
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= b;
        }
        self.includes_infinity |= other.includes_infinity;
    }

    pub fn intersect_with(&mut self, other: &Raster) {
        assert_eq!(self.k, other.k);
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a &= b;
        }
        self.includes_infinity &= other.includes_infinity;
    }

    pub fn subtract(&mut self, other: &Raster) {
        assert_eq!(self.k, other.k);
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a &= !b;
        }
        if other.includes_infinity {
            self.includes_infinity = false;
        }
    }

    pub fn intersects(&self, other: &Raster) -> bool {
        assert_eq!(self.k, other.k);
        (self.includes_infinity && other.includes_infinity)
            || self.bits.iter().zip(&other.bits).any(|(a, b)| a & b != 0)
    }

    /// Complement within the square; the infinity cell flips too.
    pub fn complement(&self) -> Raster {
        let mut out = Raster::full(self.k);
        for (a, b) in out.bits.iter_mut().zip(&self.bits) {
            *a &= !b;
        }
        out.includes_infinity = !self.includes_infinity;
        out
    }

    /// 2x2 OR-coarsening: the closed-set coarsening (a coarse cell is
    /// occupied when any of its four children is).
    pub fn coarsen_or(&self) -> Raster {
        assert!(self.k > 0);
        let mut out = Raster::empty(self.k - 1);
        for (col, row) in self.cells() {
            out.set(col >> 1, row >> 1, true);
        }
        out.includes_infinity = self.includes_infinity;
        out
    }

    /// 2x2 AND-coarsening: the open-set coarsening (a coarse cell is
    /// occupied only when all four children are).
    pub fn coarsen_and(&self) -> Raster {
        assert!(self.k > 0);
        let mut out = Raster::empty(self.k - 1);
        let s = out.side;
        for row in 0..s {
            for col in 0..s {
                let (c, r) = (col << 1, row << 1);
                if self.get(c, r) && self.get(c + 1, r) && self.get(c, r + 1) && self.get(c + 1, r + 1)
                {
                    out.set(col, row, true);
                }
            }
        }
        out.includes_infinity = self.includes_infinity;
        out
    }

    /// Each cell becomes a 2x2 block one level finer.
    pub fn refine(&self) -> Raster {
        let mut out = Raster::empty(self.k + 1);
        for (col, row) in self.cells() {
            let (c, r) = (col << 1, row << 1);
            out.set(c, r, true);
            out.set(c + 1, r, true);
            out.set(c, r + 1, true);
            out.set(c + 1, r + 1, true);
        }
        out.includes_infinity = self.includes_infinity;
        out
    }

    /// Occupied cells with an unoccupied 4-neighbor (square edges count as
    /// exposure only when `includes_infinity` is false for the complement
    /// reading; here exposure at the frame is always reported).
    pub fn boundary_cells(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        for (col, row) in self.cells() {
            let exposed = [(0i32, -1i32), (-1, 0), (1, 0), (0, 1)].iter().any(|&(dx, dy)| {
                let (nc, nr) = (col as i32 + dx, row as i32 + dy);
                if nc < 0 || nr < 0 || nc >= self.side as i32 || nr >= self.side as i32 {
                    true
                } else {
                    !self.get(nc as u32, nr as u32)
                }
            });
            if exposed {
                out.push((col, row));
            }
        }
        out
    }

    /// 1-cell 8-neighborhood dilation (infinity flag untouched).
    pub fn dilate(&self) -> Raster {
        let mut out = self.clone();
        for (col, row) in self.cells() {
            for &(dx, dy) in Adjacency::Eight.offsets() {
                let (nc, nr) = (col as i32 + dx, row as i32 + dy);
                if nc >= 0 && nr >= 0 && nc < self.side as i32 && nr < self.side as i32 {
                    out.set(nc as u32, nr as u32, true);
                }
            }
        }
        out
    }

    /// Finds one fully occupied 2x2 block, the raster surrogate for
    /// nonempty interior.
    pub fn find_2x2_block(&self) -> Option<(u32, u32)> {
        for row in 0..self.side.saturating_sub(1) {
            for col in 0..self.side.saturating_sub(1) {
                if self.get(col, row)
                    && self.get(col + 1, row)
                    && self.get(col, row + 1)
                    && self.get(col + 1, row + 1)
                {
                    return Some((col, row));
                }
            }
        }
        None
    }

    /// True when the 3x3 neighborhood of `(col, row)` (clipped to the square)
    /// contains an occupied cell. The infinity cell's neighborhood is itself
    /// plus the square's boundary ring; boundary cells see the infinity cell.
    pub fn meets_neighborhood(&self, col: u32, row: u32) -> bool {
        for dy in -1i32..=1 {
            for dx in -1i32..=1 {
                let (nc, nr) = (col as i32 + dx, row as i32 + dy);
                if nc >= 0 && nr >= 0 && nc < self.side as i32 && nr < self.side as i32 {
                    if self.get(nc as u32, nr as u32) {
                        return true;
                    }
                }
            }
        }
        if self.includes_infinity && self.is_frame_cell(col, row) {
            return true;
        }
        false
    }

    pub fn is_frame_cell(&self, col: u32, row: u32) -> bool {
        col == 0 || row == 0 || col == self.side - 1 || row == self.side - 1
    }

    /// True when any occupied cell lies on the square's boundary ring.
    pub fn meets_frame(&self) -> bool {
        let s = self.side;
        (0..s).any(|c| self.get(c, 0) || self.get(c, s - 1))
            || (0..s).any(|r| self.get(0, r) || self.get(s - 1, r))
    }

    /// Writes the PH-RASTER text format.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity((self.side as usize + 1) * self.side as usize + 32);
        let _ = writeln!(
            out,
            "PH-RASTER k={} inf={}",
            self.k,
            if self.includes_infinity { 1 } else { 0 }
        );
        for row in 0..self.side {
            for col in 0..self.side {
                out.push(if self.get(col, row) { '1' } else { '0' });
            }
            out.push('\n');
        }
        out
    }

    /// Parses the PH-RASTER text format from a line iterator; consumes
    /// exactly the header plus 2^k rows.
    pub fn from_lines<'a, I: Iterator<Item = &'a str>>(lines: &mut I) -> Result<Raster, RasterError> {
        let header = lines
            .next()
            .ok_or_else(|| RasterError::Parse("missing PH-RASTER header".into()))?;
        let rest = header
            .strip_prefix("PH-RASTER ")
            .ok_or_else(|| RasterError::Parse(format!("bad header: {header}")))?;
        let mut k = None;
        let mut inf = None;
        for tok in rest.split_whitespace() {
            if let Some(v) = tok.strip_prefix("k=") {
                k = Some(
                    v.parse::<u8>()
                        .map_err(|_| RasterError::Parse(format!("bad k: {v}")))?,
                );
            } else if let Some(v) = tok.strip_prefix("inf=") {
                inf = Some(match v {
                    "0" => false,
                    "1" => true,
                    _ => return Err(RasterError::Parse(format!("bad inf flag: {v}"))),
                });
            }
        }
        let k = k.ok_or_else(|| RasterError::Parse("header missing k=".into()))?;
        let inf = inf.ok_or_else(|| RasterError::Parse("header missing inf=".into()))?;
        let mut r = Raster::empty(k);
        r.includes_infinity = inf;
        for row in 0..r.side {
            let line = lines
                .next()
                .ok_or_else(|| RasterError::Parse(format!("missing row {row}")))?;
            let line = line.trim_end();
            if line.len() != r.side as usize {
                return Err(RasterError::Parse(format!(
                    "row {row} has {} cells, expected {}",
                    line.len(),
                    r.side
                )));
            }
            for (col, ch) in line.chars().enumerate() {
                match ch {
                    '0' => {}
                    '1' => r.set(col as u32, row, true),
                    _ => return Err(RasterError::Parse(format!("bad cell char {ch:?}"))),
                }
            }
        }
        Ok(r)
    }

    pub fn from_text(text: &str) -> Result<Raster, RasterError> {
        Raster::from_lines(&mut text.lines())
    }

    /// Cell containing a dyadic point.
    pub fn cell_of_point(&self, p: &DyadicPoint) -> (u32, u32) {
        p.cell_at(self.k)
    }
}

/// A dyadic square probe: scale `j` square `(ix, iy)` covering
/// `[ix/2^j, (ix+1)/2^j] x [iy/2^j, (iy+1)/2^j]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProbeRect {
    pub scale: u8,
    pub ix: u32,
    pub iy: u32,
}

impl ProbeRect {
    /// Cell range `(col0..col1, row0..row1)` (exclusive) at resolution k.
    /// Requires `k >= scale`.
    pub fn cell_range(&self, k: u8) -> (u32, u32, u32, u32) {
        assert!(k >= self.scale, "probe finer than raster");
        let w = 1u32 << (k - self.scale);
        (self.ix * w, (self.ix + 1) * w, self.iy * w, (self.iy + 1) * w)
    }
}

impl std::fmt::Display for ProbeRect {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{},{}", self.scale, self.ix, self.iy)
    }
}

/// All dyadic squares at scales `k_min..=k_max`, scale-major then row-major.
pub fn probe_disks(k_min: u8, k_max: u8) -> Vec<ProbeRect> {
    assert!(k_min <= k_max);
    let mut out = Vec::new();
    for scale in k_min..=k_max {
        let n = 1u32 << scale;
        for iy in 0..n {
            for ix in 0..n {
                out.push(ProbeRect { scale, ix, iy });
            }
        }
    }
    out
}

/// One labeled connected component. Cells are linear indices, sorted.
#[derive(Debug, Clone)]
pub struct Component {
    pub label: u32,
    pub cells: Vec<u32>,
    pub includes_infinity: bool,
    pub diameter: f64,
    /// (col0, row0, col1, row1) inclusive; meaningless when only infinity.
    pub bbox: (u32, u32, u32, u32),
    pub punctures: usize,
}

impl Component {
    pub fn cell_coords(&self, side: u32) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.cells.iter().map(move |&i| (i % side, i / side))
    }

    pub fn contains_cell(&self, side: u32, col: u32, row: u32) -> bool {
        self.cells.binary_search(&(row * side + col)).is_ok()
    }

    pub fn size(&self) -> usize {
        self.cells.len() + usize::from(self.includes_infinity)
    }
}

/// Labeled components of a raster's occupied set.
#[derive(Debug, Clone)]
pub struct ComponentFamily {
    pub resolution: u8,
    pub side: u32,
    pub adjacency: Adjacency,
    pub members: Vec<Component>,
    /// Pairs of member labels whose cell sets share a grid edge or a cell.
    pub edge_adjacency: Vec<(u32, u32)>,
}

impl ComponentFamily {
    pub fn member_of_cell(&self, col: u32, row: u32) -> Option<u32> {
        self.members
            .iter()
            .find(|m| m.contains_cell(self.side, col, row))
            .map(|m| m.label)
    }
}

/// Deterministic component labeling: row-major first-hit order, BFS with a
/// fixed neighbor order; the infinity cell (when set) is adjacent to every
/// frame cell.
pub fn label_components(raster: &Raster, adjacency: Adjacency) -> ComponentFamily {
    let side = raster.side;
    let n = side as usize * side as usize;
    let mut label_of = vec![u32::MAX; n + 1]; // last slot = infinity pseudo-cell
    let inf_slot = n;
    let mut members: Vec<Component> = Vec::new();
    let mut queue: Vec<usize> = Vec::new();

    let visit_from = |start: usize,
                          label: u32,
                          label_of: &mut Vec<u32>,
                          queue: &mut Vec<usize>|
     -> (Vec<u32>, bool) {
        let mut cells = Vec::new();
        let mut has_inf = false;
        queue.clear();
        queue.push(start);
        label_of[start] = label;
        let mut head = 0;
        while head < queue.len() {
            let cur = queue[head];
            head += 1;
            if cur == inf_slot {
                has_inf = true;
                // the infinity cell reaches every occupied frame cell
                for col in 0..side {
                    for row in [0, side - 1] {
                        if raster.get(col, row) {
                            let i = (row * side + col) as usize;
                            if label_of[i] == u32::MAX {
                                label_of[i] = label;
                                queue.push(i);
                            }
                        }
                    }
                }
                for row in 0..side {
                    for col in [0, side - 1] {
                        if raster.get(col, row) {
                            let i = (row * side + col) as usize;
                            if label_of[i] == u32::MAX {
                                label_of[i] = label;
                                queue.push(i);
                            }
                        }
                    }
                }
                continue;
            }
            cells.push(cur as u32);
            let (col, row) = ((cur as u32) % side, (cur as u32) / side);
            for &(dx, dy) in adjacency.offsets() {
                let (nc, nr) = (col as i32 + dx, row as i32 + dy);
                if nc >= 0 && nr >= 0 && nc < side as i32 && nr < side as i32 {
                    if raster.get(nc as u32, nr as u32) {
                        let i = (nr as u32 * side + nc as u32) as usize;
                        if label_of[i] == u32::MAX {
                            label_of[i] = label;
                            queue.push(i);
                        }
                    }
                }
            }
            if raster.includes_infinity
                && raster.is_frame_cell(col, row)
                && label_of[inf_slot] == u32::MAX
            {
                label_of[inf_slot] = label;
                queue.push(inf_slot);
            }
        }
        cells.sort_unstable();
        (cells, has_inf)
    };

    for row in 0..side {
        for col in 0..side {
            let i = (row * side + col) as usize;
            if raster.get(col, row) && label_of[i] == u32::MAX {
                let label = members.len() as u32;
                let (cells, has_inf) = visit_from(i, label, &mut label_of, &mut queue);
                members.push(make_component(label, cells, has_inf, side));
            }
        }
    }
    if raster.includes_infinity && label_of[inf_slot] == u32::MAX {
        let label = members.len() as u32;
        let (cells, has_inf) = visit_from(inf_slot, label, &mut label_of, &mut queue);
        members.push(make_component(label, cells, has_inf, side));
    }

    ComponentFamily {
        resolution: raster.k,
        side,
        adjacency,
        members,
        edge_adjacency: Vec::new(),
    }
}

fn make_component(label: u32, cells: Vec<u32>, has_inf: bool, side: u32) -> Component {
    let mut bbox = (u32::MAX, u32::MAX, 0, 0);
    for &i in &cells {
        let (c, r) = (i % side, i / side);
        bbox.0 = bbox.0.min(c);
        bbox.1 = bbox.1.min(r);
        bbox.2 = bbox.2.max(c);
        bbox.3 = bbox.3.max(r);
    }
    let diameter = component_diameter(&cells, has_inf, side);
    Component {
        label,
        cells,
        includes_infinity: has_inf,
        diameter,
        bbox,
        punctures: 0,
    }
}

fn component_diameter(cells: &[u32], has_inf: bool, side: u32) -> f64 {
    if has_inf {
        if cells.is_empty() {
            return 0.0;
        }
        return f64::INFINITY;
    }
    if cells.is_empty() {
        return 0.0;
    }
    let pts: Vec<(i64, i64)> = cells
        .iter()
        .map(|&i| {
            let (c, r) = ((i % side) as i64, (i / side) as i64);
            (2 * c + 1, 2 * r + 1) // centers in half-cell units
        })
        .collect();
    let d2 = max_pairwise_d2(&pts);
    (d2 as f64).sqrt() / (2.0 * side as f64)
}

/// Exact max pairwise squared distance: brute force up to 10^4 points,
/// convex hull + rotating calipers beyond (both exact in i64).
fn max_pairwise_d2(pts: &[(i64, i64)]) -> i64 {
    if pts.len() <= 10_000 {
        brute_force_d2(pts)
    } else {
        calipers_d2(pts)
    }
}

pub(crate) fn brute_force_d2(pts: &[(i64, i64)]) -> i64 {
    let mut best = 0i64;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let dx = pts[i].0 - pts[j].0;
            let dy = pts[i].1 - pts[j].1;
            best = best.max(dx * dx + dy * dy);
        }
    }
    best
}

pub(crate) fn calipers_d2(pts: &[(i64, i64)]) -> i64 {
    let hull = convex_hull(pts);
    if hull.len() == 1 {
        return 0;
    }
    if hull.len() == 2 {
        let dx = hull[0].0 - hull[1].0;
        let dy = hull[0].1 - hull[1].1;
        return dx * dx + dy * dy;
    }
    let n = hull.len();
    let d2 = |a: (i64, i64), b: (i64, i64)| {
        let (dx, dy) = (a.0 - b.0, a.1 - b.1);
        dx * dx + dy * dy
    };
    let area2 = |a: (i64, i64), b: (i64, i64), c: (i64, i64)| {
        ((b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)).abs()
    };
    let mut best = 0;
    let mut j = 1;
    for i in 0..n {
        let ni = (i + 1) % n;
        while area2(hull[i], hull[ni], hull[(j + 1) % n]) > area2(hull[i], hull[ni], hull[j]) {
            j = (j + 1) % n;
        }
        best = best.max(d2(hull[i], hull[j])).max(d2(hull[ni], hull[j]));
    }
    best
}

fn convex_hull(pts: &[(i64, i64)]) -> Vec<(i64, i64)> {
    let mut p: Vec<(i64, i64)> = pts.to_vec();
    p.sort_unstable();
    p.dedup();
    if p.len() <= 2 {
        return p;
    }
    let cross = |o: (i64, i64), a: (i64, i64), b: (i64, i64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut hull: Vec<(i64, i64)> = Vec::with_capacity(p.len() * 2);
    for &pt in &p {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], pt) <= 0 {
            hull.pop();
        }
        hull.push(pt);
    }
    let lower_len = hull.len() + 1;
    for &pt in p.iter().rev() {
        while hull.len() >= lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], pt) <= 0
        {
            hull.pop();
        }
        hull.push(pt);
    }
    hull.pop();
    hull
}

/// Labels the cells of a window (absolute coordinates, exclusive upper
/// bounds) satisfying `occupied`, under the given adjacency, staying inside
/// the window. Deterministic: row-major first-hit order. Returns each
/// component's cells in row-major order.
pub fn label_window_components(
    window: (u32, u32, u32, u32),
    occupied: impl Fn(u32, u32) -> bool,
    adjacency: Adjacency,
) -> Vec<Vec<(u32, u32)>> {
    let (c0, c1, r0, r1) = window;
    if c0 >= c1 || r0 >= r1 {
        return Vec::new();
    }
    let (w, h) = ((c1 - c0) as usize, (r1 - r0) as usize);
    let mut seen = vec![false; w * h];
    let at = |col: u32, row: u32| ((row - r0) as usize) * w + (col - c0) as usize;
    let mut out = Vec::new();
    let mut queue: Vec<(u32, u32)> = Vec::new();
    for row in r0..r1 {
        for col in c0..c1 {
            if !occupied(col, row) || seen[at(col, row)] {
                continue;
            }
            queue.clear();
            queue.push((col, row));
            seen[at(col, row)] = true;
            let mut head = 0;
            while head < queue.len() {
                let (cc, cr) = queue[head];
                head += 1;
                for &(dx, dy) in adjacency.offsets() {
                    let (nc, nr) = (cc as i64 + dx as i64, cr as i64 + dy as i64);
                    if nc >= c0 as i64 && nr >= r0 as i64 && nc < c1 as i64 && nr < r1 as i64 {
                        let (nc, nr) = (nc as u32, nr as u32);
                        if occupied(nc, nr) && !seen[at(nc, nr)] {
                            seen[at(nc, nr)] = true;
                            queue.push((nc, nr));
                        }
                    }
                }
            }
            let mut cells = queue.clone();
            cells.sort_unstable_by_key(|&(c, r)| (r, c));
            out.push(cells);
        }
    }
    out
}

/// Diameter of an explicit cell set (error on empty).
pub fn diameter_of_cells(cells: &[(u32, u32)], side: u32) -> Result<f64, RasterError> {
    if cells.is_empty() {
        return Err(RasterError::EmptyDiameter);
    }
    let pts: Vec<(i64, i64)> = cells
        .iter()
        .map(|&(c, r)| (2 * c as i64 + 1, 2 * r as i64 + 1))
        .collect();
    Ok((max_pairwise_d2(&pts) as f64).sqrt() / (2.0 * side as f64))
}

/// Symmetric Hausdorff distance between the cell-center sets of two rasters
/// of equal resolution. Exact: integer squared distances compared, one sqrt
/// at the end. Infinity cells match each other at distance zero; an
/// unmatched infinity cell makes the distance infinite.
pub fn hausdorff_distance(a: &Raster, b: &Raster) -> Result<f64, RasterError> {
    if a.resolution() != b.resolution() {
        return Err(RasterError::ResolutionMismatch(a.resolution(), b.resolution()));
    }
    if a.is_empty() || b.is_empty() {
        return Err(RasterError::HausdorffEmpty);
    }
    if a.includes_infinity != b.includes_infinity {
        return Ok(f64::INFINITY);
    }
    let d2_ab = directed_h2(a, b);
    let d2_ba = directed_h2(b, a);
    Ok((d2_ab.max(d2_ba) as f64).sqrt() / a.side as f64)
}

/// max over cells of `from` of the squared distance (in whole-cell units)
/// to the nearest cell of `to`. Row-bucketed nearest search with pruning.
fn directed_h2(from: &Raster, to: &Raster) -> i64 {
    let side = to.side;
    let mut rows: Vec<Vec<i64>> = vec![Vec::new(); side as usize];
    for (c, r) in to.cells() {
        rows[r as usize].push(c as i64);
    }
    let mut worst = 0i64;
    for (c, r) in from.cells() {
        let (c, r) = (c as i64, r as i64);
        let mut best = i64::MAX;
        for dr in 0..side as i64 {
            let row_gap2 = dr * dr;
            if row_gap2 >= best {
                break;
            }
            for nr in [r - dr, r + dr] {
                if nr < 0 || nr >= side as i64 || (dr == 0 && nr != r) {
                    continue;
                }
                let cols = &rows[nr as usize];
                if cols.is_empty() {
                    continue;
                }
                let pos = cols.partition_point(|&x| x < c);
                for idx in [pos.wrapping_sub(1), pos] {
                    if let Some(&nc) = cols.get(idx) {
                        let dc = nc - c;
                        best = best.min(dc * dc + row_gap2);
                    }
                }
            }
        }
        if best == i64::MAX {
            best = 0; // unreachable: `to` is nonempty
        }
        worst = worst.max(best);
    }
    worst
}
