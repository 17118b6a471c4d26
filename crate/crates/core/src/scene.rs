//! Scenes: a bad-set raster family indexed by a resolution ladder, a finite
//! depth-layered puncture set, and the infinity puncture. Builtin scenes
//! realize the motivating examples; each is drawn once at the finest ladder
//! entry and coarsened by 2x2 OR, so refinement consistency holds by
//! construction. Structure too fine for a coarse entry blurs into slabs
//! there, which is why the empty-interior surrogate is enforced at the
//! finest entry only.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::dyadic::{Dyadic, DyadicPoint};
use crate::raster::{Raster, RasterError};

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("unknown scene name: {0}")]
    UnknownName(String),
    #[error("depth {depth} out of bounds (1..={max})")]
    DepthOutOfBounds { depth: u8, max: u8 },
    #[error("resolution k={k} out of bounds ({min}..={max})")]
    ResolutionOutOfBounds { k: u8, min: u8, max: u8 },
    #[error("resolution too coarse: {0}")]
    ResolutionTooCoarse(String),
    #[error("malformed scene file: {0}")]
    Parse(String),
    #[error(transparent)]
    Raster(#[from] RasterError),
}

/// Builtin scene catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SceneName {
    Sierpinski,
    SierpinskiFilledHole,
    EarringCircle,
    CombTwoSided,
    CombOneSided,
    FinitePunctures,
}

impl SceneName {
    pub fn as_str(&self) -> &'static str {
        match self {
            SceneName::Sierpinski => "sierpinski",
            SceneName::SierpinskiFilledHole => "sierpinski_filled_hole",
            SceneName::EarringCircle => "earring_circle",
            SceneName::CombTwoSided => "comb_two_sided",
            SceneName::CombOneSided => "comb_one_sided",
            SceneName::FinitePunctures => "finite_punctures",
        }
    }
}

impl FromStr for SceneName {
    type Err = SceneError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "sierpinski" => SceneName::Sierpinski,
            "sierpinski_filled_hole" => SceneName::SierpinskiFilledHole,
            "earring_circle" => SceneName::EarringCircle,
            "comb_two_sided" => SceneName::CombTwoSided,
            "comb_one_sided" => SceneName::CombOneSided,
            "finite_punctures" => SceneName::FinitePunctures,
            other => return Err(SceneError::UnknownName(other.into())),
        })
    }
}

/// The bad set B, the puncture truncations of D, and the resolution ladder.
#[derive(Debug, Clone)]
pub struct Scene {
    pub name: String,
    /// Strictly increasing resolution exponents.
    pub ladder: Vec<u8>,
    /// One bad raster per ladder entry, refinement-consistent.
    pub bad: Vec<Raster>,
    /// `punctures[t-1]` holds the punctures new at depth `t`.
    pub punctures: Vec<Vec<DyadicPoint>>,
    /// The puncture at infinity (always present in builtins).
    pub infinity: bool,
}

impl Scene {
    pub fn finest_k(&self) -> u8 {
        *self.ladder.last().expect("scene ladder nonempty")
    }

    pub fn coarsest_k(&self) -> u8 {
        self.ladder[0]
    }

    /// Resolution from which the empty-interior surrogate is enforced: the
    /// finest ladder entry, the only one where the scene's structure is
    /// fully resolved. Coarser entries are OR-coarsenings and may be fat.
    pub fn k_min_dim(&self) -> u8 {
        self.finest_k()
    }

    pub fn bad_at(&self, k: u8) -> Option<&Raster> {
        self.ladder.iter().position(|&x| x == k).map(|i| &self.bad[i])
    }

    pub fn max_depth(&self) -> u8 {
        self.punctures.len() as u8
    }

    /// All finite punctures of depth <= `depth`, depth-major order.
    pub fn punctures_up_to(&self, depth: u8) -> Vec<DyadicPoint> {
        self.punctures
            .iter()
            .take(depth as usize)
            .flatten()
            .copied()
            .collect()
    }

    pub fn all_punctures(&self) -> Vec<DyadicPoint> {
        self.punctures_up_to(self.max_depth())
    }

    /// Serializes to the PH-SCENE text format.
    pub fn to_text(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        let _ = writeln!(out, "PH-SCENE name={}", self.name);
        let ladder = self
            .ladder
            .iter()
            .map(|k| k.to_string())
            .collect::<Vec<_>>()
            .join(",");
        let _ = writeln!(out, "ladder={ladder}");
        for raster in &self.bad {
            out.push_str(&raster.to_text());
        }
        for (i, layer) in self.punctures.iter().enumerate() {
            let _ = writeln!(out, "punctures depth={}", i + 1);
            for p in layer {
                let _ = writeln!(out, "{p}");
            }
        }
        let _ = writeln!(out, "infinity={}", if self.infinity { 1 } else { 0 });
        out
    }

    pub fn from_text(text: &str) -> Result<Scene, SceneError> {
        let mut lines = text.lines().peekable();
        let header = lines
            .next()
            .ok_or_else(|| SceneError::Parse("missing PH-SCENE header".into()))?;
        let name = header
            .strip_prefix("PH-SCENE name=")
            .ok_or_else(|| SceneError::Parse(format!("bad header: {header}")))?
            .to_string();
        let ladder_line = lines
            .next()
            .ok_or_else(|| SceneError::Parse("missing ladder line".into()))?;
        let ladder: Vec<u8> = ladder_line
            .strip_prefix("ladder=")
            .ok_or_else(|| SceneError::Parse(format!("bad ladder line: {ladder_line}")))?
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<u8>()
                    .map_err(|_| SceneError::Parse(format!("bad ladder entry: {t}")))
            })
            .collect::<Result<_, _>>()?;
        let mut bad = Vec::with_capacity(ladder.len());
        for _ in &ladder {
            bad.push(Raster::from_lines(&mut lines)?);
        }
        let mut punctures: Vec<Vec<DyadicPoint>> = Vec::new();
        let mut infinity = false;
        while let Some(line) = lines.next() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(d) = line.strip_prefix("punctures depth=") {
                let depth: usize = d
                    .parse()
                    .map_err(|_| SceneError::Parse(format!("bad depth: {d}")))?;
                if depth == 0 {
                    return Err(SceneError::Parse("puncture depth 0".into()));
                }
                while punctures.len() < depth {
                    punctures.push(Vec::new());
                }
                let layer = &mut punctures[depth - 1];
                while let Some(&peek) = lines.peek() {
                    let p = peek.trim();
                    if p.is_empty() || p.starts_with("punctures") || p.starts_with("infinity=") {
                        break;
                    }
                    let mut toks = p.split_whitespace();
                    let x: Dyadic = toks
                        .next()
                        .ok_or_else(|| SceneError::Parse("empty puncture line".into()))?
                        .parse()
                        .map_err(|e| SceneError::Parse(format!("{e}")))?;
                    let y: Dyadic = toks
                        .next()
                        .ok_or_else(|| SceneError::Parse(format!("puncture missing y: {p}")))?
                        .parse()
                        .map_err(|e| SceneError::Parse(format!("{e}")))?;
                    layer.push(DyadicPoint::new(x, y));
                    lines.next();
                }
            } else if let Some(v) = line.strip_prefix("infinity=") {
                infinity = v.trim() == "1";
            } else {
                return Err(SceneError::Parse(format!("unexpected line: {line}")));
            }
        }
        Ok(Scene {
            name,
            ladder,
            bad,
            punctures,
            infinity,
        })
    }
}

/// One validation check with an optional witness.
#[derive(Debug, Clone)]
pub struct SceneCheck {
    pub name: &'static str,
    pub passed: bool,
    pub witness: Option<String>,
}

/// Validation record: every failure carries a witness.
#[derive(Debug, Clone)]
pub struct SceneVerdictRecord {
    pub scene_id: String,
    pub checks: Vec<SceneCheck>,
}

impl SceneVerdictRecord {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &SceneCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for SceneVerdictRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            write!(f, "check={} passed={}", c.name, c.passed)?;
            if let Some(w) = &c.witness {
                write!(f, " witness={w}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Checks every scene invariant; failures are recorded, never raised.
pub fn validate_scene(scene: &Scene) -> SceneVerdictRecord {
    let mut checks = Vec::new();
    let mut push = |name: &'static str, passed: bool, witness: Option<String>| {
        checks.push(SceneCheck {
            name,
            passed,
            witness,
        });
    };

    let ladder_ok = !scene.ladder.is_empty()
        && scene.ladder.windows(2).all(|w| w[0] < w[1])
        && scene.bad.len() == scene.ladder.len();
    push(
        "ladder",
        ladder_ok,
        (!ladder_ok).then(|| format!("ladder={:?} rasters={}", scene.ladder, scene.bad.len())),
    );

    // refinement consistency: iterated OR-coarsening of each finer entry
    // reproduces its coarser neighbor
    let mut refinement_witness = None;
    if ladder_ok {
        for i in 0..scene.ladder.len() - 1 {
            let mut r = scene.bad[i + 1].clone();
            for _ in 0..scene.ladder[i + 1] - scene.ladder[i] {
                r = r.coarsen_or();
            }
            if r != scene.bad[i] {
                refinement_witness = Some(format!(
                    "coarsening k={} does not reproduce k={}",
                    scene.ladder[i + 1],
                    scene.ladder[i]
                ));
                break;
            }
        }
    }
    push("refinement", refinement_witness.is_none(), refinement_witness);

    // closedness holds by representation (cell sets are closed)
    push("closedness", true, None);

    // empty-interior surrogate at the finest ladder entry
    let k_min = scene.k_min_dim();
    let mut dim_witness = None;
    if ladder_ok {
        for (k, raster) in scene.ladder.iter().zip(&scene.bad) {
            if *k >= k_min {
                if let Some((c, r)) = raster.find_2x2_block() {
                    dim_witness = Some(format!("k={k} block at ({c},{r})"));
                    break;
                }
            }
        }
    }
    push("dimension", dim_witness.is_none(), dim_witness);

    let all: Vec<DyadicPoint> = scene.all_punctures();

    let inside = all
        .iter()
        .find(|p| {
            p.x <= Dyadic::ZERO || p.x >= Dyadic::ONE || p.y <= Dyadic::ZERO || p.y >= Dyadic::ONE
        })
        .map(|p| format!("{p}"));
    push("punctures-inside", inside.is_none(), inside);

    let mut sorted = all.clone();
    sorted.sort();
    let dup = sorted
        .windows(2)
        .find(|w| w[0] == w[1])
        .map(|w| format!("{}", w[0]));
    push("punctures-distinct", dup.is_none(), dup);

    // disjointness from bad cells, checked at the finest entry where the
    // structure is fully resolved
    let mut disjoint_witness = None;
    if ladder_ok {
        let finest = scene.bad.last().unwrap();
        for p in &all {
            let (c, r) = p.cell_at(scene.finest_k());
            if finest.get(c, r) {
                disjoint_witness = Some(format!("{p} lies on a bad cell"));
                break;
            }
        }
    }
    push(
        "punctures-disjoint",
        disjoint_witness.is_none(),
        disjoint_witness,
    );

    // accumulation only on B: punctures new at depth t >= 2 must sit within
    // 2 cell-widths of the bad set at the coarsest ladder entry
    let mut acc_witness = None;
    if ladder_ok && !scene.bad[0].is_empty() {
        let coarse = &scene.bad[0];
        let k = scene.coarsest_k();
        'acc: for layer in scene.punctures.iter().skip(1) {
            for p in layer {
                let (pc, pr) = p.cell_at(k);
                let mut ok = false;
                for (bc, br) in coarse.cells() {
                    let dc = (bc as i64 - pc as i64).abs();
                    let dr = (br as i64 - pr as i64).abs();
                    if dc.max(dr) <= 2 {
                        ok = true;
                        break;
                    }
                }
                if !ok {
                    acc_witness = Some(format!("{p} far from bad set at k={k}"));
                    break 'acc;
                }
            }
        }
    } else if ladder_ok && scene.bad[0].is_empty() {
        // empty bad set: no accumulation allowed at all
        if scene.punctures.iter().skip(1).any(|l| !l.is_empty()) {
            acc_witness = Some("deep punctures with empty bad set".into());
        }
    }
    push("accumulation", acc_witness.is_none(), acc_witness);

    SceneVerdictRecord {
        scene_id: scene.name.clone(),
        checks,
    }
}

/// exact floor(num / den * 2^k) for nonnegative fractions
fn floor_scaled(num: u64, den: u64, k: u8) -> u32 {
    (((num as u128) << k) / den as u128) as u32
}

/// Grid drawing at a fixed resolution; rational endpoints, floor convention.
struct Board {
    r: Raster,
    k: u8,
    side: u32,
}

impl Board {
    fn new(k: u8) -> Board {
        Board {
            r: Raster::empty(k),
            k,
            side: 1 << k,
        }
    }

    fn clampc(&self, v: u32) -> u32 {
        v.min(self.side - 1)
    }

    fn vline(&mut self, x: (u64, u64), y0: (u64, u64), y1: (u64, u64)) {
        let col = self.clampc(floor_scaled(x.0, x.1, self.k));
        let r0 = self.clampc(floor_scaled(y0.0, y0.1, self.k));
        let r1 = self.clampc(floor_scaled(y1.0, y1.1, self.k));
        for row in r0..=r1 {
            self.r.set(col, row, true);
        }
    }

    fn hline(&mut self, y: (u64, u64), x0: (u64, u64), x1: (u64, u64)) {
        let row = self.clampc(floor_scaled(y.0, y.1, self.k));
        let c0 = self.clampc(floor_scaled(x0.0, x0.1, self.k));
        let c1 = self.clampc(floor_scaled(x1.0, x1.1, self.k));
        for col in c0..=c1 {
            self.r.set(col, row, true);
        }
    }

    fn frame(&mut self) {
        let s = self.side;
        for c in 0..s {
            self.r.set(c, 0, true);
            self.r.set(c, s - 1, true);
        }
        for r in 0..s {
            self.r.set(0, r, true);
            self.r.set(s - 1, r, true);
        }
    }
}

/// Center of the cell containing the exact fraction point, as a dyadic point.
fn snap_to_cell_center(x: (u64, u64), y: (u64, u64), k: u8) -> DyadicPoint {
    let side = 1u32 << k;
    let c = floor_scaled(x.0, x.1, k).min(side - 1);
    let r = floor_scaled(y.0, y.1, k).min(side - 1);
    DyadicPoint::new(
        Dyadic::new(2 * c as u64 + 1, k + 1),
        Dyadic::new(2 * r as u64 + 1, k + 1),
    )
}

fn ladder_from(k: u8) -> Vec<u8> {
    vec![k - 2, k - 1, k]
}

fn coarsen_ladder(finest: &Raster, ladder: &[u8]) -> Vec<Raster> {
    let k = finest.resolution();
    ladder
        .iter()
        .map(|&kj| {
            let mut r = finest.clone();
            for _ in 0..k - kj {
                r = r.coarsen_or();
            }
            r
        })
        .collect()
}

const MAX_DEPTH: u8 = 6;
const MIN_K: u8 = 5;
const MAX_K: u8 = 12;

fn check_bounds(depth: u8, k: u8) -> Result<(), SceneError> {
    if depth == 0 || depth > MAX_DEPTH {
        return Err(SceneError::DepthOutOfBounds {
            depth,
            max: MAX_DEPTH,
        });
    }
    if k < MIN_K || k > MAX_K {
        return Err(SceneError::ResolutionOutOfBounds {
            k,
            min: MIN_K,
            max: MAX_K,
        });
    }
    Ok(())
}

/// Deterministic builtin scenes.
pub fn builtin_scene(name: SceneName, depth: u8, k: u8) -> Result<Scene, SceneError> {
    check_bounds(depth, k)?;
    match name {
        SceneName::Sierpinski => sierpinski_scene(depth, k, true),
        SceneName::SierpinskiFilledHole => sierpinski_scene(depth, k, false),
        SceneName::EarringCircle => earring_scene(depth, k),
        SceneName::CombTwoSided => comb_scene(depth, k, true),
        SceneName::CombOneSided => comb_scene(depth, k, false),
        SceneName::FinitePunctures => finite_punctures_scene(depth, k),
    }
}

/// The carpet as a thin recursive partition: a depth-d scene subdivides
/// flesh squares of generations 0..=d-2 by their interior 3x3 grid lines.
/// Faces are the central holes of generations 1..d-1 plus the undivided
/// flesh squares standing for the generation-d holes; every face gets a
/// puncture at the center cell of its true center (the filled-hole variant
/// omits the central one). All punctures sit at depth 1: the scene is an
/// exact finite truncation, not an accumulation.
fn sierpinski_scene(depth: u8, k: u8, puncture_center: bool) -> Result<Scene, SceneError> {
    // line spacing 3^-(depth-1) must stay >= 2 cells at k-1
    let pow3 = 3u64.pow(depth as u32);
    if (1u64 << (k - 1)) < pow3 {
        return Err(SceneError::ResolutionTooCoarse(format!(
            "depth {depth} needs 2^(k-1) >= 3^{depth}, got k={k}"
        )));
    }
    let mut board = Board::new(k);
    board.frame();

    // regions are (x0num, y0num, den): the square [xn/den,(xn+1)/den]^2
    let mut punctures: Vec<DyadicPoint> = Vec::new();
    let mut stack = vec![(0u64, 0u64, 1u64, 0u8)];
    while let Some((xn, yn, den, level)) = stack.pop() {
        if level + 2 <= depth {
            // draw the interior 3x3 grid of this flesh square
            let d3 = den * 3;
            board.vline((xn * 3 + 1, d3), (yn * 3, d3), (yn * 3 + 3, d3));
            board.vline((xn * 3 + 2, d3), (yn * 3, d3), (yn * 3 + 3, d3));
            board.hline((yn * 3 + 1, d3), (xn * 3, d3), (xn * 3 + 3, d3));
            board.hline((yn * 3 + 2, d3), (xn * 3, d3), (xn * 3 + 3, d3));
            // center child is a hole face; the rest recurse (reversed so the
            // stack pops them row-major for a deterministic puncture order)
            punctures.push(snap_to_cell_center(
                (2 * (xn * 3 + 1) + 1, 2 * d3),
                (2 * (yn * 3 + 1) + 1, 2 * d3),
                k,
            ));
            let mut children = Vec::with_capacity(8);
            for cy in 0..3u64 {
                for cx in 0..3u64 {
                    if cx == 1 && cy == 1 {
                        continue;
                    }
                    children.push((xn * 3 + cx, yn * 3 + cy, d3, level + 1));
                }
            }
            for child in children.into_iter().rev() {
                stack.push(child);
            }
        } else {
            // undivided flesh square: a leaf face
            punctures.push(snap_to_cell_center(
                (2 * xn + 1, 2 * den),
                (2 * yn + 1, 2 * den),
                k,
            ));
        }
    }

    if !puncture_center {
        // the central generation-1 hole loses its puncture
        let central = snap_to_cell_center((1, 2), (1, 2), k);
        punctures.retain(|p| *p != central);
    }

    let ladder = ladder_from(k);
    let bad = coarsen_ladder(&board.r, &ladder);
    Ok(Scene {
        name: format!(
            "{}(depth={depth},k={k})",
            if puncture_center {
                "sierpinski"
            } else {
                "sierpinski_filled_hole"
            }
        ),
        ladder,
        bad,
        punctures: vec![punctures],
        infinity: true,
    })
}

/// Comb scenes: a vertical limit arc at x=1/2 over y in [1/4,3/4], teeth at
/// x = 1/2 +- 2^-n for n = 2..=k-1 (adaptive: fresh teeth resolve as the
/// ladder refines), and a base at y=3/4 joining them. Gap n (between teeth
/// n and n+1) holds a column of punctures spaced like the gap width; the
/// one-sided comb punctures only the right-side gaps. Gap-n punctures sit
/// at depth min(n-1, depth).
fn comb_scene(depth: u8, k: u8, two_sided: bool) -> Result<Scene, SceneError> {
    let mut board = Board::new(k);
    let quarter = (1u64, 4u64);
    let three_quarter = (3u64, 4u64);

    board.vline((1, 2), quarter, three_quarter);
    board.hline(three_quarter, quarter, three_quarter);
    let n_max = k - 1;
    for n in 2..=n_max {
        let den = 1u64 << n;
        board.vline((den / 2 + 1, den), quarter, three_quarter);
        board.vline((den / 2 - 1, den), quarter, three_quarter);
    }

    // gaps n = 2..k-2 lie between teeth n and n+1
    let mut layers: Vec<Vec<DyadicPoint>> = vec![Vec::new(); depth as usize];
    for n in 2..=k - 2 {
        let layer = ((n - 1).min(depth) - 1) as usize;
        let den = 1u64 << (n + 1); // puncture y spacing 2^-(n+1)
        let mut j = 1u64;
        loop {
            let y_num = den / 4 + j;
            if 4 * y_num >= 3 * den {
                break;
            }
            let y = Dyadic::new(y_num, n + 1);
            // gap midline offset 3*2^-(n+2) from the arc
            let off_den = 1u64 << (n + 2);
            let x_right = Dyadic::new(off_den / 2 + 3, n + 2);
            layers[layer].push(DyadicPoint::new(x_right, y));
            if two_sided {
                let x_left = Dyadic::new(off_den / 2 - 3, n + 2);
                layers[layer].push(DyadicPoint::new(x_left, y));
            }
            j += 1;
        }
    }
    // the limit slivers between the finest teeth and the arc: punctured so
    // the discrete set accumulates on the arc itself (one cell column each
    // side, puncture at every other cell center)
    {
        let layer = ((k - 2).min(depth) - 1) as usize;
        let c = 1u64 << (k - 1); // arc column
        let x_right = Dyadic::new(2 * (c + 1) + 1, k + 1);
        let x_left = Dyadic::new(2 * (c - 1) + 1, k + 1);
        let side = 1u64 << k;
        let mut row = side / 4 + 1;
        while 4 * row < 3 * side {
            let y = Dyadic::new(2 * row + 1, k + 1);
            layers[layer].push(DyadicPoint::new(x_right, y));
            if two_sided {
                layers[layer].push(DyadicPoint::new(x_left, y));
            }
            row += 2;
        }
    }

    let ladder = ladder_from(k);
    let bad = coarsen_ladder(&board.r, &ladder);
    Ok(Scene {
        name: format!(
            "{}(depth={depth},k={k})",
            if two_sided {
                "comb_two_sided"
            } else {
                "comb_one_sided"
            }
        ),
        ladder,
        bad,
        punctures: layers,
        infinity: true,
    })
}

/// A square "circle" [1/4,3/4]^2 with nested-earring chains hanging off
/// attachment points on its left edge. Attachment i sits at
/// y = 1/4 + 2^-(1+i); its earring is the nested family of squares sharing
/// the attachment point, sides 2^-(3+i) down to what the resolution
/// resolves thinly. Every bounded face gets a puncture; ring-j faces sit
/// at depth min(j-2, depth).
fn earring_scene(depth: u8, k: u8) -> Result<Scene, SceneError> {
    let mut board = Board::new(k);
    let q = (1u64, 4u64);
    let tq = (3u64, 4u64);
    board.vline(q, q, tq);
    board.vline(tq, q, tq);
    board.hline(q, q, tq);
    board.hline(tq, q, tq);

    let mut layers: Vec<Vec<DyadicPoint>> = vec![Vec::new(); depth as usize];
    layers[0].push(snap_to_cell_center((1, 2), (1, 2), k));

    let j_cap = k - 4; // ring wall gaps stay >= 2 cells
    let mut drew_any = false;
    for i in 0..depth {
        if 5 + i > k - 1 {
            break; // adjacent attachments would collide
        }
        let j_lo = 3 + i;
        let j_hi = (j_lo + depth - 1).min(j_cap);
        if j_lo > j_hi {
            break;
        }
        drew_any = true;
        // attachment point (1/4, 1/4 + 2^-(2+i)), accumulating on the corner
        let ye = 2 + i;
        let y_num = (1u64 << ye) / 4 + 1; // (2^i + 1) / 2^(2+i)
        for j in j_lo..=j_hi {
            // ring of side 2^-j whose right edge midpoint is the attachment
            let den = 1u64 << (j + 2); // work at denominator 2^(j+2)
            let rx = den / 4;
            let lx = rx - 4;
            let yc = y_num << (j + 2 - ye);
            let top = (yc - 2, den);
            let bot = (yc + 2, den);
            board.vline((lx, den), top, bot);
            board.vline((rx, den), top, bot);
            board.hline(top, (lx, den), (rx, den));
            board.hline(bot, (lx, den), (rx, den));
            // puncture the annular face between this ring and the next,
            // or the innermost disk
            let layer = ((j - 2).min(depth) - 1) as usize;
            let px = if j < j_hi { rx - 3 } else { rx - 2 };
            layers[layer].push(snap_to_cell_center((px, den), (yc, den), k));
        }
    }
    if !drew_any {
        return Err(SceneError::ResolutionTooCoarse(format!(
            "no earring ring resolvable at k={k}"
        )));
    }

    let ladder = ladder_from(k);
    let bad = coarsen_ladder(&board.r, &ladder);
    Ok(Scene {
        name: format!("earring_circle(depth={depth},k={k})"),
        ladder,
        bad,
        punctures: layers,
        infinity: true,
    })
}

/// Empty bad set with `depth` punctures (all at depth 1) drawn from a fixed
/// well-spread sequence, plus infinity.
fn finite_punctures_scene(depth: u8, k: u8) -> Result<Scene, SceneError> {
    const SPOTS: [(u64, u8, u64, u8); 6] = [
        (1, 2, 1, 2),
        (3, 2, 1, 2),
        (1, 2, 3, 2),
        (3, 2, 3, 2),
        (1, 1, 1, 1),
        (1, 3, 1, 1),
    ];
    let pts = SPOTS
        .iter()
        .take(depth as usize)
        .map(|&(xn, xe, yn, ye)| DyadicPoint::new(Dyadic::new(xn, xe), Dyadic::new(yn, ye)))
        .collect();
    let ladder = ladder_from(k);
    let bad = ladder.iter().map(|&kj| Raster::empty(kj)).collect();
    Ok(Scene {
        name: format!("finite_punctures(depth={depth},k={k})"),
        ladder,
        bad,
        punctures: vec![pts],
        infinity: true,
    })
}

/// The fattened carpet raster: occupied cells are those whose center does
/// not fall in any open hole of generation <= depth. This closed-set
/// rasterization is the continuum fixture used by the kernels and the
/// quotient pipeline; the thin partition drawing above is what scenes use
/// for B.
pub fn sierpinski_carpet_raster(depth: u8, k: u8) -> Raster {
    let mut r = Raster::full(k);
    let mut stack = vec![(0u64, 0u64, 1u64, 1u8)];
    while let Some((xn, yn, den, gen)) = stack.pop() {
        if gen > depth {
            continue;
        }
        let d3 = den * 3;
        clear_cells_centered_in(&mut r, xn * 3 + 1, yn * 3 + 1, d3, k);
        for cy in 0..3u64 {
            for cx in 0..3u64 {
                if cx == 1 && cy == 1 {
                    continue;
                }
                stack.push((xn * 3 + cx, yn * 3 + cy, d3, gen + 1));
            }
        }
    }
    r
}

/// Clears cells whose center lies inside the open square block
/// [xn,xn+1]x[yn,yn+1] at denominator `den`.
fn clear_cells_centered_in(r: &mut Raster, xn: u64, yn: u64, den: u64, k: u8) {
    let side = 1u64 << k;
    // center (2c+1)/2^(k+1) in (n/den, (n+1)/den), exact cross-multiplied
    let lo = |n: u64| {
        let mut c = (n * 2 * side) / (2 * den); // first candidate near the edge
        while (2 * c + 1) * den <= n * 2 * side {
            c += 1;
        }
        c
    };
    let hi = |n: u64| {
        let mut c = ((n + 1) * 2 * side) / (2 * den) + 1;
        while c > 0 && (2 * (c - 1) + 1) * den >= (n + 1) * 2 * side {
            c -= 1;
        }
        c
    };
    let (c0, c1) = (lo(xn), hi(xn));
    let (r0, r1) = (lo(yn), hi(yn));
    for row in r0..r1 {
        for col in c0..c1 {
            if col < side && row < side {
                r.set(col as u32, row as u32, false);
            }
        }
    }
}

/// The Peano continuum M standing for the scene: the sphere minus open
/// 1-cell-radius squares around every puncture (the infinity puncture
/// removes the outer cell). M contains the bad set.
pub fn peano_continuum_from_scene(scene: &Scene, k: u8) -> Result<Raster, SceneError> {
    let bad = scene
        .bad_at(k)
        .ok_or_else(|| SceneError::Parse(format!("k={k} not in ladder")))?;
    let side = 1u32 << k;
    let pts = scene.all_punctures();
    let cells: Vec<(u32, u32)> = pts.iter().map(|p| p.cell_at(k)).collect();
    for i in 0..cells.len() {
        for j in i + 1..cells.len() {
            let dc = (cells[i].0 as i64 - cells[j].0 as i64).abs();
            let dr = (cells[i].1 as i64 - cells[j].1 as i64).abs();
            if dc.max(dr) < 3 {
                return Err(SceneError::ResolutionTooCoarse(format!(
                    "punctures {} and {} within 3 cells at k={k}",
                    pts[i], pts[j]
                )));
            }
        }
    }
    let mut m = Raster::full(k);
    m.set_infinity(!scene.infinity);
    for &(c, r) in &cells {
        for dy in -1i64..=1 {
            for dx in -1i64..=1 {
                let (nc, nr) = (c as i64 + dx, r as i64 + dy);
                if nc >= 0 && nr >= 0 && nc < side as i64 && nr < side as i64 {
                    if bad.get(nc as u32, nr as u32) {
                        return Err(SceneError::ResolutionTooCoarse(format!(
                            "puncture block at ({c},{r}) collides with the bad set at k={k}"
                        )));
                    }
                    m.set(nc as u32, nr as u32, false);
                }
            }
        }
    }
    Ok(m)
}
