//! planar-homotopy: scenes -> checks -> tiling -> spines -> quotient, with
//! line-oriented reports and optional SVG. Exit codes: 0 pass, 1 fail,
//! 2 inconclusive, 3 usage or I/O error.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use planar_homotopy_core::characterize::{
    condition1, condition2, CheckVerdict, HomotopyDimension,
};
use planar_homotopy_core::dyadic::Dyadic;
use planar_homotopy_core::quotient::{
    build_run_graph, ideal_triangulation, injectivity_probe, usc_probe, CirclePt,
};
use planar_homotopy_core::raster::Raster;
use planar_homotopy_core::retractor::{build_spine, spine_union_dimension_check};
use planar_homotopy_core::scene::{builtin_scene, validate_scene, Scene, SceneName};
use planar_homotopy_core::svg;
use planar_homotopy_core::tiler::run_stages;

#[derive(Parser)]
#[command(name = "planar-homotopy", version, about)]
struct Cli {
    /// Seed recorded in reports; all pipelines are deterministic.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a builtin scene file.
    Scene(SceneArgs),
    /// Decide the homotopy-dimension verdict of a scene.
    Check(CheckArgs),
    /// Tile the scene's good region and build domain spines.
    Tile(TileArgs),
    /// Run-graph quotient and loop-word probes on a raster.
    Quotient(QuotientArgs),
    /// Ideal triangulation of circle points.
    Triangulate(TriangulateArgs),
    /// Render a scene or raster to SVG.
    Render(RenderArgs),
}

#[derive(Args)]
struct SceneArgs {
    #[arg(long)]
    name: String,
    #[arg(long)]
    depth: u8,
    #[arg(long)]
    k: u8,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    scene: PathBuf,
    /// Comma-separated decreasing epsilons, e.g. 1/2,1/4,1/8.
    #[arg(long)]
    schedule: Option<String>,
    #[arg(long)]
    report: Option<PathBuf>,
    /// Puncture depth to honor (default: the scene's maximum).
    #[arg(long)]
    depth: Option<u8>,
}

#[derive(Args)]
struct TileArgs {
    #[arg(long)]
    scene: PathBuf,
    #[arg(long)]
    stages: usize,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct QuotientArgs {
    #[arg(long)]
    raster: PathBuf,
    /// One loop per line: x,y;x,y;...
    #[arg(long)]
    loops: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct TriangulateArgs {
    /// One circle point per line as a turn fraction n/d.
    #[arg(long)]
    points: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long)]
    scene: Option<PathBuf>,
    #[arg(long)]
    raster: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // help/version requests are not usage errors
            if e.use_stderr() {
                eprintln!("{e}");
                return ExitCode::from(3);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    if let Ok(threads) = std::env::var("PH_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    match run(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Scene(args) => cmd_scene(cli.seed, args),
        Command::Check(args) => cmd_check(cli.seed, args),
        Command::Tile(args) => cmd_tile(cli.seed, args),
        Command::Quotient(args) => cmd_quotient(cli.seed, args),
        Command::Triangulate(args) => cmd_triangulate(cli.seed, args),
        Command::Render(args) => cmd_render(args),
    }
}

fn write_out(path: &Path, text: &str) -> Result<(), String> {
    std::fs::write(path, text).map_err(|e| format!("writing {}: {e}", path.display()))
}

fn read_in(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("reading {}: {e}", path.display()))
}

fn load_scene(path: &Path) -> Result<Scene, String> {
    Scene::from_text(&read_in(path)?).map_err(|e| format!("{}: {e}", path.display()))
}

fn emit_report(path: Option<&PathBuf>, text: &str) -> Result<(), String> {
    match path {
        Some(p) => write_out(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_scene(seed: u64, args: SceneArgs) -> Result<ExitCode, String> {
    let name = SceneName::from_str(&args.name).map_err(|e| e.to_string())?;
    let scene = builtin_scene(name, args.depth, args.k).map_err(|e| e.to_string())?;
    let record = validate_scene(&scene);
    if !record.passed() {
        return Err(format!("generated scene failed validation:\n{record}"));
    }
    let _ = seed;
    write_out(&args.out, &scene.to_text())?;
    if let Some(svg_path) = &args.svg {
        write_out(svg_path, &svg::scene_svg(&scene))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_schedule(text: &str) -> Result<Vec<Dyadic>, String> {
    text.split(',')
        .map(|t| t.trim().parse::<Dyadic>().map_err(|e| e.to_string()))
        .collect()
}

fn cmd_check(seed: u64, args: CheckArgs) -> Result<ExitCode, String> {
    let scene = load_scene(&args.scene)?;
    let record = validate_scene(&scene);
    if !record.passed() {
        return Err(format!("scene invalid:\n{record}"));
    }
    let schedule = match &args.schedule {
        Some(s) => parse_schedule(s)?,
        None => planar_homotopy_core::sequences::default_schedule(scene.finest_k()),
    };
    let depth = args.depth.unwrap_or_else(|| scene.max_depth());
    let c1 = condition1(&scene, scene.finest_k(), depth);
    let c2 = condition2(&scene, &schedule, depth);
    let verdict = match (c1.verdict, c2.verdict) {
        (CheckVerdict::Fail, _) | (_, CheckVerdict::Fail) => HomotopyDimension::EqualsTwo,
        (CheckVerdict::Pass, CheckVerdict::Pass) => HomotopyDimension::AtMostOne,
        _ => HomotopyDimension::Inconclusive,
    };
    let mut report = String::new();
    let _ = writeln!(report, "scene={} seed={seed}", scene.name);
    let _ = writeln!(
        report,
        "schedule={}",
        schedule
            .iter()
            .map(|e| e.to_string())
            .collect::<Vec<_>>()
            .join(",")
    );
    for line in c1.lines.iter().chain(&c2.lines) {
        let _ = writeln!(report, "{line}");
    }
    let _ = writeln!(report, "cond1={}", c1.verdict.as_str());
    let _ = writeln!(report, "cond2={}", c2.verdict.as_str());
    for w in c1.witnesses.iter().chain(&c2.witnesses) {
        let _ = writeln!(report, "witness {w}");
    }
    let _ = writeln!(report, "VERDICT={}", verdict.as_str());
    emit_report(args.report.as_ref(), &report)?;
    Ok(match verdict {
        HomotopyDimension::AtMostOne => ExitCode::SUCCESS,
        HomotopyDimension::EqualsTwo => ExitCode::from(1),
        HomotopyDimension::Inconclusive => ExitCode::from(2),
    })
}

fn cmd_tile(seed: u64, args: TileArgs) -> Result<ExitCode, String> {
    let scene = load_scene(&args.scene)?;
    let record = validate_scene(&scene);
    if !record.passed() {
        return Err(format!("scene invalid:\n{record}"));
    }
    let tiling = run_stages(&scene, args.stages).map_err(|e| e.to_string())?;

    let mut file = tiling.to_text();
    let mut report = String::new();
    let _ = writeln!(report, "scene={} seed={seed} stages={}", scene.name, args.stages);
    for claim in &tiling.claims {
        let _ = writeln!(
            report,
            "claim=({}) stage={} passed={} {}",
            claim.id, claim.stage, claim.passed, claim.note
        );
    }
    for (i, frac) in tiling.coverage.iter().enumerate() {
        let _ = writeln!(report, "coverage stage={} fraction={frac:.6}", i + 1);
    }

    // spines: one per domain, appended to the tiling file
    let mut spine_fail = None;
    for (di, d) in tiling.domains.iter().enumerate() {
        match build_spine(&d.cells, &d.punctures) {
            Ok(spine) => {
                let _ = writeln!(file, "spine domain={di}");
                file.push_str(&spine.skeleton.to_text());
            }
            Err(e) => {
                spine_fail = Some(format!("domain {di}: {e}"));
                break;
            }
        }
    }
    let union = spine_union_dimension_check(&tiling, &scene).map_err(|e| e.to_string())?;
    let _ = writeln!(
        report,
        "spine-union passed={} spines={}{}",
        union.passed,
        union.spine_count,
        union
            .witness
            .map(|(c, r)| format!(" witness={c},{r}"))
            .unwrap_or_default()
    );
    if let Some(f) = &spine_fail {
        let _ = writeln!(report, "spine-error {f}");
    }
    let ok = tiling.claims_all_passed() && union.passed && spine_fail.is_none();
    let _ = writeln!(report, "VERDICT={}", if ok { "pass" } else { "fail" });

    write_out(&args.out, &file)?;
    if let Some(svg_path) = &args.svg {
        let bad = scene.bad.last().expect("validated scene");
        let domains: Vec<Raster> = tiling.domains.iter().map(|d| d.cells.clone()).collect();
        write_out(svg_path, &svg::tiling_svg(bad, &domains))?;
    }
    emit_report(args.report.as_ref(), &report)?;
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn parse_loops(text: &str) -> Result<Vec<Vec<(u32, u32)>>, String> {
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut cells = Vec::new();
        for pair in line.split(';') {
            let (x, y) = pair
                .split_once(',')
                .ok_or_else(|| format!("line {}: bad cell {pair}", ln + 1))?;
            let c: u32 = x.trim().parse().map_err(|_| format!("line {}: bad x", ln + 1))?;
            let r: u32 = y.trim().parse().map_err(|_| format!("line {}: bad y", ln + 1))?;
            cells.push((c, r));
        }
        out.push(cells);
    }
    Ok(out)
}

fn cmd_quotient(seed: u64, args: QuotientArgs) -> Result<ExitCode, String> {
    let raster = Raster::from_text(&read_in(&args.raster)?).map_err(|e| e.to_string())?;
    let loops = parse_loops(&read_in(&args.loops)?)?;
    let graph = build_run_graph(&raster).map_err(|e| e.to_string())?;
    let mut report = String::new();
    let _ = writeln!(report, "raster={} seed={seed}", args.raster.display());
    let _ = writeln!(
        report,
        "runs={} edges={}",
        graph.node_count(),
        graph.edge_count()
    );
    let coarse = raster.coarsen_or();
    match usc_probe(&[&coarse, &raster]) {
        Ok(rep) => {
            let _ = writeln!(report, "usc passed={}", rep.passed);
        }
        Err(e) => {
            let _ = writeln!(report, "usc error={e}");
        }
    }
    let mut all_consistent = true;
    for (li, cells) in loops.iter().enumerate() {
        match injectivity_probe(&raster, cells) {
            Ok(rec) => {
                all_consistent &= rec.consistent && !rec.projection_flagged;
                let _ = writeln!(
                    report,
                    "loop={li} word_m={} word_mp={} consistent={} flagged={}",
                    rec.word_m, rec.word_m_prime, rec.consistent, rec.projection_flagged
                );
            }
            Err(e) => {
                all_consistent = false;
                let _ = writeln!(report, "loop={li} error={e}");
            }
        }
    }
    let _ = writeln!(
        report,
        "VERDICT={}",
        if all_consistent { "pass" } else { "fail" }
    );
    emit_report(args.report.as_ref(), &report)?;
    Ok(if all_consistent {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_triangulate(seed: u64, args: TriangulateArgs) -> Result<ExitCode, String> {
    let text = read_in(&args.points)?;
    let mut points = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (n, d) = line
            .split_once('/')
            .ok_or_else(|| format!("line {}: want n/d", ln + 1))?;
        let num: u64 = n.trim().parse().map_err(|_| format!("line {}: bad n", ln + 1))?;
        let den: u64 = d.trim().parse().map_err(|_| format!("line {}: bad d", ln + 1))?;
        if den == 0 || num >= den {
            return Err(format!("line {}: parameter must satisfy n < d", ln + 1));
        }
        points.push(CirclePt::new(num, den));
    }
    let tri = ideal_triangulation(&points).map_err(|e| e.to_string())?;
    let mut report = String::new();
    let _ = writeln!(report, "points={} seed={seed}", points.len());
    let _ = writeln!(report, "triangles={}", tri.triangles.len());
    for t in &tri.triangles {
        let _ = writeln!(report, "triangle={},{},{}", t[0], t[1], t[2]);
    }
    let _ = writeln!(report, "disjoint={}", tri.interiors_disjoint());
    emit_report(args.report.as_ref(), &report)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_render(args: RenderArgs) -> Result<ExitCode, String> {
    let svg_text = match (&args.scene, &args.raster) {
        (Some(scene_path), None) => svg::scene_svg(&load_scene(scene_path)?),
        (None, Some(raster_path)) => {
            let raster = Raster::from_text(&read_in(raster_path)?).map_err(|e| e.to_string())?;
            svg::raster_svg(&raster)
        }
        _ => return Err("render needs exactly one of --scene / --raster".into()),
    };
    write_out(&args.out, &svg_text)?;
    Ok(ExitCode::SUCCESS)
}
