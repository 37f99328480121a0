//! `fractile`: analyze finite-type self-similar sets from the command line.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use fractile::export::{neighbor_graph_json, neighborhood_csv, neighborhood_graph_json};
use fractile::ifs::presets;
use fractile::interior::Word;
use fractile::neighbor::{build_neighbor_graph, NeighborError, NeighborFilter, DEFAULT_CANDIDATE_CAP};
use fractile::render::{
    attractor_svg, neighborhood_window, render_attractor, render_neighborhood, render_zoom_frame, Window,
    DEFAULT_PALETTE,
};
use fractile::search::{search, SearchConfig};
use fractile::zoom::{empirical_frequencies, random_script, run_script, Action, ZoomState};
use fractile::{Analysis, AnalysisError, AnalysisOptions, Gauss, IfsSpec};

#[derive(Parser)]
#[command(name = "fractile", version, about = "Neighbor and neighborhood graphs of self-similar sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the neighbor graph and report counts, dimension and connectivity.
    Analyze {
        #[command(flatten)]
        spec: SpecArg,
        /// Write the graph as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the graph JSON instead of the report.
        #[arg(long)]
        json: bool,
        #[arg(long, default_value_t = DEFAULT_CANDIDATE_CAP)]
        cap: usize,
    },
    /// Build the neighborhood graph with stationary frequencies and statistics.
    Nbhgraph {
        #[command(flatten)]
        spec: SpecArg,
        #[command(flatten)]
        analysis: AnalysisArgs,
        /// One CSV row per neighborhood.
        #[arg(long)]
        csv: bool,
        #[arg(long)]
        json: bool,
        /// Write the CSV or JSON export here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a zoom script and print the trajectory log.
    Zoom {
        #[command(flatten)]
        spec: SpecArg,
        #[command(flatten)]
        analysis: AnalysisArgs,
        /// Space- or comma-separated actions, e.g. "in:1 in:3 out".
        #[arg(long, conflicts_with = "random")]
        script: Option<String>,
        /// Replace the script by this many uniformly random zoom-ins.
        #[arg(long)]
        random: Option<usize>,
        /// Seed for sampled zoom-outs and random scripts.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Starting neighborhood (1-based).
        #[arg(long, default_value_t = 1)]
        start: usize,
        /// Write one PPM frame per step into this directory.
        #[arg(long)]
        frames_dir: Option<PathBuf>,
        #[arg(long, default_value_t = 256)]
        pixels: u32,
        #[arg(long, default_value_t = 12)]
        depth: u32,
        /// Write the trajectory log here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render the attractor, or one neighborhood, to PPM or SVG.
    Render {
        #[command(flatten)]
        spec: SpecArg,
        /// Output path; `.svg` selects SVG, anything else binary PPM.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 512)]
        pixels: u32,
        #[arg(long, default_value_t = 14)]
        depth: u32,
        /// Render neighborhood K (1-based) instead of the attractor.
        #[arg(long)]
        neighborhood: Option<usize>,
        /// With --neighborhood, outline the children of the reference piece.
        #[arg(long)]
        children: bool,
        #[arg(long, default_value_t = NeighborFilter::All)]
        filter: NeighborFilter,
        #[arg(long, default_value_t = DEFAULT_CANDIDATE_CAP)]
        cap: usize,
    },
    /// Sample Gaussian-integer translations and keep finite-type systems.
    Search {
        /// Linear parts as units times 1/2, e.g. "i,-1,-i".
        #[arg(long, default_value = "i,-1,-i")]
        rotations: String,
        #[arg(long, default_value_t = 3)]
        range: i64,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 20_000)]
        cap: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct SpecArg {
    /// Path to an IFS JSON file, or the name of a bundled preset.
    spec: String,
}

#[derive(Args)]
struct AnalysisArgs {
    #[arg(long, default_value_t = NeighborFilter::All)]
    filter: NeighborFilter,
    /// Interior seed word; found by search when omitted.
    #[arg(long)]
    seed_word: Option<String>,
    /// Candidate cap for the neighbor graph.
    #[arg(long, default_value_t = DEFAULT_CANDIDATE_CAP)]
    cap: usize,
}

fn load_spec(arg: &SpecArg) -> Result<IfsSpec> {
    let path = Path::new(&arg.spec);
    if path.exists() {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        return Ok(IfsSpec::parse(&text)?);
    }
    match presets::source(&arg.spec) {
        Some(text) => Ok(IfsSpec::parse(text)?),
        None => bail!(
            "{} is neither a file nor a preset ({})",
            arg.spec,
            presets::NAMES.join(", ")
        ),
    }
}

fn run_analysis(spec: &IfsSpec, args: &AnalysisArgs) -> Result<Analysis> {
    let seed_word = args
        .seed_word
        .as_deref()
        .map(|s| Word::parse(s, spec.len()))
        .transpose()
        .map_err(anyhow::Error::msg)?;
    let opts = AnalysisOptions {
        filter: args.filter,
        candidate_cap: args.cap,
        seed_word,
        ..AnalysisOptions::default()
    };
    Ok(Analysis::run(spec, &opts)?)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn cmd_analyze(spec: &IfsSpec, out: Option<&Path>, json: bool, cap: usize) -> Result<()> {
    let g = build_neighbor_graph(spec, cap)?;
    let value = neighbor_graph_json(&g);
    if let Some(p) = out {
        fs::write(p, serde_json::to_string_pretty(&value)?)?;
    }
    if json {
        println!("{}", serde_json::to_string_pretty(&value)?);
        return Ok(());
    }
    let c = g.restricted(NeighborFilter::Continuum);
    println!(
        "{}: {} maps, ratio {:.6}, attractor dimension {:.4}",
        spec.name,
        spec.len(),
        spec.ratio(),
        spec.attractor_dimension()
    );
    println!("finite type: yes ({} candidates)", g.candidates);
    println!("overlap: none");
    println!(
        "{} neighbors ({} points, {} continuum), {} edges",
        g.neighbor_count(),
        g.point_count(),
        g.continuum_count(),
        g.edge_count()
    );
    println!(
        "{} vertices (continuum incl. id), {} edges",
        c.vertex_count(),
        c.edge_count()
    );
    println!("boundary dimension: {:.4}", g.boundary_dimension());
    println!("connected: {}", yes_no(g.is_connected()));
    Ok(())
}

fn cmd_nbhgraph(spec: &IfsSpec, args: &AnalysisArgs, csv: bool, json: bool, out: Option<&Path>) -> Result<()> {
    let a = run_analysis(spec, args)?;
    let ng = &a.neighborhoods;
    if csv {
        return emit(out, &neighborhood_csv(ng, &a.stationary));
    }
    if json {
        let value = neighborhood_graph_json(ng, &a.stationary, &a.stats);
        return emit(out, &(serde_json::to_string_pretty(&value)? + "\n"));
    }
    println!("filter: {}", ng.filter);
    println!("interior word: {}", ng.seed);
    println!("K = {} neighborhoods, {} edges", ng.len(), ng.edge_count());
    let solver = if a.stationary.is_exact() { "exact" } else { "power iteration" };
    println!("stationary distribution ({solver}):");
    const LISTING_LIMIT: usize = 100;
    for k in 0..ng.len().min(LISTING_LIMIT) {
        let succ: Vec<String> = ng.successors(k).iter().map(|s| (s + 1).to_string()).collect();
        let exact = a
            .stationary
            .exact
            .as_ref()
            .map(|v| format!(" = {}", v[k]))
            .unwrap_or_default();
        println!(
            "  N{:<6} size {:<3} p {:.6}{exact}  successors {}",
            k + 1,
            ng.nbhs[k].len(),
            a.stationary.p[k],
            succ.join(" ")
        );
    }
    if ng.len() > LISTING_LIMIT {
        println!("  ... {} more (use --csv or --json)", ng.len() - LISTING_LIMIT);
    }
    let st = &a.stats;
    println!("neighbors per neighborhood: min {}, max {}, average {:.4}", st.min_neighbors, st.max_neighbors, st.avg_neighbors);
    println!(
        "frequency of 1, 2, 3 neighbors: {:.2}%, {:.2}%, {:.2}%",
        100.0 * st.bucket_freq[0],
        100.0 * st.bucket_freq[1],
        100.0 * st.bucket_freq[2]
    );
    println!("frequency above 2/3 of max: {:.4}%", 100.0 * st.heavy_freq);
    let leading: Vec<String> = st
        .leading
        .iter()
        .map(|&(k, p)| format!("N{} {:.2}%", k + 1, 100.0 * p))
        .collect();
    println!("leading: {}", leading.join(", "));
    Ok(())
}

fn parse_script(text: &str) -> Result<Vec<Action>> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<Action>().map_err(anyhow::Error::msg))
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn cmd_zoom(
    spec: &IfsSpec,
    args: &AnalysisArgs,
    script: Option<&str>,
    random: Option<usize>,
    seed: u64,
    start: usize,
    frames_dir: Option<&Path>,
    pixels: u32,
    depth: u32,
    out: Option<&Path>,
) -> Result<()> {
    let a = run_analysis(spec, args)?;
    let k = a.neighborhoods.len();
    if start == 0 || start > k {
        bail!("--start must be in 1..={k}");
    }
    let actions = match (script, random) {
        (_, Some(n)) => random_script(spec.len(), n, seed),
        (Some(s), None) => parse_script(s)?,
        (None, None) => bail!("give --script or --random"),
    };
    if let Some(dir) = frames_dir {
        fs::create_dir_all(dir)?;
    }
    let win = neighborhood_window(&a.graph, pixels);
    let mut state = ZoomState::new(start - 1, seed);
    let mut visits = Vec::with_capacity(actions.len());
    let mut frame_error = None;
    let log = run_script(&a.model, &mut state, &actions, |st| {
        visits.push(st.current);
        if let Some(dir) = frames_dir {
            let raster = render_zoom_frame(&a.graph, &a.neighborhoods.nbhs[st.current], win, depth, &DEFAULT_PALETTE);
            let path = dir.join(format!("frame_{:06}.ppm", st.step_count));
            if let Err(e) = fs::write(&path, raster.to_ppm()) {
                frame_error.get_or_insert(e);
            }
        }
    })?;
    if let Some(e) = frame_error {
        return Err(e).context("writing frames");
    }
    let mut text = String::from("step, nbhIndex, action, childLabel\n");
    for entry in &log {
        text.push_str(&entry.to_string());
        text.push('\n');
    }
    emit(out, &text)?;
    println!("final: N{} after {} steps", state.current + 1, state.step_count);
    if random.is_some() {
        let freq = empirical_frequencies(&visits, k);
        let err = freq
            .iter()
            .zip(a.model.stationary())
            .map(|(x, p)| (x - p).abs())
            .fold(0.0, f64::max);
        println!("max |empirical - stationary| = {err:.6}");
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_render(
    spec: &IfsSpec,
    out: &Path,
    pixels: u32,
    depth: u32,
    neighborhood: Option<usize>,
    children: bool,
    filter: NeighborFilter,
    cap: usize,
) -> Result<()> {
    if pixels < 16 {
        bail!("--pixels must be at least 16");
    }
    let svg = out.extension().is_some_and(|e| e == "svg");
    if let Some(k) = neighborhood {
        let args = AnalysisArgs {
            filter,
            seed_word: None,
            cap,
        };
        let a = run_analysis(spec, &args)?;
        if k == 0 || k > a.neighborhoods.len() {
            bail!("--neighborhood must be in 1..={}", a.neighborhoods.len());
        }
        let nbh = &a.neighborhoods.nbhs[k - 1];
        let win = neighborhood_window(&a.graph, pixels);
        let raster = if children {
            render_zoom_frame(&a.graph, nbh, win, depth, &DEFAULT_PALETTE)
        } else {
            render_neighborhood(&a.graph, nbh, win, depth, &DEFAULT_PALETTE)
        };
        fs::write(out, raster.to_ppm())?;
    } else {
        let win = Window::around(spec, pixels);
        if svg {
            fs::write(out, attractor_svg(spec, depth.min(8), win))?;
        } else {
            fs::write(out, render_attractor(spec, win, depth).to_ppm())?;
        }
    }
    println!("wrote {}", out.display());
    Ok(())
}

fn parse_rotation(token: &str) -> Result<Gauss> {
    let half = |re, im| Gauss::ratio((re, 2), (im, 2));
    Ok(match token.trim() {
        "1" => half(1, 0),
        "-1" => half(-1, 0),
        "i" => half(0, 1),
        "-i" => half(0, -1),
        other => bail!("rotation {other:?} is not one of 1, -1, i, -i"),
    })
}

fn cmd_search(rotations: &str, range: i64, count: usize, cap: usize, seed: u64, json: bool) -> Result<()> {
    let rotations = rotations.split(',').map(parse_rotation).collect::<Result<Vec<_>>>()?;
    let cfg = SearchConfig {
        rotations,
        range,
        trials: count,
        cap,
        seed,
    };
    let (hits, tally) = search(&cfg);
    if json {
        let value: Vec<_> = hits
            .iter()
            .map(|h| {
                serde_json::json!({
                    "translations": h.translations,
                    "neighbors": h.neighbors,
                    "edges": h.edges,
                    "boundaryDimension": h.boundary_dimension,
                    "connected": h.connected,
                    "spec": h.spec.to_json(),
                })
            })
            .collect();
        println!("{}", serde_json::to_string_pretty(&value)?);
        return Ok(());
    }
    for h in &hits {
        let v: Vec<String> = h.translations.iter().map(|(a, b)| format!("{a}{b:+}i")).collect();
        println!(
            "v = {}: {} neighbors, {} edges, boundary dim {:.4}, connected {}",
            v.join(", "),
            h.neighbors,
            h.edges,
            h.boundary_dimension,
            yes_no(h.connected)
        );
    }
    println!(
        "{} trials: {} finite type, {} overlapping, {} over cap, {} invalid",
        count, tally.finite_type, tally.overlap, tally.too_large, tally.invalid
    );
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let neighbor = err
        .downcast_ref::<NeighborError>()
        .or_else(|| match err.downcast_ref::<AnalysisError>() {
            Some(AnalysisError::Neighbor(e)) => Some(e),
            _ => None,
        });
    match neighbor {
        Some(NeighborError::NotFiniteType { .. }) => 2,
        Some(NeighborError::OverlapDetected { .. }) => 3,
        // Parse errors, I/O and everything else.
        _ => 1,
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Analyze { spec, out, json, cap } => cmd_analyze(&load_spec(&spec)?, out.as_deref(), json, cap),
        Command::Nbhgraph {
            spec,
            analysis,
            csv,
            json,
            out,
        } => cmd_nbhgraph(&load_spec(&spec)?, &analysis, csv, json, out.as_deref()),
        Command::Zoom {
            spec,
            analysis,
            script,
            random,
            seed,
            start,
            frames_dir,
            pixels,
            depth,
            out,
        } => cmd_zoom(
            &load_spec(&spec)?,
            &analysis,
            script.as_deref(),
            random,
            seed,
            start,
            frames_dir.as_deref(),
            pixels,
            depth,
            out.as_deref(),
        ),
        Command::Render {
            spec,
            out,
            pixels,
            depth,
            neighborhood,
            children,
            filter,
            cap,
        } => cmd_render(&load_spec(&spec)?, &out, pixels, depth, neighborhood, children, filter, cap),
        Command::Search {
            rotations,
            range,
            count,
            cap,
            seed,
            json,
        } => cmd_search(&rotations, range, count, cap, seed, json),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
