//! `transversal`: command-line driver for the search campaigns, the bound
//! report and two small diagnostic tools.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use transversal_core::certify::{
    assemble_bound, enumerate_pair_grid, verify_part_a, BoundInputs, BoundStatus, PairGrid,
};
use transversal_core::geom::{max_triple_width, min_altitude, Ellipse, Point2};
use transversal_core::john::{five_values, functional, max_arc_gap_unchecked, simplex_condition};
use transversal_core::region::{outer_approx, region_width_upper_bound, RegionQuery, RegionSettings};
use transversal_core::search::{
    check_soundness, run_campaign_with, AngleCube, CampaignConfig, Certificate, Mode, RoundTable, RunOptions, Verdict,
};
use transversal_core::TAU;

const EXIT_ERROR: u8 = 1;
const EXIT_CAP: u8 = 2;
const EXIT_EXHAUSTED: u8 = 3;

#[derive(Parser)]
#[command(name = "transversal", version, about = "Certified search for line transversals of translated disks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Diagnostics for one tuple of boundary angles.
    CheckTuple(CheckTupleArgs),
    /// Run a search campaign and emit its certificate.
    Verify(VerifyArgs),
    /// Dump the quadtree cover of a region as CSV.
    RegionDump(RegionDumpArgs),
    /// Assemble the bound from certificate files.
    Report(ReportArgs),
}

#[derive(Args)]
struct CheckTupleArgs {
    /// 3 to 5 ordered angles in [0, 2π). Accepts forms like `1.2`, `pi/2`,
    /// `3pi/2`, `2*pi/5`.
    #[arg(required = true, num_args = 3..=5)]
    angles: Vec<String>,
    #[arg(long, default_value_t = 1.0)]
    r1: f64,
    #[arg(long, default_value_t = 1.0)]
    r2: f64,
    /// Rule set for the prune check; by default lemma15 for 5 angles and
    /// grid-b for 4.
    #[arg(long)]
    mode: Option<Mode>,
    /// Resolution of the cube the tuple is located in.
    #[arg(long, default_value_t = 120)]
    n: u32,
    /// Interpret plain numbers as degrees.
    #[arg(long)]
    degrees: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    mode: Mode,
    #[arg(long, requires = "r2", conflicts_with = "pair_grid_step")]
    r1: Option<f64>,
    #[arg(long, requires = "r1")]
    r2: Option<f64>,
    /// Run every pair of the standard grid with this step.
    #[arg(long)]
    pair_grid_step: Option<f64>,
    #[arg(long)]
    n0: Option<u32>,
    #[arg(long)]
    depth_cap: Option<u32>,
    #[arg(long)]
    region_depth: Option<u32>,
    /// Smallest refined half-side of region cells; defaults to r1/2048.
    #[arg(long)]
    region_min_half_side: Option<f64>,
    /// Grid (c) center round resolution.
    #[arg(long)]
    center_n: Option<u32>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    delta_fp: Option<f64>,
    /// Lemma15 mode: use only the transversal and John rules.
    #[arg(long)]
    strict: bool,
    #[arg(long)]
    cube_budget: Option<u64>,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Checkpoint file, rewritten after every round.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Continue from `--checkpoint`.
    #[arg(long, requires = "checkpoint")]
    resume: bool,
    /// Certificate output; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Pruned cubes re-checked on sampled interior tuples; 0 disables.
    #[arg(long, default_value_t = 10_000)]
    audit_cubes: usize,
    #[arg(long, default_value_t = 1)]
    audit_tuples: usize,
    #[arg(long, default_value_t = 0)]
    audit_seed: u64,
}

#[derive(Args)]
struct RegionDumpArgs {
    /// Angles of the points of Z on the ellipse boundary.
    #[arg(required = true, num_args = 1..=5)]
    angles: Vec<String>,
    #[arg(long)]
    r1: f64,
    #[arg(long)]
    r2: f64,
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
    #[arg(long, default_value_t = RegionSettings::DEFAULT_MAX_DEPTH)]
    depth: u32,
    #[arg(long)]
    min_half_side: Option<f64>,
    #[arg(long)]
    degrees: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Certificate files; each holds one certificate or a JSON array of them.
    #[arg(required = true)]
    files: Vec<PathBuf>,
    #[arg(long, default_value_t = 0.015)]
    pair_grid_step: f64,
    /// Leave part (a) unverified instead of checking it.
    #[arg(long)]
    skip_part_a: bool,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
}

fn main() -> ExitCode {
    // Usage errors exit 1; 2 and 3 are reserved for verdicts.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR } else { 0 });
        }
    };
    let result = match cli.command {
        Command::CheckTuple(a) => check_tuple(&a),
        Command::Verify(a) => verify(&a),
        Command::RegionDump(a) => region_dump(&a),
        Command::Report(a) => report(&a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

/// `[c][*]pi[/d]` or a plain number (radians, or degrees when asked).
fn parse_angle(s: &str, degrees: bool) -> Result<f64> {
    let t = s.trim().replace('π', "pi");
    let bad = || anyhow::anyhow!("cannot parse angle {s:?}");
    if let Some(at) = t.find("pi") {
        let coef = t[..at].trim_end_matches('*');
        let coef: f64 = if coef.is_empty() { 1.0 } else { coef.parse().map_err(|_| bad())? };
        let rest = &t[at + 2..];
        let den: f64 = match rest.strip_prefix('/') {
            Some(d) => d.parse().map_err(|_| bad())?,
            None if rest.is_empty() => 1.0,
            None => return Err(bad()),
        };
        return Ok(coef * PI / den);
    }
    let v: f64 = t.parse().map_err(|_| bad())?;
    Ok(if degrees { v.to_radians() } else { v })
}

fn parse_angles(raw: &[String], degrees: bool) -> Result<Vec<f64>> {
    let a: Vec<f64> = raw.iter().map(|s| parse_angle(s, degrees)).collect::<Result<_>>()?;
    if a.iter().any(|x| !(0.0..2.0 * PI).contains(x)) || a.windows(2).any(|w| w[0] > w[1]) {
        bail!("angles must be non-decreasing in [0, 2π): {a:?}");
    }
    Ok(a)
}

fn check_tuple(args: &CheckTupleArgs) -> Result<u8> {
    let alphas = parse_angles(&args.angles, args.degrees)?;
    let k = alphas.len();
    let e = Ellipse::axis_aligned(args.r1, args.r2)?;
    let pts: Vec<Point2> = alphas.iter().map(|&a| e.boundary_point(a)).collect();

    println!("angles: {}", join(alphas.iter().map(|a| format!("{a:.9}"))));
    println!("points on E({}, {}):", args.r1, args.r2);
    for (i, p) in pts.iter().enumerate() {
        println!("  z{} = ({:.9}, {:.9})", i + 1, p.x, p.y);
    }
    println!("triple widths:");
    for i in 0..k {
        for j in i + 1..k {
            for l in j + 1..k {
                println!("  {{{}, {}, {}}}: {:.9}", i + 1, j + 1, l + 1, min_altitude(pts[i], pts[j], pts[l]));
            }
        }
    }
    let widest = max_triple_width(&pts);
    println!("max triple width: {widest:.9} ({} T(B, 3))", if widest <= 2.0 { "satisfies" } else { "violates" });
    match k {
        3 => println!("simplex condition: {:?}", simplex_condition(&alphas, 1e-9)),
        4 => println!("F = {:.12}", functional(alphas[0], alphas[1], alphas[2], alphas[3])),
        _ => {
            let v = five_values(&[alphas[0], alphas[1], alphas[2], alphas[3], alphas[4]]);
            println!("five values: {}", join(v.iter().map(|x| format!("{x:.12}"))));
            println!(
                "signs: {}",
                join(v.iter().map(|&x| {
                    if x > 0.0 {
                        "+"
                    } else if x < 0.0 {
                        "-"
                    } else {
                        "0"
                    }
                    .to_string()
                }))
            );
        }
    }
    let gaps: Vec<f64> = (0..k)
        .map(|i| if i + 1 < k { alphas[i + 1] - alphas[i] } else { alphas[0] + 2.0 * PI - alphas[k - 1] })
        .collect();
    println!("arc gaps: {}", join(gaps.iter().map(|g| format!("{g:.9}"))));
    println!("max arc gap: {:.9} (2π/3 = {:.9})", max_arc_gap_unchecked(&alphas), 2.0 * PI / 3.0);

    let mode = match (args.mode, k) {
        (Some(m), _) if m.k() != k => bail!("mode {} takes {}-tuples, got {k}", m.name(), m.k()),
        (Some(m), _) => Some(m),
        (None, 5) => Some(Mode::Lemma15),
        (None, 4) => Some(Mode::GridB),
        (None, _) => None,
    };
    if let Some(mode) = mode {
        if args.r1 < args.r2 {
            bail!("prune rules need r1 >= r2");
        }
        let n = args.n;
        let idx: Vec<u32> = alphas.iter().map(|&a| ((a * n as f64 / (2.0 * PI)).floor() as u32).min(n - 1)).collect();
        let cube = AngleCube::new(n, &idx).context("resolution out of range")?;
        let rules = transversal_core::search::RuleSet::new(mode, args.r1, args.r2);
        let table = RoundTable::new(n);
        match rules.prune(&cube, &table) {
            Some(r) => println!("{} rule on cube [{cube}]: {r:?}", mode.name()),
            None => println!("{} rule on cube [{cube}]: no prune", mode.name()),
        }
    }
    Ok(0)
}

fn join(items: impl Iterator<Item = String>) -> String {
    items.collect::<Vec<_>>().join(" ")
}

fn campaign_config(args: &VerifyArgs, r1: f64, r2: f64) -> CampaignConfig {
    let mut cfg = match args.mode {
        Mode::Lemma15 => CampaignConfig { r1, r2, ..CampaignConfig::lemma15() },
        Mode::GridB => CampaignConfig::grid_b(r1, r2),
        Mode::GridC => CampaignConfig::grid_c(r1, r2),
    };
    cfg.region = RegionSettings::default_for(r1);
    if let Some(v) = args.n0 {
        cfg.n0 = v;
    }
    if let Some(v) = args.depth_cap {
        cfg.depth_cap = v;
    }
    if let Some(v) = args.region_depth {
        cfg.region.max_depth = v;
    }
    if let Some(v) = args.region_min_half_side {
        cfg.region.min_half_side = v;
    }
    if args.center_n.is_some() {
        cfg.center_check_n = args.center_n;
    } else if args.mode == Mode::GridC {
        // Keep the center round at the last round unless told otherwise.
        cfg.center_check_n = Some(cfg.n0 << (cfg.depth_cap - 1));
    }
    if let Some(v) = args.rho {
        cfg.rho = v;
    }
    if let Some(v) = args.delta_fp {
        cfg.delta_fp = v;
    }
    if let Some(v) = args.cube_budget {
        cfg.cube_budget = v;
    }
    cfg.lemma15_large_arc = !args.strict;
    cfg.threads = args.threads;
    cfg
}

fn verify(args: &VerifyArgs) -> Result<u8> {
    if args.strict && args.mode != Mode::Lemma15 {
        bail!("--strict applies to lemma15 only");
    }
    let pairs: Vec<(f64, f64)> = match (args.r1, args.r2, args.pair_grid_step) {
        (Some(r1), Some(r2), None) => vec![(r1, r2)],
        (None, None, Some(step)) => {
            if args.checkpoint.is_some() {
                bail!("--checkpoint works with a single pair only");
            }
            if step.is_nan() || step <= 0.0 {
                bail!("pair grid step must be positive");
            }
            enumerate_pair_grid(&PairGrid::standard(step))
        }
        (None, None, None) if args.mode == Mode::Lemma15 => vec![(3.0, 1.62)],
        _ => bail!("give --r1 and --r2, or --pair-grid-step"),
    };
    let configs: Vec<CampaignConfig> = pairs.iter().map(|&(r1, r2)| campaign_config(args, r1, r2)).collect();
    for cfg in &configs {
        cfg.validate()?;
    }
    let opts = RunOptions {
        checkpoint: args.checkpoint.clone(),
        resume: args.resume,
        audit_cubes: args.audit_cubes,
        audit_per_reason: if args.audit_cubes == 0 { 0 } else { 500 },
    };

    let mut certs = Vec::with_capacity(configs.len());
    let mut audit_failed = false;
    for cfg in &configs {
        let out = run_campaign_with(cfg, &opts)?;
        let c = &out.certificate;
        eprintln!("{} ({}, {}): {:?} in {:.1}s", c.mode.name(), c.r1, c.r2, c.verdict, c.wall_seconds);
        for (t, r) in c.rounds.iter().enumerate() {
            let pruned = join(r.pruned.iter().filter(|(_, &v)| v > 0).map(|(k, v)| format!("{k:?}={v}")));
            eprintln!(
                "  round {t} n={} in={} pruned[{pruned}] subdivided={} unresolved={} out={}",
                r.n, r.cubes_in, r.subdivided, r.unresolved, r.cubes_out
            );
        }
        if let Some(s) = &c.survivors {
            eprintln!("  survivors: {}", s.count);
        }
        if !out.audit.is_empty() {
            let rep = check_soundness(&cfg.rules(), &out.audit, args.audit_tuples, args.audit_seed);
            eprintln!(
                "  soundness audit: {} cubes, {} pairs, {} violations",
                rep.cubes_checked, rep.pairs_checked, rep.violation_count
            );
            for v in &rep.violations {
                eprintln!("    {v}");
            }
            audit_failed |= !rep.is_clean();
        }
        certs.push(out.certificate);
    }

    let json = if certs.len() == 1 && args.pair_grid_step.is_none() {
        certs[0].to_json()
    } else {
        serde_json::to_string_pretty(&certs)?
    };
    match &args.out {
        Some(path) => fs::write(path, json + "\n").with_context(|| format!("writing {}", path.display()))?,
        None => println!("{json}"),
    }
    if audit_failed {
        bail!("soundness audit found violations");
    }
    Ok(exit_for(certs.iter().map(|c| c.verdict)))
}

/// Worst verdict wins: Exhausted over DepthCapReached over Empty.
fn exit_for(verdicts: impl Iterator<Item = Verdict>) -> u8 {
    verdicts
        .map(|v| match v {
            Verdict::Empty => 0,
            Verdict::DepthCapReached => EXIT_CAP,
            Verdict::Exhausted => EXIT_EXHAUSTED,
        })
        .max()
        .unwrap_or(0)
}

fn region_dump(args: &RegionDumpArgs) -> Result<u8> {
    let alphas = parse_angles(&args.angles, args.degrees)?;
    let e = Ellipse::axis_aligned(args.r1, args.r2)?;
    let z: Vec<Point2> = alphas.iter().map(|&a| e.boundary_point(a)).collect();
    let q = RegionQuery::new(z, args.eps, args.r1, args.r2)?;
    let min_half_side = args.min_half_side.unwrap_or(args.r1 / 2048.0);
    let oa = outer_approx(&q, args.depth, min_half_side);
    let csv = oa.to_csv();
    match &args.out {
        Some(path) => fs::write(path, &csv).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{csv}"),
    }
    if oa.is_empty() {
        eprintln!("region is empty");
    } else {
        let w = region_width_upper_bound(&oa);
        eprintln!("{} cells, hull width <= {w:.9} (2τ = {:.9})", oa.cells.len(), 2.0 * TAU);
    }
    Ok(0)
}

fn read_certificates(path: &Path) -> Result<Vec<Certificate>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let certs =
        if value.is_array() { serde_json::from_value(value) } else { serde_json::from_value(value).map(|c| vec![c]) };
    certs.with_context(|| format!("{} is not a certificate", path.display()))
}

fn report(args: &ReportArgs) -> Result<u8> {
    let mut certs = Vec::new();
    for f in &args.files {
        certs.extend(read_certificates(f)?);
    }
    let part_a = if args.skip_part_a { None } else { Some(verify_part_a()) };
    let inputs = BoundInputs::from_certificates(part_a, certs);
    let rep = assemble_bound(&inputs, &PairGrid::standard(args.pair_grid_step))?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&rep)?);
    } else {
        println!("status: {:?}", rep.status);
        match rep.bound {
            Some(b) => println!("bound: lambda(B, 3) <= {b}"),
            None => println!("bound: not established"),
        }
        println!("pair grid: step {} ({} pairs)", rep.pair_grid.step, rep.pairs_required);
        for s in &rep.sub_results {
            println!("  [{}] {}", if s.verified { "ok" } else { "--" }, s.name);
        }
        println!("inequalities:");
        for q in &rep.inequalities {
            println!("  [{}] {}: {:.10} < {:.10}", if q.holds { "ok" } else { "--" }, q.name, q.lhs, q.rhs);
        }
        if !rep.gaps.is_empty() {
            println!("gaps:");
            for g in &rep.gaps {
                println!("  {g}");
            }
        }
    }
    Ok(match rep.status {
        BoundStatus::Complete => 0,
        BoundStatus::Partial => EXIT_CAP,
    })
}
