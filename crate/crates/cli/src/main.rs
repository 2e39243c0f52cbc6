//! Command-line front end: mask certification, system construction with
//! cached generator dumps, multi-level transforms, and plot data export.
//!
//! Exit codes: 0 on success, 1 when a certification or numerical contract
//! fails, 2 on usage or parse errors.

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use vnumra::io::{
    read_bank, read_dump, read_mask, read_pyramid, read_signal_csv, write_bank, write_dump,
    write_pyramid, write_signal_csv,
};
use vnumra::mask::default_pairs;
use vnumra::pipeline::gram_lambdas;
use vnumra::*;

#[derive(Parser)]
#[command(
    name = "vnumra",
    about = "Vector-valued nonuniform multiresolution analysis in the linear canonical transform geometry",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certify a mask file against the orthonormality identities.
    ValidateMask(ValidateArgs),
    /// Build a system cache from a scaling mask or a full bank.
    #[command(alias = "build")]
    BuildScaling(BuildArgs),
    /// Complete a scaling mask to a full wavelet bank.
    BuildWavelets(BuildWaveletsArgs),
    /// Gram matrix of cached generator translates.
    Gram(GramArgs),
    /// Analyze a signal into a coefficient pyramid.
    Transform(TransformArgs),
    /// Synthesize a signal from a coefficient pyramid.
    Reconstruct(ReconstructArgs),
    /// Export plot-ready CSV data from a system cache.
    PlotData(PlotArgs),
}

#[derive(Args)]
struct ValidateArgs {
    /// Mask definition (JSON).
    #[arg(long)]
    mask: PathBuf,
    /// Expected lattice N; rejected if the file disagrees.
    #[arg(long = "N")]
    n: Option<i64>,
    /// Expected lattice r; rejected if the file disagrees.
    #[arg(long = "r")]
    r: Option<i64>,
    /// Expected channel count M; rejected if the file disagrees.
    #[arg(long = "M")]
    m: Option<usize>,
    /// Certification tolerance for the coefficient-level identities.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Optional JSON report destination (stdout otherwise).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BuildArgs {
    /// Scaling mask (JSON); wavelets are completed automatically.
    #[arg(long, conflicts_with = "bank")]
    mask: Option<PathBuf>,
    /// Full bank (JSON) with scaling and wavelet masks.
    #[arg(long)]
    bank: Option<PathBuf>,
    /// Transform parameters A,B,C,D.
    #[arg(long, value_parser = parse_abcd, default_value = "0,1,-1,0", allow_hyphen_values = true)]
    abcd: (f64, f64, f64, f64),
    /// Time grid start,step,count.
    #[arg(long, value_parser = parse_grid, default_value = "-2,0.015625,1024", allow_hyphen_values = true)]
    grid: GridSpec,
    /// Cascade iteration count.
    #[arg(long, default_value_t = 24)]
    iterations: usize,
    /// Filter-bank certification tolerance.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Cache directory to create.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BuildWaveletsArgs {
    /// Scaling mask (JSON).
    #[arg(long)]
    mask: PathBuf,
    /// Output bank (JSON).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GramArgs {
    /// System cache directory produced by build-scaling.
    #[arg(long)]
    cache: PathBuf,
    /// Which generator: "phi" or "psi-L".
    #[arg(long, default_value = "phi")]
    band: String,
    /// Number of translates.
    #[arg(long, default_value_t = 8)]
    translates: usize,
    /// Output CSV (i,j,re,im); stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TransformArgs {
    /// System cache directory.
    #[arg(long)]
    cache: PathBuf,
    /// Input signal: CSV (time, re, im per channel) or a binary dump.
    #[arg(long)]
    signal: PathBuf,
    /// Decomposition depth.
    #[arg(long, default_value_t = 1)]
    levels: usize,
    /// Output pyramid (JSON).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReconstructArgs {
    /// System cache directory.
    #[arg(long)]
    cache: PathBuf,
    /// Input pyramid (JSON).
    #[arg(long)]
    pyramid: PathBuf,
    /// Output signal CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PlotArgs {
    /// System cache directory.
    #[arg(long)]
    cache: PathBuf,
    /// "phi", "psi-L", or "gram".
    #[arg(long, default_value = "phi")]
    band: String,
    /// Output CSV; stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug)]
struct GridSpec {
    start: f64,
    step: f64,
    count: usize,
}

fn parse_abcd(s: &str) -> Result<(f64, f64, f64, f64), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 4 {
        return Err("expected A,B,C,D".to_string());
    }
    let mut v = [0.0; 4];
    for (slot, part) in v.iter_mut().zip(&parts) {
        *slot = part.trim().parse::<f64>().map_err(|e| e.to_string())?;
    }
    Ok((v[0], v[1], v[2], v[3]))
}

fn parse_grid(s: &str) -> Result<GridSpec, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err("expected start,step,count".to_string());
    }
    let start = parts[0].trim().parse::<f64>().map_err(|e| e.to_string())?;
    let step = parts[1].trim().parse::<f64>().map_err(|e| e.to_string())?;
    let count = parts[2].trim().parse::<usize>().map_err(|e| e.to_string())?;
    if step <= 0.0 || count == 0 {
        return Err("grid step must be positive and count nonzero".to_string());
    }
    Ok(GridSpec { start, step, count })
}

/// Exit code and message carried by failed commands.
type CmdError = (u8, String);
type CmdResult<T = ()> = Result<T, CmdError>;

fn usage_err<E: std::fmt::Display>(e: E) -> CmdError {
    (2, e.to_string())
}

fn failure_err<E: std::fmt::Display>(e: E) -> CmdError {
    (1, e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::ValidateMask(args) => cmd_validate_mask(args),
        Command::BuildScaling(args) => cmd_build(args),
        Command::BuildWavelets(args) => cmd_build_wavelets(args),
        Command::Gram(args) => cmd_gram(args),
        Command::Transform(args) => cmd_transform(args),
        Command::Reconstruct(args) => cmd_reconstruct(args),
        Command::PlotData(args) => cmd_plot_data(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, message)) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}

fn open_reader(path: &Path) -> CmdResult<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| usage_err(format!("{}: {e}", path.display())))
}

fn create_writer(path: &Path) -> CmdResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| usage_err(format!("{}: {e}", path.display())))
}

fn report_json(report: &CertificationReport) -> serde_json::Value {
    serde_json::to_value(report).expect("report serializes")
}

fn cmd_validate_mask(args: ValidateArgs) -> CmdResult {
    if args.tol <= 0.0 {
        return Err(usage_err("tolerance must be positive"));
    }
    let mask = read_mask(open_reader(&args.mask)?).map_err(usage_err)?;
    check_expectations(&mask, args.n, args.r, args.m)?;
    let cert_grid = Grid::new(0.0, 1.0 / 1024.0, 1024).expect("static grid");
    let frequency = check_frequency_identity(&mask, &cert_grid, args.tol).map_err(failure_err)?;
    let time =
        check_time_orthogonality(&mask, &default_pairs(&mask), args.tol).map_err(failure_err)?;
    let mut reports = vec![report_json(&time), report_json(&frequency)];
    let mut all_pass = time.pass && frequency.pass;
    let mut normalization = serde_json::Value::Null;
    if mask.role() == MaskRole::Scaling {
        let lower = check_lower_bound(&mask, -0.25, 0.25, 12, 0.5, 257).map_err(failure_err)?;
        all_pass &= lower.pass;
        reports.push(report_json(&lower));
        let deviation = mask.symbol_normalization_deviation();
        all_pass &= deviation <= 1e-10;
        normalization = json!({ "deviation": deviation, "tolerance": 1e-10 });
    }
    let summary = json!({
        "mask": args.mask.display().to_string(),
        "M": mask.channels(),
        "N": mask.lattice().n(),
        "r": mask.lattice().r(),
        "role": mask.role(),
        "pass": all_pass,
        "checks": reports,
        "normalization": normalization,
        "symmetry_deviation": mask.symmetry_deviation(),
    });
    let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    match &args.out {
        Some(path) => {
            let mut w = create_writer(path)?;
            writeln!(w, "{text}").map_err(usage_err)?;
        }
        None => println!("{text}"),
    }
    if all_pass {
        Ok(())
    } else {
        Err(failure_err("certification failed; see report"))
    }
}

fn check_expectations(
    mask: &VectorMask,
    n: Option<i64>,
    r: Option<i64>,
    m: Option<usize>,
) -> CmdResult {
    if let Some(n) = n {
        if mask.lattice().n() != n {
            return Err(usage_err(format!("mask has N = {}, expected {n}", mask.lattice().n())));
        }
    }
    if let Some(r) = r {
        if mask.lattice().r() != r {
            return Err(usage_err(format!("mask has r = {}, expected {r}", mask.lattice().r())));
        }
    }
    if let Some(m) = m {
        if mask.channels() != m {
            return Err(usage_err(format!("mask has M = {}, expected {m}", mask.channels())));
        }
    }
    Ok(())
}

fn load_bank(args: &BuildArgs) -> CmdResult<MaskBank> {
    match (&args.mask, &args.bank) {
        (Some(mask_path), None) => {
            let mask = read_mask(open_reader(mask_path)?).map_err(usage_err)?;
            let grid = Grid::new(0.0, 1.0 / 1024.0, 1024).expect("static grid");
            complete_wavelet_masks(&mask, &grid).map_err(failure_err)
        }
        (None, Some(bank_path)) => read_bank(open_reader(bank_path)?).map_err(usage_err),
        _ => Err(usage_err("provide exactly one of --mask or --bank")),
    }
}

fn cmd_build(args: BuildArgs) -> CmdResult {
    if args.iterations == 0 {
        return Err(usage_err("iterations must be at least 1"));
    }
    if args.tol <= 0.0 {
        return Err(usage_err("tolerance must be positive"));
    }
    let bank = load_bank(&args)?;
    let params =
        LctParams::new(args.abcd.0, args.abcd.1, args.abcd.2, args.abcd.3).map_err(usage_err)?;
    let time_grid =
        Grid::new(args.grid.start, args.grid.step, args.grid.count).map_err(usage_err)?;
    let mut resolution = SystemResolution::matched(time_grid);
    resolution.iterations = args.iterations;
    resolution.filterbank_tol = args.tol;
    let system = build_system(params, bank, resolution).map_err(failure_err)?;

    std::fs::create_dir_all(&args.out).map_err(usage_err)?;
    let mut w = create_writer(&args.out.join("phi.vnmr"))?;
    write_dump(&mut w, system.phi_samples(), DumpDomain::Time).map_err(usage_err)?;
    for ell in 1..=system.wavelet_count() {
        let mut w = create_writer(&args.out.join(format!("psi-{ell}.vnmr")))?;
        write_dump(&mut w, system.psi_samples(ell).expect("wavelet cached"), DumpDomain::Time)
            .map_err(usage_err)?;
    }
    {
        let mut w = create_writer(&args.out.join("bank.json"))?;
        write_bank(&mut w, system.bank()).map_err(usage_err)?;
    }
    let meta = json!({
        "abcd": [args.abcd.0, args.abcd.1, args.abcd.2, args.abcd.3],
        "time_grid": { "start": time_grid.start, "step": time_grid.step, "count": time_grid.count },
        "iterations": args.iterations,
        "filterbank_tol": args.tol,
    });
    {
        let mut w = create_writer(&args.out.join("system.json"))?;
        writeln!(w, "{}", serde_json::to_string_pretty(&meta).expect("meta serializes"))
            .map_err(usage_err)?;
    }
    let summary = json!({
        "convergence_metric": system.convergence_metric(),
        "filterbank_residual": system.filterbank_report().residual,
        "gram_deviation": system.gram_deviation(),
        "wavelets": system.wavelet_count(),
    });
    let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    {
        let mut w = create_writer(&args.out.join("summary.json"))?;
        writeln!(w, "{text}").map_err(usage_err)?;
    }
    println!("{text}");
    Ok(())
}

fn cmd_build_wavelets(args: BuildWaveletsArgs) -> CmdResult {
    let mask = read_mask(open_reader(&args.mask)?).map_err(usage_err)?;
    let grid = Grid::new(0.0, 1.0 / 1024.0, 1024).expect("static grid");
    let bank = complete_wavelet_masks(&mask, &grid).map_err(failure_err)?;
    let mut w = create_writer(&args.out)?;
    write_bank(&mut w, &bank).map_err(usage_err)?;
    println!("wrote bank with {} wavelet masks", bank.wavelets.len());
    Ok(())
}

fn load_cache(dir: &Path) -> CmdResult<VnumraSystem> {
    let meta: serde_json::Value =
        serde_json::from_reader(open_reader(&dir.join("system.json"))?).map_err(usage_err)?;
    let abcd = abcd_from_meta(&meta)?;
    let params = LctParams::new(abcd[0], abcd[1], abcd[2], abcd[3]).map_err(usage_err)?;
    let tg = &meta["time_grid"];
    let time_grid = Grid::new(
        tg["start"].as_f64().ok_or_else(|| usage_err("bad time grid in cache"))?,
        tg["step"].as_f64().ok_or_else(|| usage_err("bad time grid in cache"))?,
        tg["count"].as_u64().ok_or_else(|| usage_err("bad time grid in cache"))? as usize,
    )
    .map_err(usage_err)?;
    let mut resolution = SystemResolution::matched(time_grid);
    if let Some(iters) = meta["iterations"].as_u64() {
        resolution.iterations = iters as usize;
    }
    if let Some(tol) = meta["filterbank_tol"].as_f64() {
        resolution.filterbank_tol = tol;
    }
    let bank = read_bank(open_reader(&dir.join("bank.json"))?).map_err(usage_err)?;
    let (phi, _) = read_dump(open_reader(&dir.join("phi.vnmr"))?).map_err(usage_err)?;
    let mut psis = Vec::new();
    for ell in 1..bank.lattice().dilation() {
        let (psi, _) =
            read_dump(open_reader(&dir.join(format!("psi-{ell}.vnmr")))?).map_err(usage_err)?;
        psis.push(psi);
    }
    load_system(params, bank, resolution, phi, psis).map_err(failure_err)
}

fn abcd_from_meta(meta: &serde_json::Value) -> CmdResult<[f64; 4]> {
    let arr = meta["abcd"].as_array().ok_or_else(|| usage_err("cache meta missing abcd"))?;
    let mut out = [0.0; 4];
    if arr.len() != 4 {
        return Err(usage_err("cache meta abcd must have four entries"));
    }
    for (slot, v) in out.iter_mut().zip(arr) {
        *slot = v.as_f64().ok_or_else(|| usage_err("cache meta abcd entries must be numbers"))?;
    }
    Ok(out)
}

fn parse_band(band: &str, wavelets: usize) -> CmdResult<GramTarget> {
    if band == "phi" {
        return Ok(GramTarget::Phi);
    }
    if let Some(ell) = band.strip_prefix("psi-") {
        if let Ok(ell) = ell.parse::<usize>() {
            if ell >= 1 && ell <= wavelets {
                return Ok(GramTarget::Psi(ell));
            }
        }
    }
    Err(usage_err(format!("unknown band {band:?}")))
}

fn write_gram_csv<W: Write>(mut w: W, gram: &CMat) -> std::io::Result<()> {
    for i in 0..gram.dim {
        for j in 0..gram.dim {
            let v = gram[(i, j)];
            writeln!(w, "{i},{j},{:.16e},{:.16e}", v.re, v.im)?;
        }
    }
    Ok(())
}

fn cmd_gram(args: GramArgs) -> CmdResult {
    if args.translates == 0 {
        return Err(usage_err("translates must be at least 1"));
    }
    let system = load_cache(&args.cache)?;
    let target = parse_band(&args.band, system.wavelet_count())?;
    let lambdas = gram_lambdas(&system, args.translates);
    let gram = gram_matrix(&system, &lambdas, target).map_err(failure_err)?;
    match &args.out {
        Some(path) => write_gram_csv(create_writer(path)?, &gram).map_err(usage_err)?,
        None => write_gram_csv(std::io::stdout().lock(), &gram).map_err(usage_err)?,
    }
    let deviation = gram.sub(&CMat::identity(gram.dim)).frobenius_norm();
    eprintln!("gram deviation from identity: {deviation:.3e}");
    Ok(())
}

fn read_signal(path: &Path) -> CmdResult<SampledVectorFunction> {
    let is_dump = path.extension().map(|e| e == "vnmr").unwrap_or(false);
    if is_dump {
        let (signal, _) = read_dump(open_reader(path)?).map_err(usage_err)?;
        Ok(signal)
    } else {
        read_signal_csv(open_reader(path)?).map_err(usage_err)
    }
}

fn cmd_transform(args: TransformArgs) -> CmdResult {
    if args.levels == 0 {
        return Err(usage_err("levels must be at least 1"));
    }
    let system = load_cache(&args.cache)?;
    let signal = read_signal(&args.signal)?;
    let pyramid = analyze(&system, &signal, args.levels).map_err(failure_err)?;
    {
        let mut w = create_writer(&args.out)?;
        write_pyramid(&mut w, &pyramid).map_err(usage_err)?;
    }
    let back = synthesize(&system, &pyramid).map_err(failure_err)?;
    let num: f64 = signal
        .values
        .iter()
        .zip(&back.values)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let den: f64 = signal.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let summary = json!({
        "levels": args.levels,
        "coefficients": pyramid.approx.len()
            + pyramid.details.iter().flatten().map(|b| b.len()).sum::<usize>(),
        "round_trip_relative_error": if den > 0.0 { num / den } else { 0.0 },
        "parseval_ratio": if den > 0.0 { pyramid.l2_norm() / signal.l2_norm() } else { 1.0 },
    });
    println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
    Ok(())
}

fn cmd_reconstruct(args: ReconstructArgs) -> CmdResult {
    let system = load_cache(&args.cache)?;
    let pyramid = read_pyramid(open_reader(&args.pyramid)?).map_err(usage_err)?;
    let signal = synthesize(&system, &pyramid).map_err(failure_err)?;
    let mut w = create_writer(&args.out)?;
    write_signal_csv(&mut w, &signal).map_err(usage_err)?;
    Ok(())
}

fn cmd_plot_data(args: PlotArgs) -> CmdResult {
    let system = load_cache(&args.cache)?;
    let mut out: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(create_writer(path)?),
        None => Box::new(std::io::stdout().lock()),
    };
    if args.band == "gram" {
        let lambdas = gram_lambdas(&system, 8);
        let gram = gram_matrix(&system, &lambdas, GramTarget::Phi).map_err(failure_err)?;
        write_gram_csv(&mut out, &gram).map_err(usage_err)?;
        return Ok(());
    }
    let target = parse_band(&args.band, system.wavelet_count())?;
    let samples = match target {
        GramTarget::Phi => system.phi_samples(),
        GramTarget::Psi(ell) => system.psi_samples(ell).expect("validated band"),
    };
    let grid = samples.grid;
    for k in 0..grid.count {
        let norm: f64 =
            (0..samples.channels).map(|c| samples.value(k, c).norm_sqr()).sum::<f64>().sqrt();
        writeln!(out, "{:.16e},{:.16e}", grid.point(k), norm).map_err(usage_err)?;
    }
    Ok(())
}
