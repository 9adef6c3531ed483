//! Command-line front end: bound-state spectra, kernel tabulation,
//! self-verification suites, and grid-convergence studies.

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use relbound::interaction::FormFactorSet;
use relbound::kernel::{kernel_element, ChannelBlock};
use relbound::kinematics::{KinPoint, TwoBodyConfig, ALPHA_FINE_STRUCTURE};
use relbound::solver::{converge, spectrum, ConvergenceReport, SpectrumResult};
use relbound::{verify, Error};

#[derive(Parser)]
#[command(
    name = "relbound",
    version,
    about = "Relativistic momentum-space bound states of a two-fermion electromagnetic system"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the radial equation for one channel block and print the spectrum.
    Spectrum(SpectrumArgs),
    /// Tabulate kernel matrix elements at given momentum pairs as CSV.
    DumpKernel(DumpKernelArgs),
    /// Run the internal cross-validation suites.
    Verify(VerifyArgs),
    /// Track the ground state across a sequence of grid sizes.
    Converge(ConvergeArgs),
}

/// System, channel and grid options shared by the solving commands.
#[derive(Args, Debug, Clone)]
struct PhysicsArgs {
    /// Named preset: hydrogen, muonic-hydrogen, equal-mass.
    #[arg(long)]
    system: Option<String>,
    /// Mass of particle 1 in MeV (overrides the preset).
    #[arg(long)]
    m1: Option<f64>,
    /// Mass of particle 2 in MeV (overrides the preset).
    #[arg(long)]
    m2: Option<f64>,
    /// Nuclear charge number.
    #[arg(long, short = 'Z')]
    z: Option<u32>,
    /// Coupling constant (defaults to the fine-structure constant).
    #[arg(long)]
    alpha: Option<f64>,
    /// Total angular momentum J.
    #[arg(long = "J", default_value_t = 0)]
    j: u32,
    /// Channel block: "a" (spin-singlet-dominated, ell = J) or
    /// "b" (triplet, ell = J -+ 1).
    #[arg(long, default_value = "a")]
    block: String,
    /// Comma-separated vertex structure names:
    /// point, dipole-proton, electron-anomalous, uehling.
    #[arg(long, default_value = "point")]
    form_factors: String,
    /// TOML file with the same keys as the flags; flags win on conflict.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct GridArgs {
    /// Number of quadrature nodes.
    #[arg(long = "N", default_value_t = 96)]
    n: usize,
    /// Grid scale in MeV, or "auto" for the Bohr momentum.
    #[arg(long, default_value = "auto")]
    k0: String,
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    #[command(flatten)]
    physics: PhysicsArgs,
    #[command(flatten)]
    grid: GridArgs,
    /// Write the machine-readable JSON result here.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Print JSON to stdout instead of the human table.
    #[arg(long, value_parser = ["human", "json"], default_value = "human")]
    format: String,
    /// Number of levels to show in the human table.
    #[arg(long, default_value_t = 5)]
    levels: usize,
}

#[derive(Args, Debug)]
struct DumpKernelArgs {
    #[command(flatten)]
    physics: PhysicsArgs,
    /// Momentum pairs "k:kp,k:kp,..." in MeV.
    #[arg(long, default_value = "")]
    pairs: String,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Run only the named suite: spinor, angular, gauge, moments, nr-limit.
    #[arg(long)]
    suite: Option<String>,
    /// RNG seed for the sampled checks.
    #[arg(long, default_value_t = 12345)]
    seed: u64,
}

#[derive(Args, Debug)]
struct ConvergeArgs {
    #[command(flatten)]
    physics: PhysicsArgs,
    /// Comma-separated grid sizes.
    #[arg(long, default_value = "48,64,80,96")]
    n_list: String,
    /// Grid scale in MeV, or "auto" for the Bohr momentum.
    #[arg(long, default_value = "auto")]
    k0: String,
    /// Print JSON instead of the human table.
    #[arg(long, value_parser = ["human", "json"], default_value = "human")]
    format: String,
}

/// Flat TOML config mirroring the physics flags.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    system: Option<String>,
    m1: Option<f64>,
    m2: Option<f64>,
    #[serde(alias = "Z")]
    z: Option<u32>,
    alpha: Option<f64>,
    #[serde(alias = "J")]
    j: Option<u32>,
    block: Option<String>,
    form_factors: Option<String>,
}

struct Physics {
    cfg: TwoBodyConfig,
    block: ChannelBlock,
    ffs: FormFactorSet,
}

fn load_file_config(path: &PathBuf) -> Result<FileConfig, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Error::config(format!("{}: {e}", path.display())))
}

fn resolve_physics(args: &PhysicsArgs) -> Result<Physics, Error> {
    let file = match &args.config {
        Some(path) => load_file_config(path)?,
        None => FileConfig::default(),
    };
    let system = args.system.clone().or(file.system);
    let base = match &system {
        Some(name) => TwoBodyConfig::preset(name)?,
        None => TwoBodyConfig::hydrogen(),
    };
    let cfg = TwoBodyConfig::new(
        args.m1.or(file.m1).unwrap_or(base.m1),
        args.m2.or(file.m2).unwrap_or(base.m2),
        args.z.or(file.z).unwrap_or(base.z),
        args.alpha.or(file.alpha).unwrap_or(if system.is_some() {
            base.alpha
        } else {
            ALPHA_FINE_STRUCTURE
        }),
    )?;
    let j = file
        .j
        .map_or(args.j, |fj| if args.j != 0 { args.j } else { fj });
    let block_name = if args.block != "a" {
        args.block.clone()
    } else {
        file.block.unwrap_or_else(|| args.block.clone())
    };
    let block = parse_block(j, &block_name)?;
    let ff_names = if args.form_factors != "point" {
        args.form_factors.clone()
    } else {
        file.form_factors
            .unwrap_or_else(|| args.form_factors.clone())
    };
    let ffs = FormFactorSet::from_names(&ff_names, cfg.alpha)?;
    Ok(Physics { cfg, block, ffs })
}

fn parse_block(j: u32, name: &str) -> Result<ChannelBlock, Error> {
    match name {
        "a" | "A" | "singlet" => Ok(ChannelBlock::block_a(j)),
        "b" | "B" | "triplet" => Ok(ChannelBlock::block_b(j)),
        other => ChannelBlock::from_name(j, other),
    }
}

fn parse_k0(spec: &str) -> Result<Option<f64>, Error> {
    if spec == "auto" {
        return Ok(None);
    }
    spec.parse::<f64>()
        .map(Some)
        .map_err(|_| Error::config(format!("k0 must be a number or \"auto\", got '{spec}'")))
}

fn parse_pairs(spec: &str) -> Result<Vec<KinPoint>, Error> {
    let mut out = Vec::new();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, kp) = item
            .split_once(':')
            .ok_or_else(|| Error::config(format!("pair '{item}' is not of the form k:kp")))?;
        let k: f64 = k
            .trim()
            .parse()
            .map_err(|_| Error::config(format!("bad momentum '{k}' in pair '{item}'")))?;
        let kp: f64 = kp
            .trim()
            .parse()
            .map_err(|_| Error::config(format!("bad momentum '{kp}' in pair '{item}'")))?;
        out.push(KinPoint::new(k, kp)?);
    }
    Ok(out)
}

#[derive(Serialize)]
struct SpectrumOutput<'a> {
    config: &'a TwoBodyConfig,
    form_factors: &'a FormFactorSet,
    block: &'a ChannelBlock,
    grid: GridSummary,
    masses: &'a [f64],
    binding: &'a [f64],
    bound_count: usize,
}

#[derive(Serialize)]
struct GridSummary {
    n: usize,
    k0: f64,
}

/// Human-readable energy with automatic eV/MeV selection.
fn fmt_energy(mev: f64) -> String {
    if mev.abs() < 0.01 {
        format!("{:14.9} eV", mev * 1e6)
    } else {
        format!("{mev:14.9} MeV")
    }
}

fn run_spectrum(args: &SpectrumArgs) -> Result<(), Error> {
    let phys = resolve_physics(&args.physics)?;
    let k0 = parse_k0(&args.grid.k0)?;
    let result = spectrum(&phys.cfg, &phys.block, args.grid.n, k0, &phys.ffs)?;
    let out = SpectrumOutput {
        config: &phys.cfg,
        form_factors: &phys.ffs,
        block: &phys.block,
        grid: GridSummary {
            n: result.grid.len(),
            k0: result.grid.scale,
        },
        masses: &result.masses,
        binding: &result.binding,
        bound_count: result.bound_count,
    };
    let json = serde_json::to_string_pretty(&out).map_err(|e| Error::numerical(e.to_string()))?;
    if let Some(path) = &args.output {
        std::fs::write(path, &json)
            .map_err(|e| Error::config(format!("cannot write {}: {e}", path.display())))?;
    }
    if args.format == "json" {
        println!("{json}");
        return Ok(());
    }
    print_spectrum_table(&phys.cfg, &phys.block, &result, args.levels);
    Ok(())
}

fn print_spectrum_table(
    cfg: &TwoBodyConfig,
    block: &ChannelBlock,
    result: &SpectrumResult,
    levels: usize,
) {
    println!(
        "system: m1 = {} MeV, m2 = {} MeV, Z = {}, alpha = {}",
        cfg.m1, cfg.m2, cfg.z, cfg.alpha
    );
    println!("block:  {}", block.label());
    println!(
        "grid:   N = {}, k0 = {:.6} MeV",
        result.grid.len(),
        result.grid.scale
    );
    println!("bound states found: {}", result.bound_count);
    println!(
        "{:>4}  {:>18}  {:>18}  {:>12}",
        "n", "binding", "Coulomb(n)", "ratio"
    );
    // ell_min offsets the principal quantum number of the lowest level
    let ell_min = block.channels.iter().map(|&(l, _)| l).min().unwrap_or(0);
    for (i, b) in result.binding.iter().take(levels).enumerate() {
        if *b >= 0.0 {
            break;
        }
        let n_principal = i as u32 + ell_min + 1;
        let coulomb = cfg.bohr_binding(n_principal);
        println!(
            "{:>4}  {}  {}  {:>12.8}",
            n_principal,
            fmt_energy(*b),
            fmt_energy(coulomb),
            b / coulomb
        );
    }
}

fn run_dump_kernel(args: &DumpKernelArgs) -> Result<(), Error> {
    let phys = resolve_physics(&args.physics)?;
    let pairs = parse_pairs(&args.pairs)?;
    let mut csv = String::from("J,S_out,l_out,S_in,l_in,k,kp,value\n");
    for p in &pairs {
        for a in 0..phys.block.len() {
            for b in 0..phys.block.len() {
                let (lo, so) = phys.block.channels[a];
                let (li, si) = phys.block.channels[b];
                let v = kernel_element(&phys.cfg, &phys.block, a, b, p, &phys.ffs)?;
                csv.push_str(&format!(
                    "{},{so},{lo},{si},{li},{:.17e},{:.17e},{:.17e}\n",
                    phys.block.j, p.k, p.kp, v
                ));
            }
        }
    }
    match &args.output {
        Some(path) => std::fs::write(path, &csv)
            .map_err(|e| Error::config(format!("cannot write {}: {e}", path.display())))?,
        None => {
            std::io::stdout()
                .write_all(csv.as_bytes())
                .map_err(|e| Error::config(e.to_string()))?;
        }
    }
    Ok(())
}

fn run_verify(args: &VerifyArgs) -> Result<bool, Error> {
    let seed = args.seed;
    let reports = match args.suite.as_deref() {
        None | Some("all") => verify::all_suites(seed)?,
        Some("spinor") => vec![verify::spinor_suite(seed, 16)?],
        Some("angular") => vec![verify::angular_suite(seed, 3)?],
        Some("gauge") => vec![verify::gauge_suite(seed, 6)?],
        Some("moments") => vec![verify::moment_suite(seed, 60)?],
        Some("nr-limit") | Some("nr_limit") => vec![verify::nr_limit_suite(1.0)?],
        Some(other) => {
            return Err(Error::config(format!(
                "unknown suite '{other}' (use spinor, angular, gauge, moments, nr-limit, all)"
            )))
        }
    };
    let mut all_pass = true;
    for rep in &reports {
        let status = if rep.passed { "PASS" } else { "FAIL" };
        println!("[{status}] {:<9} {}", rep.name, rep.detail);
        all_pass &= rep.passed;
    }
    Ok(all_pass)
}

fn run_converge(args: &ConvergeArgs) -> Result<(), Error> {
    let phys = resolve_physics(&args.physics)?;
    let k0 = parse_k0(&args.k0)?;
    let mut sizes = Vec::new();
    for item in args
        .n_list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
    {
        sizes.push(
            item.parse::<usize>()
                .map_err(|_| Error::config(format!("bad grid size '{item}'")))?,
        );
    }
    if sizes.is_empty() {
        return Err(Error::config("n-list is empty".to_string()));
    }
    let report = converge(&phys.cfg, &phys.block, &phys.ffs, &sizes, k0)?;
    if args.format == "json" {
        let json =
            serde_json::to_string_pretty(&report).map_err(|e| Error::numerical(e.to_string()))?;
        println!("{json}");
        return Ok(());
    }
    print_convergence_table(&report);
    Ok(())
}

fn print_convergence_table(report: &ConvergenceReport) {
    println!(
        "{:>6}  {:>18}  {:>14}",
        "N", "ground binding", "rel. change"
    );
    for (i, e) in report.entries.iter().enumerate() {
        let delta = if i == 0 {
            "-".to_string()
        } else {
            format!("{:.3e}", report.deltas[i - 1])
        };
        println!(
            "{:>6}  {}  {:>14}",
            e.n,
            fmt_energy(e.ground_binding),
            delta
        );
    }
    println!("converged: {}", report.converged);
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::Domain(_) => 2,
        Error::Numerical(_) => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Spectrum(args) => run_spectrum(args).map(|()| true),
        Command::DumpKernel(args) => run_dump_kernel(args).map(|()| true),
        Command::Verify(args) => run_verify(args),
        Command::Converge(args) => run_converge(args).map(|()| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(4),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
