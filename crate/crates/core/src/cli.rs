//! The `mixpolar` command-line interface.

use std::ffi::OsString;
use std::fs::File;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::code_design::{
    block_error_bound_with, default_rate_grid, rate_curve_from, select_information_set_with, write_curve_csv,
    PeMetric,
};
use crate::construction::{build_layout, Scheme};
use crate::erasure_de::de_evolve;
use crate::error::Error;
use crate::kernels::{exponent_bounds_from, partial_distances, Kernel, MixedKernel};
use crate::polar_process::{
    martingale_check, polarization_profile, rate_of_polarization_profile, slln_tail_check, write_histogram_csv,
    write_rate_csv, z_bound_check, TailMode,
};
use crate::sc_codec::simulate_bler;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "mixpolar", version, about = "Mixed-kernel polar code experiments on the erasure channel")]
pub struct Cli {
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Record wall-clock time in outputs that have a time column.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SchemeArg {
    Mixed,
    Arikan,
    #[value(name = "rs4_top")]
    Rs4Top,
    All,
}

impl SchemeArg {
    fn schemes(self) -> Vec<Scheme> {
        match self {
            SchemeArg::Mixed => vec![Scheme::Mixed],
            SchemeArg::Arikan => vec![Scheme::Arikan],
            SchemeArg::Rs4Top => vec![Scheme::Rs4Top],
            SchemeArg::All => Scheme::ALL.to_vec(),
        }
    }

    fn single(self) -> Result<Scheme, CliError> {
        match self.schemes().as_slice() {
            [s] => Ok(*s),
            _ => Err(CliError::Usage("this subcommand needs a single --scheme".into())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MetricArg {
    Ambiguous,
    Guess,
}

impl From<MetricArg> for PeMetric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Ambiguous => PeMetric::Ambiguous,
            MetricArg::Guess => PeMetric::Guess,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Report {
    Martingale,
    Polarization,
    Rate,
    Slln,
    Zbound,
    All,
}

#[derive(Args, Debug)]
struct CodeArgs {
    #[arg(long, value_enum, default_value = "mixed")]
    scheme: SchemeArg,
    /// Block length is 4^n bits.
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
}

#[derive(Args, Debug)]
struct SizeArgs {
    /// Code rate; K = round(rate * N).
    #[arg(long, conflicts_with = "k")]
    rate: Option<f64>,
    /// Number of information bits.
    #[arg(long = "K", id = "k")]
    k: Option<usize>,
    /// Per-channel error probability used for the design.
    #[arg(long, value_enum, default_value = "ambiguous")]
    metric: MetricArg,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Partial distances and exponents of the built-in kernels.
    Kernels,
    /// Channel layout of a scheme.
    Layout {
        #[arg(long, value_enum, default_value = "mixed")]
        scheme: SchemeArg,
        #[arg(long)]
        n: usize,
    },
    /// Erasure density evolution dump.
    De(CodeArgs),
    /// Union bound on the block error probability versus rate.
    Curve {
        #[arg(long, value_enum, default_value = "all")]
        scheme: SchemeArg,
        #[arg(long, default_value_t = 7)]
        n: usize,
        #[arg(long, default_value_t = 0.5)]
        epsilon: f64,
        /// Comma-separated rates; 0.05..0.70 in steps of 0.05 by default.
        #[arg(long, value_delimiter = ',')]
        rate: Option<Vec<f64>>,
    },
    /// Information set for a target size.
    Select {
        #[command(flatten)]
        code: CodeArgs,
        #[command(flatten)]
        size: SizeArgs,
    },
    /// Monte-Carlo block error rate of SC decoding.
    Simulate {
        #[command(flatten)]
        code: CodeArgs,
        #[command(flatten)]
        size: SizeArgs,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Checks of the channel tree process of the mixed scheme.
    Process {
        #[arg(long, value_enum, default_value = "all")]
        report: Report,
        #[arg(long, default_value_t = 7)]
        n: usize,
        #[arg(long, default_value_t = 0.5)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long, default_value_t = 0.4)]
        beta: f64,
        /// Sampled paths for the time-average report.
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        /// Steps per sampled path.
        #[arg(long, default_value_t = 200)]
        steps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Sample the time average with the base kernel's law only.
        #[arg(long)]
        pre_glue_only: bool,
    },
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Lib(Error),
    Io(std::io::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.into())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.into())
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Lib(Error::CapacityExceeded { .. }) => EXIT_CAPACITY,
            CliError::Lib(
                Error::InvalidParameter(_) | Error::UnknownScheme(_) | Error::UnsupportedWidth(_),
            ) => EXIT_USAGE,
            CliError::Lib(_) | CliError::Io(_) => EXIT_FAILURE,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

/// Parses `args` (including the program name), runs the command and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let mut buf = Vec::new();
    pool.install(|| dispatch(cli, &mut buf))?;
    match &cli.out {
        Some(path) => File::create(path)?.write_all(&buf)?,
        None => std::io::stdout().write_all(&buf)?,
    }
    Ok(())
}

fn check_epsilon(epsilon: f64) -> Result<(), CliError> {
    if (0.0..=1.0).contains(&epsilon) {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--epsilon {epsilon} outside [0, 1]")))
    }
}

fn check_n(n: usize) -> Result<(), CliError> {
    if n >= 1 {
        Ok(())
    } else {
        Err(CliError::Usage("--n must be at least 1".into()))
    }
}

fn comment(out: &mut Vec<u8>, text: &str) -> Result<(), CliError> {
    writeln!(out, "# {text}")?;
    Ok(())
}

fn write_json<T: Serialize>(out: &mut Vec<u8>, value: &T) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn dispatch(cli: &Cli, out: &mut Vec<u8>) -> Result<(), CliError> {
    match &cli.command {
        Command::Kernels => kernels(cli.format.unwrap_or(Format::Csv), out),
        Command::Layout { scheme, n } => {
            check_n(*n)?;
            layout(scheme.single()?, *n, cli.format.unwrap_or(Format::Json), out)
        }
        Command::De(code) => {
            check_n(code.n)?;
            check_epsilon(code.epsilon)?;
            let layout = build_layout(code.scheme.single()?, code.n)?;
            let de = de_evolve(&layout, code.epsilon)?;
            match cli.format.unwrap_or(Format::Csv) {
                Format::Csv => {
                    comment(
                        out,
                        "erasure density evolution; I in bits per channel; channel_start_index is 1-based; p_<subgroup> = probability of that ambiguity subgroup (basis rows, first coordinate leftmost), NA when the width has no such subgroup",
                    )?;
                    de.write_csv(&mut *out)?;
                }
                Format::Json => {
                    let channels: Vec<Value> = de
                        .channels
                        .iter()
                        .map(|c| {
                            json!({
                                "indices": c.channel.indices(),
                                "width": c.channel.width,
                                "metrics": c.metrics,
                                "subgroups": c.state.entries().iter().map(|(h, p)| json!({"subgroup": h.label(), "p": p})).collect::<Vec<_>>(),
                            })
                        })
                        .collect();
                    write_json(
                        out,
                        &json!({"conventions": "I in bits per channel; probabilities of ambiguity subgroups", "scheme": de.scheme, "N": de.block_bits, "epsilon": de.epsilon, "channels": channels}),
                    )?;
                }
            }
            Ok(())
        }
        Command::Curve {
            scheme,
            n,
            epsilon,
            rate,
        } => {
            check_n(*n)?;
            check_epsilon(*epsilon)?;
            let grid = rate.clone().unwrap_or_else(default_rate_grid);
            if grid.iter().any(|r| !(0.0..=1.0).contains(r)) {
                return Err(CliError::Usage("rates must lie in [0, 1]".into()));
            }
            let mut points = Vec::new();
            for s in scheme.schemes() {
                let de = de_evolve(&build_layout(s, *n)?, *epsilon)?;
                points.extend(rate_curve_from(&de, &grid)?);
            }
            match cli.format.unwrap_or(Format::Csv) {
                Format::Csv => {
                    comment(
                        out,
                        "union bound on SC block error probability; N in bits; K = round(rate*N) information bits; bound = sum of per-channel ambiguity probabilities",
                    )?;
                    write_curve_csv(&points, &mut *out)?;
                }
                Format::Json => write_json(out, &json!({"conventions": "bound = sum of per-channel ambiguity probabilities", "points": points}))?,
            }
            Ok(())
        }
        Command::Select { code, size } => select(code, size, cli.format.unwrap_or(Format::Json), out),
        Command::Simulate {
            code,
            size,
            trials,
            seed,
        } => simulate(code, size, *trials, *seed, cli, out),
        Command::Process {
            report,
            n,
            epsilon,
            delta,
            beta,
            trials,
            steps,
            seed,
            pre_glue_only,
        } => {
            check_epsilon(*epsilon)?;
            let p = ProcessParams {
                n: *n,
                epsilon: *epsilon,
                delta: *delta,
                beta: *beta,
                paths: *trials,
                steps: *steps,
                seed: *seed,
                mode: if *pre_glue_only { TailMode::PreGlueOnly } else { TailMode::Full },
            };
            process(*report, &p, cli.format.unwrap_or(Format::Csv), out)
        }
    }
}

fn kernels(format: Format, out: &mut Vec<u8>) -> Result<(), CliError> {
    let mut rows = Vec::new();
    for k in [Kernel::g1(), Kernel::rs4(), Kernel::arikan(), Kernel::quaternary_arikan()] {
        let pd = partial_distances(&k)?;
        let e = exponent_bounds_from(&pd, k.ell());
        for g in 0..k.groups() {
            rows.push(json!({
                "kernel": k.name(),
                "L": k.total_bits(),
                "ell": k.ell(),
                "group": g + 1,
                "input_width": k.input_width(g),
                "d_min": pd.min[g],
                "d_max": pd.max[g],
                "E1": e.e1,
                "E2": e.e2,
            }));
        }
    }
    let mixed = MixedKernel::g1_rs4().exponent_bounds()?;
    match format {
        Format::Csv => {
            comment(
                out,
                "partial distances in output symbols per input group (groups 1-based); E1/E2 = mean of log_ell of d_min/d_max; mixed row gives the asymptotic exponents of the mixed construction",
            )?;
            let mut w = csv::Writer::from_writer(&mut *out);
            w.write_record(["kernel", "L", "ell", "group", "input_width", "d_min", "d_max", "E1", "E2"])?;
            for r in &rows {
                w.write_record([
                    r["kernel"].as_str().unwrap().to_string(),
                    r["L"].to_string(),
                    r["ell"].to_string(),
                    r["group"].to_string(),
                    r["input_width"].to_string(),
                    r["d_min"].to_string(),
                    r["d_max"].to_string(),
                    format!("{:.6}", r["E1"].as_f64().unwrap()),
                    format!("{:.6}", r["E2"].as_f64().unwrap()),
                ])?;
            }
            w.write_record([
                "mixed".to_string(),
                "NA".into(),
                "4".into(),
                "NA".into(),
                "NA".into(),
                "NA".into(),
                "NA".into(),
                format!("{:.6}", mixed.e1),
                format!("{:.6}", mixed.e2),
            ])?;
            w.flush()?;
        }
        Format::Json => write_json(
            out,
            &json!({"conventions": "partial distances in output symbols; exponents base ell", "groups": rows, "mixed": mixed}),
        )?,
    }
    Ok(())
}

fn layout(scheme: Scheme, n: usize, format: Format, out: &mut Vec<u8>) -> Result<(), CliError> {
    let layout = build_layout(scheme, n)?;
    let j = layout.to_json();
    match format {
        Format::Json => {
            let mut v = serde_json::to_value(&j)?;
            v["conventions"] = json!("channels in decoding order; indices are 1-based message bits; width-2 channels are glued pairs");
            write_json(out, &v)?;
        }
        Format::Csv => {
            comment(
                out,
                &format!(
                    "decoding order of channels; indices are 1-based message bits; N={} nu={} gamma={}",
                    j.block_bits, j.nu, j.gamma
                ),
            )?;
            let mut w = csv::Writer::from_writer(&mut *out);
            w.write_record(["position", "indices", "width"])?;
            for (p, c) in layout.channels().iter().enumerate() {
                let idx: Vec<String> = c.indices().iter().map(|i| i.to_string()).collect();
                w.write_record([(p + 1).to_string(), idx.join(" "), c.width.to_string()])?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

fn target_k(size: &SizeArgs, block_bits: usize) -> Result<usize, CliError> {
    match (size.rate, size.k) {
        (_, Some(k)) => Ok(k),
        (Some(r), None) if (0.0..=1.0).contains(&r) => Ok((r * block_bits as f64).round() as usize),
        (Some(r), None) => Err(CliError::Usage(format!("--rate {r} outside [0, 1]"))),
        (None, None) => Err(CliError::Usage("one of --rate or --K is required".into())),
    }
}

fn select(code: &CodeArgs, size: &SizeArgs, format: Format, out: &mut Vec<u8>) -> Result<(), CliError> {
    check_n(code.n)?;
    check_epsilon(code.epsilon)?;
    let layout = build_layout(code.scheme.single()?, code.n)?;
    let de = de_evolve(&layout, code.epsilon)?;
    let k = target_k(size, de.block_bits)?;
    let metric = size.metric.into();
    let set = select_information_set_with(&de, k, metric)?;
    if !set.is_exact() {
        eprintln!("warning: K = {k} is not achievable; using K = {}", set.k);
    }
    let bound = block_error_bound_with(&de, &set, metric);
    match format {
        Format::Json => {
            let channels = |ps: &[usize]| -> Vec<Vec<usize>> { ps.iter().map(|&p| de.channels[p].channel.indices()).collect() };
            write_json(
                out,
                &json!({
                    "conventions": "channels listed by 1-based message bit indices; frozen bits are zero",
                    "scheme": de.scheme,
                    "N": de.block_bits,
                    "epsilon": de.epsilon,
                    "metric": metric,
                    "requested_K": set.requested_k,
                    "K": set.k,
                    "exact": set.is_exact(),
                    "bound": bound,
                    "selected": channels(&set.selected),
                    "frozen": channels(&set.frozen),
                }),
            )?;
        }
        Format::Csv => {
            comment(
                out,
                &format!(
                    "information set; indices are 1-based message bits; requested_K={} K={} bound={:.17e}",
                    set.requested_k, set.k, bound
                ),
            )?;
            let mut w = csv::Writer::from_writer(&mut *out);
            w.write_record(["position", "indices", "width", "selected", "P_e"])?;
            for (p, c) in de.channels.iter().enumerate() {
                let idx: Vec<String> = c.channel.indices().iter().map(|i| i.to_string()).collect();
                let pe = match metric {
                    PeMetric::Ambiguous => c.metrics.pe_ambiguous,
                    PeMetric::Guess => c.metrics.pe_guess,
                };
                w.write_record([
                    (p + 1).to_string(),
                    idx.join(" "),
                    c.channel.width.to_string(),
                    set.selected.binary_search(&p).is_ok().to_string(),
                    format!("{pe:.17e}"),
                ])?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

fn simulate(code: &CodeArgs, size: &SizeArgs, trials: u64, seed: u64, cli: &Cli, out: &mut Vec<u8>) -> Result<(), CliError> {
    check_n(code.n)?;
    check_epsilon(code.epsilon)?;
    if trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    let scheme = code.scheme.single()?;
    let layout = build_layout(scheme, code.n)?;
    let de = de_evolve(&layout, code.epsilon)?;
    let k = target_k(size, de.block_bits)?;
    let set = select_information_set_with(&de, k, size.metric.into())?;
    if !set.is_exact() {
        eprintln!("warning: K = {k} is not achievable; using K = {}", set.k);
    }
    let start = Instant::now();
    let est = simulate_bler(&layout, &set, code.epsilon, trials, seed)?;
    let elapsed = if cli.timing {
        format!("{:.3}", start.elapsed().as_secs_f64())
    } else {
        "NA".to_string()
    };
    match cli.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            comment(
                out,
                "Monte-Carlo block error rate of SC decoding on the erasure channel; stderr = sqrt(p(1-p)/trials); elapsed_seconds is NA unless --timing",
            )?;
            let mut w = csv::Writer::from_writer(&mut *out);
            w.write_record(["scheme", "N", "K", "epsilon", "trials", "seed", "bler", "stderr", "elapsed_seconds"])?;
            w.write_record([
                scheme.to_string(),
                de.block_bits.to_string(),
                set.k.to_string(),
                code.epsilon.to_string(),
                trials.to_string(),
                seed.to_string(),
                format!("{:.17e}", est.bler),
                format!("{:.17e}", est.stderr),
                elapsed,
            ])?;
            w.flush()?;
        }
        Format::Json => write_json(
            out,
            &json!({
                "conventions": "stderr = sqrt(p(1-p)/trials)",
                "scheme": scheme, "N": de.block_bits, "K": set.k, "epsilon": code.epsilon,
                "trials": trials, "seed": seed, "bler": est.bler, "stderr": est.stderr,
                "elapsed_seconds": elapsed,
            }),
        )?,
    }
    Ok(())
}

struct ProcessParams {
    n: usize,
    epsilon: f64,
    delta: f64,
    beta: f64,
    paths: u64,
    steps: usize,
    seed: u64,
    mode: TailMode,
}

fn process(report: Report, p: &ProcessParams, format: Format, out: &mut Vec<u8>) -> Result<(), CliError> {
    let reports = match report {
        Report::All => vec![Report::Martingale, Report::Polarization, Report::Rate, Report::Slln, Report::Zbound],
        r => vec![r],
    };
    let mut json_out = serde_json::Map::new();
    for r in reports {
        match r {
            Report::Martingale => {
                let dev = martingale_check(p.epsilon, p.n)?;
                if format == Format::Csv {
                    comment(out, "report martingale: largest |I/width of node - branch-weighted mean over children|, exact tree of the mixed scheme")?;
                    let mut w = csv::Writer::from_writer(&mut *out);
                    w.write_record(["epsilon", "n", "max_deviation"])?;
                    w.write_record([p.epsilon.to_string(), p.n.to_string(), format!("{dev:.17e}")])?;
                    w.flush()?;
                }
                json_out.insert("martingale".into(), json!({"epsilon": p.epsilon, "n": p.n, "max_deviation": dev}));
            }
            Report::Polarization => {
                let profile = polarization_profile(p.epsilon, p.n, p.delta)?;
                if format == Format::Csv {
                    comment(out, "report polarization: probability that I_n (bits per input bit) lies strictly between delta and 1-delta")?;
                    let mut w = csv::Writer::from_writer(&mut *out);
                    w.write_record(["epsilon", "delta", "n", "mass"])?;
                    for (n, m) in profile.iter().enumerate() {
                        w.write_record([p.epsilon.to_string(), p.delta.to_string(), n.to_string(), format!("{m:.17e}")])?;
                    }
                    w.flush()?;
                }
                json_out.insert("polarization".into(), json!({"epsilon": p.epsilon, "delta": p.delta, "mass": profile}));
            }
            Report::Rate => {
                let profile = rate_of_polarization_profile(p.epsilon, p.n, p.beta)?;
                if format == Format::Csv {
                    comment(out, "report rate: probability that Z_n <= 2^(-4^(beta n)) and >= the same threshold; capacity in bits")?;
                    write_rate_csv(&profile, &mut *out)?;
                }
                json_out.insert("rate".into(), serde_json::to_value(&profile)?);
            }
            Report::Slln => {
                let s = slln_tail_check(p.steps, p.paths, p.seed, p.mode)?;
                if format == Format::Csv {
                    comment(out, "report slln: time average of log_4 of the partial distance of the branch taken, over sampled paths")?;
                    let mut w = csv::Writer::from_writer(&mut *out);
                    w.write_record(["n_steps", "paths", "seed", "mode", "mean", "std_dev"])?;
                    let mode = match p.mode {
                        TailMode::Full => "full",
                        TailMode::PreGlueOnly => "pre_glue_only",
                    };
                    w.write_record([
                        s.n_steps.to_string(),
                        s.paths.to_string(),
                        p.seed.to_string(),
                        mode.to_string(),
                        format!("{:.17e}", s.mean),
                        format!("{:.17e}", s.std_dev),
                    ])?;
                    w.flush()?;
                    drop(w);
                    comment(out, "report slln histogram: counts of path time averages per bin")?;
                    write_histogram_csv(&s, &mut *out)?;
                }
                json_out.insert("slln".into(), serde_json::to_value(&s)?);
            }
            Report::Zbound => {
                let z = z_bound_check(p.epsilon, p.n)?;
                if format == Format::Csv {
                    comment(out, "report zbound: violations of Zmax(child) <= 4^3 Zmax(parent)^Dmin and Zmin(child) >= 4^-6 Zmin(parent)^Dmax over all tree edges")?;
                    let mut w = csv::Writer::from_writer(&mut *out);
                    w.write_record(["epsilon", "n", "edges", "upper_violations", "lower_violations"])?;
                    w.write_record([
                        p.epsilon.to_string(),
                        p.n.to_string(),
                        z.edges.to_string(),
                        z.upper_violations.to_string(),
                        z.lower_violations.to_string(),
                    ])?;
                    w.flush()?;
                }
                json_out.insert("zbound".into(), serde_json::to_value(z)?);
            }
            Report::All => unreachable!("expanded above"),
        }
    }
    if format == Format::Json {
        json_out.insert("conventions".into(), json!("I_n in bits per input bit; exact quantities from erasure density evolution"));
        write_json(out, &Value::Object(json_out))?;
    }
    Ok(())
}
