//! `qrate`: achievable rates of quantized Gaussian channels from the command line.
//!
//! Exit codes: 0 success, 1 verification failure, 2 input error.

mod specfile;

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use qrate_core::asymptotics::lhat_family;
use qrate_core::lloyd::{lloyd_optimize, DEFAULT_MAX_ITER, DEFAULT_TOLERANCE};
use qrate_core::par::{with_thread_limit, Execution};
use qrate_core::rate::{coeff_a, coeff_b, gamma_compensated, gmi, mse_cells};
use qrate_core::sweep::{self, SweepFixed, SweepRequest, SweepTable, SweepVariable};
use qrate_core::uniform_opt::{one_bit_mmse_step, table, table_row, MAX_TABLE_BITS};
use qrate_core::verify::{self, Suite, VerifyOptions};
use qrate_core::{Channel, ScaleMode};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "qrate", version, about = "Achievable rates and optimal designs for quantized Gaussian channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact GMI report of a quantizer spec file at one SNR.
    Rate(RateArgs),
    /// Optimal uniform designs for b = 1..max-bits as CSV.
    Table1(TableArgs),
    /// One-dimensional parameter sweep as CSV.
    #[command(long_about = SWEEP_HELP)]
    Sweep(SweepArgs),
    /// Optimal uniform design for a resolution, or a Lloyd quantizer.
    Optimize(OptimizeArgs),
    /// Cross-check the analytic formulas against Monte Carlo simulation.
    Verify(VerifyArgs),
}

const SWEEP_HELP: &str = "One-dimensional parameter sweep as CSV (one row per grid point).

Variables and required fixed parameters:
  loading_factor  --bits, --snr-db       uniform quantizer with step L/K
  snr_db          --spec or --bits       given spec, else optimal uniform
  bits            --snr-db               optimal uniform design per row
  gain_scale      --spec or --bits, --snr-db

Columns (rates in bits per complex channel use):
  loading_factor: loading_factor, step, gamma, mse, gmi_bits, capacity_bits,
                  rate_loss_bits, aqnm_bits
                  [--approx: mse_hat, mse_hat_loss_bits, overload_loss_approx_bits,
                   granular_loss_approx_bits, underload_gmi_approx_bits, gamma_bar]
  snr_db:         snr_db, gamma, gmi_bits, capacity_bits, saturation_bits, aqnm_bits
                  [--approx: gmi_hat_bits]
  bits:           bits, l_star, step_star, mmse, max_gmi_bits, capacity_bits,
                  saturation_bits
                  [--approx: gmi_hat_bits, sat_hat_bits, lhat0, lhat_lin]
  gain_scale:     gain_scale, gamma, mse, gmi_bits, aqnm_bits

Values are written with 17 significant digits; unavailable entries are NaN.";

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct RateArgs {
    /// Quantizer spec file (JSON).
    spec: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    snr_db: f64,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args)]
struct TableArgs {
    #[arg(long, default_value_t = 12)]
    max_bits: u32,
    /// Write to a file instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum CliScaleMode {
    ThresholdsOnly,
    ThresholdsAndLevels,
}

#[derive(Args)]
struct SweepArgs {
    /// loading_factor, snr_db, bits or gain_scale.
    #[arg(long)]
    variable: String,
    /// Evenly spaced grid START:STOP:N.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "grid_values")]
    grid: Option<String>,
    /// Space the --grid points logarithmically.
    #[arg(long, requires = "grid")]
    grid_log: bool,
    /// Explicit comma-separated grid.
    #[arg(long, allow_hyphen_values = true)]
    grid_values: Option<String>,
    #[arg(long)]
    bits: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    snr_db: Option<f64>,
    /// Quantizer spec file for snr_db and gain_scale sweeps.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "thresholds-and-levels")]
    scale_mode: CliScaleMode,
    /// Add closed-form approximation columns.
    #[arg(long)]
    approx: bool,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Target {
    /// Optimal uniform quantizer with 2^bits levels.
    #[arg(long)]
    bits: Option<u32>,
    /// Lloyd quantizer with 2K levels.
    #[arg(long, value_name = "K")]
    lloyd: Option<usize>,
}

#[derive(Args)]
struct OptimizeArgs {
    #[command(flatten)]
    target: Target,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum CliSuite {
    Quick,
    Full,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value = "quick")]
    suite: CliSuite,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Override the suite's sample count per case.
    #[arg(long)]
    samples: Option<u64>,
    /// Offset added to every analytic gamma; a negative control.
    #[arg(long, hide = true, default_value_t = 0.0, allow_hyphen_values = true)]
    corrupt_gamma: f64,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

/// Full-precision, locale-independent number for CSV.
fn csv_num(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else {
        format!("{x:.16e}")
    }
}

fn open_output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(
            std::fs::File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

#[derive(Serialize)]
struct RateOutput<'a> {
    name: Option<&'a str>,
    snr_db: f64,
    #[serde(flatten)]
    report: qrate_core::RateReport,
}

fn cmd_rate(args: &RateArgs) -> Result<ExitCode> {
    let file = specfile::read(&args.spec)?;
    let ch = Channel::from_db(args.snr_db)?;
    let report = gmi(&file.spec, ch)?;
    match args.format {
        Format::Json => print_json(&RateOutput { name: file.name.as_deref(), snr_db: args.snr_db, report })?,
        Format::Text => {
            let mut out = io::stdout().lock();
            let q = &file.spec;
            writeln!(out, "quantizer       {} (K = {}, {:.3} bits)", file.name.as_deref().unwrap_or("-"), q.half_levels(), q.resolution_bits())?;
            writeln!(out, "snr             {:.4} dB", args.snr_db)?;
            writeln!(out, "A               {:.12}", report.coeff_a)?;
            writeln!(out, "B               {:.12}", report.coeff_b)?;
            writeln!(out, "gamma           {:.12e}", report.gamma)?;
            writeln!(out, "effective snr   {:.4} dB", 10.0 * report.effective_snr.log10())?;
            writeln!(out, "capacity        {:.6} bits", report.capacity.bits())?;
            writeln!(out, "gmi             {:.6} bits", report.gmi.bits())?;
            writeln!(out, "rate loss       {:.6} bits", report.rate_loss.bits())?;
            writeln!(out, "saturation      {:.6} bits", report.saturation.bits())?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_table1(args: &TableArgs) -> Result<ExitCode> {
    let rows = table(args.max_bits, Execution::Parallel)?;
    let mut w = csv::Writer::from_writer(open_output(&args.output)?);
    w.write_record([
        "bits",
        "half_levels",
        "l_star",
        "step_star",
        "mmse",
        "mmse_approx",
        "snr_q_db",
        "saturation_bits",
        "saturation_approx_bits",
    ])?;
    for r in rows {
        let mut rec = vec![r.bits.to_string(), r.half_levels.to_string()];
        rec.extend(
            [r.l_star, r.step_star, r.mmse, r.mmse_approx, r.snr_q_db, r.saturation_bits, r.saturation_approx_bits]
                .map(csv_num),
        );
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn parse_grid(args: &SweepArgs) -> Result<Vec<f64>> {
    if let Some(values) = &args.grid_values {
        return values
            .split(',')
            .map(|s| s.trim().parse::<f64>().with_context(|| format!("invalid grid value `{s}`")))
            .collect();
    }
    let Some(spec) = &args.grid else {
        bail!("one of --grid or --grid-values is required");
    };
    let parts: Vec<&str> = spec.split(':').collect();
    let [start, stop, n] = parts[..] else {
        bail!("--grid expects START:STOP:N, got `{spec}`");
    };
    let start: f64 = start.parse().with_context(|| format!("invalid grid start `{start}`"))?;
    let stop: f64 = stop.parse().with_context(|| format!("invalid grid stop `{stop}`"))?;
    let n: usize = n.parse().with_context(|| format!("invalid grid size `{n}`"))?;
    if n == 0 {
        bail!("grid size must be positive");
    }
    if n == 1 {
        return Ok(vec![start]);
    }
    if args.grid_log && !(start > 0.0 && stop > 0.0) {
        bail!("--grid-log needs positive endpoints");
    }
    let t = |i: usize| i as f64 / (n - 1) as f64;
    Ok((0..n)
        .map(|i| {
            if args.grid_log {
                start * (stop / start).powf(t(i))
            } else {
                start + (stop - start) * t(i)
            }
        })
        .collect())
}

fn write_table(t: &SweepTable, out: Box<dyn Write>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&t.columns)?;
    for row in &t.rows {
        w.write_record(row.iter().map(|&x| csv_num(x)))?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<ExitCode> {
    let variable: SweepVariable = args.variable.parse()?;
    let spec = args.spec.as_deref().map(specfile::read).transpose()?.map(|f| f.spec);
    let req = SweepRequest {
        variable,
        grid: parse_grid(args)?,
        fixed: SweepFixed {
            bits: args.bits,
            snr_db: args.snr_db,
            spec,
            scale_mode: match args.scale_mode {
                CliScaleMode::ThresholdsOnly => ScaleMode::ThresholdsOnly,
                CliScaleMode::ThresholdsAndLevels => ScaleMode::ThresholdsAndLevels,
            },
            approximations: args.approx,
        },
    };
    let t = sweep::run(&req, Execution::Parallel)?;
    write_table(&t, open_output(&args.output)?)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct UniformOutput {
    design: qrate_core::uniform_opt::UniformDesignRow,
    approximations: Vec<qrate_core::asymptotics::ApproxReport>,
    note: Option<String>,
}

#[derive(Serialize)]
struct LloydOutput {
    half_levels: usize,
    thresholds: Vec<f64>,
    levels: Vec<f64>,
    iterations: usize,
    converged: bool,
    final_change: f64,
    mse: f64,
    gamma: f64,
    a_over_b: f64,
}

fn cmd_optimize(args: &OptimizeArgs) -> Result<ExitCode> {
    if let Some(bits) = args.target.bits {
        if bits == 0 || bits > MAX_TABLE_BITS {
            bail!("--bits must be in 1..={MAX_TABLE_BITS}, got {bits}");
        }
        let design = table_row(bits)?;
        let approximations = if design.half_levels >= 2 { lhat_family(design.half_levels)? } else { vec![] };
        let note = (bits == 1).then(|| {
            format!(
                "gain control is unnecessary: gamma = 1 - 2/pi for every step; the MSE-optimal step is {:.4}",
                one_bit_mmse_step()
            )
        });
        let out = UniformOutput { design, approximations, note };
        match args.format {
            Format::Json => print_json(&out)?,
            Format::Text => {
                let d = &out.design;
                println!("bits            {}", d.bits);
                println!("K               {}", d.half_levels);
                println!("L*              {:.6}", d.l_star);
                println!("step*           {:.6e}", d.step_star);
                println!("mmse            {:.6e}", d.mmse);
                println!("SNR_q           {:.4} dB", d.snr_q_db);
                println!("saturation      {:.4} bits", d.saturation_bits);
                for a in &out.approximations {
                    match (a.value, a.abs_error) {
                        (Some(v), Some(e)) => println!("{:<15} {v:.6} (error {e:.2e})", a.name),
                        _ => println!("{:<15} undefined", a.name),
                    }
                }
                if let Some(n) = &out.note {
                    println!("note: {n}");
                }
            }
        }
    } else if let Some(k) = args.target.lloyd {
        let r = lloyd_optimize(k, DEFAULT_TOLERANCE, DEFAULT_MAX_ITER)?;
        let out = LloydOutput {
            half_levels: k,
            thresholds: r.spec.thresholds().to_vec(),
            levels: r.spec.levels().to_vec(),
            iterations: r.iterations,
            converged: r.converged,
            final_change: r.final_change,
            mse: mse_cells(&r.spec),
            gamma: gamma_compensated(&r.spec)?,
            a_over_b: coeff_a(&r.spec) / coeff_b(&r.spec)?,
        };
        match args.format {
            Format::Json => print_json(&out)?,
            Format::Text => {
                let list = |v: &[f64]| v.iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>().join(", ");
                println!("K               {}", out.half_levels);
                println!("thresholds      {}", list(&out.thresholds));
                println!("levels          {}", list(&out.levels));
                println!("iterations      {} (converged: {})", out.iterations, out.converged);
                println!("mse             {:.6e}", out.mse);
                println!("gamma           {:.6e}", out.gamma);
                println!("A/B             {:.12}", out.a_over_b);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: &VerifyArgs) -> Result<ExitCode> {
    let suite = match args.suite {
        CliSuite::Quick => Suite::Quick,
        CliSuite::Full => Suite::Full,
    };
    let mut opts = VerifyOptions::new(suite, args.seed);
    if let Some(n) = args.samples {
        opts.samples = n;
    }
    opts.corrupt_gamma = args.corrupt_gamma;
    let report = verify::run(&opts)?;
    match args.format {
        Format::Json => print_json(&report)?,
        Format::Text => {
            for c in &report.checks {
                println!(
                    "{} {:<32} {:<9} analytic {:.8e} simulated {:.8e} se {:.2e} z {:.2}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.case,
                    c.quantity,
                    c.analytic,
                    c.simulated,
                    c.std_error,
                    c.z
                );
            }
            let failed = report.failures().count();
            println!(
                "{} of {} checks passed ({} samples per case, seed {})",
                report.checks.len() - failed,
                report.checks.len(),
                report.samples,
                report.seed
            );
        }
    }
    if report.all_passed() {
        Ok(ExitCode::SUCCESS)
    } else {
        for c in report.failures() {
            eprintln!("verification failed: {} {} (z = {:.2})", c.case, c.quantity, c.z);
        }
        Ok(ExitCode::from(1))
    }
}

fn thread_limit() -> Result<Option<usize>> {
    match std::env::var("QRATE_THREADS") {
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => bail!("QRATE_THREADS must be a positive integer, got `{s}`"),
        },
        Err(_) => Ok(None),
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let threads = thread_limit()?;
    with_thread_limit(threads, move || match &cli.command {
        Command::Rate(a) => cmd_rate(a),
        Command::Table1(a) => cmd_table1(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Optimize(a) => cmd_optimize(a),
        Command::Verify(a) => cmd_verify(a),
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
