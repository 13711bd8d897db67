use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use baudsync::io::{to_csv, write_text};
use baudsync::metrics::validate_loop_sign;
use baudsync::sim::{self, SweepAxis};
use baudsync::{Error, Result, RunConfig, TedKind};

#[derive(Parser)]
#[command(
    name = "baudsync",
    version,
    about = "Baud-spaced blind receiver simulator"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate one frame end to end and print the JSON report.
    Simulate(Common),
    /// Run one simulation per axis value and print a CSV table.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// `ted=all`, `ted=gardner,cma-full`, `snr=10,20`, `tau=-0.4:0.4:0.05`, `ppm=0,50`.
        #[arg(long)]
        axis: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Open-loop mean detector output over a grid of static timing offsets.
    Scurve {
        #[command(flatten)]
        common: Common,
        /// Grid as `start:stop:step` or a comma list.
        #[arg(long, default_value = "-0.4:0.4:0.05", allow_hyphen_values = true)]
        grid: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the receiver on a recorded `.iq` capture.
    Analyze {
        capture: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Print the effective configuration.
    DumpConfig {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Format::Toml)]
        format: Format,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Toml,
    Json,
}

#[derive(Args)]
struct Common {
    /// TOML or JSON configuration file.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Override any field, e.g. `--set impairments.snr_db=25`.
    #[arg(long = "set", value_name = "PATH=VALUE")]
    sets: Vec<String>,
    /// cma-full, cma-complex, cma-modified, gardner, abs, sign-mm or modified-abs.
    #[arg(long)]
    ted: Option<TedKind>,
    /// Timing loop gain; defaults depend on the detector.
    #[arg(long)]
    alpha_c: Option<f64>,
    /// Static timing offset in symbol periods.
    #[arg(long, allow_hyphen_values = true)]
    tau0: Option<f64>,
    /// Symbol-rate SNR (Es/N0) in dB; noiseless when absent.
    #[arg(long)]
    snr_db: Option<f64>,
    /// Seed for the PRBS source and the channel.
    #[arg(long)]
    seed: Option<u64>,
    /// Frame length in symbols.
    #[arg(long)]
    symbols: Option<usize>,
    /// Write the JSON report here as well as to stdout.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Write the receiver-input capture (`.iq` plus `.iq.json`).
    #[arg(long)]
    dump: Option<PathBuf>,
}

impl Common {
    fn config(&self) -> Result<RunConfig> {
        let base = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let mut v = serde_json::to_value(&base).expect("configuration serializes");
        for s in &self.sets {
            apply_set(&mut v, s)?;
        }
        let mut c: RunConfig =
            serde_json::from_value(v).map_err(|e| Error::Config(e.to_string()))?;
        if let Some(t) = self.ted {
            c.timing.ted = t;
        }
        if let Some(a) = self.alpha_c {
            c.timing.alpha_c = Some(a);
        }
        if let Some(t) = self.tau0 {
            c.impairments.tau0 = t;
        }
        if let Some(s) = self.snr_db {
            c.impairments.snr_db = Some(s);
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(n) = self.symbols {
            c.symbols = n;
        }
        if self.report.is_some() {
            c.outputs.report = self.report.clone();
        }
        if self.dump.is_some() {
            c.outputs.dump = self.dump.clone();
        }
        c.validate()?;
        Ok(c)
    }
}

/// `a.b.c=value`; the value is read as JSON and falls back to a string.
fn apply_set(root: &mut serde_json::Value, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("--set expects PATH=VALUE, got '{assignment}'")))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| serde_json::Value::String(raw.into()));
    let mut node = root;
    let keys: Vec<&str> = path.split('.').collect();
    for (i, k) in keys.iter().enumerate() {
        let obj = node.as_object_mut().ok_or_else(|| {
            Error::Config(format!("'{path}' does not name a configuration field"))
        })?;
        if i + 1 == keys.len() {
            obj.insert((*k).to_string(), value);
            return Ok(());
        }
        node = obj
            .get_mut(*k)
            .ok_or_else(|| Error::Config(format!("unknown configuration section '{k}'")))?;
    }
    Ok(())
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => write_text(p, text),
        None => stdout(text),
    }
}

/// Writes to stdout, treating a closed pipe as success.
fn stdout(text: &str) -> Result<()> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(source) if source.kind() != std::io::ErrorKind::BrokenPipe => Err(Error::Io {
            path: "<stdout>".into(),
            source,
        }),
        _ => Ok(()),
    }
}

fn report_exit(r: &baudsync::RunReport) -> Result<ExitCode> {
    let json = r.to_json();
    stdout(&format!("{json}\n"))?;
    if let Some(p) = &r.config.outputs.report {
        write_text(p, &json)?;
    }
    if r.is_ok() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("run failed: {}", r.error.as_deref().unwrap_or(&r.status));
        Ok(ExitCode::from(3))
    }
}

fn parse_grid(s: &str) -> Result<Vec<f64>> {
    match SweepAxis::parse(&format!("tau={s}"))? {
        SweepAxis::Tau(v) if !v.is_empty() => Ok(v),
        _ => Err(Error::Config("empty tau grid".into())),
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Simulate(common) => report_exit(&sim::cmd_simulate(&common.config()?)?),
        Cmd::Analyze { capture, common } => {
            report_exit(&sim::cmd_analyze(&capture, &common.config()?)?)
        }
        Cmd::Sweep { common, axis, out } => {
            let cfg = common.config()?;
            let rows = sim::cmd_sweep(&cfg, &SweepAxis::parse(&axis)?)?;
            emit(&to_csv(&rows)?, out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Scurve { common, grid, out } => {
            let cfg = common.config()?;
            let table = sim::cmd_scurve(&cfg, cfg.timing.ted, &parse_grid(&grid)?)?;
            emit(&to_csv(&table.points)?, out.as_deref())?;
            eprintln!(
                "{}: slope at zero {:.4e}, zero crossing {}",
                table.ted,
                table.slope_at_zero,
                table
                    .zero_crossing
                    .map_or_else(|| "none".to_string(), |z| format!("{z:.4}"))
            );
            validate_loop_sign(&table)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::DumpConfig { common, format } => {
            let cfg = common.config()?.resolved();
            match format {
                Format::Toml => stdout(&cfg.to_toml())?,
                Format::Json => stdout(&format!(
                    "{}\n",
                    serde_json::to_string_pretty(&cfg).expect("serializes")
                ))?,
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
