//! Command-line runner. Each run writes a manifest next to its output
//! (`<output>.manifest.json`, or `ope-meso.manifest.json` in the working
//! directory when the output goes to stdout) that `replay` turns back into the
//! same run.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::acceptance::Suite;
use crate::cumulant::{convergence_sweep, cumulant_report, write_reports_csv, EdgeConfig, Margin, SweepOptions, M_MAX};
use crate::ensemble::{check_hypotheses, EnsembleSpec, Family, Side};
use crate::error::{Error, Result};
use crate::limit::{fit_resolvent_approximation, sigma2_quadrature, sigma2_residue, Grid, LimitVariance};
use crate::sampler::{empirical_statistic, read_batch, sample_spectra, sample_statistic, write_batch, SampleBatch};
use crate::testfn::{parse_complex, TestFunction};
use crate::tridiag::decay_study;

pub const SCHEMA: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum VarianceMethod {
    Residue,
    Quadrature,
    Both,
}

/// A fully resolved run; this is what the manifest stores.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub schema: u32,
    #[serde(flatten)]
    pub command: Command,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub threads: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    Cumulants {
        ensemble: EnsembleSpec,
        edge: EdgeConfig,
        f: TestFunction,
        n_list: Vec<usize>,
        m_max: usize,
        margin: Margin,
        margin_factor: f64,
        two_sided: bool,
    },
    VarianceLimit {
        f: TestFunction,
        side: Side,
        method: VarianceMethod,
        tol: f64,
    },
    Decay {
        n_alpha: Vec<f64>,
        eta: Complex64,
        size: usize,
    },
    Hypotheses {
        ensemble: EnsembleSpec,
        edge: EdgeConfig,
        n_list: Vec<usize>,
    },
    Sample {
        ensemble: EnsembleSpec,
        edge: EdgeConfig,
        f: TestFunction,
        n: usize,
        count: usize,
        seed: u64,
        save: Option<PathBuf>,
        from: Vec<PathBuf>,
        exact: bool,
    },
    Fit {
        f: TestFunction,
        poles: usize,
        height: f64,
        support: Option<(f64, f64)>,
        grid: Grid,
    },
    Selftest {
        only: Vec<u8>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: u32,
    pub config: RunConfig,
    pub version: String,
    pub git_describe: Option<String>,
    pub started_unix: u64,
    pub wallclock_seconds: f64,
    pub outputs: Vec<PathBuf>,
}

#[derive(Parser, Debug)]
#[command(name = "ope-meso", version, about = "Mesoscopic edge statistics of orthogonal polynomial ensembles")]
pub struct Cli {
    /// Worker threads (default: all cores)
    #[arg(long, global = true, env = "OPE_MESO_THREADS")]
    threads: Option<usize>,
    /// Output file (default: stdout)
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Manifest path (default: next to the output)
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Args, Debug)]
struct EnsembleArgs {
    /// chebyshev2, modified_jacobi, laguerre, hermite, freud, tricomi_carlitz, krawtchouk, hahn, log_singular
    #[arg(long, default_value = "chebyshev2")]
    ensemble: String,
    /// Family parameter, repeatable: --param gamma=1.5
    #[arg(long = "param", value_parser = parse_param)]
    params: Vec<(String, f64)>,
}

impl EnsembleArgs {
    fn resolve(&self) -> Result<EnsembleSpec> {
        let family =
            Family::parse(&self.ensemble).ok_or_else(|| Error::Config(format!("unknown ensemble `{}`", self.ensemble)))?;
        let params: BTreeMap<String, f64> = self.params.iter().cloned().collect();
        EnsembleSpec::new(family, params)
    }
}

#[derive(Args, Debug)]
struct EdgeArgs {
    #[arg(long, value_parser = parse_side, default_value = "right")]
    side: Side,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value_t = 0.2)]
    epsilon: f64,
    /// Zoom point (default: the finite-n edge of each n)
    #[arg(long, allow_negative_numbers = true)]
    x0: Option<f64>,
}

impl EdgeArgs {
    fn resolve(&self) -> EdgeConfig {
        EdgeConfig {
            side: self.side,
            alpha: self.alpha,
            epsilon: self.epsilon,
            x0: self.x0,
        }
    }
}

#[derive(Subcommand, Debug)]
enum CliCommand {
    /// Exact scaled cumulants over a list of n
    Cumulants {
        #[command(flatten)]
        ensemble: EnsembleArgs,
        #[command(flatten)]
        edge: EdgeArgs,
        #[arg(long = "n", value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
        #[arg(long, default_value = "im:1/(x-i)")]
        f: String,
        #[arg(long, default_value_t = 4)]
        m_max: usize,
        /// default, reflection-free, or a fixed number of rows
        #[arg(long, default_value = "default", value_parser = parse_margin)]
        margin: Margin,
        #[arg(long, default_value_t = 1.0)]
        margin_factor: f64,
        #[arg(long)]
        two_sided: bool,
    },
    /// Limiting variance of a test function at an edge
    VarianceLimit {
        #[arg(long, default_value = "im:1/(x-i)")]
        f: String,
        #[arg(long, value_parser = parse_side, default_value = "right")]
        side: Side,
        #[arg(long, value_enum, default_value_t = VarianceMethod::Both)]
        method: VarianceMethod,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Edge and bulk decay rates of the free resolvent
    Decay {
        #[arg(long = "n-alpha", value_delimiter = ',', default_value = "100,1000,10000")]
        n_alpha: Vec<f64>,
        #[arg(long, default_value = "i")]
        eta: String,
        #[arg(long, default_value_t = 4000)]
        size: usize,
    },
    /// Slow-variation quantities of the recurrence coefficients near row n
    Hypotheses {
        #[command(flatten)]
        ensemble: EnsembleArgs,
        #[command(flatten)]
        edge: EdgeArgs,
        #[arg(long = "n", value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
    },
    /// Monte-Carlo moments of the linear statistic (hermite, laguerre)
    Sample {
        #[command(flatten)]
        ensemble: EnsembleArgs,
        #[command(flatten)]
        edge: EdgeArgs,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "im:1/(x-i)")]
        f: String,
        /// Store the spectra in a batch file
        #[arg(long)]
        save: Option<PathBuf>,
        /// Aggregate stored batch files instead of sampling
        #[arg(long, value_delimiter = ',')]
        from: Vec<PathBuf>,
        /// Also report the exact variance at the same n
        #[arg(long)]
        exact: bool,
    },
    /// Rational approximation of a compactly supported test function
    Fit {
        #[arg(long, default_value = "bump")]
        f: String,
        #[arg(long, default_value_t = 20)]
        poles: usize,
        #[arg(long, default_value_t = 0.25)]
        height: f64,
        /// lo,hi (default: the support of the built-in shape)
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        support: Vec<f64>,
        /// lo,hi,intervals
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "-6,6,1200")]
        grid: Vec<f64>,
    },
    /// Run the acceptance suite
    Selftest {
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
    },
    /// Re-run the configuration stored in a manifest
    Replay {
        #[arg(value_name = "MANIFEST")]
        stored: PathBuf,
    },
}

fn parse_param(s: &str) -> std::result::Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or("expected key=value")?;
    let v = v.parse::<f64>().map_err(|e| e.to_string())?;
    Ok((k.trim().to_string(), v))
}

fn parse_side(s: &str) -> std::result::Result<Side, String> {
    Side::parse(s).ok_or_else(|| format!("unknown side `{s}`"))
}

fn parse_margin(s: &str) -> std::result::Result<Margin, String> {
    match s {
        "default" => Ok(Margin::Default),
        "reflection-free" => Ok(Margin::ReflectionFree),
        n => n
            .parse()
            .map(Margin::Fixed)
            .map_err(|_| format!("margin must be default, reflection-free or an integer, not `{n}`")),
    }
}

fn test_function(s: &str) -> Result<TestFunction> {
    s.parse()
}

impl Cli {
    /// Resolves flags into a [`RunConfig`]; `Replay` loads the stored one.
    pub fn into_config(self) -> Result<(RunConfig, Option<PathBuf>)> {
        let command = match self.command {
            CliCommand::Replay { stored } => {
                let text = std::fs::read_to_string(&stored)?;
                let m: Manifest = serde_json::from_str(&text)?;
                return Ok((m.config, self.manifest));
            }
            CliCommand::Cumulants {
                ensemble,
                edge,
                n_list,
                f,
                m_max,
                margin,
                margin_factor,
                two_sided,
            } => Command::Cumulants {
                ensemble: ensemble.resolve()?,
                edge: edge.resolve(),
                f: test_function(&f)?,
                n_list,
                m_max,
                margin,
                margin_factor,
                two_sided,
            },
            CliCommand::VarianceLimit { f, side, method, tol } => Command::VarianceLimit {
                f: test_function(&f)?,
                side,
                method,
                tol,
            },
            CliCommand::Decay { n_alpha, eta, size } => Command::Decay {
                n_alpha,
                eta: parse_complex(&eta)?,
                size,
            },
            CliCommand::Hypotheses { ensemble, edge, n_list } => Command::Hypotheses {
                ensemble: ensemble.resolve()?,
                edge: edge.resolve(),
                n_list,
            },
            CliCommand::Sample {
                ensemble,
                edge,
                n,
                count,
                seed,
                f,
                save,
                from,
                exact,
            } => Command::Sample {
                ensemble: ensemble.resolve()?,
                edge: edge.resolve(),
                f: test_function(&f)?,
                n,
                count,
                seed,
                save,
                from,
                exact,
            },
            CliCommand::Fit {
                f,
                poles,
                height,
                support,
                grid,
            } => Command::Fit {
                f: test_function(&f)?,
                poles,
                height,
                support: match support.as_slice() {
                    [] => None,
                    [a, b] => Some((*a, *b)),
                    _ => return Err(Error::Config("--support takes lo,hi".into())),
                },
                grid: match grid.as_slice() {
                    [lo, hi, k] if *k >= 1.0 && k.fract() == 0.0 => Grid::new(*lo, *hi, *k as usize)?,
                    _ => return Err(Error::Config("--grid takes lo,hi,intervals".into())),
                },
            },
            CliCommand::Selftest { only } => Command::Selftest { only },
        };
        Ok((
            RunConfig {
                schema: SCHEMA,
                command,
                output: self.output,
                format: self.format,
                threads: self.threads,
            },
            self.manifest,
        ))
    }
}

fn check_n_list(n_list: &[usize]) -> Result<()> {
    if n_list.is_empty() || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("n list must be nonempty and strictly ascending".into()));
    }
    Ok(())
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA {
            return Err(Error::Config(format!("unsupported schema {}", self.schema)));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be positive".into()));
        }
        match &self.command {
            Command::Cumulants { n_list, m_max, f, .. } => {
                check_n_list(n_list)?;
                if !(2..=M_MAX).contains(m_max) {
                    return Err(Error::Config(format!("m_max must be in 2..={M_MAX}")));
                }
                f.resolvent()?;
            }
            Command::Hypotheses { n_list, .. } => check_n_list(n_list)?,
            Command::VarianceLimit { f, method, .. } => {
                if *method != VarianceMethod::Quadrature {
                    f.resolvent()?;
                }
            }
            Command::Fit { f, support, .. } => {
                if support.is_none() && f.support().is_none() {
                    return Err(Error::Config("fit needs --support for this test function".into()));
                }
            }
            Command::Sample { from, save, .. } => {
                if !from.is_empty() && save.is_some() {
                    return Err(Error::Config("--save and --from are exclusive".into()));
                }
            }
            Command::Decay { .. } | Command::Selftest { .. } => {}
        }
        Ok(())
    }
}

/// What a run produced: the bytes for the output and the process exit code.
struct Produced {
    body: Vec<u8>,
    exit: i32,
}

fn json_body(value: serde_json::Value) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(&value)?;
    v.push(b'\n');
    Ok(v)
}

fn csv_body<F: FnOnce(&mut csv::Writer<&mut Vec<u8>>) -> Result<()>>(fill: F) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        fill(&mut w)?;
        w.flush()?;
    }
    Ok(buf)
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn variance_rows(rows: &[LimitVariance], format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Json if rows.len() == 1 => {
            let mut v = serde_json::to_value(rows[0])?;
            v["schema"] = json!(SCHEMA);
            json_body(v)
        }
        Format::Json => json_body(json!({ "schema": SCHEMA, "results": rows })),
        Format::Csv => csv_body(|w| {
            w.write_record(["value", "method", "side", "est_error"])?;
            for r in rows {
                let method = serde_json::to_value(r.method)?;
                w.write_record([
                    num(r.value),
                    method.as_str().unwrap_or_default().to_string(),
                    r.side.to_string(),
                    num(r.est_error),
                ])?;
            }
            Ok(())
        }),
    }
}

fn execute(config: &RunConfig) -> Result<Produced> {
    let format = config.format;
    let body = match &config.command {
        Command::Cumulants {
            ensemble,
            edge,
            f,
            n_list,
            m_max,
            margin,
            margin_factor,
            two_sided,
        } => {
            let opts = SweepOptions {
                m_max: *m_max,
                margin: *margin,
                margin_factor: *margin_factor,
                two_sided: *two_sided,
            };
            let reports = convergence_sweep(ensemble, edge, f.resolvent()?, n_list, &opts)?;
            match format {
                Format::Csv => {
                    let mut buf = Vec::new();
                    write_reports_csv(&reports, &mut buf)?;
                    buf
                }
                Format::Json => json_body(json!({ "schema": SCHEMA, "reports": reports }))?,
            }
        }
        Command::VarianceLimit { f, side, method, tol } => {
            let mut rows = vec![];
            if *method != VarianceMethod::Quadrature {
                rows.push(sigma2_residue(f.resolvent()?, *side));
            }
            if *method != VarianceMethod::Residue {
                rows.push(sigma2_quadrature(&|x| f.eval(x), *side, None, *tol)?);
            }
            variance_rows(&rows, format)?
        }
        Command::Decay { n_alpha, eta, size } => {
            let rows = decay_study(n_alpha, *eta, *size)?;
            match format {
                Format::Json => json_body(json!({ "schema": SCHEMA, "rows": rows }))?,
                Format::Csv => csv_body(|w| {
                    w.write_record(["n_alpha", "edge_rate", "bulk_rate", "predicted_edge_rate"])?;
                    for r in &rows {
                        w.write_record([num(r.n_alpha), num(r.edge_rate), num(r.bulk_rate), num(r.predicted_edge_rate)])?;
                    }
                    Ok(())
                })?,
            }
        }
        Command::Hypotheses { ensemble, edge, n_list } => {
            let reports = n_list
                .iter()
                .map(|&n| check_hypotheses(ensemble, n, &edge.at(ensemble, n)?, None))
                .collect::<Result<Vec<_>>>()?;
            match format {
                Format::Json => json_body(json!({ "schema": SCHEMA, "reports": reports }))?,
                Format::Csv => csv_body(|w| {
                    w.write_record(["n", "quantity", "max", "threshold", "pass"])?;
                    for r in &reports {
                        for (name, q) in [
                            ("slow_a", &r.slow_a),
                            ("slow_b", &r.slow_b),
                            ("second_difference", &r.second_difference),
                            ("edge_balance", &r.edge_balance),
                        ] {
                            w.write_record([r.n.to_string(), name.into(), num(q.max), num(q.threshold), q.pass.to_string()])?;
                        }
                    }
                    Ok(())
                })?,
            }
        }
        Command::Sample {
            ensemble,
            edge,
            f,
            n,
            count,
            seed,
            save,
            from,
            exact,
        } => {
            let zoom = edge.at(ensemble, *n)?;
            let eval = |x: f64| f.eval(x);
            let stats = if !from.is_empty() {
                let mut merged: Option<SampleBatch> = None;
                for path in from {
                    let b = read_batch(std::io::BufReader::new(std::fs::File::open(path)?))?;
                    match &mut merged {
                        None => merged = Some(b),
                        Some(m) => {
                            if m.ensemble != b.ensemble || m.n != b.n {
                                return Err(Error::Config(format!("{} holds a different ensemble or n", path.display())));
                            }
                            m.spectra.extend(b.spectra);
                        }
                    }
                }
                let merged = merged.expect("nonempty list");
                if merged.ensemble != *ensemble || merged.n != *n {
                    return Err(Error::Config("batch files do not match --ensemble / --n".into()));
                }
                empirical_statistic(&merged, &eval, &zoom)?
            } else if let Some(path) = save {
                let batch = sample_spectra(ensemble, *n, *count, *seed)?;
                write_batch(&batch, std::io::BufWriter::new(std::fs::File::create(path)?))?;
                empirical_statistic(&batch, &eval, &zoom)?
            } else {
                sample_statistic(ensemble, *n, *count, *seed, &eval, &zoom)?
            };
            let exact_variance = if *exact {
                Some(cumulant_report(ensemble, *n, &zoom, f.resolvent()?, &SweepOptions::default())?.scaled(2).re)
            } else {
                None
            };
            match format {
                Format::Json => {
                    let mut v = serde_json::to_value(stats)?;
                    v["schema"] = json!(SCHEMA);
                    v["x0"] = json!(zoom.x0);
                    v["exact_variance"] = json!(exact_variance);
                    json_body(v)?
                }
                Format::Csv => csv_body(|w| {
                    w.write_record(["count", "mean", "variance", "std_error", "skewness", "exact_variance"])?;
                    w.write_record([
                        stats.count.to_string(),
                        num(stats.mean),
                        num(stats.variance),
                        num(stats.std_error),
                        num(stats.skewness),
                        exact_variance.map(num).unwrap_or_default(),
                    ])?;
                    Ok(())
                })?,
            }
        }
        Command::Fit {
            f,
            poles,
            height,
            support,
            grid,
        } => {
            let support = support.or(f.support()).expect("validated");
            let r = fit_resolvent_approximation(&|x| f.eval(x), *poles, *height, support, grid)?;
            match format {
                Format::Json => json_body(json!({ "schema": SCHEMA, "fit": r }))?,
                Format::Csv => {
                    let mut buf = Vec::new();
                    r.write_csv(&mut buf)?;
                    buf
                }
            }
        }
        Command::Selftest { only } => {
            let suite = Suite::new();
            let mut outcomes = vec![];
            for id in 1..=12u8 {
                if only.is_empty() || only.contains(&id) {
                    let o = suite.run(id);
                    eprintln!("{o}");
                    outcomes.push(o);
                }
            }
            let exit = if outcomes.iter().all(|o| o.pass) { 0 } else { 1 };
            let body = match format {
                Format::Json => json_body(json!({ "schema": SCHEMA, "outcomes": outcomes }))?,
                Format::Csv => csv_body(|w| {
                    w.write_record(["id", "title", "pass", "detail", "seconds"])?;
                    for o in &outcomes {
                        w.write_record([o.id.to_string(), o.title.clone(), o.pass.to_string(), o.detail.clone(), format!("{:.3}", o.seconds)])?;
                    }
                    Ok(())
                })?,
            };
            return Ok(Produced { body, exit });
        }
    };
    Ok(Produced { body, exit: 0 })
}

fn git_describe() -> Option<String> {
    let out = std::process::Command::new("git")
        .args(["describe", "--always", "--dirty", "--tags"])
        .output()
        .ok()?;
    out.status
        .success()
        .then(|| String::from_utf8_lossy(&out.stdout).trim().to_string())
        .filter(|s| !s.is_empty())
}

fn default_manifest_path(output: Option<&Path>) -> PathBuf {
    match output {
        Some(p) => {
            let mut s = p.as_os_str().to_owned();
            s.push(".manifest.json");
            PathBuf::from(s)
        }
        None => PathBuf::from("ope-meso.manifest.json"),
    }
}

/// Validates, runs inside a pool of `threads` workers, writes the output and
/// the manifest, and returns the exit code.
pub fn run(config: &RunConfig, manifest_path: Option<&Path>) -> Result<i32> {
    config.validate()?;
    let started = Instant::now();
    let started_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let produced = match config.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(|| execute(config))?,
        None => execute(config)?,
    };
    let mut outputs = vec![];
    match &config.output {
        Some(path) => {
            std::fs::write(path, &produced.body)?;
            outputs.push(path.clone());
        }
        None => std::io::stdout().write_all(&produced.body)?,
    }
    if let Command::Sample { save: Some(p), .. } = &config.command {
        outputs.push(p.clone());
    }
    let manifest = Manifest {
        schema: SCHEMA,
        config: config.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        git_describe: git_describe(),
        started_unix,
        wallclock_seconds: started.elapsed().as_secs_f64(),
        outputs,
    };
    let path = manifest_path.map(Path::to_path_buf).unwrap_or_else(|| default_manifest_path(config.output.as_deref()));
    std::fs::write(&path, serde_json::to_vec_pretty(&manifest)?)?;
    Ok(produced.exit)
}

/// Entry point of the binary: parses `args`, runs, and maps errors to exit
/// codes (2 for configuration, 1 for numerical failures).
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = cli.into_config().and_then(|(config, manifest)| run(&config, manifest.as_deref()));
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(args: &[&str]) -> RunConfig {
        let mut full = vec!["ope-meso"];
        full.extend_from_slice(args);
        Cli::try_parse_from(full).unwrap().into_config().unwrap().0
    }

    #[test]
    fn cumulants_flags() {
        let c = config(&["cumulants", "--ensemble", "laguerre", "--param", "gamma=2", "--n", "100,200", "--side", "left", "--x0", "-0.5"]);
        match &c.command {
            Command::Cumulants { ensemble, n_list, edge, .. } => {
                assert_eq!(ensemble, &EnsembleSpec::laguerre(2.0).unwrap());
                assert_eq!(n_list, &vec![100, 200]);
                assert_eq!(edge.x0, Some(-0.5));
                assert_eq!(edge.side, Side::Left);
            }
            other => panic!("{other:?}"),
        }
        c.validate().unwrap();
    }

    #[test]
    fn config_json_round_trip() {
        for args in [
            vec!["cumulants", "--n", "10,20", "--margin", "reflection-free"],
            vec!["variance-limit", "--f", "re:2/(x-(1+2i))"],
            vec!["decay", "--eta", "1+i"],
            vec!["sample", "--ensemble", "hermite", "--n", "50", "--seed", "7"],
            vec!["fit", "--f", "hat", "--grid", "-3,3,300"],
            vec!["selftest", "--only", "2,3"],
        ] {
            let c = config(&args);
            let text = serde_json::to_string(&c).unwrap();
            let back: RunConfig = serde_json::from_str(&text).unwrap();
            assert_eq!(back, c, "{text}");
        }
    }

    #[test]
    fn invalid_configs() {
        let mut c = config(&["cumulants", "--n", "10,20"]);
        if let Command::Cumulants { n_list, .. } = &mut c.command {
            *n_list = vec![20, 10];
        }
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        let c = config(&["cumulants", "--n", "10", "--m-max", "7"]);
        assert_eq!(c.validate().unwrap_err().exit_code(), 2);
        let c = config(&["cumulants", "--n", "10", "--f", "bump"]);
        assert!(c.validate().is_err());
        let c = config(&["fit", "--f", "im:1/(x-i)"]);
        assert!(c.validate().is_err());
    }

    #[test]
    fn parse_errors_exit_two() {
        assert_eq!(main_with_args(["ope-meso", "cumulants"]), 2);
        assert_eq!(main_with_args(["ope-meso", "cumulants", "--n", "10", "--ensemble", "nope"]), 2);
        assert_eq!(main_with_args(["ope-meso", "cumulants", "--n", "10", "--margin", "wide"]), 2);
    }
}
