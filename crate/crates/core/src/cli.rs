//! Command-line pipelines: `search`, `build`, `circuit`, `simulate`, `fit`.
//!
//! Every artifact starts with a header carrying the full run configuration
//! and its SHA-256 hash; a JSON file passed with `--config` is merged over
//! the flags.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::circuit::{circuit_depth, emit_text, gen_circuit, Variant};
use crate::cxc::{build_c2, build_cxc, build_cxr, code_params, CatalogEntry, CxcCode, Family};
use crate::cyclic::{enumerate_cyclic_codes, write_tables_csv, FilterRules, SearchConfig, DEFAULT_ENUMERATION_CAP};
use crate::decoder::{DecoderConfig, OsdMode};
use crate::estimate::{fit_heuristic, simulate_memory, FitRecord, ResultRow};
use crate::gf2::CyclicPoly;
use crate::noise::{annotate_noise, build_memory_experiment, Basis, DetectorSet, MemoryExperiment, NoiseModel};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    ResourceCap(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Validation(_) => 2,
            CliError::ResourceCap(_) => 3,
        }
    }
}

fn invalid(e: impl std::fmt::Display) -> CliError {
    CliError::Validation(e.to_string())
}

/// Codes addressable by label, with their classical seeds.
pub const BUILTIN_CODES: &[(&str, Family, usize, &[usize])] = &[
    ("[[450,32,8]]", Family::C2, 15, &[0, 1, 4]),
    ("[[882,98,8]]", Family::C2, 21, &[0, 1, 3, 8]),
    ("[[882,50,10]]", Family::C2, 21, &[0, 1, 5]),
    ("[[336,20,6]]", Family::CxR, 28, &[0, 2, 4, 10]),
    ("[[336,14,8]]", Family::CxR, 21, &[0, 1, 3, 8]),
    ("[[240,8,8]]", Family::CxR, 15, &[0, 1, 4]),
    ("[[420,10,10]]", Family::CxR, 21, &[0, 1, 5]),
    ("[[620,20,10]]", Family::CxR, 31, &[0, 1, 2, 6, 27]),
];

fn build_family(family: Family, a: &CyclicPoly, b: Option<&CyclicPoly>) -> Result<CxcCode, CliError> {
    match family {
        Family::C2 => build_c2(a),
        Family::CxR => build_cxr(a),
        Family::CxC => build_cxc(a, b.unwrap_or(a)),
    }
    .map_err(invalid)
}

/// Resolves `toric-<d>`, a builtin label such as `[[240,8,8]]` (brackets
/// optional, commas or dashes), or a path to a code JSON written by `build`.
pub fn resolve_code(id: &str) -> Result<CxcCode, CliError> {
    if let Some(d) = id.strip_prefix("toric-") {
        let d: usize = d.parse().map_err(|_| invalid(format!("bad toric size in {id:?}")))?;
        let r = CyclicPoly::repetition(d).map_err(invalid)?;
        return build_cxc(&r, &r).map_err(invalid);
    }
    let key = |s: &str| s.trim_matches(|c| c == '[' || c == ']').replace('-', ",");
    if let Some((_, family, n, support)) = BUILTIN_CODES.iter().find(|(label, ..)| key(label) == key(id)) {
        let poly = CyclicPoly::new(*n, support.to_vec()).map_err(invalid)?;
        return build_family(*family, &poly, None);
    }
    let path = Path::new(id);
    if path.is_file() {
        let text = fs::read_to_string(path).map_err(invalid)?;
        let value: Value = serde_json::from_str(&text).map_err(invalid)?;
        let entry = value.get("code").cloned().unwrap_or(value);
        let entry: CatalogEntry = serde_json::from_value(entry).map_err(invalid)?;
        return entry.build().map_err(invalid);
    }
    Err(invalid(format!("unknown code id {id:?}")))
}

#[derive(Parser, Debug)]
#[command(
    name = "cyclic-hgp",
    version,
    about = "Cyclic hypergraph product codes: search, build, circuits, simulation and fits"
)]
struct Cli {
    /// Master seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// JSON run configuration merged over the flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Exhaustive search over cyclic seeds; writes best-rate tables.
    Search(SearchArgs),
    /// Builds a C2, CxR or CxC code and writes its catalog entry.
    Build(BuildArgs),
    /// Writes the syndrome-extraction circuit of a code.
    Circuit(CircuitArgs),
    /// Runs memory experiments over a list of physical rates.
    Simulate(SimulateArgs),
    /// Fits the logical error rate heuristic to a results file.
    Fit(FitArgs),
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchArgs {
    #[arg(long, default_value_t = 40)]
    pub n_max: usize,
    #[arg(long, default_value_t = 2)]
    pub w_min: usize,
    #[arg(long, default_value_t = 5)]
    pub w_max: usize,
    #[arg(long, default_value_t = 2)]
    pub min_distance: usize,
    #[arg(long, default_value_t = 1)]
    pub min_dimension: usize,
    /// Largest codeword enumeration per candidate before it is skipped.
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    pub cap: u64,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildArgs {
    #[arg(long)]
    pub family: Family,
    /// Cyclic length of the first seed.
    #[arg(long)]
    pub length: usize,
    /// Exponents of the first seed, e.g. `0,1,4`.
    #[arg(long)]
    pub support: String,
    /// Second seed for CxC (defaults to the first).
    #[arg(long)]
    pub length_b: Option<usize>,
    #[arg(long)]
    pub support_b: Option<String>,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitArgs {
    #[arg(long)]
    pub code: String,
    #[arg(long, default_value = "packed")]
    pub variant: Variant,
    #[arg(long)]
    pub rounds: usize,
    /// `text` (layer listing) or `stim` (noisy memory experiment).
    #[arg(long, default_value = "text")]
    pub format: String,
    #[arg(long, default_value = "z")]
    pub basis: Basis,
    /// Noise rate for the `stim` export.
    #[arg(long, default_value_t = 0.0)]
    pub p: f64,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[arg(long)]
    pub code: String,
    #[arg(long, default_value = "z")]
    pub basis: Basis,
    #[arg(long, default_value = "packed")]
    pub variant: Variant,
    /// Syndrome rounds (default: the code distance).
    #[arg(long)]
    pub rounds: Option<usize>,
    /// Comma-separated physical rates.
    #[arg(long, value_delimiter = ',', required = true)]
    pub p: Vec<f64>,
    #[arg(long, default_value_t = 10_000)]
    pub shots: usize,
    #[arg(long, default_value = "memory_basis")]
    pub detectors: DetectorSet,
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 5)]
    pub osd_order: usize,
    #[arg(long, default_value = "exhaustive")]
    pub osd_mode: OsdMode,
    #[arg(long, default_value_t = 30.0)]
    pub clamp: f64,
    #[arg(long, default_value_t = false)]
    pub force_osd: bool,
    /// Also write one CSV of per-shot records per physical rate.
    #[arg(long, default_value_t = false)]
    pub shot_records: bool,
}

impl SimulateArgs {
    pub fn decoder(&self) -> DecoderConfig {
        DecoderConfig {
            max_iter: self.max_iter,
            osd_order: self.osd_order,
            osd_mode: self.osd_mode,
            clamp: self.clamp,
            force_osd: self.force_osd,
        }
    }
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitArgs {
    /// Results CSV written by `simulate`.
    #[arg(long)]
    pub results: PathBuf,
    /// Distance in the `p^{d/2}` prefactor (default: the rounds column).
    #[arg(long)]
    pub d: Option<usize>,
    /// Rows to fit when the file holds several codes.
    #[arg(long)]
    pub code: Option<String>,
    /// Check weight to report (default: resolved from the code id).
    #[arg(long)]
    pub omega: Option<usize>,
}

/// Everything that determines the data written by one invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    pub out: PathBuf,
    pub command: Command,
}

impl RunConfig {
    /// SHA-256 over the configuration without `workers` and `out`, which do
    /// not affect results.
    pub fn hash(&self) -> String {
        let hashed = serde_json::json!({ "seed": self.seed, "command": self.command });
        hex::encode(Sha256::digest(hashed.to_string().as_bytes()))
    }

    fn header(&self, comment: &str) -> String {
        format!(
            "{comment} cyclic-hgp {}\n{comment} run_config_hash={}\n{comment} run_config={}\n",
            env!("CARGO_PKG_VERSION"),
            self.hash(),
            serde_json::to_string(self).expect("config serializes")
        )
    }

    fn json_envelope(&self, key: &str, data: impl Serialize) -> Result<String, CliError> {
        let value = serde_json::json!({
            "run_config_hash": self.hash(),
            "run_config": self,
            key: data,
        });
        serde_json::to_string_pretty(&value).map_err(invalid)
    }
}

fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                merge(b.entry(k).or_insert(Value::Null), v);
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Parses arguments into a run configuration, applying `--config`.
pub fn parse_config<I, T>(args: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Usage(e.render().to_string()))?;
    let cfg = RunConfig {
        seed: cli.seed,
        workers: cli.workers,
        out: cli.out,
        command: cli.command,
    };
    let Some(path) = cli.config else {
        return Ok(cfg);
    };
    let text = fs::read_to_string(&path).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
    let over: Value = serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
    let mut value = serde_json::to_value(&cfg).expect("config serializes");
    merge(&mut value, over);
    serde_json::from_value(value).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
}

/// Files written and a one-line summary.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub files: Vec<PathBuf>,
    pub summary: String,
}

/// Runs one invocation, parallelized on a pool of `workers` threads.
pub fn run<I, T>(args: I) -> Result<Report, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = parse_config(args)?;
    execute(&cfg)
}

pub fn execute(cfg: &RunConfig) -> Result<Report, CliError> {
    fs::create_dir_all(&cfg.out).map_err(invalid)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cfg.workers {
        if w == 0 {
            return Err(CliError::Usage("--workers must be positive".into()));
        }
        pool = pool.num_threads(w);
    }
    let pool = pool.build().map_err(invalid)?;
    pool.install(|| match &cfg.command {
        Command::Search(a) => cmd_search(cfg, a),
        Command::Build(a) => cmd_build(cfg, a),
        Command::Circuit(a) => cmd_circuit(cfg, a),
        Command::Simulate(a) => cmd_simulate(cfg, a),
        Command::Fit(a) => cmd_fit(cfg, a),
    })
}

fn write(path: PathBuf, text: &str) -> Result<PathBuf, CliError> {
    fs::write(&path, text).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    Ok(path)
}

fn cmd_search(cfg: &RunConfig, a: &SearchArgs) -> Result<Report, CliError> {
    let search = SearchConfig {
        n_max: a.n_max,
        w_min: a.w_min,
        w_max: a.w_max,
        rules: FilterRules {
            min_distance: a.min_distance,
            min_dimension: a.min_dimension,
        },
        cap: a.cap,
    };
    let outcome = enumerate_cyclic_codes(&search).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut csv = Vec::new();
    write_tables_csv(&outcome.tables, &mut csv).map_err(invalid)?;
    let csv_text = cfg.header("#") + &String::from_utf8(csv).expect("utf-8 csv");
    let json = cfg.json_envelope(
        "search",
        serde_json::json!({
            "evaluated": outcome.evaluated,
            "tables": outcome.tables,
            "skipped": outcome.skipped,
        }),
    )?;
    let files = vec![
        write(cfg.out.join("search_tables.csv"), &csv_text)?,
        write(cfg.out.join("search_catalog.json"), &json)?,
    ];
    if !outcome.skipped.is_empty() {
        return Err(CliError::ResourceCap(format!(
            "{} candidates exceeded the enumeration cap {}; tables written without them",
            outcome.skipped.len(),
            a.cap
        )));
    }
    let entries: usize = outcome.tables.iter().map(|t| t.entries.len()).sum();
    Ok(Report {
        files,
        summary: format!("evaluated {} seeds, {entries} table entries", outcome.evaluated),
    })
}

fn cmd_build(cfg: &RunConfig, a: &BuildArgs) -> Result<Report, CliError> {
    let pa = CyclicPoly::parse_support(a.length, &a.support).map_err(invalid)?;
    let pb = match (&a.length_b, &a.support_b) {
        (Some(n), Some(s)) => Some(CyclicPoly::parse_support(*n, s).map_err(invalid)?),
        (None, None) => None,
        _ => return Err(CliError::Usage("--length-b and --support-b go together".into())),
    };
    if a.family != Family::CxC && pb.is_some() {
        return Err(CliError::Usage(format!("{} takes a single seed", a.family)));
    }
    let code = build_family(a.family, &pa, pb.as_ref())?;
    let entry = CatalogEntry::from_code(&code).map_err(invalid)?;
    let label = code_params(&code).map_err(invalid)?.label();
    let json = cfg.json_envelope("code", &entry)?;
    let file = write(cfg.out.join("code.json"), &json)?;
    Ok(Report {
        files: vec![file],
        summary: format!("{} {label} omega={}", a.family, entry.omega),
    })
}

fn cmd_circuit(cfg: &RunConfig, a: &CircuitArgs) -> Result<Report, CliError> {
    let code = resolve_code(&a.code)?;
    let circuit = gen_circuit(&code, a.rounds, a.variant).map_err(invalid)?;
    let depth = circuit_depth(&circuit);
    let (name, body) = match a.format.as_str() {
        "text" => ("circuit.txt", emit_text(&circuit)),
        "stim" => {
            let model = NoiseModel::new(a.p).map_err(invalid)?;
            let exp = build_memory_experiment(&code, &MemoryExperiment::new(a.basis, a.variant, a.rounds)).map_err(invalid)?;
            ("circuit.stim", annotate_noise(&exp, &model).to_stim())
        }
        other => return Err(CliError::Usage(format!("unknown circuit format {other:?} (expected text or stim)"))),
    };
    let file = write(cfg.out.join(name), &(cfg.header("#") + &body))?;
    Ok(Report {
        files: vec![file],
        summary: format!("{} circuit, {} rounds, depth {depth}", a.variant, a.rounds),
    })
}

fn cmd_simulate(cfg: &RunConfig, a: &SimulateArgs) -> Result<Report, CliError> {
    let code = resolve_code(&a.code)?;
    let params = code_params(&code).map_err(invalid)?;
    let rounds = match (a.rounds, params.d) {
        (Some(r), _) => r,
        (None, Some(d)) => d,
        (None, None) => return Err(invalid("code has no distance; pass --rounds")),
    };
    let exp = MemoryExperiment {
        detectors: a.detectors,
        ..MemoryExperiment::new(a.basis, a.variant, rounds)
    };
    let decoder = a.decoder();
    let mut csv = csv::WriterBuilder::new().from_writer(Vec::new());
    let mut files = Vec::new();
    let mut failures = Vec::new();
    for (i, &p) in a.p.iter().enumerate() {
        let seed = cfg.seed.wrapping_add(i as u64);
        log::info!("{} p={p}: {} shots", a.code, a.shots);
        let (point, outcome) = simulate_memory(&code, &exp, p, a.shots, seed, &decoder).map_err(invalid)?;
        failures.push(point.failures);
        csv.serialize(ResultRow {
            code: a.code.clone(),
            family: code.family.to_string(),
            basis: a.basis.to_string(),
            variant: a.variant.to_string(),
            d: rounds,
            p,
            shots: point.shots,
            failures: point.failures,
            p_log_round: point.p_log_round,
            p_log_round_per_k: point.p_log_round_per_k,
            ci_lo: point.ci_lo,
            ci_hi: point.ci_hi,
        })
        .map_err(invalid)?;
        if a.shot_records {
            let mut text = cfg.header("#");
            text.push_str("shot,converged,iterations,failure_bits\n");
            for r in &outcome.records {
                let bits = r.failure_bits.iter().map(u32::to_string).collect::<Vec<_>>().join(" ");
                let _ = writeln!(text, "{},{},{},{bits}", r.shot, r.converged, r.iterations);
            }
            files.push(write(cfg.out.join(format!("shots_p{p}.csv")), &text)?);
        }
    }
    let body = String::from_utf8(csv.into_inner().map_err(invalid)?).expect("utf-8 csv");
    files.insert(0, write(cfg.out.join("results.csv"), &(cfg.header("#") + &body))?);
    Ok(Report {
        files,
        summary: format!("{} {}: failures {failures:?} of {} shots", a.code, params.label(), a.shots),
    })
}

/// Reads a results CSV, skipping `#` header lines.
pub fn read_results(path: &Path) -> Result<Vec<ResultRow>, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    rdr.deserialize()
        .collect::<Result<_, _>>()
        .map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn cmd_fit(cfg: &RunConfig, a: &FitArgs) -> Result<Report, CliError> {
    let rows = read_results(&a.results)?;
    let code = match &a.code {
        Some(c) => c.clone(),
        None => {
            let mut ids: Vec<&str> = rows.iter().map(|r| r.code.as_str()).collect();
            ids.dedup();
            match ids.as_slice() {
                [one] => one.to_string(),
                [] => return Err(invalid("results file has no rows")),
                _ => return Err(CliError::Usage("results hold several codes; pass --code".into())),
            }
        }
    };
    let rows: Vec<&ResultRow> = rows.iter().filter(|r| r.code == code).collect();
    let d = match a.d {
        Some(d) => d,
        None => rows.first().map(|r| r.d).ok_or_else(|| invalid(format!("no rows for {code}")))?,
    };
    let samples: Vec<_> = rows.iter().filter(|r| r.failures > 0).map(|r| r.to_point().to_sample()).collect();
    let fit = fit_heuristic(&samples, d).map_err(invalid)?;
    let omega = match a.omega {
        Some(w) => w,
        None => resolve_code(&code)?.omega(),
    };
    let record = FitRecord {
        code: code.clone(),
        alpha: fit.alpha,
        beta: fit.beta,
        gamma: fit.gamma,
        omega,
    };
    let json = cfg.json_envelope("fit", serde_json::json!({ "record": record, "d": d, "residuals": fit.residuals }))?;
    let file = write(cfg.out.join("fit.json"), &json)?;
    Ok(Report {
        files: vec![file],
        summary: format!("{code}: alpha={:.4} beta={:.4e} gamma={:.4e}", fit.alpha, fit.beta, fit.gamma),
    })
}

/// Entry point for the binary: runs, prints the summary, maps errors to
/// exit codes (1 usage, 2 validation, 3 resource cap).
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    use std::io::Write as _;
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let mut stdout = std::io::stdout();
    if let Err(e) = Cli::try_parse_from(&args) {
        if matches!(
            e.kind(),
            clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
        ) {
            let _ = write!(stdout, "{}", e.render());
            return ExitCode::SUCCESS;
        }
    }
    match run(args) {
        Ok(report) => {
            let _ = writeln!(stdout, "{}", report.summary);
            for f in &report.files {
                let _ = writeln!(stdout, "wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            let text = e.to_string();
            if text.starts_with("error:") {
                eprint!("{text}");
            } else {
                eprintln!("error: {text}");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
