//! Command-line front end: argument parsing, settings, emitters.

use std::ffi::OsString;
use std::fs;
use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::{ToPrimitive, Zero};
use serde_json::{json, Map, Value};

use crate::conformal::{check_conformal, SMatrix};
use crate::error::Error;
use crate::families::{builtin_instance, gamma03_family, gamma03_h, BuiltinInstance, ScanConfig};
use crate::frobenius::{solve_exponents, to_q_expansion, CharacterVectorExpansion};
use crate::hypergeom::{dim_m0, rank2_extremal_character, table1_cases, Rank2Params};
use crate::mlde::{mlde_residual, monic_from_symmetric, ExponentTuple};
use crate::ring::{fmt_q, parse_q, q_to_f64, DEFAULT_PRECISION, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Pretty,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <Format as ValueEnum>::from_str(s, true)
    }
}

/// Process-wide settings, read from an optional key=value file and overridden by flags.
#[derive(Clone, Debug, PartialEq)]
pub struct CliConfig {
    pub precision_bits: usize,
    pub n_terms: usize,
    pub format: Format,
    /// Always on; repeated runs with the same inputs print the same bytes.
    pub deterministic: bool,
    pub workers: usize,
}

impl Default for CliConfig {
    fn default() -> Self {
        CliConfig {
            precision_bits: DEFAULT_PRECISION,
            n_terms: 25,
            format: Format::Json,
            deterministic: true,
            workers: 1,
        }
    }
}

impl CliConfig {
    /// Parse `key = value` lines; `#` starts a comment.
    pub fn from_kv(text: &str) -> Result<Self, String> {
        let mut c = CliConfig::default();
        for (k, v) in kv_pairs(text)? {
            c.set(&k, &v)?;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let num = |v: &str| v.parse::<usize>().map_err(|_| format!("bad value for {key}: {v}"));
        match key {
            "precision_bits" => self.precision_bits = num(value)?,
            "n_terms" | "terms" => self.n_terms = num(value)?,
            "workers" => self.workers = num(value)?,
            "format" => self.format = value.parse()?,
            "deterministic" => {
                if value != "true" {
                    return Err("determinism cannot be switched off".into());
                }
            }
            _ => return Err(format!("unknown setting {key}")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.precision_bits == 0 || self.n_terms == 0 || self.workers == 0 {
            return Err("precision_bits, n_terms and workers must be positive".into());
        }
        Ok(())
    }
}

fn kv_pairs(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| format!("line {}: expected key = value", i + 1))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

#[derive(Parser, Debug)]
#[command(name = "vvmf", version, about = "Vector-valued modular forms: MLDE solutions, character checks, scans")]
struct Cli {
    /// Settings file (key = value: precision_bits, n_terms, format, workers).
    #[arg(long, value_name = "FILE")]
    settings: Option<String>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    precision_bits: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the minimal MLDE with the given exponents.
    Solve(SolveArgs),
    /// Run the conformal checks on a candidate expansion.
    Check(CheckArgs),
    /// Rank-4 parameter scan from a key = value config.
    Scan(ScanArgs),
    /// Print a built-in table.
    Table(TableArgs),
    /// A named one-parameter family.
    Family(FamilyArgs),
    /// Rank-2 extremal dim M0.
    DimM0(DimArgs),
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long)]
    rank: usize,
    /// Comma-separated rationals, e.g. 1/40,31/40,-1/40,9/40.
    #[arg(long, allow_hyphen_values = true)]
    exponents: String,
    #[arg(long)]
    terms: Option<usize>,
    /// Comma-separated rescale factors; default normalizes each lead to 1.
    #[arg(long, allow_hyphen_values = true)]
    rescale: Option<String>,
}

#[derive(Args, Debug)]
struct CheckArgs {
    /// Expansion JSON.
    #[arg(long)]
    candidate: String,
    /// S-matrix JSON.
    #[arg(long)]
    smatrix: String,
    #[arg(long, default_value_t = 0)]
    vacuum: usize,
}

#[derive(Args, Debug)]
struct ScanArgs {
    #[arg(long)]
    config: String,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TableName {
    Rank2Extremal,
    Table3,
    HardHexagon,
    Rank4Quasi,
    #[value(name = "H")]
    H,
}

#[derive(Args, Debug)]
struct TableArgs {
    #[arg(value_enum)]
    name: TableName,
    #[arg(long)]
    terms: Option<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FamilyName {
    #[value(name = "gamma0-3")]
    Gamma03,
}

#[derive(Args, Debug)]
struct FamilyArgs {
    #[arg(value_enum)]
    name: FamilyName,
    #[arg(long, allow_hyphen_values = true)]
    lambda: String,
    #[arg(long)]
    terms: Option<usize>,
}

#[derive(Args, Debug)]
struct DimArgs {
    #[arg(long, allow_hyphen_values = true)]
    c: String,
    #[arg(long, allow_hyphen_values = true)]
    h: String,
    #[arg(long, allow_hyphen_values = true)]
    k1: i64,
}

enum Failure {
    Usage(String),
    Domain(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

fn usage<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Usage(e.to_string())
}

fn rational(s: &str) -> Result<Q, Failure> {
    parse_q(s).map_err(usage)
}

fn rationals(s: &str) -> Result<Vec<Q>, Failure> {
    s.split(',').map(|x| rational(x.trim())).collect()
}

fn read(path: &str) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{path}: {e}")))
}

fn read_json(path: &str) -> Result<Value, Failure> {
    serde_json::from_str(&read(path)?).map_err(|e| Failure::Usage(format!("{path}: {e}")))
}

/// Run with `argv` (program name first); returns the exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(&cli) {
        Ok((records, format)) => match emit(&records, format, out) {
            Ok(()) => 0,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                1
            }
        },
        Err(Failure::Usage(m)) => {
            let _ = writeln!(err, "error: {m}");
            2
        }
        Err(Failure::Domain(e)) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn settings(cli: &Cli) -> Result<CliConfig, Failure> {
    let mut c = match &cli.settings {
        Some(p) => CliConfig::from_kv(&read(p)?).map_err(Failure::Usage)?,
        None => CliConfig::default(),
    };
    if let Some(f) = cli.format {
        c.format = f;
    }
    if let Some(p) = cli.precision_bits {
        c.precision_bits = p;
    }
    if let Some(w) = cli.workers {
        c.workers = w;
    }
    c.validate().map_err(Failure::Usage)?;
    Ok(c)
}

fn execute(cli: &Cli) -> Result<(Vec<Value>, Format), Failure> {
    let cfg = settings(cli)?;
    let prec = cfg.precision_bits;
    let records = match &cli.command {
        Command::Solve(a) => vec![solve(a, &cfg)?],
        Command::Check(a) => vec![check(a, prec)?],
        Command::Scan(a) => scan(a, cli, &cfg)?,
        Command::Table(a) => table(a, &cfg)?,
        Command::Family(a) => {
            let l = rational(&a.lambda)?;
            let FamilyName::Gamma03 = a.name;
            vec![gamma03_family(&l, a.terms.unwrap_or(cfg.n_terms))?.to_json()]
        }
        Command::DimM0(a) => vec![dim(a, prec)?],
    };
    Ok((records, cfg.format))
}

fn coordinates(x: &CharacterVectorExpansion) -> Value {
    Value::Array(
        x.series
            .iter()
            .zip(&x.exponents)
            .map(|(s, e)| {
                let mut o = Map::new();
                o.insert("exponent".into(), json!(fmt_q(e)));
                o.insert("step".into(), json!(fmt_q(s.step())));
                if let Some(p) = s.prefactor() {
                    o.insert("prefactor".into(), json!({"base": p.base, "exp": fmt_q(&p.exp)}));
                }
                o.insert("coefficients".into(), json!(s.coeffs().iter().map(fmt_q).collect::<Vec<_>>()));
                Value::Object(o)
            })
            .collect(),
    )
}

fn solve(a: &SolveArgs, cfg: &CliConfig) -> Result<Value, Failure> {
    let n = a.terms.unwrap_or(cfg.n_terms);
    let e = ExponentTuple::new(rationals(&a.exponents)?)?;
    if e.len() != a.rank {
        return Err(Failure::Usage(format!("rank {} with {} exponents", a.rank, e.len())));
    }
    let m = monic_from_symmetric(a.rank, &e)?;
    let full = n.max(2 * a.rank);
    let sols = solve_exponents(a.rank, &e, full)?;
    let raw = to_q_expansion(&sols, full, None)?;
    let mut x = match &a.rescale {
        Some(r) => raw.rescaled(&rationals(r)?)?,
        None => raw.normalized()?,
    };
    let residual_zero = x
        .series
        .iter()
        .map(|s| mlde_residual(&m, s).map(|r| r.coeffs().iter().all(Zero::is_zero)))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .all(|b| b);
    x.series = x.series.iter().map(|s| s.truncate(n)).collect();
    Ok(json!({
        "rank": a.rank,
        "terms": n,
        "exponents": e.to_json(),
        "mlde": m.to_json(),
        "rescale": x.rescale.as_ref().map(|r| r.iter().map(fmt_q).collect::<Vec<_>>()),
        "coordinates": coordinates(&x),
        "mlde_residual_zero": residual_zero,
    }))
}

fn check(a: &CheckArgs, prec: usize) -> Result<Value, Failure> {
    let x = CharacterVectorExpansion::from_json(&read_json(&a.candidate)?).map_err(usage)?;
    let s = SMatrix::from_json(&read_json(&a.smatrix)?, prec).map_err(usage)?;
    let t = ExponentTuple::new(x.exponents.clone())?;
    let rep = check_conformal(&x, &t, &s, a.vacuum)?;
    Ok(json!({"vacuum": a.vacuum, "report": rep.to_json()}))
}

fn scan(a: &ScanArgs, cli: &Cli, cfg: &CliConfig) -> Result<Vec<Value>, Failure> {
    let mut sc = ScanConfig::from_kv(&read(&a.config)?).map_err(usage)?;
    if cli.workers.is_some() {
        sc.workers = cfg.workers;
    }
    if cli.precision_bits.is_some() {
        sc.precision_bits = cfg.precision_bits;
    }
    sc.validate().map_err(usage)?;
    let outcome = crate::families::rank4_scan(&sc)?;
    let mut v = vec![json!({"record": "config", "config": sc.to_json()})];
    v.extend(outcome.candidates.iter().map(|c| json!({"record": "candidate", "candidate": c.to_json()})));
    v.push(json!({"record": "summary", "evaluated": outcome.evaluated, "candidates": outcome.candidates.len()}));
    Ok(v)
}

fn builtin_record(b: &BuiltinInstance, n: usize) -> Result<Value, Failure> {
    let x = b.solve(n)?;
    let mismatches = b.mismatches(&x)?;
    let mut residual_zero = Value::Null;
    if let Some(m) = &b.mlde {
        let mut ok = true;
        for s in &x.series {
            ok &= mlde_residual(m, s)?.coeffs().iter().all(Zero::is_zero);
        }
        residual_zero = json!(ok);
    }
    Ok(json!({
        "name": b.name,
        "terms": n,
        "exponents": b.exponents.to_json(),
        "mlde": b.mlde.as_ref().map(|m| m.to_json()),
        "rescale": x.rescale.as_ref().map(|r| r.iter().map(fmt_q).collect::<Vec<_>>()),
        "coordinates": coordinates(&x),
        "reference_compared": b.reference.iter().map(|r| r.len()).sum::<usize>(),
        "reference_mismatches": mismatches.iter().map(|(j, i, p, g)| json!({
            "coordinate": j, "index": i, "published": p.to_string(), "computed": fmt_q(g),
        })).collect::<Vec<_>>(),
        "mlde_residual_zero": residual_zero,
        "smatrix": b.smatrix.to_json(),
    }))
}

fn table(a: &TableArgs, cfg: &CliConfig) -> Result<Vec<Value>, Failure> {
    let prec = cfg.precision_bits;
    let names: &[&str] = match a.name {
        TableName::Rank2Extremal => {
            let n = a.terms.unwrap_or(cfg.n_terms);
            return table1_cases()
                .iter()
                .map(|p| {
                    let r = rank2_extremal_character(p, n, prec)?;
                    Ok(json!({
                        "c": fmt_q(&p.c), "h": fmt_q(&p.h), "k1": fmt_q(&p.k1()),
                        "dim_m0": r.dim.to_json(),
                        "coordinates": coordinates(&r.expansion),
                    }))
                })
                .collect();
        }
        TableName::Table3 => &["table3-row-1", "table3-row-2", "table3-row-3", "table3-row-4"],
        TableName::HardHexagon => &["hard-hexagon"],
        TableName::Rank4Quasi => &["rank4-quasi"],
        TableName::H => {
            let n = a.terms.unwrap_or(cfg.n_terms).max(8);
            let b = builtin_instance("H", prec)?;
            let mut v = builtin_record(&b, n)?;
            v["report"] = gamma03_h(n, prec)?.to_json();
            return Ok(vec![v]);
        }
    };
    names
        .iter()
        .map(|name| {
            let b = builtin_instance(name, prec)?;
            builtin_record(&b, a.terms.unwrap_or_else(|| b.reference_len()))
        })
        .collect()
}

fn dim(a: &DimArgs, prec: usize) -> Result<Value, Failure> {
    let p = Rank2Params::new(rational(&a.c)?, rational(&a.h)?)?;
    if p.k1() != Q::from_integer(a.k1.into()) {
        return Err(Failure::Domain(Error::Degenerate(format!(
            "k1 = {} for c = {}, h = {}, not {}",
            fmt_q(&p.k1()),
            fmt_q(&p.c),
            fmt_q(&p.h),
            a.k1
        ))));
    }
    let d = dim_m0(&p, prec)?;
    let digits = 12;
    Ok(json!({
        "c": fmt_q(&p.c),
        "h": fmt_q(&p.h),
        "k1": a.k1,
        "value": d.value.to_fixed(digits),
        "precision": {"bits": prec, "digits": digits},
        "integral": d.integral,
        "rounded": int_value(&d.rounded),
    }))
}

fn int_value(n: &num_bigint::BigInt) -> Value {
    match n.to_i64() {
        Some(i) => json!(i),
        None => json!(n.to_string()),
    }
}

fn emit(records: &[Value], format: Format, out: &mut dyn Write) -> std::io::Result<()> {
    match format {
        Format::Json => {
            for r in records {
                writeln!(out, "{}", serde_json::to_string(r)?)?;
            }
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["record", "path", "value"])?;
            for (i, r) in records.iter().enumerate() {
                let mut rows = Vec::new();
                flatten(r, String::new(), &mut rows);
                for (p, v) in rows {
                    w.write_record([i.to_string(), p, v])?;
                }
            }
            let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
            out.write_all(&bytes)?;
        }
        Format::Pretty => {
            for (i, r) in records.iter().enumerate() {
                if i > 0 {
                    writeln!(out)?;
                }
                pretty(r, 0, out)?;
            }
        }
    }
    Ok(())
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "null".into(),
        other => other.to_string(),
    }
}

fn flatten(v: &Value, path: String, rows: &mut Vec<(String, String)>) {
    let join = |k: &str| if path.is_empty() { k.to_string() } else { format!("{path}.{k}") };
    match v {
        Value::Object(m) => m.iter().for_each(|(k, x)| flatten(x, join(k), rows)),
        Value::Array(a) => a.iter().enumerate().for_each(|(i, x)| flatten(x, join(&i.to_string()), rows)),
        _ => rows.push((path, scalar(v))),
    }
}

fn approx(s: &str) -> String {
    if s.contains('/') {
        if let Ok(q) = parse_q(s) {
            return format!("{s} (approx {:.12e})", q_to_f64(&q));
        }
    }
    s.to_string()
}

fn pretty(v: &Value, indent: usize, out: &mut dyn Write) -> std::io::Result<()> {
    let pad = "  ".repeat(indent);
    let leaf = |x: &Value| !matches!(x, Value::Object(_) | Value::Array(_));
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                if leaf(x) {
                    writeln!(out, "{pad}{k}: {}", approx(&scalar(x)))?;
                } else if x.as_array().is_some_and(|a| a.iter().all(leaf)) {
                    let a =
                        x.as_array().map(|a| a.iter().map(scalar).collect::<Vec<_>>().join(", ")).unwrap_or_default();
                    writeln!(out, "{pad}{k}: [{a}]")?;
                } else {
                    writeln!(out, "{pad}{k}:")?;
                    pretty(x, indent + 1, out)?;
                }
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                if leaf(x) {
                    writeln!(out, "{pad}- {}", approx(&scalar(x)))?;
                } else {
                    writeln!(out, "{pad}[{i}]")?;
                    pretty(x, indent + 1, out)?;
                }
            }
        }
        _ => writeln!(out, "{pad}{}", approx(&scalar(v)))?,
    }
    Ok(())
}
