//! Command-line surface: sign tables, sign decompositions, Mazur-Rubin
//! checks and self-tests, all reported as deterministic JSON.
//!
//! Exit codes: 0 success, 1 a mathematical check failed, 2 bad input,
//! 3 precision or budget exhausted.

use crate::epsilon::{gamma_constant, partition, EpsilonError, HodgeTateProfile, SignPartitionTable, SqrtChoice};
use crate::lagrangian_mr::{anomalous_split_check, exhaustive_plane_counts, mr_compatibility, MrError, PairSpec};
use crate::oracles::{cft_h1_dims, TameCharacter};
use crate::padic_core::Ring;
use crate::phigamma::{
    herr_cohomology, lsd_from_cohomology, w_star_partial, LsdOptions, ModuleSpec, PhiGammaError, PhiGammaModule,
    WindowSchedule, W_SIGN_CONVENTION,
};
use crate::unit_characters::{ExtensionKind, QuadExtension};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::path::PathBuf;
use thiserror::Error;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Largest `p` accepted by `epsilon-table`.
pub const MAX_P_ENV: &str = "LOCALSIGN_MAX_P";
/// Largest `w_*` limit index accepted by `lsd`.
pub const MAX_W_LIMIT_ENV: &str = "LOCALSIGN_MAX_W_LIMIT";
const DEFAULT_MAX_P: u64 = 13;
const DEFAULT_MAX_W_LIMIT: u32 = 4;

#[derive(Parser, Debug)]
#[command(name = "localsign", version, about = "Local sign decompositions with exact arithmetic")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sign partition of anticyclotomic characters.
    EpsilonTable(EpsilonTableArgs),
    /// Decompose H^1 of a rank-two module into its two signed lines.
    Lsd(LsdArgs),
    /// Compare delta of two reducible lifts with their completed epsilon ratio.
    MazurRubin(MazurRubinArgs),
    /// Run the built-in invariant suites.
    Selfcheck(SelfcheckArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Quick,
    Full,
}

#[derive(Args, Debug)]
pub struct EpsilonTableArgs {
    #[arg(long)]
    pub p: u64,
    #[arg(long, value_parser = ["unram", "ram-minus-p", "ram-minus-pu"])]
    pub kind: String,
    #[arg(long, default_value_t = 1)]
    pub max_order_exp: u32,
    #[arg(long, default_value_t = 0)]
    pub weight: u32,
    #[arg(long, default_value = "+", allow_hyphen_values = true, value_parser = ["+", "-"])]
    pub sqrt_choice: String,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct LsdArgs {
    #[arg(long)]
    pub module: PathBuf,
    /// Depth N of the deepest window.
    #[arg(long)]
    pub prec: Option<i64>,
    #[arg(long)]
    pub w_limit: Option<u32>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct MazurRubinArgs {
    #[arg(long)]
    pub pair: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SelfcheckArgs {
    #[arg(long, value_enum, default_value_t = Level::Quick)]
    pub level: Level,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("mathematical check failed: {0}")]
    Check(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("precision or budget exhausted: {0}")]
    Budget(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Check(_) => 1,
            CliError::Input(_) => 2,
            CliError::Budget(_) => 3,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Check(_) => "check",
            CliError::Input(_) => "input",
            CliError::Budget(_) => "budget",
        }
    }

    /// Machine-readable error record.
    pub fn record(&self) -> String {
        let v = json!({"error": {"kind": self.kind(), "message": self.to_string()}, "exit_code": self.exit_code()});
        serde_json::to_string_pretty(&v).expect("json")
    }
}

impl From<PhiGammaError> for CliError {
    fn from(e: PhiGammaError) -> CliError {
        use PhiGammaError as E;
        match e {
            E::Precision(_) | E::Stabilization(_) | E::WLimit(_) | E::Series(_) => CliError::Budget(e.to_string()),
            E::NotAField(_)
            | E::NotUnit(_)
            | E::NotTame
            | E::BadGenerator(_)
            | E::Mismatch(_)
            | E::NotSelfDual(_)
            | E::NotGeneric(_)
            | E::Spec(_)
            | E::Arith(_) => CliError::Input(e.to_string()),
            E::Commutation(_)
            | E::Euler(_)
            | E::NotInImage(_)
            | E::Unsolvable(_)
            | E::Certificate(_)
            | E::PathDisagreement(_) => CliError::Check(e.to_string()),
        }
    }
}

impl From<MrError> for CliError {
    fn from(e: MrError) -> CliError {
        match e {
            MrError::PhiGamma(e) => e.into(),
            MrError::ResidualMismatch(_) | MrError::BadLift(_) | MrError::Spec(_) => CliError::Input(e.to_string()),
            MrError::Epsilon(_) | MrError::Lagrangian(_) => CliError::Check(e.to_string()),
        }
    }
}

impl From<EpsilonError> for CliError {
    fn from(e: EpsilonError) -> CliError {
        match e {
            EpsilonError::Overflow => CliError::Budget(e.to_string()),
            EpsilonError::Unit(_) | EpsilonError::NeedsRamified | EpsilonError::NeedsUnramified => {
                CliError::Input(e.to_string())
            }
            _ => CliError::Check(e.to_string()),
        }
    }
}

/// The uniform report envelope. Serialized through `serde_json::Value`,
/// whose maps are ordered, so keys come out sorted.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub command: Value,
    pub version: String,
    pub input_digest: String,
    pub results: Value,
    pub certificates: Value,
    pub passed: bool,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let v = serde_json::to_value(self).expect("report serializes");
        serde_json::to_string_pretty(&v).expect("json") + "\n"
    }
}

/// Output of a command: the text to emit and whether every check passed.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub text: String,
    pub passed: bool,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }
}

fn digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn env_budget<T: std::str::FromStr>(var: &str, default: T) -> Result<T, CliError> {
    match std::env::var(var) {
        Ok(s) => s.parse().map_err(|_| CliError::Input(format!("{var}={s} is not a number"))),
        Err(_) => Ok(default),
    }
}

fn read_input(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::EpsilonTable(a) => cmd_epsilon_table(a),
        Command::Lsd(a) => cmd_lsd(a),
        Command::MazurRubin(a) => cmd_mazur_rubin(a),
        Command::Selfcheck(a) => cmd_selfcheck(a),
    }
}

/// Writes the outcome to `out` if given; returns the text for stdout.
pub fn emit(outcome: &Outcome, out: Option<&PathBuf>) -> Result<String, CliError> {
    match out {
        Some(path) => {
            std::fs::write(path, &outcome.text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            Ok(String::new())
        }
        None => Ok(outcome.text.clone()),
    }
}

pub fn out_path(cli: &Cli) -> Option<&PathBuf> {
    match &cli.command {
        Command::EpsilonTable(a) => a.out.as_ref(),
        Command::Lsd(a) => a.out.as_ref(),
        Command::MazurRubin(a) => a.out.as_ref(),
        Command::Selfcheck(a) => a.out.as_ref(),
    }
}

/// Checks carried by a table: balance for ramified kinds, conductor parity
/// for unramified weight 0.
fn table_checks(table: &SignPartitionTable, kind: ExtensionKind, weight: u32) -> Value {
    let mut checks = serde_json::Map::new();
    if kind.is_ramified() {
        checks.insert("balanced".into(), json!(table.is_balanced()));
    } else if weight == 0 {
        let parity = table.records.iter().all(|r| (r.conductor % 2 == 0) == (r.label == crate::epsilon::Label::Plus));
        checks.insert("labels_match_conductor_parity".into(), json!(parity));
    }
    Value::Object(checks)
}

pub fn cmd_epsilon_table(a: &EpsilonTableArgs) -> Result<Outcome, CliError> {
    let max_p = env_budget(MAX_P_ENV, DEFAULT_MAX_P)?;
    if a.p > max_p {
        return Err(CliError::Budget(format!("p = {} exceeds {MAX_P_ENV} = {max_p}", a.p)));
    }
    let kind = ExtensionKind::parse(&a.kind).map_err(|e| CliError::Input(e.to_string()))?;
    let sqrt = SqrtChoice::parse(&a.sqrt_choice).ok_or_else(|| CliError::Input("sqrt choice must be + or -".into()))?;
    let ext = QuadExtension::new(a.p, kind).map_err(|e| CliError::Input(e.to_string()))?;
    let table = partition(&ext, a.weight, sqrt, a.max_order_exp)?;
    let checks = table_checks(&table, kind, a.weight);
    let passed = checks.as_object().expect("object").values().all(|v| v.as_bool() == Some(true));
    let text = match a.format {
        Format::Json => {
            let command = json!({
                "name": "epsilon-table",
                "p": a.p,
                "kind": a.kind,
                "max_order_exp": a.max_order_exp,
                "weight": a.weight,
                "sqrt_choice": a.sqrt_choice,
            });
            let mut results = serde_json::to_value(&table).expect("table serializes");
            results["checks"] = checks;
            RunReport {
                input_digest: digest(command.to_string().as_bytes()),
                command,
                version: VERSION.into(),
                results,
                certificates: json!({"arithmetic": "exact"}),
                passed,
            }
            .to_json()
        }
        Format::Csv => table_csv(&table)?,
    };
    Ok(Outcome { text, passed })
}

fn table_csv(table: &SignPartitionTable) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let h = &table.header;
    let csv_err = |e: csv::Error| CliError::Input(e.to_string());
    w.write_record([
        "p",
        "kind",
        "delta_sq",
        "k",
        "sqrt_choice",
        "order",
        "exponents",
        "index",
        "order_exp",
        "conductor",
        "epsilon",
        "epsilon_hat",
        "label",
    ])
    .map_err(csv_err)?;
    for r in &table.records {
        let exps: Vec<String> = r.character.exponents.iter().map(|e| e.to_string()).collect();
        w.write_record([
            h.p.to_string(),
            h.kind.clone(),
            h.delta_sq.to_string(),
            h.k.to_string(),
            if h.sqrt_choice == SqrtChoice::Plus { "+".into() } else { "-".into() },
            r.character.order.to_string(),
            exps.join(";"),
            r.index.to_string(),
            r.order_exp.to_string(),
            r.conductor.to_string(),
            r.epsilon.to_string(),
            r.epsilon_hat.to_string(),
            r.label.to_string(),
        ])
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Input(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

fn index_rows(m: &crate::linalg::Matrix) -> Value {
    let r = m.ring();
    json!((0..m.rows()).map(|i| m.row(i).iter().map(|&c| r.index(c)).collect::<Vec<_>>()).collect::<Vec<_>>())
}

pub fn cmd_lsd(a: &LsdArgs) -> Result<Outcome, CliError> {
    let text = read_input(&a.module)?;
    let spec = ModuleSpec::from_json(&text)?;
    let mut built = spec.build()?;
    let max_n = env_budget(MAX_W_LIMIT_ENV, DEFAULT_MAX_W_LIMIT)?;
    let n = a.w_limit.unwrap_or(built.w_limit_n);
    if n < 2 {
        return Err(CliError::Input("--w-limit must be at least 2".into()));
    }
    if n > max_n {
        return Err(CliError::Budget(format!("w-limit {n} exceeds {MAX_W_LIMIT_ENV} = {max_n}")));
    }
    if let Some(depth) = a.prec {
        let depths = &mut built.schedule.depths;
        let last = depths.len() - 1;
        if depth <= depths[last - 1] {
            return Err(CliError::Input(format!("--prec must exceed {}", depths[last - 1])));
        }
        depths[last] = depth;
    }
    let d = &built.module;
    let r = d.ring();
    let opts = LsdOptions { schedule: built.schedule.clone(), w_limit_n: n };
    let coh = herr_cohomology(d, &opts.schedule)?;
    let sd = lsd_from_cohomology(&coh, &opts)?;
    let idx = |v: &[crate::padic_core::Coeff]| v.iter().map(|&c| r.index(c)).collect::<Vec<_>>();
    let path_b = sd.path_b.as_ref().map(|b| {
        json!({
            "sub_line": idx(&b.sub_line),
            "sub_label": b.sub_label,
            "complement": idx(&b.complement),
            "eigenvalue_on_sub": b.eigenvalue_on_sub,
        })
    });
    // for a direct sum, the summand whose H^1 is the + line
    let plus_summand = match (d.construction(), &sd.path_b) {
        (crate::phigamma::Construction::DirectSum, Some(b)) => Some(if b.sub_label == 1 { 1 } else { 2 }),
        _ => None,
    };
    let chars: Vec<Value> = d
        .characters()
        .iter()
        .map(|c| json!({"at_p": r.index(c.at_p), "at_gen": r.index(c.at_gen)}))
        .collect();
    let results = json!({
        "module": {
            "p": r.p(),
            "construction": d.construction().label(),
            "characters": chars,
            "gamma_generator": d.gamma_generator(),
            "pole_shift": d.pole_shift(),
        },
        "dims": [sd.dims.0, sd.dims.1, sd.dims.2],
        "gram": index_rows(&sd.gram),
        "w_matrix": index_rows(&sd.w_matrix),
        "plus": idx(&sd.plus),
        "minus": idx(&sd.minus),
        "cross_pairing": r.index(sd.cross_pairing),
        "path_b": path_b,
        "plus_summand": plus_summand,
        "agreement": sd.agreement,
    });
    let certificates = json!({
        "arithmetic": "exact",
        "windows": sd.reports,
        "w_star": sd.certificates,
        "w_limit_n": n,
        "window_depths": opts.schedule.depths,
        "w_sign_convention": W_SIGN_CONVENTION,
    });
    let report = RunReport {
        command: json!({"name": "lsd", "module": a.module.display().to_string(), "prec": a.prec, "w_limit": a.w_limit}),
        version: VERSION.into(),
        input_digest: digest(text.as_bytes()),
        results,
        certificates,
        passed: sd.agreement,
    };
    Ok(Outcome { text: report.to_json(), passed: sd.agreement })
}

pub fn cmd_mazur_rubin(a: &MazurRubinArgs) -> Result<Outcome, CliError> {
    let text = read_input(&a.pair)?;
    let pair = PairSpec::from_json(&text)?;
    let rep = mr_compatibility(&pair)?;
    let report = RunReport {
        command: json!({"name": "mazur-rubin", "pair": a.pair.display().to_string()}),
        version: VERSION.into(),
        input_digest: digest(text.as_bytes()),
        results: serde_json::to_value(&rep).expect("report serializes"),
        certificates: json!({"arithmetic": "exact", "w_sign_convention": W_SIGN_CONVENTION}),
        passed: rep.holds,
    };
    Ok(Outcome { text: report.to_json(), passed: rep.holds })
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub passed: usize,
    pub total: usize,
    pub failures: Vec<String>,
}

struct Suite {
    name: &'static str,
    passed: usize,
    total: usize,
    failures: Vec<String>,
}

impl Suite {
    fn new(name: &'static str) -> Suite {
        Suite { name, passed: 0, total: 0, failures: Vec::new() }
    }

    fn record(&mut self, what: impl FnOnce() -> String, ok: bool) {
        self.total += 1;
        if ok {
            self.passed += 1;
        } else {
            self.failures.push(what());
        }
    }

    fn finish(self) -> SuiteResult {
        SuiteResult { name: self.name.into(), passed: self.passed, total: self.total, failures: self.failures }
    }
}

fn field(p: u64) -> Ring {
    Ring::field(p, 1).expect("odd prime")
}

fn suite_gamma() -> SuiteResult {
    let mut s = Suite::new("gamma_constant");
    for k in 1..=10i64 {
        let g = gamma_constant(&HodgeTateProfile::new(&[(k, 1), (1 - k, 1)])).ok().and_then(|g| g.as_sign());
        s.record(|| format!("weights ({k}, {})", 1 - k), g == Some(if k % 2 == 1 { 1 } else { -1 }));
    }
    s.finish()
}

fn suite_tables(level: Level) -> SuiteResult {
    let mut s = Suite::new("sign_tables");
    let (primes, n): (&[u64], u32) = match level {
        Level::Quick => (&[3, 5], 2),
        Level::Full => (&[3, 5, 7], 3),
    };
    for &p in primes {
        for kind in [ExtensionKind::RamifiedMinusP, ExtensionKind::RamifiedMinusPu, ExtensionKind::Unramified] {
            let n = if kind.is_ramified() { n } else { n.min(2) };
            let ok = QuadExtension::new(p, kind)
                .ok()
                .and_then(|ext| partition(&ext, 0, SqrtChoice::Plus, n).ok())
                .map(|t| table_checks(&t, kind, 0).as_object().expect("object").values().all(|v| v == &json!(true)));
            s.record(|| format!("p = {p}, {kind}, n <= {n}"), ok == Some(true));
        }
    }
    s.finish()
}

fn suite_herr(level: Level) -> SuiteResult {
    let mut s = Suite::new("herr_dimensions");
    let primes: &[u64] = match level {
        Level::Quick => &[3, 5],
        Level::Full => &[3, 5, 7],
    };
    for &p in primes {
        let r = field(p);
        for k in 0..p as i64 - 1 {
            for l in 1..p as i64 {
                let ok = PhiGammaModule::tame(r, k, r.from_int(l))
                    .and_then(|d| herr_cohomology(&d, &WindowSchedule::standard(&d, 0)))
                    .map(|c| Some(c.dims()) == TameCharacter::new(p, k, l).ok().map(|t| cft_h1_dims(&t)))
                    .unwrap_or(false);
                s.record(|| format!("p = {p}, omega^{k} mu_{l}"), ok);
            }
        }
    }
    s.finish()
}

fn suite_lagrangian() -> SuiteResult {
    let mut s = Suite::new("lagrangian_counts");
    for (p, f) in [(3, 1), (5, 1), (7, 1), (3, 2)] {
        let ok = Ring::field(p, f)
            .map(|r| exhaustive_plane_counts(r).iter().all(|c| c.lines == 0 || c.lines == 2))
            .unwrap_or(false);
        s.record(|| format!("q = {}", p.pow(f)), ok);
    }
    s.finish()
}

fn generic_sum(p: u64, k: i64, l: i64) -> Result<PhiGammaModule, PhiGammaError> {
    let r = field(p);
    let lam = r.from_int(l);
    let d1 = PhiGammaModule::tame(r, k, lam)?;
    let d2 = PhiGammaModule::tame(r, (1 - k).rem_euclid(p as i64 - 1), r.inv(lam).expect("unit"))?;
    PhiGammaModule::direct_sum(&d1, &d2)
}

fn suite_lsd(level: Level) -> SuiteResult {
    let mut s = Suite::new("sign_decomposition");
    let primes: &[u64] = match level {
        Level::Quick => &[3],
        Level::Full => &[3, 5],
    };
    for &p in primes {
        for k in 0..p as i64 - 1 {
            for l in 1..p as i64 {
                if l == 1 && k <= 1 {
                    continue;
                }
                let ok = generic_sum(p, k, l)
                    .and_then(|d| crate::phigamma::lsd_decompose(&d, &LsdOptions::for_module(&d)))
                    .map(|sd| {
                        let want = if k % 2 == 0 { 1 } else { -1 };
                        sd.agreement && sd.path_b.map(|b| b.sub_label) == Some(want)
                    })
                    .unwrap_or(false);
                s.record(|| format!("p = {p}, omega^{k} mu_{l} + dual"), ok);
            }
        }
    }
    if level == Level::Full {
        for (p, chars, x) in [
            (3u64, [(2u64, 1u64), (2, 2)], vec![(-1i64, 1u64), (0, 2)]),
            (3, [(1, 2), (1, 1)], vec![(-1, 1), (0, 2)]),
            (5, [(2, 2), (3, 1)], vec![(-1, 1)]),
        ] {
            let spec = json!({
                "coeff": {"p": p, "m": 1, "f": 1},
                "construction": "extension",
                "chars": chars.iter().map(|&(a, g)| json!({"at_p": a, "at_gen": g})).collect::<Vec<_>>(),
                "cocycle": x.iter().map(|&(e, c)| json!([e, c])).collect::<Vec<_>>(),
            });
            let ok = ModuleSpec::from_json(&spec.to_string())
                .and_then(|m| m.build())
                .and_then(|b| {
                    crate::phigamma::lsd_decompose(&b.module, &LsdOptions { schedule: b.schedule, w_limit_n: b.w_limit_n })
                })
                .map(|sd| sd.agreement)
                .unwrap_or(false);
            s.record(|| format!("p = {p}, extension {chars:?}"), ok);
        }
    }
    s.finish()
}

fn suite_mazur_rubin() -> SuiteResult {
    let mut s = Suite::new("mazur_rubin");
    let sum = json!({"coeff": {"p": 3, "m": 1, "f": 1}, "construction": "sum",
        "chars": [{"at_p": 2, "at_gen": 1}, {"at_p": 2, "at_gen": 2}]});
    for (j1, m1, j2, m2) in [(1, 1, 1, 1), (1, 1, 2, 2), (2, 1, 2, 3), (1, 2, 2, 1)] {
        let pair = json!({
            "first": {"module": sum, "positive_summand": j1, "weight": m1},
            "second": {"module": sum, "positive_summand": j2, "weight": m2},
        });
        let ok = PairSpec::from_json(&pair.to_string())
            .and_then(|p| mr_compatibility(&p))
            .map(|r| r.holds)
            .unwrap_or(false);
        s.record(|| format!("summands ({j1}, {m1}) vs ({j2}, {m2})"), ok);
    }
    for p in [3, 5, 7] {
        let ok = anomalous_split_check(field(p)).map(|r| r.holds).unwrap_or(false);
        s.record(|| format!("split F(1) + F at p = {p}"), ok);
    }
    s.finish()
}

/// Agreement of consecutive partial sums of `w_*` grows with the limit index.
fn suite_w_star_sweep() -> SuiteResult {
    let mut s = Suite::new("w_star_stabilization");
    for (p, k, l) in [(3u64, 1i64, 2i64), (3, 0, 2), (5, 2, 3)] {
        let r = field(p);
        let top = if p == 3 { 4 } else { 3 };
        let ok = (|| -> Result<bool, PhiGammaError> {
            let d = PhiGammaModule::tame(r, k, r.from_int(l))?;
            // (1+X) phi(X^-1 + ... ) has psi = 0
            let len = 3 * p.pow(top) as i64;
            let v = vec![crate::series::TruncatedLaurentSeries::from_ints(r, -1, &[1, 2, 1, 1], len / p as i64)];
            let fv = d.phi(&v)?;
            let x = vec![fv[0].mul(&crate::series::TruncatedLaurentSeries::one_plus_x_pow(r, 1, len))?.truncate(len)];
            let mut prev = w_star_partial(&d, &x, 1)?;
            let mut last = i64::MIN;
            for n in 2..=top {
                let cur = w_star_partial(&d, &x, n)?;
                let diff = cur[0].sub(&prev[0])?;
                let agree = if diff.is_zero() { diff.precision() } else { diff.valuation() };
                if agree <= last {
                    return Ok(false);
                }
                last = agree;
                prev = cur;
            }
            Ok(true)
        })()
        .unwrap_or(false);
        s.record(|| format!("p = {p}, omega^{k} mu_{l}"), ok);
    }
    s.finish()
}

pub fn cmd_selfcheck(a: &SelfcheckArgs) -> Result<Outcome, CliError> {
    let mut suites = vec![suite_gamma(), suite_tables(a.level), suite_herr(a.level), suite_lagrangian()];
    suites.push(suite_lsd(a.level));
    suites.push(suite_mazur_rubin());
    if a.level == Level::Full {
        suites.push(suite_w_star_sweep());
    }
    let passed = suites.iter().all(|s| s.passed == s.total);
    let report = RunReport {
        command: json!({"name": "selfcheck", "level": a.level}),
        version: VERSION.into(),
        input_digest: digest(format!("selfcheck {:?}", a.level).as_bytes()),
        results: json!({ "suites": suites }),
        certificates: json!({"arithmetic": "exact"}),
        passed,
    };
    Ok(Outcome { text: report.to_json(), passed })
}
