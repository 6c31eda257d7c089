use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use lipfree_core::generate::{gen_instance, InstanceKind};
use lipfree_core::io::{InputFormat, SpaceDocument};
use lipfree_core::report::{self, AnalysisReport, Verification};
use lipfree_core::CommandError;

const EXIT_INVALID: u8 = 2;
const EXIT_VERIFY_FAILED: u8 = 3;

#[derive(Parser)]
#[command(name = "lipfree", version, about = "Exact analysis of finite pointed metric spaces")]
struct Cli {
    /// Print the full JSON report instead of a summary.
    #[arg(long, global = true)]
    json: bool,
    /// Also write the JSON report (or generated space) to this file.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Input {
    /// Space as matrix JSON, CSV, or tree JSON.
    path: PathBuf,
    /// How to read the input; guessed from the file when omitted.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Matrix,
    Tree,
}

impl Input {
    fn format(&self) -> Option<InputFormat> {
        self.format.map(|f| match f {
            Format::Matrix => InputFormat::Matrix,
            Format::Tree => InputFormat::Tree,
        })
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Validate the metric; report the four-point, ultrametric, sep and diam facts.
    Check(Input),
    /// Build the minimal tree containing the space.
    Realize(Input),
    /// Free-space norm of a vector, or Lipschitz norm of a function.
    Norm {
        #[command(flatten)]
        input: Input,
        /// JSON {"coeffs": {...}} or {"values": {...}}.
        vector: PathBuf,
    },
    /// Decide whether the free space is isometric to l1, with certificates.
    Verdict {
        /// Input space, or a certificate when --check is given.
        #[command(flatten)]
        input: Input,
        /// Re-verify a stored verdict certificate instead.
        #[arg(long)]
        check: bool,
    },
    /// Banach-Mazur lower bounds against l1^n.
    Bm(Input),
    /// Re-derive every numeric claim of a stored report.
    Verify { report: PathBuf },
    /// Generate a random instance.
    Gen {
        #[arg(value_parser = clap::value_parser!(InstanceKind))]
        kind: InstanceKind,
        size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode> {
    let outcome = match &cli.command {
        Cmd::Check(input) => report::cmd_check(&input.path, input.format()),
        Cmd::Realize(input) => report::cmd_realize(&input.path, input.format()),
        Cmd::Norm { input, vector } => report::cmd_norm(&input.path, vector, input.format()),
        Cmd::Verdict { input, check: true } => return verify(cli, &input.path, Some("verdict")),
        Cmd::Verdict { input, check: false } => report::cmd_verdict(&input.path, input.format()),
        Cmd::Bm(input) => report::cmd_bm(&input.path, input.format()),
        Cmd::Verify { report } => return verify(cli, report, None),
        Cmd::Gen { kind, size, seed } => return generate(cli, *kind, *size, *seed),
    };
    match outcome {
        Ok(report) => {
            emit(cli, &report)?;
            Ok(ExitCode::SUCCESS)
        }
        Err(e) => Ok(invalid(&e)),
    }
}

fn invalid(e: &CommandError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(EXIT_INVALID)
}

fn emit(cli: &Cli, report: &AnalysisReport) -> Result<()> {
    let json = serde_json::to_string_pretty(report)?;
    if let Some(out) = &cli.out {
        write(out, &json)?;
    }
    if cli.json {
        println!("{json}");
    } else {
        print!("{}", summary(report));
    }
    Ok(())
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, format!("{text}\n")).with_context(|| format!("writing {}", path.display()))
}

fn verify(cli: &Cli, path: &Path, expect: Option<&str>) -> Result<ExitCode> {
    let verification = match report::cmd_verify(path) {
        Ok(v) => v,
        Err(e) => return Ok(invalid(&e.into())),
    };
    if let Some(expected) = expect {
        if verification.command != expected {
            eprintln!("error: {} holds a {:?} report, not a {expected} certificate", path.display(), verification.command);
            return Ok(ExitCode::from(EXIT_INVALID));
        }
    }
    if cli.json {
        println!("{}", serde_json::to_string_pretty(&verification)?);
    } else {
        print!("{}", verification_summary(&verification));
    }
    Ok(if verification.passed() { ExitCode::SUCCESS } else { ExitCode::from(EXIT_VERIFY_FAILED) })
}

fn generate(cli: &Cli, kind: InstanceKind, size: usize, seed: u64) -> Result<ExitCode> {
    let space = match gen_instance(kind, size, seed) {
        Ok(space) => space,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(ExitCode::from(EXIT_INVALID));
        }
    };
    let json = serde_json::to_string_pretty(&SpaceDocument::from_space(&space))?;
    match &cli.out {
        Some(out) => write(out, &json)?,
        None => println!("{json}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn verification_summary(v: &Verification) -> String {
    let mut out = String::new();
    for c in v.failures() {
        out += &format!("FAILED {}", c.name);
        if let Some(detail) = &c.detail {
            out += &format!(": {detail}");
        }
        out.push('\n');
    }
    let passed = v.checks.iter().filter(|c| c.passed).count();
    let status = if v.passed() { "verified" } else { "verification failed" };
    out += &format!("{} report {status} ({passed}/{} checks passed)\n", v.command, v.checks.len());
    out
}

fn number(v: &Value) -> String {
    match (v["value"].as_str(), v["approx"].as_str()) {
        (Some(exact), Some(approx)) if exact != approx => format!("{exact} (~{approx})"),
        (Some(exact), _) => exact.to_string(),
        _ => "undefined".to_string(),
    }
}

fn list(v: &Value) -> String {
    let items: Vec<String> = v
        .as_array()
        .map(|a| a.iter().map(|x| x.as_str().map_or_else(|| x.to_string(), str::to_string)).collect())
        .unwrap_or_default();
    format!("[{}]", items.join(", "))
}

fn tree_lines(tree: &Value) -> String {
    let nodes = tree["nodes"].as_array().cloned().unwrap_or_default();
    let name = |id: &Value| {
        nodes
            .iter()
            .find(|n| &n["id"] == id)
            .and_then(|n| n["label"].as_str().map(str::to_string))
            .unwrap_or_else(|| format!("#{id}"))
    };
    let mut out = String::new();
    for e in tree["edges"].as_array().into_iter().flatten() {
        out += &format!("  {} -- {}  {}\n", name(&e["u"]), name(&e["v"]), e["len"].as_str().unwrap_or("?"));
    }
    out
}

fn summary(report: &AnalysisReport) -> String {
    let r = &report.result;
    let mut out = String::new();
    match report.command.as_str() {
        "check" => {
            out += &format!("points: {} (base {})\n", r["points"], r["base"].as_str().unwrap_or("?"));
            let pass = |v: &Value, key: &str| {
                if v["pass"].as_bool() == Some(true) {
                    "pass".to_string()
                } else {
                    format!("fail at {}", list(&v[key]))
                }
            };
            out += &format!("four-point condition: {}\n", pass(&r["four_point"], "quadruple"));
            out += &format!("ultrametric: {}\n", pass(&r["ultrametric"], "triple"));
            out += &format!("diam: {}\nsep: {}\n", number(&r["diam"]), number(&r["sep"]));
        }
        "realize" => {
            out += "edges:\n";
            out += &tree_lines(&r["tree"]);
            out += &format!("branching nodes: {}\n", list(&r["branching"]));
            out += &format!("missing branch points: {}\n", list(&r["missing"]));
        }
        "norm" => {
            out += &format!("{} norm: {}\n", r["kind"].as_str().unwrap_or("?"), number(&r["norm"]));
            for s in r["plan"].as_array().into_iter().flatten() {
                out += &format!(
                    "  move {} from {} to {}\n",
                    s["amount"].as_str().unwrap_or("?"),
                    s["from"].as_str().unwrap_or("?"),
                    s["to"].as_str().unwrap_or("?")
                );
            }
            if !r["attained_at"].is_null() {
                out += &format!("attained at {}\n", list(&r["attained_at"]));
            }
        }
        "verdict" => {
            out += &format!("verdict: {}\n", r["tag"].as_str().unwrap_or("?"));
            match r["tag"].as_str() {
                Some("NotZeroHyperbolic") => out += &format!("four-point violation at {}\n", list(&r["quadruple"])),
                Some("IsometricToL1") => out += &tree_lines(&r["tree"]),
                Some("NotIsometric") => {
                    let p = &r["primal"];
                    out += &format!(
                        "primal witness: molecules {} and {}, distance {}\n",
                        list(&p["mu"]),
                        list(&p["nu"]),
                        number(&p["distance"])
                    );
                    let d = &r["dual"];
                    out += &format!(
                        "dual witness: z = {}, distance {}\n",
                        d["z"].as_str().unwrap_or("?"),
                        number(&d["distance"])
                    );
                }
                _ => {}
            }
        }
        "bm" => {
            out += &format!("formula_bound: {}\n", number(&r["formula_bound"]));
            out += &format!("certified_bound: {}\n", number(&r["certified_bound"]));
            out += &format!("epsilon: {}\n", number(&r["epsilon"]));
            let selected = r["selected"].as_array().cloned().unwrap_or_default();
            let name = |k: &Value| {
                selected
                    .iter()
                    .find(|m| &m["index"] == k)
                    .map(|m| format!("f({},{})", m["i"].as_str().unwrap_or("?"), m["j"].as_str().unwrap_or("?")))
                    .unwrap_or_default()
            };
            out += &format!(
                "worst midpoint pair: {} and {}, norm {}\n",
                name(&r["worst_pair"][0]),
                name(&r["worst_pair"][1]),
                number(&r["worst_norm"])
            );
            if r["exhaustive"].as_bool() != Some(true) {
                out += "subset chosen greedily\n";
            }
        }
        other => out += &format!("unrecognized command {other}\n"),
    }
    out
}
