use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use skipfree::dividends::{self, Objective};
use skipfree::embedding::{self, LevyChainParams, LevyScale};
use skipfree::golden::{self, GoldenModels};
use skipfree::model::parse_probability;
use skipfree::{passage, verify, ClaimDistribution, DiscountedModel, ScaleTable};

/// Scale functions, ruin and dividend problems for upwards skip-free random walks.
#[derive(Debug, Parser)]
#[command(name = "skipfree", version)]
struct Cli {
    /// Claim-law JSON file, e.g. {"type":"table","pmf":["2/3","2/9","0","1/9"]}.
    #[arg(long, global = true)]
    model: Option<PathBuf>,
    /// Discount factor in (0, 1], as a decimal or a ratio such as 150/169.
    #[arg(long, global = true, default_value = "1")]
    v: String,
    #[arg(long, global = true, default_value_t = 100)]
    xmax: usize,
    #[arg(long, global = true, default_value_t = 200)]
    bmax: usize,
    #[arg(long, global = true, default_value_t = verify::DEFAULT_SEED)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    out: Format,
    /// Store tables scaled by φ_v^x so large ranges do not overflow.
    #[arg(long, global = true)]
    rescaled: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ObjectiveArg {
    Definetti,
    Modified,
    Doubly,
}

impl From<ObjectiveArg> for Objective {
    fn from(o: ObjectiveArg) -> Self {
        match o {
            ObjectiveArg::Definetti => Objective::Definetti,
            ObjectiveArg::Modified => Objective::ModifiedDefinetti,
            ObjectiveArg::Doubly => Objective::DoublyReflected,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tables of W_v, ΔW_v, Z_v and Z_{1,v} on 0..=xmax.
    Scale,
    /// Discounted (v < 1) or eventual (v = 1) ruin on 0..=xmax; with --w,
    /// the joint transform of ruin time and deficit.
    Ruin {
        #[arg(long)]
        w: Option<String>,
    },
    /// First-passage quantities from --x with upper level --b.
    Passage {
        #[arg(long)]
        x: i64,
        #[arg(long)]
        b: i64,
        #[arg(long)]
        w: Option<String>,
    },
    /// Optimal barrier over 0..=bmax with the full influence trace.
    Optimize {
        #[arg(long, value_enum)]
        objective: ObjectiveArg,
        #[arg(long)]
        k: Option<f64>,
        #[arg(long, default_value_t = 0)]
        x: i64,
        /// Also report the joint dividends/deficit transform at this z
        /// (de Finetti objective; needs --w).
        #[arg(long)]
        z: Option<String>,
        #[arg(long)]
        w: Option<String>,
    },
    /// Analytic formulas against Monte Carlo; one JSON line per pair.
    McVerify {
        #[arg(long, default_value_t = verify::DEFAULT_PATHS)]
        paths: usize,
    },
    /// Worked-example reference values, one PASS/FAIL line each.
    Examples {
        /// Replace Morrill's claim law (to check that the report reacts).
        #[arg(long)]
        morrill: Option<PathBuf>,
    },
    /// Lévy-chain embedding: Φ(q), W^{(q)}(mh), Z^{(q)}(mh).
    Embed {
        #[arg(long)]
        gamma: f64,
        #[arg(long, default_value_t = 1.0)]
        h: f64,
        /// Killing rates, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "0")]
        q: Vec<f64>,
        #[arg(long, default_value_t = 10)]
        m: usize,
    },
}

/// Failures, by exit code.
#[derive(Debug)]
enum Failure {
    /// Invalid configuration: exit 2.
    Config(anyhow::Error),
    /// A verification did not pass: exit 1, after the report is printed.
    Check(String),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Config(e)
    }
}

impl From<skipfree::Error> for Failure {
    fn from(e: skipfree::Error) -> Self {
        Failure::Config(e.into())
    }
}

type Outcome = Result<String, (String, Failure)>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            print!("{report}");
            ExitCode::SUCCESS
        }
        Err((report, Failure::Check(msg))) => {
            print!("{report}");
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err((_, Failure::Config(e))) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Outcome {
    let plain = |r: Result<String, Failure>| r.map_err(|f| (String::new(), f));
    match &cli.command {
        Command::Scale => plain(cmd_scale(cli)),
        Command::Ruin { w } => plain(cmd_ruin(cli, w.as_deref())),
        Command::Passage { x, b, w } => plain(cmd_passage(cli, *x, *b, w.as_deref())),
        Command::Optimize { objective, k, x, z, w } => {
            plain(cmd_optimize(cli, (*objective).into(), *k, *x, z.as_deref(), w.as_deref()))
        }
        Command::McVerify { paths } => cmd_mc_verify(*paths, cli.seed),
        Command::Examples { morrill } => cmd_examples(morrill.as_deref()),
        Command::Embed { gamma, h, q, m } => plain(cmd_embed(cli, *gamma, *h, q, *m)),
    }
}

fn load_model(path: &Path) -> anyhow::Result<ClaimDistribution> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    ClaimDistribution::from_json(&text).with_context(|| format!("model file {}", path.display()))
}

fn ratio(name: &str, text: &str) -> anyhow::Result<f64> {
    parse_probability(text).with_context(|| format!("--{name}"))
}

fn discounted(cli: &Cli) -> anyhow::Result<DiscountedModel> {
    let path = cli.model.as_deref().ok_or_else(|| anyhow!("--model is required"))?;
    let dist = load_model(path)?;
    let v = ratio("v", &cli.v)?;
    Ok(DiscountedModel::new(dist, v)?)
}

fn build_table(cli: &Cli, x_max: usize) -> anyhow::Result<ScaleTable> {
    Ok(ScaleTable::build(discounted(cli)?, x_max, cli.rescaled)?)
}

/// 17 significant digits: doubles round-trip exactly.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn to_json<T: Serialize>(value: &T) -> anyhow::Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn cmd_scale(cli: &Cli) -> Result<String, Failure> {
    let t = build_table(cli, cli.xmax + 1)?;
    let rows: Vec<[f64; 5]> = (0..=cli.xmax as i64)
        .map(|x| [x as f64, t.w(x), t.delta_w(x), t.z(x), t.z1(x)])
        .collect();
    if cli.out == Format::Json {
        #[derive(Serialize)]
        #[allow(non_snake_case)]
        struct Row {
            x: i64,
            W: f64,
            dW: f64,
            Z: f64,
            Z1: f64,
        }
        let rows: Vec<Row> = rows
            .iter()
            .map(|r| Row { x: r[0] as i64, W: r[1], dW: r[2], Z: r[3], Z1: r[4] })
            .collect();
        return Ok(to_json(&rows)?);
    }
    let mut out = String::from("x,W,dW,Z,Z1\n");
    for r in rows {
        writeln!(out, "{},{},{},{},{}", r[0] as i64, num(r[1]), num(r[2]), num(r[3]), num(r[4])).unwrap();
    }
    Ok(out)
}

fn cmd_ruin(cli: &Cli, w: Option<&str>) -> Result<String, Failure> {
    let t = build_table(cli, cli.xmax)?;
    let values: Vec<f64> = match w {
        Some(w) => {
            let zw = t.z_w(ratio("w", w)?)?;
            (0..=cli.xmax as i64).map(|x| passage::psi_vw(&t, &zw, x)).collect::<Result<_, _>>()?
        }
        None if t.v() == 1.0 => (0..=cli.xmax as i64).map(|x| passage::eventual_ruin(&t, x)).collect::<Result<_, _>>()?,
        None => (0..=cli.xmax as i64).map(|x| passage::discounted_ruin(&t, x)).collect::<Result<_, _>>()?,
    };
    if cli.out == Format::Json {
        return Ok(to_json(&values)?);
    }
    let mut out = String::from("x,psi\n");
    for (x, p) in values.iter().enumerate() {
        writeln!(out, "{x},{}", num(*p)).unwrap();
    }
    Ok(out)
}

fn cmd_passage(cli: &Cli, x: i64, b: i64, w: Option<&str>) -> Result<String, Failure> {
    let t = build_table(cli, cli.xmax.max(b.max(0) as usize))?;
    let mut fields: Vec<(&str, f64)> = vec![
        ("two_sided_up", passage::two_sided_up(&t, x, b)?),
        ("upcrossing_transform", t.phi().powf((b - x).max(0) as f64)),
    ];
    if t.dist().mean().is_finite() {
        fields.push(("expected_deficit_two_sided", passage::expected_deficit_two_sided(&t, x, b)?));
    }
    if let Some(w) = w {
        let zw = t.z_w(ratio("w", w)?)?;
        fields.push(("deficit_gf_two_sided", passage::deficit_gf_two_sided(&t, &zw, x, b)?));
    }
    if t.v() < 1.0 {
        fields.push(("discounted_ruin", passage::discounted_ruin(&t, x)?));
    } else {
        fields.push(("eventual_ruin", passage::eventual_ruin(&t, x)?));
    }
    if cli.out == Format::Json {
        let map: serde_json::Map<String, serde_json::Value> =
            fields.iter().map(|(k, v)| (k.to_string(), serde_json::json!(v))).collect();
        return Ok(to_json(&map)?);
    }
    let mut out = String::from("quantity,value\n");
    for (k, v) in fields {
        writeln!(out, "{k},{}", num(v)).unwrap();
    }
    Ok(out)
}

fn cmd_optimize(
    cli: &Cli,
    objective: Objective,
    k: Option<f64>,
    x: i64,
    z: Option<&str>,
    w: Option<&str>,
) -> Result<String, Failure> {
    match (objective, k) {
        (Objective::Definetti, Some(_)) => return Err(Failure::Config(anyhow!("--k does not apply to definetti"))),
        (Objective::ModifiedDefinetti | Objective::DoublyReflected, None) => {
            return Err(Failure::Config(anyhow!("--k is required for this objective")))
        }
        _ => {}
    }
    let t = build_table(cli, cli.bmax + 1)?;
    let result = dividends::optimize_barrier(&t, objective, k, x, cli.bmax)?;
    let joint = match (z, w) {
        (Some(z), Some(w)) => {
            let zw = t.z_w(ratio("w", w)?)?;
            Some(dividends::joint_dividends_deficit(&t, &zw, result.b_star as i64, x, ratio("z", z)?)?)
        }
        (None, None) => None,
        _ => return Err(Failure::Config(anyhow!("--z and --w go together"))),
    };
    if cli.out == Format::Csv {
        let mut out = String::from("b,H\n");
        for p in &result.trace {
            writeln!(out, "{},{}", p.b, num(p.h)).unwrap();
        }
        return Ok(out);
    }
    let mut value = serde_json::to_value(&result).map_err(anyhow::Error::from)?;
    if let Some(j) = joint {
        value["joint_dividends_deficit"] = serde_json::json!(j);
    }
    Ok(to_json(&value)?)
}

fn cmd_mc_verify(paths: usize, seed: u64) -> Outcome {
    let fail = |e: skipfree::Error| (String::new(), Failure::Config(e.into()));
    if paths == 0 {
        return Err((String::new(), Failure::Config(anyhow!("--paths must be positive"))));
    }
    let mut out = String::new();
    let mut failing = Vec::new();
    for check in verify::registry().map_err(fail)? {
        let report = check.run(paths, seed).map_err(fail)?;
        if !report.pass() {
            failing.push(report.functional.clone());
        }
        writeln!(out, "{}", serde_json::to_string(&report).unwrap()).unwrap();
    }
    let chi = verify::dividends_law_check(paths, seed).map_err(fail)?;
    let chi_pass = chi.p_value > 0.01;
    if !chi_pass {
        failing.push("dividends_law_chi_square".into());
    }
    let line = serde_json::json!({
        "functional": "dividends_law_chi_square",
        "statistic": chi.statistic,
        "dof": chi.dof,
        "p_value": chi.p_value,
        "n_paths": paths,
        "seed": seed,
        "low_power": paths < verify::LOW_POWER_PATHS,
    });
    writeln!(out, "{line}").unwrap();
    if failing.is_empty() {
        Ok(out)
    } else {
        Err((out, Failure::Check(format!("outside the {}-SE band: {}", verify::Z_BAND, failing.join(", ")))))
    }
}

fn cmd_examples(morrill: Option<&Path>) -> Outcome {
    let mut models = GoldenModels::published();
    if let Some(path) = morrill {
        models.morrill = load_model(path).map_err(|e| (String::new(), Failure::Config(e)))?;
    }
    let items = golden::run_examples_with(&models);
    let mut out = String::new();
    for it in &items {
        writeln!(out, "{}", it.line()).unwrap();
    }
    let failed = items.iter().filter(|i| !i.pass).count();
    if failed == 0 {
        Ok(out)
    } else {
        Err((out, Failure::Check(format!("{failed} of {} example checks failed", items.len()))))
    }
}

fn cmd_embed(cli: &Cli, gamma: f64, h: f64, qs: &[f64], m: usize) -> Result<String, Failure> {
    let path = cli.model.as_deref().ok_or_else(|| anyhow!("--model is required"))?;
    let params = LevyChainParams::new(load_model(path)?, gamma, h)?;
    let mut out = String::from("q,Phi,m,W,Z\n");
    let mut rows = Vec::new();
    for &q in qs {
        if !(q >= 0.0 && q.is_finite()) {
            return Err(Failure::Config(anyhow!("--q values must be nonnegative (got {q})")));
        }
        let big_phi = embedding::phi_q(&params, q)?;
        let s = LevyScale::new(params.clone(), q, m)?;
        for j in 0..=m as i64 {
            rows.push((q, big_phi, j, s.wq(j)?, s.zq(j)?));
        }
    }
    if cli.out == Format::Json {
        let json: Vec<_> = rows
            .iter()
            .map(|r| serde_json::json!({"q": r.0, "Phi": r.1, "m": r.2, "W": r.3, "Z": r.4}))
            .collect();
        return Ok(to_json(&json)?);
    }
    for (q, big_phi, j, w, z) in rows {
        writeln!(out, "{},{},{j},{},{}", num(q), num(big_phi), num(w), num(z)).unwrap();
    }
    Ok(out)
}
