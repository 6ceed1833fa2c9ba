#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod output;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use config::{parse_list, Resolver};
use serde_json::{json, Value};
use sosreg::calculus::{verify_interpolation_bound, verify_odd_even_control};
use sosreg::counterex::{
    estimate_delta_nu, log_grid, monotone_bounds, scan, threshold, BoundsOptions, DeltaNuOptions, FamilyParams,
};
use sosreg::cover::{verify_slowly_varying, ControlDistanceParams, Variant};
use sosreg::exprlang::{catalog_entries, catalog_function, parse_function_file, FunctionDef};
use sosreg::monotone::{classify_monotonicity, monotone_functional, verify_power_bound, MonotoneOptions};
use sosreg::roots::{verify_power_smoothness_chain, verify_root_regularity};
use sosreg::sos::{check_differential_inequalities, decompose, verify_decomposition, DecomposeParams, HolderOptions};
use sosreg::{Ball, FunctionHandle, Modulus};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "sosreg", version, about = "Sum-of-squares decompositions of nonnegative smooth functions")]
struct Cli {
    /// TOML file of `key = value` settings; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Cap on worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Where to write the JSON report (stdout if absent).
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a decomposition and check its residual.
    Decompose(DecomposeArgs),
    /// Build a decomposition and check residual and Hölder bounds of the roots.
    Verify(VerifyArgs),
    /// Estimate the omega_s-monotone functional.
    Monotone(MonotoneArgs),
    /// Regularity of sqrt f and of powers f^gamma.
    Roots(RootsArgs),
    /// The five-variable counterexample family.
    Counterex {
        #[command(subcommand)]
        cmd: CounterexCmd,
    },
    /// Numerical checks of single inequalities.
    Check {
        #[command(subcommand)]
        cmd: CheckCmd,
    },
    /// List the built-in functions.
    Catalog,
}

#[derive(Args, Debug, Clone)]
struct FunctionArgs {
    /// Catalog name or expression.
    #[arg(long)]
    function: Option<String>,
    /// File of `def name(vars) = expr` lines.
    #[arg(long)]
    function_file: Option<PathBuf>,
    /// Definition to take from the function file.
    #[arg(long)]
    name: Option<String>,
    #[arg(long)]
    dim: Option<usize>,
    /// Comma-separated variable names of an expression.
    #[arg(long)]
    vars: Option<String>,
    /// Catalog parameter `name=value`; repeatable.
    #[arg(long = "param")]
    params: Vec<String>,
    /// Comma-separated center of the region.
    #[arg(long)]
    center: Option<String>,
    #[arg(long)]
    radius: Option<f64>,
}

#[derive(Args, Debug, Clone)]
struct DecomposeArgs {
    #[command(flatten)]
    f: FunctionArgs,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    floor: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long)]
    kappa_samples: Option<usize>,
    /// Verification points.
    #[arg(long)]
    samples: Option<usize>,
    /// Write the cell table as CSV.
    #[arg(long)]
    cells_csv: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct VerifyArgs {
    #[command(flatten)]
    d: DecomposeArgs,
    #[arg(long)]
    per_ball: Option<usize>,
    #[arg(long)]
    max_balls: Option<usize>,
}

#[derive(Args, Debug, Clone)]
struct MonotoneArgs {
    #[command(flatten)]
    f: FunctionArgs,
    #[arg(long)]
    s: Option<f64>,
    /// List or a:b:step of s values.
    #[arg(long)]
    s_grid: Option<String>,
    #[arg(long)]
    c_max: Option<f64>,
    #[arg(long)]
    outer_samples: Option<usize>,
    #[arg(long)]
    inner_samples: Option<usize>,
    #[arg(long)]
    t_min: Option<f64>,
    #[arg(long)]
    ascent_steps: Option<usize>,
    /// Also check |nabla^m f| <= C f^{s'^m}.
    #[arg(long)]
    s_prime: Option<f64>,
    #[arg(long)]
    m_max: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Args, Debug, Clone)]
struct RootsArgs {
    #[command(flatten)]
    f: FunctionArgs,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    delta_grid: Option<String>,
    #[arg(long)]
    gamma_grid: Option<String>,
    #[arg(long)]
    m_max: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    t_min: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum CounterexCmd {
    /// CSV sweep of S, T and verdicts over s.
    Scan(ScanArgs),
    /// s_0 = gamma_alpha^-2.
    Threshold {
        #[arg(long)]
        gamma_alpha: Option<f64>,
    },
    /// Gap between L and sums of squares of quadratic forms.
    DeltaNu(DeltaNuArgs),
    /// Two-sided functional bound against the searched monotone functional.
    Bounds(BoundsArgs),
}

#[derive(Args, Debug, Clone)]
struct FamilyArgs {
    #[arg(long)]
    s_prime: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    t_min: Option<f64>,
    #[arg(long)]
    per_octave: Option<usize>,
}

#[derive(Args, Debug, Clone)]
struct ScanArgs {
    #[command(flatten)]
    fam: FamilyArgs,
    #[arg(long)]
    s_range: Option<String>,
    #[arg(long)]
    beta: Option<f64>,
    /// Write the sweep here instead of stdout.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct DeltaNuArgs {
    #[arg(long)]
    nu: Option<usize>,
    #[arg(long)]
    c0: Option<f64>,
    #[arg(long)]
    sphere_samples: Option<usize>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    final_samples: Option<usize>,
}

#[derive(Args, Debug, Clone)]
struct BoundsArgs {
    #[command(flatten)]
    fam: FamilyArgs,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum CheckCmd {
    OddEven(CheckArgs),
    Interp(InterpArgs),
    SlowVary(SlowArgs),
    DiffIneq(DiffArgs),
}

#[derive(Args, Debug, Clone)]
struct CheckArgs {
    #[command(flatten)]
    f: FunctionArgs,
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Args, Debug, Clone)]
struct InterpArgs {
    #[command(flatten)]
    c: CheckArgs,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Args, Debug, Clone)]
struct SlowArgs {
    #[command(flatten)]
    c: CheckArgs,
    #[arg(long)]
    delta: Option<f64>,
}

#[derive(Args, Debug, Clone)]
struct DiffArgs {
    #[command(flatten)]
    c: CheckArgs,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
}

/// What a command produced: the JSON result, whether its check passed, and
/// any text for stdout besides the report.
struct Outcome {
    result: Value,
    pass: bool,
    text: Option<String>,
    print_report: bool,
}

impl Outcome {
    fn report(result: Value, pass: bool) -> Self {
        Outcome { result, pass, text: None, print_report: true }
    }
}

fn default_vars(n: usize) -> Vec<String> {
    let names: &[&str] = match n {
        1 => &["x"],
        2 => &["x", "y"],
        3 => &["x", "y", "z"],
        4 => &["w", "x", "y", "z"],
        5 => &["w", "x", "y", "z", "t"],
        _ => &[],
    };
    if names.is_empty() {
        (1..=n).map(|i| format!("x{i}")).collect()
    } else {
        names.iter().map(|s| s.to_string()).collect()
    }
}

/// The function handle and the region to work on.
fn load_function(r: &mut Resolver, a: &FunctionArgs) -> Result<(FunctionHandle, Ball)> {
    let src = r.opt::<String>("function", a.function.clone())?;
    let file = r.opt::<PathBuf>("function-file", a.function_file.clone())?;
    let name = r.opt::<String>("name", a.name.clone())?;
    let params = r.params(&a.params)?;
    let dim = r.opt::<usize>("dim", a.dim)?;
    let vars = r.opt::<String>("vars", a.vars.clone())?;
    let center = r.opt::<String>("center", a.center.clone())?;
    let radius = r.opt::<f64>("radius", a.radius)?;
    let def: FunctionDef = match (src, file) {
        (Some(_), Some(_)) => bail!("give either `function` or `function-file`, not both"),
        (None, None) => bail!("missing field `function`"),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            let defs = parse_function_file(&text)?;
            let d = match &name {
                Some(n) => defs.into_iter().find(|d| &d.name == n).ok_or_else(|| anyhow!("no definition `{n}` in file"))?,
                None => defs.into_iter().next().ok_or_else(|| anyhow!("function file has no definitions"))?,
            };
            let n = d.vars.len();
            FunctionDef::new(&d.name, d.vars, d.body, Ball::unit(n))?
        }
        (Some(s), None) => {
            if catalog_entries().iter().any(|e| e.name == s) {
                catalog_function(&s, &params)?
            } else {
                if !params.is_empty() {
                    bail!("field `param` applies to catalog functions only");
                }
                let vs: Vec<String> = match (&vars, dim) {
                    (Some(v), _) => v.split(',').map(|x| x.trim().to_string()).collect(),
                    (None, Some(n)) => default_vars(n),
                    (None, None) => bail!("expression needs field `dim` or `vars`"),
                };
                if let Some(n) = dim {
                    if n != vs.len() {
                        bail!("field `dim` = {n} but {} variables given", vs.len());
                    }
                }
                let refs: Vec<&str> = vs.iter().map(|s| s.as_str()).collect();
                FunctionDef::parse("f", &refs, &s)?
            }
        }
    };
    let h = FunctionHandle::from_def(&def)?;
    let n = h.arity();
    let c = match center {
        Some(c) => {
            let v = parse_list(&c).context("field `center`")?;
            if v.len() != n {
                bail!("field `center` has {} coordinates, function has {n} variables", v.len());
            }
            v
        }
        None => def.domain.center.clone(),
    };
    let rad = radius.unwrap_or(def.domain.radius);
    if !(rad > 0.0) {
        bail!("field `radius` must be positive");
    }
    Ok((h, Ball::new(c, rad)))
}

fn decompose_params(r: &mut Resolver, a: &DecomposeArgs, region: Ball) -> Result<(DecomposeParams, usize)> {
    let mut p = DecomposeParams::new(region);
    p.delta = r.get("delta", a.delta, p.delta)?;
    p.eta = r.get("eta", a.eta, p.eta)?;
    p.s = r.get("s", a.s, p.s)?;
    p.c = r.opt("c", a.c)?;
    p.floor = r.get("floor", a.floor, p.floor)?;
    p.tol = r.get("tol", a.tol, p.tol)?;
    p.max_depth = r.get("max-depth", a.max_depth, p.max_depth)?;
    p.kappa_samples = r.get("kappa-samples", a.kappa_samples, p.kappa_samples)?;
    let samples = r.get("samples", a.samples, 2000)?;
    Ok((p, samples))
}

fn run_decompose(r: &mut Resolver, a: &DecomposeArgs, holder: Option<(Option<usize>, Option<usize>)>) -> Result<Outcome> {
    let (f, region) = load_function(r, &a.f)?;
    let (p, samples) = decompose_params(r, a, region.clone())?;
    let cells_csv = r.opt::<PathBuf>("cells-csv", a.cells_csv.clone())?;
    let ho = match holder {
        Some((pb, mb)) => {
            let d = HolderOptions::default();
            Some(HolderOptions {
                per_ball: r.get("per-ball", pb, d.per_ball)?,
                max_balls: r.get("max-balls", mb, d.max_balls)?,
            })
        }
        None => None,
    };
    r.finish()?;
    let d = decompose(&f, &p)?;
    let v = verify_decomposition(&f, &d, &region.sample(samples), ho)?;
    let mut rep = d.report();
    let pass = v.pass;
    rep.verification = Some(v);
    if let Some(path) = cells_csv {
        let rows: Vec<Value> = rep.cell_table.iter().map(|c| serde_json::to_value(c).unwrap()).collect();
        std::fs::write(&path, output::csv(&rows)).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(Outcome::report(serde_json::to_value(&rep)?, pass))
}

fn run_monotone(r: &mut Resolver, a: &MonotoneArgs) -> Result<Outcome> {
    let (f, region) = load_function(r, &a.f)?;
    let s = r.opt::<f64>("s", a.s)?;
    let grid = r.opt::<String>("s-grid", a.s_grid.clone())?;
    let s_grid = match (s, grid) {
        (_, Some(g)) => config::parse_grid(&g).context("field `s-grid`")?,
        (Some(s), None) => vec![s],
        (None, None) => bail!("missing field `s` (or `s-grid`)"),
    };
    let d = MonotoneOptions::default();
    let o = MonotoneOptions {
        outer_samples: r.get("outer-samples", a.outer_samples, d.outer_samples)?,
        inner_samples: r.get("inner-samples", a.inner_samples, d.inner_samples)?,
        t_min: r.get("t-min", a.t_min, d.t_min)?,
        region: Some(region.clone()),
        ascent_steps: r.get("ascent-steps", a.ascent_steps, d.ascent_steps)?,
    };
    let c_max = r.get("c-max", a.c_max, 1e6)?;
    let s_prime = r.opt::<f64>("s-prime", a.s_prime)?;
    let m_max = r.get("m-max", a.m_max, 2)?;
    let samples = r.get("samples", a.samples, 400)?;
    r.finish()?;
    let first = monotone_functional(&f, &Modulus::scale(s_grid[0])?, &o);
    let class = classify_monotonicity(&f, &s_grid, c_max, &o)?;
    let mut pass = class.nearly_monotone;
    let power = match s_prime {
        Some(sp) => {
            let rep = verify_power_bound(&f, s_grid[0], sp, m_max, &region, samples, o.t_min)?;
            pass &= rep.pass;
            Some(rep)
        }
        None => None,
    };
    let functional = match first {
        Ok(rep) => serde_json::to_value(rep)?,
        Err(e) => json!({ "error": e.to_string() }),
    };
    Ok(Outcome::report(json!({ "functional": functional, "classification": class, "power_bound": power }), pass))
}

fn run_roots(r: &mut Resolver, a: &RootsArgs) -> Result<Outcome> {
    let (f, region) = load_function(r, &a.f)?;
    let s = r.get("s", a.s, 0.9)?;
    let m = r.get("m", a.m, 2)?;
    let deltas = r.grid("delta-grid", a.delta_grid.clone(), "0.1,0.25,0.5")?;
    let gammas = r.grid("gamma-grid", a.gamma_grid.clone(), "0.5,1")?;
    let m_max = r.get("m-max", a.m_max, 2)?;
    let samples = r.get("samples", a.samples, 400)?;
    let t_min = r.get("t-min", a.t_min, 1e-2)?;
    r.finish()?;
    let reg = verify_root_regularity(&f, s, m, &deltas, &region, samples)?;
    let chain = verify_power_smoothness_chain(&f, &gammas, m_max, &region, samples, t_min)?;
    let pass = reg.pass && chain.pass;
    Ok(Outcome::report(json!({ "root_regularity": reg, "power_chain": chain }), pass))
}

fn family(r: &mut Resolver, a: &FamilyArgs, rho_default: f64) -> Result<(FamilyParams, Vec<f64>)> {
    let sp = r.get("s-prime", a.s_prime, 0.5)?;
    let rho = r.get("rho", a.rho, rho_default)?;
    let t_min = r.get("t-min", a.t_min, 10f64.powf(-2.5))?;
    let per = r.get("per-octave", a.per_octave, 8)?;
    if !(t_min > 0.0 && t_min < 1.0) {
        bail!("field `t-min` must lie in (0, 1)");
    }
    Ok((FamilyParams::standard(Some(sp), rho)?, log_grid(t_min, per)))
}

fn run_counterex(r: &mut Resolver, c: &CounterexCmd, seed: u64) -> Result<Outcome> {
    match c {
        CounterexCmd::Threshold { gamma_alpha } => {
            let a = r.get("gamma-alpha", *gamma_alpha, 1.0)?;
            r.finish()?;
            let s0 = threshold(a)?;
            let g = sosreg::counterex::gamma_alpha(a)?;
            Ok(Outcome {
                result: json!({ "alpha": a, "gamma_alpha": g, "s0": s0 }),
                pass: true,
                text: Some(format!("s0 = {s0:.5}")),
                print_report: false,
            })
        }
        CounterexCmd::Scan(a) => {
            let (p, grid) = family(r, &a.fam, 0.5)?;
            let s_values = r.grid("s-range", a.s_range.clone(), "0.1:0.9:0.1")?;
            let beta = r.get("beta", a.beta, 0.7)?;
            let csv_path = r.opt::<PathBuf>("csv", a.csv.clone())?;
            r.finish()?;
            let rows = scan(&p, &s_values, beta, &grid)?;
            let mut text = String::from("s,beta,rho,S,T,verdictSOS,verdictMonotone\n");
            for row in &rows {
                text.push_str(&format!(
                    "{},{},{},{:e},{:e},{},{}\n",
                    row.s,
                    row.beta,
                    row.rho,
                    row.s_value,
                    row.t_value,
                    output::sos_label(row.verdict_sos),
                    row.verdict_monotone
                ));
            }
            let text = match csv_path {
                Some(path) => {
                    std::fs::write(&path, &text).with_context(|| format!("writing {}", path.display()))?;
                    None
                }
                None => Some(text.trim_end().to_string()),
            };
            Ok(Outcome { result: serde_json::to_value(&rows)?, pass: true, text, print_report: false })
        }
        CounterexCmd::DeltaNu(a) => {
            let nu = r.get("nu", a.nu, 1)?;
            let c0 = r.get("c0", a.c0, 3.0)?;
            let mut o = DeltaNuOptions::new(nu, c0);
            o.seed = seed;
            o.sphere_samples = r.get("sphere-samples", a.sphere_samples, o.sphere_samples)?;
            o.restarts = r.get("restarts", a.restarts, o.restarts)?;
            o.iterations = r.get("iterations", a.iterations, o.iterations)?;
            o.final_samples = r.get("final-samples", a.final_samples, o.final_samples)?;
            r.finish()?;
            let d = estimate_delta_nu(&o)?;
            let pass = d.estimate > 0.0 && d.stable;
            Ok(Outcome::report(serde_json::to_value(&d)?, pass))
        }
        CounterexCmd::Bounds(a) => {
            let (p, grid) = family(r, &a.fam, 0.9)?;
            let s = r.get("s", a.s, 0.1)?;
            let delta = r.get("delta", a.delta, 0.02)?;
            r.finish()?;
            let o = BoundsOptions { t_grid: grid, ..BoundsOptions::default() };
            let b = monotone_bounds(&p, &Modulus::scale(s)?, delta, &o)?;
            let pass = b.sandwich == Some(true) && b.witness_s.matches && b.witness_t.matches;
            Ok(Outcome::report(serde_json::to_value(&b)?, pass))
        }
    }
}

fn run_check(r: &mut Resolver, c: &CheckCmd) -> Result<Outcome> {
    let rep = match c {
        CheckCmd::OddEven(a) => {
            let (f, region) = load_function(r, &a.f)?;
            let n = r.get("samples", a.samples, 400)?;
            r.finish()?;
            verify_odd_even_control(&f, &region, n)?
        }
        CheckCmd::Interp(a) => {
            let (f, region) = load_function(r, &a.c.f)?;
            let n = r.get("samples", a.c.samples, 200)?;
            let m = r.get("m", a.m, 1)?;
            let k = r.get("k", a.k, 2)?;
            r.finish()?;
            verify_interpolation_bound(&f, &region, m, k, n)?
        }
        CheckCmd::SlowVary(a) => {
            let (f, region) = load_function(r, &a.c.f)?;
            let n = r.get("samples", a.c.samples, 400)?;
            let delta = r.get("delta", a.delta, 0.25)?;
            r.finish()?;
            verify_slowly_varying(&f, &ControlDistanceParams::new(delta, Variant::Full)?, &region, n)?
        }
        CheckCmd::DiffIneq(a) => {
            let (f, region) = load_function(r, &a.c.f)?;
            let n = r.get("samples", a.c.samples, 400)?;
            let delta = r.get("delta", a.delta, 0.25)?;
            let eta = r.get("eta", a.eta, 0.3)?;
            r.finish()?;
            check_differential_inequalities(&f, delta, eta, &region, n)?
        }
    };
    let pass = rep.pass;
    Ok(Outcome::report(serde_json::to_value(&rep)?, pass))
}

fn command_name(c: &Command) -> String {
    match c {
        Command::Decompose(_) => "decompose".into(),
        Command::Verify(_) => "verify".into(),
        Command::Monotone(_) => "monotone".into(),
        Command::Roots(_) => "roots".into(),
        Command::Counterex { cmd } => format!(
            "counterex {}",
            match cmd {
                CounterexCmd::Scan(_) => "scan",
                CounterexCmd::Threshold { .. } => "threshold",
                CounterexCmd::DeltaNu(_) => "delta-nu",
                CounterexCmd::Bounds(_) => "bounds",
            }
        ),
        Command::Check { cmd } => format!(
            "check {}",
            match cmd {
                CheckCmd::OddEven(_) => "odd-even",
                CheckCmd::Interp(_) => "interp",
                CheckCmd::SlowVary(_) => "slow-vary",
                CheckCmd::DiffIneq(_) => "diff-ineq",
            }
        ),
        Command::Catalog => "catalog".into(),
    }
}

fn run(cli: Cli) -> Result<bool> {
    let mut r = Resolver::load(cli.config.as_deref())?;
    let threads = r.opt::<usize>("threads", cli.threads)?;
    let seed = r.get("seed", cli.seed, 0u64)?;
    let out_path = r.opt::<PathBuf>("output", cli.output.clone())?;
    if let Some(t) = threads {
        if t == 0 {
            bail!("field `threads` must be at least 1");
        }
        sosreg::par::set_threads(t);
    }
    let outcome = match &cli.command {
        Command::Decompose(a) => run_decompose(&mut r, a, None)?,
        Command::Verify(a) => run_decompose(&mut r, &a.d, Some((a.per_ball, a.max_balls)))?,
        Command::Monotone(a) => run_monotone(&mut r, a)?,
        Command::Roots(a) => run_roots(&mut r, a)?,
        Command::Counterex { cmd } => run_counterex(&mut r, cmd, seed)?,
        Command::Check { cmd } => run_check(&mut r, cmd)?,
        Command::Catalog => {
            r.finish()?;
            let entries: Vec<Value> = catalog_entries()
                .iter()
                .map(|e| json!({ "name": e.name, "params": e.params, "formula": e.formula, "note": e.note }))
                .collect();
            Outcome { text: Some(output::catalog_table()), result: Value::Array(entries), pass: true, print_report: false }
        }
    };
    let report = json!({
        "command": command_name(&cli.command),
        "config": Value::Object(r.resolved.clone()),
        "pass": outcome.pass,
        "result": outcome.result,
    });
    let body = serde_json::to_string_pretty(&report)?;
    let mut stdout = std::io::stdout().lock();
    if let Some(t) = &outcome.text {
        emit(&mut stdout, t)?;
    }
    match out_path {
        Some(p) => std::fs::write(&p, body + "\n").with_context(|| format!("writing {}", p.display()))?,
        None if outcome.print_report => emit(&mut stdout, &body)?,
        None => {}
    }
    Ok(outcome.pass)
}

/// Writes a line to stdout; a closed pipe on the reader side is not an error.
fn emit(out: &mut impl Write, text: &str) -> Result<()> {
    match writeln!(out, "{text}") {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
