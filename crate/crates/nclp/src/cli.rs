//! The `nclp` command line: one verb per library operation or suite.
//!
//! Exit codes: 0 on success, 1 when a computed check fails (the report is still
//! written), 2 on unreadable or invalid input.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use nclp_core::lp::{amplified_norm, lp_norm, Exponent};
use nclp_core::map::LinearMap;
use nclp_core::separating;
use nclp_core::suite::{self, DegreeBranch, ExampleParams, MapSuiteOptions, SuiteReport};
use nclp_core::valued::{self, EstimateOptions, S1Options};

use crate::formats::{self, ElementJson, EstimateJson, Input, MapJson, SpecJson};
use crate::report;

#[derive(Debug, Parser)]
#[command(name = "nclp", version, about = "Norms and separating maps on finite-dimensional noncommutative L^p spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Emit suite reports as CSV rows instead of JSON.
    #[arg(long, global = true)]
    pub csv: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Branch {
    Cb,
    S1,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SuiteName {
    Subhomogeneous,
    Direct,
    Main,
    Example,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// L^p norm of an element, or of an amplified element in L^p(M ⊗ M_m).
    Norm {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        element: PathBuf,
    },
    /// Lower/upper bracket of the L^p(M; S¹_m) norm of an amplified element.
    S1norm {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        element: PathBuf,
        #[arg(long, default_value_t = 2000)]
        max_iter: usize,
    },
    /// Completely bounded norm estimate of a map.
    Cbnorm(EstimateArgs),
    /// S¹-bounded norm estimate of a map.
    S1bound(EstimateArgs),
    /// Yeadon triple (w, B, J) of a separating map.
    Yeadon(MapArgs),
    /// Split of the Jordan part into multiplicative and anti-multiplicative corners.
    Split(MapArgs),
    /// Direct / anti-direct decomposition of a bijective separating map.
    Decompose(MapArgs),
    /// Inverse of a bijective separating map and its Jordan part.
    Inverse {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Central summand of the source killed by the map.
    Kernel(MapArgs),
    /// Degree bound from a transposition constant K.
    Degree {
        #[arg(long = "K")]
        k: f64,
        #[arg(long)]
        p: f64,
        #[arg(long, value_enum, default_value_t = Branch::Cb)]
        branch: Branch,
    },
    /// Run a verification suite; without --p (or --N) the suite's whole grid runs.
    Verify {
        #[arg(value_enum)]
        suite: SuiteName,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long = "N")]
        n: Option<usize>,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 4)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2)]
        m_max: usize,
        #[arg(long, default_value_t = 2)]
        restarts: usize,
    },
    /// The truncated non-surjective isometry.
    Example(ExampleArgs),
}

#[derive(Debug, clap::Args)]
pub struct MapArgs {
    #[arg(long)]
    pub map: PathBuf,
    /// Overrides the exponent stored in the map file.
    #[arg(long)]
    pub p: Option<f64>,
}

#[derive(Debug, clap::Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub map: MapArgs,
    /// Largest amplification; defaults to twice the largest block size.
    #[arg(long)]
    pub m_max: Option<usize>,
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 200)]
    pub max_iter: usize,
}

#[derive(Debug, Clone, clap::Args)]
pub struct ExampleArgs {
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub eps: f64,
    #[arg(long, default_value_t = 4)]
    pub nmax: usize,
    #[arg(long, default_value_t = 2)]
    pub m_max: usize,
    #[arg(long, default_value_t = 2)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// What a command produced.
pub enum Output {
    Value { body: Value, ok: bool },
    Reports(Vec<SuiteReport>),
}

/// An error that is the input's fault (exit 2) rather than a failed check.
#[derive(Debug)]
struct InputError(anyhow::Error);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for InputError {}

fn input<T>(r: anyhow::Result<T>) -> anyhow::Result<T> {
    r.map_err(|e| InputError(e).into())
}

fn read(path: &Path) -> anyhow::Result<String> {
    input(fs::read_to_string(path).with_context(|| format!("reading {}", path.display())))
}

fn exponent(p: f64) -> anyhow::Result<Exponent> {
    input(Exponent::new(p).map_err(Into::into))
}

fn load_map(a: &MapArgs) -> anyhow::Result<LinearMap> {
    let t = input(formats::parse_map(&read(&a.map)?))?;
    match a.p {
        Some(p) => Ok(t.with_p(exponent(p)?)),
        None => Ok(t),
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn map_value(t: &LinearMap) -> Value {
    to_value(&MapJson::from_map(t))
}

fn element_value(x: &nclp_core::Element) -> Value {
    to_value(&ElementJson::from_element(x))
}

fn estimate(args: &EstimateArgs, s1: bool) -> anyhow::Result<Output> {
    let t = load_map(&args.map)?;
    let p = t.p();
    let opts = EstimateOptions {
        m_max: args.m_max.unwrap_or_else(|| EstimateOptions::for_source(t.source()).m_max),
        restarts: args.restarts,
        seed: args.seed,
        max_iter: args.max_iter,
    };
    if opts.m_max == 0 {
        return Err(InputError(anyhow::anyhow!("--m-max must be at least 1")).into());
    }
    let est = if s1 { valued::s1_bounded_norm_estimate(&t, p, &opts) } else { valued::cb_norm_estimate(&t, p, &opts) };
    let mut body = to_value(&EstimateJson::from_estimate(&est));
    body["params"] = json!({ "p": p.value(), "m_max": opts.m_max, "restarts": opts.restarts, "seed": opts.seed, "max_iter": opts.max_iter });
    Ok(Output::Value { body, ok: true })
}

fn not_separating(e: nclp_core::Error) -> Output {
    Output::Value { body: json!({ "separating": false, "reason": e.to_string() }), ok: false }
}

fn run_suite(name: SuiteName, p: Option<f64>, n: Option<usize>, samples: usize, o: MapSuiteOptions) -> anyhow::Result<Vec<SuiteReport>> {
    let grid = |default: &[f64]| p.map_or_else(|| default.to_vec(), |v| vec![v]);
    let results: Vec<nclp_core::Result<SuiteReport>> = match name {
        SuiteName::Subhomogeneous => {
            let ns = n.map_or_else(|| vec![1, 2, 3], |v| vec![v]);
            let jobs: Vec<(usize, f64)> = ns.iter().flat_map(|&n| grid(&[1.0, 1.5, 2.0, 3.0]).into_iter().map(move |p| (n, p))).collect();
            jobs.par_iter().map(|&(n, p)| suite::suite_subhomogeneous_bounds(n, p, samples, o.seed)).collect()
        }
        SuiteName::Direct => grid(&[1.0, 1.5, 2.0, 3.0]).par_iter().map(|&p| suite::suite_direct_maps(p, &o)).collect(),
        SuiteName::Main => grid(&[1.0, 1.5, 2.0, 3.0]).par_iter().map(|&p| suite::suite_main_theorems(p, &o)).collect(),
        SuiteName::Example => {
            let jobs: Vec<(f64, f64)> = grid(&[1.5, 2.0, 3.0]).into_iter().flat_map(|p| [0.25, 0.5].map(|e| (p, e))).collect();
            jobs.par_iter()
                .map(|&(p, eps)| {
                    suite::run_example(&ExampleParams { restarts: o.restarts, seed: o.seed, ..ExampleParams::new(p, eps, 4, o.m_max) })
                })
                .collect()
        }
    };
    let mut out = Vec::with_capacity(results.len());
    for r in results {
        out.push(input(r.map_err(Into::into))?);
    }
    Ok(out)
}

pub fn execute(cmd: &Command) -> anyhow::Result<Output> {
    Ok(match cmd {
        Command::Norm { p, element } => {
            let e = exponent(*p)?;
            let (value, kind) = match input(formats::parse_input(&read(element)?))? {
                Input::Element(x) => (lp_norm(&x, e), "element"),
                Input::Amplified(x) => (amplified_norm(&x, e), "amplified"),
            };
            Output::Value { body: json!({ "value": value, "params": { "p": p, "input": kind } }), ok: true }
        }
        Command::S1norm { p, element, max_iter } => {
            let e = exponent(*p)?;
            let x = input(formats::parse_amplified(&read(element)?))?;
            let b = valued::s1_bracket(&x, e, &S1Options { max_iter: *max_iter, ..S1Options::default() }, None);
            Output::Value {
                body: json!({
                    "lower": b.lower,
                    "upper": b.upper,
                    "converged": b.converged,
                    "iterations": b.iterations,
                    "params": { "p": p, "m": x.m(), "max_iter": max_iter },
                }),
                ok: true,
            }
        }
        Command::Cbnorm(a) => estimate(a, false)?,
        Command::S1bound(a) => estimate(a, true)?,
        Command::Yeadon(a) => {
            let t = load_map(a)?;
            match separating::extract_yeadon(&t) {
                Ok(y) => Output::Value {
                    body: json!({
                        "separating": true,
                        "w": element_value(&y.w),
                        "b": element_value(&y.b),
                        "j": map_value(&y.j),
                        "norm": separating::yeadon_norm(&y, t.p()),
                    }),
                    ok: true,
                },
                Err(e) => not_separating(e),
            }
        }
        Command::Split(a) => {
            let t = load_map(a)?;
            let y = match separating::extract_yeadon(&t) {
                Ok(y) => y,
                Err(e) => return Ok(not_separating(e)),
            };
            match separating::jordan_split(&y.j) {
                Ok(s) => Output::Value {
                    body: json!({
                        "e": element_value(&s.e),
                        "f": element_value(&s.f),
                        "pi": map_value(&s.pi),
                        "sigma": map_value(&s.sigma),
                    }),
                    ok: true,
                },
                Err(e) => Output::Value { body: json!({ "error": e.to_string() }), ok: false },
            }
        }
        Command::Decompose(a) => {
            let t = load_map(a)?;
            match separating::decompose_bijective(&t) {
                Ok(d) => {
                    let spec = |s: &Option<nclp_core::AlgebraSpec>| s.as_ref().map(|s| to_value(&SpecJson::from_spec(s)));
                    let map = |m: &Option<LinearMap>| m.as_ref().map(map_value);
                    Output::Value {
                        body: json!({
                            "alpha_slots": d.alpha_slots,
                            "beta_slots": d.beta_slots,
                            "n1_slots": d.n1_slots,
                            "n2_slots": d.n2_slots,
                            "alpha": element_value(&d.alpha),
                            "beta": element_value(&d.beta),
                            "m1": spec(&d.m1),
                            "m2": spec(&d.m2),
                            "n1": spec(&d.n1),
                            "n2": spec(&d.n2),
                            "t1": map(&d.t1),
                            "t2": map(&d.t2),
                        }),
                        ok: true,
                    }
                }
                Err(e) => Output::Value { body: json!({ "error": e.to_string() }), ok: false },
            }
        }
        Command::Inverse { map, trials, seed } => {
            let t = load_map(map)?;
            match separating::inverse_analysis(&t, *trials, *seed) {
                Ok(a) => Output::Value {
                    body: json!({
                        "inverse": map_value(&a.inverse),
                        "separating": a.separating,
                        "j_inverse_matches": a.j_inverse_matches,
                        "j_defect": a.j_defect,
                        "split_relation_defect": a.split_relation_defect,
                        "params": { "trials": trials, "seed": seed },
                    }),
                    ok: a.separating && a.j_inverse_matches,
                },
                Err(e) => Output::Value { body: json!({ "error": e.to_string() }), ok: false },
            }
        }
        Command::Kernel(a) => {
            let t = load_map(a)?;
            match separating::kernel_summand(&t) {
                Ok(k) => Output::Value {
                    body: json!({
                        "m0_slots": k.m0_slots,
                        "complement_injective": k.complement_injective,
                        "m0": element_value(&k.m0),
                        "complement": element_value(&k.complement),
                    }),
                    ok: k.complement_injective,
                },
                Err(e) => Output::Value { body: json!({ "error": e.to_string() }), ok: false },
            }
        }
        Command::Degree { k, p, branch } => {
            let b = match branch {
                Branch::Cb => DegreeBranch::Cb,
                Branch::S1 => DegreeBranch::S1,
            };
            let n = input(suite::suite_degree_detection(*k, *p, b).map_err(Into::into))?;
            let branch = match branch {
                Branch::Cb => "cb",
                Branch::S1 => "s1",
            };
            Output::Value { body: json!({ "N": n, "params": { "K": k, "p": p, "branch": branch } }), ok: true }
        }
        Command::Verify { suite, p, n, samples, trials, seed, m_max, restarts } => {
            let o = MapSuiteOptions { trials: *trials, seed: *seed, m_max: *m_max, restarts: *restarts };
            Output::Reports(run_suite(*suite, *p, *n, *samples, o)?)
        }
        Command::Example(a) => {
            let params = ExampleParams { restarts: a.restarts, seed: a.seed, ..ExampleParams::new(a.p, a.eps, a.nmax, a.m_max) };
            Output::Reports(vec![input(suite::run_example(&params).map_err(Into::into))?])
        }
    })
}

fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

/// Serializes an output; returns the text and whether every check passed.
pub fn render(out: &Output, csv: bool) -> anyhow::Result<(String, bool)> {
    match out {
        Output::Value { body, ok } => {
            if csv {
                return Err(InputError(anyhow::anyhow!("--csv applies to suite reports only")).into());
            }
            Ok((serde_json::to_string_pretty(body)? + "\n", *ok))
        }
        Output::Reports(rs) => {
            let ok = rs.iter().all(SuiteReport::passed);
            if csv {
                return Ok((report::to_csv(rs)?, ok));
            }
            let ts = timestamp();
            let text = if rs.len() == 1 {
                report::to_json_string(&rs[0], &ts)?
            } else {
                let all: Vec<_> = rs.iter().map(|r| report::to_json(r, &ts)).collect();
                serde_json::to_string_pretty(&json!({
                    "schema_version": report::SCHEMA_VERSION,
                    "passed": ok,
                    "reports": all,
                    "timestamp": ts,
                }))?
            };
            Ok((text + "\n", ok))
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("NCLP_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn emit(text: &str, out: Option<&Path>) -> anyhow::Result<()> {
    match out {
        Some(path) => input(fs::write(path, text).with_context(|| format!("writing {}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
        }
    };
    configure_threads();
    let result = execute(&cli.command).and_then(|o| render(&o, cli.csv)).and_then(|(text, ok)| {
        emit(&text, cli.out.as_deref())?;
        Ok(ok)
    });
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<InputError>().is_some() {
                2
            } else {
                1
            }
        }
    }
}
