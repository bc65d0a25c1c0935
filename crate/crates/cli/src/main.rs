mod config;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use calderon_core::matrix::{doi_schur, lipschitz_commutator_check, triangular_truncate};
use calderon_core::operators::{calderon, calderon_discrete, cesaro, cesaro_dual, hilbert_discrete, hilbert_step};
use calderon_core::optimal_range::fnorm_upper;
use calderon_core::rearrangement::{mu_seq, mu_step};
use calderon_core::spaces::Normed;
use calderon_core::verify::{self, fmt17, RunParams, CSV_HEADER};
use calderon_core::{IntervalStep, LipschitzFn, MatrixOp, Seq, SpaceSpec, StepFunction};
use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::Config;

#[derive(Parser, Debug)]
#[command(name = "calderon", version, about = "Rearrangement-invariant norms, Calderón-type operators and their verification suites")]
struct Cli {
    /// `key = value` file supplying defaults for any flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Emit CSV instead of JSON.
    #[arg(long, global = true)]
    csv: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decreasing rearrangement of a step function or sequence.
    Rearrange {
        #[arg(long = "in")]
        input: Option<PathBuf>,
    },
    /// (Quasi-)norm of a step function or sequence.
    Norm {
        #[arg(long)]
        space: Option<String>,
        #[arg(long = "in")]
        input: Option<PathBuf>,
    },
    /// Apply an operator: cesaro, cesaro-dual, calderon, calderon-d, hilbert, hilbert-d.
    Apply {
        #[arg(long)]
        op: Option<String>,
        #[arg(long = "in")]
        input: Option<PathBuf>,
        /// `probe`, `log:<lo>:<hi>:<per-decade>`, or a comma-separated list of points.
        #[arg(long)]
        grid: Option<String>,
        /// Output length for calderon-d.
        #[arg(long)]
        len: Option<usize>,
        /// Output window `lo:hi` for hilbert-d.
        #[arg(long, allow_hyphen_values = true)]
        window: Option<String>,
    },
    /// Triangular truncation of a matrix.
    Truncate {
        #[arg(long = "in")]
        input: Option<PathBuf>,
    },
    /// Singular values (and optionally vectors) of a matrix.
    Svd {
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        vectors: bool,
    },
    /// Double operator integral `T_{f[1]}(V)`, or with `--b` the commutator estimate for `[f(A), B]`.
    Doi {
        #[arg(long)]
        a: Option<PathBuf>,
        #[arg(long)]
        f: Option<String>,
        #[arg(long)]
        v: Option<PathBuf>,
        #[arg(long)]
        b: Option<PathBuf>,
        #[arg(long = "space-e")]
        space_e: Option<String>,
        #[arg(long = "space-f")]
        space_f: Option<String>,
    },
    /// LP upper bound for the optimal-range norm with its witness and certificate.
    Fnorm {
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        space: Option<String>,
        #[arg(long)]
        depth: Option<u32>,
    },
    /// Run a verification suite by id, or `all`.
    Verify {
        id: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        /// Comma-separated sizes.
        #[arg(long)]
        sizes: Option<String>,
        /// Omit run-dependent metadata so identical runs give identical bytes.
        #[arg(long)]
        compare: bool,
    },
}

/// Outcome of a command that ran to completion.
enum Status {
    Ok,
    AssertionFailed,
}

struct Output {
    json: Value,
    csv: Vec<String>,
}

fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn parse_as<T: serde::de::DeserializeOwned>(v: Value, what: &str) -> Result<T> {
    serde_json::from_value(v).map_err(|e| anyhow!("input is not a valid {what}: {e}"))
}

enum Element {
    Step(StepFunction),
    Seq(Seq),
}

fn read_element(path: &Path) -> Result<Element> {
    let v = read_json(path)?;
    if v.get("breakpoints").is_some() {
        Ok(Element::Step(parse_as(v, "step function")?))
    } else if v.get("entries").is_some() {
        Ok(Element::Seq(parse_as(v, "sequence")?))
    } else {
        bail!("{}: expected a step function {{breakpoints, values}} or a sequence {{offset, entries}}", path.display())
    }
}

fn read_matrix(path: &Path) -> Result<MatrixOp> {
    parse_as(read_json(path)?, "matrix {n, re, im}")
}

fn require<T>(v: Option<T>, what: &str) -> Result<T> {
    v.ok_or_else(|| anyhow!("missing --{what}"))
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn parse_space(s: &str) -> Result<SpaceSpec> {
    s.parse().map_err(|e| anyhow!("bad space {s:?}: {e}"))
}

fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    if spec == "probe" {
        return Ok(verify::probe_grid());
    }
    if let Some(rest) = spec.strip_prefix("log:") {
        let parts: Vec<f64> = rest
            .split(':')
            .map(|p| p.parse::<f64>().map_err(|e| anyhow!("bad grid {spec:?}: {e}")))
            .collect::<Result<_>>()?;
        let [lo, hi, per] = parts[..] else { bail!("grid must be log:<lo>:<hi>:<per-decade>") };
        if !(lo > 0.0 && hi > lo && per >= 1.0) {
            bail!("grid needs 0 < lo < hi and at least one point per decade");
        }
        let theta = (5f64.sqrt() - 1.0) / 2.0;
        let (a, b) = (lo.log10(), hi.log10());
        let count = ((b - a) * per).floor() as usize;
        return Ok((0..count).map(|k| 10f64.powf(a + (k as f64 + theta) / per)).collect());
    }
    spec.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| anyhow!("bad grid point {p:?}: {e}")))
        .collect()
}

fn parse_sizes(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|e| anyhow!("bad size {p:?}: {e}")))
        .collect()
}

fn step_rows(x: &StepFunction) -> Vec<String> {
    std::iter::once("left,right,value".to_string())
        .chain(x.pieces().map(|(l, r, v)| format!("{},{},{}", fmt17(l), fmt17(r), fmt17(v))))
        .collect()
}

fn seq_rows(a: &Seq) -> Vec<String> {
    std::iter::once("n,value".to_string())
        .chain(a.iter().map(|(n, v)| format!("{n},{}", fmt17(v))))
        .collect()
}

fn matrix_rows(m: &MatrixOp) -> Vec<String> {
    let n = m.dim();
    let mut rows = vec!["i,j,re,im".to_string()];
    for i in 0..n {
        for j in 0..n {
            let z = m.get(i, j);
            rows.push(format!("{i},{j},{},{}", fmt17(z.re), fmt17(z.im)));
        }
    }
    rows
}

fn pairs(name: &str, pts: &[(f64, f64)]) -> Output {
    Output {
        json: json!({ "operator": name, "points": pts.iter().map(|(t, v)| [*t, *v]).collect::<Vec<_>>() }),
        csv: std::iter::once("t,value".to_string())
            .chain(pts.iter().map(|(t, v)| format!("{},{}", fmt17(*t), fmt17(*v))))
            .collect(),
    }
}

fn run(cli: &Cli, cfg: &Config) -> Result<(Output, Status)> {
    let input = |flag: &Option<PathBuf>| -> Result<PathBuf> { require(cfg.pick(flag.clone(), "in")?, "in") };
    let ok = |o: Output| Ok((o, Status::Ok));
    match &cli.command {
        Command::Rearrange { input: i } => match read_element(&input(i)?)? {
            Element::Step(x) => {
                let m = mu_step(&x).into_step();
                ok(Output { json: to_json(&m), csv: step_rows(&m) })
            }
            Element::Seq(a) => {
                let m = mu_seq(&a);
                ok(Output { json: to_json(&m), csv: seq_rows(&m) })
            }
        },
        Command::Norm { space, input: i } => {
            let spec = parse_space(&require(cfg.pick(space.clone(), "space")?, "space")?)?;
            let (value, spec) = match read_element(&input(i)?)? {
                Element::Step(x) => (x.norm(&spec)?, spec),
                Element::Seq(a) => {
                    let spec = spec.as_discrete();
                    (a.norm(&spec)?, spec)
                }
            };
            ok(Output {
                json: json!({ "space": spec.to_string(), "value": value }),
                csv: vec!["space,value".into(), format!("{spec},{}", fmt17(value))],
            })
        }
        Command::Apply { op, input: i, grid, len, window } => {
            let op = require(cfg.pick(op.clone(), "op")?, "op")?;
            let path = input(i)?;
            let grid = || -> Result<Vec<f64>> { parse_grid(&cfg.pick(grid.clone(), "grid")?.unwrap_or_else(|| "probe".into())) };
            match op.as_str() {
                "cesaro" | "cesaro-dual" | "calderon" => {
                    let Element::Step(x) = read_element(&path)? else { bail!("{op} acts on step functions") };
                    let profile = match op.as_str() {
                        "cesaro" => cesaro(&x),
                        "cesaro-dual" => cesaro_dual(&x),
                        _ => calderon(&x),
                    };
                    let g = grid()?;
                    if let Some(t) = g.iter().find(|t| !(**t > 0.0)) {
                        bail!("{op} is defined on (0, ∞); grid point {t}");
                    }
                    ok(pairs(&op, &g.iter().map(|&t| (t, profile.eval(t))).collect::<Vec<_>>()))
                }
                "hilbert" => {
                    let v = read_json(&path)?;
                    let iv: IntervalStep = if v.get("intervals").is_some() {
                        parse_as(v, "interval step")?
                    } else {
                        IntervalStep::from(&parse_as::<StepFunction>(v, "step function")?)
                    };
                    let pts = grid()?
                        .into_iter()
                        .map(|t| Ok((t, hilbert_step(&iv, t)?)))
                        .collect::<Result<Vec<_>>>()?;
                    ok(pairs(&op, &pts))
                }
                "calderon-d" | "hilbert-d" => {
                    let Element::Seq(a) = read_element(&path)? else { bail!("{op} acts on sequences") };
                    if op == "calderon-d" {
                        let n = cfg.pick(*len, "len")?.unwrap_or(a.end().max(0) as usize + 1);
                        let s = calderon_discrete(&a, n)?;
                        ok(Output { json: to_json(&s), csv: seq_rows(&s) })
                    } else {
                        let (lo, hi) = match cfg.pick(window.clone(), "window")? {
                            Some(w) => {
                                let (l, h) = w.split_once(':').ok_or_else(|| anyhow!("window must be lo:hi"))?;
                                (l.parse::<i64>()?, h.parse::<i64>()?)
                            }
                            None => (a.offset(), a.end()),
                        };
                        let h = hilbert_discrete(&a, lo, hi)?;
                        let mut csv = vec!["n,re,im".to_string()];
                        csv.extend(h.entries().iter().enumerate().map(|(k, z)| {
                            format!("{},{},{}", lo + k as i64, fmt17(z.re), fmt17(z.im))
                        }));
                        ok(Output { json: to_json(&h), csv })
                    }
                }
                other => bail!("unknown operator {other:?}; expected cesaro, cesaro-dual, calderon, calderon-d, hilbert, hilbert-d"),
            }
        }
        Command::Truncate { input: i } => {
            let t = triangular_truncate(&read_matrix(&input(i)?)?);
            ok(Output { json: to_json(&t), csv: matrix_rows(&t) })
        }
        Command::Svd { input: i, vectors } => {
            let m = read_matrix(&input(i)?)?;
            let csv_rows = |s: &[f64]| {
                std::iter::once("k,sigma".to_string())
                    .chain(s.iter().enumerate().map(|(k, v)| format!("{k},{}", fmt17(*v))))
                    .collect()
            };
            if cfg.flag(*vectors, "vectors")? {
                let svd = m.svd()?;
                let csv = csv_rows(&svd.sigma);
                ok(Output { json: json!({ "sigma": svd.sigma, "u": to_json(&svd.u), "v": to_json(&svd.v) }), csv })
            } else {
                let s = m.singular_values()?;
                ok(Output { json: json!({ "sigma": s.entries() }), csv: csv_rows(s.entries()) })
            }
        }
        Command::Doi { a, f, v, b, space_e, space_f } => {
            let a = read_matrix(&require(cfg.pick(a.clone(), "a")?, "a")?)?;
            let f = LipschitzFn::parse(&require(cfg.pick(f.clone(), "f")?, "f")?)?;
            if let Some(bp) = cfg.pick(b.clone(), "b")? {
                let b = read_matrix(&bp)?;
                let se = parse_space(&cfg.pick(space_e.clone(), "space-e")?.unwrap_or_else(|| "d:lp:2".into()))?;
                let sf = parse_space(&cfg.pick(space_f.clone(), "space-f")?.unwrap_or_else(|| "d:lp:2".into()))?;
                let r = lipschitz_commutator_check(&a, &b, &f, &se, &sf)?;
                let status = if r.contraction_holds == Some(false) { Status::AssertionFailed } else { Status::Ok };
                let csv = vec![
                    "function,lip,lhs,rhs,ratio".into(),
                    format!("{},{},{},{},{}", r.function, fmt17(r.lip), fmt17(r.lhs), fmt17(r.rhs), fmt17(r.ratio)),
                ];
                Ok((Output { json: to_json(&r), csv }, status))
            } else {
                let v = read_matrix(&require(cfg.pick(v.clone(), "v")?, "v or --b")?)?;
                let out = doi_schur(&a, &f, &v)?;
                ok(Output { json: to_json(&out), csv: matrix_rows(&out) })
            }
        }
        Command::Fnorm { input: i, space, depth } => {
            let Element::Step(x) = read_element(&input(i)?)? else { bail!("fnorm acts on step functions") };
            let spec = parse_space(&cfg.pick(space.clone(), "space")?.unwrap_or_else(|| "l1".into()))?;
            let depth = cfg.pick(*depth, "depth")?.unwrap_or(2);
            let bound = fnorm_upper(&x, &spec, depth)?;
            let mut csv = vec![format!("value,{}", fmt17(bound.value))];
            csv.extend(step_rows(&bound.witness));
            ok(Output {
                json: json!({ "value": bound.value, "witness": bound.witness, "certificate": bound.certificate, "grid_points": bound.grid_points }),
                csv,
            })
        }
        Command::Verify { id, seed, trials, sizes, compare } => {
            let seed = cfg.pick(*seed, "seed")?;
            let compare = cfg.flag(*compare, "compare")?;
            let seed = match seed {
                Some(s) => s,
                None if id == "thm-5.1" => 0,
                None => bail!("verify {id} is randomized; --seed is required"),
            };
            let sizes = cfg.pick(sizes.clone(), "sizes")?.map(|s| parse_sizes(&s)).transpose()?;
            let params = RunParams { seed, trials: cfg.pick(*trials, "trials")?, sizes };
            let (json, csv, passed) = if id == "all" {
                let mut suite = verify::run_all(seed)?;
                if compare {
                    suite = suite.comparable();
                }
                let mut csv = vec![CSV_HEADER.to_string()];
                suite.reports.iter().for_each(|r| csv.extend(r.csv_rows()));
                (to_json(&suite), csv, suite.passed)
            } else {
                let mut r = verify::run_theorem(id, &params)?;
                if compare {
                    r = r.comparable();
                }
                let mut csv = vec![CSV_HEADER.to_string()];
                csv.extend(r.csv_rows());
                (to_json(&r), csv, r.passed())
            };
            Ok((Output { json, csv }, if passed { Status::Ok } else { Status::AssertionFailed }))
        }
    }
}

fn emit(cli: &Cli, cfg: &Config, out: &Output) -> Result<()> {
    let csv = cfg.flag(cli.csv, "csv")?;
    let body = if csv {
        out.csv.join("\n") + "\n"
    } else {
        serde_json::to_string_pretty(&out.json)? + "\n"
    };
    match cfg.pick(cli.out.clone(), "out")? {
        Some(path) => {
            fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
            // a JSON verify report is accompanied by its per-trial CSV
            if !csv && matches!(cli.command, Command::Verify { .. }) {
                let rows = path.with_extension("csv");
                fs::write(&rows, out.csv.join("\n") + "\n").with_context(|| format!("writing {}", rows.display()))?;
            }
        }
        None => std::io::stdout().write_all(body.as_bytes())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = (|| {
        let cfg = match &cli.config {
            Some(p) => Config::load(p)?,
            None => Config::default(),
        };
        let (out, status) = run(&cli, &cfg)?;
        emit(&cli, &cfg, &out)?;
        Ok::<_, anyhow::Error>(status)
    })();
    match result {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::AssertionFailed) => {
            eprintln!("calderon: assertion failed (see report)");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("calderon: {e:#}");
            ExitCode::from(2)
        }
    }
}
