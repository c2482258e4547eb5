//! `modres`: command-line driver for the degree-residue experiments.
//!
//! Exit codes: 0 success, 2 input-domain or parse error, 3 capacity error,
//! 1 anything else (I/O, internal).

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use modres::char_sums::{prob_joint, prob_sum_mod, prob_symmetric, Method};
use modres::experiment::{
    decay_experiment, expectation_experiment, partition_experiment, threshold_scan, to_csv, to_json, with_workers,
    DecayKind, ExperimentConfig, PartitionMode,
};
use modres::subgraph::{count_good, count_good_alpha, exact_f, exact_f_alpha, local_search_f, LocalSearchParams};
use modres::thresholds::{h_argmax, root_x0, threshold_k, threshold_k_alpha};
use modres::{sample_gnp, DistributionSpec, Error, Graph, ModParams, ResidueVector};
use serde_json::json;

#[derive(Parser)]
#[command(name = "modres", version, about = "Induced subgraphs with all degrees congruent to r mod q")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Master seed; trial i uses a seed derived from (seed, i).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 1)]
    trials: u64,
    /// Worker threads; output never depends on this.
    #[arg(long, global = true, env = "MODRES_WORKERS")]
    workers: Option<usize>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format; inferred from the --out extension when omitted.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Graph file in the text adjacency format (overrides sampling).
    #[arg(long, global = true)]
    graph: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 2)]
    q: u32,
    #[arg(long, global = true, default_value_t = 0)]
    r: u32,
    /// Residue-class frequencies, e.g. 1/3,2/3.
    #[arg(long, global = true)]
    alpha: Option<String>,
    #[arg(long, global = true)]
    n: Option<u64>,
    #[arg(long, global = true)]
    k: Option<usize>,
    #[arg(long, global = true)]
    t: Option<usize>,
    /// Step budget per restart for heuristic searches.
    #[arg(long, global = true)]
    budget: Option<u64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum DistKind {
    Sum,
    Sym,
    Joint,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Enumeration,
    Fourier,
    ClosedForm,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Enumeration => Method::Enumeration,
            MethodArg::Fourier => Method::Fourier,
            MethodArg::ClosedForm => Method::ClosedForm,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DecayArg {
    Sum,
    Symmetric,
    Asym,
}

#[derive(Subcommand)]
enum Command {
    /// Threshold k(n,q), or k(n,q,alpha) with --alpha.
    Threshold,
    /// Largest root x0 of h for --alpha (default: the indicator of r).
    EntropyRoot,
    /// Exact residue probabilities.
    Dist {
        #[arg(value_enum)]
        kind: DistKind,
        /// Residue for the sum kind.
        #[arg(long, default_value_t = 0)]
        a: u32,
        /// Row residues (joint) as a comma list.
        #[arg(long)]
        u: Option<String>,
        /// Degree residues (sym) or column residues (joint).
        #[arg(long)]
        v: Option<String>,
        #[arg(long, value_enum, default_value = "enumeration")]
        method: MethodArg,
    },
    /// Normalised leading-term errors for m in a range.
    Decay {
        #[arg(long, value_enum, default_value = "symmetric")]
        mode: DecayArg,
        #[arg(long, default_value_t = 1)]
        m_min: usize,
        #[arg(long)]
        m_max: usize,
    },
    /// f(G,r,q) (or f(G,alpha,q)) by exhaustive search.
    FExact,
    /// Heuristic search for a good set of size --k (default: threshold).
    FSearch {
        #[arg(long, default_value_t = LocalSearchParams::default().restarts)]
        restarts: u32,
    },
    /// Number of good k-subsets.
    Count,
    /// Minimum number of good parts, per trial graph.
    PartitionExact {
        #[arg(long)]
        cap: Option<usize>,
    },
    /// Balanced partition search into --t parts (default q+1), per trial graph.
    PartitionSearch,
    /// Mean of X_k over trial graphs against its exact expectation.
    Expect,
    /// f(G,r,q) over trial graphs against the threshold.
    Scan,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run_from<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("modres: {e}");
            match e {
                Failure::Core(Error::InputDomain(_) | Error::Parse { .. }) => 2,
                Failure::Core(Error::Capacity(_)) => 3,
                _ => 1,
            }
        }
    }
}

#[derive(Debug)]
enum Failure {
    Core(Error),
    Io(String),
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type Res<T> = std::result::Result<T, Failure>;

fn domain_err<T>(msg: impl Into<String>) -> Res<T> {
    Err(Failure::Core(Error::InputDomain(msg.into())))
}

fn parse_residues(text: &str, q: u32) -> Res<ResidueVector> {
    let entries = text
        .split(',')
        .map(|s| s.trim().parse::<u32>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Failure::Core(Error::InputDomain(format!("bad residue list {text:?}: {e}"))))?;
    Ok(ResidueVector::new(q, entries)?)
}

fn alpha(c: &Common) -> Res<Option<DistributionSpec>> {
    Ok(match &c.alpha {
        Some(a) => Some(DistributionSpec::parse(a)?),
        None => None,
    })
}

fn need_n(c: &Common) -> Res<u64> {
    c.n.map_or_else(|| domain_err("--n is required"), Ok)
}

fn load_graph(path: &Path) -> Res<Graph> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    Ok(Graph::decode(&text)?)
}

/// The --graph file, or `G(n, 1/2)` sampled from --seed.
fn single_graph(c: &Common) -> Res<Graph> {
    match &c.graph {
        Some(p) => load_graph(p),
        None => Ok(sample_gnp(need_n(c)? as usize, c.seed)),
    }
}

fn experiment_config(c: &Common) -> Res<ExperimentConfig> {
    let graph = c.graph.as_deref().map(load_graph).transpose()?;
    let n = match (&graph, c.n) {
        (Some(g), _) => g.n(),
        (None, Some(n)) => n as usize,
        (None, None) => return domain_err("--n or --graph is required"),
    };
    Ok(ExperimentConfig {
        n,
        q: c.q,
        r: c.r,
        alpha: alpha(c)?,
        k: c.k,
        t: c.t,
        cap: None,
        trials: c.trials,
        seed: c.seed,
        budget: c.budget,
        graph,
    })
}

fn format_for(c: &Common, default: Format) -> Format {
    c.format.unwrap_or_else(|| match c.out.as_ref().and_then(|p| p.extension()).and_then(|e| e.to_str()) {
        Some("csv") => Format::Csv,
        Some("json") => Format::Json,
        _ => default,
    })
}

fn emit(c: &Common, text: &str) -> Res<()> {
    match &c.out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json(c: &Common, value: &serde_json::Value) -> Res<()> {
    emit(c, &to_json(value)?)
}

fn emit_rows<T: serde::Serialize>(c: &Common, rows: &[T]) -> Res<()> {
    let text = match format_for(c, Format::Csv) {
        Format::Csv => to_csv(rows)?,
        Format::Json => to_json(rows)?,
    };
    emit(c, &text)
}

fn run(cli: &Cli) -> Res<()> {
    let c = &cli.common;
    let started = std::time::Instant::now();
    let result = with_workers(c.workers, || dispatch(&cli.command, c))?;
    // Timing goes to stderr so output files stay reproducible.
    eprintln!("modres: finished in {:.3}s", started.elapsed().as_secs_f64());
    result
}

fn dispatch(cmd: &Command, c: &Common) -> Res<()> {
    match cmd {
        Command::Threshold => {
            let n = need_n(c)?;
            let report = match alpha(c)? {
                Some(a) => threshold_k_alpha(n, &a)?,
                None => threshold_k(n, c.q)?,
            };
            emit_json(c, &json!(report))
        }
        Command::EntropyRoot => {
            let a = match alpha(c)? {
                Some(a) => a,
                None => DistributionSpec::indicator(c.q, c.r)?,
            };
            emit_json(
                c,
                &json!({ "alpha": a, "q": a.q(), "x_star": h_argmax(&a), "x0": root_x0(&a) }),
            )
        }
        Command::Dist { kind, a, u, v, method } => {
            let method = Method::from(*method);
            let (inputs, p) = match kind {
                DistKind::Sum => {
                    let n = need_n(c)?;
                    (json!({ "n": n, "a": a, "q": c.q }), prob_sum_mod(n, *a, c.q, method)?)
                }
                DistKind::Sym => {
                    let Some(v) = v else { return domain_err("sym needs --v") };
                    let v = parse_residues(v, c.q)?;
                    (json!({ "v": v.entries(), "q": c.q }), prob_symmetric(&v, method)?)
                }
                DistKind::Joint => {
                    let (Some(u), Some(v)) = (u, v) else { return domain_err("joint needs --u and --v") };
                    let (u, v) = (parse_residues(u, c.q)?, parse_residues(v, c.q)?);
                    (
                        json!({ "u": u.entries(), "v": v.entries(), "q": c.q }),
                        prob_joint(&u, &v, method)?,
                    )
                }
            };
            emit_json(c, &json!({ "input": inputs, "probability": p }))
        }
        Command::Decay { mode, m_min, m_max } => {
            let kind = match mode {
                DecayArg::Sum => DecayKind::Sum,
                DecayArg::Symmetric => DecayKind::Symmetric,
                DecayArg::Asym => DecayKind::Asym,
            };
            emit_rows(c, &decay_experiment(c.q, *m_min, *m_max, kind)?)
        }
        Command::FExact => {
            let g = single_graph(c)?;
            let res = match alpha(c)? {
                Some(a) => exact_f_alpha(&g, c.q, &a)?,
                None => exact_f(&g, ModParams::new(c.r, c.q)?)?,
            };
            emit_json(c, &json!(res))
        }
        Command::FSearch { restarts } => {
            let g = single_graph(c)?;
            let mp = ModParams::new(c.r, c.q)?;
            let target = match c.k {
                Some(k) => k,
                None => (threshold_k(g.n() as u64, c.q)?.k as usize).min(g.n()),
            };
            let mut params = LocalSearchParams {
                seed: c.seed,
                restarts: *restarts,
                ..Default::default()
            };
            if let Some(b) = c.budget {
                params.max_steps = b;
            }
            let res = local_search_f(&g, mp, target, &params)?;
            emit_json(c, &json!({ "k_target": target, "result": res }))
        }
        Command::Count => {
            let g = single_graph(c)?;
            let Some(k) = c.k else { return domain_err("count needs --k") };
            let count = match alpha(c)? {
                Some(a) => count_good_alpha(&g, k, c.q, &a)?,
                None => count_good(&g, k, ModParams::new(c.r, c.q)?)?,
            };
            emit_json(c, &json!({ "n": g.n(), "k": k, "q": c.q, "r": c.r, "count": count }))
        }
        Command::PartitionExact { cap } => {
            let cfg = ExperimentConfig {
                cap: *cap,
                ..experiment_config(c)?
            };
            emit_rows(c, &partition_experiment(&cfg, PartitionMode::Exact)?)
        }
        Command::PartitionSearch => emit_rows(c, &partition_experiment(&experiment_config(c)?, PartitionMode::Heuristic)?),
        Command::Expect => emit_rows(c, &expectation_experiment(&experiment_config(c)?)?),
        Command::Scan => emit_rows(c, &threshold_scan(&experiment_config(c)?)?),
    }
}
