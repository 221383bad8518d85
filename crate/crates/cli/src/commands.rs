use std::fmt;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;
use std::time::Duration;

use regpred_core::bench::{
    self, cumulative_distribution, domination_table, generate_random_radag, load_bundles,
    parse_leaves, run_matrix, save_bundle, write_cumulative_csv, write_rows_csv, Algorithm, Metric,
    RowKind,
};
use regpred_core::bisect::{run_bisect_multi, BisectError};
use regpred_core::dag::format::parse_graph;
use regpred_core::dag::{compute_distance_table, DagError};
use regpred_core::engine::EngineError;
use regpred_core::oracle::{
    parse_labels, CommandSource, CommandSpec, InteractiveSource, OracleError,
};
use regpred_core::vcs::{extract_commit_graph, RepoHandle, VcsError};
use regpred_core::{
    run_rpa, Action, EngineConfig, Radag, RegressionPoint, RpaEngine, ValidityOracle, Vertex,
};

use super::{BenchArgs, GenArgs, GitRunArgs, InteractiveArgs, RunAlgorithm, RunArgs, SearchOpts};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unreadable or malformed input, dirty worktree.
    Input(String),
    /// The search itself failed.
    Failure(String),
    /// The test command refused to decide a commit.
    Abort(String),
    /// The user quit an interactive session.
    Quit,
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Failure(_) => 1,
            CliError::Input(_) => 2,
            CliError::Abort(_) => 3,
            CliError::Quit => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::Failure(m) | CliError::Abort(m) => f.write_str(m),
            CliError::Quit => f.write_str("quit before all leaves were resolved"),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::CommandAbort { .. } => CliError::Abort(e.to_string()),
            OracleError::Aborted => CliError::Quit,
            other => CliError::Failure(other.to_string()),
        }
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::Oracle(o) => o.into(),
            EngineError::LeafNotSink(_)
            | EngineError::LeafNotInvalid(_)
            | EngineError::DuplicateLeaf(_)
            | EngineError::RootNotValid(_)
            | EngineError::UnreachableLeaf(_)
            | EngineError::Dag(_) => CliError::Input(e.to_string()),
            other => CliError::Failure(other.to_string()),
        }
    }
}

impl From<BisectError> for CliError {
    fn from(e: BisectError) -> Self {
        match e {
            BisectError::Oracle(o) => o.into(),
            other => CliError::Failure(other.to_string()),
        }
    }
}

impl From<VcsError> for CliError {
    fn from(e: VcsError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Failure(e.to_string())
    }
}

type CliResult<T = ()> = Result<T, CliError>;

/// An inclusive seed range `a..b` (also `a..=b`) or a single seed.
#[derive(Debug, Clone)]
pub struct Seeds(pub Vec<u64>);

impl FromStr for Seeds {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let num = |t: &str| {
            t.trim()
                .parse::<u64>()
                .map_err(|_| format!("bad seed `{t}`"))
        };
        let (lo, hi) = match s.split_once("..") {
            Some((a, b)) => (num(a)?, num(b.strip_prefix('=').unwrap_or(b))?),
            None => (num(s)?, num(s)?),
        };
        if lo > hi {
            return Err(format!("empty seed range `{s}`"));
        }
        Ok(Seeds((lo..=hi).collect()))
    }
}

fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_graph(path: &Path) -> CliResult<Radag> {
    parse_graph(&read_file(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn resolve_leaves(g: &Radag, ids: &[String], file: Option<&Path>) -> CliResult<Vec<Vertex>> {
    let mut names: Vec<String> = Vec::new();
    if let Some(path) = file {
        let parsed = parse_leaves(&read_file(path)?)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        names.extend(parsed.into_iter().map(|l| l.to_string()));
    }
    names.extend(ids.iter().cloned());
    if names.is_empty() {
        return Err(CliError::Input(
            "no leaves given (use --leaf or --leaves)".into(),
        ));
    }
    names
        .iter()
        .map(|n| {
            g.lookup(n)
                .map_err(|e: DagError| CliError::Input(e.to_string()))
        })
        .collect()
}

fn engine_config(opts: &SearchOpts, leaves: usize) -> CliResult<EngineConfig> {
    let propagate =
        match opts.propagate_flag() {
            Some(true) if leaves < 2 => return Err(CliError::Input(
                "--propagate needs several leaves: with one leaf there is nothing to propagate to"
                    .into(),
            )),
            Some(p) => p,
            None => leaves > 1,
        };
    Ok(EngineConfig {
        strategy: opts.strategy.into(),
        propagate,
    })
}

fn result_line(g: &Radag, leaf: Vertex, rp: RegressionPoint, distance: u32) -> String {
    format!(
        "LEAF {} REGRESSION {} -> {} (distance {distance})",
        g.id(leaf),
        g.id(rp.valid_end),
        g.id(rp.invalid_end)
    )
}

fn print_results(g: &Radag, results: &[(Vertex, RegressionPoint)], queries: usize) -> CliResult {
    let leaves: Vec<Vertex> = results.iter().map(|&(l, _)| l).collect();
    let table = compute_distance_table(g, &leaves).map_err(|e| CliError::Failure(e.to_string()))?;
    let mut out = io::stdout().lock();
    for &(leaf, rp) in results {
        let d = table.dist(rp.invalid_end, leaf).ok_or_else(|| {
            CliError::Failure(format!("result for `{}` does not reach it", g.id(leaf)))
        })?;
        writeln!(out, "{}", result_line(g, leaf, rp, d))?;
    }
    writeln!(out, "QUERIES {queries}")?;
    Ok(())
}

pub fn run(args: RunArgs) -> CliResult {
    let g = load_graph(&args.graph)?;
    let labels = parse_labels(&read_file(&args.labels)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", args.labels.display())))?;
    let leaves = resolve_leaves(&g, &args.leaves.leaf, args.leaves.leaves.as_deref())?;
    let mut oracle = ValidityOracle::recorded(labels);
    let results = match args.algorithm {
        RunAlgorithm::Rpa => {
            let config = engine_config(&args.search, leaves.len())?;
            run_rpa(&g, &leaves, &mut oracle, config)?.results
        }
        RunAlgorithm::Bisect => {
            if args.search.propagate {
                return Err(CliError::Input(
                    "--propagate applies to --algorithm rpa only".into(),
                ));
            }
            run_bisect_multi(&g, &leaves, &mut oracle)?
                .into_iter()
                .map(|(l, o)| (l, o.point))
                .collect()
        }
    };
    print_results(&g, &results, oracle.distinct_queries())
}

pub fn git_run(args: GitRunArgs) -> CliResult {
    let refs = if args.leaf.is_empty() {
        vec!["HEAD".to_string()]
    } else {
        args.leaf.clone()
    };
    let probe = RepoHandle::open(&args.repo, refs.clone())?;
    let mut scope = Vec::with_capacity(refs.len());
    for r in &refs {
        scope.push(probe.resolve(r)?.to_string());
    }
    let repo = RepoHandle::open(&args.repo, scope.clone())?;
    if !args.force && repo.is_dirty()? {
        return Err(VcsError::DirtyWorktree.into());
    }
    let spec = CommandSpec::new(
        &args.repo,
        args.test.clone(),
        Duration::from_secs(args.timeout),
    )
    .map_err(CliError::Input)?;
    let (g, _) = extract_commit_graph(&repo)?;
    let leaves: Vec<Vertex> = scope
        .iter()
        .map(|h| g.lookup(h).map_err(|e| CliError::Input(e.to_string())))
        .collect::<CliResult<_>>()?;
    let config = engine_config(&args.search, leaves.len())?;

    let head = repo.head()?;
    let source = CommandSource::new(spec, Some(repo.clone())).force_checkout(args.force);
    let mut oracle = ValidityOracle::new(source);
    let outcome = search_repo(&g, &leaves, &mut oracle, config, args.trust_endpoints);
    let restored = repo.restore(&head);
    let results = outcome?;
    restored
        .map_err(|e| CliError::Failure(format!("could not restore the original checkout: {e}")))?;
    print_results(&g, &results, oracle.distinct_queries())
}

fn search_repo(
    g: &Radag,
    leaves: &[Vertex],
    oracle: &mut ValidityOracle,
    config: EngineConfig,
    trust_endpoints: bool,
) -> CliResult<Vec<(Vertex, RegressionPoint)>> {
    if !trust_endpoints {
        let root = g.root();
        if !g.is_virtual(root) && !oracle.query(g.id(root))? {
            return Err(CliError::Failure(format!(
                "test fails at the root commit `{}`",
                g.id(root)
            )));
        }
        for &leaf in leaves {
            if oracle.query(g.id(leaf))? {
                return Err(CliError::Failure(format!(
                    "test passes at leaf `{}`",
                    g.id(leaf)
                )));
            }
        }
    }
    Ok(run_rpa(g, leaves, oracle, config)?.results)
}

pub fn interactive(args: InteractiveArgs) -> CliResult {
    let g = load_graph(&args.graph)?;
    let leaves = resolve_leaves(&g, &args.leaf_ids, args.leaves.as_deref())?;
    let config = engine_config(&args.search, leaves.len())?;
    let table = compute_distance_table(&g, &leaves).map_err(|e| CliError::Input(e.to_string()))?;
    let mut engine = RpaEngine::new(g.clone(), &leaves, config)?;
    let stdin = io::stdin();
    let mut asker = InteractiveSource::new(stdin.lock(), io::stdout());
    let mut resolved = 0;
    loop {
        match engine.next_action()? {
            Action::Query(v) => match asker.ask(g.id(v)) {
                Ok(valid) => engine.submit_answer(v, valid)?,
                Err(OracleError::Aborted) => {
                    let mut out = io::stdout().lock();
                    writeln!(out, "PARTIAL {resolved} OF {} LEAVES", leaves.len())?;
                    writeln!(out, "QUERIES {}", engine.query_log().len())?;
                    return Err(CliError::Quit);
                }
                Err(e) => return Err(e.into()),
            },
            Action::Emit { leaf, point } => {
                resolved += 1;
                let d = table.dist(point.invalid_end, leaf).unwrap_or_default();
                println!("{}", result_line(&g, leaf, point, d));
            }
            Action::Done => break,
        }
    }
    println!("QUERIES {}", engine.query_log().len());
    Ok(())
}

pub fn bench(args: BenchArgs) -> CliResult {
    let algorithms = match args.algorithms.as_deref() {
        None => Algorithm::ALL.to_vec(),
        Some(list) => Algorithm::parse_list(list).map_err(|e| CliError::Input(e.to_string()))?,
    };
    if algorithms.is_empty() {
        return Err(CliError::Input("no algorithms given".into()));
    }
    let mut instances = Vec::new();
    if let Some(dir) = &args.instances {
        instances.extend(load_bundles(dir).map_err(|e| CliError::Input(e.to_string()))?);
    }
    if let Some(params) = &args.random {
        let seeds = args
            .seeds
            .as_ref()
            .map(|s| s.0.as_slice())
            .unwrap_or_default();
        for &seed in seeds {
            instances.push(
                generate_random_radag(params, seed).map_err(|e| CliError::Input(e.to_string()))?,
            );
        }
    }
    if args.instances.is_none() && args.random.is_none() {
        return Err(CliError::Input(
            "no instances: give --instances or --random with --seeds".into(),
        ));
    }

    let rows = run_matrix(&instances, &algorithms);
    let to_stdout = args.out.as_os_str() == "-";
    let csv_result = if to_stdout {
        write_rows_csv(&rows, io::stdout().lock(), !args.per_leaf)
    } else {
        let file = fs::File::create(&args.out)
            .map_err(|e| CliError::Input(format!("{}: {e}", args.out.display())))?;
        write_rows_csv(&rows, BufWriter::new(file), !args.per_leaf)
    };
    csv_result.map_err(bench_failure)?;

    if let (Some(metric), Some(dir)) = (args.cumulative, &args.cumulative_dir) {
        fs::create_dir_all(dir).map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?;
        for alg in &algorithms {
            let name = alg.to_string();
            let mine: Vec<_> = rows
                .iter()
                .filter(|r| r.algorithm == name)
                .cloned()
                .collect();
            let Ok(table) = cumulative_distribution(&mine, metric) else {
                continue;
            };
            let path = dir.join(format!("{name}.{metric}.csv"));
            let file = fs::File::create(&path)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            write_cumulative_csv(&table, BufWriter::new(file)).map_err(bench_failure)?;
        }
    }

    let mut summary: Box<dyn Write> = if to_stdout {
        Box::new(io::stderr().lock())
    } else {
        Box::new(io::stdout().lock())
    };
    writeln!(summary, "{}", domination_table(&rows, Metric::Queries))?;
    writeln!(summary, "{}", domination_table(&rows, Metric::Distance))?;
    let errors: Vec<_> = rows
        .iter()
        .filter_map(|r| match &r.kind {
            RowKind::Error(m) => Some(format!("{} {}: {m}", r.instance, r.algorithm)),
            _ => None,
        })
        .collect();
    if !errors.is_empty() {
        for e in &errors {
            eprintln!("error: {e}");
        }
        return Err(CliError::Failure(format!("{} run(s) failed", errors.len())));
    }
    Ok(())
}

fn bench_failure(e: bench::BenchError) -> CliError {
    CliError::Failure(e.to_string())
}

pub fn gen(args: GenArgs) -> CliResult {
    for &seed in &args.seeds.0 {
        let instance = generate_random_radag(&args.params, seed)
            .map_err(|e| CliError::Input(e.to_string()))?;
        let path = save_bundle(&args.out, &instance).map_err(|e| CliError::Input(e.to_string()))?;
        println!("{}", path.display());
    }
    Ok(())
}
