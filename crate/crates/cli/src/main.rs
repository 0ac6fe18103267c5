use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use treerules::brute::{learn_brute_with, BruteConfig};
use treerules::encoder::{
    decode, encode_with, AlphabetMode, EncoderConfig, LearnConfig, SkeletonMode, SolverConfig,
};
use treerules::exact::{learn_at_positions, learn_root};
use treerules::formula::{parse_dataset, unify_variables, FormulaOptions};
use treerules::gen::{gen_3sat, gen_random, gen_vertex_cover, gen_vertex_cover_binary, Cnf3, RandomConfig};
use treerules::instance::explain_pair;
use treerules::sat::{export_dimacs, import_model, parse_solver_status};
use treerules::transform::{apply_all, apply_at, parse_rule_file, ApplicationTrace};
use treerules::{learn, Error, LearningInstance, Position, RuleSet, Tree};

#[derive(Parser)]
#[command(name = "treerules", version, about = "Learn tree pattern transformations from pairs of trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Learn rules explaining an instance.
    Learn(LearnArgs),
    /// Apply a rule to a tree.
    Apply(ApplyArgs),
    /// Check which pairs of an instance a rule set explains.
    Check(CheckArgs),
    /// Generate an instance.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Write the CNF encoding of an instance in DIMACS format.
    Encode(EncodeArgs),
    /// Read rules and traces from a solver model of an encoding.
    Decode(DecodeArgs),
    /// Turn a formula-pair dataset into an instance.
    Ingest(IngestArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Engine {
    Sat,
    Exact,
    Brute,
}

#[derive(Clone, Copy, ValueEnum)]
enum SkeletonArg {
    Full,
    Observed,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlphabetArg {
    Global,
    PerPair,
}

#[derive(Args, Clone)]
struct EncoderArgs {
    /// Positions available to patterns and intermediate trees.
    #[arg(long, value_enum, default_value = "full")]
    skeleton: SkeletonArg,
    /// Labels available to intermediate trees.
    #[arg(long, value_enum, default_value = "global")]
    alphabet: AlphabetArg,
    /// Order rule encodings to cut symmetric models.
    #[arg(long)]
    symmetry_breaking: bool,
    /// Only apply rules at the root.
    #[arg(long)]
    root_only: bool,
    /// Use the layered encoding even for one-step instances.
    #[arg(long)]
    layered: bool,
}

impl EncoderArgs {
    fn config(&self) -> EncoderConfig {
        EncoderConfig {
            skeleton: match self.skeleton {
                SkeletonArg::Full => SkeletonMode::Full,
                SkeletonArg::Observed => SkeletonMode::Observed,
            },
            alphabet: match self.alphabet {
                AlphabetArg::Global => AlphabetMode::Global,
                AlphabetArg::PerPair => AlphabetMode::PerPair,
            },
            symmetry_breaking: self.symmetry_breaking,
            root_only: self.root_only,
            layered: self.layered,
            ..EncoderConfig::default()
        }
    }
}

#[derive(Args)]
struct InstanceArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Override the number of steps.
    #[arg(long)]
    steps: Option<usize>,
    /// Override the number of rules.
    #[arg(long = "num-rules")]
    num_rules: Option<usize>,
    /// Override the fraction of pairs that must be explained.
    #[arg(long)]
    ratio: Option<f64>,
}

impl InstanceArgs {
    fn load(&self) -> Result<LearningInstance> {
        let mut inst = LearningInstance::load(&self.instance)
            .with_context(|| format!("reading {}", self.instance.display()))?;
        if let Some(s) = self.steps {
            inst.steps = s;
        }
        if let Some(r) = self.num_rules {
            inst.rules = r;
        }
        if let Some(q) = self.ratio {
            inst.ratio = q;
        }
        inst.validate()?;
        Ok(inst)
    }
}

#[derive(Args)]
struct LearnArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, value_enum, default_value = "sat")]
    engine: Engine,
    /// Try 1, 2, ... rules and stop at the first solution.
    #[arg(long)]
    incremental: bool,
    /// Also write the encoding to this file.
    #[arg(long)]
    emit_dimacs: Option<PathBuf>,
    /// Conflict budget of the embedded solver.
    #[arg(long)]
    budget: Option<u64>,
    /// External DIMACS solver command, run through the shell.
    #[arg(long)]
    external_solver: Option<String>,
    /// Exact engine: one position per pair, separated by spaces or commas.
    #[arg(long)]
    at_positions: Option<String>,
    /// Worker threads. Only 1 is supported.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[command(flatten)]
    encoder: EncoderArgs,
}

#[derive(Args)]
struct ApplyArgs {
    /// Rule file; the first rule is used.
    #[arg(long)]
    rule: PathBuf,
    /// The tree, in bracket notation.
    #[arg(long)]
    tree: String,
    /// Apply at this position instead of the first matching one.
    #[arg(long, conflicts_with = "all")]
    at: Option<String>,
    /// Print every position where the rule applies.
    #[arg(long)]
    all: bool,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    rules: PathBuf,
    #[command(flatten)]
    instance: InstanceArgs,
}

#[derive(Subcommand)]
enum GenCommand {
    /// The vertex cover reduction.
    VertexCover {
        /// Number of vertices; defaults to the largest endpoint.
        #[arg(long)]
        vertices: Option<usize>,
        /// Edges such as "1-2,1-4,2-3".
        #[arg(long)]
        edges: String,
        #[arg(long)]
        k: usize,
        /// Encode edge labels as trees over {a, b}.
        #[arg(long)]
        binary: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The 3SAT reduction.
    #[command(name = "3sat")]
    ThreeSat {
        /// DIMACS CNF file with three literals per clause.
        #[arg(long)]
        cnf: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Random pairs produced by planted rules.
    Random {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        pairs: usize,
        /// Rule file with the rules to plant.
        #[arg(long)]
        rules: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 1)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct EncodeArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    encoder: EncoderArgs,
}

#[derive(Args)]
struct DecodeArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Solver output with a "v ..." model.
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    encoder: EncoderArgs,
}

#[derive(Args)]
struct IngestArgs {
    /// Dataset with one "attempt ::: solution" per line.
    #[arg(long)]
    formulas: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Rename variables by first occurrence in the solution.
    #[arg(long)]
    unify: bool,
    /// Collect chains of & and | into one node.
    #[arg(long)]
    nary: bool,
    #[arg(long, default_value_t = 1)]
    steps: usize,
    #[arg(long, default_value_t = 1)]
    rules: usize,
    #[arg(long, default_value_t = 1.0)]
    ratio: f64,
}

/// Outcome of a command that searches for something.
enum Found {
    Yes,
    No,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn trace_text(trace: &ApplicationTrace) -> String {
    trace
        .steps
        .iter()
        .map(|s| format!("{} at {}", s.rule, s.position))
        .collect::<Vec<_>>()
        .join(", ")
}

fn print_solution(rules: &RuleSet, traces: &[Option<ApplicationTrace>]) {
    print!("{rules}");
    for (i, t) in traces.iter().enumerate() {
        match t {
            Some(t) => println!("# pair {}: {}", i + 1, trace_text(t)),
            None => println!("# pair {}: unexplained", i + 1),
        }
    }
}

fn learn_cmd(a: &LearnArgs) -> Result<Found> {
    if a.jobs != 1 {
        bail!("only --jobs 1 is supported");
    }
    let inst = a.instance.load()?;
    let rules = match a.engine {
        Engine::Sat => {
            let cfg = LearnConfig {
                encoder: a.encoder.config(),
                solver: SolverConfig {
                    budget: a.budget,
                    external: a.external_solver.clone(),
                },
                incremental: a.incremental,
            };
            if let Some(path) = &a.emit_dimacs {
                let enc = encode_with(&inst, &cfg.encoder)?;
                fs::write(path, export_dimacs(&enc.formula)).with_context(|| format!("writing {}", path.display()))?;
            }
            return Ok(match learn(&inst, &cfg)? {
                Some(sol) => {
                    print_solution(&sol.rules, &sol.traces);
                    Found::Yes
                }
                None => {
                    eprintln!("no solution");
                    Found::No
                }
            });
        }
        Engine::Exact => {
            let rule = match &a.at_positions {
                Some(list) => {
                    let positions = list
                        .split([',', ' '])
                        .filter(|s| !s.is_empty())
                        .map(|s| s.parse::<Position>().map_err(|e| anyhow!("position '{s}': {e}")))
                        .collect::<Result<Vec<_>>>()?;
                    learn_at_positions(&inst, &positions)?
                }
                None => learn_root(&inst)?,
            };
            rule.map(|r| RuleSet::new(vec![r])).transpose()?
        }
        Engine::Brute => {
            let cfg = BruteConfig {
                root_only: a.encoder.root_only,
                ..BruteConfig::default()
            };
            learn_brute_with(&inst, &cfg)?
        }
    };
    match rules {
        Some(rules) => {
            let traces = inst.check(&rules)?;
            print_solution(&rules, &traces);
            Ok(Found::Yes)
        }
        None => {
            eprintln!("no solution");
            Ok(Found::No)
        }
    }
}

fn apply_cmd(a: &ApplyArgs) -> Result<Found> {
    let rules = parse_rule_file(&read(&a.rule)?)?;
    let rule = rules.rules().first().ok_or_else(|| anyhow!("{} holds no rule", a.rule.display()))?;
    let tree: Tree = a.tree.parse().map_err(|e| anyhow!("tree: {e}"))?;
    if a.all {
        let results = apply_all(rule, &tree);
        for (p, t) in &results {
            println!("{p}: {t}");
        }
        return Ok(if results.is_empty() { Found::No } else { Found::Yes });
    }
    let result = match &a.at {
        Some(p) => {
            let p: Position = p.parse().map_err(|e| anyhow!("position: {e}"))?;
            apply_at(rule, &tree, &p)
        }
        None => apply_all(rule, &tree).into_iter().next().map(|(_, t)| t),
    };
    Ok(match result {
        Some(t) => {
            println!("{t}");
            Found::Yes
        }
        None => {
            eprintln!("the rule does not apply");
            Found::No
        }
    })
}

fn check_cmd(a: &CheckArgs) -> Result<Found> {
    let rules = parse_rule_file(&read(&a.rules)?)?;
    let inst = a.instance.load()?;
    let mut explained = 0;
    for (i, p) in inst.pairs.iter().enumerate() {
        match explain_pair(&rules, &p.source, &p.target, inst.steps)? {
            Some(t) => {
                explained += 1;
                println!("pair {}\texplained\t{}", i + 1, trace_text(&t));
            }
            None => println!("pair {}\tnot explained", i + 1),
        }
    }
    println!("{explained}/{} explained, {} required", inst.pairs.len(), inst.required_pairs());
    Ok(if explained >= inst.required_pairs() { Found::Yes } else { Found::No })
}

fn parse_edges(text: &str) -> Result<Vec<(usize, usize)>> {
    text.split([',', ' '])
        .filter(|s| !s.is_empty())
        .map(|e| {
            let (u, v) = e.split_once('-').ok_or_else(|| anyhow!("edge '{e}' is not of the form u-v"))?;
            Ok((u.trim().parse()?, v.trim().parse()?))
        })
        .collect()
}

fn gen_cmd(g: &GenCommand) -> Result<Found> {
    let (inst, out) = match g {
        GenCommand::VertexCover { vertices, edges, k, binary, out } => {
            let edges = parse_edges(edges)?;
            let n = vertices.unwrap_or_else(|| edges.iter().map(|&(u, v)| u.max(v)).max().unwrap_or(0));
            let inst = if *binary {
                gen_vertex_cover_binary(n, &edges, *k)?
            } else {
                gen_vertex_cover(n, &edges, *k)?
            };
            (inst, out)
        }
        GenCommand::ThreeSat { cnf, out } => (gen_3sat(&Cnf3::parse(&read(cnf)?)?)?, out),
        GenCommand::Random { seed, pairs, rules, noise, steps, out } => {
            let pool = parse_rule_file(&read(rules)?)?;
            let cfg = RandomConfig {
                noise: *noise,
                steps: *steps,
                ..RandomConfig::new(*seed, *pairs, pool)
            };
            let g = gen_random(&cfg)?;
            if !g.noisy.is_empty() {
                let list: Vec<String> = g.noisy.iter().map(|i| (i + 1).to_string()).collect();
                eprintln!("scrambled pairs: {}", list.join(" "));
            }
            (g.instance, out)
        }
    };
    emit(&(inst.to_json() + "\n"), out.as_deref())?;
    Ok(Found::Yes)
}

fn encode_cmd(a: &EncodeArgs) -> Result<Found> {
    let inst = a.instance.load()?;
    let enc = encode_with(&inst, &a.encoder.config())?;
    fs::write(&a.out, export_dimacs(&enc.formula)).with_context(|| format!("writing {}", a.out.display()))?;
    eprintln!("{} variables, {} clauses", enc.formula.num_vars(), enc.formula.num_clauses());
    Ok(Found::Yes)
}

fn decode_cmd(a: &DecodeArgs) -> Result<Found> {
    let inst = a.instance.load()?;
    let enc = encode_with(&inst, &a.encoder.config())?;
    let text = read(&a.model)?;
    if parse_solver_status(&text) == Some(false) {
        eprintln!("the solver reports no model");
        return Ok(Found::No);
    }
    let model = import_model(&text, enc.formula.num_vars())?;
    let sol = decode(&model, &enc, &inst)?;
    print_solution(&sol.rules, &sol.traces);
    Ok(Found::Yes)
}

fn ingest_cmd(a: &IngestArgs) -> Result<Found> {
    let opts = FormulaOptions { nary: a.nary };
    let mut pairs = parse_dataset(&read(&a.formulas)?, opts)?;
    if a.unify {
        pairs = unify_variables(&pairs);
    }
    let inst = LearningInstance::new(pairs, a.steps, a.rules)?.with_ratio(a.ratio)?;
    emit(&(inst.to_json() + "\n"), a.out.as_deref())?;
    Ok(Found::Yes)
}

fn run(cli: &Cli) -> Result<Found> {
    match &cli.command {
        Command::Learn(a) => learn_cmd(a),
        Command::Apply(a) => apply_cmd(a),
        Command::Check(a) => check_cmd(a),
        Command::Gen(g) => gen_cmd(g),
        Command::Encode(a) => encode_cmd(a),
        Command::Decode(a) => decode_cmd(a),
        Command::Ingest(a) => ingest_cmd(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let res = run(&cli);
    let _ = std::io::stdout().flush();
    match res {
        Ok(Found::Yes) => ExitCode::SUCCESS,
        Ok(Found::No) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            let budget = matches!(
                e.downcast_ref::<Error>(),
                Some(Error::SolverBudget { .. } | Error::ResourceLimit(_))
            );
            ExitCode::from(if budget { 2 } else { 3 })
        }
    }
}
