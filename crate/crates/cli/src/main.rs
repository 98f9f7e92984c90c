use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use deonnet::ansio::{
    ans_output, format_elements, io_member, parse_context, parse_formula_list, parse_generators, parse_norms,
    violations, AnSystem, Context, Element, PropFormula, Variant, Witness,
};
use deonnet::compiler::{compile_with, format_unlabeled, parse_normative_code, strip_namespace, CompileOptions};
use deonnet::experiment::{self, ExperimentConfig, Scenario};
use deonnet::kleene::{minimal_model_with, parse_kprogram, sldnf_query, Facts, DEFAULT_DEPTH_LIMIT};
use deonnet::logic::{parse_program, Atom, ExtendedProgram, Literal, LiteralSet};
use deonnet::neural::{
    cilp_translate, cilp_translate_recurrent, ncilp_translate, recurrent_run, CilpParams, FeedbackMap, Network,
    NetworkSchema,
};
use deonnet::syntax::ParseError;
use deonnet::training::{
    enumerate_worlds, evaluate, generate_dataset, sample_worlds, train_with_validation, Dataset, TrainConfig,
};

mod error;

use error::CliError;

#[derive(Parser)]
#[command(name = "deonnet", version, about = "Normative codes, logic programs and the networks that compute them")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a normative code into an extended logic program.
    Compile {
        file: PathBuf,
        /// Keep the in_/out_ prefixes on atoms.
        #[arg(long)]
        namespaced: bool,
        /// Also print the rule instances and the priorities between them.
        #[arg(long)]
        stages: bool,
        /// Drop a priority before encoding, as `HIGHER>LOWER`. Repeatable.
        #[arg(long = "exclude", value_name = "H>L")]
        exclude: Vec<String>,
    },
    /// Answer set of a logic program plus context facts.
    Solve {
        file: PathBuf,
        /// Comma-separated literals added as facts, e.g. `a, -b`.
        #[arg(long, default_value = "")]
        context: String,
    },
    /// Translate a logic program (`.lp`) or normative code (`.norm`) into a network.
    Translate {
        file: PathBuf,
        #[command(flatten)]
        cilp: CilpArgs,
        /// Put every literal on both the input and the output side.
        #[arg(long)]
        recurrent: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Forward pass, or recurrent execution with output-to-input feedback.
    Run {
        network: PathBuf,
        /// Input assignments `label=value`; unlisted inputs are -1.
        #[arg(long = "set", value_name = "LABEL=V")]
        set: Vec<String>,
        #[arg(long)]
        recurrent: bool,
        #[arg(long, default_value_t = 100)]
        max_iters: usize,
    },
    /// Backpropagation on a dataset file.
    Train {
        network: PathBuf,
        data: PathBuf,
        #[command(flatten)]
        train: TrainArgs,
        #[arg(long)]
        validation: Option<PathBuf>,
        /// Per-epoch CSV of error and accuracy.
        #[arg(long)]
        history: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// tot and part accuracy of a network on a dataset.
    Eval { network: PathBuf, data: PathBuf },
    /// Generate a dataset from the answer sets of a program or code.
    Dataset {
        file: PathBuf,
        /// Sample this many total worlds instead of enumerating all of them.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Abstract normative systems and propositional input/output logic.
    #[command(subcommand)]
    QueryIo(IoQuery),
    /// Three-valued completion semantics: minimal model, or an SLDNF query.
    QueryKleene {
        file: PathBuf,
        /// Goal atom; without one the minimal model is printed.
        #[arg(long)]
        goal: Option<String>,
        /// Comma-separated atoms asserted true.
        #[arg(long, default_value = "")]
        facts: String,
        #[arg(long, default_value_t = DEFAULT_DEPTH_LIMIT)]
        depth: usize,
        #[arg(long)]
        trace: bool,
    },
    /// The robot soccer experiments.
    Experiment {
        #[arg(value_enum)]
        kind: ExperimentKind,
        #[command(flatten)]
        exp: ExperimentArgs,
    },
}

#[derive(Subcommand)]
enum IoQuery {
    /// Output of an abstract normative system in a context.
    Ans {
        /// Norm file of `(body, head)` pairs.
        norms: PathBuf,
        #[arg(long, default_value = "")]
        context: String,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=4))]
        variant: u8,
        #[arg(long)]
        throughput: bool,
    },
    /// Membership of formulas in out1..out4.
    Prop {
        /// Generator file of `(a, x)` pairs.
        generators: PathBuf,
        /// Comma-separated input formulas.
        #[arg(long, default_value = "")]
        input: String,
        /// Formula to test; repeatable. Without one a probe set is checked.
        #[arg(long = "formula")]
        formulas: Vec<String>,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=4))]
        variant: u8,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ExperimentKind {
    Baseline,
    Incremental,
    Ctd,
}

#[derive(Args)]
struct CilpArgs {
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Requested minimum activation; raised when too small for the program.
    #[arg(long, default_value_t = 0.5)]
    amin: f64,
}

impl CilpArgs {
    fn params(&self) -> CilpParams {
        CilpParams {
            beta: self.beta,
            a_min: self.amin,
            ..CilpParams::default()
        }
    }
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long, default_value_t = 0.1)]
    eta: f64,
    #[arg(long, default_value_t = 0.5)]
    momentum: f64,
    #[arg(long, default_value_t = 100)]
    epochs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl TrainArgs {
    fn config(&self) -> TrainConfig {
        TrainConfig {
            eta: self.eta,
            momentum: self.momentum,
            epochs: self.epochs,
            seed: self.seed,
            ..TrainConfig::default()
        }
    }
}

#[derive(Args)]
struct ExperimentArgs {
    /// Seed list: `1,2,3` or a range `1-10`.
    #[arg(long, value_parser = parse_seeds)]
    seeds: Option<Seeds>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    momentum: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    amin: Option<f64>,
    /// Contexts sampled per seed.
    #[arg(long)]
    contexts: Option<usize>,
    /// Rules in the knowledge base for the baseline.
    #[arg(long, default_value_t = 20)]
    kb_rules: usize,
    /// Knowledge base sizes for the incremental run.
    #[arg(long, value_delimiter = ',', default_value = "20,22,24,26")]
    sizes: Vec<usize>,
    /// Write the report as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the incremental curve as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

impl ExperimentArgs {
    fn config(&self) -> ExperimentConfig {
        let mut c = ExperimentConfig::default();
        if let Some(s) = &self.seeds {
            c.seeds = s.0.clone();
        }
        if let Some(f) = self.folds {
            c.folds = f;
        }
        if let Some(n) = self.contexts {
            c.contexts = n;
        }
        c.train.eta = self.eta.unwrap_or(c.train.eta);
        c.train.momentum = self.momentum.unwrap_or(c.train.momentum);
        c.train.epochs = self.epochs.unwrap_or(c.train.epochs);
        c.cilp.beta = self.beta.unwrap_or(c.cilp.beta);
        c.cilp.a_min = self.amin.unwrap_or(c.cilp.a_min);
        c
    }
}

#[derive(Clone)]
struct Seeds(Vec<u64>);

fn parse_seeds(s: &str) -> Result<Seeds, String> {
    list_of_seeds(s).map(Seeds)
}

fn list_of_seeds(s: &str) -> Result<Vec<u64>, String> {
    if let Some((a, b)) = s.split_once('-') {
        let a: u64 = a.trim().parse().map_err(|e| format!("{e}"))?;
        let b: u64 = b.trim().parse().map_err(|e| format!("{e}"))?;
        if a > b {
            return Err(format!("empty range {s}"));
        }
        return Ok((a..=b).collect());
    }
    s.split(',')
        .map(|x| x.trim().parse().map_err(|e| format!("`{x}`: {e}")))
        .collect()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parsed<T>(path: &Path, r: Result<T, ParseError>) -> Result<T, CliError> {
    r.map_err(|e| CliError::Parse {
        file: path.display().to_string(),
        error: e,
    })
}

fn literal_list(src: &str) -> Result<LiteralSet, CliError> {
    src.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| Literal::parse(s).map_err(CliError::from))
        .collect()
}

fn is_code(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "norm")
}

fn parse_exclusions(items: &[String]) -> Result<CompileOptions, CliError> {
    let mut excluded = Vec::new();
    for it in items {
        let (h, l) = it
            .split_once('>')
            .ok_or_else(|| CliError::domain("InvalidArgument", format!("`{it}` is not of the form H>L")))?;
        excluded.push((h.trim().to_string(), l.trim().to_string()));
    }
    Ok(CompileOptions {
        excluded_priorities: excluded,
    })
}

/// A program from either an `.lp` file or a compiled `.norm` file.
fn load_program(path: &Path) -> Result<ExtendedProgram, CliError> {
    let src = read(path)?;
    if is_code(path) {
        let code = parsed(path, parse_normative_code(&src))?;
        Ok(compile_with(&code, &CompileOptions::default())?.program)
    } else {
        parsed(path, parse_program(&src))
    }
}

fn load_network(path: &Path) -> Result<Network, CliError> {
    Ok(Network::from_json(&read(path)?)?)
}

fn load_dataset(path: &Path) -> Result<Dataset, CliError> {
    Ok(Dataset::from_csv(&read(path)?)?)
}

fn valuation(v: &BTreeMap<String, bool>) -> String {
    let items: Vec<String> = v.iter().map(|(a, b)| if *b { a.clone() } else { format!("-{a}") }).collect();
    format!("{{{}}}", items.join(", "))
}

fn format_witness(w: &Witness) -> String {
    match &w.input {
        Some(i) => format!("input {} output {}", valuation(i), valuation(&w.output)),
        None => format!("output {}", valuation(&w.output)),
    }
}

fn variant(v: u8) -> Variant {
    Variant::from_index(v).expect("range checked by the argument parser")
}

fn run(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Compile {
            file,
            namespaced,
            stages,
            exclude,
        } => {
            let code = parsed(&file, parse_normative_code(&read(&file)?))?;
            let c = compile_with(&code, &parse_exclusions(&exclude)?)?;
            if stages {
                println!("% rule instances");
                for i in &c.instances {
                    println!("{}", i.clause);
                }
                println!("% lifted priorities");
                for p in &c.lifted {
                    println!("{p}");
                }
                println!("% priorities from permissions");
                for p in &c.permission_derived {
                    println!("{p}");
                }
                println!("% program");
            }
            let program = if namespaced { c.program } else { strip_namespace(&c.program) };
            print!("{}", format_unlabeled(&program));
        }
        Command::Solve { file, context } => {
            let p = load_program(&file)?;
            let facts = literal_list(&context)?;
            let solver = deonnet::logic::AnswerSetSolver::new(&p)?;
            println!("{}", solver.solve_with(&facts)?);
        }
        Command::Translate {
            file,
            cilp,
            recurrent,
            out,
        } => {
            let params = cilp.params();
            let net = if is_code(&file) {
                let code = parsed(&file, parse_normative_code(&read(&file)?))?;
                ncilp_translate(&code, &params)?.0
            } else {
                let p = parsed(&file, parse_program(&read(&file)?))?;
                if recurrent {
                    cilp_translate_recurrent(&p, &params)?
                } else {
                    cilp_translate(&p, &params)?
                }
            };
            eprintln!(
                "{} inputs, {} hidden, {} outputs, a_min {:.4}",
                net.n_inputs(),
                net.n_hidden(),
                net.n_outputs(),
                net.a_min
            );
            write_or_print(out.as_deref(), &(net.to_json() + "\n"))?;
        }
        Command::Run {
            network,
            set,
            recurrent,
            max_iters,
        } => {
            let net = load_network(&network)?;
            let mut input = vec![-1.0; net.n_inputs()];
            for s in &set {
                let (label, value) = s
                    .split_once('=')
                    .ok_or_else(|| CliError::domain("InvalidArgument", format!("`{s}` is not LABEL=VALUE")))?;
                let i = net
                    .input_index(label.trim())
                    .ok_or_else(|| deonnet::neural::NeuralError::UnknownLabel(label.trim().to_string()))?;
                input[i] = value
                    .trim()
                    .parse()
                    .map_err(|_| CliError::domain("InvalidArgument", format!("`{value}` is not a number")))?;
            }
            let (inputs, outputs) = if recurrent {
                let r = recurrent_run(&net, &FeedbackMap::same_label(&net), &input, max_iters)?;
                println!("stable after {} iterations", r.iterations);
                (r.input, r.output)
            } else {
                (input.clone(), net.forward(&input)?.crisp)
            };
            for (l, v) in net.input_labels.iter().zip(&inputs) {
                println!("in  {l} = {v}");
            }
            for (l, v) in net.output_labels.iter().zip(&outputs) {
                println!("out {l} = {v}");
            }
        }
        Command::Train {
            network,
            data,
            train,
            validation,
            history,
            out,
        } => {
            let net = load_network(&network)?;
            let data = load_dataset(&data)?;
            let val = validation.as_deref().map(load_dataset).transpose()?;
            let outcome = train_with_validation(
                &net,
                &data.examples,
                val.as_ref().map(|d| d.examples.as_slice()),
                &train.config(),
            )?;
            if let Some(h) = history {
                fs::write(&h, outcome.history_csv()).map_err(|e| CliError::io(&h, e))?;
            }
            if let Some(last) = outcome.history.last() {
                eprintln!("epoch {} error {:.6}", last.epoch, last.error);
            }
            write_or_print(out.as_deref(), &(outcome.network.to_json() + "\n"))?;
        }
        Command::Eval { network, data } => {
            let net = load_network(&network)?;
            let data = load_dataset(&data)?;
            let m = evaluate(&net, &data.examples)?;
            println!("examples {}  outputs {}", m.n, m.k);
            println!("tot  {:.2}%", 100.0 * m.tot);
            println!("part {:.2}%", 100.0 * m.part);
        }
        Command::Dataset {
            file,
            samples,
            seed,
            out,
        } => {
            let p = load_program(&file)?;
            let schema = NetworkSchema::of_program(&p);
            let atoms: Vec<Atom> = p
                .clauses
                .iter()
                .flat_map(|c| c.body.iter().map(|b| b.literal.atom.clone()))
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            let worlds = match samples {
                Some(n) => {
                    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
                    sample_worlds(&atoms, n, &mut rng)
                }
                None => enumerate_worlds(&atoms)?,
            };
            let g = generate_dataset(&p, &worlds, &schema)?;
            eprintln!(
                "{} examples, {} inconsistent contexts skipped",
                g.dataset.examples.len(),
                g.skipped.len()
            );
            write_or_print(out.as_deref(), &g.dataset.to_csv()?)?;
        }
        Command::QueryIo(IoQuery::Ans {
            norms,
            context,
            variant: v,
            throughput,
        }) => {
            let pairs = parsed(&norms, parse_norms(&read(&norms)?))?;
            let ctx: Vec<Element> = parse_context(&context).map_err(|e| CliError::Parse {
                file: "--context".into(),
                error: e,
            })?;
            let sys = AnSystem::spanning(pairs, &ctx)?;
            let ctx = Context::new(ctx);
            let out = ans_output(&sys, &ctx, variant(v), throughput)?;
            println!("output {}", format_elements(&out));
            println!("violations {}", format_elements(&violations(&sys, &ctx, variant(v), throughput)?));
        }
        Command::QueryIo(IoQuery::Prop {
            generators,
            input,
            formulas,
            variant: v,
        }) => {
            let gens = parsed(&generators, parse_generators(&read(&generators)?))?;
            let arg_err = |flag: &str, e| CliError::Parse {
                file: flag.to_string(),
                error: e,
            };
            let input = parse_formula_list(&input).map_err(|e| arg_err("--input", e))?;
            let phis: Vec<PropFormula> = if formulas.is_empty() {
                let atoms: Vec<String> = gens.vocabulary().into_iter().collect();
                deonnet::ansio::probe_formulas(&atoms)
            } else {
                formulas
                    .iter()
                    .map(|f| PropFormula::parse(f).map_err(|e| arg_err("--formula", e)))
                    .collect::<Result<_, _>>()?
            };
            for phi in &phis {
                let verdict = io_member(&gens, &input, phi, variant(v))?;
                let mark = if verdict.member { "in    " } else { "out   " };
                match (&verdict.witness, verdict.member) {
                    (Some(w), false) => println!("{mark}{phi}   witness {}", format_witness(w)),
                    _ => println!("{mark}{phi}"),
                }
            }
        }
        Command::QueryKleene {
            file,
            goal,
            facts,
            depth,
            trace,
        } => {
            let mut p = parsed(&file, parse_kprogram(&read(&file)?))?;
            let fact_atoms: Vec<Atom> = facts
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(Atom::new)
                .collect::<Result<_, _>>()?;
            match goal {
                None => {
                    let m = minimal_model_with(&p, &Facts::holding(fact_atoms))?;
                    for (a, t) in m.iter() {
                        println!("{a} = {t}");
                    }
                }
                Some(g) => {
                    p = p.with_facts(&fact_atoms);
                    let r = sldnf_query(&p, &Atom::new(g)?, depth)?;
                    if trace {
                        for s in &r.trace {
                            println!("{s}");
                        }
                    }
                    println!("{}", r.outcome);
                }
            }
        }
        Command::Experiment { kind, exp } => {
            let cfg = exp.config();
            let sc = Scenario::load()?;
            let (text, json) = match kind {
                ExperimentKind::Baseline => {
                    let r = experiment::baseline(&sc, &cfg, exp.kb_rules)?;
                    (r.to_string(), serde_json::to_string_pretty(&r))
                }
                ExperimentKind::Incremental => {
                    let r = experiment::incremental(&sc, &cfg, &exp.sizes)?;
                    if let Some(p) = &exp.csv {
                        fs::write(p, r.to_csv()).map_err(|e| CliError::io(p, e))?;
                    }
                    (r.to_string(), serde_json::to_string_pretty(&r))
                }
                ExperimentKind::Ctd => {
                    let r = experiment::ctd(&sc, &cfg, &experiment::robocup_ctd_groups())?;
                    (r.to_string(), serde_json::to_string_pretty(&r))
                }
            };
            print!("{text}");
            if let Some(p) = &exp.out {
                let json = json.expect("reports serialize");
                fs::write(p, json + "\n").map_err(|e| CliError::io(p, e))?;
            }
        }
    }
    Ok(())
}
