//! The robot soccer experiments: knowledge-initialized versus randomly
//! initialized networks, growing knowledge bases, and learning
//! contrary-to-duty orderings left out of the knowledge base.

mod report;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::compiler::{
    compile, parse_normative_code, Compilation, CompileError, CompileOptions, Dnf, NormativeCode,
    INPUT_PREFIX,
};
use crate::logic::{Atom, Literal, LiteralSet, LogicError};
use crate::neural::{ncilp_translate_onto, CilpParams, Network, NetworkSchema, NeuralError};
use crate::syntax::ParseError;
use crate::training::{
    enumerate_worlds, evaluate, generate_dataset, partition, sample_worlds, train, Example, Metrics, TrainConfig,
    TrainingError,
};

pub use report::{
    BaselineReport, BaselineRow, CtdGroupReport, CtdReport, CtdRow, IncrementalReport, IncrementalStep,
    SeedMetrics, Summary,
};

pub const FIXTURE_ENV: &str = "DEONNET_FIXTURES";
pub const ROBOCUP_FIXTURE: &str = "robocup26.norm";

/// Above this many input atoms contexts are sampled rather than enumerated.
pub const ENUMERATION_LIMIT: usize = 16;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("MissingFixture: cannot read `{path}`: {reason}")]
    MissingFixture { path: String, reason: String },
    #[error("InvalidSpec: {0}")]
    InvalidSpec(String),
    #[error("ParseError: {0}")]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Neural(#[from] NeuralError),
    #[error(transparent)]
    Training(#[from] TrainingError),
    #[error(transparent)]
    Logic(#[from] LogicError),
}

impl ExperimentError {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentError::MissingFixture { .. } => "MissingFixture",
            ExperimentError::InvalidSpec(_) => "InvalidSpec",
            ExperimentError::Parse(_) => "ParseError",
            ExperimentError::Compile(e) => e.name(),
            ExperimentError::Neural(e) => e.name(),
            ExperimentError::Training(e) => e.name(),
            ExperimentError::Logic(e) => e.name(),
        }
    }
}

/// `$DEONNET_FIXTURES` if set, else the fixtures shipped with this crate.
pub fn fixtures_dir() -> PathBuf {
    match std::env::var_os(FIXTURE_ENV) {
        Some(d) => PathBuf::from(d),
        None => Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures"),
    }
}

/// Text of a fixture file and its SHA-256.
pub fn load_fixture(name: &str) -> Result<(String, String), ExperimentError> {
    let path = fixtures_dir().join(name);
    let text = std::fs::read_to_string(&path).map_err(|e| ExperimentError::MissingFixture {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    let hash = hex::encode(Sha256::digest(text.as_bytes()));
    Ok((text, hash))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub seeds: Vec<u64>,
    pub folds: usize,
    /// Contexts sampled per seed when there are too many to enumerate.
    pub contexts: usize,
    pub train: TrainConfig,
    pub cilp: CilpParams,
    /// Half-width of the uniform initialization of the random network.
    pub random_scale: f64,
    /// Half-width of uniform noise added to knowledge-initialized networks.
    pub kb_noise: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seeds: (1..=10).collect(),
            folds: 3,
            contexts: 2000,
            train: TrainConfig::default(),
            cilp: CilpParams::default(),
            random_scale: 0.5,
            kb_noise: 0.05,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.seeds.is_empty() {
            return Err(ExperimentError::InvalidSpec("at least one seed is needed".into()));
        }
        if self.folds < 2 {
            return Err(ExperimentError::InvalidSpec("at least two folds are needed".into()));
        }
        self.train.validate()?;
        Ok(())
    }
}

/// A normative code with its ground-truth compilation and the network
/// layout shared by every experiment on it.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub code: NormativeCode,
    /// Rule labels in file order.
    pub order: Vec<String>,
    pub truth: Compilation,
    pub schema: NetworkSchema,
    /// Input atoms a context assigns, sorted.
    pub input_atoms: Vec<Atom>,
    pub fixture_hash: String,
}

impl Scenario {
    pub fn load() -> Result<Scenario, ExperimentError> {
        let (text, hash) = load_fixture(ROBOCUP_FIXTURE)?;
        Scenario::from_source(&text, hash)
    }

    /// Parse a code, fold the case of atom initials, and compile it.
    pub fn from_source(text: &str, fixture_hash: String) -> Result<Scenario, ExperimentError> {
        let code = parse_normative_code(text)?.lower_camel_case();
        let order = rule_order(text, &code);
        let truth = compile(&code)?;
        let schema = NetworkSchema::of_program(&truth.program);
        let input_atoms: BTreeSet<Atom> = truth
            .program
            .clauses
            .iter()
            .flat_map(|c| c.body.iter().map(|b| b.literal.atom.clone()))
            .collect();
        Ok(Scenario {
            code,
            order,
            truth,
            schema,
            input_atoms: input_atoms.into_iter().collect(),
            fixture_hash,
        })
    }

    /// The first `n` rules in file order and the priorities among them.
    pub fn prefix(&self, n: usize) -> Result<NormativeCode, ExperimentError> {
        if n > self.order.len() {
            return Err(ExperimentError::InvalidSpec(format!(
                "the code has {} rules, {n} requested",
                self.order.len()
            )));
        }
        let keep: BTreeSet<String> = self.order[..n].iter().cloned().collect();
        Ok(self.code.restrict(&keep))
    }

    fn body(&self, label: &str) -> Option<&Dnf> {
        self.code
            .obligations
            .iter()
            .find(|r| r.label == label)
            .map(|r| &r.body)
            .or_else(|| self.code.permissions.iter().find(|r| r.label == label).map(|r| &r.body))
    }

    /// Contexts for one seed: every total world over the input atoms when
    /// that is at most `2^16` worlds, otherwise a uniform sample.
    pub fn contexts(&self, seed: u64, sample: usize) -> Result<Vec<LiteralSet>, ExperimentError> {
        if self.input_atoms.len() <= ENUMERATION_LIMIT {
            return Ok(enumerate_worlds(&self.input_atoms)?);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_c0de);
        Ok(sample_worlds(&self.input_atoms, sample, &mut rng))
    }

    /// Ground-truth examples with the contexts that produced them.
    pub fn examples(&self, contexts: &[LiteralSet]) -> Result<(Vec<LiteralSet>, Vec<Example>, usize), ExperimentError> {
        let g = generate_dataset(&self.truth.program, contexts, &self.schema)?;
        let skipped: BTreeSet<usize> = g.skipped.iter().map(|(i, _)| *i).collect();
        let kept = contexts
            .iter()
            .enumerate()
            .filter(|(i, _)| !skipped.contains(i))
            .map(|(_, c)| c.clone())
            .collect();
        Ok((kept, g.dataset.examples, skipped.len()))
    }

    pub fn kb_network(&self, code: &NormativeCode, opts: &CompileOptions, cfg: &ExperimentConfig) -> Result<Network, ExperimentError> {
        Ok(ncilp_translate_onto(code, opts, &self.schema, &cfg.cilp)?.0)
    }
}

fn rule_order(text: &str, code: &NormativeCode) -> Vec<String> {
    let labels: BTreeSet<&str> = code.labels().collect();
    let mut order: Vec<String> = Vec::new();
    for line in text.lines() {
        let line = line.split('%').next().unwrap_or("").trim();
        let first = line
            .trim_start_matches("rule ")
            .trim_start_matches("perm ")
            .split(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
            .next()
            .unwrap_or("");
        if labels.contains(first) && !line.contains('>') && !order.iter().any(|l| l == first) {
            order.push(first.to_string());
        }
    }
    order
}

/// Some disjunct of `body` holds in `world` (input namespace).
pub fn body_holds(body: &Dnf, world: &LiteralSet) -> bool {
    body.iter().any(|conj| {
        conj.iter().all(|l| {
            let atom = Atom::new(format!("{INPUT_PREFIX}{}", l.atom)).expect("identifier");
            world.contains(&Literal {
                atom,
                negated: l.negated,
            })
        })
    })
}

fn fold_config(cfg: &ExperimentConfig, seed: u64, fold: usize, salt: u64) -> TrainConfig {
    TrainConfig {
        seed: seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (fold as u64) << 8 ^ salt,
        ..cfg.train
    }
}

struct Split<'a> {
    train: Vec<&'a Example>,
    train_ctx: Vec<&'a LiteralSet>,
    test: Vec<&'a Example>,
    test_ctx: Vec<&'a LiteralSet>,
}

fn split<'a>(ctx: &'a [LiteralSet], ex: &'a [Example], parts: &[Vec<usize>], fold: usize) -> Split<'a> {
    let mut s = Split {
        train: Vec::new(),
        train_ctx: Vec::new(),
        test: Vec::new(),
        test_ctx: Vec::new(),
    };
    for (f, p) in parts.iter().enumerate() {
        for &i in p {
            if f == fold {
                s.test.push(&ex[i]);
                s.test_ctx.push(&ctx[i]);
            } else {
                s.train.push(&ex[i]);
                s.train_ctx.push(&ctx[i]);
            }
        }
    }
    s
}

fn owned(xs: &[&Example]) -> Vec<Example> {
    xs.iter().map(|e| (*e).clone()).collect()
}

struct SeedData {
    seed: u64,
    contexts: Vec<LiteralSet>,
    examples: Vec<Example>,
    skipped: usize,
    parts: Vec<Vec<usize>>,
}

fn seed_data(sc: &Scenario, cfg: &ExperimentConfig) -> Result<Vec<SeedData>, ExperimentError> {
    cfg.seeds
        .iter()
        .map(|&seed| {
            let (contexts, examples, skipped) = sc.examples(&sc.contexts(seed, cfg.contexts)?)?;
            if examples.len() < cfg.folds {
                return Err(TrainingError::TooFewExamples {
                    n: examples.len(),
                    folds: cfg.folds,
                }
                .into());
            }
            let parts = partition(examples.len(), cfg.folds, seed);
            Ok(SeedData {
                seed,
                contexts,
                examples,
                skipped,
                parts,
            })
        })
        .collect()
}

/// Which examples a KB of `kb` rules is scored on: with rules held out,
/// the test-fold examples where some held-out rule's body holds; with
/// nothing held out, the training folds.
fn scoring_set<'a>(sc: &Scenario, kb: usize, s: &Split<'a>) -> (Vec<Example>, bool) {
    let held_out: Vec<&Dnf> = sc.order[kb..].iter().filter_map(|l| sc.body(l)).collect();
    if held_out.is_empty() {
        return (owned(&s.train), true);
    }
    let test = s
        .test
        .iter()
        .zip(&s.test_ctx)
        .filter(|(_, c)| held_out.iter().any(|b| body_holds(b, c)))
        .map(|(e, _)| (*e).clone())
        .collect();
    (test, false)
}

struct KbRun {
    kb: Metrics,
    random: Option<Metrics>,
    on_training_set: bool,
}

fn run_kb(
    sc: &Scenario,
    cfg: &ExperimentConfig,
    kb_rules: usize,
    with_random: bool,
    data: &[SeedData],
) -> Result<Vec<(u64, KbRun)>, ExperimentError> {
    let code = sc.prefix(kb_rules)?;
    let base = sc.kb_network(&code, &CompileOptions::default(), cfg)?;
    let jobs: Vec<(usize, usize)> = (0..data.len()).flat_map(|d| (0..cfg.folds).map(move |f| (d, f))).collect();
    let runs: Result<Vec<(usize, KbRun)>, ExperimentError> = jobs
        .par_iter()
        .map(|&(d, fold)| {
            let sd = &data[d];
            let s = split(&sd.contexts, &sd.examples, &sd.parts, fold);
            let train_set = owned(&s.train);
            let (score, on_training_set) = scoring_set(sc, kb_rules, &s);
            let kb_net = base.perturbed(sd.seed ^ (fold as u64) << 32, cfg.kb_noise);
            let kb_trained = train(&kb_net, &train_set, &fold_config(cfg, sd.seed, fold, 1))?.network;
            let kb = evaluate(&kb_trained, &score)?;
            let random = if with_random {
                let r = base.randomized(sd.seed.wrapping_add(7_777) ^ (fold as u64) << 32, cfg.random_scale);
                let r = train(&r, &train_set, &fold_config(cfg, sd.seed, fold, 2))?.network;
                Some(evaluate(&r, &score)?)
            } else {
                None
            };
            Ok((
                d,
                KbRun {
                    kb,
                    random,
                    on_training_set,
                },
            ))
        })
        .collect();
    let runs = runs?;
    let mut out = Vec::new();
    for (d, sd) in data.iter().enumerate() {
        let mine: Vec<&KbRun> = runs.iter().filter(|(x, _)| *x == d).map(|(_, r)| r).collect();
        let kb = Metrics::mean(&mine.iter().map(|r| r.kb).collect::<Vec<_>>());
        let random = if with_random {
            Some(Metrics::mean(&mine.iter().filter_map(|r| r.random).collect::<Vec<_>>()))
        } else {
            None
        };
        out.push((
            sd.seed,
            KbRun {
                kb,
                random,
                on_training_set: mine.iter().all(|r| r.on_training_set),
            },
        ));
    }
    Ok(out)
}

/// Knowledge-initialized versus randomly initialized networks of the same
/// shape, trained on the same examples and scored where the held-out rules
/// apply.
pub fn baseline(sc: &Scenario, cfg: &ExperimentConfig, kb_rules: usize) -> Result<BaselineReport, ExperimentError> {
    cfg.validate()?;
    let data = seed_data(sc, cfg)?;
    let runs = run_kb(sc, cfg, kb_rules, true, &data)?;
    let rows: Vec<BaselineRow> = runs
        .iter()
        .zip(&data)
        .map(|((seed, r), sd)| BaselineRow {
            seed: *seed,
            kb: r.kb,
            random: r.random.expect("random run"),
            skipped_contexts: sd.skipped,
        })
        .collect();
    Ok(BaselineReport::new(cfg.clone(), sc.fixture_hash.clone(), kb_rules, sc.order.len(), rows))
}

/// The baseline repeated for knowledge bases of increasing size. With no
/// rules held out, training-set performance is reported.
pub fn incremental(sc: &Scenario, cfg: &ExperimentConfig, sizes: &[usize]) -> Result<IncrementalReport, ExperimentError> {
    cfg.validate()?;
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ExperimentError::InvalidSpec("knowledge base sizes must increase strictly".into()));
    }
    let data = seed_data(sc, cfg)?;
    let mut steps = Vec::new();
    for &n in sizes {
        let runs = run_kb(sc, cfg, n, false, &data)?;
        let on_training_set = runs.iter().all(|(_, r)| r.on_training_set);
        let per_seed = runs
            .iter()
            .map(|(seed, r)| SeedMetrics {
                seed: *seed,
                metrics: r.kb,
            })
            .collect();
        steps.push(IncrementalStep::new(n, on_training_set, per_seed));
    }
    Ok(IncrementalReport {
        config: cfg.clone(),
        fixture_hash: sc.fixture_hash.clone(),
        steps,
    })
}

/// A contrary-to-duty pair: the primary rule, the secondary rule whose
/// ordering over it is dropped, the context atom that signals the
/// violation, and the outputs scored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CtdGroup {
    pub name: String,
    pub primary: String,
    pub secondary: String,
    /// Applicable contexts: the secondary rule's body holds.
    pub outputs: Vec<String>,
    /// Output produced only under violation, if the group has one.
    pub ctd_head: Option<String>,
}

pub fn robocup_ctd_groups() -> Vec<CtdGroup> {
    vec![
        CtdGroup {
            name: "R7/R8 minimize impact".into(),
            primary: "R7".into(),
            secondary: "R8".into(),
            outputs: vec!["out_impactingOpponent'".into(), "out_minimizeImpact".into()],
            ctd_head: Some("out_minimizeImpact".into()),
        },
        CtdGroup {
            name: "R6/R9 terminate contact".into(),
            primary: "R6".into(),
            secondary: "R9".into(),
            outputs: vec!["out_contactingOpponent'".into(), "out_terminateContact".into()],
            ctd_head: Some("out_terminateContact".into()),
        },
        CtdGroup {
            name: "R4/R5 goalkeeper hands".into(),
            primary: "R4".into(),
            secondary: "R5".into(),
            outputs: vec!["out_useHands'".into()],
            ctd_head: None,
        },
    ]
}

struct GroupScore {
    accuracy: f64,
    untrained: f64,
    specificity: Option<f64>,
    n: usize,
}

fn group_accuracy(net: &Network, idx: &[usize], examples: &[&Example]) -> Result<f64, ExperimentError> {
    if examples.is_empty() {
        return Ok(0.0);
    }
    let mut hits = 0;
    for ex in examples {
        let out = net.forward(&ex.input)?.crisp;
        if idx.iter().all(|&o| out[o] == ex.target[o]) {
            hits += 1;
        }
    }
    Ok(hits as f64 / examples.len() as f64)
}

/// Compile the code without the orderings that regulate each
/// contrary-to-duty pair, train on all training-fold examples, and score
/// each group on the test-fold contexts where its secondary rule applies.
pub fn ctd(sc: &Scenario, cfg: &ExperimentConfig, groups: &[CtdGroup]) -> Result<CtdReport, ExperimentError> {
    cfg.validate()?;
    let excluded: Vec<(String, String)> = groups.iter().map(|g| (g.secondary.clone(), g.primary.clone())).collect();
    let opts = CompileOptions {
        excluded_priorities: excluded.clone(),
    };
    let base = sc.kb_network(&sc.code, &opts, cfg)?;
    let out_idx = |l: &str| {
        sc.schema
            .outputs
            .iter()
            .position(|x| x == l)
            .ok_or_else(|| ExperimentError::InvalidSpec(format!("no output `{l}`")))
    };
    let mut group_idx = Vec::new();
    let mut bodies = Vec::new();
    for g in groups {
        group_idx.push(g.outputs.iter().map(|l| out_idx(l)).collect::<Result<Vec<_>, _>>()?);
        bodies.push(
            sc.body(&g.secondary)
                .ok_or_else(|| ExperimentError::InvalidSpec(format!("no rule `{}`", g.secondary)))?
                .clone(),
        );
    }
    let heads: Vec<Option<usize>> = groups
        .iter()
        .map(|g| g.ctd_head.as_deref().map(out_idx).transpose())
        .collect::<Result<_, _>>()?;
    let data = seed_data(sc, cfg)?;
    let jobs: Vec<(usize, usize)> = (0..data.len()).flat_map(|d| (0..cfg.folds).map(move |f| (d, f))).collect();
    let scores: Result<Vec<(usize, Vec<GroupScore>)>, ExperimentError> = jobs
        .par_iter()
        .map(|&(d, fold)| {
            let sd = &data[d];
            let s = split(&sd.contexts, &sd.examples, &sd.parts, fold);
            let net = base.perturbed(sd.seed ^ (fold as u64) << 32, cfg.kb_noise);
            let trained = train(&net, &owned(&s.train), &fold_config(cfg, sd.seed, fold, 3))?.network;
            let mut out = Vec::new();
            for (gi, _) in groups.iter().enumerate() {
                let applicable: Vec<&Example> = s
                    .test
                    .iter()
                    .zip(&s.test_ctx)
                    .filter(|(_, c)| body_holds(&bodies[gi], c))
                    .map(|(e, _)| *e)
                    .collect();
                let specificity = match heads[gi] {
                    Some(h) => {
                        let mut ok = 0usize;
                        for (e, c) in s.test.iter().zip(&s.test_ctx) {
                            let produced = trained.forward(&e.input)?.crisp[h] == 1.0;
                            if produced == body_holds(&bodies[gi], c) {
                                ok += 1;
                            }
                        }
                        Some(ok as f64 / s.test.len().max(1) as f64)
                    }
                    None => None,
                };
                out.push(GroupScore {
                    accuracy: group_accuracy(&trained, &group_idx[gi], &applicable)?,
                    untrained: group_accuracy(&base, &group_idx[gi], &applicable)?,
                    specificity,
                    n: applicable.len(),
                });
            }
            Ok((d, out))
        })
        .collect();
    let scores = scores?;
    let mut reports = Vec::new();
    for (gi, g) in groups.iter().enumerate() {
        let mut rows = Vec::new();
        for (d, sd) in data.iter().enumerate() {
            let mine: Vec<&GroupScore> = scores.iter().filter(|(x, _)| *x == d).map(|(_, v)| &v[gi]).collect();
            let mean = |f: &dyn Fn(&GroupScore) -> f64| mine.iter().map(|s| f(s)).sum::<f64>() / mine.len() as f64;
            rows.push(CtdRow {
                seed: sd.seed,
                accuracy: mean(&|s| s.accuracy),
                untrained: mean(&|s| s.untrained),
                specificity: g.ctd_head.as_ref().map(|_| mean(&|s| s.specificity.unwrap_or(0.0))),
                n: mine.iter().map(|s| s.n).sum(),
            });
        }
        reports.push(CtdGroupReport::new(g.clone(), rows));
    }
    Ok(CtdReport {
        config: cfg.clone(),
        fixture_hash: sc.fixture_hash.clone(),
        excluded_priorities: excluded,
        groups: reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn robocup_scenario_shape() {
        let sc = Scenario::load().unwrap();
        assert_eq!(sc.order.len(), 26);
        assert_eq!(sc.order[0], "R1");
        assert_eq!(sc.order[25], "R26");
        assert_eq!(sc.code.priorities.len(), 9);
        assert_eq!(sc.input_atoms.len(), 19);
        assert_eq!(sc.schema.outputs.len(), 16);
        assert_eq!(sc.truth.program.len(), 23);
        assert_eq!(sc.prefix(20).unwrap().obligations.len(), 17);
    }

    #[test]
    fn body_holds_in_namespaced_world() {
        let body: Dnf = vec![vec![Literal::pos(Atom::of("a")), Literal::neg(Atom::of("b"))]];
        let world: LiteralSet = [Literal::pos(Atom::of("in_a")), Literal::neg(Atom::of("in_b"))].into_iter().collect();
        assert!(body_holds(&body, &world));
        let other: LiteralSet = [Literal::pos(Atom::of("in_a")), Literal::pos(Atom::of("in_b"))].into_iter().collect();
        assert!(!body_holds(&body, &other));
    }

    #[test]
    fn missing_fixture_is_reported() {
        let err = load_fixture("no_such_file.norm").unwrap_err();
        assert_eq!(err.name(), "MissingFixture");
    }
}
