use std::fmt;

use serde::{Deserialize, Serialize};

use super::{CtdGroup, ExperimentConfig};
use crate::training::Metrics;

/// Mean and sample standard deviation over seeds, in percent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
}

impl Summary {
    pub fn of(xs: impl IntoIterator<Item = f64>) -> Summary {
        let xs: Vec<f64> = xs.into_iter().map(|x| 100.0 * x).collect();
        if xs.is_empty() {
            return Summary { mean: 0.0, std: 0.0 };
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let std = if xs.len() > 1 {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Summary { mean, std }
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:6.2} ± {:5.2}", self.mean, self.std)
    }
}

fn header(f: &mut fmt::Formatter<'_>, cfg: &ExperimentConfig, hash: &str) -> fmt::Result {
    writeln!(f, "fixture sha256: {hash}")?;
    writeln!(
        f,
        "seeds: {:?}  folds: {}  contexts/seed: {}",
        cfg.seeds, cfg.folds, cfg.contexts
    )?;
    writeln!(
        f,
        "eta: {}  momentum: {}  epochs: {}  beta: {}  requested a_min: {}  random init: ±{}  kb noise: ±{}",
        cfg.train.eta, cfg.train.momentum, cfg.train.epochs, cfg.cilp.beta, cfg.cilp.a_min, cfg.random_scale, cfg.kb_noise
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineRow {
    pub seed: u64,
    pub kb: Metrics,
    pub random: Metrics,
    pub skipped_contexts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineReport {
    pub config: ExperimentConfig,
    pub fixture_hash: String,
    pub kb_rules: usize,
    pub total_rules: usize,
    pub rows: Vec<BaselineRow>,
    pub kb_tot: Summary,
    pub kb_part: Summary,
    pub random_tot: Summary,
    pub random_part: Summary,
}

impl BaselineReport {
    pub(super) fn new(config: ExperimentConfig, fixture_hash: String, kb_rules: usize, total_rules: usize, rows: Vec<BaselineRow>) -> Self {
        BaselineReport {
            kb_tot: Summary::of(rows.iter().map(|r| r.kb.tot)),
            kb_part: Summary::of(rows.iter().map(|r| r.kb.part)),
            random_tot: Summary::of(rows.iter().map(|r| r.random.tot)),
            random_part: Summary::of(rows.iter().map(|r| r.random.part)),
            config,
            fixture_hash,
            kb_rules,
            total_rules,
            rows,
        }
    }

    /// The knowledge-initialized network beats the random one on both measures.
    pub fn kb_wins(&self) -> bool {
        self.kb_tot.mean > self.random_tot.mean && self.kb_part.mean > self.random_part.mean
    }
}

impl fmt::Display for BaselineReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "baseline: {} of {} rules in the knowledge base", self.kb_rules, self.total_rules)?;
        header(f, &self.config, &self.fixture_hash)?;
        writeln!(f, "{:>6} {:>9} {:>9} {:>9} {:>9} {:>6} {:>8}", "seed", "kb tot", "kb part", "rnd tot", "rnd part", "n", "skipped")?;
        for r in &self.rows {
            writeln!(
                f,
                "{:>6} {:>9.2} {:>9.2} {:>9.2} {:>9.2} {:>6} {:>8}",
                r.seed,
                100.0 * r.kb.tot,
                100.0 * r.kb.part,
                100.0 * r.random.tot,
                100.0 * r.random.part,
                r.kb.n,
                r.skipped_contexts
            )?;
        }
        writeln!(f, "knowledge base  tot {}  part {}", self.kb_tot, self.kb_part)?;
        writeln!(f, "random          tot {}  part {}", self.random_tot, self.random_part)?;
        writeln!(f, "published reference: knowledge base 5.38 / 49.19, random 5.13 / 45.25")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeedMetrics {
    pub seed: u64,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncrementalStep {
    pub kb_rules: usize,
    /// Scored on the training folds because nothing is held out.
    pub on_training_set: bool,
    pub per_seed: Vec<SeedMetrics>,
    pub tot: Summary,
    pub part: Summary,
}

impl IncrementalStep {
    pub(super) fn new(kb_rules: usize, on_training_set: bool, per_seed: Vec<SeedMetrics>) -> Self {
        IncrementalStep {
            tot: Summary::of(per_seed.iter().map(|s| s.metrics.tot)),
            part: Summary::of(per_seed.iter().map(|s| s.metrics.part)),
            kb_rules,
            on_training_set,
            per_seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncrementalReport {
    pub config: ExperimentConfig,
    pub fixture_hash: String,
    pub steps: Vec<IncrementalStep>,
}

impl IncrementalReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("kb_rules,on_training_set,tot_mean,tot_std,part_mean,part_std\n");
        for st in &self.steps {
            s.push_str(&format!(
                "{},{},{:.4},{:.4},{:.4},{:.4}\n",
                st.kb_rules, st.on_training_set, st.tot.mean, st.tot.std, st.part.mean, st.part.std
            ));
        }
        s
    }
}

impl fmt::Display for IncrementalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "incremental knowledge bases")?;
        header(f, &self.config, &self.fixture_hash)?;
        for st in &self.steps {
            let note = if st.on_training_set { "  (training set)" } else { "" };
            writeln!(f, "{:>3} rules  tot {}  part {}{note}", st.kb_rules, st.tot, st.part)?;
        }
        writeln!(f, "published reference: low for 20 and 22 rules, then rising to a peak of part 98.01 and tot 91.18")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CtdRow {
    pub seed: u64,
    pub accuracy: f64,
    pub untrained: f64,
    pub specificity: Option<f64>,
    /// Applicable test cases summed over folds.
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CtdGroupReport {
    pub group: CtdGroup,
    pub rows: Vec<CtdRow>,
    pub accuracy: Summary,
    pub untrained: Summary,
    pub specificity: Option<Summary>,
}

impl CtdGroupReport {
    pub(super) fn new(group: CtdGroup, rows: Vec<CtdRow>) -> Self {
        let specificity = group
            .ctd_head
            .as_ref()
            .map(|_| Summary::of(rows.iter().filter_map(|r| r.specificity)));
        CtdGroupReport {
            accuracy: Summary::of(rows.iter().map(|r| r.accuracy)),
            untrained: Summary::of(rows.iter().map(|r| r.untrained)),
            specificity,
            group,
            rows,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CtdReport {
    pub config: ExperimentConfig,
    pub fixture_hash: String,
    pub excluded_priorities: Vec<(String, String)>,
    pub groups: Vec<CtdGroupReport>,
}

impl fmt::Display for CtdReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "contrary-to-duty orderings learned from examples")?;
        header(f, &self.config, &self.fixture_hash)?;
        let excluded: Vec<String> = self.excluded_priorities.iter().map(|(h, l)| format!("{h} > {l}")).collect();
        writeln!(f, "withheld priorities: {}", excluded.join(", "))?;
        for g in &self.groups {
            write!(f, "{:<26} accuracy {}  untrained {}", g.group.name, g.accuracy, g.untrained)?;
            match &g.specificity {
                Some(s) => writeln!(f, "  head specificity {s}")?,
                None => writeln!(f)?,
            }
        }
        writeln!(f, "published reference: 95, 93 and 87 on the three pairs, in the order listed")
    }
}
