//! Training-phase instrumentation: goal-type collection with growth curves,
//! inquiry-response and lexical-usage logs, and step benchmarks.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::chooser::ObservedResponses;
use crate::exec::{map_indexed, Execution};
use crate::extractor::GoalTypeSet;
use crate::generator::generate_sentence;
use crate::lattice::TypeLattice;
use crate::lexicon::Lexicon;
use crate::semantics::SemanticSpec;
use crate::types::{LexId, TypeId};

/// Default number of consecutive sentences without new types after which
/// training is considered saturated.
pub const DEFAULT_PLATEAU_WINDOW: usize = 25;

/// Cumulative type counts, one point per sentence.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrowthSeries {
    /// (1-based sentence index, cumulative type count)
    pub points: Vec<(usize, usize)>,
}

impl GrowthSeries {
    pub fn final_count(&self) -> usize {
        self.points.last().map(|p| p.1).unwrap_or(0)
    }

    pub fn is_monotone(&self) -> bool {
        self.points.windows(2).all(|w| w[1].1 >= w[0].1 && w[1].0 == w[0].0 + 1)
            && self.points.first().is_none_or(|p| p.0 == 1)
    }

    /// Index of the sentence that added the last new type.
    pub fn stabilized_at(&self) -> Option<usize> {
        let last = self.final_count();
        self.points.iter().find(|p| p.1 == last).map(|p| p.0)
    }

    /// First sentence index after which `window` consecutive sentences added
    /// nothing, if that happened.
    pub fn plateau(&self, window: usize) -> Option<usize> {
        let mut run = 0;
        for w in self.points.windows(2) {
            if w[1].1 == w[0].1 {
                run += 1;
                if run >= window {
                    return Some(w[1].0 - window);
                }
            } else {
                run = 0;
            }
        }
        None
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CurveRow {
    sentence: usize,
    cumulative_types: usize,
}

/// Writes the series as `sentence,cumulative_types` CSV with a header.
pub fn emit_growth_curve<W: Write>(series: &GrowthSeries, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if series.points.is_empty() {
        w.write_record(["sentence", "cumulative_types"])?;
    }
    for &(sentence, cumulative_types) in &series.points {
        w.serialize(CurveRow { sentence, cumulative_types })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_growth_curve<R: Read>(input: R) -> csv::Result<GrowthSeries> {
    let mut r = csv::Reader::from_reader(input);
    let mut points = Vec::new();
    for row in r.deserialize() {
        let row: CurveRow = row?;
        points.push((row.sentence, row.cumulative_types));
    }
    Ok(GrowthSeries { points })
}

/// Inquiry responses and lexical items observed in training.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingLog {
    pub responses: ObservedResponses,
    pub usage: BTreeSet<LexId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentenceFailure {
    pub index: usize,
    pub label: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Training {
    pub goal: GoalTypeSet,
    pub series: GrowthSeries,
    pub log: TrainingLog,
    pub failures: Vec<SentenceFailure>,
}

/// Generates every spec and accumulates the types, responses and lexical
/// items used. Failed sentences add nothing but keep their series point.
pub fn collect_goal_types(
    lattice: &TypeLattice,
    lexicon: &Lexicon,
    corpus: &[SemanticSpec],
    exec: Execution,
) -> Training {
    let results = map_indexed(exec, corpus, |_, spec| generate_sentence(lattice, lexicon, spec));
    let mut types: BTreeSet<TypeId> = BTreeSet::new();
    let mut log = TrainingLog::default();
    let mut series = GrowthSeries::default();
    let mut failures = Vec::new();
    for (i, result) in results.into_iter().enumerate() {
        match result {
            Ok(r) => {
                types.extend(r.used_types);
                for (q, answers) in r.inquiry_log {
                    log.responses.entry(q).or_default().extend(answers);
                }
                log.usage.extend(r.lexical_usage);
            }
            Err(e) => failures.push(SentenceFailure {
                index: i,
                label: corpus[i].label(i),
                message: e.to_string(),
            }),
        }
        series.points.push((i + 1, types.len()));
    }
    log.responses.sort_keys();
    for answers in log.responses.values_mut() {
        answers.sort();
    }
    let goal = GoalTypeSet {
        types,
        source: None,
        sentences: corpus.len(),
    };
    Training { goal, series, log, failures }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BenchRow {
    pub label: String,
    pub full_steps: usize,
    pub sub_steps: usize,
    pub improvement: usize,
    pub sentence: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SentenceSteps {
    pub index: usize,
    pub full_steps: usize,
    pub sub_steps: usize,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WallClock {
    pub full_ms: f64,
    pub sub_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// Σ sub steps / Σ full steps.
    pub aggregate_ratio: f64,
    pub mean_ratio: f64,
    pub sentences: Vec<SentenceSteps>,
    /// Sentences that failed under either grammar, skipped.
    pub skipped: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock: Option<WallClock>,
}

impl BenchReport {
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<8} {:>6} {:>6} {:>12}  sentence", "", "full", "sub", "improvement");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<8} {:>6} {:>6} {:>12}  {}",
                r.label, r.full_steps, r.sub_steps, r.improvement, r.sentence
            );
        }
        let _ = writeln!(out, "aggregate ratio {:.4}", self.aggregate_ratio);
        let _ = writeln!(out, "mean ratio      {:.4}", self.mean_ratio);
        if let Some(w) = &self.wall_clock {
            let _ = writeln!(out, "wall clock      full {:.3} ms, sub {:.3} ms", w.full_ms, w.sub_ms);
        }
        out
    }
}

/// Step counts of both grammars on every spec, with worst, best and
/// average improvement rows.
pub fn benchmark(
    full: (&TypeLattice, &Lexicon),
    sub: (&TypeLattice, &Lexicon),
    corpus: &[SemanticSpec],
    exec: Execution,
    wall_clock: bool,
) -> BenchReport {
    let results = map_indexed(exec, corpus, |_, spec| {
        let a = generate_sentence(full.0, full.1, spec).ok()?;
        let b = generate_sentence(sub.0, sub.1, spec).ok()?;
        Some((a.steps, b.steps, a.text))
    });
    let mut sentences = Vec::new();
    let mut skipped = Vec::new();
    for (index, r) in results.into_iter().enumerate() {
        match r {
            Some((full_steps, sub_steps, text)) => sentences.push(SentenceSteps { index, full_steps, sub_steps, text }),
            None => skipped.push(index),
        }
    }
    let row = |label: &str, s: &SentenceSteps| BenchRow {
        label: label.to_string(),
        full_steps: s.full_steps,
        sub_steps: s.sub_steps,
        improvement: s.full_steps.saturating_sub(s.sub_steps),
        sentence: s.text.clone(),
    };
    let gain = |s: &SentenceSteps| s.full_steps.saturating_sub(s.sub_steps);
    let mut rows = Vec::new();
    if !sentences.is_empty() {
        let worst = sentences.iter().min_by_key(|s| (gain(s), s.index)).expect("non-empty");
        let best = sentences
            .iter()
            .max_by_key(|s| (gain(s), std::cmp::Reverse(s.index)))
            .expect("non-empty");
        let mean = sentences.iter().map(|s| gain(s) as f64).sum::<f64>() / sentences.len() as f64;
        let average = sentences
            .iter()
            .min_by(|a, b| {
                let da = (gain(a) as f64 - mean).abs();
                let db = (gain(b) as f64 - mean).abs();
                da.total_cmp(&db).then(a.index.cmp(&b.index))
            })
            .expect("non-empty");
        rows.push(row("worst", worst));
        rows.push(row("best", best));
        rows.push(row("average", average));
    }
    let (sum_full, sum_sub) = sentences
        .iter()
        .fold((0, 0), |(f, s), x| (f + x.full_steps, s + x.sub_steps));
    let aggregate_ratio = if sum_full == 0 { 1.0 } else { sum_sub as f64 / sum_full as f64 };
    let mean_ratio = if sentences.is_empty() {
        1.0
    } else {
        sentences
            .iter()
            .map(|s| if s.full_steps == 0 { 1.0 } else { s.sub_steps as f64 / s.full_steps as f64 })
            .sum::<f64>()
            / sentences.len() as f64
    };
    let wall_clock = wall_clock.then(|| WallClock {
        full_ms: time_corpus(full, corpus, exec).as_secs_f64() * 1e3,
        sub_ms: time_corpus(sub, corpus, exec).as_secs_f64() * 1e3,
    });
    BenchReport { rows, aggregate_ratio, mean_ratio, sentences, skipped, wall_clock }
}

fn time_corpus(g: (&TypeLattice, &Lexicon), corpus: &[SemanticSpec], exec: Execution) -> Duration {
    let start = Instant::now();
    let _ = map_indexed(exec, corpus, |_, spec| generate_sentence(g.0, g.1, spec).is_ok());
    start.elapsed()
}
