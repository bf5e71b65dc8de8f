//! End-to-end pipeline: corpus ingestion, slicing, clustering, the
//! verification/feedback loop, and the machine-readable report.

use crate::ast::AstTree;
use crate::cluster::{lsh_cluster, CloneCluster};
use crate::depgraph::{build_dependency_graph, taint_pointer};
use crate::error::{PipelineError, SyntaxError};
use crate::feedback::{
    run_until_convergence, ConvergenceConfig, ConvergenceRow, FeedbackParams, VerifiedPair,
    VerifyOutcome,
};
use crate::parser::{enumerate_pointers, parse_translation_unit};
use crate::slicer::{isolate, PointerSlice};
use crate::vectors::{vectorize, WeightedVector};
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize)]
pub struct PipelineConfig {
    pub corpus_dir: PathBuf,
    pub similarity: f64,
    pub min_tokens: usize,
    pub unroll_bound: usize,
    pub max_iterations: usize,
    pub delta_init: f64,
    pub sample_k: usize,
    pub seed: u64,
    pub domain_radius: i64,
    #[serde(skip)]
    pub report_path: Option<PathBuf>,
    pub no_slicing: bool,
    /// Accepted for configuration parity; sliding-window striding is not
    /// applied (equivalent to an infinite stride).
    pub stride: Option<u64>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            corpus_dir: PathBuf::new(),
            similarity: 0.80,
            min_tokens: 20,
            unroll_bound: 2,
            max_iterations: 64,
            delta_init: 2.0,
            sample_k: 2,
            seed: 42,
            domain_radius: 64,
            report_path: None,
            no_slicing: false,
            stride: None,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if !(0.70..=1.00).contains(&self.similarity) {
            return Err(PipelineError::InvalidConfig(format!(
                "similarity {} outside [0.70, 1.00]",
                self.similarity
            )));
        }
        if self.min_tokens < 1 {
            return Err(PipelineError::InvalidConfig(
                "min-tokens must be at least 1".into(),
            ));
        }
        if self.max_iterations < 1 {
            return Err(PipelineError::InvalidConfig(
                "max-iterations must be at least 1".into(),
            ));
        }
        if self.unroll_bound < 1 {
            return Err(PipelineError::InvalidConfig(
                "unroll-bound must be at least 1".into(),
            ));
        }
        if self.delta_init <= 1.0 {
            return Err(PipelineError::InvalidConfig(
                "delta-init must exceed 1.0".into(),
            ));
        }
        Ok(())
    }
}

/// One parsed function with its corpus-relative file path.
#[derive(Debug, Clone)]
pub struct CorpusFunction {
    pub file: String,
    pub tree: AstTree,
}

#[derive(Debug, Default)]
pub struct Corpus {
    pub functions: Vec<CorpusFunction>,
    pub parse_errors: Vec<SyntaxError>,
    pub file_count: usize,
}

/// Read every `.c` file under `dir` (recursively, sorted) and parse it.
/// Files that fail to parse are collected and skipped.
pub fn load_corpus(dir: &Path) -> Result<Corpus, PipelineError> {
    let mut files = Vec::new();
    collect_c_files(dir, &mut files)?;
    files.sort();
    if files.is_empty() {
        return Err(PipelineError::EmptyCorpus(dir.display().to_string()));
    }
    let mut corpus = Corpus {
        file_count: files.len(),
        ..Corpus::default()
    };
    for path in &files {
        let rel = path
            .strip_prefix(dir)
            .unwrap_or(path)
            .to_string_lossy()
            .to_string();
        let text = std::fs::read_to_string(path)?;
        match parse_translation_unit(&text, &rel) {
            Ok(trees) => corpus
                .functions
                .extend(trees.into_iter().map(|tree| CorpusFunction {
                    file: rel.clone(),
                    tree,
                })),
            Err(e) => corpus.parse_errors.push(e),
        }
    }
    if corpus.functions.is_empty() {
        return Err(PipelineError::AllFilesFailed(corpus.parse_errors.len()));
    }
    Ok(corpus)
}

fn collect_c_files(dir: &Path, out: &mut Vec<PathBuf>) -> Result<(), PipelineError> {
    for entry in std::fs::read_dir(dir)? {
        let entry = entry?;
        let path = entry.path();
        if path.is_dir() {
            collect_c_files(&path, out)?;
        } else if path.extension().is_some_and(|e| e == "c") {
            out.push(path);
        }
    }
    Ok(())
}

#[derive(Debug, Default)]
pub struct SliceSet {
    pub slices: Vec<PointerSlice>,
    pub skipped_empty: usize,
    pub pointer_count: usize,
}

/// Isolate every (function, pointer) slice of the corpus.
pub fn slice_corpus(corpus: &Corpus) -> SliceSet {
    let mut out = SliceSet::default();
    for cf in &corpus.functions {
        let pointers = enumerate_pointers(&cf.tree);
        out.pointer_count += pointers.len();
        if pointers.is_empty() {
            continue;
        }
        let graph = build_dependency_graph(&cf.tree);
        for pointer in pointers {
            let Ok(related) = taint_pointer(&graph, &pointer) else {
                continue;
            };
            match isolate(&cf.tree, &pointer, &related) {
                Ok(slice) => out.slices.push(slice),
                Err(_) => out.skipped_empty += 1,
            }
        }
    }
    out
}

// ---- report ----

#[derive(Debug, Clone, Serialize)]
pub struct ReportSpan {
    pub file: String,
    pub line_start: u32,
    pub line_end: u32,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairEndpoint {
    pub id: String,
    pub span: ReportSpan,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClonePairReport {
    pub a: PairEndpoint,
    pub b: PairEndpoint,
    pub distance: f64,
    pub threshold: f64,
    /// TrueClone / FalsePositive / Skipped(..) when the pair was sampled
    /// for verification; absent otherwise.
    pub verdict: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FunctionSlices {
    pub file: String,
    pub function: String,
    pub pointers: usize,
    pub slices: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct CorpusStats {
    pub files: usize,
    pub functions: usize,
    pub parse_errors: Vec<SyntaxError>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SliceStats {
    pub total: usize,
    pub skipped_empty: usize,
    pub below_min_tokens: usize,
    pub per_function: Vec<FunctionSlices>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationStats {
    pub true_clones: usize,
    pub false_positives: usize,
    pub skipped: usize,
    pub nonseparable: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool_version: String,
    pub config: PipelineConfig,
    pub corpus: CorpusStats,
    pub slices: SliceStats,
    pub clusters_before_feedback: usize,
    pub clusters_after_feedback: usize,
    pub clone_pairs: Vec<ClonePairReport>,
    pub verification: VerificationStats,
    pub convergence_log: Vec<ConvergenceRow>,
    /// Eliminated FP pairs over initially verified FP pairs; null when no
    /// FP was ever verified.
    pub elimination_percentage: Option<f64>,
    pub converged: bool,
}

impl Report {
    pub fn clone_pair_count(&self) -> usize {
        self.clone_pairs.len()
    }

    /// Short human-readable summary.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "corpus: {} files, {} functions ({} parse errors)\n",
            self.corpus.files,
            self.corpus.functions,
            self.corpus.parse_errors.len()
        ));
        out.push_str(&format!(
            "slices: {} ({} empty skipped, {} below min-tokens)\n",
            self.slices.total, self.slices.skipped_empty, self.slices.below_min_tokens
        ));
        out.push_str(&format!(
            "clusters: {} before feedback, {} after; {} clone pairs\n",
            self.clusters_before_feedback,
            self.clusters_after_feedback,
            self.clone_pairs.len()
        ));
        out.push_str(&format!(
            "verification: {} true clones, {} false positives ({} nonseparable, {} skipped)\n",
            self.verification.true_clones,
            self.verification.false_positives,
            self.verification.nonseparable,
            self.verification.skipped
        ));
        match self.elimination_percentage {
            Some(p) => out.push_str(&format!(
                "false positives eliminated: {:.2}% over {} iterations\n",
                p * 100.0,
                self.convergence_log.len()
            )),
            None => out.push_str("false positives eliminated: n/a (none verified)\n"),
        }
        out
    }
}

/// Run the full pipeline and assemble the report.
pub fn run_pipeline(config: &PipelineConfig) -> Result<Report, PipelineError> {
    config.validate()?;
    let corpus = load_corpus(&config.corpus_dir)?;

    let (vectors, slices, slice_stats) = if config.no_slicing {
        let vectors: Vec<WeightedVector> = corpus
            .functions
            .iter()
            .map(|cf| {
                let mut v = vectorize(&cf.tree);
                v.slice_ref.id = format!("{}:{}", cf.file, cf.tree.function_name);
                WeightedVector::new(v)
            })
            .collect();
        let below = vectors
            .iter()
            .filter(|v| v.base.slice_ref.token_count < config.min_tokens)
            .count();
        let stats = SliceStats {
            total: 0,
            skipped_empty: 0,
            below_min_tokens: below,
            per_function: Vec::new(),
        };
        (vectors, Vec::new(), stats)
    } else {
        let slice_set = slice_corpus(&corpus);
        let mut per_function: BTreeMap<(String, String), FunctionSlices> = BTreeMap::new();
        for cf in &corpus.functions {
            per_function.insert(
                (cf.file.clone(), cf.tree.function_name.clone()),
                FunctionSlices {
                    file: cf.file.clone(),
                    function: cf.tree.function_name.clone(),
                    pointers: enumerate_pointers(&cf.tree).len(),
                    slices: 0,
                },
            );
        }
        for slice in &slice_set.slices {
            if let Some(fs) =
                per_function.get_mut(&(slice.pointer.span.file.clone(), slice.origin.clone()))
            {
                fs.slices += 1;
            }
        }
        let vectors: Vec<WeightedVector> = slice_set
            .slices
            .iter()
            .map(|slice| {
                let mut v = vectorize(&slice.slice_tree);
                v.slice_ref.id = slice.id();
                v.slice_ref.token_count = slice.token_count();
                WeightedVector::new(v)
            })
            .collect();
        let below = vectors
            .iter()
            .filter(|v| v.base.slice_ref.token_count < config.min_tokens)
            .count();
        let stats = SliceStats {
            total: slice_set.slices.len(),
            skipped_empty: slice_set.skipped_empty,
            below_min_tokens: below,
            per_function: per_function.into_values().collect(),
        };
        (vectors, slice_set.slices, stats)
    };

    let clusters_before = lsh_cluster(&vectors, config.similarity, config.min_tokens, config.seed);

    let (final_clusters, final_vectors, log, verified, stats) = if config.no_slicing {
        let stats = VerificationStats {
            true_clones: 0,
            false_positives: 0,
            skipped: 0,
            nonseparable: 0,
        };
        (clusters_before.clone(), vectors, Vec::new(), Vec::new(), stats)
    } else {
        let outcome = run_until_convergence(
            &slices,
            vectors,
            &ConvergenceConfig {
                similarity: config.similarity,
                min_tokens: config.min_tokens,
                max_iterations: config.max_iterations,
                sample_k: config.sample_k,
                seed: config.seed,
                unroll_bound: config.unroll_bound,
                domain_radius: config.domain_radius,
                params: FeedbackParams {
                    delta_init: config.delta_init,
                    ..FeedbackParams::default()
                },
            },
        );
        let stats = VerificationStats {
            true_clones: outcome
                .verified
                .iter()
                .filter(|p| p.outcome == VerifyOutcome::TrueClone)
                .count(),
            false_positives: outcome
                .verified
                .iter()
                .filter(|p| p.outcome == VerifyOutcome::FalsePositive)
                .count(),
            skipped: outcome.skipped,
            nonseparable: outcome.nonseparable,
        };
        (
            outcome.clusters,
            outcome.vectors,
            outcome.log,
            outcome.verified,
            stats,
        )
    };

    let slice_spans: BTreeMap<String, ReportSpan> = slices
        .iter()
        .map(|s| (s.id(), slice_span(s)))
        .collect();
    let clone_pairs = pair_reports(
        &final_clusters,
        &final_vectors,
        &slice_spans,
        &verified,
        config.similarity,
    );

    let eliminated = stats.false_positives.saturating_sub(stats.nonseparable);
    let elimination_percentage = if stats.false_positives > 0 {
        Some(eliminated as f64 / stats.false_positives as f64)
    } else {
        None
    };
    let converged = config.no_slicing || log.last().is_none_or(|row| row.fps_eliminated == 0);

    Ok(Report {
        schema_version: 1,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        corpus: CorpusStats {
            files: corpus.file_count,
            functions: corpus.functions.len(),
            parse_errors: corpus.parse_errors.clone(),
        },
        slices: slice_stats,
        clusters_before_feedback: clusters_before.len(),
        clusters_after_feedback: final_clusters.len(),
        clone_pairs,
        verification: stats,
        convergence_log: log,
        elimination_percentage,
        converged,
    })
}

fn slice_span(slice: &PointerSlice) -> ReportSpan {
    let mut lines: Vec<u32> = slice
        .statements
        .iter()
        .flat_map(|(_, s)| [s.line_start, s.line_end])
        .collect();
    lines.sort_unstable();
    ReportSpan {
        file: slice.pointer.span.file.clone(),
        line_start: lines.first().copied().unwrap_or(0),
        line_end: lines.last().copied().unwrap_or(0),
    }
}

fn pair_reports(
    clusters: &[CloneCluster],
    vectors: &[WeightedVector],
    spans: &BTreeMap<String, ReportSpan>,
    verified: &[VerifiedPair],
    similarity: f64,
) -> Vec<ClonePairReport> {
    let verdict_of = |a: &str, b: &str| -> Option<String> {
        verified
            .iter()
            .find(|p| (p.a == a && p.b == b) || (p.a == b && p.b == a))
            .map(|p| match &p.outcome {
                VerifyOutcome::TrueClone => "TrueClone".to_string(),
                VerifyOutcome::FalsePositive => "FalsePositive".to_string(),
                VerifyOutcome::Skipped(reason) => format!("Skipped: {reason}"),
            })
    };
    let endpoint = |i: usize| -> PairEndpoint {
        let id = vectors[i].id().to_string();
        let span = spans.get(&id).cloned().unwrap_or(ReportSpan {
            file: id.split(':').next().unwrap_or("").to_string(),
            line_start: 0,
            line_end: 0,
        });
        PairEndpoint { id, span }
    };
    let mut out = Vec::new();
    for cluster in clusters {
        for (pos, &a) in cluster.members.iter().enumerate() {
            for &b in &cluster.members[pos + 1..] {
                let distance = vectors[a].distance_to(&vectors[b]);
                let threshold = crate::vectors::cluster_threshold(
                    similarity,
                    &vectors[a].base,
                    &vectors[b].base,
                );
                // single linkage groups transitively; a clone PAIR is
                // only a pair within its own threshold
                if distance > threshold {
                    continue;
                }
                out.push(ClonePairReport {
                    a: endpoint(a),
                    b: endpoint(b),
                    distance,
                    threshold,
                    verdict: verdict_of(vectors[a].id(), vectors[b].id()),
                });
            }
        }
    }
    out
}

/// Write the report as pretty-printed JSON with stable key order.
pub fn emit_report(report: &Report, path: &Path) -> Result<(), PipelineError> {
    let mut json = serde_json::to_string_pretty(report)?;
    json.push('\n');
    std::fs::write(path, json)?;
    Ok(())
}
