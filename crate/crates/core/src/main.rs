//! clone-lattice command line interface.

use clap::{Args, Parser, Subcommand};
use clone_lattice::constraints::{check_equivalence, match_variables, simplify, Verdict};
use clone_lattice::depgraph::{build_dependency_graph, taint_pointer};
use clone_lattice::error::PipelineError;
use clone_lattice::parser::{enumerate_pointers, parse_translation_unit};
use clone_lattice::pipeline::{emit_report, load_corpus, run_pipeline, PipelineConfig};
use clone_lattice::printer::print_tree;
use clone_lattice::slicer::{isolate, PointerSlice};
use clone_lattice::symexec::symbolic_execute;
use clone_lattice::vectors::vectorize;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "clone-lattice",
    version,
    about = "Pointer-isolated clone detection with bound-constraint verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline: slice, cluster, verify, feed back, report
    Analyze(AnalyzeArgs),
    /// Dump pointer-isolated slices with original line numbers
    Slice(SliceArgs),
    /// Dump feature vectors of slices (or whole functions)
    Vectors(VectorsArgs),
    /// Compare the bound constraints of two fragments
    Verify(VerifyArgs),
}

#[derive(Args)]
struct CorpusOpts {
    /// Corpus directory of pre-expanded .c files
    #[arg(long)]
    corpus: PathBuf,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    corpus: CorpusOpts,
    /// Code similarity threshold in [0.70, 1.00]
    #[arg(long, default_value_t = 0.80)]
    similarity: f64,
    /// Minimum token count for a fragment to enter clustering
    #[arg(long, default_value_t = 20)]
    min_tokens: usize,
    /// Loop unroll bound for symbolic execution
    #[arg(long, default_value_t = 2)]
    unroll_bound: usize,
    /// Cap on feedback iterations
    #[arg(long, default_value_t = 64)]
    max_iterations: usize,
    /// Initial weight delta applied to differing dimensions (> 1.0)
    #[arg(long, default_value_t = 2.0)]
    delta_init: f64,
    /// Sub-clusters sampled per cluster per iteration
    #[arg(long, default_value_t = 2)]
    sample_k: usize,
    /// Seed for hashing and sampling
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Radius of the bounded integer domain used by the equivalence check
    #[arg(long, default_value_t = 64)]
    domain_radius: i64,
    /// Write the JSON report here
    #[arg(long)]
    report: Option<PathBuf>,
    /// Cluster whole-function vectors without pointer isolation
    #[arg(long)]
    no_slicing: bool,
    /// Accepted for configuration parity; striding is not applied
    #[arg(long)]
    stride: Option<u64>,
}

#[derive(Args)]
struct SliceArgs {
    #[command(flatten)]
    corpus: CorpusOpts,
    /// Only this function
    #[arg(long)]
    function: Option<String>,
    /// Also dump dependency graphs in DOT format
    #[arg(long)]
    dot: bool,
}

#[derive(Args)]
struct VectorsArgs {
    #[command(flatten)]
    corpus: CorpusOpts,
    /// Vectorize whole functions instead of slices
    #[arg(long)]
    no_slicing: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    file_a: PathBuf,
    #[arg(long)]
    function_a: String,
    /// Target pointer in the first function (default: first enumerated)
    #[arg(long)]
    pointer_a: Option<String>,
    #[arg(long)]
    file_b: PathBuf,
    #[arg(long)]
    function_b: String,
    #[arg(long)]
    pointer_b: Option<String>,
    #[arg(long, default_value_t = 2)]
    unroll_bound: usize,
    #[arg(long, default_value_t = 64)]
    domain_radius: i64,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("CLONE_LATTICE_LOG")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(args) => analyze(args),
        Command::Slice(args) => slice_cmd(args),
        Command::Vectors(args) => vectors_cmd(args),
        Command::Verify(args) => verify_cmd(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                PipelineError::EmptyCorpus(_) | PipelineError::InvalidConfig(_) => {
                    ExitCode::from(2)
                }
                _ => ExitCode::from(1),
            }
        }
    }
}

fn analyze(args: AnalyzeArgs) -> Result<(), PipelineError> {
    let config = PipelineConfig {
        corpus_dir: args.corpus.corpus,
        similarity: args.similarity,
        min_tokens: args.min_tokens,
        unroll_bound: args.unroll_bound,
        max_iterations: args.max_iterations,
        delta_init: args.delta_init,
        sample_k: args.sample_k,
        seed: args.seed,
        domain_radius: args.domain_radius,
        report_path: args.report,
        no_slicing: args.no_slicing,
        stride: args.stride,
    };
    let report = run_pipeline(&config)?;
    print!("{}", report.summary());
    if let Some(path) = &config.report_path {
        emit_report(&report, path)?;
        println!("report written to {}", path.display());
    }
    Ok(())
}

fn build_slices(
    corpus_dir: &PathBuf,
    function: Option<&str>,
    dot: bool,
) -> Result<Vec<PointerSlice>, PipelineError> {
    let corpus = load_corpus(corpus_dir)?;
    let mut out = Vec::new();
    for cf in &corpus.functions {
        if function.is_some_and(|f| f != cf.tree.function_name) {
            continue;
        }
        let pointers = enumerate_pointers(&cf.tree);
        if pointers.is_empty() {
            continue;
        }
        let graph = build_dependency_graph(&cf.tree);
        if dot {
            print!("{}", graph.to_dot());
        }
        for pointer in pointers {
            let Ok(related) = taint_pointer(&graph, &pointer) else {
                continue;
            };
            if let Ok(slice) = isolate(&cf.tree, &pointer, &related) {
                out.push(slice);
            }
        }
    }
    Ok(out)
}

fn slice_cmd(args: SliceArgs) -> Result<(), PipelineError> {
    let slices = build_slices(&args.corpus.corpus, args.function.as_deref(), args.dot)?;
    for slice in &slices {
        let related: Vec<String> = slice
            .related
            .variables
            .iter()
            .map(|v| format!("{v} ({})", slice.related.roles[v].name()))
            .collect();
        println!("== {} [{}]", slice.id(), related.join(", "));
        print!("{}", slice.annotated_source());
    }
    Ok(())
}

fn vectors_cmd(args: VectorsArgs) -> Result<(), PipelineError> {
    if args.no_slicing {
        let corpus = load_corpus(&args.corpus.corpus)?;
        for cf in &corpus.functions {
            let v = vectorize(&cf.tree);
            println!(
                "{}:{} size={} tokens={} counts={:?}",
                cf.file, cf.tree.function_name, v.size, cf.tree.token_count, v.counts
            );
        }
        return Ok(());
    }
    let slices = build_slices(&args.corpus.corpus, None, false)?;
    for slice in &slices {
        let v = vectorize(&slice.slice_tree);
        println!(
            "{} size={} tokens={} counts={:?}",
            slice.id(),
            v.size,
            slice.token_count(),
            v.counts
        );
    }
    Ok(())
}

fn verify_cmd(args: VerifyArgs) -> Result<(), PipelineError> {
    let slice_a = fragment_slice(&args.file_a, &args.function_a, args.pointer_a.as_deref())?;
    let slice_b = fragment_slice(&args.file_b, &args.function_b, args.pointer_b.as_deref())?;
    let run = |slice: &PointerSlice| {
        symbolic_execute(slice, args.unroll_bound)
            .map(|cs| simplify(&cs))
            .map_err(|e| PipelineError::InvalidConfig(format!("{}: {e}", slice.id())))
    };
    let ca = run(&slice_a)?;
    let cb = run(&slice_b)?;
    println!("-- slice {}", slice_a.id());
    print!("{}", print_tree(&slice_a.slice_tree));
    println!("-- constraints");
    print!("{ca}");
    println!("-- slice {}", slice_b.id());
    print!("{}", print_tree(&slice_b.slice_tree));
    println!("-- constraints");
    print!("{cb}");
    match match_variables(&ca, &cb) {
        Err(e) => println!("verdict: FalsePositive ({e})"),
        Ok(matching) => {
            for (a, b) in &matching.pairs {
                println!("match: {a} <-> {b}");
            }
            match check_equivalence(&ca, &cb, &matching, args.domain_radius) {
                Ok(Verdict::Equivalent) => println!("verdict: TrueClone"),
                Ok(Verdict::NotEquivalent) => println!("verdict: FalsePositive"),
                Err(e) => println!("verdict: Skipped ({e})"),
            }
        }
    }
    Ok(())
}

fn fragment_slice(
    file: &PathBuf,
    function: &str,
    pointer: Option<&str>,
) -> Result<PointerSlice, PipelineError> {
    let text = std::fs::read_to_string(file)?;
    let name = file.display().to_string();
    let trees = parse_translation_unit(&text, &name)
        .map_err(|e| PipelineError::InvalidConfig(e.to_string()))?;
    let tree = trees
        .into_iter()
        .find(|t| t.function_name == function)
        .ok_or_else(|| {
            PipelineError::InvalidConfig(format!("function '{function}' not found in {name}"))
        })?;
    let pointers = enumerate_pointers(&tree);
    let decl = match pointer {
        Some(p) => pointers.into_iter().find(|d| d.name == p).ok_or_else(|| {
            PipelineError::InvalidConfig(format!("pointer '{p}' not found in '{function}'"))
        })?,
        None => pointers
            .into_iter()
            .next()
            .ok_or_else(|| PipelineError::InvalidConfig(format!("no pointers in '{function}'")))?,
    };
    let graph = build_dependency_graph(&tree);
    let related =
        taint_pointer(&graph, &decl).map_err(|e| PipelineError::InvalidConfig(e.to_string()))?;
    isolate(&tree, &decl, &related).map_err(|e| PipelineError::InvalidConfig(e.to_string()))
}
