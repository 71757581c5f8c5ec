//! Command-line front end: fold subgroup files, analyze foldings, compute
//! positive bases and trail decompositions, intersect subgroups, evaluate
//! the Hanna Neumann bounds, embed into rank 2, and run the randomized
//! property harness.
//!
//! Exit codes: 0 success, 1 the Hanna Neumann conjecture verdict failed,
//! 2 usage/parse error, 3 a proved bound failed (an implementation bug).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use stallings::decomposition::{
    find_sources_sinks, positive_basis, trail_decomposition, PositiveBasisOutcome,
    TrailDecompositionOutcome,
};
use stallings::experiment::{run_experiment, ExperimentConfig, WordDistribution};
use stallings::folding::{DegreeProfile, Folding, SubgroupPresentation};
use stallings::graph::{is_strongly_connected, TrailDecomposition};
use stallings::intersection::{embed_to_rank2, hnc_check, pullback};

const EXIT_OK: u8 = 0;
const EXIT_CONJECTURE_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_PROVED_BOUND_FAILED: u8 = 3;

#[derive(Parser)]
#[command(name = "stallings", version, about = "Stallings foldings for subgroups of free groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Write a Graphviz DOT rendering of the resulting folding to PATH.
    #[arg(long, global = true, value_name = "PATH")]
    dot: Option<PathBuf>,

    /// Emit JSON instead of text where both are available.
    #[arg(long, global = true)]
    json: bool,

    /// Seed for randomized commands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Fold a subgroup file and print the canonical folding.
    Fold { file: PathBuf },
    /// Print a JSON structural summary of a subgroup's folding.
    Analyze { file: PathBuf },
    /// Compute a positive basis when the folding is strongly connected.
    PositiveBasis { file: PathBuf },
    /// Compute a directed trail decomposition if one exists.
    TrailDecomp { file: PathBuf },
    /// Intersect two subgroups via the pullback folding.
    Intersect { file_h: PathBuf, file_k: PathBuf },
    /// Evaluate the Hanna Neumann bounds for a pair of subgroups.
    HncCheck { file_h: PathBuf, file_k: PathBuf },
    /// Rewrite a subgroup over F_n into F_2 via x_i -> a^i b a^i.
    Embed { file: PathBuf },
    /// Run seeded randomized property checks.
    Experiment {
        #[arg(long)]
        samples: usize,
        /// 'positive-words' or 'reduced-words'.
        #[arg(long)]
        distribution: String,
        /// Inclusive generator count range, e.g. 1..3.
        #[arg(long, default_value = "1..3", value_name = "LO..HI")]
        generators: String,
        /// Inclusive word length range, e.g. 1..4.
        #[arg(long, default_value = "1..4", value_name = "LO..HI")]
        length: String,
        /// Ambient free group rank.
        #[arg(long, default_value_t = 2)]
        rank: u8,
        /// Directory for reproducer files of violated properties.
        #[arg(long, value_name = "DIR")]
        reproducer_dir: Option<PathBuf>,
    },
}

#[derive(Serialize, Deserialize)]
struct AnalyzeReport {
    rank: usize,
    degree_profile: Option<DegreeProfile>,
    three_balanced: Option<bool>,
    sources: Vec<usize>,
    sinks: Vec<usize>,
    strongly_connected: bool,
    positively_generated: bool,
    majority_type: Option<u8>,
}

#[derive(Serialize, Deserialize)]
struct DecompositionDto {
    base: usize,
    trails: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct TrailDecompReport {
    decomposition: Option<DecompositionDto>,
    sources: Vec<usize>,
    sinks: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct PositiveBasisReport {
    strongly_connected: bool,
    rank: usize,
    basis: Option<Vec<String>>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn read_presentation(path: &Path) -> Result<SubgroupPresentation, String> {
    let text = fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {}", path.display(), e))?;
    SubgroupPresentation::parse(&text).map_err(|e| format!("{}: {}", path.display(), e))
}

fn write_dot(folding: &Folding, path: &Path) -> Result<(), String> {
    fs::write(path, folding.to_dot())
        .map_err(|e| format!("cannot write {}: {}", path.display(), e))
}

fn parse_range(text: &str) -> Result<(usize, usize), String> {
    let (lo, hi) = text
        .split_once("..")
        .ok_or_else(|| format!("invalid range '{text}', expected LO..HI"))?;
    let lo = lo.trim().parse().map_err(|_| format!("invalid range bound '{lo}'"))?;
    let hi = hi.trim().parse().map_err(|_| format!("invalid range bound '{hi}'"))?;
    Ok((lo, hi))
}

fn decomposition_dto(d: &TrailDecomposition) -> DecompositionDto {
    DecompositionDto {
        base: d.base().0,
        trails: d
            .trails()
            .iter()
            .map(|t| t.edges().iter().map(|e| e.0).collect())
            .collect(),
    }
}

fn vertex_list(set: &std::collections::BTreeSet<stallings::graph::VertexId>) -> Vec<usize> {
    set.iter().map(|v| v.0).collect()
}

fn describe_vertex(v: usize, base: usize) -> String {
    if v == base {
        format!("{v} (base)")
    } else {
        format!("{v}")
    }
}

fn run(cli: Cli) -> Result<u8, String> {
    match cli.command {
        Command::Fold { file } => {
            let folding = read_presentation(&file)?.folding();
            print!("{}", folding.canonical_text());
            if let Some(path) = &cli.dot {
                write_dot(&folding, path)?;
            }
            Ok(EXIT_OK)
        }
        Command::Analyze { file } => {
            let folding = read_presentation(&file)?.folding();
            let report = analyze(&folding);
            println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
            if let Some(path) = &cli.dot {
                write_dot(&folding, path)?;
            }
            Ok(EXIT_OK)
        }
        Command::PositiveBasis { file } => {
            let folding = read_presentation(&file)?.folding();
            let report = match positive_basis(&folding) {
                PositiveBasisOutcome::Basis(basis) => PositiveBasisReport {
                    strongly_connected: true,
                    rank: folding.rank(),
                    basis: Some(basis.iter().map(|w| w.to_string()).collect()),
                },
                PositiveBasisOutcome::NotStronglyConnected => PositiveBasisReport {
                    strongly_connected: false,
                    rank: folding.rank(),
                    basis: None,
                },
            };
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
            } else {
                match &report.basis {
                    Some(words) => {
                        for w in words {
                            println!("{}", if w.is_empty() { "(empty)" } else { w });
                        }
                        if words.is_empty() {
                            println!("(trivial subgroup: empty basis)");
                        }
                    }
                    None => println!("not strongly connected: no positive generating set exists"),
                }
            }
            Ok(EXIT_OK)
        }
        Command::TrailDecomp { file } => {
            let folding = read_presentation(&file)?.folding();
            let outcome = trail_decomposition(&folding).map_err(|e| e.to_string())?;
            let report = find_sources_sinks(&folding);
            let dto = TrailDecompReport {
                decomposition: match &outcome {
                    TrailDecompositionOutcome::Decomposition(d) => Some(decomposition_dto(d)),
                    TrailDecompositionOutcome::NoDecomposition(_) => None,
                },
                sources: vertex_list(&report.sources),
                sinks: vertex_list(&report.sinks),
            };
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&dto).expect("serializable"));
            } else {
                match &dto.decomposition {
                    Some(d) => {
                        println!("base {}", d.base);
                        for (i, trail) in d.trails.iter().enumerate() {
                            let ids: Vec<String> = trail.iter().map(|e| e.to_string()).collect();
                            println!("P{}: {}", i, ids.join(" "));
                        }
                    }
                    None => {
                        let base = folding.base().0;
                        let mut parts = Vec::new();
                        for &s in &dto.sources {
                            parts.push(format!("source at vertex {}", describe_vertex(s, base)));
                        }
                        for &s in &dto.sinks {
                            parts.push(format!("sink at vertex {}", describe_vertex(s, base)));
                        }
                        println!("no decomposition: {}", parts.join(", "));
                    }
                }
            }
            Ok(EXIT_OK)
        }
        Command::Intersect { file_h, file_k } => {
            let fh = read_presentation(&file_h)?.folding();
            let fk = read_presentation(&file_k)?.folding();
            let meet = pullback(&fh, &fk).map_err(|e| e.to_string())?;
            print!("{}", meet.canonical_text());
            if let Some(path) = &cli.dot {
                write_dot(&meet, path)?;
            }
            Ok(EXIT_OK)
        }
        Command::HncCheck { file_h, file_k } => {
            let ph = read_presentation(&file_h)?;
            let pk = read_presentation(&file_k)?;
            let report = hnc_check(&ph, &pk).map_err(|e| e.to_string())?;
            println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
            if !report.proved_bounds_hold() {
                Ok(EXIT_PROVED_BOUND_FAILED)
            } else if !report.verdict_hn_conjecture {
                Ok(EXIT_CONJECTURE_FAILED)
            } else {
                Ok(EXIT_OK)
            }
        }
        Command::Embed { file } => {
            let p = read_presentation(&file)?;
            let embedded = embed_to_rank2(&p);
            if cli.json {
                let gens: Vec<String> = embedded.generators().iter().map(|w| w.to_string()).collect();
                let value = serde_json::json!({ "alphabet": 2, "generators": gens });
                println!("{}", serde_json::to_string_pretty(&value).expect("serializable"));
            } else {
                print!("{}", embedded);
            }
            Ok(EXIT_OK)
        }
        Command::Experiment {
            samples,
            distribution,
            generators,
            length,
            rank,
            reproducer_dir,
        } => {
            let config = ExperimentConfig {
                seed: cli.seed,
                samples,
                generator_count: parse_range(&generators)?,
                word_length: parse_range(&length)?,
                distribution: distribution.parse::<WordDistribution>().map_err(|e| e.to_string())?,
                ambient_rank: rank,
            };
            config.validate().map_err(|e| e.to_string())?;
            let report = run_experiment(&config).map_err(|e| e.to_string())?;
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
            } else {
                print!("{}", report);
            }
            if !report.violations.is_empty() {
                let dir = reproducer_dir.unwrap_or_else(|| PathBuf::from("."));
                fs::create_dir_all(&dir)
                    .map_err(|e| format!("cannot create {}: {}", dir.display(), e))?;
                for v in &report.violations {
                    let slug: String = v
                        .property
                        .chars()
                        .map(|c| if c.is_ascii_alphanumeric() { c } else { '-' })
                        .collect();
                    let stem = format!("reproducer-seed{}-sample{}-{}", config.seed, v.sample, slug);
                    let path_h = dir.join(format!("{stem}-h.sub"));
                    fs::write(&path_h, &v.presentation_h)
                        .map_err(|e| format!("cannot write {}: {}", path_h.display(), e))?;
                    println!("wrote {}", path_h.display());
                    if let Some(k) = &v.presentation_k {
                        let path_k = dir.join(format!("{stem}-k.sub"));
                        fs::write(&path_k, k)
                            .map_err(|e| format!("cannot write {}: {}", path_k.display(), e))?;
                        println!("wrote {}", path_k.display());
                    }
                }
                let any_theorem = report.violations.iter().any(|v| v.theorem_backed);
                return Ok(if any_theorem { EXIT_PROVED_BOUND_FAILED } else { EXIT_CONJECTURE_FAILED });
            }
            Ok(EXIT_OK)
        }
    }
}

fn analyze(folding: &Folding) -> AnalyzeReport {
    let report = find_sources_sinks(folding);
    AnalyzeReport {
        rank: folding.rank(),
        degree_profile: folding.degree_profile().ok(),
        three_balanced: folding.is_3_balanced().ok(),
        sources: vertex_list(&report.sources),
        sinks: vertex_list(&report.sinks),
        strongly_connected: is_strongly_connected(folding.graph()),
        positively_generated: stallings::decomposition::is_positively_generated(folding),
        majority_type: folding.neumann_majority_type().ok().flatten(),
    }
}
