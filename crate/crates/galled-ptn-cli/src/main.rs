//! Command-line front end: decide, construct, verify, and cross-check
//! galled perfect transfer networks from files.
//!
//! Exit codes: 0 for a positive verdict, 1 for a principled negative
//! verdict (incompatible, not completable, unexplained characters, oracle
//! disagreement), 2 for input or format errors. Stdout carries the run's
//! artifacts; stderr carries warnings and diagnostics.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use galled_ptn::compat::{galled_compatible, CompatOutcome, TraceStep};
use galled_ptn::completion::{galled_completion, CompletionOutcome, Rejection};
use galled_ptn::io::{
    export_network, network_to_dot, parse_csv, parse_network, parse_newick, parse_sets,
    write_newick,
};
use galled_ptn::oracle::{
    brute_force_completable, enumerate_galled_networks, enumerate_trees, random_character_set,
    random_tree,
};
use galled_ptn::ptn::{explains, node_label, verify};
use galled_ptn::{par, CharacterSet, LgtNetwork, NodeId, Taxa, Tree};

#[derive(Parser)]
#[command(name = "galled-ptn", version, about = "Galled perfect transfer networks: decide, construct, verify")]
struct Cli {
    /// Worker threads for parallel sections (0 keeps the pool default).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
enum MatrixFormat {
    /// Pick by file extension: `.csv` as a matrix, anything else as sets.
    #[default]
    Auto,
    /// `taxon,NAME,...` header and 0/1 rows.
    Csv,
    /// `NAME: t1 t2 ...` lines with an optional `taxa:` header.
    Sets,
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum NetworkOut {
    /// Line-oriented node/sedge/tedge/origin records.
    #[default]
    Structured,
    /// Graphviz digraph with dashed transfer edges.
    Dot,
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum CompatOut {
    /// Witness tree as Newick, then the network records.
    #[default]
    Structured,
    /// Graphviz digraph of the witness network.
    Dot,
    /// Witness tree only.
    Newick,
}

#[derive(Subcommand)]
enum Command {
    /// Check whether a network explains every character in a matrix.
    Verify {
        /// Network in the structured node/sedge/tedge format.
        network: PathBuf,
        /// Character matrix (csv or sets).
        matrix: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        format: MatrixFormat,
    },
    /// Decide whether a tree is galled-completable and emit a witness.
    Complete {
        /// Species tree in Newick format.
        tree: PathBuf,
        /// Character matrix (csv or sets).
        matrix: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        format: MatrixFormat,
        #[arg(long, value_enum, default_value_t)]
        out: NetworkOut,
    },
    /// Decide whether characters alone admit a galled network, building
    /// the witness tree as well.
    Compat {
        /// Character matrix (csv or sets).
        matrix: PathBuf,
        /// Optional file of taxon labels fixing the universe and its order.
        #[arg(long)]
        taxa: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        format: MatrixFormat,
        #[arg(long, value_enum, default_value_t)]
        out: CompatOut,
    },
    /// Per-character first-appearance statistics as a TSV table.
    FaStats {
        /// Species tree in Newick format.
        tree: PathBuf,
        /// Character matrix (csv or sets).
        matrix: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        format: MatrixFormat,
    },
    /// Cross-check a fast decider against the exhaustive oracle.
    Oracle {
        #[command(subcommand)]
        subject: OracleSubject,
    },
}

#[derive(Subcommand)]
enum OracleSubject {
    /// Completion verdicts. Give a tree and matrix to check one instance,
    /// or neither to sweep random instances.
    Complete {
        tree: Option<PathBuf>,
        matrix: Option<PathBuf>,
        /// Seed for the random-instance generator.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random instances to draw when no files are given.
        #[arg(long, default_value_t = 100)]
        rounds: usize,
        #[arg(long, value_enum, default_value_t)]
        format: MatrixFormat,
    },
    /// Compatibility verdicts. Give a matrix to check one instance, or
    /// none to sweep random instances.
    Compat {
        matrix: Option<PathBuf>,
        /// Optional file of taxon labels fixing the universe and its order.
        #[arg(long)]
        taxa: Option<PathBuf>,
        /// Seed for the random-instance generator.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random instances to draw when no matrix is given.
        #[arg(long, default_value_t = 100)]
        rounds: usize,
        #[arg(long, value_enum, default_value_t)]
        format: MatrixFormat,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    if cli.jobs > 0 {
        if par::PARALLEL_ENABLED {
            rayon::ThreadPoolBuilder::new()
                .num_threads(cli.jobs)
                .build_global()
                .context("initializing the worker pool")?;
        } else {
            eprintln!("warning: built without the `parallel` feature; --jobs is ignored");
        }
    }
    match cli.command {
        Command::Verify {
            network,
            matrix,
            format,
        } => cmd_verify(&network, &matrix, format),
        Command::Complete {
            tree,
            matrix,
            format,
            out,
        } => cmd_complete(&tree, &matrix, format, out),
        Command::Compat {
            matrix,
            taxa,
            format,
            out,
        } => cmd_compat(&matrix, taxa.as_deref(), format, out),
        Command::FaStats {
            tree,
            matrix,
            format,
        } => cmd_fa_stats(&tree, &matrix, format),
        Command::Oracle { subject } => match subject {
            OracleSubject::Complete {
                tree,
                matrix,
                seed,
                rounds,
                format,
            } => cmd_oracle_complete(tree.as_deref(), matrix.as_deref(), seed, rounds, format),
            OracleSubject::Compat {
                matrix,
                taxa,
                seed,
                rounds,
                format,
            } => cmd_oracle_compat(matrix.as_deref(), taxa.as_deref(), seed, rounds, format),
        },
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_tree(path: &Path) -> Result<Tree> {
    parse_newick(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn load_matrix(
    path: &Path,
    format: MatrixFormat,
    expected: Option<&Arc<Taxa>>,
) -> Result<CharacterSet> {
    let text = read(path)?;
    let chosen = match format {
        MatrixFormat::Auto => {
            if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
                MatrixFormat::Csv
            } else {
                MatrixFormat::Sets
            }
        }
        other => other,
    };
    let chars = match chosen {
        MatrixFormat::Csv => parse_csv(&text, expected),
        _ => parse_sets(&text, expected),
    }
    .with_context(|| format!("parsing {}", path.display()))?;

    // Duplicate member sets are harmless — the deciders collapse them — but
    // they usually mean a data problem, so say something.
    let (_, repeats) = chars.clone().dedup();
    for note in &repeats {
        eprintln!("warning: {note}");
    }
    Ok(chars)
}

/// Taxon labels separated by whitespace; `#` starts a comment.
fn load_taxa(path: &Path) -> Result<Arc<Taxa>> {
    let text = read(path)?;
    let labels: Vec<&str> = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(str::split_whitespace)
        .collect();
    let taxa =
        Taxa::from_labels(labels).with_context(|| format!("parsing {}", path.display()))?;
    Ok(Arc::new(taxa))
}

/// Character origins of a witness network, for annotating exports.
fn origin_annotations(net: &LgtNetwork, chars: &CharacterSet) -> Vec<(String, NodeId)> {
    verify(net, chars)
        .rows
        .into_iter()
        .filter_map(|(name, origin)| origin.map(|v| (name, v)))
        .collect()
}

fn cmd_verify(network: &Path, matrix: &Path, format: MatrixFormat) -> Result<u8> {
    let net = parse_network(&read(network)?)
        .with_context(|| format!("parsing {}", network.display()))?;
    let chars = load_matrix(matrix, format, Some(net.support().taxa()))?;
    let outcome = verify(&net, &chars);
    for (name, origin) in &outcome.rows {
        match origin {
            Some(v) => println!(
                "{name}\texplained\tnode {} {}",
                v.0,
                node_label(net.support(), *v)
            ),
            None => println!("{name}\tunexplained\t-"),
        }
    }
    Ok(u8::from(!outcome.all_explained()))
}

fn cmd_complete(
    tree: &Path,
    matrix: &Path,
    format: MatrixFormat,
    out: NetworkOut,
) -> Result<u8> {
    let tree = load_tree(tree)?;
    let chars = load_matrix(matrix, format, Some(tree.taxa()))?;
    match galled_completion(&tree, &chars)? {
        CompletionOutcome::Completable { network, .. } => {
            let origins = origin_annotations(&network, &chars);
            match out {
                NetworkOut::Structured => print!("{}", export_network(&network, &origins)),
                NetworkOut::Dot => print!("{}", network_to_dot(&network, &origins)),
            }
            Ok(0)
        }
        CompletionOutcome::Rejected(reason) => {
            print!("{}", render_rejection(&reason));
            Ok(1)
        }
    }
}

/// Line-oriented record of why a completion was refused.
fn render_rejection(reason: &Rejection) -> String {
    let mut out = String::from("verdict rejected\n");
    match reason {
        Rejection::TooManyFas { character, nodes } => {
            writeln!(out, "reason too-many-first-appearances").unwrap();
            writeln!(out, "character {character}").unwrap();
            for v in nodes {
                writeln!(out, "fa {}", v.0).unwrap();
            }
        }
        Rejection::IncomparableFaNeighbors { node, a, b } => {
            writeln!(out, "reason incomparable-fa-neighbors").unwrap();
            writeln!(out, "node {}", node.0).unwrap();
            writeln!(out, "partner {}", a.0).unwrap();
            writeln!(out, "partner {}", b.0).unwrap();
        }
        Rejection::NotGalled {
            support,
            arcs,
            conflict,
        } => {
            writeln!(out, "reason not-galled").unwrap();
            for (i, (d, r)) in arcs.iter().enumerate() {
                writeln!(
                    out,
                    "arc {i} {} {} # {} -> {}",
                    d.0,
                    r.0,
                    node_label(support, *d),
                    node_label(support, *r)
                )
                .unwrap();
            }
            writeln!(out, "conflict {} {}", conflict.0, conflict.1).unwrap();
        }
    }
    out
}

fn cmd_compat(
    matrix: &Path,
    taxa: Option<&Path>,
    format: MatrixFormat,
    out: CompatOut,
) -> Result<u8> {
    let expected = taxa.map(load_taxa).transpose()?;
    let chars = load_matrix(matrix, format, expected.as_ref())?;
    match galled_compatible(&chars)? {
        CompatOutcome::Compatible { tree, network, .. } => {
            let origins = origin_annotations(&network, &chars);
            match out {
                CompatOut::Newick => println!("{}", write_newick(&tree)?),
                CompatOut::Structured => {
                    println!("{}", write_newick(&tree)?);
                    print!("{}", export_network(&network, &origins));
                }
                CompatOut::Dot => print!("{}", network_to_dot(&network, &origins)),
            }
            Ok(0)
        }
        CompatOutcome::Incompatible { trace } => {
            println!("verdict incompatible");
            let taxa = chars.taxa();
            for step in &trace.steps {
                match step {
                    TraceStep::Enter { universe, chars } => {
                        println!("enter {} [{}]", universe.display(taxa), chars.join(","));
                    }
                    TraceStep::MaximalCompatible { name } => {
                        println!("maximal-compatible {name}");
                    }
                    TraceStep::Pair { a, b } => println!("pair {a} {b}"),
                    TraceStep::SplitRejected {
                        side_a,
                        side_b,
                        reason,
                    } => {
                        println!(
                            "split-rejected {} {} # {reason}",
                            side_a.display(taxa),
                            side_b.display(taxa)
                        );
                    }
                    TraceStep::GroupFailed { parent } => {
                        println!("group-failed {}", parent.display(taxa));
                    }
                    TraceStep::NoSplitWorked => println!("no-split-worked"),
                }
            }
            Ok(1)
        }
    }
}

fn cmd_fa_stats(tree: &Path, matrix: &Path, format: MatrixFormat) -> Result<u8> {
    let tree = load_tree(tree)?;
    let chars = load_matrix(matrix, format, Some(tree.taxa()))?;
    print!("{}", galled_ptn::ptn::fa_table(&tree, &chars));
    Ok(0)
}

/// Largest universe the exhaustive compatibility oracle will accept: it
/// enumerates every tree shape, which blows up past this point.
const ORACLE_MAX_TAXA: usize = 5;

/// Largest tree the exhaustive completion oracle will accept; it only
/// enumerates networks over the one given tree, so the cap is looser.
const ORACLE_MAX_NODES: usize = 13;

fn cmd_oracle_complete(
    tree: Option<&Path>,
    matrix: Option<&Path>,
    seed: u64,
    rounds: usize,
    format: MatrixFormat,
) -> Result<u8> {
    match (tree, matrix) {
        (Some(tree), Some(matrix)) => {
            let tree = load_tree(tree)?;
            if tree.node_count() > ORACLE_MAX_NODES {
                bail!("the exhaustive oracle is capped at trees of {ORACLE_MAX_NODES} nodes");
            }
            let chars = load_matrix(matrix, format, Some(tree.taxa()))?;
            let fast = galled_completion(&tree, &chars)?.is_completable();
            let slow = brute_force_completable(&tree, &chars);
            report_agreement(&[(fast, slow)])
        }
        (None, None) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut verdicts = Vec::with_capacity(rounds);
            for _ in 0..rounds {
                let n = rng.gen_range(2..=ORACLE_MAX_TAXA);
                let taxa = lettered_taxa(n);
                let tree = random_tree(&taxa, &mut rng);
                let chars = random_character_set(&taxa, rng.gen_range(1..=4), &mut rng);
                let fast = galled_completion(&tree, &chars)?.is_completable();
                let slow = brute_force_completable(&tree, &chars);
                if fast != slow {
                    eprintln!(
                        "disagreement on {} with {}",
                        write_newick(&tree)?,
                        describe(&chars)
                    );
                }
                verdicts.push((fast, slow));
            }
            report_agreement(&verdicts)
        }
        _ => bail!("oracle complete needs both a tree and a matrix, or neither"),
    }
}

fn cmd_oracle_compat(
    matrix: Option<&Path>,
    taxa: Option<&Path>,
    seed: u64,
    rounds: usize,
    format: MatrixFormat,
) -> Result<u8> {
    match matrix {
        Some(matrix) => {
            let expected = taxa.map(load_taxa).transpose()?;
            let chars = load_matrix(matrix, format, expected.as_ref())?;
            if chars.taxa().len() > ORACLE_MAX_TAXA {
                bail!("the exhaustive oracle is capped at {ORACLE_MAX_TAXA} taxa");
            }
            let fast = galled_compatible(&chars)?.is_compatible();
            let slow = brute_force_compatible(&chars);
            report_agreement(&[(fast, slow)])
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut verdicts = Vec::with_capacity(rounds);
            for _ in 0..rounds {
                let n = rng.gen_range(2..=ORACLE_MAX_TAXA);
                let taxa = lettered_taxa(n);
                let chars = random_character_set(&taxa, rng.gen_range(1..=4), &mut rng);
                let fast = galled_compatible(&chars)?.is_compatible();
                let slow = brute_force_compatible(&chars);
                if fast != slow {
                    eprintln!("disagreement on {}", describe(&chars));
                }
                verdicts.push((fast, slow));
            }
            report_agreement(&verdicts)
        }
    }
}

/// Exhaustive compatibility: some tree over the registry admits a galled
/// completion explaining every character.
fn brute_force_compatible(chars: &CharacterSet) -> bool {
    enumerate_trees(chars.taxa()).iter().any(|tree| {
        enumerate_galled_networks(tree, usize::MAX)
            .iter()
            .any(|net| chars.iter().all(|c| explains(net, c.members())))
    })
}

fn lettered_taxa(n: usize) -> Arc<Taxa> {
    let labels = (0..n).map(|i| ((b'a' + i as u8) as char).to_string());
    Arc::new(Taxa::from_labels(labels).expect("distinct letters"))
}

fn describe(chars: &CharacterSet) -> String {
    let taxa = chars.taxa();
    let rendered: Vec<String> = chars
        .iter()
        .map(|c| format!("{}={}", c.name(), c.members().display(taxa)))
        .collect();
    rendered.join(" ")
}

fn report_agreement(verdicts: &[(bool, bool)]) -> Result<u8> {
    let disagreements = verdicts.iter().filter(|(fast, slow)| fast != slow).count();
    println!("instances {}", verdicts.len());
    println!(
        "agreements {}",
        verdicts.len() - disagreements
    );
    println!("disagreements {disagreements}");
    Ok(u8::from(disagreements > 0))
}
