//! Command-line interface for classifying real Bott manifolds, testing
//! cohomology-ring isomorphism, and inspecting fundamental-group data.
//!
//! Exit codes: 0 for success or a positive answer, 1 for a computed
//! negative answer (not isomorphic, fixed point found), 2 for usage or
//! input errors.

use std::env;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use bott_core::cohomology::{describe_torsion, h2_of_character};
use bott_core::group::{build_rho, freeness_check, verify_extension_identities};
use bott_core::report::{
    build_report, invariant_report, load_cached, matrix_line, render_invariants_json,
    render_invariants_table, render_json, render_table, store_cached,
};
use bott_core::ring::{bruteforce_isomorphism, find_isomorphism, is_isomorphism};
use bott_core::{classify_dimension_with, BottMatrix, GeneratorMap};

#[derive(Parser)]
#[command(
    name = "bott",
    version,
    about = "Exact classification of real Bott manifolds via their mod 2 cohomology rings"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Classify every manifold of one dimension into diffeomorphism classes
    Classify {
        /// Dimension to classify (1 through 5)
        #[arg(long)]
        dim: usize,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
        /// Worker threads; 0 picks automatically
        #[arg(long, default_value_t = 0)]
        threads: usize,
        /// Directory for cached results (also honors BOTT_CACHE_DIR)
        #[arg(long)]
        cache_dir: Option<PathBuf>,
    },
    /// Print the invariants of one matrix
    Invariants {
        /// Path to a matrix file
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Decide whether two matrices have isomorphic cohomology rings
    Iso {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// Print the witness substitution when one exists
        #[arg(long)]
        emit_p: bool,
        /// Search all invertible substitutions instead of the filtered
        /// search (only dimensions up to 4)
        #[arg(long)]
        brute_force: bool,
    },
    /// Fundamental group checks
    Group {
        #[command(subcommand)]
        cmd: GroupCommand,
    },
    /// Build the group monomorphism induced by a ring isomorphism
    Rho {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
    /// Second group cohomology of rank-n elementary abelian 2-groups with
    /// sign-twisted integer coefficients
    Cohomology {
        /// Rank of the group (1 through 4)
        #[arg(long)]
        rank: usize,
        /// Single character to compute, as a decimal bitmask; omitting it
        /// prints the whole character table
        #[arg(long = "char")]
        char_mask: Option<u8>,
    },
}

#[derive(Subcommand)]
enum GroupCommand {
    /// Verify the affine model of the fundamental group of one matrix
    Verify {
        #[arg(long)]
        matrix: PathBuf,
        /// Exponent box radius for the fixed-point sweep
        #[arg(long, default_value_t = 2)]
        bound: i64,
    },
}

struct CliError(String);

macro_rules! error_to_cli {
    ($($t:ty),* $(,)?) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError(e.to_string())
            }
        })*
    };
}

error_to_cli!(
    bott_core::MatrixError,
    bott_core::RingError,
    bott_core::classify::ClassifyError,
    bott_core::group::GroupError,
    bott_core::cohomology::CohomologyError,
);

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(CliError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn read_matrix(path: &Path) -> Result<BottMatrix, CliError> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError(format!("{}: {e}", path.display())))?;
    BottMatrix::parse(&text).map_err(|e| CliError(format!("{}: {e}", path.display())))
}

/// Witness between the rings of two arbitrary matrices, built by
/// normalizing both sides and transporting the normal-form witness back
/// through the conjugating permutations.
fn witness_between(
    a: &BottMatrix,
    b: &BottMatrix,
    brute_force: bool,
) -> Result<Option<GeneratorMap>, CliError> {
    if brute_force {
        return Ok(bruteforce_isomorphism(a, b)?);
    }
    let (na, sa) = a.normal_form();
    let (nb, sb) = b.normal_form();
    let found = match find_isomorphism(&na, &nb)? {
        Some(p) => p,
        None => return Ok(None),
    };
    let into_na = GeneratorMap::from_permutation(&sa);
    let into_nb = GeneratorMap::from_permutation(&sb);
    let out_of_nb = into_nb
        .inverse()
        .expect("permutation matrices are invertible");
    let total = out_of_nb.matmul(&found).matmul(&into_na);
    debug_assert_eq!(is_isomorphism(a, b, &total), Ok(true));
    Ok(Some(total))
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.cmd {
        Command::Classify {
            dim,
            format,
            threads,
            cache_dir,
        } => {
            let dir = cache_dir.or_else(|| env::var_os("BOTT_CACHE_DIR").map(PathBuf::from));
            let report = match dir.as_deref().and_then(|d| load_cached(d, dim)) {
                Some(cached) => cached,
                None => {
                    let start = Instant::now();
                    let classification = classify_dimension_with(dim, threads)?;
                    let report = build_report(&classification, start.elapsed().as_millis() as u64);
                    if let Some(d) = dir.as_deref() {
                        if let Err(e) = store_cached(d, dim, &report) {
                            eprintln!("warning: could not write cache: {e}");
                        }
                    }
                    report
                }
            };
            match format {
                Format::Table => print!("{}", render_table(&report)),
                Format::Json => print!("{}", render_json(&report)),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Invariants { matrix, format } => {
            let m = read_matrix(&matrix)?;
            let report = invariant_report(&m);
            match format {
                Format::Table => print!("{}", render_invariants_table(&report)),
                Format::Json => print!("{}", render_invariants_json(&report)),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Iso {
            a,
            b,
            emit_p,
            brute_force,
        } => {
            let ma = read_matrix(&a)?;
            let mb = read_matrix(&b)?;
            match witness_between(&ma, &mb, brute_force)? {
                Some(p) => {
                    println!("isomorphic");
                    if emit_p {
                        print!("{p}");
                    }
                    Ok(ExitCode::SUCCESS)
                }
                None => {
                    println!("not isomorphic");
                    Ok(ExitCode::from(1))
                }
            }
        }
        Command::Group { cmd } => match cmd {
            GroupCommand::Verify { matrix, bound } => {
                let m = read_matrix(&matrix)?;
                match freeness_check(&m, bound)? {
                    None => {
                        println!(
                            "free: no group element with a fixed point in the exponent box [-{bound}, {bound}]^{}",
                            m.n()
                        );
                        Ok(ExitCode::SUCCESS)
                    }
                    Some(word) => {
                        println!("fixed point found for exponents {:?}", word.exps());
                        Ok(ExitCode::from(1))
                    }
                }
            }
        },
        Command::Rho { a, b } => {
            let ma = read_matrix(&a)?;
            let mb = read_matrix(&b)?;
            let p = match witness_between(&ma, &mb, false)? {
                Some(p) => p,
                None => {
                    println!("not isomorphic");
                    return Ok(ExitCode::from(1));
                }
            };
            let data = build_rho(&ma, &mb, &p)?;
            let verified = verify_extension_identities(&ma, &mb, &data)?;
            let mut out = String::new();
            let _ = writeln!(
                out,
                "isomorphic: source {} target {}",
                matrix_line(&mb),
                matrix_line(&ma)
            );
            let _ = writeln!(out, "witness substitution (rows):");
            let _ = write!(out, "{p}");
            let _ = writeln!(out, "generator images (exponent words over the target):");
            for (r, w) in data.images.iter().enumerate() {
                let _ = writeln!(out, "  g{} -> {:?}", r + 1, w.exps());
            }
            let _ = writeln!(out, "lattice map (rows):");
            for r in 0..ma.n() {
                let row: Vec<String> = (0..ma.n()).map(|c| data.q.get(r, c).to_string()).collect();
                let _ = writeln!(out, "  [{}]", row.join(", "));
            }
            let _ = writeln!(out, "lattice determinant: {}", data.det_q);
            let _ = writeln!(
                out,
                "extension identities: {}",
                if verified { "verified" } else { "FAILED" }
            );
            print!("{out}");
            Ok(if verified {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Cohomology { rank, char_mask } => {
            if let Some(mask) = char_mask {
                if rank < 8 && u16::from(mask) >= 1u16 << rank {
                    return Err(CliError(format!(
                        "character mask {mask} is out of range for rank {rank}"
                    )));
                }
                let divisors = h2_of_character(rank, mask)?;
                println!(
                    "character {mask:0width$b}: H2 = {}",
                    describe_torsion(&divisors),
                    width = rank
                );
            } else {
                for mask in 0..1u16 << rank {
                    let divisors = h2_of_character(rank, mask as u8)?;
                    println!(
                        "character {mask:0width$b}: H2 = {}",
                        describe_torsion(&divisors),
                        width = rank
                    );
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
