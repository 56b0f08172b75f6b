use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fixalg::cli::{self, CommandResult, RELATION_TOL, SECTION_TOL};

#[derive(Parser)]
#[command(name = "fixalg", version, about = "Matrix bundles over S^2 and fixed-point matrix-function algebras")]
struct Args {
    /// Print machine-readable JSON instead of a text report.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Winding index of a unitary loop (file or canonical:n,k[,M]).
    Index { source: String },
    /// Bundle class mod n (bundle file or canonical:n,k[,M]).
    Classify { source: String },
    /// Check sample shapes and equator compatibility of a section file.
    ValidateSection {
        file: PathBuf,
        #[arg(long, default_value_t = SECTION_TOL)]
        tol: f64,
    },
    /// Gcd criterion for B_{n,l1}(m) ~ B_{n,l2}(m).
    IsoCheck {
        #[arg(long)]
        n: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        blocks: Vec<usize>,
        #[arg(long, allow_negative_numbers = true)]
        l1: i64,
        #[arg(long, allow_negative_numbers = true)]
        l2: i64,
        #[arg(long, default_value_t = fixalg::loops::DEFAULT_SAMPLES)]
        samples: usize,
        /// Write the certificate (coefficients and phase loop) to this file.
        #[arg(long)]
        emit_certificate: Option<PathBuf>,
    },
    /// Matrix-function model of D4, E6, E7, E8, P_ab or P2.
    Canonical { name: String },
    /// Check a sampled function against an algebra (name or file).
    VerifyMembership {
        #[arg(long)]
        algebra: String,
        #[arg(long)]
        function: PathBuf,
        #[arg(long, default_value_t = SECTION_TOL)]
        tol: f64,
    },
    /// Check a representation file against a presentation (name or file).
    Verify {
        #[arg(long)]
        presentation: String,
        #[arg(long)]
        rep: PathBuf,
        #[arg(long, default_value_t = RELATION_TOL)]
        tol: f64,
    },
    /// Seeded trials of the standard identity F_{2n} on M_n.
    FIdentity {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Emit the two-projection family as representation JSON.
    P2Sample {
        #[arg(long, default_value_t = 11)]
        count: usize,
    },
}

fn dispatch(command: Command) -> CommandResult {
    match command {
        Command::Index { source } => cli::cmd_index(&source),
        Command::Classify { source } => cli::cmd_classify(&source),
        Command::ValidateSection { file, tol } => cli::cmd_validate_section(&file, tol),
        Command::IsoCheck { n, blocks, l1, l2, samples, emit_certificate } => {
            cli::cmd_iso_check(n, &blocks, l1, l2, samples, emit_certificate.as_deref())
        }
        Command::Canonical { name } => cli::cmd_canonical(&name),
        Command::VerifyMembership { algebra, function, tol } => cli::cmd_membership(&algebra, &function, tol),
        Command::Verify { presentation, rep, tol } => cli::cmd_verify(&presentation, &rep, tol),
        Command::FIdentity { n, trials, seed, tol } => cli::cmd_f_identity(n, trials, seed, tol),
        Command::P2Sample { count } => cli::cmd_p2_sample(count),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = dispatch(args.command);
    // a closed pipe downstream is not an error of ours
    let _ = if args.json {
        writeln!(std::io::stdout(), "{}", result.to_json())
    } else if result.exit_code() == 2 {
        writeln!(std::io::stderr(), "{}", result.human_text)
    } else {
        writeln!(std::io::stdout(), "{}", result.human_text)
    };
    ExitCode::from(result.exit_code() as u8)
}
