use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use schatten_lab::config::parse_p_grid;
use schatten_lab::{
    run, run_norm_estimate, CampaignConfig, CampaignOutput, Command, LabError, Overrides, Strategy, EXIT_CHECK_FAILURE,
    EXIT_PASS, EXIT_USAGE,
};

#[derive(Parser)]
#[command(
    name = "schatten-lab",
    version,
    about = "Seeded verification campaigns for frame characterizations of Schatten norms"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Clone)]
struct PGrid(Vec<f64>);

fn p_grid(s: &str) -> Result<PGrid, String> {
    parse_p_grid(s).map(PGrid)
}

#[derive(Args)]
struct Common {
    /// JSON configuration file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    /// Comma-separated exponents, e.g. 0.5,1,2,4.
    #[arg(long, value_parser = p_grid)]
    p_grid: Option<PGrid>,
    /// Radial cutoff for disk quadrature and lattices.
    #[arg(long)]
    rmax: Option<f64>,
    /// Output directory for report.json and the CSV tables.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            dim: self.dim,
            trials: self.trials,
            p_grid: self.p_grid.clone().map(|g| g.0),
            rmax: self.rmax,
            output_dir: self.out.clone(),
        }
    }
}

#[derive(Subcommand)]
enum Sub {
    /// Frame-sum certificates, exact identities and synthesis certificates.
    VerifyTheorems(Common),
    /// Growth studies of the divergence and boundedness examples.
    Counterexamples(Common),
    /// Bergman-space identities, subharmonicity and sampling lattices.
    Bergman(Common),
    /// Schatten norm of a matrix file next to a frame-sum estimate.
    NormEstimate {
        #[command(flatten)]
        common: Common,
        /// JSON matrix: {"rows", "cols", "re", "im"}, row-major.
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        p: f64,
        #[arg(long, value_enum, default_value = "singular_basis_exact")]
        strategy: Strategy,
    },
}

fn execute(cli: Cli) -> Result<CampaignOutput, LabError> {
    let (command, common) = match &cli.command {
        Sub::VerifyTheorems(c) => (Command::VerifyTheorems, c),
        Sub::Counterexamples(c) => (Command::Counterexamples, c),
        Sub::Bergman(c) => (Command::Bergman, c),
        Sub::NormEstimate { common, .. } => (Command::NormEstimate, common),
    };
    let config = CampaignConfig::resolve(command, common.config.as_deref(), &common.overrides())?;
    let output = match &cli.command {
        Sub::NormEstimate {
            matrix, p, strategy, ..
        } => run_norm_estimate(matrix, *p, *strategy, &config)?,
        _ => run(&config)?,
    };
    output.write(&config.output_dir)?;
    Ok(output)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(output) => {
            let report = &output.report;
            for r in &report.records {
                if r.tag == "norm_estimate" {
                    let m = &r.measured;
                    println!(
                        "||T||_{} = {}  ||T||_p^p = {}  estimate = {}  gap = {}",
                        r.p.unwrap_or_default(),
                        m["exact_norm"],
                        m["exact_norm_pow"],
                        m["estimate"],
                        m["gap"]
                    );
                }
            }
            for r in report.failures() {
                let p = r.p.map(|p| format!(" p={p}")).unwrap_or_default();
                let note = r.note.as_deref().map(|n| format!(": {n}")).unwrap_or_default();
                println!("FAIL {}{p}{note}", r.tag);
            }
            let s = &report.summary;
            println!(
                "{}: {}/{} checks passed in {:.2}s -> {}",
                report.command.name(),
                s.passed,
                s.total,
                report.wall_time_seconds,
                report.config.output_dir.display()
            );
            ExitCode::from(if report.all_passed() {
                EXIT_PASS
            } else {
                EXIT_CHECK_FAILURE
            } as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE as u8)
        }
    }
}
