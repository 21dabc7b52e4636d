use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use corrugate_cli::{cmd_build, cmd_compare, cmd_export, cmd_formal, cmd_verify, CliError, RunConfig};

#[derive(Parser)]
#[command(name = "corrugate", version, about = "Corrugated embeddings of the hyperbolic plane")]
struct Cli {
    /// Flat key = value config file; defaults are used for missing keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    outdir: Option<PathBuf>,
    #[arg(long, global = true)]
    depth: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the corrugation process and write snapshots, reports and meshes.
    Build,
    /// Dump formal normal patterns with the self-similarity and scaling reports.
    Formal,
    /// Compare a build's samples with the formal process.
    Compare,
    /// Run the acceptance suite and write the verification report.
    Verify,
    /// Convert a build's snapshots into OBJ meshes.
    Export,
    /// Print the effective configuration.
    Config,
}

fn config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut c = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(o) = &cli.outdir {
        c.outdir = o.clone();
    }
    if let Some(d) = cli.depth {
        c.depth = d;
    }
    if let Some(s) = cli.seed {
        c.seed = s;
    }
    Ok(c)
}

fn main_inner(cli: &Cli) -> Result<bool, CliError> {
    let cfg = config(cli)?;
    match cli.command {
        Command::Build => {
            let s = cmd_build(&cfg)?;
            for st in &s.artifacts.stages {
                let r = &st.report;
                println!(
                    "stage ({},{}) N = {:<8} err {:.3e} disp {:.3e} eta_min {:.3e} lambda_min {:.4}",
                    r.k, r.i, r.n, r.err, r.disp, r.eta_min, r.lambda_min
                );
            }
            for p in &s.artifacts.properties {
                println!(
                    "k = {}: P1 {:.4e} <= {:.4e} {}, P2 {:.4e} <= {:.4e} {}, P3 {:.4e} <= {:.4e} {}",
                    p.k,
                    p.p1.0,
                    p.p1.1,
                    p.p1_ok(),
                    p.p2.0,
                    p.p2.1,
                    p.p2_ok(),
                    p.p3.0,
                    p.p3.1,
                    p.p3_ok()
                );
            }
            let d = &s.diagnostics;
            println!(
                "diagnostics: alpha_max {:.4} X_max {:.4} lambda_min {:.4} collisions {}",
                d.alpha_max, d.x_max, d.lambda_min, d.scan.collisions
            );
            println!("{} files in {}", s.files.len(), cfg.outdir.display());
            Ok(true)
        }
        Command::Formal => {
            let s = cmd_formal(&cfg)?;
            println!("{} pattern rows, {} normal rows", s.pattern_rows, s.normal_rows);
            if let Some((rho, d, b, copies, sub)) = s.self_similarity {
                println!("self-similarity at rho = {rho}: {copies} copies, Hausdorff {d:.4e} <= {b:.4e}, sub-patterns {sub:?}");
            }
            for (n, m, d) in &s.scaling {
                println!("scaling n = {n} m = {m}: {d:.3e}");
            }
            Ok(true)
        }
        Command::Compare => {
            let s = cmd_compare(&cfg)?;
            for (r, b) in s.rows.iter().zip(&s.bounds) {
                println!(
                    "({},{}) sup_diff {:.4e} sup_target_diff {:.4e} bound {:.4e} ({} samples)",
                    r.k, r.i, r.sup_diff, r.sup_target_diff, b, r.samples
                );
            }
            Ok(true)
        }
        Command::Verify => {
            let r = cmd_verify(&cfg, |c| println!("{}", c.line()))?;
            println!("{}", r.artifacts);
            if let Some(d) = &r.desk {
                print!("{}", corrugate_cli::verify::budget_table(d));
            }
            Ok(r.passed())
        }
        Command::Export => {
            for f in cmd_export(&cfg.outdir)? {
                println!("{f}");
            }
            Ok(true)
        }
        Command::Config => {
            print!("{}", cfg.to_text());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("verification failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
