use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand};

use landau_core::driver::{self, ConfigOverrides, ExperimentConfig, Preset};
use landau_core::integrator::Scheme;
use landau_core::kernel;
use landau_core::VelocityGrid;

#[derive(Parser)]
#[command(name = "landau", version, about = "Spectral solver for the homogeneous Landau equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment preset.
    Run(RunArgs),
    /// Compute a kernel table and store it.
    Kernel(KernelArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Flat `key = value` file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// maxwellian-accuracy, rosenbluth, two-gaussians or custom.
    #[arg(long)]
    preset: Option<Preset>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long = "R")]
    r: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_final: Option<f64>,
    /// plain or steady.
    #[arg(long)]
    scheme: Option<Scheme>,
    #[arg(long)]
    diag_every: Option<usize>,
    #[arg(long)]
    dump_every: Option<usize>,
    #[arg(long)]
    kernel_cache: Option<PathBuf>,
    #[arg(long)]
    kernel_fine: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Finer dump to compare the final state against.
    #[arg(long)]
    reference: Option<PathBuf>,
    #[arg(long)]
    ic_file: Option<PathBuf>,
}

impl RunArgs {
    fn overrides(&self) -> ConfigOverrides {
        ConfigOverrides {
            preset: self.preset,
            n: self.n,
            r: self.r,
            dt: self.dt,
            t_final: self.t_final,
            scheme: self.scheme,
            diag_every: self.diag_every,
            dump_every: self.dump_every,
            kernel_cache: self.kernel_cache.clone(),
            kernel_fine: self.kernel_fine,
            out: self.out.clone(),
            reference: self.reference.clone(),
            ic_file: self.ic_file.clone(),
        }
    }
}

#[derive(Args)]
struct KernelArgs {
    #[arg(long)]
    n: usize,
    #[arg(long = "R")]
    r: f64,
    #[arg(long)]
    fine: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

fn usage_error(message: &str) -> ExitCode {
    eprintln!("error: {message}\n");
    let mut cmd = Cli::command();
    let run = cmd.find_subcommand_mut("run").expect("run subcommand");
    eprintln!("{}", run.render_usage());
    ExitCode::from(2)
}

fn configure_threads() {
    if let Some(threads) = std::env::var("LANDAU_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build_global() {
            log::warn!("LANDAU_THREADS ignored: {e}");
        }
    }
}

fn run(args: RunArgs) -> ExitCode {
    let file = match &args.config {
        Some(path) => match ConfigOverrides::from_file(path) {
            Ok(o) => o,
            Err(e) => return usage_error(&e.to_string()),
        },
        None => ConfigOverrides::default(),
    };
    let config = match ExperimentConfig::resolve(file.merge(args.overrides())) {
        Ok(c) => c,
        Err(e) => return usage_error(&e.to_string()),
    };
    match driver::run(&config) {
        Ok(outcome) => {
            let last = outcome.rows.last().expect("at least one row");
            println!(
                "t = {}, steps = {}, rho = {:e}, temp = {:e}, rel_entropy = {:e}, max mass drift = {:e}",
                outcome.t,
                outcome.steps,
                last.moments.rho,
                last.moments.temp,
                last.moments.rel_entropy,
                outcome.max_mass_drift()
            );
            if let Some(e) = last.errors {
                println!("error vs M(1,0,1): L1 {:e}, L2 {:e}, Linf {:e}", e.l1, e.l2, e.linf);
            }
            if let Some(e) = outcome.reference_error {
                println!("error vs reference: L1 {:e}, L2 {:e}, Linf {:e}", e.l1, e.l2, e.linf);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn kernel_cmd(args: KernelArgs) -> ExitCode {
    let result = VelocityGrid::new(args.n, args.r).and_then(|grid| {
        let fine = args.fine.unwrap_or_else(|| kernel::default_fine(args.n));
        let table = kernel::compute_kernel_table(&grid, fine)?;
        kernel::store_kernel(&table, &args.out)?;
        Ok(table)
    });
    match result {
        Ok(table) => {
            println!(
                "wrote {}: n = {}, T = {}, fine = {}, psi(0)/T^4 = {}",
                args.out.display(),
                table.n(),
                table.half_width(),
                table.fine(),
                table.get([0; 3]).unwrap() / table.half_width().powi(4)
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    configure_threads();
    match Cli::parse().command {
        Command::Run(args) => run(args),
        Command::Kernel(args) => kernel_cmd(args),
    }
}
