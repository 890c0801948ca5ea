use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use panelconv::io::report::{render_lq, render_recovery, render_sigma, LqEntry, LqTable};
use panelconv::io::{derive_location_quotients, write_panel, EmploymentTotals, PanelFile};
use panelconv::montecarlo::RegionEffects;
use panelconv::panel::{CAPITAL_OUTPUT_RATIO, GOODS_FLOW_OUTPUT_RATIO, LOCATION_QUOTIENT};
use panelconv::{
    recovery_experiment, render_report, run_convergence, sigma_dispersion, simulate_panel, Error, ErrorKind,
    Format, Method, ModelSpec, PanelDataset, SimulationConfig,
};

#[derive(Debug, Parser)]
#[command(name = "panelconv", version, about = "Beta and sigma convergence for regional panels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate the growth regression and print a result table.
    Fit(FitArgs),
    /// Cross-sectional dispersion of log productivity per year.
    Sigma(SelectArgs),
    /// Location quotients per region and year.
    Lq(SelectArgs),
    /// Simulate a panel and write it as CSV.
    Simulate(SimArgs),
    /// Monte Carlo recovery of the convergence coefficient.
    Recover(RecoverArgs),
}

#[derive(Debug, Args)]
struct SelectArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    sector: String,
    #[arg(long)]
    from: Option<i32>,
    #[arg(long)]
    to: Option<i32>,
    #[arg(long, default_value = "md")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum MethodArg {
    Pooled,
    Lsdv,
    Gls,
    All,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[command(flatten)]
    select: SelectArgs,
    #[arg(long, value_enum, default_value = "all")]
    method: MethodArg,
    /// Structural regressors, comma separated: capital_output, goods_flow,
    /// location_quotient, or any extra column of the input.
    #[arg(long, value_delimiter = ',')]
    conditional: Vec<String>,
}

#[derive(Debug, Args)]
struct SimArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    regions: usize,
    #[arg(long)]
    periods: usize,
    #[arg(long, allow_hyphen_values = true)]
    b_true: f64,
    #[arg(long, default_value_t = 0.05)]
    sigma_v: f64,
    /// Draw region effects from N(0, variance) instead of making them equal.
    #[arg(long)]
    effect_variance: Option<f64>,
    #[arg(long, default_value_t = 0.3)]
    initial_dispersion: f64,
    #[arg(long, default_value_t = 1986)]
    start_year: i32,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RecoverArgs {
    #[command(flatten)]
    sim: SimArgs,
    #[arg(long, default_value_t = 500)]
    reps: usize,
    #[arg(long, value_delimiter = ',', default_value = "pooled,lsdv,gls")]
    methods: Vec<Method>,
    #[arg(long, default_value = "md")]
    format: Format,
}

fn structural_name(arg: &str) -> &str {
    match arg {
        "capital_output" | "capital" | CAPITAL_OUTPUT_RATIO => CAPITAL_OUTPUT_RATIO,
        "goods_flow" | "goods" | GOODS_FLOW_OUTPUT_RATIO => GOODS_FLOW_OUTPUT_RATIO,
        "lq" | LOCATION_QUOTIENT => LOCATION_QUOTIENT,
        other => other,
    }
}

fn load(select: &SelectArgs, with_lq: bool) -> Result<PanelDataset, Error> {
    let file = PanelFile::read_path(&select.input)?;
    let panel = file.select(&select.sector, select.from, select.to)?;
    if with_lq && panel.structural(LOCATION_QUOTIENT).is_none() {
        return derive_location_quotients(panel, &EmploymentTotals::from_file(&file));
    }
    Ok(panel)
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| Error::Io { path: path.clone(), source }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| Error::Io { path: "<stdout>".into(), source })
        }
    }
}

fn sim_config(args: &SimArgs) -> SimulationConfig {
    let mut cfg = SimulationConfig::new(args.seed, args.regions, args.periods, args.b_true);
    cfg.sigma_v = args.sigma_v;
    cfg.initial_dispersion = args.initial_dispersion;
    cfg.start_year = args.start_year;
    if let Some(variance) = args.effect_variance {
        cfg.effects = RegionEffects::Random { variance };
    }
    cfg
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Fit(args) => {
            let structural: Vec<String> =
                args.conditional.iter().map(|c| structural_name(c.trim()).to_string()).collect();
            let panel = load(&args.select, structural.iter().any(|s| s == LOCATION_QUOTIENT))?;
            let methods = match args.method {
                MethodArg::Pooled => vec![Method::Pooled],
                MethodArg::Lsdv => vec![Method::Lsdv],
                MethodArg::Gls => vec![Method::Gls],
                MethodArg::All => vec![Method::Pooled, Method::Lsdv, Method::Gls],
            };
            let reports = methods
                .into_iter()
                .map(|m| run_convergence(&panel, &ModelSpec::conditional(m, structural.clone())))
                .collect::<Result<Vec<_>, _>>()?;
            emit(&render_report(&reports, args.select.format)?, args.select.out.as_ref())
        }
        Command::Sigma(args) => {
            let panel = load(&args, false)?;
            emit(&render_sigma(&sigma_dispersion(&panel)?, args.format)?, args.out.as_ref())
        }
        Command::Lq(args) => {
            let panel = load(&args, true)?;
            let grid = panel.structural(LOCATION_QUOTIENT).expect("derived above");
            let mut entries = Vec::new();
            for (r, region) in panel.regions().iter().enumerate() {
                for (p, &year) in panel.periods().iter().enumerate() {
                    if let Some(location_quotient) = grid.get(r, p) {
                        entries.push(LqEntry { region: region.clone(), year, location_quotient });
                    }
                }
            }
            let table = LqTable { sector: panel.sector().to_string(), entries };
            emit(&render_lq(&table, args.format)?, args.out.as_ref())
        }
        Command::Simulate(args) => {
            let panel = simulate_panel(&sim_config(&args))?;
            let mut buf = Vec::new();
            write_panel(&panel, &mut buf)?;
            emit(&String::from_utf8(buf).expect("csv output is UTF-8"), args.out.as_ref())
        }
        Command::Recover(args) => {
            let stats = recovery_experiment(&sim_config(&args.sim), args.reps, &args.methods)?;
            emit(&render_recovery(&stats, args.format)?, args.sim.out.as_ref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("panelconv: {e}");
            ExitCode::from(match e.kind() {
                ErrorKind::Data => 2,
                ErrorKind::Estimation => 3,
            })
        }
    }
}
