//! `factin` command-line driver.

mod commands;
mod output;
mod spec;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use factin::experiments::ScenarioKind;
use factin::graph::{BondMode, StructureOptions, DEFAULT_BOND_TOLERANCE};
use factin::rings::CountMode;
use factin::ExcitationRule;

use spec::{Band, InitSpec, RestimSpec, RhoList};

#[derive(Parser, Debug)]
#[command(name = "factin", version, about = "Excitable automata on molecular graphs")]
pub struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct StructureArgs {
    /// records-only | infer | records-then-infer
    #[arg(long, default_value = "records-then-infer")]
    bond_mode: BondMode,
    /// Covalent-radius tolerance in Angstrom for inferred bonds.
    #[arg(long, default_value_t = DEFAULT_BOND_TOLERANCE)]
    tolerance: f64,
    /// Drop hydrogen atoms before building the graph.
    #[arg(long)]
    strip_h: bool,
}

impl StructureArgs {
    fn options(&self) -> StructureOptions {
        StructureOptions { bond_mode: self.bond_mode, tolerance: self.tolerance, strip_hydrogens: self.strip_h }
    }
}

#[derive(Args, Debug, Clone)]
pub struct GraphArgs {
    /// PDB file, canonical graph text or edge list.
    #[arg(long)]
    graph: PathBuf,
    #[command(flatten)]
    structure: StructureArgs,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Convert a structure file into canonical graph text.
    Ingest {
        input: PathBuf,
        #[command(flatten)]
        structure: StructureArgs,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Print degree and distance statistics as key,value lines.
    Stats {
        #[command(flatten)]
        graph: GraphArgs,
        /// Also print the nodes of the diameter path.
        #[arg(long)]
        path: bool,
    },
    /// Run one trajectory to its attractor.
    ///
    /// Output columns: seed,scenario,rho,rule,p,c,e,termination
    Run {
        #[command(flatten)]
        graph: GraphArgs,
        /// a0, a1, lo:hi or lo:inf
        #[arg(long, default_value = "a0")]
        rule: ExcitationRule,
        /// single:<node> | plus:<rho> | plusminus:<rho> | ring:<ring-id>:<phase>
        #[arg(long)]
        init: InitSpec,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Step budget (default 100 * nodes).
        #[arg(long)]
        max_steps: Option<u64>,
        /// Re-stimulation, repeatable: <step>:<scenario> or cycle:<scenario>
        #[arg(long = "restim")]
        restim: Vec<RestimSpec>,
        /// Write every configuration as NDJSON {"step":t,"states":"o+-"},
        /// up to the first repeated (or first all-resting) one.
        #[arg(long)]
        dump_states: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Repeated stimulation trials over a list of ratios.
    ///
    /// The CSV has one row per trial:
    /// rho_index,trial,seed,scenario,rho,rule,p,c,e,termination.
    /// The per-ratio summary goes to stdout.
    Sweep {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, default_value = "a0")]
        rule: ExcitationRule,
        /// single | plus | plus-minus
        #[arg(long)]
        scenario: ScenarioKind,
        /// start:stop:step or a comma list
        #[arg(long, default_value = "0.1:0.9:0.1")]
        rho: RhoList,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        max_steps: Option<u64>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Fit p = a * rho^b to the per-ratio mean transients of a sweep CSV.
    Fit { input: PathBuf },
    /// Stimulate nodes one at a time and summarize the transients.
    ///
    /// The optional CSV has columns node,p,c,termination.
    SingleSweep {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, default_value = "a0")]
        rule: ExcitationRule,
        /// Stimulate this many randomly chosen nodes instead of all.
        #[arg(long)]
        sample: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Inclusive p range whose node count is reported.
        #[arg(long, default_value = "2:15")]
        band: Band,
        #[arg(long)]
        max_steps: Option<u64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Ring perception, memory mechanics and capacity.
    ///
    /// Without other flags, lists rings as
    /// ring_id,kind,residue,seq,chain,size,nodes,attachments.
    Rings {
        #[arg(long)]
        graph: Option<PathBuf>,
        #[command(flatten)]
        structure: StructureArgs,
        /// Print a ring census: his,phe,trp,tyr,unclassified,total.
        #[arg(long)]
        census: bool,
        /// chemical (TRP counts once per ring) or per-residue (TRP counts once per residue)
        #[arg(long, default_value = "chemical", value_parser = parse_count_mode)]
        count_mode: CountMode,
        /// Exhaustive noise-tolerance check on an isolated ring of this size.
        #[arg(long)]
        tolerance_check: Option<usize>,
        /// Noise-tolerance check on this ring embedded in the graph.
        #[arg(long)]
        in_situ: Option<usize>,
        /// Write a bit on this ring and emit NDJSON snapshots.
        #[arg(long)]
        demo: Option<usize>,
        #[arg(long, default_value_t = 20)]
        steps: u64,
        #[arg(long, default_value_t = 0)]
        phase: usize,
        /// Destination of the demo snapshots (default stdout).
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Print the storage estimate from the census.
        #[arg(long)]
        capacity: bool,
        #[arg(long, default_value_t = 8000)]
        units: u64,
        /// Area per filament in nm^2.
        #[arg(long, default_value_t = 3200.0)]
        area: f64,
    },
    /// Re-run the command recorded in a manifest and compare its outputs.
    Replay { manifest: PathBuf },
}

fn parse_count_mode(s: &str) -> Result<CountMode, String> {
    match s {
        "chemical" => Ok(CountMode::Chemical),
        "per-residue" => Ok(CountMode::PerResidue),
        _ => Err(format!("unknown count mode '{s}' (chemical | per-residue)")),
    }
}

/// Arguments and working directory of the current invocation, recorded in
/// manifests.
pub struct Invocation {
    pub argv: Vec<String>,
    pub cwd: PathBuf,
}

/// Raised for argument combinations clap cannot check; exits with 1.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let ctx = Invocation {
        argv: std::env::args().skip(1).collect(),
        cwd: std::env::current_dir().unwrap_or_else(|_| PathBuf::from(".")),
    };
    // buffered so a failing command prints nothing
    let mut buf = Vec::new();
    let result = match cli.threads {
        Some(0) => Err(UsageError("--threads must be at least 1".into()).into()),
        Some(k) => factin::par::with_threads(k, || commands::dispatch(&ctx, cli.command, &mut buf)),
        None => commands::dispatch(&ctx, cli.command, &mut buf),
    };
    let result = result.and_then(|()| {
        let mut out = std::io::stdout().lock();
        out.write_all(&buf)?;
        out.flush().map_err(Into::into)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
