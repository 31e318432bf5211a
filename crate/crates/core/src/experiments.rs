//! Batch drivers: single-node sweeps, ratio sweeps and the power-law fit.

use std::collections::BTreeMap;
use std::fmt;

use crate::automaton::{sample_without_replacement, stim_rng, stimulate, Configuration, ExcitationRule, Scenario};
use crate::error::{Error, Result};
use crate::graph::MolecularGraph;
use crate::par::{self, Exec};
use crate::trajectory::{run_to_attractor, splitmix64, RunOptions, Termination};

pub use crate::graph::longest_path;

/// Stimulation used by every trial of a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ScenarioKind {
    /// One uniformly chosen node per trial; ratios are ignored.
    Single,
    Plus,
    PlusMinus,
}

impl ScenarioKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScenarioKind::Single => "single",
            ScenarioKind::Plus => "plus",
            ScenarioKind::PlusMinus => "plus-minus",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(Self::Single),
            "plus" | "+" => Ok(Self::Plus),
            "plus-minus" | "plusminus" | "+-" => Ok(Self::PlusMinus),
            other => Err(Error::Invalid(format!("unknown scenario {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub rule: ExcitationRule,
    pub scenario: ScenarioKind,
    pub rho_list: Vec<f64>,
    pub trials_per_rho: usize,
    pub base_seed: u64,
    /// `None` uses 100 * N.
    pub max_steps: Option<u64>,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials_per_rho == 0 {
            return Err(Error::Invalid("trials_per_rho must be at least 1".into()));
        }
        if self.scenario != ScenarioKind::Single {
            if self.rho_list.is_empty() {
                return Err(Error::Invalid("empty ratio list".into()));
            }
            if let Some(&rho) = self.rho_list.iter().find(|&&r| !(r > 0.0 && r <= 1.0)) {
                return Err(Error::InvalidRatio { rho });
            }
        }
        Ok(())
    }

    fn groups(&self) -> Vec<Option<f64>> {
        match self.scenario {
            ScenarioKind::Single => vec![None],
            _ => self.rho_list.iter().copied().map(Some).collect(),
        }
    }
}

/// Seed of trial `trial` in ratio group `rho_index`. Depends only on its
/// arguments, so trials can run in any order.
pub fn trial_seed(base_seed: u64, rho_index: usize, trial: usize) -> u64 {
    splitmix64(base_seed ^ splitmix64(((rho_index as u64) << 32) | trial as u64))
}

/// One trial of a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialRow {
    pub rho_index: usize,
    pub trial: usize,
    pub seed: u64,
    pub scenario: ScenarioKind,
    pub rho: Option<f64>,
    pub rule: ExcitationRule,
    pub p: u64,
    pub c: u64,
    pub e: u64,
    pub termination: Termination,
}

/// Column order of [`trial_rows_csv`].
pub const TRIAL_CSV_HEADER: &str = "rho_index,trial,seed,scenario,rho,rule,p,c,e,termination";

/// Renders rows as CSV with [`TRIAL_CSV_HEADER`]; single-node trials leave
/// `rho` empty.
pub fn trial_rows_csv(rows: &[TrialRow]) -> String {
    use std::fmt::Write as _;
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(TRIAL_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let rho = r.rho.map(|x| x.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.rho_index, r.trial, r.seed, r.scenario, rho, r.rule, r.p, r.c, r.e, r.termination
        )
        .unwrap();
    }
    out
}

/// Per-ratio statistics; standard deviations are sample (n - 1) values.
#[derive(Clone, Debug, PartialEq)]
pub struct RhoSummary {
    pub rho: Option<f64>,
    /// Trials that reached an attractor.
    pub n: usize,
    /// Trials that ran out of steps; excluded from the statistics.
    pub exhausted: usize,
    pub mean_p: f64,
    pub mean_c: f64,
    pub mean_e: f64,
    pub sd_p: f64,
    pub sd_c: f64,
    pub sd_e: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSummary {
    pub rule: ExcitationRule,
    pub scenario: ScenarioKind,
    pub rows: Vec<RhoSummary>,
    /// Means of the per-ratio means.
    pub grand_p: f64,
    pub grand_c: f64,
    pub grand_e: f64,
}

/// Runs every `(ratio, trial)` pair and summarizes. Rows come back
/// sorted by `(rho_index, trial)`.
pub fn sweep_ratio(g: &MolecularGraph, cfg: &SweepConfig) -> Result<(SweepSummary, Vec<TrialRow>)> {
    sweep_ratio_with(Exec::default(), g, cfg)
}

pub fn sweep_ratio_with(exec: Exec, g: &MolecularGraph, cfg: &SweepConfig) -> Result<(SweepSummary, Vec<TrialRow>)> {
    cfg.validate()?;
    let n = g.node_count();
    if n == 0 {
        return Err(Error::Invalid("sweep on an empty graph".into()));
    }
    let groups = cfg.groups();
    for rho in groups.iter().flatten() {
        Scenario::Plus(*rho).validate(n)?;
    }
    let opts = RunOptions { series_limit: Some(0), ..sweep_run_options(g, cfg.max_steps) };
    let tasks = groups.len() * cfg.trials_per_rho;
    let rows = par::map_indexed_with(exec, tasks, |task| {
        let (rho_index, trial) = (task / cfg.trials_per_rho, task % cfg.trials_per_rho);
        let rho = groups[rho_index];
        let seed = trial_seed(cfg.base_seed, rho_index, trial);
        let mut rng = stim_rng(seed);
        let scenario = match (cfg.scenario, rho) {
            (ScenarioKind::Single, _) => Scenario::Single(sample_without_replacement(n, 1, &mut rng)[0]),
            (ScenarioKind::Plus, Some(r)) => Scenario::Plus(r),
            (ScenarioKind::PlusMinus, Some(r)) => Scenario::PlusMinus(r),
            _ => unreachable!("ratio groups carry a ratio"),
        };
        let cfg0 = stimulate(&Configuration::resting(n), &scenario, &mut rng)?;
        let r = run_to_attractor(g, cfg.rule, &cfg0, &opts)?;
        Ok(TrialRow {
            rho_index,
            trial,
            seed,
            scenario: cfg.scenario,
            rho,
            rule: cfg.rule,
            p: r.transient_p,
            c: r.cycle_c,
            e: r.excitation_e,
            termination: r.termination,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok((aggregate(cfg.rule, cfg.scenario, &rows), rows))
}

fn sweep_run_options(g: &MolecularGraph, max_steps: Option<u64>) -> RunOptions {
    match max_steps {
        Some(m) => RunOptions::with_max_steps(m),
        None => RunOptions::for_graph(g),
    }
}

/// Groups rows by `rho_index` (in order) and computes means and sample
/// standard deviations over the trials that reached an attractor.
pub fn aggregate(rule: ExcitationRule, scenario: ScenarioKind, rows: &[TrialRow]) -> SweepSummary {
    let mut groups: BTreeMap<usize, Vec<&TrialRow>> = BTreeMap::new();
    for r in rows {
        groups.entry(r.rho_index).or_default().push(r);
    }
    let summaries: Vec<RhoSummary> = groups
        .into_values()
        .map(|trials| {
            let done: Vec<&&TrialRow> =
                trials.iter().filter(|r| !matches!(r.termination, Termination::BudgetExhausted(_))).collect();
            let col = |f: fn(&TrialRow) -> u64| -> Vec<f64> { done.iter().map(|r| f(r) as f64).collect() };
            let (p, c, e) = (col(|r| r.p), col(|r| r.c), col(|r| r.e));
            RhoSummary {
                rho: trials[0].rho,
                n: done.len(),
                exhausted: trials.len() - done.len(),
                mean_p: mean(&p),
                mean_c: mean(&c),
                mean_e: mean(&e),
                sd_p: sample_sd(&p),
                sd_c: sample_sd(&c),
                sd_e: sample_sd(&e),
            }
        })
        .collect();
    // groups where every trial ran out of steps have no mean to contribute
    let grand = |f: fn(&RhoSummary) -> f64| mean(&summaries.iter().filter(|s| s.n > 0).map(f).collect::<Vec<_>>());
    SweepSummary {
        rule,
        scenario,
        grand_p: grand(|s| s.mean_p),
        grand_c: grand(|s| s.mean_c),
        grand_e: grand(|s| s.mean_e),
        rows: summaries,
    }
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        f64::NAN
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

fn sample_sd(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => f64::NAN,
        1 => 0.0,
        n => {
            let m = mean(xs);
            (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        }
    }
}

impl fmt::Display for SweepSummary {
    /// Table layout: one row per ratio with p, c, e and their deviations,
    /// then the grand means.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "rule {}, {}-start", self.rule, self.scenario)?;
        writeln!(f, "{:>6} | {:>7} {:>6} {:>6} | {:>7} {:>6} {:>6} | {:>3}", "rho", "p", "c", "e", "sd(p)", "sd(c)", "sd(e)", "n")?;
        writeln!(f, "{}", "-".repeat(70))?;
        for r in &self.rows {
            let rho = r.rho.map_or("-".to_owned(), |x| format!("{x}"));
            writeln!(
                f,
                "{:>6} | {:>7.0} {:>6.0} {:>6.0} | {:>7.0} {:>6.0} {:>6.0} | {:>3}{}",
                rho,
                r.mean_p,
                r.mean_c,
                r.mean_e,
                r.sd_p,
                r.sd_c,
                r.sd_e,
                r.n,
                if r.exhausted > 0 { format!(" ({} exhausted)", r.exhausted) } else { String::new() }
            )?;
        }
        writeln!(f, "{}", "-".repeat(70))?;
        write!(f, "{:>6} | {:>7.0} {:>6.0} {:>6.0}", "mean", self.grand_p, self.grand_c, self.grand_e)
    }
}

/// Which nodes a single-node sweep stimulates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeSelection {
    All,
    /// `count` distinct nodes drawn with `seed`.
    Sample { count: usize, seed: u64 },
}

/// Distribution of transient periods over single-node stimulations.
#[derive(Clone, Debug, PartialEq)]
pub struct SingleNodeSweep {
    pub nodes: Vec<usize>,
    pub p: Vec<u64>,
    pub c: Vec<u64>,
    pub terminations: Vec<Termination>,
    pub mean: f64,
    pub median: f64,
    pub min: u64,
    pub max: u64,
    pub histogram: BTreeMap<u64, usize>,
    pub band: (u64, u64),
    /// Nodes whose `p` lies in `band` (inclusive).
    pub band_count: usize,
}

impl SingleNodeSweep {
    pub fn all_absorbing(&self) -> bool {
        self.terminations.iter().all(|t| *t == Termination::Absorbing)
    }
}

/// Stimulates each selected node alone and records its transient period.
pub fn sweep_single_node(
    g: &MolecularGraph,
    rule: ExcitationRule,
    max_steps: Option<u64>,
    selection: NodeSelection,
    band: (u64, u64),
) -> Result<SingleNodeSweep> {
    sweep_single_node_with(Exec::default(), g, rule, max_steps, selection, band)
}

pub fn sweep_single_node_with(
    exec: Exec,
    g: &MolecularGraph,
    rule: ExcitationRule,
    max_steps: Option<u64>,
    selection: NodeSelection,
    band: (u64, u64),
) -> Result<SingleNodeSweep> {
    let n = g.node_count();
    if n == 0 {
        return Err(Error::Invalid("sweep on an empty graph".into()));
    }
    let nodes = match selection {
        NodeSelection::All => (0..n).collect(),
        NodeSelection::Sample { count, seed } => {
            if count == 0 || count > n {
                return Err(Error::Invalid(format!("cannot sample {count} of {n} nodes")));
            }
            let mut v = sample_without_replacement(n, count, &mut stim_rng(seed));
            v.sort_unstable();
            v
        }
    };
    let opts = RunOptions { series_limit: Some(0), ..sweep_run_options(g, max_steps) };
    let results = par::map_indexed_with(exec, nodes.len(), |i| {
        let mut cfg0 = Configuration::resting(n);
        cfg0.set(nodes[i], crate::automaton::NodeState::Excited);
        run_to_attractor(g, rule, &cfg0, &opts)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let p: Vec<u64> = results.iter().map(|r| r.transient_p).collect();
    let mut sorted = p.clone();
    sorted.sort_unstable();
    let k = sorted.len();
    let median = if k % 2 == 1 { sorted[k / 2] as f64 } else { (sorted[k / 2 - 1] + sorted[k / 2]) as f64 / 2.0 };
    let mut histogram = BTreeMap::new();
    for &x in &p {
        *histogram.entry(x).or_insert(0) += 1;
    }
    Ok(SingleNodeSweep {
        mean: p.iter().sum::<u64>() as f64 / k as f64,
        median,
        min: sorted[0],
        max: sorted[k - 1],
        band_count: p.iter().filter(|&&x| x >= band.0 && x <= band.1).count(),
        band,
        histogram,
        c: results.iter().map(|r| r.cycle_c).collect(),
        terminations: results.iter().map(|r| r.termination).collect(),
        p,
        nodes,
    })
}

/// `p = a * rho^b` fitted in log-log space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitResult {
    pub coefficient: f64,
    pub exponent: f64,
    /// RMS residual of `ln p`.
    pub residual: f64,
}

/// Unweighted least-squares line through `(ln rho, ln p)`.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<FitResult> {
    if points.len() < 3 {
        return Err(Error::Invalid(format!("power-law fit needs at least 3 points, got {}", points.len())));
    }
    if let Some(&(x, y)) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return Err(Error::Invalid(format!("non-positive point ({x}, {y})")));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Invalid("all ratios are equal".into()));
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = logs.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    Ok(FitResult { coefficient: intercept.exp(), exponent: slope, residual: (ss / n).sqrt() })
}
