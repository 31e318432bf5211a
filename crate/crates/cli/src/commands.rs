//! Subcommand implementations. Each writes its data to `out`; files are
//! staged and only committed once everything has succeeded.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::Parser;
use serde::Deserialize;
use serde_json::json;

use factin::automaton::{stim_rng, Configuration, Restimulation, StimulationSpec};
use factin::experiments::{
    fit_power_law, sweep_ratio, sweep_single_node, trial_rows_csv, NodeSelection, SweepConfig,
};
use factin::graph::{compute_stats, load_any};
use factin::rings::{
    check_noise_tolerance, check_noise_tolerance_in_situ, find_rings, generator_demo, memory_capacity, ring_census,
    write_bit, CapacityParams, NoiseReport, Ring,
};
use factin::trajectory::{run_with_restimulation_observed, RunOptions};
use factin::{ExcitationRule, MolecularGraph};

use crate::output::{commit_with_manifest, sha256_file, staged, AtomicFile, RunManifest};
use crate::spec::InitSpec;
use crate::{Cli, Command, GraphArgs, Invocation, UsageError};

pub const RUN_CSV_HEADER: &str = "seed,scenario,rho,rule,p,c,e,termination";

pub fn dispatch(ctx: &Invocation, cmd: Command, out: &mut Vec<u8>) -> Result<()> {
    match cmd {
        Command::Ingest { input, structure, output } => {
            let g = load_any(&input, &structure.options()).with_context(|| format!("loading {}", input.display()))?;
            writeln!(out, "nodes,{}\nedges,{}", g.node_count(), g.edge_count())?;
            let params = json!({
                "bond_mode": structure.bond_mode.to_string(),
                "tolerance": structure.tolerance,
                "strip_h": structure.strip_h,
            });
            let file = staged(&output, g.to_canonical_string().as_bytes())?;
            commit_with_manifest(ctx, "ingest", Some(&input), params, vec![(output, file)])
        }
        Command::Stats { graph, path } => stats(&load_graph(&graph)?, path, out),
        Command::Run { graph, rule, init, seed, max_steps, restim, dump_states, output } => {
            let g = load_graph(&graph)?;
            let schedule: Vec<Restimulation> = restim.iter().map(|r| r.0.clone()).collect();
            let params = json!({
                "rule": rule.to_string(),
                "init": init.to_string(),
                "seed": seed,
                "max_steps": run_options(&g, max_steps).max_steps,
                "restim": restim.iter().map(|r| r.to_string()).collect::<Vec<_>>(),
            });
            let mut staged_files = Vec::new();
            let row = run(&g, rule, &init, seed, max_steps, &schedule, dump_states.as_deref(), &mut staged_files)?;
            let text = format!("{RUN_CSV_HEADER}\n{row}\n");
            out.write_all(text.as_bytes())?;
            if let Some(path) = output {
                staged_files.insert(0, (path.clone(), staged(&path, text.as_bytes())?));
            }
            commit_with_manifest(ctx, "run", Some(&graph.graph), params, staged_files)
        }
        Command::Sweep { graph, rule, scenario, rho, trials, seed, max_steps, output } => {
            let g = load_graph(&graph)?;
            let cfg = SweepConfig { rule, scenario, rho_list: rho.0, trials_per_rho: trials, base_seed: seed, max_steps };
            let (summary, rows) = sweep_ratio(&g, &cfg)?;
            let exhausted: usize = summary.rows.iter().map(|r| r.exhausted).sum();
            if exhausted > 0 {
                log::warn!("{exhausted} trial(s) exhausted the step budget and are excluded from the summary");
            }
            write!(out, "{summary}")?;
            let params = json!({
                "rule": rule.to_string(),
                "scenario": scenario.to_string(),
                "rho": cfg.rho_list,
                "trials": trials,
                "seed": seed,
                "max_steps": run_options(&g, max_steps).max_steps,
            });
            let file = staged(&output, trial_rows_csv(&rows).as_bytes())?;
            commit_with_manifest(ctx, "sweep", Some(&graph.graph), params, vec![(output, file)])
        }
        Command::Fit { input } => fit(&input, out),
        Command::SingleSweep { graph, rule, sample, seed, band, max_steps, output } => {
            let g = load_graph(&graph)?;
            let selection = match sample {
                Some(count) => NodeSelection::Sample { count, seed },
                None => NodeSelection::All,
            };
            let s = sweep_single_node(&g, rule, max_steps, selection, (band.0, band.1))?;
            writeln!(out, "nodes,{}", s.nodes.len())?;
            writeln!(out, "mean,{}", s.mean)?;
            writeln!(out, "median,{}", s.median)?;
            writeln!(out, "min,{}", s.min)?;
            writeln!(out, "max,{}", s.max)?;
            writeln!(out, "band,{}:{}", band.0, band.1)?;
            writeln!(out, "band_count,{}", s.band_count)?;
            writeln!(out, "all_absorbing,{}", s.all_absorbing())?;
            let Some(path) = output else { return Ok(()) };
            let mut csv = String::from("node,p,c,termination\n");
            for i in 0..s.nodes.len() {
                csv.push_str(&format!("{},{},{},{}\n", s.nodes[i], s.p[i], s.c[i], s.terminations[i]));
            }
            let params = json!({
                "rule": rule.to_string(),
                "sample": sample,
                "seed": seed,
                "band": [band.0, band.1],
                "max_steps": run_options(&g, max_steps).max_steps,
            });
            let file = staged(&path, csv.as_bytes())?;
            commit_with_manifest(ctx, "single-sweep", Some(&graph.graph), params, vec![(path, file)])
        }
        Command::Rings {
            graph,
            structure,
            census,
            count_mode,
            tolerance_check,
            in_situ,
            demo,
            steps,
            phase,
            output,
            capacity,
            units,
            area,
        } => {
            if let Some(n) = tolerance_check {
                write_noise_report(&check_noise_tolerance(n)?, out)?;
            }
            let needs_graph = census || capacity || in_situ.is_some() || demo.is_some() || tolerance_check.is_none();
            if !needs_graph {
                return Ok(());
            }
            let Some(path) = graph else {
                return Err(UsageError("--graph is required unless only --tolerance-check is given".into()).into());
            };
            let g = load_any(&path, &structure.options()).with_context(|| format!("loading {}", path.display()))?;
            let rings = find_rings(&g);
            let listing = !(census || capacity || in_situ.is_some() || demo.is_some());
            if listing {
                list_rings(&rings, out)?;
            }
            let tally = ring_census(&rings, count_mode);
            if census {
                writeln!(out, "his,phe,trp,tyr,unclassified,total")?;
                writeln!(out, "{},{},{},{},{},{}", tally.his, tally.phe, tally.trp, tally.tyr, tally.unclassified, tally.total)?;
            }
            if capacity {
                let report = memory_capacity(&tally, &CapacityParams { units_per_filament: units, filament_area_nm2: area })?;
                writeln!(out, "{report}")?;
            }
            if let Some(id) = in_situ {
                write_noise_report(&check_noise_tolerance_in_situ(&g, ring_by_id(&rings, id)?)?, out)?;
            }
            if let Some(id) = demo {
                let d = generator_demo(&g, ring_by_id(&rings, id)?, phase, steps)?;
                match d.escape_step {
                    Some(t) => eprintln!("excitation leaves the ring at step {t}"),
                    None => eprintln!("excitation stays on the ring"),
                }
                let mut ndjson = String::new();
                for c in &d.snapshots {
                    ndjson.push_str(&snapshot_line(c));
                }
                match output {
                    Some(dest) => {
                        let params = json!({ "demo": id, "phase": phase, "steps": steps });
                        let file = staged(&dest, ndjson.as_bytes())?;
                        commit_with_manifest(ctx, "rings", Some(&path), params, vec![(dest, file)])?;
                    }
                    None => out.write_all(ndjson.as_bytes())?,
                }
            }
            Ok(())
        }
        Command::Replay { manifest } => replay(&manifest, out),
    }
}

fn load_graph(args: &GraphArgs) -> Result<MolecularGraph> {
    load_any(&args.graph, &args.structure.options()).with_context(|| format!("loading {}", args.graph.display()))
}

fn run_options(g: &MolecularGraph, max_steps: Option<u64>) -> RunOptions {
    let mut opts = RunOptions::for_graph(g);
    if let Some(m) = max_steps {
        opts.max_steps = m;
    }
    opts.series_limit = Some(0);
    opts
}

fn stats(g: &MolecularGraph, with_path: bool, out: &mut Vec<u8>) -> Result<()> {
    let s = compute_stats(g)?;
    writeln!(out, "nodes,{}", s.node_count)?;
    writeln!(out, "edges,{}", s.edge_count)?;
    writeln!(out, "degree_min,{}", s.degree_min)?;
    writeln!(out, "degree_max,{}", s.degree_max)?;
    writeln!(out, "degree_mean,{}", s.degree_mean)?;
    writeln!(out, "degree_stddev,{}", s.degree_stddev)?;
    writeln!(out, "degree_median,{}", s.degree_median)?;
    for (k, v) in &s.degree_histogram {
        writeln!(out, "degree_{k},{v}")?;
    }
    writeln!(out, "components,{}", s.component_sizes.len())?;
    writeln!(out, "largest_component,{}", s.component_sizes.first().copied().unwrap_or(0))?;
    writeln!(out, "diameter_nodes,{}", s.diameter_nodes)?;
    writeln!(out, "mean_distance,{}", s.mean_distance)?;
    writeln!(out, "median_distance,{}", s.median_distance)?;
    writeln!(out, "diameter_endpoints,{} {}", s.diameter_endpoints.0, s.diameter_endpoints.1)?;
    if with_path {
        writeln!(out, "diameter_path,{}", join(&s.diameter_path))?;
    }
    Ok(())
}

fn join(xs: &[usize]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn snapshot_line(c: &Configuration) -> String {
    format!("{{\"step\":{},\"states\":\"{}\"}}\n", c.step, c.to_state_string())
}

#[allow(clippy::too_many_arguments)]
fn run(
    g: &MolecularGraph,
    rule: ExcitationRule,
    init: &InitSpec,
    seed: u64,
    max_steps: Option<u64>,
    schedule: &[Restimulation],
    dump: Option<&Path>,
    staged_files: &mut Vec<(PathBuf, AtomicFile)>,
) -> Result<String> {
    let n = g.node_count();
    let (cfg0, mut rng, scenario, rho) = match init {
        InitSpec::Scenario(s) => {
            let (cfg, rng) = StimulationSpec::new(s.clone(), seed).initial(n)?;
            (cfg, rng, s.kind().to_string(), s.rho())
        }
        InitSpec::Ring { id, phase } => {
            let rings = find_rings(g);
            let cfg = write_bit(&Configuration::resting(n), ring_by_id(&rings, *id)?, *phase)?;
            (cfg, stim_rng(seed), "ring".to_string(), None)
        }
    };
    let mut file = dump.map(AtomicFile::create).transpose()?;
    let mut pending: Option<Configuration> = None;
    let mut write_err: Option<std::io::Error> = None;
    let mut emit = |c: &Configuration, file: &mut Option<AtomicFile>| {
        if let (Some(f), None) = (file.as_mut(), write_err.as_ref()) {
            if let Err(e) = f.writer().write_all(snapshot_line(c).as_bytes()) {
                write_err = Some(e);
            }
        }
    };
    let opts = run_options(g, max_steps);
    let result = run_with_restimulation_observed(g, rule, &cfg0, schedule, &mut rng, &opts, &mut |c| {
        if file.is_none() {
            return;
        }
        // a stimulated step arrives twice; keep the later state
        if let Some(prev) = pending.take() {
            if prev.step != c.step {
                emit(&prev, &mut file);
            }
        }
        pending = Some(c.clone());
    })?;
    if let Some(last) = pending.take() {
        emit(&last, &mut file);
    }
    if let Some(e) = write_err {
        return Err(e).context("writing state dump");
    }
    if let (Some(path), Some(f)) = (dump, file) {
        staged_files.push((path.to_path_buf(), f));
    }
    let r = result.result;
    Ok(format!(
        "{seed},{scenario},{},{rule},{},{},{},{}",
        rho.map(|x| x.to_string()).unwrap_or_default(),
        r.transient_p,
        r.cycle_c,
        r.excitation_e,
        r.termination
    ))
}

fn ring_by_id(rings: &[Ring], id: usize) -> Result<&Ring> {
    rings.get(id).ok_or_else(|| anyhow!("ring {id} does not exist ({} rings found)", rings.len()))
}

fn list_rings(rings: &[Ring], out: &mut Vec<u8>) -> Result<()> {
    writeln!(out, "ring_id,kind,residue,seq,chain,size,nodes,attachments")?;
    for (i, r) in rings.iter().enumerate() {
        writeln!(
            out,
            "{i},{},{},{},{},{},{},{}",
            r.kind.map(|k| k.to_string()).unwrap_or_else(|| "unclassified".into()),
            r.residue_name.as_deref().unwrap_or(""),
            r.residue_seq.map(|s| s.to_string()).unwrap_or_default(),
            r.chain.map(|c| c.to_string()).unwrap_or_default(),
            r.size(),
            join(&r.nodes),
            join(&r.attachments)
        )?;
    }
    Ok(())
}

fn write_noise_report(r: &NoiseReport, out: &mut Vec<u8>) -> Result<()> {
    writeln!(out, "ring_size,{}", r.ring_size)?;
    writeln!(out, "cases,{}", r.cases)?;
    writeln!(out, "counterexamples,{}", r.counterexamples.len())?;
    writeln!(out, "wave_persists,{}", r.wave_persists)?;
    writeln!(out, "excite_all_extinguishes,{}", r.excite_all_extinguishes)?;
    writeln!(out, "inhibit_all_extinguishes,{}", r.inhibit_all_extinguishes)?;
    for p in &r.counterexamples {
        let dir = if p.forward { "forward" } else { "backward" };
        writeln!(out, "counterexample,{},{dir},{}", p.head, join(&p.excited))?;
    }
    Ok(())
}

#[derive(Deserialize)]
struct TrialRecord {
    rho_index: usize,
    rho: Option<f64>,
    p: u64,
    termination: String,
}

fn fit(input: &Path, out: &mut Vec<u8>) -> Result<()> {
    let mut reader = csv::Reader::from_path(input).with_context(|| format!("opening {}", input.display()))?;
    let mut groups: BTreeMap<usize, (f64, Vec<f64>)> = BTreeMap::new();
    for rec in reader.deserialize() {
        let rec: TrialRecord = rec.with_context(|| format!("reading {}", input.display()))?;
        let rho = rec.rho.ok_or_else(|| anyhow!("row without a ratio; fit needs a plus or plus-minus sweep"))?;
        let entry = groups.entry(rec.rho_index).or_insert((rho, Vec::new()));
        if rec.termination != "budget-exhausted" {
            entry.1.push(rec.p as f64);
        }
    }
    let points: Vec<(f64, f64)> = groups
        .values()
        .filter(|(_, ps)| !ps.is_empty())
        .map(|(rho, ps)| (*rho, ps.iter().sum::<f64>() / ps.len() as f64))
        .collect();
    let f = fit_power_law(&points)?;
    writeln!(out, "a,{}", f.coefficient)?;
    writeln!(out, "b,{}", f.exponent)?;
    writeln!(out, "residual,{}", f.residual)?;
    writeln!(out, "points,{}", points.len())?;
    Ok(())
}

fn replay(manifest_path: &Path, out: &mut Vec<u8>) -> Result<()> {
    let m = RunManifest::load(manifest_path)?;
    std::env::set_current_dir(&m.cwd).with_context(|| format!("entering {}", m.cwd.display()))?;
    if let Some(g) = &m.graph {
        let now = sha256_file(&g.path)?;
        if now != g.sha256 {
            bail!("{} changed since the manifest was written", g.path.display());
        }
    }
    let cli = Cli::try_parse_from(std::iter::once("factin".to_string()).chain(m.argv.iter().cloned()))
        .map_err(|e| anyhow!("manifest arguments do not parse: {e}"))?;
    let dir = tempfile::tempdir()?;
    let mut mapping: HashMap<PathBuf, PathBuf> = HashMap::new();
    let mut redirect = |p: &mut PathBuf| {
        let name = p.file_name().map(|n| n.to_owned()).unwrap_or_else(|| "output".into());
        let new = dir.path().join(name);
        mapping.insert(p.clone(), new.clone());
        *p = new;
    };
    let mut cmd = cli.command;
    match &mut cmd {
        Command::Ingest { output, .. } | Command::Sweep { output, .. } => redirect(output),
        Command::Run { output, dump_states, .. } => {
            output.iter_mut().for_each(&mut redirect);
            dump_states.iter_mut().for_each(&mut redirect);
        }
        Command::SingleSweep { output, .. } | Command::Rings { output, .. } => output.iter_mut().for_each(&mut redirect),
        Command::Stats { .. } | Command::Fit { .. } | Command::Replay { .. } => {
            bail!("manifest records '{}', which writes no files", m.command)
        }
    }
    let ctx = Invocation { argv: m.argv.clone(), cwd: m.cwd.clone() };
    dispatch(&ctx, cmd, &mut Vec::new())?;
    let mut mismatched = Vec::new();
    for o in &m.outputs {
        let replayed = mapping.get(&o.path).ok_or_else(|| anyhow!("manifest output {} is not produced by its command", o.path.display()))?;
        let sha = sha256_file(replayed)?;
        let status = if sha == o.sha256 { "identical" } else { "differs" };
        writeln!(out, "{status},{},{sha}", o.path.display())?;
        if sha != o.sha256 {
            mismatched.push(o.path.display().to_string());
        }
    }
    if !mismatched.is_empty() {
        bail!("replay differs for {}", mismatched.join(", "));
    }
    Ok(())
}
