//! Aromatic rings as one-bit memory cells.
//!
//! A ring holds a bit when a single excitation wave (one excited node
//! followed by one refractory node) travels around it under rule A0.

use std::collections::BTreeSet;
use std::fmt;

use crate::automaton::{step, Configuration, ExcitationRule, NodeState};
use crate::error::{Error, Result};
use crate::graph::MolecularGraph;
use crate::par;
use crate::trajectory::{run_to_attractor, RunOptions, Termination};

/// Residue ring classes with canonical atom names.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RingKind {
    His,
    Phe,
    Tyr,
    /// Five-membered pyrrole ring of tryptophan.
    Trp5,
    /// Six-membered benzene ring of tryptophan.
    Trp6,
}

impl RingKind {
    pub fn residue(&self) -> &'static str {
        match self {
            RingKind::His => "HIS",
            RingKind::Phe => "PHE",
            RingKind::Tyr => "TYR",
            RingKind::Trp5 | RingKind::Trp6 => "TRP",
        }
    }

    fn atom_names(&self) -> &'static [&'static str] {
        match self {
            RingKind::His => &["CG", "ND1", "CD2", "CE1", "NE2"],
            RingKind::Phe | RingKind::Tyr => &["CG", "CD1", "CD2", "CE1", "CE2", "CZ"],
            RingKind::Trp5 => &["CG", "CD1", "NE1", "CE2", "CD2"],
            RingKind::Trp6 => &["CD2", "CE2", "CE3", "CZ2", "CZ3", "CH2"],
        }
    }
}

impl fmt::Display for RingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RingKind::His => "HIS",
            RingKind::Phe => "PHE",
            RingKind::Tyr => "TYR",
            RingKind::Trp5 => "TRP5",
            RingKind::Trp6 => "TRP6",
        })
    }
}

fn residue_candidates(residue: &str) -> &'static [RingKind] {
    match residue {
        "HIS" | "HID" | "HIE" | "HIP" | "HSD" | "HSE" | "HSP" => &[RingKind::His],
        "PHE" => &[RingKind::Phe],
        "TYR" => &[RingKind::Tyr],
        "TRP" => &[RingKind::Trp5, RingKind::Trp6],
        _ => &[],
    }
}

/// A chordless 5- or 6-cycle.
#[derive(Clone, Debug, PartialEq)]
pub struct Ring {
    /// Nodes in cyclic order, starting at the smallest id and continuing
    /// towards its smaller ring neighbour.
    pub nodes: Vec<usize>,
    pub kind: Option<RingKind>,
    pub residue_name: Option<String>,
    pub residue_seq: Option<i32>,
    pub chain: Option<char>,
    /// Ring nodes with at least one neighbour outside the ring.
    pub attachments: Vec<usize>,
}

impl Ring {
    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    /// Ring over nodes `0..n` of an isolated cycle graph.
    pub fn isolated(n: usize) -> Self {
        Self { nodes: (0..n).collect(), kind: None, residue_name: None, residue_seq: None, chain: None, attachments: Vec::new() }
    }

    fn from_cycle(g: &MolecularGraph, nodes: Vec<usize>, kind: Option<RingKind>) -> Self {
        let members: BTreeSet<usize> = nodes.iter().copied().collect();
        let attachments = nodes
            .iter()
            .copied()
            .filter(|&u| g.neighbors(u).iter().any(|&v| !members.contains(&(v as usize))))
            .collect();
        let atom = g.atoms().get(nodes[0]);
        Self {
            kind,
            residue_name: atom.map(|a| a.residue_name.clone()),
            residue_seq: atom.map(|a| a.residue_seq),
            chain: atom.map(|a| a.chain),
            attachments,
            nodes,
        }
    }
}

/// All chordless cycles of length 5 or 6, canonically ordered.
pub fn chordless_cycles(g: &MolecularGraph) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut path = Vec::with_capacity(6);
    for s in 0..g.node_count() {
        path.clear();
        path.push(s);
        extend(g, &mut path, &mut out);
    }
    out.sort();
    out
}

fn extend(g: &MolecularGraph, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    let s = path[0];
    let last = *path.last().unwrap();
    for &w in g.neighbors(last) {
        let w = w as usize;
        if w <= s || path.contains(&w) {
            continue;
        }
        // w may only touch the last node and, when closing, the start
        let inner = if path.len() > 2 { &path[1..path.len() - 1] } else { &[][..] };
        if inner.iter().any(|&x| g.has_edge(w, x)) {
            continue;
        }
        let len = path.len() + 1;
        if path.len() >= 2 && g.has_edge(w, s) {
            if (len == 5 || len == 6) && path[1] < w {
                let mut cycle = path.clone();
                cycle.push(w);
                out.push(cycle);
            }
            continue;
        }
        if len < 6 {
            path.push(w);
            extend(g, path, out);
            path.pop();
        }
    }
}

/// Perceives rings. Annotated graphs yield only aromatic side-chain rings
/// (single residue, canonical atom names); edge-list graphs yield every
/// chordless 5/6-cycle, unclassified.
pub fn find_rings(g: &MolecularGraph) -> Vec<Ring> {
    let cycles = chordless_cycles(g);
    if !g.has_annotations() {
        return cycles.into_iter().map(|c| Ring::from_cycle(g, c, None)).collect();
    }
    let atoms = g.atoms();
    cycles
        .into_iter()
        .filter_map(|c| {
            let a0 = &atoms[c[0]];
            let same_residue = c.iter().all(|&u| {
                let a = &atoms[u];
                a.chain == a0.chain && a.residue_seq == a0.residue_seq && a.residue_name == a0.residue_name
            });
            if !same_residue {
                return None;
            }
            let names: BTreeSet<&str> = c.iter().map(|&u| atoms[u].atom_name.as_str()).collect();
            let kind = residue_candidates(&a0.residue_name).iter().copied().find(|k| {
                k.atom_names().len() == c.len() && k.atom_names().iter().all(|n| names.contains(n))
            })?;
            Some(Ring::from_cycle(g, c, Some(kind)))
        })
        .collect()
}

/// How tryptophan contributes to the census.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CountMode {
    /// Every ring counts; a tryptophan residue contributes two.
    #[default]
    Chemical,
    /// One per tryptophan residue.
    PerResidue,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RingCensus {
    pub his: usize,
    pub phe: usize,
    pub trp: usize,
    pub tyr: usize,
    pub unclassified: usize,
    pub total: usize,
}

pub fn ring_census(rings: &[Ring], mode: CountMode) -> RingCensus {
    let mut c = RingCensus::default();
    let mut trp_residues = BTreeSet::new();
    for r in rings {
        match r.kind {
            Some(RingKind::His) => c.his += 1,
            Some(RingKind::Phe) => c.phe += 1,
            Some(RingKind::Tyr) => c.tyr += 1,
            Some(RingKind::Trp5 | RingKind::Trp6) => match mode {
                CountMode::Chemical => c.trp += 1,
                CountMode::PerResidue => {
                    if trp_residues.insert((r.chain, r.residue_seq)) {
                        c.trp += 1;
                    }
                }
            },
            None => c.unclassified += 1,
        }
    }
    c.total = c.his + c.phe + c.trp + c.tyr + c.unclassified;
    c
}

/// Writes a bit: the node at `phase` becomes excited and its cyclic
/// predecessor refractory, so the wave moves towards increasing phase.
pub fn write_bit(cfg: &Configuration, ring: &Ring, phase: usize) -> Result<Configuration> {
    let n = ring.size();
    if phase >= n {
        return Err(Error::Invalid(format!("phase {phase} outside ring of size {n}")));
    }
    if ring.nodes.iter().any(|&u| cfg.get(u) != NodeState::Resting) {
        return Err(Error::RingOccupied);
    }
    let mut out = cfg.clone();
    out.set(ring.nodes[phase], NodeState::Excited);
    out.set(ring.nodes[(phase + n - 1) % n], NodeState::Refractory);
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EraseMode {
    ExciteAllResting,
    InhibitAllResting,
}

/// Erases a bit by forcing every resting ring node excited or refractory.
pub fn erase_bit(cfg: &Configuration, ring: &Ring, mode: EraseMode) -> Result<Configuration> {
    if !carries_single_wave(cfg, ring) {
        return Err(Error::RingNotSingleWave);
    }
    let target = match mode {
        EraseMode::ExciteAllResting => NodeState::Excited,
        EraseMode::InhibitAllResting => NodeState::Refractory,
    };
    let mut out = cfg.clone();
    for &u in &ring.nodes {
        if cfg.get(u) == NodeState::Resting {
            out.set(u, target);
        }
    }
    Ok(out)
}

/// Exactly one excited and one refractory ring node, adjacent on the ring.
pub fn carries_single_wave(cfg: &Configuration, ring: &Ring) -> bool {
    let n = ring.size();
    let states: Vec<NodeState> = ring.nodes.iter().map(|&u| cfg.get(u)).collect();
    let pos = |s| states.iter().position(|&x| x == s);
    let count = |s| states.iter().filter(|&&x| x == s).count();
    if count(NodeState::Excited) != 1 || count(NodeState::Refractory) != 1 {
        return false;
    }
    let (e, r) = (pos(NodeState::Excited).unwrap(), pos(NodeState::Refractory).unwrap());
    (e + 1) % n == r || (r + 1) % n == e
}

/// One perturbation of a travelling wave.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Perturbation {
    /// Ring position of the wave's excited head.
    pub head: usize,
    /// `true` when the wave moves towards increasing positions.
    pub forward: bool,
    /// Ring positions of the resting nodes that were excited.
    pub excited: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoiseReport {
    pub ring_size: usize,
    /// Number of 1- and 2-node perturbations examined.
    pub cases: usize,
    /// Perturbations after which the ring went quiet.
    pub counterexamples: Vec<Perturbation>,
    /// Undisturbed wave gives `p = 0`, `c = n`, `e = 1`.
    pub wave_persists: bool,
    pub excite_all_extinguishes: bool,
    pub inhibit_all_extinguishes: bool,
}

impl NoiseReport {
    pub fn is_tolerant(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

/// Exhaustive noise test on an isolated ring of `ring_size` nodes under A0.
pub fn check_noise_tolerance(ring_size: usize) -> Result<NoiseReport> {
    if !(4..=12).contains(&ring_size) {
        return Err(Error::Invalid(format!("ring size {ring_size} outside [4, 12]")));
    }
    let g = MolecularGraph::cycle(ring_size);
    check_tolerance_on(&g, &Ring::isolated(ring_size))
}

/// Same checks with the ring embedded in `g`; the rest of the graph starts
/// resting and a case counts as extinguished when no ring node is active
/// anywhere on the attractor.
pub fn check_noise_tolerance_in_situ(g: &MolecularGraph, ring: &Ring) -> Result<NoiseReport> {
    check_tolerance_on(g, ring)
}

fn wave(g: &MolecularGraph, ring: &Ring, head: usize, forward: bool) -> Configuration {
    let n = ring.size();
    let tail = if forward { (head + n - 1) % n } else { (head + 1) % n };
    let mut cfg = Configuration::resting(g.node_count());
    cfg.set(ring.nodes[head], NodeState::Excited);
    cfg.set(ring.nodes[tail], NodeState::Refractory);
    cfg
}

fn ring_goes_quiet(g: &MolecularGraph, ring: &Ring, cfg0: &Configuration) -> Result<bool> {
    let opts = RunOptions::for_graph(g);
    let r = run_to_attractor(g, ExcitationRule::A0, cfg0, &opts)?;
    match r.termination {
        Termination::Absorbing => Ok(true),
        Termination::BudgetExhausted(_) => Ok(false),
        Termination::LimitCycle => {
            let mut cur = cfg0.clone();
            for _ in 0..r.transient_p {
                cur = step(g, ExcitationRule::A0, &cur)?;
            }
            for _ in 0..r.cycle_c {
                if ring.nodes.iter().any(|&u| cur.get(u) != NodeState::Resting) {
                    return Ok(false);
                }
                cur = step(g, ExcitationRule::A0, &cur)?;
            }
            Ok(true)
        }
    }
}

fn check_tolerance_on(g: &MolecularGraph, ring: &Ring) -> Result<NoiseReport> {
    let n = ring.size();
    let mut cases = Vec::new();
    for head in 0..n {
        for forward in [true, false] {
            let tail = if forward { (head + n - 1) % n } else { (head + 1) % n };
            let resting: Vec<usize> = (0..n).filter(|&i| i != head && i != tail).collect();
            for (a, &x) in resting.iter().enumerate() {
                cases.push(Perturbation { head, forward, excited: vec![x] });
                for &y in &resting[a + 1..] {
                    cases.push(Perturbation { head, forward, excited: vec![x, y] });
                }
            }
        }
    }
    let outcomes = par::map_indexed(cases.len(), |i| {
        let case = &cases[i];
        let mut cfg = wave(g, ring, case.head, case.forward);
        for &pos in &case.excited {
            cfg.set(ring.nodes[pos], NodeState::Excited);
        }
        ring_goes_quiet(g, ring, &cfg)
    });
    let mut counterexamples = Vec::new();
    for (case, quiet) in cases.iter().zip(outcomes) {
        if quiet? {
            counterexamples.push(case.clone());
        }
    }

    let base = wave(g, ring, 0, true);
    let undisturbed = run_to_attractor(g, ExcitationRule::A0, &base, &RunOptions::for_graph(g))?;
    let wave_persists = if ring.attachments.is_empty() {
        (undisturbed.transient_p, undisturbed.cycle_c, undisturbed.excitation_e) == (0, n as u64, 1)
    } else {
        !ring_goes_quiet(g, ring, &base)?
    };
    let excite = erase_bit(&base, ring, EraseMode::ExciteAllResting)?;
    let inhibit = erase_bit(&base, ring, EraseMode::InhibitAllResting)?;
    Ok(NoiseReport {
        ring_size: n,
        cases: cases.len(),
        counterexamples,
        wave_persists,
        excite_all_extinguishes: ring_goes_quiet(g, ring, &excite)?,
        inhibit_all_extinguishes: ring_goes_quiet(g, ring, &inhibit)?,
    })
}

/// Snapshots of a ring acting as an excitation source for the whole graph.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorDemo {
    pub snapshots: Vec<Configuration>,
    /// First step at which a node outside the ring is excited.
    pub escape_step: Option<u64>,
    /// Excited count per step.
    pub series: Vec<u32>,
}

/// Writes a bit at `phase` and evolves the full graph under A0 for
/// `steps` steps.
pub fn generator_demo(g: &MolecularGraph, ring: &Ring, phase: usize, steps: u64) -> Result<GeneratorDemo> {
    let members: BTreeSet<usize> = ring.nodes.iter().copied().collect();
    let mut cur = write_bit(&Configuration::resting(g.node_count()), ring, phase)?;
    let mut snapshots = Vec::with_capacity(steps as usize + 1);
    let mut escape_step = None;
    for t in 0..=steps {
        if escape_step.is_none()
            && (0..g.node_count()).any(|u| !members.contains(&u) && cur.get(u) == NodeState::Excited)
        {
            escape_step = Some(t);
        }
        let next = if t < steps { Some(step(g, ExcitationRule::A0, &cur)?) } else { None };
        snapshots.push(cur);
        match next {
            Some(n) => cur = n,
            None => break,
        }
    }
    let series = snapshots.iter().map(|c| c.excited_count() as u32).collect();
    Ok(GeneratorDemo { snapshots, escape_step, series })
}

/// Inputs for the storage-density estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CapacityParams {
    /// Actin units along one filament, both strands together.
    pub units_per_filament: u64,
    /// Area attributed to one filament, in nm^2.
    pub filament_area_nm2: f64,
}

impl Default for CapacityParams {
    /// 8000 units (two strands of ~4e3 units of 4 nm over a 17 um
    /// persistence length) and 3200 nm^2 per filament.
    fn default() -> Self {
        Self { units_per_filament: 8000, filament_area_nm2: 3200.0 }
    }
}

/// Filament geometry from which a unit count can be derived.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FilamentGeometry {
    pub persistence_length_nm: f64,
    pub unit_size_nm: f64,
    pub strands: u32,
}

impl Default for FilamentGeometry {
    fn default() -> Self {
        Self { persistence_length_nm: 17_000.0, unit_size_nm: 4.0, strands: 2 }
    }
}

impl FilamentGeometry {
    /// Unrounded `strands * length / unit`; 8500 for the defaults.
    pub fn units_per_filament(&self) -> f64 {
        self.strands as f64 * self.persistence_length_nm / self.unit_size_nm
    }
}

pub const NM2_PER_SQUARE_INCH: f64 = 25.4e6 * 25.4e6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CapacityReport {
    pub bits_per_unit: u64,
    pub bits_per_filament: u64,
    pub bits_per_nm2: f64,
    pub bits_per_square_inch: f64,
}

/// Bits per unit = one per ring; everything else follows by scaling.
pub fn memory_capacity(census: &RingCensus, params: &CapacityParams) -> Result<CapacityReport> {
    if params.units_per_filament == 0 || !(params.filament_area_nm2.is_finite() && params.filament_area_nm2 > 0.0) {
        return Err(Error::Invalid("capacity parameters must be positive".into()));
    }
    let bits_per_unit = census.total as u64;
    let bits_per_filament = bits_per_unit * params.units_per_filament;
    let bits_per_nm2 = bits_per_filament as f64 / params.filament_area_nm2;
    Ok(CapacityReport { bits_per_unit, bits_per_filament, bits_per_nm2, bits_per_square_inch: bits_per_nm2 * NM2_PER_SQUARE_INCH })
}

impl fmt::Display for CapacityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "bits_per_unit,{}", self.bits_per_unit)?;
        writeln!(f, "bits_per_filament,{}", self.bits_per_filament)?;
        writeln!(f, "bits_per_nm2,{}", self.bits_per_nm2)?;
        write!(f, "bits_per_square_inch,{:e}", self.bits_per_square_inch)
    }
}
