//! Independent reference implementations used by the integration tests.
//! Nothing here calls into the packed kernel or the BFS statistics code.
#![allow(dead_code)]

use factin::{Configuration, ExcitationRule, MolecularGraph, NodeState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Copy, Debug)]
pub enum Family {
    Path,
    Cycle,
    Tree,
    Connected,
    /// Erdős–Rényi, possibly disconnected.
    Sparse,
}

pub const FAMILIES: [Family; 5] = [Family::Path, Family::Cycle, Family::Tree, Family::Connected, Family::Sparse];

pub fn random_edges(family: Family, n: usize, rng: &mut impl Rng) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    match family {
        Family::Path => edges.extend((1..n).map(|i| (i - 1, i))),
        Family::Cycle if n >= 3 => edges.extend((0..n).map(|i| (i, (i + 1) % n))),
        Family::Cycle => edges.extend((1..n).map(|i| (i - 1, i))),
        Family::Tree | Family::Connected => {
            for v in 1..n {
                edges.push((rng.random_range(0..v), v));
            }
            if matches!(family, Family::Connected) {
                let extra = rng.random_range(0..=n);
                for _ in 0..extra {
                    let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
                    if a != b {
                        edges.push((a, b));
                    }
                }
            }
        }
        Family::Sparse => {
            let p = (2.5 / n.max(1) as f64).min(1.0);
            for a in 0..n {
                for b in a + 1..n {
                    if rng.random_bool(p) {
                        edges.push((a, b));
                    }
                }
            }
        }
    }
    edges
}

pub fn adjacency(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        if a != b && !adj[a].contains(&b) {
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    adj
}

pub fn random_states(n: usize, rng: &mut impl Rng) -> Vec<NodeState> {
    (0..n)
        .map(|_| match rng.random_range(0..3) {
            0 => NodeState::Resting,
            1 => NodeState::Excited,
            _ => NodeState::Refractory,
        })
        .collect()
}

pub const RULES: [(u32, Option<u32>); 7] =
    [(1, None), (1, Some(1)), (1, Some(2)), (2, None), (2, Some(2)), (1, Some(3)), (3, None)];

pub fn rule(r: (u32, Option<u32>)) -> ExcitationRule {
    ExcitationRule::new(r.0, r.1).unwrap()
}

/// Direct transcription of the transition table.
pub fn oracle_step(adj: &[Vec<usize>], rule: (u32, Option<u32>), s: &[NodeState]) -> Vec<NodeState> {
    (0..s.len())
        .map(|u| match s[u] {
            NodeState::Excited => NodeState::Refractory,
            NodeState::Refractory => NodeState::Resting,
            NodeState::Resting => {
                let sigma = adj[u].iter().filter(|&&v| s[v] == NodeState::Excited).count() as u32;
                if sigma >= rule.0 && rule.1.is_none_or(|h| sigma <= h) {
                    NodeState::Excited
                } else {
                    NodeState::Resting
                }
            }
        })
        .collect()
}

/// First repeat by linear scan of the full history: `(p, c)`.
pub fn oracle_attractor(adj: &[Vec<usize>], rule: (u32, Option<u32>), init: &[NodeState], max_steps: usize) -> Option<(u64, u64)> {
    let mut history: Vec<Vec<NodeState>> = vec![init.to_vec()];
    for t in 1..=max_steps {
        let next = oracle_step(adj, rule, history.last().unwrap());
        if let Some(i) = history.iter().position(|h| *h == next) {
            return Some((i as u64, (t - i) as u64));
        }
        history.push(next);
    }
    None
}

/// Floyd–Warshall over the largest component (ties: smallest member):
/// `(diameter in nodes, mean distance, median distance)`.
pub fn oracle_distances(n: usize, adj: &[Vec<usize>]) -> (usize, f64, f64) {
    const INF: usize = usize::MAX / 4;
    let mut d = vec![vec![INF; n]; n];
    for u in 0..n {
        d[u][u] = 0;
        for &v in &adj[u] {
            d[u][v] = 1;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    let mut best: Vec<usize> = Vec::new();
    let mut assigned = vec![false; n];
    for s in 0..n {
        if assigned[s] {
            continue;
        }
        let comp: Vec<usize> = (0..n).filter(|&t| d[s][t] < INF).collect();
        for &t in &comp {
            assigned[t] = true;
        }
        if comp.len() > best.len() {
            best = comp;
        }
    }
    let mut dists = Vec::new();
    for (i, &a) in best.iter().enumerate() {
        for &b in &best[i + 1..] {
            dists.push(d[a][b]);
        }
    }
    if dists.is_empty() {
        return (1, 0.0, 0.0);
    }
    dists.sort_unstable();
    let k = dists.len();
    let median = if k % 2 == 1 { dists[k / 2] as f64 } else { (dists[k / 2 - 1] + dists[k / 2]) as f64 / 2.0 };
    let mean = dists.iter().sum::<usize>() as f64 / k as f64;
    (dists[k - 1] + 1, mean, median)
}

pub fn graph(n: usize, edges: &[(usize, usize)]) -> MolecularGraph {
    MolecularGraph::from_edges(n, edges.iter().copied()).unwrap()
}

pub fn config(states: &[NodeState]) -> Configuration {
    Configuration::from_states(states)
}

pub fn pdb_line(hetero: bool, serial: usize, name: &str, res: &str, seq: i32, xyz: [f64; 3], el: &str) -> String {
    let record = if hetero { "HETATM" } else { "ATOM  " };
    // four-character names start in column 13, shorter ones in column 14
    let name = if name.len() >= 4 { name.to_string() } else { format!(" {name}") };
    format!(
        "{record}{serial:>5} {name:<4} {res:>3} A{seq:>4}    {:>8.3}{:>8.3}{:>8.3}  1.00  0.00          {el:>2}",
        xyz[0], xyz[1], xyz[2]
    )
}

type Atom = (&'static str, [f64; 3]);

fn polygon(names: &[&'static str], bond: f64, origin: [f64; 3]) -> Vec<Atom> {
    let k = names.len() as f64;
    let r = bond / (2.0 * (std::f64::consts::PI / k).sin());
    names
        .iter()
        .enumerate()
        .map(|(i, &nm)| {
            let a = 2.0 * std::f64::consts::PI * i as f64 / k;
            (nm, [origin[0] + r * a.cos(), origin[1] + r * a.sin(), origin[2]])
        })
        .collect()
}

/// Adds atoms radially outward from `atom` (relative to `center`).
fn substituents(atom: [f64; 3], center: [f64; 3], chain: &[(&'static str, f64)]) -> Vec<Atom> {
    let (dx, dy) = (atom[0] - center[0], atom[1] - center[1]);
    let len = (dx * dx + dy * dy).sqrt();
    let mut out = Vec::new();
    let mut d = 0.0;
    for &(nm, b) in chain {
        d += b;
        out.push((nm, [atom[0] + dx / len * d, atom[1] + dy / len * d, atom[2]]));
    }
    out
}

fn six_ring(origin: [f64; 3]) -> Vec<Atom> {
    polygon(&["CG", "CD1", "CE1", "CZ", "CE2", "CD2"], 1.39, origin)
}

fn trp(origin: [f64; 3]) -> Vec<Atom> {
    let hex = polygon(&["CD2", "CE2", "CZ2", "CH2", "CZ3", "CE3"], 1.39, origin);
    let (a, b) = (hex[0].1, hex[1].1);
    let mid = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
    let out = [mid[0] - origin[0], mid[1] - origin[1]];
    let ol = (out[0] * out[0] + out[1] * out[1]).sqrt();
    let apothem = 1.39 / (2.0 * (std::f64::consts::PI / 5.0).tan());
    let c5 = [mid[0] + out[0] / ol * apothem, mid[1] + out[1] / ol * apothem, origin[2]];
    let r5 = 1.39 / (2.0 * (std::f64::consts::PI / 5.0).sin());
    let ang = |p: [f64; 3]| (p[1] - c5[1]).atan2(p[0] - c5[0]);
    let (a0, a1) = (ang(a), ang(b));
    let mut st = a1 - a0;
    while st > std::f64::consts::PI {
        st -= 2.0 * std::f64::consts::PI;
    }
    while st < -std::f64::consts::PI {
        st += 2.0 * std::f64::consts::PI;
    }
    let at = |k: f64| [c5[0] + r5 * (a0 + k * st).cos(), c5[1] + r5 * (a0 + k * st).sin(), origin[2]];
    // CD2, CE2, NE1, CD1, CG around the pentagon
    let mut atoms = hex;
    atoms.push(("NE1", at(2.0)));
    atoms.push(("CD1", at(3.0)));
    let cg = at(4.0);
    atoms.push(("CG", cg));
    atoms.extend(substituents(cg, c5, &[("CB", 1.5), ("CA", 1.53)]));
    atoms
}

fn element_of(name: &str) -> &'static str {
    match name.as_bytes()[0] {
        b'N' => "N",
        b'O' => "O",
        _ => "C",
    }
}

/// PHE, TYR, HIS, TRP side chains plus an unclassified benzene ligand,
/// spaced far enough apart that residues do not bond to each other.
/// 41 atoms, 42 bonds, six chordless rings (five in side chains).
pub fn synthetic_structure() -> String {
    let mut lines = Vec::new();
    let mut serial = 1;
    let mut emit = |hetero: bool, res: &str, seq: i32, atoms: Vec<Atom>| {
        for (nm, xyz) in atoms {
            lines.push(pdb_line(hetero, serial, nm, res, seq, xyz, element_of(nm)));
            serial += 1;
        }
    };
    let with_tail = |mut ring: Vec<Atom>, origin: [f64; 3], at: usize, tail: &[(&'static str, f64)]| {
        let anchor = ring[at].1;
        ring.extend(substituents(anchor, origin, tail));
        ring
    };
    let cb = [("CB", 1.5), ("CA", 1.53)];
    let o1 = [0.0, 0.0, 0.0];
    emit(false, "PHE", 1, with_tail(six_ring(o1), o1, 0, &cb));
    let o2 = [20.0, 0.0, 0.0];
    let tyr = with_tail(with_tail(six_ring(o2), o2, 0, &cb), o2, 3, &[("OH", 1.36)]);
    emit(false, "TYR", 2, tyr);
    let o3 = [40.0, 0.0, 0.0];
    let his = polygon(&["CG", "ND1", "CE1", "NE2", "CD2"], 1.36, o3);
    emit(false, "HIS", 3, with_tail(his, o3, 0, &cb));
    emit(false, "TRP", 4, trp([60.0, 0.0, 0.0]));
    let bnz = polygon(&["C1", "C2", "C3", "C4", "C5", "C6"], 1.39, [80.0, 0.0, 0.0]);
    emit(true, "BNZ", 5, bnz);
    lines.push("END".into());
    lines.join("\n") + "\n"
}
