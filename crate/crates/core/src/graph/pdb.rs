//! Fixed-column structure files (ATOM/HETATM + CONECT records).

use std::collections::{HashMap, HashSet};
use std::path::{Path, PathBuf};

use super::elements::{covalent_radius, normalize_element};
use super::{read_text, AtomRecord, MolecularGraph};
use crate::error::{Error, Result};

/// Default slack added to the sum of covalent radii when inferring bonds.
pub const DEFAULT_BOND_TOLERANCE: f64 = 0.45;

/// Where bonds come from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BondMode {
    /// Only explicit connectivity records.
    RecordsOnly,
    /// Only distance-based inference.
    Infer,
    /// Union of explicit records and inferred bonds.
    #[default]
    RecordsThenInfer,
}

impl std::fmt::Display for BondMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::RecordsOnly => "records-only",
            Self::Infer => "infer",
            Self::RecordsThenInfer => "records-then-infer",
        })
    }
}

impl std::str::FromStr for BondMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "records-only" => Ok(Self::RecordsOnly),
            "infer" => Ok(Self::Infer),
            "records-then-infer" => Ok(Self::RecordsThenInfer),
            other => Err(Error::Invalid(format!("unknown bond mode {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StructureOptions {
    pub bond_mode: BondMode,
    pub tolerance: f64,
    pub strip_hydrogens: bool,
}

impl Default for StructureOptions {
    fn default() -> Self {
        Self { bond_mode: BondMode::default(), tolerance: DEFAULT_BOND_TOLERANCE, strip_hydrogens: false }
    }
}

/// Reads a structure file into a graph with one node per atom.
pub fn load_structure(path: &Path, opts: &StructureOptions) -> Result<MolecularGraph> {
    let text = read_text(path)?;
    parse_structure(&text, opts).map_err(|e| match e {
        Error::NoAtoms(_) => Error::NoAtoms(path.to_owned()),
        Error::NoConnectivity(_) => Error::NoConnectivity(path.to_owned()),
        other => other,
    })
}

type AtomKey = (char, i32, char, String, String);

/// Parses structure-file text. Only the first model is read; alternate
/// locations keep their first occurrence.
pub fn parse_structure(text: &str, opts: &StructureOptions) -> Result<MolecularGraph> {
    let mut atoms: Vec<AtomRecord> = Vec::new();
    let mut serial_to_id: HashMap<i64, usize> = HashMap::new();
    let mut seen: HashMap<AtomKey, usize> = HashMap::new();
    let mut conect: Vec<(usize, i64, i64)> = Vec::new();
    let mut has_conect = false;
    let mut in_first_model = true;
    let mut models_seen = 0usize;

    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let record = col(line, 0, 6).trim_end();
        match record {
            "MODEL" => {
                models_seen += 1;
                if models_seen > 1 {
                    in_first_model = false;
                }
            }
            "ENDMDL" => in_first_model = false,
            "ATOM" | "HETATM" if in_first_model => {
                let parsed = parse_atom(line, line_no, record == "HETATM")?;
                if opts.strip_hydrogens && matches!(parsed.element.as_str(), "H" | "D") {
                    continue;
                }
                let key = (
                    parsed.chain,
                    parsed.residue_seq,
                    parsed.insertion,
                    parsed.residue_name.clone(),
                    parsed.atom_name.clone(),
                );
                if let Some(&id) = seen.get(&key) {
                    serial_to_id.entry(parsed.serial).or_insert(id);
                    continue;
                }
                let id = atoms.len();
                seen.insert(key, id);
                serial_to_id.entry(parsed.serial).or_insert(id);
                atoms.push(AtomRecord {
                    id,
                    serial: parsed.serial,
                    element: parsed.element,
                    atom_name: parsed.atom_name,
                    residue_name: parsed.residue_name,
                    residue_seq: parsed.residue_seq,
                    chain: parsed.chain,
                    position: parsed.position,
                });
            }
            "CONECT" => {
                has_conect = true;
                let from = parse_serial(col(line, 6, 11), line_no)?;
                for (a, b) in [(11, 16), (16, 21), (21, 26), (26, 31)] {
                    let field = col(line, a, b);
                    if field.trim().is_empty() {
                        continue;
                    }
                    let to = parse_serial(field, line_no)?;
                    conect.push((line_no, from, to));
                }
            }
            _ => {}
        }
    }

    if atoms.is_empty() {
        return Err(Error::NoAtoms(PathBuf::new()));
    }
    if opts.bond_mode == BondMode::RecordsOnly && !has_conect {
        return Err(Error::NoConnectivity(PathBuf::new()));
    }

    let mut edges: Vec<(usize, usize)> = Vec::new();
    if opts.bond_mode != BondMode::Infer {
        for &(line_no, a, b) in &conect {
            match (serial_to_id.get(&a), serial_to_id.get(&b)) {
                (Some(&u), Some(&v)) if u != v => edges.push((u, v)),
                (Some(_), Some(_)) => {}
                _ => log::debug!("line {line_no}: CONECT {a}-{b} references an unknown atom"),
            }
        }
    }
    if opts.bond_mode != BondMode::RecordsOnly {
        edges.extend(infer_bonds(&atoms, opts.tolerance));
    }
    MolecularGraph::from_edges(atoms.len(), edges)?.with_atoms(atoms)
}

/// All pairs with `dist <= r_u + r_v + tolerance`, via a uniform cell grid.
/// Atoms without a known radius never bond.
pub(crate) fn infer_bonds(atoms: &[AtomRecord], tolerance: f64) -> Vec<(usize, usize)> {
    let radii: Vec<Option<f64>> = atoms.iter().map(|a| covalent_radius(&a.element)).collect();
    let max_r = radii.iter().flatten().copied().fold(0.0f64, f64::max);
    let cell = (2.0 * max_r + tolerance).max(1e-6);
    let key = |p: &[f64; 3]| -> (i64, i64, i64) {
        (
            (p[0] / cell).floor() as i64,
            (p[1] / cell).floor() as i64,
            (p[2] / cell).floor() as i64,
        )
    };
    let mut grid: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
    for (i, a) in atoms.iter().enumerate() {
        if radii[i].is_some() {
            grid.entry(key(&a.position)).or_default().push(i);
        }
    }
    let mut out = HashSet::new();
    for (i, a) in atoms.iter().enumerate() {
        let Some(ri) = radii[i] else { continue };
        let (cx, cy, cz) = key(&a.position);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    let Some(bucket) = grid.get(&(cx + dx, cy + dy, cz + dz)) else { continue };
                    for &j in bucket {
                        if j <= i {
                            continue;
                        }
                        let rj = radii[j].unwrap();
                        let d2: f64 = (0..3)
                            .map(|k| (a.position[k] - atoms[j].position[k]).powi(2))
                            .sum();
                        let lim = ri + rj + tolerance;
                        if d2 <= lim * lim {
                            out.insert((i, j));
                        }
                    }
                }
            }
        }
    }
    let mut v: Vec<_> = out.into_iter().collect();
    v.sort_unstable();
    v
}

struct ParsedAtom {
    serial: i64,
    atom_name: String,
    residue_name: String,
    chain: char,
    residue_seq: i32,
    insertion: char,
    position: [f64; 3],
    element: String,
}

fn parse_atom(line: &str, line_no: usize, hetero: bool) -> Result<ParsedAtom> {
    if line.len() < 54 {
        return Err(Error::Parse { line: line_no, msg: "atom record shorter than 54 columns".into() });
    }
    let num = |a: usize, b: usize, what: &str| -> Result<f64> {
        col(line, a, b).trim().parse::<f64>().map_err(|_| Error::Parse {
            line: line_no,
            msg: format!("bad {what} field {:?}", col(line, a, b)),
        })
    };
    let serial = parse_serial(col(line, 6, 11), line_no)?;
    let raw_name = col(line, 12, 16);
    let residue_seq = col(line, 22, 26).trim().parse::<i32>().map_err(|_| Error::Parse {
        line: line_no,
        msg: format!("bad residue number {:?}", col(line, 22, 26)),
    })?;
    let element = element_from_columns(col(line, 76, 78))
        .or_else(|| element_from_name(raw_name, hetero))
        .unwrap_or_else(|| "X".to_owned());
    Ok(ParsedAtom {
        serial,
        atom_name: raw_name.trim().to_owned(),
        residue_name: col(line, 17, 20).trim().to_owned(),
        chain: col(line, 21, 22).chars().next().unwrap_or(' '),
        residue_seq,
        insertion: col(line, 26, 27).chars().next().unwrap_or(' '),
        position: [num(30, 38, "x")?, num(38, 46, "y")?, num(46, 54, "z")?],
        element,
    })
}

fn element_from_columns(field: &str) -> Option<String> {
    if field.trim().is_empty() {
        None
    } else {
        normalize_element(field)
    }
}

fn element_from_name(name: &str, hetero: bool) -> Option<String> {
    let bytes = name.as_bytes();
    let first = *bytes.first()?;
    if first == b' ' || first.is_ascii_digit() {
        return bytes.get(1).and_then(|&c| normalize_element(&(c as char).to_string()));
    }
    if hetero {
        if let Some(two) = name.get(0..2).and_then(normalize_element) {
            return Some(two);
        }
    }
    normalize_element(&(first as char).to_string())
}

fn parse_serial(field: &str, line_no: usize) -> Result<i64> {
    field.trim().parse::<i64>().map_err(|_| Error::Parse {
        line: line_no,
        msg: format!("bad serial {field:?}"),
    })
}

fn col(line: &str, a: usize, b: usize) -> &str {
    let b = b.min(line.len());
    if a >= b {
        return "";
    }
    line.get(a..b).unwrap_or("")
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn atom_line(serial: i64, name: &str, res: &str, seq: i32, xyz: [f64; 3], el: &str) -> String {
        format!(
            "ATOM  {serial:>5} {name:<4} {res:>3} A{seq:>4}    {:>8.3}{:>8.3}{:>8.3}  1.00  0.00          {el:>2}",
            xyz[0], xyz[1], xyz[2]
        )
    }

    fn opts(mode: BondMode) -> StructureOptions {
        StructureOptions { bond_mode: mode, ..Default::default() }
    }

    #[test]
    fn ethane_skeleton_inferred() {
        let text = [
            atom_line(1, " C1", "ETH", 1, [0.0, 0.0, 0.0], "C"),
            atom_line(2, " C2", "ETH", 1, [1.54, 0.0, 0.0], "C"),
        ]
        .join("\n");
        let g = parse_structure(&text, &opts(BondMode::Infer)).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (2, 1));
        assert_eq!(g.atoms()[1].element, "C");
        assert_eq!(g.atoms()[1].atom_name, "C2");
    }

    #[test]
    fn single_atom_any_mode() {
        let text = format!("{}\nCONECT    1\n", atom_line(1, " C1", "MET", 1, [0.0; 3], "C"));
        for mode in [BondMode::RecordsOnly, BondMode::Infer, BondMode::RecordsThenInfer] {
            let g = parse_structure(&text, &opts(mode)).unwrap();
            assert_eq!((g.node_count(), g.edge_count()), (1, 0));
        }
    }

    #[test]
    fn records_only_requires_conect() {
        let text = atom_line(1, " C1", "ETH", 1, [0.0; 3], "C");
        assert!(matches!(
            parse_structure(&text, &opts(BondMode::RecordsOnly)),
            Err(Error::NoConnectivity(_))
        ));
    }

    #[test]
    fn no_atoms_is_error() {
        assert!(matches!(parse_structure("HEADER x\nEND\n", &opts(BondMode::Infer)), Err(Error::NoAtoms(_))));
    }

    #[test]
    fn conect_union_and_dedup() {
        let text = [
            atom_line(10, " C1", "LIG", 1, [0.0, 0.0, 0.0], "C"),
            atom_line(11, " C2", "LIG", 1, [1.5, 0.0, 0.0], "C"),
            atom_line(12, " O1", "LIG", 1, [9.0, 0.0, 0.0], "O"),
            "CONECT   10   11   12".to_owned(),
            "CONECT   11   10".to_owned(),
        ]
        .join("\n");
        let rec = parse_structure(&text, &opts(BondMode::RecordsOnly)).unwrap();
        assert_eq!(rec.edges().collect::<Vec<_>>(), vec![(0, 1), (0, 2)]);
        let inf = parse_structure(&text, &opts(BondMode::Infer)).unwrap();
        assert_eq!(inf.edges().collect::<Vec<_>>(), vec![(0, 1)]);
        let both = parse_structure(&text, &opts(BondMode::RecordsThenInfer)).unwrap();
        assert_eq!(both.edge_count(), 2);
    }

    #[test]
    fn alt_locations_keep_first() {
        let mut a = atom_line(1, " CA", "SER", 5, [0.0; 3], "C");
        let mut b = atom_line(2, " CA", "SER", 5, [0.3, 0.0, 0.0], "C");
        a.replace_range(16..17, "A");
        b.replace_range(16..17, "B");
        let g = parse_structure(&[a, b].join("\n"), &opts(BondMode::Infer)).unwrap();
        assert_eq!(g.node_count(), 1);
        assert_eq!(g.atoms()[0].position, [0.0; 3]);
    }

    #[test]
    fn strip_hydrogens() {
        let text = [
            atom_line(1, " C1", "MET", 1, [0.0; 3], "C"),
            atom_line(2, " H1", "MET", 1, [1.09, 0.0, 0.0], "H"),
        ]
        .join("\n");
        let keep = parse_structure(&text, &opts(BondMode::Infer)).unwrap();
        assert_eq!((keep.node_count(), keep.edge_count()), (2, 1));
        let strip = parse_structure(
            &text,
            &StructureOptions { strip_hydrogens: true, ..opts(BondMode::Infer) },
        )
        .unwrap();
        assert_eq!((strip.node_count(), strip.edge_count()), (1, 0));
    }

    #[test]
    fn only_first_model() {
        let text = [
            "MODEL        1".to_owned(),
            atom_line(1, " C1", "MET", 1, [0.0; 3], "C"),
            "ENDMDL".to_owned(),
            "MODEL        2".to_owned(),
            atom_line(1, " C1", "MET", 1, [0.0; 3], "C"),
            atom_line(2, " C2", "MET", 1, [1.0, 0.0, 0.0], "C"),
            "ENDMDL".to_owned(),
        ]
        .join("\n");
        assert_eq!(parse_structure(&text, &opts(BondMode::Infer)).unwrap().node_count(), 1);
    }

    #[test]
    fn element_fallback_from_name() {
        let mut line = atom_line(1, " CA", "GLY", 1, [0.0; 3], "C");
        line.truncate(66);
        let g = parse_structure(&line, &opts(BondMode::Infer)).unwrap();
        assert_eq!(g.atoms()[0].element, "C");
        let mut het = format!(
            "HETATM{:>5} {:<4} {:>3} A{:>4}    {:>8.3}{:>8.3}{:>8.3}",
            2, "MG", "MG", 400, 0.0, 0.0, 0.0
        );
        het.push_str("  1.00  0.00");
        let g = parse_structure(&het, &opts(BondMode::Infer)).unwrap();
        assert_eq!(g.atoms()[0].element, "Mg");
    }

    #[test]
    fn unknown_element_sentinel() {
        let line = atom_line(1, " Q1", "UNK", 1, [0.0; 3], "Qq");
        let g = parse_structure(&line, &opts(BondMode::Infer)).unwrap();
        assert_eq!(g.atoms()[0].element, "X");
    }

    #[test]
    fn truncated_record_rejected() {
        assert!(matches!(
            parse_structure("ATOM      1  CA  GLY A   1", &opts(BondMode::Infer)),
            Err(Error::Parse { line: 1, .. })
        ));
    }
}
