//! Three-state synchronous automaton: states, rules, update kernel and
//! stimulation operators.
//!
//! A [`Configuration`] stores two bit planes (excited, refractory), so each
//! node costs two bits and resting is the absence of both.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::MolecularGraph;
use crate::par::{self, Exec};

/// Generator used for every stimulation; ChaCha output is
/// platform-independent.
pub type StimRng = ChaCha8Rng;

/// Seeds a [`StimRng`].
pub fn stim_rng(seed: u64) -> StimRng {
    StimRng::seed_from_u64(seed)
}

/// State of a single node; ordered resting < excited < refractory.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeState {
    Resting,
    Excited,
    Refractory,
}

impl NodeState {
    pub fn to_char(self) -> char {
        match self {
            NodeState::Resting => 'o',
            NodeState::Excited => '+',
            NodeState::Refractory => '-',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'o' => Some(NodeState::Resting),
            '+' => Some(NodeState::Excited),
            '-' => Some(NodeState::Refractory),
            _ => None,
        }
    }
}

/// Excitation interval `[lo, hi]` on the number of excited neighbours.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ExcitationRule {
    lo: u32,
    hi: Option<u32>,
}

impl ExcitationRule {
    /// At least one excited neighbour.
    pub const A0: Self = Self { lo: 1, hi: None };
    /// Exactly one excited neighbour.
    pub const A1: Self = Self { lo: 1, hi: Some(1) };

    /// `hi = None` means unbounded.
    pub fn new(lo: u32, hi: Option<u32>) -> Result<Self> {
        if lo < 1 {
            return Err(Error::InvalidRule(format!("lower bound {lo} must be at least 1")));
        }
        if let Some(h) = hi {
            if h < lo {
                return Err(Error::InvalidRule(format!("upper bound {h} below lower bound {lo}")));
            }
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> u32 {
        self.lo
    }

    pub fn hi(&self) -> Option<u32> {
        self.hi
    }

    #[inline]
    pub fn admits(&self, sigma: u32) -> bool {
        sigma >= self.lo && self.hi.is_none_or(|h| sigma <= h)
    }
}

impl fmt::Display for ExcitationRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.lo, self.hi) {
            (1, None) => f.write_str("a0"),
            (1, Some(1)) => f.write_str("a1"),
            (lo, None) => write!(f, "{lo}:inf"),
            (lo, Some(hi)) => write!(f, "{lo}:{hi}"),
        }
    }
}

impl FromStr for ExcitationRule {
    type Err = Error;

    /// Accepts `a0`, `a1`, `lo:hi`, `lo:` and `lo:inf`.
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "a0" => return Ok(Self::A0),
            "a1" => return Ok(Self::A1),
            _ => {}
        }
        let (lo, hi) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidRule(format!("expected a0, a1 or lo:hi, got {s:?}")))?;
        let lo: u32 = lo.trim().parse().map_err(|_| Error::InvalidRule(format!("bad lower bound in {s:?}")))?;
        let hi = match hi.trim() {
            "" | "inf" => None,
            h => Some(h.parse().map_err(|_| Error::InvalidRule(format!("bad upper bound in {s:?}")))?),
        };
        Self::new(lo, hi)
    }
}

/// Full state vector at one time step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Configuration {
    len: usize,
    excited: Vec<u64>,
    refractory: Vec<u64>,
    /// Time index; one step corresponds to one attosecond of model time.
    pub step: u64,
}

impl Configuration {
    /// All nodes resting at step 0.
    pub fn resting(len: usize) -> Self {
        let words = len.div_ceil(64);
        Self { len, excited: vec![0; words], refractory: vec![0; words], step: 0 }
    }

    pub fn from_states(states: &[NodeState]) -> Self {
        let mut cfg = Self::resting(states.len());
        for (i, &s) in states.iter().enumerate() {
            cfg.set(i, s);
        }
        cfg
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> NodeState {
        assert!(i < self.len, "node {i} out of range");
        let (w, m) = (i >> 6, 1u64 << (i & 63));
        if self.excited[w] & m != 0 {
            NodeState::Excited
        } else if self.refractory[w] & m != 0 {
            NodeState::Refractory
        } else {
            NodeState::Resting
        }
    }

    #[inline]
    pub fn set(&mut self, i: usize, s: NodeState) {
        assert!(i < self.len, "node {i} out of range");
        let (w, m) = (i >> 6, 1u64 << (i & 63));
        self.excited[w] &= !m;
        self.refractory[w] &= !m;
        match s {
            NodeState::Resting => {}
            NodeState::Excited => self.excited[w] |= m,
            NodeState::Refractory => self.refractory[w] |= m,
        }
    }

    pub fn states(&self) -> Vec<NodeState> {
        (0..self.len).map(|i| self.get(i)).collect()
    }

    /// True when both configurations hold the same states, whatever
    /// their step index.
    pub fn same_states(&self, other: &Self) -> bool {
        self.len == other.len && self.excited == other.excited && self.refractory == other.refractory
    }

    pub fn is_all_resting(&self) -> bool {
        self.excited.iter().chain(&self.refractory).all(|&w| w == 0)
    }

    pub fn excited_count(&self) -> usize {
        self.excited.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// `(resting, excited, refractory)`.
    pub fn census(&self) -> (usize, usize, usize) {
        let e = self.excited_count();
        let r: usize = self.refractory.iter().map(|w| w.count_ones() as usize).sum();
        (self.len - e - r, e, r)
    }

    /// Excited and refractory planes, 64 nodes per word.
    pub fn planes(&self) -> (&[u64], &[u64]) {
        (&self.excited, &self.refractory)
    }

    /// One character per node from `{o,+,-}`, without newline.
    pub fn to_state_string(&self) -> String {
        (0..self.len).map(|i| self.get(i).to_char()).collect()
    }

    pub fn parse_states(s: &str) -> Result<Self> {
        let states = s
            .trim_end_matches('\n')
            .chars()
            .enumerate()
            .map(|(i, c)| {
                NodeState::from_char(c).ok_or_else(|| Error::Parse { line: 1, msg: format!("bad state {c:?} at node {i}") })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_states(&states))
    }
}

/// Which nodes a stimulation touches.
#[derive(Clone, Debug, PartialEq)]
pub enum Scenario {
    /// Excite one node.
    Single(usize),
    /// Excite `floor(rho * N)` distinct random nodes.
    Plus(f64),
    /// Sample `floor(rho * N)` nodes; each becomes excited or refractory
    /// with probability 1/2.
    PlusMinus(f64),
}

impl Scenario {
    pub fn kind(&self) -> &'static str {
        match self {
            Scenario::Single(_) => "single",
            Scenario::Plus(_) => "plus",
            Scenario::PlusMinus(_) => "plus-minus",
        }
    }

    pub fn rho(&self) -> Option<f64> {
        match *self {
            Scenario::Single(_) => None,
            Scenario::Plus(r) | Scenario::PlusMinus(r) => Some(r),
        }
    }

    pub fn validate(&self, nodes: usize) -> Result<()> {
        match *self {
            Scenario::Single(node) if node >= nodes => Err(Error::NodeOutOfRange { node, nodes }),
            Scenario::Single(_) => Ok(()),
            Scenario::Plus(rho) | Scenario::PlusMinus(rho) => sample_size(rho, nodes).map(|_| ()),
        }
    }
}

/// When a scheduled re-stimulation fires.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Trigger {
    AtStep(u64),
    /// The first time a cycle is certified after the previous stimulation.
    OnCycleEntry,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Restimulation {
    pub trigger: Trigger,
    pub scenario: Scenario,
}

/// Initial stimulation plus an optional re-stimulation schedule.
#[derive(Clone, Debug, PartialEq)]
pub struct StimulationSpec {
    pub scenario: Scenario,
    pub seed: u64,
    pub restimulation: Vec<Restimulation>,
}

impl StimulationSpec {
    pub fn new(scenario: Scenario, seed: u64) -> Self {
        Self { scenario, seed, restimulation: Vec::new() }
    }

    /// Applies the initial scenario to an all-resting configuration.
    /// Returns the generator so later stimulations continue the stream.
    pub fn initial(&self, nodes: usize) -> Result<(Configuration, StimRng)> {
        let mut rng = stim_rng(self.seed);
        let cfg = stimulate(&Configuration::resting(nodes), &self.scenario, &mut rng)?;
        Ok((cfg, rng))
    }
}

/// `floor(rho * N)`, with a 1e-9 guard so e.g. `0.29 * 100` gives 29.
pub fn sample_size(rho: f64, nodes: usize) -> Result<usize> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::InvalidRatio { rho });
    }
    let k = ((rho * nodes as f64) + 1e-9).floor() as usize;
    if k == 0 {
        return Err(Error::EmptyStimulation { rho, nodes });
    }
    Ok(k.min(nodes))
}

/// `k` distinct indices from `0..n`, uniformly, by partial Fisher-Yates on
/// 64-bit draws.
pub fn sample_without_replacement<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Vec<usize> {
    assert!(k <= n);
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.random_range(i as u64..n as u64) as usize;
        idx.swap(i, j);
    }
    idx.truncate(k);
    idx
}

/// Overwrites the states of the selected nodes; everything else is kept.
pub fn stimulate<R: Rng + ?Sized>(cfg: &Configuration, scenario: &Scenario, rng: &mut R) -> Result<Configuration> {
    let n = cfg.len();
    scenario.validate(n)?;
    let mut out = cfg.clone();
    match *scenario {
        Scenario::Single(node) => out.set(node, NodeState::Excited),
        Scenario::Plus(rho) => {
            for i in sample_without_replacement(n, sample_size(rho, n)?, rng) {
                out.set(i, NodeState::Excited);
            }
        }
        Scenario::PlusMinus(rho) => {
            for i in sample_without_replacement(n, sample_size(rho, n)?, rng) {
                let s = if rng.random::<bool>() { NodeState::Excited } else { NodeState::Refractory };
                out.set(i, s);
            }
        }
    }
    Ok(out)
}

/// Graphs at least this large are updated in parallel chunks.
pub const PARALLEL_STEP_MIN_NODES: usize = 1 << 15;
const WORDS_PER_TASK: usize = 64;

/// One synchronous update.
pub fn step(g: &MolecularGraph, rule: ExcitationRule, cfg: &Configuration) -> Result<Configuration> {
    let mut out = Configuration::resting(cfg.len());
    step_into(g, rule, cfg, &mut out)?;
    Ok(out)
}

/// One synchronous update of `src` written into `dst`. Picks the parallel
/// kernel for large graphs.
pub fn step_into(g: &MolecularGraph, rule: ExcitationRule, src: &Configuration, dst: &mut Configuration) -> Result<()> {
    let exec = if g.node_count() >= PARALLEL_STEP_MIN_NODES { Exec::default() } else { Exec::Sequential };
    step_into_with(exec, g, rule, src, dst)
}

pub fn step_into_with(
    exec: Exec,
    g: &MolecularGraph,
    rule: ExcitationRule,
    src: &Configuration,
    dst: &mut Configuration,
) -> Result<()> {
    let n = g.node_count();
    if src.len() != n || dst.len() != n {
        let actual = if src.len() != n { src.len() } else { dst.len() };
        return Err(Error::LengthMismatch { expected: n, actual });
    }
    dst.refractory.copy_from_slice(&src.excited);
    dst.step = src.step + 1;
    par::for_each_chunk_mut(exec, &mut dst.excited, WORDS_PER_TASK, |chunk_idx, out| {
        let base = chunk_idx * WORDS_PER_TASK;
        for (k, word) in out.iter_mut().enumerate() {
            *word = next_excited_word(g, rule, src, base + k);
        }
    });
    Ok(())
}

#[inline]
fn next_excited_word(g: &MolecularGraph, rule: ExcitationRule, src: &Configuration, w: usize) -> u64 {
    let valid = if (w + 1) * 64 <= src.len { u64::MAX } else { (1u64 << (src.len & 63)) - 1 };
    let mut resting = !(src.excited[w] | src.refractory[w]) & valid;
    let mut next = 0u64;
    let excited = &src.excited;
    while resting != 0 {
        let b = resting.trailing_zeros();
        resting &= resting - 1;
        let node = w * 64 + b as usize;
        let nbrs = g.neighbors(node);
        let fire = match rule.hi {
            None if rule.lo == 1 => nbrs.iter().any(|&v| is_set(excited, v)),
            None => {
                let mut sigma = 0;
                nbrs.iter().any(|&v| {
                    sigma += is_set(excited, v) as u32;
                    sigma >= rule.lo
                })
            }
            Some(hi) => {
                let mut sigma = 0u32;
                for &v in nbrs {
                    sigma += is_set(excited, v) as u32;
                    if sigma > hi {
                        break;
                    }
                }
                rule.admits(sigma)
            }
        };
        next |= (fire as u64) << b;
    }
    next
}

#[inline(always)]
fn is_set(plane: &[u64], v: u32) -> bool {
    (plane[(v >> 6) as usize] >> (v & 63)) & 1 == 1
}
