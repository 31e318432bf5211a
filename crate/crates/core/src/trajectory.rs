//! Exact attractor detection for deterministic runs.
//!
//! Each visited configuration is fingerprinted into a map; a fingerprint
//! hit is confirmed by full-state comparison, so collisions only cost time.
//! When stored history would exceed the memory cap the run is redone with
//! Brent's two-pointer scheme, which keeps O(1) configurations.

use std::collections::HashMap;
use std::fmt;

use crate::automaton::{stimulate, step_into, Configuration, ExcitationRule, Restimulation, StimRng, StimulationSpec, Trigger};
use crate::error::{Error, Result};
use crate::graph::MolecularGraph;

/// How a run ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    /// All nodes resting.
    Absorbing,
    LimitCycle,
    /// No repeat within the given number of steps.
    BudgetExhausted(u64),
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Termination::Absorbing => f.write_str("absorbing"),
            Termination::LimitCycle => f.write_str("limit-cycle"),
            Termination::BudgetExhausted(_) => f.write_str("budget-exhausted"),
        }
    }
}

/// Outcome of a run.
///
/// `transient_p` is the index of the first configuration that belongs to
/// the attractor, `cycle_c` its period (1 for the absorbing state). On
/// budget exhaustion `transient_p` is the step budget and `cycle_c = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryResult {
    pub transient_p: u64,
    pub cycle_c: u64,
    /// Mean excited count over one period, rounded.
    pub excitation_e: u64,
    /// Excited count at each step from the start, possibly truncated.
    pub series: Vec<u32>,
    pub termination: Termination,
}

/// 128-bit keyed hash of a configuration's bit planes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Fingerprinter {
    keys: [u64; 2],
    mask: u128,
}

impl Fingerprinter {
    pub fn new(seed: u64) -> Self {
        Self { keys: [splitmix64(seed), splitmix64(seed ^ 0xA076_1D64_78BD_642F)], mask: u128::MAX }
    }

    /// Keeps only the low `bits` bits, forcing collisions.
    pub fn truncated(seed: u64, bits: u32) -> Self {
        let mask = if bits >= 128 { u128::MAX } else { (1u128 << bits) - 1 };
        Self { mask, ..Self::new(seed) }
    }

    pub fn fingerprint(&self, cfg: &Configuration) -> u128 {
        let (e, r) = cfg.planes();
        let mut a = self.keys[0] ^ cfg.len() as u64;
        let mut b = self.keys[1].rotate_left(17) ^ (cfg.len() as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        for (&x, &y) in e.iter().zip(r) {
            a = (a ^ x).wrapping_mul(0xFF51_AFD7_ED55_8CCD).rotate_left(29) ^ y;
            b = (b ^ y.rotate_left(7)).wrapping_mul(0xC4CE_B9FE_1A85_EC53).rotate_left(31) ^ x;
        }
        let hi = splitmix64(a ^ b.rotate_left(13));
        let lo = splitmix64(b ^ a.rotate_left(41));
        (((hi as u128) << 64) | lo as u128) & self.mask
    }
}

impl Default for Fingerprinter {
    fn default() -> Self {
        Self::new(0x5EED_F1A6)
    }
}

pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOptions {
    pub max_steps: u64,
    /// Memory cap for stored history before falling back to Brent.
    pub history_limit_bytes: usize,
    /// Keep at most this many series entries.
    pub series_limit: Option<usize>,
    pub fingerprinter: Fingerprinter,
}

impl RunOptions {
    /// `max_steps = 100 * N`, 256 MiB history.
    pub fn for_graph(g: &MolecularGraph) -> Self {
        Self::with_max_steps(100 * g.node_count().max(1) as u64)
    }

    pub fn with_max_steps(max_steps: u64) -> Self {
        Self { max_steps, history_limit_bytes: 256 << 20, series_limit: None, fingerprinter: Fingerprinter::default() }
    }
}

/// Evolves `cfg0` until the absorbing state, a repeated configuration or
/// `opts.max_steps` steps.
pub fn run_to_attractor(
    g: &MolecularGraph,
    rule: ExcitationRule,
    cfg0: &Configuration,
    opts: &RunOptions,
) -> Result<TrajectoryResult> {
    run_to_attractor_observed(g, rule, cfg0, opts, &mut |_| {})
}

/// As [`run_to_attractor`], calling `observer` once per visited
/// configuration in step order.
pub fn run_to_attractor_observed(
    g: &MolecularGraph,
    rule: ExcitationRule,
    cfg0: &Configuration,
    opts: &RunOptions,
    observer: &mut dyn FnMut(&Configuration),
) -> Result<TrajectoryResult> {
    let mut series = Vec::new();
    let limit = opts.series_limit.unwrap_or(usize::MAX);
    let d = detect(g, rule, cfg0, opts.max_steps, opts, &mut |c| {
        if series.len() < limit {
            series.push(c.excited_count() as u32);
        }
        observer(c);
    })?;
    Ok(d.into_result(series))
}

struct Detection {
    p: u64,
    c: u64,
    e: u64,
    termination: Termination,
    /// Configuration at the step where detection concluded.
    end: Configuration,
}

impl Detection {
    fn into_result(self, series: Vec<u32>) -> TrajectoryResult {
        TrajectoryResult {
            transient_p: self.p,
            cycle_c: self.c,
            excitation_e: self.e,
            series,
            termination: self.termination,
        }
    }
}

fn check_inputs(g: &MolecularGraph, cfg: &Configuration, max_steps: u64) -> Result<()> {
    if cfg.len() != g.node_count() {
        return Err(Error::LengthMismatch { expected: g.node_count(), actual: cfg.len() });
    }
    if max_steps == 0 {
        return Err(Error::Invalid("max_steps must be at least 1".into()));
    }
    Ok(())
}

// Indices are relative to `start`.
fn detect(
    g: &MolecularGraph,
    rule: ExcitationRule,
    start: &Configuration,
    max_steps: u64,
    opts: &RunOptions,
    observer: &mut dyn FnMut(&Configuration),
) -> Result<Detection> {
    check_inputs(g, start, max_steps)?;
    let bytes_per_cfg = 2 * start.len().div_ceil(64) * 8 + std::mem::size_of::<Configuration>() + 32;
    let max_history = (opts.history_limit_bytes / bytes_per_cfg).max(1);

    let mut map: HashMap<u128, Vec<u32>> = HashMap::new();
    let mut history: Vec<Configuration> = Vec::new();
    let mut cur = start.clone();
    let mut next = start.clone();
    let mut t = 0u64;
    loop {
        observer(&cur);
        if cur.is_all_resting() {
            return Ok(certify(g, rule, t, 1, cur));
        }
        let fp = opts.fingerprinter.fingerprint(&cur);
        if let Some(hits) = map.get(&fp) {
            if let Some(&i) = hits.iter().find(|&&i| history[i as usize].same_states(&cur)) {
                let earlier = history.swap_remove(i as usize);
                return Ok(certify(g, rule, i as u64, t - i as u64, earlier).with_end(cur));
            }
        }
        if t == max_steps {
            return Ok(Detection { p: max_steps, c: 0, e: 0, termination: Termination::BudgetExhausted(max_steps), end: cur });
        }
        if history.len() >= max_history {
            log::info!("history cap reached at step {t}; switching to two-pointer detection");
            drop(history);
            drop(map);
            return brent(g, rule, start, max_steps, t + 1, observer);
        }
        map.entry(fp).or_default().push(history.len() as u32);
        history.push(cur.clone());
        step_into(g, rule, &cur, &mut next)?;
        std::mem::swap(&mut cur, &mut next);
        t += 1;
    }
}

impl Detection {
    fn with_end(mut self, end: Configuration) -> Self {
        self.end = end;
        self
    }
}

/// Replays one period from the configuration at step `p`, asserting it
/// returns to itself, and measures the mean excitation.
fn certify(g: &MolecularGraph, rule: ExcitationRule, p: u64, c: u64, at_p: Configuration) -> Detection {
    let mut cur = at_p.clone();
    let mut next = at_p.clone();
    let mut excited_sum = 0u64;
    for _ in 0..c {
        excited_sum += cur.excited_count() as u64;
        step_into(g, rule, &cur, &mut next).expect("lengths already checked");
        std::mem::swap(&mut cur, &mut next);
    }
    assert!(cur.same_states(&at_p), "cycle certification failed: p={p} c={c}");
    let absorbing = at_p.is_all_resting();
    debug_assert!(!absorbing || c == 1);
    let e = (excited_sum as f64 / c as f64).round() as u64;
    let end = if absorbing { at_p } else { cur };
    Detection {
        p,
        c,
        e,
        termination: if absorbing { Termination::Absorbing } else { Termination::LimitCycle },
        end,
    }
}

// Brent's algorithm from `start`. `observed` configurations were already
// reported to the observer; the final walk reports the rest.
fn brent(
    g: &MolecularGraph,
    rule: ExcitationRule,
    start: &Configuration,
    max_steps: u64,
    observed: u64,
    observer: &mut dyn FnMut(&Configuration),
) -> Result<Detection> {
    let advance = |c: &mut Configuration, scratch: &mut Configuration| -> Result<()> {
        step_into(g, rule, c, scratch)?;
        std::mem::swap(c, scratch);
        Ok(())
    };
    let mut scratch = start.clone();
    let hare_bound = max_steps.saturating_mul(4).saturating_add(4);

    let mut power = 1u64;
    let mut lam = 1u64;
    let mut tortoise = start.clone();
    let mut hare = start.clone();
    advance(&mut hare, &mut scratch)?;
    let mut hare_idx = 1u64;
    let mut found = true;
    while !tortoise.same_states(&hare) {
        if power == lam {
            tortoise = hare.clone();
            power *= 2;
            lam = 0;
        }
        advance(&mut hare, &mut scratch)?;
        hare_idx += 1;
        lam += 1;
        if hare_idx > hare_bound {
            found = false;
            break;
        }
    }

    let mut mu = 0u64;
    if found {
        tortoise = start.clone();
        hare = start.clone();
        for _ in 0..lam {
            advance(&mut hare, &mut scratch)?;
        }
        while !tortoise.same_states(&hare) {
            advance(&mut tortoise, &mut scratch)?;
            advance(&mut hare, &mut scratch)?;
            mu += 1;
            if mu + lam > max_steps {
                found = false;
                break;
            }
        }
    }
    if found && mu + lam > max_steps {
        found = false;
    }
    // the absorbing state is reported at its first index, not at its repeat
    let last = if !found {
        max_steps
    } else if found && is_absorbing_at(g, rule, start, mu)? {
        mu
    } else {
        mu + lam
    };

    let mut cur = start.clone();
    let mut at_mu = None;
    for t in 0..=last {
        if t >= observed {
            observer(&cur);
        }
        if found && t == mu {
            at_mu = Some(cur.clone());
        }
        if t < last {
            advance(&mut cur, &mut scratch)?;
        }
    }
    if !found {
        return Ok(Detection { p: max_steps, c: 0, e: 0, termination: Termination::BudgetExhausted(max_steps), end: cur });
    }
    Ok(certify(g, rule, mu, lam, at_mu.expect("mu visited")).with_end(cur))
}

fn is_absorbing_at(g: &MolecularGraph, rule: ExcitationRule, start: &Configuration, idx: u64) -> Result<bool> {
    let mut cur = start.clone();
    let mut scratch = start.clone();
    for _ in 0..idx {
        step_into(g, rule, &cur, &mut scratch)?;
        std::mem::swap(&mut cur, &mut scratch);
    }
    Ok(cur.is_all_resting())
}

/// Result of a run with scheduled re-stimulation.
#[derive(Clone, Debug, PartialEq)]
pub struct RestimulatedRun {
    /// Attractor of the final segment; `transient_p` counts from the start
    /// of the whole run.
    pub result: TrajectoryResult,
    /// Excited count at every step; stimulation steps hold the
    /// post-stimulation count.
    pub series: Vec<u32>,
    /// Steps at which a re-stimulation was applied.
    pub stimulation_steps: Vec<u64>,
    pub warnings: Vec<String>,
}

/// Builds the initial configuration from `spec` and runs its schedule.
pub fn run_spec_with_restimulation(
    g: &MolecularGraph,
    rule: ExcitationRule,
    spec: &StimulationSpec,
    opts: &RunOptions,
) -> Result<RestimulatedRun> {
    let (cfg0, mut rng) = spec.initial(g.node_count())?;
    run_with_restimulation(g, rule, &cfg0, &spec.restimulation, &mut rng, opts)
}

/// Runs from `cfg0`, applying each scheduled stimulation in order.
/// Cycle detection restarts after every stimulation.
pub fn run_with_restimulation(
    g: &MolecularGraph,
    rule: ExcitationRule,
    cfg0: &Configuration,
    schedule: &[Restimulation],
    rng: &mut StimRng,
    opts: &RunOptions,
) -> Result<RestimulatedRun> {
    run_with_restimulation_observed(g, rule, cfg0, schedule, rng, opts, &mut |_| {})
}

/// As [`run_with_restimulation`], calling `observer` for every visited
/// configuration. A stimulation step is reported twice: before and after
/// the stimulation.
pub fn run_with_restimulation_observed(
    g: &MolecularGraph,
    rule: ExcitationRule,
    cfg0: &Configuration,
    schedule: &[Restimulation],
    rng: &mut StimRng,
    opts: &RunOptions,
    observer: &mut dyn FnMut(&Configuration),
) -> Result<RestimulatedRun> {
    check_inputs(g, cfg0, opts.max_steps)?;
    let mut last_at: Option<u64> = None;
    for r in schedule {
        r.scenario.validate(g.node_count())?;
        if let Trigger::AtStep(t) = r.trigger {
            if last_at.is_some_and(|prev| t <= prev) {
                return Err(Error::InvalidSchedule(format!("step trigger {t} is not after {}", last_at.unwrap())));
            }
            last_at = Some(t);
        }
    }

    let limit = opts.series_limit.unwrap_or(usize::MAX);
    let mut series: Vec<u32> = Vec::new();
    let mut stimulation_steps = Vec::new();
    let mut warnings = Vec::new();
    let mut cur = cfg0.clone();
    let mut scratch = cfg0.clone();
    let mut t = 0u64;
    let mut pushed_current = false;

    for (k, r) in schedule.iter().enumerate() {
        match r.trigger {
            Trigger::AtStep(at) => {
                if at > opts.max_steps {
                    let w = format!("trigger at step {at} is beyond max_steps {}; ignored", opts.max_steps);
                    log::warn!("{w}");
                    warnings.push(w);
                    continue;
                }
                if at < t {
                    let w = format!("trigger at step {at} already passed (now at {t}); ignored");
                    log::warn!("{w}");
                    warnings.push(w);
                    continue;
                }
                if !pushed_current {
                    series.push(cur.excited_count() as u32);
                    observer(&cur);
                }
                while t < at {
                    step_into(g, rule, &cur, &mut scratch)?;
                    std::mem::swap(&mut cur, &mut scratch);
                    t += 1;
                    series.push(cur.excited_count() as u32);
                    observer(&cur);
                }
            }
            Trigger::OnCycleEntry => {
                let skip = usize::from(pushed_current);
                let mut seg = Vec::new();
                let d = detect(g, rule, &cur, opts.max_steps - t, opts, &mut |c| {
                    if seg.len() >= skip {
                        observer(c);
                    }
                    seg.push(c.excited_count() as u32)
                })?;
                series.extend_from_slice(&seg[skip..]);
                if let Termination::BudgetExhausted(_) = d.termination {
                    for rest in &schedule[k..] {
                        warnings.push(format!("budget exhausted before trigger {:?}", rest.trigger));
                    }
                    let result = TrajectoryResult {
                        transient_p: opts.max_steps,
                        cycle_c: 0,
                        excitation_e: 0,
                        series: truncate(&series, limit),
                        termination: Termination::BudgetExhausted(opts.max_steps),
                    };
                    return Ok(RestimulatedRun { result, series, stimulation_steps, warnings });
                }
                t += seg.len() as u64 - 1;
                cur = d.end;
            }
        }
        cur = stimulate(&cur, &r.scenario, rng)?;
        cur.step = cfg0.step + t;
        *series.last_mut().expect("series holds the current step") = cur.excited_count() as u32;
        observer(&cur);
        pushed_current = true;
        stimulation_steps.push(t);
    }

    let skip = usize::from(pushed_current);
    let mut seg = Vec::new();
    let d = detect(g, rule, &cur, opts.max_steps - t, opts, &mut |c| {
        if seg.len() >= skip {
            observer(c);
        }
        seg.push(c.excited_count() as u32)
    })?;
    series.extend_from_slice(&seg[skip..]);
    let result = TrajectoryResult {
        transient_p: d.p + t,
        cycle_c: d.c,
        excitation_e: d.e,
        series: truncate(&series, limit),
        termination: match d.termination {
            Termination::BudgetExhausted(_) => Termination::BudgetExhausted(opts.max_steps),
            other => other,
        },
    };
    Ok(RestimulatedRun { result, series, stimulation_steps, warnings })
}

fn truncate(series: &[u32], limit: usize) -> Vec<u32> {
    series[..series.len().min(limit)].to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::{stim_rng, Scenario};

    fn cfg(s: &str) -> Configuration {
        Configuration::parse_states(s).unwrap()
    }

    fn run(g: &MolecularGraph, rule: ExcitationRule, c: &Configuration) -> TrajectoryResult {
        run_to_attractor(g, rule, c, &RunOptions::for_graph(g)).unwrap()
    }

    #[test]
    fn hexagon_wave_rotates() {
        let r = run(&MolecularGraph::cycle(6), ExcitationRule::A0, &cfg("+oooo-"));
        assert_eq!((r.transient_p, r.cycle_c, r.excitation_e), (0, 6, 1));
        assert_eq!(r.termination, Termination::LimitCycle);
        assert_eq!(r.series, vec![1; 7]);
    }

    #[test]
    fn all_resting_is_absorbing_immediately() {
        let r = run(&MolecularGraph::cycle(5), ExcitationRule::A1, &cfg("ooooo"));
        assert_eq!((r.transient_p, r.cycle_c, r.excitation_e), (0, 1, 0));
        assert_eq!(r.termination, Termination::Absorbing);
    }

    #[test]
    fn isolated_node() {
        let r = run(&MolecularGraph::path(1), ExcitationRule::A0, &cfg("+"));
        assert_eq!((r.transient_p, r.cycle_c), (2, 1));
        assert_eq!(r.series, vec![1, 0, 0]);
    }

    #[test]
    fn hexagon_lone_excitation_annihilates() {
        let r = run(&MolecularGraph::cycle(6), ExcitationRule::A0, &cfg("+ooooo"));
        assert_eq!((r.transient_p, r.cycle_c), (5, 1));
        assert_eq!(r.series, vec![1, 2, 2, 1, 0, 0]);
    }

    #[test]
    fn budget_exhaustion_keeps_partial_series() {
        let g = MolecularGraph::cycle(8);
        let r = run_to_attractor(&g, ExcitationRule::A0, &cfg("+oooooo-"), &RunOptions::with_max_steps(3));
        let r = r.unwrap();
        assert_eq!(r.termination, Termination::BudgetExhausted(3));
        assert_eq!(r.series.len(), 4);
        assert_eq!(r.cycle_c, 0);
    }

    #[test]
    fn zero_budget_rejected() {
        let g = MolecularGraph::path(2);
        assert!(run_to_attractor(&g, ExcitationRule::A0, &cfg("+o"), &RunOptions::with_max_steps(0)).is_err());
    }

    #[test]
    fn brent_fallback_matches_history() {
        let g = MolecularGraph::cycle(9);
        let c0 = cfg("o+-oo+-oo");
        let full = run(&g, ExcitationRule::A0, &c0);
        let opts = RunOptions { history_limit_bytes: 1, ..RunOptions::for_graph(&g) };
        let tight = run_to_attractor(&g, ExcitationRule::A0, &c0, &opts).unwrap();
        assert_eq!(full, tight);
        let absorbing = cfg("+oooooooo");
        assert_eq!(run(&g, ExcitationRule::A0, &absorbing), run_to_attractor(&g, ExcitationRule::A0, &absorbing, &opts).unwrap());
    }

    #[test]
    fn truncated_fingerprints_still_exact() {
        let g = MolecularGraph::cycle(10);
        let c0 = cfg("+-oo+oo-oo");
        let a = run(&g, ExcitationRule::A0, &c0);
        let opts = RunOptions { fingerprinter: Fingerprinter::truncated(1, 1), ..RunOptions::for_graph(&g) };
        assert_eq!(a, run_to_attractor(&g, ExcitationRule::A0, &c0, &opts).unwrap());
    }

    #[test]
    fn series_limit() {
        let g = MolecularGraph::path(6);
        let opts = RunOptions { series_limit: Some(2), ..RunOptions::for_graph(&g) };
        let r = run_to_attractor(&g, ExcitationRule::A0, &cfg("+ooooo"), &opts).unwrap();
        assert_eq!(r.series, vec![1, 1]);
        assert_eq!(r.transient_p, 7);
    }

    #[test]
    fn no_schedule_equals_plain_run() {
        let g = MolecularGraph::cycle(12);
        let spec = StimulationSpec::new(Scenario::PlusMinus(0.5), 11);
        let (c0, _) = spec.initial(12).unwrap();
        let plain = run(&g, ExcitationRule::A0, &c0);
        let re = run_spec_with_restimulation(&g, ExcitationRule::A0, &spec, &RunOptions::for_graph(&g)).unwrap();
        assert_eq!(re.result, plain);
        assert_eq!(re.series, plain.series);
        assert!(re.stimulation_steps.is_empty());
    }

    #[test]
    fn restimulation_at_step_after_absorption() {
        let g = MolecularGraph::path(20);
        let mut spec = StimulationSpec::new(Scenario::Single(0), 5);
        spec.restimulation.push(Restimulation { trigger: Trigger::AtStep(30), scenario: Scenario::Single(10) });
        let re = run_spec_with_restimulation(&g, ExcitationRule::A0, &spec, &RunOptions::for_graph(&g)).unwrap();
        assert_eq!(re.stimulation_steps, vec![30]);
        assert_eq!(re.series[29], 0);
        assert_eq!(re.series[30], 1);
        // node 10 on P20: waves reach node 0 at +10 and node 19 at +9, then relax
        assert_eq!(re.result.transient_p, 30 + 12);
        assert_eq!(re.series.len() as u64, re.result.transient_p + 1);
    }

    #[test]
    fn restimulation_on_cycle_entry() {
        let g = MolecularGraph::cycle(8);
        let c0 = cfg("+-oooooo");
        let schedule = [Restimulation { trigger: Trigger::OnCycleEntry, scenario: Scenario::Single(4) }];
        let re = run_with_restimulation(&g, ExcitationRule::A0, &c0, &schedule, &mut stim_rng(0), &RunOptions::for_graph(&g)).unwrap();
        // cycle certified at step 8; wave head at node 0 again
        assert_eq!(re.stimulation_steps, vec![8]);
        assert_eq!(re.series[8], 2);
        assert_eq!(re.series.len() as u64, re.result.transient_p + re.result.cycle_c + 1);
    }

    #[test]
    fn observer_sees_every_step_of_a_restimulated_run() {
        let g = MolecularGraph::path(20);
        let mut spec = StimulationSpec::new(Scenario::Single(0), 5);
        spec.restimulation.push(Restimulation { trigger: Trigger::AtStep(30), scenario: Scenario::Single(10) });
        spec.restimulation.push(Restimulation { trigger: Trigger::OnCycleEntry, scenario: Scenario::Single(3) });
        let (c0, mut rng) = spec.initial(20).unwrap();
        let mut seen: Vec<Configuration> = Vec::new();
        let re = run_with_restimulation_observed(&g, ExcitationRule::A0, &c0, &spec.restimulation, &mut rng, &RunOptions::for_graph(&g), &mut |c| {
            match seen.last_mut() {
                Some(last) if last.step == c.step => *last = c.clone(),
                _ => seen.push(c.clone()),
            }
        })
        .unwrap();
        assert_eq!(seen.iter().map(|c| c.step).collect::<Vec<_>>(), (0..seen.len() as u64).collect::<Vec<_>>());
        assert_eq!(seen.iter().map(|c| c.excited_count() as u32).collect::<Vec<_>>(), re.series);
    }

    #[test]
    fn triggers_beyond_budget_warn() {
        let g = MolecularGraph::path(3);
        let schedule = [Restimulation { trigger: Trigger::AtStep(50), scenario: Scenario::Single(0) }];
        let re = run_with_restimulation(&g, ExcitationRule::A0, &cfg("+oo"), &schedule, &mut stim_rng(0), &RunOptions::with_max_steps(10)).unwrap();
        assert_eq!(re.warnings.len(), 1);
        assert!(re.stimulation_steps.is_empty());
    }

    #[test]
    fn decreasing_triggers_rejected() {
        let g = MolecularGraph::path(3);
        let schedule = [
            Restimulation { trigger: Trigger::AtStep(5), scenario: Scenario::Single(0) },
            Restimulation { trigger: Trigger::AtStep(5), scenario: Scenario::Single(0) },
        ];
        let err = run_with_restimulation(&g, ExcitationRule::A0, &cfg("+oo"), &schedule, &mut stim_rng(0), &RunOptions::for_graph(&g));
        assert!(matches!(err, Err(Error::InvalidSchedule(_))));
    }

    #[test]
    fn fingerprint_depends_only_on_states() {
        let f = Fingerprinter::new(3);
        let a = cfg("+-o+");
        let mut b = a.clone();
        b.step = 77;
        assert_eq!(f.fingerprint(&a), f.fingerprint(&b));
        assert_ne!(f.fingerprint(&a), f.fingerprint(&cfg("+-oo")));
        assert_ne!(f.fingerprint(&a), Fingerprinter::new(4).fingerprint(&a));
    }
}
