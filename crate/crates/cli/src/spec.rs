//! Small argument languages: initial conditions, re-stimulation triggers,
//! ratio lists and bands.

use std::fmt;
use std::str::FromStr;

use factin::automaton::{Restimulation, Scenario, Trigger};

/// Rounds to 12 decimals so `0.1:0.9:0.1` yields exactly 0.3, 0.7, ...
pub fn round_ratio(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

fn parse_ratio(s: &str) -> Result<f64, String> {
    let r: f64 = s.trim().parse().map_err(|_| format!("'{s}' is not a number"))?;
    if !(r > 0.0 && r <= 1.0) {
        return Err(format!("ratio {r} outside (0, 1]"));
    }
    Ok(round_ratio(r))
}

fn parse_scenario(s: &str) -> Result<Scenario, String> {
    let (kind, arg) = s.split_once(':').ok_or_else(|| format!("'{s}': expected <kind>:<value>"))?;
    match kind {
        "single" => arg.parse().map(Scenario::Single).map_err(|_| format!("'{arg}' is not a node id")),
        "plus" => parse_ratio(arg).map(Scenario::Plus),
        "plusminus" | "plus-minus" => parse_ratio(arg).map(Scenario::PlusMinus),
        _ => Err(format!("unknown scenario '{kind}' (single | plus | plusminus)")),
    }
}

fn scenario_text(s: &Scenario) -> String {
    match s {
        Scenario::Single(u) => format!("single:{u}"),
        Scenario::Plus(r) => format!("plus:{r}"),
        Scenario::PlusMinus(r) => format!("plusminus:{r}"),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitSpec {
    Scenario(Scenario),
    Ring { id: usize, phase: usize },
}

impl FromStr for InitSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if let Some(rest) = s.strip_prefix("ring:") {
            let (id, phase) = rest.split_once(':').ok_or_else(|| format!("'{s}': expected ring:<ring-id>:<phase>"))?;
            return Ok(InitSpec::Ring {
                id: id.parse().map_err(|_| format!("'{id}' is not a ring id"))?,
                phase: phase.parse().map_err(|_| format!("'{phase}' is not a phase"))?,
            });
        }
        parse_scenario(s).map(InitSpec::Scenario)
    }
}

impl fmt::Display for InitSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitSpec::Scenario(s) => f.write_str(&scenario_text(s)),
            InitSpec::Ring { id, phase } => write!(f, "ring:{id}:{phase}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RestimSpec(pub Restimulation);

impl FromStr for RestimSpec {
    type Err = String;

    /// `<step>:<scenario>` or `cycle:<scenario>`.
    fn from_str(s: &str) -> Result<Self, String> {
        let (when, what) = s.split_once(':').ok_or_else(|| format!("'{s}': expected <step|cycle>:<scenario>"))?;
        let trigger = match when {
            "cycle" => Trigger::OnCycleEntry,
            t => Trigger::AtStep(t.parse().map_err(|_| format!("'{t}' is neither a step nor 'cycle'"))?),
        };
        Ok(RestimSpec(Restimulation { trigger, scenario: parse_scenario(what)? }))
    }
}

impl fmt::Display for RestimSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0.trigger {
            Trigger::AtStep(t) => write!(f, "{t}:")?,
            Trigger::OnCycleEntry => f.write_str("cycle:")?,
        }
        f.write_str(&scenario_text(&self.0.scenario))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RhoList(pub Vec<f64>);

impl FromStr for RhoList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let list = match parts.as_slice() {
            [start, stop, step] => {
                let num = |x: &str| x.trim().parse::<f64>().map_err(|_| format!("'{x}' is not a number"));
                let (a, b, d) = (num(start)?, num(stop)?, num(step)?);
                if !(d.is_finite() && d > 0.0) || b < a {
                    return Err(format!("'{s}': need start <= stop and step > 0"));
                }
                let count = ((b - a) / d + 1e-9).floor() as usize + 1;
                (0..count).map(|i| parse_ratio(&(a + i as f64 * d).to_string())).collect::<Result<Vec<_>, _>>()?
            }
            [_] => s.split(',').map(parse_ratio).collect::<Result<Vec<_>, _>>()?,
            _ => return Err(format!("'{s}': expected start:stop:step or a comma list")),
        };
        Ok(RhoList(list))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Band(pub u64, pub u64);

impl FromStr for Band {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s.split_once(':').ok_or_else(|| format!("'{s}': expected lo:hi"))?;
        let lo = a.parse().map_err(|_| format!("'{a}' is not an integer"))?;
        let hi = b.parse().map_err(|_| format!("'{b}' is not an integer"))?;
        if hi < lo {
            return Err(format!("band {lo}:{hi} is empty"));
        }
        Ok(Band(lo, hi))
    }
}
