//! Concrete step semantics and exhaustive longest-trace search at desk
//! scale. This layer is deliberately independent of the solver stack: it
//! simulates, memoizes, and measures, and is used to cross-validate the
//! engine's verdicts and complexity claims.
//!
//! `longest_trace` computes the exact length of the longest trace from any
//! state whose valuation is bounded by `n`, by a memoized depth-first search
//! over the reachable state space. A trace that revisits a location with a
//! componentwise greater-or-equal valuation proves a nonnegative cycle, so
//! the search reports non-termination instead of diverging. Reachable values
//! can outgrow `n`; a configurable value ceiling and step budget abort the
//! search loudly rather than hanging.

use std::collections::HashMap;

use thiserror::Error;

use crate::model::{ModelError, TransId, Valuation, Vass, VassState};
use crate::par::map_collect;
use crate::rat::Int;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleBudget {
    /// Maximum number of DFS edge expansions before giving up.
    pub max_steps: u64,
    /// Abort when any valuation component exceeds this bound.
    pub value_ceiling: i64,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            max_steps: 4_000_000,
            value_ceiling: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceOutcome {
    /// Exact length of the longest trace from an n-bounded state.
    Length(u64),
    /// A trace revisited a location with a componentwise >= valuation.
    NonTerminationDetected,
    /// Step budget or value ceiling exhausted.
    BudgetExceeded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceReport {
    pub outcome: TraceOutcome,
    pub explored_states: u64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("trace search exceeded its budget")]
    BudgetExceeded,
    #[error("system does not terminate within the explored bounds")]
    NonTermination,
    #[error("need at least two bounds with positive trace length to fit a slope")]
    InsufficientData,
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepResult {
    Stepped(VassState),
    Blocked,
}

/// Fires one transition: blocked when the state is at the wrong location or
/// any counter would go negative.
pub fn step(vass: &Vass, state: &VassState, t: TransId) -> Result<StepResult, ModelError> {
    let tr = vass.transition(t)?;
    if tr.source != state.location {
        return Ok(StepResult::Blocked);
    }
    match state.valuation.add_checked(&tr.update) {
        Some(valuation) => Ok(StepResult::Stepped(VassState {
            location: tr.target,
            valuation,
        })),
        None => Ok(StepResult::Blocked),
    }
}

/// Replays a transition sequence; `Err(position)` points at the first
/// blocked step.
pub fn replay(
    vass: &Vass,
    start: &VassState,
    steps: &[TransId],
) -> Result<Vec<VassState>, usize> {
    let mut trace = vec![start.clone()];
    for (position, &t) in steps.iter().enumerate() {
        match step(vass, trace.last().unwrap(), t) {
            Ok(StepResult::Stepped(next)) => trace.push(next),
            _ => return Err(position),
        }
    }
    Ok(trace)
}

struct Search<'a> {
    dim: usize,
    // per location: (transition target, update) in id order
    edges: Vec<Vec<(usize, Vec<i64>)>>,
    memo: HashMap<(usize, Box<[i64]>), MemoEntry>,
    // valuations currently on the DFS stack, per location
    gray: Vec<Vec<Box<[i64]>>>,
    steps: u64,
    budget: &'a OracleBudget,
}

#[derive(Clone, Copy)]
enum MemoEntry {
    OnStack,
    Done(u64),
}

enum SearchAbort {
    NonTermination,
    Budget,
}

struct Frame {
    loc: usize,
    val: Box<[i64]>,
    next_edge: usize,
    best: u64,
}

impl<'a> Search<'a> {
    fn new(vass: &Vass, budget: &'a OracleBudget) -> Result<Self, SearchAbort> {
        let mut edges = vec![Vec::new(); vass.num_locations()];
        for tr in vass.transitions() {
            let update = tr
                .update
                .iter()
                .map(|d| i64::try_from(d).map_err(|_| SearchAbort::Budget))
                .collect::<Result<Vec<i64>, _>>()?;
            edges[tr.source].push((tr.target, update));
        }
        Ok(Search {
            dim: vass.dim(),
            edges,
            memo: HashMap::new(),
            gray: vec![Vec::new(); vass.num_locations()],
            steps: 0,
            budget,
        })
    }

    /// Longest trace length from one state.
    fn longest_from(&mut self, loc: usize, val: Box<[i64]>) -> Result<u64, SearchAbort> {
        if let Some(MemoEntry::Done(len)) = self.memo.get(&(loc, val.clone())) {
            return Ok(*len);
        }
        let mut stack = Vec::new();
        self.push_state(&mut stack, loc, val)?;
        let mut result = 0;
        while let Some(frame) = stack.last_mut() {
            let Some((target, update)) = self.edges[frame.loc].get(frame.next_edge) else {
                let frame = stack.pop().unwrap();
                self.memo
                    .insert((frame.loc, frame.val.clone()), MemoEntry::Done(frame.best));
                let popped = self.gray[frame.loc].pop();
                debug_assert!(popped.is_some());
                match stack.last_mut() {
                    Some(parent) => parent.best = parent.best.max(1 + frame.best),
                    None => result = frame.best,
                }
                continue;
            };
            frame.next_edge += 1;
            self.steps += 1;
            if self.steps > self.budget.max_steps {
                return Err(SearchAbort::Budget);
            }
            let mut succ = vec![0i64; self.dim].into_boxed_slice();
            let mut blocked = false;
            for i in 0..self.dim {
                let v = frame.val[i].checked_add(update[i]).ok_or(SearchAbort::Budget)?;
                if v < 0 {
                    blocked = true;
                    break;
                }
                if v > self.budget.value_ceiling {
                    return Err(SearchAbort::Budget);
                }
                succ[i] = v;
            }
            if blocked {
                continue;
            }
            let target = *target;
            match self.memo.get(&(target, succ.clone())) {
                Some(MemoEntry::Done(len)) => {
                    let len = *len;
                    let frame = stack.last_mut().unwrap();
                    frame.best = frame.best.max(1 + len);
                }
                Some(MemoEntry::OnStack) => return Err(SearchAbort::NonTermination),
                None => {
                    self.push_state(&mut stack, target, succ)?;
                }
            }
        }
        Ok(result)
    }

    fn push_state(
        &mut self,
        stack: &mut Vec<Frame>,
        loc: usize,
        val: Box<[i64]>,
    ) -> Result<(), SearchAbort> {
        // an ancestor at the same location dominated by the new valuation
        // closes a nonnegative cycle
        if self.gray[loc]
            .iter()
            .any(|old| old.iter().zip(val.iter()).all(|(a, b)| a <= b))
        {
            return Err(SearchAbort::NonTermination);
        }
        self.memo.insert((loc, val.clone()), MemoEntry::OnStack);
        self.gray[loc].push(val.clone());
        stack.push(Frame {
            loc,
            val,
            next_edge: 0,
            best: 0,
        });
        Ok(())
    }
}

/// Exact longest-trace length over all states with every counter at most
/// `n`, or a non-termination/budget signal.
pub fn longest_trace(vass: &Vass, n: u64, budget: &OracleBudget) -> TraceReport {
    let Ok(bound) = i64::try_from(n) else {
        return TraceReport {
            outcome: TraceOutcome::BudgetExceeded,
            explored_states: 0,
        };
    };
    if bound > budget.value_ceiling {
        return TraceReport {
            outcome: TraceOutcome::BudgetExceeded,
            explored_states: 0,
        };
    }
    let mut search = match Search::new(vass, budget) {
        Ok(s) => s,
        Err(_) => {
            return TraceReport {
                outcome: TraceOutcome::BudgetExceeded,
                explored_states: 0,
            }
        }
    };
    let mut best = 0u64;
    let dim = vass.dim();
    for loc in 0..vass.num_locations() {
        let mut val = vec![0i64; dim];
        loop {
            match search.longest_from(loc, val.clone().into_boxed_slice()) {
                Ok(len) => best = best.max(len),
                Err(SearchAbort::NonTermination) => {
                    return TraceReport {
                        outcome: TraceOutcome::NonTerminationDetected,
                        explored_states: search.memo.len() as u64,
                    }
                }
                Err(SearchAbort::Budget) => {
                    return TraceReport {
                        outcome: TraceOutcome::BudgetExceeded,
                        explored_states: search.memo.len() as u64,
                    }
                }
            }
            // odometer over [0, n]^dim
            let mut i = 0;
            while i < dim {
                if val[i] < bound {
                    val[i] += 1;
                    break;
                }
                val[i] = 0;
                i += 1;
            }
            if i == dim {
                break;
            }
        }
    }
    TraceReport {
        outcome: TraceOutcome::Length(best),
        explored_states: search.memo.len() as u64,
    }
}

/// Least-squares slope of `log comp_n` against `log n` over the given
/// bounds; the empirical growth exponent.
pub fn estimate_exponent(
    vass: &Vass,
    ns: &[u64],
    budget: &OracleBudget,
    parallel: bool,
) -> Result<f64, OracleError> {
    let reports = map_collect(parallel, ns, |&n| (n, longest_trace(vass, n, budget)));
    let mut points = Vec::new();
    for (n, report) in reports {
        match report.outcome {
            TraceOutcome::Length(len) => {
                if n > 0 && len > 0 {
                    points.push(((n as f64).ln(), (len as f64).ln()));
                }
            }
            TraceOutcome::NonTerminationDetected => return Err(OracleError::NonTermination),
            TraceOutcome::BudgetExceeded => return Err(OracleError::BudgetExceeded),
        }
    }
    if points.len() < 2 {
        return Err(OracleError::InsufficientData);
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|(x, _)| x).sum::<f64>() / n;
    let mean_y = points.iter().map(|(_, y)| y).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|(x, _)| (x - mean_x).powi(2)).sum();
    let sxy: f64 = points
        .iter()
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    if sxx == 0.0 {
        return Err(OracleError::InsufficientData);
    }
    Ok(sxy / sxx)
}

/// CSV rows `n,comp_n,explored_states` for the report command.
pub fn csv_report(rows: &[(u64, TraceReport)]) -> String {
    let mut out = String::from("N,comp_N,explored_states\n");
    for (n, report) in rows {
        let comp = match report.outcome {
            TraceOutcome::Length(len) => len.to_string(),
            TraceOutcome::NonTerminationDetected => "non_termination".to_string(),
            TraceOutcome::BudgetExceeded => "budget_exceeded".to_string(),
        };
        out.push_str(&format!("{n},{comp},{}\n", report.explored_states));
    }
    out
}

/// Convenience constructor for states used by the CLI and tests.
pub fn state(vass: &Vass, location: &str, entries: Vec<Int>) -> Option<VassState> {
    let location = vass.location_id(location)?;
    let valuation = Valuation::new(entries).ok()?;
    if valuation.entries().len() != vass.dim() {
        return None;
    }
    Some(VassState {
        location,
        valuation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::rat::int;

    #[test]
    fn step_examples() {
        let v = fixtures::vprog();
        let s = state(&v, "l1", vec![int(1), int(1)]).unwrap();
        match step(&v, &s, 0).unwrap() {
            StepResult::Stepped(next) => {
                assert_eq!(next.location, v.location_id("l2").unwrap());
                assert_eq!(next.valuation.entries(), &[int(0), int(2)]);
            }
            StepResult::Blocked => panic!("expected a step"),
        }
        // i would go negative
        let s = state(&v, "l1", vec![int(0), int(5)]).unwrap();
        assert_eq!(step(&v, &s, 0).unwrap(), StepResult::Blocked);
        // zero update keeps the valuation
        let z = fixtures::zero_loop();
        let s = state(&z, "l", vec![int(3)]).unwrap();
        match step(&z, &s, 0).unwrap() {
            StepResult::Stepped(next) => assert_eq!(next.valuation.entries(), &[int(3)]),
            StepResult::Blocked => panic!("self-loop with zero update cannot block"),
        }
    }

    #[test]
    fn swap_cycle_detected_quickly() {
        let v = fixtures::swap_cycle();
        for n in 1..=4 {
            let report = longest_trace(&v, n, &OracleBudget::default());
            assert_eq!(report.outcome, TraceOutcome::NonTerminationDetected);
        }
    }

    #[test]
    fn no_transitions_means_zero() {
        let v = crate::model::Vass::new(2, vec!["a".into()], vec![]).unwrap();
        let report = longest_trace(&v, 7, &OracleBudget::default());
        assert_eq!(report.outcome, TraceOutcome::Length(0));
    }

    #[test]
    fn countdown_comp_is_n() {
        let v = fixtures::countdown();
        for n in 0..6 {
            let report = longest_trace(&v, n, &OracleBudget::default());
            assert_eq!(report.outcome, TraceOutcome::Length(n));
        }
    }

    #[test]
    fn budget_exceeded_is_loud() {
        let v = fixtures::vexp();
        let tiny = OracleBudget {
            max_steps: 50,
            value_ceiling: 1_000_000,
        };
        let report = longest_trace(&v, 3, &tiny);
        assert_eq!(report.outcome, TraceOutcome::BudgetExceeded);
    }

    #[test]
    fn value_ceiling_is_loud() {
        // vexp doubles its first counter per round; a tight ceiling must
        // abort instead of exploring the blowup
        let v = fixtures::vexp();
        let tiny = OracleBudget {
            max_steps: 1_000_000,
            value_ceiling: 20,
        };
        let report = longest_trace(&v, 4, &tiny);
        assert_eq!(report.outcome, TraceOutcome::BudgetExceeded);
    }

    #[test]
    fn countdown_slope_is_one() {
        let v = fixtures::countdown();
        let slope =
            estimate_exponent(&v, &[2, 4, 8, 16], &OracleBudget::default(), false).unwrap();
        assert!((slope - 1.0).abs() < 1e-9, "slope {slope}");
    }

    #[test]
    fn monotone_in_n() {
        let v = fixtures::vprog();
        let mut last = 0;
        for n in 0..5 {
            match longest_trace(&v, n, &OracleBudget::default()).outcome {
                TraceOutcome::Length(len) => {
                    assert!(len >= last);
                    last = len;
                }
                other => panic!("unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn replay_reports_blocked_position() {
        let v = fixtures::vprog();
        let s = state(&v, "l1", vec![int(1), int(0)]).unwrap();
        let trace = replay(&v, &s, &[0, 1, 2]).unwrap();
        assert_eq!(trace.len(), 4);
        let blocked = replay(&v, &s, &[0, 1, 1]);
        assert_eq!(blocked, Err(2));
    }
}
