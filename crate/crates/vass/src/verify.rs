//! Integer-only verification of both certificate kinds. This is the trusted
//! core of the crate: it re-derives component scopes itself instead of
//! believing the certificate, and never touches the LP solver.
//!
//! A ranking certificate is accepted iff all coefficients are nonnegative,
//! scopes nest along the recomputed component structure, every transition
//! has an assigned level, its row value is nonpositive at every level above
//! its own and at most -1 at its own level. A witness is accepted iff it is
//! a cycle over existing transitions whose total update is componentwise
//! nonnegative.

use std::collections::BTreeSet;

use num::{Signed, Zero};
use thiserror::Error;

use crate::cert::{CycleWitness, LevelNode, RankingCertificate};
use crate::graph::scc_decompose;
use crate::model::{LocId, SubVass, TransId, Valuation, Vass, VassState};
use crate::rat::{max_abs, Int};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RankingReject {
    #[error("transition {transition} has row value {row} at its own level {depth}, needs <= -1")]
    NonStrict {
        transition: TransId,
        depth: usize,
        row: Int,
    },
    #[error("negative coefficient: {0}")]
    SignViolation(String),
    #[error("scope violation: {0}")]
    ScopeViolation(String),
    #[error("transition {0} has no assigned level")]
    UnassignedTransition(TransId),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WitnessReject {
    #[error("step {position} does not continue the path")]
    BrokenPath { position: usize },
    #[error("path does not return to its start location")]
    NotACycle,
    #[error("cycle value is negative in component {index}")]
    NegativeComponent { index: usize, value: Int },
}

/// Checks a ranking certificate against a system.
pub fn verify_ranking(vass: &Vass, cert: &RankingCertificate) -> Result<(), RankingReject> {
    for tr in vass.transitions() {
        match cert.transition_levels.get(&tr.id) {
            None => return Err(RankingReject::UnassignedTransition(tr.id)),
            Some(0) => {
                return Err(RankingReject::ScopeViolation(format!(
                    "transition {} assigned to level 0; levels are 1-based",
                    tr.id
                )))
            }
            Some(_) => {}
        }
    }
    match &cert.root {
        None => {
            if vass.transitions().is_empty() {
                Ok(())
            } else {
                Err(RankingReject::ScopeViolation(
                    "certificate has no levels but the system has transitions".into(),
                ))
            }
        }
        Some(root) => check_node(vass, cert, root, &vass.view(), 1),
    }
}

fn check_node(
    vass: &Vass,
    cert: &RankingCertificate,
    node: &LevelNode,
    sub: &SubVass<'_>,
    depth: usize,
) -> Result<(), RankingReject> {
    let scope: BTreeSet<LocId> = sub.locations().iter().copied().collect();
    if node.scope != scope {
        return Err(RankingReject::ScopeViolation(format!(
            "level at depth {depth} declares scope {:?}, expected {:?}",
            names(vass, &node.scope),
            names(vass, &scope)
        )));
    }
    if node.r.len() != vass.dim() {
        return Err(RankingReject::ScopeViolation(format!(
            "level at depth {depth} has {} coefficients, expected {}",
            node.r.len(),
            vass.dim()
        )));
    }
    if node.r.iter().any(|x| x.is_negative()) {
        return Err(RankingReject::SignViolation(format!(
            "r at depth {depth} has a negative entry"
        )));
    }
    let z_keys: BTreeSet<LocId> = node.z.keys().copied().collect();
    if z_keys != scope {
        return Err(RankingReject::ScopeViolation(format!(
            "z at depth {depth} is keyed by {:?}, expected scope {:?}",
            names(vass, &z_keys),
            names(vass, &scope)
        )));
    }
    if node.z.values().any(|x| x.is_negative()) {
        return Err(RankingReject::SignViolation(format!(
            "z at depth {depth} has a negative entry"
        )));
    }

    let mut removed = BTreeSet::new();
    for tr in sub.transitions() {
        let level = cert.transition_levels[&tr.id];
        if level < depth {
            return Err(RankingReject::ScopeViolation(format!(
                "transition {} assigned to level {level} but still present at depth {depth}",
                tr.id
            )));
        }
        let mut row: Int = node.r.iter().zip(&tr.update).map(|(r, d)| r * d).sum();
        row += &node.z[&tr.target] - &node.z[&tr.source];
        if level == depth {
            if row > Int::from(-1) {
                return Err(RankingReject::NonStrict {
                    transition: tr.id,
                    depth,
                    row,
                });
            }
            removed.insert(tr.id);
        } else if row.is_positive() {
            return Err(RankingReject::NonStrict {
                transition: tr.id,
                depth,
                row,
            });
        }
    }

    let remaining = sub.without_transitions(&removed);
    let scc = scc_decompose(&remaining);
    for tr in remaining.transitions() {
        if scc.component_of[&tr.source] != scc.component_of[&tr.target] {
            return Err(RankingReject::ScopeViolation(format!(
                "transition {} is not strict at depth {depth} and crosses components",
                tr.id
            )));
        }
    }

    let mut used = BTreeSet::new();
    for child in &node.children {
        let key: Vec<LocId> = child.scope.iter().copied().collect();
        let ci = scc
            .components
            .iter()
            .position(|c| c.locations() == key.as_slice())
            .ok_or_else(|| {
                RankingReject::ScopeViolation(format!(
                    "child scope {:?} at depth {depth} is not a component of the remainder",
                    names(vass, &child.scope)
                ))
            })?;
        if !used.insert(ci) {
            return Err(RankingReject::ScopeViolation(format!(
                "two children share the scope {:?}",
                names(vass, &child.scope)
            )));
        }
        check_node(vass, cert, child, &scc.components[ci], depth + 1)?;
    }
    for (ci, comp) in scc.components.iter().enumerate() {
        if !comp.is_empty() && !used.contains(&ci) {
            return Err(RankingReject::ScopeViolation(format!(
                "component {:?} below depth {depth} still has transitions but no child level",
                comp.locations()
                    .iter()
                    .map(|&l| vass.location_name(l))
                    .collect::<Vec<_>>()
            )));
        }
    }
    Ok(())
}

fn names(vass: &Vass, locs: &BTreeSet<LocId>) -> Vec<String> {
    locs.iter()
        .map(|&l| vass.location_name(l).to_string())
        .collect()
}

/// Checks a witness cycle; returns its recomputed value on success.
pub fn verify_witness(vass: &Vass, witness: &CycleWitness) -> Result<Vec<Int>, WitnessReject> {
    let steps = &witness.cycle.steps;
    if steps.is_empty() {
        return Err(WitnessReject::NotACycle);
    }
    let mut at = witness.start;
    let mut value = vec![Int::zero(); vass.dim()];
    for (position, &t) in steps.iter().enumerate() {
        let tr = match vass.transitions().get(t) {
            Some(tr) => tr,
            None => return Err(WitnessReject::BrokenPath { position }),
        };
        if tr.source != at {
            return Err(WitnessReject::BrokenPath { position });
        }
        at = tr.target;
        for (acc, d) in value.iter_mut().zip(&tr.update) {
            *acc += d;
        }
    }
    if at != witness.start {
        return Err(WitnessReject::NotACycle);
    }
    if let Some(index) = value.iter().position(|x| x.is_negative()) {
        let v = value[index].clone();
        return Err(WitnessReject::NegativeComponent { index, value: v });
    }
    Ok(value)
}

/// Concretely replays a verified witness: starting from the valuation
/// `m * u * 1` (`m` the largest update magnitude on the cycle, `u` its
/// length), runs `repetitions` full traversals. Every intermediate valuation
/// stays nonnegative and each full loop ends componentwise at or above where
/// it started, so the trace demonstrates non-termination executably.
pub fn pump_witness(
    vass: &Vass,
    witness: &CycleWitness,
    repetitions: usize,
) -> Result<Vec<VassState>, WitnessReject> {
    verify_witness(vass, witness)?;
    let m = witness
        .cycle
        .steps
        .iter()
        .map(|&t| max_abs(&vass.transitions()[t].update))
        .max()
        .unwrap_or_else(Int::zero);
    let start_entry = m * Int::from(witness.cycle.len() as u64);
    let start = Valuation::uniform(vass.dim(), start_entry).expect("nonnegative start");
    let mut state = VassState {
        location: witness.start,
        valuation: start,
    };
    let mut trace = vec![state.clone()];
    for _ in 0..repetitions {
        for &t in &witness.cycle.steps {
            let tr = &vass.transitions()[t];
            let valuation = state
                .valuation
                .add_checked(&tr.update)
                .expect("pumping a verified witness never blocks");
            state = VassState {
                location: tr.target,
                valuation,
            };
            trace.push(state.clone());
        }
    }
    Ok(trace)
}
