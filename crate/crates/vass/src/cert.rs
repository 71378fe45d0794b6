//! Certificate data: lexicographic ranking certificates for termination,
//! nonnegative-cycle witnesses for non-termination, and the analysis result
//! wrapper with diagnostics.

use std::collections::{BTreeMap, BTreeSet};

use num::Zero;

use crate::model::{LocId, Path, TransId, Vass, VassState};
use crate::rat::Int;

/// One level of a ranking certificate: an affine function `r^T v + z(l)`
/// scoped to a location set, with child levels for the components that
/// remain after this level's strict transitions are removed. Children cover
/// pairwise disjoint subsets of the scope.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelNode {
    pub scope: BTreeSet<LocId>,
    pub r: Vec<Int>,
    pub z: BTreeMap<LocId, Int>,
    pub children: Vec<LevelNode>,
}

impl LevelNode {
    /// Height of this subtree: 1 for a leaf.
    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(LevelNode::depth).max().unwrap_or(0)
    }
}

/// A lexicographic ranking certificate.
///
/// `transition_levels` assigns each transition the depth (1-based) at which
/// it strictly decreases; above that depth its row value is nonpositive.
/// `order` is the maximum tree depth — the length of the longest tuple the
/// certificate assigns to a state. The empty certificate (`root == None`)
/// has order 0 and proves termination of systems without transitions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankingCertificate {
    pub root: Option<LevelNode>,
    pub transition_levels: BTreeMap<TransId, usize>,
    pub order: usize,
}

impl RankingCertificate {
    pub fn empty() -> Self {
        RankingCertificate {
            root: None,
            transition_levels: BTreeMap::new(),
            order: 0,
        }
    }

    /// The tuple assigned to a state: walking from the root towards the
    /// deepest node whose scope contains the location, emit `r^T v + z(l)`
    /// per node. States outside the root scope get the empty tuple.
    pub fn evaluate(&self, state: &VassState) -> Vec<Int> {
        let mut tuple = Vec::new();
        let mut node = match &self.root {
            Some(n) if n.scope.contains(&state.location) => n,
            _ => return tuple,
        };
        loop {
            let mut component: Int = node
                .r
                .iter()
                .zip(state.valuation.entries())
                .map(|(r, v)| r * v)
                .sum();
            component += node.z.get(&state.location).cloned().unwrap_or_else(Int::zero);
            tuple.push(component);
            match node
                .children
                .iter()
                .find(|c| c.scope.contains(&state.location))
            {
                Some(child) => node = child,
                None => return tuple,
            }
        }
    }
}

/// Strict lexicographic comparison on integer tuples: the first differing
/// component decides; a pure prefix is not greater than its extension.
pub fn lex_gt(a: &[Int], b: &[Int]) -> bool {
    for (x, y) in a.iter().zip(b.iter()) {
        if x > y {
            return true;
        }
        if x < y {
            return false;
        }
    }
    false
}

/// A concrete nonnegative cycle: the non-termination certificate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleWitness {
    pub start: LocId,
    pub cycle: Path,
    pub value: Vec<Int>,
}

/// Verdict of the analysis: exactly one of a ranking certificate or a
/// witness cycle.
#[derive(Debug, Clone)]
pub enum Verdict {
    Terminating(RankingCertificate),
    NonTerminating(CycleWitness),
}

/// Decreasing set found at one level of the recursion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelReport {
    pub depth: usize,
    pub scope: Vec<LocId>,
    pub decreasing: BTreeSet<TransId>,
}

#[derive(Debug, Clone, Default)]
pub struct Diagnostics {
    /// Deepest nesting of the recursive procedure, counting calls on
    /// transition-free components.
    pub recursion_depth: usize,
    pub levels: Vec<LevelReport>,
}

#[derive(Debug, Clone)]
pub struct AnalysisResult {
    pub verdict: Verdict,
    pub diagnostics: Diagnostics,
}

impl AnalysisResult {
    pub fn is_terminating(&self) -> bool {
        matches!(self.verdict, Verdict::Terminating(_))
    }

    pub fn certificate(&self) -> Option<&RankingCertificate> {
        match &self.verdict {
            Verdict::Terminating(c) => Some(c),
            Verdict::NonTerminating(_) => None,
        }
    }

    pub fn witness(&self) -> Option<&CycleWitness> {
        match &self.verdict {
            Verdict::NonTerminating(w) => Some(w),
            Verdict::Terminating(_) => None,
        }
    }

    pub fn order(&self) -> Option<usize> {
        self.certificate().map(|c| c.order)
    }

    /// One-line human summary, used by the command line frontend.
    pub fn summary(&self, vass: &Vass) -> String {
        match &self.verdict {
            Verdict::Terminating(c) => format!("terminating, order {}", c.order),
            Verdict::NonTerminating(w) => format!(
                "non-terminating: cycle of length {} at {}",
                w.cycle.len(),
                vass.location_name(w.start)
            ),
        }
    }
}
