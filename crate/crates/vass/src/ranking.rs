//! The recursive analysis procedure: on a strongly connected system, decide
//! for every transition whether an affine quasi-ranking function strictly
//! decreasing on it exists; if none exists for any transition, the cycle
//! solutions combine into a nonnegative cycle (non-termination); otherwise
//! the decreasing transitions are removed and the procedure recurses into
//! the remaining strongly connected components, stacking one certificate
//! level per recursion step.
//!
//! Two solve modes are provided: the per-transition loop solves both
//! constraint systems for each transition separately; the primal-dual mode
//! replaces the loop by a single pair of aggregated solves. Both produce the
//! same decreasing sets; the loop mode serves as the cross-check oracle.

use std::collections::{BTreeMap, BTreeSet};

use num::{Signed, Zero};
use thiserror::Error;

use crate::cert::{
    AnalysisResult, CycleWitness, Diagnostics, LevelNode, LevelReport, RankingCertificate, Verdict,
};
use crate::farkas::{
    self, solve_primal_dual, solve_system_a, solve_system_b, sum_combinator, AffineRankSolution,
    CycleSolution, FarkasError,
};
use crate::graph::{self, scc_decompose, GraphError};
use crate::model::{Path, SubVass, TransId, Vass};
use crate::par::map_collect;
use crate::rat::Int;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMode {
    /// One pair of constraint system solves per transition.
    Loop,
    /// A single aggregated primal/dual solve per recursion level.
    PrimalDual,
}

#[derive(Debug, Clone)]
pub struct AnalyzeOptions {
    pub mode: SolveMode,
    /// Run independent solves and component recursions on the rayon pool.
    /// Ignored when the crate is built without the `parallel` feature.
    pub parallel: bool,
    /// Greedily remove subcycles from witnesses while the value stays
    /// nonnegative.
    pub reduce_witness: bool,
    /// In loop mode, minimize `1^T r + 1^T z` per solve instead of taking
    /// the first feasible point.
    pub small_coefficients: bool,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions {
            mode: SolveMode::PrimalDual,
            parallel: true,
            reduce_witness: false,
            small_coefficients: false,
        }
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("input is not strongly connected")]
    NotConnected,
    #[error("removing the decreasing transitions left a cross-component transition {0}")]
    NotFullyDecomposable(TransId),
    #[error("cycle solutions do not cover transition {0}")]
    CoverageGap(TransId),
    #[error(transparent)]
    Farkas(#[from] FarkasError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Analyzes an arbitrary system. Strongly connected inputs go straight to
/// the recursive procedure; otherwise each component is analyzed separately
/// and, if all terminate, a constant level built from the reverse
/// topological order of the components is stacked on top.
pub fn analyze(vass: &Vass, opts: &AnalyzeOptions) -> Result<AnalysisResult, EngineError> {
    let view = vass.view();
    let scc = scc_decompose(&view);
    if scc.is_single_component() {
        return finish(rank_sub(&view, opts)?);
    }

    let outcomes = map_collect(opts.parallel, &scc.components, |comp| rank_sub(comp, opts));
    let mut certs = Vec::with_capacity(outcomes.len());
    let mut depth = 1;
    for outcome in outcomes {
        match outcome? {
            SubOutcome::Witness { witness, depth } => {
                return finish(SubOutcome::Witness { witness, depth })
            }
            SubOutcome::Ranked {
                cert,
                depth: d,
                reports,
            } => {
                depth = depth.max(d);
                certs.push((cert, reports));
            }
        }
    }

    // Constant level: r = 0 and z(l) = position of l's component in the
    // reverse topological order, which strictly drops along every
    // cross-component transition.
    let mut z = BTreeMap::new();
    for (&l, &c) in &scc.component_of {
        z.insert(l, Int::from(scc.topo_position(c) as u64));
    }
    let cross: BTreeSet<TransId> = vass
        .transitions()
        .iter()
        .filter(|tr| scc.component_of[&tr.source] != scc.component_of[&tr.target])
        .map(|tr| tr.id)
        .collect();

    let mut transition_levels: BTreeMap<TransId, usize> = cross.iter().map(|&t| (t, 1)).collect();
    let mut children = Vec::new();
    let mut levels = vec![LevelReport {
        depth: 1,
        scope: view.locations().to_vec(),
        decreasing: cross,
    }];
    for (cert, reports) in certs {
        for (t, level) in cert.transition_levels {
            transition_levels.insert(t, level + 1);
        }
        if let Some(node) = cert.root {
            children.push(node);
        }
        levels.extend(reports.into_iter().map(|mut r| {
            r.depth += 1;
            r
        }));
    }
    let root = LevelNode {
        scope: view.locations().iter().copied().collect(),
        r: vec![Int::zero(); vass.dim()],
        z,
        children,
    };
    let order = root.depth();
    Ok(AnalysisResult {
        verdict: Verdict::Terminating(RankingCertificate {
            root: Some(root),
            transition_levels,
            order,
        }),
        diagnostics: Diagnostics {
            recursion_depth: depth,
            levels,
        },
    })
}

/// Analyzes a strongly connected system (systems without transitions are
/// accepted as well). Returns [`EngineError::NotConnected`] otherwise.
pub fn analyze_connected(vass: &Vass, opts: &AnalyzeOptions) -> Result<AnalysisResult, EngineError> {
    let view = vass.view();
    if !view.is_empty() && !graph::is_strongly_connected(&view) {
        return Err(EngineError::NotConnected);
    }
    finish(rank_sub(&view, opts)?)
}

fn finish(outcome: SubOutcome) -> Result<AnalysisResult, EngineError> {
    Ok(match outcome {
        SubOutcome::Ranked {
            cert,
            depth,
            reports,
        } => AnalysisResult {
            verdict: Verdict::Terminating(cert),
            diagnostics: Diagnostics {
                recursion_depth: depth,
                levels: reports,
            },
        },
        SubOutcome::Witness { witness, depth } => AnalysisResult {
            verdict: Verdict::NonTerminating(witness),
            diagnostics: Diagnostics {
                recursion_depth: depth,
                levels: Vec::new(),
            },
        },
    })
}

enum SubOutcome {
    Ranked {
        cert: RankingCertificate,
        depth: usize,
        reports: Vec<LevelReport>,
    },
    Witness {
        witness: CycleWitness,
        depth: usize,
    },
}

/// One call of the recursive procedure on a strongly connected sub-VASS.
/// Certificate levels and reports are relative to this call (depth 1).
fn rank_sub(sub: &SubVass<'_>, opts: &AnalyzeOptions) -> Result<SubOutcome, EngineError> {
    if sub.is_empty() {
        return Ok(SubOutcome::Ranked {
            cert: RankingCertificate::empty(),
            depth: 1,
            reports: Vec::new(),
        });
    }

    let (decreasing, qrank, cycles) = solve_level(sub, opts)?;

    if decreasing.is_empty() {
        let witness = extract_witness(sub, &cycles)?;
        let witness = if opts.reduce_witness {
            reduce_witness(sub.parent(), &witness)
        } else {
            witness
        };
        return Ok(SubOutcome::Witness { witness, depth: 1 });
    }

    let remaining = sub.without_transitions(&decreasing);
    let scc = scc_decompose(&remaining);
    let outcomes = map_collect(opts.parallel, &scc.components, |comp| rank_sub(comp, opts));

    let mut child_certs = BTreeMap::new();
    let mut depth = 1;
    let mut reports = vec![LevelReport {
        depth: 1,
        scope: sub.locations().to_vec(),
        decreasing: decreasing.clone(),
    }];
    for (ci, outcome) in outcomes.into_iter().enumerate() {
        match outcome? {
            SubOutcome::Witness { witness, depth: d } => {
                return Ok(SubOutcome::Witness {
                    witness,
                    depth: d + 1,
                });
            }
            SubOutcome::Ranked {
                cert,
                depth: d,
                reports: child_reports,
            } => {
                depth = depth.max(d + 1);
                reports.extend(child_reports.into_iter().map(|mut r| {
                    r.depth += 1;
                    r
                }));
                child_certs.insert(ci, cert);
            }
        }
    }

    let cert = combine_combinator(sub, &qrank, &child_certs)?;
    Ok(SubOutcome::Ranked {
        cert,
        depth,
        reports,
    })
}

/// Computes the decreasing set of one level together with the quasi-ranking
/// solution strict on it and the cycle solutions of the other transitions.
fn solve_level(
    sub: &SubVass<'_>,
    opts: &AnalyzeOptions,
) -> Result<(BTreeSet<TransId>, AffineRankSolution, Vec<CycleSolution>), EngineError> {
    match opts.mode {
        SolveMode::PrimalDual => {
            let pd = solve_primal_dual(sub)?;
            let cycles = pd.cycle_solution.into_iter().collect();
            Ok((pd.decreasing_set, pd.rank_solution, cycles))
        }
        SolveMode::Loop => {
            let per_transition = map_collect(opts.parallel, sub.transition_ids(), |&t| {
                match solve_system_b(sub, t, opts.small_coefficients) {
                    Ok(Some(rank)) => Ok((t, farkas::Alternative::Ranking(rank))),
                    Ok(None) => match solve_system_a(sub, t) {
                        Ok(Some(cycle)) => Ok((t, farkas::Alternative::Cycle(cycle))),
                        Ok(None) => Err(EngineError::Farkas(FarkasError::NeitherFeasible(t))),
                        Err(e) => Err(EngineError::Farkas(e)),
                    },
                    Err(e) => Err(EngineError::Farkas(e)),
                }
            });
            let mut decreasing = BTreeSet::new();
            let mut ranks = Vec::new();
            let mut cycles = Vec::new();
            for item in per_transition {
                let (t, alt) = item?;
                match alt {
                    farkas::Alternative::Ranking(r) => {
                        decreasing.insert(t);
                        ranks.push(r);
                    }
                    farkas::Alternative::Cycle(c) => cycles.push(c),
                }
            }
            if ranks.is_empty() {
                // no decreasing transition; any admissible zero solution keeps
                // the interface uniform
                let zero = AffineRankSolution {
                    r: vec![Int::zero(); sub.dim()],
                    z: sub
                        .locations()
                        .iter()
                        .map(|&l| (l, Int::zero()))
                        .collect(),
                };
                Ok((decreasing, zero, cycles))
            } else {
                Ok((decreasing, sum_combinator(&ranks), cycles))
            }
        }
    }
}

/// Builds the certificate node for one level: the quasi-ranking solution on
/// top, the per-component certificates below. Fails if the strict
/// transitions do not leave a fully decomposable system — on the engine's
/// own calls this would be an algorithmic bug.
pub fn combine_combinator(
    sub: &SubVass<'_>,
    qrank: &AffineRankSolution,
    scc_certs: &BTreeMap<usize, RankingCertificate>,
) -> Result<RankingCertificate, EngineError> {
    let strict = qrank.strict_set(sub);
    let remaining = sub.without_transitions(&strict);
    let scc = scc_decompose(&remaining);
    for tr in remaining.transitions() {
        if scc.component_of[&tr.source] != scc.component_of[&tr.target] {
            return Err(EngineError::NotFullyDecomposable(tr.id));
        }
    }

    let mut transition_levels: BTreeMap<TransId, usize> =
        strict.iter().map(|&t| (t, 1)).collect();
    let mut children = Vec::new();
    for (ci, comp) in scc.components.iter().enumerate() {
        match scc_certs.get(&ci) {
            Some(cert) => {
                for (&t, &level) in &cert.transition_levels {
                    transition_levels.insert(t, level + 1);
                }
                if let Some(node) = &cert.root {
                    children.push(node.clone());
                }
            }
            None if comp.is_empty() => {}
            None => {
                let t = comp.transition_ids()[0];
                return Err(EngineError::CoverageGap(t));
            }
        }
    }

    let root = LevelNode {
        scope: sub.locations().iter().copied().collect(),
        r: qrank.r.clone(),
        z: qrank.z.clone(),
        children,
    };
    let order = root.depth();
    Ok(RankingCertificate {
        root: Some(root),
        transition_levels,
        order,
    })
}

/// Combines cycle solutions covering every transition of a strongly
/// connected sub-VASS into a single nonnegative cycle.
pub fn extract_witness(
    sub: &SubVass<'_>,
    solutions: &[CycleSolution],
) -> Result<CycleWitness, EngineError> {
    let mut total = CycleSolution {
        mu: sub
            .transition_ids()
            .iter()
            .map(|&t| (t, Int::zero()))
            .collect(),
    };
    for s in solutions {
        total = total.add(s);
    }
    if let Some(&t) = sub
        .transition_ids()
        .iter()
        .find(|&&t| total.mu.get(&t).map(|m| !m.is_positive()).unwrap_or(true))
    {
        return Err(EngineError::CoverageGap(t));
    }
    let counts = total.counts_u64()?;
    let cycle = graph::euler_circuit(sub, &counts)?;
    let value = sub
        .parent()
        .path_value(&cycle)
        .expect("euler circuit is a valid path");
    debug_assert_eq!(value, total.value(sub));
    debug_assert!(value.iter().all(|x| !x.is_negative()));
    let start = sub.parent().transitions()[cycle.steps[0]].source;
    Ok(CycleWitness {
        start,
        cycle,
        value,
    })
}

/// Greedy witness shortening: repeatedly drop the longest proper subcycle
/// whose removal keeps the value nonnegative and the cycle nonempty.
pub fn reduce_witness(vass: &Vass, witness: &CycleWitness) -> CycleWitness {
    let mut steps = witness.cycle.steps.clone();
    let mut value = witness.value.clone();
    loop {
        let locs: Vec<_> = {
            let mut at = witness.start;
            let mut seq = vec![at];
            for &t in &steps {
                at = vass.transitions()[t].target;
                seq.push(at);
            }
            seq
        };
        let mut best: Option<(usize, usize, Vec<Int>)> = None;
        for i in 0..steps.len() {
            for j in ((i + 1)..=steps.len()).rev() {
                if locs[i] != locs[j] || (i == 0 && j == steps.len()) {
                    continue;
                }
                let sub_value = vass
                    .path_value(&Path::new(steps[i..j].to_vec()))
                    .expect("contiguous slice of a valid cycle");
                let new_value: Vec<Int> = value
                    .iter()
                    .zip(&sub_value)
                    .map(|(v, s)| v - s)
                    .collect();
                if new_value.iter().all(|x| !x.is_negative()) {
                    let keep = match &best {
                        None => true,
                        Some((bi, bj, _)) => (j - i) > (bj - bi),
                    };
                    if keep {
                        best = Some((i, j, new_value));
                    }
                }
            }
        }
        match best {
            Some((i, j, new_value)) => {
                steps.drain(i..j);
                value = new_value;
            }
            None => break,
        }
    }
    CycleWitness {
        start: witness.start,
        cycle: Path::new(steps),
        value,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::rat::int;

    fn both_modes() -> [AnalyzeOptions; 2] {
        [
            AnalyzeOptions {
                mode: SolveMode::Loop,
                ..AnalyzeOptions::default()
            },
            AnalyzeOptions::default(),
        ]
    }

    #[test]
    fn vprog_terminates_with_order_one() {
        for opts in both_modes() {
            let result = analyze_connected(&fixtures::vprog(), &opts).unwrap();
            assert_eq!(result.order(), Some(1));
            assert!(result.diagnostics.recursion_depth <= 3);
        }
    }

    #[test]
    fn vcsys_terminates_with_order_two() {
        for opts in both_modes() {
            let result = analyze_connected(&fixtures::vcsys(), &opts).unwrap();
            assert_eq!(result.order(), Some(2));
            let cert = result.certificate().unwrap();
            // cross transitions decrease at level 1, self-loops at level 2
            assert_eq!(cert.transition_levels[&0], 1);
            assert_eq!(cert.transition_levels[&2], 1);
            assert_eq!(cert.transition_levels[&1], 2);
            assert_eq!(cert.transition_levels[&3], 2);
        }
    }

    #[test]
    fn vexp_terminates_with_order_two() {
        let result = analyze_connected(&fixtures::vexp(), &AnalyzeOptions::default()).unwrap();
        assert_eq!(result.order(), Some(2));
        let cert = result.certificate().unwrap();
        // the doubling self-loop is only handled one level down
        assert_eq!(cert.transition_levels[&1], 2);
    }

    #[test]
    fn swap_cycle_yields_witness() {
        for opts in both_modes() {
            let result = analyze_connected(&fixtures::swap_cycle(), &opts).unwrap();
            let w = result.witness().expect("witness");
            assert_eq!(w.value, vec![int(0), int(0)]);
            assert_eq!(w.cycle.len() % 2, 0);
            assert!(!w.cycle.is_empty());
        }
    }

    #[test]
    fn swap_cycle_witness_reduces_to_length_two() {
        let opts = AnalyzeOptions {
            reduce_witness: true,
            ..AnalyzeOptions::default()
        };
        let result = analyze_connected(&fixtures::swap_cycle(), &opts).unwrap();
        assert_eq!(result.witness().unwrap().cycle.len(), 2);
    }

    #[test]
    fn analyze_rejects_disconnected_in_connected_mode() {
        let v = crate::model::Vass::new(
            1,
            vec!["a".into(), "b".into()],
            vec![("a".into(), "b".into(), vec![int(5)])],
        )
        .unwrap();
        assert!(matches!(
            analyze_connected(&v, &AnalyzeOptions::default()),
            Err(EngineError::NotConnected)
        ));
    }

    #[test]
    fn analyze_dag_gets_constant_level() {
        let v = crate::model::Vass::new(
            1,
            vec!["a".into(), "b".into()],
            vec![("a".into(), "b".into(), vec![int(5)])],
        )
        .unwrap();
        let result = analyze(&v, &AnalyzeOptions::default()).unwrap();
        assert_eq!(result.order(), Some(1));
        let cert = result.certificate().unwrap();
        let root = cert.root.as_ref().unwrap();
        assert!(root.r.iter().all(|x| x.is_zero()));
        // source strictly above target
        assert!(root.z[&0] > root.z[&1]);
        assert_eq!(cert.transition_levels[&0], 1);
    }

    #[test]
    fn analyze_passthrough_on_connected_input() {
        let direct = analyze_connected(&fixtures::vprog(), &AnalyzeOptions::default()).unwrap();
        let driver = analyze(&fixtures::vprog(), &AnalyzeOptions::default()).unwrap();
        assert_eq!(direct.order(), driver.order());
    }

    #[test]
    fn analyze_disjoint_union_propagates_witness() {
        // V with a terminating part and a swap cycle side by side
        let v = crate::model::Vass::new(
            2,
            vec!["p".into(), "a".into(), "b".into()],
            vec![
                ("p".into(), "p".into(), vec![int(-1), int(0)]),
                ("a".into(), "b".into(), vec![int(1), int(-1)]),
                ("b".into(), "a".into(), vec![int(-1), int(1)]),
            ],
        )
        .unwrap();
        let result = analyze(&v, &AnalyzeOptions::default()).unwrap();
        let w = result.witness().expect("witness");
        assert!(w.value.iter().all(|x| !x.is_negative()));
    }

    #[test]
    fn extract_witness_requires_coverage() {
        let v = fixtures::swap_cycle();
        let sub = v.view();
        let partial = CycleSolution {
            mu: BTreeMap::from([(0, int(1)), (1, int(0))]),
        };
        assert!(matches!(
            extract_witness(&sub, &[partial]),
            Err(EngineError::CoverageGap(1))
        ));
    }

    #[test]
    fn empty_system_gets_order_zero() {
        let v = crate::model::Vass::new(1, vec!["a".into()], vec![]).unwrap();
        let result = analyze_connected(&v, &AnalyzeOptions::default()).unwrap();
        assert_eq!(result.order(), Some(0));
        assert!(result.certificate().unwrap().root.is_none());
    }
}
