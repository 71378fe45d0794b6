//! Complexity classification: conservativity tests, order-based bounds, the
//! exact linear-complexity program, and the dimension of the cycle-value
//! cone.
//!
//! For conservative systems (every update sums to zero, or the generalized
//! form: every balanced nonnegative count vector has zero total value) a
//! certificate of order `k` pins the asymptotic complexity to `N^k` both
//! ways. Independently, the rational program
//! `max 1^T rho, rho >= 0, D rho >= -1, F rho = 0` is bounded exactly when
//! the complexity is linear, and its optimum is the exact coefficient.

use num::{One, Zero};
use thiserror::Error;

use crate::cert::{AnalysisResult, LevelNode, RankingCertificate};
use crate::lp::{Direction, LinearProgram, LpOutcome, Relation};
use crate::model::{SubVass, Vass};
use crate::par::map_collect;
use crate::rat::{max_abs, Int, Rat};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ComplexityError {
    #[error("complexity classification needs a terminating input")]
    NonTerminatingInput,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UpperBound {
    /// Complexity is O(N^k); holds for (generalized) conservative systems.
    PolyOrder(usize),
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LinearVerdict {
    /// Complexity is exactly `c * N` asymptotically.
    ExactLinear(Rat),
    AtLeastQuadratic,
    /// The input does not terminate, so trace lengths are unbounded.
    NotApplicable,
}

/// Per-level factor of the symbolic trace bound for conservative systems:
/// level values never exceed `coefficient * N + offset` from N-bounded
/// starts, with `coefficient = max|r| * dim` and `offset = max|z|`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelBound {
    pub coefficient: Int,
    pub offset: Int,
}

/// One factor per certificate level; the product bounds the trace length.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SymbolicBound {
    pub factors: Vec<LevelBound>,
}

#[derive(Debug, Clone)]
pub struct ComplexityReport {
    pub terminating: bool,
    /// Certificate order; `None` for non-terminating inputs.
    pub order: Option<usize>,
    pub conservative: bool,
    pub conservative_generalized: bool,
    pub upper: UpperBound,
    /// Lower bound exponent: trace lengths grow at least like N^k.
    pub lower: Option<usize>,
    /// Present when the linear analysis was requested.
    pub linear: Option<LinearVerdict>,
    /// Per-level symbolic bound, for conservative terminating systems.
    pub bound: Option<SymbolicBound>,
}

impl ComplexityReport {
    /// `Some(k)` when the complexity is pinned to N^k both ways.
    pub fn theta(&self) -> Option<usize> {
        match (&self.upper, self.lower) {
            (UpperBound::PolyOrder(u), Some(l)) if *u == l => Some(l),
            _ => None,
        }
    }
}

/// True iff every update's entries sum to zero.
pub fn is_conservative(vass: &Vass) -> bool {
    vass.transitions()
        .iter()
        .all(|tr| tr.update.iter().sum::<Int>().is_zero())
}

/// True iff every balanced nonnegative count vector has zero update vector:
/// for each dimension and sign, the system
/// `mu >= 0, F mu = 0, +-(D mu)(i) >= 1` must be infeasible (2 * dim
/// feasibility checks, independent and parallelizable).
///
/// Note this is neither implied by nor implies the syntactic notion: a
/// self-loop with update `(1,-1)` sums to zero but is itself a balanced
/// count vector with nonzero value, while a pair of opposite nonzero updates
/// on a two-location cycle cancels in every balanced combination without
/// summing to zero individually. Either condition bounds all reachable
/// counters linearly in the start bound, which is what the polynomial upper
/// bound needs.
pub fn is_generalized_conservative(vass: &Vass, parallel: bool) -> bool {
    let sub = vass.view();
    let probes: Vec<(usize, bool)> = (0..vass.dim())
        .flat_map(|i| [(i, false), (i, true)])
        .collect();
    map_collect(parallel, &probes, |&(i, negate)| {
        cone_direction_feasible(&sub, &unit_functional(vass.dim(), i, negate)).is_none()
    })
    .into_iter()
    .all(|infeasible| infeasible)
}

fn unit_functional(dim: usize, i: usize, negate: bool) -> Vec<Rat> {
    let mut phi = vec![Rat::zero(); dim];
    phi[i] = if negate { -Rat::one() } else { Rat::one() };
    phi
}

/// Feasibility of `mu >= 0, F mu = 0, phi^T D mu >= 1`; returns the cone
/// vector `D mu` of a solution. Since the cone is closed under positive
/// scaling, this finds a cone vector with `phi^T x > 0` whenever one exists.
fn cone_direction_feasible(sub: &SubVass<'_>, phi: &[Rat]) -> Option<Vec<Rat>> {
    let nt = sub.transition_ids().len();
    if nt == 0 {
        return None;
    }
    let mut lp = LinearProgram::new(nt);
    for &l in sub.locations() {
        let mut row = vec![Rat::zero(); nt];
        let mut nonzero = false;
        for (p, tr) in sub.transitions().enumerate() {
            if tr.is_self_loop() {
                continue;
            }
            if tr.target == l {
                row[p] += Rat::one();
                nonzero = true;
            }
            if tr.source == l {
                row[p] -= Rat::one();
                nonzero = true;
            }
        }
        if nonzero {
            lp.add_row(row, Relation::Eq, Rat::zero());
        }
    }
    let mut probe = vec![Rat::zero(); nt];
    for (p, tr) in sub.transitions().enumerate() {
        probe[p] = tr
            .update
            .iter()
            .zip(phi)
            .map(|(d, f)| Rat::from_integer(d.clone()) * f)
            .sum();
    }
    lp.add_row(probe, Relation::Ge, Rat::one());
    match lp.solve().expect("well-formed cone probe") {
        LpOutcome::Optimal { point, .. } => Some(apply_updates(sub, &point)),
        LpOutcome::Infeasible { .. } => None,
        LpOutcome::Unbounded { .. } => unreachable!("feasibility probe has no objective"),
    }
}

fn apply_updates(sub: &SubVass<'_>, mu: &[Rat]) -> Vec<Rat> {
    let mut out = vec![Rat::zero(); sub.dim()];
    for (p, tr) in sub.transitions().enumerate() {
        if mu[p].is_zero() {
            continue;
        }
        for (acc, d) in out.iter_mut().zip(&tr.update) {
            *acc += Rat::from_integer(d.clone()) * &mu[p];
        }
    }
    out
}

/// Dimension of the smallest vector space containing the cone of achievable
/// multi-cycle values `{D mu | F mu = 0, mu >= 0}`, computed by greedily
/// collecting linearly independent cone vectors: while some functional
/// vanishing on the collected vectors admits a cone vector with nonzero
/// image, add that vector.
pub fn cone_dimension(vass: &Vass) -> usize {
    let sub = vass.view();
    let mut basis: Vec<Vec<Rat>> = Vec::new();
    'grow: while basis.len() < vass.dim() {
        for phi in nullspace(&basis, vass.dim()) {
            for negate in [false, true] {
                let signed: Vec<Rat> = if negate {
                    phi.iter().map(|x| -x.clone()).collect()
                } else {
                    phi.clone()
                };
                if let Some(x) = cone_direction_feasible(&sub, &signed) {
                    basis.push(x);
                    continue 'grow;
                }
            }
        }
        break;
    }
    basis.len()
}

/// Basis of the space of functionals vanishing on all given vectors,
/// computed by exact Gaussian elimination.
fn nullspace(vectors: &[Vec<Rat>], dim: usize) -> Vec<Vec<Rat>> {
    let mut rows: Vec<Vec<Rat>> = vectors.to_vec();
    let mut pivot_cols = Vec::new();
    let mut rank = 0usize;
    for col in 0..dim {
        let Some(r) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, r);
        let p = rows[rank][col].clone();
        for x in &mut rows[rank] {
            *x /= &p;
        }
        for r2 in 0..rows.len() {
            if r2 == rank || rows[r2][col].is_zero() {
                continue;
            }
            let f = rows[r2][col].clone();
            for c in 0..dim {
                let delta = &f * &rows[rank][c];
                rows[r2][c] -= delta;
            }
        }
        pivot_cols.push(col);
        rank += 1;
    }
    let free_cols: Vec<usize> = (0..dim).filter(|c| !pivot_cols.contains(c)).collect();
    free_cols
        .into_iter()
        .map(|fc| {
            let mut y = vec![Rat::zero(); dim];
            y[fc] = Rat::one();
            for (r, &pc) in pivot_cols.iter().enumerate() {
                y[pc] = -rows[r][fc].clone();
            }
            y
        })
        .collect()
}

/// The rational linear-complexity program: bounded optimum `c` means the
/// complexity is exactly `c * N` asymptotically, an unbounded program means
/// at least quadratic growth. Requires a terminating input.
pub fn linear_complexity(
    vass: &Vass,
    result: &AnalysisResult,
) -> Result<LinearVerdict, ComplexityError> {
    if !result.is_terminating() {
        return Err(ComplexityError::NonTerminatingInput);
    }
    Ok(linear_complexity_lp(vass))
}

fn linear_complexity_lp(vass: &Vass) -> LinearVerdict {
    let sub = vass.view();
    let nt = sub.transition_ids().len();
    let mut lp = LinearProgram::new(nt);
    lp.set_objective(Direction::Maximize, vec![Rat::one(); nt]);
    for i in 0..vass.dim() {
        let mut row = vec![Rat::zero(); nt];
        for (p, tr) in sub.transitions().enumerate() {
            row[p] = Rat::from_integer(tr.update[i].clone());
        }
        lp.add_row(row, Relation::Ge, -Rat::one());
    }
    for &l in sub.locations() {
        let mut row = vec![Rat::zero(); nt];
        let mut nonzero = false;
        for (p, tr) in sub.transitions().enumerate() {
            if tr.is_self_loop() {
                continue;
            }
            if tr.target == l {
                row[p] += Rat::one();
                nonzero = true;
            }
            if tr.source == l {
                row[p] -= Rat::one();
                nonzero = true;
            }
        }
        if nonzero {
            lp.add_row(row, Relation::Eq, Rat::zero());
        }
    }
    match lp.solve().expect("well-formed linear-complexity program") {
        LpOutcome::Optimal { value, .. } => LinearVerdict::ExactLinear(value),
        LpOutcome::Unbounded { .. } => LinearVerdict::AtLeastQuadratic,
        LpOutcome::Infeasible { .. } => unreachable!("rho = 0 is always feasible"),
    }
}

/// Full classification of an analyzed system.
pub fn classify(
    vass: &Vass,
    result: &AnalysisResult,
    with_linear: bool,
    parallel: bool,
) -> ComplexityReport {
    let conservative = is_conservative(vass);
    let generalized = is_generalized_conservative(vass, parallel);
    // either notion keeps reachable counters within O(N) of the start bound
    let counters_bounded = conservative || generalized;
    match result.certificate() {
        Some(cert) => {
            let k = cert.order;
            ComplexityReport {
                terminating: true,
                order: Some(k),
                conservative,
                conservative_generalized: generalized,
                upper: if counters_bounded {
                    UpperBound::PolyOrder(k)
                } else {
                    UpperBound::Unknown
                },
                lower: Some(k),
                linear: with_linear.then(|| linear_complexity_lp(vass)),
                bound: counters_bounded.then(|| symbolic_bound(vass, cert)),
            }
        }
        None => ComplexityReport {
            terminating: false,
            order: None,
            conservative,
            conservative_generalized: generalized,
            upper: UpperBound::Unknown,
            lower: None,
            linear: with_linear.then_some(LinearVerdict::NotApplicable),
            bound: None,
        },
    }
}

/// One factor per level depth, each the worst `max|r| * dim * N + max|z|`
/// over the nodes at that depth.
pub fn symbolic_bound(vass: &Vass, cert: &RankingCertificate) -> SymbolicBound {
    let mut factors: Vec<LevelBound> = Vec::new();
    fn walk(node: &LevelNode, depth: usize, dim: usize, factors: &mut Vec<LevelBound>) {
        let coefficient = max_abs(&node.r) * Int::from(dim as u64);
        let z_entries: Vec<Int> = node.z.values().cloned().collect();
        let offset = max_abs(&z_entries);
        if factors.len() < depth {
            factors.push(LevelBound {
                coefficient: coefficient.clone(),
                offset: offset.clone(),
            });
        } else {
            let f = &mut factors[depth - 1];
            if coefficient > f.coefficient || (coefficient == f.coefficient && offset > f.offset) {
                *f = LevelBound {
                    coefficient: coefficient.clone(),
                    offset: offset.clone(),
                };
            }
        }
        for child in &node.children {
            walk(child, depth + 1, dim, factors);
        }
    }
    if let Some(root) = &cert.root {
        walk(root, 1, vass.dim(), &mut factors);
    }
    SymbolicBound { factors }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::Vass;
    use crate::ranking::{analyze, AnalyzeOptions};
    use crate::rat::{int, rat};

    #[test]
    fn conservativity_of_the_reference_systems() {
        assert!(is_conservative(&fixtures::vcsys()));
        assert!(!is_conservative(&fixtures::vexp()));
        let empty = Vass::new(2, vec!["a".into()], vec![]).unwrap();
        assert!(is_conservative(&empty));
    }

    #[test]
    fn generalized_conservativity() {
        assert!(!is_generalized_conservative(&fixtures::vexp(), false));
        // a self-loop with nonzero update is itself a balanced count vector,
        // even though its entries sum to zero
        let v = Vass::new(
            2,
            vec!["l".into()],
            vec![("l".into(), "l".into(), vec![int(1), int(-1)])],
        )
        .unwrap();
        assert!(!is_generalized_conservative(&v, false));
        // same reason: the self-loops of vcsys pump single counters
        assert!(!is_generalized_conservative(&fixtures::vcsys(), false));
        // the swap cycle cancels in every balanced combination
        assert!(is_generalized_conservative(&fixtures::swap_cycle(), false));
    }

    #[test]
    fn generalized_without_syntactic() {
        // opposite nonzero-sum updates on a two-location cycle: not
        // conservative transition by transition, but every balanced count
        // vector cancels exactly
        let v = Vass::new(
            1,
            vec!["a".into(), "b".into()],
            vec![
                ("a".into(), "b".into(), vec![int(1)]),
                ("b".into(), "a".into(), vec![int(-1)]),
            ],
        )
        .unwrap();
        assert!(!is_conservative(&v));
        assert!(is_generalized_conservative(&v, false));
    }

    #[test]
    fn linear_complexity_vprog_is_four() {
        let v = fixtures::vprog();
        let result = analyze(&v, &AnalyzeOptions::default()).unwrap();
        assert_eq!(
            linear_complexity(&v, &result).unwrap(),
            LinearVerdict::ExactLinear(rat(4))
        );
    }

    #[test]
    fn linear_complexity_vexp_unbounded() {
        let v = fixtures::vexp();
        let result = analyze(&v, &AnalyzeOptions::default()).unwrap();
        assert_eq!(
            linear_complexity(&v, &result).unwrap(),
            LinearVerdict::AtLeastQuadratic
        );
    }

    #[test]
    fn linear_complexity_countdown_is_one() {
        let v = fixtures::countdown();
        let result = analyze(&v, &AnalyzeOptions::default()).unwrap();
        assert_eq!(
            linear_complexity(&v, &result).unwrap(),
            LinearVerdict::ExactLinear(rat(1))
        );
    }

    #[test]
    fn linear_complexity_guards_nontermination() {
        let v = fixtures::swap_cycle();
        let result = analyze(&v, &AnalyzeOptions::default()).unwrap();
        assert_eq!(
            linear_complexity(&v, &result),
            Err(ComplexityError::NonTerminatingInput)
        );
    }

    #[test]
    fn cone_dimensions_of_reference_systems() {
        // no cycles at all: only mu = 0 is balanced
        let dag = Vass::new(
            2,
            vec!["a".into(), "b".into()],
            vec![("a".into(), "b".into(), vec![int(1), int(1)])],
        )
        .unwrap();
        assert_eq!(cone_dimension(&dag), 0);
        // swap cycle: all balanced counts cancel exactly
        assert_eq!(cone_dimension(&fixtures::swap_cycle()), 0);
        // vprog: balanced counts span two independent directions
        assert_eq!(cone_dimension(&fixtures::vprog()), 2);
    }

    #[test]
    fn order_bounded_by_cone_dimension() {
        for v in [fixtures::vprog(), fixtures::vcsys(), fixtures::vexp()] {
            let result = analyze(&v, &AnalyzeOptions::default()).unwrap();
            let k = result.order().unwrap();
            let cd = cone_dimension(&v);
            assert!(k <= cd, "order {k} exceeds cone dimension {cd}");
            assert!(cd <= v.dim());
        }
    }

    #[test]
    fn classify_vcsys_is_theta_n_squared() {
        let v = fixtures::vcsys();
        let result = analyze(&v, &AnalyzeOptions::default()).unwrap();
        let report = classify(&v, &result, false, false);
        assert!(report.terminating);
        assert!(report.conservative);
        assert_eq!(report.upper, UpperBound::PolyOrder(2));
        assert_eq!(report.theta(), Some(2));
        let bound = report.bound.unwrap();
        assert_eq!(bound.factors.len(), 2);
    }

    #[test]
    fn classify_vprog_linear() {
        let v = fixtures::vprog();
        let result = analyze(&v, &AnalyzeOptions::default()).unwrap();
        let report = classify(&v, &result, true, false);
        assert_eq!(report.lower, Some(1));
        assert_eq!(report.linear, Some(LinearVerdict::ExactLinear(rat(4))));
        assert_eq!(report.theta(), None);
    }

    #[test]
    fn classify_vexp_upper_unknown() {
        let v = fixtures::vexp();
        let result = analyze(&v, &AnalyzeOptions::default()).unwrap();
        let report = classify(&v, &result, true, false);
        assert!(report.terminating);
        assert_eq!(report.upper, UpperBound::Unknown);
        assert_eq!(report.linear, Some(LinearVerdict::AtLeastQuadratic));
        assert!(report.bound.is_none());
    }
}
