//! The two dual constraint systems at the heart of the analysis, their
//! aggregated primal/dual optimization forms, and the alternative check.
//!
//! For a transition `t` of a sub-VASS with update matrix `D` and flow matrix
//! `F`:
//!
//! - the *cycle system* asks for counts `mu >= 0` with `D mu >= 0`,
//!   `F mu = 0` and `mu(t) >= 1` — a nonnegative multi-cycle through `t`;
//! - the *rank system* asks for `r >= 0`, `z >= 0` with
//!   `r^T d + z(target) - z(source) <= 0` on every transition and `<= -1` on
//!   `t` — an affine function that never increases along steps and strictly
//!   decreases on `t`.
//!
//! Exactly one of the two has a solution. Strictness is encoded as `<= -1`
//! rather than `< 0`: the systems are homogeneous, so any rational solution
//! scales to an integer one with the strict rows at or below -1.

use std::collections::{BTreeMap, BTreeSet};

use num::{One, Signed, Zero};
use thiserror::Error;

use crate::lp::{Direction, LinearProgram, LpError, LpOutcome, Relation};
use crate::model::{LocId, SubVass, TransId};
use crate::rat::{scale_to_integer, Int, Rat};

#[derive(Debug, Error)]
pub enum FarkasError {
    #[error("both constraint systems feasible for transition {0}; solver bug")]
    BothFeasible(TransId),
    #[error("neither constraint system feasible for transition {0}; solver bug")]
    NeitherFeasible(TransId),
    #[error("transition {0} is not part of the sub-VASS")]
    UnknownTransition(TransId),
    #[error("cycle counts exceed u64 range")]
    CountsOverflow,
    #[error("solver invariant violated: {0}")]
    SolverBug(String),
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// Nonnegative integer multiplicities forming a nonnegative multi-cycle:
/// `D mu >= 0`, `F mu = 0`, `mu >= 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleSolution {
    pub mu: BTreeMap<TransId, Int>,
}

impl CycleSolution {
    /// Componentwise sum; solutions of the homogeneous system are closed
    /// under addition.
    pub fn add(&self, other: &CycleSolution) -> CycleSolution {
        let mut mu = self.mu.clone();
        for (&t, v) in &other.mu {
            *mu.entry(t).or_insert_with(Int::zero) += v;
        }
        CycleSolution { mu }
    }

    pub fn counts_u64(&self) -> Result<BTreeMap<TransId, u64>, FarkasError> {
        self.mu
            .iter()
            .map(|(&t, v)| u64::try_from(v).map(|c| (t, c)).map_err(|_| FarkasError::CountsOverflow))
            .collect()
    }

    /// `D * mu` over the sub-VASS the solution was computed for.
    pub fn value(&self, sub: &SubVass<'_>) -> Vec<Int> {
        let mut out = vec![Int::zero(); sub.dim()];
        for tr in sub.transitions() {
            let m = self.mu.get(&tr.id).cloned().unwrap_or_else(Int::zero);
            if m.is_zero() {
                continue;
            }
            for (acc, d) in out.iter_mut().zip(&tr.update) {
                *acc += d * &m;
            }
        }
        out
    }
}

/// Integer coefficients of an affine quasi-ranking function:
/// `state (l, v) |-> r^T v + z(l)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineRankSolution {
    pub r: Vec<Int>,
    pub z: BTreeMap<LocId, Int>,
}

impl AffineRankSolution {
    /// `r^T d + z(target) - z(source)` for one transition: nonpositive means
    /// the affine function never increases along the transition, `<= -1`
    /// means it strictly decreases.
    pub fn row_value(&self, sub: &SubVass<'_>, t: TransId) -> Int {
        let tr = &sub.parent().transitions()[t];
        let mut v: Int = self.r.iter().zip(&tr.update).map(|(r, d)| r * d).sum();
        v += &self.z[&tr.target] - &self.z[&tr.source];
        v
    }

    /// Transitions of the sub-VASS on which this solution is strict.
    pub fn strict_set(&self, sub: &SubVass<'_>) -> BTreeSet<TransId> {
        sub.transition_ids()
            .iter()
            .copied()
            .filter(|&t| self.row_value(sub, t) <= Int::from(-1))
            .collect()
    }
}

/// Componentwise sum of affine solutions over the same sub-VASS. The sum is
/// strict on the union of the parts' strict rows.
pub fn sum_combinator(parts: &[AffineRankSolution]) -> AffineRankSolution {
    let mut iter = parts.iter();
    let first = iter.next().expect("at least one part").clone();
    iter.fold(first, |mut acc, part| {
        for (a, b) in acc.r.iter_mut().zip(&part.r) {
            *a += b;
        }
        for (l, v) in &part.z {
            *acc.z.get_mut(l).expect("same location set") += v;
        }
        acc
    })
}

/// Joint result of the aggregated primal/dual solve.
///
/// `decreasing_set` contains exactly the transitions whose rank system is
/// feasible; `rank_solution` is simultaneously strict on all of them. When
/// some transitions are not decreasing, `cycle_solution` covers each of them
/// with positive multiplicity.
#[derive(Debug, Clone)]
pub struct PrimalDualResult {
    pub decreasing_set: BTreeSet<TransId>,
    pub rank_solution: AffineRankSolution,
    pub cycle_solution: Option<CycleSolution>,
    pub active_primal: BTreeMap<TransId, bool>,
    pub active_dual: BTreeMap<TransId, bool>,
    pub objective_primal: Rat,
    pub objective_dual: Rat,
}

/// Which side of the alternative holds for a transition.
#[derive(Debug, Clone)]
pub enum Alternative {
    Cycle(CycleSolution),
    Ranking(AffineRankSolution),
}

fn trans_position(sub: &SubVass<'_>, t: TransId) -> Result<usize, FarkasError> {
    sub.transition_ids()
        .binary_search(&t)
        .map_err(|_| FarkasError::UnknownTransition(t))
}

fn loc_position(sub: &SubVass<'_>, l: LocId) -> usize {
    sub.locations().binary_search(&l).expect("location in scope")
}

/// Adds the rows `D mu >= 0` (one per dimension) and `F mu = 0` (one per
/// location) over `mu` variables at `offset..offset+nt`.
fn push_balance_rows(lp: &mut LinearProgram, sub: &SubVass<'_>, offset: usize, total: usize) {
    let nt = sub.transition_ids().len();
    for i in 0..sub.dim() {
        let mut row = vec![Rat::zero(); total];
        for (p, tr) in sub.transitions().enumerate() {
            row[offset + p] = Rat::from_integer(tr.update[i].clone());
        }
        lp.add_row(row, Relation::Ge, Rat::zero());
    }
    for &l in sub.locations() {
        let mut row = vec![Rat::zero(); total];
        let mut nonzero = false;
        for (p, tr) in sub.transitions().enumerate() {
            if tr.is_self_loop() {
                continue;
            }
            if tr.target == l {
                row[offset + p] += Rat::one();
                nonzero = true;
            }
            if tr.source == l {
                row[offset + p] -= Rat::one();
                nonzero = true;
            }
        }
        if nonzero {
            lp.add_row(row, Relation::Eq, Rat::zero());
        }
    }
    debug_assert!(nt <= total);
}

/// Feasibility of the cycle system for `t`; `None` means infeasible (and by
/// the alternative, the rank system for `t` is feasible).
pub fn solve_system_a(sub: &SubVass<'_>, t: TransId) -> Result<Option<CycleSolution>, FarkasError> {
    let pos = trans_position(sub, t)?;
    let nt = sub.transition_ids().len();
    let mut lp = LinearProgram::new(nt);
    push_balance_rows(&mut lp, sub, 0, nt);
    lp.set_lower(pos, Rat::one());
    match lp.solve()? {
        LpOutcome::Optimal { point, .. } => {
            let (mu, _) = scale_to_integer(&point);
            let solution = CycleSolution {
                mu: sub.transition_ids().iter().copied().zip(mu).collect(),
            };
            validate_cycle_solution(sub, &solution, Some(t))?;
            Ok(Some(solution))
        }
        LpOutcome::Infeasible { .. } => Ok(None),
        LpOutcome::Unbounded { .. } => {
            Err(FarkasError::SolverBug("feasibility solve reported unbounded".into()))
        }
    }
}

/// Feasibility of the rank system for `t`; `None` means infeasible. With
/// `minimize_coefficients`, a second objective pass searches for small
/// `1^T r + 1^T z` among the solutions.
pub fn solve_system_b(
    sub: &SubVass<'_>,
    t: TransId,
    minimize_coefficients: bool,
) -> Result<Option<AffineRankSolution>, FarkasError> {
    trans_position(sub, t)?;
    let mut lp = rank_system_lp(sub, &BTreeSet::from([t]));
    if minimize_coefficients {
        let n = lp.num_vars();
        lp.set_objective(Direction::Minimize, vec![Rat::one(); n]);
    }
    match lp.solve()? {
        LpOutcome::Optimal { point, .. } => {
            let solution = bind_rank_solution(sub, &point);
            validate_rank_solution(sub, &solution, &BTreeSet::from([t]))?;
            Ok(Some(solution))
        }
        LpOutcome::Infeasible { .. } => Ok(None),
        LpOutcome::Unbounded { .. } => {
            Err(FarkasError::SolverBug("feasibility solve reported unbounded".into()))
        }
    }
}

/// Rank-system LP over variables `r` (dimension-many) then `z` (one per
/// location): every row `<= 0`, rows in `strict` forced `<= -1`.
fn rank_system_lp(sub: &SubVass<'_>, strict: &BTreeSet<TransId>) -> LinearProgram {
    let dim = sub.dim();
    let nl = sub.locations().len();
    let total = dim + nl;
    let mut lp = LinearProgram::new(total);
    for tr in sub.transitions() {
        let mut row = vec![Rat::zero(); total];
        for (i, d) in tr.update.iter().enumerate() {
            row[i] = Rat::from_integer(d.clone());
        }
        if !tr.is_self_loop() {
            row[dim + loc_position(sub, tr.target)] += Rat::one();
            row[dim + loc_position(sub, tr.source)] -= Rat::one();
        }
        let rhs = if strict.contains(&tr.id) {
            -Rat::one()
        } else {
            Rat::zero()
        };
        lp.add_row(row, Relation::Le, rhs);
    }
    lp
}

fn bind_rank_solution(sub: &SubVass<'_>, point: &[Rat]) -> AffineRankSolution {
    let (scaled, _) = scale_to_integer(point);
    let dim = sub.dim();
    AffineRankSolution {
        r: scaled[..dim].to_vec(),
        z: sub
            .locations()
            .iter()
            .copied()
            .zip(scaled[dim..].iter().cloned())
            .collect(),
    }
}

/// Checks the alternative for one transition: exactly one of the two systems
/// must be feasible.
pub fn check_alternative(sub: &SubVass<'_>, t: TransId) -> Result<Alternative, FarkasError> {
    let cycle = solve_system_a(sub, t)?;
    let rank = solve_system_b(sub, t, false)?;
    match (cycle, rank) {
        (Some(_), Some(_)) => Err(FarkasError::BothFeasible(t)),
        (None, None) => Err(FarkasError::NeitherFeasible(t)),
        (Some(c), None) => Ok(Alternative::Cycle(c)),
        (None, Some(r)) => Ok(Alternative::Ranking(r)),
    }
}

/// Solves the aggregated primal and dual problems, replacing one LP call per
/// transition with a single pair of solves.
///
/// Primal: `max 1^T a` with `0 <= a <= 1`, `a <= mu`, `D mu >= 0`,
/// `F mu = 0`. Dual: `min 1^T b` with `0 <= b <= 1`, `r, z >= 0`,
/// `D^T r + F^T z <= -1 + b`. At the optimum both activity vectors are 0/1,
/// agree with each other, and the objectives coincide exactly.
pub fn solve_primal_dual(sub: &SubVass<'_>) -> Result<PrimalDualResult, FarkasError> {
    let nt = sub.transition_ids().len();
    let dim = sub.dim();
    let nl = sub.locations().len();

    // Primal over (a, mu).
    let total_p = 2 * nt;
    let mut primal = LinearProgram::new(total_p);
    let mut obj = vec![Rat::zero(); total_p];
    for p in 0..nt {
        obj[p] = Rat::one();
        primal.set_upper(p, Rat::one());
        let mut row = vec![Rat::zero(); total_p];
        row[p] = Rat::one();
        row[nt + p] = -Rat::one();
        primal.add_row(row, Relation::Le, Rat::zero());
    }
    primal.set_objective(Direction::Maximize, obj);
    push_balance_rows(&mut primal, sub, nt, total_p);
    let (a_point, mu_point, objective_primal) = match primal.solve()? {
        LpOutcome::Optimal { point, value, .. } => {
            (point[..nt].to_vec(), point[nt..].to_vec(), value)
        }
        other => {
            return Err(FarkasError::SolverBug(format!(
                "primal problem must have an optimum, got {other:?}"
            )))
        }
    };

    // Dual over (b, r, z).
    let total_q = nt + dim + nl;
    let mut dual = LinearProgram::new(total_q);
    let mut obj = vec![Rat::zero(); total_q];
    for p in 0..nt {
        obj[p] = Rat::one();
        dual.set_upper(p, Rat::one());
    }
    dual.set_objective(Direction::Minimize, obj);
    for (p, tr) in sub.transitions().enumerate() {
        let mut row = vec![Rat::zero(); total_q];
        for (i, d) in tr.update.iter().enumerate() {
            row[nt + i] = Rat::from_integer(d.clone());
        }
        if !tr.is_self_loop() {
            row[nt + dim + loc_position(sub, tr.target)] += Rat::one();
            row[nt + dim + loc_position(sub, tr.source)] -= Rat::one();
        }
        row[p] = -Rat::one();
        dual.add_row(row, Relation::Le, -Rat::one());
    }
    let (b_point, rz_point, objective_dual) = match dual.solve()? {
        LpOutcome::Optimal { point, value, .. } => {
            (point[..nt].to_vec(), point[nt..].to_vec(), value)
        }
        other => {
            return Err(FarkasError::SolverBug(format!(
                "dual problem must have an optimum, got {other:?}"
            )))
        }
    };

    if objective_primal != objective_dual {
        return Err(FarkasError::SolverBug(format!(
            "duality gap: primal {objective_primal} vs dual {objective_dual}"
        )));
    }

    let as_bool = |x: &Rat, what: &str| -> Result<bool, FarkasError> {
        if x.is_zero() {
            Ok(false)
        } else if x.is_one() {
            Ok(true)
        } else {
            Err(FarkasError::SolverBug(format!(
                "optimal {what} component is not 0/1: {x}"
            )))
        }
    };
    let mut active_primal = BTreeMap::new();
    let mut active_dual = BTreeMap::new();
    let mut decreasing_set = BTreeSet::new();
    for (p, &t) in sub.transition_ids().iter().enumerate() {
        let a = as_bool(&a_point[p], "activity")?;
        let b = as_bool(&b_point[p], "dual activity")?;
        if a != b {
            return Err(FarkasError::SolverBug(format!(
                "complementarity violated at transition {t}: a={a}, b={b}"
            )));
        }
        active_primal.insert(t, a);
        active_dual.insert(t, b);
        if !a {
            decreasing_set.insert(t);
        }
    }

    let rank_solution = bind_rank_solution(sub, &rz_point);
    validate_rank_solution(sub, &rank_solution, &decreasing_set)?;

    let cycle_solution = if decreasing_set.len() == nt {
        None
    } else {
        let (mu, _) = scale_to_integer(&mu_point);
        let solution = CycleSolution {
            mu: sub.transition_ids().iter().copied().zip(mu).collect(),
        };
        validate_cycle_solution(sub, &solution, None)?;
        for (&t, covered) in &active_primal {
            if *covered && solution.mu[&t] < Int::one() {
                return Err(FarkasError::SolverBug(format!(
                    "cycle counts do not cover transition {t}"
                )));
            }
        }
        Some(solution)
    };

    Ok(PrimalDualResult {
        decreasing_set,
        rank_solution,
        cycle_solution,
        active_primal,
        active_dual,
        objective_primal,
        objective_dual,
    })
}

/// Always-on sanity check: counts are nonnegative, balanced and have a
/// nonnegative value; with `through`, that transition has multiplicity >= 1.
pub(crate) fn validate_cycle_solution(
    sub: &SubVass<'_>,
    solution: &CycleSolution,
    through: Option<TransId>,
) -> Result<(), FarkasError> {
    let bug = |msg: String| Err(FarkasError::SolverBug(msg));
    if solution.mu.values().any(|m| m.is_negative()) {
        return bug("negative multiplicity".into());
    }
    if solution.value(sub).iter().any(|v| v.is_negative()) {
        return bug("multi-cycle value has a negative component".into());
    }
    let mut degree: BTreeMap<LocId, Int> = BTreeMap::new();
    for tr in sub.transitions() {
        let m = solution.mu.get(&tr.id).cloned().unwrap_or_else(Int::zero);
        if tr.is_self_loop() || m.is_zero() {
            continue;
        }
        *degree.entry(tr.source).or_insert_with(Int::zero) -= &m;
        *degree.entry(tr.target).or_insert_with(Int::zero) += &m;
    }
    if degree.values().any(|d| !d.is_zero()) {
        return bug("counts are not balanced".into());
    }
    if let Some(t) = through {
        if solution.mu.get(&t).cloned().unwrap_or_else(Int::zero) < Int::one() {
            return bug(format!("multiplicity of transition {t} below 1"));
        }
    }
    Ok(())
}

/// Always-on sanity check: integer, nonnegative, nonpositive rows, and
/// strictly below -1 on the requested rows. Rows outside `strict` must be
/// exactly zero precisely when their own rank system is infeasible, which is
/// not re-checked here.
pub(crate) fn validate_rank_solution(
    sub: &SubVass<'_>,
    solution: &AffineRankSolution,
    strict: &BTreeSet<TransId>,
) -> Result<(), FarkasError> {
    let bug = |msg: String| Err(FarkasError::SolverBug(msg));
    if solution.r.iter().any(|x| x.is_negative()) || solution.z.values().any(|x| x.is_negative()) {
        return bug("rank coefficients must be nonnegative".into());
    }
    for &t in sub.transition_ids() {
        let row = solution.row_value(sub, t);
        if strict.contains(&t) {
            if row > Int::from(-1) {
                return bug(format!("row {t} not strict: {row}"));
            }
        } else if row.is_positive() {
            return bug(format!("row {t} positive: {row}"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn vprog_t1_cycle_system_infeasible() {
        let v = fixtures::vprog();
        assert!(solve_system_a(&v.view(), 1).unwrap().is_none());
    }

    #[test]
    fn swap_cycle_cycle_system_feasible() {
        let v = fixtures::swap_cycle();
        let sol = solve_system_a(&v.view(), 0).unwrap().expect("feasible");
        assert!(sol.mu[&0] >= Int::one());
        assert_eq!(sol.mu[&0], sol.mu[&1]);
        assert!(sol.value(&v.view()).iter().all(|x| x.is_zero()));
    }

    #[test]
    fn zero_loop_cycle_system_feasible() {
        let v = fixtures::zero_loop();
        let sol = solve_system_a(&v.view(), 0).unwrap().expect("feasible");
        assert!(sol.mu[&0] >= Int::one());
    }

    #[test]
    fn vprog_t1_rank_system_feasible() {
        let v = fixtures::vprog();
        let sol = solve_system_b(&v.view(), 1, false).unwrap().expect("feasible");
        // strict at t1, nonpositive elsewhere
        assert!(sol.row_value(&v.view(), 1) <= Int::from(-1));
        for t in [0, 2] {
            assert!(sol.row_value(&v.view(), t) <= Int::zero());
        }
    }

    #[test]
    fn swap_cycle_rank_system_infeasible() {
        let v = fixtures::swap_cycle();
        for t in [0, 1] {
            assert!(solve_system_b(&v.view(), t, false).unwrap().is_none());
        }
    }

    #[test]
    fn countdown_rank_system_feasible() {
        let v = fixtures::countdown();
        let sol = solve_system_b(&v.view(), 0, false).unwrap().expect("feasible");
        assert!(sol.row_value(&v.view(), 0) <= Int::from(-1));
    }

    #[test]
    fn alternative_on_hand_cases() {
        let vprog = fixtures::vprog();
        assert!(matches!(
            check_alternative(&vprog.view(), 0).unwrap(),
            Alternative::Ranking(_)
        ));
        let swap = fixtures::swap_cycle();
        assert!(matches!(
            check_alternative(&swap.view(), 0).unwrap(),
            Alternative::Cycle(_)
        ));
        let zero = fixtures::zero_loop();
        assert!(matches!(
            check_alternative(&zero.view(), 0).unwrap(),
            Alternative::Cycle(_)
        ));
    }

    #[test]
    fn primal_dual_vprog_all_decreasing() {
        let v = fixtures::vprog();
        let result = solve_primal_dual(&v.view()).unwrap();
        assert_eq!(result.decreasing_set, BTreeSet::from([0, 1, 2]));
        assert!(result.cycle_solution.is_none());
        assert_eq!(result.objective_primal, Rat::zero());
        assert_eq!(result.objective_dual, Rat::zero());
    }

    #[test]
    fn primal_dual_swap_cycle_nothing_decreasing() {
        let v = fixtures::swap_cycle();
        let result = solve_primal_dual(&v.view()).unwrap();
        assert!(result.decreasing_set.is_empty());
        let cycle = result.cycle_solution.expect("cycle counts");
        assert!(cycle.mu.values().all(|m| *m >= Int::one()));
    }

    #[test]
    fn primal_dual_vcsys_cross_transitions() {
        let v = fixtures::vcsys();
        let result = solve_primal_dual(&v.view()).unwrap();
        // the two cross transitions decrease, the two self-loops remain
        assert_eq!(result.decreasing_set, BTreeSet::from([0, 2]));
        // agrees with the per-transition solves
        for t in 0..4 {
            let b = solve_system_b(&v.view(), t, false).unwrap();
            assert_eq!(b.is_some(), result.decreasing_set.contains(&t));
        }
    }

    #[test]
    fn sum_combinator_adds_componentwise() {
        let v = fixtures::vprog();
        let a = AffineRankSolution {
            r: vec![Int::from(1), Int::zero()],
            z: BTreeMap::from([(0, Int::zero()), (1, Int::zero())]),
        };
        let b = AffineRankSolution {
            r: vec![Int::zero(), Int::from(2)],
            z: BTreeMap::from([(0, Int::zero()), (1, Int::zero())]),
        };
        let s = sum_combinator(&[a.clone(), b]);
        assert_eq!(s.r, vec![Int::from(1), Int::from(2)]);
        assert_eq!(sum_combinator(&[a.clone()]), a);
        drop(v);
    }

    #[test]
    fn cycle_solutions_closed_under_addition() {
        let v = fixtures::vcsys();
        let sub = v.view();
        // the 4-cycle uses t0 and t2 across, plus self-loops to balance values
        let s1 = solve_system_a(&sub, 1).unwrap();
        let s2 = solve_system_a(&sub, 3).unwrap();
        if let (Some(s1), Some(s2)) = (s1, s2) {
            let sum = s1.add(&s2);
            validate_cycle_solution(&sub, &sum, None).unwrap();
        }
    }
}
