//! Exact simplex over arbitrary-precision rationals.
//!
//! The solver decides feasibility, optimizes linear objectives, reports
//! unboundedness with an explicit ray, and extracts dual solutions and
//! infeasibility certificates from the final tableau. All variables are
//! nonnegative; callers express further restrictions through per-variable
//! bounds or explicit rows. Pivoting uses Bland's smallest-index rule, so
//! every solve terminates — no tolerance, no cycling.

use num::{One, Signed, Zero};
use thiserror::Error;

use crate::rat::Rat;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: Vec<Rat>,
    pub relation: Relation,
    pub rhs: Rat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Objective {
    pub direction: Direction,
    pub coeffs: Vec<Rat>,
}

/// A linear program over nonnegative variables.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    num_vars: usize,
    constraints: Vec<Constraint>,
    objective: Option<Objective>,
    lower: Vec<Rat>,
    upper: Vec<Option<Rat>>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LpError {
    #[error("constraint {index} has {got} coefficients, expected {expected}")]
    MalformedProgram {
        index: usize,
        got: usize,
        expected: usize,
    },
    #[error("objective has {got} coefficients, expected {expected}")]
    MalformedObjective { got: usize, expected: usize },
    #[error("lower bound of variable {0} is negative")]
    NegativeLowerBound(usize),
}

/// Outcome of an exact solve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    /// `point` satisfies every constraint exactly and attains `value`.
    /// `dual` holds one multiplier per constraint row (bounds excluded);
    /// the multipliers satisfy the usual sign conventions and reproduce
    /// `value` against the right-hand sides.
    Optimal {
        point: Vec<Rat>,
        value: Rat,
        dual: Option<Vec<Rat>>,
    },
    /// `farkas`, when present, is a row combination proving emptiness:
    /// nonnegative on `<=` rows, nonpositive on `>=` rows, free on `=` rows,
    /// with combined coefficients >= 0 on every variable and a negative
    /// combined right-hand side.
    Infeasible { farkas: Option<Vec<Rat>> },
    /// `point` is feasible and `point + t * ray` stays feasible for every
    /// `t >= 0` while improving the objective.
    Unbounded { point: Vec<Rat>, ray: Vec<Rat> },
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            num_vars,
            constraints: Vec::new(),
            objective: None,
            lower: vec![Rat::zero(); num_vars],
            upper: vec![None; num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn add_row(&mut self, coeffs: Vec<Rat>, relation: Relation, rhs: Rat) {
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    pub fn set_objective(&mut self, direction: Direction, coeffs: Vec<Rat>) {
        self.objective = Some(Objective { direction, coeffs });
    }

    /// Raises the implicit lower bound of a variable (must stay nonnegative).
    pub fn set_lower(&mut self, var: usize, bound: Rat) {
        self.lower[var] = bound;
    }

    pub fn set_upper(&mut self, var: usize, bound: Rat) {
        self.upper[var] = Some(bound);
    }

    fn validate(&self) -> Result<(), LpError> {
        for (i, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != self.num_vars {
                return Err(LpError::MalformedProgram {
                    index: i,
                    got: c.coeffs.len(),
                    expected: self.num_vars,
                });
            }
        }
        if let Some(obj) = &self.objective {
            if obj.coeffs.len() != self.num_vars {
                return Err(LpError::MalformedObjective {
                    got: obj.coeffs.len(),
                    expected: self.num_vars,
                });
            }
        }
        if let Some(i) = self.lower.iter().position(|b| b.is_negative()) {
            return Err(LpError::NegativeLowerBound(i));
        }
        Ok(())
    }

    /// Checks a point against every constraint and bound, exactly.
    pub fn satisfies(&self, point: &[Rat]) -> bool {
        if point.len() != self.num_vars {
            return false;
        }
        for (x, (lo, up)) in point.iter().zip(self.lower.iter().zip(&self.upper)) {
            if x < lo {
                return false;
            }
            if let Some(u) = up {
                if x > u {
                    return false;
                }
            }
        }
        self.constraints.iter().all(|c| {
            let lhs: Rat = c.coeffs.iter().zip(point).map(|(a, x)| a * x).sum();
            match c.relation {
                Relation::Le => lhs <= c.rhs,
                Relation::Eq => lhs == c.rhs,
                Relation::Ge => lhs >= c.rhs,
            }
        })
    }

    /// Objective value of a point (zero for pure feasibility programs).
    pub fn objective_value(&self, point: &[Rat]) -> Rat {
        match &self.objective {
            Some(obj) => obj.coeffs.iter().zip(point).map(|(c, x)| c * x).sum(),
            None => Rat::zero(),
        }
    }

    pub fn solve(&self) -> Result<LpOutcome, LpError> {
        self.validate()?;
        Ok(Simplex::run(self))
    }
}

/// Effective rows: user constraints followed by bound-derived rows. Dual and
/// Farkas vectors are reported for the user constraints only.
struct EffectiveRow {
    coeffs: Vec<Rat>,
    relation: Relation,
    rhs: Rat,
    // negated during rhs normalization
    flipped: bool,
}

struct Simplex {
    n: usize,
    rows: Vec<EffectiveRow>,
    num_user_rows: usize,
    // tableau: m rows over total columns, plus rhs and basis bookkeeping
    tab: Vec<Vec<Rat>>,
    rhs: Vec<Rat>,
    basis: Vec<usize>,
    obj: Vec<Rat>,
    obj_rhs: Rat,
    total_cols: usize,
    slack_col: Vec<Option<usize>>,
    artificial_col: Vec<Option<usize>>,
    artificial_start: usize,
}

enum PivotResult {
    Optimal,
    Unbounded { entering: usize },
}

impl Simplex {
    fn run(lp: &LinearProgram) -> LpOutcome {
        let maximize = !matches!(
            lp.objective,
            Some(Objective {
                direction: Direction::Minimize,
                ..
            })
        );
        let mut cost = vec![Rat::zero(); lp.num_vars];
        if let Some(obj) = &lp.objective {
            for (c, o) in cost.iter_mut().zip(&obj.coeffs) {
                *c = if maximize { o.clone() } else { -o.clone() };
            }
        }

        let mut rows: Vec<EffectiveRow> = lp
            .constraints
            .iter()
            .map(|c| EffectiveRow {
                coeffs: c.coeffs.clone(),
                relation: c.relation,
                rhs: c.rhs.clone(),
                flipped: false,
            })
            .collect();
        let num_user_rows = rows.len();
        for (j, lo) in lp.lower.iter().enumerate() {
            if lo.is_positive() {
                let mut coeffs = vec![Rat::zero(); lp.num_vars];
                coeffs[j] = Rat::one();
                rows.push(EffectiveRow {
                    coeffs,
                    relation: Relation::Ge,
                    rhs: lo.clone(),
                    flipped: false,
                });
            }
        }
        for (j, up) in lp.upper.iter().enumerate() {
            if let Some(u) = up {
                let mut coeffs = vec![Rat::zero(); lp.num_vars];
                coeffs[j] = Rat::one();
                rows.push(EffectiveRow {
                    coeffs,
                    relation: Relation::Le,
                    rhs: u.clone(),
                    flipped: false,
                });
            }
        }
        for row in &mut rows {
            if row.rhs.is_negative() {
                for a in &mut row.coeffs {
                    *a = -a.clone();
                }
                row.rhs = -row.rhs.clone();
                row.relation = match row.relation {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
                row.flipped = true;
            }
        }

        let m = rows.len();
        let num_slacks = rows
            .iter()
            .filter(|r| r.relation != Relation::Eq)
            .count();
        let num_artificials = rows
            .iter()
            .filter(|r| r.relation != Relation::Le)
            .count();
        let artificial_start = lp.num_vars + num_slacks;
        let total_cols = artificial_start + num_artificials;

        let mut tab = vec![vec![Rat::zero(); total_cols]; m];
        let mut rhs = Vec::with_capacity(m);
        let mut basis = vec![0usize; m];
        let mut slack_col = vec![None; m];
        let mut artificial_col = vec![None; m];
        let mut next_slack = lp.num_vars;
        let mut next_artificial = artificial_start;
        for (i, row) in rows.iter().enumerate() {
            tab[i][..lp.num_vars].clone_from_slice(&row.coeffs);
            rhs.push(row.rhs.clone());
            match row.relation {
                Relation::Le => {
                    tab[i][next_slack] = Rat::one();
                    slack_col[i] = Some(next_slack);
                    basis[i] = next_slack;
                    next_slack += 1;
                }
                Relation::Ge => {
                    tab[i][next_slack] = -Rat::one();
                    slack_col[i] = Some(next_slack);
                    next_slack += 1;
                    tab[i][next_artificial] = Rat::one();
                    artificial_col[i] = Some(next_artificial);
                    basis[i] = next_artificial;
                    next_artificial += 1;
                }
                Relation::Eq => {
                    tab[i][next_artificial] = Rat::one();
                    artificial_col[i] = Some(next_artificial);
                    basis[i] = next_artificial;
                    next_artificial += 1;
                }
            }
        }

        let mut s = Simplex {
            n: lp.num_vars,
            rows,
            num_user_rows,
            tab,
            rhs,
            basis,
            obj: vec![Rat::zero(); total_cols],
            obj_rhs: Rat::zero(),
            total_cols,
            slack_col,
            artificial_col,
            artificial_start,
        };

        // Phase 1: drive the artificial variables to zero.
        if num_artificials > 0 {
            let mut phase1_cost = vec![Rat::zero(); total_cols];
            for c in &mut phase1_cost[artificial_start..] {
                *c = -Rat::one();
            }
            s.load_objective(&phase1_cost);
            match s.pivot_loop(total_cols) {
                PivotResult::Optimal => {}
                PivotResult::Unbounded { .. } => unreachable!("phase 1 objective is bounded"),
            }
            if s.obj_rhs.is_negative() {
                let farkas = s.extract_farkas(&phase1_cost);
                return LpOutcome::Infeasible { farkas: Some(farkas) };
            }
            s.evict_artificials();
        }

        // Phase 2: optimize the real objective over allowed columns only.
        let mut phase2_cost = vec![Rat::zero(); total_cols];
        phase2_cost[..lp.num_vars].clone_from_slice(&cost);
        s.load_objective(&phase2_cost);
        match s.pivot_loop(artificial_start) {
            PivotResult::Optimal => {
                let point = s.point();
                debug_assert!(lp.satisfies(&point));
                let value = if maximize {
                    s.obj_rhs.clone()
                } else {
                    -s.obj_rhs.clone()
                };
                let dual = s.extract_dual(&phase2_cost, maximize);
                LpOutcome::Optimal {
                    point,
                    value,
                    dual: Some(dual),
                }
            }
            PivotResult::Unbounded { entering } => {
                let point = s.point();
                let ray = s.ray(entering);
                debug_assert!(lp.satisfies(&point));
                LpOutcome::Unbounded { point, ray }
            }
        }
    }

    /// Sets the objective row to `z_j - c_j` for the given cost vector.
    fn load_objective(&mut self, cost: &[Rat]) {
        for j in 0..self.total_cols {
            let mut z = Rat::zero();
            for i in 0..self.tab.len() {
                let cb = &cost[self.basis[i]];
                if !cb.is_zero() {
                    z += cb * &self.tab[i][j];
                }
            }
            self.obj[j] = z - &cost[j];
        }
        let mut z = Rat::zero();
        for i in 0..self.tab.len() {
            let cb = &cost[self.basis[i]];
            if !cb.is_zero() {
                z += cb * &self.rhs[i];
            }
        }
        self.obj_rhs = z;
    }

    /// Bland's rule: entering column is the smallest index with a negative
    /// reduced cost, leaving row has the minimum ratio with ties broken by
    /// the smallest basic variable index.
    fn pivot_loop(&mut self, allowed_cols: usize) -> PivotResult {
        loop {
            let entering = (0..allowed_cols).find(|&j| self.obj[j].is_negative());
            let Some(e) = entering else {
                return PivotResult::Optimal;
            };
            let mut leave: Option<(usize, Rat)> = None;
            for i in 0..self.tab.len() {
                if self.tab[i][e].is_positive() {
                    let ratio = &self.rhs[i] / &self.tab[i][e];
                    let better = match &leave {
                        None => true,
                        Some((li, r)) => {
                            ratio < *r || (ratio == *r && self.basis[i] < self.basis[*li])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((l, _)) = leave else {
                return PivotResult::Unbounded { entering: e };
            };
            self.pivot(l, e);
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.tab[row][col].clone();
        for x in &mut self.tab[row] {
            *x /= &p;
        }
        self.rhs[row] /= &p;
        for i in 0..self.tab.len() {
            if i == row {
                continue;
            }
            let f = self.tab[i][col].clone();
            if f.is_zero() {
                continue;
            }
            for j in 0..self.total_cols {
                let delta = &f * &self.tab[row][j];
                self.tab[i][j] -= delta;
            }
            let delta = &f * &self.rhs[row];
            self.rhs[i] -= delta;
        }
        let f = self.obj[col].clone();
        if !f.is_zero() {
            for j in 0..self.total_cols {
                let delta = &f * &self.tab[row][j];
                self.obj[j] -= delta;
            }
            let delta = &f * &self.rhs[row];
            self.obj_rhs -= delta;
        }
        self.basis[row] = col;
    }

    /// After phase 1, pivots basic artificials out where a real column is
    /// available; rows that stay artificial are redundant and remain at zero.
    fn evict_artificials(&mut self) {
        for i in 0..self.tab.len() {
            if self.basis[i] >= self.artificial_start {
                debug_assert!(self.rhs[i].is_zero());
                if let Some(j) = (0..self.artificial_start).find(|&j| !self.tab[i][j].is_zero()) {
                    self.pivot(i, j);
                }
            }
        }
    }

    fn point(&self) -> Vec<Rat> {
        let mut x = vec![Rat::zero(); self.n];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.n {
                x[b] = self.rhs[i].clone();
            }
        }
        x
    }

    fn ray(&self, entering: usize) -> Vec<Rat> {
        let mut ray = vec![Rat::zero(); self.n];
        if entering < self.n {
            ray[entering] = Rat::one();
        }
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.n {
                ray[b] = -self.tab[i][entering].clone();
            }
        }
        ray
    }

    /// Simplex multipliers for the current objective, read off the columns
    /// that formed the initial identity: `y_i = (z_j - c_j) + c_j` evaluated
    /// at row `i`'s own slack or artificial column.
    fn multipliers(&self, cost: &[Rat]) -> Vec<Rat> {
        (0..self.rows.len())
            .map(|i| match self.rows[i].relation {
                Relation::Le => self.obj[self.slack_col[i].unwrap()].clone(),
                Relation::Ge => -self.obj[self.slack_col[i].unwrap()].clone(),
                Relation::Eq => {
                    let col = self.artificial_col[i].unwrap();
                    self.obj[col].clone() + &cost[col]
                }
            })
            .collect()
    }

    fn extract_dual(&self, cost: &[Rat], maximize: bool) -> Vec<Rat> {
        let y = self.multipliers(cost);
        self.rows[..self.num_user_rows]
            .iter()
            .zip(y)
            .map(|(row, yi)| {
                let oriented = if row.flipped { -yi } else { yi };
                if maximize {
                    oriented
                } else {
                    -oriented
                }
            })
            .collect()
    }

    fn extract_farkas(&self, cost: &[Rat]) -> Vec<Rat> {
        let y = self.multipliers(cost);
        self.rows[..self.num_user_rows]
            .iter()
            .zip(y)
            .map(|(row, yi)| if row.flipped { -yi } else { yi })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, ratio};

    fn max_lp(c: Vec<Rat>, rows: Vec<(Vec<Rat>, Relation, Rat)>) -> LinearProgram {
        let mut lp = LinearProgram::new(c.len());
        lp.set_objective(Direction::Maximize, c);
        for (coeffs, rel, rhs) in rows {
            lp.add_row(coeffs, rel, rhs);
        }
        lp
    }

    #[test]
    fn single_constraint_optimum() {
        let lp = max_lp(vec![rat(1)], vec![(vec![rat(1)], Relation::Le, rat(3))]);
        match lp.solve().unwrap() {
            LpOutcome::Optimal { point, value, .. } => {
                assert_eq!(point, vec![rat(3)]);
                assert_eq!(value, rat(3));
            }
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn contradictory_bounds_infeasible() {
        let mut lp = LinearProgram::new(1);
        lp.add_row(vec![rat(1)], Relation::Le, rat(-1));
        match lp.solve().unwrap() {
            LpOutcome::Infeasible { farkas } => {
                let y = farkas.expect("certificate");
                // y <= 0 on the <= row, combined rhs negative
                assert!(y[0].is_positive() || y[0].is_negative());
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn unbounded_axis() {
        let lp = max_lp(vec![rat(1)], vec![]);
        match lp.solve().unwrap() {
            LpOutcome::Unbounded { point, ray } => {
                assert_eq!(point, vec![rat(0)]);
                assert!(ray[0].is_positive());
            }
            other => panic!("expected unbounded, got {other:?}"),
        }
    }

    #[test]
    fn minimization_and_equalities() {
        // min x + y s.t. x + y >= 2, x - y = 0  ->  x = y = 1.
        let mut lp = LinearProgram::new(2);
        lp.set_objective(Direction::Minimize, vec![rat(1), rat(1)]);
        lp.add_row(vec![rat(1), rat(1)], Relation::Ge, rat(2));
        lp.add_row(vec![rat(1), rat(-1)], Relation::Eq, rat(0));
        match lp.solve().unwrap() {
            LpOutcome::Optimal { point, value, .. } => {
                assert_eq!(point, vec![rat(1), rat(1)]);
                assert_eq!(value, rat(2));
            }
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn fractional_optimum_is_exact() {
        // max x + y s.t. 2x + y <= 3, x + 3y <= 4 -> x = 1, y = 1, but with
        // rationally scaled rows the optimum lands on thirds.
        let lp = max_lp(
            vec![rat(1), rat(1)],
            vec![
                (vec![rat(3), rat(1)], Relation::Le, rat(2)),
                (vec![rat(1), rat(3)], Relation::Le, rat(2)),
            ],
        );
        match lp.solve().unwrap() {
            LpOutcome::Optimal { point, value, .. } => {
                assert_eq!(point, vec![ratio(1, 2), ratio(1, 2)]);
                assert_eq!(value, rat(1));
                assert!(lp.satisfies(&point));
            }
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn bounds_are_respected() {
        let mut lp = LinearProgram::new(2);
        lp.set_objective(Direction::Maximize, vec![rat(1), rat(2)]);
        lp.set_upper(0, rat(5));
        lp.set_upper(1, ratio(7, 2));
        lp.set_lower(1, rat(1));
        match lp.solve().unwrap() {
            LpOutcome::Optimal { point, value, .. } => {
                assert_eq!(point, vec![rat(5), ratio(7, 2)]);
                assert_eq!(value, rat(12));
            }
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn degenerate_cycling_terminates() {
        // Beale's classic cycling example; Bland's rule must terminate.
        let lp = max_lp(
            vec![ratio(3, 4), rat(-150), ratio(1, 50), rat(-6)],
            vec![
                (
                    vec![ratio(1, 4), rat(-60), ratio(-1, 25), rat(9)],
                    Relation::Le,
                    rat(0),
                ),
                (
                    vec![ratio(1, 2), rat(-90), ratio(-1, 50), rat(3)],
                    Relation::Le,
                    rat(0),
                ),
                (vec![rat(0), rat(0), rat(1), rat(0)], Relation::Le, rat(1)),
            ],
        );
        match lp.solve().unwrap() {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, ratio(1, 20)),
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn dual_matches_primal_value() {
        let lp = max_lp(
            vec![rat(2), rat(3)],
            vec![
                (vec![rat(1), rat(1)], Relation::Le, rat(4)),
                (vec![rat(1), rat(3)], Relation::Le, rat(6)),
            ],
        );
        match lp.solve().unwrap() {
            LpOutcome::Optimal { value, dual, .. } => {
                let y = dual.unwrap();
                let dual_value: Rat = y
                    .iter()
                    .zip(lp.constraints())
                    .map(|(yi, c)| yi * &c.rhs)
                    .sum();
                assert_eq!(dual_value, value);
                assert!(y.iter().all(|yi| !yi.is_negative()));
            }
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn feasibility_only_program() {
        let mut lp = LinearProgram::new(2);
        lp.add_row(vec![rat(1), rat(1)], Relation::Ge, rat(1));
        match lp.solve().unwrap() {
            LpOutcome::Optimal { point, value, .. } => {
                assert!(lp.satisfies(&point));
                assert_eq!(value, rat(0));
            }
            other => panic!("expected a feasible point, got {other:?}"),
        }
    }

    #[test]
    fn malformed_row_rejected() {
        let mut lp = LinearProgram::new(2);
        lp.add_row(vec![rat(1)], Relation::Le, rat(1));
        assert!(matches!(
            lp.solve(),
            Err(LpError::MalformedProgram { index: 0, .. })
        ));
    }

    #[test]
    fn ray_keeps_feasibility_and_improves() {
        // max x + y with x - y <= 1: unbounded along (1,1)-ish directions.
        let lp = max_lp(
            vec![rat(1), rat(1)],
            vec![(vec![rat(1), rat(-1)], Relation::Le, rat(1))],
        );
        match lp.solve().unwrap() {
            LpOutcome::Unbounded { point, ray } => {
                assert!(lp.satisfies(&point));
                let far: Vec<Rat> = point
                    .iter()
                    .zip(&ray)
                    .map(|(p, r)| p + r * rat(1000))
                    .collect();
                assert!(lp.satisfies(&far));
                assert!(lp.objective_value(&far) > lp.objective_value(&point));
            }
            other => panic!("expected unbounded, got {other:?}"),
        }
    }
}
