//! Core data model: vector addition systems with states (VASS), valuations,
//! paths, multi-cycles, and the derived update and flow matrices.
//!
//! A VASS is a finite set of control locations plus transitions labelled with
//! integer update vectors. Firing a transition adds its update to a
//! nonnegative counter valuation; the step is only enabled if the result stays
//! nonnegative in every component. All types here are immutable after
//! construction and safe to share across threads.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num::{Signed, Zero};
use thiserror::Error;

use crate::rat::Int;

/// Index of a location in [`Vass::locations`]. Locations are interned strings;
/// the index is stable and follows input order.
pub type LocId = usize;

/// Index of a transition in [`Vass::transitions`]. Ids are assigned at
/// construction time and used as matrix column keys.
pub type TransId = usize;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("dimension must be positive")]
    ZeroDimension,
    #[error("duplicate location name {0:?}")]
    DuplicateLocation(String),
    #[error("transition {index} references unknown location {name:?}")]
    UnknownLocation { index: usize, name: String },
    #[error("transition {index} has update of length {got}, expected {expected}")]
    UpdateLength {
        index: usize,
        got: usize,
        expected: usize,
    },
    #[error("path is not connected: transition {trans} does not start where the previous one ends")]
    InvalidPath { trans: TransId },
    #[error("unknown transition id {0}")]
    UnknownTransition(TransId),
}

/// One transition `source --update--> target`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub id: TransId,
    pub source: LocId,
    pub target: LocId,
    pub update: Vec<Int>,
}

impl Transition {
    pub fn is_self_loop(&self) -> bool {
        self.source == self.target
    }
}

/// A vector addition system with states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vass {
    dim: usize,
    locations: Vec<String>,
    transitions: Vec<Transition>,
}

impl Vass {
    /// Builds a VASS from location names and `(from, to, update)` triples.
    /// Transition ids are the positions in `transitions`.
    pub fn new(
        dim: usize,
        locations: Vec<String>,
        transitions: Vec<(String, String, Vec<Int>)>,
    ) -> Result<Self, ModelError> {
        if dim == 0 {
            return Err(ModelError::ZeroDimension);
        }
        let mut seen = BTreeSet::new();
        for name in &locations {
            if !seen.insert(name.clone()) {
                return Err(ModelError::DuplicateLocation(name.clone()));
            }
        }
        let index: BTreeMap<&str, LocId> = locations
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();
        let mut built = Vec::with_capacity(transitions.len());
        for (i, (from, to, update)) in transitions.into_iter().enumerate() {
            let source = *index.get(from.as_str()).ok_or(ModelError::UnknownLocation {
                index: i,
                name: from.clone(),
            })?;
            let target = *index.get(to.as_str()).ok_or(ModelError::UnknownLocation {
                index: i,
                name: to.clone(),
            })?;
            if update.len() != dim {
                return Err(ModelError::UpdateLength {
                    index: i,
                    got: update.len(),
                    expected: dim,
                });
            }
            built.push(Transition {
                id: i,
                source,
                target,
                update,
            });
        }
        Ok(Vass {
            dim,
            locations,
            transitions: built,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn locations(&self) -> &[String] {
        &self.locations
    }

    pub fn num_locations(&self) -> usize {
        self.locations.len()
    }

    pub fn location_name(&self, l: LocId) -> &str {
        &self.locations[l]
    }

    pub fn location_id(&self, name: &str) -> Option<LocId> {
        self.locations.iter().position(|n| n == name)
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn transition(&self, t: TransId) -> Result<&Transition, ModelError> {
        self.transitions.get(t).ok_or(ModelError::UnknownTransition(t))
    }

    /// View of the whole system, the starting point for sub-VASS analyses.
    pub fn view(&self) -> SubVass<'_> {
        SubVass {
            vass: self,
            locs: (0..self.locations.len()).collect(),
            trans: (0..self.transitions.len()).collect(),
        }
    }

    /// Sum of updates along a path, checking consecutive connectivity.
    pub fn path_value(&self, path: &Path) -> Result<Vec<Int>, ModelError> {
        let mut value = vec![Int::zero(); self.dim];
        let mut at: Option<LocId> = None;
        for &t in &path.steps {
            let tr = self.transition(t)?;
            if let Some(loc) = at {
                if loc != tr.source {
                    return Err(ModelError::InvalidPath { trans: t });
                }
            }
            at = Some(tr.target);
            for (acc, d) in value.iter_mut().zip(&tr.update) {
                *acc += d;
            }
        }
        Ok(value)
    }
}

/// A sub-VASS: a subset of locations and transitions of a parent system.
/// Location and transition ids are shared with the parent.
#[derive(Debug, Clone)]
pub struct SubVass<'a> {
    vass: &'a Vass,
    locs: Vec<LocId>,
    trans: Vec<TransId>,
}

impl<'a> SubVass<'a> {
    /// Builds a sub-VASS from explicit id sets. Transitions must have both
    /// endpoints inside `locs`; violations are debug-asserted only, since all
    /// construction sites derive `trans` from `locs`.
    pub fn from_parts(vass: &'a Vass, mut locs: Vec<LocId>, mut trans: Vec<TransId>) -> Self {
        locs.sort_unstable();
        locs.dedup();
        trans.sort_unstable();
        trans.dedup();
        debug_assert!(trans.iter().all(|&t| {
            let tr = &vass.transitions()[t];
            locs.binary_search(&tr.source).is_ok() && locs.binary_search(&tr.target).is_ok()
        }));
        SubVass { vass, locs, trans }
    }

    /// The sub-VASS induced by a location set: keeps every transition of this
    /// sub-VASS with both endpoints inside `locs`.
    pub fn induced(&self, locs: &BTreeSet<LocId>) -> SubVass<'a> {
        let trans = self
            .trans
            .iter()
            .copied()
            .filter(|&t| {
                let tr = &self.vass.transitions()[t];
                locs.contains(&tr.source) && locs.contains(&tr.target)
            })
            .collect();
        SubVass::from_parts(self.vass, locs.iter().copied().collect(), trans)
    }

    /// This sub-VASS with the given transitions removed (locations kept).
    pub fn without_transitions(&self, removed: &BTreeSet<TransId>) -> SubVass<'a> {
        SubVass {
            vass: self.vass,
            locs: self.locs.clone(),
            trans: self
                .trans
                .iter()
                .copied()
                .filter(|t| !removed.contains(t))
                .collect(),
        }
    }

    pub fn parent(&self) -> &'a Vass {
        self.vass
    }

    pub fn dim(&self) -> usize {
        self.vass.dim()
    }

    pub fn locations(&self) -> &[LocId] {
        &self.locs
    }

    pub fn transition_ids(&self) -> &[TransId] {
        &self.trans
    }

    pub fn transitions(&self) -> impl Iterator<Item = &'a Transition> + '_ {
        self.trans.iter().map(move |&t| &self.vass.transitions()[t])
    }

    pub fn contains_location(&self, l: LocId) -> bool {
        self.locs.binary_search(&l).is_ok()
    }

    pub fn is_empty(&self) -> bool {
        self.trans.is_empty()
    }

    /// Update matrix `D`: one column per transition, column `t` equal to the
    /// update vector of `t`.
    pub fn update_matrix(&self) -> UpdateMatrix {
        UpdateMatrix {
            dim: self.dim(),
            cols: self.trans.clone(),
            entries: self
                .trans
                .iter()
                .map(|&t| self.vass.transitions()[t].update.clone())
                .collect(),
        }
    }

    /// Oriented incidence matrix `F`: column `t` has +1 at the target and -1
    /// at the source of `t`, and is all zero for self-loops. The orientation
    /// is chosen so that `(F^T z)(t) = z(target) - z(source)`, which makes the
    /// affine decrease condition read directly off the matrix product.
    pub fn flow_matrix(&self) -> FlowMatrix {
        let mut entries = vec![vec![Int::zero(); self.trans.len()]; self.locs.len()];
        for (c, &t) in self.trans.iter().enumerate() {
            let tr = &self.vass.transitions()[t];
            if tr.source != tr.target {
                let si = self.locs.binary_search(&tr.source).expect("source in scope");
                let ti = self.locs.binary_search(&tr.target).expect("target in scope");
                entries[si][c] = Int::from(-1);
                entries[ti][c] = Int::from(1);
            }
        }
        FlowMatrix {
            locs: self.locs.clone(),
            cols: self.trans.clone(),
            entries,
        }
    }
}

/// Update matrix `D`, stored column-major: `entries[c]` is the update of
/// transition `cols[c]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpdateMatrix {
    pub dim: usize,
    pub cols: Vec<TransId>,
    entries: Vec<Vec<Int>>,
}

impl UpdateMatrix {
    pub fn column(&self, c: usize) -> &[Int] {
        &self.entries[c]
    }

    pub fn entry(&self, dim_index: usize, c: usize) -> &Int {
        &self.entries[c][dim_index]
    }

    /// `D * mu` for a multiplicity vector indexed like `cols`.
    pub fn mul(&self, mu: &[Int]) -> Vec<Int> {
        assert_eq!(mu.len(), self.cols.len());
        let mut out = vec![Int::zero(); self.dim];
        for (col, m) in self.entries.iter().zip(mu) {
            if m.is_zero() {
                continue;
            }
            for (acc, d) in out.iter_mut().zip(col) {
                *acc += d * m;
            }
        }
        out
    }
}

/// Oriented incidence matrix `F`, stored row-major over the scope locations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowMatrix {
    pub locs: Vec<LocId>,
    pub cols: Vec<TransId>,
    entries: Vec<Vec<Int>>,
}

impl FlowMatrix {
    pub fn row(&self, loc_index: usize) -> &[Int] {
        &self.entries[loc_index]
    }

    pub fn entry(&self, loc_index: usize, c: usize) -> &Int {
        &self.entries[loc_index][c]
    }

    /// `F * mu`; zero exactly when the counted multigraph is balanced.
    pub fn mul(&self, mu: &[Int]) -> Vec<Int> {
        assert_eq!(mu.len(), self.cols.len());
        self.entries
            .iter()
            .map(|row| row.iter().zip(mu).map(|(f, m)| f * m).sum())
            .collect()
    }
}

/// A counter valuation: a nonnegative integer vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Valuation(Vec<Int>);

impl Valuation {
    pub fn new(entries: Vec<Int>) -> Result<Self, NegativeValuation> {
        if let Some(i) = entries.iter().position(|x| x.is_negative()) {
            return Err(NegativeValuation { index: i });
        }
        Ok(Valuation(entries))
    }

    pub fn zero(dim: usize) -> Self {
        Valuation(vec![Int::zero(); dim])
    }

    pub fn uniform(dim: usize, v: Int) -> Result<Self, NegativeValuation> {
        Valuation::new(vec![v; dim])
    }

    pub fn entries(&self) -> &[Int] {
        &self.0
    }

    /// Componentwise `self + d`, or `None` if any component would go negative.
    pub fn add_checked(&self, d: &[Int]) -> Option<Valuation> {
        let mut out = Vec::with_capacity(self.0.len());
        for (a, b) in self.0.iter().zip(d) {
            let v = a + b;
            if v.is_negative() {
                return None;
            }
            out.push(v);
        }
        Some(Valuation(out))
    }

    pub fn ge(&self, other: &Valuation) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a >= b)
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("valuation entry {index} is negative")]
pub struct NegativeValuation {
    pub index: usize,
}

/// A control location paired with a valuation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VassState {
    pub location: LocId,
    pub valuation: Valuation,
}

/// A path: a sequence of transition ids with consecutive connectivity.
/// Validity is checked against a concrete VASS by [`Vass::path_value`].
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Path {
    pub steps: Vec<TransId>,
}

impl Path {
    pub fn new(steps: Vec<TransId>) -> Self {
        Path { steps }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// A finite set of cycles together with the total per-transition counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiCycle {
    pub cycles: Vec<Path>,
    pub counts: BTreeMap<TransId, u64>,
}

impl MultiCycle {
    /// Sum of the values of the member cycles.
    pub fn value(&self, vass: &Vass) -> Result<Vec<Int>, ModelError> {
        let mut total = vec![Int::zero(); vass.dim()];
        for c in &self.cycles {
            for (acc, v) in total.iter_mut().zip(vass.path_value(c)?) {
                *acc += v;
            }
        }
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::rat::int;

    #[test]
    fn vprog_update_matrix_columns() {
        let v = fixtures::vprog();
        let d = v.view().update_matrix();
        assert_eq!(d.column(0), &[int(-1), int(1)]);
        assert_eq!(d.column(1), &[int(0), int(-1)]);
        assert_eq!(d.column(2), &[int(0), int(0)]);
    }

    #[test]
    fn empty_update_matrix() {
        let v = Vass::new(2, vec!["a".into()], vec![]).unwrap();
        let d = v.view().update_matrix();
        assert_eq!(d.cols.len(), 0);
    }

    #[test]
    fn self_loop_update_matrix() {
        let v = Vass::new(1, vec!["a".into()], vec![("a".into(), "a".into(), vec![int(-1)])])
            .unwrap();
        let d = v.view().update_matrix();
        assert_eq!(d.column(0), &[int(-1)]);
    }

    #[test]
    fn vprog_flow_matrix() {
        let v = fixtures::vprog();
        let f = v.view().flow_matrix();
        // t0: l1 -> l2
        assert_eq!(*f.entry(0, 0), int(-1));
        assert_eq!(*f.entry(1, 0), int(1));
        // t1: self-loop at l2 is an all-zero column
        assert_eq!(*f.entry(0, 1), int(0));
        assert_eq!(*f.entry(1, 1), int(0));
        // column sums are zero
        for c in 0..3 {
            let sum: Int = (0..2).map(|l| f.entry(l, c).clone()).sum();
            assert!(sum.is_zero());
        }
    }

    #[test]
    fn two_location_cycle_flow_matrix() {
        let v = fixtures::swap_cycle();
        let f = v.view().flow_matrix();
        for c in 0..2 {
            let mut plus = 0;
            let mut minus = 0;
            for l in 0..2 {
                match f.entry(l, c).try_into().unwrap() {
                    1i32 => plus += 1,
                    -1 => minus += 1,
                    0 => {}
                    _ => panic!("unexpected entry"),
                }
            }
            assert_eq!((plus, minus), (1, 1));
        }
    }

    #[test]
    fn vprog_path_value() {
        let v = fixtures::vprog();
        let value = v.path_value(&Path::new(vec![0, 1, 2])).unwrap();
        assert_eq!(value, vec![int(-1), int(0)]);
    }

    #[test]
    fn empty_path_value_is_zero() {
        let v = fixtures::vprog();
        assert_eq!(v.path_value(&Path::default()).unwrap(), vec![int(0), int(0)]);
    }

    #[test]
    fn swap_cycle_value_cancels() {
        let v = fixtures::swap_cycle();
        assert_eq!(
            v.path_value(&Path::new(vec![0, 1])).unwrap(),
            vec![int(0), int(0)]
        );
    }

    #[test]
    fn disconnected_path_rejected() {
        let v = fixtures::vprog();
        // t0: l1 -> l2, then t0 again is not connected (t0 starts at l1)
        assert_eq!(
            v.path_value(&Path::new(vec![0, 0])),
            Err(ModelError::InvalidPath { trans: 0 })
        );
    }

    #[test]
    fn path_value_additive_under_concatenation() {
        let v = fixtures::vcsys();
        let p1 = Path::new(vec![0, 1]);
        let p2 = Path::new(vec![2, 3]);
        let both = Path::new(vec![0, 1, 2, 3]);
        let v1 = v.path_value(&p1).unwrap();
        let v2 = v.path_value(&p2).unwrap();
        let vb = v.path_value(&both).unwrap();
        for i in 0..v.dim() {
            assert_eq!(vb[i], &v1[i] + &v2[i]);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert_eq!(
            Vass::new(0, vec!["a".into()], vec![]),
            Err(ModelError::ZeroDimension)
        );
        assert!(matches!(
            Vass::new(1, vec!["a".into(), "a".into()], vec![]),
            Err(ModelError::DuplicateLocation(_))
        ));
        assert!(matches!(
            Vass::new(1, vec!["a".into()], vec![("a".into(), "b".into(), vec![int(0)])]),
            Err(ModelError::UnknownLocation { .. })
        ));
        assert!(matches!(
            Vass::new(2, vec!["a".into()], vec![("a".into(), "a".into(), vec![int(0)])]),
            Err(ModelError::UpdateLength { .. })
        ));
    }
}
