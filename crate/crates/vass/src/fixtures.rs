//! Small reference systems used across tests, benches and the shipped
//! example files.

use std::collections::{BTreeMap, BTreeSet};

use crate::cert::{LevelNode, RankingCertificate};
use crate::model::Vass;
use crate::rat::int;

fn build(dim: usize, locs: &[&str], trans: &[(&str, &str, &[i64])]) -> Vass {
    Vass::new(
        dim,
        locs.iter().map(|s| s.to_string()).collect(),
        trans
            .iter()
            .map(|(f, t, u)| {
                (
                    f.to_string(),
                    t.to_string(),
                    u.iter().map(|&x| int(x)).collect(),
                )
            })
            .collect(),
    )
    .expect("fixture is well-formed")
}

/// Two locations, dimension 2: a nested-loop shape with a linear bound.
/// t0: l1 -> l2 (-1,1), t1: l2 -> l2 (0,-1), t2: l2 -> l1 (0,0).
pub fn vprog() -> Vass {
    build(
        2,
        &["l1", "l2"],
        &[
            ("l1", "l2", &[-1, 1]),
            ("l2", "l2", &[0, -1]),
            ("l2", "l1", &[0, 0]),
        ],
    )
}

/// Shared-memory process template with three local states and a boolean
/// flag: dimension 3, conservative, quadratic complexity.
/// t0: tt -> ff (-1,1,0), t1: ff -> ff (-1,1,0),
/// t2: ff -> tt (-1,0,1), t3: tt -> tt (1,-1,0).
pub fn vcsys() -> Vass {
    build(
        3,
        &["l_tt", "l_ff"],
        &[
            ("l_tt", "l_ff", &[-1, 1, 0]),
            ("l_ff", "l_ff", &[-1, 1, 0]),
            ("l_ff", "l_tt", &[-1, 0, 1]),
            ("l_tt", "l_tt", &[1, -1, 0]),
        ],
    )
}

/// Terminating but with exponential trace growth: each round trip doubles
/// the first counter at the price of one unit of the third.
/// t0: l1 -> l2 (0,0,0), t1: l2 -> l2 (2,-1,0),
/// t2: l2 -> l1 (0,0,-1), t3: l1 -> l1 (-1,1,0).
pub fn vexp() -> Vass {
    build(
        3,
        &["l1", "l2"],
        &[
            ("l1", "l2", &[0, 0, 0]),
            ("l2", "l2", &[2, -1, 0]),
            ("l2", "l1", &[0, 0, -1]),
            ("l1", "l1", &[-1, 1, 0]),
        ],
    )
}

/// The canonical non-terminating example: two locations swapping a token.
/// t0: a -> b (1,-1), t1: b -> a (-1,1); the 2-cycle has value (0,0).
pub fn swap_cycle() -> Vass {
    build(
        2,
        &["a", "b"],
        &[("a", "b", &[1, -1]), ("b", "a", &[-1, 1])],
    )
}

/// One location with the single update (-1); terminates in exactly N steps.
pub fn countdown() -> Vass {
    build(1, &["l"], &[("l", "l", &[-1])])
}

/// One location with a zero self-loop; the loop itself is a witness.
pub fn zero_loop() -> Vass {
    build(1, &["l"], &[("l", "l", &[0])])
}

/// The hand-written order-1 certificate for [`vprog`]: the affine function
/// `3i + j` at `l1` and `3i + j + 1` at `l2` drops by one on every step.
pub fn vprog_cert() -> RankingCertificate {
    RankingCertificate {
        root: Some(LevelNode {
            scope: BTreeSet::from([0, 1]),
            r: vec![int(3), int(1)],
            z: BTreeMap::from([(0, int(0)), (1, int(1))]),
            children: vec![],
        }),
        transition_levels: BTreeMap::from([(0, 1), (1, 1), (2, 1)]),
        order: 1,
    }
}

/// The hand-written order-2 certificate for [`vcsys`]: `2i + 2j` plus a flag
/// offset at level one, then `j` at `l_tt` and `i` at `l_ff` one level down.
pub fn vcsys_cert() -> RankingCertificate {
    RankingCertificate {
        root: Some(LevelNode {
            scope: BTreeSet::from([0, 1]),
            r: vec![int(2), int(2), int(0)],
            z: BTreeMap::from([(0, int(1)), (1, int(0))]),
            children: vec![
                LevelNode {
                    scope: BTreeSet::from([0]),
                    r: vec![int(0), int(1), int(0)],
                    z: BTreeMap::from([(0, int(0))]),
                    children: vec![],
                },
                LevelNode {
                    scope: BTreeSet::from([1]),
                    r: vec![int(1), int(0), int(0)],
                    z: BTreeMap::from([(1, int(0))]),
                    children: vec![],
                },
            ],
        }),
        transition_levels: BTreeMap::from([(0, 1), (1, 2), (2, 1), (3, 2)]),
        order: 2,
    }
}
