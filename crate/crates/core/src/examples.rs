//! The small worked automata used throughout the documentation and tests.
//!
//! * `m1` accepts unary strings whose length is a multiple of three.
//! * `m2` accepts exactly the single symbol `b`.
//! * `m3` accepts multisets over `{a, b}` with a multiple of three `a`s and
//!   exactly one `b`; it is the shuffle product of `m2` and `m1`.

use crate::automaton::{Kind, WeightedAutomaton};

#[rustfmt::skip]
const CYCLE3: [f64; 9] = [
    0.0, 1.0, 0.0,
    0.0, 0.0, 1.0,
    1.0, 0.0, 0.0,
];

pub fn m1() -> WeightedAutomaton {
    WeightedAutomaton::from_real(
        &[1.0, 0.0, 0.0],
        &[("a", &CYCLE3)],
        &[1.0, 0.0, 0.0],
        Kind::Multiset,
    )
    .expect("m1 is well formed")
}

pub fn m2() -> WeightedAutomaton {
    WeightedAutomaton::from_real(
        &[1.0, 0.0],
        &[("b", &[0.0, 1.0, 0.0, 0.0])],
        &[0.0, 1.0],
        Kind::Multiset,
    )
    .expect("m2 is well formed")
}

#[rustfmt::skip]
pub fn m3() -> WeightedAutomaton {
    let a = [
        0.0, 1.0, 0.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 1.0, 0.0, 0.0, 0.0,
        1.0, 0.0, 0.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 0.0, 1.0, 0.0,
        0.0, 0.0, 0.0, 0.0, 0.0, 1.0,
        0.0, 0.0, 0.0, 1.0, 0.0, 0.0,
    ];
    let b = [
        0.0, 0.0, 0.0, 1.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 0.0, 1.0, 0.0,
        0.0, 0.0, 0.0, 0.0, 0.0, 1.0,
        0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
    ];
    WeightedAutomaton::from_real(
        &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        &[("a", &a), ("b", &b)],
        &[0.0, 0.0, 0.0, 1.0, 0.0, 0.0],
        Kind::Multiset,
    )
    .expect("m3 is well formed")
}
