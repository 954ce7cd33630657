//! The presentation files shipped in `fixtures/`, embedded for tests and benches.

use crate::presentation::{parse_presentation, Fixture};

pub const F2: &str = include_str!("../../../fixtures/f2.grp");
pub const F2_REL_A: &str = include_str!("../../../fixtures/f2_rel_a.grp");
pub const Z2_REL_A: &str = include_str!("../../../fixtures/z2_rel_a.grp");
pub const C6: &str = include_str!("../../../fixtures/c6.grp");
pub const BROKEN: &str = include_str!("../../../fixtures/broken.grp");

fn load(text: &str) -> Fixture {
    parse_presentation(text).expect("bundled fixture is valid")
}

pub fn f2() -> Fixture {
    load(F2)
}

pub fn f2_rel_a() -> Fixture {
    load(F2_REL_A)
}

pub fn z2_rel_a() -> Fixture {
    load(Z2_REL_A)
}

pub fn c6() -> Fixture {
    load(C6)
}
