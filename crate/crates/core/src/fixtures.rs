//! The running example and its two repairs, as ready-made systems.

use crate::lts::{parse_lts, Lts};

/// Nine states, six events; lacks the event/state separation property at `(x, s1)`.
pub const RUNNING: &str = "\
lts A
initial bot
bot u s0
bot v t0
bot w q0
s0 x s1
s1 y s2
s2 x s3
t0 x t1
t0 a t1
q0 y q1
q0 a q1
";

/// `RUNNING` without the state `s3`.
pub const WITHOUT_S3: &str = "\
lts B
initial bot
bot u s0
bot v t0
bot w q0
s0 x s1
s1 y s2
t0 x t1
t0 a t1
q0 y q1
q0 a q1
";

/// `RUNNING` without the event `a`.
pub const WITHOUT_A: &str = "\
lts C
initial bot
bot u s0
bot v t0
bot w q0
s0 x s1
s1 y s2
s2 x s3
t0 x t1
q0 y q1
";

pub fn running() -> Lts {
    parse_lts(RUNNING).expect("fixture parses")
}

pub fn without_s3() -> Lts {
    parse_lts(WITHOUT_S3).expect("fixture parses")
}

pub fn without_a() -> Lts {
    parse_lts(WITHOUT_A).expect("fixture parses")
}
