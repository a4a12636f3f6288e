#![allow(clippy::needless_range_loop)]

pub mod analysis;
pub mod csp;
pub mod dto1;
pub mod gf2;
pub mod hadamard;
pub mod longcode;
pub mod seed;
pub mod ternary;
pub mod verify;
