#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod collision;
pub mod density;
pub mod equilibrium;
pub mod fermi;
pub mod geometry;
pub mod numerics;
