//! Max-flow solvers built around excess scaling: a generic push-relabel
//! baseline, large-medium excess scaling, and an enhanced variant with a
//! flow-return forest and abundant-cycle contraction, plus DIMACS I/O,
//! instance generators, an exact reference oracle, and audit counters.

// Graph kernels walk parallel arrays by index throughout.
#![allow(clippy::needless_range_loop)]

pub mod counters;
pub mod dimacs;
pub mod enhanced;
pub mod gen;
pub mod generic;
pub mod lmes;
pub mod network;
pub mod oracle;
pub mod quantity;
pub mod selection;
pub mod state;
