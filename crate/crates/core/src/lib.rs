//! Ammann patterns, Penrose-like tilings and quasicrystallographic space groups
//! built from quadratic Coxeter pairs, with exact arithmetic in Q(√D).

pub mod ammann;
pub mod cli;
pub mod dual;
pub mod error;
pub mod exactfield;
pub mod io;
pub mod linalg;
pub mod quasilattice1d;
pub mod rootsystems;
pub mod spacegroup;

pub use error::{Error, Result};
pub use exactfield::{QuadNum, Rational};
