//! Exact-arithmetic quantization and spurious-crosstalk analysis for
//! capacitively coupled superconducting circuits.
//!
//! The pipeline assembles each circuit's Maxwell capacitance matrix over
//! exact rationals, changes to plus/minus island coordinates per floating
//! junction, eliminates the potential-free plus modes by Schur complement,
//! and quantifies how strongly each drive port couples to every retained
//! mode. Algebraic claims (ratios, exact zeros, closed forms) stay exact;
//! only dB conversion and physical-constant estimates use floating point.

pub mod cli;
pub mod crosstalk;
pub mod netlist;
pub mod quantize;
pub mod ratmat;
pub mod report;

pub use ratmat::Rational;
