//! Open-system dynamics of emitter pairs: the Lindblad integrator, the
//! two-atom population cascade and the lambda-atom phase gate.

pub mod gate;
pub mod lindblad;
pub mod pair;

pub use gate::{
    gate_ideal_state, gate_initial_state, gate_optimize, gate_scaling, gate_simulate, nanowire_gate_fidelity, GateOptimum,
    GateOutcome, GateParams, GateRates, NanowireGate, ScalingPoint,
};
pub use lindblad::{collective_channels, lindblad_evolve, lindblad_evolve_correlated, CMatrix, DensityMatrix, Evolution, Jump, StepControl};
pub use pair::{pair_channels, pair_lowering, pair_populations, collective_populations, PairPopulations, RateMatrix2};
