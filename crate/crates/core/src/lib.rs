//! Numerical toolkit for quantum-thermodynamic protocols at finite
//! system-bath coupling: dense Hermitian operator algebra, Gibbs-state
//! functionals, work/heat protocol ledgers, optimal coupling endpoints,
//! two-bath engine cycles, and an exact Gaussian backend for oscillator
//! baths with hundreds of modes.

pub mod error;
pub mod operators;
pub mod protocol;
pub mod thermo;

pub use error::{Error, Result};
pub use operators::{
    commutator_norm, embed, matrix_function, operator_norm, partial_trace, CMatrix,
    CompositeSystem, Eigen, HermitianOperator, MatrixFunction, Side,
};
pub use protocol::{
    apply_step, hamiltonian_of_state, heat_report, isothermal_process, optimal_work_protocol,
    CorrectionReport, HeatReport, LedgerEntry, ProtocolState, ProtocolStep, StepKind, WorkLedger,
};
pub use thermo::{
    equilibrium_free_energy, free_energy, free_energy_report, free_energy_surplus,
    generalized_covariance, gibbs_state, kubo_mori_map, lemma1_gap, mutual_information,
    partition_log, relative_entropy, von_neumann_entropy, FreeEnergyReport, ThermalContext,
};
