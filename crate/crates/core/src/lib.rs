//! Exact simulator for continuous-variable reversible telecloning of
//! coherent states.
//!
//! Modes are tracked symbolically as linear forms over independent Gaussian
//! sources ([`quad`]), so the channels, Bell measurements and feedforward of
//! the telecloning protocols ([`protocol`]) give exact output moments.
//! [`analysis`] turns those moments into fidelities and entanglement
//! diagnostics, [`analytic`] holds the closed-form fidelities, and [`oracle`]
//! re-derives everything by Monte Carlo sampling.
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`); the aliases below
//! fix the common double-precision instantiation.

pub mod analysis;
pub mod analytic;
pub mod error;
pub mod measure;
pub mod oracle;
pub mod protocol;
pub mod quad;
pub mod scalar;

pub use analysis::{
    covariance_matrix, duan_sum, duan_sum_from_cm, fidelity_vs_coherent, gaussian_fidelity,
    log_negativity_two_mode, structure_report, CovarianceMatrix, FidelityReport, ModeLabel, PairRelation,
    PairReport, StructureReport,
};
pub use analytic::{analytic_fidelities, AnalyticFidelities};
pub use error::{Error, Result};
pub use measure::{combine_signals, ClassicalSignal, SignalAxis};
pub use oracle::{mc_run, mc_run_with, sample_forms, Execution, FormMoments, McConfig, McEstimate, McOutput};
pub use protocol::{
    build_asymmetric_rts, build_rts, reversibility_forms, reversibility_residual, run_1_to_m, run_1_to_m_from,
    run_asymmetric, run_n_to_m, run_n_to_m_from, GainSet, Protocol, ProtocolParams, ProtocolResult, Role, Sender,
    Side, TelecloneState,
};
pub use quad::{Axis, LinearForm, ModeExpr, ModeHandle, Network, Primitive, PrimitiveId, PrimitiveKind};
pub use scalar::Scalar;

pub type Network64 = Network<f64>;
pub type Network32 = Network<f32>;
pub type ModeExpr64 = ModeExpr<f64>;
pub type LinearForm64 = LinearForm<f64>;
pub type TelecloneState64 = TelecloneState<f64>;
pub type ProtocolResult64 = ProtocolResult<f64>;
pub type Protocol64 = Protocol<f64>;
pub type CovarianceMatrix64 = CovarianceMatrix<f64>;
pub type FidelityReport64 = FidelityReport<f64>;
pub type StructureReport64 = StructureReport<f64>;
pub type McEstimate64 = McEstimate<f64>;
pub type McOutput64 = McOutput<f64>;
