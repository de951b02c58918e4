//! Numerical simulator and analysis toolkit for sequential memory retrieval
//! in input-driven-plasticity (IDP) Hopfield networks.
//!
//! The toolkit covers three interlocking pieces:
//!
//! * **Retrieval** ([`memory`], [`activation`], [`dynamics`]): binary pattern
//!   sets with exact (Hadamard) or in-expectation orthogonality, the
//!   input-modulated synaptic matrix W(alpha) = M diag(alpha) M^T, and the
//!   fast associative dynamics xdot = -x + W(alpha) Psi(x) with HardTanh
//!   activation, together with its energy function. A memory xi^nu exists
//!   and is stable as the equilibrium z_nu^2 xi^nu exactly when z_nu^2 > 1.
//!
//! * **Reasoning** ([`dynamics`]): the coupled two-timescale system in which
//!   a slow state z gates the saliency weights alpha = z (.) z while a cyclic
//!   reasoning matrix A routes the retrieved pattern's drive to the next
//!   memory index, alongside the classical one-timescale baseline
//!   xdot = -x + kappa Q Psi(x) with Q = M A M^T.
//!
//! * **Analysis** ([`analysis`]): the scalar escape map
//!   Z_{t+1} = kappa (1 - 1/Z_t) that governs successive peak saliencies,
//!   its fixed points Z+- = (kappa +- sqrt(kappa^2 - 4 kappa)) / 2 (real with
//!   Z > 1 only for kappa >= 4), regime classification, escape-time laws
//!   (first escape log Z0, asymptotic period log Z+), transition detection
//!   on trajectories, and the ODE-versus-map cross-validation.

pub mod activation;
pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod export;
pub mod memory;

pub use activation::Activation;
pub use analysis::{
    asymptotic_period, classify_regime, critical_gain, crosscheck_ode_vs_map, detect_transitions,
    equilibrium_status, equilibrium_status_with_band, first_escape_time, fixed_points,
    iterate_map, map_step, CrosscheckRow, CrosscheckTable, EquilibriumStatus, FixedPoints,
    MapOrbit, OrbitTermination, Regime, TransitionReport, DEFAULT_OVERLAP_THRESHOLD,
};
pub use dynamics::{
    energy, idp_rhs, integrate, kleinfeld_rhs, simulate_idp, simulate_kleinfeld,
    simulate_two_timescale, two_timescale_rhs, IntegrationOptions, Method, SystemParams,
    Trajectory, TrajectoryParams, DEFAULT_BACKGROUND_CUE,
};
pub use error::{Error, Result};
pub use memory::{
    generate_memories, kleinfeld_matrix, overlap, synaptic_matrix, MemoryMatrix, MemorySet,
    OrthogonalityMode, ReasoningMatrix, SaliencyWeights,
};
