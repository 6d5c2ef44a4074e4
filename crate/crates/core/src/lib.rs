//! Coarse-grained time-bin (collision model) derivation of the quantum-optical
//! master equation, with every step checked against an independent route.

pub mod chain;
pub mod density;
pub mod error;
pub mod experiment;
pub mod fit;
pub mod kraus;
pub mod lindblad;
pub mod microscopic;
pub mod model;
pub mod operator;

pub use density::DensityMatrix;
pub use error::{Error, Result};
pub use kraus::{apply_channel, expansion_report, extract_kraus, iterate_channel, ExpansionReport, KrausFamily};
pub use model::{
    bin_generator, coarse_map, dephasing_variant, ordering_residual, truncated_oscillator, two_level_system,
    BinSpace, CoarseParams, SystemModel,
};
pub use operator::{commutator, dagger, expm, kron, partial_trace, vn_entropy, Operator, StateVector, C64};
pub use chain::{factorization_report, init_chain, reduced_system, run_chain, step_chain, ChainState, FactorizationReport};
pub use fit::fit_order;
pub use lindblad::{analytic_oracle, dissipator, integrate_rk4, liouvillian, LindbladModel, OracleKind};
pub use experiment::{parse_config, run_experiment, RunConfig, RunError, RunReport};
pub use microscopic::{
    build_microscopic, evolve_microscopic, fitted_decay_rate, FrequencyGrid, MicroscopicModel, Propagator,
    SingleExcitationState,
};
