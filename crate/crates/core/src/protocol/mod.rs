//! Reconciliation, privacy amplification and secrecy bookkeeping for the
//! many-to-one key generation protocol.

pub mod amplify;
pub mod hash;
pub mod keylen;
pub mod reconcile;
pub mod run;
pub mod secrecy;
pub mod transcript;

pub use amplify::{privacy_amplify, KeyMaterial};
pub use hash::{sample_hash, ToeplitzHash};
pub use keylen::{key_lengths_from_allocation, leakage_bound, min_entropy_floor, min_entropy_floor_given};
pub use reconcile::{reconcile, redecode_with_residual, AgentLink, FinalRoundPlan, Reconciliation};
pub use run::{
    aggregate, chi2_uniformity, execute, induced_game, prepare, run_protocol, run_protocol_with, simulate_run,
    AgentReport, ProtocolConfig, ProtocolRun, ProtocolSetup, RunReport, CALIBRATION_RUNS, DEFAULT_SEED,
};
pub use secrecy::{empirical_secrecy_check, SecrecyCheck, TinyInstance};
pub use transcript::{HashSeed, Message, Transcript};
