//! Simulation toolkit for noisy GHZ-probe metrology.
//!
//! The crate models a single-qubit Markovian channel (a σz signal rotation
//! plus Pauli noise), lifts it to N-qubit GHZ probes through their compressed
//! X-state form, and evaluates coherence quantifiers, quantum Fisher
//! information and parity-estimator precision on top of it. A seeded
//! Monte Carlo unravelling of the channel serves as a statistical oracle and
//! a closed-form large-N path covers probes up to 10⁵ qubits.
//!
//! Modules, bottom-up:
//!
//! * [`numerics`]: dense complex matrices, Jacobi Hermitian eigensolver, entropy.
//! * [`channel`]: noise model, closed-form coefficients, S-matrix, Kraus set, RK4 oracle.
//! * [`states`]: GHZ states, evolved X-states, block structure, witness.
//! * [`coherence`]: l1 / relative-entropy coherence, phase QFI, freezing sweeps.
//! * [`metrology`]: parity signal, error propagation, optimal times, frequency QFI.
//! * [`montecarlo`]: trajectory sampling and parity-shot simulation.
//! * [`scaling`]: large-N precision curves and log-log slope fits.

pub mod channel;
pub mod coherence;
pub mod error;
pub mod exec;
pub mod metrology;
pub mod montecarlo;
pub mod numerics;
pub mod optimize;
pub mod scaling;
pub mod states;

pub use error::{Error, Result};
pub use exec::Execution;
pub use numerics::{CMat, C64};
