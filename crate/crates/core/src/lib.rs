//! PT-symmetric quantum kicked rotor.
//!
//! Split-step Floquet evolution on a uniform angle grid, time-reversal and
//! out-of-time-ordered correlators with explicit norm bookkeeping, growth-rate
//! fits, and the classical soliton map behind quantized acceleration.

pub mod classical;
pub mod error;
pub mod fit;
pub mod harness;
pub mod otoc;
pub mod propagator;
pub mod state;

pub use error::{Error, Result};
pub use propagator::{Direction, Floquet, Renormalize, SimParams};
pub use state::{PhaseSpace, WaveFunction};
