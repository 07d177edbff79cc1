//! Federation and simulated-network layer.
//!
//! Seven learning vehicles upload minibatch gradients to a central server
//! that averages them round by round into a shared global model and
//! broadcasts it back. Four channel models sit between the two:
//!
//! - `Perfect`: zero latency (plain federated learning),
//! - `SyncDelay`: every upload late by 4 epochs, every download by 2,
//! - `OutOfOrder`: sync delays plus a per-message random extra delay, so
//!   deliveries can reorder and a stale model can override a newer one,
//! - `LocalMerge`: zero latency but uploads rate-limited to one merged
//!   gradient per 6 minibatches.
//!
//! Everything runs on a deterministic single-threaded scheduler over integer
//! deciseconds of simulated time; a full run is reproducible byte-for-byte
//! from its seed, including the line-delimited event trace.

mod channel;
mod error;
mod message;
mod mode;
mod run;
mod seeds;
mod server;
mod trace;

pub use channel::{ChannelKind, ChannelModel, FedConfig};
pub use error::FednetError;
pub use message::{GradientMsg, InTransit, ModelMsg, TransitQueue};
pub use mode::Mode;
pub use run::{run_baseline_epochs, run_federated_epochs, EpochStats, RunOutcome, TrainingConfig};
pub use seeds::{derive_seed, SeedStream};
pub use server::{FedServer, ModelBroadcast};
pub use trace::{EventTrace, TraceEvent};

/// Simulated time is counted in integer deciseconds (one simulation step).
pub type Tick = u64;

/// Ticks per simulated second.
pub const TICKS_PER_SECOND: Tick = 10;

/// One epoch spans 150 s of simulated time.
pub const EPOCH_TICKS: Tick = 1500;

/// Converts a tick count to seconds for reporting. Multiples of ten map to
/// exact integers, so epoch-grained latencies compare exactly.
pub fn ticks_to_seconds(ticks: Tick) -> f64 {
    ticks as f64 / TICKS_PER_SECOND as f64
}
