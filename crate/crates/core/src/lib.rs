//! Baud-spaced blind receiver: clock recovery driven by constant-modulus
//! equalizer taps, with the surrounding modem, channel and measurement tools.

pub mod carrier;
pub mod channel;
pub mod dsp;
pub mod equalizer;
pub mod error;
pub mod io;
pub mod metrics;
pub mod modem;
pub mod sim;
pub mod sync;

pub use dsp::{Sample, SampleStream};
pub use error::{Error, Result};
pub use metrics::RunReport;
pub use sim::RunConfig;
pub use sync::TedKind;
