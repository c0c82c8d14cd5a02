//! Ray-traced optical channel: impulse responses, received powers and
//! their spectral / temporal summaries.

mod ir;
mod matrix;
mod trace;

use serde::{Deserialize, Serialize};

pub use ir::{
    bandwidth_3db, received_optical_power, rms_delay_spread, Bandwidth3Db, ImpulseResponse, SpectrumAnalyzer,
};
pub use matrix::{
    compute_channel_matrix, content_hash, ChannelMatrix, LinkSummary, CACHE_FORMAT, CACHE_VERSION,
};
pub use trace::{los_power, trace_impulse_response, ElementBalance, LinkTrace, Tracer, SPEED_OF_LIGHT};

use crate::{Error, Result};

/// Tracing resolution and reach.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceParams {
    /// Impulse-response bin width, s.
    pub bin_width: f64,
    /// Initial delay window, s. Extended (with a warning) when a path
    /// arrives later.
    pub window: f64,
    /// Highest reflection order traced (0, 1 or 2).
    pub max_order: u8,
    /// DFT length used for 3-dB bandwidth estimation.
    pub fft_len: usize,
}

impl Default for TraceParams {
    fn default() -> Self {
        TraceParams {
            bin_width: 10e-12,
            window: 100e-9,
            max_order: 2,
            fft_len: 1 << 20,
        }
    }
}

impl TraceParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.bin_width > 0.0 && self.bin_width.is_finite()) || !(self.window >= self.bin_width) {
            return Err(Error::InvalidArgument(format!(
                "bin width {} s / window {} s are invalid",
                self.bin_width, self.window
            )));
        }
        if self.max_order > 2 {
            return Err(Error::InvalidArgument(format!(
                "reflection order {} is not supported (max 2)",
                self.max_order
            )));
        }
        if self.fft_len < 2 {
            return Err(Error::InvalidArgument("FFT length must be at least 2".into()));
        }
        Ok(())
    }
}
