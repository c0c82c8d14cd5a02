use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Received optical power histogram over propagation delay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpulseResponse {
    /// Width of one bin, s.
    pub bin_width: f64,
    /// Delay of the start of bin 0, s.
    pub origin_delay: f64,
    /// Power per bin, W.
    pub bins: Vec<f64>,
}

impl ImpulseResponse {
    pub fn new(bin_width: f64, window: f64) -> Result<Self> {
        if !(bin_width > 0.0 && bin_width.is_finite()) || !(window >= bin_width) {
            return Err(Error::InvalidArgument(format!(
                "bin width {bin_width} s must be positive and no larger than the window {window} s"
            )));
        }
        // tolerate the rounding in e.g. 1e-10 / 1e-11
        let n = ((window / bin_width) * (1.0 - 1e-12)).ceil() as usize;
        Ok(ImpulseResponse {
            bin_width,
            origin_delay: 0.0,
            bins: vec![0.0; n],
        })
    }

    /// Bin index holding `delay`.
    pub fn bin_of(&self, delay: f64) -> usize {
        ((delay - self.origin_delay) / self.bin_width).floor().max(0.0) as usize
    }

    /// Accumulate `power` arriving at `delay`. Returns `true` when the window
    /// had to be extended to hold it.
    pub fn add(&mut self, delay: f64, power: f64) -> bool {
        let i = self.bin_of(delay);
        let grew = i >= self.bins.len();
        if grew {
            self.bins.resize(i + 1, 0.0);
        }
        self.bins[i] += power;
        grew
    }

    /// Start time of bin `i`, s.
    pub fn delay_of(&self, i: usize) -> f64 {
        self.origin_delay + i as f64 * self.bin_width
    }

    pub fn scaled(&self, k: f64) -> ImpulseResponse {
        ImpulseResponse {
            bins: self.bins.iter().map(|b| b * k).collect(),
            ..self.clone()
        }
    }

    /// `(first, last)` indices of nonzero bins.
    fn support(&self) -> Option<(usize, usize)> {
        let first = self.bins.iter().position(|&b| b != 0.0)?;
        let last = self.bins.iter().rposition(|&b| b != 0.0)?;
        Some((first, last))
    }

    /// Bins as `(index, power)` pairs, zeros dropped.
    pub fn to_sparse(&self) -> Vec<(usize, f64)> {
        self.bins
            .iter()
            .enumerate()
            .filter(|(_, b)| **b != 0.0)
            .map(|(i, b)| (i, *b))
            .collect()
    }
}

/// Total received optical power, W.
pub fn received_optical_power(ir: &ImpulseResponse) -> f64 {
    ir.bins.iter().sum()
}

/// Power-weighted RMS spread of arrival delays, s.
pub fn rms_delay_spread(ir: &ImpulseResponse) -> Result<f64> {
    let total = received_optical_power(ir);
    if !(total > 0.0) {
        return Err(Error::EmptyImpulseResponse);
    }
    let mean = ir
        .bins
        .iter()
        .enumerate()
        .map(|(i, p)| ir.delay_of(i) * p)
        .sum::<f64>()
        / total;
    let var = ir
        .bins
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let dt = ir.delay_of(i) - mean;
            dt * dt * p
        })
        .sum::<f64>()
        / total;
    Ok(var.max(0.0).sqrt())
}

/// 3-dB optical channel bandwidth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "hz", rename_all = "snake_case")]
pub enum Bandwidth3Db {
    /// Half-power frequency, Hz.
    Finite(f64),
    /// The response never fell to half power below this Nyquist frequency.
    AtLeast(f64),
}

impl Bandwidth3Db {
    /// Frequency value (the lower bound for [`Bandwidth3Db::AtLeast`]).
    pub fn hz(&self) -> f64 {
        match *self {
            Bandwidth3Db::Finite(f) | Bandwidth3Db::AtLeast(f) => f,
        }
    }

    pub fn is_lower_bound(&self) -> bool {
        matches!(self, Bandwidth3Db::AtLeast(_))
    }
}

/// Reusable FFT plan for 3-dB bandwidth estimation on a fixed grid.
#[derive(Clone)]
pub struct SpectrumAnalyzer {
    len: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SpectrumAnalyzer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectrumAnalyzer")
            .field("len", &self.len)
            .finish()
    }
}

impl SpectrumAnalyzer {
    /// `len` is rounded up to a power of two.
    pub fn new(len: usize) -> Self {
        let len = len.max(2).next_power_of_two();
        let fft = FftPlanner::new().plan_fft_forward(len);
        SpectrumAnalyzer { len, fft }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Frequency spacing of the DFT grid for a given bin width, Hz.
    pub fn grid_step(&self, bin_width: f64) -> f64 {
        1.0 / (self.len as f64 * bin_width)
    }

    /// Lowest frequency at which `|H(f)|²/|H(0)|²` drops to 1/2, linearly
    /// interpolated between DFT grid points.
    pub fn bandwidth_3db(&self, ir: &ImpulseResponse) -> Result<Bandwidth3Db> {
        let (first, last) = ir.support().ok_or(Error::EmptyImpulseResponse)?;
        let span = last - first + 1;
        let owned;
        let fft = if span > self.len {
            owned = SpectrumAnalyzer::new(span);
            &owned
        } else {
            self
        };
        let n = fft.len;
        let mut buf = vec![Complex::new(0.0, 0.0); n];
        for (slot, p) in buf.iter_mut().zip(&ir.bins[first..=last]) {
            slot.re = *p;
        }
        fft.fft.process(&mut buf);
        let dc = buf[0].norm_sqr();
        if !(dc > 0.0) {
            return Err(Error::EmptyImpulseResponse);
        }
        let step = fft.grid_step(ir.bin_width);
        let mut prev = 1.0;
        for (k, h) in buf.iter().enumerate().take(n / 2 + 1).skip(1) {
            let r = h.norm_sqr() / dc;
            if r <= 0.5 {
                let frac = if prev > r { (prev - 0.5) / (prev - r) } else { 1.0 };
                return Ok(Bandwidth3Db::Finite((k as f64 - 1.0 + frac) * step));
            }
            prev = r;
        }
        Ok(Bandwidth3Db::AtLeast(0.5 / ir.bin_width))
    }
}

/// One-shot 3-dB bandwidth on a grid of `fft_len` points.
pub fn bandwidth_3db(ir: &ImpulseResponse, fft_len: usize) -> Result<Bandwidth3Db> {
    SpectrumAnalyzer::new(fft_len).bandwidth_3db(ir)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const W: f64 = 10e-12;

    fn ir_with(bins: &[(usize, f64)]) -> ImpulseResponse {
        let mut ir = ImpulseResponse::new(W, 1e-9).unwrap();
        for &(i, p) in bins {
            ir.bins[i] += p;
        }
        ir
    }

    #[test]
    fn power_sums() {
        assert_eq!(received_optical_power(&ir_with(&[(3, 1e-6)])), 1e-6);
        assert_eq!(received_optical_power(&ir_with(&[])), 0.0);
        assert!((received_optical_power(&ir_with(&[(1, 3e-7), (9, 2e-7)])) - 5e-7).abs() < 1e-21);
    }

    #[test]
    fn add_extends_window() {
        let mut ir = ImpulseResponse::new(W, 1e-10).unwrap();
        assert_eq!(ir.bins.len(), 10);
        assert!(!ir.add(5.5e-11, 1.0));
        assert_eq!(ir.bins[5], 1.0);
        assert!(ir.add(2.05e-10, 2.0));
        assert_eq!(ir.bins.len(), 21);
        assert_eq!(ir.bins[20], 2.0);
    }

    #[test]
    fn impulse_has_flat_spectrum() {
        let bw = bandwidth_3db(&ir_with(&[(4, 1e-6)]), 1 << 12).unwrap();
        assert_eq!(bw, Bandwidth3Db::AtLeast(50e9));
    }

    #[test]
    fn two_equal_paths_match_analytic_half_power() {
        // |H|² ∝ 2 + 2cos(2πfτ) reaches half of its DC value at f = 1/(4τ).
        let analyzer = SpectrumAnalyzer::new(1 << 20);
        // 50 ps and 25 ps separations, five bins apart.
        for (width, expected) in [(W, 5.0e9), (W / 2.0, 10.0e9)] {
            let step = analyzer.grid_step(width);
            let mut ir = ImpulseResponse::new(width, 100.0 * width).unwrap();
            ir.bins[10] = 1e-6;
            ir.bins[15] = 1e-6;
            let tau = 5.0 * width;
            assert!((1.0 / (4.0 * tau) - expected).abs() < 1.0);
            let f = analyzer.bandwidth_3db(&ir).unwrap();
            assert!(!f.is_lower_bound());
            assert!((f.hz() - expected).abs() <= step, "{f:?} vs {expected}");
        }
    }

    #[test]
    fn empty_ir_errors() {
        assert!(matches!(
            bandwidth_3db(&ir_with(&[]), 64),
            Err(Error::EmptyImpulseResponse)
        ));
        assert!(matches!(
            rms_delay_spread(&ir_with(&[])),
            Err(Error::EmptyImpulseResponse)
        ));
    }

    #[test]
    fn delay_spread_closed_forms() {
        assert_eq!(rms_delay_spread(&ir_with(&[(7, 1e-6)])).unwrap(), 0.0);
        let tau = 30.0 * W;
        let s = rms_delay_spread(&ir_with(&[(2, 1e-6), (32, 1e-6)])).unwrap();
        assert!((s - tau / 2.0).abs() < 1e-24);
    }

    proptest! {
        #[test]
        fn delay_spread_scale_invariant(
            bins in proptest::collection::vec((0usize..100, 1e-9f64..1e-3), 1..20),
            k in 1e-3f64..1e3,
        ) {
            let ir = ir_with(&bins);
            let a = rms_delay_spread(&ir).unwrap();
            let b = rms_delay_spread(&ir.scaled(k)).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * a.max(W));
        }
    }
}
