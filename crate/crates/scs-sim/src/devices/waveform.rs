//! The analog world behind the merging unit: per-stream sinusoidal current
//! schedules with piecewise fault segments.

use std::collections::BTreeMap;
use std::f64::consts::{SQRT_2, TAU};

/// Steady-state description of one current stream.
#[derive(Debug, Clone, Copy)]
pub struct StreamWave {
    pub rms_amps: f64,
    pub phase_rad: f64,
}

/// A time window where a stream's magnitude is scaled (and optionally its
/// polarity flipped, which is how an in-zone fault looks to a differential
/// scheme wired for through-current cancellation).
#[derive(Debug, Clone)]
pub struct FaultSegment {
    pub stream: String,
    pub start_ns: u64,
    pub end_ns: u64,
    pub multiplier: f64,
    pub invert: bool,
}

#[derive(Debug, Clone)]
pub struct Waveform {
    pub frequency_hz: f64,
    pub streams: BTreeMap<String, StreamWave>,
    pub faults: Vec<FaultSegment>,
}

impl Waveform {
    /// Instantaneous current in milliamperes for a stream at a virtual time.
    /// Overlapping fault segments compose: multipliers multiply, inversions
    /// toggle.
    pub fn value_ma(&self, stream: &str, t_ns: u64) -> i32 {
        let Some(wave) = self.streams.get(stream) else {
            return 0;
        };
        let mut amplitude = SQRT_2 * wave.rms_amps;
        for seg in &self.faults {
            if seg.stream == stream && seg.start_ns <= t_ns && t_ns < seg.end_ns {
                amplitude *= seg.multiplier;
                if seg.invert {
                    amplitude = -amplitude;
                }
            }
        }
        let t = t_ns as f64 * 1e-9;
        let x = amplitude * (TAU * self.frequency_hz * t + wave.phase_rad).sin();
        (x * 1000.0).round() as i32
    }

    /// The analytic RMS the stream should show at an instant (steady state
    /// within a segment). Used by tests as an oracle, not by devices.
    pub fn rms_at(&self, stream: &str, t_ns: u64) -> f64 {
        let Some(wave) = self.streams.get(stream) else {
            return 0.0;
        };
        let mut rms = wave.rms_amps;
        for seg in &self.faults {
            if seg.stream == stream && seg.start_ns <= t_ns && t_ns < seg.end_ns {
                rms *= seg.multiplier;
            }
        }
        rms
    }

    pub fn nominal_rms(&self, stream: &str) -> f64 {
        self.streams.get(stream).map_or(0.0, |w| w.rms_amps)
    }
}
