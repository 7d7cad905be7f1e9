//! Protection math: RMS estimation over a one-cycle sample window, the
//! definite-time overcurrent element, and the percentage-differential
//! element.

/// Samples per cycle at 4800 samples/s, 60 Hz.
pub const SAMPLES_PER_CYCLE: usize = 80;

/// RMS in amperes over a window of milliampere samples.
pub fn rms_amps(window: &[i32]) -> f64 {
    if window.is_empty() {
        return 0.0;
    }
    let sum_sq: f64 = window
        .iter()
        .map(|&ma| {
            let a = ma as f64 / 1000.0;
            a * a
        })
        .sum();
    (sum_sq / window.len() as f64).sqrt()
}

/// How a sample counter related to the window's expectation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Accept {
    /// The next expected counter: the window advanced.
    Advanced,
    /// A counter within the last cycle: the slot was overwritten in place
    /// (late duplicate or competing publisher), window fill unchanged.
    Overwrote,
    /// Anything else: stale data discarded, window restarted from this
    /// sample.
    GapReset,
}

/// One-cycle circular sample buffer keyed by `smpCnt % SAMPLES_PER_CYCLE`.
#[derive(Debug, Clone)]
pub struct CycleBuffer {
    slots: [i32; SAMPLES_PER_CYCLE],
    filled: u32,
    expected: Option<u16>,
    wrap: u16,
}

impl CycleBuffer {
    pub fn new(wrap: u16) -> CycleBuffer {
        CycleBuffer {
            slots: [0; SAMPLES_PER_CYCLE],
            filled: 0,
            expected: None,
            wrap,
        }
    }

    pub fn push(&mut self, smp_cnt: u16, value_ma: i32) -> Accept {
        let cnt = smp_cnt % self.wrap;
        let slot = cnt as usize % SAMPLES_PER_CYCLE;
        match self.expected {
            Some(expected) if cnt == expected => {
                self.slots[slot] = value_ma;
                self.filled = self.filled.saturating_add(1);
                self.expected = Some((cnt + 1) % self.wrap);
                Accept::Advanced
            }
            Some(expected) => {
                // Distance back from the most recent accepted counter.
                let back = (expected + self.wrap - 1 - cnt) % self.wrap;
                if (back as usize) < SAMPLES_PER_CYCLE {
                    self.slots[slot] = value_ma;
                    Accept::Overwrote
                } else {
                    self.restart(cnt, slot, value_ma);
                    Accept::GapReset
                }
            }
            None => {
                self.restart(cnt, slot, value_ma);
                Accept::Advanced
            }
        }
    }

    fn restart(&mut self, cnt: u16, slot: usize, value_ma: i32) {
        self.slots = [0; SAMPLES_PER_CYCLE];
        self.slots[slot] = value_ma;
        self.filled = 1;
        self.expected = Some((cnt + 1) % self.wrap);
    }

    pub fn full(&self) -> bool {
        self.filled as usize >= SAMPLES_PER_CYCLE
    }

    /// Raw slot contents; meaningful once `full()`.
    pub fn window(&self) -> &[i32; SAMPLES_PER_CYCLE] {
        &self.slots
    }

    /// Counter of the most recently accepted in-sequence sample.
    pub fn last_counter(&self) -> Option<u16> {
        self.expected
            .map(|e| (e + self.wrap - 1) % self.wrap)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Evaluation {
    pub accept: Accept,
    /// Set on the evaluation that latched the trip.
    pub new_trip: bool,
}

/// Definite-time overcurrent (ANSI 50/51 with fixed delay): trips when the
/// one-cycle RMS stays at or above pickup continuously for the delay.
#[derive(Debug, Clone)]
pub struct OcElement {
    pub pickup_amps: f64,
    pub delay_ns: u64,
    buf: CycleBuffer,
    above_since: Option<u64>,
    pub tripped: bool,
    pub last_rms: f64,
}

impl OcElement {
    pub fn new(pickup_amps: f64, delay_ns: u64, wrap: u16) -> OcElement {
        OcElement {
            pickup_amps,
            delay_ns,
            buf: CycleBuffer::new(wrap),
            above_since: None,
            tripped: false,
            last_rms: 0.0,
        }
    }

    pub fn on_sample(&mut self, smp_cnt: u16, value_ma: i32, now_ns: u64) -> Evaluation {
        let accept = self.buf.push(smp_cnt, value_ma);
        if accept == Accept::GapReset {
            // Stale or discontinuous data: never trip on it.
            self.above_since = None;
        }
        let mut new_trip = false;
        if self.buf.full() {
            let rms = rms_amps(self.buf.window());
            self.last_rms = rms;
            if rms >= self.pickup_amps {
                let since = *self.above_since.get_or_insert(now_ns);
                if !self.tripped && now_ns - since >= self.delay_ns {
                    self.tripped = true;
                    new_trip = true;
                }
            } else {
                self.above_since = None;
            }
        }
        Evaluation { accept, new_trip }
    }
}

/// Percentage differential (ANSI 87): operate current is the RMS of the
/// per-sample sum of the two zone currents, restraint is the mean of the two
/// RMS magnitudes.
#[derive(Debug, Clone)]
pub struct DiffElement {
    pub min_operate_amps: f64,
    pub slope: f64,
    bufs: [CycleBuffer; 2],
    /// Last arrival time per stream, for stream-loss detection.
    last_seen: [Option<u64>; 2],
    pub tripped: bool,
    pub last_operate: f64,
    pub last_restraint: f64,
}

/// Two cycles of silence on the partner stream ⇒ hold.
const STREAM_LOSS_NS: u64 = 2 * 1_000_000_000 / 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiffEvaluation {
    pub accept: Accept,
    pub new_trip: bool,
    /// Partner stream silent too long: evaluation held this round.
    pub stream_loss: bool,
}

impl DiffElement {
    pub fn new(min_operate_amps: f64, slope: f64, wrap: u16) -> DiffElement {
        DiffElement {
            min_operate_amps,
            slope,
            bufs: [CycleBuffer::new(wrap), CycleBuffer::new(wrap)],
            last_seen: [None; 2],
            tripped: false,
            last_operate: 0.0,
            last_restraint: 0.0,
        }
    }

    pub fn on_sample(
        &mut self,
        stream: usize,
        smp_cnt: u16,
        value_ma: i32,
        now_ns: u64,
    ) -> DiffEvaluation {
        let accept = self.bufs[stream].push(smp_cnt, value_ma);
        self.last_seen[stream] = Some(now_ns);

        let other = 1 - stream;
        let stream_loss = match self.last_seen[other] {
            Some(t) => now_ns.saturating_sub(t) > STREAM_LOSS_NS,
            None => true,
        };
        // Evaluate only when both windows have advanced to the same counter;
        // pairing a fresh sample against the partner's stale one would look
        // like spill current during any external step change.
        let aligned = self.bufs[0].last_counter().is_some()
            && self.bufs[0].last_counter() == self.bufs[1].last_counter();
        let mut new_trip = false;
        if !stream_loss && aligned && self.bufs[0].full() && self.bufs[1].full() {
            let a = self.bufs[0].window();
            let b = self.bufs[1].window();
            let sum: Vec<i32> = a
                .iter()
                .zip(b.iter())
                .map(|(&x, &y)| x.saturating_add(y))
                .collect();
            let operate = rms_amps(&sum);
            let restraint = (rms_amps(a) + rms_amps(b)) / 2.0;
            self.last_operate = operate;
            self.last_restraint = restraint;
            if !self.tripped && operate > self.min_operate_amps.max(self.slope * restraint) {
                self.tripped = true;
                new_trip = true;
            }
        }
        DiffEvaluation {
            accept,
            new_trip,
            stream_loss,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const SQRT_2: f64 = std::f64::consts::SQRT_2;

    fn sine_ma(rms: f64, k: u64) -> i32 {
        let t = k as f64 / 4800.0;
        (SQRT_2 * rms * (std::f64::consts::TAU * 60.0 * t).sin() * 1000.0).round() as i32
    }

    #[test]
    fn rms_of_zeros_is_zero() {
        assert_eq!(rms_amps(&[0; 80]), 0.0);
    }

    #[test]
    fn rms_of_sinusoid_matches_analytic() {
        let window: Vec<i32> = (0..80).map(|k| sine_ma(1000.0, k)).collect();
        let rms = rms_amps(&window);
        assert!(
            (rms - 1000.0).abs() / 1000.0 < 1e-3,
            "rms {rms} not within 0.1%"
        );
    }

    #[test]
    fn rms_matches_direct_formula_on_random_windows() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let window: Vec<i32> =
                (0..80).map(|_| rng.random_range(-2_000_000..2_000_000)).collect();
            // Direct evaluation, written independently of rms_amps.
            let mut acc = 0.0f64;
            for &ma in &window {
                acc += (ma as f64 / 1000.0).powi(2);
            }
            let expected = (acc / 80.0).sqrt();
            let got = rms_amps(&window);
            assert!(
                (got - expected).abs() <= 1e-9 * expected.max(1.0),
                "{got} vs {expected}"
            );
        }
    }

    #[test]
    fn cycle_buffer_counter_semantics() {
        let mut buf = CycleBuffer::new(4800);
        for k in 0..80 {
            assert_eq!(buf.push(k, 1), Accept::Advanced);
        }
        assert!(buf.full());
        // Duplicate of the last counter overwrites, keeps the window full.
        assert_eq!(buf.push(79, 9), Accept::Overwrote);
        assert!(buf.full());
        assert_eq!(buf.window()[79], 9);
        // One cycle back is still in the overwrite window; older is not.
        assert_eq!(buf.push(0, 5), Accept::Overwrote);
        assert_eq!(buf.push(80, 1), Accept::Advanced);
        // Jump far ahead: reset.
        assert_eq!(buf.push(400, 1), Accept::GapReset);
        assert!(!buf.full());
    }

    #[test]
    fn cycle_buffer_wraps_counter() {
        let mut buf = CycleBuffer::new(4800);
        for k in 4795..4800 {
            buf.push(k, 1);
        }
        assert_eq!(buf.push(0, 1), Accept::Advanced);
        assert_eq!(buf.last_counter(), Some(0));
        assert_eq!(buf.push(4799, 3), Accept::Overwrote);
    }

    fn run_oc(oc: &mut OcElement, rms: f64, from_k: u64, count: u64) -> Option<u64> {
        for k in from_k..from_k + count {
            let t = k * 1_000_000_000 / 4800;
            let ev = oc.on_sample((k % 4800) as u16, sine_ma(rms, k), t);
            if ev.new_trip {
                return Some(t);
            }
        }
        None
    }

    #[test]
    fn oc_never_trips_below_pickup() {
        let mut oc = OcElement::new(2000.0, 100_000_000, 4800);
        assert_eq!(run_oc(&mut oc, 1000.0, 0, 4800 * 2), None);
        assert!(!oc.tripped);
    }

    #[test]
    fn oc_trips_after_delay_plus_window_fill() {
        let mut oc = OcElement::new(2000.0, 100_000_000, 4800);
        // One second of nominal load, then a 5x step.
        assert_eq!(run_oc(&mut oc, 1000.0, 0, 4800), None);
        let trip_t = run_oc(&mut oc, 10_000.0, 4800, 4800).expect("should trip");
        // Analytic bound: RMS crosses pickup while the fault fills the
        // window (≤ 1 cycle), then the definite-time delay runs.
        let fault_start = 1_000_000_000u64;
        let delay = 100_000_000u64;
        let cycle = 1_000_000_000 / 60;
        assert!(trip_t >= fault_start + delay, "tripped early at {trip_t}");
        assert!(
            trip_t <= fault_start + delay + cycle,
            "tripped late at {trip_t}"
        );
    }

    #[test]
    fn oc_timer_resets_when_current_drops() {
        let mut oc = OcElement::new(2000.0, 100_000_000, 4800);
        run_oc(&mut oc, 1000.0, 0, 4800);
        // Above pickup for half the delay, then back to normal.
        assert_eq!(run_oc(&mut oc, 10_000.0, 4800, 240), None);
        assert_eq!(run_oc(&mut oc, 1000.0, 5040, 4800), None);
        // A fresh excursion needs the full delay again.
        let t = run_oc(&mut oc, 10_000.0, 9840, 4800).unwrap();
        assert!(t >= 9840 * 1_000_000_000 / 4800 + 100_000_000);
    }

    #[test]
    fn oc_gap_resets_window() {
        let mut oc = OcElement::new(2000.0, 0, 4800);
        // Full window above pickup would trip instantly (zero delay)...
        for k in 0..79 {
            oc.on_sample(k, sine_ma(10_000.0, k as u64), 1);
        }
        // ...but a counter jump resets fill, so no trip on the next sample.
        let ev = oc.on_sample(2000, sine_ma(10_000.0, 79), 2);
        assert_eq!(ev.accept, Accept::GapReset);
        assert!(!ev.new_trip);
    }

    fn feed_diff(
        diff: &mut DiffElement,
        rms_a: f64,
        rms_b: f64,
        invert_b: bool,
        from_k: u64,
        count: u64,
    ) -> bool {
        let mut tripped = false;
        for k in from_k..from_k + count {
            let t = k * 1_000_000_000 / 4800;
            let cnt = (k % 4800) as u16;
            let a = sine_ma(rms_a, k);
            let mut b = -sine_ma(rms_b, k);
            if invert_b {
                b = -b;
            }
            tripped |= diff.on_sample(0, cnt, a, t).new_trip;
            tripped |= diff.on_sample(1, cnt, b, t).new_trip;
        }
        tripped
    }

    #[test]
    fn through_current_does_not_trip() {
        let mut diff = DiffElement::new(200.0, 0.3, 4800);
        assert!(!feed_diff(&mut diff, 1000.0, 1000.0, false, 0, 4800));
        // Even a heavy through-fault cancels.
        assert!(!feed_diff(&mut diff, 5000.0, 5000.0, false, 4800, 4800));
        assert!(diff.last_operate < 1.0, "operate {}", diff.last_operate);
    }

    #[test]
    fn internal_fault_polarity_flip_trips() {
        let mut diff = DiffElement::new(200.0, 0.3, 4800);
        assert!(!feed_diff(&mut diff, 1000.0, 1000.0, false, 0, 4800));
        assert!(feed_diff(&mut diff, 1000.0, 1000.0, true, 4800, 4800));
        // Operate current approaches 2x the per-stream RMS.
        assert!(
            (diff.last_operate - 2000.0).abs() < 100.0,
            "operate {}",
            diff.last_operate
        );
    }

    #[test]
    fn both_streams_dead_hold() {
        let mut diff = DiffElement::new(200.0, 0.3, 4800);
        assert!(!feed_diff(&mut diff, 0.0, 0.0, false, 0, 4800));
        assert!(!diff.tripped);
    }

    #[test]
    fn partner_stream_loss_holds_evaluation() {
        let mut diff = DiffElement::new(200.0, 0.3, 4800);
        feed_diff(&mut diff, 1000.0, 1000.0, false, 0, 4800);
        // Stream 1 goes silent; stream 0 alone would look like a huge
        // differential, but the element must hold instead of tripping.
        let mut held = false;
        for k in 4800..4800 + 960u64 {
            let t = k * 1_000_000_000 / 4800;
            let ev = diff.on_sample(0, (k % 4800) as u16, sine_ma(1000.0, k), t);
            assert!(!ev.new_trip);
            held |= ev.stream_loss;
        }
        assert!(held);
        assert!(!diff.tripped);
    }
}
