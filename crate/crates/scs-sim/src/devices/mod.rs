//! Device state machines: merging unit, protection IEDs, the concurrent
//! standby IED, and circuit breakers.
//!
//! Devices are passive state machines driven by the event loop: frame
//! deliveries and timer expiries go in, and a list of [`Output`] effects
//! (frames to emit, timers to arm, diagnostics) comes out. No device touches
//! the clock or the network directly, which is what keeps runs reproducible.

pub mod protection;
pub mod publisher;
pub mod waveform;

use serde::Serialize;

use crate::codec::{
    encode_sv_frame, FrameHeader, GooseApdu, MacAddress, SmpSynch, SvApdu, SvSample,
    ETHERTYPE_SV, SV_CHANNELS,
};
use crate::fabric::PortRef;
use protection::{Accept, DiffElement, OcElement};
use publisher::GoosePublisher;
use waveform::Waveform;

/// Effects a device hands back to the event loop.
#[derive(Debug)]
pub enum Output {
    /// Emit a frame into the fabric through one of the device's ports.
    Frame { via: PortRef, bytes: Vec<u8> },
    /// Arm a timer that will call back into this device.
    Timer { delay_ns: u64, kind: TimerKind },
    /// A local diagnostic worth a log line (counter gaps, unknown goIDs…).
    Diag { code: &'static str, detail: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimerKind {
    /// Next merging-unit sample instant.
    MuSample,
    /// GOOSE retransmission for one publisher; stale generations are no-ops.
    Retransmit { unit: UnitRef, generation: u64 },
}

/// Which protection unit inside a device a timer belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitRef {
    Main,
    CiedOc,
    CiedDiff,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Health {
    Normal,
    Isolated,
}

// ---------------------------------------------------------------------------
// Merging unit

#[derive(Debug, Clone)]
pub struct MuStream {
    pub sv_id: String,
    pub appid: u16,
    pub dst: MacAddress,
    pub conf_rev: u32,
}

pub struct MergingUnit {
    pub id: String,
    pub mac: MacAddress,
    pub port: PortRef,
    pub streams: Vec<MuStream>,
    pub waveform: Waveform,
    pub sample_rate: u32,
    pub health: Health,
    sample_index: u64,
}

impl MergingUnit {
    pub fn new(
        id: String,
        mac: MacAddress,
        port: PortRef,
        streams: Vec<MuStream>,
        waveform: Waveform,
        sample_rate: u32,
    ) -> MergingUnit {
        MergingUnit {
            id,
            mac,
            port,
            streams,
            waveform,
            sample_rate,
            health: Health::Normal,
            sample_index: 0,
        }
    }

    fn sample_instant_ns(&self, index: u64) -> u64 {
        index * 1_000_000_000 / self.sample_rate as u64
    }

    /// Arm the first sample timer (sample 0 fires at t=0).
    pub fn start(&self) -> Vec<Output> {
        vec![Output::Timer {
            delay_ns: 0,
            kind: TimerKind::MuSample,
        }]
    }

    /// One sample instant: emit one SV frame per stream, re-arm for the next
    /// instant on the drift-free integer grid.
    pub fn on_sample_timer(&mut self, now_ns: u64) -> Vec<Output> {
        if self.health == Health::Isolated {
            return Vec::new();
        }
        let k = self.sample_index;
        debug_assert_eq!(now_ns, self.sample_instant_ns(k));
        let smp_cnt = (k % self.sample_rate as u64) as u16;
        let mut out = Vec::with_capacity(self.streams.len() + 1);
        for stream in &self.streams {
            let mut samples = [SvSample::good(0); SV_CHANNELS];
            samples[0] = SvSample::good(self.waveform.value_ma(&stream.sv_id, now_ns));
            let apdu = SvApdu {
                sv_id: stream.sv_id.clone(),
                smp_cnt,
                conf_rev: stream.conf_rev,
                smp_synch: SmpSynch::Global,
                samples,
            };
            let header = FrameHeader {
                dst: stream.dst,
                src: self.mac,
                ethertype: ETHERTYPE_SV,
                appid: stream.appid,
            };
            let bytes = encode_sv_frame(&header, &apdu)
                .expect("stream ids validated at scenario load");
            out.push(Output::Frame {
                via: self.port,
                bytes,
            });
        }
        self.sample_index += 1;
        out.push(Output::Timer {
            delay_ns: self.sample_instant_ns(self.sample_index) - now_ns,
            kind: TimerKind::MuSample,
        });
        out
    }
}

// ---------------------------------------------------------------------------
// Protection unit (the core shared by PIEDs and each CIED function)

#[derive(Debug)]
pub enum ProtFn {
    Oc(OcElement),
    Diff(DiffElement),
}

/// One protection function plus its trip publisher. PIEDs hold exactly one;
/// the CIED holds two (its replicas of each PIED function).
pub struct ProtectionUnit {
    /// Subscribed svIDs; for differential, index 0/1 are the two zone ends.
    pub subscribes: Vec<String>,
    pub function: ProtFn,
    pub publisher: GoosePublisher,
    pub publish_port: PortRef,
    /// Gated publishers (CIED functions before failover) stay silent while
    /// the protection logic runs hot.
    pub active: bool,
    pub trip: bool,
}

impl ProtectionUnit {
    /// Start-of-run announcement for active units.
    pub fn start(&mut self, now_ns: u64, unit: UnitRef) -> Vec<Output> {
        if !self.active {
            return Vec::new();
        }
        let (bytes, delay) = self
            .publisher
            .start(now_ns)
            .expect("publisher strings validated at scenario load");
        vec![
            Output::Frame {
                via: self.publish_port,
                bytes,
            },
            Output::Timer {
                delay_ns: delay,
                kind: TimerKind::Retransmit {
                    unit,
                    generation: self.publisher.generation,
                },
            },
        ]
    }

    /// Bring a gated unit online: announce the current protection state,
    /// begin heartbeats.
    pub fn activate(&mut self, now_ns: u64, unit: UnitRef) -> Vec<Output> {
        if self.active {
            return Vec::new();
        }
        self.active = true;
        if !self.publisher.started() {
            self.publisher.set_initial_data(vec![self.trip]);
        }
        self.start(now_ns, unit)
    }

    pub fn on_sv(&mut self, apdu: &SvApdu, now_ns: u64, unit: UnitRef) -> Vec<Output> {
        let Some(stream_idx) = self.subscribes.iter().position(|s| *s == apdu.sv_id) else {
            return Vec::new();
        };
        let value = apdu.samples[0].value;
        let mut out = Vec::new();
        let (accept, new_trip) = match &mut self.function {
            ProtFn::Oc(oc) => {
                let ev = oc.on_sample(apdu.smp_cnt, value, now_ns);
                (ev.accept, ev.new_trip)
            }
            ProtFn::Diff(diff) => {
                let ev = diff.on_sample(stream_idx, apdu.smp_cnt, value, now_ns);
                if ev.stream_loss {
                    out.push(Output::Diag {
                        code: "diff_stream_loss",
                        detail: format!("partner of {} silent, holding", apdu.sv_id),
                    });
                }
                (ev.accept, ev.new_trip)
            }
        };
        if accept == Accept::GapReset {
            out.push(Output::Diag {
                code: "smp_cnt_gap",
                detail: format!("{} window reset at smpCnt {}", apdu.sv_id, apdu.smp_cnt),
            });
        }
        if new_trip {
            self.trip = true;
            if self.active {
                let (bytes, delay) = self
                    .publisher
                    .change(vec![true], now_ns)
                    .expect("publisher strings validated at scenario load");
                out.push(Output::Frame {
                    via: self.publish_port,
                    bytes,
                });
                out.push(Output::Timer {
                    delay_ns: delay,
                    kind: TimerKind::Retransmit {
                        unit,
                        generation: self.publisher.generation,
                    },
                });
            }
        }
        out
    }

    pub fn on_retransmit_timer(&mut self, generation: u64, unit: UnitRef) -> Vec<Output> {
        if !self.active {
            return Vec::new();
        }
        match self.publisher.retransmit(generation) {
            Some(Ok((bytes, delay))) => vec![
                Output::Frame {
                    via: self.publish_port,
                    bytes,
                },
                Output::Timer {
                    delay_ns: delay,
                    kind: TimerKind::Retransmit {
                        unit,
                        generation: self.publisher.generation,
                    },
                },
            ],
            Some(Err(_)) | None => Vec::new(),
        }
    }
}

// ---------------------------------------------------------------------------
// PIED / CIED / breaker

pub struct Pied {
    pub id: String,
    pub mac: MacAddress,
    pub ports: Vec<PortRef>,
    pub unit: ProtectionUnit,
    pub health: Health,
}

impl Pied {
    pub fn start(&mut self, now_ns: u64) -> Vec<Output> {
        self.unit.start(now_ns, UnitRef::Main)
    }

    pub fn on_frame(&mut self, decoded: &crate::codec::Decoded, now_ns: u64) -> Vec<Output> {
        if self.health == Health::Isolated {
            return Vec::new();
        }
        match decoded {
            crate::codec::Decoded::Sv { apdu, .. } => self.unit.on_sv(apdu, now_ns, UnitRef::Main),
            _ => Vec::new(),
        }
    }

    pub fn on_timer(&mut self, kind: TimerKind) -> Vec<Output> {
        if self.health == Health::Isolated {
            return Vec::new();
        }
        match kind {
            TimerKind::Retransmit { unit, generation } => {
                self.unit.on_retransmit_timer(generation, unit)
            }
            TimerKind::MuSample => Vec::new(),
        }
    }
}

/// The concurrent IED: both protection functions always evaluating, each
/// with its own gated publisher and its own fabric port.
pub struct Cied {
    pub id: String,
    pub mac: MacAddress,
    pub oc: ProtectionUnit,
    pub diff: ProtectionUnit,
}

impl Cied {
    pub fn on_frame(&mut self, decoded: &crate::codec::Decoded, now_ns: u64) -> Vec<Output> {
        match decoded {
            crate::codec::Decoded::Sv { apdu, .. } => {
                let mut out = self.oc.on_sv(apdu, now_ns, UnitRef::CiedOc);
                out.extend(self.diff.on_sv(apdu, now_ns, UnitRef::CiedDiff));
                out
            }
            _ => Vec::new(),
        }
    }

    pub fn on_timer(&mut self, kind: TimerKind) -> Vec<Output> {
        match kind {
            TimerKind::Retransmit {
                unit: unit @ UnitRef::CiedOc,
                generation,
            } => self.oc.on_retransmit_timer(generation, unit),
            TimerKind::Retransmit {
                unit: unit @ UnitRef::CiedDiff,
                generation,
            } => self.diff.on_retransmit_timer(generation, unit),
            _ => Vec::new(),
        }
    }

    pub fn unit_mut(&mut self, unit: UnitRef) -> &mut ProtectionUnit {
        match unit {
            UnitRef::CiedOc => &mut self.oc,
            UnitRef::CiedDiff => &mut self.diff,
            UnitRef::Main => panic!("CIED has no main unit"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BreakerPosition {
    Closed,
    Open,
}

pub struct Breaker {
    pub id: String,
    pub mac: MacAddress,
    pub port: PortRef,
    pub subscribed_go_ids: Vec<String>,
    pub position: BreakerPosition,
    pub last_trip_ns: Option<u64>,
    /// Every accepted trip: (time, goID, stNum).
    pub trips: Vec<(u64, String, u32)>,
}

impl Breaker {
    pub fn new(id: String, mac: MacAddress, port: PortRef, subscribed: Vec<String>) -> Breaker {
        Breaker {
            id,
            mac,
            port,
            subscribed_go_ids: subscribed,
            position: BreakerPosition::Closed,
            last_trip_ns: None,
            trips: Vec::new(),
        }
    }

    pub fn on_goose(&mut self, apdu: &GooseApdu, now_ns: u64) -> Vec<Output> {
        if !self.subscribed_go_ids.iter().any(|g| *g == apdu.go_id) {
            return vec![Output::Diag {
                code: "cb_unknown_go_id",
                detail: format!("ignoring goID {}", apdu.go_id),
            }];
        }
        if apdu.test {
            return vec![Output::Diag {
                code: "cb_test_frame",
                detail: format!("test frame from {} ignored", apdu.go_id),
            }];
        }
        if apdu.all_data.first().copied().unwrap_or(false)
            && self.position == BreakerPosition::Closed
        {
            self.position = BreakerPosition::Open;
            self.last_trip_ns = Some(now_ns);
            self.trips.push((now_ns, apdu.go_id.clone(), apdu.st_num));
            return vec![Output::Diag {
                code: "cb_open",
                detail: format!("opened by {} stNum {}", apdu.go_id, apdu.st_num),
            }];
        }
        Vec::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{decode_frame, Decoded};
    use publisher::PublisherConfig;
    use std::collections::BTreeMap;
    use waveform::StreamWave;

    fn port(switch: usize, port: u16) -> PortRef {
        PortRef { switch, port }
    }

    fn test_waveform() -> Waveform {
        Waveform {
            frequency_hz: 60.0,
            streams: BTreeMap::from([(
                "S1".to_string(),
                StreamWave {
                    rms_amps: 1000.0,
                    phase_rad: 0.0,
                },
            )]),
            faults: vec![],
        }
    }

    fn mu() -> MergingUnit {
        MergingUnit::new(
            "MU1".into(),
            MacAddress([0, 0x10, 0x4d, 0, 0, 1]),
            port(0, 1),
            vec![MuStream {
                sv_id: "S1".into(),
                appid: 0x4001,
                dst: MacAddress::sv_dst(1),
                conf_rev: 1,
            }],
            test_waveform(),
            4800,
        )
    }

    #[test]
    fn mu_emits_one_frame_per_stream_with_wrapping_counter() {
        let mut mu = mu();
        let mut counters = Vec::new();
        let mut now = 0;
        for k in 0..4802u64 {
            let outs = mu.on_sample_timer(now);
            let mut next_delay = None;
            for out in outs {
                match out {
                    Output::Frame { bytes, .. } => match decode_frame(&bytes).unwrap() {
                        Decoded::Sv { apdu, .. } => counters.push(apdu.smp_cnt),
                        other => panic!("{other:?}"),
                    },
                    Output::Timer { delay_ns, .. } => next_delay = Some(delay_ns),
                    Output::Diag { .. } => {}
                }
            }
            now += next_delay.unwrap();
            let _ = k;
        }
        assert_eq!(counters.len(), 4802);
        assert_eq!(counters[0], 0);
        assert_eq!(counters[4799], 4799);
        assert_eq!(counters[4800], 0); // wraps at the sample rate
        // Drift-free grid: sample 4800 lands exactly at 1 s.
        assert_eq!(4800 * 1_000_000_000u64 / 4800, 1_000_000_000);
    }

    #[test]
    fn isolated_mu_goes_silent() {
        let mut mu = mu();
        mu.health = Health::Isolated;
        assert!(mu.on_sample_timer(0).is_empty());
    }

    fn pub_cfg(go_id: &str) -> PublisherConfig {
        PublisherConfig {
            src: MacAddress([0, 0x10, 0x4d, 0, 0, 2]),
            dst: MacAddress::goose_dst(1),
            appid: 0x3001,
            gocb_ref: format!("{go_id}/LLN0$GO$g"),
            dat_set: format!("{go_id}/LLN0$ds"),
            go_id: go_id.into(),
            conf_rev: 1,
        }
    }

    fn sv(sv_id: &str, smp_cnt: u16, ma: i32) -> crate::codec::Decoded {
        let mut samples = [SvSample::good(0); SV_CHANNELS];
        samples[0] = SvSample::good(ma);
        Decoded::Sv {
            header: FrameHeader {
                dst: MacAddress::sv_dst(1),
                src: MacAddress([0, 0x10, 0x4d, 0, 0, 1]),
                ethertype: ETHERTYPE_SV,
                appid: 0x4001,
            },
            apdu: SvApdu {
                sv_id: sv_id.into(),
                smp_cnt,
                conf_rev: 1,
                smp_synch: SmpSynch::Global,
                samples,
            },
        }
    }

    fn oc_pied(active: bool) -> Pied {
        Pied {
            id: "PIED_OC".into(),
            mac: MacAddress([0, 0x10, 0x4d, 0, 0, 2]),
            ports: vec![port(0, 2), port(1, 1)],
            unit: ProtectionUnit {
                subscribes: vec!["S1".into()],
                function: ProtFn::Oc(OcElement::new(2000.0, 0, 4800)),
                publisher: GoosePublisher::new(pub_cfg("PIED_OC_Trip"), vec![false]),
                publish_port: port(1, 1),
                active,
                trip: false,
            },
            health: Health::Normal,
        }
    }

    #[test]
    fn pied_trips_and_publishes_goose_burst_start() {
        let mut pied = oc_pied(true);
        pied.start(0);
        let mut frames = Vec::new();
        for k in 0..160u64 {
            let t = k * 208_333;
            let ma = (std::f64::consts::SQRT_2
                * 10_000.0
                * (std::f64::consts::TAU * 60.0 * t as f64 * 1e-9).sin()
                * 1000.0)
                .round() as i32;
            for out in pied.on_frame(&sv("S1", k as u16, ma), t) {
                if let Output::Frame { bytes, via } = out {
                    assert_eq!(via, port(1, 1));
                    frames.push(bytes);
                }
            }
        }
        assert_eq!(frames.len(), 1, "exactly one trip change frame");
        match decode_frame(&frames[0]).unwrap() {
            Decoded::Goose { apdu, .. } => {
                assert_eq!(apdu.all_data, vec![true]);
                assert_eq!(apdu.st_num, 2);
                assert_eq!(apdu.sq_num, 0);
            }
            other => panic!("{other:?}"),
        }
        assert!(pied.unit.trip);
    }

    #[test]
    fn gated_unit_trips_silently_then_announces_on_activation() {
        let mut pied = oc_pied(false);
        assert!(pied.start(0).is_empty());
        let mut emitted = 0;
        for k in 0..160u64 {
            let t = k * 208_333;
            let outs = pied.on_frame(&sv("S1", k as u16, 5_000_000), t);
            emitted += outs
                .iter()
                .filter(|o| matches!(o, Output::Frame { .. }))
                .count();
        }
        assert_eq!(emitted, 0, "gated publisher must stay silent");
        assert!(pied.unit.trip, "protection logic still ran");

        let outs = pied.unit.activate(40_000_000, UnitRef::Main);
        let frame = outs
            .iter()
            .find_map(|o| match o {
                Output::Frame { bytes, .. } => Some(bytes),
                _ => None,
            })
            .expect("activation announces");
        match decode_frame(frame).unwrap() {
            Decoded::Goose { apdu, .. } => {
                assert_eq!(apdu.st_num, 1);
                // The announcement reflects the trip latched while gated.
                assert_eq!(apdu.all_data, vec![true]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn isolated_pied_ignores_everything() {
        let mut pied = oc_pied(true);
        pied.start(0);
        pied.health = Health::Isolated;
        assert!(pied.on_frame(&sv("S1", 0, 5_000_000), 0).is_empty());
        assert!(pied
            .on_timer(TimerKind::Retransmit {
                unit: UnitRef::Main,
                generation: 0
            })
            .is_empty());
    }

    fn goose(go_id: &str, trip: bool, test: bool) -> GooseApdu {
        GooseApdu {
            gocb_ref: "x".into(),
            time_allowed_to_live_ms: 2000,
            dat_set: "y".into(),
            go_id: go_id.into(),
            t: crate::codec::UtcTime::from_ns(0),
            st_num: 2,
            sq_num: 0,
            test,
            conf_rev: 1,
            nds_com: false,
            all_data: vec![trip],
        }
    }

    #[test]
    fn breaker_opens_only_on_subscribed_real_trips() {
        let mut cb = Breaker::new(
            "CB1".into(),
            MacAddress([9; 6]),
            port(1, 4),
            vec!["PIED_OC_Trip".into()],
        );
        cb.on_goose(&goose("OTHER_Trip", true, false), 100);
        assert_eq!(cb.position, BreakerPosition::Closed);
        cb.on_goose(&goose("PIED_OC_Trip", true, true), 200);
        assert_eq!(cb.position, BreakerPosition::Closed);
        cb.on_goose(&goose("PIED_OC_Trip", false, false), 300);
        assert_eq!(cb.position, BreakerPosition::Closed);
        cb.on_goose(&goose("PIED_OC_Trip", true, false), 400);
        assert_eq!(cb.position, BreakerPosition::Open);
        assert_eq!(cb.last_trip_ns, Some(400));
        assert_eq!(cb.trips.len(), 1);
        // Already open: further trips record nothing new.
        cb.on_goose(&goose("PIED_OC_Trip", true, false), 500);
        assert_eq!(cb.trips.len(), 1);
    }
}
