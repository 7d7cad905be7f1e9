//! GOOSE publisher state machine: stNum/sqNum bookkeeping and the standard
//! retransmission curve (burst at 2/4/8/16 ms after a state change, then a
//! 1000 ms heartbeat).

use crate::codec::{
    encode_goose_frame, EncodeError, FrameHeader, GooseApdu, MacAddress, UtcTime,
    ETHERTYPE_GOOSE,
};

const BURST_MS: [u64; 4] = [2, 4, 8, 16];
const HEARTBEAT_MS: u64 = 1000;

#[derive(Debug, Clone)]
pub struct PublisherConfig {
    pub src: MacAddress,
    pub dst: MacAddress,
    pub appid: u16,
    pub gocb_ref: String,
    pub dat_set: String,
    pub go_id: String,
    pub conf_rev: u32,
}

/// One GOOSE control block. The owner drives it with `start`, `change`, and
/// `retransmit` (on timer expiry); each call returns the encoded frame and
/// the delay until the next retransmission is due.
#[derive(Debug, Clone)]
pub struct GoosePublisher {
    pub cfg: PublisherConfig,
    st_num: u32,
    sq_num: u32,
    data: Vec<bool>,
    burst_pos: usize,
    event_time: UtcTime,
    /// Bumped on every state change; timers carry the generation they were
    /// scheduled under so a change invalidates in-flight retransmissions.
    pub generation: u64,
    started: bool,
}

impl GoosePublisher {
    pub fn new(cfg: PublisherConfig, initial_data: Vec<bool>) -> GoosePublisher {
        GoosePublisher {
            cfg,
            st_num: 0,
            sq_num: 0,
            data: initial_data,
            burst_pos: BURST_MS.len(), // heartbeat mode until a change
            event_time: UtcTime::from_ns(0),
            generation: 0,
            started: false,
        }
    }

    pub fn started(&self) -> bool {
        self.started
    }

    pub fn st_num(&self) -> u32 {
        self.st_num
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    /// Replaces the dataset before the first frame (no stNum bump). Used
    /// when a gated publisher comes online with state accumulated earlier.
    pub fn set_initial_data(&mut self, data: Vec<bool>) {
        debug_assert!(!self.started);
        self.data = data;
    }

    /// Delay until the next frame after the one at `burst_pos`.
    fn next_delay_ns(burst_pos: usize) -> u64 {
        BURST_MS
            .get(burst_pos)
            .copied()
            .unwrap_or(HEARTBEAT_MS)
            * 1_000_000
    }

    fn emit(&mut self) -> Result<(Vec<u8>, u64), EncodeError> {
        let next = Self::next_delay_ns(self.burst_pos);
        let apdu = GooseApdu {
            gocb_ref: self.cfg.gocb_ref.clone(),
            // Two missed retransmissions mean the publisher is gone.
            time_allowed_to_live_ms: (2 * next / 1_000_000) as u32,
            dat_set: self.cfg.dat_set.clone(),
            go_id: self.cfg.go_id.clone(),
            t: self.event_time,
            st_num: self.st_num,
            sq_num: self.sq_num,
            test: false,
            conf_rev: self.cfg.conf_rev,
            nds_com: false,
            all_data: self.data.clone(),
        };
        let header = FrameHeader {
            dst: self.cfg.dst,
            src: self.cfg.src,
            ethertype: ETHERTYPE_GOOSE,
            appid: self.cfg.appid,
        };
        let frame = encode_goose_frame(&header, &apdu)?;
        self.sq_num += 1;
        Ok((frame, next))
    }

    /// First frame of the publisher's life: announces the initial dataset at
    /// stNum 1 in heartbeat cadence.
    pub fn start(&mut self, now_ns: u64) -> Result<(Vec<u8>, u64), EncodeError> {
        debug_assert!(!self.started);
        self.started = true;
        self.st_num = 1;
        self.sq_num = 0;
        self.burst_pos = BURST_MS.len();
        self.event_time = UtcTime::from_ns(now_ns);
        self.emit()
    }

    /// Dataset changed: stNum increments, sqNum resets, burst begins.
    pub fn change(&mut self, data: Vec<bool>, now_ns: u64) -> Result<(Vec<u8>, u64), EncodeError> {
        debug_assert!(self.started);
        self.data = data;
        self.st_num += 1;
        self.sq_num = 0;
        self.burst_pos = 0;
        self.event_time = UtcTime::from_ns(now_ns);
        self.generation += 1;
        self.emit()
    }

    /// Retransmission timer fired. Returns `None` for timers from an older
    /// generation (a change superseded them).
    pub fn retransmit(&mut self, generation: u64) -> Option<Result<(Vec<u8>, u64), EncodeError>> {
        if generation != self.generation || !self.started {
            return None;
        }
        if self.burst_pos < BURST_MS.len() {
            self.burst_pos += 1;
        }
        Some(self.emit())
    }
}
