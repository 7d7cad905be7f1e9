//! Classic pcap output (magic 0xa1b2c3d4, version 2.4, LINKTYPE_ETHERNET,
//! microsecond timestamps). Writers buffer in memory; the runner decides
//! where the bytes land so tests can inspect captures without touching disk.

use std::io::{self, Write};

const MAGIC: u32 = 0xa1b2c3d4;
const VERSION_MAJOR: u16 = 2;
const VERSION_MINOR: u16 = 4;
const SNAPLEN: u32 = 65535;
const LINKTYPE_ETHERNET: u32 = 1;

pub struct PcapWriter {
    buf: Vec<u8>,
    frames: usize,
}

impl Default for PcapWriter {
    fn default() -> Self {
        PcapWriter::new()
    }
}

impl PcapWriter {
    pub fn new() -> PcapWriter {
        let mut buf = Vec::with_capacity(4096);
        buf.extend_from_slice(&MAGIC.to_le_bytes());
        buf.extend_from_slice(&VERSION_MAJOR.to_le_bytes());
        buf.extend_from_slice(&VERSION_MINOR.to_le_bytes());
        buf.extend_from_slice(&0u32.to_le_bytes()); // thiszone
        buf.extend_from_slice(&0u32.to_le_bytes()); // sigfigs
        buf.extend_from_slice(&SNAPLEN.to_le_bytes());
        buf.extend_from_slice(&LINKTYPE_ETHERNET.to_le_bytes());
        PcapWriter { buf, frames: 0 }
    }

    /// Appends one frame stamped with the virtual clock (truncated to µs).
    pub fn write_frame(&mut self, time_ns: u64, frame: &[u8]) {
        let ts_sec = (time_ns / 1_000_000_000) as u32;
        let ts_usec = (time_ns % 1_000_000_000 / 1_000) as u32;
        let len = frame.len() as u32;
        self.buf.extend_from_slice(&ts_sec.to_le_bytes());
        self.buf.extend_from_slice(&ts_usec.to_le_bytes());
        self.buf.extend_from_slice(&len.to_le_bytes()); // incl_len
        self.buf.extend_from_slice(&len.to_le_bytes()); // orig_len
        self.buf.extend_from_slice(frame);
        self.frames += 1;
    }

    pub fn frame_count(&self) -> usize {
        self.frames
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.buf
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(&self.buf)
    }
}

/// Iterates the frames of a serialized pcap: `(ts_sec, ts_usec, bytes)`.
/// Used by tests and by replay tooling; returns `None` early on truncation.
pub fn read_frames(pcap: &[u8]) -> Option<Vec<(u32, u32, &[u8])>> {
    if pcap.len() < 24 || pcap[..4] != MAGIC.to_le_bytes() {
        return None;
    }
    let mut out = Vec::new();
    let mut pos = 24;
    while pos < pcap.len() {
        if pos + 16 > pcap.len() {
            return None;
        }
        let ts_sec = u32::from_le_bytes(pcap[pos..pos + 4].try_into().unwrap());
        let ts_usec = u32::from_le_bytes(pcap[pos + 4..pos + 8].try_into().unwrap());
        let incl = u32::from_le_bytes(pcap[pos + 8..pos + 12].try_into().unwrap()) as usize;
        pos += 16;
        if pos + incl > pcap.len() {
            return None;
        }
        out.push((ts_sec, ts_usec, &pcap[pos..pos + incl]));
        pos += incl;
    }
    Some(out)
}
