//! GOOSE APDU model and codec.
//!
//! The APDU is a single constructed TLV (tag `0x61`) whose fields carry the
//! publisher's control-block reference, retransmission state (`stNum`,
//! `sqNum`), the event timestamp, and a data set of boolean members. Field
//! order on the wire is fixed; integers use minimal unsigned content bytes.

use serde::{Deserialize, Serialize};

use super::ber::{self, BerReader};
use super::{DecodeError, DecodeErrorKind, EncodeError};

pub const TAG_GOOSE_PDU: u8 = 0x61;
const TAG_GOCB_REF: u8 = 0x80;
const TAG_TIME_ALLOWED_TO_LIVE: u8 = 0x81;
const TAG_DAT_SET: u8 = 0x82;
const TAG_GO_ID: u8 = 0x83;
const TAG_T: u8 = 0x84;
const TAG_ST_NUM: u8 = 0x85;
const TAG_SQ_NUM: u8 = 0x86;
const TAG_TEST: u8 = 0x87;
const TAG_CONF_REV: u8 = 0x88;
const TAG_NDS_COM: u8 = 0x89;
const TAG_NUM_ENTRIES: u8 = 0x8a;
const TAG_ALL_DATA: u8 = 0xab;
const TAG_DATA_BOOL: u8 = 0x83;

/// Event timestamp with second + 24-bit fraction resolution.
///
/// The wire format stores seconds as a 32-bit big-endian count and the
/// sub-second part as a 24-bit binary fraction, so the representable instants
/// form a lattice roughly 59.6 ns apart. Conversions round to the nearest
/// lattice point; a value produced by [`UtcTime::from_ns`] survives an
/// encode/decode round trip bit-exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct UtcTime {
    pub secs: u32,
    /// Binary fraction of a second, strictly less than 2^24.
    pub frac24: u32,
}

impl UtcTime {
    pub fn from_ns(ns: u64) -> UtcTime {
        let secs = ns / 1_000_000_000;
        let rem = ns % 1_000_000_000;
        // Round-to-nearest on the 2^24 lattice, carrying into seconds when the
        // fraction rounds up to 1.0.
        let frac = (rem * (1 << 24) + 500_000_000) / 1_000_000_000;
        if frac >= 1 << 24 {
            UtcTime {
                secs: (secs + 1) as u32,
                frac24: 0,
            }
        } else {
            UtcTime {
                secs: secs as u32,
                frac24: frac as u32,
            }
        }
    }

    pub fn as_ns(&self) -> u64 {
        let frac_ns = (self.frac24 as u64 * 1_000_000_000 + (1 << 23)) >> 24;
        self.secs as u64 * 1_000_000_000 + frac_ns
    }

    fn encode(&self) -> [u8; 8] {
        let mut b = [0u8; 8];
        b[..4].copy_from_slice(&self.secs.to_be_bytes());
        b[4] = (self.frac24 >> 16) as u8;
        b[5] = (self.frac24 >> 8) as u8;
        b[6] = self.frac24 as u8;
        // b[7]: time quality octet, left as 0 (clock unsynchronized flags off).
        b
    }

    fn decode(value: &[u8], at: usize) -> Result<UtcTime, DecodeError> {
        if value.len() != 8 {
            return Err(DecodeError {
                offset: at,
                kind: DecodeErrorKind::BadTimestamp,
            });
        }
        let secs = u32::from_be_bytes([value[0], value[1], value[2], value[3]]);
        let frac24 =
            ((value[4] as u32) << 16) | ((value[5] as u32) << 8) | value[6] as u32;
        Ok(UtcTime { secs, frac24 })
    }
}

/// Decoded GOOSE APDU. The data set is restricted to boolean members, which
/// is all the protection schemes here publish (trip / close commands).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GooseApdu {
    pub gocb_ref: String,
    /// Lifetime hint in milliseconds; subscribers declare the publisher dead
    /// when it elapses without a follow-up frame.
    pub time_allowed_to_live_ms: u32,
    pub dat_set: String,
    pub go_id: String,
    pub t: UtcTime,
    pub st_num: u32,
    pub sq_num: u32,
    pub test: bool,
    pub conf_rev: u32,
    pub nds_com: bool,
    pub all_data: Vec<bool>,
}

fn check_text(s: &str) -> Result<(), EncodeError> {
    if s.len() > 65 {
        return Err(EncodeError::TextTooLong {
            text: s.to_owned(),
            len: s.len(),
        });
    }
    Ok(())
}

impl GooseApdu {
    /// Encodes the APDU as a `0x61` TLV.
    pub fn encode(&self) -> Result<Vec<u8>, EncodeError> {
        check_text(&self.gocb_ref)?;
        check_text(&self.dat_set)?;
        check_text(&self.go_id)?;

        let mut all_data = Vec::with_capacity(self.all_data.len() * 3);
        for &member in &self.all_data {
            ber::push_bool(&mut all_data, TAG_DATA_BOOL, member);
        }

        let mut body = Vec::with_capacity(96 + all_data.len());
        ber::push_tlv(&mut body, TAG_GOCB_REF, self.gocb_ref.as_bytes());
        ber::push_unsigned(
            &mut body,
            TAG_TIME_ALLOWED_TO_LIVE,
            self.time_allowed_to_live_ms as u64,
        );
        ber::push_tlv(&mut body, TAG_DAT_SET, self.dat_set.as_bytes());
        ber::push_tlv(&mut body, TAG_GO_ID, self.go_id.as_bytes());
        ber::push_tlv(&mut body, TAG_T, &self.t.encode());
        ber::push_unsigned(&mut body, TAG_ST_NUM, self.st_num as u64);
        ber::push_unsigned(&mut body, TAG_SQ_NUM, self.sq_num as u64);
        ber::push_bool(&mut body, TAG_TEST, self.test);
        ber::push_unsigned(&mut body, TAG_CONF_REV, self.conf_rev as u64);
        ber::push_bool(&mut body, TAG_NDS_COM, self.nds_com);
        ber::push_unsigned(&mut body, TAG_NUM_ENTRIES, self.all_data.len() as u64);
        ber::push_tlv(&mut body, TAG_ALL_DATA, &all_data);

        let mut out = Vec::with_capacity(body.len() + 4);
        ber::push_tlv(&mut out, TAG_GOOSE_PDU, &body);
        Ok(out)
    }

    /// Decodes the APDU region of a frame. `start`..`end` must cover exactly
    /// one `0x61` TLV.
    pub fn decode(buf: &[u8], start: usize, end: usize) -> Result<GooseApdu, DecodeError> {
        let mut outer = BerReader::new(buf, start, end);
        let mut r = outer.expect_nested(TAG_GOOSE_PDU)?;
        outer.expect_end()?;

        let at = r.pos();
        let gocb_ref = ber::parse_string(r.expect(TAG_GOCB_REF)?, at)?;
        let at = r.pos();
        let time_allowed_to_live_ms = ber::parse_u32(r.expect(TAG_TIME_ALLOWED_TO_LIVE)?, at)?;
        let at = r.pos();
        let dat_set = ber::parse_string(r.expect(TAG_DAT_SET)?, at)?;
        let at = r.pos();
        let go_id = ber::parse_string(r.expect(TAG_GO_ID)?, at)?;
        let at = r.pos();
        let t = UtcTime::decode(r.expect(TAG_T)?, at)?;
        let at = r.pos();
        let st_num = ber::parse_u32(r.expect(TAG_ST_NUM)?, at)?;
        let at = r.pos();
        let sq_num = ber::parse_u32(r.expect(TAG_SQ_NUM)?, at)?;
        let at = r.pos();
        let test = ber::parse_bool(r.expect(TAG_TEST)?, at)?;
        let at = r.pos();
        let conf_rev = ber::parse_u32(r.expect(TAG_CONF_REV)?, at)?;
        let at = r.pos();
        let nds_com = ber::parse_bool(r.expect(TAG_NDS_COM)?, at)?;
        let at = r.pos();
        let num_entries = ber::parse_u32(r.expect(TAG_NUM_ENTRIES)?, at)?;

        let mut members = r.expect_nested(TAG_ALL_DATA)?;
        let mut all_data = Vec::new();
        while !members.at_end() {
            let at = members.pos();
            let value = members.expect(TAG_DATA_BOOL)?;
            all_data.push(ber::parse_bool(value, at)?);
        }
        r.expect_end()?;

        if num_entries as usize != all_data.len() {
            return Err(DecodeError {
                offset: start,
                kind: DecodeErrorKind::EntryCountMismatch {
                    declared: num_entries,
                    actual: all_data.len(),
                },
            });
        }

        Ok(GooseApdu {
            gocb_ref,
            time_allowed_to_live_ms,
            dat_set,
            go_id,
            t,
            st_num,
            sq_num,
            test,
            conf_rev,
            nds_com,
            all_data,
        })
    }
}
