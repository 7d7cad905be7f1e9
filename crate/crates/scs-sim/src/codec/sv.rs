//! Sampled Values APDU model and codec.
//!
//! One frame carries one ASDU with eight raw dataset channels (4 currents +
//! 4 voltages, each an i32 magnitude in milliamps/millivolts plus a u32
//! quality word). Unlike GOOSE, several fields use fixed widths on the wire:
//! `smpCnt` is always two bytes and `confRev` always four.

use serde::{Deserialize, Serialize};

use super::ber::{self, BerReader};
use super::{DecodeError, DecodeErrorKind, EncodeError};

pub const TAG_SV_PDU: u8 = 0x60;
const TAG_NO_ASDU: u8 = 0x80;
const TAG_SEQ_ASDU: u8 = 0xa2;
const TAG_ASDU: u8 = 0x30;
const TAG_SV_ID: u8 = 0x80;
const TAG_SMP_CNT: u8 = 0x82;
const TAG_CONF_REV: u8 = 0x83;
const TAG_SMP_SYNCH: u8 = 0x85;
const TAG_SAMPLES: u8 = 0x87;

pub const SV_CHANNELS: usize = 8;

/// Synchronization status advertised by the merging unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmpSynch {
    None,
    Local,
    Global,
}

impl SmpSynch {
    fn encode(self) -> u8 {
        match self {
            SmpSynch::None => 0,
            SmpSynch::Local => 1,
            SmpSynch::Global => 2,
        }
    }

    fn decode(value: &[u8], at: usize) -> Result<SmpSynch, DecodeError> {
        match value {
            [0] => Ok(SmpSynch::None),
            [1] => Ok(SmpSynch::Local),
            [2] => Ok(SmpSynch::Global),
            _ => Err(DecodeError {
                offset: at,
                kind: DecodeErrorKind::BadSmpSynch,
            }),
        }
    }
}

/// One dataset channel: instantaneous value and its quality word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SvSample {
    /// Scaled instantaneous value (mA for currents, mV for voltages).
    pub value: i32,
    pub quality: u32,
}

impl SvSample {
    pub const GOOD: u32 = 0;

    pub fn good(value: i32) -> SvSample {
        SvSample {
            value,
            quality: SvSample::GOOD,
        }
    }
}

/// Decoded SV APDU (single-ASDU form).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SvApdu {
    pub sv_id: String,
    /// Sample counter; wraps at the per-second rate (4800 here).
    pub smp_cnt: u16,
    pub conf_rev: u32,
    pub smp_synch: SmpSynch,
    pub samples: [SvSample; SV_CHANNELS],
}

impl SvApdu {
    /// Encodes the APDU as a `0x60` TLV with exactly one ASDU.
    pub fn encode(&self) -> Result<Vec<u8>, EncodeError> {
        if self.sv_id.len() > 65 {
            return Err(EncodeError::TextTooLong {
                text: self.sv_id.clone(),
                len: self.sv_id.len(),
            });
        }

        let mut data = Vec::with_capacity(SV_CHANNELS * 8);
        for s in &self.samples {
            data.extend_from_slice(&s.value.to_be_bytes());
            data.extend_from_slice(&s.quality.to_be_bytes());
        }

        let mut asdu = Vec::with_capacity(data.len() + self.sv_id.len() + 24);
        ber::push_tlv(&mut asdu, TAG_SV_ID, self.sv_id.as_bytes());
        ber::push_tlv(&mut asdu, TAG_SMP_CNT, &self.smp_cnt.to_be_bytes());
        ber::push_tlv(&mut asdu, TAG_CONF_REV, &self.conf_rev.to_be_bytes());
        ber::push_tlv(&mut asdu, TAG_SMP_SYNCH, &[self.smp_synch.encode()]);
        ber::push_tlv(&mut asdu, TAG_SAMPLES, &data);

        let mut seq = Vec::with_capacity(asdu.len() + 4);
        ber::push_tlv(&mut seq, TAG_ASDU, &asdu);

        let mut body = Vec::with_capacity(seq.len() + 8);
        ber::push_tlv(&mut body, TAG_NO_ASDU, &[0x01]);
        ber::push_tlv(&mut body, TAG_SEQ_ASDU, &seq);

        let mut out = Vec::with_capacity(body.len() + 4);
        ber::push_tlv(&mut out, TAG_SV_PDU, &body);
        Ok(out)
    }

    /// Decodes the APDU region of a frame. `start`..`end` must cover exactly
    /// one `0x60` TLV carrying a single ASDU.
    pub fn decode(buf: &[u8], start: usize, end: usize) -> Result<SvApdu, DecodeError> {
        let mut outer = BerReader::new(buf, start, end);
        let mut pdu = outer.expect_nested(TAG_SV_PDU)?;
        outer.expect_end()?;

        let at = pdu.pos();
        let no_asdu = ber::parse_unsigned(pdu.expect(TAG_NO_ASDU)?, at)?;
        if no_asdu != 1 {
            return Err(DecodeError {
                offset: at,
                kind: DecodeErrorKind::UnsupportedAsduCount { count: no_asdu },
            });
        }

        let mut seq = pdu.expect_nested(TAG_SEQ_ASDU)?;
        pdu.expect_end()?;
        let mut asdu = seq.expect_nested(TAG_ASDU)?;
        seq.expect_end()?;

        let at = asdu.pos();
        let sv_id = ber::parse_string(asdu.expect(TAG_SV_ID)?, at)?;

        let at = asdu.pos();
        let cnt = asdu.expect(TAG_SMP_CNT)?;
        if cnt.len() != 2 {
            return Err(DecodeError {
                offset: at,
                kind: DecodeErrorKind::BadFixedWidth {
                    field: "smpCnt",
                    expected: 2,
                    found: cnt.len(),
                },
            });
        }
        let smp_cnt = u16::from_be_bytes([cnt[0], cnt[1]]);

        let at = asdu.pos();
        let rev = asdu.expect(TAG_CONF_REV)?;
        if rev.len() != 4 {
            return Err(DecodeError {
                offset: at,
                kind: DecodeErrorKind::BadFixedWidth {
                    field: "confRev",
                    expected: 4,
                    found: rev.len(),
                },
            });
        }
        let conf_rev = u32::from_be_bytes([rev[0], rev[1], rev[2], rev[3]]);

        let at = asdu.pos();
        let smp_synch = SmpSynch::decode(asdu.expect(TAG_SMP_SYNCH)?, at)?;

        let at = asdu.pos();
        let data = asdu.expect(TAG_SAMPLES)?;
        asdu.expect_end()?;
        if data.len() != SV_CHANNELS * 8 {
            return Err(DecodeError {
                offset: at,
                kind: DecodeErrorKind::BadFixedWidth {
                    field: "sample data",
                    expected: SV_CHANNELS * 8,
                    found: data.len(),
                },
            });
        }
        let mut samples = [SvSample::good(0); SV_CHANNELS];
        for (i, chunk) in data.chunks_exact(8).enumerate() {
            samples[i] = SvSample {
                value: i32::from_be_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]),
                quality: u32::from_be_bytes([chunk[4], chunk[5], chunk[6], chunk[7]]),
            };
        }

        Ok(SvApdu {
            sv_id,
            smp_cnt,
            conf_rev,
            smp_synch,
            samples,
        })
    }
}
