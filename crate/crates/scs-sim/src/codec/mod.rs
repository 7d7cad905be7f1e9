//! Wire formats for layer-2 substation traffic.
//!
//! Both protocols ride directly on Ethernet (no IP): a 14-byte Ethernet
//! header, a 8-byte session header (APPID, Length, two reserved words), and a
//! BER-TLV APDU. The decoder is total — any byte slice produces either a
//! decoded frame or a [`DecodeError`] with the offset of the offending byte,
//! never a panic.

mod ber;
pub mod goose;
pub mod sv;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use goose::{GooseApdu, UtcTime};
pub use sv::{SmpSynch, SvApdu, SvSample, SV_CHANNELS};

/// EtherType for GOOSE frames.
pub const ETHERTYPE_GOOSE: u16 = 0x88b8;
/// EtherType for Sampled Values frames.
pub const ETHERTYPE_SV: u16 = 0x88ba;

/// Offset of the APDU within a frame: 14 (Ethernet) + 8 (session header).
pub const APDU_OFFSET: usize = 22;

/// A 48-bit MAC address.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MacAddress(pub [u8; 6]);

impl MacAddress {
    /// Multicast prefix conventionally used for GOOSE destinations.
    pub const GOOSE_GROUP: [u8; 4] = [0x01, 0x0c, 0xcd, 0x01];
    /// Multicast prefix conventionally used for SV destinations.
    pub const SV_GROUP: [u8; 4] = [0x01, 0x0c, 0xcd, 0x04];

    pub fn goose_dst(low: u16) -> MacAddress {
        let [hi, lo] = low.to_be_bytes();
        MacAddress([0x01, 0x0c, 0xcd, 0x01, hi, lo])
    }

    pub fn sv_dst(low: u16) -> MacAddress {
        let [hi, lo] = low.to_be_bytes();
        MacAddress([0x01, 0x0c, 0xcd, 0x04, hi, lo])
    }

    pub fn is_multicast(&self) -> bool {
        self.0[0] & 0x01 != 0
    }
}

impl fmt::Display for MacAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = &self.0;
        write!(
            f,
            "{:02x}:{:02x}:{:02x}:{:02x}:{:02x}:{:02x}",
            m[0], m[1], m[2], m[3], m[4], m[5]
        )
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid MAC address {0:?}: expected six colon-separated hex octets")]
pub struct MacParseError(String);

impl FromStr for MacAddress {
    type Err = MacParseError;

    fn from_str(s: &str) -> Result<MacAddress, MacParseError> {
        let mut out = [0u8; 6];
        let mut parts = s.split(':');
        for slot in &mut out {
            let part = parts.next().ok_or_else(|| MacParseError(s.to_owned()))?;
            if part.len() != 2 {
                return Err(MacParseError(s.to_owned()));
            }
            *slot = u8::from_str_radix(part, 16).map_err(|_| MacParseError(s.to_owned()))?;
        }
        if parts.next().is_some() {
            return Err(MacParseError(s.to_owned()));
        }
        Ok(MacAddress(out))
    }
}

impl Serialize for MacAddress {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for MacAddress {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<MacAddress, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Ethernet + session header fields common to both protocols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameHeader {
    pub dst: MacAddress,
    pub src: MacAddress,
    pub ethertype: u16,
    pub appid: u16,
}

/// Result of decoding a frame. Frames with an EtherType outside the two
/// protocols are carried opaquely; the fabric still switches them.
#[derive(Debug, Clone, PartialEq)]
pub enum Decoded {
    Goose { header: FrameHeader, apdu: GooseApdu },
    Sv { header: FrameHeader, apdu: SvApdu },
    Opaque { dst: MacAddress, src: MacAddress, ethertype: u16 },
}

impl Decoded {
    pub fn ethertype(&self) -> u16 {
        match self {
            Decoded::Goose { header, .. } | Decoded::Sv { header, .. } => header.ethertype,
            Decoded::Opaque { ethertype, .. } => *ethertype,
        }
    }

    pub fn src(&self) -> MacAddress {
        match self {
            Decoded::Goose { header, .. } | Decoded::Sv { header, .. } => header.src,
            Decoded::Opaque { src, .. } => *src,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EncodeError {
    #[error("visible string {text:?} is {len} bytes; the wire format caps it at 65")]
    TextTooLong { text: String, len: usize },
}

/// What went wrong while decoding, independent of where.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecodeErrorKind {
    Truncated,
    IndefiniteLength,
    LengthTooLong,
    TrailingBytes,
    UnexpectedTag { expected: u8, found: u8 },
    BadInteger,
    BadString,
    BadBoolean,
    BadTimestamp,
    BadSmpSynch,
    BadFixedWidth { field: &'static str, expected: usize, found: usize },
    EntryCountMismatch { declared: u32, actual: usize },
    UnsupportedAsduCount { count: u64 },
    FrameTooShort { len: usize },
    BadLengthField { declared: usize, available: usize },
}

impl fmt::Display for DecodeErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use DecodeErrorKind::*;
        match self {
            Truncated => write!(f, "value extends past the end of the buffer"),
            IndefiniteLength => write!(f, "indefinite-length encoding is not supported"),
            LengthTooLong => write!(f, "length field wider than four bytes"),
            TrailingBytes => write!(f, "unconsumed bytes after the last field"),
            UnexpectedTag { expected, found } => {
                write!(f, "expected tag 0x{expected:02x}, found 0x{found:02x}")
            }
            BadInteger => write!(f, "integer content is empty or too wide"),
            BadString => write!(f, "string content is not valid UTF-8"),
            BadBoolean => write!(f, "boolean content is not a single byte"),
            BadTimestamp => write!(f, "timestamp content is not eight bytes"),
            BadSmpSynch => write!(f, "smpSynch is not 0, 1 or 2"),
            BadFixedWidth { field, expected, found } => {
                write!(f, "{field} must be {expected} bytes, found {found}")
            }
            EntryCountMismatch { declared, actual } => write!(
                f,
                "numDatSetEntries declares {declared} members but allData holds {actual}"
            ),
            UnsupportedAsduCount { count } => {
                write!(f, "frame declares {count} ASDUs; only 1 is supported")
            }
            FrameTooShort { len } => {
                write!(f, "frame is {len} bytes; minimum is 22")
            }
            BadLengthField { declared, available } => write!(
                f,
                "session length field declares {declared} bytes but {available} are available"
            ),
        }
    }
}

/// A decode failure at a specific byte offset within the frame.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("decode error at offset {offset}: {kind}")]
pub struct DecodeError {
    pub offset: usize,
    pub kind: DecodeErrorKind,
}

/// Builds a complete frame: Ethernet header, session header, APDU.
pub fn encode_frame(header: &FrameHeader, apdu: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(APDU_OFFSET + apdu.len());
    out.extend_from_slice(&header.dst.0);
    out.extend_from_slice(&header.src.0);
    out.extend_from_slice(&header.ethertype.to_be_bytes());
    out.extend_from_slice(&header.appid.to_be_bytes());
    // Session Length counts itself and the reserved words plus the APDU.
    out.extend_from_slice(&((8 + apdu.len()) as u16).to_be_bytes());
    out.extend_from_slice(&[0, 0, 0, 0]); // Reserved 1, Reserved 2
    out.extend_from_slice(apdu);
    out
}

pub fn encode_goose_frame(header: &FrameHeader, apdu: &GooseApdu) -> Result<Vec<u8>, EncodeError> {
    Ok(encode_frame(header, &apdu.encode()?))
}

pub fn encode_sv_frame(header: &FrameHeader, apdu: &SvApdu) -> Result<Vec<u8>, EncodeError> {
    Ok(encode_frame(header, &apdu.encode()?))
}

/// Decodes a frame. Total over arbitrary input: returns `Opaque` for foreign
/// EtherTypes and a [`DecodeError`] for malformed protocol frames.
pub fn decode_frame(buf: &[u8]) -> Result<Decoded, DecodeError> {
    if buf.len() < 14 {
        return Err(DecodeError {
            offset: 0,
            kind: DecodeErrorKind::FrameTooShort { len: buf.len() },
        });
    }
    let dst = MacAddress([buf[0], buf[1], buf[2], buf[3], buf[4], buf[5]]);
    let src = MacAddress([buf[6], buf[7], buf[8], buf[9], buf[10], buf[11]]);
    let ethertype = u16::from_be_bytes([buf[12], buf[13]]);

    if ethertype != ETHERTYPE_GOOSE && ethertype != ETHERTYPE_SV {
        return Ok(Decoded::Opaque { dst, src, ethertype });
    }

    if buf.len() < APDU_OFFSET {
        return Err(DecodeError {
            offset: 0,
            kind: DecodeErrorKind::FrameTooShort { len: buf.len() },
        });
    }
    let appid = u16::from_be_bytes([buf[14], buf[15]]);
    let length = u16::from_be_bytes([buf[16], buf[17]]) as usize;
    // Length counts everything from APPID onward; the APDU is what follows
    // the four header words. Trailing padding beyond it is tolerated.
    let apdu_len = length.checked_sub(8).ok_or(DecodeError {
        offset: 16,
        kind: DecodeErrorKind::BadLengthField {
            declared: length,
            available: buf.len() - 14,
        },
    })?;
    let apdu_end = APDU_OFFSET + apdu_len;
    if apdu_end > buf.len() {
        return Err(DecodeError {
            offset: 16,
            kind: DecodeErrorKind::BadLengthField {
                declared: length,
                available: buf.len() - 14,
            },
        });
    }

    let header = FrameHeader { dst, src, ethertype, appid };
    if ethertype == ETHERTYPE_GOOSE {
        let apdu = GooseApdu::decode(buf, APDU_OFFSET, apdu_end)?;
        Ok(Decoded::Goose { header, apdu })
    } else {
        let apdu = SvApdu::decode(buf, APDU_OFFSET, apdu_end)?;
        Ok(Decoded::Sv { header, apdu })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mac_parse_and_display() {
        let mac: MacAddress = "01:0c:cd:01:00:2a".parse().unwrap();
        assert_eq!(mac, MacAddress::goose_dst(0x2a));
        assert_eq!(mac.to_string(), "01:0c:cd:01:00:2a");
        assert!(mac.is_multicast());
        assert!("01:0c:cd".parse::<MacAddress>().is_err());
        assert!("01:0c:cd:01:00:2a:ff".parse::<MacAddress>().is_err());
        assert!("01:0c:cd:01:00:zz".parse::<MacAddress>().is_err());
    }

    #[test]
    fn opaque_ethertype_passes_through() {
        let mut frame = vec![0xff; 14];
        frame[12] = 0x08;
        frame[13] = 0x00; // IPv4
        match decode_frame(&frame).unwrap() {
            Decoded::Opaque { ethertype, .. } => assert_eq!(ethertype, 0x0800),
            other => panic!("expected opaque, got {other:?}"),
        }
    }

    #[test]
    fn length_field_truncation_reports_offset_16() {
        let apdu = GooseApdu {
            gocb_ref: "a".into(),
            time_allowed_to_live_ms: 1000,
            dat_set: "b".into(),
            go_id: "c".into(),
            t: UtcTime::from_ns(0),
            st_num: 1,
            sq_num: 0,
            test: false,
            conf_rev: 1,
            nds_com: false,
            all_data: vec![true],
        };
        let header = FrameHeader {
            dst: MacAddress::goose_dst(1),
            src: MacAddress([2; 6]),
            ethertype: ETHERTYPE_GOOSE,
            appid: 0x3001,
        };
        let mut frame = encode_goose_frame(&header, &apdu).unwrap();
        // Declare more payload than the frame holds.
        let declared = (frame.len() - 14 + 40) as u16;
        frame[16..18].copy_from_slice(&declared.to_be_bytes());
        let err = decode_frame(&frame).unwrap_err();
        assert_eq!(err.offset, 16);
        assert!(matches!(err.kind, DecodeErrorKind::BadLengthField { .. }));
    }

    #[test]
    fn trailing_padding_tolerated() {
        let apdu = SvApdu {
            sv_id: "MU01_S1".into(),
            smp_cnt: 0,
            conf_rev: 1,
            smp_synch: SmpSynch::Global,
            samples: [SvSample::good(0); SV_CHANNELS],
        };
        let header = FrameHeader {
            dst: MacAddress::sv_dst(1),
            src: MacAddress([3; 6]),
            ethertype: ETHERTYPE_SV,
            appid: 0x4001,
        };
        let mut frame = encode_sv_frame(&header, &apdu).unwrap();
        frame.extend_from_slice(&[0; 6]); // pad as if to a minimum frame size
        let decoded = decode_frame(&frame).unwrap();
        assert!(matches!(decoded, Decoded::Sv { .. }));
    }
}
