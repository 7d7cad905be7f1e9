//! Minimal BER-TLV primitives: definite-length encodings only, with the
//! context-specific tags used by the GOOSE and SV session layers.

use super::{DecodeError, DecodeErrorKind};

/// Appends a length field in definite short or long form.
pub(crate) fn push_len(out: &mut Vec<u8>, len: usize) {
    if len < 0x80 {
        out.push(len as u8);
    } else if len <= 0xff {
        out.push(0x81);
        out.push(len as u8);
    } else if len <= 0xffff {
        out.push(0x82);
        out.extend_from_slice(&(len as u16).to_be_bytes());
    } else {
        // Frames this large never occur here; 3-byte lengths keep it total.
        out.push(0x83);
        out.push((len >> 16) as u8);
        out.push((len >> 8) as u8);
        out.push(len as u8);
    }
}

pub(crate) fn push_tlv(out: &mut Vec<u8>, tag: u8, value: &[u8]) {
    out.push(tag);
    push_len(out, value.len());
    out.extend_from_slice(value);
}

/// Minimal unsigned INTEGER content bytes: leading zeros stripped, one zero
/// byte prepended when the top bit would flip the sign.
pub(crate) fn push_unsigned(out: &mut Vec<u8>, tag: u8, value: u64) {
    let be = value.to_be_bytes();
    let mut start = 0;
    while start < be.len() - 1 && be[start] == 0 {
        start += 1;
    }
    out.push(tag);
    if be[start] & 0x80 != 0 {
        push_len(out, be.len() - start + 1);
        out.push(0x00);
    } else {
        push_len(out, be.len() - start);
    }
    out.extend_from_slice(&be[start..]);
}

pub(crate) fn push_bool(out: &mut Vec<u8>, tag: u8, value: bool) {
    push_tlv(out, tag, &[if value { 0x01 } else { 0x00 }]);
}

/// Cursor over a TLV region. Offsets are absolute within the original frame
/// so decode errors point at the offending byte.
pub(crate) struct BerReader<'a> {
    buf: &'a [u8],
    pos: usize,
    end: usize,
}

impl<'a> BerReader<'a> {
    pub(crate) fn new(buf: &'a [u8], start: usize, end: usize) -> Self {
        BerReader {
            buf,
            pos: start,
            end,
        }
    }

    pub(crate) fn pos(&self) -> usize {
        self.pos
    }

    pub(crate) fn at_end(&self) -> bool {
        self.pos >= self.end
    }

    fn err(&self, offset: usize, kind: DecodeErrorKind) -> DecodeError {
        DecodeError { offset, kind }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], DecodeError> {
        if self.pos + n > self.end {
            return Err(self.err(self.pos, DecodeErrorKind::Truncated));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    /// Reads one tag + length header, returning (tag, value length).
    pub(crate) fn read_header(&mut self) -> Result<(u8, usize), DecodeError> {
        let tag = self.take(1)?[0];
        let at = self.pos;
        let first = self.take(1)?[0];
        let len = if first < 0x80 {
            first as usize
        } else if first == 0x80 || first == 0xff {
            return Err(self.err(at, DecodeErrorKind::IndefiniteLength));
        } else {
            let n = (first & 0x7f) as usize;
            if n > 4 {
                return Err(self.err(at, DecodeErrorKind::LengthTooLong));
            }
            let mut v = 0usize;
            for b in self.take(n)? {
                v = (v << 8) | *b as usize;
            }
            v
        };
        Ok((tag, len))
    }

    /// Reads a full TLV, returning (tag, value slice).
    pub(crate) fn read_tlv(&mut self) -> Result<(u8, &'a [u8]), DecodeError> {
        let (tag, len) = self.read_header()?;
        let value = self.take(len)?;
        Ok((tag, value))
    }

    /// Reads a TLV and requires its tag.
    pub(crate) fn expect(&mut self, tag: u8) -> Result<&'a [u8], DecodeError> {
        let at = self.pos;
        let (got, value) = self.read_tlv()?;
        if got != tag {
            return Err(self.err(
                at,
                DecodeErrorKind::UnexpectedTag {
                    expected: tag,
                    found: got,
                },
            ));
        }
        Ok(value)
    }

    /// Reads a constructed TLV and returns a reader over its value region.
    pub(crate) fn expect_nested(&mut self, tag: u8) -> Result<BerReader<'a>, DecodeError> {
        let at = self.pos;
        let (got, len) = self.read_header()?;
        if got != tag {
            return Err(self.err(
                at,
                DecodeErrorKind::UnexpectedTag {
                    expected: tag,
                    found: got,
                },
            ));
        }
        let start = self.pos;
        if start + len > self.end {
            return Err(self.err(self.pos - 1, DecodeErrorKind::Truncated));
        }
        self.pos = start + len;
        Ok(BerReader::new(self.buf, start, start + len))
    }

    pub(crate) fn expect_end(&self) -> Result<(), DecodeError> {
        if self.pos != self.end {
            return Err(self.err(self.pos, DecodeErrorKind::TrailingBytes));
        }
        Ok(())
    }
}

/// Decodes a minimal unsigned INTEGER content into u64.
pub(crate) fn parse_unsigned(value: &[u8], at: usize) -> Result<u64, DecodeError> {
    if value.is_empty() || value.len() > 9 || (value.len() == 9 && value[0] != 0) {
        return Err(DecodeError {
            offset: at,
            kind: DecodeErrorKind::BadInteger,
        });
    }
    let mut v: u64 = 0;
    for b in value {
        v = (v << 8) | *b as u64;
    }
    Ok(v)
}

pub(crate) fn parse_u32(value: &[u8], at: usize) -> Result<u32, DecodeError> {
    let v = parse_unsigned(value, at)?;
    u32::try_from(v).map_err(|_| DecodeError {
        offset: at,
        kind: DecodeErrorKind::BadInteger,
    })
}

pub(crate) fn parse_string(value: &[u8], at: usize) -> Result<String, DecodeError> {
    std::str::from_utf8(value)
        .map(str::to_owned)
        .map_err(|_| DecodeError {
            offset: at,
            kind: DecodeErrorKind::BadString,
        })
}

pub(crate) fn parse_bool(value: &[u8], at: usize) -> Result<bool, DecodeError> {
    if value.len() != 1 {
        return Err(DecodeError {
            offset: at,
            kind: DecodeErrorKind::BadBoolean,
        });
    }
    Ok(value[0] != 0)
}
