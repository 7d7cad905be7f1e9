//! Shared helpers for integration tests.
//!
//! `tlv` is a deliberately independent BER-TLV walker: it knows nothing about
//! the codec's typed encoders and parses raw tag/length/value structure only,
//! so byte-level expectations can be checked against it rather than against
//! the code under test.

#![allow(dead_code)]

/// One parsed TLV node: raw tag byte, absolute offsets of its value range,
/// and child nodes when the tag is constructed.
#[derive(Debug, Clone)]
pub struct TlvNode {
    pub tag: u8,
    pub value_start: usize,
    pub value_end: usize,
    pub children: Vec<TlvNode>,
}

impl TlvNode {
    pub fn value<'a>(&self, buf: &'a [u8]) -> &'a [u8] {
        &buf[self.value_start..self.value_end]
    }

    /// Raw bytes of the whole node (tag + length + value).
    pub fn raw<'a>(&self, buf: &'a [u8], header_start: usize) -> &'a [u8] {
        &buf[header_start..self.value_end]
    }
}

pub mod tlv {
    use super::TlvNode;

    /// Parses a flat sequence of TLVs covering `buf[start..end]` exactly.
    /// Constructed tags (bit 5 set) are recursed into.
    pub fn parse_all(buf: &[u8], start: usize, end: usize) -> Result<Vec<TlvNode>, String> {
        let mut nodes = Vec::new();
        let mut pos = start;
        while pos < end {
            let (node, next) = parse_one(buf, pos, end)?;
            nodes.push(node);
            pos = next;
        }
        if pos != end {
            return Err(format!("TLV sequence overran: pos {pos} != end {end}"));
        }
        Ok(nodes)
    }

    fn parse_one(buf: &[u8], at: usize, end: usize) -> Result<(TlvNode, usize), String> {
        if at >= end {
            return Err(format!("no tag byte at {at}"));
        }
        let tag = buf[at];
        let mut pos = at + 1;
        if pos >= end {
            return Err(format!("no length byte at {pos}"));
        }
        let first = buf[pos];
        pos += 1;
        let len = if first < 0x80 {
            first as usize
        } else {
            let n = (first & 0x7f) as usize;
            if n == 0 || n > 4 {
                return Err(format!("unsupported length form 0x{first:02x} at {}", pos - 1));
            }
            if pos + n > end {
                return Err(format!("length bytes truncated at {pos}"));
            }
            let mut v = 0usize;
            for _ in 0..n {
                v = (v << 8) | buf[pos] as usize;
                pos += 1;
            }
            v
        };
        let value_start = pos;
        let value_end = pos + len;
        if value_end > end {
            return Err(format!("value of tag 0x{tag:02x} overruns at {value_start}"));
        }
        let constructed = tag & 0x20 != 0;
        let children = if constructed {
            parse_all(buf, value_start, value_end)?
        } else {
            Vec::new()
        };
        Ok((
            TlvNode {
                tag,
                value_start,
                value_end,
                children,
            },
            value_end,
        ))
    }

    /// Follows a path of tags from a node list, taking the first match at
    /// each level.
    pub fn find<'a>(nodes: &'a [TlvNode], path: &[u8]) -> Option<&'a TlvNode> {
        let (head, rest) = path.split_first()?;
        let node = nodes.iter().find(|n| n.tag == *head)?;
        if rest.is_empty() {
            Some(node)
        } else {
            find(&node.children, rest)
        }
    }
}

/// Splits an IEC 61850 session frame into its fixed parts:
/// (dst, src, ethertype, appid, length-field, apdu bytes region start).
pub struct FrameParts {
    pub dst: [u8; 6],
    pub src: [u8; 6],
    pub ethertype: u16,
    pub appid: u16,
    pub length_field: u16,
    pub apdu_start: usize,
    pub apdu_end: usize,
}

pub fn split_frame(buf: &[u8]) -> Result<FrameParts, String> {
    if buf.len() < 22 {
        return Err(format!("frame too short: {}", buf.len()));
    }
    let mut dst = [0u8; 6];
    let mut src = [0u8; 6];
    dst.copy_from_slice(&buf[0..6]);
    src.copy_from_slice(&buf[6..12]);
    let ethertype = u16::from_be_bytes([buf[12], buf[13]]);
    let appid = u16::from_be_bytes([buf[14], buf[15]]);
    let length_field = u16::from_be_bytes([buf[16], buf[17]]);
    let apdu_start = 22;
    let apdu_end = 14 + length_field as usize;
    if apdu_end > buf.len() || apdu_end < apdu_start {
        return Err(format!("length field {length_field} inconsistent with buffer"));
    }
    Ok(FrameParts {
        dst,
        src,
        ethertype,
        appid,
        length_field,
        apdu_start,
        apdu_end,
    })
}
