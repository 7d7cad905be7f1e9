//! Flow rules and the per-switch flow table.
//!
//! Matching is OpenFlow-shaped but abstract: a rule matches on any subset of
//! {ingress port, src MAC, dst MAC, EtherType, APPID}, and exactly one rule
//! fires per frame — highest priority wins, ties broken by lowest cookie.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::MacAddress;

/// Header fields a switch matches on, extracted once per frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameMeta {
    pub dst: MacAddress,
    pub src: MacAddress,
    pub ethertype: u16,
    /// Session-layer APPID; only present for the two 61850 EtherTypes.
    pub appid: Option<u16>,
}

impl FrameMeta {
    pub fn from_bytes(frame: &[u8]) -> FrameMeta {
        let mut dst = [0u8; 6];
        let mut src = [0u8; 6];
        let n = frame.len();
        dst[..n.min(6)].copy_from_slice(&frame[..n.min(6)]);
        if n > 6 {
            src[..(n - 6).min(6)].copy_from_slice(&frame[6..n.min(12)]);
        }
        let ethertype = if n >= 14 {
            u16::from_be_bytes([frame[12], frame[13]])
        } else {
            0
        };
        let appid = if n >= 16
            && (ethertype == crate::codec::ETHERTYPE_GOOSE
                || ethertype == crate::codec::ETHERTYPE_SV)
        {
            Some(u16::from_be_bytes([frame[14], frame[15]]))
        } else {
            None
        };
        FrameMeta {
            dst: MacAddress(dst),
            src: MacAddress(src),
            ethertype,
            appid,
        }
    }
}

/// Match predicate: `None` fields are wildcards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlowMatch {
    pub ingress_port: Option<u16>,
    pub src_mac: Option<MacAddress>,
    pub dst_mac: Option<MacAddress>,
    pub ethertype: Option<u16>,
    pub appid: Option<u16>,
}

impl FlowMatch {
    pub fn matches(&self, ingress: u16, meta: &FrameMeta) -> bool {
        self.ingress_port.is_none_or(|p| p == ingress)
            && self.src_mac.is_none_or(|m| m == meta.src)
            && self.dst_mac.is_none_or(|m| m == meta.dst)
            && self.ethertype.is_none_or(|e| e == meta.ethertype)
            && self.appid.is_none_or(|a| Some(a) == meta.appid)
    }
}

/// What to do with a matched frame. `Mirror` copies the frame to one extra
/// port and then applies its primary action; the copy is byte-identical.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Forward(BTreeSet<u16>),
    Flood,
    Drop,
    Mirror { port: u16, primary: Box<Action> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowRule {
    pub cookie: u64,
    pub priority: u16,
    #[serde(rename = "match")]
    pub matches: FlowMatch,
    pub action: Action,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FlowError {
    #[error("cookie {0} is already installed")]
    DuplicateCookie(u64),
    #[error("rule {cookie} references port {port}, which does not exist on this switch")]
    UnknownPort { cookie: u64, port: u16 },
    #[error("rule {0}: a mirror action cannot nest another mirror")]
    NestedMirror(u64),
}

/// Priority-ordered rule list. Kept sorted by (priority desc, cookie asc) so
/// the first match is the winner.
#[derive(Debug, Clone, Default)]
pub struct FlowTable {
    rules: Vec<FlowRule>,
}

impl FlowTable {
    pub fn rules(&self) -> &[FlowRule] {
        &self.rules
    }

    pub fn install(&mut self, rule: FlowRule) -> Result<(), FlowError> {
        if self.rules.iter().any(|r| r.cookie == rule.cookie) {
            return Err(FlowError::DuplicateCookie(rule.cookie));
        }
        if let Action::Mirror { primary, .. } = &rule.action {
            if matches!(**primary, Action::Mirror { .. }) {
                return Err(FlowError::NestedMirror(rule.cookie));
            }
        }
        let key = (std::cmp::Reverse(rule.priority), rule.cookie);
        let at = self
            .rules
            .partition_point(|r| (std::cmp::Reverse(r.priority), r.cookie) < key);
        self.rules.insert(at, rule);
        Ok(())
    }

    /// Removes by cookie; false when the cookie was never installed.
    pub fn remove(&mut self, cookie: u64) -> bool {
        let before = self.rules.len();
        self.rules.retain(|r| r.cookie != cookie);
        self.rules.len() != before
    }

    /// The winning rule for a frame, or `None` meaning the default action
    /// (flood except ingress) applies.
    pub fn lookup(&self, ingress: u16, meta: &FrameMeta) -> Option<&FlowRule> {
        self.rules.iter().find(|r| r.matches.matches(ingress, meta))
    }
}
