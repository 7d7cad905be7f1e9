//! A virtual SDN switch: a port set plus a flow table, with the frame
//! disposition logic (which egress ports receive a copy).

use std::collections::BTreeSet;

use super::flow::{Action, FlowError, FlowMatch, FlowRule, FlowTable, FrameMeta};

#[derive(Debug, Clone)]
pub struct Port {
    pub index: u16,
    pub enabled: bool,
    /// Mirror-only ports (IDS taps) never receive flooded traffic; they only
    /// see frames via explicit mirror/forward actions.
    pub mirror_only: bool,
    /// Attached host id, if any (informational; used for topology checks).
    pub attached: Option<String>,
}

/// Outcome of running one frame through a switch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Disposition {
    /// Cookie of the rule that fired; `None` means the default action.
    pub fired: Option<u64>,
    /// Ports that emit a copy, deduplicated and in index order.
    pub egress: BTreeSet<u16>,
}

#[derive(Debug)]
pub struct Switch {
    pub name: String,
    ports: Vec<Port>,
    table: FlowTable,
}

impl Switch {
    pub fn new(name: impl Into<String>) -> Switch {
        Switch {
            name: name.into(),
            ports: Vec::new(),
            table: FlowTable::default(),
        }
    }

    pub fn add_port(&mut self, port: Port) {
        debug_assert!(self.port(port.index).is_none(), "duplicate port index");
        self.ports.push(port);
        self.ports.sort_by_key(|p| p.index);
    }

    pub fn ports(&self) -> &[Port] {
        &self.ports
    }

    pub fn port(&self, index: u16) -> Option<&Port> {
        self.ports.iter().find(|p| p.index == index)
    }

    pub fn table(&self) -> &FlowTable {
        &self.table
    }

    pub fn is_enabled(&self, index: u16) -> bool {
        self.port(index).is_some_and(|p| p.enabled)
    }

    /// Sets a port's admin state. Returns whether the state actually changed
    /// (callers log idempotent repeats differently).
    pub fn set_port_enabled(&mut self, index: u16, enabled: bool) -> Option<bool> {
        let port = self.ports.iter_mut().find(|p| p.index == index)?;
        let changed = port.enabled != enabled;
        port.enabled = enabled;
        Some(changed)
    }

    pub fn install_rule(&mut self, rule: FlowRule) -> Result<(), FlowError> {
        for port in rule_ports(&rule) {
            if self.port(port).is_none() {
                return Err(FlowError::UnknownPort {
                    cookie: rule.cookie,
                    port,
                });
            }
        }
        self.table.install(rule)
    }

    pub fn remove_rule(&mut self, cookie: u64) -> bool {
        self.table.remove(cookie)
    }

    /// All enabled, non-mirror ports except the ingress: the default flood
    /// set for multicast substation traffic.
    fn flood_set(&self, ingress: u16) -> BTreeSet<u16> {
        self.ports
            .iter()
            .filter(|p| p.enabled && !p.mirror_only && p.index != ingress)
            .map(|p| p.index)
            .collect()
    }

    fn resolve(&self, ingress: u16, action: &Action) -> BTreeSet<u16> {
        match action {
            Action::Flood => self.flood_set(ingress),
            Action::Drop => BTreeSet::new(),
            Action::Forward(ports) => ports
                .iter()
                .copied()
                .filter(|&p| self.is_enabled(p) && p != ingress)
                .collect(),
            Action::Mirror { port, primary } => {
                let mut set = self.resolve(ingress, primary);
                if self.is_enabled(*port) && *port != ingress {
                    set.insert(*port);
                }
                set
            }
        }
    }

    /// Runs the flow table over one frame. Returns `None` when the ingress
    /// port is missing or administratively down (the frame never enters).
    pub fn dispose(&self, ingress: u16, meta: &FrameMeta) -> Option<Disposition> {
        if !self.is_enabled(ingress) {
            return None;
        }
        match self.table.lookup(ingress, meta) {
            Some(rule) => Some(Disposition {
                fired: Some(rule.cookie),
                egress: self.resolve(ingress, &rule.action),
            }),
            None => Some(Disposition {
                fired: None,
                egress: self.flood_set(ingress),
            }),
        }
    }
}

fn rule_ports(rule: &FlowRule) -> Vec<u16> {
    fn action_ports(action: &Action, out: &mut Vec<u16>) {
        match action {
            Action::Forward(ports) => out.extend(ports.iter().copied()),
            Action::Mirror { port, primary } => {
                out.push(*port);
                action_ports(primary, out);
            }
            Action::Flood | Action::Drop => {}
        }
    }
    let mut out = Vec::new();
    if let Some(p) = rule.matches.ingress_port {
        out.push(p);
    }
    action_ports(&rule.action, &mut out);
    out
}
