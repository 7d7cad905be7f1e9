//! The virtual network: switches with flow tables, ports, inter-switch
//! links, the discrete-event scheduler, and pcap capture output.

pub mod flow;
pub mod pcap;
pub mod sched;
mod switch;

pub use flow::{Action, FlowError, FlowMatch, FlowRule, FrameMeta};
pub use switch::{Disposition, Port, Switch};

/// A (switch index, port index) pair. Switch indices are positions in the
/// network's switch list; names are resolved once at build time.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize,
)]
pub struct PortRef {
    pub switch: usize,
    pub port: u16,
}

/// The two-switch (or N-switch) fabric plus its trunk links.
#[derive(Debug, Default)]
pub struct Network {
    switches: Vec<Switch>,
    /// Bidirectional trunk links between switch ports.
    links: Vec<(PortRef, PortRef)>,
}

impl Network {
    pub fn add_switch(&mut self, switch: Switch) -> usize {
        self.switches.push(switch);
        self.switches.len() - 1
    }

    pub fn add_link(&mut self, a: PortRef, b: PortRef) {
        self.links.push((a, b));
    }

    pub fn switches(&self) -> &[Switch] {
        &self.switches
    }

    pub fn switch(&self, idx: usize) -> &Switch {
        &self.switches[idx]
    }

    pub fn switch_mut(&mut self, idx: usize) -> &mut Switch {
        &mut self.switches[idx]
    }

    pub fn switch_index(&self, name: &str) -> Option<usize> {
        self.switches.iter().position(|s| s.name == name)
    }

    /// The far end of a trunk link, if this port is one.
    pub fn peer(&self, port: PortRef) -> Option<PortRef> {
        for &(a, b) in &self.links {
            if a == port {
                return Some(b);
            }
            if b == port {
                return Some(a);
            }
        }
        None
    }

    /// Formats a port as `switchname.port` for logs.
    pub fn port_name(&self, port: PortRef) -> String {
        format!("{}.{}", self.switches[port.switch].name, port.port)
    }
}
