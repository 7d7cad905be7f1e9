//! Deterministic simulator of an IEC 61850 digital substation under
//! cyber-attack.
//!
//! The crate models a two-switch substation network (process bus and station
//! bus) carrying real SV and GOOSE byte streams between a merging unit,
//! protective IEDs, a circuit breaker, and a concurrent IED (CIED) hot
//! standby. A rule-based IDS watches mirrored traffic; when it raises an
//! alert, the adaptive port controller evaluates a binary security decision
//! model and reconfigures the fabric: the compromised IED's ports are
//! disabled, the attacker is filtered, and the CIED takes over the lost
//! protection function.
//!
//! Everything runs on a single-threaded discrete-event scheduler with a
//! virtual clock, so a scenario file plus a seed fully determines every
//! event, log line, and pcap byte.
//!
//! See the `book/` directory for a guided tour; the chapters double as
//! doc-tests and stay in sync with this crate.

pub mod codec;
pub mod devices;
pub mod fabric;
pub mod pssa;
