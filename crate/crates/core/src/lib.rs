//! Guarded Petri nets: nets whose tokens carry colors and whose transitions
//! act on colors through partial functions or spans.
//!
//! The crate covers plain nets and process terms ([`net`], [`term`]), guard
//! data and its evaluation ([`guard`], [`semantics`]), the construction of an
//! ordinary net from a guarded one ([`internalize`]), bounded reachability
//! ([`reach`]), morphisms and gluing operations ([`transform`]), net
//! isomorphism ([`iso`]) and the bundle file format ([`bundle`]).

pub mod bundle;
pub mod error;
pub mod fixtures;
pub mod guard;
pub mod internalize;
pub mod iso;
pub mod multiset;
pub mod net;
pub mod random;
pub mod reach;
pub mod semantics;
pub mod suite;
pub mod term;
pub mod transform;

pub use bundle::{Bundle, NamedMarking};
pub use error::{Diagnostic, Error, Result};
pub use guard::{Guard, GuardedNet, PartialGuard, SpanEntry, SpanGuard};
pub use internalize::{internalize, ColoredMarking, Internalized, Projection};
pub use iso::{net_isomorphic, NetIsomorphism};
pub use multiset::Multiset;
pub use net::{FiringSequence, Marking, Net, Transition};
pub use reach::{reach_colored, reach_plain, ReachOutcome, ReachQuery, Run};
pub use term::{ProcessTerm, Word};
pub use transform::{NetFunctor, QuotientResult};
