//! Two-sided matching markets with strict preferences: one-to-one (marriage)
//! and many-to-one (college admissions) forms.
//!
//! The crate provides the market data model, stability predicates, batch-round
//! deferred acceptance, preference-cycle extraction and the join/meet lattice
//! operations built on it, an exhaustive enumeration oracle for desk-scale
//! instances, executable theorem checks, and the Boston (immediate-acceptance)
//! mechanism with its tier-economy construction.
//!
//! The crate is `no_std` (with `alloc`); IO, file formats, and the CLI live in
//! the companion `prefcycles-cli` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod boston;
pub mod cycles;
pub mod da;
pub mod model;
pub mod oracle;
pub mod stability;
pub mod theorems;

pub use model::{
    AgentId, ManyToOneInstance, ManyToOneMatching, MarketInstance, MarketMatching, MatchingError,
    ModelError, OneToOneInstance, OneToOneMatching, PreferenceList, Preferences, Side, Violation,
};
