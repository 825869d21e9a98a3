//! Files, benchmarks, the HTTP service and the command line around
//! [`pgipro_core`].

pub mod brute;
pub mod clock;
pub mod experiments;
pub mod fixture;
pub mod io;
pub mod service;

pub use pgipro_core as core;
