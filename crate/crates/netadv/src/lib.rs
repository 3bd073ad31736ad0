//! File formats, report rendering, the parallel attack runner and the
//! command implementations behind the `netadv` binary. Algorithms live in
//! [`netadv_core`].

pub mod commands;
pub mod error;
pub mod io;
pub mod render;
pub mod runner;

pub use error::{Error, Result};
pub use netadv_core;
