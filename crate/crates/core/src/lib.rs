//! Physics-informed neural solver for rate-dependent strain-gradient plasticity.

pub mod ad;
pub mod net;
pub mod physics1d;
pub mod physics2d;
pub mod problem;
pub mod train;
pub mod io;
pub mod oracle;
pub mod run;
