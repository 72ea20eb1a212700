//! p-adic arithmetic, q-analogues, Volkenborn-type integrals and the p-adic
//! q-log-gamma functions built on them.

pub mod audit;
pub mod error;
pub mod euler;
pub mod loggamma;
pub mod padic;
pub mod qanalog;
pub mod volkenborn;

pub use error::{Error, Result};
pub use padic::{PadicContext, PadicNumber};
pub use qanalog::{q_make, QParam};
