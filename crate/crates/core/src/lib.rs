pub mod cli;
pub mod cusp;
pub mod error;
pub mod exactnum;
pub mod hlat;
pub mod latalg;
pub mod ledger;
pub mod qlat;
pub mod ramify;
pub mod slope;

pub use error::{Error, Result};
