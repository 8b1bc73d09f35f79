//! Protocol engine and rate analysis for erasure-tolerant codes distributed
//! across chips.

pub mod choice;
pub mod circuit;
pub mod cli;
pub mod codes;
pub mod config;
pub mod cre;
pub mod error;
pub mod frame;
pub mod gf2;
pub mod montecarlo;
pub mod pauli;
pub mod protocol;
pub mod rates;
pub mod tableau;
pub mod timing;

pub use error::{Error, Result};
