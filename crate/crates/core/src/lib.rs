pub mod asymptotics;
pub mod checkers;
pub mod domains;
pub mod envelopes;
mod error;
pub mod funcdsl;
pub mod num;
pub mod qspan;
pub mod theorems;

pub use error::{Error, Result};
pub use num::Rational;
pub use qspan::{Basis, ExtReal, Interval, QspanError, RealElement};
