//! Level crossing rate (LCR) and average fade duration (AFD) of the output
//! SNR of switched-diversity combiners, from the univariate and bivariate
//! CDFs of the sampled process, with a Monte Carlo simulator as an
//! independent check.

pub mod error;
pub mod fading;
pub mod hos;
pub mod mcsim;
pub mod combiner;
pub mod quad;
pub mod relay;
pub mod specfun;

pub use error::{Error, Result};
