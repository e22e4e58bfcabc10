//! Pointwise regularity analysis with generalized smoothness sequences:
//! admissible sequences, dyadic geometry, wavelet coefficients and p-leaders,
//! membership criteria and multifractal spectra.

pub mod admissible;
pub mod dyadic;
pub mod error;
pub mod index;
pub mod io;
pub mod leaders;
pub mod regression;
pub mod spaces;
pub mod spectrum;
pub mod synth;
pub mod wavelet;

pub use admissible::{AdmissibleFamily, AdmissibleSequence, BoydIndices, LogSequence, RatioFunction, SequenceModel};
pub use dyadic::{ConeSpec, DyadicCube};
pub use error::{Error, Result};
pub use index::Index;
pub use leaders::{leader_pyramid, LeaderPyramid};
pub use spaces::{Decision, MembershipVerdict, SurrogateConfig};
pub use spectrum::{Exponent, ExponentEstimate, SpectrumEstimate};
pub use synth::SaturatingSpec;
pub use wavelet::{decompose, reconstruct, CoefficientPyramid, Signal, WaveletFilter};
