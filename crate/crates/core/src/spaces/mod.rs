//! Membership criteria for the pointwise spaces `T^σ_{p,q}(x₀)` and the
//! global oscillation and Besov norms.

pub mod local;
pub mod norms;
pub mod verdict;
pub mod wavelet_criteria;

pub use local::{
    best_polynomial, difference_sup, direct_membership, finite_difference_norms, log_corrected_criterion, log_weight,
    unique_polynomial, LocalPolynomial, UniquePolynomial,
};
pub use norms::{besov_norm, besov_scale_terms, oscillation_norm, oscillation_scale_terms};
pub use verdict::{lq_verdict, Decision, Interpretation, MembershipVerdict, RegularitySequence, SurrogateConfig};
pub use wavelet_criteria::{leader_criterion, leader_sequence, xu_check, xu_sequence};
