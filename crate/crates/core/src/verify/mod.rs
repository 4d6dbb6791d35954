//! Exact certification: rational rounding of solver output, affine
//! feasibility over the rationals, positive definiteness by rigorous ball
//! Cholesky, Sturm root analysis, and the configuration checks used by the
//! applications.

pub mod certificate;
pub mod chol;
pub mod d4;
pub mod round;
pub mod slack_chain;
pub mod sturm;

pub use certificate::{
    read_certificate, verify_certificate, write_certificate, CertBlock, ExactCertificate,
};
pub use chol::{ball_cholesky, exact_psd_check};
pub use d4::{d4_check, d4_gram, d4_roots, D4Report};
pub use round::round_certificate;
pub use slack_chain::code_slack_chain;
pub use sturm::{count_roots_closed, count_roots_half_open, sturm_analyze, SturmReport, UniPoly};

use thiserror::Error;

use crate::glrep::Signature;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("affine constraint {index} violated by {violation}")]
    AffineViolation { index: usize, violation: String },
    #[error("ball Cholesky inconclusive for block {block} at {prec} bits; raise precision")]
    PSDUncertified { block: String, prec: u32 },
    #[error("rounding margin too small: {0}")]
    MarginTooSmall(String),
    #[error("point set is not independent: {0}")]
    NotIndependent(String),
    #[error("zero polynomial")]
    ZeroPolynomial,
    #[error("bound chain violated: {0}")]
    ChainViolated(String),
    #[error("certificate shape mismatch: {0}")]
    Shape(String),
    #[error("missing zonal data for {lam}")]
    MissingZonal { lam: Signature },
    #[error(transparent)]
    Sdp(#[from] crate::sdp::SdpError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse: {0}")]
    Parse(String),
}
