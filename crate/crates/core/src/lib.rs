//! Exact zonal kernels and certified semidefinite-programming bounds for
//! spherical codes and kissing numbers.
//!
//! The pipeline has three stages:
//!
//! 1. Generate zonal matrices `Z_λ` whose entries are exact polynomials in
//!    the inner products between points on the sphere ([`zonal`], backed by
//!    [`glrep`], [`haar`], and [`symsys`]).
//! 2. Assemble the truncated two-point or four-point bound as a rational
//!    semidefinite program with sum-of-squares constraints ([`sdp`]) and
//!    solve it in arbitrary-precision floating point ([`solver`]).
//! 3. Round the solution to an exact rational certificate and verify it in
//!    rational and rigorous ball arithmetic ([`verify`]).
//!
//! Core numeric code is generic over the scalar type through the traits in
//! [`scalar`]; the concrete aliases below fix the types used throughout the
//! pipeline.

pub mod ball;
pub mod bigfloat;
pub mod glrep;
pub mod haar;
pub mod mat;
pub mod poly;
pub mod scalar;
pub mod sdp;
pub mod solver;
pub mod symsys;
pub mod verify;
pub mod zonal;

/// Arbitrary-precision rational, always reduced with positive denominator.
pub type Rational = rug::Rational;
/// Arbitrary-precision integer.
pub type Integer = rug::Integer;

/// Multivariate polynomial with exact rational coefficients.
pub type MultiPoly = poly::Poly<Rational>;
/// Dense matrix of exact rationals.
pub type RatMatrix = mat::Mat<Rational>;
/// Dense matrix of arbitrary-precision floats.
pub type FloatMatrix = mat::Mat<bigfloat::MpFloat>;
/// Dense matrix of midpoint-radius balls.
pub type BallMatrix = mat::Mat<ball::Ball>;

/// Parse a rational from `p/q` or plain integer text.
pub fn parse_rational(s: &str) -> Result<Rational, String> {
    let s = s.trim();
    let r: Rational = s
        .parse()
        .map_err(|e| format!("invalid rational {s:?}: {e}"))?;
    Ok(r)
}

/// Format a rational as `p/q`, or just `p` when the denominator is one.
pub fn format_rational(r: &Rational) -> String {
    r.to_string()
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::from((n, d))
}

pub fn rat_int(n: i64) -> Rational {
    Rational::from(n)
}
