//! Simpson's rule with a computed mean-value point for its error term.
//!
//! Beyond evaluating Simpson's rule, the crate locates the point `xi` in
//! `E = -f''''(xi) (b - a)^5 / 2880` for a concrete integrand and replays the
//! classic existence argument numerically: it builds the auxiliary function
//! that vanishes at five points of `[a, b]` and follows Rolle's theorem down
//! four derivative levels to a root of its fourth derivative.

pub mod certificate;
pub mod cli;
pub mod display;
pub mod expr;
pub mod poly;
pub mod proof_trace;
pub mod quadrature;
pub mod roots;
