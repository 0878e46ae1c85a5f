//! Exact arithmetic for monomial-type Abhyankar valuations of function fields.
//!
//! The crate models value groups as `Q^d` with the lexicographic order and
//! computes, entirely in exact rational arithmetic:
//!
//! - values of rational functions and of rational top differential forms at
//!   monomial, flag and composed valuations ([`valuation`], [`form`]);
//! - initial forms, residues into the residue field, and the splitting of a
//!   composed value into its outer and inner parts;
//! - generalized Poincaré residues of value-zero top forms and the classical
//!   order-of-vanishing oracle through birational charts;
//! - log discrepancies, log-canonical thresholds, discrepancy decompositions,
//!   klt/lc probing, and adjunction differents on log pairs ([`logpair`]);
//! - finite-support generalized Laurent series with exponents in `Q^d`,
//!   including truncated inversion and termwise differentiation ([`series`]).
//!
//! Only lexicographic `Q^d` is supported as the order model: every value group
//! realized here is finitely generated, and rank-one groups with irrational
//! independent generators are modeled by lex `Q^d` of the same rational rank.
//! This changes the order type but none of the formulas computed, which use
//! only group operations and comparisons between finitely many known elements.

pub mod expr;
pub mod form;
pub mod group;
pub mod logpair;
pub mod poly;
pub mod series;
pub mod valuation;

pub use group::{CompositionLayout, GroupElement, GroupError, OrderedGroupSpec};
pub use poly::{Monomial, PolyError, Polynomial, RationalFunction, VariableContext};
