//! Finite-support generalized Laurent series with exponents in lex `Q^d`.
//!
//! The supports stored here are finite, hence trivially well ordered.  Lex
//! `Q^d` admits no global positive grading for `d > 1`, so honest infinite
//! completeness is impossible; anything incomplete — every result of
//! [`GenSeries::invert`], and whatever is computed from one — carries an
//! explicit [`TruncationMarker`].  Arithmetic on unmarked series is exact.
//!
//! Iterated substitution of series into series is deliberately absent: there
//! is no order function on lex `Q^d` that would make the coefficients of an
//! iterated series finite sums.

use std::collections::BTreeMap;
use std::fmt;

use num::{BigRational, One, Zero};
use thiserror::Error;

use crate::group::{CompositionLayout, GroupElement, GroupError, OrderedGroupSpec};
use crate::poly::Polynomial;

/// Errors raised by series operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("series live in groups of different dimension")]
    GroupMismatch,
    #[error("the zero series has no value")]
    ZeroSeries,
    #[error("frame dimension {frame} does not match group dimension {group}")]
    FrameMismatch { frame: usize, group: usize },
    #[error("series has a support point with negative front part: {0}")]
    NotInValuationRing(GroupElement),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// Records that a series is an explicit truncation of an infinite expansion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncationMarker {
    /// Term budget of the inversion that produced the truncation.
    pub max_terms: usize,
    /// Exponent cutoff, when one was given.
    pub cutoff: Option<GroupElement>,
}

impl TruncationMarker {
    /// Joins incompleteness information from two operands.
    fn join(a: Option<&TruncationMarker>, b: Option<&TruncationMarker>) -> Option<TruncationMarker> {
        match (a, b) {
            (None, None) => None,
            (Some(m), None) | (None, Some(m)) => Some(m.clone()),
            (Some(m), Some(n)) => Some(TruncationMarker {
                max_terms: m.max_terms.min(n.max_terms),
                cutoff: match (&m.cutoff, &n.cutoff) {
                    (Some(x), Some(y)) => Some(x.clone().min(y.clone())),
                    (Some(x), None) | (None, Some(x)) => Some(x.clone()),
                    (None, None) => None,
                },
            }),
        }
    }
}

/// Names for the coordinate series variables `z_i = z^(e_i)` of a fixed
/// identification of the value group with `Q^d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeriesFrame {
    names: Vec<String>,
}

impl SeriesFrame {
    pub fn new<S: Into<String>>(names: Vec<S>) -> Self {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        assert!(!names.is_empty(), "a frame needs at least one name");
        for (i, n) in names.iter().enumerate() {
            assert!(!names[..i].contains(n), "duplicate frame name {n:?}");
        }
        SeriesFrame { names }
    }

    pub fn dimension(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

/// A generalized Laurent series with finite support.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenSeries {
    group: OrderedGroupSpec,
    terms: BTreeMap<GroupElement, BigRational>,
    marker: Option<TruncationMarker>,
}

impl GenSeries {
    pub fn zero(group: OrderedGroupSpec) -> Self {
        GenSeries {
            group,
            terms: BTreeMap::new(),
            marker: None,
        }
    }

    pub fn one(group: OrderedGroupSpec) -> Self {
        GenSeries::monomial(group, group.zero(), BigRational::one())
    }

    pub fn monomial(group: OrderedGroupSpec, exponent: GroupElement, coeff: BigRational) -> Self {
        assert_eq!(exponent.dimension(), group.dimension());
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(exponent, coeff);
        }
        GenSeries {
            group,
            terms,
            marker: None,
        }
    }

    /// Builds a series from `(exponent, coefficient)` pairs; colliding
    /// exponents sum, zero sums are dropped.
    pub fn from_terms<I>(group: OrderedGroupSpec, iter: I) -> Result<Self, SeriesError>
    where
        I: IntoIterator<Item = (GroupElement, BigRational)>,
    {
        let mut s = GenSeries::zero(group);
        for (e, c) in iter {
            if e.dimension() != group.dimension() {
                return Err(SeriesError::Group(GroupError::DimensionMismatch {
                    expected: group.dimension(),
                    got: e.dimension(),
                }));
            }
            s.add_term(e, c);
        }
        Ok(s)
    }

    /// Transports a polynomial into the series field: the term `c x^q` lands
    /// at exponent `sum_j q_j w(x_j)`.  Distinct monomials with colliding
    /// exponents sum.
    pub fn from_poly(
        p: &Polynomial,
        weights: &[GroupElement],
        group: OrderedGroupSpec,
    ) -> Result<Self, SeriesError> {
        assert_eq!(p.context().len(), weights.len());
        let mut s = GenSeries::zero(group);
        for (m, c) in p.terms() {
            let mut e = group.zero();
            for (v, q) in m.exponents() {
                e = e.add(&weights[*v].scale(q))?;
            }
            s.add_term(e, c.clone());
        }
        Ok(s)
    }

    fn add_term(&mut self, e: GroupElement, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(e.clone()).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn group(&self) -> &OrderedGroupSpec {
        &self.group
    }

    pub fn terms(&self) -> &BTreeMap<GroupElement, BigRational> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `Some` when this series is an explicit truncation.
    pub fn marker(&self) -> Option<&TruncationMarker> {
        self.marker.as_ref()
    }

    pub fn is_exact(&self) -> bool {
        self.marker.is_none()
    }

    fn check_group(&self, other: &GenSeries) -> Result<(), SeriesError> {
        if self.group != other.group {
            return Err(SeriesError::GroupMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &GenSeries) -> Result<GenSeries, SeriesError> {
        self.check_group(other)?;
        let mut out = self.clone();
        out.marker = TruncationMarker::join(self.marker.as_ref(), other.marker.as_ref());
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> GenSeries {
        GenSeries {
            group: self.group,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
            marker: self.marker.clone(),
        }
    }

    pub fn sub(&self, other: &GenSeries) -> Result<GenSeries, SeriesError> {
        self.add(&other.neg())
    }

    pub fn scale(&self, q: &BigRational) -> GenSeries {
        if q.is_zero() {
            let mut out = GenSeries::zero(self.group);
            out.marker = self.marker.clone();
            return out;
        }
        GenSeries {
            group: self.group,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c * q)).collect(),
            marker: self.marker.clone(),
        }
    }

    /// Exact convolution of the finite supports.
    pub fn mul(&self, other: &GenSeries) -> Result<GenSeries, SeriesError> {
        self.check_group(other)?;
        let mut out = GenSeries::zero(self.group);
        out.marker = TruncationMarker::join(self.marker.as_ref(), other.marker.as_ref());
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                out.add_term(ea.add(eb)?, ca * cb);
            }
        }
        Ok(out)
    }

    /// `v(f) = min of the support` under lex order.
    pub fn value(&self) -> Result<GroupElement, SeriesError> {
        self.terms
            .keys()
            .next()
            .cloned()
            .ok_or(SeriesError::ZeroSeries)
    }

    /// Leading `(exponent, coefficient)` pair.
    pub fn leading(&self) -> Result<(&GroupElement, &BigRational), SeriesError> {
        self.terms
            .iter()
            .next()
            .ok_or(SeriesError::ZeroSeries)
    }

    /// Truncated inverse by greedy long division.
    ///
    /// Terms of the inverse come out in strictly increasing exponent order.
    /// Emission stops when the residual vanishes (exact result, no marker),
    /// when `max_terms` terms have been produced, or when the next exponent
    /// would exceed `cutoff`.  On every emitted prefix `r` the product
    /// `self * r` agrees with `1` strictly below `omitted + v(self)`, where
    /// `omitted` is the exponent of the first term not emitted.
    pub fn invert(
        &self,
        max_terms: usize,
        cutoff: Option<&GroupElement>,
    ) -> Result<GenSeries, SeriesError> {
        let (_, lead_coeff) = self.leading()?;
        let lead_coeff = lead_coeff.clone();
        let lead_exp = self.value()?;
        let mut result = GenSeries::zero(self.group);
        // residual = 1 - self * result, maintained incrementally
        let mut residual = GenSeries::one(self.group);
        let mut emitted = 0usize;
        while !residual.is_zero() && emitted < max_terms {
            let (res_exp, res_coeff) = residual.leading()?;
            let exp = res_exp.sub(&lead_exp)?;
            if let Some(bound) = cutoff {
                if exp.lex_cmp(bound)? == std::cmp::Ordering::Greater {
                    break;
                }
            }
            let coeff = res_coeff / &lead_coeff;
            let term = GenSeries::monomial(self.group, exp, coeff);
            residual = residual.sub(&self.mul(&term)?)?;
            result = result.add(&term)?;
            emitted += 1;
        }
        if !residual.is_zero() {
            result.marker = Some(TruncationMarker {
                max_terms,
                cutoff: cutoff.cloned(),
            });
        }
        Ok(result)
    }

    /// Termwise formal derivative in direction `i` of the frame:
    /// `z^e` goes to `e_i * z^(e - e_i)`.
    pub fn formal_partial(&self, frame: &SeriesFrame, i: usize) -> Result<GenSeries, SeriesError> {
        if frame.dimension() != self.group.dimension() {
            return Err(SeriesError::FrameMismatch {
                frame: frame.dimension(),
                group: self.group.dimension(),
            });
        }
        assert!(i < frame.dimension(), "direction out of range");
        let step = GroupElement::axis(self.group.dimension(), i, BigRational::one());
        let mut out = GenSeries::zero(self.group);
        out.marker = self.marker.clone();
        for (e, c) in &self.terms {
            let factor = e.coords()[i].clone();
            if factor.is_zero() {
                continue;
            }
            out.add_term(e.sub(&step)?, c * factor);
        }
        Ok(out)
    }

    /// Reduction modulo the prime of the convex back subgroup: keeps exactly
    /// the support points with zero front part, projected onto the subgroup.
    ///
    /// Requires the series to lie in the valuation ring of the front quotient
    /// valuation, i.e. every support point has nonnegative front part.
    pub fn residue(&self, layout: CompositionLayout) -> Result<GenSeries, SeriesError> {
        if layout.total() != self.group.dimension() {
            return Err(SeriesError::Group(GroupError::LayoutMismatch {
                front: layout.front(),
                back: layout.back(),
                got: self.group.dimension(),
            }));
        }
        for e in self.terms.keys() {
            let front = layout.project_quotient(e)?;
            if !front.is_zero() && !front.is_positive() {
                return Err(SeriesError::NotInValuationRing(e.clone()));
            }
        }
        let back_group = OrderedGroupSpec::new(layout.back());
        let mut out = GenSeries::zero(back_group);
        out.marker = self.marker.clone();
        for (e, c) in &self.terms {
            if layout.project_quotient(e)?.is_zero() {
                out.add_term(layout.back_part(e)?, c.clone());
            }
        }
        Ok(out)
    }

    /// Value of the top form `f dy_1 ^ ... ^ dy_n` with `v(y_i)` given:
    /// `v(f) + sum of the basis values`.
    pub fn form_value(&self, basis_values: &[GroupElement]) -> Result<GroupElement, SeriesError> {
        let mut acc = self.value()?;
        for g in basis_values {
            acc = acc.add(g)?;
        }
        Ok(acc)
    }
}

impl fmt::Display for GenSeries {
    /// Series literal form: `[(0,0): 1, (1,0): -1]`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, (e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{e}: {c}")?;
        }
        write!(f, "]")?;
        if self.marker.is_some() {
            write!(f, " (truncated)")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_to_rf;
    use crate::poly::VariableContext;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn qd(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn el(cs: &[i64]) -> GroupElement {
        GroupElement::new(cs.iter().map(|&n| q(n)).collect())
    }

    fn elq(cs: &[(i64, i64)]) -> GroupElement {
        GroupElement::new(cs.iter().map(|&(n, d)| qd(n, d)).collect())
    }

    fn series(group: OrderedGroupSpec, terms: &[(&[i64], i64)]) -> GenSeries {
        GenSeries::from_terms(
            group,
            terms.iter().map(|&(e, c)| (el(e), q(c))),
        )
        .unwrap()
    }

    #[test]
    fn polynomials_embed_with_independent_weights() {
        let ctx = VariableContext::new(vec!["x", "y"]);
        let p = parse_to_rf("x + y", &ctx).unwrap().numerator().clone();
        let group = OrderedGroupSpec::new(2);
        let weights = [el(&[1, 0]), el(&[0, 1])];
        let s = GenSeries::from_poly(&p, &weights, group).unwrap();
        assert_eq!(s, series(group, &[(&[0, 1], 1), (&[1, 0], 1)]));
    }

    #[test]
    fn equal_monomials_collide_and_sum() {
        let ctx = VariableContext::new(vec!["x", "y"]);
        let p = parse_to_rf("x^2 + 2*x^2", &ctx).unwrap().numerator().clone();
        let group = OrderedGroupSpec::new(1);
        let s = GenSeries::from_poly(&p, &[el(&[1]), el(&[1])], group).unwrap();
        assert_eq!(s, series(group, &[(&[2], 3)]));
        // distinct monomials collide under dependent weights
        let p = parse_to_rf("x + y", &ctx).unwrap().numerator().clone();
        let s = GenSeries::from_poly(&p, &[el(&[1]), el(&[1])], group).unwrap();
        assert_eq!(s, series(group, &[(&[1], 2)]));
    }

    #[test]
    fn multiplication_is_convolution() {
        let group = OrderedGroupSpec::new(1);
        let a = series(group, &[(&[1], 1)]);
        let b = series(group, &[(&[-1], 1)]);
        assert_eq!(a.mul(&b).unwrap(), series(group, &[(&[0], 1)]));
        let one_plus = series(group, &[(&[0], 1), (&[1], 1)]);
        let one_minus = series(group, &[(&[0], 1), (&[1], -1)]);
        assert_eq!(
            one_plus.mul(&one_minus).unwrap(),
            series(group, &[(&[0], 1), (&[2], -1)])
        );
        assert!(a.mul(&GenSeries::zero(group)).unwrap().is_zero());
    }

    #[test]
    fn value_is_the_least_support_point() {
        let group = OrderedGroupSpec::new(2);
        let s = series(group, &[(&[2, 3], 5), (&[2, 4], 1)]);
        assert_eq!(s.value().unwrap(), el(&[2, 3]));
        assert!(GenSeries::one(group).value().unwrap().is_zero());
    }

    #[test]
    fn geometric_inversion_truncates_with_marker() {
        let group = OrderedGroupSpec::new(1);
        let s = series(group, &[(&[0], 1), (&[1], -1)]);
        let inv = s.invert(4, None).unwrap();
        assert_eq!(
            inv.terms,
            series(group, &[(&[0], 1), (&[1], 1), (&[2], 1), (&[3], 1)]).terms
        );
        assert!(inv.marker().is_some());
    }

    #[test]
    fn monomial_inversion_is_exact() {
        let group = OrderedGroupSpec::new(1);
        let z = series(group, &[(&[1], 1)]);
        let inv = z.invert(10, None).unwrap();
        assert_eq!(inv, series(group, &[(&[-1], 1)]));
        assert!(inv.is_exact());
    }

    #[test]
    fn hand_expanded_inverse_of_two_plus_z() {
        let group = OrderedGroupSpec::new(1);
        let s = series(group, &[(&[0], 2), (&[1], 1)]);
        let inv = s.invert(2, None).unwrap();
        let expected = GenSeries::from_terms(
            group,
            [(el(&[0]), qd(1, 2)), (el(&[1]), qd(-1, 4))],
        )
        .unwrap();
        assert_eq!(inv.terms, expected.terms);
        assert!(inv.marker().is_some());
    }

    #[test]
    fn inversion_respects_cutoff() {
        let group = OrderedGroupSpec::new(1);
        let s = series(group, &[(&[0], 1), (&[1], -1)]);
        let inv = s.invert(usize::MAX, Some(&el(&[2]))).unwrap();
        assert_eq!(
            inv.terms,
            series(group, &[(&[0], 1), (&[1], 1), (&[2], 1)]).terms
        );
        assert!(inv.marker().is_some());
    }

    #[test]
    fn formal_partials() {
        let group = OrderedGroupSpec::new(2);
        let frame = SeriesFrame::new(vec!["z1", "z2"]);
        let s = series(group, &[(&[2, 0], 1)]);
        assert_eq!(
            s.formal_partial(&frame, 0).unwrap(),
            series(group, &[(&[1, 0], 2)])
        );
        let root = GenSeries::monomial(group, elq(&[(1, 2), (0, 1)]), q(1));
        assert_eq!(
            root.formal_partial(&frame, 0).unwrap(),
            GenSeries::monomial(group, elq(&[(-1, 2), (0, 1)]), qd(1, 2))
        );
        assert!(s.formal_partial(&frame, 1).unwrap().is_zero());
    }

    #[test]
    fn residue_keeps_zero_front_terms() {
        let group = OrderedGroupSpec::new(2);
        let layout = CompositionLayout::new(1, 1);
        let s = series(group, &[(&[0, 3], 2), (&[1, 0], 7)]);
        let r = s.residue(layout).unwrap();
        assert_eq!(r, series(OrderedGroupSpec::new(1), &[(&[3], 2)]));
        let t = series(group, &[(&[1, 0], 7)]);
        assert!(t.residue(layout).unwrap().is_zero());
        let bad = series(group, &[(&[-1, 0], 1)]);
        assert!(matches!(
            bad.residue(layout),
            Err(SeriesError::NotInValuationRing(_))
        ));
    }

    #[test]
    fn form_value_adds_basis_values() {
        let group = OrderedGroupSpec::new(2);
        let one = GenSeries::one(group);
        assert_eq!(
            one.form_value(&[el(&[1, 0]), el(&[0, 1])]).unwrap(),
            el(&[1, 1])
        );
        let f = GenSeries::monomial(group, el(&[-1, -1]), q(1));
        assert_eq!(
            f.form_value(&[el(&[1, 0]), el(&[0, 1])]).unwrap(),
            el(&[0, 0])
        );
        // polynomial route: x^3 + x y^2 under weights (2), (3)
        let ctx = VariableContext::new(vec!["x", "y"]);
        let p = parse_to_rf("x^3 + x*y^2", &ctx).unwrap().numerator().clone();
        let group1 = OrderedGroupSpec::new(1);
        let s = GenSeries::from_poly(&p, &[el(&[2]), el(&[3])], group1).unwrap();
        assert_eq!(s.form_value(&[el(&[2]), el(&[3])]).unwrap(), el(&[11]));
    }

    #[test]
    fn display_matches_the_series_literal() {
        let group = OrderedGroupSpec::new(2);
        let s = series(group, &[(&[0, 0], 1), (&[1, 0], -1)]);
        assert_eq!(s.to_string(), "[(0, 0): 1, (1, 0): -1]");
    }

    #[test]
    fn formal_partial_agrees_with_polynomial_partial() {
        // with the standard frame weights, transporting a polynomial and
        // differentiating termwise matches differentiating first
        let ctx = VariableContext::new(vec!["x", "y"]);
        let group = OrderedGroupSpec::new(2);
        let weights = [el(&[1, 0]), el(&[0, 1])];
        let frame = SeriesFrame::new(vec!["x", "y"]);
        for text in ["x^3 + x*y^2 + y^4", "1 + x*y", "x^2*y^3 + 7*x"] {
            let p = parse_to_rf(text, &ctx).unwrap().numerator().clone();
            for (i, v) in ["x", "y"].iter().enumerate() {
                let lhs = GenSeries::from_poly(&p, &weights, group)
                    .unwrap()
                    .formal_partial(&frame, i)
                    .unwrap();
                let rhs =
                    GenSeries::from_poly(&p.partial(v).unwrap(), &weights, group).unwrap();
                assert_eq!(lhs, rhs, "d/d{v} of {text}");
            }
        }
    }

    #[test]
    fn form_value_is_invariant_under_monomial_basis_change() {
        // replacing z_i by z_i^(m_i) multiplies f by the exact Jacobian
        // factor prod m_i z_i^(m_i - 1) and scales the basis values
        let group = OrderedGroupSpec::new(2);
        let f = series(group, &[(&[2, -1], 3), (&[2, 0], 1)]);
        let basis = [el(&[1, 0]), el(&[0, 1])];
        let reference = f.form_value(&basis).unwrap();
        for (m1, m2) in [(2i64, 3i64), (1, -1), (-2, 5)] {
            let inverse_jacobian = GenSeries::monomial(
                group,
                GroupElement::new(vec![q(1 - m1), q(1 - m2)]),
                qd(1, m1 * m2),
            );
            let transformed = f.mul(&inverse_jacobian).unwrap();
            let scaled_basis = [basis[0].scale(&q(m1)), basis[1].scale(&q(m2))];
            assert_eq!(
                transformed.form_value(&scaled_basis).unwrap(),
                reference,
                "powers ({m1}, {m2})"
            );
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_series(dim: usize) -> impl Strategy<Value = GenSeries> {
            proptest::collection::vec(
                (
                    proptest::collection::vec((-4i64..5, 1i64..4), dim),
                    (-5i64..6).prop_filter("nonzero", |c| *c != 0),
                ),
                0..5,
            )
            .prop_map(move |terms| {
                GenSeries::from_terms(
                    OrderedGroupSpec::new(dim),
                    terms.into_iter().map(|(e, c)| {
                        (
                            GroupElement::new(e.into_iter().map(|(n, d)| qd(n, d)).collect()),
                            q(c),
                        )
                    }),
                )
                .unwrap()
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(96))]

            #[test]
            fn leibniz_rule(s in arb_series(2), t in arb_series(2)) {
                let frame = SeriesFrame::new(vec!["z1", "z2"]);
                for i in 0..2 {
                    let lhs = s.mul(&t).unwrap().formal_partial(&frame, i).unwrap();
                    let rhs = s
                        .mul(&t.formal_partial(&frame, i).unwrap()).unwrap()
                        .add(&t.mul(&s.formal_partial(&frame, i).unwrap()).unwrap()).unwrap();
                    prop_assert_eq!(lhs, rhs);
                }
            }

            #[test]
            fn value_axioms(s in arb_series(2), t in arb_series(2)) {
                if s.is_zero() || t.is_zero() {
                    return Ok(());
                }
                let vs = s.value().unwrap();
                let vt = t.value().unwrap();
                prop_assert_eq!(
                    s.mul(&t).unwrap().value().unwrap(),
                    vs.add(&vt).unwrap()
                );
                let sum = s.add(&t).unwrap();
                if !sum.is_zero() {
                    prop_assert!(sum.value().unwrap() >= vs.min(vt));
                }
            }

            #[test]
            fn residue_is_a_ring_map(s in arb_valuation_ring_series(), t in arb_valuation_ring_series()) {
                let layout = CompositionLayout::new(1, 1);
                let lhs = s.mul(&t).unwrap().residue(layout).unwrap();
                let rhs = s
                    .residue(layout).unwrap()
                    .mul(&t.residue(layout).unwrap()).unwrap();
                prop_assert_eq!(lhs, rhs);
            }

            #[test]
            fn derivative_commutes_with_residue(s in arb_valuation_ring_series()) {
                let layout = CompositionLayout::new(1, 1);
                let frame = SeriesFrame::new(vec!["z1", "z2"]);
                let back_frame = SeriesFrame::new(vec!["z2"]);
                let lhs = s
                    .formal_partial(&frame, 1).unwrap()
                    .residue(layout).unwrap();
                let rhs = s
                    .residue(layout).unwrap()
                    .formal_partial(&back_frame, 0).unwrap();
                prop_assert_eq!(lhs, rhs);
            }

            #[test]
            fn inversion_prefixes_are_exact(s in arb_series(1), n in 1usize..8) {
                if s.is_zero() {
                    return Ok(());
                }
                let inv = s.invert(n, None).unwrap();
                let product = s.mul(&inv).unwrap();
                let delta = product.sub(&GenSeries::one(*s.group())).unwrap();
                if inv.is_exact() {
                    prop_assert!(delta.is_zero());
                } else {
                    // the error lies strictly beyond every emitted contribution
                    let last = inv.terms().keys().last().unwrap();
                    let bound = last.add(&s.value().unwrap()).unwrap();
                    prop_assert!(delta.value().unwrap() > bound);
                }
            }
        }
    }
}
