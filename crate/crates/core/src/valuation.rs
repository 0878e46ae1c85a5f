//! Monomial-type Abhyankar valuations on the function field.
//!
//! A [`ValuationSpec`] assigns each variable a weight in lex `Q^d` and splits
//! the variables into a basis part `T` (independent weights spanning `Q^d`)
//! and a residue part `R` (weight zero) — adapted coordinates.  The value of
//! a polynomial is the lex-minimum over its terms of the weighted exponent
//! sum, extended to quotients by `v(P/Q) = v(P) - v(Q)`.
//!
//! [`QuasiMonomialSpec`] drops the partition and allows dependent weights
//! (the blow-up of the origin assigns every variable the same weight); it
//! supports values and initial forms only.  Residues and splittings require
//! adapted coordinates; callers holding a quasi-monomial handle rewrite
//! through a chart first, exactly as one does before valuating on a blow-up.

use std::collections::BTreeMap;
use std::fmt;

use num::{BigRational, Zero};
use thiserror::Error;

use crate::group::{
    rational_rank, solve_in_span, CompositionLayout, GroupElement, GroupError, OrderedGroupSpec,
};
use crate::poly::{Monomial, PolyError, Polynomial, RationalFunction, VariableContext};

/// Errors raised by valuation construction and queries.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValuationError {
    #[error("weights are not adapted: {0}")]
    NonAdaptedWeights(String),
    #[error("the zero polynomial has no value")]
    ZeroPolynomial,
    #[error("the zero function has no value")]
    ZeroFunction,
    #[error("residue requires value zero, got {0}")]
    NonzeroValue(GroupElement),
    #[error("variable context mismatch")]
    ContextMismatch,
    #[error("operation requires a composed valuation")]
    NotComposed,
    #[error("valuation has no residue variables")]
    NoResidueVariables,
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Rank, rational rank and dimension of a valuation.
///
/// In the lex `Q^d` model the rank always equals the rational rank, and the
/// Abhyankar equality `rr + dim = n` holds by construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValuationInvariants {
    pub rank: usize,
    pub rational_rank: usize,
    pub dimension: usize,
}

/// Common interface of adapted specs and quasi-monomial handles: everything
/// that only needs weights.
pub trait Place {
    fn context(&self) -> &VariableContext;
    fn group(&self) -> &OrderedGroupSpec;
    /// Weight of the variable with the given context index.
    fn weight(&self, var: usize) -> &GroupElement;
    fn invariants(&self) -> ValuationInvariants;

    /// Value of a single monomial: the weighted exponent sum.
    fn monomial_value(&self, m: &Monomial) -> GroupElement {
        let mut acc = self.group().zero();
        for (v, q) in m.exponents() {
            acc = acc
                .add(&self.weight(*v).scale(q))
                .expect("weights share the group dimension");
        }
        acc
    }

    /// Lex-minimum of the term values; trivial on constants.
    fn value_poly(&self, p: &Polynomial) -> Result<GroupElement, ValuationError> {
        if p.context() != self.context() {
            return Err(ValuationError::ContextMismatch);
        }
        p.terms()
            .keys()
            .map(|m| self.monomial_value(m))
            .min()
            .ok_or(ValuationError::ZeroPolynomial)
    }

    /// `v(P/Q) = v(P) - v(Q)`; well defined on equal representations.
    fn value(&self, f: &RationalFunction) -> Result<GroupElement, ValuationError> {
        if f.is_zero() {
            return Err(ValuationError::ZeroFunction);
        }
        let vn = self.value_poly(f.numerator())?;
        let vd = self.value_poly(f.denominator())?;
        Ok(vn.sub(&vd)?)
    }

    /// The sub-sum of terms achieving the minimum value.  Ties keep every
    /// minimal term, which makes the initial form multiplicative.
    fn initial_form(&self, p: &Polynomial) -> Result<Polynomial, ValuationError> {
        let min = self.value_poly(p)?;
        Ok(Polynomial::from_terms(
            p.context(),
            p.terms()
                .iter()
                .filter(|(m, _)| self.monomial_value(m) == min)
                .map(|(m, c)| (m.clone(), c.clone())),
        ))
    }
}

/// An adapted monomial-type valuation: weights plus a declared basis/residue
/// partition of the variables.
#[derive(Debug, Clone, PartialEq)]
pub struct ValuationSpec {
    ctx: VariableContext,
    group: OrderedGroupSpec,
    weights: Vec<GroupElement>,
    basis_vars: Vec<usize>,
    residue_vars: Vec<usize>,
    residue_ctx: Option<VariableContext>,
    composition: Option<Box<Composition>>,
}

/// The record kept by [`ValuationSpec::compose`]: the direct-sum layout and
/// both factors, for splitting values back apart.
#[derive(Debug, Clone, PartialEq)]
pub struct Composition {
    pub layout: CompositionLayout,
    pub outer: ValuationSpec,
    pub inner: ValuationSpec,
}

impl ValuationSpec {
    /// Builds an adapted spec from a full weight assignment; the basis is the
    /// set of variables with nonzero weight, in context order.
    pub fn monomial(
        ctx: VariableContext,
        weights: BTreeMap<String, GroupElement>,
    ) -> Result<Self, ValuationError> {
        let (basis, residue): (Vec<_>, Vec<_>) = (0..ctx.len()).partition(|i| {
            weights
                .get(ctx.name(*i))
                .map_or(false, |w| !w.is_zero())
        });
        let basis_names: Vec<String> = basis.iter().map(|&i| ctx.name(i).to_string()).collect();
        let residue_names: Vec<String> =
            residue.iter().map(|&i| ctx.name(i).to_string()).collect();
        Self::with_partition(ctx, weights, basis_names, residue_names)
    }

    /// Builds an adapted spec with a declared basis/residue order.
    ///
    /// Validates the adapted-coordinate invariants: the partition covers the
    /// context, residue weights are zero, basis weights are `Q`-linearly
    /// independent, and the group dimension equals the basis size.
    pub fn with_partition(
        ctx: VariableContext,
        weights: BTreeMap<String, GroupElement>,
        basis: Vec<String>,
        residue: Vec<String>,
    ) -> Result<Self, ValuationError> {
        let mut weight_vec: Vec<Option<GroupElement>> = vec![None; ctx.len()];
        let mut dim: Option<usize> = None;
        for (name, w) in &weights {
            let idx = ctx
                .index_of(name)
                .ok_or_else(|| ValuationError::Poly(PolyError::UnknownVariable(name.clone())))?;
            match dim {
                None => dim = Some(w.dimension()),
                Some(d) if d == w.dimension() => {}
                Some(d) => {
                    return Err(ValuationError::Group(GroupError::DimensionMismatch {
                        expected: d,
                        got: w.dimension(),
                    }))
                }
            }
            weight_vec[idx] = Some(w.clone());
        }
        let d = dim.ok_or_else(|| {
            ValuationError::NonAdaptedWeights("no weights given".to_string())
        })?;
        let weights: Vec<GroupElement> = weight_vec
            .into_iter()
            .map(|w| w.unwrap_or_else(|| GroupElement::zero(d)))
            .collect();

        let mut seen = vec![false; ctx.len()];
        let mut basis_vars = Vec::with_capacity(basis.len());
        for name in &basis {
            let idx = ctx
                .index_of(name)
                .ok_or_else(|| ValuationError::Poly(PolyError::UnknownVariable(name.clone())))?;
            seen[idx] = true;
            basis_vars.push(idx);
        }
        let mut residue_vars = Vec::with_capacity(residue.len());
        for name in &residue {
            let idx = ctx
                .index_of(name)
                .ok_or_else(|| ValuationError::Poly(PolyError::UnknownVariable(name.clone())))?;
            if seen[idx] {
                return Err(ValuationError::NonAdaptedWeights(format!(
                    "variable {name} listed twice"
                )));
            }
            seen[idx] = true;
            residue_vars.push(idx);
        }
        if seen.iter().any(|s| !s) {
            return Err(ValuationError::NonAdaptedWeights(
                "basis and residue lists must partition the variables".to_string(),
            ));
        }
        for &i in &residue_vars {
            if !weights[i].is_zero() {
                return Err(ValuationError::NonAdaptedWeights(format!(
                    "residue variable {} has nonzero weight",
                    ctx.name(i)
                )));
            }
        }
        if basis_vars.len() != d {
            return Err(ValuationError::NonAdaptedWeights(format!(
                "{} basis variables against group dimension {d}",
                basis_vars.len()
            )));
        }
        let basis_weights: Vec<GroupElement> =
            basis_vars.iter().map(|&i| weights[i].clone()).collect();
        if rational_rank(&basis_weights) != basis_vars.len() {
            return Err(ValuationError::NonAdaptedWeights(
                "basis weights are Q-linearly dependent".to_string(),
            ));
        }
        let residue_ctx = if residue_vars.is_empty() {
            None
        } else {
            Some(VariableContext::new(
                residue_vars
                    .iter()
                    .map(|&i| ctx.name(i).to_string())
                    .collect(),
            ))
        };
        Ok(ValuationSpec {
            ctx,
            group: OrderedGroupSpec::new(d),
            weights,
            basis_vars,
            residue_vars,
            residue_ctx,
            composition: None,
        })
    }

    /// Composition along the residue field: the value group becomes the
    /// direct sum, outer in front, inner in the back convex subgroup.
    pub fn compose(outer: &ValuationSpec, inner: &ValuationSpec) -> Result<Self, ValuationError> {
        let residue_ctx = outer
            .residue_ctx
            .as_ref()
            .ok_or(ValuationError::NoResidueVariables)?;
        if inner.ctx != *residue_ctx {
            return Err(ValuationError::ContextMismatch);
        }
        let d_out = outer.group.dimension();
        let d_in = inner.group.dimension();
        let layout = CompositionLayout::new(d_out, d_in);
        let pad = |front: &[BigRational], back: &[BigRational]| {
            let mut coords = front.to_vec();
            coords.extend_from_slice(back);
            GroupElement::new(coords)
        };
        let zero_front = vec![BigRational::zero(); d_out];
        let zero_back = vec![BigRational::zero(); d_in];
        let mut weights = Vec::with_capacity(outer.ctx.len());
        for (i, w) in outer.weights.iter().enumerate() {
            if w.is_zero() {
                let inner_idx = inner
                    .ctx
                    .index_of(outer.ctx.name(i))
                    .expect("contexts checked equal");
                weights.push(pad(&zero_front, inner.weights[inner_idx].coords()));
            } else {
                weights.push(pad(w.coords(), &zero_back));
            }
        }
        let mut basis_vars = outer.basis_vars.clone();
        for &j in &inner.basis_vars {
            let name = inner.ctx.name(j);
            basis_vars.push(outer.ctx.index_of(name).expect("residue variable"));
        }
        let residue_vars: Vec<usize> = inner
            .residue_vars
            .iter()
            .map(|&j| {
                outer
                    .ctx
                    .index_of(inner.ctx.name(j))
                    .expect("residue variable")
            })
            .collect();
        let residue_ctx = if residue_vars.is_empty() {
            None
        } else {
            Some(VariableContext::new(
                residue_vars
                    .iter()
                    .map(|&i| outer.ctx.name(i).to_string())
                    .collect(),
            ))
        };
        Ok(ValuationSpec {
            ctx: outer.ctx.clone(),
            group: OrderedGroupSpec::new(d_out + d_in),
            weights,
            basis_vars,
            residue_vars,
            residue_ctx,
            composition: Some(Box::new(Composition {
                layout,
                outer: outer.clone(),
                inner: inner.clone(),
            })),
        })
    }

    /// Basis variables, in declared order.
    pub fn basis_vars(&self) -> &[usize] {
        &self.basis_vars
    }

    pub fn basis_names(&self) -> Vec<&str> {
        self.basis_vars.iter().map(|&i| self.ctx.name(i)).collect()
    }

    /// Residue variables, in declared order.
    pub fn residue_vars(&self) -> &[usize] {
        &self.residue_vars
    }

    /// The context of the residue field; `None` for dimension zero.
    pub fn residue_context(&self) -> Option<&VariableContext> {
        self.residue_ctx.as_ref()
    }

    /// The composition record, when this spec was built by [`Self::compose`].
    pub fn composition(&self) -> Option<&Composition> {
        self.composition.as_deref()
    }

    pub fn weights(&self) -> &[GroupElement] {
        &self.weights
    }

    fn basis_weights(&self) -> Vec<GroupElement> {
        self.basis_vars
            .iter()
            .map(|&i| self.weights[i].clone())
            .collect()
    }

    /// Expresses a group element in the basis weights: `v = sum n_i w(t_i)`.
    pub fn coordinates_in_basis(
        &self,
        v: &GroupElement,
    ) -> Result<Vec<BigRational>, ValuationError> {
        solve_in_span(&self.basis_weights(), v).ok_or_else(|| {
            ValuationError::NonAdaptedWeights("value outside the basis span".to_string())
        })
    }

    /// Residue of a value-zero function into the residue field.
    ///
    /// Writes `in(P) = t^a p(x_R)` and `in(Q) = t^b q(x_R)`; value zero and
    /// the independence of the basis weights force `a = b`, and the residue
    /// is `p/q` over the residue variables.
    pub fn residue(&self, f: &RationalFunction) -> Result<RationalFunction, ValuationError> {
        let residue_ctx = self
            .residue_ctx
            .as_ref()
            .ok_or(ValuationError::NoResidueVariables)?;
        let v = self.value(f)?;
        if !v.is_zero() {
            return Err(ValuationError::NonzeroValue(v));
        }
        let num = self.initial_form(f.numerator())?;
        let den = self.initial_form(f.denominator())?;
        let (num_basis_exps, num_res) = self.split_initial(&num, residue_ctx);
        let (den_basis_exps, den_res) = self.split_initial(&den, residue_ctx);
        debug_assert_eq!(
            num_basis_exps, den_basis_exps,
            "value zero forces equal basis exponents"
        );
        let _ = (num_basis_exps, den_basis_exps);
        Ok(RationalFunction::new(num_res, den_res)?)
    }

    /// Strips the (shared) basis-variable part off an initial form and maps
    /// the remainder onto the residue context.
    fn split_initial(
        &self,
        initial: &Polynomial,
        residue_ctx: &VariableContext,
    ) -> (Vec<BigRational>, Polynomial) {
        let basis_exps: Vec<BigRational> = match initial.terms().keys().next() {
            Some(m) => self.basis_vars.iter().map(|&i| m.exponent_of(i)).collect(),
            None => vec![BigRational::zero(); self.basis_vars.len()],
        };
        let index_map: BTreeMap<usize, usize> = self
            .residue_vars
            .iter()
            .enumerate()
            .map(|(res_idx, &ctx_idx)| (ctx_idx, res_idx))
            .collect();
        let terms: Vec<(Monomial, BigRational)> = initial
            .terms()
            .iter()
            .map(|(m, c)| {
                let mapped =
                    Monomial::from_exponents(m.exponents().iter().filter_map(|(v, e)| {
                        index_map.get(v).map(|&res_idx| (res_idx, e.clone()))
                    }));
                debug_assert!(
                    self.basis_vars
                        .iter()
                        .zip(&basis_exps)
                        .all(|(&i, a)| &m.exponent_of(i) == a),
                    "initial form has a unique basis exponent vector"
                );
                (mapped, c.clone())
            })
            .collect();
        (basis_exps, Polynomial::from_terms(residue_ctx, terms))
    }

    /// Splits a composed value into its outer and inner parts.
    ///
    /// The first component is the outer value; the second is the inner value
    /// of the residue of `f * prod t_i^(-n_i)`, where `n` expresses the outer
    /// value in the outer basis weights.  Concatenating the two reproduces
    /// the composed value.
    pub fn split_value(
        &self,
        f: &RationalFunction,
    ) -> Result<(GroupElement, GroupElement), ValuationError> {
        if f.is_zero() {
            return Err(ValuationError::ZeroFunction);
        }
        let comp = self.composition.as_deref().ok_or(ValuationError::NotComposed)?;
        let outer_value = comp.outer.value(f)?;
        let n = comp.outer.coordinates_in_basis(&outer_value)?;
        let mut shift = Monomial::one();
        for (&i, n_i) in comp.outer.basis_vars.iter().zip(&n) {
            shift = shift.mul(&Monomial::from_exponents([(i, -n_i)]));
        }
        let normalized = f.mul(&RationalFunction::from_poly(Polynomial::term(
            &self.ctx,
            shift,
            num::BigRational::from_integer(1.into()),
        )))?;
        let residue = comp.outer.residue(&normalized)?;
        let inner_value = comp.inner.value(&residue)?;
        Ok((outer_value, inner_value))
    }
}

impl Place for ValuationSpec {
    fn context(&self) -> &VariableContext {
        &self.ctx
    }

    fn group(&self) -> &OrderedGroupSpec {
        &self.group
    }

    fn weight(&self, var: usize) -> &GroupElement {
        &self.weights[var]
    }

    fn invariants(&self) -> ValuationInvariants {
        ValuationInvariants {
            rank: self.basis_vars.len(),
            rational_rank: self.basis_vars.len(),
            dimension: self.residue_vars.len(),
        }
    }
}

impl fmt::Display for ValuationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "valuation on {} with weights", self.ctx)?;
        for (i, w) in self.weights.iter().enumerate() {
            write!(f, " {} -> {}", self.ctx.name(i), w)?;
        }
        Ok(())
    }
}

/// A monomial valuation without an adapted partition: arbitrary weights,
/// possibly `Q`-dependent (the blow-up of the origin weights every variable
/// equally).  Supports values and initial forms only.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiMonomialSpec {
    ctx: VariableContext,
    group: OrderedGroupSpec,
    weights: Vec<GroupElement>,
}

impl QuasiMonomialSpec {
    pub fn new(
        ctx: VariableContext,
        weights: BTreeMap<String, GroupElement>,
    ) -> Result<Self, ValuationError> {
        let mut weight_vec: Vec<Option<GroupElement>> = vec![None; ctx.len()];
        let mut dim: Option<usize> = None;
        for (name, w) in &weights {
            let idx = ctx
                .index_of(name)
                .ok_or_else(|| ValuationError::Poly(PolyError::UnknownVariable(name.clone())))?;
            match dim {
                None => dim = Some(w.dimension()),
                Some(d) if d == w.dimension() => {}
                Some(d) => {
                    return Err(ValuationError::Group(GroupError::DimensionMismatch {
                        expected: d,
                        got: w.dimension(),
                    }))
                }
            }
            weight_vec[idx] = Some(w.clone());
        }
        let d = dim.ok_or_else(|| {
            ValuationError::NonAdaptedWeights("no weights given".to_string())
        })?;
        let weights = weight_vec
            .into_iter()
            .map(|w| w.unwrap_or_else(|| GroupElement::zero(d)))
            .collect();
        Ok(QuasiMonomialSpec {
            ctx,
            group: OrderedGroupSpec::new(d),
            weights,
        })
    }

    /// The blow-up of the origin: every variable gets weight `(1)`.
    pub fn origin_blowup(ctx: VariableContext) -> Self {
        let weights = ctx
            .names()
            .iter()
            .map(|n| {
                (
                    n.clone(),
                    GroupElement::new(vec![BigRational::from_integer(1.into())]),
                )
            })
            .collect();
        Self::new(ctx, weights).expect("constant weights are well formed")
    }

    pub fn weights(&self) -> &[GroupElement] {
        &self.weights
    }
}

impl Place for QuasiMonomialSpec {
    fn context(&self) -> &VariableContext {
        &self.ctx
    }

    fn group(&self) -> &OrderedGroupSpec {
        &self.group
    }

    fn weight(&self, var: usize) -> &GroupElement {
        &self.weights[var]
    }

    fn invariants(&self) -> ValuationInvariants {
        let rr = rational_rank(&self.weights);
        ValuationInvariants {
            rank: rr,
            rational_rank: rr,
            dimension: self.ctx.len() - rr,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_to_rf;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn el(cs: &[i64]) -> GroupElement {
        GroupElement::new(cs.iter().map(|&n| q(n)).collect())
    }

    fn flag_tx() -> ValuationSpec {
        let ctx = VariableContext::new(vec!["t", "x"]);
        let mut w = BTreeMap::new();
        w.insert("t".to_string(), el(&[1]));
        w.insert("x".to_string(), el(&[0]));
        ValuationSpec::monomial(ctx, w).unwrap()
    }

    fn quasi_23() -> QuasiMonomialSpec {
        let ctx = VariableContext::new(vec!["x", "y"]);
        let mut w = BTreeMap::new();
        w.insert("x".to_string(), el(&[2]));
        w.insert("y".to_string(), el(&[3]));
        QuasiMonomialSpec::new(ctx, w).unwrap()
    }

    #[test]
    fn dependent_weights_are_rejected_for_adapted_specs() {
        let ctx = VariableContext::new(vec!["x", "y"]);
        let mut w = BTreeMap::new();
        w.insert("x".to_string(), el(&[1]));
        w.insert("y".to_string(), el(&[1]));
        assert!(matches!(
            ValuationSpec::monomial(ctx, w),
            Err(ValuationError::NonAdaptedWeights(_))
        ));
    }

    #[test]
    fn flag_spec_invariants() {
        let spec = flag_tx();
        let inv = spec.invariants();
        assert_eq!((inv.rank, inv.rational_rank, inv.dimension), (1, 1, 1));
    }

    #[test]
    fn two_variable_flag_has_full_rank() {
        let ctx = VariableContext::new(vec!["t1", "t2"]);
        let mut w = BTreeMap::new();
        w.insert("t1".to_string(), el(&[1, 0]));
        w.insert("t2".to_string(), el(&[0, 1]));
        let spec = ValuationSpec::monomial(ctx, w).unwrap();
        let inv = spec.invariants();
        assert_eq!((inv.rank, inv.rational_rank, inv.dimension), (2, 2, 0));
    }

    #[test]
    fn quasi_monomial_invariants() {
        let ctx = VariableContext::new(vec!["x1", "x2"]);
        let spec = QuasiMonomialSpec::origin_blowup(ctx);
        let inv = spec.invariants();
        assert_eq!((inv.rank, inv.rational_rank, inv.dimension), (1, 1, 1));
        let inv = quasi_23().invariants();
        assert_eq!((inv.rational_rank, inv.dimension), (1, 1));
        let ctx3 = VariableContext::new(vec!["x1", "x2", "x3"]);
        let inv = QuasiMonomialSpec::origin_blowup(ctx3).invariants();
        assert_eq!((inv.rational_rank, inv.dimension), (1, 2));
    }

    #[test]
    fn value_of_the_cusp_family_polynomial() {
        let spec = quasi_23();
        let p = parse_to_rf("x^3 + x*y^2 + y^4", spec.context()).unwrap();
        // enumeration oracle: term values {6, 8, 12}
        assert_eq!(spec.value(&p).unwrap(), el(&[6]));
    }

    #[test]
    fn constants_have_value_zero() {
        let spec = quasi_23();
        let one = RationalFunction::one(spec.context());
        assert!(spec.value(&one).unwrap().is_zero());
    }

    #[test]
    fn lex_min_prefers_the_back_axis() {
        let ctx = VariableContext::new(vec!["t", "x"]);
        let mut w = BTreeMap::new();
        w.insert("t".to_string(), el(&[1, 0]));
        w.insert("x".to_string(), el(&[0, 1]));
        let spec = ValuationSpec::monomial(ctx, w).unwrap();
        let p = parse_to_rf("t + x^5", spec.context()).unwrap();
        assert_eq!(spec.value(&p).unwrap(), el(&[0, 5]));
    }

    #[test]
    fn value_of_quotients() {
        let spec = quasi_23();
        let f = parse_to_rf("x/y", spec.context()).unwrap();
        assert_eq!(spec.value(&f).unwrap(), el(&[-1]));
        let g = parse_to_rf("(x+y)/(x+y)", spec.context()).unwrap();
        assert!(spec.value(&g).unwrap().is_zero());
        let flag = flag_tx();
        let h = parse_to_rf("1/t", flag.context()).unwrap();
        assert_eq!(flag.value(&h).unwrap(), el(&[-1]));
    }

    #[test]
    fn zero_inputs_are_rejected() {
        let spec = quasi_23();
        assert!(matches!(
            spec.value(&RationalFunction::zero(spec.context())),
            Err(ValuationError::ZeroFunction)
        ));
        assert!(matches!(
            spec.value_poly(&Polynomial::zero(spec.context())),
            Err(ValuationError::ZeroPolynomial)
        ));
    }

    #[test]
    fn initial_forms() {
        let spec = quasi_23();
        let p = parse_to_rf("x^3 + x*y^2 + y^4", spec.context()).unwrap();
        assert_eq!(
            spec.initial_form(p.numerator()).unwrap(),
            parse_to_rf("x^3", spec.context()).unwrap().numerator().clone()
        );
        let ctx = VariableContext::new(vec!["x", "y"]);
        let blowup = QuasiMonomialSpec::origin_blowup(ctx);
        let p = parse_to_rf("x^2 + y^2", blowup.context()).unwrap();
        assert_eq!(
            blowup.initial_form(p.numerator()).unwrap(),
            *p.numerator()
        );
        let c = Polynomial::constant(spec.context(), q(7));
        assert_eq!(spec.initial_form(&c).unwrap(), c);
    }

    #[test]
    fn residues_into_the_residue_field() {
        let flag = flag_tx();
        let f = parse_to_rf("(t + x)/x", flag.context()).unwrap();
        let r = flag.residue(&f).unwrap();
        let res_ctx = flag.residue_context().unwrap();
        assert_eq!(r, parse_to_rf("1", res_ctx).unwrap());

        let g = parse_to_rf("(t*x^2 + t*x)/(t*x)", flag.context()).unwrap();
        assert_eq!(flag.residue(&g).unwrap(), parse_to_rf("x+1", res_ctx).unwrap());
    }

    #[test]
    fn residue_requires_value_zero() {
        let flag = flag_tx();
        let f = parse_to_rf("t", flag.context()).unwrap();
        assert!(matches!(
            flag.residue(&f),
            Err(ValuationError::NonzeroValue(_))
        ));
    }

    #[test]
    fn composition_is_the_direct_sum() {
        let outer = flag_tx();
        let inner_ctx = outer.residue_context().unwrap().clone();
        let mut w = BTreeMap::new();
        w.insert("x".to_string(), el(&[1]));
        let inner = ValuationSpec::monomial(inner_ctx, w).unwrap();
        let composed = ValuationSpec::compose(&outer, &inner).unwrap();
        assert_eq!(composed.weight(0), &el(&[1, 0]));
        assert_eq!(composed.weight(1), &el(&[0, 1]));
        let inv = composed.invariants();
        assert_eq!((inv.rank, inv.rational_rank, inv.dimension), (2, 2, 0));
    }

    #[test]
    fn split_value_on_monomials_and_units() {
        let outer = flag_tx();
        let inner_ctx = outer.residue_context().unwrap().clone();
        let mut w = BTreeMap::new();
        w.insert("x".to_string(), el(&[1]));
        let inner = ValuationSpec::monomial(inner_ctx, w).unwrap();
        let composed = ValuationSpec::compose(&outer, &inner).unwrap();

        let f = parse_to_rf("t^2*x^3", composed.context()).unwrap();
        let (outer_v, inner_v) = composed.split_value(&f).unwrap();
        assert_eq!((outer_v, inner_v), (el(&[2]), el(&[3])));

        let g = parse_to_rf("t*(x+1)", composed.context()).unwrap();
        let (outer_v, inner_v) = composed.split_value(&g).unwrap();
        assert_eq!((outer_v, inner_v), (el(&[1]), el(&[0])));
    }

    #[test]
    fn split_value_reassembles_the_composed_value() {
        let outer = flag_tx();
        let inner_ctx = outer.residue_context().unwrap().clone();
        let mut w = BTreeMap::new();
        w.insert("x".to_string(), el(&[1]));
        let inner = ValuationSpec::monomial(inner_ctx, w).unwrap();
        let composed = ValuationSpec::compose(&outer, &inner).unwrap();
        let layout = composed.composition().unwrap().layout;
        for text in ["t^2*x^3", "t*(x+1)", "(t^3*x + t^4)/(x+1)", "x^5 + t*x"] {
            let f = parse_to_rf(text, composed.context()).unwrap();
            let (outer_v, inner_v) = composed.split_value(&f).unwrap();
            let mut coords = outer_v.coords().to_vec();
            coords.extend(inner_v.coords().iter().cloned());
            assert_eq!(
                GroupElement::new(coords),
                composed.value(&f).unwrap(),
                "splitting {text}"
            );
            assert_eq!(
                layout.project_quotient(&composed.value(&f).unwrap()).unwrap(),
                outer_v
            );
        }
    }

    #[test]
    fn composed_of_composed_adds_ranks() {
        // an E62-style tower on three variables: rank 2 flag composed with a
        // monomial valuation on the last residue variable
        let ctx = VariableContext::new(vec!["t1", "t2", "x"]);
        let mut w = BTreeMap::new();
        w.insert("t1".to_string(), el(&[1, 0]));
        w.insert("t2".to_string(), el(&[0, 1]));
        w.insert("x".to_string(), el(&[0, 0]));
        let outer = ValuationSpec::monomial(ctx, w).unwrap();
        let inner_ctx = outer.residue_context().unwrap().clone();
        let mut w = BTreeMap::new();
        w.insert("x".to_string(), el(&[1]));
        let inner = ValuationSpec::monomial(inner_ctx, w).unwrap();
        let composed = ValuationSpec::compose(&outer, &inner).unwrap();
        let inv = composed.invariants();
        assert_eq!((inv.rank, inv.rational_rank, inv.dimension), (3, 3, 0));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_poly(ctx: VariableContext) -> impl Strategy<Value = Polynomial> {
            let nvars = ctx.len();
            proptest::collection::vec(
                (
                    proptest::collection::vec(0u8..4, nvars),
                    (-5i64..6).prop_filter("nonzero", |c| *c != 0),
                ),
                1..5,
            )
            .prop_map(move |terms| {
                Polynomial::from_terms(
                    &ctx,
                    terms.into_iter().map(|(exps, c)| {
                        (
                            Monomial::from_exponents(
                                exps.iter()
                                    .enumerate()
                                    .map(|(i, &e)| (i, BigRational::from_integer(e.into()))),
                            ),
                            BigRational::from_integer(c.into()),
                        )
                    }),
                )
            })
        }

        fn arb_spec() -> impl Strategy<Value = ValuationSpec> {
            // adapted specs on (t, x): t -> (c), x -> (0)
            (1i64..6).prop_map(|c| {
                let ctx = VariableContext::new(vec!["t", "x"]);
                let mut w = BTreeMap::new();
                w.insert("t".to_string(), GroupElement::new(vec![q(c)]));
                w.insert("x".to_string(), GroupElement::new(vec![q(0)]));
                ValuationSpec::monomial(ctx, w).unwrap()
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(96))]

            #[test]
            fn valuation_axioms(
                spec in arb_spec(),
                p in arb_poly(VariableContext::new(vec!["t", "x"])),
                r in arb_poly(VariableContext::new(vec!["t", "x"]))
            ) {
                prop_assume!(!p.is_zero() && !r.is_zero());
                let f = RationalFunction::from_poly(p);
                let g = RationalFunction::from_poly(r);
                let vf = spec.value(&f).unwrap();
                let vg = spec.value(&g).unwrap();
                prop_assert_eq!(
                    spec.value(&f.mul(&g).unwrap()).unwrap(),
                    vf.add(&vg).unwrap()
                );
                let sum = f.add(&g).unwrap();
                if !sum.is_zero() {
                    let vs = spec.value(&sum).unwrap();
                    let min = vf.clone().min(vg.clone());
                    prop_assert!(vs >= min);
                    if vf != vg {
                        prop_assert_eq!(vs, min);
                    }
                }
            }

            #[test]
            fn initial_form_is_multiplicative(
                spec in arb_spec(),
                p in arb_poly(VariableContext::new(vec!["t", "x"])),
                r in arb_poly(VariableContext::new(vec!["t", "x"]))
            ) {
                prop_assume!(!p.is_zero() && !r.is_zero());
                let lhs = spec.initial_form(&p.mul(&r).unwrap()).unwrap();
                let rhs = spec
                    .initial_form(&p).unwrap()
                    .mul(&spec.initial_form(&r).unwrap()).unwrap();
                prop_assert_eq!(lhs, rhs);
            }

            #[test]
            fn residue_is_a_ring_homomorphism(
                spec in arb_spec(),
                p in arb_poly(VariableContext::new(vec!["t", "x"])),
                r in arb_poly(VariableContext::new(vec!["t", "x"]))
            ) {
                prop_assume!(!p.is_zero() && !r.is_zero());
                // normalize both to value zero by dividing by t^(value/w(t))
                let normalize = |poly: &Polynomial| -> RationalFunction {
                    let f = RationalFunction::from_poly(poly.clone());
                    let v = spec.value(&f).unwrap();
                    let n = spec.coordinates_in_basis(&v).unwrap();
                    let shift = Monomial::from_exponents([(0usize, -n[0].clone())]);
                    f.mul(&RationalFunction::from_poly(Polynomial::term(
                        spec.context(),
                        shift,
                        q(1),
                    )))
                    .unwrap()
                };
                let f = normalize(&p);
                let g = normalize(&r);
                let rf = spec.residue(&f).unwrap();
                let rg = spec.residue(&g).unwrap();
                prop_assert_eq!(
                    spec.residue(&f.mul(&g).unwrap()).unwrap(),
                    rf.mul(&rg).unwrap()
                );
                let sum = f.add(&g).unwrap();
                if !sum.is_zero() && spec.value(&sum).unwrap().is_zero() {
                    prop_assert_eq!(
                        spec.residue(&sum).unwrap(),
                        rf.add(&rg).unwrap()
                    );
                }
            }
        }
    }
}
