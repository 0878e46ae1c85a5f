//! Rational top differential forms and their values at Abhyankar places.
//!
//! A form is stored as a coefficient together with an explicit ordered basis
//! of functions, `f dg_1 ^ ... ^ dg_n`; two forms are the same exactly when
//! their coordinate coefficients `f * Jac(g/x)` agree.  Valuation always
//! routes through the coordinate presentation: `v(w) = v(f_coord) + sum_j
//! v(x_j)` over all context variables.  On adapted specs the residue
//! variables contribute zero and the formula collapses to the adapted one,
//! `v(f) + v(t_1) + ... + v(t_k)`; tests check the adapted presentations
//! against the coordinate route instead of keeping a second code path.
//!
//! For quasi-monomial handles with dependent weights the coordinate formula
//! assumes the genericity hypothesis that the residues of the associated
//! monomial quotients form a transcendence basis; this is not checked
//! algorithmically.  The adapted-coordinate path is the verified route.

use std::collections::BTreeMap;

use num::{BigRational, Zero};
use thiserror::Error;

use crate::group::GroupElement;
use crate::poly::{jacobian_det, substitute, PolyError, RationalFunction, VariableContext};
use crate::valuation::{Place, ValuationError, ValuationSpec};

/// Errors raised by form operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormError {
    #[error("basis functions are functionally dependent (zero Jacobian)")]
    DegenerateBasis,
    #[error("form has nonzero value {0}")]
    NonzeroFormValue(GroupElement),
    #[error("basis size {basis} does not match {variables} variables")]
    BasisSizeMismatch { basis: usize, variables: usize },
    #[error("variable context mismatch")]
    ContextMismatch,
    #[error("chart order {0} is not an integer")]
    NonIntegralOrder(BigRational),
    #[error(transparent)]
    Valuation(#[from] ValuationError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// A rational top differential form `f dg_1 ^ ... ^ dg_n`.
#[derive(Debug, Clone)]
pub struct TopForm {
    coefficient: RationalFunction,
    basis: Vec<RationalFunction>,
    ctx: VariableContext,
}

impl PartialEq for TopForm {
    /// Forms are equal when they have equal coordinate coefficients.
    fn eq(&self, other: &Self) -> bool {
        self.ctx == other.ctx
            && match (
                self.to_coordinate_coefficient(),
                other.to_coordinate_coefficient(),
            ) {
                (Ok(a), Ok(b)) => a == b,
                _ => false,
            }
    }
}

impl TopForm {
    /// Builds a form, checking that the basis is functionally independent.
    pub fn new(
        coefficient: RationalFunction,
        basis: Vec<RationalFunction>,
    ) -> Result<Self, FormError> {
        let ctx = coefficient.context().clone();
        if basis.len() != ctx.len() {
            return Err(FormError::BasisSizeMismatch {
                basis: basis.len(),
                variables: ctx.len(),
            });
        }
        for g in &basis {
            if g.context() != &ctx {
                return Err(FormError::ContextMismatch);
            }
        }
        let form = TopForm {
            coefficient,
            basis,
            ctx,
        };
        if form.basis_jacobian()?.is_zero() {
            return Err(FormError::DegenerateBasis);
        }
        Ok(form)
    }

    /// The form `f dx_1 ^ ... ^ dx_n` in the coordinate basis.
    pub fn in_coordinates(coefficient: RationalFunction) -> Result<Self, FormError> {
        let ctx = coefficient.context().clone();
        let basis = ctx
            .names()
            .iter()
            .map(|n| RationalFunction::variable(&ctx, n))
            .collect::<Result<Vec<_>, _>>()
            .map_err(FormError::Poly)?;
        TopForm::new(coefficient, basis)
    }

    /// The coordinate volume form `dx_1 ^ ... ^ dx_n`.
    pub fn volume(ctx: &VariableContext) -> Self {
        TopForm::in_coordinates(RationalFunction::one(ctx)).expect("identity basis")
    }

    pub fn coefficient(&self) -> &RationalFunction {
        &self.coefficient
    }

    pub fn basis(&self) -> &[RationalFunction] {
        &self.basis
    }

    pub fn context(&self) -> &VariableContext {
        &self.ctx
    }

    fn basis_jacobian(&self) -> Result<RationalFunction, FormError> {
        Ok(jacobian_det(&self.basis, &self.ctx)?)
    }

    /// The coefficient of this form in the presentation `f dx_1 ^ ... ^ dx_n`:
    /// `f * Jac(basis / coordinates)`.
    pub fn to_coordinate_coefficient(&self) -> Result<RationalFunction, FormError> {
        let jac = self.basis_jacobian()?;
        if jac.is_zero() {
            return Err(FormError::DegenerateBasis);
        }
        Ok(self.coefficient.mul(&jac)?)
    }

    /// Rewrites the same form over a new functionally independent basis.
    pub fn change_presentation(
        &self,
        new_basis: Vec<RationalFunction>,
    ) -> Result<TopForm, FormError> {
        if new_basis.len() != self.ctx.len() {
            return Err(FormError::BasisSizeMismatch {
                basis: new_basis.len(),
                variables: self.ctx.len(),
            });
        }
        let old_jac = self.basis_jacobian()?;
        let new_jac = jacobian_det(&new_basis, &self.ctx)?;
        if new_jac.is_zero() {
            return Err(FormError::DegenerateBasis);
        }
        let coefficient = self.coefficient.mul(&old_jac)?.div(&new_jac)?;
        TopForm::new(coefficient, new_basis)
    }

    /// Multiplies the coefficient by a function; `v(g w) = v(g) + v(w)`.
    pub fn scale_by(&self, g: &RationalFunction) -> Result<TopForm, FormError> {
        Ok(TopForm {
            coefficient: self.coefficient.mul(g)?,
            basis: self.basis.clone(),
            ctx: self.ctx.clone(),
        })
    }
}

/// Value of a top form: `v(f_coord) + sum_j v(x_j)` over all context
/// variables.  Weight-zero variables contribute nothing, so on adapted specs
/// this is the adapted formula `v(f) + v(t_1) + ... + v(t_k)`.
pub fn valuate_form<P: Place>(form: &TopForm, place: &P) -> Result<GroupElement, FormError> {
    if place.context() != form.context() {
        return Err(FormError::ContextMismatch);
    }
    let coeff = form.to_coordinate_coefficient()?;
    let mut acc = place.value(&coeff)?;
    for j in 0..form.context().len() {
        acc = acc.add(place.weight(j)).map_err(ValuationError::Group)?;
    }
    Ok(acc)
}

/// A top form over the residue variable context of a valuation.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidueForm {
    form: TopForm,
}

impl ResidueForm {
    pub fn form(&self) -> &TopForm {
        &self.form
    }

    pub fn coefficient(&self) -> &RationalFunction {
        self.form.coefficient()
    }

    pub fn basis(&self) -> &[RationalFunction] {
        self.form.basis()
    }
}

/// Generalized Poincaré residue in the canonical adapted presentation.
///
/// The form is first rewritten over the adapted variable basis
/// `(t_1, ..., t_k, x_{k+1}, ..., x_n)` — basis variables in declared order,
/// then residue variables; this rewrite supplies the sign of the permutation.
/// The result is `res(f t_1 ... t_k) dxbar_{k+1} ^ ... ^ dxbar_n`.
pub fn poincare_residue(form: &TopForm, spec: &ValuationSpec) -> Result<ResidueForm, FormError> {
    let adapted = to_adapted_presentation(form, spec)?;
    poincare_residue_in_presentation(&adapted, spec)
}

/// Rewrites a form over the basis of adapted variables of the spec.
pub fn to_adapted_presentation(
    form: &TopForm,
    spec: &ValuationSpec,
) -> Result<TopForm, FormError> {
    if spec.context() != form.context() {
        return Err(FormError::ContextMismatch);
    }
    let ctx = form.context();
    let mut basis = Vec::with_capacity(ctx.len());
    for &i in spec.basis_vars() {
        basis.push(RationalFunction::variable(ctx, ctx.name(i)).map_err(FormError::Poly)?);
    }
    for &i in spec.residue_vars() {
        basis.push(RationalFunction::variable(ctx, ctx.name(i)).map_err(FormError::Poly)?);
    }
    form.change_presentation(basis)
}

/// Generalized Poincaré residue computed in the form's own presentation.
///
/// Requires `v(w) = 0` and an adapted presentation: with `k` basis variables,
/// the first `k` basis functions must carry the value information (their
/// values sum with `v(f)` to zero) and the trailing ones must be units.  The
/// residue form is `res(f g_1 ... g_k) d(res g_{k+1}) ^ ... ^ d(res g_n)`
/// over the residue context; by the independence theorem two adapted
/// presentations of one form yield residues agreeing up to a nonzero
/// rational constant, and exactly when they share the leading block.
pub fn poincare_residue_in_presentation(
    form: &TopForm,
    spec: &ValuationSpec,
) -> Result<ResidueForm, FormError> {
    if spec.context() != form.context() {
        return Err(FormError::ContextMismatch);
    }
    let total = valuate_form(form, spec)?;
    if !total.is_zero() {
        return Err(FormError::NonzeroFormValue(total));
    }
    let k = spec.basis_vars().len();
    let mut scaled = form.coefficient().clone();
    for g in &form.basis()[..k] {
        scaled = scaled.mul(g)?;
    }
    let coefficient = spec.residue(&scaled)?;
    let residue_basis = form.basis()[k..]
        .iter()
        .map(|g| spec.residue(g))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ResidueForm {
        form: TopForm::new(coefficient, residue_basis)?,
    })
}

/// Classical order of vanishing of a form along the exceptional divisor of a
/// birational chart.
///
/// Pulls the coordinate presentation back through `chart` (coefficient times
/// the chart Jacobian) and returns the `exc_var`-order of the result: the
/// least exponent of `exc_var` in the numerator minus the least in the
/// denominator.  Whether the chart is birational is the caller's
/// responsibility; a non-birational substitution goes undetected.
pub fn classical_value_via_chart(
    form: &TopForm,
    chart: &BTreeMap<String, RationalFunction>,
    exc_var: &str,
) -> Result<i64, FormError> {
    let coeff = form.to_coordinate_coefficient()?;
    let images: Vec<&RationalFunction> = chart.values().collect();
    let target = images
        .first()
        .map(|rf| rf.context().clone())
        .ok_or(FormError::ContextMismatch)?;
    // chart functions in source-variable order for the Jacobian rows
    let mut rows = Vec::with_capacity(form.context().len());
    for name in form.context().names() {
        let image = chart
            .get(name)
            .ok_or_else(|| PolyError::MissingImage {
                variable: name.clone(),
            })
            .map_err(FormError::Poly)?;
        rows.push(image.clone());
    }
    let chart_jac = jacobian_det(&rows, &target)?;
    if chart_jac.is_zero() {
        return Err(FormError::DegenerateBasis);
    }
    let pulled = substitute(&coeff, chart)?.mul(&chart_jac)?;
    let order = order_in_variable(&pulled, exc_var)?;
    if !order.is_integer() {
        return Err(FormError::NonIntegralOrder(order));
    }
    order
        .to_integer()
        .try_into()
        .map_err(|_| FormError::NonIntegralOrder(order))
}

/// `exc`-adic order of a rational function: least exponent of `exc` over the
/// numerator terms minus the least over the denominator terms.
pub fn order_in_variable(rf: &RationalFunction, exc: &str) -> Result<BigRational, FormError> {
    let ctx = rf.context();
    let idx = ctx
        .index_of(exc)
        .ok_or_else(|| PolyError::UnknownVariable(exc.to_string()))
        .map_err(FormError::Poly)?;
    let min_exp = |p: &crate::poly::Polynomial| -> Result<BigRational, FormError> {
        p.terms()
            .keys()
            .map(|m| m.exponent_of(idx))
            .min()
            .ok_or(FormError::Poly(PolyError::DivisionByZero))
    };
    if rf.is_zero() {
        return Err(FormError::Valuation(ValuationError::ZeroFunction));
    }
    Ok(min_exp(rf.numerator())? - min_exp(rf.denominator())?)
}

/// The nonzero constant `c` with `a = c * b`, when the two functions are
/// proportional by a constant.
pub fn constant_ratio(a: &RationalFunction, b: &RationalFunction) -> Option<BigRational> {
    if b.is_zero() {
        return None;
    }
    let ratio = a.div(b).ok()?;
    let c = ratio.as_constant()?;
    if c.is_zero() {
        None
    } else {
        Some(c)
    }
}

/// The standard blow-up chart of the origin on `n` variables: `x_1 -> y_1`,
/// `x_i -> y_1 y_i`; the exceptional divisor is `y_1 = 0`.
pub fn origin_blowup_chart(
    ctx: &VariableContext,
) -> (BTreeMap<String, RationalFunction>, VariableContext, String) {
    let n = ctx.len();
    let target =
        VariableContext::new((1..=n).map(|i| format!("y{i}")).collect::<Vec<_>>());
    let mut chart = BTreeMap::new();
    let y1 = RationalFunction::variable(&target, "y1").expect("fresh name");
    chart.insert(ctx.name(0).to_string(), y1.clone());
    for (i, name) in ctx.names().iter().enumerate().skip(1) {
        let yi = RationalFunction::variable(&target, &format!("y{}", i + 1)).expect("fresh name");
        chart.insert(name.clone(), y1.mul(&yi).expect("same context"));
    }
    (chart, target, "y1".to_string())
}
