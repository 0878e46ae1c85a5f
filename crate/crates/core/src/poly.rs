//! Sparse exact arithmetic for multivariate polynomials and rational
//! functions over `Q`, with rational exponents.
//!
//! Monomials map variables to nonzero rational exponents, so roots like
//! `x^(1/2)` are first-class terms obeying the additive exponent law.
//! Rational functions are stored as unreduced numerator/denominator pairs;
//! equality is decided by cross-multiplication, so no gcd or factorization
//! machinery is needed anywhere.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num::{BigInt, BigRational, One, Signed, Zero};
use thiserror::Error;

/// Errors raised by polynomial and rational-function operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("variable context mismatch")]
    ContextMismatch,
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("size mismatch: {functions} functions against {variables} variables")]
    SizeMismatch { functions: usize, variables: usize },
    #[error("fractional exponent of {variable} requires a monomial image")]
    FractionalExponentOnNonMonomial { variable: String },
    #[error("no image given for variable {variable}")]
    MissingImage { variable: String },
    #[error("coefficient {value} has no exact rational root of index {index}")]
    NonRationalRoot { value: BigRational, index: BigInt },
    #[error("unknown variable {0}")]
    UnknownVariable(String),
}

/// An ordered list of variable names: the transcendence basis of the ambient
/// function field.  Cheap to clone; compared by name list.
#[derive(Debug, Clone)]
pub struct VariableContext {
    names: Arc<Vec<String>>,
}

impl PartialEq for VariableContext {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.names, &other.names) || self.names == other.names
    }
}

impl Eq for VariableContext {}

impl VariableContext {
    /// Builds a context from unique names. Panics on duplicates or emptiness.
    pub fn new<S: Into<String>>(names: Vec<S>) -> Self {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        assert!(!names.is_empty(), "a variable context needs n >= 1 names");
        for (i, n) in names.iter().enumerate() {
            assert!(
                !names[..i].contains(n),
                "duplicate variable name {n:?} in context"
            );
        }
        VariableContext {
            names: Arc::new(names),
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, index: usize) -> &str {
        &self.names[index]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

impl fmt::Display for VariableContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.names.join(", "))
    }
}

/// A monomial: variable index to nonzero rational exponent.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial {
    exponents: BTreeMap<usize, BigRational>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    pub fn var(index: usize) -> Self {
        let mut exponents = BTreeMap::new();
        exponents.insert(index, BigRational::one());
        Monomial { exponents }
    }

    /// Builds a monomial, dropping zero exponents.
    pub fn from_exponents<I: IntoIterator<Item = (usize, BigRational)>>(iter: I) -> Self {
        let exponents = iter.into_iter().filter(|(_, e)| !e.is_zero()).collect();
        Monomial { exponents }
    }

    pub fn exponents(&self) -> &BTreeMap<usize, BigRational> {
        &self.exponents
    }

    pub fn exponent_of(&self, index: usize) -> BigRational {
        self.exponents
            .get(&index)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn is_one(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut exponents = self.exponents.clone();
        for (v, e) in &other.exponents {
            let entry = exponents.entry(*v).or_insert_with(BigRational::zero);
            *entry += e;
            if entry.is_zero() {
                exponents.remove(v);
            }
        }
        Monomial { exponents }
    }

    pub fn inv(&self) -> Monomial {
        Monomial {
            exponents: self.exponents.iter().map(|(v, e)| (*v, -e)).collect(),
        }
    }

    pub fn pow(&self, q: &BigRational) -> Monomial {
        if q.is_zero() {
            return Monomial::one();
        }
        Monomial {
            exponents: self.exponents.iter().map(|(v, e)| (*v, e * q)).collect(),
        }
    }
}

/// A sparse polynomial in canonical form: no zero coefficients stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    ctx: VariableContext,
    terms: BTreeMap<Monomial, BigRational>,
}

impl Polynomial {
    pub fn zero(ctx: &VariableContext) -> Self {
        Polynomial {
            ctx: ctx.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(ctx: &VariableContext) -> Self {
        Polynomial::constant(ctx, BigRational::one())
    }

    pub fn constant(ctx: &VariableContext, c: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::one(), c);
        }
        Polynomial {
            ctx: ctx.clone(),
            terms,
        }
    }

    pub fn variable(ctx: &VariableContext, name: &str) -> Result<Self, PolyError> {
        let index = ctx
            .index_of(name)
            .ok_or_else(|| PolyError::UnknownVariable(name.to_string()))?;
        Ok(Polynomial::term(ctx, Monomial::var(index), BigRational::one()))
    }

    pub fn term(ctx: &VariableContext, m: Monomial, c: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Polynomial {
            ctx: ctx.clone(),
            terms,
        }
    }

    pub fn from_terms<I>(ctx: &VariableContext, iter: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, BigRational)>,
    {
        let mut p = Polynomial::zero(ctx);
        for (m, c) in iter {
            p.add_term(m, c);
        }
        p
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            let key = self
                .terms
                .iter()
                .find(|(_, v)| v.is_zero())
                .map(|(k, _)| k.clone());
            if let Some(k) = key {
                self.terms.remove(&k);
            }
        }
    }

    pub fn context(&self) -> &VariableContext {
        &self.ctx
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, BigRational> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The constant value if this polynomial is constant.
    pub fn as_constant(&self) -> Option<BigRational> {
        if self.terms.is_empty() {
            return Some(BigRational::zero());
        }
        if self.terms.len() == 1 {
            let (m, c) = self.terms.iter().next().unwrap();
            if m.is_one() {
                return Some(c.clone());
            }
        }
        None
    }

    /// The single `(monomial, coefficient)` pair if this is one term.
    pub fn as_monomial(&self) -> Option<(&Monomial, &BigRational)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    fn check_ctx(&self, other: &Polynomial) -> Result<(), PolyError> {
        if self.ctx != other.ctx {
            return Err(PolyError::ContextMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_ctx(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Polynomial {
        Polynomial {
            ctx: self.ctx.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn mul(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_ctx(other)?;
        let mut out = Polynomial::zero(&self.ctx);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, q: &BigRational) -> Polynomial {
        if q.is_zero() {
            return Polynomial::zero(&self.ctx);
        }
        Polynomial {
            ctx: self.ctx.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * q)).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Polynomial {
        Polynomial {
            ctx: self.ctx.clone(),
            terms: self
                .terms
                .iter()
                .map(|(t, c)| (t.mul(m), c.clone()))
                .collect(),
        }
    }

    pub fn pow(&self, n: u64) -> Polynomial {
        let mut out = Polynomial::one(&self.ctx);
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                out = out.mul(&base).expect("same context");
            }
            base = base.mul(&base).expect("same context");
            n >>= 1;
        }
        out
    }

    /// Termwise partial derivative: `d(x^q)/dx = q * x^(q-1)`.
    pub fn partial(&self, var: &str) -> Result<Polynomial, PolyError> {
        let index = self
            .ctx
            .index_of(var)
            .ok_or_else(|| PolyError::UnknownVariable(var.to_string()))?;
        let mut out = Polynomial::zero(&self.ctx);
        for (m, c) in &self.terms {
            let q = m.exponent_of(index);
            if q.is_zero() {
                continue;
            }
            let lowered = m.mul(&Monomial::from_exponents([(index, -BigRational::one())]));
            out.add_term(lowered, c * &q);
        }
        Ok(out)
    }
}

impl fmt::Display for Polynomial {
    /// Prints in the expression grammar: `3*x^2*y - 1/2*x^(1/2) + 4`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let negative = c.is_negative();
            let abs = c.abs();
            if i == 0 {
                if negative {
                    write!(f, "-")?;
                }
            } else if negative {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mut factors: Vec<String> = Vec::new();
            if !abs.is_one() || m.is_one() {
                factors.push(abs.to_string());
            }
            for (v, e) in m.exponents() {
                let name = self.ctx.name(*v);
                if e.is_one() {
                    factors.push(name.to_string());
                } else if e.is_integer() && !e.is_negative() {
                    factors.push(format!("{name}^{e}"));
                } else {
                    factors.push(format!("{name}^({e})"));
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

/// A quotient of polynomials with nonzero denominator.  No reduction is
/// performed; equality is decided by cross-multiplication.
#[derive(Debug, Clone)]
pub struct RationalFunction {
    num: Polynomial,
    den: Polynomial,
}

impl PartialEq for RationalFunction {
    fn eq(&self, other: &Self) -> bool {
        if self.num.context() != other.num.context() {
            return false;
        }
        let lhs = self.num.mul(&other.den).expect("same context");
        let rhs = other.num.mul(&self.den).expect("same context");
        lhs == rhs
    }
}

impl Eq for RationalFunction {}

impl RationalFunction {
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self, PolyError> {
        num.check_ctx(&den)?;
        if den.is_zero() {
            return Err(PolyError::DivisionByZero);
        }
        Ok(RationalFunction { num, den })
    }

    pub fn from_poly(p: Polynomial) -> Self {
        let den = Polynomial::one(p.context());
        RationalFunction { num: p, den }
    }

    pub fn zero(ctx: &VariableContext) -> Self {
        RationalFunction::from_poly(Polynomial::zero(ctx))
    }

    pub fn one(ctx: &VariableContext) -> Self {
        RationalFunction::from_poly(Polynomial::one(ctx))
    }

    pub fn constant(ctx: &VariableContext, c: BigRational) -> Self {
        RationalFunction::from_poly(Polynomial::constant(ctx, c))
    }

    pub fn variable(ctx: &VariableContext, name: &str) -> Result<Self, PolyError> {
        Ok(RationalFunction::from_poly(Polynomial::variable(ctx, name)?))
    }

    pub fn numerator(&self) -> &Polynomial {
        &self.num
    }

    pub fn denominator(&self) -> &Polynomial {
        &self.den
    }

    pub fn context(&self) -> &VariableContext {
        self.num.context()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// The exact constant this function equals, if it is constant.
    pub fn as_constant(&self) -> Option<BigRational> {
        if self.num.is_zero() {
            return Some(BigRational::zero());
        }
        // num = c * den termwise: take the candidate from den's leading term.
        let (m0, d0) = self.den.terms().iter().next()?;
        let c = self.num.terms().get(m0)? / d0;
        let scaled = self.den.scale(&c);
        if scaled == self.num {
            Some(c)
        } else {
            None
        }
    }

    fn check_ctx(&self, other: &RationalFunction) -> Result<(), PolyError> {
        self.num.check_ctx(&other.num)
    }

    pub fn add(&self, other: &RationalFunction) -> Result<RationalFunction, PolyError> {
        self.check_ctx(other)?;
        let num = self
            .num
            .mul(&other.den)?
            .add(&other.num.mul(&self.den)?)?;
        let den = self.den.mul(&other.den)?;
        RationalFunction::new(num, den)
    }

    pub fn sub(&self, other: &RationalFunction) -> Result<RationalFunction, PolyError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> RationalFunction {
        RationalFunction {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, other: &RationalFunction) -> Result<RationalFunction, PolyError> {
        self.check_ctx(other)?;
        RationalFunction::new(self.num.mul(&other.num)?, self.den.mul(&other.den)?)
    }

    pub fn div(&self, other: &RationalFunction) -> Result<RationalFunction, PolyError> {
        self.mul(&other.inv()?)
    }

    pub fn inv(&self) -> Result<RationalFunction, PolyError> {
        if self.num.is_zero() {
            return Err(PolyError::DivisionByZero);
        }
        Ok(RationalFunction {
            num: self.den.clone(),
            den: self.num.clone(),
        })
    }

    pub fn scale(&self, q: &BigRational) -> RationalFunction {
        RationalFunction {
            num: self.num.scale(q),
            den: self.den.clone(),
        }
    }

    pub fn pow_int(&self, n: i64) -> Result<RationalFunction, PolyError> {
        if n >= 0 {
            Ok(RationalFunction {
                num: self.num.pow(n as u64),
                den: self.den.pow(n as u64),
            })
        } else {
            let inv = self.inv()?;
            Ok(RationalFunction {
                num: inv.num.pow((-n) as u64),
                den: inv.den.pow((-n) as u64),
            })
        }
    }

    /// Quotient-rule partial derivative.
    pub fn partial(&self, var: &str) -> Result<RationalFunction, PolyError> {
        let dn = self.num.partial(var)?;
        let dd = self.den.partial(var)?;
        let num = dn.mul(&self.den)?.sub(&self.num.mul(&dd)?)?;
        let den = self.den.mul(&self.den)?;
        RationalFunction::new(num, den)
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.as_constant().map_or(false, |c| c.is_one()) {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

/// Determinant of the Jacobian matrix `d f_i / d x_j`, expanded exactly.
pub fn jacobian_det(
    fs: &[RationalFunction],
    ctx: &VariableContext,
) -> Result<RationalFunction, PolyError> {
    let n = ctx.len();
    if fs.len() != n {
        return Err(PolyError::SizeMismatch {
            functions: fs.len(),
            variables: n,
        });
    }
    for f in fs {
        if f.context() != ctx {
            return Err(PolyError::ContextMismatch);
        }
    }
    let mut matrix: Vec<Vec<RationalFunction>> = Vec::with_capacity(n);
    for f in fs {
        let row = ctx
            .names()
            .iter()
            .map(|v| f.partial(v))
            .collect::<Result<Vec<_>, _>>()?;
        matrix.push(row);
    }
    det(&matrix, &(0..n).collect::<Vec<_>>(), 0, ctx)
}

/// Laplace expansion along the first remaining row.
fn det(
    matrix: &[Vec<RationalFunction>],
    cols: &[usize],
    row: usize,
    ctx: &VariableContext,
) -> Result<RationalFunction, PolyError> {
    if cols.is_empty() {
        return Ok(RationalFunction::one(ctx));
    }
    let mut acc = RationalFunction::zero(ctx);
    for (k, &col) in cols.iter().enumerate() {
        let entry = &matrix[row][col];
        if entry.is_zero() {
            continue;
        }
        let rest: Vec<usize> = cols
            .iter()
            .copied()
            .filter(|&c| c != col)
            .collect();
        let minor = det(matrix, &rest, row + 1, ctx)?;
        let signed = if k % 2 == 0 {
            entry.mul(&minor)?
        } else {
            entry.mul(&minor)?.neg()
        };
        acc = acc.add(&signed)?;
    }
    Ok(acc)
}

/// Exact `base^exp` for integer `exp`.
pub fn rational_pow_int(base: &BigRational, exp: i64) -> Result<BigRational, PolyError> {
    if exp == 0 {
        return Ok(BigRational::one());
    }
    if base.is_zero() && exp < 0 {
        return Err(PolyError::DivisionByZero);
    }
    let mag = exp.unsigned_abs() as u32;
    let num = base.numer().pow(mag);
    let den = base.denom().pow(mag);
    Ok(if exp > 0 {
        BigRational::new(num, den)
    } else {
        BigRational::new(den, num)
    })
}

/// Exact `base^(p/q)` when it exists in `Q`; `NonRationalRoot` otherwise.
pub fn rational_pow(base: &BigRational, exp: &BigRational) -> Result<BigRational, PolyError> {
    if exp.is_integer() {
        let e = exp
            .to_integer()
            .try_into()
            .map_err(|_| PolyError::NonRationalRoot {
                value: base.clone(),
                index: exp.denom().clone(),
            })?;
        return rational_pow_int(base, e);
    }
    let q: u32 = exp
        .denom()
        .try_into()
        .map_err(|_| PolyError::NonRationalRoot {
            value: base.clone(),
            index: exp.denom().clone(),
        })?;
    let root = exact_nth_root(base, q).ok_or_else(|| PolyError::NonRationalRoot {
        value: base.clone(),
        index: exp.denom().clone(),
    })?;
    let p: i64 = exp
        .numer()
        .try_into()
        .map_err(|_| PolyError::NonRationalRoot {
            value: base.clone(),
            index: exp.denom().clone(),
        })?;
    rational_pow_int(&root, p)
}

fn exact_nth_root(value: &BigRational, n: u32) -> Option<BigRational> {
    if value.is_zero() {
        return Some(BigRational::zero());
    }
    if value.is_negative() {
        if n % 2 == 0 {
            return None;
        }
        return exact_nth_root(&-value, n).map(|r| -r);
    }
    let num_root = value.numer().nth_root(n);
    let den_root = value.denom().nth_root(n);
    if &num_root.pow(n) == value.numer() && &den_root.pow(n) == value.denom() {
        Some(BigRational::new(num_root, den_root))
    } else {
        None
    }
}

/// Simultaneous exact substitution of rational functions for variables.
///
/// Every variable occurring in `f` must have an image, and all images must
/// share one target context.  A variable carrying a non-integral exponent may
/// only be substituted by a ratio of monomials, since fractional powers of
/// general functions are undefined here.
pub fn substitute(
    f: &RationalFunction,
    images: &BTreeMap<String, RationalFunction>,
) -> Result<RationalFunction, PolyError> {
    let target = images
        .values()
        .next()
        .map(|rf| rf.context().clone())
        .ok_or(PolyError::ContextMismatch)?;
    for rf in images.values() {
        if rf.context() != &target {
            return Err(PolyError::ContextMismatch);
        }
    }
    let num = substitute_poly(f.numerator(), images, &target)?;
    let den = substitute_poly(f.denominator(), images, &target)?;
    num.div(&den)
}

fn substitute_poly(
    p: &Polynomial,
    images: &BTreeMap<String, RationalFunction>,
    target: &VariableContext,
) -> Result<RationalFunction, PolyError> {
    let mut acc = RationalFunction::zero(target);
    for (m, c) in p.terms() {
        let mut term = RationalFunction::constant(target, c.clone());
        for (v, e) in m.exponents() {
            let name = p.context().name(*v);
            let image = images.get(name).ok_or_else(|| PolyError::MissingImage {
                variable: name.to_string(),
            })?;
            let factor = if e.is_integer() {
                let i: i64 = e.to_integer().try_into().map_err(|_| {
                    PolyError::FractionalExponentOnNonMonomial {
                        variable: name.to_string(),
                    }
                })?;
                image.pow_int(i)?
            } else {
                monomial_rf_pow(image, e).ok_or_else(|| {
                    PolyError::FractionalExponentOnNonMonomial {
                        variable: name.to_string(),
                    }
                })?
            };
            term = term.mul(&factor)?;
        }
        acc = acc.add(&term)?;
    }
    Ok(acc)
}

/// Raises a monomial/monomial rational function to a rational power.
fn monomial_rf_pow(rf: &RationalFunction, e: &BigRational) -> Option<RationalFunction> {
    let (mn, cn) = rf.numerator().as_monomial()?;
    let (md, cd) = rf.denominator().as_monomial()?;
    let coeff = rational_pow(&(cn / cd), e).ok()?;
    let m = mn.mul(&md.inv()).pow(e);
    // split back into nonnegative-exponent numerator and denominator parts
    let mut num_m = Monomial::one();
    let mut den_m = Monomial::one();
    for (v, q) in m.exponents() {
        if q.is_negative() {
            den_m = den_m.mul(&Monomial::from_exponents([(*v, -q)]));
        } else {
            num_m = num_m.mul(&Monomial::from_exponents([(*v, q.clone())]));
        }
    }
    let ctx = rf.context();
    Some(RationalFunction {
        num: Polynomial::term(ctx, num_m, coeff),
        den: Polynomial::term(ctx, den_m, BigRational::one()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_to_rf;

    fn ctx_xy() -> VariableContext {
        VariableContext::new(vec!["x", "y"])
    }

    fn rf(ctx: &VariableContext, s: &str) -> RationalFunction {
        parse_to_rf(s, ctx).unwrap()
    }

    #[test]
    fn product_of_sum_and_difference() {
        let ctx = ctx_xy();
        assert_eq!(rf(&ctx, "(x+y)*(x-y)"), rf(&ctx, "x^2 - y^2"));
    }

    #[test]
    fn addition_with_zero_is_identity() {
        let ctx = ctx_xy();
        let p = rf(&ctx, "x^3 + 2*y");
        assert_eq!(p.add(&RationalFunction::zero(&ctx)).unwrap(), p);
    }

    #[test]
    fn rational_exponents_add() {
        let ctx = ctx_xy();
        assert_eq!(rf(&ctx, "x^(1/2)*x^(1/2)"), rf(&ctx, "x"));
    }

    #[test]
    fn field_operations() {
        let ctx = ctx_xy();
        assert_eq!(rf(&ctx, "(x/y)*(y/x)"), RationalFunction::one(&ctx));
        assert_eq!(
            rf(&ctx, "x+1").inv().unwrap(),
            rf(&ctx, "1/(x+1)")
        );
        assert_eq!(rf(&ctx, "1/x + 1/y"), rf(&ctx, "(y+x)/(x*y)"));
    }

    #[test]
    fn division_by_zero_polynomial() {
        let ctx = ctx_xy();
        assert_eq!(
            RationalFunction::zero(&ctx).inv(),
            Err(PolyError::DivisionByZero)
        );
    }

    #[test]
    fn partial_derivatives() {
        let ctx = ctx_xy();
        assert_eq!(
            rf(&ctx, "x^3 + x*y^2").partial("x").unwrap(),
            rf(&ctx, "3*x^2 + y^2")
        );
        assert_eq!(
            rf(&ctx, "x^(1/2)").partial("x").unwrap(),
            rf(&ctx, "(1/2)*x^(-1/2)")
        );
        assert_eq!(rf(&ctx, "1/x").partial("x").unwrap(), rf(&ctx, "-1/x^2"));
    }

    #[test]
    fn jacobian_determinants() {
        let ctx = VariableContext::new(vec!["x1", "x2"]);
        let identity = vec![rf(&ctx, "x1"), rf(&ctx, "x2")];
        assert_eq!(
            jacobian_det(&identity, &ctx).unwrap(),
            RationalFunction::one(&ctx)
        );
        // 2x2 cofactor expansion by hand: det [[x2, x1], [0, 1]] = x2
        let blowup = vec![rf(&ctx, "x1*x2"), rf(&ctx, "x2")];
        assert_eq!(jacobian_det(&blowup, &ctx).unwrap(), rf(&ctx, "x2"));
        // diagonal product: 2*x1 * 3*x2^2
        let diag = vec![rf(&ctx, "x1^2"), rf(&ctx, "x2^3")];
        assert_eq!(jacobian_det(&diag, &ctx).unwrap(), rf(&ctx, "6*x1*x2^2"));
    }

    #[test]
    fn jacobian_size_mismatch() {
        let ctx = ctx_xy();
        let fs = vec![rf(&ctx, "x")];
        assert!(matches!(
            jacobian_det(&fs, &ctx),
            Err(PolyError::SizeMismatch { .. })
        ));
    }

    #[test]
    fn substitution_blowup_chart() {
        let ctx = VariableContext::new(vec!["x1", "x2"]);
        let target = VariableContext::new(vec!["y1", "y2"]);
        let mut images = BTreeMap::new();
        images.insert("x1".to_string(), rf(&target, "y1"));
        images.insert("x2".to_string(), rf(&target, "y1*y2"));
        let f = rf(&ctx, "x1 + x2");
        assert_eq!(substitute(&f, &images).unwrap(), rf(&target, "y1 + y1*y2"));
    }

    #[test]
    fn substitution_of_root_into_square() {
        let ctx = VariableContext::new(vec!["x"]);
        let target = VariableContext::new(vec!["y"]);
        let mut images = BTreeMap::new();
        images.insert("x".to_string(), rf(&target, "y^2"));
        let f = rf(&ctx, "x^(1/2)");
        assert_eq!(substitute(&f, &images).unwrap(), rf(&target, "y"));
    }

    #[test]
    fn fractional_exponent_rejects_non_monomial_image() {
        let ctx = VariableContext::new(vec!["x"]);
        let target = VariableContext::new(vec!["y"]);
        let mut images = BTreeMap::new();
        images.insert("x".to_string(), rf(&target, "y + 1"));
        let f = rf(&ctx, "x^(1/2)");
        assert!(matches!(
            substitute(&f, &images),
            Err(PolyError::FractionalExponentOnNonMonomial { .. })
        ));
    }

    #[test]
    fn missing_image_is_reported() {
        let ctx = ctx_xy();
        let target = VariableContext::new(vec!["y1"]);
        let mut images = BTreeMap::new();
        images.insert("x".to_string(), rf(&target, "y1"));
        assert!(matches!(
            substitute(&rf(&ctx, "x + y"), &images),
            Err(PolyError::MissingImage { .. })
        ));
    }

    #[test]
    fn constant_detection() {
        let ctx = ctx_xy();
        assert_eq!(
            rf(&ctx, "(2*x+2*y)/(x+y)").as_constant(),
            Some(BigRational::from_integer(2.into()))
        );
        assert_eq!(rf(&ctx, "x/y").as_constant(), None);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_poly(ctx: VariableContext) -> impl Strategy<Value = Polynomial> {
            let nvars = ctx.len();
            proptest::collection::vec(
                (
                    proptest::collection::vec(0u8..4, nvars),
                    (-6i64..7).prop_filter("nonzero", |c| *c != 0),
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

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn leibniz_rule(
                p in arb_poly(VariableContext::new(vec!["x", "y"])),
                q in arb_poly(VariableContext::new(vec!["x", "y"]))
            ) {
                let f = RationalFunction::from_poly(p);
                let g = RationalFunction::from_poly(q);
                let lhs = f.mul(&g).unwrap().partial("x").unwrap();
                let rhs = f
                    .mul(&g.partial("x").unwrap()).unwrap()
                    .add(&g.mul(&f.partial("x").unwrap()).unwrap()).unwrap();
                prop_assert_eq!(lhs, rhs);
            }

            #[test]
            fn substitution_is_a_ring_homomorphism(
                p in arb_poly(VariableContext::new(vec!["x", "y"])),
                q in arb_poly(VariableContext::new(vec!["x", "y"]))
            ) {
                let target = VariableContext::new(vec!["u", "v"]);
                let mut images = BTreeMap::new();
                images.insert("x".to_string(), parse_to_rf("u*v", &target).unwrap());
                images.insert("y".to_string(), parse_to_rf("u + 1", &target).unwrap());
                let f = RationalFunction::from_poly(p);
                let g = RationalFunction::from_poly(q);
                let lhs = substitute(&f.mul(&g).unwrap(), &images).unwrap();
                let rhs = substitute(&f, &images).unwrap()
                    .mul(&substitute(&g, &images).unwrap()).unwrap();
                prop_assert_eq!(lhs, rhs);
            }

            #[test]
            fn jacobian_multiplicative_under_monomial_composition(
                a in 1u8..3, b in 1u8..3, c in 1u8..3
            ) {
                // chain rule on monomial maps: x -> (x1^a*x2, x2^b), then y -> (y1*y2^c, y2)
                let ctx = VariableContext::new(vec!["x1", "x2"]);
                let mid = VariableContext::new(vec!["y1", "y2"]);
                let f1 = parse_to_rf(&format!("x1^{a}*x2"), &ctx).unwrap();
                let f2 = parse_to_rf(&format!("x2^{b}"), &ctx).unwrap();
                let g1 = parse_to_rf(&format!("y1*y2^{c}"), &mid).unwrap();
                let g2 = parse_to_rf("y2", &mid).unwrap();
                // composite x -> g(f(x)) with y_i = f_i(x)
                let mut images = BTreeMap::new();
                images.insert("y1".to_string(), f1.clone());
                images.insert("y2".to_string(), f2.clone());
                let h1 = substitute(&g1, &images).unwrap();
                let h2 = substitute(&g2, &images).unwrap();
                let jac_h = jacobian_det(&[h1, h2], &ctx).unwrap();
                let jac_f = jacobian_det(&[f1, f2], &ctx).unwrap();
                let jac_g = jacobian_det(&[g1, g2], &mid).unwrap();
                let jac_g_pulled = substitute(&jac_g, &images).unwrap();
                prop_assert_eq!(jac_h, jac_g_pulled.mul(&jac_f).unwrap());
            }
        }
    }
}
