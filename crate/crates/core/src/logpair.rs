//! Log pairs on affine coordinate models and their discrepancy invariants.
//!
//! The ambient model is a fixed affine chart with the coordinate volume form
//! as reference, so `K^w0 = 0` and the log discrepancy of a pair `(X, D)` at
//! a place is `v(w0) - v(D)`.  Divisors are formal rational combinations of
//! user-supplied functions, not prime decompositions; the user supplies
//! adapted coordinates, exactly what a log resolution guarantees to exist.
//!
//! Boundary coefficients are rationals.  Irrational coefficients would force
//! inexact order decisions, so they are out of scope.

use std::fmt;

use num::{BigRational, One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::form::{constant_ratio, valuate_form, FormError, TopForm};
use crate::group::{GroupElement, GroupError};
use crate::poly::{PolyError, RationalFunction, VariableContext};
use crate::valuation::{Place, ValuationError, ValuationSpec};

/// Errors raised by log-pair computations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PairError {
    #[error("log canonical thresholds need a rank-one place")]
    RankNotOne,
    #[error("threshold divisor has nonpositive value {0}")]
    NonpositiveHValue(GroupElement),
    #[error("discrepancy decomposition failed: {0}")]
    InconsistentSpan(String),
    #[error("not an lc place: {0}")]
    NotLcPlace(String),
    #[error("boundary component {function} has nonzero value {value}; restriction undefined")]
    NonzeroBoundaryValue {
        function: String,
        value: GroupElement,
    },
    #[error(transparent)]
    Valuation(#[from] ValuationError),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// A formal `Q`-combination of principal divisors of nonzero functions.
/// Components concatenate; no canonical merging is performed.
#[derive(Debug, Clone, PartialEq)]
pub struct Divisor {
    components: Vec<(BigRational, RationalFunction)>,
}

impl Divisor {
    pub fn empty() -> Self {
        Divisor {
            components: Vec::new(),
        }
    }

    pub fn new(components: Vec<(BigRational, RationalFunction)>) -> Result<Self, PairError> {
        for (c, h) in &components {
            if c.is_zero() {
                return Err(PairError::InconsistentSpan(
                    "divisor coefficients must be nonzero".to_string(),
                ));
            }
            if h.is_zero() {
                return Err(PairError::Valuation(ValuationError::ZeroFunction));
            }
        }
        Ok(Divisor { components })
    }

    pub fn single(coeff: BigRational, function: RationalFunction) -> Result<Self, PairError> {
        Divisor::new(vec![(coeff, function)])
    }

    pub fn components(&self) -> &[(BigRational, RationalFunction)] {
        &self.components
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// `v(D) = sum_i d_i v(h_i)`.
    pub fn value<P: Place>(&self, place: &P) -> Result<GroupElement, PairError> {
        let mut acc = place.group().zero();
        for (c, h) in &self.components {
            acc = acc.add(&place.value(h)?.scale(c))?;
        }
        Ok(acc)
    }
}

impl fmt::Display for Divisor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.components.is_empty() {
            return write!(f, "0");
        }
        for (i, (c, h)) in self.components.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}*div({h})")?;
        }
        Ok(())
    }
}

/// An affine log pair: the coordinate model plus a boundary divisor.
#[derive(Debug, Clone, PartialEq)]
pub struct LogPair {
    ctx: VariableContext,
    boundary: Divisor,
}

impl LogPair {
    pub fn new(ctx: VariableContext, boundary: Divisor) -> Result<Self, PairError> {
        for (_, h) in boundary.components() {
            if h.context() != &ctx {
                return Err(PairError::Valuation(ValuationError::ContextMismatch));
            }
        }
        Ok(LogPair { ctx, boundary })
    }

    pub fn context(&self) -> &VariableContext {
        &self.ctx
    }

    pub fn boundary(&self) -> &Divisor {
        &self.boundary
    }

    /// The pair with an extra `r H` added to the boundary.
    pub fn with_scaled(&self, h: &Divisor, r: &BigRational) -> Result<LogPair, PairError> {
        let mut components = self.boundary.components().to_vec();
        for (c, f) in h.components() {
            let scaled = c * r;
            if !scaled.is_zero() {
                components.push((scaled, f.clone()));
            }
        }
        Ok(LogPair {
            ctx: self.ctx.clone(),
            boundary: Divisor { components },
        })
    }
}

/// Log discrepancy `a(X, D, v) = v(w0) - v(K^w0 + D) = v(w0) - v(D)` on the
/// coordinate model.  Independent of the reference form: replacing `w0` by
/// `g w0` shifts both terms by `v(g)`.
pub fn log_discrepancy<P: Place>(pair: &LogPair, place: &P) -> Result<GroupElement, PairError> {
    if place.context() != pair.context() {
        return Err(PairError::Valuation(ValuationError::ContextMismatch));
    }
    let volume_value = valuate_form(&TopForm::volume(pair.context()), place)?;
    Ok(volume_value.sub(&pair.boundary.value(place)?)?)
}

/// Log canonical threshold of `H` with respect to the pair at a rank-one
/// place: the discrepancy is affine in `r`, so the supremum is the exact
/// rational `a(X, D, v) / v(H)`.
pub fn lct<P: Place>(pair: &LogPair, h: &Divisor, place: &P) -> Result<BigRational, PairError> {
    if place.group().dimension() != 1 {
        return Err(PairError::RankNotOne);
    }
    let h_value = h.value(place)?;
    if !h_value.is_positive() {
        return Err(PairError::NonpositiveHValue(h_value));
    }
    let a = log_discrepancy(pair, place)?;
    Ok(&a.coords()[0] / &h_value.coords()[0])
}

/// Writes `a(X, D, v) = sum_i n_i v(t_i)` in the independent basis weights
/// and checks each `n_i` against the per-divisor discrepancy of the axis
/// valuation `v_i` (weight one on `t_i`, zero elsewhere).  A mismatch means
/// the boundary is not adapted to the center and is reported as an error.
pub fn decompose_discrepancy(
    pair: &LogPair,
    spec: &ValuationSpec,
) -> Result<Vec<(String, BigRational)>, PairError> {
    let a = log_discrepancy(pair, spec)?;
    let coefficients = spec
        .coordinates_in_basis(&a)
        .map_err(|_| PairError::InconsistentSpan("value outside the basis span".to_string()))?;
    let mut out = Vec::with_capacity(coefficients.len());
    for (&var, n_i) in spec.basis_vars().iter().zip(&coefficients) {
        let name = pair.context().name(var).to_string();
        let axis = axis_spec(pair.context(), var)?;
        let a_i = log_discrepancy(pair, &axis)?;
        let a_i = a_i.coords()[0].clone();
        if &a_i != n_i {
            return Err(PairError::InconsistentSpan(format!(
                "coefficient {n_i} of {name} differs from the divisorial discrepancy {a_i}; \
                 boundary not adapted to the center"
            )));
        }
        out.push((name, n_i.clone()));
    }
    Ok(out)
}

/// The divisorial spec with weight one on a single variable.
fn axis_spec(ctx: &VariableContext, var: usize) -> Result<ValuationSpec, PairError> {
    let mut weights = std::collections::BTreeMap::new();
    weights.insert(
        ctx.name(var).to_string(),
        GroupElement::new(vec![BigRational::one()]),
    );
    Ok(ValuationSpec::monomial(ctx.clone(), weights)?)
}

/// klt demands `a > 0`, lc demands `a >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeMode {
    Klt,
    Lc,
}

impl fmt::Display for ProbeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProbeMode::Klt => write!(f, "klt"),
            ProbeMode::Lc => write!(f, "lc"),
        }
    }
}

/// A sampled valuation whose discrepancy violates the probed inequality.
#[derive(Debug, Clone)]
pub struct ProbeViolation {
    pub spec: ValuationSpec,
    pub discrepancy: GroupElement,
}

/// Outcome of a [`probe_global`] run.
#[derive(Debug, Clone)]
pub struct ProbeReport {
    pub mode: ProbeMode,
    pub samples: usize,
    pub seed: u64,
    pub violations: Vec<ProbeViolation>,
}

impl ProbeReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ProbeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "probe mode={} samples={} seed={} violations={}",
            self.mode,
            self.samples,
            self.seed,
            self.violations.len()
        )?;
        for v in &self.violations {
            writeln!(f, "  a = {} at {}", v.discrepancy, v.spec)?;
        }
        Ok(())
    }
}

/// Draws random adapted valuations and checks the klt/lc inequality on each.
///
/// The first `n` samples deterministically enumerate the single-axis
/// divisorial valuations (so a planted bad coefficient on a coordinate
/// divisor is always caught); the remaining samples use random basis subsets
/// with random positive diagonal weights.  Sampling is sequential and fully
/// determined by the seed.
pub fn probe_global(
    pair: &LogPair,
    mode: ProbeMode,
    samples: usize,
    seed: u64,
) -> Result<ProbeReport, PairError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = pair.context().len();
    let mut violations = Vec::new();
    for k in 0..samples {
        let spec = if k < n {
            axis_spec(pair.context(), k)?
        } else {
            random_adapted_spec(pair.context(), &mut rng)?
        };
        let a = log_discrepancy(pair, &spec)?;
        let violated = match mode {
            ProbeMode::Klt => !a.is_positive(),
            ProbeMode::Lc => !a.is_positive() && !a.is_zero(),
        };
        if violated {
            violations.push(ProbeViolation {
                spec,
                discrepancy: a,
            });
        }
    }
    Ok(ProbeReport {
        mode,
        samples,
        seed,
        violations,
    })
}

/// A random adapted spec: a random nonempty basis subset with weights
/// `c_i e_(pi(i))` for random positive rationals `c_i` and a random
/// permutation `pi`.
pub fn random_adapted_spec(
    ctx: &VariableContext,
    rng: &mut ChaCha8Rng,
) -> Result<ValuationSpec, PairError> {
    let n = ctx.len();
    let size = rng.gen_range(1..=n);
    let mut vars: Vec<usize> = (0..n).collect();
    vars.shuffle(rng);
    let basis_vars: Vec<usize> = vars[..size].to_vec();
    let mut axes: Vec<usize> = (0..size).collect();
    axes.shuffle(rng);
    let mut weights = std::collections::BTreeMap::new();
    for (slot, &var) in basis_vars.iter().enumerate() {
        let c = BigRational::new(rng.gen_range(1i64..7).into(), rng.gen_range(1i64..5).into());
        weights.insert(
            ctx.name(var).to_string(),
            GroupElement::axis(size, axes[slot], c),
        );
    }
    Ok(ValuationSpec::monomial(ctx.clone(), weights)?)
}

/// Adjunction different on the center `Z = {t = 0}`.
///
/// The boundary must contain each basis variable with total coefficient
/// exactly one (making the place an lc place) and every remaining component
/// must have value zero (so its restriction is defined).  The different is
/// then the same combination of residues on the residue coordinates, using
/// the log reference form `(1/prod t_i) dt ^ dx` upstairs and the coordinate
/// volume form on the center.
pub fn different(pair: &LogPair, spec: &ValuationSpec) -> Result<Divisor, PairError> {
    if spec.context() != pair.context() {
        return Err(PairError::Valuation(ValuationError::ContextMismatch));
    }
    if spec.residue_context().is_none() {
        return Err(PairError::Valuation(ValuationError::NoResidueVariables));
    }
    // Split the boundary: components equal (up to a constant) to a basis
    // variable form the lc part; everything else restricts.
    let mut basis_total: Vec<BigRational> =
        vec![BigRational::zero(); spec.basis_vars().len()];
    let mut rest: Vec<(BigRational, RationalFunction)> = Vec::new();
    'components: for (c, h) in pair.boundary().components() {
        for (slot, &var) in spec.basis_vars().iter().enumerate() {
            let t = RationalFunction::variable(pair.context(), pair.context().name(var))?;
            if constant_ratio(h, &t).is_some() {
                basis_total[slot] += c;
                continue 'components;
            }
        }
        rest.push((c.clone(), h.clone()));
    }
    for (slot, total) in basis_total.iter().enumerate() {
        if !total.is_one() {
            let name = pair
                .context()
                .name(spec.basis_vars()[slot]);
            return Err(PairError::NotLcPlace(format!(
                "basis variable {name} appears in the boundary with coefficient {total}, \
                 expected exactly 1"
            )));
        }
    }
    let mut components = Vec::new();
    for (c, h) in rest {
        let v = spec.value(&h)?;
        if !v.is_zero() {
            return Err(PairError::NonzeroBoundaryValue {
                function: h.to_string(),
                value: v,
            });
        }
        components.push((c, spec.residue(&h)?));
    }
    Ok(Divisor { components })
}

/// Two sides of the adjunction identity, compared exactly.
#[derive(Debug, Clone)]
pub struct AdjunctionReport {
    /// `a(X, D, v o mu)` in the composed value group.
    pub composed_discrepancy: GroupElement,
    /// `a(Z, D_Z, mu)` embedded along the convex subgroup.
    pub center_discrepancy: GroupElement,
    pub equal: bool,
}

/// Checks `a(X, D, v o mu) = a(Z, D_Z, mu)`: the composed discrepancy
/// upstairs against the discrepancy of the different on the center, embedded
/// through the convex-subgroup inclusion.
pub fn adjunction_identity_check(
    pair: &LogPair,
    spec: &ValuationSpec,
    inner: &ValuationSpec,
) -> Result<AdjunctionReport, PairError> {
    let delta_z = different(pair, spec)?;
    let residue_ctx = spec
        .residue_context()
        .ok_or(PairError::Valuation(ValuationError::NoResidueVariables))?;
    let center_pair = LogPair::new(residue_ctx.clone(), delta_z)?;
    let center_a = log_discrepancy(&center_pair, inner)?;

    let composed = ValuationSpec::compose(spec, inner)?;
    let composed_a = log_discrepancy(pair, &composed)?;
    let layout = composed
        .composition()
        .expect("compose records its layout")
        .layout;
    let embedded = layout.include_subgroup(&center_a)?;
    Ok(AdjunctionReport {
        equal: composed_a == embedded,
        composed_discrepancy: composed_a,
        center_discrepancy: embedded,
    })
}
