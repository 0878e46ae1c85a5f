//! Shared corpus generators for the integration suites: seeded random
//! rationals, sparse polynomials, rational functions and adapted valuations.

#![allow(dead_code)]

use std::collections::BTreeMap;

use num::{BigRational, One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use abhyankar::group::GroupElement;
use abhyankar::poly::{Monomial, Polynomial, RationalFunction, VariableContext};
use abhyankar::valuation::ValuationSpec;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn q(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

pub fn qd(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

pub fn el(cs: &[i64]) -> GroupElement {
    GroupElement::new(cs.iter().map(|&n| q(n)).collect())
}

pub fn ctx_n(n: usize) -> VariableContext {
    VariableContext::new((1..=n).map(|i| format!("x{i}")).collect::<Vec<_>>())
}

pub fn rand_rational(rng: &mut ChaCha8Rng) -> BigRational {
    let n = rng.gen_range(-6i64..7);
    let d = rng.gen_range(1i64..5);
    BigRational::new(n.into(), d.into())
}

pub fn rand_positive_rational(rng: &mut ChaCha8Rng) -> BigRational {
    let n = rng.gen_range(1i64..7);
    let d = rng.gen_range(1i64..5);
    BigRational::new(n.into(), d.into())
}

/// Random sparse polynomial with nonnegative integer exponents.
pub fn rand_poly(ctx: &VariableContext, rng: &mut ChaCha8Rng, max_terms: usize) -> Polynomial {
    let terms = rng.gen_range(1..=max_terms);
    let mut p = Polynomial::zero(ctx);
    for _ in 0..terms {
        let m = Monomial::from_exponents(
            (0..ctx.len()).map(|v| (v, q(rng.gen_range(0i64..4)))),
        );
        let mut c = rand_rational(rng);
        if c.is_zero() {
            c = BigRational::one();
        }
        p = p
            .add(&Polynomial::term(ctx, m, c))
            .expect("same context");
    }
    if p.is_zero() {
        Polynomial::one(ctx)
    } else {
        p
    }
}

/// Random polynomial with a nonzero constant term (a unit at the origin for
/// any nonnegative-weight valuation).
pub fn rand_unit_poly(ctx: &VariableContext, rng: &mut ChaCha8Rng, max_terms: usize) -> Polynomial {
    let mut p = Polynomial::constant(ctx, BigRational::one());
    let terms = rng.gen_range(0..max_terms);
    for _ in 0..terms {
        let m = Monomial::from_exponents(
            (0..ctx.len()).map(|v| (v, q(rng.gen_range(0i64..3)))),
        );
        if m.is_one() {
            continue;
        }
        p = p
            .add(&Polynomial::term(ctx, m, rand_rational(rng)))
            .expect("same context");
    }
    if p.as_constant().map_or(false, |c| c.is_zero()) {
        Polynomial::one(ctx)
    } else {
        p
    }
}

/// Random nonzero rational function, quotient of two sparse polynomials.
pub fn rand_rf(ctx: &VariableContext, rng: &mut ChaCha8Rng) -> RationalFunction {
    let num = rand_poly(ctx, rng, 4);
    let den = rand_poly(ctx, rng, 3);
    RationalFunction::new(num, den).expect("nonzero denominator")
}

/// Random adapted spec on `ctx`: a random nonempty basis subset with
/// positive diagonal weights on permuted axes.
pub fn rand_adapted_spec(ctx: &VariableContext, rng: &mut ChaCha8Rng) -> ValuationSpec {
    rand_adapted_spec_sized(ctx, rng, 1..=ctx.len())
}

/// Random adapted spec with basis size drawn from the given range.
pub fn rand_adapted_spec_sized(
    ctx: &VariableContext,
    rng: &mut ChaCha8Rng,
    sizes: std::ops::RangeInclusive<usize>,
) -> ValuationSpec {
    let size = rng.gen_range(sizes);
    let mut vars: Vec<usize> = (0..ctx.len()).collect();
    vars.shuffle(rng);
    let basis_vars: Vec<usize> = vars[..size].to_vec();
    let mut axes: Vec<usize> = (0..size).collect();
    axes.shuffle(rng);
    let mut weights = BTreeMap::new();
    for (slot, &var) in basis_vars.iter().enumerate() {
        weights.insert(
            ctx.name(var).to_string(),
            GroupElement::axis(size, axes[slot], rand_positive_rational(rng)),
        );
    }
    ValuationSpec::monomial(ctx.clone(), weights).expect("diagonal weights are adapted")
}

/// The variable `name` as a rational function.
pub fn var(ctx: &VariableContext, name: &str) -> RationalFunction {
    RationalFunction::variable(ctx, name).expect("declared variable")
}
