//! Either kind of valuation a spec file can describe.

use abhyankar::group::{GroupElement, OrderedGroupSpec};
use abhyankar::poly::VariableContext;
use abhyankar::valuation::{Place, QuasiMonomialSpec, ValuationInvariants, ValuationSpec};

/// An adapted spec or a quasi-monomial handle, behind one [`Place`] facade.
pub enum AnyPlace {
    Adapted(ValuationSpec),
    Quasi(QuasiMonomialSpec),
}

impl AnyPlace {
    /// The adapted spec, for operations that need residues or compositions.
    pub fn as_adapted(&self) -> Result<&ValuationSpec, String> {
        match self {
            AnyPlace::Adapted(spec) => Ok(spec),
            AnyPlace::Quasi(_) => Err(
                "valuation: weights are not adapted: this operation needs a spec with \
                 basis/residue lists (rewrite through a chart first)"
                    .to_string(),
            ),
        }
    }
}

impl Place for AnyPlace {
    fn context(&self) -> &VariableContext {
        match self {
            AnyPlace::Adapted(s) => s.context(),
            AnyPlace::Quasi(s) => s.context(),
        }
    }

    fn group(&self) -> &OrderedGroupSpec {
        match self {
            AnyPlace::Adapted(s) => s.group(),
            AnyPlace::Quasi(s) => s.group(),
        }
    }

    fn weight(&self, var: usize) -> &GroupElement {
        match self {
            AnyPlace::Adapted(s) => s.weight(var),
            AnyPlace::Quasi(s) => s.weight(var),
        }
    }

    fn invariants(&self) -> ValuationInvariants {
        match self {
            AnyPlace::Adapted(s) => s.invariants(),
            AnyPlace::Quasi(s) => s.invariants(),
        }
    }
}
