//! Finitely generated totally ordered abelian groups, modeled as `Q^d` with
//! the lexicographic order.
//!
//! Under the lex order every prefix-zero coordinate block is a convex
//! subgroup, so rank and rational rank both equal `d`.  Composed value groups
//! are handled through [`CompositionLayout`]: the leading `front` coordinates
//! carry the quotient group, the trailing `back` coordinates the convex
//! subgroup, matching the exact sequence of a composed valuation.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num::{BigRational, Signed, Zero};
use thiserror::Error;

/// Errors raised by group-level operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("layout mismatch: layout is {front}+{back}, element has dimension {got}")]
    LayoutMismatch { front: usize, back: usize, got: usize },
}

/// The order model: `Q^d`, lexicographically ordered.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrderedGroupSpec {
    dimension: usize,
}

impl OrderedGroupSpec {
    /// A lex-ordered `Q^d`. `dimension` must be positive.
    pub fn new(dimension: usize) -> Self {
        assert!(dimension > 0, "group dimension must be positive");
        OrderedGroupSpec { dimension }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// The neutral element.
    pub fn zero(&self) -> GroupElement {
        GroupElement::zero(self.dimension)
    }
}

/// A point of the value group: a vector of exact rationals.
///
/// Equality is coordinate-wise exact equality.  `Ord` compares
/// lexicographically (shorter vectors compare as prefixes; within this crate
/// elements of different dimensions are never mixed in one collection — use
/// [`GroupElement::lex_cmp`] for the checked comparison).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupElement {
    coords: Vec<BigRational>,
}

impl GroupElement {
    pub fn new(coords: Vec<BigRational>) -> Self {
        GroupElement { coords }
    }

    pub fn zero(dimension: usize) -> Self {
        GroupElement {
            coords: vec![BigRational::zero(); dimension],
        }
    }

    /// Axis element `c * e_axis` in dimension `dimension`.
    pub fn axis(dimension: usize, axis: usize, c: BigRational) -> Self {
        let mut coords = vec![BigRational::zero(); dimension];
        coords[axis] = c;
        GroupElement { coords }
    }

    pub fn dimension(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[BigRational] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    /// Strictly positive in the lex order.
    pub fn is_positive(&self) -> bool {
        match self.coords.iter().find(|c| !c.is_zero()) {
            Some(c) => c.is_positive(),
            None => false,
        }
    }

    /// Lexicographic comparison; the first differing coordinate decides.
    pub fn lex_cmp(&self, other: &GroupElement) -> Result<Ordering, GroupError> {
        if self.dimension() != other.dimension() {
            return Err(GroupError::DimensionMismatch {
                expected: self.dimension(),
                got: other.dimension(),
            });
        }
        Ok(self.cmp(other))
    }

    pub fn add(&self, other: &GroupElement) -> Result<GroupElement, GroupError> {
        if self.dimension() != other.dimension() {
            return Err(GroupError::DimensionMismatch {
                expected: self.dimension(),
                got: other.dimension(),
            });
        }
        Ok(GroupElement {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &GroupElement) -> Result<GroupElement, GroupError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> GroupElement {
        GroupElement {
            coords: self.coords.iter().map(|a| -a).collect(),
        }
    }

    pub fn scale(&self, q: &BigRational) -> GroupElement {
        GroupElement {
            coords: self.coords.iter().map(|a| a * q).collect(),
        }
    }
}

impl fmt::Display for GroupElement {
    /// Fully parenthesized tuple of reduced rationals, e.g. `(1/2, -3, 0)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", c)?;
        }
        write!(f, ")")
    }
}

impl FromStr for GroupElement {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let inner = s
            .trim()
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .ok_or_else(|| format!("group element must be parenthesized: {s:?}"))?;
        let coords = inner
            .split(',')
            .map(|part| {
                BigRational::from_str(part.trim())
                    .map_err(|e| format!("bad rational {:?}: {e}", part.trim()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if coords.is_empty() {
            return Err("empty group element".into());
        }
        Ok(GroupElement::new(coords))
    }
}

/// Direct-sum structure of a composed value group: the leading `front`
/// coordinates form the quotient group, the trailing `back` coordinates the
/// convex subgroup.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompositionLayout {
    front: usize,
    back: usize,
}

impl CompositionLayout {
    pub fn new(front: usize, back: usize) -> Self {
        assert!(front > 0 && back > 0, "layout blocks must be nonempty");
        CompositionLayout { front, back }
    }

    pub fn front(&self) -> usize {
        self.front
    }

    pub fn back(&self) -> usize {
        self.back
    }

    pub fn total(&self) -> usize {
        self.front + self.back
    }

    fn check_total(&self, a: &GroupElement) -> Result<(), GroupError> {
        if a.dimension() != self.total() {
            return Err(GroupError::LayoutMismatch {
                front: self.front,
                back: self.back,
                got: a.dimension(),
            });
        }
        Ok(())
    }

    /// The quotient map: keeps the first `front` coordinates.  Elements of the
    /// convex subgroup map to zero.
    pub fn project_quotient(&self, a: &GroupElement) -> Result<GroupElement, GroupError> {
        self.check_total(a)?;
        Ok(GroupElement::new(a.coords[..self.front].to_vec()))
    }

    /// The back block of a full-dimensional element.
    pub fn back_part(&self, a: &GroupElement) -> Result<GroupElement, GroupError> {
        self.check_total(a)?;
        Ok(GroupElement::new(a.coords[self.front..].to_vec()))
    }

    /// Order embedding of the convex subgroup: pads `front` leading zeros.
    pub fn include_subgroup(&self, a: &GroupElement) -> Result<GroupElement, GroupError> {
        if a.dimension() != self.back {
            return Err(GroupError::LayoutMismatch {
                front: self.front,
                back: self.back,
                got: a.dimension(),
            });
        }
        let mut coords = vec![BigRational::zero(); self.front];
        coords.extend(a.coords.iter().cloned());
        Ok(GroupElement::new(coords))
    }
}

/// Dimension of the `Q`-span of the given elements.
pub fn rational_rank(elements: &[GroupElement]) -> usize {
    if elements.is_empty() {
        return 0;
    }
    let dim = elements[0].dimension();
    let mut basis: Vec<Vec<BigRational>> = Vec::new();
    for e in elements {
        assert_eq!(e.dimension(), dim, "mixed dimensions in rank computation");
        let mut v = e.coords().to_vec();
        for b in &basis {
            // b is normalized with leading 1 at its pivot
            let pivot = b.iter().position(|c| !c.is_zero()).expect("nonzero row");
            if !v[pivot].is_zero() {
                let factor = v[pivot].clone();
                for (vi, bi) in v.iter_mut().zip(b) {
                    let delta = &factor * bi;
                    *vi = &*vi - delta;
                }
            }
        }
        if let Some(pivot) = v.iter().position(|c| !c.is_zero()) {
            let inv = v[pivot].recip();
            for vi in v.iter_mut() {
                *vi = &*vi * &inv;
            }
            basis.push(v);
            basis.sort_by_key(|row| row.iter().position(|c| !c.is_zero()).unwrap());
        }
    }
    basis.len()
}

/// Solves `sum_i x_i * cols[i] = target` exactly over the rationals.
///
/// Returns `None` when the system has no solution.  Used to express a value
/// in the `Q`-span of independent basis weights; with `cols.len()` equal to
/// the dimension and independent columns the solution is unique.
pub fn solve_in_span(cols: &[GroupElement], target: &GroupElement) -> Option<Vec<BigRational>> {
    let rows = target.dimension();
    let n = cols.len();
    if cols.iter().any(|c| c.dimension() != rows) {
        return None;
    }
    // Gaussian elimination on the augmented matrix [cols | target].
    let mut m: Vec<Vec<BigRational>> = (0..rows)
        .map(|r| {
            let mut row: Vec<BigRational> = cols.iter().map(|c| c.coords[r].clone()).collect();
            row.push(target.coords[r].clone());
            row
        })
        .collect();
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; n];
    let mut next_row = 0;
    for col in 0..n {
        let Some(p) = (next_row..rows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(next_row, p);
        let inv = m[next_row][col].recip();
        for v in m[next_row].iter_mut() {
            *v = &*v * &inv;
        }
        for r in 0..rows {
            if r != next_row && !m[r][col].is_zero() {
                let factor = m[r][col].clone();
                for c in 0..=n {
                    let delta = &factor * &m[next_row][c];
                    m[r][c] = &m[r][c] - delta;
                }
            }
        }
        pivot_of_col[col] = Some(next_row);
        next_row += 1;
        if next_row == rows {
            break;
        }
    }
    // Inconsistent if a zero row has nonzero target entry.
    for r in 0..rows {
        if m[r][..n].iter().all(Zero::is_zero) && !m[r][n].is_zero() {
            return None;
        }
    }
    let mut solution = vec![BigRational::zero(); n];
    for (col, pivot) in pivot_of_col.iter().enumerate() {
        if let Some(r) = *pivot {
            solution[col] = m[r][n].clone();
        }
    }
    // Verify: free columns were set to zero, so check the combination.
    let mut acc = GroupElement::zero(rows);
    for (x, c) in solution.iter().zip(cols) {
        acc = acc.add(&c.scale(x)).expect("dimensions checked");
    }
    if &acc == target {
        Some(solution)
    } else {
        None
    }
}
