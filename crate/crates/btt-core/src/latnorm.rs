//! Lattices over the valuation ring inside K^r, additive norms presented by
//! an adapting basis with rational values, prevaluations, and the point-level
//! operations on them: sublevel balls, partial order, adaptedness, floor and
//! ceiling, pullback containment, and relative invariant factors.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::field::{Val, ValuedField};
use crate::matrix::{self, LinError, Matrix};

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum LatticeError {
    RankDeficient,
    DimensionMismatch,
    Singular,
    NonIntegralNorm,
    NoCommonBasis,
}

impl fmt::Display for LatticeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LatticeError::RankDeficient => write!(f, "generators do not span the ambient space"),
            LatticeError::DimensionMismatch => write!(f, "rank or dimension mismatch"),
            LatticeError::Singular => write!(f, "basis matrix is singular"),
            LatticeError::NonIntegralNorm => write!(f, "norm has non-integral values"),
            LatticeError::NoCommonBasis => write!(f, "no common adapted basis found"),
        }
    }
}

impl From<LinError> for LatticeError {
    fn from(e: LinError) -> Self {
        match e {
            LinError::Singular => LatticeError::Singular,
            LinError::DimensionMismatch => LatticeError::DimensionMismatch,
        }
    }
}

/// Extended rational value of a norm: finite or infinity (only at 0).
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum NormVal {
    Finite(BigRational),
    Infinity,
}

impl NormVal {
    pub fn finite(&self) -> Option<&BigRational> {
        match self {
            NormVal::Finite(q) => Some(q),
            NormVal::Infinity => None,
        }
    }
}

impl PartialOrd for NormVal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for NormVal {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (NormVal::Infinity, NormVal::Infinity) => Ordering::Equal,
            (NormVal::Infinity, _) => Ordering::Greater,
            (_, NormVal::Infinity) => Ordering::Less,
            (NormVal::Finite(a), NormVal::Finite(b)) => a.cmp(b),
        }
    }
}

/// A full-rank module over the valuation ring, stored in canonical column
/// Hermite form: lower triangular, pivot i in row i an exact uniformizer
/// power, and every entry left of a pivot the canonical coset representative
/// modulo that pivot. Two lattices are equal exactly when their canonical
/// matrices are identical.
#[derive(Clone, PartialEq, Debug)]
pub struct Lattice<F: ValuedField> {
    field: F,
    rank: usize,
    gens: Matrix<F::Elem>,
    pivots: Vec<i64>,
}

impl<F: ValuedField> Eq for Lattice<F> {}

impl<F: ValuedField> PartialOrd for Lattice<F> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<F: ValuedField> Ord for Lattice<F> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.gens.cmp(&other.gens)
    }
}

impl<F: ValuedField> Lattice<F> {
    /// Canonicalizes the module spanned over O by the columns of `gens`.
    pub fn hnf(field: &F, gens: &Matrix<F::Elem>) -> Result<Self, LatticeError> {
        let r = gens.rows();
        let k = gens.cols();
        if k < r {
            return Err(LatticeError::RankDeficient);
        }
        let mut work = gens.clone();
        let mut pivots = Vec::with_capacity(r);
        for i in 0..r {
            let mut best: Option<(usize, i64)> = None;
            for j in i..k {
                if let Val::Finite(v) = field.val(work.at(i, j)) {
                    if best.map_or(true, |(_, bv)| v < bv) {
                        best = Some((j, v));
                    }
                }
            }
            let (pj, pv) = best.ok_or(LatticeError::RankDeficient)?;
            work.swap_cols(i, pj);
            let unit = field
                .div(work.at(i, i), &field.uniformizer_pow(pv))
                .expect("pivot is nonzero");
            let unit_inv = field.inv(&unit).expect("unit is invertible");
            matrix::scale_col(&field.clone(), &mut work, i, &unit_inv);
            for j in i + 1..k {
                if field.is_zero(work.at(i, j)) {
                    continue;
                }
                let c = field
                    .div(work.at(i, j), work.at(i, i))
                    .expect("pivot nonzero");
                let neg_c = field.neg(&c);
                matrix::add_col_multiple(field, &mut work, j, i, &neg_c);
            }
            pivots.push(pv);
        }
        // reduce entries left of each pivot to canonical coset representatives
        for i in 0..r {
            let a = pivots[i];
            for j in 0..i {
                let x = work.at(i, j).clone();
                let rep = field.coset_rep(&x, a);
                let delta = field.sub(&x, &rep);
                if field.is_zero(&delta) {
                    continue;
                }
                let c = field
                    .div(&delta, &field.uniformizer_pow(a))
                    .expect("uniformizer power nonzero");
                let neg_c = field.neg(&c);
                matrix::add_col_multiple(field, &mut work, j, i, &neg_c);
            }
        }
        let gens = Matrix::from_fn(r, r, |i, j| work.at(i, j).clone());
        Ok(Lattice {
            field: field.clone(),
            rank: r,
            gens,
            pivots,
        })
    }

    /// The standard lattice spanned by the unit coordinate vectors.
    pub fn standard(field: &F, rank: usize) -> Self {
        Lattice {
            field: field.clone(),
            rank,
            gens: matrix::identity(field, rank),
            pivots: vec![0; rank],
        }
    }

    /// Lattice spanned by `basis * diag(pi^exps)`.
    pub fn diagonal(
        field: &F,
        basis: &Matrix<F::Elem>,
        exps: &[i64],
    ) -> Result<Self, LatticeError> {
        if basis.rows() != basis.cols() || basis.cols() != exps.len() {
            return Err(LatticeError::DimensionMismatch);
        }
        let mut scaled = basis.clone();
        for (j, &e) in exps.iter().enumerate() {
            matrix::scale_col(field, &mut scaled, j, &field.uniformizer_pow(e));
        }
        Lattice::hnf(field, &scaled)
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn generators(&self) -> &Matrix<F::Elem> {
        &self.gens
    }

    pub fn pivot_exponents(&self) -> &[i64] {
        &self.pivots
    }

    /// Multiply by a power of the uniformizer. Canonical form is preserved
    /// because coset representatives scale compatibly.
    pub fn scaled(&self, k: i64) -> Self {
        let f = &self.field;
        let factor = f.uniformizer_pow(k);
        let gens = Matrix::from_fn(self.rank, self.rank, |i, j| {
            f.mul(self.gens.at(i, j), &factor)
        });
        Lattice {
            field: f.clone(),
            rank: self.rank,
            gens,
            pivots: self.pivots.iter().map(|a| a + k).collect(),
        }
    }

    pub fn member(&self, v: &[F::Elem]) -> Result<bool, LatticeError> {
        if v.len() != self.rank {
            return Err(LatticeError::DimensionMismatch);
        }
        let y = matrix::solve_vec(&self.field, &self.gens, v)?;
        Ok(y.iter().all(|c| self.field.val(c) >= Val::Finite(0)))
    }

    pub fn contains(&self, other: &Lattice<F>) -> Result<bool, LatticeError> {
        if self.rank != other.rank {
            return Err(LatticeError::DimensionMismatch);
        }
        let x = matrix::solve(&self.field, &self.gens, &other.gens)?;
        for i in 0..x.rows() {
            for j in 0..x.cols() {
                if self.field.val(x.at(i, j)) < Val::Finite(0) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    pub fn sum(&self, other: &Lattice<F>) -> Result<Lattice<F>, LatticeError> {
        if self.rank != other.rank {
            return Err(LatticeError::DimensionMismatch);
        }
        Lattice::hnf(&self.field, &self.gens.hstack(&other.gens))
    }

    pub fn intersect(&self, other: &Lattice<F>) -> Result<Lattice<F>, LatticeError> {
        if self.rank != other.rank {
            return Err(LatticeError::DimensionMismatch);
        }
        let f = &self.field;
        let c = matrix::solve(f, &self.gens, &other.gens)?;
        let sm = smith(f, &c)?;
        let mut m = matrix::mul(f, &self.gens, &sm.left);
        for (j, &d) in sm.exponents.iter().enumerate() {
            let e = d.max(0);
            matrix::scale_col(f, &mut m, j, &f.uniformizer_pow(e));
        }
        Lattice::hnf(f, &m)
    }
}

/// Smith reduction over the valuation ring: `m = left * D * right` with
/// `left`, `right` invertible over O and `D` diagonal with uniformizer-power
/// entries, exponents nondecreasing.
pub(crate) struct Smith<F: ValuedField> {
    pub left: Matrix<F::Elem>,
    pub exponents: Vec<i64>,
    pub right: Matrix<F::Elem>,
}

pub(crate) fn smith<F: ValuedField>(f: &F, m: &Matrix<F::Elem>) -> Result<Smith<F>, LatticeError> {
    let rows = m.rows();
    let cols = m.cols();
    if cols > rows {
        return Err(LatticeError::RankDeficient);
    }
    let mut work = m.clone();
    let mut left = matrix::identity(f, rows);
    let mut right = matrix::identity(f, cols);
    let mut exponents = Vec::with_capacity(cols);
    for i in 0..cols {
        let mut best: Option<(usize, usize, i64)> = None;
        for r in i..rows {
            for c in i..cols {
                if let Val::Finite(v) = f.val(work.at(r, c)) {
                    if best.map_or(true, |(_, _, bv)| v < bv) {
                        best = Some((r, c, v));
                    }
                }
            }
        }
        let (pr, pc, d) = best.ok_or(LatticeError::RankDeficient)?;
        work.swap_rows(i, pr);
        left.swap_cols(i, pr);
        work.swap_cols(i, pc);
        right.swap_rows(i, pc);
        let unit = f
            .div(work.at(i, i), &f.uniformizer_pow(d))
            .expect("pivot nonzero");
        let unit_inv = f.inv(&unit).expect("unit invertible");
        matrix::scale_row(f, &mut work, i, &unit_inv);
        matrix::scale_col(f, &mut left, i, &unit);
        for c in i + 1..cols {
            if f.is_zero(work.at(i, c)) {
                continue;
            }
            let q = f.div(work.at(i, c), work.at(i, i)).expect("pivot nonzero");
            let neg_q = f.neg(&q);
            matrix::add_col_multiple(f, &mut work, c, i, &neg_q);
            matrix::add_row_multiple(f, &mut right, i, c, &q);
        }
        for r in i + 1..rows {
            if f.is_zero(work.at(r, i)) {
                continue;
            }
            let q = f.div(work.at(r, i), work.at(i, i)).expect("pivot nonzero");
            let neg_q = f.neg(&q);
            matrix::add_row_multiple(f, &mut work, r, i, &neg_q);
            matrix::add_col_multiple(f, &mut left, i, r, &q);
        }
        exponents.push(d);
    }
    Ok(Smith {
        left,
        exponents,
        right,
    })
}

/// Relative elementary-divisor exponents of a pair of lattices, weakly
/// decreasing. Invariant under changing the O-basis of either lattice.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct InvariantFactors {
    pub exponents: Vec<i64>,
}

/// Computes invariant factors together with a witness basis: columns g_i
/// form an O-basis of `a` such that the columns pi^{e_i} g_i form an
/// O-basis of `b`.
pub fn invariant_factors<F: ValuedField>(
    a: &Lattice<F>,
    b: &Lattice<F>,
) -> Result<(InvariantFactors, Matrix<F::Elem>), LatticeError> {
    if a.rank() != b.rank() {
        return Err(LatticeError::DimensionMismatch);
    }
    let f = a.field();
    let c = matrix::solve(f, a.generators(), b.generators())?;
    let sm = smith(f, &c)?;
    let basis = matrix::mul(f, a.generators(), &sm.left);
    let mut order: Vec<usize> = (0..sm.exponents.len()).collect();
    order.sort_by_key(|&i| core::cmp::Reverse(sm.exponents[i]));
    let exponents: Vec<i64> = order.iter().map(|&i| sm.exponents[i]).collect();
    let basis = basis.submatrix_cols(&order);
    Ok((InvariantFactors { exponents }, basis))
}

pub fn frac_part(x: &BigRational) -> BigRational {
    x - x.floor()
}

pub fn ceil_to_i64(x: &BigRational) -> i64 {
    x.ceil().to_integer().to_i64().expect("exponent fits i64")
}

pub fn floor_to_i64(x: &BigRational) -> i64 {
    x.floor().to_integer().to_i64().expect("exponent fits i64")
}

/// An additive norm presented by an adapting basis and rational values on
/// its columns: the norm of a vector is the minimum of val(coefficient) +
/// value over the basis expansion. Distinct presentations may define the
/// same norm; semantic equality is `norm_equal`, never structural.
#[derive(Clone, Debug)]
pub struct AdaptedNorm<F: ValuedField> {
    field: F,
    basis: Matrix<F::Elem>,
    basis_inv: Matrix<F::Elem>,
    values: Vec<BigRational>,
}

impl<F: ValuedField> AdaptedNorm<F> {
    pub fn new(
        field: &F,
        basis: Matrix<F::Elem>,
        values: Vec<BigRational>,
    ) -> Result<Self, LatticeError> {
        if basis.rows() != basis.cols() || basis.cols() != values.len() {
            return Err(LatticeError::DimensionMismatch);
        }
        let basis_inv = matrix::inverse(field, &basis).map_err(|_| LatticeError::Singular)?;
        Ok(AdaptedNorm {
            field: field.clone(),
            basis,
            basis_inv,
            values,
        })
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn rank(&self) -> usize {
        self.values.len()
    }

    pub fn basis(&self) -> &Matrix<F::Elem> {
        &self.basis
    }

    pub fn values(&self) -> &[BigRational] {
        &self.values
    }

    pub fn is_integral(&self) -> bool {
        self.values.iter().all(|v| v.denom().is_one())
    }

    pub fn eval(&self, e: &[F::Elem]) -> NormVal {
        assert_eq!(e.len(), self.rank());
        let coords = matrix::mul_vec(&self.field, &self.basis_inv, e);
        let mut best: Option<BigRational> = None;
        for (c, value) in coords.iter().zip(&self.values) {
            if let Val::Finite(v) = self.field.val(c) {
                let total = BigRational::from(BigInt::from(v)) + value;
                if best.as_ref().map_or(true, |b| total < *b) {
                    best = Some(total);
                }
            }
        }
        match best {
            Some(q) => NormVal::Finite(q),
            None => NormVal::Infinity,
        }
    }

    /// Sublevel lattice { e : v(e) >= t }.
    pub fn ball(&self, t: &BigRational) -> Lattice<F> {
        let exps: Vec<i64> = self.values.iter().map(|c| ceil_to_i64(&(t - c))).collect();
        Lattice::diagonal(&self.field, &self.basis, &exps).expect("adapting basis is invertible")
    }

    pub fn floor(&self) -> AdaptedNorm<F> {
        self.map_values(|v| v.floor())
    }

    pub fn ceil(&self) -> AdaptedNorm<F> {
        self.map_values(|v| v.ceil())
    }

    pub fn shift(&self, c: &BigRational) -> AdaptedNorm<F> {
        self.map_values(|v| v + c)
    }

    fn map_values(&self, f: impl Fn(&BigRational) -> BigRational) -> AdaptedNorm<F> {
        AdaptedNorm {
            field: self.field.clone(),
            basis: self.basis.clone(),
            basis_inv: self.basis_inv.clone(),
            values: self.values.iter().map(f).collect(),
        }
    }

    /// Threshold fractional parts of both norms lifted to [0, 1); one period
    /// suffices because ball(t + 1) = pi * ball(t).
    fn thresholds(norms: &[&AdaptedNorm<F>]) -> Vec<BigRational> {
        let mut ts: Vec<BigRational> = vec![BigRational::zero()];
        for n in norms {
            for v in &n.values {
                let fp = frac_part(v);
                if !ts.contains(&fp) {
                    ts.push(fp);
                }
            }
        }
        ts.sort();
        ts
    }

    /// Pointwise order: self(e) <= other(e) for all e. Decided by comparing
    /// sublevel balls at finitely many thresholds in one period.
    pub fn leq(&self, other: &AdaptedNorm<F>) -> Result<bool, LatticeError> {
        if self.rank() != other.rank() {
            return Err(LatticeError::DimensionMismatch);
        }
        for t in Self::thresholds(&[self, other]) {
            if !other.ball(&t).contains(&self.ball(&t))? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn norm_equal(&self, other: &AdaptedNorm<F>) -> Result<bool, LatticeError> {
        Ok(self.leq(other)? && other.leq(self)?)
    }

    /// Whether the norm is adapted to the candidate basis: every sublevel
    /// ball in one period must equal the diagonal lattice built from the
    /// norm's values on the candidate columns.
    pub fn is_adapted(&self, basis: &Matrix<F::Elem>) -> Result<bool, LatticeError> {
        if basis.rows() != self.rank() || basis.cols() != self.rank() {
            return Err(LatticeError::DimensionMismatch);
        }
        matrix::inverse(&self.field, basis).map_err(|_| LatticeError::Singular)?;
        let mut cand_values = Vec::with_capacity(self.rank());
        for j in 0..self.rank() {
            match self.eval(&basis.col(j)) {
                NormVal::Finite(q) => cand_values.push(q),
                NormVal::Infinity => return Err(LatticeError::Singular),
            }
        }
        let mut ts = Self::thresholds(&[self]);
        for v in &cand_values {
            let fp = frac_part(v);
            if !ts.contains(&fp) {
                ts.push(fp);
            }
        }
        for t in ts {
            let exps: Vec<i64> = cand_values.iter().map(|c| ceil_to_i64(&(&t - c))).collect();
            let diag = Lattice::diagonal(&self.field, basis, &exps)?;
            if self.ball(&t) != diag {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// The integral norm of a lattice: value 0 on every canonical generator.
pub fn norm_from_lattice<F: ValuedField>(l: &Lattice<F>) -> AdaptedNorm<F> {
    AdaptedNorm::new(
        l.field(),
        l.generators().clone(),
        vec![BigRational::zero(); l.rank()],
    )
    .expect("canonical generators are invertible")
}

/// The sublevel lattice at 0 of an integral norm; inverse to
/// `norm_from_lattice`.
pub fn lattice_from_norm<F: ValuedField>(v: &AdaptedNorm<F>) -> Result<Lattice<F>, LatticeError> {
    if !v.is_integral() {
        return Err(LatticeError::NonIntegralNorm);
    }
    Ok(v.ball(&BigRational::zero()))
}

/// A basis diagonalizing both lattices at once, with the relative exponents.
pub fn common_basis_of_pair<F: ValuedField>(
    a: &Lattice<F>,
    b: &Lattice<F>,
) -> Result<(Vec<i64>, Matrix<F::Elem>), LatticeError> {
    let (inv, basis) = invariant_factors(a, b)?;
    Ok((inv.exponents, basis))
}

/// A basis adapted to both norms. Exact for integral values (the witness
/// basis of the invariant factors of the two unit balls works). Non-integral
/// inputs are scaled to integral data first and the result is verified
/// against the originals; if verification fails the search is reported as
/// unsuccessful rather than returning an unchecked basis.
pub fn common_adapted_basis<F: ValuedField>(
    v: &AdaptedNorm<F>,
    w: &AdaptedNorm<F>,
) -> Result<Matrix<F::Elem>, LatticeError> {
    if v.rank() != w.rank() {
        return Err(LatticeError::DimensionMismatch);
    }
    let mut denom = BigInt::one();
    for q in v.values().iter().chain(w.values()) {
        denom = num_integer::Integer::lcm(&denom, q.denom());
    }
    let scale = BigRational::from(denom);
    let (vi, wi) = if scale.is_one() {
        (v.clone(), w.clone())
    } else {
        (v.map_values(|q| q * &scale), w.map_values(|q| q * &scale))
    };
    let la = lattice_from_norm(&vi)?;
    let lb = lattice_from_norm(&wi)?;
    let (_, basis) = common_basis_of_pair(&la, &lb)?;
    if v.is_adapted(&basis)? && w.is_adapted(&basis)? {
        Ok(basis)
    } else {
        Err(LatticeError::NoCommonBasis)
    }
}

/// Whether the linear map sends the unit ball of `v` into the unit ball of
/// `w`; for integral norms this is equivalent to v(e) <= w(F e) for all e.
pub fn pullback_check<F: ValuedField>(
    f: &F,
    map: &Matrix<F::Elem>,
    v: &AdaptedNorm<F>,
    w: &AdaptedNorm<F>,
) -> Result<bool, LatticeError> {
    if map.cols() != v.rank() || map.rows() != w.rank() {
        return Err(LatticeError::DimensionMismatch);
    }
    if !v.is_integral() || !w.is_integral() {
        return Err(LatticeError::NonIntegralNorm);
    }
    let lv = v.ball(&BigRational::zero());
    let lw = w.ball(&BigRational::zero());
    let image = matrix::mul(f, map, lv.generators());
    let coords = matrix::solve(f, lw.generators(), &image)?;
    for i in 0..coords.rows() {
        for j in 0..coords.cols() {
            if f.val(coords.at(i, j)) < Val::Finite(0) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// A norm-like function constant on scalar multiples: value of a vector is
/// the minimum of the basis values over its nonzero coordinates. Its level
/// sets form a flag of coordinate subspaces of the basis.
#[derive(Clone, Debug)]
pub struct Prevaluation<F: ValuedField> {
    field: F,
    basis: Matrix<F::Elem>,
    basis_inv: Matrix<F::Elem>,
    values: Vec<BigRational>,
}

impl<F: ValuedField> Prevaluation<F> {
    pub fn new(
        field: &F,
        basis: Matrix<F::Elem>,
        values: Vec<BigRational>,
    ) -> Result<Self, LatticeError> {
        if basis.rows() != basis.cols() || basis.cols() != values.len() {
            return Err(LatticeError::DimensionMismatch);
        }
        let basis_inv = matrix::inverse(field, &basis).map_err(|_| LatticeError::Singular)?;
        Ok(Prevaluation {
            field: field.clone(),
            basis,
            basis_inv,
            values,
        })
    }

    pub fn rank(&self) -> usize {
        self.values.len()
    }

    pub fn basis(&self) -> &Matrix<F::Elem> {
        &self.basis
    }

    pub fn values(&self) -> &[BigRational] {
        &self.values
    }

    pub fn eval(&self, e: &[F::Elem]) -> NormVal {
        assert_eq!(e.len(), self.rank());
        let coords = matrix::mul_vec(&self.field, &self.basis_inv, e);
        let mut best: Option<BigRational> = None;
        for (c, value) in coords.iter().zip(&self.values) {
            if !self.field.is_zero(c) && best.as_ref().map_or(true, |b| value < b) {
                best = Some(value.clone());
            }
        }
        match best {
            Some(q) => NormVal::Finite(q),
            None => NormVal::Infinity,
        }
    }

    /// Distinct level subspaces { e : v(e) >= a } for descending a, starting
    /// with the top (smallest, nonzero) one and ending with the whole space.
    /// Each is returned as (level, canonical column-space basis).
    pub fn flag(&self) -> Vec<(BigRational, Matrix<F::Elem>)> {
        let mut levels: Vec<BigRational> = self.values.clone();
        levels.sort();
        levels.dedup();
        levels.reverse();
        let mut out = Vec::new();
        for a in levels {
            let keep: Vec<usize> = (0..self.rank()).filter(|&i| self.values[i] >= a).collect();
            let sub = self.basis.submatrix_cols(&keep);
            out.push((a, matrix::column_space_canonical(&self.field, &sub)));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{LaurentField, PAdicField};
    use crate::testsupport::{rand_invertible, rand_lattice, rand_norm, rand_vector, Rng};

    type Q2 = PAdicField;

    fn q2() -> Q2 {
        PAdicField::new(2).unwrap()
    }

    fn m(f: &Q2, rows: &[&[i64]]) -> Matrix<BigRational> {
        Matrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| f.from_i64(x)).collect())
                .collect(),
        )
    }

    fn mq(f: &Q2, rows: &[&[(i64, i64)]]) -> Matrix<BigRational> {
        Matrix::from_rows(
            rows.iter()
                .map(|r| {
                    r.iter()
                        .map(|&(n, d)| f.div(&f.from_i64(n), &f.from_i64(d)).unwrap())
                        .collect()
                })
                .collect(),
        )
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn hnf_standard_span() {
        let f = q2();
        let gens = m(&f, &[&[1, 0, 1], &[0, 1, 1]]);
        let l = Lattice::hnf(&f, &gens).unwrap();
        assert_eq!(l, Lattice::standard(&f, 2));
    }

    #[test]
    fn hnf_canonical_and_idempotent() {
        let f = q2();
        // columns (2,0), (1,1)
        let gens = m(&f, &[&[2, 1], &[0, 1]]);
        let l = Lattice::hnf(&f, &gens).unwrap();
        assert_eq!(l.generators(), &m(&f, &[&[1, 0], &[1, 2]]));
        assert_eq!(l.pivot_exponents(), &[0, 1]);
        let again = Lattice::hnf(&f, l.generators()).unwrap();
        assert_eq!(l, again);
    }

    #[test]
    fn hnf_reduces_left_entries() {
        let f = q2();
        // columns (4,2), (0,1) span the same lattice as (4,0), (0,1)
        let gens = m(&f, &[&[4, 0], &[2, 1]]);
        let l = Lattice::hnf(&f, &gens).unwrap();
        assert_eq!(l.generators(), &m(&f, &[&[4, 0], &[0, 1]]));
        let l2 = Lattice::hnf(&f, &m(&f, &[&[4, 0, 4], &[0, 1, 2]])).unwrap();
        assert_eq!(l, l2);
    }

    #[test]
    fn hnf_rejects_rank_deficient() {
        let f = q2();
        let gens = m(&f, &[&[1, 2], &[2, 4]]);
        assert_eq!(Lattice::hnf(&f, &gens), Err(LatticeError::RankDeficient));
    }

    #[test]
    fn hnf_membership_oracle() {
        // canonical form preserves the span: check +-generators of the input
        // solve over O in the output and vice versa
        let f = q2();
        let mut rng = Rng::new(7);
        for _ in 0..40 {
            let l = rand_lattice(&f, 3, &mut rng);
            let u = crate::testsupport::rand_gl_o(&f, 3, &mut rng);
            let other = Lattice::hnf(&f, &matrix::mul(&f, l.generators(), &u)).unwrap();
            assert_eq!(l, other, "canonical form is GL(O)-invariant");
            for j in 0..3 {
                assert!(l.member(&other.generators().col(j)).unwrap());
            }
        }
    }

    #[test]
    fn contains_sum_intersect_diagonal() {
        let f = q2();
        let a = Lattice::diagonal(&f, &matrix::identity(&f, 2), &[1, 0]).unwrap();
        let b = Lattice::diagonal(&f, &matrix::identity(&f, 2), &[0, 1]).unwrap();
        let std = Lattice::standard(&f, 2);
        assert!(std.contains(&a).unwrap());
        assert!(!a.contains(&std).unwrap());
        assert_eq!(a.sum(&b).unwrap(), std);
        let both = Lattice::diagonal(&f, &matrix::identity(&f, 2), &[1, 1]).unwrap();
        assert_eq!(a.intersect(&b).unwrap(), both);
    }

    #[test]
    fn intersect_matches_membership_sampling() {
        let f = q2();
        let a = Lattice::standard(&f, 2);
        let b = Lattice::hnf(&f, &mq(&f, &[&[(1, 1), (0, 1)], &[(1, 1), (1, 2)]])).unwrap();
        let cap = a.intersect(&b).unwrap();
        let mut rng = Rng::new(11);
        for _ in 0..500 {
            let v = rand_vector(&f, 2, &mut rng);
            let inside = a.member(&v).unwrap() && b.member(&v).unwrap();
            assert_eq!(cap.member(&v).unwrap(), inside);
        }
    }

    #[test]
    fn norm_eval_examples() {
        let f = q2();
        let std = AdaptedNorm::new(&f, matrix::identity(&f, 2), vec![q(0, 1), q(0, 1)]).unwrap();
        assert_eq!(std.eval(&[f.one(), f.one()]), NormVal::Finite(q(0, 1)));
        let v = AdaptedNorm::new(&f, matrix::identity(&f, 2), vec![q(1, 2), q(0, 1)]).unwrap();
        assert_eq!(v.eval(&[f.from_i64(2), f.zero()]), NormVal::Finite(q(3, 2)));
        // basis {b1, b1+b2}: b2 = -b1 + (b1+b2) has norm min(0,0) = 0
        let basis = m(&f, &[&[1, 1], &[0, 1]]);
        let w = AdaptedNorm::new(&f, basis, vec![q(0, 1), q(0, 1)]).unwrap();
        assert_eq!(w.eval(&[f.zero(), f.one()]), NormVal::Finite(q(0, 1)));
        assert_eq!(w.eval(&[f.zero(), f.zero()]), NormVal::Infinity);
    }

    #[test]
    fn ball_examples_and_periodicity() {
        let f = q2();
        let v = AdaptedNorm::new(&f, matrix::identity(&f, 2), vec![q(1, 2), q(0, 1)]).unwrap();
        assert_eq!(v.ball(&q(0, 1)), Lattice::standard(&f, 2));
        assert_eq!(
            v.ball(&q(3, 4)),
            Lattice::diagonal(&f, &matrix::identity(&f, 2), &[1, 1]).unwrap()
        );
        let mut rng = Rng::new(3);
        for _ in 0..20 {
            let n = rand_norm(&f, 3, &mut rng);
            let t = q(rng.range(-4, 5), 1 + rng.range(0, 3).abs());
            assert_eq!(n.ball(&(&t + q(1, 1))), n.ball(&t).scaled(1));
        }
    }

    #[test]
    fn lattice_norm_round_trip() {
        let f = q2();
        let diag21 = Lattice::diagonal(&f, &matrix::identity(&f, 2), &[1, 0]).unwrap();
        let v = norm_from_lattice(&diag21);
        // direct search oracle for the norm value of e1
        let e1 = [f.one(), f.zero()];
        let mut oracle = None;
        for k in (-10..=10).rev() {
            let scaled: Vec<_> = e1
                .iter()
                .map(|x| f.mul(x, &f.uniformizer_pow(-k)))
                .collect();
            if diag21.member(&scaled).unwrap() {
                oracle = Some(k);
                break;
            }
        }
        assert_eq!(oracle, Some(-1));
        assert_eq!(v.eval(&e1), NormVal::Finite(q(-1, 1)));
        assert_eq!(lattice_from_norm(&v).unwrap(), diag21);

        let mut rng = Rng::new(23);
        for _ in 0..30 {
            let l = rand_lattice(&f, 3, &mut rng);
            assert_eq!(lattice_from_norm(&norm_from_lattice(&l)).unwrap(), l);
        }
        let lf = LaurentField::new();
        let mut rng = Rng::new(5);
        for _ in 0..10 {
            let l = rand_lattice(&lf, 2, &mut rng);
            assert_eq!(lattice_from_norm(&norm_from_lattice(&l)).unwrap(), l);
        }
    }

    #[test]
    fn non_integral_norm_rejected() {
        let f = q2();
        let v = AdaptedNorm::new(&f, matrix::identity(&f, 2), vec![q(1, 2), q(0, 1)]).unwrap();
        assert_eq!(lattice_from_norm(&v), Err(LatticeError::NonIntegralNorm));
    }

    #[test]
    fn floor_ceil_examples() {
        let f = q2();
        let v = AdaptedNorm::new(&f, matrix::identity(&f, 2), vec![q(1, 2), q(0, 1)]).unwrap();
        assert_eq!(v.ceil().values(), &[q(1, 1), q(0, 1)]);
        assert_eq!(v.floor().values(), &[q(0, 1), q(0, 1)]);
        let w = AdaptedNorm::new(&f, matrix::identity(&f, 2), vec![q(3, 1), q(-2, 1)]).unwrap();
        assert_eq!(w.ceil().values(), w.values());
        assert_eq!(w.floor().values(), w.values());
        let u = AdaptedNorm::new(&f, matrix::identity(&f, 2), vec![q(-1, 3), q(5, 2)]).unwrap();
        assert_eq!(u.ceil().values(), &[q(0, 1), q(3, 1)]);
        assert!(v.floor().leq(&v).unwrap());
        assert!(v.leq(&v.ceil()).unwrap());
    }

    #[test]
    fn norm_leq_examples() {
        let f = q2();
        let id = matrix::identity(&f, 2);
        let v = AdaptedNorm::new(&f, id.clone(), vec![q(0, 1), q(0, 1)]).unwrap();
        let w = AdaptedNorm::new(&f, id.clone(), vec![q(1, 1), q(1, 1)]).unwrap();
        assert!(v.leq(&w).unwrap());
        assert!(!w.leq(&v).unwrap());
        // the norm of the smaller lattice 2*standard is pointwise smaller
        let std = Lattice::standard(&f, 2);
        let vstd = norm_from_lattice(&std);
        let vtwo = norm_from_lattice(&std.scaled(1));
        assert!(vtwo.leq(&vstd).unwrap());
        assert!(!vstd.leq(&vtwo).unwrap());
    }

    #[test]
    fn norm_leq_matches_pointwise_sampling() {
        let f = q2();
        let mut rng = Rng::new(17);
        for _ in 0..60 {
            let v = rand_norm(&f, 2, &mut rng);
            let w = rand_norm(&f, 2, &mut rng);
            let verdict = v.leq(&w).unwrap();
            let mut sampled = true;
            for _ in 0..200 {
                let e = rand_vector(&f, 2, &mut rng);
                if v.eval(&e) > w.eval(&e) {
                    sampled = false;
                    break;
                }
            }
            if verdict {
                assert!(sampled, "leq says true but sampling found a violation");
            }
            if !sampled {
                assert!(!verdict);
            }
        }
    }

    #[test]
    fn norm_equal_examples() {
        let f = q2();
        let id = matrix::identity(&f, 2);
        let v = AdaptedNorm::new(&f, id.clone(), vec![q(0, 1), q(0, 1)]).unwrap();
        let basis = m(&f, &[&[1, 2], &[0, 1]]);
        let w = AdaptedNorm::new(&f, basis, vec![q(0, 1), q(0, 1)]).unwrap();
        assert!(v.norm_equal(&w).unwrap());
        let u = AdaptedNorm::new(&f, id, vec![q(0, 1), q(1, 1)]).unwrap();
        assert!(!v.norm_equal(&u).unwrap());
    }

    #[test]
    fn is_adapted_examples() {
        let f = q2();
        let std = norm_from_lattice(&Lattice::standard(&f, 2));
        for delta in 0..3 {
            let basis = Matrix::from_rows(vec![
                vec![f.one(), f.uniformizer_pow(delta)],
                vec![f.zero(), f.one()],
            ]);
            assert!(std.is_adapted(&basis).unwrap(), "delta = {}", delta);
        }
        // overlap of the two apartments: holds while the second exponent is
        // nonnegative, fails at -1
        let shear = m(&f, &[&[1, 0], &[1, 1]]);
        for k in 0..=5 {
            let l = Lattice::diagonal(&f, &matrix::identity(&f, 2), &[0, -k]).unwrap();
            assert!(
                norm_from_lattice(&l).is_adapted(&shear).unwrap(),
                "k = {}",
                k
            );
        }
        let bad = Lattice::diagonal(&f, &matrix::identity(&f, 2), &[0, 1]).unwrap();
        assert!(!norm_from_lattice(&bad).is_adapted(&shear).unwrap());
    }

    #[test]
    fn is_adapted_frame_invariance() {
        let f = q2();
        let mut rng = Rng::new(31);
        for _ in 0..20 {
            let v = rand_norm(&f, 2, &mut rng);
            let basis = rand_invertible(&f, 2, &mut rng);
            let adapted = v.is_adapted(&basis).unwrap();
            let shifted = v.shift(&q(rng.range(-3, 4), 1));
            assert_eq!(shifted.is_adapted(&basis).unwrap(), adapted);
            let mut scaled = basis.clone();
            matrix::scale_col(&f, &mut scaled, 0, &f.from_i64(3));
            matrix::scale_col(&f, &mut scaled, 1, &f.uniformizer_pow(2));
            assert_eq!(v.is_adapted(&scaled).unwrap(), adapted);
        }
    }

    #[test]
    fn invariant_factor_examples() {
        let f = q2();
        let std = Lattice::standard(&f, 2);
        let b = Lattice::diagonal(&f, &matrix::identity(&f, 2), &[0, 3]).unwrap();
        let (inv, _) = invariant_factors(&std, &b).unwrap();
        assert_eq!(inv.exponents, vec![3, 0]);

        let gens = mq(&f, &[&[(1, 1), (0, 1)], &[(1, 4), (1, 1)]]);
        let b2 = Lattice::hnf(&f, &gens).unwrap();
        let (inv2, basis) = invariant_factors(&std, &b2).unwrap();
        assert_eq!(inv2.exponents, vec![2, -2]);
        // witness: basis columns generate std, scaled columns generate b2
        assert_eq!(Lattice::hnf(&f, &basis).unwrap(), std);
        let mut scaled = basis.clone();
        for (j, &e) in inv2.exponents.iter().enumerate() {
            matrix::scale_col(&f, &mut scaled, j, &f.uniformizer_pow(e));
        }
        assert_eq!(Lattice::hnf(&f, &scaled).unwrap(), b2);
    }

    #[test]
    fn common_adapted_basis_integral() {
        let f = q2();
        let mut rng = Rng::new(41);
        for _ in 0..40 {
            let a = rand_lattice(&f, 3, &mut rng);
            let b = rand_lattice(&f, 3, &mut rng);
            let v = norm_from_lattice(&a);
            let w = norm_from_lattice(&b);
            let basis = common_adapted_basis(&v, &w).unwrap();
            assert!(v.is_adapted(&basis).unwrap());
            assert!(w.is_adapted(&basis).unwrap());
        }
    }

    #[test]
    fn pullback_examples() {
        let f = q2();
        let std = norm_from_lattice(&Lattice::standard(&f, 2));
        let id = matrix::identity(&f, 2);
        assert!(pullback_check(&f, &id, &std, &std).unwrap());
        let half = mq(&f, &[&[(1, 2), (0, 1)], &[(0, 1), (1, 1)]]);
        assert!(!pullback_check(&f, &half, &std, &std).unwrap());
    }

    #[test]
    fn norm_axioms_on_random_inputs() {
        let f = q2();
        let mut rng = Rng::new(55);
        for _ in 0..50 {
            let v = rand_norm(&f, 3, &mut rng);
            let e = rand_vector(&f, 3, &mut rng);
            let e2 = rand_vector(&f, 3, &mut rng);
            let lambda = crate::testsupport::rand_elem(&f, &mut rng);
            let scaled: Vec<_> = e.iter().map(|x| f.mul(x, &lambda)).collect();
            match (f.val(&lambda), v.eval(&e), v.eval(&scaled)) {
                (crate::field::Val::Finite(k), NormVal::Finite(ve), NormVal::Finite(vs)) => {
                    assert_eq!(vs, ve + q(k, 1));
                }
                (crate::field::Val::Infinite, _, vs) => assert_eq!(vs, NormVal::Infinity),
                (_, NormVal::Infinity, vs) => assert_eq!(vs, NormVal::Infinity),
                other => panic!("unexpected combination {:?}", other),
            }
            let sum: Vec<_> = e.iter().zip(&e2).map(|(a, b)| f.add(a, b)).collect();
            let min = v.eval(&e).min(v.eval(&e2));
            assert!(v.eval(&sum) >= min);
            assert_eq!(v.eval(&[f.zero(), f.zero(), f.zero()]), NormVal::Infinity);
            if e.iter().any(|c| !f.is_zero(c)) {
                assert!(matches!(v.eval(&e), NormVal::Finite(_)));
            }
        }
    }

    #[test]
    fn prevaluation_eval_and_flag() {
        let f = q2();
        let p = Prevaluation::new(&f, matrix::identity(&f, 2), vec![q(1, 1), q(0, 1)]).unwrap();
        assert_eq!(p.eval(&[f.one(), f.zero()]), NormVal::Finite(q(1, 1)));
        assert_eq!(p.eval(&[f.from_i64(7), f.one()]), NormVal::Finite(q(0, 1)));
        // scaling invariance
        assert_eq!(p.eval(&[f.from_i64(4), f.zero()]), NormVal::Finite(q(1, 1)));
        let flag = p.flag();
        assert_eq!(flag.len(), 2);
        assert_eq!(flag[0].1.cols(), 1);
        assert_eq!(flag[1].1.cols(), 2);
    }
}
