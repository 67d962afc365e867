//! A finite differential graded algebra attached to a pair of parameters
//! `(m, n)`: `m` is the dimension of the sphere whose billiard problem is
//! being modeled, `n` the number of reflections.
//!
//! The algebra is generated over a coefficient field by classes
//! `s_0, ..., s_n` of degree `m - 1` and `u_1, ..., u_n` of degree `m`,
//! subject to:
//!
//! * `s_i^2 = 0` and `u_j^2 = 0`;
//! * graded commutativity with Koszul signs;
//! * `s_0 s_1 ... s_n = 0` (the full product of all `s` generators);
//! * `u_1 s_0 = 0`, `u_n s_n = 0`, and `(u_i - u_{i+1}) s_i = 0` for
//!   `1 <= i <= n - 1`.
//!
//! The last family of relations is best read through a picture: think of
//! `n + 2` slots `0..n+2`, where `u_j` sits in slot `j` and `s_i` glues
//! slots `i` and `i+1` together. A monomial is nonzero exactly when no two
//! of its `u` factors land in one glued block and no block containing a
//! `u` touches the boundary slots `0` or `n+1`; each `u_j` is rewritten to
//! the smallest slot of its block. This yields a canonical basis of
//! square-free words `s_{i_1}..s_{i_p} u_{j_1}..u_{j_q}` with ascending
//! indices.
//!
//! The differential vanishes on the `u` generators and sends each `s_i`
//! to a signed sum of neighboring `u` generators; its matrix depends on
//! the parity of `m`. Extended by the graded Leibniz rule it satisfies
//! `d * d = 0`, which the test suite checks exhaustively on small cases.

use crate::field::Field;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

/// Largest supported `n`; generator index sets are stored as `u64` masks.
pub const MAX_REFLECTIONS: usize = 62;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DgaError {
    #[error("sphere dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("reflection count must be in 1..={MAX_REFLECTIONS}, got {0}")]
    ReflectionCountOutOfRange(usize),
    #[error("generator {kind}{index} out of range for n = {n}")]
    GeneratorOutOfRange { kind: char, index: usize, n: usize },
    #[error("elements live in different algebras: (m, n) = ({m_left}, {n_left}) vs ({m_right}, {n_right})")]
    MixedParameters {
        m_left: usize,
        n_left: usize,
        m_right: usize,
        n_right: usize,
    },
}

/// A canonical basis monomial, stored as bitmasks of generator indices.
///
/// Invariants: `s` bits lie in `0..=n`, never all set at once; `u` bits lie
/// in `1..=n`, each the smallest slot of its glued block.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct Monomial {
    s_mask: u64,
    u_mask: u64,
}

impl Monomial {
    pub fn unit() -> Self {
        Monomial {
            s_mask: 0,
            u_mask: 0,
        }
    }

    pub fn s_indices(&self) -> Vec<usize> {
        mask_indices(self.s_mask)
    }

    pub fn u_indices(&self) -> Vec<usize> {
        mask_indices(self.u_mask)
    }

    pub fn s_count(&self) -> usize {
        self.s_mask.count_ones() as usize
    }

    pub fn u_count(&self) -> usize {
        self.u_mask.count_ones() as usize
    }

    /// Sort key realizing the documented basis order: lexicographic in the
    /// `s` index sequence, then in the `u` index sequence.
    pub fn lex_key(&self) -> (Vec<usize>, Vec<usize>) {
        (self.s_indices(), self.u_indices())
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.s_mask == 0 && self.u_mask == 0 {
            return write!(f, "1");
        }
        let mut parts = Vec::new();
        for i in self.s_indices() {
            parts.push(format!("s{i}"));
        }
        for j in self.u_indices() {
            parts.push(format!("u{j}"));
        }
        write!(f, "{}", parts.join(" "))
    }
}

fn mask_indices(mask: u64) -> Vec<usize> {
    (0..64).filter(|i| mask >> i & 1 == 1).collect()
}

fn count_inversions(xs: &[usize]) -> usize {
    let mut inv = 0;
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            if xs[i] > xs[j] {
                inv += 1;
            }
        }
    }
    inv
}

/// Result of rewriting a word of generators into canonical form.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Normalized {
    /// The word is zero in the algebra.
    Zero,
    /// The word equals `sign *` the canonical monomial; `sign` is `1` or `-1`.
    Term { monomial: Monomial, sign: i64 },
}

/// The `(m, n)` algebra: owns the combinatorics of monomials, the canonical
/// rewriting, and the differential. Coefficients enter only at the
/// [`AlgebraElement`] level.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Algebra {
    m: usize,
    n: usize,
}

impl Algebra {
    pub fn new(m: usize, n: usize) -> Result<Self, DgaError> {
        if m < 2 {
            return Err(DgaError::DimensionTooSmall(m));
        }
        if !(1..=MAX_REFLECTIONS).contains(&n) {
            return Err(DgaError::ReflectionCountOutOfRange(n));
        }
        Ok(Algebra { m, n })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn full_s_mask(&self) -> u64 {
        (1u64 << (self.n + 1)) - 1
    }

    /// Total degree of a canonical monomial.
    pub fn degree(&self, mono: &Monomial) -> usize {
        (self.m - 1) * mono.s_count() + self.m * mono.u_count()
    }

    /// Bidegree `(u-part, s-part)` of a canonical monomial.
    pub fn bidegree(&self, mono: &Monomial) -> (usize, usize) {
        (self.m * mono.u_count(), (self.m - 1) * mono.s_count())
    }

    /// Glued block `[lo, hi]` of slot `j` under the given `s` mask: bit `i`
    /// of the mask glues slots `i` and `i + 1`.
    fn block(&self, s_mask: u64, j: usize) -> (usize, usize) {
        let mut lo = j;
        while lo > 0 && s_mask >> (lo - 1) & 1 == 1 {
            lo -= 1;
        }
        let mut hi = j;
        while hi <= self.n && s_mask >> hi & 1 == 1 {
            hi += 1;
        }
        (lo, hi)
    }

    /// Rewrites the word `s[0] .. s[p-1] u[0] .. u[q-1]` (in that order)
    /// into canonical form. Any word of generators can be brought to this
    /// shape first: moving an `s` past a `u` costs `(-1)^{(m-1)m} = +1`.
    pub fn normalize(&self, s: &[usize], u: &[usize]) -> Result<Normalized, DgaError> {
        for &i in s {
            if i > self.n {
                return Err(DgaError::GeneratorOutOfRange {
                    kind: 's',
                    index: i,
                    n: self.n,
                });
            }
        }
        for &j in u {
            if j < 1 || j > self.n {
                return Err(DgaError::GeneratorOutOfRange {
                    kind: 'u',
                    index: j,
                    n: self.n,
                });
            }
        }

        let inv_s = count_inversions(s);
        let mut s_mask = 0u64;
        for &i in s {
            if s_mask >> i & 1 == 1 {
                return Ok(Normalized::Zero); // s_i^2 = 0
            }
            s_mask |= 1 << i;
        }
        if s_mask == self.full_s_mask() {
            return Ok(Normalized::Zero); // s_0 s_1 ... s_n = 0
        }

        // Rewrite each u_j to the smallest slot of its glued block; words
        // whose block touches a boundary slot die.
        let mut reps = Vec::with_capacity(u.len());
        for &j in u {
            let (lo, hi) = self.block(s_mask, j);
            if lo == 0 || hi == self.n + 1 {
                return Ok(Normalized::Zero);
            }
            reps.push(lo);
        }
        // Representative order agrees with original order whenever the word
        // survives, so inversions may be counted after rewriting.
        let inv_u = count_inversions(&reps);
        let mut u_mask = 0u64;
        for &r in &reps {
            if u_mask >> r & 1 == 1 {
                return Ok(Normalized::Zero); // u's in one block square to zero
            }
            u_mask |= 1 << r;
        }

        let exponent = (self.m - 1) * inv_s + self.m * inv_u;
        let sign = if exponent % 2 == 0 { 1 } else { -1 };
        Ok(Normalized::Term {
            monomial: Monomial { s_mask, u_mask },
            sign,
        })
    }

    /// Product of two canonical monomials as a normalized word.
    pub fn multiply_monomials(&self, a: &Monomial, b: &Monomial) -> Normalized {
        let mut s = a.s_indices();
        s.extend(b.s_indices());
        let mut u = a.u_indices();
        u.extend(b.u_indices());
        self.normalize(&s, &u)
            .expect("canonical monomials have valid indices")
    }

    /// `d s_i` as a list of `(u index, integer coefficient)` pairs. The
    /// coefficient pattern depends on the parity of `m`.
    fn ds_terms(&self, i: usize) -> Vec<(usize, i64)> {
        let odd = self.m % 2 == 1;
        if i == 0 {
            vec![(1, if odd { -1 } else { 1 })]
        } else if i == self.n {
            vec![(self.n, 1)]
        } else if odd {
            vec![(i, 1), (i + 1, -1)]
        } else {
            vec![(i, 1), (i + 1, 1)]
        }
    }

    /// Differential of a canonical monomial as integer combinations of
    /// canonical monomials (graded Leibniz rule, `d u_j = 0`).
    pub fn differential_monomial(&self, mono: &Monomial) -> Vec<(Monomial, i64)> {
        let s_idx = mono.s_indices();
        let u_idx = mono.u_indices();
        let mut acc: BTreeMap<Monomial, i64> = BTreeMap::new();
        for (t, &i) in s_idx.iter().enumerate() {
            // Sign for jumping the differential over the first t factors.
            let prefix = if (self.m - 1) * t % 2 == 0 { 1 } else { -1 };
            let mut s_rest: Vec<usize> = s_idx.clone();
            s_rest.remove(t);
            for (u_new, coeff) in self.ds_terms(i) {
                let mut word_u = Vec::with_capacity(u_idx.len() + 1);
                word_u.push(u_new);
                word_u.extend(&u_idx);
                match self
                    .normalize(&s_rest, &word_u)
                    .expect("canonical monomials have valid indices")
                {
                    Normalized::Zero => {}
                    Normalized::Term { monomial, sign } => {
                        let entry = acc.entry(monomial).or_insert(0);
                        *entry += prefix * coeff * sign;
                    }
                }
            }
        }
        acc.into_iter().filter(|(_, c)| *c != 0).collect()
    }

    /// All canonical monomials, grouped by total degree. Within a degree the
    /// order is lexicographic in the `s` index set, then the `u` index set.
    pub fn basis_by_degree(&self) -> BTreeMap<usize, Vec<Monomial>> {
        let mut by_degree: BTreeMap<usize, Vec<Monomial>> = BTreeMap::new();
        for mono in self.enumerate_basis() {
            by_degree.entry(self.degree(&mono)).or_default().push(mono);
        }
        for monos in by_degree.values_mut() {
            monos.sort_by_key(|m| m.lex_key());
        }
        by_degree
    }

    /// All canonical monomials of one total degree, in basis order.
    pub fn basis(&self, degree: usize) -> Vec<Monomial> {
        self.basis_by_degree().remove(&degree).unwrap_or_default()
    }

    fn enumerate_basis(&self) -> Vec<Monomial> {
        let mut out = Vec::new();
        let full = self.full_s_mask();
        for s_mask in 0..full {
            // Eligible u slots: block representatives not touching slot 0
            // or slot n + 1.
            let mut reps = Vec::new();
            let mut j = 1;
            while j <= self.n {
                let (lo, hi) = self.block(s_mask, j);
                if lo != 0 && hi != self.n + 1 {
                    reps.push(lo);
                }
                j = hi + 1;
            }
            for pick in 0u64..(1 << reps.len()) {
                let mut u_mask = 0u64;
                for (b, &r) in reps.iter().enumerate() {
                    if pick >> b & 1 == 1 {
                        u_mask |= 1 << r;
                    }
                }
                out.push(Monomial { s_mask, u_mask });
            }
        }
        out
    }

    /// Number of canonical monomials, `(3^{n+1} - 1) / 2`, without
    /// enumerating them.
    pub fn total_basis_size(&self) -> u128 {
        (3u128.pow(self.n as u32 + 1) - 1) / 2
    }
}

/// An element of the `(m, n)` algebra over the field `F`: a finite sum of
/// canonical monomials with nonzero coefficients.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AlgebraElement<F: Field> {
    algebra: Algebra,
    terms: BTreeMap<Monomial, F>,
}

impl<F: Field> AlgebraElement<F> {
    pub fn zero(algebra: Algebra) -> Self {
        AlgebraElement {
            algebra,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(algebra: Algebra) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Monomial::unit(), F::one());
        AlgebraElement { algebra, terms }
    }

    /// The generator `s_i`.
    pub fn s(algebra: Algebra, i: usize) -> Result<Self, DgaError> {
        Self::from_word(algebra, &[i], &[])
    }

    /// The generator `u_j`.
    pub fn u(algebra: Algebra, j: usize) -> Result<Self, DgaError> {
        Self::from_word(algebra, &[], &[j])
    }

    /// The normalized word `s[0]..s[p-1] u[0]..u[q-1]` as an element.
    pub fn from_word(algebra: Algebra, s: &[usize], u: &[usize]) -> Result<Self, DgaError> {
        let mut out = Self::zero(algebra);
        match algebra.normalize(s, u)? {
            Normalized::Zero => {}
            Normalized::Term { monomial, sign } => {
                out.terms.insert(monomial, F::from_int(sign));
            }
        }
        Ok(out)
    }

    pub fn from_terms(algebra: Algebra, terms: impl IntoIterator<Item = (Monomial, F)>) -> Self {
        let mut out = Self::zero(algebra);
        for (mono, coeff) in terms {
            out.add_term(mono, coeff);
        }
        out
    }

    pub fn algebra(&self) -> Algebra {
        self.algebra
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &F)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, mono: &Monomial) -> F {
        self.terms.get(mono).cloned().unwrap_or_else(F::zero)
    }

    fn add_term(&mut self, mono: Monomial, coeff: F) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(mono).or_insert_with(F::zero);
        *entry = entry.add(&coeff);
        if entry.is_zero() {
            self.terms.remove(&mono);
        }
    }

    /// Sum. Panics if the operands live in different algebras; use
    /// [`AlgebraElement::multiply`] for the checked entry point.
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.algebra, other.algebra, "mixed algebra parameters");
        let mut out = self.clone();
        for (mono, coeff) in &other.terms {
            out.add_term(*mono, coeff.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&F::one().neg()))
    }

    pub fn scale(&self, c: &F) -> Self {
        let mut out = Self::zero(self.algebra);
        if c.is_zero() {
            return out;
        }
        for (mono, coeff) in &self.terms {
            out.add_term(*mono, coeff.mul(c));
        }
        out
    }

    /// Graded product. Rejects operands from different algebras.
    pub fn multiply(&self, other: &Self) -> Result<Self, DgaError> {
        if self.algebra != other.algebra {
            return Err(DgaError::MixedParameters {
                m_left: self.algebra.m,
                n_left: self.algebra.n,
                m_right: other.algebra.m,
                n_right: other.algebra.n,
            });
        }
        let mut out = Self::zero(self.algebra);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                match self.algebra.multiply_monomials(ma, mb) {
                    Normalized::Zero => {}
                    Normalized::Term { monomial, sign } => {
                        out.add_term(monomial, ca.mul(cb).mul(&F::from_int(sign)));
                    }
                }
            }
        }
        Ok(out)
    }

    /// The differential, extended linearly.
    pub fn differential(&self) -> Self {
        let mut out = Self::zero(self.algebra);
        for (mono, coeff) in &self.terms {
            for (dmono, c) in self.algebra.differential_monomial(mono) {
                out.add_term(dmono, coeff.mul(&F::from_int(c)));
            }
        }
        out
    }

    /// Total degree if the element is homogeneous and nonzero.
    pub fn total_degree(&self) -> Option<usize> {
        let mut degrees = self.terms.keys().map(|m| self.algebra.degree(m));
        let first = degrees.next()?;
        degrees.all(|d| d == first).then_some(first)
    }
}

impl<F: Field> fmt::Display for AlgebraElement<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (mono, coeff) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if *mono == Monomial::unit() {
                write!(f, "{coeff}")?;
            } else {
                write!(f, "{coeff}*{mono}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{F2, F5, Q};

    fn alg(m: usize, n: usize) -> Algebra {
        Algebra::new(m, n).unwrap()
    }

    fn term(norm: Normalized) -> (Monomial, i64) {
        match norm {
            Normalized::Term { monomial, sign } => (monomial, sign),
            Normalized::Zero => panic!("expected nonzero term"),
        }
    }

    #[test]
    fn parameter_validation() {
        assert!(matches!(
            Algebra::new(1, 3),
            Err(DgaError::DimensionTooSmall(1))
        ));
        assert!(matches!(
            Algebra::new(3, 0),
            Err(DgaError::ReflectionCountOutOfRange(0))
        ));
        assert!(Algebra::new(2, 1).is_ok());
    }

    #[test]
    fn normalize_rewrites_u_through_glued_block() {
        // With s_1 present, slots 1 and 2 are glued, so u_2 becomes u_1.
        let a = alg(3, 2);
        let (mono, sign) = term(a.normalize(&[1], &[2]).unwrap());
        assert_eq!(sign, 1);
        assert_eq!(mono.s_indices(), vec![1]);
        assert_eq!(mono.u_indices(), vec![1]);
    }

    #[test]
    fn normalize_kills_boundary_blocks() {
        // s_0 glues slot 1 to the boundary slot 0, killing u_1.
        let a = alg(3, 2);
        assert_eq!(a.normalize(&[0], &[1]).unwrap(), Normalized::Zero);
        // s_2 glues slot 2 to the boundary slot 3 = n + 1, killing u_2.
        assert_eq!(a.normalize(&[2], &[2]).unwrap(), Normalized::Zero);
    }

    #[test]
    fn normalize_sorts_s_with_koszul_sign() {
        // For even m the s generators are odd, so s_1 s_0 = -s_0 s_1.
        let a = alg(2, 2);
        let (mono, sign) = term(a.normalize(&[1, 0], &[]).unwrap());
        assert_eq!(sign, -1);
        assert_eq!(mono.s_indices(), vec![0, 1]);
        // For odd m the s generators commute.
        let a = alg(3, 2);
        let (_, sign) = term(a.normalize(&[1, 0], &[]).unwrap());
        assert_eq!(sign, 1);
    }

    #[test]
    fn normalize_kills_squares_and_full_word() {
        let a = alg(2, 2);
        assert_eq!(a.normalize(&[1, 1], &[]).unwrap(), Normalized::Zero);
        assert_eq!(a.normalize(&[], &[2, 2]).unwrap(), Normalized::Zero);
        assert_eq!(a.normalize(&[0, 1, 2], &[]).unwrap(), Normalized::Zero);
        // u_1 and u_2 collapse into one block once s_1 glues their slots.
        assert_eq!(a.normalize(&[1], &[1, 2]).unwrap(), Normalized::Zero);
    }

    #[test]
    fn normalize_rejects_out_of_range_indices() {
        let a = alg(2, 2);
        assert!(matches!(
            a.normalize(&[3], &[]),
            Err(DgaError::GeneratorOutOfRange {
                kind: 's',
                index: 3,
                ..
            })
        ));
        assert!(matches!(
            a.normalize(&[], &[0]),
            Err(DgaError::GeneratorOutOfRange {
                kind: 'u',
                index: 0,
                ..
            })
        ));
        assert!(matches!(
            a.normalize(&[], &[3]),
            Err(DgaError::GeneratorOutOfRange {
                kind: 'u',
                index: 3,
                ..
            })
        ));
    }

    #[test]
    fn normalize_is_idempotent_on_basis() {
        for m in 2..=5 {
            for n in 1..=4 {
                let a = alg(m, n);
                for mono in a.enumerate_basis() {
                    let (again, sign) =
                        term(a.normalize(&mono.s_indices(), &mono.u_indices()).unwrap());
                    assert_eq!(sign, 1);
                    assert_eq!(again, mono);
                }
            }
        }
    }

    #[test]
    fn basis_for_one_reflection() {
        let a = alg(2, 1);
        let by_degree = a.basis_by_degree();
        let all: Vec<String> = by_degree
            .values()
            .flatten()
            .map(|m| m.to_string())
            .collect();
        assert_eq!(all.len(), 4);
        assert!(all.contains(&"1".to_owned()));
        assert!(all.contains(&"s0".to_owned()));
        assert!(all.contains(&"s1".to_owned()));
        assert!(all.contains(&"u1".to_owned()));
        // Degrees: 1 in degree 0, s's in degree m - 1 = 1, u in degree m = 2.
        assert_eq!(by_degree[&0].len(), 1);
        assert_eq!(by_degree[&1].len(), 2);
        assert_eq!(by_degree[&2].len(), 1);
    }

    #[test]
    fn basis_size_matches_closed_form() {
        for n in 1..=6 {
            let a = alg(3, n);
            let count: usize = a.basis_by_degree().values().map(Vec::len).sum();
            assert_eq!(count as u128, a.total_basis_size());
        }
    }

    #[test]
    fn basis_order_is_lexicographic() {
        let a = alg(2, 2);
        // Degree 2 over m = 2: single u's (empty s-sequence sorts first),
        // then s-pairs in lexicographic order.
        let names: Vec<String> = a.basis(2).iter().map(|m| m.to_string()).collect();
        assert_eq!(names, vec!["u1", "u2", "s0 s1", "s0 s2", "s1 s2"]);
    }

    #[test]
    fn differential_of_generators_odd_m() {
        let a = alg(3, 2);
        let s0 = AlgebraElement::<Q>::s(a, 0).unwrap();
        let u1 = AlgebraElement::<Q>::u(a, 1).unwrap();
        assert_eq!(s0.differential(), u1.scale(&Q::from_int(-1)));
        let s1 = AlgebraElement::<Q>::s(a, 1).unwrap();
        let u2 = AlgebraElement::<Q>::u(a, 2).unwrap();
        assert_eq!(s1.differential(), u1.sub(&u2));
        let s2 = AlgebraElement::<Q>::s(a, 2).unwrap();
        assert_eq!(s2.differential(), u2);
        assert!(u1.differential().is_zero());
    }

    #[test]
    fn differential_of_generators_even_m() {
        let a = alg(2, 2);
        let s0 = AlgebraElement::<Q>::s(a, 0).unwrap();
        let u1 = AlgebraElement::<Q>::u(a, 1).unwrap();
        assert_eq!(s0.differential(), u1);
        let s1 = AlgebraElement::<Q>::s(a, 1).unwrap();
        let u2 = AlgebraElement::<Q>::u(a, 2).unwrap();
        assert_eq!(s1.differential(), u1.add(&u2));
    }

    #[test]
    fn differential_squares_to_zero_exhaustively() {
        for m in 2..=5 {
            for n in 1..=4 {
                let a = alg(m, n);
                for mono in a.enumerate_basis() {
                    let x = AlgebraElement::<Q>::from_terms(a, [(mono, Q::one())]);
                    let ddx = x.differential().differential();
                    assert!(ddx.is_zero(), "d^2 != 0 on {mono} for (m, n) = ({m}, {n})");
                }
            }
        }
    }

    #[test]
    fn differential_satisfies_leibniz() {
        for m in 2..=4 {
            let a = alg(m, 3);
            let basis = a.enumerate_basis();
            for x_mono in basis.iter().step_by(3) {
                for y_mono in basis.iter().step_by(4) {
                    let x = AlgebraElement::<Q>::from_terms(a, [(*x_mono, Q::one())]);
                    let y = AlgebraElement::<Q>::from_terms(a, [(*y_mono, Q::one())]);
                    let lhs = x.multiply(&y).unwrap().differential();
                    let sign = if a.degree(x_mono) % 2 == 0 { 1 } else { -1 };
                    let rhs = x.differential().multiply(&y).unwrap().add(
                        &x.multiply(&y.differential())
                            .unwrap()
                            .scale(&Q::from_int(sign)),
                    );
                    assert_eq!(lhs, rhs, "Leibniz fails on {x_mono} * {y_mono}, m = {m}");
                }
            }
        }
    }

    #[test]
    fn multiplication_is_graded_commutative() {
        for m in 2..=4 {
            let a = alg(m, 3);
            let basis = a.enumerate_basis();
            for x_mono in &basis {
                for y_mono in &basis {
                    let x = AlgebraElement::<F5>::from_terms(a, [(*x_mono, F5::one())]);
                    let y = AlgebraElement::<F5>::from_terms(a, [(*y_mono, F5::one())]);
                    let xy = x.multiply(&y).unwrap();
                    let sign = if a.degree(x_mono) * a.degree(y_mono) % 2 == 0 {
                        1
                    } else {
                        -1
                    };
                    let yx = y.multiply(&x).unwrap().scale(&F5::from_int(sign));
                    assert_eq!(xy, yx);
                }
            }
        }
    }

    #[test]
    fn multiplication_rejects_mixed_parameters() {
        let x = AlgebraElement::<Q>::one(alg(2, 2));
        let y = AlgebraElement::<Q>::one(alg(2, 3));
        assert!(matches!(
            x.multiply(&y),
            Err(DgaError::MixedParameters { .. })
        ));
    }

    #[test]
    fn zero_coefficients_are_pruned() {
        let a = alg(2, 2);
        let s0 = AlgebraElement::<F2>::s(a, 0).unwrap();
        assert!(s0.add(&s0).is_zero());
        let x = AlgebraElement::<Q>::s(a, 1).unwrap();
        assert!(x.sub(&x).is_zero());
        assert!(x.scale(&Q::zero()).is_zero());
    }

    #[test]
    fn display_format() {
        let a = alg(3, 3);
        // u_3 rewrites to u_2 across the block glued by s_2.
        let x = AlgebraElement::<Q>::from_word(a, &[0, 2], &[3])
            .unwrap()
            .scale(&Q::from_int(-1));
        let y = AlgebraElement::<Q>::s(a, 3).unwrap().scale(&Q::from_int(2));
        assert_eq!(format!("{}", x.add(&y)), "-1*s0 s2 u2 + 2*s3");
        assert_eq!(format!("{}", AlgebraElement::<Q>::zero(a)), "0");
        assert_eq!(format!("{}", AlgebraElement::<Q>::one(a)), "1");
    }

    #[test]
    fn total_degree_detects_inhomogeneous_sums() {
        let a = alg(3, 2);
        let s0 = AlgebraElement::<Q>::s(a, 0).unwrap();
        let u1 = AlgebraElement::<Q>::u(a, 1).unwrap();
        assert_eq!(s0.total_degree(), Some(2));
        assert_eq!(u1.total_degree(), Some(3));
        assert_eq!(s0.add(&u1).total_degree(), None);
        assert_eq!(AlgebraElement::<Q>::zero(a).total_degree(), None);
    }

    mod laws {
        use super::*;
        use proptest::prelude::*;

        /// An algebra together with three random basis monomials.
        fn monomial_triple() -> impl Strategy<Value = (Algebra, [Monomial; 3])> {
            ((2usize..=5), (1usize..=4)).prop_flat_map(|(m, n)| {
                let algebra = Algebra::new(m, n).unwrap();
                let basis: Vec<Monomial> =
                    algebra.basis_by_degree().into_values().flatten().collect();
                prop::sample::subsequence(basis, 3)
                    .prop_map(move |picked| (algebra, [picked[0], picked[1], picked[2]]))
            })
        }

        fn element(algebra: Algebra, monomial: Monomial) -> AlgebraElement<Q> {
            AlgebraElement::from_terms(algebra, [(monomial, Q::one())])
        }

        proptest! {
            #[test]
            fn multiplication_is_graded_commutative((a, [x, y, _]) in monomial_triple()) {
                let xy = element(a, x).multiply(&element(a, y)).unwrap();
                let yx = element(a, y).multiply(&element(a, x)).unwrap();
                let expected = if (a.degree(&x) * a.degree(&y)) % 2 == 1 {
                    yx.scale(&Q::from_int(-1))
                } else {
                    yx
                };
                prop_assert_eq!(xy, expected);
            }

            #[test]
            fn multiplication_is_associative((a, [x, y, z]) in monomial_triple()) {
                let left = element(a, x)
                    .multiply(&element(a, y))
                    .unwrap()
                    .multiply(&element(a, z))
                    .unwrap();
                let right = element(a, x)
                    .multiply(&element(a, y).multiply(&element(a, z)).unwrap())
                    .unwrap();
                prop_assert_eq!(left, right);
            }

            #[test]
            fn differential_satisfies_leibniz((a, [x, y, _]) in monomial_triple()) {
                let ex = element(a, x);
                let ey = element(a, y);
                let product = ex.multiply(&ey).unwrap();
                let mut rhs = ex.differential().multiply(&ey).unwrap();
                let signed = if a.degree(&x) % 2 == 1 {
                    ey.differential().scale(&Q::from_int(-1))
                } else {
                    ey.differential()
                };
                rhs = rhs.add(&ex.multiply(&signed).unwrap());
                prop_assert_eq!(product.differential(), rhs);
            }

            #[test]
            fn squares_vanish((a, [x, _, _]) in monomial_triple()) {
                // Every generator is odd or square-zero by relation, so any
                // basis monomial with generators repeated dies; here x*x
                // always contains a repeat unless x = 1.
                let ex = element(a, x);
                let square = ex.multiply(&ex).unwrap();
                if x != Monomial::unit() {
                    prop_assert!(square.is_zero());
                }
            }
        }
    }
}
