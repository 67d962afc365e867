//! Cohomology of the `(m, n)` differential graded algebra from
//! [`crate::dga`], together with the distinguished classes whose cup
//! products drive the critical-point lower bounds.
//!
//! Everything here is exact: dimensions come from integer or prime-field
//! ranks of the differential, and product constants from exact linear
//! solves at the cochain level. The main entry point is
//! [`verify_invariants`], which assembles a [`CohomologyReport`]:
//!
//! * Poincaré polynomial `1 + t^{m-1} + t^{2(m-1)} + ... + t^{n(m-1)}`;
//! * distinguished cocycles `sigma_0, ..., sigma_n` with `sigma_i` of
//!   degree `i(m-1)`, one per cohomology group;
//! * cup products `sigma_i sigma_j = c(i, j) sigma_{i+j}`, with
//!   `c(i, j) = C(i+j, i)` for odd `m` and a halved-index analogue for
//!   even `m`;
//! * a cup-length certificate (an explicit nonzero product of `n`, resp.
//!   `floor((n+1)/2)`, positive-degree classes), which yields the
//!   Lusternik-Schnirelmann category bound `cup_length + 1`.

use crate::dga::{Algebra, AlgebraElement, DgaError, Monomial};
use crate::field::{binomial, factorial, Field, F2, F3, F5, F7, Q};
use crate::linalg::{rank_bigint, solve_columns, FieldMatrix};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use thiserror::Error;

/// Hard cap on the total number of basis monomials; parameter pairs whose
/// algebra would be larger are refused up front.
pub const BASIS_CAP: u128 = 2_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LerayError {
    #[error(transparent)]
    Dga(#[from] DgaError),
    #[error("basis would hold {size} monomials, above the cap {cap}")]
    BasisTooLarge { size: u128, cap: u128 },
    #[error("class index {i} out of range for n = {n}")]
    ClassOutOfRange { i: usize, n: usize },
    #[error("internal inconsistency: {0}")]
    Internal(String),
}

/// Coefficient field selected at runtime.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum FieldChoice {
    Q,
    F2,
    F3,
    F5,
    F7,
}

impl FieldChoice {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "q" => Some(FieldChoice::Q),
            "f2" => Some(FieldChoice::F2),
            "f3" => Some(FieldChoice::F3),
            "f5" => Some(FieldChoice::F5),
            "f7" => Some(FieldChoice::F7),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FieldChoice::Q => "q",
            FieldChoice::F2 => "f2",
            FieldChoice::F3 => "f3",
            FieldChoice::F5 => "f5",
            FieldChoice::F7 => "f7",
        }
    }
}

/// Value of a cup product `sigma_i sigma_j` relative to `sigma_{i+j}`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum CupResult<F: Field> {
    /// `sigma_i sigma_j = c sigma_{i+j}` in cohomology.
    Constant(F),
    /// `i + j > n`: the target group vanishes and the product is exact.
    ZeroGroup,
}

/// Component verdicts of [`verify_invariants`].
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Verdicts {
    /// Cohomology dimensions equal the expected Poincaré polynomial.
    pub poincare_ok: bool,
    /// Every product constant matches the closed-form table.
    pub products_ok: bool,
    /// The explicit cup-length certificate holds in the chosen field.
    pub cuplength_ok: bool,
    /// Each `sigma_i` is a nonzero non-exact cocycle.
    pub sigma_cocycles_ok: bool,
}

impl Verdicts {
    pub fn all_ok(&self) -> bool {
        self.poincare_ok && self.products_ok && self.cuplength_ok && self.sigma_cocycles_ok
    }
}

/// One row of the product table: `(i, j, constant)`, where `None` marks a
/// pair landing in a zero group. Serializes as `[i, j, "c"]` / `[i, j, null]`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct ProductEntry(pub usize, pub usize, pub Option<String>);

/// Full exact summary for one `(m, n, field)` triple.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct CohomologyReport {
    pub m: usize,
    pub n: usize,
    pub field: String,
    /// Nonzero cohomology dimensions by degree.
    pub dims: BTreeMap<usize, usize>,
    /// Coefficients of the Poincaré polynomial, index = degree.
    pub poincare: Vec<usize>,
    /// Product constants for all pairs `i <= j`.
    pub products: Vec<ProductEntry>,
    pub verdicts: Verdicts,
    /// Claimed cup-length: `n` for odd `m`, `floor((n+1)/2)` for even `m`.
    pub cup_length: usize,
    /// Lusternik-Schnirelmann category estimate `cup_length + 1`.
    pub cat_lower_bound: usize,
}

fn guarded_algebra(m: usize, n: usize) -> Result<Algebra, LerayError> {
    let algebra = Algebra::new(m, n)?;
    let size = algebra.total_basis_size();
    if size > BASIS_CAP {
        return Err(LerayError::BasisTooLarge {
            size,
            cap: BASIS_CAP,
        });
    }
    Ok(algebra)
}

/// Basis bookkeeping for one algebra: monomials grouped by degree plus
/// index maps for coordinate vectors.
struct Complex {
    algebra: Algebra,
    by_degree: BTreeMap<usize, Vec<Monomial>>,
    index: HashMap<Monomial, usize>,
}

impl Complex {
    fn new(algebra: Algebra) -> Self {
        let by_degree = algebra.basis_by_degree();
        let mut index = HashMap::new();
        for monos in by_degree.values() {
            for (i, mono) in monos.iter().enumerate() {
                index.insert(*mono, i);
            }
        }
        Complex {
            algebra,
            by_degree,
            index,
        }
    }

    fn dim(&self, degree: usize) -> usize {
        self.by_degree.get(&degree).map_or(0, Vec::len)
    }

    fn max_degree(&self) -> usize {
        self.by_degree.keys().next_back().copied().unwrap_or(0)
    }

    /// Integer matrix of the differential out of `degree`, row-major with
    /// rows indexed by the degree `degree + 1` basis.
    fn differential_matrix(&self, degree: usize) -> (usize, usize, Vec<i64>) {
        let cols_basis = self.by_degree.get(&degree).map_or(&[][..], Vec::as_slice);
        let rows = self.dim(degree + 1);
        let cols = cols_basis.len();
        let mut entries = vec![0i64; rows * cols];
        for (c, mono) in cols_basis.iter().enumerate() {
            for (dmono, coeff) in self.algebra.differential_monomial(mono) {
                let r = self.index[&dmono];
                entries[r * cols + c] = coeff;
            }
        }
        (rows, cols, entries)
    }

    /// Rank of the differential out of `degree` over the field `F`.
    fn differential_rank<F: Field>(&self, degree: usize) -> usize {
        let (rows, cols, entries) = self.differential_matrix(degree);
        if rows == 0 || cols == 0 {
            return 0;
        }
        if F::CHAR == 0 {
            rank_bigint(rows, cols, &entries)
        } else {
            let mut m = FieldMatrix::<F>::zeros(rows, cols);
            for r in 0..rows {
                for c in 0..cols {
                    m.set(r, c, F::from_int(entries[r * cols + c]));
                }
            }
            m.rank()
        }
    }

    /// Coordinates of a homogeneous element in the degree `degree` basis.
    fn coords<F: Field>(&self, elem: &AlgebraElement<F>, degree: usize) -> Vec<F> {
        let mut v = vec![F::zero(); self.dim(degree)];
        for (mono, coeff) in elem.terms() {
            debug_assert_eq!(self.algebra.degree(mono), degree);
            v[self.index[mono]] = coeff.clone();
        }
        v
    }

    /// Columns of the differential into `degree` (one per degree - 1 basis
    /// monomial), as coordinate vectors in the degree basis.
    fn boundary_columns<F: Field>(&self, degree: usize) -> Vec<Vec<F>> {
        if degree == 0 {
            return Vec::new();
        }
        let lower = self
            .by_degree
            .get(&(degree - 1))
            .map_or(&[][..], Vec::as_slice);
        lower
            .iter()
            .map(|mono| {
                let mut col = vec![F::zero(); self.dim(degree)];
                for (dmono, coeff) in self.algebra.differential_monomial(mono) {
                    col[self.index[&dmono]] = F::from_int(coeff);
                }
                col
            })
            .collect()
    }

    /// Is the homogeneous cocycle `elem` of degree `degree` a coboundary?
    fn is_exact<F: Field>(&self, elem: &AlgebraElement<F>, degree: usize) -> bool {
        let rhs = self.coords(elem, degree);
        solve_columns(&self.boundary_columns::<F>(degree), &rhs).is_some()
    }
}

/// Cohomology dimensions by degree, zero entries omitted.
pub fn cohomology_dims<F: Field>(m: usize, n: usize) -> Result<BTreeMap<usize, usize>, LerayError> {
    let complex = Complex::new(guarded_algebra(m, n)?);
    let top = complex.max_degree();
    let mut rank_out = BTreeMap::new();
    for degree in 0..=top {
        rank_out.insert(degree, complex.differential_rank::<F>(degree));
    }
    let mut dims = BTreeMap::new();
    for degree in 0..=top {
        let rank_in = if degree == 0 {
            0
        } else {
            rank_out[&(degree - 1)]
        };
        let dim = complex.dim(degree) - rank_out[&degree] - rank_in;
        if dim > 0 {
            dims.insert(degree, dim);
        }
    }
    Ok(dims)
}

/// The distinguished degree `i(m-1)` cocycle `sigma_i`, `0 <= i <= n`.
///
/// For odd `m` this is the `i`-th elementary symmetric polynomial in
/// `s_0, ..., s_n`. For even `m` it is built from the alternating sums
/// `beta_j = s_j - s_{j-1} + ... +- s_0`: `sigma_1 = beta_n`, `sigma_{2k}`
/// sums the products `beta_{i_1} beta_{i_1+1} ... beta_{i_k} beta_{i_k+1}`
/// over index sets with `i_r + 1 < i_{r+1}`, and `sigma_{2k+1} =
/// sigma_1 sigma_{2k}`.
pub fn sigma_class<F: Field>(
    m: usize,
    n: usize,
    i: usize,
) -> Result<AlgebraElement<F>, LerayError> {
    let algebra = guarded_algebra(m, n)?;
    if i > n {
        return Err(LerayError::ClassOutOfRange { i, n });
    }
    if i == 0 {
        return Ok(AlgebraElement::one(algebra));
    }
    if m % 2 == 1 {
        return Ok(elementary_symmetric(algebra, i));
    }

    // Even m.
    let betas: Vec<AlgebraElement<F>> = (0..=n).map(|j| beta(algebra, j)).collect();
    if i == 1 {
        return Ok(betas[n].clone());
    }
    let even_part = |k: usize| -> AlgebraElement<F> {
        // Sum over 0 <= i_1, i_r + 1 < i_{r+1}, i_k < n of the products
        // beta_{i_1} beta_{i_1 + 1} ... beta_{i_k} beta_{i_k + 1}.
        let mut acc = AlgebraElement::zero(algebra);
        for combo in spaced_subsets(n, k) {
            let mut prod = AlgebraElement::one(algebra);
            for &idx in &combo {
                prod = prod
                    .multiply(&betas[idx])
                    .and_then(|p| p.multiply(&betas[idx + 1]))
                    .expect("same algebra");
            }
            acc = acc.add(&prod);
        }
        acc
    };
    if i % 2 == 0 {
        Ok(even_part(i / 2))
    } else {
        let even = even_part(i / 2);
        Ok(betas[n].multiply(&even).expect("same algebra"))
    }
}

fn elementary_symmetric<F: Field>(algebra: Algebra, k: usize) -> AlgebraElement<F> {
    let n = algebra.n();
    let mut acc = AlgebraElement::zero(algebra);
    for combo in subsets(n + 1, k) {
        let elem = AlgebraElement::from_word(algebra, &combo, &[]).expect("valid indices");
        acc = acc.add(&elem);
    }
    acc
}

/// `beta_j = sum_{t=0}^{j} (-1)^{j-t} s_t`.
fn beta<F: Field>(algebra: Algebra, j: usize) -> AlgebraElement<F> {
    let mut acc = AlgebraElement::zero(algebra);
    for t in 0..=j {
        let sgn = if (j - t) % 2 == 0 { 1 } else { -1 };
        let term = AlgebraElement::from_word(algebra, &[t], &[])
            .expect("valid index")
            .scale(&F::from_int(sgn));
        acc = acc.add(&term);
    }
    acc
}

/// All ascending `k`-subsets of `0..size`.
fn subsets(size: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    fn go(
        size: usize,
        k: usize,
        start: usize,
        current: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for v in start..size {
            if size - v < k - current.len() {
                break;
            }
            current.push(v);
            go(size, k, v + 1, current, out);
            current.pop();
        }
    }
    go(size, k, 0, &mut current, &mut out);
    out
}

/// Ascending `k`-subsets of `0..n` whose consecutive entries differ by at
/// least 2 (so the pairs `(i, i+1)` they index are disjoint).
fn spaced_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    fn go(n: usize, k: usize, start: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for v in start..n {
            current.push(v);
            go(n, k, v + 2, current, out);
            current.pop();
        }
    }
    go(n, k, 0, &mut current, &mut out);
    out
}

/// The closed-form product constant: `None` for pairs landing in a zero
/// group, `Some(c)` otherwise.
pub fn expected_cup_constant<F: Field>(m: usize, n: usize, i: usize, j: usize) -> Option<F> {
    if i + j > n {
        return None;
    }
    if m % 2 == 1 {
        Some(binomial(i + j, i))
    } else if i % 2 == 1 && j % 2 == 1 {
        Some(F::zero())
    } else {
        Some(binomial((i + j) / 2, i / 2))
    }
}

/// Computes `c` with `sigma_i sigma_j = c sigma_{i+j}` in cohomology by an
/// exact cochain-level solve, or certifies that the product is exact when
/// `i + j > n`.
pub fn cup_constant<F: Field>(
    m: usize,
    n: usize,
    i: usize,
    j: usize,
) -> Result<CupResult<F>, LerayError> {
    let algebra = guarded_algebra(m, n)?;
    if i > n {
        return Err(LerayError::ClassOutOfRange { i, n });
    }
    if j > n {
        return Err(LerayError::ClassOutOfRange { i: j, n });
    }
    let complex = Complex::new(algebra);
    let si = sigma_class::<F>(m, n, i)?;
    let sj = sigma_class::<F>(m, n, j)?;
    let product = si.multiply(&sj).expect("same algebra");
    let degree = (i + j) * (m - 1);

    if i + j > n {
        // Target group is zero; the product must be a coboundary.
        if complex.is_exact(&product, degree) {
            return Ok(CupResult::ZeroGroup);
        }
        return Err(LerayError::Internal(format!(
            "product sigma_{i} sigma_{j} not exact for (m, n) = ({m}, {n})"
        )));
    }

    let target = sigma_class::<F>(m, n, i + j)?;
    // c is unique because sigma_{i+j} represents a nonzero class.
    if complex.is_exact(&target, degree) {
        return Err(LerayError::Internal(format!(
            "sigma_{} is exact for (m, n) = ({m}, {n})",
            i + j
        )));
    }
    let mut cols = vec![complex.coords(&target, degree)];
    cols.extend(complex.boundary_columns::<F>(degree));
    let rhs = complex.coords(&product, degree);
    match solve_columns(&cols, &rhs) {
        Some(x) => Ok(CupResult::Constant(x[0].clone())),
        None => Err(LerayError::Internal(format!(
            "no representation of sigma_{i} sigma_{j} for (m, n) = ({m}, {n})"
        ))),
    }
}

/// Betti numbers of the reflection-configuration algebra for flat ambient
/// space: square-free monomials in `s_0, ..., s_n` minus the full product,
/// counted by degree `k(m - 1)`.
pub fn rm_betti(m: usize, n: usize) -> Result<BTreeMap<usize, usize>, LerayError> {
    if m < 2 {
        return Err(LerayError::Dga(DgaError::DimensionTooSmall(m)));
    }
    let algebra = guarded_algebra(m, n)?;
    let mut dims: BTreeMap<usize, usize> = BTreeMap::new();
    for (degree, monos) in algebra.basis_by_degree() {
        // Pure s-monomials; their degrees are k(m - 1) for k = 0..n.
        let count = monos.iter().filter(|mono| mono.u_count() == 0).count();
        if count > 0 {
            dims.insert(degree, count);
        }
    }
    Ok(dims)
}

/// Image of `sigma_r` under the comparison map onto the `s`-only
/// subalgebra (the flat-space model).
///
/// For odd `m` this is the elementary symmetric sum; for even `m` the
/// alternating sum `(-1)^{floor(r/2) + nr} sum (-1)^{i_1 + ... + i_r}
/// s_{i_1} ... s_{i_r}`.
pub fn phi_star<F: Field>(m: usize, n: usize, r: usize) -> Result<AlgebraElement<F>, LerayError> {
    let algebra = guarded_algebra(m, n)?;
    if r > n {
        return Err(LerayError::ClassOutOfRange { i: r, n });
    }
    if r == 0 {
        return Ok(AlgebraElement::one(algebra));
    }
    if m % 2 == 1 {
        return Ok(elementary_symmetric(algebra, r));
    }
    let global = if (r / 2 + n * r) % 2 == 0 { 1 } else { -1 };
    let mut acc = AlgebraElement::zero(algebra);
    for combo in subsets(n + 1, r) {
        let sum: usize = combo.iter().sum();
        let sgn = if sum % 2 == 0 { 1 } else { -1 };
        let elem = AlgebraElement::from_word(algebra, &combo, &[])
            .expect("valid indices")
            .scale(&F::from_int(global * sgn));
        acc = acc.add(&elem);
    }
    Ok(acc)
}

/// Runs the full verification for one `(m, n)` pair over `F` and collects
/// the results into a report.
pub fn verify_invariants<F: Field>(m: usize, n: usize) -> Result<CohomologyReport, LerayError> {
    let algebra = guarded_algebra(m, n)?;
    let complex = Complex::new(algebra);
    let dims = cohomology_dims::<F>(m, n)?;

    // Expected: one class in each degree k(m - 1), k = 0..n.
    let mut expected = BTreeMap::new();
    for k in 0..=n {
        expected.insert(k * (m - 1), 1);
    }
    let poincare_ok = dims == expected;
    let top = dims.keys().next_back().copied().unwrap_or(0);
    let mut poincare = vec![0usize; top + 1];
    for (&degree, &dim) in &dims {
        poincare[degree] = dim;
    }

    // sigma classes: nonzero non-exact cocycles.
    let mut sigma_cocycles_ok = true;
    let mut sigmas = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let sigma = sigma_class::<F>(m, n, i)?;
        let degree = i * (m - 1);
        let represents_a_class = !sigma.is_zero()
            && sigma.differential().is_zero()
            && (i == 0 || !complex.is_exact(&sigma, degree));
        if !represents_a_class {
            sigma_cocycles_ok = false;
        }
        sigmas.push(sigma);
    }

    // Product table over pairs i <= j.
    let mut products = Vec::new();
    let mut products_ok = true;
    for i in 0..=n {
        for j in i..=n {
            let got = cup_constant::<F>(m, n, i, j)?;
            let want = expected_cup_constant::<F>(m, n, i, j);
            let entry = match &got {
                CupResult::Constant(c) => Some(c.to_string()),
                CupResult::ZeroGroup => None,
            };
            let matches = match (&got, &want) {
                (CupResult::Constant(c), Some(w)) => c == w,
                (CupResult::ZeroGroup, None) => true,
                _ => false,
            };
            if !matches {
                products_ok = false;
            }
            products.push(ProductEntry(i, j, entry));
        }
    }

    // Cup-length certificate: an explicit product of positive-degree
    // classes equal to factorial * sigma_n at the cochain level.
    let cup_length = if m % 2 == 1 { n } else { (n + 1) / 2 };
    let (certificate, scalar): (AlgebraElement<F>, F) = if m % 2 == 1 {
        let mut acc = AlgebraElement::one(algebra);
        for _ in 0..n {
            acc = acc.multiply(&sigmas[1]).expect("same algebra");
        }
        (acc, factorial::<F>(n))
    } else if n % 2 == 0 {
        let mut acc = AlgebraElement::one(algebra);
        for _ in 0..n / 2 {
            acc = acc.multiply(&sigmas[2]).expect("same algebra");
        }
        (acc, factorial::<F>(n / 2))
    } else {
        let mut acc = sigmas[1].clone();
        for _ in 0..n / 2 {
            acc = acc.multiply(&sigmas[2]).expect("same algebra");
        }
        (acc, factorial::<F>(n / 2))
    };
    let identity_holds = certificate == sigmas[n].scale(&scalar);
    let class_nonzero = !scalar.is_zero() && !complex.is_exact(&sigmas[n], n * (m - 1));
    let cuplength_ok = identity_holds && class_nonzero;

    Ok(CohomologyReport {
        m,
        n,
        field: F::name(),
        dims,
        poincare,
        products,
        verdicts: Verdicts {
            poincare_ok,
            products_ok,
            cuplength_ok,
            sigma_cocycles_ok,
        },
        cup_length,
        cat_lower_bound: cup_length + 1,
    })
}

/// Field-dispatching wrapper around [`verify_invariants`].
pub fn report(m: usize, n: usize, field: FieldChoice) -> Result<CohomologyReport, LerayError> {
    match field {
        FieldChoice::Q => verify_invariants::<Q>(m, n),
        FieldChoice::F2 => verify_invariants::<F2>(m, n),
        FieldChoice::F3 => verify_invariants::<F3>(m, n),
        FieldChoice::F5 => verify_invariants::<F5>(m, n),
        FieldChoice::F7 => verify_invariants::<F7>(m, n),
    }
}
