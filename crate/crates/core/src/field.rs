//! Exact scalar fields for cohomology computations: the rationals and
//! small prime fields.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::fmt;

/// Primes accepted for finite-field coefficients.
pub const SUPPORTED_PRIMES: [u64; 4] = [2, 3, 5, 7];

/// An exact field scalar. All arithmetic is exact; there is no rounding.
pub trait Field: Clone + PartialEq + Eq + fmt::Debug + fmt::Display + Send + Sync {
    /// Characteristic: 0 for the rationals, `p` for a prime field.
    const CHAR: u64;

    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Multiplicative inverse; `None` exactly for zero.
    fn inv(&self) -> Option<Self>;
    fn from_int(v: i64) -> Self;
    /// Short lowercase name used in reports, e.g. `"q"` or `"f2"`.
    fn name() -> String;
}

/// Arbitrary-precision rational number, always stored in lowest terms.
#[derive(Clone, PartialEq, Eq, Debug, PartialOrd, Ord, Hash)]
pub struct Q(BigRational);

impl Q {
    pub fn new(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        Q(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn as_ratio(&self) -> &BigRational {
        &self.0
    }
}

impl fmt::Display for Q {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl Field for Q {
    const CHAR: u64 = 0;

    fn zero() -> Self {
        Q(BigRational::zero())
    }

    fn one() -> Self {
        Q(BigRational::one())
    }

    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    fn add(&self, rhs: &Self) -> Self {
        Q(&self.0 + &rhs.0)
    }

    fn sub(&self, rhs: &Self) -> Self {
        Q(&self.0 - &rhs.0)
    }

    fn mul(&self, rhs: &Self) -> Self {
        Q(&self.0 * &rhs.0)
    }

    fn neg(&self) -> Self {
        Q(-&self.0)
    }

    fn inv(&self) -> Option<Self> {
        if self.0.is_zero() {
            None
        } else {
            Some(Q(self.0.recip()))
        }
    }

    fn from_int(v: i64) -> Self {
        Q(BigRational::from(BigInt::from(v)))
    }

    fn name() -> String {
        "q".to_owned()
    }
}

/// Prime field with `P` elements, stored as a canonical residue in `0..P`.
#[derive(Clone, Copy, PartialEq, Eq, Debug, PartialOrd, Ord, Hash)]
pub struct Fp<const P: u64>(u64);

impl<const P: u64> Fp<P> {
    pub fn new(v: u64) -> Self {
        Fp(v % P)
    }

    pub fn value(self) -> u64 {
        self.0
    }

    fn pow(self, mut e: u64) -> Self {
        let mut base = self;
        let mut acc = Fp::<P>(1 % P);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }
}

impl<const P: u64> fmt::Display for Fp<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl<const P: u64> Field for Fp<P> {
    const CHAR: u64 = P;

    fn zero() -> Self {
        Fp(0)
    }

    fn one() -> Self {
        Fp(1 % P)
    }

    fn is_zero(&self) -> bool {
        self.0 == 0
    }

    fn add(&self, rhs: &Self) -> Self {
        Fp((self.0 + rhs.0) % P)
    }

    fn sub(&self, rhs: &Self) -> Self {
        Fp((self.0 + P - rhs.0) % P)
    }

    fn mul(&self, rhs: &Self) -> Self {
        // P < 2^32 in practice, so the product fits in u64.
        Fp((self.0 * rhs.0) % P)
    }

    fn neg(&self) -> Self {
        Fp((P - self.0) % P)
    }

    fn inv(&self) -> Option<Self> {
        if self.0 == 0 {
            None
        } else {
            // Fermat: a^(P-2) inverts a for prime P.
            Some(self.pow(P - 2))
        }
    }

    fn from_int(v: i64) -> Self {
        let p = P as i64;
        Fp(v.rem_euclid(p) as u64)
    }

    fn name() -> String {
        format!("f{P}")
    }
}

pub type F2 = Fp<2>;
pub type F3 = Fp<3>;
pub type F5 = Fp<5>;
pub type F7 = Fp<7>;

/// `k!` as a field element (computed in the integers, then mapped).
pub fn factorial<F: Field>(k: usize) -> F {
    let mut acc = F::one();
    for i in 1..=k as i64 {
        acc = acc.mul(&F::from_int(i));
    }
    acc
}

/// Binomial coefficient `C(n, k)` as a field element.
pub fn binomial<F: Field>(n: usize, k: usize) -> F {
    if k > n {
        return F::zero();
    }
    // Exact in i64 for every size this crate ever asks for.
    let mut num: i64 = 1;
    let mut den: i64 = 1;
    for i in 0..k {
        num *= (n - i) as i64;
        den *= (i + 1) as i64;
        let g = gcd(num, den);
        num /= g;
        den /= g;
    }
    debug_assert_eq!(den, 1);
    F::from_int(num)
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.max(1)
}
