//! Exact number theory for the tetrahedron family: integer polynomials,
//! cyclotomic polynomials and resultants, arithmetic in cyclotomic fields,
//! exact Gram matrices of the truncated tetrahedra, and the resulting
//! trace-field and integrality verdicts.
//!
//! Everything here is exact: `IntPoly` over `BigInt`, field elements as
//! rational-coefficient polynomials reduced modulo a cyclotomic polynomial.
//! Floating point appears only in embedding cross-checks, never in results.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExactError {
    #[error("k must be an even integer >= 2, got {0}")]
    UnsupportedK(u64),
    #[error("resultant factorization routes disagree: {0}")]
    InconsistentFactorization(String),
    #[error("cyclic-product set mismatch: {0}")]
    CyclicProductMismatch(String),
    #[error("internal consistency check failed: {0}")]
    InternalCheck(String),
}

/// Euler's totient, by trial-division factorization.
pub fn euler_phi(n: u64) -> u64 {
    assert!(n > 0);
    let mut n = n;
    let mut result = n;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

pub fn is_power_of_two(k: u64) -> bool {
    k > 0 && k & (k - 1) == 0
}

fn gcd_u64(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd_u64(b, a % b)
    }
}

// ---------------------------------------------------------------------------
// Integer polynomials
// ---------------------------------------------------------------------------

/// Dense univariate polynomial over the integers, constant term first.
/// The zero polynomial is the empty coefficient vector.
#[derive(Clone, PartialEq, Eq)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    pub fn zero() -> Self {
        IntPoly { coeffs: vec![] }
    }

    pub fn constant(c: BigInt) -> Self {
        IntPoly::new(vec![c])
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        IntPoly::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    /// x^n - 1
    pub fn x_pow_minus_one(n: usize) -> Self {
        let mut c = vec![BigInt::zero(); n + 1];
        c[0] = -BigInt::one();
        c[n] = BigInt::one();
        IntPoly { coeffs: c }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree of the polynomial; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> BigInt {
        self.coeffs.get(i).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn leading(&self) -> BigInt {
        self.coeffs.last().cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut c = Vec::with_capacity(n);
        for i in 0..n {
            c.push(self.coeff(i) + other.coeff(i));
        }
        IntPoly::new(c)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut c = Vec::with_capacity(n);
        for i in 0..n {
            c.push(self.coeff(i) - other.coeff(i));
        }
        IntPoly::new(c)
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return IntPoly::zero();
        }
        let mut c = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        IntPoly::new(c)
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        IntPoly::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// Multiply by x^n.
    fn shift(&self, n: usize) -> Self {
        if self.is_zero() {
            return IntPoly::zero();
        }
        let mut c = vec![BigInt::zero(); n];
        c.extend(self.coeffs.iter().cloned());
        IntPoly { coeffs: c }
    }

    /// Exact division by a scalar; panics if any coefficient is not divisible.
    fn div_scalar_exact(&self, d: &BigInt) -> Self {
        assert!(!d.is_zero());
        IntPoly::new(
            self.coeffs
                .iter()
                .map(|c| {
                    let (q, r) = intops::div_rem_big(c, d);
                    assert!(r.is_zero(), "inexact scalar division in polynomial");
                    q
                })
                .collect(),
        )
    }

    /// Exact polynomial division; panics if the division leaves a remainder.
    pub fn div_exact(&self, divisor: &Self) -> Self {
        assert!(!divisor.is_zero());
        let mut rem = self.clone();
        let dd = divisor.degree();
        let lead = divisor.leading();
        let mut q = vec![BigInt::zero(); self.coeffs.len().saturating_sub(dd)];
        while !rem.is_zero() && rem.degree() >= dd {
            let shift = rem.degree() - dd;
            let (qc, r) = intops::div_rem_big(&rem.leading(), &lead);
            assert!(r.is_zero(), "inexact polynomial division");
            rem = rem.sub(&divisor.shift(shift).scale(&qc));
            q[shift] = qc;
        }
        assert!(rem.is_zero(), "polynomial division left a remainder");
        IntPoly::new(q)
    }

    /// Pseudo-remainder of `self` by `b`: the remainder of lc(b)^e * self
    /// divided by b, where e = deg(self) - deg(b) + 1.
    fn pseudo_rem(&self, b: &Self) -> Self {
        let db = b.degree();
        assert!(!b.is_zero() && self.degree() >= db);
        let e = self.degree() - db + 1;
        let lb = b.leading();
        let mut r = self.clone();
        let mut steps = 0usize;
        while !r.is_zero() && r.degree() >= db {
            let shift = r.degree() - db;
            let lr = r.leading();
            r = r.scale(&lb).sub(&b.shift(shift).scale(&lr));
            steps += 1;
        }
        // Normalize to the full lc(b)^e factor.
        for _ in steps..e {
            r = r.scale(&lb);
        }
        r
    }

    /// Gcd of the coefficients (non-negative; 0 for the zero polynomial).
    pub fn content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for c in &self.coeffs {
            g = intops::gcd_big(&g, c);
        }
        g
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// p(x^2)
    pub fn compose_x_squared(&self) -> Self {
        let mut c = vec![BigInt::zero(); self.coeffs.len() * 2];
        for (i, a) in self.coeffs.iter().enumerate() {
            c[2 * i] = a.clone();
        }
        IntPoly::new(c)
    }

    pub fn is_palindromic(&self) -> bool {
        let n = self.coeffs.len();
        (0..n).all(|i| self.coeffs[i] == self.coeffs[n - 1 - i])
    }
}

impl fmt::Debug for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{}", c)?,
                1 => write!(f, "{}*x", c)?,
                _ => write!(f, "{}*x^{}", c, i)?,
            }
        }
        Ok(())
    }
}

/// Small shims so the integer helpers read uniformly above.
mod intops {
    use num_bigint::BigInt;
    use num_traits::{Signed, Zero};

    pub fn div_rem_big(a: &BigInt, b: &BigInt) -> (BigInt, BigInt) {
        (a / b, a % b)
    }

    pub fn gcd_big(a: &BigInt, b: &BigInt) -> BigInt {
        let mut a = a.abs();
        let mut b = b.abs();
        while !b.is_zero() {
            let r = &a % &b;
            a = b;
            b = r;
        }
        a
    }
}

fn pow_bigint(x: &BigInt, e: usize) -> BigInt {
    let mut acc = BigInt::one();
    for _ in 0..e {
        acc *= x;
    }
    acc
}

fn exact_div_bigint(n: BigInt, d: BigInt) -> BigInt {
    assert!(!d.is_zero());
    let (q, r) = (&n / &d, &n % &d);
    assert!(r.is_zero(), "inexact integer division");
    q
}

fn divisors_ascending(n: u64) -> Vec<u64> {
    let mut ds: Vec<u64> = (1..=n).filter(|d| n % d == 0).collect();
    ds.sort_unstable();
    ds
}

/// The n-th cyclotomic polynomial, by iterated exact division:
/// Phi_n = (x^n - 1) / prod_{d | n, d < n} Phi_d.
pub fn cyclotomic_poly(n: u64) -> IntPoly {
    assert!(n >= 1);
    let mut cache: HashMap<u64, IntPoly> = HashMap::new();
    for d in divisors_ascending(n) {
        let mut q = IntPoly::x_pow_minus_one(d as usize);
        for d2 in divisors_ascending(d) {
            if d2 < d {
                q = q.div_exact(&cache[&d2]);
            }
        }
        cache.insert(d, q);
    }
    cache.remove(&n).unwrap()
}

/// Minimal polynomial of 2cos(2*pi/n) over the rationals, for n >= 3.
///
/// Obtained by folding the palindromic Phi_n: writing y = x + 1/x,
/// x^{-m} Phi_n(x) = a_m + sum_{j=1..m} a_{m+j} (x^j + x^{-j}) and
/// x^j + x^{-j} = p_j(y) with p_0 = 2, p_1 = y, p_j = y p_{j-1} - p_{j-2}.
pub fn two_cos_minimal_poly(n: u64) -> IntPoly {
    assert!(n >= 3);
    let phi = cyclotomic_poly(n);
    assert!(phi.is_palindromic());
    let d = phi.degree();
    assert!(d % 2 == 0);
    let m = d / 2;
    let mut psi = IntPoly::constant(phi.coeff(m));
    let mut p_prev = IntPoly::from_i64(&[2]);
    let mut p_cur = IntPoly::from_i64(&[0, 1]);
    for j in 1..=m {
        psi = psi.add(&p_cur.scale(&phi.coeff(m + j)));
        if j < m {
            let p_next = p_cur.shift(1).sub(&p_prev);
            p_prev = p_cur;
            p_cur = p_next;
        }
    }
    psi
}

/// Resultant of two nonzero integer polynomials, computed exactly with the
/// subresultant pseudo-remainder sequence. Convention:
/// Res(f, g) = lc(f)^{deg g} * prod over roots r of f of g(r).
pub fn resultant(f: &IntPoly, g: &IntPoly) -> BigInt {
    assert!(!f.is_zero() && !g.is_zero(), "resultant of a zero polynomial");
    let mut a = f.clone();
    let mut b = g.clone();
    let mut sign = 1i64;
    if a.degree() < b.degree() {
        if a.degree() % 2 == 1 && b.degree() % 2 == 1 {
            sign = -sign;
        }
        std::mem::swap(&mut a, &mut b);
    }
    if b.degree() == 0 {
        return pow_bigint(&b.coeff(0), a.degree()) * BigInt::from(sign);
    }
    let ca = a.content();
    let cb = b.content();
    let t = pow_bigint(&ca, b.degree()) * pow_bigint(&cb, a.degree());
    let mut a = a.div_scalar_exact(&ca);
    let mut b = b.div_scalar_exact(&cb);
    let mut g_ = BigInt::one();
    let mut h = BigInt::one();
    loop {
        let da = a.degree();
        let db = b.degree();
        let delta = da - db;
        if da % 2 == 1 && db % 2 == 1 {
            sign = -sign;
        }
        let r = a.pseudo_rem(&b);
        a = std::mem::replace(&mut b, IntPoly::zero());
        if r.is_zero() {
            // positive-degree common factor
            return BigInt::zero();
        }
        let denom = &g_ * pow_bigint(&h, delta);
        b = r.div_scalar_exact(&denom);
        g_ = a.leading();
        if delta > 0 {
            let num = pow_bigint(&g_, delta);
            h = if delta == 1 {
                num
            } else {
                exact_div_bigint(num, pow_bigint(&h, delta - 1))
            };
        }
        if b.degree() == 0 {
            let d_last = a.degree();
            let num = pow_bigint(&b.coeff(0), d_last);
            let hfin = if d_last >= 1 {
                exact_div_bigint(num, pow_bigint(&h, d_last - 1))
            } else {
                num
            };
            return BigInt::from(sign) * t * hfin;
        }
    }
}

// ---------------------------------------------------------------------------
// Cyclotomic field elements
// ---------------------------------------------------------------------------

type RatPoly = Vec<BigRational>;

fn rp_trim(mut p: RatPoly) -> RatPoly {
    while p.last().map_or(false, |c| c.is_zero()) {
        p.pop();
    }
    p
}

fn rp_deg(p: &RatPoly) -> usize {
    p.len().saturating_sub(1)
}

fn rp_mul(a: &RatPoly, b: &RatPoly) -> RatPoly {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut c = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if !y.is_zero() {
                c[i + j] += x * y;
            }
        }
    }
    rp_trim(c)
}

fn rp_sub(a: &RatPoly, b: &RatPoly) -> RatPoly {
    let n = a.len().max(b.len());
    let mut c = Vec::with_capacity(n);
    let zero = BigRational::zero();
    for i in 0..n {
        c.push(a.get(i).unwrap_or(&zero) - b.get(i).unwrap_or(&zero));
    }
    rp_trim(c)
}

fn rp_scale(a: &RatPoly, s: &BigRational) -> RatPoly {
    rp_trim(a.iter().map(|c| c * s).collect())
}

/// Division with remainder over the rationals: a = q*b + r, deg r < deg b.
fn rp_divmod(a: &RatPoly, b: &RatPoly) -> (RatPoly, RatPoly) {
    assert!(!b.is_empty());
    let db = rp_deg(b);
    let lead = b.last().unwrap().clone();
    let mut rem = a.clone();
    let mut q = vec![BigRational::zero(); a.len().saturating_sub(db)];
    while !rem.is_empty() && rp_deg(&rem) >= db {
        let shift = rp_deg(&rem) - db;
        let qc = rem.last().unwrap() / &lead;
        let mut sub = vec![BigRational::zero(); shift];
        sub.extend(b.iter().map(|c| c * &qc));
        rem = rp_sub(&rem, &sub);
        q[shift] = qc;
    }
    (rp_trim(q), rem)
}

/// Extended gcd over the rationals: returns (g, u, v) with u*a + v*b = g.
fn rp_ext_gcd(a: &RatPoly, b: &RatPoly) -> (RatPoly, RatPoly, RatPoly) {
    let one = vec![BigRational::one()];
    let (mut r0, mut r1) = (a.clone(), b.clone());
    let (mut s0, mut s1) = (one.clone(), vec![]);
    let (mut t0, mut t1) = (vec![], one);
    while !r1.is_empty() {
        let (q, r) = rp_divmod(&r0, &r1);
        let s = rp_sub(&s0, &rp_mul(&q, &s1));
        let t = rp_sub(&t0, &rp_mul(&q, &t1));
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s);
        t0 = std::mem::replace(&mut t1, t);
    }
    (r0, s0, t0)
}

/// An element of the cyclotomic field Q(zeta_n), stored as a rational
/// polynomial in zeta_n reduced modulo Phi_n. Real subfield elements are kept
/// in this representation and certified by a self-conjugacy check.
#[derive(Clone, PartialEq, Eq)]
pub struct CycloElement {
    n: u64,
    /// Coefficients in the power basis 1, zeta, ..., zeta^{phi(n)-1}.
    coeffs: Vec<BigRational>,
}

impl CycloElement {
    /// Phi_n over Q, cached per thread: it sits on the hot path of every
    /// field multiplication.
    fn modulus(n: u64) -> RatPoly {
        thread_local! {
            static CACHE: std::cell::RefCell<HashMap<u64, RatPoly>> =
                std::cell::RefCell::new(HashMap::new());
        }
        CACHE.with(|c| {
            c.borrow_mut()
                .entry(n)
                .or_insert_with(|| {
                    cyclotomic_poly(n)
                        .coeffs()
                        .iter()
                        .map(|c| BigRational::from_integer(c.clone()))
                        .collect()
                })
                .clone()
        })
    }

    fn reduce(n: u64, poly: RatPoly) -> Vec<BigRational> {
        let phi = euler_phi(n) as usize;
        let (_, rem) = rp_divmod(&rp_trim(poly), &Self::modulus(n));
        let mut coeffs = rem;
        coeffs.resize(phi, BigRational::zero());
        coeffs
    }

    pub fn from_poly(n: u64, poly: Vec<BigRational>) -> Self {
        CycloElement {
            n,
            coeffs: Self::reduce(n, poly),
        }
    }

    pub fn zero(n: u64) -> Self {
        CycloElement {
            n,
            coeffs: vec![BigRational::zero(); euler_phi(n) as usize],
        }
    }

    pub fn from_rational(n: u64, c: BigRational) -> Self {
        let mut e = Self::zero(n);
        // For n = 1 or 2 the field is Q itself and phi(n) = 1.
        e.coeffs[0] = c;
        CycloElement {
            n,
            coeffs: Self::reduce(n, e.coeffs),
        }
    }

    pub fn from_int(n: u64, c: i64) -> Self {
        Self::from_rational(n, BigRational::from_integer(BigInt::from(c)))
    }

    /// The primitive root of unity zeta_n.
    pub fn zeta(n: u64) -> Self {
        Self::from_poly(n, vec![BigRational::zero(), BigRational::one()])
    }

    pub fn conductor(&self) -> u64 {
        self.n
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Some(q) when the element lies in Q.
    pub fn as_rational(&self) -> Option<BigRational> {
        if self.coeffs.iter().skip(1).all(|c| c.is_zero()) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        CycloElement {
            n: self.n,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        CycloElement {
            n: self.n,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn neg(&self) -> Self {
        CycloElement {
            n: self.n,
            coeffs: self.coeffs.iter().map(|a| -a).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let prod = rp_mul(&rp_trim(self.coeffs.clone()), &rp_trim(other.coeffs.clone()));
        CycloElement {
            n: self.n,
            coeffs: Self::reduce(self.n, prod),
        }
    }

    /// Multiplicative inverse; None for zero.
    pub fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let a = rp_trim(self.coeffs.clone());
        let (g, u, _) = rp_ext_gcd(&a, &Self::modulus(self.n));
        // Phi_n is irreducible over Q, so the gcd is a nonzero constant.
        assert_eq!(rp_deg(&g), 0);
        let ginv = g[0].recip();
        Some(CycloElement {
            n: self.n,
            coeffs: Self::reduce(self.n, rp_scale(&u, &ginv)),
        })
    }

    pub fn div(&self, other: &Self) -> Self {
        self.mul(&other.inverse().expect("division by zero field element"))
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::from_int(self.n, 1);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Complex conjugation zeta -> zeta^{-1} (an automorphism of Q(zeta_n)).
    pub fn conj(&self) -> Self {
        let n = self.n;
        let mut poly = vec![BigRational::zero(); n as usize];
        for (i, c) in self.coeffs.iter().enumerate() {
            let e = if i == 0 { 0 } else { (n as usize) - i };
            poly[e] = poly[e].clone() + c;
        }
        CycloElement {
            n,
            coeffs: Self::reduce(n, poly),
        }
    }

    pub fn is_self_conjugate(&self) -> bool {
        *self == self.conj()
    }

    /// Numeric embedding sending zeta_n to exp(2*pi*i*j/n).
    pub fn embed(&self, j: u64) -> Complex64 {
        let zeta = Complex64::from_polar(1.0, 2.0 * PI * (j as f64) / (self.n as f64));
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * zeta + Complex64::new(c.to_f64().unwrap_or(f64::NAN), 0.0);
        }
        acc
    }
}

impl fmt::Debug for CycloElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{}", c)?,
                1 => write!(f, "({})*z", c)?,
                _ => write!(f, "({})*z^{}", c, i)?,
            }
        }
        write!(f, " [n={}]", self.n)
    }
}

/// Monic minimal polynomial of a cyclotomic field element over Q, as
/// coefficients in ascending order (constant first, leading 1 last).
///
/// Found as the first monic linear dependence among the powers of the
/// element, by rational Gaussian elimination.
pub fn minimal_poly(elem: &CycloElement) -> Vec<BigRational> {
    let d = euler_phi(elem.conductor()) as usize;
    let mut powers: Vec<Vec<BigRational>> = Vec::with_capacity(d + 1);
    powers.push(CycloElement::from_int(elem.conductor(), 1).coeffs.clone());
    let mut cur = CycloElement::from_int(elem.conductor(), 1);
    for r in 1..=d {
        cur = cur.mul(elem);
        powers.push(cur.coeffs.clone());
        if let Some(sol) = solve_linear(&powers[..r], &powers[r]) {
            let mut coeffs = sol;
            coeffs.push(BigRational::one());
            return coeffs;
        }
    }
    unreachable!("every element of a degree-{} field has degree <= {}", d, d)
}

/// Solve sum_i x_i cols[i] = -rhs over Q; None when inconsistent.
fn solve_linear(cols: &[Vec<BigRational>], rhs: &[BigRational]) -> Option<Vec<BigRational>> {
    let rows = rhs.len();
    let ncols = cols.len();
    // Augmented matrix rows of [cols | -rhs].
    let mut m: Vec<Vec<BigRational>> = (0..rows)
        .map(|i| {
            let mut row: Vec<BigRational> = cols.iter().map(|c| c[i].clone()).collect();
            row.push(-rhs[i].clone());
            row
        })
        .collect();
    let mut pivot_of_col = vec![usize::MAX; ncols];
    let mut rank = 0;
    for col in 0..ncols {
        let piv = (rank..rows).find(|&r| !m[r][col].is_zero());
        let Some(piv) = piv else { continue };
        m.swap(rank, piv);
        let inv = m[rank][col].recip();
        for c in col..=ncols {
            m[rank][c] = &m[rank][c] * &inv;
        }
        for r in 0..rows {
            if r != rank && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in col..=ncols {
                    m[r][c] = &m[r][c] - &(&f * &m[rank][c]);
                }
            }
        }
        pivot_of_col[col] = rank;
        rank += 1;
    }
    // Inconsistent if any zero-row has nonzero augment.
    for r in rank..rows {
        if !m[r][ncols].is_zero() {
            return None;
        }
    }
    let mut x = vec![BigRational::zero(); ncols];
    for col in 0..ncols {
        if pivot_of_col[col] != usize::MAX {
            x[col] = m[pivot_of_col[col]][ncols].clone();
        }
    }
    // Verify (free columns may have made the naive readback wrong).
    for i in 0..rows {
        let mut acc = rhs[i].clone();
        for (j, xj) in x.iter().enumerate() {
            acc += &cols[j][i] * xj;
        }
        if !acc.is_zero() {
            return None;
        }
    }
    Some(x)
}

/// True iff the element's monic minimal polynomial has integer coefficients.
pub fn is_algebraic_integer(elem: &CycloElement) -> bool {
    minimal_poly(elem)
        .iter()
        .all(|c| c.denom().is_one() || c.denom() == &BigInt::from(-1))
}

// ---------------------------------------------------------------------------
// Norms of alpha^2 - 1
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct NormCheck {
    pub k: u64,
    /// Norm of alpha_k^2 - 1 from Q(zeta_{6k}) down to Q, as a resultant.
    pub cyclotomic_norm: BigInt,
    /// Norm of alpha_k^2 - 1 from the real field Q(cos(2 pi / 3k)) down to Q,
    /// with its actual sign.
    pub field_norm: BigInt,
}

/// Computes the norm of alpha_k^2 - 1 (alpha_k = 2cos(pi/3k)) two independent
/// ways and cross-checks them:
///
/// * over Q(zeta_{6k}): as Res(Phi_{6k}(x), Phi_3(x^2)), also recomputed via
///   the factorization Phi_3(x^2) = Phi_3(x) Phi_6(x);
/// * over the real subfield N_k = Q(2cos(2 pi / 3k)): writing
///   alpha^2 - 1 = beta + 1 with beta = 2cos(2 pi / 3k), the norm is
///   (-1)^m psi(-1) where psi is beta's monic minimal polynomial of degree m.
///
/// The fourth power of the signed field norm must equal the cyclotomic norm,
/// and a high-precision product over the real embeddings certifies the sign.
pub fn norm_alpha_check(k: u64) -> Result<NormCheck, ExactError> {
    if k < 2 || k % 2 != 0 {
        return Err(ExactError::UnsupportedK(k));
    }
    let phi6k = cyclotomic_poly(6 * k);
    let phi3 = cyclotomic_poly(3);
    let phi6 = cyclotomic_poly(6);
    let direct = resultant(&phi6k, &phi3.compose_x_squared());
    let split = resultant(&phi6k, &phi3) * resultant(&phi6k, &phi6);
    if direct != split {
        return Err(ExactError::InconsistentFactorization(format!(
            "k={}: direct resultant {} != split product {}",
            k, direct, split
        )));
    }

    let psi = two_cos_minimal_poly(3 * k);
    let m = psi.degree();
    let v = psi.eval(&BigInt::from(-1));
    let field_norm = if m % 2 == 1 { -v } else { v };

    let fourth = pow_bigint(&field_norm, 4);
    if fourth != direct {
        return Err(ExactError::InconsistentFactorization(format!(
            "k={}: field norm {} to the 4th power is {}, cyclotomic norm is {}",
            k, field_norm, fourth, direct
        )));
    }

    // Sign certification: product of beta_j + 1 over the real embeddings.
    let n3k = 3 * k;
    let mut prod = 1.0f64;
    for j in 1..=n3k / 2 {
        if gcd_u64(j, n3k) == 1 {
            prod *= 2.0 * (2.0 * PI * (j as f64) / (n3k as f64)).cos() + 1.0;
        }
    }
    let rf = field_norm.to_f64().unwrap();
    if (prod - rf).abs() > 1e-6 * rf.abs().max(1.0) {
        return Err(ExactError::InconsistentFactorization(format!(
            "k={}: numeric embedding product {} disagrees with exact field norm {}",
            k, prod, field_norm
        )));
    }

    Ok(NormCheck {
        k,
        cyclotomic_norm: direct,
        field_norm,
    })
}

// ---------------------------------------------------------------------------
// Exact Gram matrix
// ---------------------------------------------------------------------------

/// One entry of the exact Gram matrix: c * R^s where R = sqrt(l1_tilde_sq) is
/// the single irrational radical appearing in the matrix, and s is 0 or 1.
/// Products with even total radical degree land back in the cyclotomic field.
#[derive(Clone, Debug)]
pub struct GramEntry {
    pub c: CycloElement,
    pub radical_degree: u8,
}

impl GramEntry {
    fn rational(n: u64, v: i64) -> Self {
        GramEntry {
            c: CycloElement::from_int(n, v),
            radical_degree: 0,
        }
    }

    fn field(c: CycloElement) -> Self {
        GramEntry {
            c,
            radical_degree: 0,
        }
    }

    fn radical(c: CycloElement) -> Self {
        GramEntry {
            c,
            radical_degree: 1,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_zero()
    }

    /// Numeric value under the j-th embedding, taking R > 0.
    pub fn embed(&self, j: u64, l1_sq: &CycloElement) -> Complex64 {
        let mut v = self.c.embed(j);
        if self.radical_degree == 1 {
            let r = l1_sq.embed(j).re;
            v *= Complex64::new(r.max(0.0).sqrt(), 0.0);
        }
        v
    }

    fn mul(&self, other: &Self, l1_sq: &CycloElement) -> Self {
        let mut c = self.c.mul(&other.c);
        let s = self.radical_degree + other.radical_degree;
        if s == 2 {
            c = c.mul(l1_sq);
        }
        GramEntry {
            c,
            radical_degree: s % 2,
        }
    }
}

#[derive(Debug)]
pub struct GramExact {
    pub k: u64,
    /// Conductor of the ambient cyclotomic field, 6k.
    pub conductor: u64,
    /// alpha = 2cos(pi/3k) = zeta_{6k} + zeta_{6k}^{-1}.
    pub alpha: CycloElement,
    pub alpha_sq: CycloElement,
    /// (-2 cosh l1)^2 = 9 alpha^2 / (alpha^2 - 1).
    pub l1_tilde_sq: CycloElement,
    /// -2 cosh l2 = -(alpha^2 + 2) / (alpha^2 - 1).
    pub l2_tilde: CycloElement,
    /// The 7x7 Gram matrix of face normals (inner products scaled by 2).
    pub matrix: Vec<Vec<GramEntry>>,
    /// Distinct nonzero cyclic products over ascending index subsets.
    pub cyclic_products: Vec<CycloElement>,
    /// Determinant of the 4x4 restriction; equals -108 alpha^4.
    pub det_gprime: CycloElement,
    /// Square-free discriminant class representative of the restriction.
    pub disc_radicand: i64,
}

/// Builds the exact 7x7 Gram matrix of the angle-pi/3k truncated tetrahedron,
/// enumerates its cyclic products over ascending index subsets, and computes
/// the determinant and discriminant class of the 4-dimensional restriction.
pub fn gram_exact(k: u64) -> Result<GramExact, ExactError> {
    gram_exact_impl(k, true)
}

/// Determinant/discriminant part only; used where the full cyclic-product
/// enumeration is not needed.
pub(crate) fn gram_det_only(k: u64) -> Result<GramExact, ExactError> {
    gram_exact_impl(k, false)
}

fn gram_exact_impl(k: u64, with_products: bool) -> Result<GramExact, ExactError> {
    if k < 2 || k % 2 != 0 {
        return Err(ExactError::UnsupportedK(k));
    }
    let n = 6 * k;
    let zeta = CycloElement::zeta(n);
    let alpha = zeta.add(&zeta.conj());
    let alpha_sq = alpha.mul(&alpha);
    let one = CycloElement::from_int(n, 1);
    let two = CycloElement::from_int(n, 2);
    let nine = CycloElement::from_int(n, 9);
    let denom = alpha_sq.sub(&one);
    let l1_sq = nine.mul(&alpha_sq).div(&denom);
    let l2 = alpha_sq.add(&two).neg().div(&denom);

    for (name, e) in [("alpha", &alpha), ("l1^2", &l1_sq), ("l2", &l2)] {
        if !e.is_self_conjugate() {
            return Err(ExactError::InternalCheck(format!(
                "{} is not fixed by complex conjugation",
                name
            )));
        }
    }

    // Entry codes: R = rational constant, Z = -alpha, L1 = -R (radical), L2.
    let z_entry = || GramEntry::field(alpha.neg());
    let l1_entry = || GramEntry::radical(CycloElement::from_int(n, -1));
    let l2_entry = || GramEntry::field(l2.clone());
    let num = |v: i64| GramEntry::rational(n, v);

    let matrix: Vec<Vec<GramEntry>> = vec![
        vec![num(2), num(-1), num(-1), z_entry(), num(0), num(0), l1_entry()],
        vec![num(-1), num(2), num(-1), z_entry(), l1_entry(), num(0), num(0)],
        vec![num(-1), num(-1), num(2), z_entry(), num(0), l1_entry(), num(0)],
        vec![z_entry(), z_entry(), z_entry(), num(2), num(0), num(0), num(0)],
        vec![num(0), l1_entry(), num(0), num(0), num(2), l2_entry(), l2_entry()],
        vec![num(0), num(0), l1_entry(), num(0), l2_entry(), num(2), l2_entry()],
        vec![l1_entry(), num(0), num(0), num(0), l2_entry(), l2_entry(), num(2)],
    ];

    let cyclic_products = if with_products {
        let products = enumerate_cyclic_products(&matrix, &l1_sq)?;
        check_product_set(k, &products, &alpha_sq, &l1_sq, &l2)?;
        products
    } else {
        vec![]
    };

    // 4x4 restriction from the basis 2e1, -e2, -e3, z*e4.
    let zsq = alpha_sq.clone(); // z^2 = alpha^2
    let m4: Vec<Vec<CycloElement>> = {
        let e = |v: i64| CycloElement::from_int(n, v);
        vec![
            vec![e(8), e(2), e(2), two.mul(&zsq)],
            vec![e(2), e(2), e(-1), zsq.neg()],
            vec![e(2), e(-1), e(2), zsq.neg()],
            vec![two.mul(&zsq), zsq.neg(), zsq.neg(), two.mul(&zsq)],
        ]
    };
    let det = det4(&m4);
    let expected = CycloElement::from_int(n, -108).mul(&alpha_sq).mul(&alpha_sq);
    if det != expected {
        return Err(ExactError::InternalCheck(format!(
            "det of restricted Gram is {:?}, expected -108*alpha^4",
            det
        )));
    }
    // -108 z^4 = -3 * (6 z^2)^2, so the discriminant square class is [-3].

    Ok(GramExact {
        k,
        conductor: n,
        alpha,
        alpha_sq,
        l1_tilde_sq: l1_sq,
        l2_tilde: l2,
        matrix,
        cyclic_products,
        det_gprime: det,
        disc_radicand: -3,
    })
}

/// Cyclic products over index subsets traversed in ascending order:
/// for I = {i1 < i2 < ... < ir}, the product a_{i1 i2} a_{i2 i3} ... a_{ir i1}.
/// Zero products are dropped; the radical degree of every surviving product
/// must be even, and is reduced into the field.
fn enumerate_cyclic_products(
    matrix: &[Vec<GramEntry>],
    l1_sq: &CycloElement,
) -> Result<Vec<CycloElement>, ExactError> {
    let n_field = l1_sq.conductor();
    let mut out: Vec<CycloElement> = Vec::new();
    for mask in 1u32..(1 << 7) {
        let idx: Vec<usize> = (0..7).filter(|i| mask & (1 << i) != 0).collect();
        let product = if idx.len() == 1 {
            matrix[idx[0]][idx[0]].clone()
        } else {
            let mut acc = GramEntry::rational(n_field, 1);
            let mut zero = false;
            for t in 0..idx.len() {
                let a = idx[t];
                let b = idx[(t + 1) % idx.len()];
                let e = &matrix[a][b];
                if e.is_zero() {
                    zero = true;
                    break;
                }
                acc = acc.mul(e, l1_sq);
            }
            if zero {
                continue;
            }
            acc
        };
        if product.is_zero() {
            continue;
        }
        if product.radical_degree != 0 {
            return Err(ExactError::InternalCheck(format!(
                "cyclic product over {:?} has odd radical degree",
                idx
            )));
        }
        if !out.contains(&product.c) {
            out.push(product.c);
        }
    }
    Ok(out)
}

fn check_product_set(
    k: u64,
    products: &[CycloElement],
    alpha_sq: &CycloElement,
    l1_sq: &CycloElement,
    l2: &CycloElement,
) -> Result<(), ExactError> {
    let n = alpha_sq.conductor();
    let e = |v: i64| CycloElement::from_int(n, v);
    let l2sq = l2.mul(l2);
    let expected = vec![
        e(2),
        e(1),
        alpha_sq.clone(),
        l1_sq.clone(),
        l2sq.clone(),
        e(-1),
        alpha_sq.neg(),
        l2sq.mul(l2),
        l1_sq.mul(l2).neg(),
        l1_sq.mul(l2),
        l1_sq.mul(&l2sq).neg(),
    ];
    let missing: Vec<&CycloElement> = expected.iter().filter(|e| !products.contains(e)).collect();
    let extra: Vec<&CycloElement> = products.iter().filter(|p| !expected.contains(p)).collect();
    if !missing.is_empty() || !extra.is_empty() {
        return Err(ExactError::CyclicProductMismatch(format!(
            "k={}: {} expected elements missing ({:?}), {} unexpected elements ({:?})",
            k,
            missing.len(),
            missing,
            extra.len(),
            extra
        )));
    }
    Ok(())
}

/// Determinant of a 4x4 matrix over the field, by fraction-full elimination.
fn det4(m: &[Vec<CycloElement>]) -> CycloElement {
    let n = m[0][0].conductor();
    let mut a: Vec<Vec<CycloElement>> = m.to_vec();
    let mut det = CycloElement::from_int(n, 1);
    for col in 0..4 {
        let piv = (col..4).find(|&r| !a[r][col].is_zero());
        let Some(piv) = piv else {
            return CycloElement::zero(n);
        };
        if piv != col {
            a.swap(piv, col);
            det = det.neg();
        }
        det = det.mul(&a[col][col]);
        let inv = a[col][col].inverse().unwrap();
        for r in col + 1..4 {
            if a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].mul(&inv);
            for c in col..4 {
                let sub = f.mul(&a[col][c]);
                a[r][c] = a[r][c].sub(&sub);
            }
        }
    }
    det
}

// ---------------------------------------------------------------------------
// Verdict
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, serde::Serialize)]
pub struct ArithVerdict {
    pub k: u64,
    /// Degree over Q of the invariant trace field L_k = N_k(sqrt(-3)).
    pub trace_field_degree: u64,
    /// Degree over Q of the (totally real) adjoint trace field N_k.
    pub adjoint_field_degree: u64,
    /// The trace field is N_k adjoined the square root of this integer.
    pub disc_radicand: i64,
    pub integral_traces: bool,
    pub quasi_arithmetic: bool,
    pub arithmetic: bool,
}

/// Full arithmetic classification of the k-th member (k even):
/// trace-field degrees from Euler's totient, integrality from the unit test
/// on the field norm of alpha^2 - 1, quasi-arithmeticity from the degree of
/// the adjoint field, with exact Gram-matrix cross-checks at small k.
pub fn arithmetic_verdict(k: u64) -> Result<ArithVerdict, ExactError> {
    if k < 2 || k % 2 != 0 {
        return Err(ExactError::UnsupportedK(k));
    }
    let norm = norm_alpha_check(k)?;
    let integral_traces = norm.field_norm.abs().is_one();
    if integral_traces == is_power_of_two(k) {
        return Err(ExactError::InternalCheck(format!(
            "k={}: integrality from norm ({}) contradicts the power-of-two rule",
            k, integral_traces
        )));
    }

    let degree = euler_phi(3 * k);
    let adjoint = degree / 2;
    let quasi_arithmetic = adjoint == 1;

    // Exact Gram checks: determinant/discriminant always, and for small k the
    // direct algebraic-integrality of every cyclic product.
    let gram = if k <= 10 {
        gram_exact(k)?
    } else {
        gram_det_only(k)?
    };
    if k <= 10 {
        let all_integral = gram.cyclic_products.iter().all(is_algebraic_integer);
        if all_integral != integral_traces {
            return Err(ExactError::InternalCheck(format!(
                "k={}: cyclic-product integrality ({}) disagrees with norm verdict ({})",
                k, all_integral, integral_traces
            )));
        }
    }

    let arithmetic = integral_traces && quasi_arithmetic;
    if arithmetic {
        return Err(ExactError::InternalCheck(format!(
            "k={}: classified arithmetic, which the family never is",
            k
        )));
    }

    Ok(ArithVerdict {
        k,
        trace_field_degree: degree,
        adjoint_field_degree: adjoint,
        disc_radicand: gram.disc_radicand,
        integral_traces,
        quasi_arithmetic,
        arithmetic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn poly(v: &[i64]) -> IntPoly {
        IntPoly::from_i64(v)
    }

    #[test]
    fn cyclotomic_small_cases() {
        assert_eq!(cyclotomic_poly(1), poly(&[-1, 1]));
        assert_eq!(cyclotomic_poly(2), poly(&[1, 1]));
        assert_eq!(cyclotomic_poly(3), poly(&[1, 1, 1]));
        assert_eq!(cyclotomic_poly(4), poly(&[1, 0, 1]));
        assert_eq!(cyclotomic_poly(6), poly(&[1, -1, 1]));
        assert_eq!(cyclotomic_poly(12), poly(&[1, 0, -1, 0, 1]));
    }

    #[test]
    fn cyclotomic_degree_is_totient() {
        for n in 1..=60 {
            assert_eq!(cyclotomic_poly(n).degree() as u64, euler_phi(n), "n={}", n);
        }
    }

    #[test]
    fn totient_values() {
        let expected = [1, 1, 2, 2, 4, 2, 6, 4, 6, 4, 10, 4];
        for (i, &e) in expected.iter().enumerate() {
            assert_eq!(euler_phi(i as u64 + 1), e);
        }
        assert_eq!(euler_phi(6 * 32), 64);
    }

    #[test]
    fn two_cos_minimal_poly_small_cases() {
        // 2cos(2pi/6) = 1
        assert_eq!(two_cos_minimal_poly(6), poly(&[-1, 1]));
        // 2cos(2pi/12) = sqrt(3)
        assert_eq!(two_cos_minimal_poly(12), poly(&[-3, 0, 1]));
        // 2cos(2pi/9): y^3 - 3y + 1
        assert_eq!(two_cos_minimal_poly(9), poly(&[1, -3, 0, 1]));
        // 2cos(2pi/18) = 2cos(pi/9): y^3 - 3y - 1
        assert_eq!(two_cos_minimal_poly(18), poly(&[-1, -3, 0, 1]));
    }

    #[test]
    fn two_cos_minimal_poly_has_the_right_root() {
        for n in 3..=40u64 {
            let psi = two_cos_minimal_poly(n);
            let x = 2.0 * (2.0 * PI / n as f64).cos();
            let mut acc = 0.0;
            for c in psi.coeffs().iter().rev() {
                acc = acc * x + c.to_f64().unwrap();
            }
            assert!(acc.abs() < 1e-9, "psi_{}({}) = {}", n, x, acc);
            assert_eq!(psi.degree() as u64, euler_phi(n) / 2);
        }
    }

    #[test]
    fn resultant_of_linear_factors() {
        // Res(x^2 - 1, x - 2) = (1 - 2)(-1 - 2) = 3, both argument orders.
        assert_eq!(resultant(&poly(&[-1, 0, 1]), &poly(&[-2, 1])), BigInt::from(3));
        assert_eq!(resultant(&poly(&[-2, 1]), &poly(&[-1, 0, 1])), BigInt::from(3));
        // Res against a constant: c^{deg f}.
        assert_eq!(resultant(&poly(&[-1, 0, 1]), &poly(&[5])), BigInt::from(25));
        assert_eq!(resultant(&poly(&[7]), &poly(&[5])), BigInt::from(1));
        // Res(f, 1) = 1.
        assert_eq!(resultant(&cyclotomic_poly(36), &poly(&[1])), BigInt::from(1));
        // Shared root gives 0.
        assert_eq!(
            resultant(&poly(&[-1, 0, 1]), &poly(&[-1, 1])),
            BigInt::zero()
        );
    }

    #[test]
    fn resultant_cyclotomic_values() {
        let phi3 = cyclotomic_poly(3);
        assert_eq!(resultant(&cyclotomic_poly(12), &phi3), BigInt::from(4));
        assert_eq!(resultant(&cyclotomic_poly(36), &phi3), BigInt::from(1));
        assert_eq!(
            resultant(&cyclotomic_poly(12), &cyclotomic_poly(6)),
            BigInt::from(4)
        );
        assert_eq!(
            resultant(&cyclotomic_poly(36), &cyclotomic_poly(6)),
            BigInt::from(1)
        );
    }

    /// Prime-power rule: for m > n >= 1 with the quotient m/n a prime power
    /// p^e, Res(Phi_m, Phi_n) = p^{phi(n)} up to sign; in every other case it
    /// is 1. The sign is + except for (m, n) = (2, 1), the only pair where
    /// both degrees are odd.
    fn expected_cyclotomic_resultant(m: u64, n: u64) -> BigInt {
        assert!(m > n);
        if (m, n) == (2, 1) {
            return BigInt::from(-2);
        }
        if m % n == 0 {
            let mut q = m / n;
            let mut p = 2;
            while p * p <= q {
                if q % p == 0 {
                    while q % p == 0 {
                        q /= p;
                    }
                    return if q == 1 {
                        pow_bigint(&BigInt::from(p), euler_phi(n) as usize)
                    } else {
                        BigInt::one()
                    };
                }
                p += 1;
            }
            if q > 1 {
                // q itself is prime
                return pow_bigint(&BigInt::from(q), euler_phi(n) as usize);
            }
        }
        BigInt::one()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn resultant_prime_power_rule(n in 1u64..30, mult in 2u64..9) {
            let m = n * mult;
            let r = resultant(&cyclotomic_poly(m), &cyclotomic_poly(n));
            prop_assert_eq!(r, expected_cyclotomic_resultant(m, n));
        }

        #[test]
        fn resultant_multiplicative(a in proptest::collection::vec(-4i64..5, 2..4),
                                    b in proptest::collection::vec(-4i64..5, 2..4),
                                    c in proptest::collection::vec(-4i64..5, 2..4)) {
            let (f1, f2, g) = (poly(&a), poly(&b), poly(&c));
            prop_assume!(!f1.is_zero() && !f2.is_zero() && !g.is_zero());
            let lhs = resultant(&f1.mul(&f2), &g);
            let rhs = resultant(&f1, &g) * resultant(&f2, &g);
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn resultant_antisymmetric(a in proptest::collection::vec(-4i64..5, 2..5),
                                   b in proptest::collection::vec(-4i64..5, 2..5)) {
            let (f, g) = (poly(&a), poly(&b));
            prop_assume!(!f.is_zero() && !g.is_zero());
            let lhs = resultant(&f, &g);
            let sign = if f.degree() % 2 == 1 && g.degree() % 2 == 1 { -1 } else { 1 };
            let rhs = resultant(&g, &f) * BigInt::from(sign);
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn cyclo_ring_axioms(ac in proptest::collection::vec(-5i64..6, 4),
                             bc in proptest::collection::vec(-5i64..6, 4),
                             cc in proptest::collection::vec(-5i64..6, 4)) {
            let n = 12u64; // phi(12) = 4
            let mk = |v: &Vec<i64>| CycloElement::from_poly(
                n, v.iter().map(|&x| BigRational::from_integer(BigInt::from(x))).collect());
            let (a, b, c) = (mk(&ac), mk(&bc), mk(&cc));
            prop_assert_eq!(a.add(&b), b.add(&a));
            prop_assert_eq!(a.mul(&b), b.mul(&a));
            prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            prop_assert_eq!(a.sub(&a), CycloElement::zero(n));
            if !a.is_zero() {
                let inv = a.inverse().unwrap();
                prop_assert_eq!(a.mul(&inv), CycloElement::from_int(n, 1));
            }
        }

        #[test]
        fn cyclo_embedding_is_multiplicative(ac in proptest::collection::vec(-5i64..6, 4),
                                             bc in proptest::collection::vec(-5i64..6, 4)) {
            let n = 12u64;
            let mk = |v: &Vec<i64>| CycloElement::from_poly(
                n, v.iter().map(|&x| BigRational::from_integer(BigInt::from(x))).collect());
            let (a, b) = (mk(&ac), mk(&bc));
            let lhs = a.mul(&b).embed(1);
            let rhs = a.embed(1) * b.embed(1);
            prop_assert!((lhs - rhs).norm() < 1e-10 * (1.0 + rhs.norm()));
        }
    }

    #[test]
    fn zeta_powers_close_up() {
        let n = 12;
        let z = CycloElement::zeta(n);
        assert_eq!(z.pow(12), CycloElement::from_int(n, 1));
        assert_eq!(z.pow(6), CycloElement::from_int(n, -1));
        assert_eq!(z.conj(), z.pow(11));
        assert!(z.conj().conj() == z);
    }

    #[test]
    fn minimal_poly_examples() {
        // zeta_6 has minimal polynomial x^2 - x + 1.
        let z6 = CycloElement::zeta(6);
        let mp = minimal_poly(&z6);
        let as_i64: Vec<i64> = mp.iter().map(|c| c.to_f64().unwrap() as i64).collect();
        assert_eq!(as_i64, vec![1, -1, 1]);

        // alpha = zeta_12 + zeta_12^-1 = sqrt(3): x^2 - 3.
        let z12 = CycloElement::zeta(12);
        let alpha = z12.add(&z12.conj());
        let mp = minimal_poly(&alpha);
        let as_i64: Vec<i64> = mp.iter().map(|c| c.to_f64().unwrap() as i64).collect();
        assert_eq!(as_i64, vec![-3, 0, 1]);
        assert!(is_algebraic_integer(&alpha));

        // A rational non-integer is not an algebraic integer.
        let half = CycloElement::from_rational(
            12,
            BigRational::new(BigInt::from(27), BigInt::from(2)),
        );
        assert!(!is_algebraic_integer(&half));
        assert_eq!(minimal_poly(&half).len(), 2);

        // An integer is.
        assert!(is_algebraic_integer(&CycloElement::from_int(12, -5)));
    }

    #[test]
    fn norm_check_small_k() {
        let n2 = norm_alpha_check(2).unwrap();
        assert_eq!(n2.cyclotomic_norm, BigInt::from(16));
        assert_eq!(n2.field_norm, BigInt::from(2));

        let n4 = norm_alpha_check(4).unwrap();
        assert_eq!(n4.cyclotomic_norm, BigInt::from(16));
        assert_eq!(n4.field_norm, BigInt::from(-2));

        let n6 = norm_alpha_check(6).unwrap();
        assert_eq!(n6.cyclotomic_norm, BigInt::from(1));
        assert_eq!(n6.field_norm, BigInt::from(-1));
    }

    #[test]
    fn norm_check_rejects_odd_k() {
        assert!(matches!(norm_alpha_check(3), Err(ExactError::UnsupportedK(3))));
        assert!(matches!(norm_alpha_check(0), Err(ExactError::UnsupportedK(0))));
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn gram_exact_k2_values() {
        let g = gram_exact(2).unwrap();
        assert_eq!(g.conductor, 12);
        assert_eq!(g.alpha_sq.as_rational().unwrap(), rat(3, 1));
        assert_eq!(g.l1_tilde_sq.as_rational().unwrap(), rat(27, 2));
        assert_eq!(g.l2_tilde.as_rational().unwrap(), rat(-5, 2));
        assert_eq!(g.det_gprime.as_rational().unwrap(), rat(-972, 1));
        assert_eq!(g.disc_radicand, -3);

        // All products are rational at k = 2; compare with the closed forms.
        let mut got: Vec<BigRational> = g
            .cyclic_products
            .iter()
            .map(|p| p.as_rational().unwrap())
            .collect();
        let mut expected = vec![
            rat(2, 1),
            rat(1, 1),
            rat(3, 1),
            rat(27, 2),
            rat(25, 4),
            rat(-1, 1),
            rat(-3, 1),
            rat(-125, 8),
            rat(135, 4),
            rat(-135, 4),
            rat(-675, 8),
        ];
        got.sort();
        expected.sort();
        assert_eq!(got, expected);
    }

    #[test]
    fn gram_exact_k6_products_are_integral() {
        let g = gram_exact(6).unwrap();
        assert_eq!(g.cyclic_products.len(), 11);
        for p in &g.cyclic_products {
            assert!(is_algebraic_integer(p), "non-integral product {:?}", p);
        }
    }

    #[test]
    fn gram_exact_k2_products_are_not_all_integral() {
        let g = gram_exact(2).unwrap();
        assert!(!g.cyclic_products.iter().all(is_algebraic_integer));
    }

    #[test]
    fn gram_det_matches_closed_form_first_values() {
        for k in [2u64, 4, 6, 8] {
            let g = gram_det_only(k).unwrap();
            let expected = CycloElement::from_int(g.conductor, -108)
                .mul(&g.alpha_sq)
                .mul(&g.alpha_sq);
            assert_eq!(g.det_gprime, expected, "k={}", k);
        }
    }

    #[test]
    fn gram_entries_embed_to_hyperbolic_lengths() {
        // Embedding j=1 sends alpha to 2cos(pi/3k); check the closed forms.
        for k in [2u64, 4, 6] {
            let g = gram_exact(k).unwrap();
            let theta = PI / (3.0 * k as f64);
            let a = 2.0 * theta.cos();
            let alpha_f = g.alpha.embed(1).re;
            assert!((alpha_f - a).abs() < 1e-12);
            let l1sq_f = g.l1_tilde_sq.embed(1).re;
            let expect_l1sq = 9.0 * a * a / (a * a - 1.0);
            assert!((l1sq_f - expect_l1sq).abs() < 1e-10);
            let l2_f = g.l2_tilde.embed(1).re;
            let expect_l2 = -(a * a + 2.0) / (a * a - 1.0);
            assert!((l2_f - expect_l2).abs() < 1e-10);
        }
    }

    #[test]
    fn verdict_k2() {
        let v = arithmetic_verdict(2).unwrap();
        assert_eq!(v.trace_field_degree, 2);
        assert_eq!(v.adjoint_field_degree, 1);
        assert_eq!(v.disc_radicand, -3);
        assert!(!v.integral_traces);
        assert!(v.quasi_arithmetic);
        assert!(!v.arithmetic);
    }

    #[test]
    fn verdict_k6_integral_but_not_quasi() {
        let v = arithmetic_verdict(6).unwrap();
        assert_eq!(v.trace_field_degree, euler_phi(18));
        assert_eq!(v.adjoint_field_degree, euler_phi(18) / 2);
        assert!(v.integral_traces);
        assert!(!v.quasi_arithmetic);
        assert!(!v.arithmetic);
    }

    #[test]
    fn verdict_powers_of_two_lack_integral_traces() {
        for k in [2u64, 4, 8, 16] {
            let v = arithmetic_verdict(k).unwrap();
            assert!(!v.integral_traces, "k={}", k);
        }
        for k in [6u64, 10, 12] {
            let v = arithmetic_verdict(k).unwrap();
            assert!(v.integral_traces, "k={}", k);
        }
    }

    #[test]
    fn power_of_two_detection() {
        assert!(is_power_of_two(1));
        assert!(is_power_of_two(2));
        assert!(is_power_of_two(32));
        assert!(!is_power_of_two(0));
        assert!(!is_power_of_two(6));
        assert!(!is_power_of_two(12));
    }
}
