//! Exact arithmetic over prime fields GF(p) and extension fields GF(p^k),
//! plus the dense matrix kernels built on top of them.
//!
//! Elements are encoded as integers in `[0, p^k)`: the base-p digits of the
//! encoding are the coefficients of a polynomial of degree below k, constant
//! term first. For k = 1 this is ordinary arithmetic modulo p.

mod matrix;

pub use matrix::Matrix;

use thiserror::Error;

/// Largest supported field order. Keeps every product of two encodings well
/// inside `u64` and keeps exhaustive element scans viable.
pub const MAX_ORDER: u64 = 1 << 32;

const MAX_DEGREE: usize = 32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GfError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("field order p^k exceeds the supported range")]
    OrderOverflow,
    #[error("division by zero")]
    DivisionByZero,
}

/// A finite field GF(p^k) together with its reduction polynomial.
///
/// The modulus is the lexicographically smallest monic irreducible polynomial
/// of degree k over GF(p), comparing coefficient tuples from the constant
/// term up. For k = 1 it is the placeholder `x` and no reduction ever runs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Field {
    p: u64,
    k: u32,
    order: u64,
    /// Coefficients of the modulus, constant term first, length k + 1, monic.
    modulus: Vec<u64>,
}

impl Field {
    /// Construct GF(p^k). Fails if `p` is not prime or `p^k` overflows.
    pub fn new(p: u64, k: u32) -> Result<Field, GfError> {
        if !is_prime(p) {
            return Err(GfError::NotPrime(p));
        }
        if k == 0 {
            return Err(GfError::ZeroDegree);
        }
        let order = p
            .checked_pow(k)
            .filter(|&q| q <= MAX_ORDER)
            .ok_or(GfError::OrderOverflow)?;
        let modulus = if k == 1 {
            vec![0, 1]
        } else {
            smallest_irreducible(p, k as usize)
        };
        Ok(Field {
            p,
            k,
            order,
            modulus,
        })
    }

    pub fn characteristic(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.k
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    /// Modulus coefficients, constant term first (length k + 1, monic).
    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn contains(&self, a: u64) -> bool {
        a < self.order
    }

    /// All elements in canonical order.
    pub fn elements(&self) -> impl Iterator<Item = u64> {
        0..self.order
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        self.check(a);
        self.check(b);
        if self.k == 1 {
            return (a + b) % self.p;
        }
        let mut out = 0;
        let mut scale = 1;
        let (mut a, mut b) = (a, b);
        for _ in 0..self.k {
            out += (a % self.p + b % self.p) % self.p * scale;
            a /= self.p;
            b /= self.p;
            scale *= self.p;
        }
        out
    }

    pub fn neg(&self, a: u64) -> u64 {
        self.check(a);
        if self.k == 1 {
            return (self.p - a) % self.p;
        }
        let mut out = 0;
        let mut scale = 1;
        let mut a = a;
        for _ in 0..self.k {
            out += (self.p - a % self.p) % self.p * scale;
            a /= self.p;
            scale *= self.p;
        }
        out
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        self.check(a);
        self.check(b);
        if self.k == 1 {
            return a * b % self.p;
        }
        let k = self.k as usize;
        let mut conv = [0u64; 2 * MAX_DEGREE];
        let mut da = [0u64; MAX_DEGREE];
        let mut db = [0u64; MAX_DEGREE];
        let (mut ta, mut tb) = (a, b);
        for i in 0..k {
            da[i] = ta % self.p;
            db[i] = tb % self.p;
            ta /= self.p;
            tb /= self.p;
        }
        for i in 0..k {
            if da[i] == 0 {
                continue;
            }
            for j in 0..k {
                conv[i + j] = (conv[i + j] + da[i] * db[j]) % self.p;
            }
        }
        // Reduce mod the monic modulus, high degree down to k - 1.
        for deg in (k..2 * k - 1).rev() {
            let c = conv[deg];
            if c == 0 {
                continue;
            }
            conv[deg] = 0;
            for (j, &m) in self.modulus.iter().enumerate().take(k) {
                let idx = deg - k + j;
                conv[idx] = (conv[idx] + c * (self.p - m) % self.p) % self.p;
            }
        }
        let mut out = 0;
        for i in (0..k).rev() {
            out = out * self.p + conv[i];
        }
        out
    }

    pub fn pow(&self, a: u64, mut e: u64) -> u64 {
        self.check(a);
        let mut base = a;
        let mut out = 1;
        while e > 0 {
            if e & 1 == 1 {
                out = self.mul(out, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        out
    }

    /// Multiplicative inverse via a^(q-2); errors on zero.
    pub fn inv(&self, a: u64) -> Result<u64, GfError> {
        if a == 0 {
            return Err(GfError::DivisionByZero);
        }
        Ok(self.pow(a, self.order - 2))
    }

    pub fn div(&self, a: u64, b: u64) -> Result<u64, GfError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// Dot product of two element slices.
    pub fn dot(&self, a: &[u64], b: &[u64]) -> u64 {
        assert_eq!(a.len(), b.len(), "dot product length mismatch");
        a.iter()
            .zip(b)
            .fold(0, |acc, (&x, &y)| self.add(acc, self.mul(x, y)))
    }

    pub fn vec_add(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        assert_eq!(a.len(), b.len(), "vector length mismatch");
        a.iter().zip(b).map(|(&x, &y)| self.add(x, y)).collect()
    }

    pub fn vec_scale(&self, c: u64, v: &[u64]) -> Vec<u64> {
        v.iter().map(|&x| self.mul(c, x)).collect()
    }

    fn check(&self, a: u64) {
        assert!(
            a < self.order,
            "{a} is not an element of GF({})",
            self.order
        );
    }
}

impl std::fmt::Display for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.k == 1 {
            write!(f, "GF({})", self.p)
        } else {
            write!(f, "GF({}^{})", self.p, self.k)
        }
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Lexicographically smallest monic irreducible polynomial of degree k over
/// GF(p), comparing the lower-coefficient tuple constant term first.
fn smallest_irreducible(p: u64, k: usize) -> Vec<u64> {
    let total = p.pow(k as u32);
    for n in 0..total {
        // Decode n so that the constant term is the most significant digit,
        // giving lexicographic order on (c_0, .., c_{k-1}).
        let mut coeffs = vec![0u64; k + 1];
        coeffs[k] = 1;
        let mut m = n;
        for i in (0..k).rev() {
            coeffs[i] = m % p;
            m /= p;
        }
        if is_irreducible(&coeffs, p) {
            return coeffs;
        }
    }
    unreachable!("an irreducible polynomial of degree {k} exists over GF({p})");
}

/// Trial division by every monic polynomial of degree 1..=k/2.
fn is_irreducible(poly: &[u64], p: u64) -> bool {
    let k = poly.len() - 1;
    for d in 1..=k / 2 {
        let combos = p.pow(d as u32);
        for n in 0..combos {
            let mut div = vec![0u64; d + 1];
            div[d] = 1;
            let mut m = n;
            for c in div.iter_mut().take(d) {
                *c = m % p;
                m /= p;
            }
            if poly_rem_is_zero(poly, &div, p) {
                return false;
            }
        }
    }
    true
}

fn poly_rem_is_zero(num: &[u64], div: &[u64], p: u64) -> bool {
    let mut rem: Vec<u64> = num.to_vec();
    let d = div.len() - 1;
    while rem.len() > d {
        let lead = *rem.last().unwrap();
        if lead != 0 {
            let shift = rem.len() - 1 - d;
            for (j, &c) in div.iter().enumerate() {
                rem[shift + j] = (rem[shift + j] + lead * (p - c) % p) % p;
            }
        }
        rem.pop();
    }
    rem.iter().all(|&c| c == 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_prime_characteristic() {
        assert_eq!(Field::new(4, 1), Err(GfError::NotPrime(4)));
        assert_eq!(Field::new(1, 1), Err(GfError::NotPrime(1)));
        assert_eq!(Field::new(0, 2), Err(GfError::NotPrime(0)));
    }

    #[test]
    fn rejects_overflowing_order() {
        assert_eq!(Field::new(2, 64), Err(GfError::OrderOverflow));
        assert_eq!(Field::new(2, 0), Err(GfError::ZeroDegree));
    }

    #[test]
    fn prime_field_basics() {
        let f = Field::new(2, 1).unwrap();
        assert_eq!(f.order(), 2);
        assert_eq!(f.add(1, 1), 0);
        let f3 = Field::new(3, 1).unwrap();
        // 2 * 2 = 4 = 1 mod 3, so 2 is its own inverse.
        assert_eq!(f3.inv(2), Ok(2));
        assert_eq!(f3.inv(0), Err(GfError::DivisionByZero));
    }

    #[test]
    fn gf4_modulus_and_product() {
        let f = Field::new(2, 2).unwrap();
        assert_eq!(f.order(), 4);
        // x^2 + x + 1 is the only monic irreducible quadratic over GF(2).
        assert_eq!(f.modulus(), &[1, 1, 1]);
        // x * x = x^2 = x + 1, i.e. encodings 2 * 2 = 3.
        assert_eq!(f.mul(2, 2), 3);
    }

    #[test]
    fn gf9_modulus_is_first_in_scan_order() {
        let f = Field::new(3, 2).unwrap();
        // Enumerating (c0, c1) lexicographically, x^2, x^2+x and x^2+2x all
        // have root 0; x^2 + 1 has no roots in GF(3) and wins.
        assert_eq!(f.modulus(), &[1, 0, 1]);
    }

    #[test]
    fn gf8_and_gf16_moduli() {
        // Constant-term-first lexicographic order puts x^3+x^2+1 before the
        // more usual x^3+x+1, and x^4+x^3+1 before x^4+x+1.
        assert_eq!(Field::new(2, 3).unwrap().modulus(), &[1, 0, 1, 1]);
        assert_eq!(Field::new(2, 4).unwrap().modulus(), &[1, 0, 0, 1, 1]);
    }

    #[test]
    fn field_axioms_exhaustive_small_orders() {
        for (p, k) in [
            (2, 1),
            (3, 1),
            (2, 2),
            (5, 1),
            (7, 1),
            (2, 3),
            (3, 2),
            (11, 1),
            (13, 1),
            (2, 4),
        ] {
            let f = Field::new(p, k).unwrap();
            assert!(f.order() <= 16);
            for a in f.elements() {
                assert_eq!(f.add(a, 0), a);
                assert_eq!(f.mul(a, 1), a);
                assert_eq!(f.add(a, f.neg(a)), 0);
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
                }
                for b in f.elements() {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    for c in f.elements() {
                        assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn frobenius_fixes_prime_subfield() {
        for p in [2, 3, 5, 7] {
            let f = Field::new(p, 1).unwrap();
            for a in f.elements() {
                assert_eq!(f.pow(a, p), a);
            }
        }
    }
}
