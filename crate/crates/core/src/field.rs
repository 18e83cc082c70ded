//! Finite fields `F_{p^n}` realised as `F_p[z]/(f)` for a primitive polynomial `f`.
//!
//! Elements are encoded as integers whose base-`p` digits are the coefficients of
//! `1, z, z^2, ...`. This encoding also fixes the total order used whenever a
//! deterministic choice among field elements is needed (e.g. root selection).

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest field we are willing to tabulate.
const MAX_FIELD_SIZE: u64 = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not a prime")]
    NotPrime(u32),
    #[error("field of size {0} is too large to tabulate")]
    TooLarge(u64),
    #[error("degree must be at least 1")]
    ZeroDegree,
    #[error("no primitive polynomial of degree {degree} over F_{p} found")]
    NoPrimitivePoly { p: u32, degree: u32 },
}

/// An element of a tabulated finite field (base-`p` encoding, see module docs).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct Fe(pub u32);

impl Fe {
    pub const ZERO: Fe = Fe(0);
    pub const ONE: Fe = Fe(1);

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// The field `F_{p^n}` with log/antilog tables.
#[derive(Clone, Debug)]
pub struct Gf {
    p: u32,
    degree: u32,
    size: u32,
    /// Coefficients of the defining polynomial, low to high, monic of `degree`.
    modulus: Vec<u32>,
    exp: Vec<Fe>,
    log: Vec<u32>,
    add_table: Option<Vec<Fe>>,
}

impl Gf {
    pub fn new(p: u32, degree: u32) -> Result<Self, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if degree == 0 {
            return Err(FieldError::ZeroDegree);
        }
        let size = (p as u64).checked_pow(degree).unwrap_or(u64::MAX);
        if size > MAX_FIELD_SIZE {
            return Err(FieldError::TooLarge(size));
        }
        let size = size as u32;
        let order = size - 1;

        // Enumerate monic polynomials of the given degree until z has full order.
        let mut found = None;
        for tail in 0..size {
            let mut modulus = digits(tail, p, degree);
            modulus.push(1);
            if modulus[0] == 0 && degree > 1 {
                continue;
            }
            if let Some(exp) = powers_of_z(p, &modulus, order) {
                found = Some((modulus, exp));
                break;
            }
        }
        let (modulus, exp) = found.ok_or(FieldError::NoPrimitivePoly { p, degree })?;
        let mut log = vec![0u32; size as usize];
        for (k, e) in exp.iter().enumerate() {
            log[e.0 as usize] = k as u32;
        }
        let mut gf = Gf { p, degree, size, modulus, exp, log, add_table: None };
        if size <= 256 {
            let mut table = Vec::with_capacity((size * size) as usize);
            for a in 0..size {
                for b in 0..size {
                    table.push(gf.add_digits(Fe(a), Fe(b)));
                }
            }
            gf.add_table = Some(table);
        }
        Ok(gf)
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn size(&self) -> u32 {
        self.size
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    /// Primitive element `z`.
    pub fn generator(&self) -> Fe {
        self.exp[1 % self.exp.len()]
    }

    pub fn elements(&self) -> impl Iterator<Item = Fe> {
        (0..self.size).map(Fe)
    }

    /// Image of the integer `n` in the prime field.
    pub fn from_int(&self, n: i64) -> Fe {
        Fe(n.rem_euclid(self.p as i64) as u32)
    }

    fn add_digits(&self, a: Fe, b: Fe) -> Fe {
        if self.p == 2 {
            return Fe(a.0 ^ b.0);
        }
        let (mut a, mut b) = (a.0, b.0);
        let mut out = 0u32;
        let mut place = 1u32;
        while a > 0 || b > 0 {
            let d = (a % self.p + b % self.p) % self.p;
            out += d * place;
            place *= self.p;
            a /= self.p;
            b /= self.p;
        }
        Fe(out)
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        if self.p == 2 {
            return Fe(a.0 ^ b.0);
        }
        match &self.add_table {
            Some(t) => t[(a.0 * self.size + b.0) as usize],
            None => self.add_digits(a, b),
        }
    }

    pub fn neg(&self, a: Fe) -> Fe {
        if self.p == 2 {
            return a;
        }
        let mut x = a.0;
        let mut out = 0u32;
        let mut place = 1u32;
        while x > 0 {
            let d = x % self.p;
            out += ((self.p - d) % self.p) * place;
            place *= self.p;
            x /= self.p;
        }
        Fe(out)
    }

    #[inline]
    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        if a.is_zero() || b.is_zero() {
            return Fe::ZERO;
        }
        let order = self.size - 1;
        let k = self.log[a.0 as usize] + self.log[b.0 as usize];
        self.exp[(if k >= order { k - order } else { k }) as usize]
    }

    pub fn inv(&self, a: Fe) -> Option<Fe> {
        if a.is_zero() {
            return None;
        }
        let order = self.size - 1;
        let k = self.log[a.0 as usize];
        Some(self.exp[((order - k) % order) as usize])
    }

    /// `a^n` for an arbitrary (possibly huge) exponent.
    pub fn pow(&self, a: Fe, n: u128) -> Fe {
        if n == 0 {
            return Fe::ONE;
        }
        if a.is_zero() {
            return Fe::ZERO;
        }
        let order = (self.size - 1) as u128;
        let k = (self.log[a.0 as usize] as u128 * (n % order)) % order;
        self.exp[k as usize]
    }

    /// `a^(p^k)`.
    pub fn frobenius(&self, a: Fe, k: u32) -> Fe {
        if a.is_zero() {
            return a;
        }
        let order = (self.size - 1) as u64;
        let mut m = 1u64;
        for _ in 0..(k % self.degree) {
            m = m * self.p as u64 % order.max(1);
        }
        let k = (self.log[a.0 as usize] as u64 * m) % order.max(1);
        self.exp[k as usize]
    }

    /// Coefficients over `F_p` of `a`, low degree first, always `degree` long.
    pub fn coords(&self, a: Fe) -> Vec<u32> {
        digits(a.0, self.p, self.degree)
    }

    pub fn from_coords(&self, coords: &[u32]) -> Option<Fe> {
        if coords.len() > self.degree as usize || coords.iter().any(|&c| c >= self.p) {
            return None;
        }
        let mut v = 0u32;
        for &c in coords.iter().rev() {
            v = v * self.p + c;
        }
        Some(Fe(v))
    }

    /// All `k`-th roots of `a`, ascending in the encoding order.
    pub fn roots(&self, a: Fe, k: u32) -> Vec<Fe> {
        self.elements().filter(|&b| self.pow(b, k as u128) == a).collect()
    }

    /// Binomial coefficient `C(n, k)` reduced mod `p` (Lucas).
    pub fn binomial(&self, n: u64, k: u64) -> Fe {
        Fe(binomial_mod_p(n, k, self.p))
    }

    /// Polynomial rendering in the generator `z`, e.g. `2*z^2 + z + 1`.
    pub fn render(&self, a: Fe) -> String {
        let coords = self.coords(a);
        let mut parts = Vec::new();
        for (j, &c) in coords.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let s = match (j, c) {
                (0, c) => c.to_string(),
                (1, 1) => "z".to_string(),
                (1, c) => format!("{c}*z"),
                (j, 1) => format!("z^{j}"),
                (j, c) => format!("{c}*z^{j}"),
            };
            parts.push(s);
        }
        if parts.is_empty() {
            "0".to_string()
        } else {
            parts.join(" + ")
        }
    }
}

fn digits(mut x: u32, p: u32, len: u32) -> Vec<u32> {
    let mut out = Vec::with_capacity(len as usize);
    for _ in 0..len {
        out.push(x % p);
        x /= p;
    }
    out
}

/// Successive powers of `z` modulo `modulus`; `None` unless `z` has exactly order `order`.
fn powers_of_z(p: u32, modulus: &[u32], order: u32) -> Option<Vec<Fe>> {
    let n = modulus.len() - 1;
    let encode = |v: &[u32]| -> u32 { v.iter().rev().fold(0u32, |acc, &c| acc * p + c) };
    let mut cur = vec![0u32; n];
    cur[0] = 1;
    let mut out = Vec::with_capacity(order as usize);
    for k in 0..order {
        let code = encode(&cur);
        if k > 0 && code == 1 {
            return None;
        }
        out.push(Fe(code));
        // cur <- z * cur mod modulus
        let top = cur[n - 1];
        for j in (1..n).rev() {
            cur[j] = cur[j - 1];
        }
        cur[0] = 0;
        if top != 0 {
            for j in 0..n {
                cur[j] = (cur[j] + p * p - (top * modulus[j]) % p) % p;
            }
        }
    }
    if encode(&cur) == 1 {
        Some(out)
    } else {
        None
    }
}

/// `C(n, k) mod p` by Lucas' theorem.
pub fn binomial_mod_p(mut n: u64, mut k: u64, p: u32) -> u32 {
    let p64 = p as u64;
    let mut acc = 1u64;
    while k > 0 {
        let (nd, kd) = (n % p64, k % p64);
        if kd > nd {
            return 0;
        }
        acc = acc * small_binomial(nd, kd, p64) % p64;
        n /= p64;
        k /= p64;
    }
    acc as u32
}

fn small_binomial(n: u64, k: u64, p: u64) -> u64 {
    let mut num = 1u64;
    let mut den = 1u64;
    for i in 0..k {
        num = num * ((n - i) % p) % p;
        den = den * ((i + 1) % p) % p;
    }
    // den is a unit mod p because k < p
    num * mod_pow(den, p - 2, p) % p
}

fn mod_pow(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binom_exact(n: u64, k: u64) -> u128 {
        if k > n {
            return 0;
        }
        let mut r: u128 = 1;
        for i in 0..k {
            r = r * (n - i) as u128 / (i + 1) as u128;
        }
        r
    }

    #[test]
    fn lucas_matches_exact_binomials() {
        for p in [2u32, 3, 5, 7] {
            for n in 0..40u64 {
                for k in 0..=n {
                    assert_eq!(
                        binomial_mod_p(n, k, p) as u128,
                        binom_exact(n, k) % p as u128,
                        "C({n},{k}) mod {p}"
                    );
                }
            }
        }
    }

    #[test]
    fn small_fields_satisfy_field_axioms() {
        for (p, n) in [(2, 1), (2, 2), (3, 2), (2, 4), (5, 2), (3, 3)] {
            let f = Gf::new(p, n).unwrap();
            let q = f.size() as u128;
            for a in f.elements() {
                assert_eq!(f.pow(a, q), a, "x^q = x");
                assert_eq!(f.add(a, f.neg(a)), Fe::ZERO);
                if !a.is_zero() {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), Fe::ONE);
                }
                for b in f.elements() {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    for c in f.elements().step_by(3) {
                        assert_eq!(
                            f.mul(a, f.add(b, c)),
                            f.add(f.mul(a, b), f.mul(a, c)),
                            "distributivity"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn frobenius_is_additive() {
        let f = Gf::new(3, 2).unwrap();
        for a in f.elements() {
            for b in f.elements() {
                assert_eq!(
                    f.frobenius(f.add(a, b), 1),
                    f.add(f.frobenius(a, 1), f.frobenius(b, 1))
                );
            }
            assert_eq!(f.frobenius(a, 1), f.pow(a, 3));
        }
    }

    #[test]
    fn roots_of_minus_one() {
        // F_9 contains a square root of -1.
        let f = Gf::new(3, 2).unwrap();
        let minus_one = f.neg(Fe::ONE);
        let r = f.roots(minus_one, 2);
        assert_eq!(r.len(), 2);
        assert!(r[0] < r[1]);
        // F_3 does not.
        let f3 = Gf::new(3, 1).unwrap();
        assert!(f3.roots(f3.neg(Fe::ONE), 2).is_empty());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(Gf::new(4, 1).unwrap_err(), FieldError::NotPrime(4));
        assert_eq!(Gf::new(2, 0).unwrap_err(), FieldError::ZeroDegree);
        assert!(matches!(Gf::new(2, 30), Err(FieldError::TooLarge(_))));
    }

    #[test]
    fn render_and_coords_round_trip() {
        let f = Gf::new(3, 2).unwrap();
        for a in f.elements() {
            assert_eq!(f.from_coords(&f.coords(a)), Some(a));
        }
        assert_eq!(f.render(Fe(0)), "0");
        assert_eq!(f.render(Fe(5)), "z + 2");
    }
}
