//! A finite model of `C_inf`: truncated Laurent series in `pi = theta^(-1/r)` with
//! coefficients in `F_{q^m}`.
//!
//! Exponents are stored in units of `1/r`, so the digit at index `k` stands for
//! `pi^k` and has valuation `k/r` (normalised by `v(theta) = -1`). Each number
//! carries its own absolute precision: every exponent `>= prec` is unknown.
//! `prec == None` marks an exact value (finite sum of monomials).

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{Fe, FieldError, Gf};

/// Absolute precision; `None` means exact.
pub type Prec = Option<i64>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CinfError {
    #[error("invalid field parameters: {0}")]
    Params(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("operands live in different fields")]
    Mismatch,
    #[error("value is indistinguishable from zero at precision {prec:?}")]
    Indistinguishable { prec: Prec },
    #[error("{k}-th roots need k prime to the characteristic {p}")]
    RootDegree { k: u32, p: u32 },
    #[error("valuation {val}/r is not divisible by {k}")]
    RootValuation { val: i64, k: u32 },
    #[error("leading digit has no {k}-th root in the residue field")]
    NoResidueRoot { k: u32 },
    #[error("malformed rendering: {0}")]
    Parse(String),
}

/// Parameters of the model `F_{q^m}((pi))`, `pi^r = 1/theta`, `q = p^e`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldParams {
    pub p: u32,
    pub e: u32,
    pub m: u32,
    /// Ramification index; the value group is `(1/r) Z`.
    pub r: u32,
    /// Working precision in `1/r` units.
    pub prec: i64,
}

impl FieldParams {
    /// Defaults for a given `q`: `m = 2` (`m = 1` in characteristic 2),
    /// `r = q - 1` (so `lambda_theta` exists), `P = 200`.
    pub fn for_q(q: u32) -> Result<Self, CinfError> {
        let (p, e) = prime_power(q).ok_or_else(|| CinfError::Params(format!("q = {q} is not a prime power")))?;
        Ok(FieldParams {
            p,
            e,
            m: if p == 2 { 1 } else { 2 },
            r: (q - 1).max(1),
            prec: 200,
        })
    }

    pub fn q(&self) -> u64 {
        (self.p as u64).pow(self.e)
    }

    pub fn validate(&self) -> Result<(), CinfError> {
        if !crate::field::is_prime(self.p) {
            return Err(CinfError::Params(format!("p = {} is not prime", self.p)));
        }
        if self.e == 0 || self.m == 0 || self.r == 0 {
            return Err(CinfError::Params("e, m and r must be positive".into()));
        }
        if self.prec < 1 {
            return Err(CinfError::Params("precision must be at least 1".into()));
        }
        if self.q() < 2 {
            return Err(CinfError::Params("q must be at least 2".into()));
        }
        Ok(())
    }
}

/// Returns `(p, e)` with `q = p^e`.
pub fn prime_power(q: u32) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2;
    while !q.is_multiple_of(p) {
        p += 1;
    }
    let (mut n, mut e) = (q, 0);
    while n % p == 0 {
        n /= p;
        e += 1;
    }
    (n == 1).then_some((p, e))
}

/// Shared arithmetic context: parameters plus the residue field tables.
#[derive(Debug)]
pub struct Cinf {
    params: FieldParams,
    gf: Gf,
}

impl Cinf {
    pub fn new(params: FieldParams) -> Result<Arc<Self>, CinfError> {
        params.validate()?;
        let gf = Gf::new(params.p, params.e * params.m)?;
        Ok(Arc::new(Cinf { params, gf }))
    }

    pub fn params(&self) -> &FieldParams {
        &self.params
    }

    pub fn gf(&self) -> &Gf {
        &self.gf
    }

    pub fn q(&self) -> u64 {
        self.params.q()
    }

    pub fn r(&self) -> i64 {
        self.params.r as i64
    }

    pub fn prec(&self) -> i64 {
        self.params.prec
    }

    /// `q^i`, saturating.
    pub fn q_pow(&self, i: u32) -> i64 {
        (self.q() as i64).saturating_pow(i)
    }

    /// An `F_p`-basis of `F_q` inside `F_{q^m}`.
    pub fn fq_basis(&self) -> Vec<Fe> {
        let gf = &self.gf;
        let order = gf.size() as u64 - 1;
        let gamma = gf.pow(gf.generator(), (order / (self.q() - 1)) as u128);
        let mut basis = vec![Fe::ONE];
        for _ in 1..self.params.e {
            let last = *basis.last().unwrap();
            basis.push(gf.mul(last, gamma));
        }
        basis
    }

    /// The elements of `F_q`, ordered by the encoding.
    pub fn fq_elements(&self) -> Vec<Fe> {
        let q = self.q() as u128;
        self.gf.elements().filter(|&a| self.gf.pow(a, q) == a).collect()
    }

    /// Maps `0..q` onto `F_q` via base-`p` digits on [`Cinf::fq_basis`].
    pub fn fq_from_index(&self, mut n: u64) -> Fe {
        let basis = self.fq_basis();
        let mut acc = Fe::ZERO;
        for b in basis {
            let d = self.gf.from_int((n % self.params.p as u64) as i64);
            acc = self.gf.add(acc, self.gf.mul(d, b));
            n /= self.params.p as u64;
        }
        acc
    }

    pub fn same(self: &Arc<Self>, other: &Arc<Self>) -> bool {
        Arc::ptr_eq(self, other) || self.params == other.params
    }
}

/// An element of the model of `C_inf`.
#[derive(Clone)]
pub struct CinfNum {
    ctx: Arc<Cinf>,
    /// Strictly increasing exponents, nonzero digits, all below `prec`.
    terms: Vec<(i64, Fe)>,
    prec: Prec,
}

fn prec_min(a: Prec, b: Prec) -> Prec {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => Some(x.min(y)),
    }
}

fn prec_shift(a: Prec, by: i64) -> Prec {
    a.map(|x| x.saturating_add(by))
}

impl CinfNum {
    pub fn from_terms(ctx: &Arc<Cinf>, mut terms: Vec<(i64, Fe)>, prec: Prec) -> Self {
        terms.sort_by_key(|t| t.0);
        let gf = ctx.gf();
        let mut merged: Vec<(i64, Fe)> = Vec::with_capacity(terms.len());
        for (k, a) in terms {
            match merged.last_mut() {
                Some(last) if last.0 == k => last.1 = gf.add(last.1, a),
                _ => merged.push((k, a)),
            }
        }
        merged.retain(|&(k, a)| !a.is_zero() && prec.is_none_or(|p| k < p));
        CinfNum { ctx: ctx.clone(), terms: merged, prec }
    }

    pub fn zero(ctx: &Arc<Cinf>) -> Self {
        CinfNum { ctx: ctx.clone(), terms: Vec::new(), prec: None }
    }

    /// Zero known only up to `pi^prec`.
    pub fn zero_to(ctx: &Arc<Cinf>, prec: i64) -> Self {
        CinfNum { ctx: ctx.clone(), terms: Vec::new(), prec: Some(prec) }
    }

    pub fn one(ctx: &Arc<Cinf>) -> Self {
        Self::constant(ctx, Fe::ONE)
    }

    pub fn constant(ctx: &Arc<Cinf>, a: Fe) -> Self {
        Self::monomial(ctx, a, 0)
    }

    pub fn from_int(ctx: &Arc<Cinf>, n: i64) -> Self {
        Self::constant(ctx, ctx.gf().from_int(n))
    }

    /// `a * pi^k` (exact).
    pub fn monomial(ctx: &Arc<Cinf>, a: Fe, k: i64) -> Self {
        let terms = if a.is_zero() { vec![] } else { vec![(k, a)] };
        CinfNum { ctx: ctx.clone(), terms, prec: None }
    }

    /// `theta^n` (exact).
    pub fn theta_pow(ctx: &Arc<Cinf>, n: i64) -> Self {
        Self::monomial(ctx, Fe::ONE, -n * ctx.r())
    }

    pub fn theta(ctx: &Arc<Cinf>) -> Self {
        Self::theta_pow(ctx, 1)
    }

    /// `sum_k c_k theta^k` for coefficients given in the prime field.
    pub fn theta_poly(ctx: &Arc<Cinf>, coeffs: &[Fe]) -> Self {
        let terms = coeffs
            .iter()
            .enumerate()
            .map(|(k, &c)| (-(k as i64) * ctx.r(), c))
            .collect();
        Self::from_terms(ctx, terms, None)
    }

    pub fn ctx(&self) -> &Arc<Cinf> {
        &self.ctx
    }

    pub fn terms(&self) -> &[(i64, Fe)] {
        &self.terms
    }

    pub fn prec(&self) -> Prec {
        self.prec
    }

    pub fn is_exact(&self) -> bool {
        self.prec.is_none()
    }

    /// True when no digit is known to be nonzero.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Valuation in `1/r` units; `None` for (indistinguishable from) zero.
    pub fn val(&self) -> Option<i64> {
        self.terms.first().map(|t| t.0)
    }

    /// Valuation as a rational number (`v(theta) = -1`).
    pub fn valuation(&self) -> Option<Rational64> {
        self.val().map(|k| Rational64::new(k, self.ctx.r()))
    }

    /// What a residual is worth: the valuation if nonzero, otherwise the
    /// precision up to which it is known to vanish (`None` = exactly zero).
    pub fn residual(&self) -> Option<i64> {
        match self.val() {
            Some(v) => Some(v),
            None => self.prec,
        }
    }

    pub fn leading(&self) -> Option<Fe> {
        self.terms.first().map(|t| t.1)
    }

    pub fn truncate(&self, prec: i64) -> Self {
        let p = prec_min(self.prec, Some(prec));
        let terms = self.terms.iter().copied().filter(|t| t.0 < prec).collect();
        CinfNum { ctx: self.ctx.clone(), terms, prec: p }
    }

    /// Forgets the precision bound (used inside Newton iterations).
    fn as_exact(&self) -> Self {
        CinfNum { ctx: self.ctx.clone(), terms: self.terms.clone(), prec: None }
    }

    fn check(&self, other: &Self) -> Result<(), CinfError> {
        if self.ctx.same(&other.ctx) {
            Ok(())
        } else {
            Err(CinfError::Mismatch)
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, CinfError> {
        self.check(other)?;
        let prec = prec_min(self.prec, other.prec);
        let terms = merge(self.ctx.gf(), &self.terms, &other.terms, prec, false);
        Ok(CinfNum { ctx: self.ctx.clone(), terms, prec })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, CinfError> {
        self.check(other)?;
        let prec = prec_min(self.prec, other.prec);
        let terms = merge(self.ctx.gf(), &self.terms, &other.terms, prec, true);
        Ok(CinfNum { ctx: self.ctx.clone(), terms, prec })
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, CinfError> {
        self.check(other)?;
        let prec = match (self.val(), other.val()) {
            (Some(vx), Some(vy)) => prec_min(prec_shift(self.prec, vy), prec_shift(other.prec, vx)),
            (Some(vx), None) => prec_shift(other.prec, vx),
            (None, Some(vy)) => prec_shift(self.prec, vy),
            (None, None) => match (self.prec, other.prec) {
                (Some(a), Some(b)) => Some(a.saturating_add(b)),
                _ => None,
            },
        };
        let terms = raw_mul(self.ctx.gf(), &self.terms, &other.terms, prec);
        Ok(CinfNum { ctx: self.ctx.clone(), terms, prec })
    }

    pub fn scale(&self, a: Fe) -> Self {
        if a.is_zero() {
            return CinfNum { ctx: self.ctx.clone(), terms: vec![], prec: self.prec };
        }
        let gf = self.ctx.gf();
        let terms = self.terms.iter().map(|&(k, b)| (k, gf.mul(a, b))).collect();
        CinfNum { ctx: self.ctx.clone(), terms, prec: self.prec }
    }

    /// Multiplication by `pi^k`.
    pub fn shift(&self, k: i64) -> Self {
        let terms = self.terms.iter().map(|&(e, a)| (e + k, a)).collect();
        CinfNum { ctx: self.ctx.clone(), terms, prec: prec_shift(self.prec, k) }
    }

    /// Multiplicative inverse, computed by inverting the leading term and
    /// running Newton's iteration on the 1-unit part.
    pub fn inv(&self) -> Result<Self, CinfError> {
        let (v, lead) = match self.terms.first() {
            Some(&t) => t,
            None => return Err(CinfError::Indistinguishable { prec: self.prec }),
        };
        let gf = self.ctx.gf();
        let lead_inv = gf.inv(lead).expect("nonzero digit");
        if self.terms.len() == 1 && self.prec.is_none() {
            return Ok(CinfNum::monomial(&self.ctx, lead_inv, -v));
        }
        let rel = self.relative_prec();
        let unit = self.scale(lead_inv).shift(-v).truncate(rel).as_exact();
        let y = newton_inverse(&unit, rel);
        Ok(y.scale(lead_inv).shift(-v).truncate(rel - v))
    }

    /// Relative precision, capped at the working precision.
    fn relative_prec(&self) -> i64 {
        let cap = self.ctx.prec();
        match (self.prec, self.val()) {
            (Some(p), Some(v)) => (p - v).min(cap),
            _ => cap,
        }
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self, CinfError> {
        self.checked_mul(&other.inv()?)
    }

    /// `x^(q^i)`: exponents scale by `q^i`, digits go through Frobenius.
    pub fn qpow(&self, i: u32) -> Self {
        if i == 0 {
            return self.clone();
        }
        let qi = self.ctx.q_pow(i);
        let gf = self.ctx.gf();
        let steps = self.ctx.params().e * i;
        let terms = self
            .terms
            .iter()
            .map(|&(k, a)| (k.saturating_mul(qi), gf.frobenius(a, steps)))
            .collect();
        CinfNum { ctx: self.ctx.clone(), terms, prec: self.prec.map(|p| p.saturating_mul(qi)) }
    }

    /// `x^n` by repeated squaring.
    pub fn pow(&self, mut n: u64) -> Self {
        let mut base = self.clone();
        let mut acc = CinfNum::one(&self.ctx);
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// A `k`-th root, via the smallest residue-field root of the leading digit
    /// followed by Newton lifting of the 1-unit part.
    pub fn kth_root(&self, k: u32) -> Result<Self, CinfError> {
        let p = self.ctx.params().p;
        if k == 0 || k.is_multiple_of(p) {
            return Err(CinfError::RootDegree { k, p });
        }
        let (v, lead) = match self.terms.first() {
            Some(&t) => t,
            None => return Err(CinfError::Indistinguishable { prec: self.prec }),
        };
        if v % k as i64 != 0 {
            return Err(CinfError::RootValuation { val: v, k });
        }
        let gf = self.ctx.gf();
        let root_lead = *gf.roots(lead, k).first().ok_or(CinfError::NoResidueRoot { k })?;
        let lead_inv = gf.inv(lead).expect("nonzero digit");
        let vr = v / k as i64;
        if self.terms.len() == 1 && self.prec.is_none() {
            return Ok(CinfNum::monomial(&self.ctx, root_lead, vr));
        }
        let rel = self.relative_prec();
        let unit = self.scale(lead_inv).shift(-v).truncate(rel).as_exact();
        // s -> s + s (1 - w s^k) / k converges to w^(-1/k).
        let k_inv = gf.inv(gf.from_int(k as i64)).expect("k prime to p");
        let one = CinfNum::one(&self.ctx);
        let mut s = one.clone();
        let mut reached = 1i64;
        while reached < rel {
            reached = (reached * 2).min(rel);
            let w = unit.truncate(reached).as_exact();
            let err = (&one - &(&w * &s.pow(k as u64)).truncate(reached).as_exact()).truncate(reached);
            s = (&s + &(&s * &err).scale(k_inv)).truncate(reached).as_exact();
        }
        let root_unit = (&unit * &s.pow(k as u64 - 1)).truncate(rel);
        Ok(root_unit.scale(root_lead).shift(vr).truncate(rel + vr))
    }

    /// Text rendering: `[(k, c), ...] + O(pi^prec)` with `c` a polynomial in `z`.
    pub fn render(&self) -> String {
        let gf = self.ctx.gf();
        let body: Vec<String> = self.terms.iter().map(|&(k, a)| format!("({k}, {})", gf.render(a))).collect();
        match self.prec {
            Some(p) => format!("[{}] + O(pi^{p})", body.join(", ")),
            None => format!("[{}]", body.join(", ")),
        }
    }

    pub fn to_json(&self) -> CinfJson {
        let gf = self.ctx.gf();
        CinfJson {
            terms: self.terms.iter().map(|&(k, a)| (k, gf.coords(a))).collect(),
            prec: self.prec,
        }
    }

    pub fn from_json(ctx: &Arc<Cinf>, json: &CinfJson) -> Result<Self, CinfError> {
        let gf = ctx.gf();
        let mut terms = Vec::with_capacity(json.terms.len());
        let mut last = None;
        for (k, coords) in &json.terms {
            if last.is_some_and(|l| l >= *k) {
                return Err(CinfError::Parse("exponents must increase".into()));
            }
            if json.prec.is_some_and(|p| *k >= p) {
                return Err(CinfError::Parse(format!("exponent {k} beyond precision")));
            }
            last = Some(*k);
            let a = gf
                .from_coords(coords)
                .ok_or_else(|| CinfError::Parse(format!("bad coefficient {coords:?}")))?;
            if a.is_zero() {
                return Err(CinfError::Parse("zero digits are not stored".into()));
            }
            terms.push((*k, a));
        }
        Ok(CinfNum { ctx: ctx.clone(), terms, prec: json.prec })
    }

    /// Bit-level equality (same digits, same precision).
    pub fn identical(&self, other: &Self) -> bool {
        self.ctx.same(&other.ctx) && self.terms == other.terms && self.prec == other.prec
    }

    /// Residual of `self - other` (see [`CinfNum::residual`]).
    pub fn distance(&self, other: &Self) -> Option<i64> {
        (self - other).residual()
    }
}

/// Serialised form of a [`CinfNum`]: `(exponent, F_p coordinates)` pairs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CinfJson {
    pub terms: Vec<(i64, Vec<u32>)>,
    pub prec: Prec,
}

impl fmt::Debug for CinfNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl fmt::Display for CinfNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Equality up to the common precision.
impl PartialEq for CinfNum {
    fn eq(&self, other: &Self) -> bool {
        self.ctx.same(&other.ctx) && (self - other).is_zero()
    }
}

fn merge(gf: &Gf, a: &[(i64, Fe)], b: &[(i64, Fe)], prec: Prec, negate_b: bool) -> Vec<(i64, Fe)> {
    let below = |k: i64| prec.is_none_or(|p| k < p);
    let nb = |x: Fe| if negate_b { gf.neg(x) } else { x };
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let (k, c) = if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
            i += 1;
            a[i - 1]
        } else if i == a.len() || b[j].0 < a[i].0 {
            j += 1;
            (b[j - 1].0, nb(b[j - 1].1))
        } else {
            i += 1;
            j += 1;
            (a[i - 1].0, gf.add(a[i - 1].1, nb(b[j - 1].1)))
        };
        if !below(k) {
            break;
        }
        if !c.is_zero() {
            out.push((k, c));
        }
    }
    out
}

fn raw_mul(gf: &Gf, a: &[(i64, Fe)], b: &[(i64, Fe)], prec: Prec) -> Vec<(i64, Fe)> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let lo = a[0].0 + b[0].0;
    let hi = match prec {
        Some(p) => p.min(a[a.len() - 1].0 + b[b.len() - 1].0 + 1),
        None => a[a.len() - 1].0 + b[b.len() - 1].0 + 1,
    };
    if hi <= lo {
        return Vec::new();
    }
    let span = (hi - lo) as u64;
    let work = (a.len() as u64) * (b.len() as u64);
    if span <= 4096 || span <= 8 * work {
        let mut buf = vec![Fe::ZERO; span as usize];
        for &(ka, ca) in a {
            if ka + b[0].0 >= hi {
                break;
            }
            for &(kb, cb) in b {
                let k = ka + kb;
                if k >= hi {
                    break;
                }
                let slot = &mut buf[(k - lo) as usize];
                *slot = gf.add(*slot, gf.mul(ca, cb));
            }
        }
        buf.into_iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (lo + i as i64, c))
            .collect()
    } else {
        let mut prods = Vec::new();
        for &(ka, ca) in a {
            if ka + b[0].0 >= hi {
                break;
            }
            for &(kb, cb) in b {
                let k = ka + kb;
                if k >= hi {
                    break;
                }
                prods.push((k, gf.mul(ca, cb)));
            }
        }
        prods.sort_by_key(|t| t.0);
        let mut out: Vec<(i64, Fe)> = Vec::with_capacity(prods.len());
        for (k, c) in prods {
            match out.last_mut() {
                Some(last) if last.0 == k => last.1 = gf.add(last.1, c),
                _ => out.push((k, c)),
            }
        }
        out.retain(|t| !t.1.is_zero());
        out
    }
}

/// Inverse of an exact 1-unit `u` modulo `pi^rel` (`y -> y (2 - u y)`).
fn newton_inverse(u: &CinfNum, rel: i64) -> CinfNum {
    let ctx = u.ctx();
    let two = CinfNum::from_int(ctx, 2);
    let mut y = CinfNum::one(ctx);
    let mut reached = 1i64;
    while reached < rel {
        reached = (reached * 2).min(rel);
        let uy = (&u.truncate(reached).as_exact() * &y).truncate(reached).as_exact();
        y = (&y * &(&two - &uy)).truncate(reached).as_exact();
    }
    y
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait<&CinfNum> for &CinfNum {
            type Output = CinfNum;
            fn $method(self, rhs: &CinfNum) -> CinfNum {
                self.$checked(rhs).expect("operands from different fields")
            }
        }
        impl $trait<CinfNum> for CinfNum {
            type Output = CinfNum;
            fn $method(self, rhs: CinfNum) -> CinfNum {
                (&self).$checked(&rhs).expect("operands from different fields")
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);

impl Neg for &CinfNum {
    type Output = CinfNum;
    fn neg(self) -> CinfNum {
        let gf = self.ctx.gf();
        let terms = self.terms.iter().map(|&(k, a)| (k, gf.neg(a))).collect();
        CinfNum { ctx: self.ctx.clone(), terms, prec: self.prec }
    }
}

impl Neg for CinfNum {
    type Output = CinfNum;
    fn neg(self) -> CinfNum {
        -&self
    }
}

/// `lambda_theta`, the distinguished `(q-1)`-th root of `-theta`.
pub fn lambda_theta(ctx: &Arc<Cinf>) -> Result<CinfNum, CinfError> {
    let minus_theta = -CinfNum::theta(ctx);
    let k = (ctx.q() - 1) as u32;
    if k == 1 {
        return Ok(minus_theta);
    }
    minus_theta.kth_root(k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(q: u32, prec: i64) -> Arc<Cinf> {
        let mut p = FieldParams::for_q(q).unwrap();
        p.prec = prec;
        Cinf::new(p).unwrap()
    }

    #[test]
    fn theta_times_inverse_is_one() {
        let c = ctx(3, 60);
        let t = CinfNum::theta(&c);
        let prod = &t * &t.inv().unwrap();
        assert!(prod.identical(&CinfNum::one(&c)));
    }

    #[test]
    fn lambda_theta_power_is_minus_theta() {
        for q in [2, 3, 4, 5] {
            let c = ctx(q, 40);
            let lam = lambda_theta(&c).unwrap();
            let lhs = lam.pow(q as u64 - 1);
            assert_eq!(lhs, -CinfNum::theta(&c), "q = {q}");
            assert_eq!(lam.valuation(), Some(Rational64::new(-1, q as i64 - 1)));
        }
    }

    #[test]
    fn difference_of_squares() {
        let c = ctx(3, 50);
        let one = CinfNum::one(&c);
        let pi = CinfNum::monomial(&c, Fe::ONE, 1);
        let lhs = &(&one + &pi) * &(&one - &pi);
        let rhs = &one - &(&pi * &pi);
        assert!(lhs.identical(&rhs));
    }

    #[test]
    fn geometric_series_inverse() {
        let c = ctx(2, 30);
        // 1 - 1/theta with r = 1: 1 - pi
        let x = &CinfNum::one(&c) - &CinfNum::theta_pow(&c, -1);
        let y = x.inv().unwrap();
        assert_eq!(y.prec(), Some(30));
        let expected: Vec<(i64, Fe)> = (0..30).map(|k| (k, Fe::ONE)).collect();
        assert_eq!(y.terms(), &expected[..]);
        assert!((&x * &y).distance(&CinfNum::one(&c)).unwrap() >= 30);
    }

    #[test]
    fn frobenius_examples() {
        let c = ctx(3, 40);
        let t = CinfNum::theta(&c);
        assert!(t.qpow(1).identical(&CinfNum::theta_pow(&c, 3)));
        let lam = lambda_theta(&c).unwrap();
        assert_eq!(lam.qpow(1), -(&t * &lam));
    }

    #[test]
    fn kth_root_cases() {
        let c = ctx(3, 60);
        let one = CinfNum::one(&c);
        assert!(one.kth_root(2).unwrap().identical(&one));
        let pi = CinfNum::monomial(&c, Fe::ONE, 1);
        let base = &one + &pi;
        let sq = (&base * &base).truncate(60);
        let root = sq.kth_root(2).unwrap();
        // The chosen root has the smaller leading digit, which is 1 here.
        assert_eq!(root, base);
        assert!(matches!(one.kth_root(3), Err(CinfError::RootDegree { .. })));
        assert!(matches!(pi.kth_root(2), Err(CinfError::RootValuation { .. })));
    }

    #[test]
    fn missing_residue_root_is_reported() {
        let params = FieldParams { p: 3, e: 1, m: 1, r: 2, prec: 20 };
        let c = Cinf::new(params).unwrap();
        assert!(matches!(lambda_theta(&c), Err(CinfError::NoResidueRoot { k: 2 })));
    }

    #[test]
    fn mismatched_fields_are_rejected() {
        let a = CinfNum::one(&ctx(2, 10));
        let b = CinfNum::one(&ctx(3, 10));
        assert_eq!(a.checked_add(&b).unwrap_err(), CinfError::Mismatch);
    }

    #[test]
    fn precision_propagation() {
        let c = ctx(2, 100);
        let x = CinfNum::from_terms(&c, vec![(-3, Fe::ONE), (0, Fe::ONE)], Some(10));
        let y = CinfNum::from_terms(&c, vec![(2, Fe::ONE)], Some(7));
        let s = &x + &y;
        assert_eq!(s.prec(), Some(7));
        let m = &x * &y;
        // min(10 + 2, 7 - 3)
        assert_eq!(m.prec(), Some(4));
        let z = CinfNum::zero_to(&c, 5);
        assert!(z.inv().is_err());
    }

    #[test]
    fn json_round_trip() {
        let c = ctx(3, 40);
        let lam = lambda_theta(&c).unwrap();
        let x = &(&lam + &CinfNum::theta_pow(&c, -2)).inv().unwrap() * &CinfNum::from_int(&c, 2);
        let s = serde_json::to_string(&x.to_json()).unwrap();
        let back: CinfJson = serde_json::from_str(&s).unwrap();
        assert!(CinfNum::from_json(&c, &back).unwrap().identical(&x));
    }
}
