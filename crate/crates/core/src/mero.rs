//! Meromorphic functions on the whole `t`-line whose poles lie on
//! `J = {theta, theta^q, theta^(q^2), ...}`.
//!
//! A [`MeroJRep`] stores, for `i = 0..=horizon`, the principal part
//! `sum_k c_{i,k} (t - theta^(q^i))^(-k)` and a polynomial tail. Everything with
//! poles beyond the horizon is dropped; `tail_bound` is a lower bound on the
//! valuation of its unit-disk Gauss norm (`None`: nothing was dropped).

use std::sync::Arc;

use num_rational::Rational64;
use thiserror::Error;

use crate::cinf::{Cinf, CinfNum, Prec};
use crate::tate::TateSeries;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MeroError {
    #[error("twisting needs a horizon of at least 1")]
    NoHorizon,
    #[error("twisting pushes a part of size {size} (needs >= {needed}) past the horizon")]
    HorizonOverflow { size: i64, needed: i64 },
}

fn prec_min(a: Prec, b: Prec) -> Prec {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => Some(x.min(y)),
    }
}

fn opt_add(a: Prec, b: Option<i64>) -> Prec {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.saturating_add(y)),
        _ => None,
    }
}

/// The pole `theta^(q^i)` (exact).
pub fn pole(ctx: &Arc<Cinf>, i: usize) -> CinfNum {
    CinfNum::theta_pow(ctx, ctx.q_pow(i as u32))
}

/// `log_q`-free size of `(t - theta^(q^i))^(-k)` on the unit disk, in `1/r` units.
fn pole_weight(ctx: &Cinf, i: usize, k: usize) -> i64 {
    (k as i64).saturating_mul(ctx.q_pow(i as u32)).saturating_mul(ctx.r())
}

/// `C(-k, j) = (-1)^j C(k + j - 1, j)` as an element of the prime field.
fn neg_binomial_in(ctx: &Arc<Cinf>, k: usize, j: usize) -> CinfNum {
    let gf = ctx.gf();
    let b = gf.binomial((k + j - 1) as u64, j as u64);
    let b = if j % 2 == 1 { gf.neg(b) } else { b };
    CinfNum::constant(ctx, b)
}

#[derive(Clone, Debug)]
pub struct MeroJRep {
    ctx: Arc<Cinf>,
    /// `parts[i][k - 1]` multiplies `(t - theta^(q^i))^(-k)`.
    parts: Vec<Vec<CinfNum>>,
    tail: TateSeries,
    tail_bound: Prec,
}

/// Tunables for [`MeroJRep::holomorphy_check`].
#[derive(Clone, Debug)]
pub struct HolomorphyOpts {
    /// `log_q` radii at which the tail is probed.
    pub radii: Vec<Rational64>,
    /// Fraction of the degree cap (from the top) used as the decay window.
    pub window_fraction: usize,
}

impl HolomorphyOpts {
    /// Radii `0, 1, q, ..., q^horizon`, i.e. up to `|theta^(q^horizon)|`.
    pub fn up_to_horizon(ctx: &Cinf, horizon: usize) -> Self {
        let mut radii = vec![Rational64::from_integer(0)];
        radii.extend((0..=horizon).map(|i| Rational64::from_integer(ctx.q_pow(i as u32))));
        HolomorphyOpts { radii, window_fraction: 4 }
    }
}

impl MeroJRep {
    pub fn zero(ctx: &Arc<Cinf>, horizon: usize, cap: usize) -> Self {
        MeroJRep {
            ctx: ctx.clone(),
            parts: vec![Vec::new(); horizon + 1],
            tail: TateSeries::zero(ctx, cap),
            tail_bound: None,
        }
    }

    pub fn from_parts(ctx: &Arc<Cinf>, parts: Vec<Vec<CinfNum>>, tail: TateSeries, tail_bound: Prec) -> Self {
        assert!(!parts.is_empty(), "a representation needs at least the part at theta");
        let mut out = MeroJRep { ctx: ctx.clone(), parts, tail, tail_bound };
        out.normalize();
        out
    }

    /// `c (t - theta^(q^i))^(-k)`.
    pub fn simple(ctx: &Arc<Cinf>, horizon: usize, cap: usize, i: usize, k: usize, c: CinfNum) -> Self {
        let mut out = Self::zero(ctx, horizon, cap);
        let mut part = vec![CinfNum::zero(ctx); k];
        part[k - 1] = c;
        out.parts[i] = part;
        out.normalize();
        out
    }

    pub fn from_tail(tail: TateSeries, horizon: usize) -> Self {
        let ctx = tail.ctx().clone();
        MeroJRep { ctx, parts: vec![Vec::new(); horizon + 1], tail, tail_bound: None }
    }

    fn normalize(&mut self) {
        for part in &mut self.parts {
            while part.last().is_some_and(|c| c.is_zero() && c.is_exact()) {
                part.pop();
            }
        }
    }

    pub fn ctx(&self) -> &Arc<Cinf> {
        &self.ctx
    }

    pub fn horizon(&self) -> usize {
        self.parts.len() - 1
    }

    pub fn parts(&self) -> &[Vec<CinfNum>] {
        &self.parts
    }

    pub fn part(&self, i: usize) -> &[CinfNum] {
        self.parts.get(i).map(Vec::as_slice).unwrap_or(&[])
    }

    /// `c_{i,k}`, zero when not stored.
    pub fn coeff(&self, i: usize, k: usize) -> CinfNum {
        self.part(i).get(k - 1).cloned().unwrap_or_else(|| CinfNum::zero(&self.ctx))
    }

    pub fn tail(&self) -> &TateSeries {
        &self.tail
    }

    pub fn tail_bound(&self) -> Prec {
        self.tail_bound
    }

    pub fn cap(&self) -> usize {
        self.tail.cap()
    }

    /// Largest `k` with `c_{i,k}` nonzero above its precision.
    pub fn pole_order(&self, i: usize) -> usize {
        self.part(i).iter().rposition(|c| !c.is_zero()).map_or(0, |k| k + 1)
    }

    pub fn max_pole_order(&self) -> usize {
        (0..self.parts.len()).map(|i| self.pole_order(i)).max().unwrap_or(0)
    }

    /// Stored order cap (length of the longest part).
    pub fn order_cap(&self) -> usize {
        self.parts.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Lower bound on the valuation of the unit-disk Gauss norm of the stored
    /// function; `None` if it is zero.
    pub fn norm_val(&self) -> Option<i64> {
        let mut best = self.tail.unit_val();
        for (i, part) in self.parts.iter().enumerate() {
            for (k, c) in part.iter().enumerate() {
                if let Some(v) = c.val() {
                    let w = v.saturating_add(pole_weight(&self.ctx, i, k + 1));
                    best = Some(best.map_or(w, |b| b.min(w)));
                }
            }
        }
        best
    }

    /// Size of the largest unknown or nonzero piece: the minimum over every
    /// coefficient residual, the tail and the neglected remainder.
    pub fn residual(&self) -> Prec {
        let mut acc = prec_min(self.tail.residual(), self.tail_bound);
        for part in &self.parts {
            for c in part {
                acc = prec_min(acc, c.residual());
            }
        }
        acc
    }

    pub fn distance(&self, other: &Self) -> Prec {
        self.sub(other).residual()
    }

    /// Residual restricted to the principal parts at `0..=upto`.
    pub fn parts_residual(&self, upto: usize) -> Prec {
        let mut acc = None;
        for part in self.parts.iter().take(upto + 1) {
            for c in part {
                acc = prec_min(acc, c.residual());
            }
        }
        acc
    }

    fn combine(&self, other: &Self, f: impl Fn(&CinfNum, &CinfNum) -> CinfNum, tail: TateSeries) -> Self {
        let n = self.parts.len().max(other.parts.len());
        let mut parts = Vec::with_capacity(n);
        for i in 0..n {
            let (a, b) = (self.part(i), other.part(i));
            let len = a.len().max(b.len());
            let zero = CinfNum::zero(&self.ctx);
            parts.push(
                (0..len)
                    .map(|k| f(a.get(k).unwrap_or(&zero), b.get(k).unwrap_or(&zero)))
                    .collect(),
            );
        }
        let mut out = MeroJRep {
            ctx: self.ctx.clone(),
            parts,
            tail,
            tail_bound: prec_min(self.tail_bound, other.tail_bound),
        };
        out.normalize();
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a + b, self.tail.add(&other.tail))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a - b, self.tail.sub(&other.tail))
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for part in &mut out.parts {
            for c in part.iter_mut() {
                *c = -&*c;
            }
        }
        out.tail = self.tail.neg();
        out
    }

    pub fn scale(&self, c: &CinfNum) -> Self {
        if c.is_zero() && c.is_exact() {
            return MeroJRep::zero(&self.ctx, self.horizon(), self.cap());
        }
        let mut out = self.clone();
        for part in &mut out.parts {
            for x in part.iter_mut() {
                *x = &*x * c;
            }
        }
        out.tail = self.tail.scale(c);
        out.tail_bound = opt_add(self.tail_bound, c.val().or(c.prec()));
        out.normalize();
        out
    }

    /// Drops the principal parts, keeping only the tail.
    pub fn strip_poles(&self) -> Self {
        MeroJRep {
            ctx: self.ctx.clone(),
            parts: vec![Vec::new(); self.parts.len()],
            tail: self.tail.clone(),
            tail_bound: self.tail_bound,
        }
    }

    /// Multiplication by a polynomial in `t`.
    pub fn mul_poly(&self, p: &TateSeries) -> Self {
        let ctx = &self.ctx;
        let cap = self.cap().max(p.cap());
        let deg = p.len();
        let mut tail = self.tail.mul(p);
        let mut parts = Vec::with_capacity(self.parts.len());
        for (i, part) in self.parts.iter().enumerate() {
            if part.is_empty() {
                parts.push(Vec::new());
                continue;
            }
            let c = pole(ctx, i);
            let taylor = p.taylor_at(&c, deg.max(1));
            let order = part.len();
            let mut new_part = Vec::with_capacity(order);
            for j in 1..=order {
                let mut acc = CinfNum::zero(ctx);
                for (m, tm) in taylor.iter().enumerate() {
                    if j + m > order {
                        break;
                    }
                    acc = &acc + &(&part[j + m - 1] * tm);
                }
                new_part.push(acc);
            }
            parts.push(new_part);
            // Non-negative powers of (t - c) go to the tail.
            if deg > 1 {
                let mut shifted = Vec::new();
                for n in 0..deg {
                    let mut acc = CinfNum::zero(ctx);
                    for (k, b) in part.iter().enumerate() {
                        if let Some(tm) = taylor.get(n + k + 1) {
                            acc = &acc + &(b * tm);
                        }
                    }
                    shifted.push(acc);
                }
                tail = tail.add(&TateSeries::from_shifted(&c, &shifted, cap));
            }
        }
        let mut tail_bound = opt_add(self.tail_bound, p.unit_val());
        if let Some(e) = p.error() {
            tail_bound = prec_min(tail_bound, Some(e + self.norm_val().unwrap_or(0).min(0)));
        }
        let mut out = MeroJRep { ctx: ctx.clone(), parts, tail, tail_bound };
        out.normalize();
        out
    }

    /// Principal part at pole `i` of `(sum_k a_k s^-k) * g(t)` where `g` has
    /// Taylor coefficients `taylor` at that pole (`s = t - pole(i)`).
    fn principal_times_taylor(a: &[CinfNum], taylor: &[CinfNum], zero: &CinfNum) -> Vec<CinfNum> {
        (1..=a.len())
            .map(|j| {
                let mut acc = zero.clone();
                for (m, gm) in taylor.iter().enumerate() {
                    if j + m > a.len() {
                        break;
                    }
                    acc = &acc + &(&a[j + m - 1] * gm);
                }
                acc
            })
            .collect()
    }

    /// Taylor coefficients at pole `at` of the principal part stored at `i != at`.
    fn part_taylor(&self, i: usize, at: usize, count: usize) -> Vec<CinfNum> {
        let ctx = &self.ctx;
        let diff = &pole(ctx, at) - &pole(ctx, i);
        let inv = diff.inv().expect("distinct poles");
        // (diff + s)^(-l) = sum_m C(-l, m) diff^(-l-m) s^m
        let inv_pows: Vec<CinfNum> = {
            let mut v = vec![CinfNum::one(ctx)];
            let top = self.part(i).len() + count;
            for _ in 0..top {
                let next = v.last().unwrap() * &inv;
                v.push(next);
            }
            v
        };
        (0..count)
            .map(|m| {
                let mut acc = CinfNum::zero(ctx);
                for (l0, b) in self.part(i).iter().enumerate() {
                    if b.is_zero() && b.is_exact() {
                        continue;
                    }
                    let l = l0 + 1;
                    acc = &acc + &(&(b * &inv_pows[l + m]) * &neg_binomial_in(ctx, l, m));
                }
                acc
            })
            .collect()
    }

    /// Product of two representations.
    pub fn mul(&self, other: &Self) -> Self {
        let ctx = &self.ctx;
        let zero = CinfNum::zero(ctx);
        // Polar part times the other tail (also produces tail x tail).
        let mut out = self.mul_poly(&other.tail);
        let mut other_polar = other.clone();
        other_polar.tail = TateSeries::zero(ctx, other.cap());
        other_polar.tail_bound = None;
        let cross = other_polar.mul_poly(&self.tail);
        out = out.add_parts_and_tail(&cross);

        let n = self.parts.len().max(other.parts.len());
        let mut parts: Vec<Vec<CinfNum>> = vec![Vec::new(); n];
        for i in 0..n {
            let (a, b) = (self.part(i), other.part(i));
            let mut acc: Vec<CinfNum> = vec![zero.clone(); a.len() + b.len()];
            for (k, ak) in a.iter().enumerate() {
                for (l, bl) in b.iter().enumerate() {
                    acc[k + l + 1] = &acc[k + l + 1] + &(ak * bl);
                }
            }
            for j in 0..n {
                if j == i {
                    continue;
                }
                if !a.is_empty() && !other.part(j).is_empty() {
                    let tay = other.part_taylor(j, i, a.len());
                    for (k, c) in Self::principal_times_taylor(a, &tay, &zero).into_iter().enumerate() {
                        acc[k] = &acc[k] + &c;
                    }
                }
                if !b.is_empty() && !self.part(j).is_empty() {
                    let tay = self.part_taylor(j, i, b.len());
                    for (k, c) in Self::principal_times_taylor(b, &tay, &zero).into_iter().enumerate() {
                        acc[k] = &acc[k] + &c;
                    }
                }
            }
            parts[i] = acc;
        }
        let polar = MeroJRep { ctx: ctx.clone(), parts, tail: TateSeries::zero(ctx, self.cap()), tail_bound: None };
        let mut out = out.add_parts_and_tail(&polar);
        let (f, g) = (self.norm_val(), other.norm_val());
        let mut bound = prec_min(opt_add(self.tail_bound, g), opt_add(other.tail_bound, f));
        if let (Some(a), Some(b)) = (self.tail_bound, other.tail_bound) {
            bound = prec_min(bound, Some(a.saturating_add(b)));
        }
        // A side without a stored function contributes nothing.
        if f.is_none() && self.tail_bound.is_none() || g.is_none() && other.tail_bound.is_none() {
            bound = None;
        }
        out.tail_bound = bound;
        out.normalize();
        out
    }

    fn add_parts_and_tail(&self, other: &Self) -> Self {
        let mut out = self.add(other);
        out.tail_bound = self.tail_bound;
        out
    }

    /// `tau`: coefficients to the `q`-th power, pole `i` moves to `i + 1`.
    /// The part leaving the horizon is folded into `tail_bound`; it must be
    /// below half the working precision.
    pub fn twist(&self) -> Result<Self, MeroError> {
        let h = self.horizon();
        if h == 0 {
            return Err(MeroError::NoHorizon);
        }
        let ctx = &self.ctx;
        let mut dropped: Prec = None;
        for (k, c) in self.parts[h].iter().enumerate() {
            let tw = c.qpow(1);
            let size = tw.residual().map(|v| v.saturating_add(pole_weight(ctx, h + 1, k + 1)));
            dropped = prec_min(dropped, size);
        }
        let needed = ctx.prec() / 2;
        if let Some(size) = dropped {
            if size < needed {
                return Err(MeroError::HorizonOverflow { size, needed });
            }
        }
        let mut parts = Vec::with_capacity(h + 1);
        parts.push(Vec::new());
        for part in &self.parts[..h] {
            parts.push(part.iter().map(|c| c.qpow(1)).collect());
        }
        let q = ctx.q() as i64;
        let tail_bound = prec_min(self.tail_bound.map(|b| b.saturating_mul(q)), dropped);
        let mut out = MeroJRep { ctx: ctx.clone(), parts, tail: self.tail.twist(), tail_bound };
        out.normalize();
        Ok(out)
    }

    pub fn twist_n(&self, n: usize) -> Result<Self, MeroError> {
        let mut out = self.clone();
        for _ in 0..n {
            out = out.twist()?;
        }
        Ok(out)
    }

    /// Hyperderivative `d_t^(j)`, exact on principal parts:
    /// `d^(j) (t - c)^(-k) = C(-k, j) (t - c)^(-k-j)`.
    pub fn hyperderivative(&self, j: usize) -> Self {
        if j == 0 {
            return self.clone();
        }
        let ctx = &self.ctx;
        let parts = self
            .parts
            .iter()
            .map(|part| {
                if part.is_empty() {
                    return Vec::new();
                }
                let mut out = vec![CinfNum::zero(ctx); part.len() + j];
                for (k0, b) in part.iter().enumerate() {
                    out[k0 + j] = b * &neg_binomial_in(ctx, k0 + 1, j);
                }
                out
            })
            .collect();
        let mut out = MeroJRep {
            ctx: ctx.clone(),
            parts,
            tail: self.tail.hyperderivative(j),
            tail_bound: self.tail_bound,
        };
        out.normalize();
        out
    }

    /// `c_{0,1}`: the residue at `theta` with respect to `dt`.
    pub fn scalar_residue(&self) -> CinfNum {
        self.coeff(0, 1)
    }

    /// Expansion as a power series on the unit disk up to degree `cap`.
    pub fn expand_on_disk(&self, cap: usize) -> TateSeries {
        let ctx = &self.ctx;
        let gf = ctx.gf();
        let mut coeffs: Vec<CinfNum> = (0..cap).map(|n| self.tail.coeff(n)).collect();
        let mut error = prec_min(self.tail_bound, self.tail.error());
        if self.tail.len() > cap {
            for c in &self.tail.coeffs()[cap..] {
                error = prec_min(error, c.residual());
            }
        }
        for (i, part) in self.parts.iter().enumerate() {
            if part.is_empty() {
                continue;
            }
            let c = pole(ctx, i);
            let c_inv = c.inv().expect("pole is a nonzero monomial");
            let minus_c_inv = -&c_inv;
            for (k0, b) in part.iter().enumerate() {
                let k = k0 + 1;
                if b.is_zero() && b.is_exact() {
                    continue;
                }
                // (t - c)^-k = (-c)^-k sum_n C(n + k - 1, n) c^-n t^n
                let lead = b * &minus_c_inv.pow(k as u64);
                let mut cpow = CinfNum::one(ctx);
                for (n, slot) in coeffs.iter_mut().enumerate() {
                    let bin = gf.binomial((n + k - 1) as u64, n as u64);
                    if !bin.is_zero() {
                        *slot = &*slot + &(&lead * &cpow).scale(bin);
                    }
                    cpow = &cpow * &c_inv;
                }
                let dropped = b
                    .residual()
                    .map(|v| v.saturating_add(pole_weight(ctx, i, k + cap)));
                error = prec_min(error, dropped);
            }
        }
        TateSeries::new(ctx, coeffs, cap).with_error(error)
    }

    /// Pole orders at most `n` everywhere on the horizon, and a tail whose
    /// Gauss norm at every probed radius is attained before the final
    /// `1/window_fraction` of the degree cap.
    pub fn holomorphy_check(&self, n: usize, opts: &HolomorphyOpts) -> bool {
        if (0..self.parts.len()).any(|i| self.pole_order(i) > n) {
            return false;
        }
        let cap = self.tail.cap().max(1);
        let window_start = cap - cap / opts.window_fraction.max(1);
        let r = self.ctx.r();
        for rho in &opts.radii {
            let mut best_early: Option<Rational64> = None;
            let mut best_late: Option<Rational64> = None;
            for (deg, c) in self.tail.coeffs().iter().enumerate() {
                if let Some(v) = c.val() {
                    let size = Rational64::new(-v, r) + *rho * deg as i64;
                    let slot = if deg >= window_start { &mut best_late } else { &mut best_early };
                    *slot = Some(slot.map_or(size, |b: Rational64| b.max(size)));
                }
            }
            if let Some(late) = best_late {
                if best_early.is_none_or(|early| late >= early) {
                    return false;
                }
            }
        }
        true
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "parts": self.parts.iter().map(|p| p.iter().map(CinfNum::to_json).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "tail": self.tail.to_json(),
            "tail_bound": self.tail_bound,
        })
    }
}

/// Residue at `theta` of `h(t) / (t - theta)^n0` for a polynomial `h`:
/// `d^(n0 - 1) h (theta)`.
pub fn residue_of_cleared(h: &TateSeries, n0: usize) -> CinfNum {
    let theta = CinfNum::theta(h.ctx());
    if n0 == 0 {
        return CinfNum::zero(h.ctx());
    }
    h.hyperderivative(n0 - 1).eval(&theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cinf::FieldParams;

    fn ctx(q: u32) -> Arc<Cinf> {
        let mut p = FieldParams::for_q(q).unwrap();
        p.prec = 120;
        Cinf::new(p).unwrap()
    }

    fn ok(res: Prec, ctx: &Cinf) -> bool {
        res.is_none_or(|v| v >= ctx.prec() / 2)
    }

    /// Coefficientwise agreement, ignoring the truncation error of either side.
    fn coeffs_ok(a: &TateSeries, b: &TateSeries, upto: usize) -> bool {
        (0..upto).all(|n| {
            let d = a.coeff(n).distance(&b.coeff(n));
            d.is_none_or(|v| v >= a.ctx().prec() / 2)
        })
    }

    #[test]
    fn twist_moves_pole() {
        for q in [2, 3] {
            let c = ctx(q);
            let f = MeroJRep::simple(&c, 4, 24, 0, 1, CinfNum::one(&c));
            let tf = f.twist().unwrap();
            assert_eq!(tf.pole_order(0), 0);
            assert_eq!(tf.pole_order(1), 1);
            let lhs = tf.expand_on_disk(24);
            let rhs = f.expand_on_disk(24).twist();
            assert!(coeffs_ok(&lhs, &rhs, 24));
        }
    }

    #[test]
    fn twist_overflow_and_no_horizon() {
        let c = ctx(2);
        let f = MeroJRep::simple(&c, 0, 8, 0, 1, CinfNum::one(&c));
        assert_eq!(f.twist().unwrap_err(), MeroError::NoHorizon);
        // A huge coefficient at the top pole cannot be dropped.
        let big = CinfNum::theta_pow(&c, 200);
        let g = MeroJRep::simple(&c, 1, 8, 1, 1, big);
        assert!(matches!(g.twist(), Err(MeroError::HorizonOverflow { .. })));
    }

    #[test]
    fn product_matches_disk_expansion() {
        for q in [2, 3] {
            let c = ctx(q);
            let a = MeroJRep::simple(&c, 3, 30, 0, 2, CinfNum::theta(&c));
            let b = MeroJRep::simple(&c, 3, 30, 1, 1, CinfNum::one(&c))
                .add(&MeroJRep::from_tail(TateSeries::t(&c, 30), 3));
            let prod = a.mul(&b);
            let lhs = prod.expand_on_disk(30);
            let rhs = a.expand_on_disk(30).mul(&b.expand_on_disk(30));
            assert!(coeffs_ok(&lhs, &rhs, 30), "q = {q}");
            // Partial fractions: 1/((t - theta)(t - theta^q)).
            let x = MeroJRep::simple(&c, 3, 30, 0, 1, CinfNum::one(&c));
            let y = MeroJRep::simple(&c, 3, 30, 1, 1, CinfNum::one(&c));
            let xy = x.mul(&y);
            let k = (&CinfNum::theta(&c) - &pole(&c, 1)).inv().unwrap();
            assert!(ok(xy.coeff(0, 1).distance(&k), &c));
            assert!(ok(xy.coeff(1, 1).distance(&-&k), &c));
        }
    }

    #[test]
    fn poly_times_pole_clears() {
        let c = ctx(3);
        let f = MeroJRep::simple(&c, 2, 16, 0, 1, CinfNum::one(&c));
        let g = f.mul_poly(&TateSeries::t_minus(&CinfNum::theta(&c), 16));
        assert_eq!(g.max_pole_order(), 0);
        assert!(ok(g.tail().distance(&TateSeries::constant(CinfNum::one(&c), 16)), &c));
        assert!(g.holomorphy_check(0, &HolomorphyOpts::up_to_horizon(&c, 2)));
        assert!(!f.holomorphy_check(0, &HolomorphyOpts::up_to_horizon(&c, 2)));
        assert!(f.holomorphy_check(1, &HolomorphyOpts::up_to_horizon(&c, 2)));
    }

    #[test]
    fn hyperderivative_exact_and_on_disk() {
        let c = ctx(3);
        let f = MeroJRep::simple(&c, 2, 24, 0, 1, CinfNum::one(&c));
        let d = f.hyperderivative(1);
        assert_eq!(d.pole_order(0), 2);
        assert!(ok(d.coeff(0, 2).distance(&-&CinfNum::one(&c)), &c));
        for j in 1..4 {
            let lhs = f.hyperderivative(j).expand_on_disk(20);
            let rhs = f.expand_on_disk(24).hyperderivative(j);
            assert!(coeffs_ok(&lhs, &rhs, 20));
        }
    }

    #[test]
    fn disk_expansion_of_simple_pole() {
        // 1/(t - theta) = -sum theta^(-n-1) t^n
        let c = ctx(2);
        let f = MeroJRep::simple(&c, 1, 10, 0, 1, CinfNum::one(&c));
        let s = f.expand_on_disk(10);
        for n in 0..10 {
            let want = -&CinfNum::theta_pow(&c, -(n as i64) - 1);
            assert_eq!(s.coeff(n), want);
        }
        assert_eq!(s.error(), Some(11 * c.r()));
    }

    #[test]
    fn cleared_residue() {
        let c = ctx(3);
        let t2 = TateSeries::new(&c, vec![CinfNum::zero(&c), CinfNum::zero(&c), CinfNum::one(&c)], 8);
        // t^2 / (t - theta)^2 has residue 2 theta.
        let want = CinfNum::theta(&c).scale(c.gf().from_int(2));
        assert_eq!(residue_of_cleared(&t2, 2), want);
        // Same via the representation.
        let f = MeroJRep::simple(&c, 1, 8, 0, 2, CinfNum::one(&c)).mul_poly(&t2);
        assert_eq!(f.scalar_residue(), want);
    }
}
