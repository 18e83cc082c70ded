//! Power series in `t` with `C_inf` coefficients, truncated at a degree cap.
//!
//! A `TateSeries` stores `a_0, ..., a_{D-1}` together with `error`, a lower bound
//! on the valuation of the unit-disk Gauss norm of everything that was dropped
//! (higher-degree terms or neglected remainders). `error == None` means the
//! stored polynomial is the whole function.

use std::sync::Arc;

use num_rational::Rational64;

use crate::cinf::{Cinf, CinfNum, Prec};
use crate::field::Fe;

#[derive(Clone, Debug)]
pub struct TateSeries {
    ctx: Arc<Cinf>,
    coeffs: Vec<CinfNum>,
    cap: usize,
    /// `log_q` of the radius the series is considered on.
    rho_log: Rational64,
    error: Prec,
}

fn prec_min(a: Prec, b: Prec) -> Prec {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => Some(x.min(y)),
    }
}

impl TateSeries {
    pub fn new(ctx: &Arc<Cinf>, coeffs: Vec<CinfNum>, cap: usize) -> Self {
        let mut s = TateSeries {
            ctx: ctx.clone(),
            coeffs: Vec::new(),
            cap,
            rho_log: Rational64::from_integer(0),
            error: None,
        };
        s.set_coeffs(coeffs);
        s
    }

    pub fn zero(ctx: &Arc<Cinf>, cap: usize) -> Self {
        Self::new(ctx, Vec::new(), cap)
    }

    pub fn constant(c: CinfNum, cap: usize) -> Self {
        let ctx = c.ctx().clone();
        Self::new(&ctx, vec![c], cap)
    }

    /// The variable `t`.
    pub fn t(ctx: &Arc<Cinf>, cap: usize) -> Self {
        Self::new(ctx, vec![CinfNum::zero(ctx), CinfNum::one(ctx)], cap)
    }

    /// `t - c`.
    pub fn t_minus(c: &CinfNum, cap: usize) -> Self {
        let ctx = c.ctx().clone();
        Self::new(&ctx, vec![-c, CinfNum::one(&ctx)], cap)
    }

    /// A polynomial with `F_q` (or any residue-field) coefficients.
    pub fn from_fe(ctx: &Arc<Cinf>, coeffs: &[Fe], cap: usize) -> Self {
        Self::new(ctx, coeffs.iter().map(|&a| CinfNum::constant(ctx, a)).collect(), cap)
    }

    fn set_coeffs(&mut self, mut coeffs: Vec<CinfNum>) {
        if coeffs.len() > self.cap {
            for c in coeffs.drain(self.cap..) {
                self.error = prec_min(self.error, c.residual());
            }
        }
        while coeffs.last().is_some_and(|c| c.is_zero() && c.is_exact()) {
            coeffs.pop();
        }
        self.coeffs = coeffs;
    }

    pub fn with_error(mut self, error: Prec) -> Self {
        self.error = prec_min(self.error, error);
        self
    }

    pub fn with_rho_log(mut self, rho_log: Rational64) -> Self {
        self.rho_log = rho_log;
        self
    }

    pub fn ctx(&self) -> &Arc<Cinf> {
        &self.ctx
    }

    pub fn coeffs(&self) -> &[CinfNum] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize) -> CinfNum {
        self.coeffs.get(n).cloned().unwrap_or_else(|| CinfNum::zero(&self.ctx))
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn rho_log(&self) -> Rational64 {
        self.rho_log
    }

    pub fn error(&self) -> Prec {
        self.error
    }

    /// Number of stored coefficients (degree + 1 for polynomials).
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// True when every stored coefficient is (indistinguishable from) zero.
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(CinfNum::is_zero)
    }

    /// `log_q` of `max_n |a_n| rho^n`; `None` for the zero series.
    pub fn gauss_norm(&self, rho_log: Rational64) -> Option<Rational64> {
        let r = self.ctx.r();
        self.coeffs
            .iter()
            .enumerate()
            .filter_map(|(n, c)| c.val().map(|v| Rational64::new(-v, r) + rho_log * n as i64))
            .max()
    }

    /// Valuation (in `1/r` units) of the unit-disk Gauss norm, i.e. the
    /// smallest coefficient valuation; `None` if zero.
    pub fn unit_val(&self) -> Option<i64> {
        self.coeffs.iter().filter_map(CinfNum::val).min()
    }

    /// How small the series is known to be on the unit disk: the minimum over
    /// coefficient residuals and the truncation error.
    pub fn residual(&self) -> Prec {
        self.coeffs.iter().fold(self.error, |acc, c| prec_min(acc, c.residual()))
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&CinfNum, &CinfNum) -> CinfNum) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|i| f(&self.coeff(i), &other.coeff(i))).collect();
        let mut out = TateSeries::new(&self.ctx, coeffs, self.cap.max(other.cap));
        out.error = prec_min(self.error, other.error);
        out.rho_log = self.rho_log;
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        out.coeffs = self.coeffs.iter().map(|c| -c).collect();
        out
    }

    pub fn scale(&self, c: &CinfNum) -> Self {
        let mut out = self.clone();
        out.coeffs = self.coeffs.iter().map(|a| a * c).collect();
        out.error = self.error.and_then(|e| c.val().map(|v| e + v).or(c.prec().map(|p| e + p)));
        if c.is_exact() && c.is_zero() {
            out.error = None;
        }
        out
    }

    /// Cauchy product truncated at the cap.
    pub fn mul(&self, other: &Self) -> Self {
        let cap = self.cap.max(other.cap);
        let n = (self.coeffs.len() + other.coeffs.len()).saturating_sub(1);
        let mut coeffs = vec![CinfNum::zero(&self.ctx); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() && a.is_exact() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] = &coeffs[i + j] + &(a * b);
            }
        }
        let mut out = TateSeries { ctx: self.ctx.clone(), coeffs: Vec::new(), cap, rho_log: self.rho_log, error: None };
        out.set_coeffs(coeffs);
        // |f g - F G| <= max(|f - F| |G|, |F| |g - G|, ...) on the unit disk.
        let cross = |e: Prec, other: &TateSeries| e.map(|e| e + other.unit_val().unwrap_or(0).min(0));
        out.error = prec_min(out.error, prec_min(cross(self.error, other), cross(other.error, self)));
        out
    }

    /// Coefficientwise `q`-th power (`sum a_n t^n -> sum a_n^q t^n`).
    pub fn twist(&self) -> Self {
        self.twist_n(1)
    }

    pub fn twist_n(&self, i: u32) -> Self {
        let qi = self.ctx.q_pow(i);
        let mut out = self.clone();
        out.coeffs = self.coeffs.iter().map(|c| c.qpow(i)).collect();
        out.error = self.error.map(|e| e.saturating_mul(qi));
        out
    }

    /// Hyperderivative `a_n t^n -> C(n, j) a_n t^(n-j)`.
    pub fn hyperderivative(&self, j: usize) -> Self {
        let gf = self.ctx.gf();
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(j)
            .map(|(n, a)| a.scale(gf.binomial(n as u64, j as u64)))
            .collect();
        let mut out = TateSeries::new(&self.ctx, coeffs, self.cap);
        out.error = self.error;
        out.rho_log = self.rho_log;
        out
    }

    /// `f(c)` for a polynomial (the stored coefficients).
    pub fn eval(&self, c: &CinfNum) -> CinfNum {
        let mut acc = CinfNum::zero(&self.ctx);
        for a in self.coeffs.iter().rev() {
            acc = &(&acc * c) + a;
        }
        acc
    }

    /// Taylor coefficients `f^{[m]}(c)`, `m = 0..count`, so that
    /// `f(t) = sum_m f^{[m]}(c) (t - c)^m` for a polynomial `f`.
    pub fn taylor_at(&self, c: &CinfNum, count: usize) -> Vec<CinfNum> {
        (0..count).map(|m| self.hyperderivative(m).eval(c)).collect()
    }

    /// Re-expands `sum_n g_n (t - c)^n` as a polynomial in `t`.
    pub fn from_shifted(c: &CinfNum, g: &[CinfNum], cap: usize) -> Self {
        let ctx = c.ctx().clone();
        let gf = ctx.gf();
        let minus_c = -c;
        let powers: Vec<CinfNum> = {
            let mut v = vec![CinfNum::one(&ctx)];
            for _ in 1..g.len().max(1) {
                let next = v.last().unwrap() * &minus_c;
                v.push(next);
            }
            v
        };
        let mut coeffs = vec![CinfNum::zero(&ctx); g.len()];
        for (n, gn) in g.iter().enumerate() {
            if gn.is_zero() && gn.is_exact() {
                continue;
            }
            for (l, slot) in coeffs.iter_mut().enumerate().take(n + 1) {
                let b = gf.binomial(n as u64, l as u64);
                if b.is_zero() {
                    continue;
                }
                *slot = &*slot + &(gn * &powers[n - l]).scale(b);
            }
        }
        TateSeries::new(&ctx, coeffs, cap)
    }

    /// Largest difference with `other`, as a residual valuation.
    pub fn distance(&self, other: &Self) -> Prec {
        self.sub(other).residual()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "coeffs": self.coeffs.iter().map(CinfNum::to_json).collect::<Vec<_>>(),
            "cap": self.cap,
            "rho_log": [*self.rho_log.numer(), *self.rho_log.denom()],
            "error": self.error,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cinf::{lambda_theta, FieldParams};

    fn ctx(q: u32) -> Arc<Cinf> {
        let mut p = FieldParams::for_q(q).unwrap();
        p.prec = 60;
        Cinf::new(p).unwrap()
    }

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    #[test]
    fn gauss_norm_examples() {
        let c = ctx(3);
        let lam = lambda_theta(&c).unwrap();
        let f = TateSeries::constant(lam.clone(), 8);
        assert_eq!(f.gauss_norm(r(0, 1)), Some(r(1, 2)));
        let t = TateSeries::t(&c, 8);
        assert_eq!(t.gauss_norm(r(1, 1)), Some(r(1, 1)));
        let g = TateSeries::t_minus(&CinfNum::theta(&c), 8);
        // oracle: max(-v(theta), 0 + 1 * 0) = 1
        assert_eq!(g.gauss_norm(r(0, 1)), Some(r(1, 1)));
        assert_eq!(g.gauss_norm(r(2, 1)), Some(r(2, 1)));
        assert_eq!(TateSeries::zero(&c, 4).gauss_norm(r(0, 1)), None);
    }

    #[test]
    fn twist_fixes_fq_coefficients() {
        let c = ctx(3);
        let f = TateSeries::from_fe(&c, &[Fe(1), Fe(2), Fe(0), Fe(1)], 8);
        let tw = f.twist();
        assert!(tw.distance(&f).is_none());
    }

    #[test]
    fn double_twist_is_q_squared_power() {
        let c = ctx(2);
        let th = CinfNum::theta(&c);
        let f = TateSeries::new(&c, vec![th.clone(), th.inv().unwrap(), (&th + &CinfNum::one(&c)).inv().unwrap()], 8);
        let lhs = f.twist().twist();
        let rhs = TateSeries::new(&c, f.coeffs().iter().map(|a| a.pow(4)).collect(), 8);
        assert!(lhs.distance(&rhs).is_none_or(|d| d >= 40));
    }

    #[test]
    fn hyperderivative_examples() {
        let c = ctx(3);
        let t2 = TateSeries::from_fe(&c, &[Fe(0), Fe(0), Fe(1)], 8);
        let d = t2.hyperderivative(1);
        assert!(d.distance(&TateSeries::from_fe(&c, &[Fe(0), Fe(2)], 8)).is_none());
        let t3 = TateSeries::from_fe(&c, &[Fe(0), Fe(0), Fe(0), Fe(1)], 8);
        assert!(t3.hyperderivative(3).distance(&TateSeries::from_fe(&c, &[Fe(1)], 8)).is_none());
        // The first derivative of t^3 vanishes in characteristic 3.
        assert!(t3.hyperderivative(1).is_zero());
    }

    #[test]
    fn taylor_expansion_round_trip() {
        let c = ctx(2);
        let th = CinfNum::theta(&c);
        let f = TateSeries::new(
            &c,
            vec![CinfNum::one(&c), th.clone(), CinfNum::zero(&c), th.inv().unwrap()],
            8,
        );
        let at = &th + &CinfNum::one(&c);
        let g = f.taylor_at(&at, 4);
        let back = TateSeries::from_shifted(&at, &g, 8);
        assert!(back.distance(&f).is_none_or(|d| d >= 40));
    }

    #[test]
    fn truncation_records_error() {
        let c = ctx(2);
        let x = TateSeries::new(&c, vec![CinfNum::one(&c), CinfNum::theta_pow(&c, -3)], 2);
        let sq = x.mul(&x);
        // 1 + 2 theta^-3 t + theta^-6 t^2 in characteristic 2, cut at degree 2
        assert_eq!(sq.len(), 1);
        assert_eq!(sq.error(), Some(6));
    }
}
