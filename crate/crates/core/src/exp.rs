//! The exponential `exp_E = sum_i e_i tau^i`, its evaluation, the Carlitz
//! period and period-lattice membership.

use std::sync::Arc;

use thiserror::Error;

use crate::cinf::{lambda_theta, Cinf, CinfError, CinfNum, Prec};
use crate::matrix::{vec_add, vec_qpow, vec_residual, Mat};
use crate::tmodule::TModule;

/// A point of `Lie_E(C_inf)` in coordinates.
pub type LatticeVector = Vec<CinfNum>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExpError {
    #[error("theta^(q^{0}) - theta is indistinguishable from zero")]
    Singular(usize),
    #[error("exponential series not converged: tail size {achieved:?} < required {required}")]
    NotConverged { achieved: Option<i64>, required: i64 },
    #[error("vector has length {got}, module dimension is {expected}")]
    Dimension { got: usize, expected: usize },
    #[error(transparent)]
    Cinf(#[from] CinfError),
}

fn prec_min(a: Prec, b: Prec) -> Prec {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => Some(x.min(y)),
    }
}

#[derive(Clone, Debug)]
pub struct ExpCoeffs {
    module: TModule,
    coeffs: Vec<Mat>,
}

/// Result of evaluating `exp_E`.
#[derive(Clone, Debug)]
pub struct ExpValue {
    pub value: Vec<CinfNum>,
    /// Lower bound on the valuation of the neglected terms.
    pub tail: Prec,
    pub terms_used: usize,
}

impl ExpValue {
    /// Size of the value, counting unknown digits and the neglected tail.
    pub fn residual(&self) -> Prec {
        prec_min(vec_residual(&self.value), self.tail)
    }
}

impl ExpCoeffs {
    /// `e_0, ..., e_count`.
    ///
    /// `e_n` solves `e_n A_0^(n) - A_0 e_n = sum_{j>=1} A_j e_{n-j}^(j)`. Writing
    /// `A_0 = theta + N` the left side is `delta e_n + L(e_n)` with
    /// `delta = theta^(q^n) - theta` and the nilpotent `L(X) = X N^(n) - N X`,
    /// so `e_n = sum_k (-1)^k delta^(-k-1) L^k(rhs)`.
    pub fn compute(module: &TModule, count: usize) -> Result<Self, ExpError> {
        let mut out = ExpCoeffs { module: module.clone(), coeffs: vec![Mat::identity(module.ctx(), module.dim())] };
        out.extend(count)?;
        Ok(out)
    }

    pub fn extend(&mut self, count: usize) -> Result<(), ExpError> {
        let ctx = self.module.ctx().clone();
        let phi = self.module.phi_t().clone();
        let n_mat = self.module.nilpotent_part();
        let theta = CinfNum::theta(&ctx);
        while self.coeffs.len() <= count {
            let n = self.coeffs.len();
            let mut rhs = Mat::zero(&ctx, self.module.dim());
            for j in 1..=phi.degree().min(n) {
                let aj = &phi.mats()[j];
                if aj.is_exact_zero() {
                    continue;
                }
                rhs = rhs.add(&aj.mul(&self.coeffs[n - j].qpow(j as u32)));
            }
            let delta = &CinfNum::theta_pow(&ctx, ctx.q_pow(n as u32)) - &theta;
            let delta_inv = delta.inv().map_err(|_| ExpError::Singular(n))?;
            let n_tw = n_mat.qpow(n as u32);
            let mut term = rhs.scale(&delta_inv);
            let mut e = term.clone();
            for k in 1..=(2 * self.module.dim()) {
                term = term.mul(&n_tw).sub(&n_mat.mul(&term)).scale(&delta_inv);
                if term.is_exact_zero() {
                    break;
                }
                e = if k % 2 == 1 { e.sub(&term) } else { e.add(&term) };
            }
            self.coeffs.push(e);
        }
        Ok(())
    }

    pub fn module(&self) -> &TModule {
        &self.module
    }

    pub fn ctx(&self) -> &Arc<Cinf> {
        self.module.ctx()
    }

    pub fn coeffs(&self) -> &[Mat] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Residual of `exp o d phi(t) - phi(t) o exp` in `tau`-degree `n`.
    pub fn functional_residual(&self, n: usize) -> Prec {
        let phi = self.module.phi_t();
        let a0 = self.module.d_phi_t();
        let mut lhs = self.coeffs[n].mul(&a0.qpow(n as u32));
        for j in 0..=phi.degree().min(n) {
            lhs = lhs.sub(&phi.mats()[j].mul(&self.coeffs[n - j].qpow(j as u32)));
        }
        lhs.residual()
    }

    /// Functional-equation residuals for every computed degree.
    pub fn functional_residuals(&self) -> Vec<Prec> {
        (0..self.coeffs.len()).map(|n| self.functional_residual(n)).collect()
    }

    /// Lower bound for the size of `e_i x^(i)` given `v(x) >= vx`.
    fn term_bound(&self, i: usize, vx: i64) -> Option<i64> {
        let ve = self.coeffs[i].val()?;
        Some(ve.saturating_add(self.ctx().q_pow(i as u32).saturating_mul(vx)))
    }

    /// `sum_i e_i x^(i)`, stopping once every remaining term is provably of
    /// valuation at least `target`. The term bounds must be increasing from
    /// the stopping point to the last computed coefficient.
    pub fn eval(&self, x: &[CinfNum], target: i64) -> Result<ExpValue, ExpError> {
        let ctx = self.ctx();
        let d = self.module.dim();
        if x.len() != d {
            return Err(ExpError::Dimension { got: x.len(), expected: d });
        }
        let vx = match x.iter().filter_map(CinfNum::val).min() {
            Some(v) => v,
            None => {
                // Zero (up to precision): exp is F_q-linear.
                let value = x.to_vec();
                return Ok(ExpValue { value, tail: None, terms_used: 0 });
            }
        };
        let bounds: Vec<Option<i64>> = (0..self.coeffs.len()).map(|i| self.term_bound(i, vx)).collect();
        let big = |b: &Option<i64>| b.is_none_or(|v| v >= target);
        let last = bounds.len() - 1;
        if last == 0 || !big(&bounds[last]) || bounds[last] <= bounds[last - 1] {
            return Err(ExpError::NotConverged { achieved: bounds[last], required: target });
        }
        let mut stop = last;
        while stop > 0 && big(&bounds[stop - 1]) && bounds[stop - 1] < bounds[stop] {
            stop -= 1;
        }
        let mut acc = vec![CinfNum::zero(ctx); d];
        for i in 0..stop {
            acc = vec_add(&acc, &self.coeffs[i].mul_vec(&vec_qpow(x, i as u32)));
        }
        Ok(ExpValue { value: acc, tail: bounds[stop], terms_used: stop })
    }

    /// `exp_E(x) == 0` at half the working precision, with the residual that decided it.
    pub fn lattice_member(&self, x: &[CinfNum]) -> Result<(bool, Prec), ExpError> {
        let ctx = self.ctx();
        let v = self.eval(x, ctx.prec())?;
        let res = v.residual();
        Ok((res.is_none_or(|r| r >= ctx.prec() / 2), res))
    }

    /// [`lattice_member`](Self::lattice_member), computing further
    /// coefficients (up to `max_len`) while the series has not converged.
    pub fn lattice_member_extending(&mut self, x: &[CinfNum], max_len: usize) -> Result<(bool, Prec), ExpError> {
        loop {
            match self.lattice_member(x) {
                Err(ExpError::NotConverged { .. }) if self.len() < max_len => {
                    let next = self.len() + 4;
                    self.extend(next)?;
                }
                other => return other,
            }
        }
    }
}

/// `-theta lambda_theta prod_{i=1..terms} (1 - theta^(1 - q^i))^-1`: the residue
/// at `theta` of the Anderson-Thakur function built from the same `lambda_theta`.
pub fn carlitz_period(ctx: &Arc<Cinf>, terms: usize) -> Result<CinfNum, CinfError> {
    let lam = lambda_theta(ctx)?;
    let mut acc = -&(&CinfNum::theta(ctx) * &lam);
    let one = CinfNum::one(ctx);
    for i in 1..=terms {
        let f = &one - &CinfNum::theta_pow(ctx, 1 - ctx.q_pow(i as u32));
        acc = &acc * &f.inv()?;
    }
    Ok(acc)
}

/// Smallest product length making the neglected factors smaller than the precision.
pub fn period_terms(ctx: &Cinf) -> usize {
    let mut i = 1;
    while (ctx.q_pow(i as u32 + 1) - 1).saturating_mul(ctx.r()) < ctx.prec() {
        i += 1;
    }
    i
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cinf::FieldParams;
    use num_rational::Rational64;

    fn ctx(q: u32) -> Arc<Cinf> {
        Cinf::new(FieldParams::for_q(q).unwrap()).unwrap()
    }

    fn ok(c: &Cinf, r: Prec) -> bool {
        r.is_none_or(|v| v >= c.prec() / 2)
    }

    #[test]
    fn carlitz_first_coefficients() {
        for q in [2, 3] {
            let c = ctx(q);
            let e = ExpCoeffs::compute(&TModule::carlitz(&c), 6).unwrap();
            let th = CinfNum::theta(&c);
            let thq = CinfNum::theta_pow(&c, q as i64);
            let thq2 = CinfNum::theta_pow(&c, (q * q) as i64);
            assert_eq!(*e.coeffs()[0].get(0, 0), CinfNum::one(&c));
            let e1 = (&thq - &th).inv().unwrap();
            assert!(ok(&c, e.coeffs()[1].get(0, 0).distance(&e1)));
            let e2 = (&(&thq2 - &th) * &(&thq2 - &thq)).inv().unwrap();
            assert!(ok(&c, e.coeffs()[2].get(0, 0).distance(&e2)));
            let vals: Vec<i64> = e.coeffs().iter().map(|m| m.val().unwrap()).collect();
            assert!(vals.windows(2).all(|w| w[0] < w[1]), "{vals:?}");
            assert!(e.functional_residuals().into_iter().all(|r| ok(&c, r)));
        }
    }

    #[test]
    fn period_valuation_and_kernel() {
        for q in [2, 3] {
            let c = ctx(q);
            let pi = carlitz_period(&c, period_terms(&c)).unwrap();
            assert_eq!(pi.valuation(), Some(Rational64::new(-(q as i64), (q - 1) as i64)));
            let e = ExpCoeffs::compute(&TModule::carlitz(&c), 10).unwrap();
            let (member, _) = e.lattice_member(std::slice::from_ref(&pi)).unwrap();
            assert!(member);
            let third = &pi * &CinfNum::theta(&c).inv().unwrap();
            assert!(!e.lattice_member(&[third]).unwrap().0);
            let shifted = &pi + &CinfNum::one(&c);
            assert!(!e.lattice_member(&[shifted]).unwrap().0);
            assert!(e.lattice_member(&[CinfNum::zero(&c)]).unwrap().0);
        }
    }

    #[test]
    fn not_converged_is_reported() {
        let c = ctx(2);
        let e = ExpCoeffs::compute(&TModule::carlitz(&c), 2).unwrap();
        let x = CinfNum::theta_pow(&c, 40);
        assert!(matches!(e.eval(&[x], c.prec()), Err(ExpError::NotConverged { .. })));
    }

    #[test]
    fn functional_equation_for_families() {
        for q in [2, 3] {
            let c = ctx(q);
            for m in [
                TModule::carlitz_tensor(&c, 2),
                TModule::carlitz_tensor(&c, 3),
                TModule::prolongation(&c, 2),
                TModule::carlitz(&c).direct_sum(&TModule::carlitz(&c)),
            ] {
                let e = ExpCoeffs::compute(&m, 8).unwrap();
                for (n, r) in e.functional_residuals().into_iter().enumerate() {
                    assert!(ok(&c, r), "{} degree {n}: {r:?}", m.name());
                }
            }
        }
    }
}
