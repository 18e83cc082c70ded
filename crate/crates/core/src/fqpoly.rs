//! Polynomials over `F_q` (elements of `A = F_q[t]`).

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::cinf::{Cinf, CinfNum};
use crate::field::Fe;
use crate::tate::TateSeries;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FqPoly {
    /// Low degree first, no trailing zeros.
    coeffs: Vec<Fe>,
}

impl FqPoly {
    pub fn new(mut coeffs: Vec<Fe>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        FqPoly { coeffs }
    }

    pub fn t() -> Self {
        FqPoly::new(vec![Fe::ZERO, Fe::ONE])
    }

    pub fn one() -> Self {
        FqPoly::new(vec![Fe::ONE])
    }

    /// Parses `"c0,c1,..."` where each `c_i` indexes `F_q` (see [`Cinf::fq_from_index`]).
    pub fn parse(ctx: &Cinf, s: &str) -> Result<Self, String> {
        let mut coeffs = Vec::new();
        for tok in s.split(',') {
            let n: u64 = tok.trim().parse().map_err(|_| format!("bad coefficient {tok:?}"))?;
            if n >= ctx.q() {
                return Err(format!("coefficient {n} is not an index into F_{}", ctx.q()));
            }
            coeffs.push(ctx.fq_from_index(n));
        }
        Ok(FqPoly::new(coeffs))
    }

    /// A random polynomial of degree at most `deg` with coefficients in `F_q`.
    pub fn random(ctx: &Cinf, deg: usize, rng: &mut impl Rng) -> Self {
        let fq = ctx.fq_elements();
        FqPoly::new((0..=deg).map(|_| fq[rng.gen_range(0..fq.len())]).collect())
    }

    pub fn coeffs(&self) -> &[Fe] {
        &self.coeffs
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn derivative(&self, ctx: &Cinf) -> Self {
        let gf = ctx.gf();
        FqPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(n, &c)| gf.mul(gf.from_int(n as i64), c))
                .collect(),
        )
    }

    /// `u' != 0`, i.e. `u` is not a polynomial in `t^p`.
    pub fn is_separating(&self, ctx: &Cinf) -> bool {
        !self.derivative(ctx).is_zero()
    }

    pub fn eval(&self, x: &CinfNum) -> CinfNum {
        let ctx = x.ctx();
        let mut acc = CinfNum::zero(ctx);
        for &c in self.coeffs.iter().rev() {
            acc = &(&acc * x) + &CinfNum::constant(ctx, c);
        }
        acc
    }

    pub fn to_series(&self, ctx: &Arc<Cinf>, cap: usize) -> TateSeries {
        TateSeries::from_fe(ctx, &self.coeffs, cap)
    }

    /// Coefficients `h_k(s)` of the divided difference
    /// `(u(t) - u(s)) / (t - s) = sum_k t^k h_k(s)`, each as a polynomial in `s`.
    pub fn divided_difference(&self) -> Vec<FqPoly> {
        // (t^n - s^n)/(t - s) = sum_{k=0}^{n-1} t^k s^{n-1-k}
        let n = self.coeffs.len();
        let mut out = vec![vec![Fe::ZERO; n]; n.saturating_sub(1)];
        for (deg, &c) in self.coeffs.iter().enumerate().skip(1) {
            for k in 0..deg {
                out[k][deg - 1 - k] = c;
            }
        }
        out.into_iter().map(FqPoly::new).collect()
    }

    pub fn render(&self, ctx: &Cinf) -> String {
        let gf = ctx.gf();
        let mut parts = Vec::new();
        for (n, &c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let cs = gf.render(c);
            let cs = if cs.contains('+') { format!("({cs})") } else { cs };
            parts.push(match (n, cs.as_str()) {
                (0, _) => cs.clone(),
                (1, "1") => "t".into(),
                (1, _) => format!("{cs}*t"),
                (_, "1") => format!("t^{n}"),
                _ => format!("{cs}*t^{n}"),
            });
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}

impl fmt::Display for FqPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.coeffs.iter().map(|c| c.0).collect::<Vec<_>>())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cinf::FieldParams;

    #[test]
    fn derivative_and_separability() {
        let ctx = Cinf::new(FieldParams::for_q(2).unwrap()).unwrap();
        let u = FqPoly::parse(&ctx, "0,1,1").unwrap();
        assert_eq!(u.derivative(&ctx), FqPoly::one());
        assert!(u.is_separating(&ctx));
        let sq = FqPoly::parse(&ctx, "1,0,1").unwrap();
        assert!(!sq.is_separating(&ctx));
    }

    #[test]
    fn divided_difference_identity() {
        let ctx = Cinf::new(FieldParams::for_q(3).unwrap()).unwrap();
        let u = FqPoly::parse(&ctx, "1,2,0,1").unwrap();
        let h = u.divided_difference();
        // (u(t) - u(s)) = (t - s) sum_k t^k h_k(s), checked at t = theta + 1, s = theta^2
        let t = &CinfNum::theta(&ctx) + &CinfNum::one(&ctx);
        let s = CinfNum::theta_pow(&ctx, 2);
        let lhs = &u.eval(&t) - &u.eval(&s);
        let mut sum = CinfNum::zero(&ctx);
        for (k, hk) in h.iter().enumerate() {
            sum = &sum + &(&t.pow(k as u64) * &hk.eval(&s));
        }
        assert_eq!(lhs, &(&t - &s) * &sum);
        // The diagonal value is u'(s).
        let mut diag = CinfNum::zero(&ctx);
        for (k, hk) in h.iter().enumerate() {
            diag = &diag + &(&s.pow(k as u64) * &hk.eval(&s));
        }
        assert_eq!(diag, u.derivative(&ctx).eval(&s));
    }
}
