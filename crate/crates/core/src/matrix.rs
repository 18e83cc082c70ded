//! Small dense square matrices and vectors over `C_inf`.

use std::sync::Arc;

use crate::cinf::{Cinf, CinfJson, CinfNum, Prec};

fn prec_min(a: Prec, b: Prec) -> Prec {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => Some(x.min(y)),
    }
}

/// Smallest residual over a slice of numbers (`None`: all exactly zero).
pub fn vec_residual(v: &[CinfNum]) -> Prec {
    v.iter().fold(None, |acc, x| prec_min(acc, x.residual()))
}

pub fn vec_qpow(v: &[CinfNum], i: u32) -> Vec<CinfNum> {
    v.iter().map(|x| x.qpow(i)).collect()
}

pub fn vec_sub(a: &[CinfNum], b: &[CinfNum]) -> Vec<CinfNum> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn vec_add(a: &[CinfNum], b: &[CinfNum]) -> Vec<CinfNum> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn vec_scale(v: &[CinfNum], c: &CinfNum) -> Vec<CinfNum> {
    v.iter().map(|x| x * c).collect()
}

pub fn vec_json(v: &[CinfNum]) -> Vec<CinfJson> {
    v.iter().map(CinfNum::to_json).collect()
}

#[derive(Clone, Debug)]
pub struct Mat {
    ctx: Arc<Cinf>,
    n: usize,
    /// Row-major.
    data: Vec<CinfNum>,
}

impl Mat {
    pub fn zero(ctx: &Arc<Cinf>, n: usize) -> Self {
        Mat { ctx: ctx.clone(), n, data: vec![CinfNum::zero(ctx); n * n] }
    }

    pub fn identity(ctx: &Arc<Cinf>, n: usize) -> Self {
        Self::scalar(&CinfNum::one(ctx), n)
    }

    pub fn scalar(c: &CinfNum, n: usize) -> Self {
        let mut m = Self::zero(c.ctx(), n);
        for i in 0..n {
            m.set(i, i, c.clone());
        }
        m
    }

    /// The matrix unit `E_{ij}` (zero-based).
    pub fn unit(ctx: &Arc<Cinf>, n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zero(ctx, n);
        m.set(i, j, CinfNum::one(ctx));
        m
    }

    pub fn from_rows(ctx: &Arc<Cinf>, rows: Vec<Vec<CinfNum>>) -> Result<Self, String> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(format!("matrix is not square ({n} rows)"));
        }
        Ok(Mat { ctx: ctx.clone(), n, data: rows.into_iter().flatten().collect() })
    }

    pub fn ctx(&self) -> &Arc<Cinf> {
        &self.ctx
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &CinfNum {
        &self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: CinfNum) {
        self.data[i * self.n + j] = x;
    }

    pub fn rows(&self) -> Vec<Vec<CinfNum>> {
        self.data.chunks(self.n).map(<[CinfNum]>::to_vec).collect()
    }

    pub fn entries(&self) -> &[CinfNum] {
        &self.data
    }

    fn zip(&self, other: &Self, f: impl Fn(&CinfNum, &CinfNum) -> CinfNum) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        Mat {
            ctx: self.ctx.clone(),
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a - b)
    }

    pub fn neg(&self) -> Self {
        Mat { ctx: self.ctx.clone(), n: self.n, data: self.data.iter().map(|a| -a).collect() }
    }

    pub fn scale(&self, c: &CinfNum) -> Self {
        Mat { ctx: self.ctx.clone(), n: self.n, data: self.data.iter().map(|a| a * c).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let n = self.n;
        let mut out = Self::zero(&self.ctx, n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() && a.is_exact() {
                    continue;
                }
                for j in 0..n {
                    let b = other.get(k, j);
                    if b.is_zero() && b.is_exact() {
                        continue;
                    }
                    let v = out.get(i, j) + &(a * b);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[CinfNum]) -> Vec<CinfNum> {
        assert_eq!(self.n, v.len(), "dimension mismatch");
        (0..self.n)
            .map(|i| {
                let mut acc = CinfNum::zero(&self.ctx);
                for (j, x) in v.iter().enumerate() {
                    let a = self.get(i, j);
                    if !(a.is_zero() && a.is_exact()) {
                        acc = &acc + &(a * x);
                    }
                }
                acc
            })
            .collect()
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::identity(&self.ctx, self.n);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Entrywise `x -> x^(q^i)`.
    pub fn qpow(&self, i: u32) -> Self {
        Mat { ctx: self.ctx.clone(), n: self.n, data: self.data.iter().map(|a| a.qpow(i)).collect() }
    }

    pub fn residual(&self) -> Prec {
        vec_residual(&self.data)
    }

    /// Every entry exactly zero (no precision loss either).
    pub fn is_exact_zero(&self) -> bool {
        self.data.iter().all(|a| a.is_zero() && a.is_exact())
    }

    /// Every entry zero above its precision.
    pub fn is_zero(&self) -> bool {
        self.data.iter().all(CinfNum::is_zero)
    }

    /// Minimum valuation of the nonzero entries.
    pub fn val(&self) -> Option<i64> {
        self.data.iter().filter_map(CinfNum::val).min()
    }

    /// Block-diagonal sum.
    pub fn block_diag(&self, other: &Self) -> Self {
        let n = self.n + other.n;
        let mut out = Self::zero(&self.ctx, n);
        for i in 0..self.n {
            for j in 0..self.n {
                out.set(i, j, self.get(i, j).clone());
            }
        }
        for i in 0..other.n {
            for j in 0..other.n {
                out.set(self.n + i, self.n + j, other.get(i, j).clone());
            }
        }
        out
    }

    /// Inverse by Gauss-Jordan elimination with the pivot of least valuation.
    pub fn inverse(&self) -> Option<Self> {
        let n = self.n;
        let mut a = self.rows();
        let mut b = Self::identity(&self.ctx, n).rows();
        for col in 0..n {
            let piv = (col..n)
                .filter(|&r| !a[r][col].is_zero())
                .min_by_key(|&r| a[r][col].val().unwrap_or(i64::MAX))?;
            a.swap(col, piv);
            b.swap(col, piv);
            let inv = a[col][col].inv().ok()?;
            for x in a[col].iter_mut().chain(b[col].iter_mut()) {
                *x = &*x * &inv;
            }
            for r in 0..n {
                if r == col || (a[r][col].is_zero() && a[r][col].is_exact()) {
                    continue;
                }
                let f = a[r][col].clone();
                for c in 0..n {
                    let x = &a[r][c] - &(&f * &a[col][c]);
                    a[r][c] = x;
                    let y = &b[r][c] - &(&f * &b[col][c]);
                    b[r][c] = y;
                }
            }
        }
        Mat::from_rows(&self.ctx, b).ok()
    }

    pub fn render(&self) -> Vec<Vec<String>> {
        self.rows().iter().map(|r| r.iter().map(CinfNum::render).collect()).collect()
    }

    pub fn to_json(&self) -> Vec<Vec<CinfJson>> {
        self.rows().iter().map(|r| vec_json(r)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cinf::FieldParams;

    #[test]
    fn inverse_roundtrip() {
        let ctx = Cinf::new(FieldParams::for_q(3).unwrap()).unwrap();
        let th = CinfNum::theta(&ctx);
        let m = Mat::from_rows(
            &ctx,
            vec![vec![th.clone(), CinfNum::one(&ctx)], vec![CinfNum::from_int(&ctx, 2), &th + &CinfNum::one(&ctx)]],
        )
        .unwrap();
        let inv = m.inverse().unwrap();
        let id = Mat::identity(&ctx, 2);
        assert!(m.mul(&inv).sub(&id).residual().is_none_or(|v| v >= ctx.prec() / 2));
        assert!(inv.mul(&m).sub(&id).residual().is_none_or(|v| v >= ctx.prec() / 2));
    }

    #[test]
    fn nilpotent_superdiagonal() {
        let ctx = Cinf::new(FieldParams::for_q(2).unwrap()).unwrap();
        let mut n = Mat::zero(&ctx, 3);
        n.set(0, 1, CinfNum::one(&ctx));
        n.set(1, 2, CinfNum::one(&ctx));
        assert!(!n.pow(2).is_exact_zero());
        assert!(n.pow(3).is_exact_zero());
    }
}
