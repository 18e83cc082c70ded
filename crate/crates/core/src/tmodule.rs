//! Anderson `F_q[t]`-modules in fixed coordinates: `phi(t) = A_0 + A_1 tau + ... + A_s tau^s`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cinf::{Cinf, CinfError, CinfJson, CinfNum, Prec};
use crate::fqpoly::FqPoly;
use crate::matrix::Mat;
use crate::mero::{MeroError, MeroJRep};
use crate::tate::TateSeries;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModuleError {
    #[error("(A_0 - theta)^{power} is not zero (residual {residual:?})")]
    NotNilpotent { power: usize, residual: Prec },
    #[error("phi(t) has no coefficients")]
    Empty,
    #[error("leading coefficient A_{0} is zero")]
    ZeroLeading(usize),
    #[error("matrix {index} has dimension {got}, expected {expected}")]
    Dimension { index: usize, got: usize, expected: usize },
    #[error("bad module descriptor: {0}")]
    Descriptor(String),
    #[error(transparent)]
    Cinf(#[from] CinfError),
}

/// A polynomial in `tau` with `d x d` matrix coefficients.
#[derive(Clone, Debug)]
pub struct TauMatrixPoly {
    mats: Vec<Mat>,
}

impl TauMatrixPoly {
    /// Trailing zero coefficients are dropped; at least `A_0` remains.
    pub fn new(mut mats: Vec<Mat>) -> Result<Self, ModuleError> {
        let d = mats.first().ok_or(ModuleError::Empty)?.dim();
        for (index, m) in mats.iter().enumerate() {
            if m.dim() != d {
                return Err(ModuleError::Dimension { index, got: m.dim(), expected: d });
            }
        }
        while mats.len() > 1 && mats.last().unwrap().is_exact_zero() {
            mats.pop();
        }
        Ok(TauMatrixPoly { mats })
    }

    pub fn identity(ctx: &Arc<Cinf>, d: usize) -> Self {
        TauMatrixPoly { mats: vec![Mat::identity(ctx, d)] }
    }

    pub fn ctx(&self) -> &Arc<Cinf> {
        self.mats[0].ctx()
    }

    pub fn dim(&self) -> usize {
        self.mats[0].dim()
    }

    /// `s`, the `tau`-degree.
    pub fn degree(&self) -> usize {
        self.mats.len() - 1
    }

    pub fn mats(&self) -> &[Mat] {
        &self.mats
    }

    pub fn coeff(&self, k: usize) -> Mat {
        self.mats.get(k).cloned().unwrap_or_else(|| Mat::zero(self.ctx(), self.dim()))
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.mats.len().max(other.mats.len());
        let mats = (0..len).map(|k| self.coeff(k).add(&other.coeff(k))).collect();
        TauMatrixPoly::new(mats).expect("same dimension")
    }

    pub fn sub(&self, other: &Self) -> Self {
        let len = self.mats.len().max(other.mats.len());
        let mats = (0..len).map(|k| self.coeff(k).sub(&other.coeff(k))).collect();
        TauMatrixPoly::new(mats).expect("same dimension")
    }

    pub fn scale(&self, c: &CinfNum) -> Self {
        TauMatrixPoly::new(self.mats.iter().map(|m| m.scale(c)).collect()).expect("same dimension")
    }

    /// Composition `self o other`, using `tau^a B = B^(a) tau^a`.
    pub fn compose(&self, other: &Self) -> Self {
        let d = self.dim();
        let mut out = vec![Mat::zero(self.ctx(), d); self.mats.len() + other.mats.len() - 1];
        for (a, am) in self.mats.iter().enumerate() {
            if am.is_exact_zero() {
                continue;
            }
            for (b, bm) in other.mats.iter().enumerate() {
                out[a + b] = out[a + b].add(&am.mul(&bm.qpow(a as u32)));
            }
        }
        TauMatrixPoly::new(out).expect("same dimension")
    }

    /// Inverse when `A_0` is invertible and `A_0^-1 (self - A_0)` is nilpotent.
    pub fn inverse(&self) -> Option<Self> {
        let a0_inv = self.mats[0].inverse()?;
        let d = self.dim();
        // self = A_0 (1 + X), X = A_0^-1 (self - A_0)
        let mut x_mats = vec![Mat::zero(self.ctx(), d)];
        x_mats.extend(self.mats[1..].iter().map(|m| a0_inv.mul(m)));
        let x = TauMatrixPoly::new(x_mats).ok()?;
        let a0_inv_poly = TauMatrixPoly { mats: vec![a0_inv] };
        let mut sum = TauMatrixPoly::identity(self.ctx(), d);
        let mut pow = TauMatrixPoly::identity(self.ctx(), d);
        // A nilpotent X in tau-degree >= 1 has X^k = 0 for k <= d * (deg + 1) in the shapes we use.
        for k in 1..=(d * (self.degree() + 1) + 1) {
            pow = pow.compose(&x);
            if pow.mats.iter().all(Mat::is_exact_zero) {
                return Some(sum.compose(&a0_inv_poly));
            }
            sum = if k % 2 == 1 { sum.sub(&pow) } else { sum.add(&pow) };
        }
        None
    }

    /// `sum_k A_k x^(q^k)` for a vector of numbers.
    pub fn apply(&self, x: &[CinfNum]) -> Vec<CinfNum> {
        let mut acc = vec![CinfNum::zero(self.ctx()); self.dim()];
        for (k, m) in self.mats.iter().enumerate() {
            if m.is_exact_zero() {
                continue;
            }
            let tw: Vec<CinfNum> = x.iter().map(|v| v.qpow(k as u32)).collect();
            acc = crate::matrix::vec_add(&acc, &m.mul_vec(&tw));
        }
        acc
    }

    /// `sum_k A_k tau^k(w)` for a vector of meromorphic functions.
    pub fn apply_mero(&self, w: &[MeroJRep]) -> Result<Vec<MeroJRep>, MeroError> {
        let d = self.dim();
        assert_eq!(w.len(), d, "vector length must equal the dimension");
        let mut out: Vec<MeroJRep> = w.iter().map(|x| MeroJRep::zero(x.ctx(), x.horizon(), x.cap())).collect();
        let mut tw = w.to_vec();
        for (k, m) in self.mats.iter().enumerate() {
            if k > 0 {
                tw = tw.iter().map(MeroJRep::twist).collect::<Result<_, _>>()?;
            }
            for i in 0..d {
                for j in 0..d {
                    let a = m.get(i, j);
                    if a.is_zero() && a.is_exact() {
                        continue;
                    }
                    out[i] = out[i].add(&tw[j].scale(a));
                }
            }
        }
        Ok(out)
    }

    /// `sum_k A_k tau^k(w)` for a vector of series.
    pub fn apply_series(&self, w: &[TateSeries]) -> Vec<TateSeries> {
        let d = self.dim();
        assert_eq!(w.len(), d, "vector length must equal the dimension");
        let mut out: Vec<TateSeries> = w.iter().map(|x| TateSeries::zero(x.ctx(), x.cap())).collect();
        for (k, m) in self.mats.iter().enumerate() {
            let tw: Vec<TateSeries> = w.iter().map(|x| x.twist_n(k as u32)).collect();
            for i in 0..d {
                for j in 0..d {
                    let a = m.get(i, j);
                    if a.is_zero() && a.is_exact() {
                        continue;
                    }
                    out[i] = out[i].add(&tw[j].scale(a));
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> Vec<Vec<Vec<CinfJson>>> {
        self.mats.iter().map(Mat::to_json).collect()
    }
}

/// How a module was built; also the configuration format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModuleDescriptor {
    Carlitz,
    CarlitzTensor { n: usize },
    Prolongation { k: usize },
    DirectSum { parts: Vec<ModuleDescriptor> },
    UserDefined { mats: Vec<Vec<Vec<CinfJson>>> },
}

impl ModuleDescriptor {
    /// `carlitz`, `carlitz_tensor:N`, `prolongation:K`, joined with `+` for direct sums.
    pub fn parse(s: &str) -> Result<Self, ModuleError> {
        let s = s.trim();
        if s.starts_with('{') {
            return serde_json::from_str(s).map_err(|e| ModuleError::Descriptor(e.to_string()));
        }
        let parts: Vec<&str> = s.split('+').map(str::trim).collect();
        if parts.len() > 1 {
            return Ok(ModuleDescriptor::DirectSum {
                parts: parts.into_iter().map(Self::parse).collect::<Result<_, _>>()?,
            });
        }
        let (name, arg) = match s.split_once(':') {
            Some((a, b)) => (a.trim(), Some(b.trim())),
            None => (s, None),
        };
        let num = |what: &str| -> Result<usize, ModuleError> {
            arg.ok_or_else(|| ModuleError::Descriptor(format!("{name} needs :{what}")))?
                .parse()
                .map_err(|_| ModuleError::Descriptor(format!("bad {what} in {s:?}")))
        };
        match name {
            "carlitz" if arg.is_none() => Ok(ModuleDescriptor::Carlitz),
            "carlitz_tensor" => {
                let n = num("n")?;
                if n == 0 {
                    return Err(ModuleError::Descriptor("carlitz_tensor needs n >= 1".into()));
                }
                Ok(ModuleDescriptor::CarlitzTensor { n })
            }
            "prolongation" => Ok(ModuleDescriptor::Prolongation { k: num("k")? }),
            _ => Err(ModuleError::Descriptor(format!("unknown module {s:?}"))),
        }
    }

    pub fn build(&self, ctx: &Arc<Cinf>) -> Result<TModule, ModuleError> {
        match self {
            ModuleDescriptor::Carlitz => Ok(TModule::carlitz(ctx)),
            ModuleDescriptor::CarlitzTensor { n } => Ok(TModule::carlitz_tensor(ctx, *n)),
            ModuleDescriptor::Prolongation { k } => Ok(TModule::prolongation(ctx, *k)),
            ModuleDescriptor::DirectSum { parts } => {
                let mut it = parts.iter();
                let first = it.next().ok_or_else(|| ModuleError::Descriptor("empty direct sum".into()))?;
                let mut acc = first.build(ctx)?;
                for p in it {
                    acc = acc.direct_sum(&p.build(ctx)?);
                }
                Ok(acc)
            }
            ModuleDescriptor::UserDefined { mats } => {
                let mut out = Vec::new();
                for m in mats {
                    let rows = m
                        .iter()
                        .map(|r| r.iter().map(|x| CinfNum::from_json(ctx, x)).collect::<Result<Vec<_>, _>>())
                        .collect::<Result<Vec<_>, _>>()?;
                    out.push(Mat::from_rows(ctx, rows).map_err(ModuleError::Descriptor)?);
                }
                TModule::user_defined(out)
            }
        }
    }
}

impl fmt::Display for ModuleDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModuleDescriptor::Carlitz => write!(f, "carlitz"),
            ModuleDescriptor::CarlitzTensor { n } => write!(f, "carlitz_tensor:{n}"),
            ModuleDescriptor::Prolongation { k } => write!(f, "prolongation:{k}"),
            ModuleDescriptor::DirectSum { parts } => {
                let s: Vec<String> = parts.iter().map(|p| p.to_string()).collect();
                write!(f, "{}", s.join("+"))
            }
            ModuleDescriptor::UserDefined { .. } => write!(f, "user_defined"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct TModule {
    name: String,
    phi_t: TauMatrixPoly,
    descriptor: ModuleDescriptor,
}

impl TModule {
    fn checked(name: String, phi_t: TauMatrixPoly, descriptor: ModuleDescriptor) -> Result<Self, ModuleError> {
        let m = TModule { name, phi_t, descriptor };
        m.validate()?;
        Ok(m)
    }

    /// `(A_0 - theta)^d == 0` and a nonzero leading coefficient.
    pub fn validate(&self) -> Result<(), ModuleError> {
        let s = self.phi_t.degree();
        if s > 0 && self.phi_t.mats[s].is_zero() {
            return Err(ModuleError::ZeroLeading(s));
        }
        let nd = self.nilpotent_part().pow(self.dim() as u32);
        if !nd.is_zero() {
            return Err(ModuleError::NotNilpotent { power: self.dim(), residual: nd.residual() });
        }
        Ok(())
    }

    pub fn carlitz(ctx: &Arc<Cinf>) -> Self {
        let phi = TauMatrixPoly::new(vec![
            Mat::scalar(&CinfNum::theta(ctx), 1),
            Mat::identity(ctx, 1),
        ])
        .expect("static shape");
        TModule { name: "carlitz".into(), phi_t: phi, descriptor: ModuleDescriptor::Carlitz }
    }

    /// `n`-th tensor power: `A_0 = theta + superdiagonal`, `A_1 = E_{n,1}`.
    pub fn carlitz_tensor(ctx: &Arc<Cinf>, n: usize) -> Self {
        assert!(n >= 1, "tensor power must be positive");
        let mut a0 = Mat::scalar(&CinfNum::theta(ctx), n);
        for i in 0..n - 1 {
            a0.set(i, i + 1, CinfNum::one(ctx));
        }
        let a1 = Mat::unit(ctx, n, n - 1, 0);
        let phi = TauMatrixPoly::new(vec![a0, a1]).expect("static shape");
        TModule {
            name: format!("carlitz_tensor:{n}"),
            phi_t: phi,
            descriptor: ModuleDescriptor::CarlitzTensor { n },
        }
    }

    /// `k`-th prolongation: `A_0 = theta - superdiagonal`, `A_1 = Id`, dimension `k + 1`.
    pub fn prolongation(ctx: &Arc<Cinf>, k: usize) -> Self {
        let d = k + 1;
        let mut a0 = Mat::scalar(&CinfNum::theta(ctx), d);
        for i in 0..k {
            a0.set(i, i + 1, -&CinfNum::one(ctx));
        }
        let phi = TauMatrixPoly::new(vec![a0, Mat::identity(ctx, d)]).expect("static shape");
        TModule { name: format!("prolongation:{k}"), phi_t: phi, descriptor: ModuleDescriptor::Prolongation { k } }
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        let len = self.phi_t.mats.len().max(other.phi_t.mats.len());
        let mats = (0..len).map(|k| self.phi_t.coeff(k).block_diag(&other.phi_t.coeff(k))).collect();
        let parts = [&self.descriptor, &other.descriptor]
            .into_iter()
            .flat_map(|d| match d {
                ModuleDescriptor::DirectSum { parts } => parts.clone(),
                other => vec![other.clone()],
            })
            .collect();
        TModule {
            name: format!("{}+{}", self.name, other.name),
            phi_t: TauMatrixPoly::new(mats).expect("same dimension"),
            descriptor: ModuleDescriptor::DirectSum { parts },
        }
    }

    pub fn user_defined(mats: Vec<Mat>) -> Result<Self, ModuleError> {
        let phi = TauMatrixPoly::new(mats)?;
        let descriptor = ModuleDescriptor::UserDefined { mats: phi.to_json() };
        Self::checked("user_defined".into(), phi, descriptor)
    }

    /// The module with `phi(t)` replaced (for coordinate changes).
    pub fn with_phi(&self, name: String, phi_t: TauMatrixPoly) -> Result<Self, ModuleError> {
        let descriptor = ModuleDescriptor::UserDefined { mats: phi_t.to_json() };
        Self::checked(name, phi_t, descriptor)
    }

    pub fn ctx(&self) -> &Arc<Cinf> {
        self.phi_t.ctx()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn descriptor(&self) -> &ModuleDescriptor {
        &self.descriptor
    }

    pub fn dim(&self) -> usize {
        self.phi_t.dim()
    }

    pub fn phi_t(&self) -> &TauMatrixPoly {
        &self.phi_t
    }

    /// `d phi(t) = A_0`.
    pub fn d_phi_t(&self) -> &Mat {
        &self.phi_t.mats[0]
    }

    /// `N = A_0 - theta`.
    pub fn nilpotent_part(&self) -> Mat {
        let theta = Mat::scalar(&CinfNum::theta(self.ctx()), self.dim());
        self.d_phi_t().sub(&theta)
    }

    /// `d phi(a) = a(A_0)`.
    pub fn d_phi(&self, a: &FqPoly) -> Mat {
        let ctx = self.ctx();
        let d = self.dim();
        let mut acc = Mat::zero(ctx, d);
        for &c in a.coeffs().iter().rev() {
            acc = acc.mul(self.d_phi_t()).add(&Mat::scalar(&CinfNum::constant(ctx, c), d));
        }
        acc
    }

    /// `phi(a)` by composition of `phi(t)`.
    pub fn phi(&self, a: &FqPoly) -> TauMatrixPoly {
        let ctx = self.ctx();
        let d = self.dim();
        let mut acc = TauMatrixPoly::new(vec![Mat::zero(ctx, d)]).expect("nonempty");
        for &c in a.coeffs().iter().rev() {
            acc = self.phi_t.compose(&acc);
            acc = acc.add(&TauMatrixPoly::new(vec![Mat::scalar(&CinfNum::constant(ctx, c), d)]).expect("nonempty"));
        }
        acc
    }

    pub fn apply_phi_t(&self, x: &[CinfNum]) -> Vec<CinfNum> {
        self.phi_t.apply(x)
    }

    pub fn apply_phi_t_mero(&self, w: &[MeroJRep]) -> Result<Vec<MeroJRep>, MeroError> {
        self.phi_t.apply_mero(w)
    }

    pub fn apply_phi_t_series(&self, w: &[TateSeries]) -> Vec<TateSeries> {
        self.phi_t.apply_series(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cinf::FieldParams;
    use crate::field::Fe;

    fn ctx(q: u32) -> Arc<Cinf> {
        let mut p = FieldParams::for_q(q).unwrap();
        p.prec = 100;
        Cinf::new(p).unwrap()
    }

    #[test]
    fn carlitz_action_on_constants() {
        let c = ctx(3);
        let e = TModule::carlitz(&c);
        let x = CinfNum::from_int(&c, 2);
        let want = &(&CinfNum::theta(&c) * &x) + &x.pow(3);
        assert_eq!(e.apply_phi_t(&[x])[0], want);
        assert!(e.apply_phi_t(&[CinfNum::zero(&c)])[0].is_zero());
        assert!(e.nilpotent_part().is_exact_zero());
    }

    #[test]
    fn tensor_shape() {
        let c = ctx(2);
        let e = TModule::carlitz_tensor(&c, 3);
        let a0 = e.d_phi_t();
        assert_eq!(*a0.get(0, 1), CinfNum::one(&c));
        assert_eq!(*a0.get(1, 2), CinfNum::one(&c));
        assert!(a0.get(0, 2).is_zero());
        assert_eq!(*e.phi_t().coeff(1).get(2, 0), CinfNum::one(&c));
        let n = e.nilpotent_part();
        assert!(!n.pow(2).is_zero());
        assert!(n.pow(3).is_exact_zero());
        e.validate().unwrap();
        let one = TModule::carlitz_tensor(&c, 1);
        assert_eq!(one.phi_t().to_json(), TModule::carlitz(&c).phi_t().to_json());
    }

    #[test]
    fn prolongation_shape() {
        let c = ctx(3);
        let e = TModule::prolongation(&c, 1);
        assert_eq!(*e.d_phi_t().get(0, 1), -&CinfNum::one(&c));
        assert!(e.d_phi_t().get(1, 0).is_zero());
        e.validate().unwrap();
        assert_eq!(TModule::prolongation(&c, 0).phi_t().to_json(), TModule::carlitz(&c).phi_t().to_json());
    }

    #[test]
    fn user_defined_rejects_non_nilpotent() {
        let c = ctx(2);
        let a0 = Mat::scalar(&(&CinfNum::theta(&c) + &CinfNum::one(&c)), 1);
        let err = TModule::user_defined(vec![a0, Mat::identity(&c, 1)]).unwrap_err();
        assert!(matches!(err, ModuleError::NotNilpotent { power: 1, .. }));
    }

    #[test]
    fn direct_sum_and_descriptors() {
        let c = ctx(2);
        let e = TModule::carlitz(&c).direct_sum(&TModule::carlitz(&c));
        assert_eq!(e.dim(), 2);
        assert!(e.d_phi_t().get(0, 1).is_zero());
        let d = ModuleDescriptor::parse("carlitz_tensor:2+prolongation:1").unwrap();
        assert_eq!(d.build(&c).unwrap().dim(), 4);
        assert_eq!(d.to_string(), "carlitz_tensor:2+prolongation:1");
        let json = serde_json::to_string(&d).unwrap();
        assert_eq!(ModuleDescriptor::parse(&json).unwrap(), d);
        assert!(ModuleDescriptor::parse("bogus").is_err());
        let ab = TModule::carlitz(&c).direct_sum(&TModule::carlitz_tensor(&c, 2));
        let abc = ab.direct_sum(&TModule::prolongation(&c, 1));
        let bc = TModule::carlitz_tensor(&c, 2).direct_sum(&TModule::prolongation(&c, 1));
        let abc2 = TModule::carlitz(&c).direct_sum(&bc);
        assert_eq!(abc.phi_t().to_json(), abc2.phi_t().to_json());
    }

    #[test]
    fn phi_of_square_is_composition() {
        let c = ctx(3);
        let e = TModule::carlitz_tensor(&c, 2);
        let t2 = FqPoly::new(vec![Fe::ZERO, Fe::ZERO, Fe::ONE]);
        let x = vec![CinfNum::theta(&c), CinfNum::from_int(&c, 1)];
        let lhs = e.phi(&t2).apply(&x);
        let rhs = e.apply_phi_t(&e.apply_phi_t(&x));
        for (a, b) in lhs.iter().zip(&rhs) {
            assert_eq!(a, b);
        }
        let d = e.d_phi(&t2);
        assert!(d.sub(&e.d_phi_t().mul(e.d_phi_t())).is_exact_zero());
    }

    #[test]
    fn tau_inverse() {
        let c = ctx(2);
        let mut m1 = Mat::zero(&c, 2);
        m1.set(0, 1, CinfNum::one(&c));
        let m = TauMatrixPoly::new(vec![Mat::identity(&c, 2), m1]).unwrap();
        let inv = m.inverse().unwrap();
        let id = m.compose(&inv);
        assert_eq!(id.degree(), 0);
        assert!(id.coeff(0).sub(&Mat::identity(&c, 2)).is_exact_zero());
    }
}
