//! Special functions of Anderson modules: the Anderson-Thakur function, the
//! functions attached to period-lattice vectors, residues at `theta`, the
//! pole-order filtration and coordinate changes.

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use crate::cinf::{lambda_theta, Cinf, CinfError, CinfJson, CinfNum, Prec};
use crate::exp::{ExpCoeffs, LatticeVector};
use crate::fqpoly::FqPoly;
use crate::matrix::{vec_json, vec_residual, vec_sub, Mat};
use crate::mero::{pole, HolomorphyOpts, MeroError, MeroJRep};
use crate::tate::TateSeries;
use crate::tmodule::{ModuleDescriptor, ModuleError, TModule, TauMatrixPoly};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecialError {
    #[error(transparent)]
    Cinf(#[from] CinfError),
    #[error(transparent)]
    Mero(#[from] MeroError),
    #[error(transparent)]
    Module(#[from] ModuleError),
    #[error(transparent)]
    Exp(#[from] crate::exp::ExpError),
    #[error("u = {0} is not separating (u' = 0)")]
    NotSeparating(String),
    #[error("need exponential coefficients up to e_{needed}, have {have}")]
    TooFewCoeffs { needed: usize, have: usize },
    #[error("exponential terms do not decay past the horizon: {0:?}")]
    NoDecay(Vec<Option<i64>>),
    #[error("vector has length {got}, module dimension is {expected}")]
    Dimension { got: usize, expected: usize },
    #[error("basis element {index} fails the special-function equation (residual {residual:?})")]
    NotSpecial { index: usize, residual: Prec },
    #[error("no standard basis for {0}")]
    NoBasis(String),
    #[error("coordinate change is not invertible")]
    NotInvertible,
}

/// Sizes shared by every representation: pole horizon, disk degree cap and
/// the length of truncated products.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Shape {
    pub horizon: usize,
    pub cap: usize,
    pub terms: usize,
}

/// A separating element of `F_q[t]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeparatingU {
    u: FqPoly,
    uprime: FqPoly,
}

impl SeparatingU {
    pub fn new(ctx: &Cinf, u: FqPoly) -> Result<Self, SpecialError> {
        let uprime = u.derivative(ctx);
        if uprime.is_zero() {
            return Err(SpecialError::NotSeparating(u.render(ctx)));
        }
        Ok(SeparatingU { u, uprime })
    }

    pub fn t() -> Self {
        SeparatingU { u: FqPoly::t(), uprime: FqPoly::one() }
    }

    pub fn u(&self) -> &FqPoly {
        &self.u
    }

    pub fn uprime(&self) -> &FqPoly {
        &self.uprime
    }
}

#[derive(Clone, Debug)]
pub struct Source {
    pub lambda: LatticeVector,
    pub u: SeparatingU,
}

#[derive(Clone, Debug)]
pub struct SpecialFunction {
    module: TModule,
    comps: Vec<MeroJRep>,
    source: Option<Source>,
}

/// Outcome of [`sf_check`].
#[derive(Clone, Debug)]
pub struct SfReport {
    pub residual: Prec,
    pub components: Vec<Prec>,
    pub pass: bool,
}

fn prec_min(a: Prec, b: Prec) -> Prec {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => Some(x.min(y)),
    }
}

/// `None` (exact zero) or at least half the working precision.
pub fn passes(ctx: &Cinf, residual: Prec) -> bool {
    residual.is_none_or(|v| v >= ctx.prec() / 2)
}

impl SpecialFunction {
    pub fn new(module: &TModule, comps: Vec<MeroJRep>) -> Result<Self, SpecialError> {
        if comps.len() != module.dim() {
            return Err(SpecialError::Dimension { got: comps.len(), expected: module.dim() });
        }
        Ok(SpecialFunction { module: module.clone(), comps, source: None })
    }

    pub fn zero(module: &TModule, shape: Shape) -> Self {
        let comps = (0..module.dim()).map(|_| MeroJRep::zero(module.ctx(), shape.horizon, shape.cap)).collect();
        SpecialFunction { module: module.clone(), comps, source: None }
    }

    pub fn module(&self) -> &TModule {
        &self.module
    }

    pub fn comps(&self) -> &[MeroJRep] {
        &self.comps
    }

    pub fn source(&self) -> Option<&Source> {
        self.source.as_ref()
    }

    pub fn ctx(&self) -> &Arc<Cinf> {
        self.module.ctx()
    }

    pub fn add(&self, other: &Self) -> Self {
        let comps = self.comps.iter().zip(&other.comps).map(|(a, b)| a.add(b)).collect();
        SpecialFunction { module: self.module.clone(), comps, source: None }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let comps = self.comps.iter().zip(&other.comps).map(|(a, b)| a.sub(b)).collect();
        SpecialFunction { module: self.module.clone(), comps, source: None }
    }

    pub fn scale(&self, c: &CinfNum) -> Self {
        let comps = self.comps.iter().map(|a| a.scale(c)).collect();
        SpecialFunction { module: self.module.clone(), comps, source: None }
    }

    /// Multiplication by a polynomial in `t` (the `A (x) 1` action).
    pub fn mul_poly(&self, p: &FqPoly) -> Self {
        let comps = self
            .comps
            .iter()
            .map(|a| a.mul_poly(&p.to_series(self.ctx(), a.cap())))
            .collect();
        SpecialFunction { module: self.module.clone(), comps, source: None }
    }

    /// The same components regarded as functions for another module.
    pub fn with_module(&self, module: &TModule) -> Result<Self, SpecialError> {
        Self::new(module, self.comps.clone())
    }

    pub fn pole_orders(&self) -> Vec<Vec<usize>> {
        self.comps
            .iter()
            .map(|c| (0..=c.horizon()).map(|i| c.pole_order(i)).collect())
            .collect()
    }

    pub fn max_pole_order(&self) -> usize {
        self.comps.iter().map(MeroJRep::max_pole_order).max().unwrap_or(0)
    }

    pub fn residual(&self) -> Prec {
        self.comps.iter().fold(None, |acc, c| prec_min(acc, c.residual()))
    }

    /// Pole orders at most `n` and every component passing the holomorphy test.
    pub fn holomorphy_check(&self, n: usize, opts: &HolomorphyOpts) -> bool {
        self.comps.iter().all(|c| c.holomorphy_check(n, opts))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "module": self.module.descriptor().to_string(),
            "components": self.comps.iter().map(MeroJRep::to_json).collect::<Vec<_>>(),
            "lambda": self.source.as_ref().map(|s| vec_json(&s.lambda)),
            "u": self.source.as_ref().map(|s| s.u.u().coeffs().iter().map(|c| c.0).collect::<Vec<_>>()),
        })
    }
}

/// Anderson-Thakur function `lambda_theta prod_{i>=0} (1 - t/theta^(q^i))^-1`
/// as partial fractions, product truncated after `shape.terms` factors.
pub fn anderson_thakur_omega(ctx: &Arc<Cinf>, shape: Shape) -> Result<SpecialFunction, SpecialError> {
    let lam = lambda_theta(ctx)?;
    let top = shape.terms.max(shape.horizon);
    let r = ctx.r();
    let poles: Vec<CinfNum> = (0..=top).map(|i| pole(ctx, i)).collect();
    let one = CinfNum::one(ctx);
    let mut coeffs = Vec::with_capacity(top + 1);
    for i in 0..=top {
        // a_i = -c_i lambda prod_{j != i} (1 - c_i / c_j)^-1
        let mut a = -&(&poles[i] * &lam);
        for j in 0..=top {
            if j == i {
                continue;
            }
            let ratio = CinfNum::theta_pow(ctx, ctx.q_pow(i as u32) - ctx.q_pow(j as u32));
            a = &a * &(&one - &ratio).inv()?;
        }
        // Factors beyond `top` are 1-units differing from 1 by theta^(q^i - q^(top+1)).
        let neglect = (ctx.q_pow(top as u32 + 1) - ctx.q_pow(i as u32)).saturating_mul(r);
        let cap = a.val().unwrap_or(0).saturating_add(neglect);
        coeffs.push(a.truncate(cap));
    }
    let mut parts: Vec<Vec<CinfNum>> = vec![Vec::new(); shape.horizon + 1];
    let mut tail_bound: Prec = lam.val().map(|v| v.saturating_add((ctx.q_pow(top as u32 + 1) - 1).saturating_mul(r)));
    for (i, a) in coeffs.into_iter().enumerate() {
        if i <= shape.horizon {
            parts[i] = vec![a];
        } else {
            let size = a.residual().map(|v| v.saturating_add(ctx.q_pow(i as u32).saturating_mul(r)));
            tail_bound = prec_min(tail_bound, size);
        }
    }
    let comp = MeroJRep::from_parts(ctx, parts, TateSeries::zero(ctx, shape.cap), tail_bound);
    SpecialFunction::new(&TModule::carlitz(ctx), vec![comp])
}

/// Residual of `phi(t) w - t w`.
pub fn sf_check(module: &TModule, comps: &[MeroJRep]) -> Result<SfReport, SpecialError> {
    let ctx = module.ctx();
    if comps.len() != module.dim() {
        return Err(SpecialError::Dimension { got: comps.len(), expected: module.dim() });
    }
    let lhs = module.apply_phi_t_mero(comps)?;
    let components: Vec<Prec> = lhs
        .iter()
        .zip(comps)
        .map(|(a, w)| a.sub(&w.mul_poly(&TateSeries::t(ctx, w.cap()))).residual())
        .collect();
    let residual = components.iter().fold(None, |acc, r| prec_min(acc, *r));
    Ok(SfReport { residual, components, pass: passes(ctx, residual) })
}

pub fn sf_check_fn(w: &SpecialFunction) -> Result<SfReport, SpecialError> {
    sf_check(&w.module, &w.comps)
}

/// `res_j(dt (x) w)`: the coefficient of `(t - theta)^-1` in every component.
pub fn residue_at_j(w: &SpecialFunction) -> LatticeVector {
    w.comps.iter().map(MeroJRep::scalar_residue).collect()
}

// Dense polynomials in t over C_inf, lowest degree first.

fn cpoly_add(a: &[CinfNum], b: &[CinfNum]) -> Vec<CinfNum> {
    let ctx = a.first().or(b.first()).map(|c| c.ctx().clone());
    let Some(ctx) = ctx else { return Vec::new() };
    let z = CinfNum::zero(&ctx);
    (0..a.len().max(b.len())).map(|i| a.get(i).unwrap_or(&z) + b.get(i).unwrap_or(&z)).collect()
}

fn cpoly_mul(a: &[CinfNum], b: &[CinfNum]) -> Vec<CinfNum> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let ctx = a[0].ctx().clone();
    let mut out = vec![CinfNum::zero(&ctx); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = &out[i + j] + &(x * y);
        }
    }
    out
}

/// Product of power series modulo `s^n`.
fn cseries_mul(a: &[CinfNum], b: &[CinfNum], n: usize) -> Vec<CinfNum> {
    let mut out = cpoly_mul(a, b);
    out.truncate(n);
    if let Some(x) = a.first().or(b.first()) {
        out.resize(n, CinfNum::zero(x.ctx()));
    }
    out
}

/// Inverse of a power series with invertible constant term, modulo `s^n`.
fn cseries_inv(a: &[CinfNum], n: usize) -> Result<Vec<CinfNum>, CinfError> {
    let ctx = a[0].ctx();
    let a0_inv = a[0].inv()?;
    let mut out = vec![a0_inv.clone()];
    for k in 1..n {
        let mut acc = CinfNum::zero(ctx);
        for (j, aj) in a.iter().enumerate().skip(1).take(k) {
            acc = &acc + &(aj * &out[k - j]);
        }
        out.push(-&(&acc * &a0_inv));
    }
    Ok(out)
}

/// Special function attached to `lambda` with respect to the separating `u`.
///
/// With `(u(t) - u(s)) / (t - s) = sum_k t^k h_k(s)`, `y_k = d phi(h_k) lambda`
/// and `n_u = d phi(u) - u(theta)`, the `i`-th term is
/// `sum_j sum_k t^k e_i (n_u^j y_k)^(i) / (u(t) - u(theta^(q^i)))^(j+1)`.
/// In `s = t - c`, `c = theta^(q^i)`, it reads `N(s) / (s Q(s))^d` with
/// `Q(0) = u'(c) != 0`; the principal part `S / s^d` comes from power series in
/// `s`, and `R = N - Q^d S` must vanish. The unit-disk size of
/// `R / (u(t) - u(c))^d` is returned alongside the function and folded into
/// its tail bound.
pub fn sf_from_lattice(
    module: &TModule,
    lambda: &[CinfNum],
    u: &SeparatingU,
    coeffs: &ExpCoeffs,
    shape: Shape,
) -> Result<(SpecialFunction, Prec), SpecialError> {
    let ctx = module.ctx();
    let d = module.dim();
    if lambda.len() != d {
        return Err(SpecialError::Dimension { got: lambda.len(), expected: d });
    }
    let h = shape.horizon;
    if coeffs.len() < h + 3 {
        return Err(SpecialError::TooFewCoeffs { needed: h + 2, have: coeffs.len().saturating_sub(1) });
    }
    let u_theta = u.u().eval(&CinfNum::theta(ctx));
    let n_u = module.d_phi(u.u()).sub(&Mat::scalar(&u_theta, d));
    let hk = u.u().divided_difference();
    let ys: Vec<Vec<CinfNum>> = hk.iter().map(|p| module.d_phi(p).mul_vec(lambda)).collect();
    // n_u^j y_k
    let ny: Vec<Vec<Vec<CinfNum>>> = (0..d)
        .map(|j| {
            let nj = n_u.pow(j as u32);
            ys.iter().map(|y| nj.mul_vec(y)).collect()
        })
        .collect();
    let u_series = u.u().to_series(ctx, usize::MAX);
    let deg = u.u().degree().unwrap_or(0);
    let gf = ctx.gf();

    let mut parts: Vec<Vec<Vec<CinfNum>>> = vec![vec![Vec::new(); h + 1]; d];
    let mut cancel: Prec = None;
    for i in 0..=h {
        let e = &coeffs.coeffs()[i];
        let c = pole(ctx, i);
        let qi = ctx.q_pow(i as u32).saturating_mul(ctx.r());
        // Everything in s = t - c: u(t) - u(c) = s Q(s), Q(0) = u'(c).
        let ut = u_series.taylor_at(&c, deg + 1);
        let q_poly: Vec<CinfNum> = ut[1..].to_vec();
        let q_inv = cseries_inv(&q_poly, d)?;
        let mut q_inv_pows = vec![vec![CinfNum::one(ctx)]];
        for j in 0..d {
            let next = cseries_mul(&q_inv_pows[j], &q_inv, d);
            q_inv_pows.push(next);
        }
        let c_pows: Vec<CinfNum> = (0..deg.max(1)).scan(CinfNum::one(ctx), |acc, _| {
            let cur = acc.clone();
            *acc = &*acc * &c;
            Some(cur)
        }).collect();
        let z: Vec<Vec<Vec<CinfNum>>> = ny
            .iter()
            .map(|row| row.iter().map(|v| e.mul_vec(&v.iter().map(|x| x.qpow(i as u32)).collect::<Vec<_>>())).collect())
            .collect();
        let s_q: Vec<CinfNum> = std::iter::once(CinfNum::zero(ctx)).chain(q_poly.iter().cloned()).collect();
        let mut s_q_pows = vec![vec![CinfNum::one(ctx)]];
        for j in 1..=d {
            let next = cpoly_mul(&s_q_pows[j - 1], &s_q);
            s_q_pows.push(next);
        }
        let mut q_d = vec![CinfNum::one(ctx)];
        for _ in 0..d {
            q_d = cpoly_mul(&q_d, &q_poly);
        }
        for comp in 0..d {
            let mut numer: Vec<CinfNum> = Vec::new();
            let mut polar = vec![CinfNum::zero(ctx); d];
            for (j, zj) in z.iter().enumerate() {
                // T_j(s) = sum_k (c + s)^k z_{j,k}
                let mut tj = vec![CinfNum::zero(ctx); zj.len()];
                for (k, v) in zj.iter().enumerate() {
                    let x = &v[comp];
                    if x.is_zero() && x.is_exact() {
                        continue;
                    }
                    for (l, slot) in tj.iter_mut().enumerate().take(k + 1) {
                        let b = gf.binomial(k as u64, l as u64);
                        if !b.is_zero() {
                            *slot = &*slot + &(&c_pows[k - l] * x).scale(b);
                        }
                    }
                }
                // principal part of T_j / (s Q)^(j+1)
                let pj = cseries_mul(&tj, &q_inv_pows[j + 1], j + 1);
                for (m, x) in pj.into_iter().enumerate() {
                    polar[j - m] = &polar[j - m] + &x;
                }
                numer = cpoly_add(&numer, &cpoly_mul(&tj, &s_q_pows[d - 1 - j]));
            }
            // The term is S / s^d + R / (u(t) - u(c))^d with S read off the polar part.
            let s_low: Vec<CinfNum> = (0..d).map(|m| polar[d - 1 - m].clone()).collect();
            let rem = cpoly_add(&numer, &cpoly_mul(&q_d, &s_low).iter().map(|x| -x).collect::<Vec<_>>());
            let size = rem
                .iter()
                .enumerate()
                .filter_map(|(m, x)| x.residual().map(|v| v.saturating_sub(qi.saturating_mul(m as i64))))
                .min()
                .map(|v| v.saturating_add(qi.saturating_mul((d * deg) as i64)));
            cancel = prec_min(cancel, size);
            parts[comp][i] = polar;
        }
    }
    // Terms past the horizon: sizes on the unit disk of e_i (N^j lambda)^(i) / (t - c_i)^(j+1).
    let n_mat = module.nilpotent_part();
    let vl: Vec<Option<i64>> = (0..d)
        .map(|j| n_mat.pow(j as u32).mul_vec(lambda).iter().filter_map(CinfNum::val).min())
        .collect();
    let r = ctx.r();
    let sizes: Vec<Option<i64>> = (h + 1..coeffs.len())
        .map(|i| {
            let ve = coeffs.coeffs()[i].val()?;
            let qi = ctx.q_pow(i as u32);
            vl.iter()
                .enumerate()
                .filter_map(|(j, v)| {
                    v.map(|v| ve.saturating_add(qi.saturating_mul(v)).saturating_add(qi.saturating_mul(r) * (j as i64 + 1)))
                })
                .min()
        })
        .collect();
    let defined: Vec<i64> = sizes.iter().flatten().copied().collect();
    if defined.windows(2).any(|w| w[0] >= w[1]) {
        return Err(SpecialError::NoDecay(sizes));
    }
    let tail_bound = prec_min(defined.first().copied(), cancel);

    let comps = (0..d)
        .map(|comp| MeroJRep::from_parts(ctx, parts[comp].clone(), TateSeries::zero(ctx, shape.cap), tail_bound))
        .collect();
    let mut w = SpecialFunction::new(module, comps)?;
    w.source = Some(Source { lambda: lambda.to_vec(), u: u.clone() });
    Ok((w, cancel))
}

/// `(1, (t - theta), ..., (t - theta)^(n-1)) omega^n` for the `n`-th tensor power.
pub fn tensor_generator(ctx: &Arc<Cinf>, n: usize, shape: Shape) -> Result<SpecialFunction, SpecialError> {
    let omega = anderson_thakur_omega(ctx, shape)?.comps[0].clone();
    let mut pw = omega.clone();
    for _ in 1..n {
        pw = pw.mul(&omega);
    }
    let lin = TateSeries::t_minus(&CinfNum::theta(ctx), shape.cap);
    let mut comps = vec![pw];
    for k in 1..n {
        let next = comps[k - 1].mul_poly(&lin);
        comps.push(next);
    }
    SpecialFunction::new(&TModule::carlitz_tensor(ctx, n), comps)
}

/// `omega_1, ..., omega_{k+1}` for the `k`-th prolongation, where `omega_j` has
/// entries `d^(j-1) omega, ..., d^(1) omega, omega, 0, ..., 0`.
pub fn prolongation_basis(ctx: &Arc<Cinf>, k: usize, shape: Shape) -> Result<Vec<SpecialFunction>, SpecialError> {
    let omega = anderson_thakur_omega(ctx, shape)?.comps[0].clone();
    let module = TModule::prolongation(ctx, k);
    let derivs: Vec<MeroJRep> = (0..=k).map(|j| omega.hyperderivative(j)).collect();
    (1..=k + 1)
        .map(|j| {
            let comps = (0..=k)
                .map(|l| {
                    if l < j {
                        derivs[j - 1 - l].clone()
                    } else {
                        MeroJRep::zero(ctx, shape.horizon, shape.cap)
                    }
                })
                .collect();
            SpecialFunction::new(&module, comps)
        })
        .collect()
}

/// Basis of special functions for the standard families, block-wise for direct sums.
pub fn standard_basis(ctx: &Arc<Cinf>, desc: &ModuleDescriptor, shape: Shape) -> Result<Vec<SpecialFunction>, SpecialError> {
    match desc {
        ModuleDescriptor::Carlitz => Ok(vec![anderson_thakur_omega(ctx, shape)?]),
        ModuleDescriptor::CarlitzTensor { n } => Ok(vec![tensor_generator(ctx, *n, shape)?]),
        ModuleDescriptor::Prolongation { k } => prolongation_basis(ctx, *k, shape),
        ModuleDescriptor::DirectSum { parts } => {
            let module = desc.build(ctx)?;
            let blocks: Vec<Vec<SpecialFunction>> =
                parts.iter().map(|p| standard_basis(ctx, p, shape)).collect::<Result<_, _>>()?;
            let dims: Vec<usize> = parts.iter().map(|p| p.build(ctx).map(|m| m.dim())).collect::<Result<_, _>>()?;
            let mut out = Vec::new();
            let mut offset = 0;
            for (block, dim) in blocks.iter().zip(&dims) {
                for w in block {
                    let mut comps: Vec<MeroJRep> =
                        (0..module.dim()).map(|_| MeroJRep::zero(ctx, shape.horizon, shape.cap)).collect();
                    for (l, c) in w.comps.iter().enumerate() {
                        comps[offset + l] = c.clone();
                    }
                    out.push(SpecialFunction::new(&module, comps)?);
                }
                offset += dim;
            }
            Ok(out)
        }
        ModuleDescriptor::UserDefined { .. } => Err(SpecialError::NoBasis(desc.to_string())),
    }
}

/// Ranks of the pole-order filtration on the `F_q`-span of `basis`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Filtration {
    /// `ranks[n]`: dimension over `F_q` of the combinations with pole orders `<= n`.
    pub ranks: Vec<usize>,
    pub jumps: Vec<usize>,
}

/// Rank over `F_p` of dense rows, by elimination.
fn rank_mod_p(mut rows: Vec<Vec<u32>>, p: u32) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    let inv = |a: u32| -> u32 {
        let mut r = 1u64;
        let (mut b, mut e) = (a as u64, p as u64 - 2);
        while e > 0 {
            if e & 1 == 1 {
                r = r * b % p as u64;
            }
            b = b * b % p as u64;
            e >>= 1;
        }
        r as u32
    };
    for col in 0..cols {
        let Some(piv) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else { continue };
        rows.swap(rank, piv);
        let f = inv(rows[rank][col]);
        for x in rows[rank].iter_mut() {
            *x = (*x as u64 * f as u64 % p as u64) as u32;
        }
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r == rank || row[col] == 0 {
                continue;
            }
            let m = row[col] as u64;
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                *x = ((*x as u64 + (p as u64 - m) * *y as u64) % p as u64) as u32;
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// `r_n` for `n = 0..=d`: the polar coefficients of order `> n` of an
/// `F_q`-combination are expanded into `F_p` digits (each slot up to the
/// least precision among the basis elements), and the kernel dimension of the
/// resulting `F_p`-linear map is divided by `[F_q : F_p]`.
pub fn filtration_ranks(module: &TModule, basis: &[SpecialFunction]) -> Result<Filtration, SpecialError> {
    let ctx = module.ctx();
    for (index, w) in basis.iter().enumerate() {
        let rep = sf_check(module, &w.comps)?;
        if !rep.pass {
            return Err(SpecialError::NotSpecial { index, residual: rep.residual });
        }
    }
    let gf = ctx.gf();
    let p = gf.characteristic();
    let e = ctx.params().e as usize;
    let beta = ctx.fq_basis();
    let d = module.dim();
    let top = basis.iter().map(SpecialFunction::max_pole_order).max().unwrap_or(0).max(d);
    let mut ranks = Vec::with_capacity(top + 1);
    for n in 0..=top {
        // slot = (component, pole, order); columns = (slot, exponent, coordinate)
        let mut slots: Vec<(usize, usize, usize)> = Vec::new();
        for w in basis {
            for (comp, c) in w.comps.iter().enumerate() {
                for (i, part) in c.parts().iter().enumerate() {
                    for k in n + 1..=part.len() {
                        if !slots.contains(&(comp, i, k)) {
                            slots.push((comp, i, k));
                        }
                    }
                }
            }
        }
        let mut columns: HashMap<(usize, i64, usize), usize> = HashMap::new();
        let mut rows: Vec<Vec<(usize, u32)>> = Vec::new();
        for w in basis {
            for &b in &beta {
                let mut row = Vec::new();
                for (s, &(comp, i, k)) in slots.iter().enumerate() {
                    let cutoff = basis
                        .iter()
                        .map(|v| v.comps[comp].coeff(i, k).prec())
                        .fold(None, prec_min);
                    let x = w.comps[comp].coeff(i, k);
                    for &(exp, digit) in x.terms() {
                        if cutoff.is_some_and(|c| exp >= c) {
                            continue;
                        }
                        for (coord, v) in gf.coords(gf.mul(b, digit)).into_iter().enumerate() {
                            if v == 0 {
                                continue;
                            }
                            let next = columns.len();
                            let col = *columns.entry((s, exp, coord)).or_insert(next);
                            row.push((col, v));
                        }
                    }
                }
                rows.push(row);
            }
        }
        let dense: Vec<Vec<u32>> = rows
            .into_iter()
            .map(|row| {
                let mut v = vec![0u32; columns.len()];
                for (c, x) in row {
                    v[c] = x;
                }
                v
            })
            .collect();
        let rank = if columns.is_empty() { 0 } else { rank_mod_p(dense, p) };
        ranks.push((basis.len() * e - rank) / e);
    }
    let jumps = (1..ranks.len()).filter(|&n| ranks[n] > ranks[n - 1]).collect();
    Ok(Filtration { ranks, jumps })
}

/// Outcome of [`coordinate_change_check`].
#[derive(Clone, Debug)]
pub struct CoordReport {
    /// `res(M w) - M_0 res(w)`.
    pub residue_residual: Prec,
    /// Special-function equation for `M w` under `M phi M^-1`.
    pub sf_residual: Prec,
    pub pass: bool,
    pub new_residue: Vec<CinfJson>,
}

/// Transports `w` along the coordinate change `M` and compares residues.
pub fn coordinate_change_check(
    module: &TModule,
    m: &TauMatrixPoly,
    w: &SpecialFunction,
) -> Result<CoordReport, SpecialError> {
    let ctx = module.ctx();
    let m_inv = m.inverse().ok_or(SpecialError::NotInvertible)?;
    let phi = m.compose(module.phi_t()).compose(&m_inv);
    let moved = module.with_phi(format!("{}@M", module.name()), phi)?;
    let mw = m.apply_mero(&w.comps)?;
    let mw = SpecialFunction::new(&moved, mw)?;
    let lhs = residue_at_j(&mw);
    let rhs = m.mats()[0].mul_vec(&residue_at_j(w));
    let residue_residual = vec_residual(&vec_sub(&lhs, &rhs));
    let sf_residual = sf_check_fn(&mw)?.residual;
    Ok(CoordReport {
        residue_residual,
        sf_residual,
        pass: passes(ctx, residue_residual) && passes(ctx, sf_residual),
        new_residue: vec_json(&lhs),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cinf::FieldParams;
    use crate::exp::{carlitz_period, period_terms};

    fn ctx(q: u32) -> Arc<Cinf> {
        Cinf::new(FieldParams::for_q(q).unwrap()).unwrap()
    }

    const SHAPE: Shape = Shape { horizon: 8, cap: 48, terms: 8 };

    #[test]
    fn omega_basics() {
        for q in [2, 3] {
            let c = ctx(q);
            let w = anderson_thakur_omega(&c, SHAPE).unwrap();
            let om = &w.comps()[0];
            // Value at t = 0 is lambda_theta.
            let disk = om.expand_on_disk(SHAPE.cap);
            assert!(passes(&c, disk.coeff(0).distance(&lambda_theta(&c).unwrap())));
            // tau(omega) = (t - theta) omega
            let lhs = om.twist().unwrap();
            let rhs = om.mul_poly(&TateSeries::t_minus(&CinfNum::theta(&c), SHAPE.cap));
            assert!(passes(&c, lhs.distance(&rhs)), "{:?}", lhs.distance(&rhs));
            assert!(sf_check_fn(&w).unwrap().pass);
            let pi = carlitz_period(&c, period_terms(&c)).unwrap();
            assert!(passes(&c, residue_at_j(&w)[0].distance(&pi)));
            let opts = HolomorphyOpts::up_to_horizon(&c, 6);
            assert!(w.holomorphy_check(1, &opts));
            assert!(!w.holomorphy_check(0, &opts));
        }
    }

    #[test]
    fn omega_plus_constant_fails() {
        let c = ctx(3);
        let w = anderson_thakur_omega(&c, SHAPE).unwrap();
        let one = MeroJRep::from_tail(TateSeries::constant(CinfNum::one(&c), SHAPE.cap), SHAPE.horizon);
        let bad = SpecialFunction::new(w.module(), vec![w.comps()[0].add(&one)]).unwrap();
        assert!(!sf_check_fn(&bad).unwrap().pass);
    }

    #[test]
    fn lattice_to_omega() {
        for q in [2, 3] {
            let c = ctx(q);
            let e = TModule::carlitz(&c);
            let coeffs = ExpCoeffs::compute(&e, SHAPE.horizon + 2).unwrap();
            let pi = carlitz_period(&c, period_terms(&c)).unwrap();
            let omega = anderson_thakur_omega(&c, SHAPE).unwrap();
            let mut us = vec![SeparatingU::t()];
            us.push(SeparatingU::new(&c, FqPoly::parse(&c, "0,1,1").unwrap()).unwrap());
            for u in &us {
                let (w, cancel) = sf_from_lattice(&e, std::slice::from_ref(&pi), u, &coeffs, SHAPE).unwrap();
                assert!(passes(&c, cancel));
                assert!(passes(&c, w.comps()[0].distance(&omega.comps()[0])), "q={q} u={}", u.u());
            }
            let (zero, _) = sf_from_lattice(&e, &[CinfNum::zero(&c)], &SeparatingU::t(), &coeffs, SHAPE).unwrap();
            assert_eq!(zero.residual(), None);
        }
    }

    #[test]
    fn non_separating_rejected() {
        let c = ctx(2);
        assert!(SeparatingU::new(&c, FqPoly::parse(&c, "0,0,1").unwrap()).is_err());
    }

    #[test]
    fn tensor_and_prolongation_are_special() {
        let c = ctx(3);
        for n in [2, 3] {
            let w = tensor_generator(&c, n, SHAPE).unwrap();
            let rep = sf_check_fn(&w).unwrap();
            assert!(rep.pass, "tensor {n}: {:?}", rep.components);
            assert_eq!(w.max_pole_order(), n);
        }
        for k in [1, 2] {
            for (j, w) in prolongation_basis(&c, k, SHAPE).unwrap().iter().enumerate() {
                let rep = sf_check_fn(w).unwrap();
                assert!(rep.pass, "prolongation {k} basis {j}: {:?}", rep.components);
                assert_eq!(w.max_pole_order(), j + 1);
            }
        }
    }

    #[test]
    fn filtration_examples() {
        let c = ctx(2);
        let carlitz = standard_basis(&c, &ModuleDescriptor::Carlitz, SHAPE).unwrap();
        let f = filtration_ranks(&TModule::carlitz(&c), &carlitz).unwrap();
        assert_eq!(f.ranks[..2], [0, 1]);
        assert_eq!(f.jumps, vec![1]);
        let desc = ModuleDescriptor::parse("prolongation:2").unwrap();
        let f = filtration_ranks(&desc.build(&c).unwrap(), &standard_basis(&c, &desc, SHAPE).unwrap()).unwrap();
        assert_eq!(f.jumps, vec![1, 2, 3]);
        let desc = ModuleDescriptor::parse("carlitz_tensor:2+carlitz_tensor:2").unwrap();
        let f = filtration_ranks(&desc.build(&c).unwrap(), &standard_basis(&c, &desc, SHAPE).unwrap()).unwrap();
        assert_eq!(f.jumps, vec![2]);
        assert_eq!(f.ranks, vec![0, 0, 2, 2, 2]);
    }

    #[test]
    fn tau_shift_coordinate_change() {
        let c = ctx(3);
        let desc = ModuleDescriptor::parse("carlitz+carlitz").unwrap();
        let e = desc.build(&c).unwrap();
        let basis = standard_basis(&c, &desc, SHAPE).unwrap();
        let mut m1 = Mat::zero(&c, 2);
        m1.set(0, 1, CinfNum::one(&c));
        let m = TauMatrixPoly::new(vec![Mat::identity(&c, 2), m1]).unwrap();
        for w in &basis {
            let rep = coordinate_change_check(&e, &m, w).unwrap();
            assert!(rep.pass, "{rep:?}");
        }
    }
}
