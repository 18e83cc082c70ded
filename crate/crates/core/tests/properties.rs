use std::sync::Arc;

use num_rational::Rational64;
use proptest::prelude::*;
use tmod_core::exp::ExpCoeffs;
use tmod_core::mero::MeroJRep;
use tmod_core::tate::TateSeries;
use tmod_core::tmodule::TModule;
use tmod_core::{Cinf, CinfNum, Fe, FieldParams};

fn ctx(q: u32) -> Arc<Cinf> {
    let mut p = FieldParams::for_q(q).unwrap();
    p.prec = 60;
    Cinf::new(p).unwrap()
}

fn within(c: &Cinf, r: Option<i64>, margin: i64) -> bool {
    r.is_none_or(|v| v >= c.prec() - margin)
}

const NONZERO: u32 = 1 << 16;

/// Digits as `(exponent, index into F_{q^m})`, with an optional precision.
/// Indices tagged with `NONZERO` are mapped into the nonzero elements.
fn num(c: &Arc<Cinf>, digits: &[(i64, u32)], prec: Option<i64>) -> CinfNum {
    let size = c.gf().size();
    let digit = |a: u32| if a & NONZERO != 0 { Fe(1 + (a ^ NONZERO) % (size - 1)) } else { Fe(a % size) };
    let terms = digits.iter().map(|&(k, a)| (k, digit(a))).collect();
    CinfNum::from_terms(c, terms, prec)
}

fn digits() -> impl Strategy<Value = Vec<(i64, u32)>> {
    prop::collection::vec((-6i64..12, 0u32..64), 0..6)
}

fn nonzero_digits() -> impl Strategy<Value = Vec<(i64, u32)>> {
    (-6i64..6, 1u32..64, digits()).prop_map(|(k, a, mut rest)| {
        rest.retain(|&(e, _)| e > k);
        rest.push((k, a | NONZERO));
        rest
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_axioms(q in prop::sample::select(vec![2u32, 3, 4]), a in 0u32..64, b in 0u32..64, c in 0u32..64) {
        let k = ctx(q);
        let gf = k.gf();
        let n = gf.size();
        let (a, b, c) = (Fe(a % n), Fe(b % n), Fe(c % n));
        prop_assert_eq!(gf.mul(a, gf.add(b, c)), gf.add(gf.mul(a, b), gf.mul(a, c)));
        prop_assert_eq!(gf.mul(gf.mul(a, b), c), gf.mul(a, gf.mul(b, c)));
        prop_assert_eq!(gf.add(a, gf.neg(a)), Fe::ZERO);
        if !a.is_zero() {
            prop_assert_eq!(gf.mul(a, gf.inv(a).unwrap()), Fe::ONE);
        }
        prop_assert_eq!(gf.pow(a, n as u128), a);
    }

    #[test]
    fn cinf_ring_laws(q in prop::sample::select(vec![2u32, 3]), x in digits(), y in digits(), z in nonzero_digits()) {
        let c = ctx(q);
        let (x, y, z) = (num(&c, &x, Some(40)), num(&c, &y, None), num(&c, &z, None));
        prop_assert_eq!(&(&x * &y) * &z, &x * &(&y * &z));
        prop_assert_eq!(&x * &(&y + &z), &(&x * &y) + &(&x * &z));
        let one = &z * &z.inv().unwrap();
        prop_assert!(within(&c, one.distance(&CinfNum::one(&c)), 0));
    }

    #[test]
    fn frobenius_is_a_ring_map(q in prop::sample::select(vec![2u32, 3]), x in digits(), y in digits()) {
        let c = ctx(q);
        let (x, y) = (num(&c, &x, Some(30)), num(&c, &y, None));
        prop_assert_eq!((&x * &y).qpow(1), &x.qpow(1) * &y.qpow(1));
        prop_assert_eq!((&x + &y).qpow(1), &x.qpow(1) + &y.qpow(1));
        if let Some(v) = x.val() {
            prop_assert_eq!(x.qpow(2).val(), Some(v * (q * q) as i64));
        }
    }

    #[test]
    fn ultrametric(q in prop::sample::select(vec![2u32, 3]), x in nonzero_digits(), y in nonzero_digits()) {
        let c = ctx(q);
        let (x, y) = (num(&c, &x, None), num(&c, &y, None));
        let (vx, vy) = (x.val().unwrap(), y.val().unwrap());
        let s = &x + &y;
        if let Some(vs) = s.val() {
            prop_assert!(vs >= vx.min(vy));
        }
        if vx != vy {
            prop_assert_eq!(s.val(), Some(vx.min(vy)));
        }
    }

    #[test]
    fn kth_root_round_trip(q in prop::sample::select(vec![2u32, 3, 5]), x in nonzero_digits(), k in 1u32..5) {
        let c = ctx(q);
        let k = if k % c.gf().characteristic() == 0 { 1 } else { k };
        let x = num(&c, &x, None);
        let w = x.pow(k as u64);
        let root = w.kth_root(k).unwrap();
        let rel = root.pow(k as u64).distance(&w).map(|d| d - w.val().unwrap());
        prop_assert!(within(&c, rel, 0), "{rel:?}");
    }

    #[test]
    fn gauss_norm_is_multiplicative(q in prop::sample::select(vec![2u32, 3]),
                                    f in prop::collection::vec(nonzero_digits(), 1..4),
                                    g in prop::collection::vec(nonzero_digits(), 1..4),
                                    rho in 0i64..4) {
        let c = ctx(q);
        let f = TateSeries::new(&c, f.iter().map(|d| num(&c, d, None)).collect(), 16);
        let g = TateSeries::new(&c, g.iter().map(|d| num(&c, d, None)).collect(), 16);
        let rho = Rational64::from_integer(rho);
        let lhs = f.mul(&g).gauss_norm(rho).unwrap();
        prop_assert_eq!(lhs, f.gauss_norm(rho).unwrap() + g.gauss_norm(rho).unwrap());
    }

    #[test]
    fn twist_commutes_with_hyperderivative(q in prop::sample::select(vec![2u32, 3]),
                                           f in prop::collection::vec(digits(), 1..8), j in 0usize..4) {
        let c = ctx(q);
        let f = TateSeries::new(&c, f.iter().map(|d| num(&c, d, Some(30))).collect(), 16);
        let d = f.twist().hyperderivative(j).sub(&f.hyperderivative(j).twist());
        prop_assert!(d.coeffs().iter().all(|x| x.is_zero()));
    }

    #[test]
    fn disk_expansion_is_linear_and_twist_compatible(q in prop::sample::select(vec![2u32, 3]),
                                                     a in nonzero_digits(), b in nonzero_digits(), k in 1usize..3) {
        let c = ctx(q);
        let f = MeroJRep::simple(&c, 3, 24, 0, k, num(&c, &a, None));
        let g = MeroJRep::simple(&c, 3, 24, 1, 1, num(&c, &b, None));
        let sum = f.add(&g).expand_on_disk(12);
        let sep = f.expand_on_disk(12).add(&g.expand_on_disk(12));
        prop_assert!(sum.sub(&sep).coeffs().iter().all(|x| x.is_zero()));
        let tw = f.twist().unwrap().expand_on_disk(12);
        let ex = f.expand_on_disk(12).twist();
        prop_assert!(tw.sub(&ex).coeffs().iter().all(|x| x.is_zero()));
    }

    #[test]
    fn exp_is_fq_linear(q in prop::sample::select(vec![2u32, 3]), x in nonzero_digits(), y in nonzero_digits(), a in 0u32..3) {
        let c = ctx(q);
        let e = ExpCoeffs::compute(&TModule::carlitz(&c), 10).unwrap();
        let (x, y) = (num(&c, &x, None), num(&c, &y, None));
        let a = c.fq_elements()[a as usize % c.q() as usize];
        let lhs = e.eval(&[&x.scale(a) + &y], c.prec()).unwrap();
        let ex = e.eval(&[x], c.prec()).unwrap();
        let ey = e.eval(&[y], c.prec()).unwrap();
        let rhs = &ex.value[0].scale(a) + &ey.value[0];
        let precs = [&lhs, &ex, &ey].map(|v| v.value[0].prec());
        let bound = [lhs.tail, ex.tail, ey.tail].into_iter().chain(precs).flatten().min().unwrap_or(c.prec());
        let diff = lhs.value[0].distance(&rhs);
        prop_assert!(diff.is_none_or(|d| d >= bound.min(c.prec() / 2)), "{diff:?} vs {bound}");
    }
}
