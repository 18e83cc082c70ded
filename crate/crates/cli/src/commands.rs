use std::error::Error;

use serde_json::{json, Value};
use tmod_core::cinf::lambda_theta;
use tmod_core::exp::{carlitz_period, period_terms, ExpCoeffs};
use tmod_core::matrix::{vec_residual, vec_sub};
use tmod_core::special::{
    anderson_thakur_omega, filtration_ranks, residue_at_j, sf_check_fn, sf_from_lattice, standard_basis,
    SpecialFunction,
};
use tmod_core::suite;
use tmod_core::tmodule::TModule;
use tmod_core::{CinfNum, Prec};

use crate::config::{LambdaSpec, RunConfig};
use crate::report::{num, nums, Report};

type Res = Result<(), Box<dyn Error>>;

fn short(xs: &[CinfNum]) -> String {
    let v: Vec<String> = xs.iter().map(CinfNum::render).collect();
    format!("({})", v.join(", "))
}

fn verdict(rep: &mut Report, cfg: &RunConfig, name: impl Into<String>, residual: Prec) {
    let pass = cfg.passes(residual);
    rep.check(name, residual, cfg.threshold, pass);
}

fn module(cfg: &RunConfig) -> Result<TModule, Box<dyn Error>> {
    Ok(cfg.module.build(&cfg.ctx)?)
}

fn member(cfg: &RunConfig, m: &TModule, x: &[CinfNum]) -> Result<Prec, Box<dyn Error>> {
    let h = cfg.shape().horizon;
    let (_, res) = ExpCoeffs::compute(m, h + 2)?.lattice_member_extending(x, 4 * h)?;
    Ok(res)
}

pub fn omega(cfg: &RunConfig, rep: &mut Report) -> Res {
    let ctx = &cfg.ctx;
    let shape = cfg.shape();
    let w = rep.timed("omega", || anderson_thakur_omega(ctx, shape))?;
    let lam = lambda_theta(ctx)?;
    let disk = rep.timed("expand", || w.comps()[0].expand_on_disk(shape.cap));
    let shown: Vec<CinfNum> = (0..cfg.terms.min(shape.cap)).map(|n| disk.coeff(n)).collect();
    let res = residue_at_j(&w);
    let pi = carlitz_period(ctx, period_terms(ctx).max(cfg.terms))?;

    rep.row("lambda_theta", lam.render());
    for (n, c) in shown.iter().enumerate() {
        rep.row(format!("t^{n}"), c.render());
    }
    rep.row("residue at theta", res[0].render());
    rep.row("pole orders", format!("{:?}", w.pole_orders()[0]));
    rep.output("lambda_theta", num(&lam));
    rep.output("disk_coefficients", nums(&shown));
    rep.output("residue", nums(&res));
    rep.output("pole_orders", json!(w.pole_orders()));
    rep.output("function", w.to_json());

    verdict(rep, cfg, "omega(0) = lambda_theta", shown[0].distance(&lam));
    let sf = rep.timed("sf_check", || sf_check_fn(&w))?;
    verdict(rep, cfg, "omega^(1) = (t - theta) omega", sf.residual);
    verdict(rep, cfg, "residue at theta = period", res[0].distance(&pi));
    Ok(())
}

pub fn period(cfg: &RunConfig, rep: &mut Report) -> Res {
    let ctx = &cfg.ctx;
    let terms = period_terms(ctx).max(cfg.terms);
    let pi = rep.timed("period", || carlitz_period(ctx, terms))?;
    let val = pi.valuation().map_or("inf".to_string(), |v| v.to_string());
    rep.row("period", pi.render());
    rep.row("valuation", val.clone());
    rep.row("product factors", terms.to_string());
    rep.output("period", num(&pi));
    rep.output("valuation", json!(val));
    rep.output("product_factors", json!(terms));

    let carlitz = TModule::carlitz(ctx);
    let res = rep.timed("exp", || member(cfg, &carlitz, std::slice::from_ref(&pi)))?;
    verdict(rep, cfg, "exp(period) = 0", res);
    let w = rep.timed("omega", || anderson_thakur_omega(ctx, cfg.shape()))?;
    verdict(rep, cfg, "residue of omega = period", residue_at_j(&w)[0].distance(&pi));
    Ok(())
}

pub fn exp_coeffs(cfg: &RunConfig, rep: &mut Report) -> Res {
    let m = module(cfg)?;
    let e = rep.timed("exp", || ExpCoeffs::compute(&m, cfg.horizon))?;
    let mut out = Vec::new();
    for (n, c) in e.coeffs().iter().enumerate() {
        let rows: Vec<String> = c.render().into_iter().map(|r| r.join(", ")).collect();
        rep.row(format!("e_{n}"), rows.join("; "));
        out.push(json!({ "n": n, "text": c.render(), "value": c.to_json() }));
        verdict(rep, cfg, format!("functional equation, degree {n}"), e.functional_residual(n));
    }
    rep.output("module", json!(m.name()));
    rep.output("coefficients", Value::Array(out));
    Ok(())
}

fn lattice_vector(cfg: &RunConfig, basis: impl FnOnce() -> Result<Vec<SpecialFunction>, Box<dyn Error>>)
    -> Result<(String, Vec<CinfNum>), Box<dyn Error>> {
    match cfg.lambda.clone().unwrap_or(LambdaSpec::Basis(0)) {
        LambdaSpec::Explicit(v) => Ok(("explicit".into(), v)),
        LambdaSpec::Basis(n) => {
            let basis = basis()?;
            let w = basis
                .get(n)
                .ok_or_else(|| format!("lambda: basis:{n} out of range, the basis has {} elements", basis.len()))?;
            Ok((format!("basis:{n}"), residue_at_j(w)))
        }
    }
}

pub fn sf(cfg: &RunConfig, rep: &mut Report) -> Res {
    let ctx = &cfg.ctx;
    let shape = cfg.shape();
    let m = module(cfg)?;
    let (label, lam) = lattice_vector(cfg, || Ok(standard_basis(ctx, &cfg.module, shape)?))?;
    rep.row("lambda", format!("{label} = {}", short(&lam)));
    rep.row("u", cfg.u.u().render(ctx));
    rep.output("lambda", nums(&lam));

    let r = rep.timed("exp", || member(cfg, &m, &lam))?;
    verdict(rep, cfg, "exp(lambda) = 0", r);
    let coeffs = rep.timed("exp", || ExpCoeffs::compute(&m, shape.horizon + 2))?;
    let (w, cancel) = rep.timed("sf_from_lattice", || sf_from_lattice(&m, &lam, &cfg.u, &coeffs, shape))?;
    let res = residue_at_j(&w);
    rep.row("pole orders", format!("{:?}", w.pole_orders()));
    rep.row("residue", short(&res));
    rep.output("residue", nums(&res));
    rep.output("pole_orders", json!(w.pole_orders()));
    rep.output("function", w.to_json());

    verdict(rep, cfg, "poles off the line cancel", cancel);
    let sf = rep.timed("sf_check", || sf_check_fn(&w))?;
    verdict(rep, cfg, "special-function equation", sf.residual);
    verdict(rep, cfg, "residue = lambda", vec_residual(&vec_sub(&res, &lam)));
    Ok(())
}

pub fn residue(cfg: &RunConfig, rep: &mut Report) -> Res {
    let ctx = &cfg.ctx;
    let shape = cfg.shape();
    let m = module(cfg)?;
    let basis = match &cfg.lambda {
        Some(LambdaSpec::Explicit(lam)) => {
            let coeffs = ExpCoeffs::compute(&m, shape.horizon + 2)?;
            vec![rep.timed("sf_from_lattice", || sf_from_lattice(&m, lam, &cfg.u, &coeffs, shape))?.0]
        }
        _ => rep.timed("basis", || standard_basis(ctx, &cfg.module, shape))?,
    };
    let mut out = Vec::new();
    for (j, w) in basis.iter().enumerate() {
        let res = residue_at_j(w);
        rep.row(format!("res(w_{j})"), short(&res));
        out.push(nums(&res));
        let sf = rep.timed("sf_check", || sf_check_fn(w))?;
        verdict(rep, cfg, format!("w_{j} satisfies the special-function equation"), sf.residual);
        let r = rep.timed("exp", || member(cfg, &m, &res))?;
        verdict(rep, cfg, format!("exp(res(w_{j})) = 0"), r);
    }
    rep.output("module", json!(m.name()));
    rep.output("residues", Value::Array(out));
    Ok(())
}

pub fn filtration(cfg: &RunConfig, rep: &mut Report) -> Res {
    let ctx = &cfg.ctx;
    let m = module(cfg)?;
    let basis = rep.timed("basis", || standard_basis(ctx, &cfg.module, cfg.shape()))?;
    for (j, w) in basis.iter().enumerate() {
        let sf = rep.timed("sf_check", || sf_check_fn(w))?;
        verdict(rep, cfg, format!("w_{j} satisfies the special-function equation"), sf.residual);
        rep.row(format!("pole orders of w_{j}"), format!("{:?}", w.pole_orders()));
    }
    let f = rep.timed("filtration", || filtration_ranks(&m, &basis))?;
    rep.row("ranks", format!("{:?}", f.ranks));
    rep.row("jumps", format!("{:?}", f.jumps));
    rep.output("module", json!(m.name()));
    rep.output("ranks", json!(f.ranks));
    rep.output("jumps", json!(f.jumps));
    Ok(())
}

pub fn verify(cfg: &RunConfig, rep: &mut Report) -> Res {
    let criteria = rep.timed("suite", || suite::run(&cfg.suite()));
    for c in &criteria {
        let failing: Vec<&str> = c.cases.iter().filter(|k| !k.pass).map(|k| k.name.as_str()).collect();
        let check = rep.check(format!("criterion {}: {}", c.id, c.title), c.min_residual, c.threshold, c.pass);
        check.note = Some(if failing.is_empty() {
            format!("{} cases, {:.2}s", c.cases.len(), c.seconds)
        } else {
            format!("failing: {}", failing.join(", "))
        });
    }
    rep.output("criteria", serde_json::to_value(&criteria)?);
    Ok(())
}
