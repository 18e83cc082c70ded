use std::path::Path;
use std::sync::Arc;

use clap::Args;
use serde::Deserialize;
use serde_json::{json, Value};
use thiserror::Error;
use tmod_core::cinf::{prime_power, CinfJson};
use tmod_core::fqpoly::FqPoly;
use tmod_core::special::{SeparatingU, Shape};
use tmod_core::suite::SuiteConfig;
use tmod_core::tmodule::ModuleDescriptor;
use tmod_core::{Cinf, CinfNum, FieldParams};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{field}: {msg}")]
    Field { field: &'static str, msg: String },
    #[error("config file {path}: {msg}")]
    File { path: String, msg: String },
}

fn bad(field: &'static str, msg: impl Into<String>) -> ConfigError {
    ConfigError::Field { field, msg: msg.into() }
}

/// Flags shared by every subcommand. Anything left unset falls back to the
/// `--config` file, then to the defaults.
#[derive(Args, Debug, Default, Clone)]
pub struct Flags {
    /// Size of the constant field F_q.
    #[arg(long, global = true)]
    pub q: Option<u32>,
    /// Exponent e in q = p^e; must agree with --q.
    #[arg(long = "p-exp", global = true)]
    pub p_exp: Option<u32>,
    /// Residue-field degree: digits live in F_{q^m}.
    #[arg(long, global = true)]
    pub m: Option<u32>,
    /// Ramification index r (valuations in 1/r units); a multiple of q - 1.
    #[arg(long, global = true)]
    pub ram: Option<u32>,
    /// Working precision P in 1/r units.
    #[arg(long, global = true)]
    pub prec: Option<i64>,
    /// Degree cap of disk expansions.
    #[arg(long, global = true)]
    pub tdeg: Option<usize>,
    /// Pole horizon I.
    #[arg(long, global = true)]
    pub horizon: Option<usize>,
    /// Extra poles kept beyond the horizon.
    #[arg(long, global = true)]
    pub guard: Option<usize>,
    /// Length of truncated products and series.
    #[arg(long, global = true)]
    pub terms: Option<usize>,
    /// Module descriptor, e.g. `carlitz_tensor:3`, `carlitz+prolongation:1` or JSON.
    #[arg(long, global = true)]
    pub module: Option<String>,
    /// Lattice vector: `basis:N` (residue of the N-th standard special function) or a JSON array.
    #[arg(long, global = true)]
    pub lambda: Option<String>,
    /// Separating element as F_q-indices of its coefficients, lowest first (`0,1` is t).
    #[arg(long, global = true)]
    pub u: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write the JSON report here.
    #[arg(long, global = true)]
    pub json: Option<std::path::PathBuf>,
    /// JSON file with any of the settings above (flags take precedence).
    #[arg(long, global = true)]
    pub config: Option<std::path::PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    q: Option<u32>,
    #[serde(alias = "p-exp")]
    p_exp: Option<u32>,
    m: Option<u32>,
    ram: Option<u32>,
    prec: Option<i64>,
    tdeg: Option<usize>,
    horizon: Option<usize>,
    guard: Option<usize>,
    terms: Option<usize>,
    module: Option<Value>,
    lambda: Option<Value>,
    u: Option<String>,
    seed: Option<u64>,
    threshold: Option<i64>,
}

#[derive(Clone, Debug)]
pub enum LambdaSpec {
    Basis(usize),
    Explicit(Vec<CinfNum>),
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub ctx: Arc<Cinf>,
    /// Fields for `verify`: the given `q`, or every default one.
    pub qs: Vec<u32>,
    pub tdeg: usize,
    pub horizon: usize,
    pub guard: usize,
    pub terms: usize,
    pub module: ModuleDescriptor,
    pub lambda: Option<LambdaSpec>,
    pub u: SeparatingU,
    pub seed: u64,
    /// Pass margin in `1/r` units.
    pub threshold: i64,
}

fn positive<T: PartialOrd + Default + Copy>(field: &'static str, v: T) -> Result<T, ConfigError> {
    if v > T::default() {
        Ok(v)
    } else {
        Err(bad(field, "must be positive"))
    }
}

impl RunConfig {
    pub fn load(flags: &Flags) -> Result<Self, ConfigError> {
        let file = match &flags.config {
            Some(path) => read_file(path)?,
            None => FileConfig::default(),
        };
        let defaults = SuiteConfig::default();
        let q_given = flags.q.or(file.q);
        let q = q_given.unwrap_or(defaults.qs[0]);
        let (_, e) = prime_power(q).ok_or_else(|| bad("q", format!("{q} is not a prime power")))?;
        if let Some(pe) = flags.p_exp.or(file.p_exp) {
            if pe != e {
                return Err(bad("p-exp", format!("q = {q} has exponent {e}, not {pe}")));
            }
        }
        let mut params = FieldParams::for_q(q).map_err(|err| bad("q", err.to_string()))?;
        if let Some(m) = flags.m.or(file.m) {
            params.m = positive("m", m)?;
        }
        if let Some(r) = flags.ram.or(file.ram) {
            params.r = positive("ram", r)?;
        }
        if params.r % (q - 1) != 0 {
            return Err(bad("ram", format!("{} is not a multiple of q - 1 = {}", params.r, q - 1)));
        }
        params.prec = positive("prec", flags.prec.or(file.prec).unwrap_or(defaults.prec))?;
        let ctx = Cinf::new(params).map_err(|err| bad("q", err.to_string()))?;

        let tdeg = positive("tdeg", flags.tdeg.or(file.tdeg).unwrap_or(defaults.tdeg))?;
        let horizon = positive("horizon", flags.horizon.or(file.horizon).unwrap_or(defaults.horizon))?;
        let guard = flags.guard.or(file.guard).unwrap_or(defaults.guard);
        let terms = positive("terms", flags.terms.or(file.terms).unwrap_or(defaults.terms))?;
        let threshold = file.threshold.unwrap_or(params.prec / 2);
        if threshold < 1 || threshold >= params.prec {
            return Err(bad("threshold", format!("{threshold} must lie in [1, prec = {})", params.prec)));
        }

        let module = match (&flags.module, &file.module) {
            (Some(s), _) => ModuleDescriptor::parse(s).map_err(|err| err.to_string()),
            (None, Some(Value::String(s))) => ModuleDescriptor::parse(s).map_err(|err| err.to_string()),
            (None, Some(v)) => serde_json::from_value(v.clone()).map_err(|err| err.to_string()),
            (None, None) => Ok(ModuleDescriptor::Carlitz),
        }
        .map_err(|msg| bad("module", msg))?;
        let dim = module.build(&ctx).map_err(|err| bad("module", err.to_string()))?.dim();

        let lambda = match (&flags.lambda, &file.lambda) {
            (Some(s), _) => Some(parse_lambda(&ctx, &lambda_value(s)?, dim)?),
            (None, Some(v)) => Some(parse_lambda(&ctx, v, dim)?),
            (None, None) => None,
        };
        let u = match flags.u.as_ref().or(file.u.as_ref()) {
            Some(s) => {
                let poly = FqPoly::parse(&ctx, s).map_err(|msg| bad("u", msg))?;
                SeparatingU::new(&ctx, poly).map_err(|err| bad("u", err.to_string()))?
            }
            None => SeparatingU::t(),
        };
        Ok(RunConfig {
            ctx,
            qs: q_given.map_or(defaults.qs.clone(), |q| vec![q]),
            tdeg,
            horizon,
            guard,
            terms,
            module,
            lambda,
            u,
            seed: flags.seed.or(file.seed).unwrap_or(defaults.seed),
            threshold,
        })
    }

    pub fn suite(&self) -> SuiteConfig {
        let p = self.ctx.params();
        let own = self.qs.len() == 1;
        SuiteConfig {
            qs: self.qs.clone(),
            prec: p.prec,
            tdeg: self.tdeg,
            horizon: self.horizon,
            guard: self.guard,
            terms: self.terms,
            seed: self.seed,
            m: own.then_some(p.m),
            ram: own.then_some(p.r),
        }
    }

    pub fn shape(&self) -> Shape {
        self.suite().shape()
    }

    pub fn passes(&self, residual: Option<i64>) -> bool {
        residual.is_none_or(|v| v >= self.threshold)
    }

    pub fn echo(&self) -> Value {
        let p = self.ctx.params();
        let lambda = match &self.lambda {
            None => Value::Null,
            Some(LambdaSpec::Basis(n)) => json!(format!("basis:{n}")),
            Some(LambdaSpec::Explicit(v)) => json!(v.iter().map(CinfNum::to_json).collect::<Vec<_>>()),
        };
        json!({
            "field": p,
            "q": self.ctx.q(),
            "tdeg": self.tdeg,
            "horizon": self.horizon,
            "guard": self.guard,
            "terms": self.terms,
            "module": self.module,
            "lambda": lambda,
            "u": self.u.u().render(&self.ctx),
            "seed": self.seed,
            "threshold": self.threshold,
        })
    }
}

fn read_file(path: &Path) -> Result<FileConfig, ConfigError> {
    let err = |msg: String| ConfigError::File { path: path.display().to_string(), msg };
    let text = std::fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
    serde_json::from_str(&text).map_err(|e| err(e.to_string()))
}

fn lambda_value(s: &str) -> Result<Value, ConfigError> {
    let s = s.trim();
    if s.starts_with('[') {
        serde_json::from_str(s).map_err(|err| bad("lambda", err.to_string()))
    } else {
        Ok(Value::String(s.to_string()))
    }
}

fn parse_lambda(ctx: &Arc<Cinf>, v: &Value, dim: usize) -> Result<LambdaSpec, ConfigError> {
    if let Value::String(s) = v {
        let n = s
            .strip_prefix("basis:")
            .and_then(|n| n.trim().parse().ok())
            .ok_or_else(|| bad("lambda", format!("expected basis:N or a JSON array, got {s:?}")))?;
        return Ok(LambdaSpec::Basis(n));
    }
    let parts: Vec<CinfJson> = serde_json::from_value(v.clone()).map_err(|err| bad("lambda", err.to_string()))?;
    if parts.len() != dim {
        return Err(bad("lambda", format!("has {} entries, module dimension is {dim}", parts.len())));
    }
    let nums = parts
        .iter()
        .map(|j| CinfNum::from_json(ctx, j))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|err| bad("lambda", err.to_string()))?;
    Ok(LambdaSpec::Explicit(nums))
}
