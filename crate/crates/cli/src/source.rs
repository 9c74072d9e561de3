use anyhow::{anyhow, bail, Context, Result};
use patmat::boolfn::{catalog, BooleanFunction, CatalogParams, Predicate};
use patmat::num::{Mode, Rational};

use crate::args::FnArgs;

pub fn function(a: &FnArgs) -> Result<BooleanFunction> {
    match (&a.name, &a.hex) {
        (Some(_), Some(_)) => bail!("give either --fn or --hex, not both"),
        (None, None) => bail!("a function is required: --fn NAME or --hex TABLE --t T"),
        (None, Some(hex)) => {
            let t = a.t.ok_or_else(|| anyhow!("--hex needs --t"))?;
            Ok(BooleanFunction::from_hex(t, hex)?)
        }
        (Some(name), None) => {
            let p = CatalogParams { t: a.t, k: a.k, m: a.m, seed: a.fn_seed };
            Ok(catalog(name, &p)?)
        }
    }
}

/// "p/q" or an integer. Decimals are accepted only in float mode.
pub fn rational(s: &str, mode: Mode, what: &str) -> Result<Rational> {
    match s.parse::<Rational>() {
        Ok(r) => Ok(r),
        Err(e) => {
            if mode == Mode::Float {
                if let Some(r) = s.trim().parse::<f64>().ok().and_then(Rational::from_f64) {
                    return Ok(r);
                }
            }
            Err(anyhow!(e)).with_context(|| format!("--{what} must be a rational p/q"))
        }
    }
}

pub fn rational_or(s: &Option<String>, default: Rational, mode: Mode, what: &str) -> Result<Rational> {
    match s {
        Some(s) => rational(s, mode, what),
        None => Ok(default),
    }
}

/// A named predicate on {0..n} or an explicit +/- list.
pub fn predicate(spec: &str, n: Option<usize>) -> Result<Predicate> {
    if spec.chars().all(|c| matches!(c, '+' | '-' | ',' | ' ')) {
        let p = Predicate::parse_list(spec)?;
        if let Some(n) = n {
            if p.n() != n {
                bail!("predicate list has {} values, expected n + 1 = {}", p.n() + 1, n + 1);
            }
        }
        return Ok(p);
    }
    let n = n.ok_or_else(|| anyhow!("a named predicate needs --n"))?;
    Ok(Predicate::named(spec, n)?)
}

pub fn usize_list(s: &str, what: &str) -> Result<Vec<usize>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.trim().parse::<usize>().with_context(|| format!("bad entry {p:?} in --{what}")))
        .collect()
}
