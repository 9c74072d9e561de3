use std::collections::BTreeMap;
use std::fs;

use anyhow::{anyhow, bail, Context, Result};
use patmat::approx::{
    approx_degree, dual_witness, e_profile, ortho_distribution, threshold_degree, weight_bruteforce, weight_int_upper,
    weight_real, BruteWeight,
};
use patmat::boolfn::{catalog, degree, min_depth_tree, BooleanFunction, CatalogParams, Predicate, CATALOG_NAMES};
use patmat::bounds::{
    csv_row, disc_lower_weight, disc_upper_adeg, disc_upper_weight, logrank_check, paturi_report, q_lower_adeg,
    q_lower_weight, rank_bounded_error, rank_small_bias, razborov_bound, BoundReport, CSV_HEADER,
};
use patmat::num::{Mode, Rational};
use patmat::pattern::{compare_with_svd, spectrum_formula, ColumnIndex, PatternMatrixSpec};
use patmat::protocols::{
    det_exhaustive, det_protocol, exact_advantage, monte_carlo, rand_weight_protocol, ProtocolInput,
    MAX_EXHAUSTIVE_PAIRS,
};
use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::args::{BoundArgs, Cli, Command, FnArgs, Format, ModeArg, Protocol};
use crate::cert::{self, CertKind, CertificateFile};
use crate::source;

pub const BOUND_NAMES: &[&str] = &[
    "main-cc",
    "small-bias",
    "disc-upper",
    "disc-lower",
    "disc-upper-adeg",
    "rank-bounded-error",
    "rank-small-bias",
    "log-rank",
    "razborov",
    "paturi",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    /// Vacuous or degenerate result: exit code 2.
    Vacuous,
    /// A check failed: exit code 1.
    Failed,
}

#[derive(Clone, Debug)]
pub struct Output {
    pub body: String,
    pub outcome: Outcome,
}

impl Output {
    fn new(body: String, outcome: Outcome) -> Self {
        Output { body, outcome }
    }
}

fn pretty(v: &Value) -> String {
    format!("{}\n", serde_json::to_string_pretty(v).expect("value serialises"))
}

fn csv_cell(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// key,value lines for the top-level fields of an object.
fn kv_csv(v: &Value) -> String {
    let mut out = String::from("key,value\n");
    if let Value::Object(m) = v {
        for (k, x) in m {
            let cell = match x {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            out.push_str(&format!("{},{}\n", csv_cell(k), csv_cell(&cell)));
        }
    }
    out
}

fn render(v: &Value, format: Format) -> String {
    match format {
        Format::Json => pretty(v),
        Format::Csv => kv_csv(v),
    }
}

fn mode_of(m: ModeArg) -> Mode {
    match m {
        ModeArg::Exact => Mode::Exact,
        ModeArg::Float => Mode::Float,
    }
}

fn function_json(f: &BooleanFunction) -> Value {
    json!({ "arity": f.arity(), "hex": f.to_hex() })
}

fn strings(v: &[Rational]) -> Vec<String> {
    v.iter().map(Rational::to_string).collect()
}

pub fn run(cli: &Cli) -> Result<Output> {
    let mode = mode_of(cli.mode);
    let format = cli.format;
    match &cli.command {
        Command::Adeg { f, eps, witness_out } => adeg(f, eps, witness_out.as_deref(), mode, format),
        Command::Degthr { f } => degthr(f, mode, format),
        Command::Weight { f, d } => weight(f, *d, mode, format),
        Command::Witness { f, kind, eps, d, n, bound, out } => {
            let fun = source::function(f)?;
            let c = match kind {
                CertKind::DualWitness => {
                    let eps = source::rational_or(eps, Rational::new(1, 3), mode, "eps")?;
                    cert::dual_witness_cert(&fun, &eps, mode)?
                }
                CertKind::OrthoDistribution => {
                    let d = match d {
                        Some(d) => *d,
                        None => threshold_degree(&fun, mode)?,
                    };
                    cert::ortho_cert(&fun, d, mode)?
                }
                CertKind::WeightCert => {
                    let d = match d {
                        Some(d) => *d,
                        None => threshold_degree(&fun, mode)?,
                    };
                    cert::weight_cert(&fun, d, mode)?
                }
                CertKind::Spectrum => {
                    cert::spectrum_cert(&fun, n.ok_or_else(|| anyhow!("--kind spectrum needs --n"))?)?
                }
                CertKind::BoundReport => {
                    let name = bound.as_deref().ok_or_else(|| anyhow!("--kind bound-report needs --bound"))?;
                    let mut params = BTreeMap::new();
                    if let Some(n) = n {
                        params.insert("n".to_string(), n.to_string());
                    }
                    if let Some(e) = eps {
                        params.insert("eps".to_string(), source::rational(e, mode, "eps")?.to_string());
                    }
                    if let Some(d) = d {
                        params.insert("d".to_string(), d.to_string());
                    }
                    let report = recompute_bound(name, &fun, &params, mode)?;
                    cert::bound_report_cert(&fun, name, params, &report, mode)
                }
            };
            write_cert(&c, out.as_deref())
        }
        Command::Spectrum { f, n, verify } => spectrum(f, *n, *verify, format),
        Command::Bounds { bound, p } => bounds(bound, p, mode, format),
        Command::Simulate { protocol, f, n, trials, seed, transcripts } => {
            simulate(*protocol, f, *n, *trials, *seed, *transcripts, format)
        }
        Command::Verify { file } => {
            let text = fs::read_to_string(file).with_context(|| format!("cannot read {}", file.display()))?;
            let c = CertificateFile::parse(&text)?;
            let v = cert::verify(&c)?;
            let outcome = if v.passed { Outcome::Ok } else { Outcome::Failed };
            let body = serde_json::to_value(&v)?;
            Ok(Output::new(render(&body, format), outcome))
        }
        Command::Sweep { bound, fns, ts, blocks, eps, delta, gamma, d } => {
            let p = BoundArgs {
                f: FnArgs::default(),
                n: None,
                eps: eps.clone(),
                delta: delta.clone(),
                gamma: gamma.clone(),
                d: *d,
                predicate: None,
                t_max: 10,
            };
            sweep(bound, fns, ts, blocks, &p, mode, format)
        }
        Command::Catalog { t } => catalog_list(*t, format),
    }
}

fn write_cert(c: &CertificateFile, out: Option<&std::path::Path>) -> Result<Output> {
    let text = c.to_json();
    match out {
        None => Ok(Output::new(text, Outcome::Ok)),
        Some(path) => {
            fs::write(path, &text).with_context(|| format!("cannot write {}", path.display()))?;
            let v = json!({ "kind": c.kind, "written": path.display().to_string() });
            Ok(Output::new(pretty(&v), Outcome::Ok))
        }
    }
}

fn adeg(fa: &FnArgs, eps: &str, witness_out: Option<&std::path::Path>, mode: Mode, format: Format) -> Result<Output> {
    let f = source::function(fa)?;
    let eps = source::rational(eps, mode, "eps")?;
    let d = approx_degree(&f, &eps, mode)?;
    let profile = e_profile(&f, mode)?;
    let witness = if d == 0 { None } else { Some(dual_witness(&f, &eps, mode)?) };
    if let Some(path) = witness_out {
        let c = cert::dual_witness_cert(&f, &eps, mode)?;
        fs::write(path, c.to_json()).with_context(|| format!("cannot write {}", path.display()))?;
    }
    if format == Format::Csv {
        let mut out = String::from("d,error\n");
        for r in &profile {
            out.push_str(&format!("{},{}\n", r.d, r.value));
        }
        return Ok(Output::new(out, Outcome::Ok));
    }
    let v = json!({
        "function": function_json(&f),
        "eps": eps.to_string(),
        "mode": format!("{mode:?}").to_lowercase(),
        "deg": d,
        "e_profile": profile.iter().map(|r| r.value.to_string()).collect::<Vec<_>>(),
        "witness": witness.map(|w| json!({
            "d": w.d,
            "correlation": w.correlation.to_string(),
            "psi": strings(&w.values),
        })),
    });
    Ok(Output::new(pretty(&v), Outcome::Ok))
}

fn degthr(fa: &FnArgs, mode: Mode, format: Format) -> Result<Output> {
    let f = source::function(fa)?;
    let d = threshold_degree(&f, mode)?;
    let mu = ortho_distribution(&f, d, mode)?;
    let v = json!({
        "function": function_json(&f),
        "degthr": d,
        "mu": mu.map(|m| strings(&m.weights)),
    });
    Ok(Output::new(render(&v, format), Outcome::Ok))
}

fn weight(fa: &FnArgs, d: usize, mode: Mode, format: Format) -> Result<Output> {
    let f = source::function(fa)?;
    if d > f.arity() {
        bail!("d = {d} exceeds the arity {}", f.arity());
    }
    let real = weight_real(&f, d, mode)?;
    let Some(wr) = real.value else {
        let v = json!({
            "function": function_json(&f),
            "d": d,
            "w_real": "inf",
            "note": "no degree-d sign representation; W(f, d) is infinite",
        });
        return Ok(Output::new(render(&v, format), Outcome::Vacuous));
    };
    let brute = match weight_bruteforce(&f, d, patmat::approx::BRUTE_MAX_CAP) {
        Ok(BruteWeight::Exact(c)) => json!({ "weight": c.weight(), "lambda": c.lambda }),
        Ok(BruteWeight::ExceedsCap(cap)) => json!({ "exceeds_cap": cap }),
        Err(patmat::Error::Size(msg)) => json!({ "skipped": msg }),
        Err(e) => return Err(e.into()),
    };
    let (rc, e) = weight_int_upper(&f, d, mode)?;
    let v = json!({
        "function": function_json(&f),
        "d": d,
        "e": e.to_string(),
        "w_real": wr.to_string(),
        "brute_force": brute,
        "rounding": { "weight": rc.weight(), "lambda": rc.lambda, "sign_represents": rc.sign_represents(&f) },
    });
    let ok = rc.sign_represents(&f);
    Ok(Output::new(render(&v, format), if ok { Outcome::Ok } else { Outcome::Failed }))
}

fn spectrum(fa: &FnArgs, n: usize, verify: bool, format: Format) -> Result<Output> {
    let f = source::function(fa)?;
    let spec = PatternMatrixSpec::from_function(n, f.arity(), &f)?;
    let s = spectrum_formula(&spec);
    let check = if verify { Some(compare_with_svd(&spec)?) } else { None };
    let outcome = match &check {
        Some(c) if !c.matches => Outcome::Failed,
        _ => Outcome::Ok,
    };
    if format == Format::Csv {
        let mut out = String::from("sigma_sq,sigma,multiplicity\n");
        for e in &s.entries {
            out.push_str(&format!("{},{:.12e},{}\n", e.sigma_sq, e.value(), e.multiplicity));
        }
        return Ok(Output::new(out, outcome));
    }
    let v = json!({
        "function": function_json(&f),
        "n": n,
        "t": f.arity(),
        "rows": spec.rows().to_string(),
        "cols": spec.cols().to_string(),
        "phi_sha256": spec.phi_hash(),
        "entries": s.entries.iter().map(|e| json!({
            "sigma_sq": e.sigma_sq.to_string(),
            "sigma": e.value(),
            "multiplicity": e.multiplicity.to_string(),
        })).collect::<Vec<_>>(),
        "rank": s.rank().to_string(),
        "frobenius_sq": s.frobenius_sq().to_string(),
        "verified": check.as_ref().map(|c| c.matches),
        "svd": check.map(|c| json!({ "max_rel_err": c.max_rel_err, "numeric_rank": c.numeric_rank })),
    });
    Ok(Output::new(pretty(&v), outcome))
}

/// Invocation parameters of a bound, as recorded in certificates.
fn bound_params(p: &BoundArgs, mode: Mode) -> Result<BTreeMap<String, String>> {
    let mut m = BTreeMap::new();
    if let Some(n) = p.n {
        m.insert("n".into(), n.to_string());
    }
    for (key, val) in [("eps", &p.eps), ("delta", &p.delta), ("gamma", &p.gamma)] {
        if let Some(s) = val {
            m.insert(key.into(), source::rational(s, mode, key)?.to_string());
        }
    }
    if let Some(d) = p.d {
        m.insert("d".into(), d.to_string());
    }
    if let Some(pr) = &p.predicate {
        m.insert("predicate".into(), pr.clone());
    }
    Ok(m)
}

fn get_rational(p: &BTreeMap<String, String>, key: &str, default: Rational) -> Result<Rational> {
    match p.get(key) {
        Some(s) => s.parse::<Rational>().with_context(|| format!("--{key} must be a rational p/q")),
        None => Ok(default),
    }
}

fn get_usize(p: &BTreeMap<String, String>, key: &str) -> Result<Option<usize>> {
    p.get(key).map(|s| s.parse::<usize>().with_context(|| format!("--{key} must be an integer"))).transpose()
}

/// n defaults to 2t, the smallest pattern matrix.
fn get_n(p: &BTreeMap<String, String>, f: &BooleanFunction) -> Result<usize> {
    Ok(get_usize(p, "n")?.unwrap_or(2 * f.arity()))
}

fn get_d(p: &BTreeMap<String, String>, f: &BooleanFunction, mode: Mode) -> Result<usize> {
    match get_usize(p, "d")? {
        Some(d) => Ok(d),
        None => Ok(threshold_degree(f, mode)?),
    }
}

/// Runs one function bound from recorded invocation parameters. Defaults:
/// n = 2t, ε = 1/3, δ = 1/7, γ = 2/3, d = degthr(f).
pub fn recompute_bound(
    name: &str,
    f: &BooleanFunction,
    p: &BTreeMap<String, String>,
    mode: Mode,
) -> Result<BoundReport> {
    let eps = || get_rational(p, "eps", Rational::new(1, 3));
    let delta = || get_rational(p, "delta", Rational::new(1, 7));
    let gamma = || get_rational(p, "gamma", Rational::new(2, 3));
    let n = get_n(p, f)?;
    let t = f.arity();
    Ok(match name {
        "main-cc" => q_lower_adeg(f, n, t, &eps()?, &delta()?, mode)?,
        "small-bias" => q_lower_weight(f, n, t, get_d(p, f, mode)?, &gamma()?, mode)?,
        "disc-upper" => disc_upper_weight(f, n, mode)?.report,
        "disc-lower" => disc_lower_weight(f, n, get_d(p, f, mode)?, mode)?,
        "disc-upper-adeg" => disc_upper_adeg(f, n, &gamma()?, mode)?,
        "rank-bounded-error" => rank_bounded_error(f, n, &eps()?, &delta()?, mode)?,
        "rank-small-bias" => rank_small_bias(f, n, get_d(p, f, mode)?, &gamma()?, mode)?,
        "log-rank" => logrank_check(f, n)?,
        "razborov" | "paturi" => bail!("bound '{name}' takes --predicate, not a function"),
        _ => bail!("unknown bound '{name}'; known: {}", BOUND_NAMES.join(", ")),
    })
}

fn report_outcome(r: &BoundReport) -> Outcome {
    if !r.failures().is_empty() {
        Outcome::Failed
    } else if r.vacuous {
        Outcome::Vacuous
    } else {
        Outcome::Ok
    }
}

fn bounds(name: &str, p: &BoundArgs, mode: Mode, format: Format) -> Result<Output> {
    match name {
        "razborov" => {
            let spec = p.predicate.as_deref().ok_or_else(|| anyhow!("razborov needs --predicate"))?;
            let d: Predicate = source::predicate(spec, p.n)?;
            let r = razborov_bound(&d, d.n(), mode)?;
            Ok(Output::new(render_report(&r, format), report_outcome(&r)))
        }
        "paturi" => {
            let family = p.predicate.as_deref().unwrap_or("or");
            let rows = paturi_report(family, 1..=p.t_max, mode)?;
            let outcome =
                if rows.iter().all(|r| r.in_band || r.ratio.is_none()) { Outcome::Ok } else { Outcome::Failed };
            if format == Format::Csv {
                let mut out = String::from("t,adeg,l0,l1,reference,ratio,in_band\n");
                for r in &rows {
                    let ratio = r.ratio.map(|q| format!("{q:.6}")).unwrap_or_default();
                    out.push_str(&format!(
                        "{},{},{},{},{:.6},{},{}\n",
                        r.t, r.adeg, r.l0, r.l1, r.reference, ratio, r.in_band
                    ));
                }
                return Ok(Output::new(out, outcome));
            }
            let v = json!({ "family": family, "band": patmat::bounds::PATURI_BAND, "rows": rows });
            Ok(Output::new(pretty(&v), outcome))
        }
        _ => {
            let f = source::function(&p.f)?;
            let params = bound_params(p, mode)?;
            let r = recompute_bound(name, &f, &params, mode)?;
            Ok(Output::new(render_report(&r, format), report_outcome(&r)))
        }
    }
}

fn render_report(r: &BoundReport, format: Format) -> String {
    match format {
        Format::Json => pretty(&r.to_json()),
        Format::Csv => format!("{CSV_HEADER}\n{}\n", csv_row(r)),
    }
}

fn sample_input(rng: &mut SplitMix64, n: usize, t: usize) -> ProtocolInput {
    let x = rng.gen_range(0..1u64 << n) as usize;
    let column =
        ColumnIndex { v_digits: (0..t).map(|_| rng.gen_range(0..n / t)).collect(), w: rng.gen_range(0..1usize << t) };
    ProtocolInput { x, column }
}

fn simulate(
    protocol: Protocol,
    fa: &FnArgs,
    n: usize,
    trials: u64,
    seed: u64,
    transcripts: usize,
    format: Format,
) -> Result<Output> {
    let f = source::function(fa)?;
    let t = f.arity();
    let spec = PatternMatrixSpec::from_function(n, t, &f)?;
    let mut rng = SplitMix64::seed_from_u64(seed);
    let mut lines = Vec::new();
    let (v, outcome) = match protocol {
        Protocol::Det => {
            let tree = min_depth_tree(&f);
            let mut v = json!({
                "protocol": "det",
                "function": function_json(&f),
                "n": n,
                "depth": tree.depth(),
                "depth_optimal": tree.optimal,
            });
            let mut ok = true;
            if spec.entries() <= MAX_EXHAUSTIVE_PAIRS {
                let s = det_exhaustive(&tree.tree, &f, n)?;
                ok &= s.all_correct && s.max_cost <= s.cost_bound;
                v["exhaustive"] = serde_json::to_value(&s)?;
            } else if trials == 0 {
                bail!("{} input pairs exceed the exhaustive limit; pass --trials to sample", spec.entries());
            }
            if trials > 0 {
                let mut correct = 0u64;
                let mut max_cost = 0;
                for _ in 0..trials {
                    let input = sample_input(&mut rng, n, t);
                    let z = patmat::pattern::project(input.x, &input.column, n, t) ^ input.column.w;
                    let tr = det_protocol(&tree.tree, &input, n, t)?;
                    correct += u64::from(tr.output == f.eval(z));
                    max_cost = max_cost.max(tr.cost);
                }
                ok &= correct == trials;
                v["sampled"] = json!({ "trials": trials, "seed": seed, "correct": correct, "max_cost": max_cost });
            }
            for _ in 0..transcripts {
                let input = sample_input(&mut rng, n, t);
                lines.push(det_protocol(&tree.tree, &input, n, t)?.to_json_line());
            }
            (v, if ok { Outcome::Ok } else { Outcome::Failed })
        }
        Protocol::Weight => {
            let d = threshold_degree(&f, Mode::Exact)?;
            let (c, source) = cert::integer_certificate(&f, d, Mode::Exact)?;
            let mut v = json!({
                "protocol": "weight",
                "function": function_json(&f),
                "n": n,
                "d": d,
                "weight": c.weight(),
                "certificate_source": source,
                "lambda": c.lambda,
            });
            let mut ok = true;
            if spec.entries() <= MAX_EXHAUSTIVE_PAIRS {
                let a = exact_advantage(&c, &f, n)?;
                ok &= a.min_advantage >= a.floor && a.matches_formula;
                v["exact"] = serde_json::to_value(&a)?;
            } else if trials == 0 {
                bail!("{} input pairs exceed the exhaustive limit; pass --trials to sample", spec.entries());
            }
            if trials > 0 {
                let mc = monte_carlo(&c, &f, n, trials, seed)?;
                ok &= mc.within_4_sigma;
                v["monte_carlo"] = serde_json::to_value(&mc)?;
            }
            for _ in 0..transcripts {
                let input = sample_input(&mut rng, n, t);
                lines.push(rand_weight_protocol(&c, &input, n, t, &mut rng)?.transcript.to_json_line());
            }
            (v, if ok { Outcome::Ok } else { Outcome::Failed })
        }
    };
    let mut body = render(&v, format);
    for l in lines {
        body.push_str(&l);
        body.push('\n');
    }
    Ok(Output::new(body, outcome))
}

fn sweep(name: &str, fns: &str, ts: &str, blocks: &str, p: &BoundArgs, mode: Mode, format: Format) -> Result<Output> {
    if !BOUND_NAMES.contains(&name) || matches!(name, "razborov" | "paturi") {
        bail!("sweep needs a function bound, got '{name}'");
    }
    let ts = source::usize_list(ts, "ts")?;
    let blocks = source::usize_list(blocks, "blocks")?;
    let mut tuples = Vec::new();
    for fname in fns.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        for &t in &ts {
            for &b in &blocks {
                if b < 2 {
                    bail!("block size n/t must be at least 2, got {b}");
                }
                tuples.push((fname.to_string(), t, t * b));
            }
        }
    }
    let base = bound_params(p, mode)?;
    let reports: Vec<BoundReport> = tuples
        .par_iter()
        .map(|(fname, t, n)| {
            let f = catalog(fname, &CatalogParams { t: Some(*t), ..Default::default() })?;
            let mut params = base.clone();
            params.insert("n".into(), n.to_string());
            recompute_bound(name, &f, &params, mode)
        })
        .collect::<Result<_>>()?;
    let outcome = if reports.iter().any(|r| !r.failures().is_empty()) { Outcome::Failed } else { Outcome::Ok };
    let body = match format {
        Format::Csv => {
            let mut out = format!("{CSV_HEADER}\n");
            for r in &reports {
                out.push_str(&csv_row(r));
                out.push('\n');
            }
            out
        }
        Format::Json => pretty(&Value::Array(reports.iter().map(BoundReport::to_json).collect())),
    };
    Ok(Output::new(body, outcome))
}

fn catalog_list(t: usize, format: Format) -> Result<Output> {
    let mut rows = Vec::new();
    for &name in CATALOG_NAMES {
        let mut p = CatalogParams { t: Some(t), ..Default::default() };
        match name {
            "thr" => p.k = Some(t.div_ceil(2)),
            "mp" => {
                if t % 2 != 0 {
                    continue;
                }
                p.m = Some(2);
                p.k = Some(t / 2);
            }
            _ => {}
        }
        let f = catalog(name, &p)?;
        rows.push((name, p, f));
    }
    if format == Format::Csv {
        let mut out = String::from("name,t,k,m,hex,degree\n");
        for (name, p, f) in &rows {
            let k = p.k.map(|k| k.to_string()).unwrap_or_default();
            let m = p.m.map(|m| m.to_string()).unwrap_or_default();
            out.push_str(&format!("{name},{},{k},{m},{},{}\n", f.arity(), f.to_hex(), degree(f)));
        }
        return Ok(Output::new(out, Outcome::Ok));
    }
    let v: Vec<Value> = rows
        .iter()
        .map(|(name, p, f)| {
            json!({ "name": name, "t": f.arity(), "k": p.k, "m": p.m, "hex": f.to_hex(), "degree": degree(f) })
        })
        .collect();
    Ok(Output::new(pretty(&Value::Array(v)), Outcome::Ok))
}
