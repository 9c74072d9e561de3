//! Certificate files: exact payloads that are re-verified from scratch.

use std::collections::BTreeMap;

use anyhow::{anyhow, bail, Context, Result};
use clap::ValueEnum;
use patmat::approx::{
    dual_witness, ortho_distribution, weight_bruteforce, weight_int_upper, BruteWeight, WeightCertificate,
};
use patmat::boolfn::{character, fourier_of_table, BooleanFunction};
use patmat::bounds::BoundReport;
use patmat::num::{Mode, Rational};
use patmat::pattern::{compare_with_svd, spectrum_formula, PatternMatrixSpec};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertKind {
    DualWitness,
    OrthoDistribution,
    WeightCert,
    Spectrum,
    BoundReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionRecord {
    pub arity: usize,
    pub hex: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateFile {
    pub schema_version: u32,
    pub kind: CertKind,
    pub function: FunctionRecord,
    pub params: BTreeMap<String, String>,
    pub payload: Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct Finding {
    pub invariant: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub kind: CertKind,
    pub findings: Vec<Finding>,
    pub passed: bool,
}

impl CertificateFile {
    fn new(kind: CertKind, f: &BooleanFunction, params: BTreeMap<String, String>, payload: Value) -> Self {
        CertificateFile {
            schema_version: SCHEMA_VERSION,
            kind,
            function: FunctionRecord { arity: f.arity(), hex: f.to_hex() },
            params,
            payload,
        }
    }

    pub fn to_json(&self) -> String {
        let v = serde_json::to_value(self).expect("certificate serialises");
        format!("{}\n", serde_json::to_string_pretty(&v).expect("value serialises"))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).context("certificate is not JSON")?;
        let version = v.get("schema_version").and_then(Value::as_u64);
        if version != Some(SCHEMA_VERSION as u64) {
            bail!("unsupported schema version {version:?}, expected {SCHEMA_VERSION}");
        }
        serde_json::from_value(v).context("certificate does not match the schema")
    }

    fn param(&self, key: &str) -> Result<&str> {
        self.params.get(key).map(String::as_str).ok_or_else(|| anyhow!("missing parameter {key:?}"))
    }

    fn param_usize(&self, key: &str) -> Result<usize> {
        self.param(key)?.parse().with_context(|| format!("parameter {key:?} is not an integer"))
    }

    fn param_rational(&self, key: &str) -> Result<Rational> {
        Ok(self.param(key)?.parse::<Rational>()?)
    }
}

fn params(pairs: &[(&str, String)]) -> BTreeMap<String, String> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn signed_sum(values: &[Rational], f: &BooleanFunction) -> Rational {
    values.iter().zip(f.table()).map(|(v, &s)| if s == 1 { v.clone() } else { -v }).sum()
}

pub fn dual_witness_cert(f: &BooleanFunction, eps: &Rational, mode: Mode) -> Result<CertificateFile> {
    let w = dual_witness(f, eps, mode)?;
    let p = params(&[("eps", eps.to_string()), ("d", w.d.to_string())]);
    let payload = json!({ "psi": w.values, "correlation": w.correlation });
    Ok(CertificateFile::new(CertKind::DualWitness, f, p, payload))
}

pub fn ortho_cert(f: &BooleanFunction, d: usize, mode: Mode) -> Result<CertificateFile> {
    let o = ortho_distribution(f, d, mode)?.ok_or_else(|| {
        patmat::Error::Degenerate(format!("no distribution orthogonal below degree {d}: d exceeds degthr(f)"))
    })?;
    let payload = json!({ "mu": o.weights });
    Ok(CertificateFile::new(CertKind::OrthoDistribution, f, params(&[("d", d.to_string())]), payload))
}

/// The brute-force optimum when the search applies and finishes, else the
/// rounding certificate.
pub fn integer_certificate(f: &BooleanFunction, d: usize, mode: Mode) -> Result<(WeightCertificate, &'static str)> {
    if let Ok(BruteWeight::Exact(c)) = weight_bruteforce(f, d, patmat::approx::BRUTE_MAX_CAP) {
        return Ok((c, "brute force"));
    }
    Ok((weight_int_upper(f, d, mode)?.0, "rounding"))
}

pub fn weight_cert(f: &BooleanFunction, d: usize, mode: Mode) -> Result<CertificateFile> {
    let (c, source) = integer_certificate(f, d, mode)?;
    let lambda: BTreeMap<String, i64> = c.lambda.iter().map(|(s, v)| (s.to_string(), *v)).collect();
    let p = params(&[("d", d.to_string()), ("weight", c.weight().to_string()), ("source", source.into())]);
    Ok(CertificateFile::new(CertKind::WeightCert, f, p, json!({ "lambda": lambda })))
}

#[derive(Serialize, Deserialize)]
struct SpectrumLine {
    sigma_sq: String,
    multiplicity: u128,
}

pub fn spectrum_cert(f: &BooleanFunction, n: usize) -> Result<CertificateFile> {
    let spec = PatternMatrixSpec::from_function(n, f.arity(), f)?;
    let s = spectrum_formula(&spec);
    let lines: Vec<SpectrumLine> = s
        .entries
        .iter()
        .map(|e| SpectrumLine { sigma_sq: e.sigma_sq.to_fraction_string(), multiplicity: e.multiplicity })
        .collect();
    let p = params(&[("n", n.to_string()), ("t", f.arity().to_string()), ("phi_sha256", spec.phi_hash())]);
    let payload = json!({ "phi": spec.phi(), "entries": lines, "rank": s.rank().to_string() });
    Ok(CertificateFile::new(CertKind::Spectrum, f, p, payload))
}

/// `params` are the invocation parameters, so verification can rerun the
/// bound exactly as it was first computed.
pub fn bound_report_cert(
    f: &BooleanFunction,
    name: &str,
    mut p: BTreeMap<String, String>,
    report: &BoundReport,
    mode: Mode,
) -> CertificateFile {
    p.insert("bound".into(), name.to_string());
    p.insert("mode".into(), format!("{mode:?}").to_lowercase());
    CertificateFile::new(CertKind::BoundReport, f, p, report.to_json())
}

struct Checker {
    findings: Vec<Finding>,
}

impl Checker {
    fn check(&mut self, invariant: &str, passed: bool, detail: impl Into<String>) {
        self.findings.push(Finding { invariant: invariant.into(), passed, detail: detail.into() });
    }
}

/// Payload rationals must be in the reduced "num/den" form the generators
/// write, so a corrupted digit never parses to an equal value.
fn canonical(s: &str, what: &str) -> Result<Rational> {
    let r: Rational = s.parse()?;
    if r.to_fraction_string() != s {
        bail!("{what}: {s:?} is not a reduced \"num/den\" fraction");
    }
    Ok(r)
}

fn rationals(v: &Value, key: &str) -> Result<Vec<Rational>> {
    let arr = v.get(key).and_then(Value::as_array).ok_or_else(|| anyhow!("payload lacks array {key:?}"))?;
    arr.iter()
        .map(|x| {
            let s = x.as_str().ok_or_else(|| anyhow!("{key}: entries must be \"num/den\" strings"))?;
            canonical(s, key)
        })
        .collect()
}

fn rational_field(v: &Value, key: &str) -> Result<Rational> {
    let s = v.get(key).and_then(Value::as_str).ok_or_else(|| anyhow!("payload lacks {key:?}"))?;
    canonical(s, key)
}

/// Re-derives every invariant the certificate claims from its payload.
/// Structural problems (unparsable numbers, wrong lengths) are errors.
pub fn verify(cert: &CertificateFile) -> Result<Verdict> {
    let f = BooleanFunction::from_hex(cert.function.arity, &cert.function.hex)?;
    let t = f.arity();
    let mut c = Checker { findings: Vec::new() };
    match cert.kind {
        CertKind::DualWitness => {
            let eps = cert.param_rational("eps")?;
            let d = cert.param_usize("d")?;
            let psi = rationals(&cert.payload, "psi")?;
            let claimed = rational_field(&cert.payload, "correlation")?;
            if psi.len() != 1 << t {
                bail!("ψ has {} values, expected {}", psi.len(), 1usize << t);
            }
            let mass: Rational = psi.iter().map(|v| v.abs()).sum();
            c.check("Σ|ψ| = 1", mass == Rational::one(), format!("{mass}"));
            let spec = fourier_of_table(t, &psi)?;
            let low = spec.nonzero().find(|(s, _)| (s.count_ones() as usize) < d).map(|(s, _)| s);
            c.check(
                "ψ̂(S) = 0 for |S| < d",
                low.is_none(),
                low.map_or(String::new(), |s| format!("first violation at S = {s}")),
            );
            let corr = signed_sum(&psi, &f);
            c.check("Σ ψ(x) f(x) equals the stated correlation", corr == claimed, format!("{corr} vs {claimed}"));
            c.check("correlation > ε", corr > eps, format!("{corr} vs ε = {eps}"));
        }
        CertKind::OrthoDistribution => {
            let d = cert.param_usize("d")?;
            let mu = rationals(&cert.payload, "mu")?;
            if mu.len() != 1 << t {
                bail!("μ has {} values, expected {}", mu.len(), 1usize << t);
            }
            c.check("μ ≥ 0", mu.iter().all(|v| !v.is_negative()), "");
            let total: Rational = mu.iter().sum();
            c.check("Σμ = 1", total == Rational::one(), format!("{total}"));
            let fmu: Vec<Rational> =
                mu.iter().zip(f.table()).map(|(m, &s)| if s == 1 { m.clone() } else { -m }).collect();
            let spec = fourier_of_table(t, &fmu)?;
            let low = spec.nonzero().find(|(s, _)| (s.count_ones() as usize) < d).map(|(s, _)| s);
            c.check(
                "E_μ[f χ_S] = 0 for |S| < d",
                low.is_none(),
                low.map_or(String::new(), |s| format!("first violation at S = {s}")),
            );
        }
        CertKind::WeightCert => {
            let d = cert.param_usize("d")?;
            let weight: u64 = cert.param("weight")?.parse().context("weight is not an integer")?;
            let obj =
                cert.payload.get("lambda").and_then(Value::as_object).ok_or_else(|| anyhow!("payload lacks lambda"))?;
            let mut lambda = BTreeMap::new();
            for (k, v) in obj {
                let s: usize = k.parse().with_context(|| format!("bad set mask {k:?}"))?;
                let l = v.as_i64().ok_or_else(|| anyhow!("λ values must be integers"))?;
                if s >> t != 0 {
                    bail!("set mask {s} outside 2^{t}");
                }
                lambda.insert(s, l);
            }
            let deg_ok = lambda.keys().all(|s| s.count_ones() as usize <= d);
            c.check("every |S| ≤ d", deg_ok, "");
            let total: u64 = lambda.values().map(|v: &i64| v.unsigned_abs()).sum();
            c.check("Σ|λ_S| equals the stated weight", total == weight, format!("{total} vs {weight}"));
            let margin = (0..1usize << t)
                .map(|x| {
                    let p: i64 = lambda.iter().map(|(&s, &l)| l * character(s, x) as i64).sum();
                    f.eval(x) as i64 * p
                })
                .min()
                .unwrap_or(0);
            c.check("f(x)·p(x) ≥ 1 for all x", margin >= 1, format!("min margin {margin}"));
        }
        CertKind::Spectrum => {
            let n = cert.param_usize("n")?;
            let phi = rationals(&cert.payload, "phi")?;
            let spec = PatternMatrixSpec::new(n, t, phi)?;
            c.check("φ hash matches", spec.phi_hash() == cert.param("phi_sha256")?, "");
            let lines: Vec<SpectrumLine> = serde_json::from_value(
                cert.payload.get("entries").cloned().ok_or_else(|| anyhow!("payload lacks entries"))?,
            )
            .context("spectrum entries")?;
            let sq: Vec<Rational> = lines.iter().map(|l| canonical(&l.sigma_sq, "sigma_sq")).collect::<Result<_>>()?;
            let expect = spectrum_formula(&spec);
            let same = lines.len() == expect.entries.len()
                && lines
                    .iter()
                    .zip(&sq)
                    .zip(&expect.entries)
                    .all(|((a, q), b)| *q == b.sigma_sq && a.multiplicity == b.multiplicity);
            c.check("entries equal the spectrum formula", same, "");
            let rank: u128 = cert
                .payload
                .get("rank")
                .and_then(Value::as_str)
                .ok_or_else(|| anyhow!("payload lacks rank"))?
                .parse()
                .context("rank")?;
            let sum: u128 = lines.iter().map(|l| l.multiplicity).sum();
            c.check("rank = Σ multiplicities", rank == sum, format!("{rank} vs {sum}"));
            let frob: Rational =
                lines.iter().zip(&sq).map(|(l, q)| q * Rational::from_bigint(l.multiplicity.into())).sum();
            let reps = Rational::from_bigint((spec.entries() >> t).into());
            let direct: Rational = spec.phi().iter().map(|v| v * v).sum::<Rational>() * reps;
            c.check("Σ mult·σ² = ‖A‖_F²", frob == direct, format!("{frob} vs {direct}"));
            if spec.entries() <= patmat::bounds::VERIFY_MAX_ENTRIES {
                let svd = compare_with_svd(&spec)?;
                c.check("entries match the SVD", svd.matches, format!("max rel err {:.3e}", svd.max_rel_err));
            }
        }
        CertKind::BoundReport => {
            let name = cert.param("bound")?.to_string();
            let mode = match cert.param("mode")? {
                "float" => Mode::Float,
                _ => Mode::Exact,
            };
            let rerun = crate::commands::recompute_bound(&name, &f, &cert.params, mode)?;
            let stored_value = cert.payload.get("value").cloned().unwrap_or(Value::Null);
            let fresh = rerun.to_json();
            c.check(
                "recomputed value equals the stored value",
                fresh.get("value") == Some(&stored_value),
                format!("{} vs {stored_value}", fresh.get("value").unwrap_or(&Value::Null)),
            );
            c.check("recomputed report equals the stored report", fresh == cert.payload, "");
            c.check("recomputed report verifies", rerun.verified() || rerun.formula_only, "");
        }
    }
    let passed = c.findings.iter().all(|x| x.passed);
    Ok(Verdict { kind: cert.kind, findings: c.findings, passed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use patmat::boolfn::CatalogParams;

    fn or2() -> BooleanFunction {
        patmat::boolfn::catalog("or", &CatalogParams { t: Some(2), ..Default::default() }).unwrap()
    }

    #[test]
    fn round_trip_and_verify() {
        let f = or2();
        let certs = [
            dual_witness_cert(&f, &Rational::new(1, 3), Mode::Exact).unwrap(),
            ortho_cert(&f, 1, Mode::Exact).unwrap(),
            weight_cert(&f, 1, Mode::Exact).unwrap(),
            spectrum_cert(&f, 4).unwrap(),
        ];
        for c in certs {
            let back = CertificateFile::parse(&c.to_json()).unwrap();
            assert_eq!(back, c);
            let v = verify(&back).unwrap();
            assert!(v.passed, "{:?}", v.findings);
        }
    }

    #[test]
    fn schema_and_degenerate() {
        let f = or2();
        let mut c = dual_witness_cert(&f, &Rational::new(1, 3), Mode::Exact).unwrap();
        c.schema_version = 2;
        assert!(CertificateFile::parse(&c.to_json()).is_err());
        assert!(ortho_cert(&f, 2, Mode::Exact).is_err());
    }
}
