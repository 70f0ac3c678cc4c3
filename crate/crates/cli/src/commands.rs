//! Subcommand bodies. Each returns `Ok(false)` when a checked inequality or
//! identity fails, so the caller can map that to exit code 1.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};
use wga_core::algebra::{
    check_bimodule_estimate, check_product_inequality, norm as weighted_norm, tensor_norm, BimoduleMode, ProductMode,
};
use wga_core::bw::{self, BWConfig, ComparisonConfig};
use wga_core::group::{load_or_enumerate, GrowthClass};
use wga_core::growth::{
    check_submultiplicative, fit_almost_submultiplicative, search_witness, symbolic_compare, Comparison,
};
use wga_core::spectral::{self, DEFAULT_DELTA};
use wga_core::verify::{self, VerifyConfig};
use wga_core::{
    AlgebraElement, Element, Error, Exponent, GroupSpec, GrowthCounts, GrowthFunction, LengthTable, LogValue,
    NormSpec, SampledGrowth,
};

use crate::config::Settings;

/// Maps an error to exit code 3 for resource caps and 2 for everything else.
pub fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(err) = cause.downcast_ref::<Error>() {
            return match err {
                Error::BallCapExceeded { .. } | Error::TailNotNegligible { .. } | Error::Overflow(_) => 3,
                _ => 2,
            };
        }
    }
    2
}

fn emit_json<T: Serialize>(s: &Settings, file_name: &str, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    print!("{text}");
    write_out(s, file_name, &text)
}

fn write_out(s: &Settings, file_name: &str, text: &str) -> Result<()> {
    if let Some(dir) = &s.out_dir {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let path = dir.join(file_name);
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn table(s: &Settings, spec: &GroupSpec, radius: u32) -> Result<LengthTable> {
    Ok(load_or_enumerate(spec, radius, s.cache_dir.as_deref(), s.max_elements)?)
}

fn read_element(spec: &GroupSpec, path: &Path) -> Result<AlgebraElement> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    AlgebraElement::from_text(spec.family(), &text).with_context(|| format!("parsing {}", path.display()))
}

fn max_length(table: &LengthTable, elems: &[&AlgebraElement]) -> Result<u32> {
    let mut best = 0;
    for a in elems {
        for g in a.support() {
            best = best.max(table.word_length(g)?);
        }
    }
    Ok(best)
}

/// Smallest doubling radius whose ball holds every support, then a ball of
/// `factor` times the longest support element.
fn covering_table(s: &Settings, spec: &GroupSpec, elems: &[&AlgebraElement], factor: u32) -> Result<LengthTable> {
    let mut r = 1;
    loop {
        let t = table(s, spec, r)?;
        if elems.iter().all(|a| a.support().all(|g| t.contains(g))) {
            let need = (factor * max_length(&t, elems)?).max(1);
            return if need <= r { Ok(t) } else { table(s, spec, need) };
        }
        r *= 2;
    }
}

fn complex(c: Complex64) -> [f64; 2] {
    [c.re, c.im]
}

fn log_json(v: LogValue) -> Value {
    json!({ "value": v.to_string(), "ln": v.ln() })
}

// ---------------------------------------------------------------------------

pub fn ball(s: &Settings, group: &str, radius: Option<u32>) -> Result<bool> {
    let spec = s.group(group)?;
    let Some(radius) = radius.or(s.file.radius) else {
        bail!(Error::Parse("ball needs a radius".into()));
    };
    let t = table(s, &spec, radius)?;
    let csv = t.growth_csv();
    print!("{csv}");
    write_out(s, "growth.csv", &csv)?;
    log::info!("{} elements in the ball of radius {radius}", t.len());
    Ok(true)
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct ComparisonOut {
    sigma: String,
    other: String,
    symbolic: Comparison,
    empirical: Comparison,
    caps: (u32, u32),
    range: u64,
    forward_witness: Option<wga_core::GrowthWitness>,
    backward_witness: Option<wga_core::GrowthWitness>,
    consistent: bool,
}

pub fn growth(
    s: &Settings,
    sigma: &str,
    other: Option<&str>,
    check_submult: Option<u64>,
    almost: Option<f64>,
    range: u64,
) -> Result<bool> {
    let f: GrowthFunction = sigma.parse()?;
    let mut out = serde_json::Map::new();
    out.insert("sigma".into(), json!(f.to_string()));
    let mut ok = true;
    if let Some(o) = other {
        let g: GrowthFunction = o.parse()?;
        let (c, k) = s.caps;
        let forward = search_witness(&f, &g, c, k, range);
        let backward = search_witness(&g, &f, c, k, range);
        let empirical = match (forward.is_some(), backward.is_some()) {
            (true, true) => Comparison::Equivalent,
            (true, false) => Comparison::Precedes,
            (false, true) => Comparison::Succeeds,
            (false, false) => Comparison::Unknown,
        };
        let symbolic = symbolic_compare(&f, &g);
        let consistent = symbolic == Comparison::Unknown || empirical == symbolic;
        ok &= consistent;
        let cmp = ComparisonOut {
            sigma: f.to_string(),
            other: g.to_string(),
            symbolic,
            empirical,
            caps: s.caps,
            range,
            forward_witness: forward,
            backward_witness: backward,
            consistent,
        };
        out.insert("comparison".into(), serde_json::to_value(cmp)?);
    }
    if let Some(r) = check_submult {
        let verdict = check_submultiplicative(&f, r);
        ok &= verdict.holds();
        out.insert("submultiplicative".into(), serde_json::to_value(verdict)?);
    }
    if let Some(eps) = almost {
        if !(eps > 0.0) {
            bail!(Error::Precondition(format!("ε must be positive, got {eps}")));
        }
        let fit = fit_almost_submultiplicative(&f, eps, range.min(2_000));
        let doubled = fit_almost_submultiplicative(&f, eps, 2 * range.min(2_000));
        let change = (doubled.ln_c - fit.ln_c).exp_m1().abs();
        out.insert(
            "almost_submultiplicative".into(),
            json!({ "fit": fit, "fit_doubled_range": doubled, "relative_change": change }),
        );
    }
    emit_json(s, "growth.json", &out)?;
    Ok(ok)
}

// ---------------------------------------------------------------------------

pub fn norm(s: &Settings, group: Option<&str>, file: &Path, sigma: &str, r: f64, p: &str) -> Result<bool> {
    let spec = s.group_or_config(group)?;
    let sigma: GrowthFunction = sigma.parse()?;
    let p: Exponent = p.parse()?;
    let a = read_element(&spec, file)?;
    let t = covering_table(s, &spec, &[&a], 1)?;
    let v = weighted_norm(&a, &NormSpec::l1(&sigma, r, &t).with_p(p))?;
    let out = json!({
        "group": spec.canonical_string(),
        "sigma": sigma.to_string(),
        "R": r,
        "p": p,
        "norm": log_json(v),
    });
    emit_json(s, "norm.json", &out)?;
    Ok(true)
}

// ---------------------------------------------------------------------------

pub struct ConvChecks {
    pub submult: bool,
    pub almost: Option<f64>,
    pub bimodule: bool,
}

pub fn conv(
    s: &Settings,
    group: Option<&str>,
    a: &Path,
    b: &Path,
    sigma: &str,
    r: f64,
    checks: ConvChecks,
) -> Result<bool> {
    let spec = s.group_or_config(group)?;
    let sigma: GrowthFunction = sigma.parse()?;
    let (a, b) = (read_element(&spec, a)?, read_element(&spec, b)?);
    let t = covering_table(s, &spec, &[&a, &b], 2)?;
    let ab = a.convolve(&b)?;
    let l1 = NormSpec::l1(&sigma, r, &t);
    let mut out = serde_json::Map::new();
    out.insert("group".into(), json!(spec.canonical_string()));
    out.insert("sigma".into(), json!(sigma.to_string()));
    out.insert("R".into(), json!(r));
    out.insert("product".into(), json!(ab.to_text()));
    out.insert(
        "norms".into(),
        json!({
            "a": log_json(weighted_norm(&a, &l1)?),
            "b": log_json(weighted_norm(&b, &l1)?),
            "ab": log_json(weighted_norm(&ab, &l1)?),
        }),
    );
    let mut ok = true;
    if checks.submult {
        let rep = check_product_inequality(&a, &b, &sigma, r, ProductMode::Sub, &t)?;
        ok &= rep.inequality.holds;
        out.insert("submultiplicative".into(), serde_json::to_value(rep)?);
    }
    if let Some(epsilon) = checks.almost {
        let rep = check_product_inequality(&a, &b, &sigma, r, ProductMode::Almost { epsilon }, &t)?;
        ok &= rep.inequality.holds;
        out.insert("almost_submultiplicative".into(), serde_json::to_value(rep)?);
    }
    if checks.bimodule {
        let mode = match checks.almost {
            Some(epsilon) => BimoduleMode::AlmostSub { epsilon },
            None => BimoduleMode::Sub,
        };
        let rep = check_bimodule_estimate(&a, &b, &sigma, r, mode, &t)?;
        ok &= rep.holds();
        out.insert("bimodule".into(), serde_json::to_value(rep)?);
    }
    out.insert("holds".into(), json!(ok));
    write_out(s, "product.txt", &ab.to_text())?;
    emit_json(s, "conv.json", &out)?;
    Ok(ok)
}

// ---------------------------------------------------------------------------

pub struct HopfChecks {
    pub coproduct: bool,
    pub antipode: bool,
    pub counit: bool,
}

fn equality(lhs: LogValue, rhs: LogValue, tol: f64) -> (Value, bool) {
    let rel = lhs.rel_diff(rhs);
    let holds = rel <= tol;
    (json!({ "lhs": log_json(lhs), "rhs": log_json(rhs), "relative_difference": rel, "holds": holds }), holds)
}

fn elements_close(x: &AlgebraElement, y: &AlgebraElement, tol: f64) -> Result<bool> {
    let d = x.add(&y.scale(Complex64::new(-1.0, 0.0)))?;
    let scale = x.terms().chain(y.terms()).map(|(_, c)| c.norm()).fold(1.0, f64::max);
    let close = d.terms().all(|(_, c)| c.norm() <= tol * scale);
    Ok(close)
}

pub fn hopf(s: &Settings, group: Option<&str>, file: &Path, sigma: &str, r: f64, checks: HopfChecks) -> Result<bool> {
    let spec = s.group_or_config(group)?;
    let sigma: GrowthFunction = sigma.parse()?;
    let a = read_element(&spec, file)?;
    let t = covering_table(s, &spec, &[&a], 1)?;
    let tol = s.tolerance;
    let l1 = NormSpec::l1(&sigma, r, &t);
    let mut out = serde_json::Map::new();
    out.insert("group".into(), json!(spec.canonical_string()));
    out.insert("sigma".into(), json!(sigma.to_string()));
    out.insert("R".into(), json!(r));
    out.insert("counit".into(), json!(complex(a.counit())));
    out.insert("trace".into(), json!(complex(a.trace())));
    out.insert("star".into(), json!(a.star().to_text()));
    out.insert("antipode".into(), json!(a.antipode().to_text()));
    let mut ok = true;
    if checks.coproduct {
        let (v, holds) = equality(tensor_norm(&a.coproduct(), &sigma, r, &t)?, weighted_norm(&a, &l1.with_r(2.0 * r))?, tol);
        ok &= holds;
        out.insert("coproduct_norm".into(), v);
    }
    if checks.antipode {
        let (l1_eq, h1) = equality(weighted_norm(&a.antipode(), &l1)?, weighted_norm(&a, &l1)?, tol);
        let sup = NormSpec::sup(&sigma, -r, &t);
        let (sup_eq, h2) = equality(weighted_norm(&a.antipode(), &sup)?, weighted_norm(&a, &sup)?, tol);
        // m(S ⊗ id)Δ(a) = ε(a)·1
        let mut acc = AlgebraElement::zero(spec.family());
        for ((g, h), c) in a.coproduct().terms() {
            let left = AlgebraElement::basis(spec.family(), g)?.antipode();
            acc = acc.add(&left.convolve(&AlgebraElement::basis(spec.family(), h)?)?.scale(*c))?;
        }
        let h3 = elements_close(&acc, &AlgebraElement::unit(spec.family()).scale(a.counit()), tol)?;
        let h4 = elements_close(&a.star().star(), &a, tol)?;
        ok &= h1 && h2 && h3 && h4;
        out.insert(
            "antipode_checks".into(),
            json!({ "l1_isometry": l1_eq, "dual_isometry": sup_eq, "antipode_axiom": h3, "star_involution": h4 }),
        );
    }
    if checks.counit {
        let d = a.coproduct();
        let left = elements_close(&d.counit_left(), &a, tol)?;
        let right = elements_close(&d.counit_right(), &a, tol)?;
        ok &= left && right;
        out.insert("counit_checks".into(), json!({ "left": left, "right": right }));
    }
    out.insert("holds".into(), json!(ok));
    emit_json(s, "hopf.json", &out)?;
    Ok(ok)
}

// ---------------------------------------------------------------------------

fn default_count_radius(spec: &GroupSpec) -> u32 {
    if GrowthCounts::closed_form(spec, 1).is_some() {
        30
    } else {
        16
    }
}

fn counts(s: &Settings, spec: &GroupSpec, radius: u32) -> Result<GrowthCounts> {
    match GrowthCounts::closed_form(spec, radius) {
        Some(c) => Ok(c?),
        None => Ok(table(s, spec, radius)?.counts()),
    }
}

pub fn nuclearity(
    s: &Settings,
    group: &str,
    sigma: Option<&str>,
    rho_grid: Option<Vec<f64>>,
    radius: Option<u32>,
) -> Result<bool> {
    let spec = s.group(group)?;
    let sigma = s.sigma(sigma)?;
    let radius = radius.or(s.file.radius).unwrap_or_else(|| default_count_radius(&spec));
    let grid = rho_grid.or_else(|| s.file.rho_grid.clone()).unwrap_or_else(spectral::default_grid);
    let c = counts(s, &spec, radius)?;
    let rep = spectral::gp_verdict(&c, &sigma, &grid, radius, DEFAULT_DELTA)?;
    let consistent = rep.consistent();
    write_out(s, "partial_sums.csv", &rep.partial_sums_csv())?;
    let mut v = serde_json::to_value(&rep)?;
    v["consistent"] = json!(consistent);
    emit_json(s, "nuclearity.json", &v)?;
    Ok(consistent)
}

pub fn complete_growth(
    s: &Settings,
    group: &str,
    sigma: &str,
    z: f64,
    r: f64,
    radius: Option<u32>,
    minimal: Option<Option<Vec<f64>>>,
) -> Result<bool> {
    let spec = s.group(group)?;
    let sigma: GrowthFunction = sigma.parse()?;
    let radius = radius.or(s.file.radius).unwrap_or_else(|| default_count_radius(&spec));
    let c = counts(s, &spec, radius)?;
    let rep = spectral::complete_growth_tail(&c, &sigma, r, z, radius, DEFAULT_DELTA)?;
    write_out(s, "complete_growth.csv", &rep.csv())?;
    let mut v = serde_json::to_value(&rep)?;
    v["tail"] = json!(rep.tail());
    let mut ok = true;
    if let Some(grid) = minimal {
        let grid = grid.or_else(|| s.file.r_grid.clone()).unwrap_or_else(spectral::default_grid);
        let m = spectral::minimal_r(&c, &sigma, z, &grid, radius, DEFAULT_DELTA)?;
        let (cap_c, cap_k) = s.caps;
        let witness = search_witness(&SampledGrowth::volume(&c), &sigma, cap_c, cap_k, u64::from(radius));
        let equivalent = m.minimal.is_some() == witness.is_some();
        ok = equivalent && m.monotone;
        v["minimal_r"] = serde_json::to_value(&m)?;
        v["volume_witness"] = serde_json::to_value(witness)?;
        v["summable_iff_witness"] = json!(equivalent);
    }
    emit_json(s, "complete_growth.json", &v)?;
    Ok(ok)
}

// ---------------------------------------------------------------------------

pub struct BwRequest {
    pub group: String,
    pub rho: f64,
    pub m: u32,
    pub file: PathBuf,
    pub ell: u64,
    pub truncation: Option<u32>,
    pub point_radius: u32,
    pub points: Vec<String>,
    pub tail_fraction: Option<f64>,
    pub compare: bool,
}

/// Truncation radius whose ball stays at desk scale for the group's growth.
fn default_truncation(spec: &GroupSpec) -> u32 {
    match spec.family().growth_class() {
        GrowthClass::Bounded | GrowthClass::Polynomial(0 | 1) => 40,
        GrowthClass::Polynomial(2) => 12,
        _ => 4,
    }
}

pub fn bw(s: &Settings, req: &BwRequest) -> Result<bool> {
    let spec = s.group(&req.group)?;
    let a = read_element(&spec, &req.file)?;
    let truncation = req.truncation.or(s.file.truncation).unwrap_or_else(|| default_truncation(&spec));
    let t = table(s, &spec, (2 * truncation).max(req.point_radius))?;
    for g in a.support() {
        if !t.contains(g) {
            bail!(Error::Precondition(format!("support element {g} lies outside the ball; raise --truncation")));
        }
    }
    let points: Vec<Element> = if req.points.is_empty() {
        (0..=req.point_radius).map(|n| t.shell(n).map(<[Element]>::to_vec)).collect::<wga_core::Result<Vec<_>>>()?.concat()
    } else {
        req.points.iter().map(|p| spec.parse_element(p)).collect::<wga_core::Result<_>>()?
    };
    let mut cfg = BWConfig::new(req.rho, req.m, req.ell, truncation)?;
    if let Some(f) = req.tail_fraction {
        cfg.tail_fraction = f;
    }
    let mut rep = bw::bw_report(&a, &cfg, &t, &points)?;
    let max_tail = rep
        .values
        .iter()
        .zip(&rep.tail_bounds)
        .map(|(v, b)| if b.is_zero() { 0.0 } else { (b.ln() - v.ln()).exp() })
        .fold(0.0, f64::max);
    let mut ok = true;
    let mut comparison = Value::Null;
    if req.compare {
        let ccfg = ComparisonConfig { seed: s.seed, ell: req.ell, ..ComparisonConfig::new(req.rho, req.m, truncation) };
        let c = bw::verify_comparison(&ccfg, &t)?;
        ok = c.holds();
        rep.fitted_constants.insert("second_ln_c".into(), c.second.ln_c);
        rep.fitted_constants.insert("second_relative_change".into(), c.second.relative_change);
        rep.fitted_constants.insert("third_ln_c".into(), c.third.ln_c);
        rep.fitted_constants.insert("third_relative_change".into(), c.third.relative_change);
        comparison = serde_json::to_value(&c)?;
    }
    let mut v = serde_json::to_value(&rep)?;
    v["group"] = json!(spec.canonical_string());
    v["max_tail_fraction"] = json!(max_tail);
    if req.compare {
        v["comparison"] = comparison;
    }
    emit_json(s, "bw.json", &v)?;
    Ok(ok)
}

// ---------------------------------------------------------------------------

pub fn verify_all(s: &Settings, samples: Option<usize>) -> Result<bool> {
    let cfg = VerifyConfig {
        seed: s.seed,
        samples: samples.or(s.file.samples).unwrap_or(VerifyConfig::default().samples),
        tolerance: s.tolerance,
        caps: s.caps,
        ..VerifyConfig::default()
    };
    let rep = verify::verify_all(&cfg)?;
    let text = rep.to_json();
    print!("{text}");
    write_out(s, "verify.json", &text)?;
    Ok(rep.passed)
}
