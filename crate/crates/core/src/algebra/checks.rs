use serde::Serialize;

use super::norms::{ln_weight, norm, NormSpec};
use super::AlgebraElement;
use crate::group::LengthTable;
use crate::growth::{check_submultiplicative, fit_almost_submultiplicative, GrowthFunction};
use crate::{Error, LogValue, Result, INEQUALITY_TOLERANCE};

/// One side-by-side comparison `lhs <= rhs`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Inequality {
    pub lhs: LogValue,
    pub rhs: LogValue,
    pub holds: bool,
}

impl Inequality {
    pub fn new(lhs: LogValue, rhs: LogValue) -> Self {
        Inequality { lhs, rhs, holds: lhs.le_within(rhs, INEQUALITY_TOLERANCE) }
    }
}

/// Which product estimate to test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum ProductMode {
    /// `‖ab‖_R <= ‖a‖_R ‖b‖_R`, requires σ submultiplicative.
    Sub,
    /// `‖ab‖_R <= c ‖a‖_{R+ε} ‖b‖_{R+ε}` with a fitted `c`.
    Almost { epsilon: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProductReport {
    pub mode: ProductMode,
    pub r: f64,
    /// `ln c`; zero in the submultiplicative case.
    pub ln_c: f64,
    pub inequality: Inequality,
}

/// Fitted `ln c` for the almost-submultiplicative forms: with
/// `σ(n+m) <= c₀ σ(n)^{1+ε/R} σ(m)^{1+ε/R}` on `n + m <= range`, the constant
/// for an exponent bump of `ε` is `c₀^R`.
pub fn almost_constant_ln(sigma: &GrowthFunction, r: f64, epsilon: f64, range: u64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    r * fit_almost_submultiplicative(sigma, epsilon / r, range).ln_c
}

fn require_submultiplicative(sigma: &GrowthFunction, table: &LengthTable) -> Result<()> {
    let range = 2 * u64::from(table.radius());
    let verdict = check_submultiplicative(sigma, range);
    if verdict.holds() {
        Ok(())
    } else {
        Err(Error::Precondition(format!("{sigma} is not submultiplicative on 0..={range}: {verdict:?}")))
    }
}

pub fn check_product_inequality(
    a: &AlgebraElement,
    b: &AlgebraElement,
    sigma: &GrowthFunction,
    r: f64,
    mode: ProductMode,
    table: &LengthTable,
) -> Result<ProductReport> {
    if r < 0.0 {
        return Err(Error::Precondition(format!("product estimate needs R >= 0, got {r}")));
    }
    let ab = a.convolve(b)?;
    let spec = NormSpec::l1(sigma, r, table);
    let lhs = norm(&ab, &spec)?;
    let (ln_c, bumped) = match mode {
        ProductMode::Sub => {
            require_submultiplicative(sigma, table)?;
            (0.0, spec)
        }
        ProductMode::Almost { epsilon } => {
            if !(epsilon > 0.0) {
                return Err(Error::Precondition(format!("ε must be positive, got {epsilon}")));
            }
            let range = 2 * u64::from(table.radius());
            (almost_constant_ln(sigma, r, epsilon, range), spec.with_r(r + epsilon))
        }
    };
    let rhs = LogValue::from_ln(ln_c) * norm(a, &bumped)? * norm(b, &bumped)?;
    Ok(ProductReport { mode, r, ln_c, inequality: Inequality::new(lhs, rhs) })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum BimoduleMode {
    Sub,
    AlmostSub { epsilon: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BimoduleReport {
    pub mode: BimoduleMode,
    pub r: f64,
    pub ln_c: f64,
    /// Coefficients of `ab` and `ba` checked against the pointwise bound.
    pub pointwise_checked: usize,
    pub pointwise_violations: usize,
    /// Largest `ln(lhs / rhs)` over the pointwise checks.
    pub worst_ln_ratio: f64,
    /// `|(ab)_e| <= ‖a‖_R ‖b‖_{∞,-R}`, and the same for `ba`.
    pub unit_coefficient: [Inequality; 2],
    /// `‖ab‖_{∞,-R} <= ‖a‖_R ‖b‖_{∞,-R}` and `‖ba‖_{∞,-R} <= …`; sub mode only.
    pub sup_norm_bounds: Option<[Inequality; 2]>,
    /// `(‖S(b)‖_{∞,-R}, ‖b‖_{∞,-R})`.
    pub antipode: (LogValue, LogValue),
    pub antipode_isometric: bool,
}

impl BimoduleReport {
    pub fn holds(&self) -> bool {
        self.pointwise_violations == 0
            && self.unit_coefficient.iter().all(|i| i.holds)
            && self.sup_norm_bounds.is_none_or(|s| s.iter().all(|i| i.holds))
            && self.antipode_isometric
    }
}

/// Checks the bimodule estimates for `a` acting on `b` from both sides.
pub fn check_bimodule_estimate(
    a: &AlgebraElement,
    b: &AlgebraElement,
    sigma: &GrowthFunction,
    r: f64,
    mode: BimoduleMode,
    table: &LengthTable,
) -> Result<BimoduleReport> {
    if r < 0.0 {
        return Err(Error::Precondition(format!("bimodule estimate needs R >= 0, got {r}")));
    }
    let l1 = NormSpec::l1(sigma, r, table);
    let dual = NormSpec::sup(sigma, -r, table);
    let b_dual = norm(b, &dual)?;
    let a_r = norm(a, &l1)?;
    let (ln_c, r_point, a_point) = match mode {
        BimoduleMode::Sub => {
            require_submultiplicative(sigma, table)?;
            (0.0, r, a_r)
        }
        BimoduleMode::AlmostSub { epsilon } => {
            if !(epsilon > 0.0) {
                return Err(Error::Precondition(format!("ε must be positive, got {epsilon}")));
            }
            let range = 2 * u64::from(table.radius());
            (almost_constant_ln(sigma, r, epsilon, range), r + epsilon, norm(a, &l1.with_r(r + epsilon))?)
        }
    };
    let ab = a.convolve(b)?;
    let ba = b.convolve(a)?;
    let scale = ln_c + a_point.ln() + b_dual.ln();
    let mut checked = 0;
    let mut violations = 0;
    let mut worst = f64::NEG_INFINITY;
    for prod in [&ab, &ba] {
        for (h, c) in prod.terms() {
            let len = table.word_length(h)?;
            let lhs = LogValue::from_ln(c.norm().ln());
            let rhs = LogValue::from_ln(scale + ln_weight(sigma, r_point, len));
            checked += 1;
            worst = worst.max(lhs.ln() - rhs.ln());
            if !lhs.le_within(rhs, INEQUALITY_TOLERANCE) {
                violations += 1;
            }
        }
    }
    let unit_rhs = a_r * b_dual;
    let unit_coefficient = [
        Inequality::new(LogValue::from_f64(ab.trace().norm()), unit_rhs),
        Inequality::new(LogValue::from_f64(ba.trace().norm()), unit_rhs),
    ];
    let sup_norm_bounds = match mode {
        BimoduleMode::Sub => {
            Some([Inequality::new(norm(&ab, &dual)?, unit_rhs), Inequality::new(norm(&ba, &dual)?, unit_rhs)])
        }
        BimoduleMode::AlmostSub { .. } => None,
    };
    let s_dual = norm(&b.antipode(), &dual)?;
    Ok(BimoduleReport {
        mode,
        r,
        ln_c,
        pointwise_checked: checked,
        pointwise_violations: violations,
        worst_ln_ratio: worst,
        unit_coefficient,
        sup_norm_bounds,
        antipode: (s_dual, b_dual),
        antipode_isometric: s_dual.rel_diff(b_dual) <= crate::EQUALITY_TOLERANCE,
    })
}

/// Finite version of the c₀ sub-bimodule argument for a given `ε`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct C0Report {
    pub epsilon: f64,
    /// `|K|`: elements with `|b_g|/σ(L(g))^R >= ε`.
    pub k_size: usize,
    /// `|K̃|`: smallest head of `a` whose weighted ℓ¹ tail is `< ε`.
    pub k_tilde_size: usize,
    /// `|K′|` for `ab` and `ba`.
    pub k_prime_size: [usize; 2],
    /// Largest profile value of `ab` and `ba` outside `K′`.
    pub outside_max: [LogValue; 2],
    /// `ε (‖b‖_{∞,-R} + ‖a‖_R)`.
    pub bound: LogValue,
    pub holds: bool,
}

/// Builds the sets `K`, `K̃`, `K′` from the c₀ sub-bimodule argument and checks
/// that the profile of `ab` and `ba` stays below the bound off `K′`.
pub fn check_c0_sub_bimodule(
    a: &AlgebraElement,
    b: &AlgebraElement,
    sigma: &GrowthFunction,
    r: f64,
    epsilon: f64,
    table: &LengthTable,
) -> Result<C0Report> {
    require_submultiplicative(sigma, table)?;
    if !(epsilon > 0.0) {
        return Err(Error::Precondition(format!("ε must be positive, got {epsilon}")));
    }
    let fam = a.family();
    let ln_eps = epsilon.ln();
    let mut k_set = Vec::new();
    for (g, c) in b.terms() {
        let v = c.norm().ln() + ln_weight(sigma, -r, table.word_length(g)?);
        if v >= ln_eps {
            k_set.push(g.clone());
        }
    }
    let mut weighted: Vec<(f64, &crate::group::Element)> = a
        .terms()
        .map(|(g, c)| Ok((c.norm().ln() + ln_weight(sigma, r, table.word_length(g)?), g)))
        .collect::<Result<_>>()?;
    weighted.sort_by(|x, y| y.0.total_cmp(&x.0).then_with(|| x.1.cmp(y.1)));
    // smallest head whose complement has weighted sum < ε
    let mut head = weighted.len();
    while head > 0 {
        let tail = LogValue::sum_ln(weighted[head - 1..].iter().map(|t| t.0));
        if tail.ln() < ln_eps {
            head -= 1;
        } else {
            break;
        }
    }
    let k_tilde: Vec<&crate::group::Element> = weighted[..head].iter().map(|t| t.1).collect();
    let mut k_prime_ab = std::collections::BTreeSet::new();
    let mut k_prime_ba = std::collections::BTreeSet::new();
    for g in &k_tilde {
        for k in &k_set {
            k_prime_ab.insert(fam.mul_unchecked(g, k));
            k_prime_ba.insert(fam.mul_unchecked(k, g));
        }
    }
    let ab = a.convolve(b)?;
    let ba = b.convolve(a)?;
    let mut outside = [LogValue::Zero; 2];
    for (i, (prod, kp)) in [(&ab, &k_prime_ab), (&ba, &k_prime_ba)].into_iter().enumerate() {
        for (h, c) in prod.terms() {
            if kp.contains(h) {
                continue;
            }
            let v = LogValue::from_ln(c.norm().ln() + ln_weight(sigma, -r, table.word_length(h)?));
            outside[i] = outside[i].max(v);
        }
    }
    let bound = LogValue::from_f64(epsilon)
        * (norm(b, &NormSpec::sup(sigma, -r, table))? + norm(a, &NormSpec::l1(sigma, r, table))?);
    let holds = outside.iter().all(|v| v.le_within(bound, INEQUALITY_TOLERANCE));
    Ok(C0Report {
        epsilon,
        k_size: k_set.len(),
        k_tilde_size: k_tilde.len(),
        k_prime_size: [k_prime_ab.len(), k_prime_ba.len()],
        outside_max: outside,
        bound,
        holds,
    })
}
