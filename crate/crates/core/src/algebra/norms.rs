use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{AlgebraElement, ProductAlgebraElement};
use crate::group::{GroupFamily, LengthTable};
use crate::growth::GrowthFunction;
use crate::{Error, LogValue, Result};

/// Summation exponent of a weighted norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub const ONE: Exponent = Exponent::Finite(1.0);

    pub fn validate(self) -> Result<Self> {
        match self {
            Exponent::Finite(p) if !(p >= 1.0 && p.is_finite()) => {
                Err(Error::InvalidSpec(format!("norm exponent must be >= 1 or inf, got {p}")))
            }
            e => Ok(e),
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => write!(f, "inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Exponent::Infinity),
            t => t
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad norm exponent {s:?}")))
                .and_then(|p| Exponent::Finite(p).validate()),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// `‖a‖_{ℓ^p, L, σ, R}` with the word length taken from `table`.
///
/// For finite `p` this is `(Σ (|a_g| σ(L(g))^R)^p)^{1/p}`, for `p = ∞` the
/// supremum of `|a_g| σ(L(g))^R`. `R` may be negative.
#[derive(Clone, Copy, Debug)]
pub struct NormSpec<'a> {
    pub p: Exponent,
    pub sigma: &'a GrowthFunction,
    pub r: f64,
    pub table: &'a LengthTable,
}

impl<'a> NormSpec<'a> {
    pub fn l1(sigma: &'a GrowthFunction, r: f64, table: &'a LengthTable) -> Self {
        NormSpec { p: Exponent::ONE, sigma, r, table }
    }

    pub fn sup(sigma: &'a GrowthFunction, r: f64, table: &'a LengthTable) -> Self {
        NormSpec { p: Exponent::Infinity, sigma, r, table }
    }

    pub fn with_r(self, r: f64) -> Self {
        NormSpec { r, ..self }
    }

    pub fn with_p(self, p: Exponent) -> Self {
        NormSpec { p, ..self }
    }

    /// `R·ln σ(L(g))`.
    pub fn ln_weight(&self, g: &crate::group::Element) -> Result<f64> {
        let len = self.table.word_length(g)?;
        Ok(ln_weight(self.sigma, self.r, len))
    }

    fn check_family(&self, family: &GroupFamily) -> Result<()> {
        let own = self.table.spec().family();
        if own == family {
            Ok(())
        } else {
            Err(Error::SpecMismatch { left: own.to_string(), right: family.to_string() })
        }
    }
}

pub(crate) fn ln_weight(sigma: &GrowthFunction, r: f64, len: u32) -> f64 {
    if r == 0.0 {
        0.0
    } else {
        r * sigma.ln_value(u64::from(len))
    }
}

/// Per-term `ln(|a_g| σ(L(g))^R)`.
fn ln_terms(a: &AlgebraElement, spec: &NormSpec<'_>) -> Result<Vec<f64>> {
    spec.check_family(a.family())?;
    a.terms().map(|(g, c)| Ok(c.norm().ln() + spec.ln_weight(g)?)).collect()
}

pub fn norm(a: &AlgebraElement, spec: &NormSpec<'_>) -> Result<LogValue> {
    let terms = ln_terms(a, spec)?;
    Ok(match spec.p.validate()? {
        Exponent::Infinity => LogValue::from_ln(terms.into_iter().fold(f64::NEG_INFINITY, f64::max)),
        Exponent::Finite(1.0) => LogValue::sum_ln(terms),
        Exponent::Finite(p) => LogValue::sum_ln(terms.into_iter().map(|t| p * t)).powf(1.0 / p),
    })
}

/// Weighted ℓ¹ norm on `G×G` with the product weight
/// `σ(L(g))^R σ(L(h))^R`.
pub fn tensor_norm(x: &ProductAlgebraElement, sigma: &GrowthFunction, r: f64, table: &LengthTable) -> Result<LogValue> {
    let spec = NormSpec::l1(sigma, r, table);
    spec.check_family(x.family())?;
    let terms: Result<Vec<f64>> =
        x.terms().map(|((g, h), c)| Ok(c.norm().ln() + spec.ln_weight(g)? + spec.ln_weight(h)?)).collect();
    Ok(LogValue::sum_ln(terms?))
}

/// Per-shell `sup_{L(g)=n} |b_g| / σ(L(g))^R` for `n = 0..=radius`.
pub fn c0_tail_profile(b: &AlgebraElement, sigma: &GrowthFunction, r: f64, table: &LengthTable) -> Result<Vec<LogValue>> {
    let spec = NormSpec::sup(sigma, -r, table);
    spec.check_family(b.family())?;
    let mut profile = vec![LogValue::Zero; table.radius() as usize + 1];
    for (g, c) in b.terms() {
        let len = table.word_length(g)?;
        let v = LogValue::from_ln(c.norm().ln() + ln_weight(sigma, -r, len));
        profile[len as usize] = profile[len as usize].max(v);
    }
    Ok(profile)
}

/// `n,value` rows of a per-shell profile.
pub fn profile_csv(profile: &[LogValue]) -> String {
    let mut out = String::from("n,value,ln_value\n");
    for (n, v) in profile.iter().enumerate() {
        out.push_str(&format!("{n},{},{}\n", v.to_f64(), v.ln()));
    }
    out
}
