//! Summability diagnostics: the Grothendieck–Pietsch test for nuclearity, the
//! surface/volume comparison, the ℓ¹/ℓ^∞ sandwich and the complete growth
//! series.
//!
//! Summability cannot be decided from finitely many terms. The operational
//! criterion is a ratio test over the last quarter of the tabulated range:
//! every ratio below `1 - δ` counts as evidence of summability, every ratio
//! above `1 + δ` as evidence of divergence.

use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{norm, AlgebraElement, NormSpec};
use crate::group::{GrowthClass, GrowthCounts, LengthTable};
use crate::growth::{compare_group_class, search_witness, Comparison, GrowthFunction, GrowthWitness, SampledGrowth};
use crate::{Error, LogValue, Result, INEQUALITY_TOLERANCE};

pub const DEFAULT_DELTA: f64 = 0.05;

/// Witness caps for comparisons against sampled growth counts.
pub const DEFAULT_GROUP_CAPS: (u32, u32) = (2, 4);

/// `{0.5, 1.0, …, 8.0}`.
pub fn default_grid() -> Vec<f64> {
    (1..=16).map(|i| f64::from(i) * 0.5).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Evidence {
    SummableEvidence,
    DivergentEvidence,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SymbolicVerdict {
    Nuclear,
    NotNuclear,
}

impl SymbolicVerdict {
    pub fn from_class(class: GrowthClass, sigma: &GrowthFunction) -> Option<Self> {
        match compare_group_class(class, sigma) {
            Comparison::Precedes | Comparison::Equivalent => Some(SymbolicVerdict::Nuclear),
            Comparison::Succeeds => Some(SymbolicVerdict::NotNuclear),
            Comparison::Unknown => None,
        }
    }

    /// Whether an empirical verdict contradicts this one.
    pub fn contradicts(self, evidence: Evidence) -> bool {
        matches!(
            (self, evidence),
            (SymbolicVerdict::Nuclear, Evidence::DivergentEvidence)
                | (SymbolicVerdict::NotNuclear, Evidence::SummableEvidence)
        )
    }
}

fn check_range(counts: &GrowthCounts, n: u32) -> Result<()> {
    if n > counts.radius() {
        Err(Error::OutOfBall(format!("radius {n} exceeds tabulated radius {}", counts.radius())))
    } else {
        Ok(())
    }
}

fn ln_count(c: u128) -> f64 {
    if c == 0 {
        f64::NEG_INFINITY
    } else {
        (c as f64).ln()
    }
}

/// `ln(|z|^n σ_G(n) / σ(n)^ρ)` for `n = 0..=n_max`.
fn ln_terms(counts: &GrowthCounts, sigma: &GrowthFunction, rho: f64, z_abs: f64, n_max: u32) -> Vec<f64> {
    let ln_z = z_abs.ln();
    (0..=n_max)
        .map(|n| {
            let zn = if n == 0 { 0.0 } else { f64::from(n) * ln_z };
            ln_count(counts.sigma()[n as usize]) + zn - rho * sigma.ln_value(u64::from(n))
        })
        .collect()
}

fn cumulative(ln_terms: &[f64]) -> Vec<f64> {
    ln_terms
        .iter()
        .scan(0.0f64, |acc, t| {
            *acc += t.exp();
            Some(*acc)
        })
        .collect()
}

/// `r_n = term(n+1) / term(n)` for `n = 0..n_max`; zero where a term vanishes.
fn ratios(ln_terms: &[f64]) -> Vec<f64> {
    ln_terms
        .windows(2)
        .map(|w| if w[0] == f64::NEG_INFINITY || w[1] == f64::NEG_INFINITY { 0.0 } else { (w[1] - w[0]).exp() })
        .collect()
}

/// Ratio test on the last quarter of `ratios`.
pub fn ratio_verdict(ratios: &[f64], delta: f64) -> Evidence {
    if ratios.is_empty() {
        return Evidence::Inconclusive;
    }
    let window = ratios.len().div_ceil(4);
    let tail = &ratios[ratios.len() - window..];
    if tail.iter().all(|r| *r < 1.0 - delta) {
        Evidence::SummableEvidence
    } else if tail.iter().all(|r| *r > 1.0 + delta) {
        Evidence::DivergentEvidence
    } else {
        Evidence::Inconclusive
    }
}

/// Summable if any grid point is, divergent if all are.
pub fn aggregate(per_point: &[Evidence]) -> Evidence {
    if per_point.contains(&Evidence::SummableEvidence) {
        Evidence::SummableEvidence
    } else if !per_point.is_empty() && per_point.iter().all(|e| *e == Evidence::DivergentEvidence) {
        Evidence::DivergentEvidence
    } else {
        Evidence::Inconclusive
    }
}

// ---------------------------------------------------------------------------
// Grothendieck–Pietsch

/// `S_n(ρ) = Σ_{m<=n} σ_G(m) / σ(m)^ρ` for `n = 0..=n_max`.
pub fn gp_partial_sums(counts: &GrowthCounts, sigma: &GrowthFunction, rho: f64, n_max: u32) -> Result<Vec<f64>> {
    check_range(counts, n_max)?;
    Ok(cumulative(&ln_terms(counts, sigma, rho, 1.0, n_max)))
}

/// `r_n = (σ_G(n+1)/σ_G(n))·(σ(n)/σ(n+1))^ρ` for `n = 0..n_max`.
pub fn gp_ratios(counts: &GrowthCounts, sigma: &GrowthFunction, rho: f64, n_max: u32) -> Result<Vec<f64>> {
    check_range(counts, n_max)?;
    Ok(ratios(&ln_terms(counts, sigma, rho, 1.0, n_max)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GPReport {
    pub group: String,
    pub generators: Vec<String>,
    pub sigma: String,
    #[serde(rename = "N")]
    pub n: u32,
    pub grid: Vec<f64>,
    pub delta: f64,
    pub partial_sums: Vec<Vec<f64>>,
    pub ratios: Vec<Vec<f64>>,
    pub per_point: Vec<Evidence>,
    pub verdict: Evidence,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symbolic_verdict: Option<SymbolicVerdict>,
    /// Known growth class of the group family, a standard fact rather than a
    /// computed quantity.
    pub growth_class: GrowthClass,
    /// `(k, n_k)` with `σ_G(n_k) > σ(n_k)^k` inside the range, for `k = 1..=8`.
    pub divergence_indices: Vec<(u32, u32)>,
}

impl GPReport {
    pub fn consistent(&self) -> bool {
        self.symbolic_verdict.is_none_or(|s| !s.contradicts(self.verdict))
    }

    /// `n` followed by one partial-sum column per grid point.
    pub fn partial_sums_csv(&self) -> String {
        series_csv(&self.grid, &self.partial_sums, "rho")
    }
}

fn series_csv(grid: &[f64], series: &[Vec<f64>], name: &str) -> String {
    let mut out = String::from("n");
    for g in grid {
        out.push_str(&format!(",{name}={g}"));
    }
    out.push('\n');
    let len = series.first().map_or(0, Vec::len);
    for n in 0..len {
        out.push_str(&n.to_string());
        for s in series {
            out.push_str(&format!(",{}", s[n]));
        }
        out.push('\n');
    }
    out
}

pub fn gp_verdict(counts: &GrowthCounts, sigma: &GrowthFunction, grid: &[f64], n_max: u32, delta: f64) -> Result<GPReport> {
    check_range(counts, n_max)?;
    let per: Vec<(Vec<f64>, Vec<f64>)> = grid
        .par_iter()
        .map(|&rho| {
            let t = ln_terms(counts, sigma, rho, 1.0, n_max);
            (cumulative(&t), ratios(&t))
        })
        .collect();
    let (partial_sums, ratio_rows): (Vec<_>, Vec<_>) = per.into_iter().unzip();
    let per_point: Vec<Evidence> = ratio_rows.iter().map(|r| ratio_verdict(r, delta)).collect();
    let mut divergence_indices = Vec::new();
    for k in 1..=8u32 {
        let hit = (0..=n_max).find(|&n| {
            ln_count(counts.sigma()[n as usize]) > f64::from(k) * sigma.ln_value(u64::from(n)) + 1e-12
        });
        if let Some(n) = hit {
            divergence_indices.push((k, n));
        }
    }
    Ok(GPReport {
        group: counts.label().to_string(),
        generators: counts.generators().to_vec(),
        sigma: sigma.to_string(),
        n: n_max,
        grid: grid.to_vec(),
        delta,
        partial_sums,
        ratios: ratio_rows,
        verdict: aggregate(&per_point),
        per_point,
        symbolic_verdict: SymbolicVerdict::from_class(counts.growth_class(), sigma),
        growth_class: counts.growth_class(),
        divergence_indices,
    })
}

// ---------------------------------------------------------------------------
// Surface versus volume growth

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SurfaceVolumeReport {
    pub group: String,
    pub sigma: String,
    #[serde(rename = "N")]
    pub n: u32,
    pub caps: (u32, u32),
    pub surface_witness: Option<GrowthWitness>,
    pub volume_witness: Option<GrowthWitness>,
    /// With a surface witness `(c, k)`: whether `β_G(n) <= c(1+n)σ(cn)^k`
    /// holds on the range.
    pub volume_bound_from_surface: Option<bool>,
}

impl SurfaceVolumeReport {
    /// A volume witness always gives a surface witness, and a surface witness
    /// always gives the summed volume bound.
    pub fn consistent(&self) -> bool {
        let forward = self.volume_witness.is_none() || self.surface_witness.is_some();
        let backward = self.volume_bound_from_surface != Some(false);
        forward && backward
    }
}

pub fn surface_vs_volume(counts: &GrowthCounts, sigma: &GrowthFunction, caps: (u32, u32)) -> Result<SurfaceVolumeReport> {
    let n = counts.radius();
    if n < 4 {
        return Err(Error::Precondition(format!("surface/volume comparison needs radius >= 4, got {n}")));
    }
    let surface = SampledGrowth::surface(counts);
    let volume = SampledGrowth::volume(counts);
    let surface_witness = search_witness(&surface, sigma, caps.0, caps.1, u64::from(n));
    let volume_witness = search_witness(&volume, sigma, caps.0, caps.1, u64::from(n));
    let volume_bound_from_surface = surface_witness.map(|w| {
        let ln_c = f64::from(w.c()).ln();
        (0..=n).all(|m| {
            let lhs = ln_count(counts.beta()[m as usize]);
            let rhs = ln_c
                + f64::from(m + 1).ln()
                + f64::from(w.k()) * sigma.ln_value(u64::from(w.c()) * u64::from(m));
            lhs <= rhs + 1e-12 * rhs.abs().max(1.0)
        })
    });
    Ok(SurfaceVolumeReport {
        group: counts.label().to_string(),
        sigma: sigma.to_string(),
        n,
        caps,
        surface_witness,
        volume_witness,
        volume_bound_from_surface,
    })
}

// ---------------------------------------------------------------------------
// ℓ¹ versus ℓ^∞ sandwich

/// `c = Σ_n σ_G(n) σ(n)^{-ρ}` truncated at the radius, plus a geometric tail
/// bound from the largest ratio on the last quarter of the range.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SandwichConstant {
    pub rho: f64,
    pub truncated: f64,
    /// `None` when the tail ratios do not stay below one.
    pub tail_bound: Option<f64>,
    pub evidence: Evidence,
}

impl SandwichConstant {
    pub fn total(&self) -> Option<f64> {
        self.tail_bound.map(|t| self.truncated + t)
    }
}

pub fn sandwich_constant(counts: &GrowthCounts, sigma: &GrowthFunction, rho: f64, delta: f64) -> SandwichConstant {
    let n_max = counts.radius();
    let t = ln_terms(counts, sigma, rho, 1.0, n_max);
    let r = ratios(&t);
    let evidence = ratio_verdict(&r, delta);
    let window = r.len().div_ceil(4);
    let q = r[r.len() - window..].iter().copied().fold(0.0, f64::max);
    let last = t[n_max as usize].exp();
    let tail_bound = (evidence == Evidence::SummableEvidence).then(|| last * q / (1.0 - q));
    SandwichConstant { rho, truncated: cumulative(&t)[n_max as usize], tail_bound, evidence }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SandwichReport {
    pub r: f64,
    pub r_prime: f64,
    pub constant: SandwichConstant,
    pub samples: usize,
    /// Largest `‖a‖_R / (c ‖a‖_{∞,R′})` over the samples.
    pub worst_ratio: f64,
}

/// Smallest grid `R′ > R` whose candidate constant is finite and satisfies
/// `‖a‖_{L,σ,R} <= c ‖a‖_{ℓ∞,L,σ,R′}` on every sample.
pub fn norm_sandwich(
    table: &LengthTable,
    counts: &GrowthCounts,
    sigma: &GrowthFunction,
    r: f64,
    samples: &[AlgebraElement],
    grid: &[f64],
    delta: f64,
) -> Result<Option<SandwichReport>> {
    for &r_prime in grid.iter().filter(|&&x| x > r) {
        let constant = sandwich_constant(counts, sigma, r_prime - r, delta);
        let Some(c) = constant.total() else { continue };
        let ln_c = c.ln();
        let mut worst = f64::NEG_INFINITY;
        let mut ok = true;
        for a in samples {
            let lhs = norm(a, &NormSpec::l1(sigma, r, table))?;
            let rhs = LogValue::from_ln(ln_c) * norm(a, &NormSpec::sup(sigma, r_prime, table))?;
            if !lhs.is_zero() {
                worst = worst.max((lhs.ln() - rhs.ln()).exp());
            }
            ok &= lhs.le_within(rhs, INEQUALITY_TOLERANCE);
        }
        if ok {
            return Ok(Some(SandwichReport { r, r_prime, constant, samples: samples.len(), worst_ratio: worst.max(0.0) }));
        }
    }
    Ok(None)
}

// ---------------------------------------------------------------------------
// Complete growth

/// `Σ_{L(g)=n} e_g`.
pub fn complete_growth_shell(table: &LengthTable, n: u32) -> Result<AlgebraElement> {
    let one = num_complex::Complex64::new(1.0, 0.0);
    let shell = table.shell(n)?;
    AlgebraElement::from_terms(table.spec().family(), shell.iter().map(|g| (g.clone(), one)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompleteGrowthReport {
    pub group: String,
    pub generators: Vec<String>,
    pub sigma: String,
    #[serde(rename = "R")]
    pub r: f64,
    pub z_abs: f64,
    #[serde(rename = "N")]
    pub n: u32,
    /// `σ_G(n)`, the coefficient count of each shell.
    pub shells: Vec<u128>,
    /// `T_n = Σ_{m<=n} |z|^m σ_G(m) / σ(m)^R`.
    pub partial_sums: Vec<f64>,
    pub ratios: Vec<f64>,
    pub verdict: Evidence,
}

impl CompleteGrowthReport {
    pub fn tail(&self) -> f64 {
        *self.partial_sums.last().expect("range includes n = 0")
    }

    pub fn csv(&self) -> String {
        let mut out = String::from("n,shell,partial_sum\n");
        for (n, (s, t)) in self.shells.iter().zip(&self.partial_sums).enumerate() {
            out.push_str(&format!("{n},{s},{t}\n"));
        }
        out
    }
}

pub fn complete_growth_tail(
    counts: &GrowthCounts,
    sigma: &GrowthFunction,
    r: f64,
    z_abs: f64,
    n_max: u32,
    delta: f64,
) -> Result<CompleteGrowthReport> {
    check_range(counts, n_max)?;
    if !(0.0..=1.0).contains(&z_abs) {
        return Err(Error::Precondition(format!("complete growth needs |z| <= 1, got {z_abs}")));
    }
    let t = ln_terms(counts, sigma, r, z_abs, n_max);
    let rs = ratios(&t);
    Ok(CompleteGrowthReport {
        group: counts.label().to_string(),
        generators: counts.generators().to_vec(),
        sigma: sigma.to_string(),
        r,
        z_abs,
        n: n_max,
        shells: counts.sigma()[..=n_max as usize].to_vec(),
        partial_sums: cumulative(&t),
        verdict: ratio_verdict(&rs, delta),
        ratios: rs,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MinimalRReport {
    pub grid: Vec<f64>,
    pub verdicts: Vec<Evidence>,
    pub minimal: Option<f64>,
    /// Summable evidence at one grid point persists at every larger one.
    pub monotone: bool,
}

pub fn minimal_r(
    counts: &GrowthCounts,
    sigma: &GrowthFunction,
    z_abs: f64,
    grid: &[f64],
    n_max: u32,
    delta: f64,
) -> Result<MinimalRReport> {
    let mut grid = grid.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let verdicts = grid
        .par_iter()
        .map(|&r| complete_growth_tail(counts, sigma, r, z_abs, n_max, delta).map(|rep| rep.verdict))
        .collect::<Result<Vec<_>>>()?;
    let first = verdicts.iter().position(|v| *v == Evidence::SummableEvidence);
    let monotone = first.is_none_or(|i| verdicts[i..].iter().all(|v| *v == Evidence::SummableEvidence));
    Ok(MinimalRReport { minimal: first.map(|i| grid[i]), grid, verdicts, monotone })
}
