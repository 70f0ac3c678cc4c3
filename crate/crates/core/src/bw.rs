//! Recursive seminorms with factorial scaling `c(g) = (L(g)!)^ρ`.
//!
//! `h_{0,0,g}(a) = |a_g| c(g)`, and one level up
//! `h_{m+1,2ℓ,k}(a) = Σ_g h_{m,ℓ,g}(a)² c(k) / (c(g) c(g⁻¹k))` with
//! `h_{m+1,2ℓ+1,k} = h_{m+1,2ℓ,k⁻¹}`. The seminorm is `h^{1/2^m}`.
//!
//! Level indices run over `0..2^m`. Unwinding the recursion, `h_{m,ℓ,·}` only
//! needs the chain `ℓ >> (m-j)` at each lower level `j`, and the low bit at
//! level `j` says whether that level is evaluated at `k` or `k⁻¹`.
//!
//! From level two on the `g`-sum runs over all of `G`. It is truncated to the
//! ball of radius `N`, and every value carries an upper bound on what the
//! truncation dropped. The bound combines
//!
//! - per-length bounds `B_j(n) >= h_{j,·,g}` for `L(g) = n`, obtained from the
//!   same recursion with `c(k)/(c(g)c(g⁻¹k))` replaced by its maximum over the
//!   triangle inequality and the shell count replaced by an upper bound;
//! - the error already present in the lower level, `Σ (2ĥt + t²)·w`.
//!
//! The per-length series is summed up to a fixed length cap. If its last term
//! is not negligible the bound is reported as infinite.

use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::algebra::{norm, AlgebraElement, NormSpec};
use crate::group::{Element, GroupFamily, GrowthCounts, LengthTable};
use crate::growth::GrowthFunction;
use crate::sample::BallSampler;
use crate::{Error, LogValue, Result};

pub const MAX_DEPTH: u32 = 4;
pub const DEFAULT_TAIL_FRACTION: f64 = 1e-6;
/// Lengths summed in the per-length bound series.
pub const BOUND_LENGTH_CAP: u32 = 256;
/// Relative size of the last bound-series term above which the series is
/// treated as not converged.
const SERIES_CUTOFF: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BWConfig {
    pub rho: f64,
    pub m: u32,
    pub ell: u64,
    /// Radius `N` of the ball the `g`-sums run over.
    pub truncation: u32,
    /// Largest acceptable ratio of tail bound to truncated value.
    pub tail_fraction: f64,
    /// Skip the tail bounds. Truncated values are lower bounds of the true
    /// ones, which is all that lower-bound checks need.
    pub skip_tails: bool,
}

impl BWConfig {
    pub fn new(rho: f64, m: u32, ell: u64, truncation: u32) -> Result<Self> {
        let cfg = BWConfig { rho, m, ell, truncation, tail_fraction: DEFAULT_TAIL_FRACTION, skip_tails: false };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn without_tails(mut self) -> Self {
        self.skip_tails = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::Precondition(format!("ρ must be positive, got {}", self.rho)));
        }
        if self.m > MAX_DEPTH {
            return Err(Error::Precondition(format!("depth {} exceeds the cap {MAX_DEPTH}", self.m)));
        }
        if self.ell >= 1u64 << self.m {
            return Err(Error::Precondition(format!("index ℓ = {} must lie below 2^{}", self.ell, self.m)));
        }
        if !(self.tail_fraction > 0.0) {
            return Err(Error::Precondition(format!("tail fraction must be positive, got {}", self.tail_fraction)));
        }
        Ok(())
    }
}

/// `ln c(g) = ρ·ln(L(g)!)`.
pub fn scaling_log(table: &LengthTable, g: &Element, rho: f64) -> Result<LogValue> {
    let len = table.word_length(g)?;
    Ok(LogValue::Positive(rho * ln_factorial(len)))
}

fn ln_factorial(n: u32) -> f64 {
    if n <= 1 {
        0.0
    } else {
        ln_gamma(f64::from(n) + 1.0)
    }
}

fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        hi
    } else {
        hi + (lo - hi).exp().ln_1p()
    }
}

fn ln_sum(terms: impl IntoIterator<Item = f64>) -> f64 {
    LogValue::sum_ln(terms).ln()
}

/// A truncated value together with an upper bound on the truncation error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Bounded {
    pub value: LogValue,
    pub tail_bound: LogValue,
}

impl Bounded {
    pub fn upper(&self) -> LogValue {
        self.value + self.tail_bound
    }

    fn negligible(&self, fraction: f64) -> bool {
        match (self.value, self.tail_bound) {
            (_, LogValue::Zero) => true,
            (LogValue::Zero, _) => false,
            (LogValue::Positive(v), LogValue::Positive(t)) => t <= v + fraction.ln(),
        }
    }
}

/// Online log-sum-exp.
#[derive(Clone, Copy)]
struct Lse {
    max: f64,
    sum: f64,
}

impl Lse {
    const EMPTY: Lse = Lse { max: f64::NEG_INFINITY, sum: 0.0 };

    fn push(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x <= self.max {
            self.sum += (x - self.max).exp();
        } else {
            self.sum = if self.max == f64::NEG_INFINITY { 1.0 } else { self.sum * (self.max - x).exp() + 1.0 };
            self.max = x;
        }
    }

    fn ln(self) -> f64 {
        if self.max == f64::NEG_INFINITY || self.max == f64::INFINITY {
            self.max
        } else {
            self.max + self.sum.ln()
        }
    }
}

/// Balls with at most this many elements get a precomputed table of
/// `L(g⁻¹k)` for `g, k` in the ball.
const LENGTH_MATRIX_LIMIT: usize = 4096;

/// The truncation ball of a length table with everything the recursion
/// reuses across elements and configurations.
pub struct Truncation<'a> {
    table: &'a LengthTable,
    radius: u32,
    ball: Vec<&'a Element>,
    ball_inv: Vec<Element>,
    ball_len: Vec<u32>,
    index: std::collections::HashMap<&'a Element, usize>,
    inv_index: Vec<usize>,
    /// Row `i`, column `j`: `L(g_i⁻¹ g_j)`.
    lengths: Option<Vec<u32>>,
    ln_fact: Vec<f64>,
    ln_shell: Vec<f64>,
}

impl<'a> Truncation<'a> {
    pub fn new(table: &'a LengthTable, radius: u32) -> Result<Self> {
        if radius > table.radius() {
            return Err(Error::Precondition(format!(
                "truncation radius {radius} exceeds the table radius {}",
                table.radius()
            )));
        }
        let fam = table.spec().family();
        let mut ball = Vec::new();
        let mut ball_len = Vec::new();
        for n in 0..=radius {
            for g in table.shell(n)? {
                ball.push(g);
                ball_len.push(n);
            }
        }
        let ball_inv: Vec<Element> = ball.iter().map(|g| fam.inv_unchecked(g)).collect();
        let index: std::collections::HashMap<&Element, usize> = ball.iter().enumerate().map(|(i, g)| (*g, i)).collect();
        let inv_index = ball_inv.iter().map(|g| index[g]).collect();
        let lengths = if ball.len() <= LENGTH_MATRIX_LIMIT && 2 * radius <= table.radius() {
            let mut out = Vec::with_capacity(ball.len() * ball.len());
            for gi in &ball_inv {
                for k in &ball {
                    out.push(table.word_length(&fam.mul_unchecked(gi, k))?);
                }
            }
            Some(out)
        } else {
            None
        };
        let cap = BOUND_LENGTH_CAP.max(table.radius());
        let counts = GrowthCounts::from_table(table);
        Ok(Truncation {
            table,
            radius,
            ball,
            ball_inv,
            ball_len,
            index,
            inv_index,
            lengths,
            ln_fact: (0..=cap).map(ln_factorial).collect(),
            ln_shell: (0..=BOUND_LENGTH_CAP).map(|n| counts.ln_surface_bound(n)).collect(),
        })
    }

    pub fn table(&self) -> &'a LengthTable {
        self.table
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }
}

struct Level {
    /// `ln h` over the ball.
    h: Vec<f64>,
    /// `ln` of the truncation-error bound over the ball.
    t: Vec<f64>,
    /// `ln B(n)` for `n = 0..=BOUND_LENGTH_CAP`.
    bound: Vec<f64>,
}

/// A base point: an index into the ball, or an arbitrary table element.
#[derive(Clone, Copy)]
enum Target<'e> {
    Ball(usize),
    Other(&'e Element),
}

struct Chain<'a, 'g> {
    geo: &'g Truncation<'a>,
    cfg: &'g BWConfig,
    ln_c: Vec<f64>,
}

impl<'a, 'g> Chain<'a, 'g> {
    fn new(geo: &'g Truncation<'a>, cfg: &'g BWConfig) -> Result<Self> {
        cfg.validate()?;
        if cfg.truncation != geo.radius {
            return Err(Error::Precondition(format!(
                "configured truncation {} differs from the prepared ball radius {}",
                cfg.truncation, geo.radius
            )));
        }
        Ok(Chain { geo, cfg, ln_c: geo.ln_fact.iter().map(|f| cfg.rho * f).collect() })
    }

    fn ln_c(&self, len: u32) -> f64 {
        self.ln_c[len as usize]
    }

    /// Largest `ln(c(k)/(c(g)c(g⁻¹k)))` over `L(k) = big_k`, `L(g) = n`.
    fn ln_w_max(&self, big_k: u32, n: u32) -> f64 {
        self.ln_c(big_k) - self.ln_c(n) - self.ln_c(big_k.abs_diff(n))
    }

    fn bit(&self, level: u32) -> bool {
        (self.cfg.ell >> (self.cfg.m - level)) & 1 == 1
    }

    fn base(&self, a: &AlgebraElement) -> Result<Level> {
        let mut h = vec![f64::NEG_INFINITY; self.geo.ball.len()];
        let mut bound = vec![f64::NEG_INFINITY; BOUND_LENGTH_CAP as usize + 1];
        for (g, c) in a.terms() {
            let len = self.geo.table.word_length(g)?;
            let i = *self.geo.index.get(g).ok_or_else(|| {
                Error::Precondition(format!("support element {g} has length {len} beyond the truncation radius"))
            })?;
            h[i] = c.norm().ln() + self.ln_c(len);
            bound[len as usize] = bound[len as usize].max(h[i]);
        }
        Ok(Level { t: vec![f64::NEG_INFINITY; h.len()], h, bound })
    }

    /// Bound series `Σ_n shell(n) B(n)² w(K, n)` over `n` in `range`, or
    /// `+inf` when its last term is not negligible.
    fn bound_series(&self, prev: &Level, big_k: u32, range: std::ops::RangeInclusive<u32>) -> f64 {
        let mut acc = Lse::EMPTY;
        let mut last = f64::NEG_INFINITY;
        for n in range {
            let b = prev.bound[n as usize];
            last = if b == f64::NEG_INFINITY {
                f64::NEG_INFINITY
            } else {
                self.geo.ln_shell[n as usize] + 2.0 * b + self.ln_w_max(big_k, n)
            };
            acc.push(last);
        }
        let total = acc.ln();
        if last > total + SERIES_CUTOFF.ln() {
            f64::INFINITY
        } else {
            total
        }
    }

    /// Next-level value at `k` (already inverted if the index bit asks for it).
    fn point(&self, prev: &Level, k: Target<'_>) -> Result<(f64, f64)> {
        let geo = self.geo;
        let big_k = match k {
            Target::Ball(j) => geo.ball_len[j],
            Target::Other(k) => geo.table.word_length(k)?,
        };
        let ln_ck = self.ln_c(big_k);
        let b = geo.ball.len();
        let mut vals = Lse::EMPTY;
        let mut errs = Lse::EMPTY;
        for i in 0..b {
            let (h, t) = (prev.h[i], prev.t[i]);
            if h == f64::NEG_INFINITY && t == f64::NEG_INFINITY {
                continue;
            }
            let len = match (k, &geo.lengths) {
                (Target::Ball(j), Some(lens)) => lens[i * b + j],
                (Target::Ball(j), None) => self.product_length(i, geo.ball[j])?,
                (Target::Other(k), _) => self.product_length(i, k)?,
            };
            let lw = ln_ck - self.ln_c(geo.ball_len[i]) - self.ln_c(len);
            vals.push(2.0 * h + lw);
            if t > f64::NEG_INFINITY {
                // (h + t)² - h² = t(2h + t)
                errs.push(t + log_add(std::f64::consts::LN_2 + h, t) + lw);
            }
        }
        let value = vals.ln();
        if self.cfg.skip_tails {
            return Ok((value, f64::NEG_INFINITY));
        }
        let outside = if self.cfg.truncation < BOUND_LENGTH_CAP {
            self.bound_series(prev, big_k, self.cfg.truncation + 1..=BOUND_LENGTH_CAP)
        } else {
            f64::INFINITY
        };
        Ok((value, log_add(errs.ln(), outside)))
    }

    fn product_length(&self, i: usize, k: &Element) -> Result<u32> {
        let table = self.geo.table;
        let gk = table.spec().family().mul_unchecked(&self.geo.ball_inv[i], k);
        table
            .get(&gk)
            .ok_or_else(|| Error::OutOfBall(format!("{gk} (table radius {} too small for the g-sum)", table.radius())))
    }

    fn next_bounds(&self, prev: &Level) -> Vec<f64> {
        if self.cfg.skip_tails {
            return vec![f64::INFINITY; BOUND_LENGTH_CAP as usize + 1];
        }
        (0..=BOUND_LENGTH_CAP).map(|big_k| self.bound_series(prev, big_k, 0..=BOUND_LENGTH_CAP)).collect()
    }

    fn level_over_ball(&self, prev: &Level, level: u32) -> Result<Level> {
        let flip = self.bit(level);
        let pts: Vec<(f64, f64)> = (0..self.geo.ball.len())
            .into_par_iter()
            .map(|j| self.point(prev, Target::Ball(if flip { self.geo.inv_index[j] } else { j })))
            .collect::<Result<_>>()?;
        let (h, t) = pts.into_iter().unzip();
        Ok(Level { h, t, bound: self.next_bounds(prev) })
    }

    /// `h_{m,ℓ,k}` at each of `points`.
    fn evaluate(&self, a: &AlgebraElement, points: &[Element]) -> Result<Vec<Bounded>> {
        let geo = self.geo;
        let fam = geo.table.spec().family();
        for k in points {
            fam.check(k)?;
        }
        let m = self.cfg.m;
        let mut level = self.base(a)?;
        if m == 0 {
            return points
                .iter()
                .map(|k| {
                    let len = geo.table.word_length(k)?;
                    let ln = a.coefficient(k).norm().ln() + self.ln_c(len);
                    Ok(Bounded { value: LogValue::from_ln(ln), tail_bound: LogValue::Zero })
                })
                .collect();
        }
        for j in 1..m {
            level = self.level_over_ball(&level, j)?;
        }
        let flip = self.bit(m);
        points
            .par_iter()
            .map(|k| {
                let kk = if flip { fam.inv_unchecked(k) } else { k.clone() };
                let target = match geo.index.get(&kk) {
                    Some(&j) => Target::Ball(j),
                    None => Target::Other(&kk),
                };
                let (v, t) = self.point(&level, target)?;
                Ok(Bounded { value: LogValue::from_ln(v), tail_bound: LogValue::from_ln(t) })
            })
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Exact second level on free groups
//
// For a free group with its free basis, pick `P` longer than every support
// element and the base point. A word `g = p s q` with `L(p) = L(q) = P` has
// `L(x⁻¹g) = L(x⁻¹p) + L(s) + P` and `L(gx) = P + L(s) + L(qx)` for every
// `x` shorter than `P`, since cancellation stays inside `p` or `q`. Level-one
// values have closed form for finitely supported `a`, so the level-two sum
// splits into the short words plus, for every pair `(p, q)`, a series in
// `t = L(s)` weighted by the number of admissible middles.

fn letters(rank: u32) -> Vec<i32> {
    (1..=rank as i32).flat_map(|i| [i, -i]).collect()
}

fn words_of_length(rank: u32, len: u32) -> Vec<Vec<i32>> {
    let alphabet = letters(rank);
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        let mut next = Vec::with_capacity(out.len() * alphabet.len());
        for w in &out {
            for &x in &alphabet {
                if w.last() != Some(&-x) {
                    let mut v: Vec<i32> = w.clone();
                    v.push(x);
                    next.push(v);
                }
            }
        }
        out = next;
    }
    out
}

fn reduced_len(a: &[i32], b: &[i32]) -> u32 {
    let common = a.iter().rev().zip(b).take_while(|(x, y)| **x == -**y).count();
    (a.len() + b.len() - 2 * common) as u32
}

fn inv_word(w: &[i32]) -> Vec<i32> {
    w.iter().rev().map(|x| -x).collect()
}

fn inverse_slot(alphabet: &[i32], l: i32) -> usize {
    alphabet.iter().position(|&y| y == -l).expect("alphabet is closed under inverses")
}

/// Counts of reduced middles `s` of each length with `p s q` reduced, keyed
/// by the last letter of `p` and the first letter of `q`.
fn middle_counts(rank: u32, last: i32, first: i32, cap: u32) -> Vec<f64> {
    let alphabet = letters(rank);
    let mut out = vec![if first == -last { 0.0 } else { 1.0 }];
    let mut v: Vec<f64> = alphabet.iter().map(|&l| if l == -last { 0.0 } else { 1.0 }).collect();
    for t in 1..=cap {
        if t > 1 {
            let total: f64 = v.iter().sum();
            // a letter may follow anything but its own inverse
            v = alphabet.iter().map(|&l| total - v[inverse_slot(&alphabet, l)]).collect();
        }
        out.push(alphabet.iter().zip(&v).filter(|(l, _)| first != -**l).map(|(_, c)| c).sum());
    }
    out
}

fn free_exact_level2(a: &AlgebraElement, cfg: &BWConfig, rank: u32, k: &Element) -> Result<Bounded> {
    let word = |g: &Element| match g {
        Element::Word(w) => w.clone(),
        _ => unreachable!("free group elements are words"),
    };
    let supp: Vec<(Vec<i32>, f64)> = a
        .terms()
        .map(|(g, c)| {
            let w = word(g);
            let alpha = 2.0 * c.norm().ln() + cfg.rho * ln_factorial(w.len() as u32);
            (w, alpha)
        })
        .collect();
    let mut k2 = word(k);
    if cfg.ell & 1 == 1 {
        k2 = inv_word(&k2);
    }
    let flip = (cfg.ell >> 1) & 1 == 1;
    let k2_inv = inv_word(&k2);
    let big_k = k2.len() as u32;
    let p_len = 1 + supp.iter().map(|(w, _)| w.len() as u32).chain([big_k]).max().unwrap_or(0);
    let cap = BOUND_LENGTH_CAP;
    let ln_c: Vec<f64> = (0..=2 * p_len + cap + p_len).map(|n| cfg.rho * ln_factorial(n)).collect();
    let supp_inv: Vec<Vec<i32>> = supp.iter().map(|(w, _)| inv_word(w)).collect();

    // ln h_1 at a word of length `n` whose distance to each support element is given.
    let ln_h1 = |n: u32, dist: &dyn Fn(usize) -> u32| {
        ln_sum(supp.iter().enumerate().map(|(i, (_, alpha))| alpha + ln_c[n as usize] - ln_c[dist(i) as usize]))
    };

    let mut terms = Vec::new();
    for len in 0..2 * p_len {
        for g in words_of_length(rank, len) {
            let h = if flip {
                ln_h1(len, &|i| reduced_len(&g, &supp[i].0))
            } else {
                ln_h1(len, &|i| reduced_len(&supp_inv[i], &g))
            };
            terms.push(2.0 * h + ln_c[big_k as usize] - ln_c[len as usize] - ln_c[reduced_len(&k2_inv, &g) as usize]);
        }
    }

    let ends = words_of_length(rank, p_len);
    let mut counts = std::collections::HashMap::new();
    for x in letters(rank) {
        for y in letters(rank) {
            counts.insert((x, y), middle_counts(rank, x, y, cap).iter().map(|c| c.ln()).collect::<Vec<f64>>());
        }
    }
    // 2 ln h_1 along each cone, indexed by t; it depends on p or on q only.
    let h_side: Vec<Vec<f64>> = ends
        .iter()
        .map(|e| {
            let d: Vec<u32> = if flip {
                supp.iter().map(|(g, _)| reduced_len(e, g)).collect()
            } else {
                supp_inv.iter().map(|gi| reduced_len(gi, e)).collect()
            };
            (0..=cap).map(|t| 2.0 * ln_h1(2 * p_len + t, &|i| d[i] + t + p_len)).collect()
        })
        .collect();
    let mut remainders = Vec::new();
    for (pi, p) in ends.iter().enumerate() {
        let to_k = reduced_len(&k2_inv, p);
        let weight: Vec<f64> = (0..=cap)
            .map(|t| ln_c[big_k as usize] - ln_c[(2 * p_len + t) as usize] - ln_c[(to_k + t + p_len) as usize])
            .collect();
        for (qi, q) in ends.iter().enumerate() {
            let ln_count = &counts[&(*p.last().unwrap(), q[0])];
            let h = &h_side[if flip { qi } else { pi }];
            let mut prev = f64::NEG_INFINITY;
            let mut last = f64::NEG_INFINITY;
            for t in 0..=cap as usize {
                if ln_count[t] == f64::NEG_INFINITY {
                    continue;
                }
                let term = ln_count[t] + h[t] + weight[t];
                terms.push(term);
                prev = last;
                last = term;
            }
            // Terms decay faster than geometrically from here on; bound the
            // rest by the geometric series at the final ratio.
            if last > f64::NEG_INFINITY {
                let ratio = last - prev;
                remainders.push(if ratio < 0.0 { last + ratio - (-ratio.exp()).ln_1p() } else { f64::INFINITY });
            }
        }
    }
    Ok(Bounded { value: LogValue::sum_ln(terms), tail_bound: LogValue::sum_ln(remainders) })
}

/// Free groups at depth two are summed exactly unless only a lower bound is
/// asked for.
fn exact_free_rank(cfg: &BWConfig, table: &LengthTable) -> Option<u32> {
    match table.spec().family() {
        GroupFamily::Free { rank } if cfg.m == 2 && !cfg.skip_tails && table.spec().uses_default_generators() => {
            Some(*rank)
        }
        _ => None,
    }
}

/// `h_{m,ℓ,k}(a)` at each point, with tail bounds. Fails with
/// `TailNotNegligible` when a bound exceeds the configured fraction.
pub fn h_values(a: &AlgebraElement, cfg: &BWConfig, table: &LengthTable, points: &[Element]) -> Result<Vec<Bounded>> {
    if exact_free_rank(cfg, table).is_some() {
        // the exact route never touches the truncation ball
        cfg.validate()?;
        return exact_or_truncated(None, table, a, cfg, points);
    }
    let geo = Truncation::new(table, cfg.truncation)?;
    h_values_in(&geo, a, cfg, points)
}

/// As [`h_values`] on a prepared truncation ball, for repeated evaluation.
pub fn h_values_in(geo: &Truncation<'_>, a: &AlgebraElement, cfg: &BWConfig, points: &[Element]) -> Result<Vec<Bounded>> {
    exact_or_truncated(Some(geo), geo.table, a, cfg, points)
}

fn exact_or_truncated(
    geo: Option<&Truncation<'_>>,
    table: &LengthTable,
    a: &AlgebraElement,
    cfg: &BWConfig,
    points: &[Element],
) -> Result<Vec<Bounded>> {
    if a.family() != table.spec().family() {
        return Err(Error::SpecMismatch { left: table.spec().family().to_string(), right: a.family().to_string() });
    }
    let out = match (exact_free_rank(cfg, table), geo) {
        (Some(rank), _) => points
            .par_iter()
            .map(|k| {
                table.word_length(k)?;
                free_exact_level2(a, cfg, rank, k)
            })
            .collect::<Result<Vec<_>>>()?,
        (None, Some(geo)) => Chain::new(geo, cfg)?.evaluate(a, points)?,
        (None, None) => unreachable!("truncated evaluation always has a ball"),
    };
    if !cfg.skip_tails {
        for (k, b) in points.iter().zip(&out) {
            if !b.negligible(cfg.tail_fraction) {
                return Err(Error::TailNotNegligible {
                    at: format!("h_{{{},{},{}}}", cfg.m, cfg.ell, k),
                    ln_value: b.value.ln(),
                    ln_tail: b.tail_bound.ln(),
                    fraction: cfg.tail_fraction,
                });
            }
        }
    }
    Ok(out)
}

pub fn h_value(a: &AlgebraElement, cfg: &BWConfig, table: &LengthTable, k: &Element) -> Result<Bounded> {
    Ok(h_values(a, cfg, table, std::slice::from_ref(k))?[0])
}

/// `‖a‖_{m,ℓ,k} = h_{m,ℓ,k}(a)^{1/2^m}`; the tail bound applies to the root.
pub fn bw_seminorm(a: &AlgebraElement, cfg: &BWConfig, table: &LengthTable, k: &Element) -> Result<Bounded> {
    Ok(root(h_value(a, cfg, table, k)?, cfg.m))
}

fn root(h: Bounded, m: u32) -> Bounded {
    let p = 1.0 / f64::from(1u32 << m);
    let value = h.value.powf(p);
    let upper = h.upper().powf(p);
    let gap = match (value, upper) {
        (LogValue::Positive(v), LogValue::Positive(u)) if u > v => LogValue::from_ln(u + (-(v - u).exp_m1()).ln()),
        (LogValue::Zero, up) => up,
        _ => LogValue::Zero,
    };
    Bounded { value, tail_bound: gap }
}

/// Report in the CLI's JSON layout.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BWReport {
    pub rho: f64,
    pub m: u32,
    pub ell: u64,
    pub truncation: u32,
    pub points: Vec<String>,
    /// `h_{m,ℓ,k}` at each point.
    pub values: Vec<LogValue>,
    pub tail_bounds: Vec<LogValue>,
    /// `h^{1/2^m}` at each point.
    pub seminorms: Vec<LogValue>,
    pub fitted_constants: std::collections::BTreeMap<String, f64>,
}

pub fn bw_report(a: &AlgebraElement, cfg: &BWConfig, table: &LengthTable, points: &[Element]) -> Result<BWReport> {
    let hs = h_values(a, cfg, table, points)?;
    Ok(BWReport {
        rho: cfg.rho,
        m: cfg.m,
        ell: cfg.ell,
        truncation: cfg.truncation,
        points: points.iter().map(|k| k.to_string()).collect(),
        values: hs.iter().map(|b| b.value).collect(),
        tail_bounds: hs.iter().map(|b| b.tail_bound).collect(),
        seminorms: hs.iter().map(|b| root(*b, cfg.m).value).collect(),
        fitted_constants: Default::default(),
    })
}

// ---------------------------------------------------------------------------
// Comparison with the factorial-weighted ℓ¹ norms

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointwiseReport {
    pub rho: f64,
    pub m: u32,
    pub checked: usize,
    pub violations: usize,
    /// Largest `ln(|a_g| / rhs)`; `<= 0` when every check passes.
    pub worst_ln_ratio: f64,
}

/// `|a_g| <= (L(g)!)^{ρ(2^{-m}-1)} ‖a‖_{m+1,0,e}` for every `g` in the support.
/// Uses the truncated seminorm, a lower bound of the true one, so a pass is
/// conclusive.
pub fn check_pointwise(a: &AlgebraElement, rho: f64, m: u32, table: &LengthTable, truncation: u32) -> Result<PointwiseReport> {
    check_pointwise_in(&Truncation::new(table, truncation)?, a, rho, m)
}

pub fn check_pointwise_in(geo: &Truncation<'_>, a: &AlgebraElement, rho: f64, m: u32) -> Result<PointwiseReport> {
    let table = geo.table;
    let cfg = BWConfig::new(rho, m + 1, 0, geo.radius)?.without_tails();
    let e = table.spec().identity();
    let h = h_values_in(geo, a, &cfg, std::slice::from_ref(&e))?[0];
    let ln_norm = h.value.ln() / f64::from(1u32 << (m + 1));
    let expo = rho * (1.0 / f64::from(1u32 << m) - 1.0);
    let mut worst = f64::NEG_INFINITY;
    let mut violations = 0;
    for (g, c) in a.terms() {
        let rhs = expo * ln_factorial(table.word_length(g)?) + ln_norm;
        let lhs = c.norm().ln();
        worst = worst.max(lhs - rhs);
        if !LogValue::from_ln(lhs).le_within(LogValue::from_ln(rhs), crate::INEQUALITY_TOLERANCE) {
            violations += 1;
        }
    }
    Ok(PointwiseReport { rho, m, checked: a.len(), violations, worst_ln_ratio: worst })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonConfig {
    pub rho: f64,
    pub m: u32,
    /// `R < ρ` for the ℓ¹ side of the second estimate.
    pub r: f64,
    /// `0 < ε < 4^{-m} ρ` for the third estimate.
    pub epsilon: f64,
    pub ell: u64,
    pub truncation: u32,
    /// Base points for the third estimate are taken from this ball. Points
    /// near the truncation radius have large tails.
    pub point_radius: u32,
    pub samples: usize,
    pub sample_radius: u32,
    pub max_support: usize,
    pub seed: u64,
}

impl ComparisonConfig {
    pub fn new(rho: f64, m: u32, truncation: u32) -> Self {
        ComparisonConfig {
            rho,
            m,
            r: rho / 2.0,
            epsilon: rho * 0.5f64.powi(2 * m as i32 + 1),
            ell: 0,
            truncation,
            point_radius: truncation / 4,
            samples: 64,
            sample_radius: 3,
            max_support: 4,
            seed: crate::sample::DEFAULT_SEED,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FittedConstant {
    pub samples: usize,
    pub ln_c: f64,
    /// Same fit on twice as many samples.
    pub ln_c_doubled: f64,
    /// `|c_doubled / c - 1|`.
    pub relative_change: f64,
    pub stable: bool,
}

impl FittedConstant {
    fn new(samples: usize, ln_c: f64, ln_c_doubled: f64) -> Self {
        let relative_change = (ln_c_doubled - ln_c).exp_m1().abs();
        FittedConstant { samples, ln_c, ln_c_doubled, relative_change, stable: relative_change < 0.05 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub config: ComparisonConfig,
    pub pointwise: PointwiseReport,
    /// `‖a‖_{L,n!,R} <= c ‖a‖_{m,0,e}`.
    pub second: FittedConstant,
    /// `h_{m,ℓ,k}(a) <= c (L(k)!)^{4^m ε} ‖a‖_{L,n!,ρ-ε}^{2^m}`.
    pub third: FittedConstant,
    /// Whether `m` is large enough for the second estimate, that is
    /// `R < ρ(1 - 2^{1-m})`. Below that the fitted constant need not settle.
    pub second_applies: bool,
    pub max_tail_fraction: f64,
}

impl ComparisonReport {
    pub fn holds(&self) -> bool {
        self.pointwise.violations == 0 && (self.second.stable || !self.second_applies) && self.third.stable
    }
}

/// `R < ρ(1 - 2^{1-m})`: the exponent `R - ρ(1 - 2^{1-m})` the first estimate
/// leaves on `L(g)!` is negative.
pub fn second_estimate_applies(rho: f64, m: u32, r: f64) -> bool {
    m >= 1 && r < rho * (1.0 - 2f64.powi(1 - m as i32))
}

/// One sample's contribution to a fitted constant: the largest `ln` ratio
/// and the largest tail fraction among its evaluations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SampleFit {
    pub ln_ratio: f64,
    pub tail_fraction: f64,
}

/// Maximum over a prefix of per-sample fits.
pub fn fold_fits(fits: &[SampleFit]) -> SampleFit {
    fits.iter().fold(SampleFit { ln_ratio: f64::NEG_INFINITY, tail_fraction: 0.0 }, |acc, f| SampleFit {
        ln_ratio: acc.ln_ratio.max(f.ln_ratio),
        tail_fraction: acc.tail_fraction.max(f.tail_fraction),
    })
}

/// `ln(‖a‖_{L,n!,R} / ‖a‖_{m,0,e})` per sample.
pub fn fit_second(geo: &Truncation<'_>, samples: &[AlgebraElement], rho: f64, m: u32, r: f64) -> Result<Vec<SampleFit>> {
    if !(r < rho) {
        return Err(Error::Precondition(format!("second estimate needs R < ρ, got R = {r}, ρ = {rho}")));
    }
    let table = geo.table;
    let cfg = BWConfig::new(rho, m, 0, geo.radius)?;
    let fact = GrowthFunction::Factorial;
    let e = table.spec().identity();
    samples
        .iter()
        .map(|a| {
            let h = h_values_in(geo, a, &cfg, std::slice::from_ref(&e))?[0];
            let lhs = norm(a, &NormSpec::l1(&fact, r, table))?;
            Ok(SampleFit { ln_ratio: lhs.ln() - h.value.ln() / f64::from(1u32 << m), tail_fraction: tail_fraction(&h) })
        })
        .collect()
}

/// `max_k ln(h_{m,ℓ,k}(a) (L(k)!)^{-4^m ε} ‖a‖_{L,n!,ρ-ε}^{-2^m})` per sample.
pub fn fit_third(
    geo: &Truncation<'_>,
    samples: &[AlgebraElement],
    rho: f64,
    m: u32,
    ell: u64,
    epsilon: f64,
    points: &[Element],
) -> Result<Vec<SampleFit>> {
    let limit = rho / 4f64.powi(m as i32);
    if !(epsilon > 0.0 && epsilon < limit) {
        return Err(Error::Precondition(format!("third estimate needs 0 < ε < 4^-m ρ = {limit}, got {epsilon}")));
    }
    let table = geo.table;
    let cfg = BWConfig::new(rho, m, ell, geo.radius)?;
    let fact = GrowthFunction::Factorial;
    let scale = 4f64.powi(m as i32) * epsilon;
    let point_scale: Vec<f64> =
        points.iter().map(|k| Ok(scale * ln_factorial(table.word_length(k)?))).collect::<Result<_>>()?;
    samples
        .iter()
        .map(|a| {
            let hs = h_values_in(geo, a, &cfg, points)?;
            let ln_norm = norm(a, &NormSpec::l1(&fact, rho - epsilon, table))?.ln() * f64::from(1u32 << m);
            let fits: Vec<SampleFit> = hs
                .iter()
                .zip(&point_scale)
                .map(|(h, ps)| SampleFit { ln_ratio: h.value.ln() - ps - ln_norm, tail_fraction: tail_fraction(h) })
                .collect();
            Ok(fold_fits(&fits))
        })
        .collect()
}

fn tail_fraction(h: &Bounded) -> f64 {
    match (h.value, h.tail_bound) {
        (_, LogValue::Zero) => 0.0,
        (LogValue::Zero, _) => f64::INFINITY,
        (LogValue::Positive(v), LogValue::Positive(t)) => (t - v).exp(),
    }
}

/// All three comparison estimates on seeded samples, with the fitted
/// constants recomputed on a doubled sample set.
pub fn verify_comparison(cfg: &ComparisonConfig, table: &LengthTable) -> Result<ComparisonReport> {
    let geo = Truncation::new(table, cfg.truncation)?;
    let sampler = BallSampler::new(table, cfg.sample_radius.min(cfg.truncation))?;
    let mut rng = crate::sample::rng(cfg.seed);
    let doubled: Vec<AlgebraElement> =
        (0..2 * cfg.samples).map(|_| sampler.nonzero_element(&mut rng, cfg.max_support)).collect();

    let mut pointwise = PointwiseReport { rho: cfg.rho, m: cfg.m, checked: 0, violations: 0, worst_ln_ratio: f64::NEG_INFINITY };
    for a in &doubled {
        let rep = check_pointwise_in(&geo, a, cfg.rho, cfg.m)?;
        pointwise.checked += rep.checked;
        pointwise.violations += rep.violations;
        pointwise.worst_ln_ratio = pointwise.worst_ln_ratio.max(rep.worst_ln_ratio);
    }

    let second = fit_second(&geo, &doubled, cfg.rho, cfg.m, cfg.r)?;
    let points: Vec<Element> = (0..=cfg.point_radius.min(table.radius().saturating_sub(cfg.truncation)))
        .flat_map(|n| table.shell(n).map(|s| s.to_vec()).unwrap_or_default())
        .collect();
    let third = fit_third(&geo, &doubled, cfg.rho, cfg.m, cfg.ell, cfg.epsilon, &points)?;
    let fitted = |fits: &[SampleFit]| {
        let (base, all) = (fold_fits(&fits[..cfg.samples]), fold_fits(fits));
        (FittedConstant::new(cfg.samples, base.ln_ratio, all.ln_ratio), all.tail_fraction)
    };
    let (second, f2) = fitted(&second);
    let (third, f3) = fitted(&third);

    Ok(ComparisonReport {
        config: cfg.clone(),
        pointwise,
        second,
        third,
        second_applies: second_estimate_applies(cfg.rho, cfg.m, cfg.r),
        max_tail_fraction: f2.max(f3),
    })
}
