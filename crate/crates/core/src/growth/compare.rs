use serde::Serialize;

use super::{GrowthFunction, LogGrowth};
use crate::group::GrowthClass;

/// Relative slack on log-magnitudes for every comparison in this module.
pub const LOG_TOLERANCE: f64 = 1e-12;

fn le_log(lhs: f64, rhs: f64) -> bool {
    if lhs == f64::NEG_INFINITY {
        return true;
    }
    lhs <= rhs + LOG_TOLERANCE * rhs.abs().max(1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum SubmultVerdict {
    Holds { range: u64 },
    Counterexample { n: u64, m: u64 },
}

impl SubmultVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, SubmultVerdict::Holds { .. })
    }
}

/// Checks `σ(n+m) <= σ(n)σ(m)` for all `n + m <= range`, scanning `n` then `m`.
pub fn check_submultiplicative<F: LogGrowth + ?Sized>(sigma: &F, range: u64) -> SubmultVerdict {
    let ln: Vec<Option<f64>> = (0..=range).map(|n| sigma.ln_at(n)).collect();
    for n in 0..=range {
        for m in 0..=range - n {
            let (Some(a), Some(b), Some(s)) = (ln[n as usize], ln[m as usize], ln[(n + m) as usize]) else {
                return SubmultVerdict::Counterexample { n, m };
            };
            if !le_log(s, a + b) {
                return SubmultVerdict::Counterexample { n, m };
            }
        }
    }
    SubmultVerdict::Holds { range }
}

/// Smallest `c >= 1` with `σ(n+m) <= c σ(n)^{1+ε} σ(m)^{1+ε}` on `n + m <= range`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AlmostFit {
    pub epsilon: f64,
    pub range: u64,
    pub c: f64,
    pub ln_c: f64,
    pub argmax: (u64, u64),
}

pub fn fit_almost_submultiplicative(sigma: &GrowthFunction, epsilon: f64, range: u64) -> AlmostFit {
    let ln = sigma.ln_table(range);
    let mut best = (0.0, (0, 0));
    for n in 0..=range as usize {
        for m in n..=range as usize - n {
            let v = ln[n + m] - (1.0 + epsilon) * (ln[n] + ln[m]);
            if v > best.0 {
                best = (v, (n as u64, m as u64));
            }
        }
    }
    AlmostFit { epsilon, range, c: best.0.exp(), ln_c: best.0, argmax: best.1 }
}

/// A verified instance of `σ(n) <= c·σ′(cn)^k` on `0..=range`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GrowthWitness {
    c: u32,
    k: u32,
    range: u64,
}

impl GrowthWitness {
    pub fn verify<F, G>(sigma: &F, other: &G, c: u32, k: u32, range: u64) -> Option<Self>
    where
        F: LogGrowth + ?Sized,
        G: LogGrowth + ?Sized,
    {
        check_precedes(sigma, other, c, k, range).then_some(GrowthWitness { c, k, range })
    }

    pub fn c(&self) -> u32 {
        self.c
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn range(&self) -> u64 {
        self.range
    }
}

/// Exhaustive check of `σ(n) <= c·σ′(cn)^k` for `n <= range`. Fails if either
/// side is not available at a required point.
pub fn check_precedes<F, G>(sigma: &F, other: &G, c: u32, k: u32, range: u64) -> bool
where
    F: LogGrowth + ?Sized,
    G: LogGrowth + ?Sized,
{
    if c == 0 || k == 0 {
        return false;
    }
    let ln_c = f64::from(c).ln();
    (0..=range).all(|n| match (sigma.ln_at(n), other.ln_at(u64::from(c) * n)) {
        (Some(lhs), Some(rhs)) => le_log(lhs, ln_c + f64::from(k) * rhs),
        _ => false,
    })
}

/// Lexicographically least `(c, k)` in `[1, c_max] × [1, k_max]` that passes
/// [`check_precedes`]. `None` means only that no witness exists up to the caps.
pub fn search_witness<F, G>(sigma: &F, other: &G, c_max: u32, k_max: u32, range: u64) -> Option<GrowthWitness>
where
    F: LogGrowth + ?Sized,
    G: LogGrowth + ?Sized,
{
    (1..=c_max).find_map(|c| (1..=k_max).find_map(|k| GrowthWitness::verify(sigma, other, c, k, range)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    Precedes,
    Succeeds,
    Equivalent,
    Unknown,
}

/// Position of a function in the chain
/// `poly ⊏ subexp(θ) ⊏ subfact(θ) ⊏ subexp(θ′)` for `θ < θ′`.
/// Powers keep the class of their base; products and sums take the larger class.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct ClassKey {
    pub theta: f64,
    pub factorial: bool,
}

impl ClassKey {
    pub const POLYNOMIAL: ClassKey = ClassKey { theta: 0.0, factorial: false };

    fn max(self, other: ClassKey) -> ClassKey {
        if other > self {
            other
        } else {
            self
        }
    }
}

pub fn class_key(sigma: &GrowthFunction) -> ClassKey {
    match sigma {
        GrowthFunction::Polynomial(_) => ClassKey::POLYNOMIAL,
        GrowthFunction::SubExponential(t) => ClassKey { theta: *t, factorial: false },
        GrowthFunction::Factorial => ClassKey { theta: 1.0, factorial: true },
        GrowthFunction::SubFactorial(t) => ClassKey { theta: *t, factorial: true },
        GrowthFunction::Power(f, _) => class_key(f),
        GrowthFunction::Product(f, g) | GrowthFunction::ScaledSum(_, f, _, g) => class_key(f).max(class_key(g)),
    }
}

fn compare_keys(a: Option<ClassKey>, b: Option<ClassKey>) -> Comparison {
    match (a, b) {
        (Some(a), Some(b)) if a == b => Comparison::Equivalent,
        (Some(a), Some(b)) if a < b => Comparison::Precedes,
        (Some(_), Some(_)) => Comparison::Succeeds,
        _ => Comparison::Unknown,
    }
}

/// Decides `⊑` between catalog functions from the analytic class rules.
pub fn symbolic_compare(sigma: &GrowthFunction, other: &GrowthFunction) -> Comparison {
    compare_keys(Some(class_key(sigma)), Some(class_key(other)))
}

/// Compares the volume growth of a group class against `σ`. Bounded groups
/// precede everything; polynomial growth sits in the polynomial class and
/// exponential growth in `subexp(1)`.
pub fn compare_group_class(class: GrowthClass, sigma: &GrowthFunction) -> Comparison {
    let key = match class {
        GrowthClass::Bounded => return Comparison::Precedes,
        GrowthClass::Polynomial(_) => ClassKey::POLYNOMIAL,
        GrowthClass::Exponential => ClassKey { theta: 1.0, factorial: false },
    };
    compare_keys(Some(key), Some(class_key(sigma)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(s: &str) -> GrowthFunction {
        s.parse().unwrap()
    }

    #[test]
    fn submultiplicativity_catalog() {
        assert!(check_submultiplicative(&g("poly(1,1)"), 50).holds());
        assert!(check_submultiplicative(&g("subexp(0.5)"), 50).holds());
        assert_eq!(check_submultiplicative(&g("factorial"), 10), SubmultVerdict::Counterexample { n: 1, m: 1 });
    }

    #[test]
    fn almost_fit_for_submultiplicative_is_one() {
        let fit = fit_almost_submultiplicative(&g("poly(1,1)"), 0.1, 50);
        assert_eq!(fit.c, 1.0);
    }

    #[test]
    fn almost_fit_for_factorial_matches_sweep() {
        // independent sweep over (n+m)!/(n!^2 m!^2) with exact integer factorials
        let fact: Vec<f64> = (0..=30).scan(1.0f64, |acc, i| {
            if i > 0 {
                *acc *= i as f64;
            }
            Some(*acc)
        })
        .collect();
        let mut oracle: f64 = 1.0;
        for n in 0..=30usize {
            for m in 0..=30 - n {
                oracle = oracle.max(fact[n + m] / (fact[n].powi(2) * fact[m].powi(2)));
            }
        }
        let fit = fit_almost_submultiplicative(&g("factorial"), 1.0, 30);
        assert!((fit.c - oracle).abs() <= 1e-12 * oracle);
        assert_eq!(fit_almost_submultiplicative(&g("factorial"), 1.0, 60).c, fit.c);
    }

    #[test]
    fn almost_fit_stabilizes_for_factorial() {
        for eps in [0.25, 0.5, 1.0] {
            let a = fit_almost_submultiplicative(&g("factorial"), eps, 128);
            let b = fit_almost_submultiplicative(&g("factorial"), eps, 256);
            assert!((b.ln_c - a.ln_c).abs() < 1e-12, "eps={eps}");
        }
    }

    #[test]
    fn witnesses() {
        let lin = g("poly(1,1)");
        assert!(check_precedes(&lin, &lin, 1, 1, 200));
        let w = search_witness(&lin, &g("subexp(0.5)"), 8, 8, 200).unwrap();
        assert!(check_precedes(&lin, &g("subexp(0.5)"), w.c(), w.k(), 200));
        assert!(search_witness(&g("subexp(1)"), &lin, 8, 8, 200).is_none());
        let w = search_witness(&g("poly(0,3,0,1)"), &lin, 16, 16, 200).unwrap();
        assert_eq!((w.c(), w.k()), (1, 3));
    }

    #[test]
    fn symbolic_rules() {
        assert_eq!(symbolic_compare(&g("poly(1,1)"), &g("poly(1,0,1)")), Comparison::Equivalent);
        assert_eq!(symbolic_compare(&g("subexp(0.3)"), &g("subfact(0.3)")), Comparison::Precedes);
        assert_eq!(symbolic_compare(&g("subfact(0.3)"), &g("subexp(0.4)")), Comparison::Precedes);
        assert_eq!(symbolic_compare(&g("factorial"), &g("factorial")), Comparison::Equivalent);
        assert_eq!(symbolic_compare(&g("factorial"), &g("subexp(1)")), Comparison::Succeeds);
        assert_eq!(symbolic_compare(&g("pow(subexp(0.5),3)"), &g("subexp(0.5)")), Comparison::Equivalent);
        assert_eq!(symbolic_compare(&g("prod(poly(1,1),subexp(0.2))"), &g("subexp(0.2)")), Comparison::Equivalent);
        assert_eq!(compare_group_class(GrowthClass::Exponential, &g("subexp(1)")), Comparison::Equivalent);
        assert_eq!(compare_group_class(GrowthClass::Polynomial(2), &g("poly(1,1)")), Comparison::Equivalent);
        assert_eq!(compare_group_class(GrowthClass::Exponential, &g("poly(1,1)")), Comparison::Succeeds);
        assert_eq!(compare_group_class(GrowthClass::Bounded, &g("poly(1,1)")), Comparison::Precedes);
    }

    #[test]
    fn symbolic_rules_agree_with_witness_search() {
        let catalog = [
            "poly(1,1)",
            "poly(0,3,0,1)",
            "pow(poly(1,1),2.5)",
            "subexp(0.3)",
            "subexp(0.5)",
            "subexp(1)",
            "pow(subexp(0.5),0.5)",
            "subfact(0.3)",
            "subfact(0.5)",
            "factorial",
            "prod(poly(1,1),subexp(0.3))",
            "sum(1,subexp(0.5),2,poly(1,0,1))",
        ];
        for a in catalog {
            for b in catalog {
                let (fa, fb) = (g(a), g(b));
                match symbolic_compare(&fa, &fb) {
                    Comparison::Precedes | Comparison::Equivalent => {
                        assert!(search_witness(&fa, &fb, 16, 16, 200).is_some(), "{a} ⊑ {b} without witness");
                    }
                    _ => {}
                }
            }
        }
    }

    #[test]
    fn inverse_is_in_lp_for_witnessed_functions() {
        // (1+n) ⊑ σ with witness (c,k) gives 1/σ ∈ ℓ^p for p = 2kc
        let lin = g("poly(1,1)");
        for s in ["poly(1,1)", "subexp(0.5)", "factorial", "pow(poly(1,1),0.5)"] {
            let sigma = g(s);
            let w = search_witness(&lin, &sigma, 16, 16, 200).unwrap();
            let p = f64::from(2 * w.k() * w.c());
            let terms: Vec<f64> = (0..=4000u64).map(|n| (-p * sigma.ln_value(n)).exp()).collect();
            let s1: f64 = terms[..=2000].iter().sum();
            let s2: f64 = terms.iter().sum();
            assert!(s2 - s1 < 1e-3, "{s}: partial sums not Cauchy");
        }
    }
}
