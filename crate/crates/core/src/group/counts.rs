use serde::{Deserialize, Serialize};

use super::{GroupFamily, GroupSpec, LengthTable};
use crate::{Error, Result};

/// Asymptotic volume-growth class of a catalog group. These are standard
/// facts about the families, not something computed from a ball.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GrowthClass {
    Bounded,
    Polynomial(u32),
    Exponential,
}

/// Surface and volume growth counts up to some radius, with the data the
/// summability diagnostics need. Counts come either from an enumerated ball
/// or from closed forms for the families that have them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthCounts {
    label: String,
    generators: Vec<String>,
    class: GrowthClass,
    sigma: Vec<u128>,
    beta: Vec<u128>,
}

impl GrowthCounts {
    pub fn from_table(table: &LengthTable) -> Self {
        let spec = table.spec();
        Self::from_sigma(spec, table.sigma().iter().map(|&s| s as u128).collect())
    }

    fn from_sigma(spec: &GroupSpec, sigma: Vec<u128>) -> Self {
        let beta = sigma
            .iter()
            .scan(0u128, |acc, s| {
                *acc += s;
                Some(*acc)
            })
            .collect();
        GrowthCounts {
            label: spec.to_string(),
            generators: spec.generators().iter().map(|g| g.to_string()).collect(),
            class: spec.family().growth_class(),
            sigma,
            beta,
        }
    }

    /// Closed-form surface counts for free groups, free abelian groups, cyclic
    /// groups and their products, all with default generators. `None` when no
    /// closed form applies (Heisenberg factors or custom generators).
    pub fn closed_form(spec: &GroupSpec, radius: u32) -> Option<Result<Self>> {
        if !spec.uses_default_generators() {
            return None;
        }
        let sigma = closed_form_sigma(spec.family(), radius)?;
        Some(sigma.map(|s| Self::from_sigma(spec, s)))
    }

    /// Closed form when available, breadth-first enumeration otherwise.
    pub fn for_spec(spec: &GroupSpec, radius: u32, cap: usize) -> Result<Self> {
        match Self::closed_form(spec, radius) {
            Some(counts) => counts,
            None => Ok(super::enumerate_ball_capped(spec, radius, cap)?.counts()),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn radius(&self) -> u32 {
        self.sigma.len() as u32 - 1
    }

    pub fn sigma(&self) -> &[u128] {
        &self.sigma
    }

    pub fn beta(&self) -> &[u128] {
        &self.beta
    }

    pub fn growth_class(&self) -> GrowthClass {
        self.class
    }

    pub fn generators(&self) -> &[String] {
        &self.generators
    }

    pub fn generator_count(&self) -> usize {
        self.generators.len()
    }

    /// Upper bound on `ln σ_G(n)` valid for every `n`: the exact count inside
    /// the radius, and the number of words without adjacent inverse letters
    /// beyond it.
    pub fn ln_surface_bound(&self, n: u32) -> f64 {
        if let Some(&s) = self.sigma.get(n as usize) {
            return (s as f64).ln();
        }
        let s = self.generators.len() as f64;
        if s <= 1.0 {
            // A single involution generates a group of order two.
            return f64::NEG_INFINITY;
        }
        s.ln() + (n as f64 - 1.0) * (s - 1.0).ln()
    }
}

fn closed_form_sigma(family: &GroupFamily, radius: u32) -> Option<Result<Vec<u128>>> {
    let n_max = radius as usize;
    let overflow = || Error::Overflow(format!("surface counts of {family} at radius {radius}"));
    let sigma = match family {
        GroupFamily::Free { rank } => {
            let s = 2 * *rank as u128;
            let mut out = vec![1u128];
            let mut cur = s;
            for n in 1..=n_max {
                if n > 1 {
                    cur = match cur.checked_mul(s - 1) {
                        Some(c) => c,
                        None => return Some(Err(overflow())),
                    };
                }
                out.push(cur);
            }
            out
        }
        GroupFamily::FreeAbelian { rank } => {
            // Points with |x|_1 = n: choose i nonzero coordinates, their signs,
            // and a composition of n into i positive parts.
            let d = *rank as u128;
            let mut out = vec![1u128];
            for n in 1..=n_max as u128 {
                let mut total: u128 = 0;
                for i in 1..=d.min(n) {
                    let term = binomial(d, i)
                        .checked_mul(binomial(n - 1, i - 1))
                        .and_then(|t| t.checked_mul(1u128 << i));
                    match term.and_then(|t| total.checked_add(t)) {
                        Some(t) => total = t,
                        None => return Some(Err(overflow())),
                    }
                }
                out.push(total);
            }
            out
        }
        GroupFamily::Cyclic { order } => {
            let m = *order as usize;
            (0..=n_max)
                .map(|n| match n {
                    0 => 1,
                    _ if 2 * n < m => 2,
                    _ if 2 * n == m => 1,
                    _ => 0,
                })
                .collect()
        }
        GroupFamily::Heisenberg => return None,
        GroupFamily::Product(factors) => {
            let mut acc = vec![1u128];
            acc.resize(n_max + 1, 0);
            for f in factors {
                let fs = match closed_form_sigma(f, radius)? {
                    Ok(s) => s,
                    Err(e) => return Some(Err(e)),
                };
                let mut next = vec![0u128; n_max + 1];
                for (i, a) in acc.iter().enumerate() {
                    for (j, b) in fs.iter().enumerate().take(n_max + 1 - i) {
                        match a.checked_mul(*b).and_then(|t| next[i + j].checked_add(t)) {
                            Some(t) => next[i + j] = t,
                            None => return Some(Err(overflow())),
                        }
                    }
                }
                acc = next;
            }
            acc
        }
    };
    Some(Ok(sigma))
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::enumerate_ball;

    #[test]
    fn closed_forms_match_enumeration() {
        let cases = [("z", 12), ("z2", 10), ("z3", 7), ("f2", 7), ("f3", 5), ("c5", 5), ("c6", 5), ("c2", 3), ("f2xz", 5), ("z2xc3", 6)];
        for (name, r) in cases {
            let spec = GroupSpec::parse_short(name).unwrap();
            let closed = GrowthCounts::closed_form(&spec, r).unwrap().unwrap();
            let bfs = enumerate_ball(&spec, r).unwrap().counts();
            assert_eq!(closed, bfs, "{name}");
        }
    }

    #[test]
    fn heisenberg_has_no_closed_form() {
        assert!(GrowthCounts::closed_form(&GroupSpec::heisenberg(), 3).is_none());
        let counts = GrowthCounts::for_spec(&GroupSpec::heisenberg(), 3, 1000).unwrap();
        assert_eq!(counts.sigma()[..2], [1, 4]);
    }

    #[test]
    fn free_group_counts_far_out() {
        let counts = GrowthCounts::closed_form(&GroupSpec::free(2).unwrap(), 30).unwrap().unwrap();
        assert_eq!(counts.sigma()[30], 4 * 3u128.pow(29));
        assert_eq!(counts.beta()[30], 2 * 3u128.pow(30) - 1);
    }

    #[test]
    fn surface_bound_dominates() {
        let counts = GrowthCounts::closed_form(&GroupSpec::free_abelian(2).unwrap(), 5).unwrap().unwrap();
        assert_eq!(counts.ln_surface_bound(3), 12f64.ln());
        assert!(counts.ln_surface_bound(9) >= 36f64.ln());
    }
}
