use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::group::{Element, GroupFamily};
use crate::{Error, Result};

/// Supports larger than this are convolved in parallel chunks.
const PARALLEL_SUPPORT: usize = 256;
const CONVOLVE_CHUNK: usize = 64;

/// A finitely supported element `Σ a_g e_g` of the complex group algebra.
/// Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    family: GroupFamily,
    coeffs: BTreeMap<Element, Complex64>,
}

impl AlgebraElement {
    pub fn zero(family: &GroupFamily) -> Self {
        AlgebraElement { family: family.clone(), coeffs: BTreeMap::new() }
    }

    /// The unit `e_e`.
    pub fn unit(family: &GroupFamily) -> Self {
        Self::basis(family, &family.identity()).expect("identity conforms")
    }

    pub fn basis(family: &GroupFamily, g: &Element) -> Result<Self> {
        Self::from_terms(family, [(g.clone(), Complex64::new(1.0, 0.0))])
    }

    /// Builds an element from terms, accumulating repeated group elements.
    pub fn from_terms<I>(family: &GroupFamily, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Element, Complex64)>,
    {
        let mut coeffs: BTreeMap<Element, Complex64> = BTreeMap::new();
        for (g, c) in terms {
            family.check(&g)?;
            *coeffs.entry(g).or_default() += c;
        }
        coeffs.retain(|_, c| *c != Complex64::new(0.0, 0.0));
        Ok(AlgebraElement { family: family.clone(), coeffs })
    }

    fn from_map_unchecked(family: &GroupFamily, mut coeffs: BTreeMap<Element, Complex64>) -> Self {
        coeffs.retain(|_, c| *c != Complex64::new(0.0, 0.0));
        AlgebraElement { family: family.clone(), coeffs }
    }

    pub fn family(&self) -> &GroupFamily {
        &self.family
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Element, &Complex64)> {
        self.coeffs.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &Element> {
        self.coeffs.keys()
    }

    pub fn coefficient(&self, g: &Element) -> Complex64 {
        self.coeffs.get(g).copied().unwrap_or_default()
    }

    /// Number of nonzero coefficients.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn same_group(&self, other: &Self) -> Result<()> {
        if self.family == other.family {
            Ok(())
        } else {
            Err(Error::SpecMismatch { left: self.family.to_string(), right: other.family.to_string() })
        }
    }

    pub fn scale(&self, lambda: Complex64) -> Self {
        Self::from_map_unchecked(&self.family, self.coeffs.iter().map(|(g, c)| (g.clone(), c * lambda)).collect())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_group(other)?;
        let mut coeffs = self.coeffs.clone();
        for (g, c) in &other.coeffs {
            *coeffs.entry(g.clone()).or_default() += c;
        }
        Ok(Self::from_map_unchecked(&self.family, coeffs))
    }

    /// Convolution product `(ab)_h = Σ_g a_g b_{g⁻¹h}`.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        self.same_group(other)?;
        let fam = &self.family;
        let b: Vec<(&Element, &Complex64)> = other.coeffs.iter().collect();
        let a: Vec<(&Element, &Complex64)> = self.coeffs.iter().collect();
        let partial = |chunk: &[(&Element, &Complex64)]| {
            let mut acc: HashMap<Element, Complex64> = HashMap::new();
            for (g, x) in chunk {
                for (k, y) in &b {
                    *acc.entry(fam.mul_unchecked(g, k)).or_default() += **x * **y;
                }
            }
            let mut sorted: Vec<(Element, Complex64)> = acc.into_iter().collect();
            sorted.sort_unstable_by(|p, q| p.0.cmp(&q.0));
            sorted
        };
        // Chunks are merged in a fixed order so the floating-point sums do
        // not depend on scheduling.
        let pieces: Vec<Vec<(Element, Complex64)>> = if a.len() * b.len() > PARALLEL_SUPPORT * PARALLEL_SUPPORT / 4 {
            a.par_chunks(CONVOLVE_CHUNK).map(partial).collect()
        } else {
            a.chunks(CONVOLVE_CHUNK).map(partial).collect()
        };
        let mut coeffs: BTreeMap<Element, Complex64> = BTreeMap::new();
        for piece in pieces {
            for (h, c) in piece {
                *coeffs.entry(h).or_default() += c;
            }
        }
        Ok(Self::from_map_unchecked(fam, coeffs))
    }

    /// `a* = Σ conj(a_g) e_{g⁻¹}`.
    pub fn star(&self) -> Self {
        let fam = &self.family;
        Self::from_map_unchecked(fam, self.coeffs.iter().map(|(g, c)| (fam.inv_unchecked(g), c.conj())).collect())
    }

    /// `S(a) = Σ a_g e_{g⁻¹}`.
    pub fn antipode(&self) -> Self {
        let fam = &self.family;
        Self::from_map_unchecked(fam, self.coeffs.iter().map(|(g, c)| (fam.inv_unchecked(g), *c)).collect())
    }

    /// `ε(a) = Σ a_g`.
    pub fn counit(&self) -> Complex64 {
        self.coeffs.values().sum()
    }

    /// `tr(a) = a_e`.
    pub fn trace(&self) -> Complex64 {
        self.coefficient(&self.family.identity())
    }

    /// `Δ(a) = Σ a_g e_g ⊗ e_g`.
    pub fn coproduct(&self) -> ProductAlgebraElement {
        ProductAlgebraElement {
            family: self.family.clone(),
            coeffs: self.coeffs.iter().map(|(g, c)| ((g.clone(), g.clone()), *c)).collect(),
        }
    }

    /// `⟨φ, a⟩ = Σ_g a_g φ_g`.
    pub fn dual_pairing(phi: &Self, a: &Self) -> Result<Complex64> {
        phi.same_group(a)?;
        let (small, large) = if phi.len() <= a.len() { (phi, a) } else { (a, phi) };
        Ok(small.coeffs.iter().map(|(g, c)| c * large.coefficient(g)).sum())
    }

    /// One `re im normal-form` line per term.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (g, c) in &self.coeffs {
            writeln!(out, "{} {} {}", c.re, c.im, g).expect("writing to a String cannot fail");
        }
        out
    }

    /// Parses the line format of [`AlgebraElement::to_text`]. Blank lines and
    /// lines starting with `#` are skipped; repeated elements accumulate.
    pub fn from_text(family: &GroupFamily, text: &str) -> Result<Self> {
        let mut terms = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |why: &str| Error::Parse(format!("line {}: {why}: {line:?}", lineno + 1));
            let mut parts = line.splitn(3, char::is_whitespace);
            let re: f64 = parts.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad("bad real part"))?;
            let im: f64 = parts.next().and_then(|t| t.trim().parse().ok()).ok_or_else(|| bad("bad imaginary part"))?;
            let form = parts.next().ok_or_else(|| bad("missing normal form"))?;
            if !re.is_finite() || !im.is_finite() {
                return Err(bad("coefficients must be finite"));
            }
            terms.push((family.parse_element(form)?, Complex64::new(re, im)));
        }
        Self::from_terms(family, terms)
    }
}

/// Finitely supported element of `C[G×G] ≅ C[G] ⊗ C[G]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductAlgebraElement {
    family: GroupFamily,
    coeffs: BTreeMap<(Element, Element), Complex64>,
}

impl ProductAlgebraElement {
    pub fn from_terms<I>(family: &GroupFamily, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = ((Element, Element), Complex64)>,
    {
        let mut coeffs: BTreeMap<(Element, Element), Complex64> = BTreeMap::new();
        for ((g, h), c) in terms {
            family.check(&g)?;
            family.check(&h)?;
            *coeffs.entry((g, h)).or_default() += c;
        }
        coeffs.retain(|_, c| *c != Complex64::new(0.0, 0.0));
        Ok(ProductAlgebraElement { family: family.clone(), coeffs })
    }

    pub fn family(&self) -> &GroupFamily {
        &self.family
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(Element, Element), &Complex64)> {
        self.coeffs.iter()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Componentwise product on `G×G`.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        if self.family != other.family {
            return Err(Error::SpecMismatch { left: self.family.to_string(), right: other.family.to_string() });
        }
        let fam = &self.family;
        let mut coeffs: BTreeMap<(Element, Element), Complex64> = BTreeMap::new();
        for ((g, h), x) in &self.coeffs {
            for ((g2, h2), y) in &other.coeffs {
                let key = (fam.mul_unchecked(g, g2), fam.mul_unchecked(h, h2));
                *coeffs.entry(key).or_default() += x * y;
            }
        }
        coeffs.retain(|_, c| *c != Complex64::new(0.0, 0.0));
        Ok(ProductAlgebraElement { family: fam.clone(), coeffs })
    }

    /// `(ε ⊗ id)`: sums out the left leg.
    pub fn counit_left(&self) -> AlgebraElement {
        let mut coeffs: BTreeMap<Element, Complex64> = BTreeMap::new();
        for ((_, h), c) in &self.coeffs {
            *coeffs.entry(h.clone()).or_default() += c;
        }
        AlgebraElement::from_map_unchecked(&self.family, coeffs)
    }

    /// `(id ⊗ ε)`: sums out the right leg.
    pub fn counit_right(&self) -> AlgebraElement {
        let mut coeffs: BTreeMap<Element, Complex64> = BTreeMap::new();
        for ((g, _), c) in &self.coeffs {
            *coeffs.entry(g.clone()).or_default() += c;
        }
        AlgebraElement::from_map_unchecked(&self.family, coeffs)
    }

    /// `x ⊗ y` for two algebra elements.
    pub fn tensor(a: &AlgebraElement, b: &AlgebraElement) -> Result<Self> {
        a.same_group(b)?;
        let terms = a
            .terms()
            .flat_map(|(g, x)| b.terms().map(move |(h, y)| ((g.clone(), h.clone()), x * y)));
        Self::from_terms(&a.family, terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn z() -> GroupFamily {
        GroupFamily::FreeAbelian { rank: 1 }
    }

    fn f2() -> GroupFamily {
        GroupFamily::Free { rank: 2 }
    }

    fn e(fam: &GroupFamily, s: &str) -> AlgebraElement {
        AlgebraElement::basis(fam, &fam.parse_element(s).unwrap()).unwrap()
    }

    #[test]
    fn integer_basis_product() {
        let prod = e(&z(), "1").convolve(&e(&z(), "2")).unwrap();
        assert_eq!(prod, e(&z(), "3"));
    }

    #[test]
    fn free_group_product_reduces() {
        let fam = f2();
        let lhs = e(&fam, "a").add(&e(&fam, "b")).unwrap();
        let prod = lhs.convolve(&e(&fam, "A")).unwrap();
        let expected = e(&fam, "1").add(&e(&fam, "bA")).unwrap();
        assert_eq!(prod, expected);
    }

    #[test]
    fn structure_maps_on_basis() {
        let fam = f2();
        let g = fam.parse_element("ab").unwrap();
        let x = AlgebraElement::from_terms(&fam, [(g.clone(), c(0.0, 1.0))]).unwrap();
        let expected = AlgebraElement::from_terms(&fam, [(fam.inv_unchecked(&g), c(0.0, -1.0))]).unwrap();
        assert_eq!(x.star(), expected);
        assert_eq!(e(&fam, "ab").counit(), c(1.0, 0.0));
        assert_eq!(e(&fam, "ab").trace(), c(0.0, 0.0));
        assert_eq!(e(&fam, "1").trace(), c(1.0, 0.0));
    }

    #[test]
    fn coproduct_of_unit_and_counit_axiom() {
        let fam = f2();
        let unit = AlgebraElement::unit(&fam);
        let d = unit.coproduct();
        assert_eq!(d.len(), 1);
        assert_eq!(d, ProductAlgebraElement::tensor(&unit, &unit).unwrap());
        let a = AlgebraElement::from_terms(
            &fam,
            [(fam.parse_element("a").unwrap(), c(2.0, -1.0)), (fam.parse_element("bA").unwrap(), c(0.5, 0.0))],
        )
        .unwrap();
        assert_eq!(a.coproduct().counit_left(), a);
        assert_eq!(a.coproduct().counit_right(), a);
    }

    #[test]
    fn pairing_on_basis() {
        let fam = f2();
        assert_eq!(AlgebraElement::dual_pairing(&e(&fam, "a"), &e(&fam, "a")).unwrap(), c(1.0, 0.0));
        assert_eq!(AlgebraElement::dual_pairing(&e(&fam, "a"), &e(&fam, "b")).unwrap(), c(0.0, 0.0));
        let phi = AlgebraElement::from_terms(&fam, [(fam.identity(), c(3.0, 2.0)), (fam.parse_element("a").unwrap(), c(1.0, 0.0))]).unwrap();
        assert_eq!(AlgebraElement::dual_pairing(&phi, &AlgebraElement::unit(&fam)).unwrap(), c(3.0, 2.0));
    }

    #[test]
    fn zero_coefficients_are_pruned() {
        let fam = z();
        let g = Element::Vector(vec![1]);
        let x = AlgebraElement::from_terms(&fam, [(g.clone(), c(1.0, 0.0)), (g, c(-1.0, 0.0))]).unwrap();
        assert!(x.is_zero());
    }

    #[test]
    fn text_round_trip() {
        let fam = GroupFamily::Product(vec![f2(), GroupFamily::Heisenberg]);
        let text = "# comment\n0.5 -1.25 [aB;(1,2,3)]\n\n1e-3 0 [1;(0,0,0)]\n";
        let x = AlgebraElement::from_text(&fam, text).unwrap();
        assert_eq!(x.len(), 2);
        let back = AlgebraElement::from_text(&fam, &x.to_text()).unwrap();
        assert_eq!(back, x);
        assert!(AlgebraElement::from_text(&fam, "1 0").is_err());
        assert!(AlgebraElement::from_text(&fam, "x 0 [a;(0,0,0)]").is_err());
    }

    #[test]
    fn mismatched_groups_do_not_multiply() {
        let err = e(&z(), "1").convolve(&e(&f2(), "a"));
        assert!(matches!(err, Err(Error::SpecMismatch { .. })));
    }
}
