//! Exact arithmetic for a closed catalog of finitely generated groups.
//!
//! Every element is stored in a canonical normal form, so equality of normal
//! forms is group equality and elements can key hash maps and ordered maps.

mod ball;
mod counts;
mod morphism;

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{Error, Result};

pub use ball::{enumerate_ball, enumerate_ball_capped, load_or_enumerate, LengthTable, DEFAULT_BALL_CAP};
pub use counts::{GrowthClass, GrowthCounts};
pub use morphism::GroupMorphism;

const MAX_FREE_RANK: u32 = 26;

/// Normal form of a group element. Which variant is valid depends on the
/// [`GroupFamily`] the element belongs to.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Element {
    /// Freely reduced word; letter `+i` is the generator `x_i`, `-i` its inverse (`i >= 1`).
    Word(Vec<i32>),
    /// Integer vector in a free abelian group.
    Vector(Vec<i64>),
    /// Residue in `[0, order)`.
    Residue(u64),
    /// `(a, b, c)` with `(a,b,c)(a',b',c') = (a+a', b+b', c+c'+a·b')`.
    Heisenberg([i64; 3]),
    /// One entry per factor of a direct product.
    Tuple(Vec<Element>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GroupFamily {
    Free { rank: u32 },
    FreeAbelian { rank: u32 },
    Cyclic { order: u64 },
    Heisenberg,
    Product(Vec<GroupFamily>),
}

impl GroupFamily {
    pub fn validate(&self) -> Result<()> {
        match self {
            GroupFamily::Free { rank } if *rank == 0 || *rank > MAX_FREE_RANK => Err(Error::InvalidSpec(
                format!("free group rank must lie in 1..={MAX_FREE_RANK}, got {rank}"),
            )),
            GroupFamily::FreeAbelian { rank: 0 } => {
                Err(Error::InvalidSpec("free abelian rank must be at least 1".into()))
            }
            GroupFamily::Cyclic { order } if *order < 2 => {
                Err(Error::InvalidSpec(format!("cyclic order must be at least 2, got {order}")))
            }
            GroupFamily::Product(factors) => {
                if factors.is_empty() {
                    return Err(Error::InvalidSpec("direct product needs at least one factor".into()));
                }
                factors.iter().try_for_each(GroupFamily::validate)
            }
            _ => Ok(()),
        }
    }

    pub fn identity(&self) -> Element {
        match self {
            GroupFamily::Free { .. } => Element::Word(Vec::new()),
            GroupFamily::FreeAbelian { rank } => Element::Vector(vec![0; *rank as usize]),
            GroupFamily::Cyclic { .. } => Element::Residue(0),
            GroupFamily::Heisenberg => Element::Heisenberg([0; 3]),
            GroupFamily::Product(factors) => Element::Tuple(factors.iter().map(|f| f.identity()).collect()),
        }
    }

    pub fn conforms(&self, g: &Element) -> bool {
        match (self, g) {
            (GroupFamily::Free { rank }, Element::Word(w)) => {
                let r = *rank as i32;
                w.iter().all(|&x| x != 0 && x.abs() <= r) && w.windows(2).all(|p| p[0] != -p[1])
            }
            (GroupFamily::FreeAbelian { rank }, Element::Vector(v)) => v.len() == *rank as usize,
            (GroupFamily::Cyclic { order }, Element::Residue(r)) => r < order,
            (GroupFamily::Heisenberg, Element::Heisenberg(_)) => true,
            (GroupFamily::Product(factors), Element::Tuple(parts)) => {
                factors.len() == parts.len() && factors.iter().zip(parts).all(|(f, p)| f.conforms(p))
            }
            _ => false,
        }
    }

    pub fn check(&self, g: &Element) -> Result<()> {
        if self.conforms(g) {
            Ok(())
        } else {
            Err(Error::FamilyMismatch { family: self.to_string(), element: g.to_string() })
        }
    }

    pub fn multiply(&self, g: &Element, h: &Element) -> Result<Element> {
        self.check(g)?;
        self.check(h)?;
        Ok(self.mul_unchecked(g, h))
    }

    pub fn inverse(&self, g: &Element) -> Result<Element> {
        self.check(g)?;
        Ok(self.inv_unchecked(g))
    }

    /// Product of two conforming elements. Callers must have checked
    /// conformance; mismatched variants panic.
    pub(crate) fn mul_unchecked(&self, g: &Element, h: &Element) -> Element {
        match (self, g, h) {
            (GroupFamily::Free { .. }, Element::Word(a), Element::Word(b)) => {
                let mut out = a.clone();
                for &x in b {
                    if out.last() == Some(&-x) {
                        out.pop();
                    } else {
                        out.push(x);
                    }
                }
                Element::Word(out)
            }
            (GroupFamily::FreeAbelian { .. }, Element::Vector(a), Element::Vector(b)) => {
                Element::Vector(a.iter().zip(b).map(|(x, y)| x + y).collect())
            }
            (GroupFamily::Cyclic { order }, Element::Residue(a), Element::Residue(b)) => {
                Element::Residue(((*a as u128 + *b as u128) % *order as u128) as u64)
            }
            (GroupFamily::Heisenberg, Element::Heisenberg([a, b, c]), Element::Heisenberg([a2, b2, c2])) => {
                Element::Heisenberg([a + a2, b + b2, c + c2 + a * b2])
            }
            (GroupFamily::Product(factors), Element::Tuple(x), Element::Tuple(y)) => Element::Tuple(
                factors.iter().zip(x.iter().zip(y)).map(|(f, (p, q))| f.mul_unchecked(p, q)).collect(),
            ),
            _ => panic!("mul_unchecked: {g} or {h} does not conform to {self}"),
        }
    }

    pub(crate) fn inv_unchecked(&self, g: &Element) -> Element {
        match (self, g) {
            (GroupFamily::Free { .. }, Element::Word(w)) => Element::Word(w.iter().rev().map(|x| -x).collect()),
            (GroupFamily::FreeAbelian { .. }, Element::Vector(v)) => Element::Vector(v.iter().map(|x| -x).collect()),
            (GroupFamily::Cyclic { order }, Element::Residue(r)) => Element::Residue((order - r) % order),
            (GroupFamily::Heisenberg, Element::Heisenberg([a, b, c])) => Element::Heisenberg([-a, -b, -c + a * b]),
            (GroupFamily::Product(factors), Element::Tuple(parts)) => {
                Element::Tuple(factors.iter().zip(parts).map(|(f, p)| f.inv_unchecked(p)).collect())
            }
            _ => panic!("inv_unchecked: {g} does not conform to {self}"),
        }
    }

    /// `g^n` by square-and-multiply; negative exponents invert first.
    pub fn pow(&self, g: &Element, n: i64) -> Result<Element> {
        self.check(g)?;
        let mut base = if n < 0 { self.inv_unchecked(g) } else { g.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = self.identity();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_unchecked(&acc, &base);
            }
            base = self.mul_unchecked(&base, &base);
            e >>= 1;
        }
        Ok(acc)
    }

    /// The generators a morphism is specified on: `x_i`, unit vectors, `1`,
    /// `x, y` for the Heisenberg group, and the embedded factor generators of a
    /// product, in that order.
    pub fn basic_generators(&self) -> Vec<Element> {
        match self {
            GroupFamily::Free { rank } => (1..=*rank as i32).map(|i| Element::Word(vec![i])).collect(),
            GroupFamily::FreeAbelian { rank } => (0..*rank as usize)
                .map(|i| {
                    let mut v = vec![0; *rank as usize];
                    v[i] = 1;
                    Element::Vector(v)
                })
                .collect(),
            GroupFamily::Cyclic { .. } => vec![Element::Residue(1)],
            GroupFamily::Heisenberg => vec![Element::Heisenberg([1, 0, 0]), Element::Heisenberg([0, 1, 0])],
            GroupFamily::Product(factors) => {
                let mut out = Vec::new();
                for (i, f) in factors.iter().enumerate() {
                    for s in f.basic_generators() {
                        let mut parts: Vec<Element> = factors.iter().map(|x| x.identity()).collect();
                        parts[i] = s;
                        out.push(Element::Tuple(parts));
                    }
                }
                out
            }
        }
    }

    /// Basic generators together with their inverses, without duplicates.
    pub fn default_generators(&self) -> Vec<Element> {
        let mut out: Vec<Element> = Vec::new();
        for s in self.basic_generators() {
            let inv = self.inv_unchecked(&s);
            for x in [s, inv] {
                if !out.contains(&x) {
                    out.push(x);
                }
            }
        }
        out
    }

    pub fn growth_class(&self) -> GrowthClass {
        match self {
            GroupFamily::Free { rank: 1 } => GrowthClass::Polynomial(1),
            GroupFamily::Free { .. } => GrowthClass::Exponential,
            GroupFamily::FreeAbelian { rank } => GrowthClass::Polynomial(*rank),
            GroupFamily::Cyclic { .. } => GrowthClass::Bounded,
            GroupFamily::Heisenberg => GrowthClass::Polynomial(4),
            GroupFamily::Product(factors) => factors.iter().map(GroupFamily::growth_class).fold(
                GrowthClass::Bounded,
                |acc, c| match (acc, c) {
                    (GrowthClass::Exponential, _) | (_, GrowthClass::Exponential) => GrowthClass::Exponential,
                    (GrowthClass::Polynomial(a), GrowthClass::Polynomial(b)) => GrowthClass::Polynomial(a + b),
                    (GrowthClass::Polynomial(a), GrowthClass::Bounded)
                    | (GrowthClass::Bounded, GrowthClass::Polynomial(a)) => GrowthClass::Polynomial(a),
                    (GrowthClass::Bounded, GrowthClass::Bounded) => GrowthClass::Bounded,
                },
            ),
        }
    }

    /// Parses a normal form written the way [`Element`]'s `Display` prints it.
    pub fn parse_element(&self, s: &str) -> Result<Element> {
        let s = s.trim();
        let bad = |why: &str| Error::Parse(format!("cannot read {s:?} as an element of {self}: {why}"));
        let g = match self {
            GroupFamily::Free { .. } => {
                if s == "1" {
                    Element::Word(Vec::new())
                } else {
                    let mut word = Vec::new();
                    for ch in s.chars() {
                        let letter = match ch {
                            'a'..='z' => ch as i32 - 'a' as i32 + 1,
                            'A'..='Z' => -(ch as i32 - 'A' as i32 + 1),
                            _ => return Err(bad("letters must be a-z or A-Z")),
                        };
                        word.push(letter);
                    }
                    // Accept unreduced input and reduce it.
                    let id = self.identity();
                    self.mul_unchecked(&id, &Element::Word(word))
                }
            }
            GroupFamily::FreeAbelian { rank } => {
                let v = parse_int_list(s).map_err(|e| bad(&e))?;
                if v.len() != *rank as usize {
                    return Err(bad(&format!("expected {rank} coordinates")));
                }
                Element::Vector(v)
            }
            GroupFamily::Cyclic { order } => {
                let r: i64 = s.parse().map_err(|_| bad("expected an integer residue"))?;
                Element::Residue(r.rem_euclid(*order as i64) as u64)
            }
            GroupFamily::Heisenberg => {
                let v = parse_int_list(s).map_err(|e| bad(&e))?;
                let [a, b, c]: [i64; 3] = v.try_into().map_err(|_| bad("expected a triple (a,b,c)"))?;
                Element::Heisenberg([a, b, c])
            }
            GroupFamily::Product(factors) => {
                let inner = s
                    .strip_prefix('[')
                    .and_then(|t| t.strip_suffix(']'))
                    .ok_or_else(|| bad("products are written [g1;g2;...]"))?;
                let parts = split_top_level(inner, ';');
                if parts.len() != factors.len() {
                    return Err(bad(&format!("expected {} components", factors.len())));
                }
                Element::Tuple(
                    factors.iter().zip(parts).map(|(f, p)| f.parse_element(p)).collect::<Result<_>>()?,
                )
            }
        };
        self.check(&g)?;
        Ok(g)
    }

    /// Compact name accepted by [`GroupFamily::parse_short`].
    pub fn short_name(&self) -> String {
        match self {
            GroupFamily::Free { rank } => format!("f{rank}"),
            GroupFamily::FreeAbelian { rank: 1 } => "z".into(),
            GroupFamily::FreeAbelian { rank } => format!("z{rank}"),
            GroupFamily::Cyclic { order } => format!("c{order}"),
            GroupFamily::Heisenberg => "heis".into(),
            GroupFamily::Product(factors) => {
                factors.iter().map(GroupFamily::short_name).collect::<Vec<_>>().join("x")
            }
        }
    }

    /// Parses `z`, `z3`, `f2`, `c5`, `heis` and products such as `f2xz`.
    pub fn parse_short(name: &str) -> Result<GroupFamily> {
        let name = name.trim().to_ascii_lowercase();
        let factors: Vec<&str> = name.split('x').collect();
        if factors.len() > 1 {
            let fams = factors.iter().map(|f| Self::parse_short(f)).collect::<Result<Vec<_>>>()?;
            let fam = GroupFamily::Product(fams);
            fam.validate()?;
            return Ok(fam);
        }
        let num = |rest: &str, default: u64| -> Result<u64> {
            if rest.is_empty() {
                Ok(default)
            } else {
                rest.parse().map_err(|_| Error::Parse(format!("bad group name {name:?}")))
            }
        };
        let fam = if name == "heis" || name == "heisenberg" || name == "h3" {
            GroupFamily::Heisenberg
        } else if let Some(rest) = name.strip_prefix('z') {
            GroupFamily::FreeAbelian { rank: num(rest, 1)? as u32 }
        } else if let Some(rest) = name.strip_prefix('f') {
            GroupFamily::Free { rank: num(rest, 2)? as u32 }
        } else if let Some(rest) = name.strip_prefix('c') {
            GroupFamily::Cyclic { order: num(rest, 0)? }
        } else {
            return Err(Error::Parse(format!("unknown group name {name:?}")));
        };
        fam.validate()?;
        Ok(fam)
    }
}

fn parse_int_list(s: &str) -> std::result::Result<Vec<i64>, String> {
    let inner = s.strip_prefix('(').and_then(|t| t.strip_suffix(')')).unwrap_or(s);
    inner
        .split(',')
        .map(|t| t.trim().parse::<i64>().map_err(|_| format!("bad integer {t:?}")))
        .collect()
}

fn split_top_level(s: &str, sep: char) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '[' | '(' => depth += 1,
            ']' | ')' => depth -= 1,
            c if c == sep && depth == 0 => {
                out.push(&s[start..i]);
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Word(w) if w.is_empty() => write!(f, "1"),
            Element::Word(w) => {
                for &x in w {
                    let base = if x > 0 { b'a' } else { b'A' };
                    write!(f, "{}", (base + (x.unsigned_abs() as u8 - 1)) as char)?;
                }
                Ok(())
            }
            Element::Vector(v) => {
                write!(f, "(")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
            Element::Residue(r) => write!(f, "{r}"),
            Element::Heisenberg([a, b, c]) => write!(f, "({a},{b},{c})"),
            Element::Tuple(parts) => {
                write!(f, "[")?;
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, ";")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, "]")
            }
        }
    }
}

impl fmt::Display for GroupFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupFamily::Free { rank } => write!(f, "F{rank}"),
            GroupFamily::FreeAbelian { rank: 1 } => write!(f, "Z"),
            GroupFamily::FreeAbelian { rank } => write!(f, "Z^{rank}"),
            GroupFamily::Cyclic { order } => write!(f, "C{order}"),
            GroupFamily::Heisenberg => write!(f, "H3"),
            GroupFamily::Product(factors) => {
                let names: Vec<String> = factors.iter().map(|x| x.to_string()).collect();
                write!(f, "({})", names.join(" x "))
            }
        }
    }
}

/// A catalog group together with an inverse-closed generating set.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupSpec {
    family: GroupFamily,
    generators: Vec<Element>,
}

impl GroupSpec {
    /// The family with its default generating set.
    pub fn new(family: GroupFamily) -> Result<Self> {
        family.validate()?;
        let generators = family.default_generators();
        Ok(GroupSpec { family, generators })
    }

    /// The family with a custom generating set, which must be inverse-closed,
    /// free of duplicates and exclude the identity.
    pub fn with_generators(family: GroupFamily, generators: Vec<Element>) -> Result<Self> {
        family.validate()?;
        if generators.is_empty() {
            return Err(Error::InvalidSpec("generating set is empty".into()));
        }
        let id = family.identity();
        for (i, s) in generators.iter().enumerate() {
            family.check(s)?;
            if *s == id {
                return Err(Error::InvalidSpec("generating set contains the identity".into()));
            }
            if generators[..i].contains(s) {
                return Err(Error::InvalidSpec(format!("generator {s} listed twice")));
            }
            let inv = family.inv_unchecked(s);
            if !generators.contains(&inv) {
                return Err(Error::InvalidSpec(format!("generating set lacks the inverse {inv} of {s}")));
            }
        }
        Ok(GroupSpec { family, generators })
    }

    pub fn free(rank: u32) -> Result<Self> {
        Self::new(GroupFamily::Free { rank })
    }

    pub fn free_abelian(rank: u32) -> Result<Self> {
        Self::new(GroupFamily::FreeAbelian { rank })
    }

    pub fn cyclic(order: u64) -> Result<Self> {
        Self::new(GroupFamily::Cyclic { order })
    }

    pub fn heisenberg() -> Self {
        Self::new(GroupFamily::Heisenberg).expect("Heisenberg family is always valid")
    }

    /// Parses a short group name (see [`GroupFamily::parse_short`]) with default generators.
    pub fn parse_short(name: &str) -> Result<Self> {
        Self::new(GroupFamily::parse_short(name)?)
    }

    pub fn family(&self) -> &GroupFamily {
        &self.family
    }

    pub fn generators(&self) -> &[Element] {
        &self.generators
    }

    pub fn uses_default_generators(&self) -> bool {
        self.generators == self.family.default_generators()
    }

    pub fn identity(&self) -> Element {
        self.family.identity()
    }

    pub fn multiply(&self, g: &Element, h: &Element) -> Result<Element> {
        self.family.multiply(g, h)
    }

    pub fn inverse(&self, g: &Element) -> Result<Element> {
        self.family.inverse(g)
    }

    pub fn parse_element(&self, s: &str) -> Result<Element> {
        self.family.parse_element(s)
    }

    /// Stable textual identity of the spec: family plus generator list.
    pub fn canonical_string(&self) -> String {
        let gens: Vec<String> = self.generators.iter().map(|g| g.to_string()).collect();
        format!("{}|{}", self.family.short_name(), gens.join(","))
    }

    /// First 16 hex digits of the SHA-256 of [`GroupSpec::canonical_string`].
    pub fn hash_hex(&self) -> String {
        let digest = Sha256::digest(self.canonical_string().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn from_config(cfg: &GroupConfig) -> Result<Self> {
        let family = cfg.family()?;
        match &cfg.generators {
            None => Self::new(family),
            Some(list) => {
                let gens = list.iter().map(|s| family.parse_element(s)).collect::<Result<Vec<_>>>()?;
                Self::with_generators(family, gens)
            }
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: GroupConfig = toml::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_config(&cfg)
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.uses_default_generators() {
            write!(f, "{}", self.family)
        } else {
            let gens: Vec<String> = self.generators.iter().map(|g| g.to_string()).collect();
            write!(f, "{} <{}>", self.family, gens.join(","))
        }
    }
}

/// Structured text description of a group: family name, parameters and an
/// optional generator list written as normal forms.
///
/// ```toml
/// family = "free-abelian"
/// rank = 2
/// generators = ["(1,0)", "(-1,0)", "(0,1)", "(0,-1)", "(1,1)", "(-1,-1)"]
/// ```
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupConfig {
    pub family: String,
    #[serde(default)]
    pub rank: Option<u32>,
    #[serde(default)]
    pub order: Option<u64>,
    #[serde(default)]
    pub factors: Option<Vec<GroupConfig>>,
    #[serde(default)]
    pub generators: Option<Vec<String>>,
}

impl GroupConfig {
    pub fn family(&self) -> Result<GroupFamily> {
        let need_rank = || self.rank.ok_or_else(|| Error::Parse(format!("family {:?} needs `rank`", self.family)));
        let fam = match self.family.as_str() {
            "free" => GroupFamily::Free { rank: need_rank()? },
            "free-abelian" | "free_abelian" => GroupFamily::FreeAbelian { rank: need_rank()? },
            "cyclic" => GroupFamily::Cyclic {
                order: self.order.ok_or_else(|| Error::Parse("family \"cyclic\" needs `order`".into()))?,
            },
            "heisenberg" => GroupFamily::Heisenberg,
            "product" => {
                let factors = self
                    .factors
                    .as_ref()
                    .ok_or_else(|| Error::Parse("family \"product\" needs `factors`".into()))?;
                for f in factors {
                    if f.generators.is_some() {
                        return Err(Error::Parse("custom generators go on the product, not its factors".into()));
                    }
                }
                GroupFamily::Product(factors.iter().map(GroupConfig::family).collect::<Result<_>>()?)
            }
            other => return Err(Error::Parse(format!("unknown group family {other:?}"))),
        };
        fam.validate()?;
        Ok(fam)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2() -> GroupFamily {
        GroupFamily::Free { rank: 2 }
    }

    #[test]
    fn abelian_addition() {
        let z2 = GroupFamily::FreeAbelian { rank: 2 };
        let g = z2.multiply(&Element::Vector(vec![1, 0]), &Element::Vector(vec![0, 1])).unwrap();
        assert_eq!(g, Element::Vector(vec![1, 1]));
        assert_eq!(z2.inverse(&Element::Vector(vec![3, -1])).unwrap(), Element::Vector(vec![-3, 1]));
    }

    #[test]
    fn free_reduction_to_identity() {
        let a = f2().parse_element("a").unwrap();
        let a_inv = f2().parse_element("A").unwrap();
        assert_eq!(f2().multiply(&a, &a_inv).unwrap(), f2().identity());
        assert_eq!(f2().parse_element("abBA").unwrap(), f2().identity());
    }

    #[test]
    fn heisenberg_product_and_inverse() {
        let h = GroupFamily::Heisenberg;
        let x = Element::Heisenberg([1, 0, 0]);
        let y = Element::Heisenberg([0, 1, 0]);
        assert_eq!(h.multiply(&x, &y).unwrap(), Element::Heisenberg([1, 1, 1]));
        assert_eq!(h.inverse(&x).unwrap(), Element::Heisenberg([-1, 0, 0]));
        let g = Element::Heisenberg([2, -3, 5]);
        assert_eq!(h.multiply(&g, &h.inverse(&g).unwrap()).unwrap(), h.identity());
        // commutator x y x^-1 y^-1 is the central generator
        let xi = h.inverse(&x).unwrap();
        let yi = h.inverse(&y).unwrap();
        let c = [&y, &xi, &yi].iter().fold(x.clone(), |acc, s| h.multiply(&acc, s).unwrap());
        assert_eq!(c, Element::Heisenberg([0, 0, 1]));
    }

    #[test]
    fn cyclic_inverse() {
        let c5 = GroupFamily::Cyclic { order: 5 };
        assert_eq!(c5.inverse(&Element::Residue(2)).unwrap(), Element::Residue(3));
        assert_eq!(c5.parse_element("-1").unwrap(), Element::Residue(4));
    }

    #[test]
    fn family_mismatch_is_an_error() {
        let err = f2().multiply(&Element::Vector(vec![1]), &f2().identity());
        assert!(matches!(err, Err(Error::FamilyMismatch { .. })));
        // unreduced words do not conform
        assert!(!f2().conforms(&Element::Word(vec![1, -1])));
        assert!(!f2().conforms(&Element::Word(vec![3])));
    }

    #[test]
    fn default_generators_are_inverse_closed() {
        for name in ["z", "z3", "f2", "c2", "c5", "heis", "f2xz", "zxc3"] {
            let spec = GroupSpec::parse_short(name).unwrap();
            let fam = spec.family();
            for s in spec.generators() {
                assert!(spec.generators().contains(&fam.inv_unchecked(s)), "{name}: {s}");
                assert_ne!(*s, fam.identity());
            }
        }
        assert_eq!(GroupSpec::cyclic(2).unwrap().generators().len(), 1);
        assert_eq!(GroupSpec::free(2).unwrap().generators().len(), 4);
        assert_eq!(GroupSpec::parse_short("f2xz").unwrap().generators().len(), 6);
    }

    #[test]
    fn custom_generators_are_validated() {
        let z2 = GroupFamily::FreeAbelian { rank: 2 };
        let missing_inverse = vec![Element::Vector(vec![1, 0]), Element::Vector(vec![-1, 0]), Element::Vector(vec![0, 1])];
        assert!(GroupSpec::with_generators(z2.clone(), missing_inverse).is_err());
        let with_identity = vec![Element::Vector(vec![0, 0])];
        assert!(GroupSpec::with_generators(z2, with_identity).is_err());
    }

    #[test]
    fn display_round_trips() {
        let spec = GroupSpec::parse_short("f2xheisxc4").unwrap();
        let g = Element::Tuple(vec![
            Element::Word(vec![1, -2, 1]),
            Element::Heisenberg([1, -2, 3]),
            Element::Residue(3),
        ]);
        assert_eq!(g.to_string(), "[aBa;(1,-2,3);3]");
        assert_eq!(spec.parse_element(&g.to_string()).unwrap(), g);
    }

    #[test]
    fn toml_config_with_custom_generators() {
        let spec = GroupSpec::from_toml_str(
            r#"
            family = "free-abelian"
            rank = 2
            generators = ["(1,0)", "(-1,0)", "(0,1)", "(0,-1)", "(1,1)", "(-1,-1)"]
            "#,
        )
        .unwrap();
        assert_eq!(spec.generators().len(), 6);
        assert!(!spec.uses_default_generators());
        let bad = GroupSpec::from_toml_str("family = \"free\"\nrank = 2\ncolour = 3\n");
        assert!(bad.is_err());
        let prod = GroupSpec::from_toml_str(
            "family = \"product\"\nfactors = [{ family = \"free\", rank = 2 }, { family = \"cyclic\", order = 3 }]\n",
        )
        .unwrap();
        assert_eq!(prod.family().short_name(), "f2xc3");
    }

    #[test]
    fn spec_hash_depends_on_generators() {
        let a = GroupSpec::free_abelian(2).unwrap();
        let b = GroupSpec::from_toml_str(
            "family = \"free-abelian\"\nrank = 2\ngenerators = [\"(0,1)\", \"(0,-1)\", \"(1,0)\", \"(-1,0)\"]\n",
        )
        .unwrap();
        assert_ne!(a.hash_hex(), b.hash_hex());
        assert_eq!(a.hash_hex(), GroupSpec::free_abelian(2).unwrap().hash_hex());
        assert_eq!(a.hash_hex().len(), 16);
    }
}
