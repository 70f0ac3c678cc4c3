use num_complex::Complex64;

use super::{Element, GroupFamily};
use crate::algebra::AlgebraElement;
use crate::{Error, Result};

/// A homomorphism between catalog groups, fixed by the images of the source's
/// [`GroupFamily::basic_generators`]. Construction checks that the images
/// satisfy the source's defining relations.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupMorphism {
    source: GroupFamily,
    target: GroupFamily,
    images: Vec<Element>,
}

impl GroupMorphism {
    pub fn new(source: GroupFamily, target: GroupFamily, images: Vec<Element>) -> Result<Self> {
        source.validate()?;
        target.validate()?;
        let expected = source.basic_generators().len();
        if images.len() != expected {
            return Err(Error::InvalidSpec(format!(
                "{source} has {expected} basic generators but {} images were given",
                images.len()
            )));
        }
        for img in &images {
            target.check(img)?;
        }
        check_relations(&source, &target, &images)?;
        Ok(GroupMorphism { source, target, images })
    }

    pub fn identity(family: &GroupFamily) -> Result<Self> {
        Self::new(family.clone(), family.clone(), family.basic_generators())
    }

    /// `F_k → Z^k`, sending `x_i` to the i-th unit vector.
    pub fn abelianization(rank: u32) -> Result<Self> {
        let target = GroupFamily::FreeAbelian { rank };
        let images = target.basic_generators();
        Self::new(GroupFamily::Free { rank }, target, images)
    }

    pub fn source(&self) -> &GroupFamily {
        &self.source
    }

    pub fn target(&self) -> &GroupFamily {
        &self.target
    }

    pub fn images(&self) -> &[Element] {
        &self.images
    }

    pub fn apply(&self, g: &Element) -> Result<Element> {
        self.source.check(g)?;
        Ok(apply_on(&self.source, &self.target, &self.images, g))
    }

    /// `Σ a_g e_g ↦ Σ a_g e_{φ(g)}`; coefficients at a common image add up.
    pub fn push_forward(&self, a: &AlgebraElement) -> Result<AlgebraElement> {
        if a.family() != &self.source {
            return Err(Error::SpecMismatch { left: self.source.to_string(), right: a.family().to_string() });
        }
        let terms: Vec<(Element, Complex64)> = a
            .terms()
            .map(|(g, c)| (apply_on(&self.source, &self.target, &self.images, g), *c))
            .collect();
        AlgebraElement::from_terms(&self.target, terms)
    }
}

fn apply_on(source: &GroupFamily, target: &GroupFamily, images: &[Element], g: &Element) -> Element {
    let pow = |x: &Element, n: i64| target.pow(x, n).expect("image conforms to target");
    match (source, g) {
        (GroupFamily::Free { .. }, Element::Word(w)) => w.iter().fold(target.identity(), |acc, &l| {
            let img = &images[l.unsigned_abs() as usize - 1];
            let step = if l > 0 { img.clone() } else { target.inv_unchecked(img) };
            target.mul_unchecked(&acc, &step)
        }),
        (GroupFamily::FreeAbelian { .. }, Element::Vector(v)) => v
            .iter()
            .zip(images)
            .fold(target.identity(), |acc, (&n, img)| target.mul_unchecked(&acc, &pow(img, n))),
        (GroupFamily::Cyclic { .. }, Element::Residue(r)) => pow(&images[0], *r as i64),
        (GroupFamily::Heisenberg, Element::Heisenberg([a, b, c])) => {
            // (a,b,c) = x^a y^b z^{c-ab} with z = [x,y]
            let z = commutator(target, &images[0], &images[1]);
            let xy = target.mul_unchecked(&pow(&images[0], *a), &pow(&images[1], *b));
            target.mul_unchecked(&xy, &pow(&z, c - a * b))
        }
        (GroupFamily::Product(factors), Element::Tuple(parts)) => {
            let mut offset = 0;
            let mut acc = target.identity();
            for (f, part) in factors.iter().zip(parts) {
                let n = f.basic_generators().len();
                let img = apply_on(f, target, &images[offset..offset + n], part);
                acc = target.mul_unchecked(&acc, &img);
                offset += n;
            }
            acc
        }
        _ => unreachable!("element was checked against the source family"),
    }
}

fn commutator(fam: &GroupFamily, x: &Element, y: &Element) -> Element {
    let xy = fam.mul_unchecked(x, y);
    let xinv_yinv = fam.mul_unchecked(&fam.inv_unchecked(x), &fam.inv_unchecked(y));
    fam.mul_unchecked(&xy, &xinv_yinv)
}

fn commutes(fam: &GroupFamily, x: &Element, y: &Element) -> bool {
    fam.mul_unchecked(x, y) == fam.mul_unchecked(y, x)
}

fn check_relations(source: &GroupFamily, target: &GroupFamily, images: &[Element]) -> Result<()> {
    let violation = |what: String| Err(Error::RelationViolation(what));
    match source {
        GroupFamily::Free { .. } => Ok(()),
        GroupFamily::FreeAbelian { .. } => {
            for i in 0..images.len() {
                for j in i + 1..images.len() {
                    if !commutes(target, &images[i], &images[j]) {
                        return violation(format!(
                            "images {} and {} of generators {} and {} do not commute",
                            images[i],
                            images[j],
                            i + 1,
                            j + 1
                        ));
                    }
                }
            }
            Ok(())
        }
        GroupFamily::Cyclic { order } => {
            let p = target.pow(&images[0], *order as i64)?;
            if p == target.identity() {
                Ok(())
            } else {
                violation(format!("image {} raised to {order} is {p}, not the identity", images[0]))
            }
        }
        GroupFamily::Heisenberg => {
            let z = commutator(target, &images[0], &images[1]);
            for (name, img) in [("x", &images[0]), ("y", &images[1])] {
                if !commutes(target, &z, img) {
                    return violation(format!("commutator {z} of the images does not commute with the image {img} of {name}"));
                }
            }
            Ok(())
        }
        GroupFamily::Product(factors) => {
            let mut offset = 0;
            let mut ranges = Vec::new();
            for f in factors {
                let n = f.basic_generators().len();
                check_relations(f, target, &images[offset..offset + n])?;
                ranges.push(offset..offset + n);
                offset += n;
            }
            for (i, ri) in ranges.iter().enumerate() {
                for rj in &ranges[i + 1..] {
                    for x in &images[ri.clone()] {
                        for y in &images[rj.clone()] {
                            if !commutes(target, x, y) {
                                return violation(format!("images {x} and {y} of different factors do not commute"));
                            }
                        }
                    }
                }
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c1() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn abelianization_kills_commutator() {
        let phi = GroupMorphism::abelianization(2).unwrap();
        let f2 = GroupFamily::Free { rank: 2 };
        let comm = f2.parse_element("abAB").unwrap();
        assert_eq!(phi.apply(&comm).unwrap(), Element::Vector(vec![0, 0]));
        let a = AlgebraElement::from_terms(&f2, [(comm, c1())]).unwrap();
        let img = phi.push_forward(&a).unwrap();
        assert_eq!(img, AlgebraElement::unit(phi.target()));
    }

    #[test]
    fn abelianization_of_generators() {
        let phi = GroupMorphism::abelianization(2).unwrap();
        let f2 = GroupFamily::Free { rank: 2 };
        let a = AlgebraElement::from_terms(
            &f2,
            [(f2.parse_element("a").unwrap(), c1()), (f2.parse_element("b").unwrap(), c1())],
        )
        .unwrap();
        let expected = AlgebraElement::from_terms(
            phi.target(),
            [(Element::Vector(vec![1, 0]), c1()), (Element::Vector(vec![0, 1]), c1())],
        )
        .unwrap();
        assert_eq!(phi.push_forward(&a).unwrap(), expected);
    }

    #[test]
    fn images_accumulate() {
        let phi = GroupMorphism::abelianization(2).unwrap();
        let f2 = GroupFamily::Free { rank: 2 };
        let a = AlgebraElement::from_terms(
            &f2,
            [(f2.parse_element("ab").unwrap(), c1()), (f2.parse_element("ba").unwrap(), c1())],
        )
        .unwrap();
        let img = phi.push_forward(&a).unwrap();
        assert_eq!(img.len(), 1);
        assert_eq!(img.coefficient(&Element::Vector(vec![1, 1])), Complex64::new(2.0, 0.0));
    }

    #[test]
    fn identity_morphisms_fix_elements() {
        for fam in [
            GroupFamily::Heisenberg,
            GroupFamily::Cyclic { order: 5 },
            GroupFamily::Product(vec![GroupFamily::Free { rank: 2 }, GroupFamily::FreeAbelian { rank: 2 }]),
        ] {
            let id = GroupMorphism::identity(&fam).unwrap();
            for g in fam.default_generators() {
                let gg = fam.mul_unchecked(&g, &fam.mul_unchecked(&g, &g));
                assert_eq!(id.apply(&gg).unwrap(), gg);
            }
        }
        let heis = GroupFamily::Heisenberg;
        let id = GroupMorphism::identity(&heis).unwrap();
        let g = Element::Heisenberg([3, -2, 7]);
        assert_eq!(id.apply(&g).unwrap(), g);
    }

    #[test]
    fn heisenberg_onto_z2() {
        let target = GroupFamily::FreeAbelian { rank: 2 };
        let phi = GroupMorphism::new(GroupFamily::Heisenberg, target.clone(), target.basic_generators()).unwrap();
        assert_eq!(phi.apply(&Element::Heisenberg([2, -1, 9])).unwrap(), Element::Vector(vec![2, -1]));
    }

    #[test]
    fn relation_violations_are_reported() {
        let f2 = GroupFamily::Free { rank: 2 };
        let gens = f2.basic_generators();
        let err = GroupMorphism::new(GroupFamily::FreeAbelian { rank: 2 }, f2.clone(), gens.clone());
        assert!(matches!(err, Err(Error::RelationViolation(_))));
        let err = GroupMorphism::new(GroupFamily::Heisenberg, f2.clone(), gens);
        assert!(matches!(err, Err(Error::RelationViolation(_))));
        let err = GroupMorphism::new(
            GroupFamily::Cyclic { order: 4 },
            GroupFamily::Cyclic { order: 6 },
            vec![Element::Residue(1)],
        );
        assert!(matches!(err, Err(Error::RelationViolation(_))));
        let ok = GroupMorphism::new(
            GroupFamily::Cyclic { order: 4 },
            GroupFamily::Cyclic { order: 6 },
            vec![Element::Residue(3)],
        );
        assert!(ok.is_ok());
        let ok = GroupMorphism::new(
            GroupFamily::Cyclic { order: 6 },
            GroupFamily::Cyclic { order: 3 },
            vec![Element::Residue(1)],
        );
        assert!(ok.is_ok());
    }
}
