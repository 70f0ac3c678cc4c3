use std::collections::{HashMap, HashSet};
use std::fs;
use std::io::{BufRead, Write};
use std::path::Path;

use rayon::prelude::*;

use super::{Element, GroupSpec, GrowthCounts};
use crate::{Error, Result};

/// Default upper bound on the number of elements a ball may hold.
pub const DEFAULT_BALL_CAP: usize = 5_000_000;

const CACHE_MAGIC: &str = "wga-ball-cache v1";
const EXPAND_CHUNK: usize = 1 << 14;

/// The Cayley ball of radius `radius`: every element of word length at most
/// `radius`, its exact length, and the surface/volume growth arrays.
#[derive(Clone, Debug, PartialEq)]
pub struct LengthTable {
    spec: GroupSpec,
    radius: u32,
    lengths: HashMap<Element, u32>,
    shells: Vec<Vec<Element>>,
    sigma: Vec<u64>,
    beta: Vec<u64>,
}

pub fn enumerate_ball(spec: &GroupSpec, radius: u32) -> Result<LengthTable> {
    enumerate_ball_capped(spec, radius, DEFAULT_BALL_CAP)
}

/// Breadth-first search from the identity over right multiplication by the
/// generators. Shells are sorted by normal form, so the table does not
/// depend on traversal order.
pub fn enumerate_ball_capped(spec: &GroupSpec, radius: u32, cap: usize) -> Result<LengthTable> {
    let family = spec.family();
    let gens = spec.generators();
    let id = spec.identity();
    let mut lengths: HashMap<Element, u32> = HashMap::new();
    lengths.insert(id.clone(), 0);
    let mut shells = vec![vec![id]];

    for n in 1..=radius {
        let frontier = &shells[n as usize - 1];
        let mut next: HashSet<Element> = HashSet::new();
        for chunk in frontier.chunks(EXPAND_CHUNK) {
            let found: Vec<Element> = chunk
                .par_iter()
                .flat_map_iter(|g| gens.iter().map(move |s| family.mul_unchecked(g, s)))
                .filter(|x| !lengths.contains_key(x))
                .collect();
            next.extend(found);
        }
        if lengths.len() + next.len() > cap {
            return Err(Error::BallCapExceeded { cap, radius: n });
        }
        let mut shell: Vec<Element> = next.into_iter().collect();
        shell.par_sort_unstable();
        for g in &shell {
            lengths.insert(g.clone(), n);
        }
        shells.push(shell);
    }
    Ok(LengthTable::from_parts(spec.clone(), radius, lengths, shells))
}

/// Loads the ball from `cache_dir` when a matching cache file exists,
/// otherwise enumerates it and writes the cache.
pub fn load_or_enumerate(spec: &GroupSpec, radius: u32, cache_dir: Option<&Path>, cap: usize) -> Result<LengthTable> {
    let Some(dir) = cache_dir else {
        return enumerate_ball_capped(spec, radius, cap);
    };
    let path = dir.join(LengthTable::cache_file_name(spec, radius));
    if path.exists() {
        let file = fs::File::open(&path)?;
        log::debug!("reading cached ball {}", path.display());
        return LengthTable::read_cache(std::io::BufReader::new(file), spec);
    }
    let table = enumerate_ball_capped(spec, radius, cap)?;
    fs::create_dir_all(dir)?;
    let tmp = path.with_extension("tmp");
    {
        let mut w = std::io::BufWriter::new(fs::File::create(&tmp)?);
        table.write_cache(&mut w)?;
        w.flush()?;
    }
    fs::rename(&tmp, &path)?;
    Ok(table)
}

impl LengthTable {
    fn from_parts(spec: GroupSpec, radius: u32, lengths: HashMap<Element, u32>, shells: Vec<Vec<Element>>) -> Self {
        let sigma: Vec<u64> = shells.iter().map(|s| s.len() as u64).collect();
        let beta: Vec<u64> = sigma
            .iter()
            .scan(0u64, |acc, s| {
                *acc += s;
                Some(*acc)
            })
            .collect();
        LengthTable { spec, radius, lengths, shells, sigma, beta }
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    /// Number of elements in the ball.
    pub fn len(&self) -> usize {
        self.lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }

    /// `σ_G(0..=radius)`: number of elements of each exact length.
    pub fn sigma(&self) -> &[u64] {
        &self.sigma
    }

    /// `β_G(0..=radius)`: number of elements of length at most `n`.
    pub fn beta(&self) -> &[u64] {
        &self.beta
    }

    /// Elements of length exactly `n`, sorted by normal form.
    pub fn shell(&self, n: u32) -> Result<&[Element]> {
        self.shells
            .get(n as usize)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::OutOfBall(format!("shell {n} beyond radius {}", self.radius)))
    }

    /// All elements ordered by length, then normal form.
    pub fn elements(&self) -> impl Iterator<Item = (&Element, u32)> {
        self.shells.iter().enumerate().flat_map(|(n, s)| s.iter().map(move |g| (g, n as u32)))
    }

    pub fn get(&self, g: &Element) -> Option<u32> {
        self.lengths.get(g).copied()
    }

    pub fn contains(&self, g: &Element) -> bool {
        self.lengths.contains_key(g)
    }

    /// Word length `L(g)`; `OutOfBall` when `g` lies beyond the radius.
    pub fn word_length(&self, g: &Element) -> Result<u32> {
        self.spec.family().check(g)?;
        self.get(g).ok_or_else(|| Error::OutOfBall(g.to_string()))
    }

    /// Word metric `d(g, h) = L(g⁻¹h)`.
    pub fn word_metric(&self, g: &Element, h: &Element) -> Result<u32> {
        let gi = self.spec.inverse(g)?;
        let d = self.spec.multiply(&gi, h)?;
        self.word_length(&d)
    }

    pub fn counts(&self) -> GrowthCounts {
        GrowthCounts::from_table(self)
    }

    pub fn cache_file_name(spec: &GroupSpec, radius: u32) -> String {
        format!("ball-{}-r{radius}.txt", spec.hash_hex())
    }

    /// Writes the versioned cache: header (magic, spec, hash, radius, count)
    /// followed by one `normal-form,length` row per element.
    pub fn write_cache<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "{CACHE_MAGIC}")?;
        writeln!(w, "spec {}", self.spec.canonical_string())?;
        writeln!(w, "hash {}", self.spec.hash_hex())?;
        writeln!(w, "radius {}", self.radius)?;
        writeln!(w, "elements {}", self.len())?;
        for (g, n) in self.elements() {
            writeln!(w, "{g},{n}")?;
        }
        Ok(())
    }

    pub fn to_cache_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_cache(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("cache output is ASCII")
    }

    pub fn read_cache<R: BufRead>(r: R, spec: &GroupSpec) -> Result<LengthTable> {
        let corrupt = |why: String| Error::CacheCorrupt(why);
        let mut lines = r.lines();
        let mut header = |key: &str| -> Result<String> {
            let line = lines.next().ok_or_else(|| corrupt(format!("missing {key} line")))??;
            if key.is_empty() {
                return Ok(line);
            }
            line.strip_prefix(key)
                .and_then(|rest| rest.strip_prefix(' '))
                .map(str::to_owned)
                .ok_or_else(|| corrupt(format!("expected `{key}` header, found {line:?}")))
        };
        let magic = header("")?;
        if magic != CACHE_MAGIC {
            return Err(corrupt(format!("unknown cache version {magic:?}")));
        }
        let canonical = header("spec")?;
        let hash = header("hash")?;
        if canonical != spec.canonical_string() || hash != spec.hash_hex() {
            return Err(corrupt(format!("spec hash mismatch: file has {hash}, expected {}", spec.hash_hex())));
        }
        let radius: u32 = header("radius")?.parse().map_err(|_| corrupt("bad radius".into()))?;
        let count: usize = header("elements")?.parse().map_err(|_| corrupt("bad element count".into()))?;

        let mut lengths = HashMap::with_capacity(count);
        let mut shells: Vec<Vec<Element>> = vec![Vec::new(); radius as usize + 1];
        for line in lines {
            let line = line?;
            let (form, len) = line.rsplit_once(',').ok_or_else(|| corrupt(format!("bad row {line:?}")))?;
            let n: u32 = len.parse().map_err(|_| corrupt(format!("bad length in {line:?}")))?;
            if n > radius {
                return Err(corrupt(format!("length {n} exceeds radius {radius}")));
            }
            let g = spec.parse_element(form).map_err(|e| corrupt(e.to_string()))?;
            if lengths.insert(g.clone(), n).is_some() {
                return Err(corrupt(format!("duplicate element {g}")));
            }
            shells[n as usize].push(g);
        }
        if lengths.len() != count {
            return Err(corrupt(format!("expected {count} rows, found {}", lengths.len())));
        }
        if lengths.get(&spec.identity()) != Some(&0) {
            return Err(corrupt("identity missing or not at length 0".into()));
        }
        for shell in &mut shells {
            shell.sort_unstable();
        }
        Ok(LengthTable::from_parts(spec.clone(), radius, lengths, shells))
    }

    /// `n,sigma,beta` rows for plotting.
    pub fn growth_csv(&self) -> String {
        let mut out = String::from("n,sigma,beta\n");
        for (n, (s, b)) in self.sigma.iter().zip(&self.beta).enumerate() {
            out.push_str(&format!("{n},{s},{b}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::GroupFamily;

    #[test]
    fn integers_have_constant_surface_growth() {
        let t = enumerate_ball(&GroupSpec::free_abelian(1).unwrap(), 5).unwrap();
        assert_eq!(t.sigma(), &[1, 2, 2, 2, 2, 2]);
    }

    #[test]
    fn free_group_small_ball() {
        let t = enumerate_ball(&GroupSpec::free(2).unwrap(), 3).unwrap();
        assert_eq!(t.sigma(), &[1, 4, 12, 36]);
        let g = t.spec().parse_element("abA").unwrap();
        assert_eq!(t.word_length(&g).unwrap(), 3);
        assert_eq!(t.word_length(&t.spec().identity()).unwrap(), 0);
    }

    #[test]
    fn z2_volume() {
        let t = enumerate_ball(&GroupSpec::free_abelian(2).unwrap(), 2).unwrap();
        assert_eq!(t.beta(), &[1, 5, 13]);
    }

    #[test]
    fn heisenberg_center_length() {
        let t = enumerate_ball(&GroupSpec::heisenberg(), 6).unwrap();
        let z = Element::Heisenberg([0, 0, 1]);
        let l = t.word_length(&z).unwrap();
        assert!(l <= 4, "commutator bounds L(z) by 4, got {l}");
        assert_eq!(l, 4);
    }

    #[test]
    fn finite_groups_saturate() {
        let t = enumerate_ball(&GroupSpec::cyclic(5).unwrap(), 4).unwrap();
        assert_eq!(t.sigma(), &[1, 2, 2, 0, 0]);
        let t2 = enumerate_ball(&GroupSpec::cyclic(2).unwrap(), 2).unwrap();
        assert_eq!(t2.sigma(), &[1, 1, 0]);
    }

    #[test]
    fn out_of_ball_and_metric() {
        let t = enumerate_ball(&GroupSpec::free_abelian(1).unwrap(), 5).unwrap();
        let far = Element::Vector(vec![9]);
        assert!(matches!(t.word_length(&far), Err(Error::OutOfBall(_))));
        let two = Element::Vector(vec![2]);
        let five = Element::Vector(vec![5]);
        assert_eq!(t.word_metric(&two, &five).unwrap(), 3);
        assert_eq!(t.word_metric(&five, &five).unwrap(), 0);
    }

    #[test]
    fn cap_is_enforced() {
        let err = enumerate_ball_capped(&GroupSpec::free(2).unwrap(), 6, 100).unwrap_err();
        assert!(matches!(err, Error::BallCapExceeded { cap: 100, .. }));
    }

    #[test]
    fn cache_round_trip_is_byte_identical() {
        let spec = GroupSpec::new(GroupFamily::Product(vec![
            GroupFamily::Free { rank: 2 },
            GroupFamily::Cyclic { order: 3 },
        ]))
        .unwrap();
        let t = enumerate_ball(&spec, 3).unwrap();
        let text = t.to_cache_string();
        let back = LengthTable::read_cache(text.as_bytes(), &spec).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.to_cache_string(), text);
    }

    #[test]
    fn cache_detects_corruption() {
        let spec = GroupSpec::free(2).unwrap();
        let text = enumerate_ball(&spec, 2).unwrap().to_cache_string();
        let other = GroupSpec::free_abelian(2).unwrap();
        assert!(matches!(LengthTable::read_cache(text.as_bytes(), &other), Err(Error::CacheCorrupt(_))));
        let truncated: String = text.lines().take(8).map(|l| format!("{l}\n")).collect();
        assert!(matches!(LengthTable::read_cache(truncated.as_bytes(), &spec), Err(Error::CacheCorrupt(_))));
        let tampered = text.replace("hash ", "hash 0");
        assert!(LengthTable::read_cache(tampered.as_bytes(), &spec).is_err());
    }

    #[test]
    fn cache_directory_reuse() {
        let dir = tempfile::tempdir().unwrap();
        let spec = GroupSpec::heisenberg();
        let fresh = load_or_enumerate(&spec, 4, Some(dir.path()), DEFAULT_BALL_CAP).unwrap();
        let cached = load_or_enumerate(&spec, 4, Some(dir.path()), DEFAULT_BALL_CAP).unwrap();
        assert_eq!(fresh, cached);
        let path = dir.path().join(LengthTable::cache_file_name(&spec, 4));
        assert_eq!(fs::read_to_string(path).unwrap(), fresh.to_cache_string());
    }
}
