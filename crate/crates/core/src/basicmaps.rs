//! Basic maps `Tf(y) = χ(y, f(φ(y)))` between discrete function families:
//! construction, recognition, extraction of `(φ, χ)`, and the criteria that
//! force a map to be basic.

use std::fmt;

use crate::combinat::all_maps;
use crate::fintop::{FiniteSpace, PointSet};
use crate::funcrel::{BlackBoxMap, DiscreteBackend, DiscreteFamily, FamilyError, FunctionFamily, MapError, Relation};
use crate::ideals::{recover_homeo, IdealError};

pub type DiscreteMap<VX, VY> = BlackBoxMap<DiscreteBackend<VX>, DiscreteBackend<VY>>;

pub trait Val: Clone + PartialEq + fmt::Debug {}
impl<T: Clone + PartialEq + fmt::Debug> Val for T {}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BasicError {
    #[error("section at point {0} is undefined on a realized value {1}")]
    SectionDomainGap(usize, String),
    #[error("distinct members {0} and {1} have the same image")]
    NotInjective(usize, usize),
    #[error("not basic: members {f}, {g} agree at φ({y}) but their images differ at {y}")]
    NotBasic { f: usize, g: usize, y: usize },
    #[error("no φ makes the map basic")]
    Absent,
    #[error("several φ make the map basic: {0:?}")]
    MultipleBasicPhi(Vec<Vec<usize>>),
    #[error("family is not closed under operation {0}")]
    FamilyNotSubmodel(String),
    #[error("family is not a group under the given operation")]
    NotGroupFamily,
    #[error("map does not preserve non-vanishing of finite subfamilies")]
    NotNonvanishing,
    #[error("map is not a bijection")]
    NotBijection,
    #[error("family of {0} members exceeds the subfamily enumeration cap {1}")]
    CapExceeded(usize, usize),
    #[error("φ has the wrong length or range")]
    BadPhi,
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Ideal(#[from] IdealError),
}

impl From<MapError> for BasicError {
    fn from(_: MapError) -> Self {
        BasicError::NotBijection
    }
}

/// `φ: Y -> X` and sections `χ(y, ·)`, each defined on the values realized at `φ(y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Transform<VX, VY> {
    pub phi: Vec<usize>,
    pub sections: Vec<Vec<(VX, VY)>>,
}

impl<VX: Val, VY: Val> Transform<VX, VY> {
    pub fn section(&self, y: usize, v: &VX) -> Option<&VY> {
        self.sections[y].iter().find(|(a, _)| a == v).map(|(_, b)| b)
    }

    pub fn apply(&self, f: &[VX]) -> Option<Vec<VY>> {
        (0..self.phi.len()).map(|y| self.section(y, &f[self.phi[y]]).cloned()).collect()
    }
}

/// Builds `T` with `Tf(y) = χ(y, f(φ(y)))`. The target base function is `Tθ`.
pub fn build_basic<VX: Val, VY: Val>(
    source: &DiscreteFamily<VX>,
    target_space: FiniteSpace,
    target_codomain: Vec<VY>,
    transform: &Transform<VX, VY>,
) -> Result<DiscreteMap<VX, VY>, BasicError> {
    let ny = target_space.len();
    if transform.phi.len() != ny || transform.sections.len() != ny || transform.phi.iter().any(|&x| x >= source.space().len()) {
        return Err(BasicError::BadPhi);
    }
    let mut images = Vec::with_capacity(source.len());
    for f in source.members() {
        let mut img = Vec::with_capacity(ny);
        for y in 0..ny {
            let v = &f[transform.phi[y]];
            match transform.section(y, v) {
                Some(w) => img.push(w.clone()),
                None => return Err(BasicError::SectionDomainGap(y, format!("{v:?}"))),
            }
        }
        images.push(img);
    }
    for i in 0..images.len() {
        if let Some(j) = images[..i].iter().position(|g| *g == images[i]) {
            return Err(BasicError::NotInjective(j, i));
        }
    }
    let theta = images[source.theta_index()].clone();
    let target = FunctionFamily::new(
        DiscreteBackend {
            space: target_space,
            codomain: target_codomain,
            theta,
        },
        images.clone(),
    )?;
    let mapping = (0..images.len()).collect();
    Ok(BlackBoxMap::new(source.clone(), target, mapping)?.with_declared(&["basic"]))
}

/// First triple `(f, g, y)` with `f(φy) = g(φy)` but `Tf(y) != Tg(y)`.
pub fn basic_violation<VX: Val, VY: Val>(t: &DiscreteMap<VX, VY>, phi: &[usize]) -> Option<(usize, usize, usize)> {
    let (a, b) = (t.source.members(), t.target.members());
    for y in 0..phi.len() {
        let x = phi[y];
        for f in 0..a.len() {
            for g in f + 1..a.len() {
                if a[f][x] == a[g][x] && b[t.apply(f)][y] != b[t.apply(g)][y] {
                    return Some((f, g, y));
                }
            }
        }
    }
    None
}

pub fn is_phi_basic<VX: Val, VY: Val>(t: &DiscreteMap<VX, VY>, phi: &[usize]) -> bool {
    basic_violation(t, phi).is_none()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Extraction<VX, VY> {
    pub transform: Transform<VX, VY>,
    /// `Tf(y) = Tg(y)` forces `f(φy) = g(φy)` at every `y`.
    pub sections_injective: bool,
    /// Every section hits the whole target codomain.
    pub sections_surjective: bool,
}

/// Reads off the sections of a `φ`-basic map.
pub fn extract_transform<VX: Val, VY: Val>(t: &DiscreteMap<VX, VY>, phi: &[usize]) -> Result<Extraction<VX, VY>, BasicError> {
    if phi.len() != t.target.space().len() || phi.iter().any(|&x| x >= t.source.space().len()) {
        return Err(BasicError::BadPhi);
    }
    if let Some((f, g, y)) = basic_violation(t, phi) {
        return Err(BasicError::NotBasic { f, g, y });
    }
    let (a, b) = (t.source.members(), t.target.members());
    let mut sections = Vec::with_capacity(phi.len());
    for (y, &x) in phi.iter().enumerate() {
        let mut sec: Vec<(VX, VY)> = Vec::new();
        for f in 0..a.len() {
            if !sec.iter().any(|(v, _)| *v == a[f][x]) {
                sec.push((a[f][x].clone(), b[t.apply(f)][y].clone()));
            }
        }
        sections.push(sec);
    }
    let injective = sections.iter().all(|s| (0..s.len()).all(|i| (0..i).all(|j| s[i].1 != s[j].1)));
    let codomain = &t.target.backend().codomain;
    let surjective = sections.iter().all(|s| codomain.iter().all(|c| s.iter().any(|(_, w)| w == c)));
    Ok(Extraction {
        transform: Transform { phi: phi.to_vec(), sections },
        sections_injective: injective,
        sections_surjective: surjective,
    })
}

/// All maps `φ: Y -> X` for which `T` is `φ`-basic.
pub fn basic_phis<VX: Val, VY: Val>(t: &DiscreteMap<VX, VY>) -> Vec<Vec<usize>> {
    let (nx, ny) = (t.source.space().len(), t.target.space().len());
    all_maps(ny, nx).filter(|phi| is_phi_basic(t, phi)).collect()
}

/// The unique `φ` making `T` basic.
pub fn unique_basic_phi<VX: Val, VY: Val>(t: &DiscreteMap<VX, VY>) -> Result<Vec<usize>, BasicError> {
    let mut phis = basic_phis(t);
    match phis.len() {
        0 => Err(BasicError::Absent),
        1 => Ok(phis.pop().expect("one element")),
        _ => Err(BasicError::MultipleBasicPhi(phis)),
    }
}

/// An operation of the signature, interpreted on both codomains.
pub struct Operation<VX, VY> {
    pub name: String,
    pub arity: usize,
    pub on_x: Box<dyn Fn(&[VX]) -> VX>,
    pub on_y: Box<dyn Fn(&[VY]) -> VY>,
}

pub struct Signature<VX, VY> {
    pub ops: Vec<Operation<VX, VY>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignatureReport {
    /// `T` commutes with every operation.
    pub map_is_morphism: bool,
    /// Every section commutes with every operation on the fiber submodels.
    pub sections_are_morphisms: bool,
}

fn tuples(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    all_maps(k, n)
}

/// Compares "T is a morphism" with "every section is a morphism"; the two agree
/// for basic maps between submodels of the pointwise structure.
pub fn check_signature_correspondence<VX: Val, VY: Val>(
    t: &DiscreteMap<VX, VY>,
    transform: &Transform<VX, VY>,
    sig: &Signature<VX, VY>,
) -> Result<SignatureReport, BasicError> {
    let (a, b) = (t.source.members(), t.target.members());
    let n = a.len();
    let apply_x = |op: &Operation<VX, VY>, args: &[usize]| -> Vec<VX> {
        (0..t.source.space().len())
            .map(|x| (op.on_x)(&args.iter().map(|&i| a[i][x].clone()).collect::<Vec<_>>()))
            .collect()
    };
    let apply_y = |op: &Operation<VX, VY>, args: &[usize]| -> Vec<VY> {
        (0..t.target.space().len())
            .map(|y| (op.on_y)(&args.iter().map(|&i| b[t.apply(i)][y].clone()).collect::<Vec<_>>()))
            .collect()
    };
    let mut morphism = true;
    for op in &sig.ops {
        for args in tuples(n, op.arity) {
            let fx = apply_x(op, &args);
            let Some(i) = t.source.index_of(&fx) else {
                return Err(BasicError::FamilyNotSubmodel(op.name.clone()));
            };
            let gy = apply_y(op, &args);
            if t.target.index_of(&gy).is_none() {
                return Err(BasicError::FamilyNotSubmodel(op.name.clone()));
            }
            if b[t.apply(i)] != gy {
                morphism = false;
            }
        }
    }
    let mut sections = true;
    for (y, &x) in transform.phi.iter().enumerate() {
        let fiber: Vec<VX> = transform.sections[y].iter().map(|(v, _)| v.clone()).collect();
        if fiber.iter().any(|v| !a.iter().any(|f| f[x] == *v)) {
            return Err(BasicError::SectionDomainGap(y, "fiber".into()));
        }
        for op in &sig.ops {
            for args in tuples(fiber.len(), op.arity) {
                let vs: Vec<VX> = args.iter().map(|&i| fiber[i].clone()).collect();
                let out = (op.on_x)(&vs);
                let Some(lhs) = transform.section(y, &out) else {
                    return Err(BasicError::FamilyNotSubmodel(op.name.clone()));
                };
                let ws: Vec<VY> = vs.iter().map(|v| transform.section(y, v).expect("fiber value").clone()).collect();
                if *lhs != (op.on_y)(&ws) {
                    sections = false;
                }
            }
        }
    }
    Ok(SignatureReport {
        map_is_morphism: morphism,
        sections_are_morphisms: sections,
    })
}

/// A group structure on a codomain.
pub struct GroupSpec<V> {
    pub identity: V,
    pub op: Box<dyn Fn(&V, &V) -> V>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroupCriterion {
    /// `f(φy) = 1` implies `Tf(y) = 1`.
    pub criterion: bool,
    pub basic: bool,
}

/// For a group morphism between pointwise groups of functions, `T` is
/// `φ`-basic exactly when it preserves the identity fibers.
pub fn group_basic_criterion<VX: Val, VY: Val>(
    t: &DiscreteMap<VX, VY>,
    phi: &[usize],
    gx: &GroupSpec<VX>,
    gy: &GroupSpec<VY>,
) -> Result<GroupCriterion, BasicError> {
    let (a, b) = (t.source.members(), t.target.members());
    let n = a.len();
    let one_x = vec![gx.identity.clone(); t.source.space().len()];
    if t.source.index_of(&one_x).is_none() {
        return Err(BasicError::NotGroupFamily);
    }
    for f in 0..n {
        for g in 0..n {
            let fg: Vec<VX> = a[f].iter().zip(&a[g]).map(|(u, v)| (gx.op)(u, v)).collect();
            let Some(h) = t.source.index_of(&fg) else {
                return Err(BasicError::NotGroupFamily);
            };
            let tfg: Vec<VY> = b[t.apply(f)].iter().zip(&b[t.apply(g)]).map(|(u, v)| (gy.op)(u, v)).collect();
            if b[t.apply(h)] != tfg {
                return Err(BasicError::NotGroupFamily);
            }
        }
    }
    let criterion = (0..phi.len()).all(|y| (0..n).all(|f| a[f][phi[y]] != gx.identity || b[t.apply(f)][y] == gy.identity));
    Ok(GroupCriterion {
        criterion,
        basic: is_phi_basic(t, phi),
    })
}

pub const NONVANISHING_FAMILY_CAP: usize = 16;

fn zero_set<V: Val>(fam: &DiscreteFamily<V>, f: usize) -> PointSet {
    fam.space().whole().minus(fam.profile(f).nonzero)
}

/// First subfamily (as a bitmask over members) where `⋂[f = θ] = ∅` and
/// `⋂[Tf = θ] = ∅` disagree.
pub fn nonvanishing_violation<VX: Val, VY: Val>(t: &DiscreteMap<VX, VY>) -> Result<Option<u64>, BasicError> {
    let n = t.len();
    if n > NONVANISHING_FAMILY_CAP {
        return Err(BasicError::CapExceeded(n, NONVANISHING_FAMILY_CAP));
    }
    let zx: Vec<PointSet> = (0..n).map(|f| zero_set(&t.source, f)).collect();
    let zy: Vec<PointSet> = (0..n).map(|f| zero_set(&t.target, t.apply(f))).collect();
    for mask in 1u64..(1u64 << n) {
        let ix = (0..n)
            .filter(|i| mask >> i & 1 == 1)
            .fold(t.source.space().whole(), |acc, i| acc.inter(zx[i]));
        let iy = (0..n)
            .filter(|i| mask >> i & 1 == 1)
            .fold(t.target.space().whole(), |acc, i| acc.inter(zy[i]));
        if ix.is_empty() != iy.is_empty() {
            return Ok(Some(mask));
        }
    }
    Ok(None)
}

pub fn is_nonvanishing<VX: Val, VY: Val>(t: &DiscreteMap<VX, VY>) -> Result<bool, BasicError> {
    Ok(nonvanishing_violation(t)?.is_none())
}

/// A non-vanishing bijection is a `⊥⊥`-isomorphism; returns the `φ` with
/// `[f = θ] = φ([Tf = θ])`.
pub fn nonvanishing_to_homeo<VX: Val, VY: Val>(t: &DiscreteMap<VX, VY>) -> Result<Vec<usize>, BasicError> {
    if !is_nonvanishing(t)? {
        return Err(BasicError::NotNonvanishing);
    }
    if !t.preserves(Relation::PerpPerp) {
        return Err(BasicError::NotBijection);
    }
    let report = recover_homeo(t)?;
    let phi = report.phi;
    for f in 0..t.len() {
        let img = PointSet::from_points(zero_set(&t.target, t.apply(f)).points().map(|y| phi[y]));
        if img != zero_set(&t.source, f) {
            return Err(BasicError::NotNonvanishing);
        }
    }
    Ok(phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinat::permutations;

    fn bits(n: usize) -> DiscreteFamily<u8> {
        DiscreteFamily::full(FiniteSpace::discrete(n), vec![0, 1], vec![0; n]).unwrap()
    }

    fn permuted(fam: &DiscreteFamily<u8>, perm: &[usize]) -> DiscreteMap<u8, u8> {
        BlackBoxMap::new(fam.clone(), fam.clone(), perm.to_vec()).unwrap()
    }

    #[test]
    fn build_and_extract_round_trip() {
        let fam = bits(2);
        let tr = Transform {
            phi: vec![1, 0],
            sections: vec![vec![(0, 0), (1, 1)], vec![(0, 1), (1, 0)]],
        };
        let codomain = vec![0u8, 1];
        let t = build_basic(&fam, FiniteSpace::discrete(2), codomain, &tr).unwrap();
        let e = extract_transform(&t, &tr.phi).unwrap();
        assert_eq!(e.transform.phi, tr.phi);
        for f in fam.members() {
            assert_eq!(e.transform.apply(f), tr.apply(f));
        }
        assert!(e.sections_injective && e.sections_surjective);
        assert_eq!(unique_basic_phi(&t).unwrap(), vec![1, 0]);
    }

    #[test]
    fn section_gaps_are_reported() {
        let fam = bits(1);
        let tr = Transform {
            phi: vec![0],
            sections: vec![vec![(0u8, 0u8)]],
        };
        let gap = build_basic(&fam, FiniteSpace::discrete(1), vec![0, 1], &tr);
        assert!(matches!(gap, Err(BasicError::SectionDomainGap(0, _))));
    }

    #[test]
    fn swapping_constants_is_not_basic() {
        // on two values the swap is f ↦ ¬(f∘swap), which is basic, so use three
        let fam = DiscreteFamily::full(FiniteSpace::discrete(2), vec![0u8, 1, 2], vec![0; 2]).unwrap();
        let one = fam.index_of(&vec![1, 1]).unwrap();
        let two = fam.index_of(&vec![2, 2]).unwrap();
        let mut perm: Vec<usize> = (0..fam.len()).collect();
        perm.swap(one, two);
        let t: DiscreteMap<u8, u8> = BlackBoxMap::new(fam.clone(), fam.clone(), perm).unwrap();
        assert_eq!(unique_basic_phi(&t), Err(BasicError::Absent));
        assert!(matches!(extract_transform(&t, &[0, 1]), Err(BasicError::NotBasic { .. })));
    }

    #[test]
    fn constant_sections_admit_many_phis() {
        // target space with one point, source with two: T f = f(x0) is basic only via x0
        let fam = bits(1);
        let tr = Transform {
            phi: vec![0, 0],
            sections: vec![vec![(0, 0), (1, 1)], vec![(0, 0), (1, 1)]],
        };
        let t = build_basic(&fam, FiniteSpace::discrete(2), vec![0, 1], &tr).unwrap();
        assert_eq!(unique_basic_phi(&t).unwrap(), vec![0, 0]);
    }

    #[test]
    fn group_criterion_on_z2() {
        let fam = bits(2);
        let add = || GroupSpec {
            identity: 0u8,
            op: Box::new(|a: &u8, b: &u8| a ^ b) as Box<dyn Fn(&u8, &u8) -> u8>,
        };
        for perm in permutations(4) {
            let t = permuted(&fam, &perm);
            match group_basic_criterion(&t, &[0, 1], &add(), &add()) {
                Ok(c) => assert_eq!(c.criterion, c.basic, "{perm:?}"),
                Err(e) => assert_eq!(e, BasicError::NotGroupFamily),
            }
        }
    }

    #[test]
    fn signature_correspondence_for_xor() {
        let fam = bits(2);
        let tr = Transform {
            phi: vec![1, 0],
            sections: vec![vec![(0, 0), (1, 1)], vec![(0, 0), (1, 1)]],
        };
        let t = build_basic(&fam, FiniteSpace::discrete(2), vec![0, 1], &tr).unwrap();
        let sig = Signature {
            ops: vec![Operation {
                name: "xor".into(),
                arity: 2,
                on_x: Box::new(|v: &[u8]| v[0] ^ v[1]),
                on_y: Box::new(|v: &[u8]| v[0] ^ v[1]),
            }],
        };
        let r = check_signature_correspondence(&t, &tr, &sig).unwrap();
        assert!(r.map_is_morphism && r.sections_are_morphisms);
        // sections that fix 0 but are not additive do not exist on Z/2, so use constant-one op
        let sig1 = Signature {
            ops: vec![Operation {
                name: "one".into(),
                arity: 0,
                on_x: Box::new(|_: &[u8]| 1),
                on_y: Box::new(|_: &[u8]| 0),
            }],
        };
        let r1 = check_signature_correspondence(&t, &tr, &sig1).unwrap();
        assert_eq!(r1.map_is_morphism, r1.sections_are_morphisms);
        assert!(!r1.map_is_morphism);
    }

    #[test]
    fn nonvanishing_maps_give_homeomorphisms() {
        let fam = bits(2);
        for perm in permutations(4) {
            let t = permuted(&fam, &perm);
            if is_nonvanishing(&t).unwrap() {
                let phi = nonvanishing_to_homeo(&t).unwrap();
                assert!(t.preserves(Relation::PerpPerp));
                assert_eq!(phi.len(), 2);
            } else {
                assert_eq!(nonvanishing_to_homeo(&t), Err(BasicError::NotNonvanishing));
            }
        }
    }

    #[test]
    fn nonvanishing_cap() {
        let fam = DiscreteFamily::full(FiniteSpace::discrete(3), vec![0u8, 1, 2], vec![0; 3]).unwrap();
        let t = permuted(&fam, &(0..fam.len()).collect::<Vec<_>>());
        assert!(matches!(is_nonvanishing(&t), Err(BasicError::CapExceeded(27, 16))));
    }
}
