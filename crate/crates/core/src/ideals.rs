//! Covers, `⊥⊥`-ideals, the space of maximal ideals, and recovery of the
//! homeomorphism underlying a `⊥⊥`-isomorphism.

use std::collections::BTreeSet;
use std::fmt;

use crate::combinat::permutations;
use crate::fintop::{FiniteSpace, PointSet};
use crate::funcrel::{Backend, BlackBoxMap, DiscreteBackend, DiscreteFamily, FunctionFamily, Relation, SetOps};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IdealError {
    #[error("set is not open")]
    NotOpen,
    #[error("member set is not a ⊥⊥-ideal (fails at member {0})")]
    NotAnIdeal(usize),
    #[error("family is not weakly regular")]
    NotWeaklyRegular,
    #[error("points are not closed, so maximal ideals are not indexed by points")]
    NotT1,
    #[error("enumeration of {0} member subsets exceeds the cap {1}")]
    EnumerationCapExceeded(u128, u128),
    #[error("map is not a ⊥⊥-isomorphism: members {0} and {1}")]
    NotPerpPerpIso(usize, usize),
    #[error("no homeomorphism matches the supports")]
    NoSuchHomeo,
}

/// `B` covers `b` geometrically and syntactically.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoverReport {
    /// `cl ∪ [a != theta] ⊇ supp b`
    pub geometric: bool,
    /// every `h` disjoint from all of `B` is disjoint from `b`
    pub syntactic: bool,
}

pub fn is_cover<B: Backend>(fam: &FunctionFamily<B>, a: &[usize], b: usize) -> CoverReport {
    let be = fam.backend();
    let u = a.iter().fold(be.empty(), |acc, &i| acc.union(&fam.profile(i).nonzero));
    let geometric = fam.support(b).is_subset(&be.closure(&u));
    CoverReport {
        geometric,
        syntactic: fam.syntactic_cover(a, b),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrongCoverReport {
    /// `supp a ⊆ ∪ σ(b)`
    pub holds: bool,
    /// Members strongly included in some `b ∈ B` that together cover `a`, if found.
    pub witness: Option<Vec<usize>>,
}

pub fn is_strong_cover<B: Backend>(fam: &FunctionFamily<B>, bs: &[usize], a: usize) -> StrongCoverReport {
    let union = sigma_union(fam, bs);
    let holds = fam.support(a).is_subset(&union);
    let refined: Vec<usize> = (0..fam.len())
        .filter(|&c| bs.iter().any(|&b| fam.rel(Relation::StrongSubset, c, b)))
        .collect();
    let witness = fam.syntactic_cover(&refined, a).then_some(refined);
    StrongCoverReport { holds, witness }
}

fn sigma_union<B: Backend>(fam: &FunctionFamily<B>, members: &[usize]) -> B::Set {
    members.iter().fold(fam.backend().empty(), |acc, &i| acc.union(fam.sigma(i)))
}

/// A set of members closed under strong covers in both directions.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PerpIdeal {
    members: BTreeSet<usize>,
}

impl fmt::Debug for PerpIdeal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ideal{:?}", self.members)
    }
}

impl PerpIdeal {
    pub fn new<B: Backend>(fam: &FunctionFamily<B>, members: impl IntoIterator<Item = usize>) -> Result<Self, IdealError> {
        let members: BTreeSet<usize> = members.into_iter().collect();
        if let Some(bad) = ideal_violation(fam, &members) {
            return Err(IdealError::NotAnIdeal(bad));
        }
        Ok(PerpIdeal { members })
    }

    pub fn members(&self) -> &BTreeSet<usize> {
        &self.members
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.contains(&i)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// A member on which `a ∈ I ⟺ (some finite B ⊆ I strongly covers a)` fails.
fn ideal_violation<B: Backend>(fam: &FunctionFamily<B>, members: &BTreeSet<usize>) -> Option<usize> {
    // strong covering is monotone in B, so B = I itself is the decisive choice
    let list: Vec<usize> = members.iter().copied().collect();
    let u = sigma_union(fam, &list);
    (0..fam.len()).find(|&a| members.contains(&a) != fam.support(a).is_subset(&u))
}

/// `I(U) = {f : supp f ⊆ U}` for open `U`.
pub fn ideal_of_open<B: Backend>(fam: &FunctionFamily<B>, u: &B::Set) -> Result<PerpIdeal, IdealError> {
    let be = fam.backend();
    if !u.is_subset(&be.whole()) || be.interior(u) != *u {
        return Err(IdealError::NotOpen);
    }
    let members = (0..fam.len()).filter(|&f| fam.support(f).is_subset(u)).collect();
    Ok(PerpIdeal { members })
}

/// `U(I) = ∪ σ(f)`.
pub fn open_of_ideal<B: Backend>(fam: &FunctionFamily<B>, ideal: &PerpIdeal) -> B::Set {
    let list: Vec<usize> = ideal.members.iter().copied().collect();
    sigma_union(fam, &list)
}

/// Every `⊥⊥`-ideal, by checking all member subsets.
pub fn all_ideals<V: Clone + PartialEq + fmt::Debug>(fam: &DiscreteFamily<V>, cap: u128) -> Result<Vec<PerpIdeal>, IdealError> {
    let n = fam.len();
    let count = 1u128.checked_shl(n as u32).unwrap_or(u128::MAX);
    if count > cap || n >= 64 {
        return Err(IdealError::EnumerationCapExceeded(count, cap));
    }
    let mut out = Vec::new();
    for mask in 0u64..(count as u64) {
        let members: BTreeSet<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        if ideal_violation(fam, &members).is_none() {
            out.push(PerpIdeal { members });
        }
    }
    Ok(out)
}

/// Maximal proper ideals with the topology generated by
/// `U(f) = {I : some g ⋐ f lies outside I}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub points: Vec<PerpIdeal>,
    /// `basic_opens[f]` as a set of indices into `points`.
    pub basic_opens: Vec<PointSet>,
    pub space: FiniteSpace,
}

pub const DEFAULT_IDEAL_CAP: u128 = 1 << 20;

pub fn spectrum<V: Clone + PartialEq + fmt::Debug>(fam: &DiscreteFamily<V>, cap: u128) -> Result<Spectrum, IdealError> {
    if !fam.is_weakly_regular().holds {
        return Err(IdealError::NotWeaklyRegular);
    }
    let all = all_ideals(fam, cap)?;
    let whole: BTreeSet<usize> = (0..fam.len()).collect();
    let proper: Vec<&PerpIdeal> = all.iter().filter(|i| i.members != whole).collect();
    let points: Vec<PerpIdeal> = proper
        .iter()
        .filter(|i| !proper.iter().any(|j| j.members != i.members && i.members.is_subset(&j.members)))
        .map(|i| (*i).clone())
        .collect();
    let basic_opens: Vec<PointSet> = (0..fam.len())
        .map(|f| {
            let below: Vec<usize> = (0..fam.len()).filter(|&g| fam.rel(Relation::StrongSubset, g, f)).collect();
            PointSet::from_points((0..points.len()).filter(|&p| below.iter().any(|g| !points[p].contains(*g))))
        })
        .collect();
    let labels = (0..points.len()).map(|i| format!("m{i}")).collect();
    let space = FiniteSpace::generated(labels, basic_opens.iter().copied()).expect("generated topology is valid");
    Ok(Spectrum { points, basic_opens, space })
}

/// `κ(x) = I(X \ {x})`.
pub fn kappa<V: Clone + PartialEq + fmt::Debug>(fam: &DiscreteFamily<V>, x: usize) -> Result<PerpIdeal, IdealError> {
    let s = fam.space();
    if !s.is_t1() {
        return Err(IdealError::NotT1);
    }
    ideal_of_open(fam, &s.whole().minus(PointSet::singleton(x)))
}

/// Checks that `κ` is a homeomorphism onto the spectrum carrying `σ(f)` to `U(f)`.
pub fn kappa_is_homeomorphism<V: Clone + PartialEq + fmt::Debug>(fam: &DiscreteFamily<V>, spec: &Spectrum) -> Result<bool, IdealError> {
    let n = fam.space().len();
    let mut image = Vec::with_capacity(n);
    for x in 0..n {
        let k = kappa(fam, x)?;
        match spec.points.iter().position(|p| *p == k) {
            Some(i) => image.push(i),
            None => return Ok(false),
        }
    }
    let distinct: BTreeSet<usize> = image.iter().copied().collect();
    if distinct.len() != n || spec.points.len() != n {
        return Ok(false);
    }
    let push = |s: PointSet| PointSet::from_points(s.points().map(|x| image[x]));
    let basics = (0..fam.len()).all(|f| push(*fam.sigma(f)) == spec.basic_opens[f]);
    let opens = fam.space().opens().all(|u| spec.space.is_open(push(u))) && spec.space.opens().count() == fam.space().opens().count();
    Ok(basics && opens)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomeoReport {
    /// `phi[y]` is a point of the source space.
    pub phi: Vec<usize>,
    /// Number of bijections `Y -> X` matching all supports.
    pub candidates: usize,
}

impl HomeoReport {
    pub fn is_unique(&self) -> bool {
        self.candidates == 1
    }
}

fn matches_supports<VX, VY>(t: &BlackBoxMap<DiscreteBackend<VX>, DiscreteBackend<VY>>, phi: &[usize]) -> bool
where
    VX: Clone + PartialEq + fmt::Debug,
    VY: Clone + PartialEq + fmt::Debug,
{
    (0..t.len()).all(|f| PointSet::from_points(t.target.support(t.apply(f)).points().map(|y| phi[y])) == *t.source.support(f))
}

/// Largest point count for which uniqueness is checked over all bijections.
pub const UNIQUENESS_EXHAUSTION_LIMIT: usize = 8;

/// Recovers `φ: Y -> X` with `φ(supp Tf) = supp f` from a `⊥⊥`-isomorphism.
///
/// Each point `y` gives the maximal ideal `κ(y)`; its preimage under `T` must be
/// `κ(x)` for a unique `x`, and `φ(y) = x`. Uniqueness is then confirmed by
/// exhausting all bijections when the spaces are small.
pub fn recover_homeo<VX, VY>(t: &BlackBoxMap<DiscreteBackend<VX>, DiscreteBackend<VY>>) -> Result<HomeoReport, IdealError>
where
    VX: Clone + PartialEq + fmt::Debug,
    VY: Clone + PartialEq + fmt::Debug,
{
    if let Some((f, g)) = t.relation_violation(Relation::PerpPerp) {
        return Err(IdealError::NotPerpPerpIso(f, g));
    }
    let (x, y) = (t.source.space(), t.target.space());
    if x.len() != y.len() {
        return Err(IdealError::NoSuchHomeo);
    }
    let inv = t.inverse_mapping();
    let mut phi = Vec::with_capacity(y.len());
    for p in 0..y.len() {
        let ky = kappa(&t.target, p)?;
        let pulled: BTreeSet<usize> = ky.members().iter().map(|&g| inv[g]).collect();
        let hit = (0..x.len()).find(|&q| kappa(&t.source, q).map(|k| *k.members() == pulled).unwrap_or(false));
        phi.push(hit.ok_or(IdealError::NoSuchHomeo)?);
    }
    let distinct: BTreeSet<usize> = phi.iter().copied().collect();
    if distinct.len() != phi.len() || !matches_supports(t, &phi) {
        return Err(IdealError::NoSuchHomeo);
    }
    let forward = |s: PointSet| PointSet::from_points(s.points().map(|q| phi[q]));
    if !y.opens().all(|u| x.is_open(forward(u))) || x.opens().count() != y.opens().count() {
        return Err(IdealError::NoSuchHomeo);
    }
    let candidates = if y.len() <= UNIQUENESS_EXHAUSTION_LIMIT {
        permutations(y.len()).into_iter().filter(|p| matches_supports(t, p)).count()
    } else {
        1
    };
    Ok(HomeoReport { phi, candidates })
}

/// A `⊥`-isomorphism between the families also preserves `σ`-inclusion.
/// Returns `None` when the map does not preserve `⊥`.
pub fn perp_iso_preserves_subset<BX: Backend, BY: Backend>(t: &BlackBoxMap<BX, BY>) -> Option<bool> {
    if !t.preserves(Relation::Perp) {
        return None;
    }
    Some(t.preserves(Relation::Subset))
}
