//! Function families on finite spaces or PL domains, the four disjointness and
//! inclusion relations between their members, and the syntactic
//! reformulations of each relation in terms of another one.

use std::collections::BTreeSet;
use std::fmt;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::combinat::for_each_combination;
use crate::exact::Q;
use crate::fintop::{FiniteSpace, PointSet, SpaceJson, TopologyError};
use crate::plspace::{IntervalSet, PLFunction, PlError, PlJson};

pub trait SetOps: Clone + PartialEq + fmt::Debug {
    fn union(&self, o: &Self) -> Self;
    fn inter(&self, o: &Self) -> Self;
    fn is_subset(&self, o: &Self) -> bool;
    fn is_empty(&self) -> bool;
}

impl SetOps for PointSet {
    fn union(&self, o: &Self) -> Self {
        PointSet::union(*self, *o)
    }
    fn inter(&self, o: &Self) -> Self {
        PointSet::inter(*self, *o)
    }
    fn is_subset(&self, o: &Self) -> bool {
        PointSet::is_subset(*self, *o)
    }
    fn is_empty(&self) -> bool {
        PointSet::is_empty(*self)
    }
}

impl SetOps for IntervalSet {
    fn union(&self, o: &Self) -> Self {
        IntervalSet::union(self, o)
    }
    fn inter(&self, o: &Self) -> Self {
        IntervalSet::inter(self, o)
    }
    fn is_subset(&self, o: &Self) -> bool {
        IntervalSet::is_subset(self, o)
    }
    fn is_empty(&self) -> bool {
        IntervalSet::is_empty(self)
    }
}

/// Where the functions of a family live and how to compute their supports.
pub trait Backend {
    type Func: Clone + PartialEq + fmt::Debug;
    type Set: SetOps;

    fn empty(&self) -> Self::Set;
    fn whole(&self) -> Self::Set;
    /// `[f != theta]`
    fn nonzero(&self, f: &Self::Func) -> Self::Set;
    fn closure(&self, s: &Self::Set) -> Self::Set;
    fn interior(&self, s: &Self::Set) -> Self::Set;
    /// `f` and `g` agree on every point of `s`.
    fn agree_on(&self, f: &Self::Func, g: &Self::Func, s: &Self::Set) -> bool;
    fn theta(&self) -> Self::Func;
    fn validate(&self, f: &Self::Func) -> Result<(), String>;
}

/// Functions from a finite space to a finite codomain, with a base function `theta`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteBackend<V> {
    pub space: FiniteSpace,
    pub codomain: Vec<V>,
    pub theta: Vec<V>,
}

impl<V: Clone + PartialEq + fmt::Debug> Backend for DiscreteBackend<V> {
    type Func = Vec<V>;
    type Set = PointSet;

    fn empty(&self) -> PointSet {
        PointSet::EMPTY
    }
    fn whole(&self) -> PointSet {
        self.space.whole()
    }
    fn nonzero(&self, f: &Vec<V>) -> PointSet {
        PointSet::from_points((0..f.len()).filter(|&i| f[i] != self.theta[i]))
    }
    fn closure(&self, s: &PointSet) -> PointSet {
        self.space.cl(*s)
    }
    fn interior(&self, s: &PointSet) -> PointSet {
        self.space.int(*s)
    }
    fn agree_on(&self, f: &Vec<V>, g: &Vec<V>, s: &PointSet) -> bool {
        s.points().all(|i| f[i] == g[i])
    }
    fn theta(&self) -> Vec<V> {
        self.theta.clone()
    }
    fn validate(&self, f: &Vec<V>) -> Result<(), String> {
        if f.len() != self.space.len() {
            return Err(format!("has {} values for {} points", f.len(), self.space.len()));
        }
        if let Some(v) = f.iter().find(|v| !self.codomain.contains(v)) {
            return Err(format!("value {v:?} outside the codomain"));
        }
        Ok(())
    }
}

/// Piecewise-linear functions on a closed domain, base function zero.
#[derive(Debug, Clone, PartialEq)]
pub struct PlBackend {
    pub domain: IntervalSet,
}

impl Backend for PlBackend {
    type Func = PLFunction;
    type Set = IntervalSet;

    fn empty(&self) -> IntervalSet {
        IntervalSet::empty()
    }
    fn whole(&self) -> IntervalSet {
        self.domain.clone()
    }
    fn nonzero(&self, f: &PLFunction) -> IntervalSet {
        f.nonzero_set()
    }
    fn closure(&self, s: &IntervalSet) -> IntervalSet {
        s.closure().inter(&self.domain)
    }
    fn interior(&self, s: &IntervalSet) -> IntervalSet {
        s.interior_in(&self.domain)
    }
    fn agree_on(&self, f: &PLFunction, g: &PLFunction, s: &IntervalSet) -> bool {
        match f.sub(g) {
            Ok(d) => d.nonzero_set().inter(s).is_empty(),
            Err(_) => false,
        }
    }
    fn theta(&self) -> PLFunction {
        PLFunction::zero(&self.domain).expect("valid domain")
    }
    fn validate(&self, f: &PLFunction) -> Result<(), String> {
        if f.domain() != &self.domain {
            return Err("domain differs from the family domain".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FamilyError {
    #[error("the base function is not a member")]
    ThetaNotMember,
    #[error("members {0} and {1} coincide")]
    DuplicateMember(usize, usize),
    #[error("member {0} {1}")]
    BadMember(usize, String),
    #[error("index {0} is not in the family")]
    NotInFamily(usize),
    #[error("regularity is only decidable on finite spaces")]
    RegularityUndecidablePL,
    #[error("enumeration of {0} candidates exceeds the cap {1}")]
    EnumerationCapExceeded(u128, u128),
    #[error("malformed family: {0}")]
    Malformed(String),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Pl(#[from] PlError),
}

/// Cached geometry of one member.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile<S> {
    pub nonzero: S,
    pub support: S,
    pub sigma: S,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `[f != theta] ∩ [g != theta] = ∅`
    Perp,
    /// `supp f ∩ supp g = ∅`
    PerpPerp,
    /// `σ(f) ⊆ σ(g)`
    Subset,
    /// `supp f ⊆ σ(g)`
    StrongSubset,
}

/// The six syntactic characterizations, one relation expressed through another.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Item {
    A,
    B,
    C,
    D,
    E,
    F,
}

impl Item {
    pub const ALL: [Item; 6] = [Item::A, Item::B, Item::C, Item::D, Item::E, Item::F];

    /// The relation the item characterizes.
    pub fn relation(self) -> Relation {
        match self {
            Item::A | Item::C | Item::D => Relation::Subset,
            Item::B => Relation::Perp,
            Item::E => Relation::PerpPerp,
            Item::F => Relation::StrongSubset,
        }
    }

    pub fn parse(c: char) -> Option<Item> {
        match c.to_ascii_lowercase() {
            'a' => Some(Item::A),
            'b' => Some(Item::B),
            'c' => Some(Item::C),
            'd' => Some(Item::D),
            'e' => Some(Item::E),
            'f' => Some(Item::F),
            _ => None,
        }
    }

    /// Parses `"a..f"`, `"a,c,e"` or `"ace"`.
    pub fn parse_list(s: &str) -> Option<Vec<Item>> {
        let t: String = s.chars().filter(|c| !c.is_whitespace() && *c != ',').collect();
        if let Some((a, b)) = t.split_once("..") {
            let (a, b) = (a.chars().next().and_then(Item::parse)?, b.chars().next().and_then(Item::parse)?);
            return Some(Item::ALL.iter().copied().filter(|i| *i >= a && *i <= b).collect());
        }
        t.chars().map(Item::parse).collect()
    }

    pub fn letter(self) -> char {
        (b'a' + self as u8) as char
    }

    fn universal(self) -> bool {
        matches!(self, Item::A | Item::B | Item::C | Item::D)
    }
}

/// Disagreement between the semantic relation and its syntactic form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Discrepancy {
    /// Contradicts a direction that holds for every family.
    Refuted,
    /// The family is too small to contain the needed witness.
    NotWitnessed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mismatch {
    pub f: usize,
    pub g: usize,
    pub semantic: bool,
    pub syntactic: bool,
    pub kind: Discrepancy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemReport {
    pub item: Item,
    pub pairs: usize,
    pub mismatches: Vec<Mismatch>,
}

impl ItemReport {
    pub fn agrees(&self) -> bool {
        self.mismatches.is_empty()
    }
    pub fn refuted(&self) -> bool {
        self.mismatches.iter().any(|m| m.kind == Discrepancy::Refuted)
    }
}

/// Result of a weak-regularity test; `failure` is an open set and a point in
/// it with no member `f` satisfying `x ∈ σ(f) ⊆ U`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakRegularity<S> {
    pub holds: bool,
    pub failure: Option<(S, String)>,
    /// Test points used on PL domains.
    pub grid: Vec<Q>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionFamily<B: Backend> {
    backend: B,
    members: Vec<B::Func>,
    theta: usize,
    profiles: Vec<Profile<B::Set>>,
}

pub type DiscreteFamily<V> = FunctionFamily<DiscreteBackend<V>>;
pub type PlFamily = FunctionFamily<PlBackend>;

impl<B: Backend> FunctionFamily<B> {
    pub fn new(backend: B, members: Vec<B::Func>) -> Result<Self, FamilyError> {
        for (i, f) in members.iter().enumerate() {
            backend.validate(f).map_err(|e| FamilyError::BadMember(i, e))?;
            if let Some(j) = members[..i].iter().position(|g| g == f) {
                return Err(FamilyError::DuplicateMember(j, i));
            }
        }
        let th = backend.theta();
        let theta = members.iter().position(|f| *f == th).ok_or(FamilyError::ThetaNotMember)?;
        let profiles = members
            .iter()
            .map(|f| {
                let nonzero = backend.nonzero(f);
                let support = backend.closure(&nonzero);
                let sigma = backend.interior(&support);
                Profile { nonzero, support, sigma }
            })
            .collect();
        Ok(FunctionFamily {
            backend,
            members,
            theta,
            profiles,
        })
    }

    pub fn backend(&self) -> &B {
        &self.backend
    }

    pub fn members(&self) -> &[B::Func] {
        &self.members
    }

    pub fn member(&self, i: usize) -> &B::Func {
        &self.members[i]
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn theta_index(&self) -> usize {
        self.theta
    }

    pub fn index_of(&self, f: &B::Func) -> Option<usize> {
        self.members.iter().position(|g| g == f)
    }

    pub fn profile(&self, i: usize) -> &Profile<B::Set> {
        &self.profiles[i]
    }

    pub fn support(&self, i: usize) -> &B::Set {
        &self.profiles[i].support
    }

    pub fn sigma(&self, i: usize) -> &B::Set {
        &self.profiles[i].sigma
    }

    pub fn check_index(&self, i: usize) -> Result<(), FamilyError> {
        if i < self.len() {
            Ok(())
        } else {
            Err(FamilyError::NotInFamily(i))
        }
    }

    pub fn rel(&self, kind: Relation, f: usize, g: usize) -> bool {
        let (p, q) = (&self.profiles[f], &self.profiles[g]);
        match kind {
            Relation::Perp => p.nonzero.inter(&q.nonzero).is_empty(),
            Relation::PerpPerp => p.support.inter(&q.support).is_empty(),
            Relation::Subset => p.sigma.is_subset(&q.sigma),
            Relation::StrongSubset => p.support.is_subset(&q.sigma),
        }
    }

    /// `σ(f) ∩ σ(g) = ∅`, which agrees with [`Relation::Perp`] for continuous members.
    pub fn perp_via_sigma(&self, f: usize, g: usize) -> bool {
        self.profiles[f].sigma.inter(&self.profiles[g].sigma).is_empty()
    }

    fn all(&self) -> std::ops::Range<usize> {
        0..self.len()
    }

    /// `A` covers `b`: every `h` disjoint from all of `A` is disjoint from `b`.
    pub fn syntactic_cover(&self, a: &[usize], b: usize) -> bool {
        self.all()
            .all(|h| !a.iter().all(|&x| self.rel(Relation::Perp, h, x)) || self.rel(Relation::Perp, h, b))
    }

    /// Is there a subset of `pool` with at most `bound` members covering `b`,
    /// optionally together with `extra`?
    fn bounded_cover(&self, pool: &[usize], extra: Option<usize>, b: usize, bound: usize) -> bool {
        // covering is monotone in the covering set, so only maximal sizes matter
        let k = bound.min(pool.len());
        let mut found = false;
        for_each_combination(pool, k, &mut |c| {
            let mut set: Vec<usize> = c.to_vec();
            set.extend(extra);
            if self.syntactic_cover(&set, b) {
                found = true;
            }
            found
        });
        found
    }

    /// Evaluates the syntactic side of `item` for `(f, g)`, quantifying over the family.
    pub fn syntactic_rel(&self, item: Item, f: usize, g: usize, cover_bound: usize) -> bool {
        use Relation::*;
        let r = |k, a, b| self.rel(k, a, b);
        match item {
            Item::A => self.all().all(|h| !r(Perp, h, g) || r(Perp, h, f)),
            Item::B => self.all().all(|h| !(r(Subset, h, f) && r(Subset, h, g)) || r(Subset, h, self.theta)),
            Item::C => self.all().all(|h| !r(StrongSubset, h, f) || r(StrongSubset, h, g)),
            Item::D => self.all().all(|h| !r(PerpPerp, h, g) || r(PerpPerp, h, f)),
            Item::E => {
                let good: Vec<usize> = self
                    .all()
                    .filter(|&h| self.all().any(|k| r(StrongSubset, h, k) && r(Perp, k, g)))
                    .collect();
                self.bounded_cover(&good, None, f, cover_bound)
            }
            Item::F => {
                let good: Vec<usize> = self.all().filter(|&h| r(PerpPerp, h, f)).collect();
                self.all().all(|b| self.bounded_cover(&good, Some(g), b, cover_bound))
            }
        }
    }

    /// Compares every item on every ordered pair.
    pub fn check_items(&self, items: &[Item], cover_bound: usize) -> Vec<ItemReport> {
        items
            .iter()
            .map(|&item| {
                let mut mismatches = Vec::new();
                for f in self.all() {
                    for g in self.all() {
                        let semantic = self.rel(item.relation(), f, g);
                        let syntactic = self.syntactic_rel(item, f, g, cover_bound);
                        if semantic != syntactic {
                            let kind = match item {
                                Item::F => Discrepancy::NotWitnessed,
                                i if i.universal() == semantic => Discrepancy::Refuted,
                                _ => Discrepancy::NotWitnessed,
                            };
                            mismatches.push(Mismatch {
                                f,
                                g,
                                semantic,
                                syntactic,
                                kind,
                            });
                        }
                    }
                }
                ItemReport {
                    item,
                    pairs: self.len() * self.len(),
                    mismatches,
                }
            })
            .collect()
    }

    /// `f ⪯ g`: `g` agrees with `f` on the support of `f`.
    pub fn compatibility_order(&self, f: usize, g: usize) -> Result<bool, FamilyError> {
        self.check_index(f)?;
        self.check_index(g)?;
        Ok(self.preceq(f, g))
    }

    fn preceq(&self, f: usize, g: usize) -> bool {
        self.backend.agree_on(&self.members[f], &self.members[g], &self.profiles[f].support)
    }

    /// `f ⊥ g` read off the compatibility order: the only common lower bound
    /// is `theta` and some member lies above both.
    pub fn perp_via_preceq(&self, f: usize, g: usize) -> Result<bool, FamilyError> {
        self.check_index(f)?;
        self.check_index(g)?;
        let inf_theta = self
            .all()
            .all(|h| !(self.preceq(h, f) && self.preceq(h, g)) || self.preceq(h, self.theta));
        let bounded = self.all().any(|k| self.preceq(f, k) && self.preceq(g, k));
        Ok(inf_theta && bounded)
    }
}

impl<V: Clone + PartialEq + fmt::Debug> DiscreteFamily<V> {
    pub fn space(&self) -> &FiniteSpace {
        &self.backend.space
    }

    /// Every open `U` and `x ∈ U` admit a member with `x ∈ σ(f) ⊆ U`.
    pub fn is_weakly_regular(&self) -> WeakRegularity<PointSet> {
        let x = self.space();
        for u in x.opens() {
            for p in u.points() {
                if !self.all().any(|f| self.sigma(f).contains(p) && self.sigma(f).is_subset(&u)) {
                    return WeakRegularity {
                        holds: false,
                        failure: Some((u, x.labels()[p].clone())),
                        grid: vec![],
                    };
                }
            }
        }
        WeakRegularity {
            holds: true,
            failure: None,
            grid: vec![],
        }
    }

    /// Every point, neighbourhood and codomain value is realized by a member
    /// supported in the neighbourhood. Returns the first failing triple.
    pub fn is_regular(&self) -> Result<(), (usize, PointSet, V)> {
        let x = self.space();
        for u in x.opens() {
            for p in u.points() {
                for c in &self.backend.codomain {
                    if !self.all().any(|f| self.members[f][p] == *c && self.support(f).is_subset(&u)) {
                        return Err((p, u, c.clone()));
                    }
                }
            }
        }
        Ok(())
    }

    /// All functions from the space into the codomain.
    pub fn full(space: FiniteSpace, codomain: Vec<V>, theta: Vec<V>) -> Result<Self, FamilyError> {
        let n = space.len();
        let k = codomain.len();
        let count = (k as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
        if count > 1 << 20 {
            return Err(FamilyError::EnumerationCapExceeded(count, 1 << 20));
        }
        let mut members = Vec::with_capacity(count as usize);
        for mut code in 0..count {
            let mut f = Vec::with_capacity(n);
            for _ in 0..n {
                f.push(codomain[(code % k as u128) as usize].clone());
                code /= k as u128;
            }
            members.push(f);
        }
        FunctionFamily::new(DiscreteBackend { space, codomain, theta }, members)
    }

    /// Members whose values are all continuous, i.e. locally constant.
    pub fn is_continuous(&self, f: usize) -> bool {
        let x = self.space();
        (0..x.len()).all(|p| x.min_nbhd(p).points().all(|q| self.members[f][q] == self.members[f][p]))
    }
}

impl PlFamily {
    pub fn new_pl(domain: IntervalSet, members: Vec<PLFunction>) -> Result<Self, FamilyError> {
        FunctionFamily::new(PlBackend { domain }, members)
    }

    /// Breakpoints of all members and the domain endpoints.
    pub fn coarse_grid(&self) -> Vec<Q> {
        let mut g: Vec<Q> = self.members.iter().flat_map(|f| f.breakpoints().iter().cloned()).collect();
        g.extend(self.backend.domain.intervals().into_iter().flat_map(|iv| [iv.lo, iv.hi]));
        g.sort();
        g.dedup();
        g
    }

    /// Weak regularity at the resolution of the family's own breakpoint grid.
    ///
    /// For every star `U` of the coarse grid (the relative interior of the two
    /// closed cells around a grid point) and every point `x ∈ U` of
    /// the grid refined by midpoints, some member must satisfy `x ∈ σ(f) ⊆ U`.
    /// A failure certificate names the star and the point.
    pub fn is_weakly_regular(&self) -> WeakRegularity<IntervalSet> {
        let coarse = self.coarse_grid();
        let mut fine = coarse.clone();
        for w in coarse.windows(2) {
            let m = (&w[0] + &w[1]) / crate::exact::q(2);
            if self.backend.domain.contains(&m) {
                fine.push(m);
            }
        }
        fine.sort();
        for comp in self.backend.domain.intervals() {
            let pts: Vec<&Q> = coarse.iter().filter(|c| **c >= comp.lo && **c <= comp.hi).collect();
            for j in 0..pts.len() {
                let lo = pts[j.saturating_sub(1)].clone();
                let hi = pts[(j + 1).min(pts.len() - 1)].clone();
                let star = IntervalSet::closed(lo, hi).interior_in(&self.backend.domain);
                for x in fine.iter().filter(|x| star.contains(x)) {
                    let ok = self.all().any(|f| self.sigma(f).contains(x) && self.sigma(f).is_subset(&star));
                    if !ok {
                        return WeakRegularity {
                            holds: false,
                            failure: Some((star, crate::exact::fmt_q(x))),
                            grid: fine,
                        };
                    }
                }
            }
        }
        WeakRegularity {
            holds: true,
            failure: None,
            grid: fine,
        }
    }

    pub fn is_regular(&self) -> Result<(), FamilyError> {
        Err(FamilyError::RegularityUndecidablePL)
    }
}

/// A bijection between two families given extensionally: member `i` of the
/// source goes to member `mapping[i]` of the target.
#[derive(Debug, Clone, PartialEq)]
pub struct BlackBoxMap<BX: Backend, BY: Backend> {
    pub source: FunctionFamily<BX>,
    pub target: FunctionFamily<BY>,
    pub mapping: Vec<usize>,
    /// Structure the map is claimed to preserve, e.g. `"additive"`.
    pub declared: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MapError {
    #[error("the mapping is not a bijection between the families")]
    NotBijection,
}

impl<BX: Backend, BY: Backend> BlackBoxMap<BX, BY> {
    pub fn new(source: FunctionFamily<BX>, target: FunctionFamily<BY>, mapping: Vec<usize>) -> Result<Self, MapError> {
        let n = source.len();
        if mapping.len() != n || target.len() != n {
            return Err(MapError::NotBijection);
        }
        let mut seen = vec![false; n];
        for &m in &mapping {
            if m >= n || seen[m] {
                return Err(MapError::NotBijection);
            }
            seen[m] = true;
        }
        Ok(BlackBoxMap {
            source,
            target,
            mapping,
            declared: vec![],
        })
    }

    /// Builds the map by locating each image in the target family.
    pub fn from_images(source: FunctionFamily<BX>, target: FunctionFamily<BY>, images: &[BY::Func]) -> Result<Self, MapError> {
        let mapping = images
            .iter()
            .map(|g| target.index_of(g).ok_or(MapError::NotBijection))
            .collect::<Result<_, _>>()?;
        BlackBoxMap::new(source, target, mapping)
    }

    pub fn with_declared(mut self, d: &[&str]) -> Self {
        self.declared = d.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.mapping[i]
    }

    pub fn inverse_mapping(&self) -> Vec<usize> {
        let mut inv = vec![0; self.len()];
        for (i, &m) in self.mapping.iter().enumerate() {
            inv[m] = i;
        }
        inv
    }

    /// First pair `(f, g)` on which `rel(f, g)` and `rel(Tf, Tg)` differ.
    pub fn relation_violation(&self, kind: Relation) -> Option<(usize, usize)> {
        let n = self.len();
        for f in 0..n {
            for g in 0..n {
                if self.source.rel(kind, f, g) != self.target.rel(kind, self.mapping[f], self.mapping[g]) {
                    return Some((f, g));
                }
            }
        }
        None
    }

    pub fn preserves(&self, kind: Relation) -> bool {
        self.relation_violation(kind).is_none()
    }
}

/// JSON form of a family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "backend", rename_all = "snake_case")]
pub enum FamilyJson {
    Discrete {
        /// Defaults to the discrete topology on the labels `x0, x1, ..`.
        #[serde(default)]
        space: Option<SpaceJson>,
        #[serde(default)]
        points: Option<usize>,
        codomain: Vec<String>,
        theta: Vec<String>,
        members: Vec<Vec<String>>,
    },
    Pl {
        domain: Vec<[String; 2]>,
        #[serde(default)]
        theta: Option<String>,
        members: Vec<PlMemberJson>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlMemberJson {
    pub breakpoints: Vec<String>,
    pub values: Vec<String>,
}

/// A family loaded from JSON.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyFamily {
    Discrete(DiscreteFamily<String>),
    Pl(PlFamily),
}

impl FamilyJson {
    pub fn load(&self) -> Result<AnyFamily, FamilyError> {
        match self {
            FamilyJson::Discrete {
                space,
                points,
                codomain,
                theta,
                members,
            } => {
                let space = match (space, points) {
                    (Some(s), _) => FiniteSpace::from_json(s)?,
                    (None, Some(n)) => FiniteSpace::discrete(*n),
                    (None, None) => FiniteSpace::discrete(theta.len()),
                };
                let distinct: BTreeSet<&String> = codomain.iter().collect();
                if distinct.len() != codomain.len() {
                    return Err(FamilyError::Malformed("repeated codomain value".into()));
                }
                let backend = DiscreteBackend {
                    space,
                    codomain: codomain.clone(),
                    theta: theta.clone(),
                };
                backend.validate(theta).map_err(|e| FamilyError::Malformed(format!("theta {e}")))?;
                Ok(AnyFamily::Discrete(FunctionFamily::new(backend, members.clone())?))
            }
            FamilyJson::Pl { domain, theta, members } => {
                if let Some(t) = theta {
                    if t != "zero" && t != "0" {
                        return Err(FamilyError::Malformed("PL families use the zero function as base".into()));
                    }
                }
                let mut fs = Vec::new();
                for m in members {
                    let j = PlJson {
                        domain: domain.clone(),
                        breakpoints: m.breakpoints.clone(),
                        values: m.values.clone(),
                    };
                    fs.push(PLFunction::from_json(&j)?);
                }
                let dom = fs.first().map(|f| f.domain().clone()).ok_or(FamilyError::ThetaNotMember)?;
                Ok(AnyFamily::Pl(FunctionFamily::new_pl(dom, fs)?))
            }
        }
    }
}

impl DiscreteFamily<String> {
    pub fn to_json(&self) -> FamilyJson {
        FamilyJson::Discrete {
            space: Some(self.space().to_json()),
            points: None,
            codomain: self.backend.codomain.clone(),
            theta: self.backend.theta.clone(),
            members: self.members.clone(),
        }
    }
}

impl PlFamily {
    pub fn to_json(&self) -> FamilyJson {
        let domain = self
            .backend
            .domain
            .intervals()
            .iter()
            .map(|iv| [crate::exact::fmt_q(&iv.lo), crate::exact::fmt_q(&iv.hi)])
            .collect();
        FamilyJson::Pl {
            domain,
            theta: Some("zero".into()),
            members: self
                .members
                .iter()
                .map(|f| {
                    let j = f.to_json();
                    PlMemberJson {
                        breakpoints: j.breakpoints,
                        values: j.values,
                    }
                })
                .collect(),
        }
    }
}

/// Relabels a discrete family's values as strings.
pub fn stringify<V: Clone + PartialEq + fmt::Debug + fmt::Display>(fam: &DiscreteFamily<V>) -> DiscreteFamily<String> {
    let b = fam.backend();
    let s = |v: &Vec<V>| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    let backend = DiscreteBackend {
        space: b.space.clone(),
        codomain: b.codomain.iter().map(|x| x.to_string()).collect(),
        theta: s(&b.theta),
    };
    FunctionFamily::new(backend, fam.members().iter().map(s).collect()).expect("relabelling preserves validity")
}

/// Helper bound so generic code can require hashable values.
pub trait Value: Clone + PartialEq + Eq + Hash + Ord + fmt::Debug {}
impl<T: Clone + PartialEq + Eq + Hash + Ord + fmt::Debug> Value for T {}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{q, qf};
    use crate::plspace::tent;

    fn bits(n: usize) -> DiscreteFamily<u8> {
        DiscreteFamily::full(FiniteSpace::discrete(n), vec![0, 1], vec![0; n]).unwrap()
    }

    #[test]
    fn item_lists_parse() {
        assert_eq!(Item::parse_list("a..f").unwrap(), Item::ALL.to_vec());
        assert_eq!(Item::parse_list("a,c,e").unwrap(), vec![Item::A, Item::C, Item::E]);
        assert!(Item::parse_list("z").is_none());
    }

    #[test]
    fn full_discrete_families_satisfy_every_item() {
        for n in 1..=3 {
            let fam = bits(n);
            assert!(fam.is_weakly_regular().holds);
            assert!(fam.is_regular().is_ok());
            for r in fam.check_items(&Item::ALL, fam.len()) {
                assert!(r.agrees(), "n={n} {:?}", r);
            }
        }
    }

    #[test]
    fn perp_and_perpperp_coincide_on_discrete_spaces() {
        let fam = bits(3);
        for f in 0..fam.len() {
            for g in 0..fam.len() {
                assert_eq!(fam.rel(Relation::Perp, f, g), fam.rel(Relation::PerpPerp, f, g));
                assert_eq!(fam.rel(Relation::Perp, f, g), fam.perp_via_sigma(f, g));
                assert_eq!(fam.rel(Relation::Perp, f, g), fam.perp_via_preceq(f, g).unwrap());
            }
        }
        assert_eq!(fam.compatibility_order(0, 99), Err(FamilyError::NotInFamily(99)));
    }

    #[test]
    fn theta_must_be_a_member() {
        let b = DiscreteBackend {
            space: FiniteSpace::discrete(1),
            codomain: vec![0u8, 1],
            theta: vec![0],
        };
        assert_eq!(FunctionFamily::new(b.clone(), vec![vec![1]]).unwrap_err(), FamilyError::ThetaNotMember);
        assert!(matches!(
            FunctionFamily::new(b, vec![vec![0], vec![0]]),
            Err(FamilyError::DuplicateMember(0, 1))
        ));
    }

    #[test]
    fn sparse_family_is_not_weakly_regular() {
        let b = DiscreteBackend {
            space: FiniteSpace::discrete(2),
            codomain: vec![0u8, 1],
            theta: vec![0, 0],
        };
        let fam = FunctionFamily::new(b, vec![vec![0, 0], vec![1, 1]]).unwrap();
        let w = fam.is_weakly_regular();
        assert!(!w.holds);
        assert!(w.failure.is_some());
    }

    fn unit() -> IntervalSet {
        IntervalSet::closed(q(0), q(1))
    }

    #[test]
    fn touching_tents() {
        let f = tent(&unit(), &qf(1, 4), (&q(0), &qf(1, 2)), &q(1)).unwrap();
        let g = tent(&unit(), &qf(3, 4), (&qf(1, 2), &q(1)), &q(1)).unwrap();
        let fam = PlFamily::new_pl(unit(), vec![PLFunction::zero(&unit()).unwrap(), f, g]).unwrap();
        assert!(fam.rel(Relation::Perp, 1, 2));
        assert!(!fam.rel(Relation::PerpPerp, 1, 2));
        assert!(fam.rel(Relation::StrongSubset, 0, 1));
        assert!(!fam.rel(Relation::StrongSubset, 1, 1));
        assert!(fam.rel(Relation::Subset, 1, 1));
        assert_eq!(fam.is_regular(), Err(FamilyError::RegularityUndecidablePL));
    }

    #[test]
    fn dyadic_tents_resolve_their_grid() {
        let mut ms = vec![PLFunction::zero(&unit()).unwrap()];
        for k in 0..=8 {
            let c = qf(k, 8);
            let lo = if k == 0 { q(0) } else { qf(k - 1, 8) };
            let hi = if k == 8 { q(1) } else { qf(k + 1, 8) };
            ms.push(tent(&unit(), &c, (&lo, &hi), &q(1)).unwrap());
        }
        let fam = PlFamily::new_pl(unit(), ms.clone()).unwrap();
        let w = fam.is_weakly_regular();
        assert!(w.holds, "{:?}", w.failure);
        assert_eq!(w.grid.len(), 17);
        ms.remove(4);
        let fam = PlFamily::new_pl(unit(), ms).unwrap();
        let w = fam.is_weakly_regular();
        assert!(!w.holds);
        assert!(w.failure.unwrap().0.contains(&qf(3, 8)));
    }

    #[test]
    fn pl_mismatches_are_classified() {
        let f = tent(&unit(), &qf(1, 4), (&q(0), &qf(1, 2)), &q(1)).unwrap();
        let g = tent(&unit(), &qf(1, 2), (&qf(1, 4), &qf(3, 4)), &q(1)).unwrap();
        let fam = PlFamily::new_pl(unit(), vec![PLFunction::zero(&unit()).unwrap(), f, g]).unwrap();
        for r in fam.check_items(&Item::ALL, 3) {
            assert!(!r.refuted(), "{r:?}");
        }
    }

    #[test]
    fn json_round_trip() {
        let j = r#"{"backend":"discrete","codomain":["0","1"],"theta":["0","0"],
            "members":[["0","0"],["1","0"],["0","1"],["1","1"]]}"#;
        let fj: FamilyJson = serde_json::from_str(j).unwrap();
        let AnyFamily::Discrete(fam) = fj.load().unwrap() else { panic!() };
        assert_eq!(fam.len(), 4);
        let back = fam.to_json().load().unwrap();
        assert_eq!(back, AnyFamily::Discrete(fam));
    }
}
