//! Finite topological spaces, interior/closure operators and the Boolean
//! algebra of regular open sets.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A subset of a finite point set `{0, .., n-1}`, at most 64 points.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct PointSet(pub u64);

impl PointSet {
    pub const EMPTY: PointSet = PointSet(0);

    pub fn full(n: usize) -> Self {
        if n >= 64 {
            PointSet(u64::MAX)
        } else {
            PointSet((1u64 << n) - 1)
        }
    }

    pub fn singleton(i: usize) -> Self {
        PointSet(1u64 << i)
    }

    pub fn from_points<I: IntoIterator<Item = usize>>(it: I) -> Self {
        PointSet(it.into_iter().fold(0u64, |m, i| m | (1u64 << i)))
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn insert(&mut self, i: usize) {
        self.0 |= 1u64 << i;
    }

    pub fn union(self, o: Self) -> Self {
        PointSet(self.0 | o.0)
    }

    pub fn inter(self, o: Self) -> Self {
        PointSet(self.0 & o.0)
    }

    pub fn minus(self, o: Self) -> Self {
        PointSet(self.0 & !o.0)
    }

    pub fn is_subset(self, o: Self) -> bool {
        self.0 & !o.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn points(self) -> impl Iterator<Item = usize> {
        let m = self.0;
        (0..64).filter(move |i| m >> i & 1 == 1)
    }

    pub fn first(self) -> Option<usize> {
        if self.0 == 0 {
            None
        } else {
            Some(self.0.trailing_zeros() as usize)
        }
    }

    /// All subsets of `self`.
    pub fn subsets(self) -> impl Iterator<Item = PointSet> {
        let m = self.0;
        let mut cur = Some(0u64);
        std::iter::from_fn(move || {
            let c = cur?;
            cur = if c == m { None } else { Some((c.wrapping_sub(m)) & m) };
            Some(PointSet(c))
        })
    }
}

impl fmt::Debug for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.points()).finish()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TopologyError {
    #[error("invalid topology: {0}")]
    TopologyInvalid(String),
    #[error("set {0:?} is not contained in the space")]
    PointOutOfSpace(PointSet),
    #[error("set {0:?} is not open")]
    NotOpen(PointSet),
    #[error("unknown point label {0:?}")]
    UnknownPoint(String),
}

/// A finite space with its full list of open sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteSpace {
    labels: Vec<String>,
    opens: BTreeSet<PointSet>,
}

impl FiniteSpace {
    pub fn make_space(labels: Vec<String>, opens: impl IntoIterator<Item = PointSet>) -> Result<Self, TopologyError> {
        let n = labels.len();
        if n > 64 {
            return Err(TopologyError::TopologyInvalid(format!("{n} points exceeds 64")));
        }
        let distinct: BTreeSet<&String> = labels.iter().collect();
        if distinct.len() != n {
            return Err(TopologyError::TopologyInvalid("duplicate point labels".into()));
        }
        let whole = PointSet::full(n);
        let opens: BTreeSet<PointSet> = opens.into_iter().collect();
        if let Some(bad) = opens.iter().find(|o| !o.is_subset(whole)) {
            return Err(TopologyError::TopologyInvalid(format!("open set {bad:?} has points outside the space")));
        }
        if !opens.contains(&PointSet::EMPTY) {
            return Err(TopologyError::TopologyInvalid("empty set missing".into()));
        }
        if !opens.contains(&whole) {
            return Err(TopologyError::TopologyInvalid("whole space missing".into()));
        }
        for a in &opens {
            for b in &opens {
                if !opens.contains(&a.union(*b)) {
                    return Err(TopologyError::TopologyInvalid(format!("not closed under union: {a:?} {b:?}")));
                }
                if !opens.contains(&a.inter(*b)) {
                    return Err(TopologyError::TopologyInvalid(format!("not closed under intersection: {a:?} {b:?}")));
                }
            }
        }
        Ok(FiniteSpace { labels, opens })
    }

    /// The topology generated by a family of subsets.
    pub fn generated(labels: Vec<String>, subbasis: impl IntoIterator<Item = PointSet>) -> Result<Self, TopologyError> {
        let whole = PointSet::full(labels.len());
        let mut meets: BTreeSet<PointSet> = BTreeSet::from([whole]);
        for s in subbasis {
            let cur: Vec<PointSet> = meets.iter().copied().collect();
            for m in cur {
                meets.insert(m.inter(s));
            }
        }
        let mut opens: BTreeSet<PointSet> = BTreeSet::from([PointSet::EMPTY]);
        for m in meets {
            let cur: Vec<PointSet> = opens.iter().copied().collect();
            for o in cur {
                opens.insert(o.union(m));
            }
        }
        FiniteSpace::make_space(labels, opens)
    }

    pub fn discrete(n: usize) -> Self {
        let labels = default_labels(n);
        let opens = PointSet::full(n).subsets().collect::<Vec<_>>();
        FiniteSpace {
            labels,
            opens: opens.into_iter().collect(),
        }
    }

    pub fn indiscrete(n: usize) -> Self {
        FiniteSpace {
            labels: default_labels(n),
            opens: [PointSet::EMPTY, PointSet::full(n)].into_iter().collect(),
        }
    }

    /// Two points, `{0}` open.
    pub fn sierpinski() -> Self {
        FiniteSpace::make_space(default_labels(2), [PointSet(0), PointSet(1), PointSet(3)]).expect("valid")
    }

    /// Chain topology: the opens are the initial segments `{0..k}`.
    pub fn chain(n: usize) -> Self {
        let opens = (0..=n).map(PointSet::full);
        FiniteSpace::make_space(default_labels(n), opens).expect("valid")
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn whole(&self) -> PointSet {
        PointSet::full(self.len())
    }

    pub fn opens(&self) -> impl Iterator<Item = PointSet> + '_ {
        self.opens.iter().copied()
    }

    pub fn is_open(&self, s: PointSet) -> bool {
        self.opens.contains(&s)
    }

    pub fn is_closed(&self, s: PointSet) -> bool {
        s.is_subset(self.whole()) && self.opens.contains(&self.whole().minus(s))
    }

    pub fn is_discrete(&self) -> bool {
        self.opens.len() == 1usize << self.len()
    }

    pub fn point_index(&self, label: &str) -> Result<usize, TopologyError> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| TopologyError::UnknownPoint(label.to_string()))
    }

    fn check(&self, s: PointSet) -> Result<(), TopologyError> {
        if s.is_subset(self.whole()) {
            Ok(())
        } else {
            Err(TopologyError::PointOutOfSpace(s))
        }
    }

    pub fn interior(&self, s: PointSet) -> Result<PointSet, TopologyError> {
        self.check(s)?;
        Ok(self.int(s))
    }

    pub fn closure(&self, s: PointSet) -> Result<PointSet, TopologyError> {
        self.check(s)?;
        Ok(self.cl(s))
    }

    pub fn regularize(&self, s: PointSet) -> Result<PointSet, TopologyError> {
        self.check(s)?;
        Ok(self.int(self.cl(s)))
    }

    pub(crate) fn int(&self, s: PointSet) -> PointSet {
        self.opens.iter().filter(|o| o.is_subset(s)).fold(PointSet::EMPTY, |a, o| a.union(*o))
    }

    pub(crate) fn cl(&self, s: PointSet) -> PointSet {
        let w = self.whole();
        w.minus(self.int(w.minus(s)))
    }

    /// Smallest open set containing point `x`.
    pub fn min_nbhd(&self, x: usize) -> PointSet {
        self.opens.iter().filter(|o| o.contains(x)).fold(self.whole(), |a, o| a.inter(*o))
    }

    pub fn clopens(&self) -> Vec<PointSet> {
        self.opens.iter().copied().filter(|o| self.is_closed(*o)).collect()
    }

    pub fn is_t0(&self) -> bool {
        (0..self.len()).all(|x| (0..self.len()).all(|y| x == y || self.min_nbhd(x) != self.min_nbhd(y)))
    }

    pub fn is_t1(&self) -> bool {
        (0..self.len()).all(|x| self.is_closed(PointSet::singleton(x)))
    }

    pub fn is_hausdorff(&self) -> bool {
        // finite Hausdorff spaces are discrete
        self.is_discrete()
    }

    /// Points can be separated from closed sets by open sets.
    pub fn is_regular(&self) -> bool {
        (0..self.len()).all(|x| {
            self.opens
                .iter()
                .filter(|u| u.contains(x))
                .all(|u| self.opens.iter().any(|v| v.contains(x) && self.cl(*v).is_subset(*u)))
        })
    }

    /// The clopen sets form a basis.
    pub fn is_zero_dimensional(&self) -> bool {
        let cl = self.clopens();
        self.opens
            .iter()
            .all(|u| cl.iter().filter(|c| c.is_subset(*u)).fold(PointSet::EMPTY, |a, c| a.union(*c)) == *u)
    }

    /// Regular open sets of `self`, as a Boolean algebra.
    pub fn ro_algebra(&self) -> RoAlgebra {
        ro_within(self, self.whole())
    }

    /// Compares `RO(X)` with `RO(U)` for the open subspace `U`.
    pub fn restrict_ro(&self, u: PointSet) -> Result<RoRestriction, TopologyError> {
        self.check(u)?;
        if !self.is_open(u) {
            return Err(TopologyError::NotOpen(u));
        }
        let big = self.ro_algebra();
        let small = ro_within(self, u);
        let forward: Vec<(PointSet, PointSet)> = big.elements.iter().map(|a| (*a, a.inter(u))).collect();
        let section: Vec<(PointSet, PointSet)> = small.elements.iter().map(|b| (*b, self.int(self.cl(*b)))).collect();
        let images: BTreeSet<PointSet> = forward.iter().map(|p| p.1).collect();
        let lands = images.iter().all(|b| small.elements.contains(b));
        let bijective = lands && images.len() == big.elements.len() && images.len() == small.elements.len();
        Ok(RoRestriction {
            forward,
            section,
            is_isomorphism: bijective,
            dense: self.cl(u) == self.whole(),
        })
    }

    pub fn to_json(&self) -> SpaceJson {
        SpaceJson {
            points: self.labels.clone(),
            opens: self.opens.iter().map(|o| o.points().map(|i| self.labels[i].clone()).collect()).collect(),
        }
    }

    pub fn from_json(j: &SpaceJson) -> Result<Self, TopologyError> {
        let labels = j.points.clone();
        let mut opens = Vec::new();
        for o in &j.opens {
            let mut s = PointSet::EMPTY;
            for l in o {
                let i = labels.iter().position(|x| x == l).ok_or_else(|| TopologyError::UnknownPoint(l.clone()))?;
                s.insert(i);
            }
            opens.push(s);
        }
        FiniteSpace::make_space(labels, opens)
    }
}

pub fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("x{i}")).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceJson {
    pub points: Vec<String>,
    pub opens: Vec<Vec<String>>,
}

/// Regular open subsets of an open `U`, relative to the subspace topology.
fn ro_within(x: &FiniteSpace, u: PointSet) -> RoAlgebra {
    // opens of U are exactly the opens of X inside U; closure in U is cl_X(.) ∩ U
    let int_u = |s: PointSet| x.int(s.inter(u));
    let cl_u = |s: PointSet| x.cl(s).inter(u);
    let reg = |s: PointSet| int_u(cl_u(s));
    let elements: Vec<PointSet> = x.opens.iter().copied().filter(|o| o.is_subset(u) && reg(*o) == *o).collect();
    let idx = |s: PointSet| elements.iter().position(|e| *e == s).expect("closed under operations");
    let m = elements.len();
    let mut meet = vec![vec![0; m]; m];
    let mut join = vec![vec![0; m]; m];
    for i in 0..m {
        for j in 0..m {
            meet[i][j] = idx(elements[i].inter(elements[j]));
            join[i][j] = idx(reg(elements[i].union(elements[j])));
        }
    }
    let complement = (0..m).map(|i| idx(int_u(u.minus(elements[i])))).collect();
    RoAlgebra {
        universe: u,
        bottom: idx(PointSet::EMPTY),
        top: idx(u),
        elements,
        meet,
        join,
        complement,
    }
}

/// `RO(X)` with operation tables indexed by element position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoAlgebra {
    pub universe: PointSet,
    pub elements: Vec<PointSet>,
    pub meet: Vec<Vec<usize>>,
    pub join: Vec<Vec<usize>>,
    pub complement: Vec<usize>,
    pub bottom: usize,
    pub top: usize,
}

impl RoAlgebra {
    pub fn index_of(&self, s: PointSet) -> Option<usize> {
        self.elements.iter().position(|e| *e == s)
    }

    /// Checks the Boolean algebra axioms on the tables; returns the first failure.
    pub fn boolean_axioms(&self) -> Result<(), String> {
        let m = self.elements.len();
        let (mt, jn, c) = (&self.meet, &self.join, &self.complement);
        for a in 0..m {
            if mt[a][a] != a || jn[a][a] != a {
                return Err(format!("idempotence fails at {a}"));
            }
            if mt[a][c[a]] != self.bottom || jn[a][c[a]] != self.top {
                return Err(format!("complement fails at {a}"));
            }
            if mt[a][self.top] != a || jn[a][self.bottom] != a {
                return Err(format!("bounds fail at {a}"));
            }
            for b in 0..m {
                if mt[a][b] != mt[b][a] || jn[a][b] != jn[b][a] {
                    return Err(format!("commutativity fails at {a},{b}"));
                }
                if mt[a][jn[a][b]] != a || jn[a][mt[a][b]] != a {
                    return Err(format!("absorption fails at {a},{b}"));
                }
                for d in 0..m {
                    if mt[a][mt[b][d]] != mt[mt[a][b]][d] || jn[a][jn[b][d]] != jn[jn[a][b]][d] {
                        return Err(format!("associativity fails at {a},{b},{d}"));
                    }
                    if mt[a][jn[b][d]] != jn[mt[a][b]][mt[a][d]] {
                        return Err(format!("distributivity fails at {a},{b},{d}"));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoRestriction {
    /// `A -> A ∩ U`
    pub forward: Vec<(PointSet, PointSet)>,
    /// `B -> int_X cl_X B`
    pub section: Vec<(PointSet, PointSet)>,
    pub is_isomorphism: bool,
    pub dense: bool,
}

/// Every topology on `n` points (brute force, intended for `n <= 4`).
pub fn all_topologies(n: usize) -> Vec<FiniteSpace> {
    assert!(n <= 4, "enumeration is exponential in 2^n");
    let whole = PointSet::full(n);
    let middle: Vec<PointSet> = whole.subsets().filter(|s| !s.is_empty() && *s != whole).collect();
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << middle.len()) {
        let mut opens = vec![PointSet::EMPTY, whole];
        opens.extend(middle.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, s)| *s));
        let set: BTreeSet<PointSet> = opens.iter().copied().collect();
        let closed = set
            .iter()
            .all(|a| set.iter().all(|b| set.contains(&a.union(*b)) && set.contains(&a.inter(*b))));
        if closed {
            out.push(FiniteSpace {
                labels: default_labels(n),
                opens: set,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn counts_of_topologies() {
        let counts: Vec<usize> = (0..=4).map(|n| all_topologies(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 4, 29, 355]);
    }

    #[test]
    fn rejects_non_topologies() {
        let bad = FiniteSpace::make_space(default_labels(3), [PointSet(0), PointSet(1), PointSet(2), PointSet(7)]);
        assert!(matches!(bad, Err(TopologyError::TopologyInvalid(_))));
        let no_whole = FiniteSpace::make_space(default_labels(2), [PointSet(0), PointSet(1)]);
        assert!(no_whole.is_err());
    }

    #[test]
    fn sierpinski_regularization() {
        let s = FiniteSpace::sierpinski();
        assert_eq!(s.regularize(PointSet(1)).unwrap(), PointSet(3));
        let ro = s.ro_algebra();
        assert_eq!(ro.elements, vec![PointSet(0), PointSet(3)]);
        assert!(s.interior(PointSet(4)).is_err());
    }

    #[test]
    fn chain_regular_opens_are_trivial() {
        let c = FiniteSpace::chain(3);
        assert_eq!(c.ro_algebra().elements.len(), 2);
    }

    #[test]
    fn restriction_to_dense_open() {
        let s = FiniteSpace::sierpinski();
        let r = s.restrict_ro(PointSet(1)).unwrap();
        assert!(r.dense && r.is_isomorphism);
        let d = FiniteSpace::discrete(2);
        let r = d.restrict_ro(PointSet(1)).unwrap();
        assert!(!r.dense && !r.is_isomorphism);
        assert!(matches!(s.restrict_ro(PointSet(2)), Err(TopologyError::NotOpen(_))));
    }

    #[test]
    fn ro_algebras_of_three_point_spaces_are_boolean() {
        for x in all_topologies(3) {
            x.ro_algebra().boolean_axioms().unwrap();
        }
    }

    #[test]
    fn restriction_iso_iff_dense() {
        for n in 1..=3 {
            for x in all_topologies(n) {
                for u in x.opens() {
                    let r = x.restrict_ro(u).unwrap();
                    assert_eq!(r.is_isomorphism, r.dense, "{x:?} {u:?}");
                    if r.dense {
                        // the section map inverts the forward map
                        for (a, b) in &r.forward {
                            let back = r.section.iter().find(|p| p.0 == *b).unwrap().1;
                            assert_eq!(back, *a);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let x = FiniteSpace::chain(3);
        let j = serde_json::to_string(&x.to_json()).unwrap();
        let back = FiniteSpace::from_json(&serde_json::from_str(&j).unwrap()).unwrap();
        assert_eq!(back, x);
    }

    fn space_and_set() -> impl Strategy<Value = (FiniteSpace, PointSet)> {
        (1usize..=4).prop_flat_map(|n| {
            let tops = all_topologies(n);
            (0..tops.len(), 0u64..(1u64 << n)).prop_map(move |(i, m)| (tops[i].clone(), PointSet(m)))
        })
    }

    proptest! {
        #[test]
        fn operators_are_idempotent((x, s) in space_and_set()) {
            let i = x.interior(s).unwrap();
            let c = x.closure(s).unwrap();
            let r = x.regularize(s).unwrap();
            prop_assert_eq!(x.interior(i).unwrap(), i);
            prop_assert_eq!(x.closure(c).unwrap(), c);
            prop_assert_eq!(x.regularize(r).unwrap(), r);
            prop_assert!(i.is_subset(s) && s.is_subset(c));
            prop_assert!(x.is_open(i) && x.is_closed(c));
        }
    }
}
