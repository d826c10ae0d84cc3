//! Finite generalized Boolean algebras and Stone duality with zero-dimensional
//! finite spaces.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::fintop::{FiniteSpace, PointSet, RoAlgebra, TopologyError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StoneError {
    #[error("not a generalized Boolean algebra: {0}")]
    NotGba(String),
    #[error("the one-element algebra has no ultrafilters")]
    TrivialAlgebra,
    #[error("space is not zero-dimensional")]
    NotZeroDimensional,
    #[error("enumeration of {0} subsets exceeds the cap {1}")]
    EnumerationCapExceeded(u128, u128),
    #[error(transparent)]
    Topology(#[from] TopologyError),
}

/// A finite distributive lattice with bottom and relative complements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenBoolAlg {
    pub labels: Vec<String>,
    pub leq: Vec<Vec<bool>>,
    pub meet: Vec<Vec<usize>>,
    pub join: Vec<Vec<usize>>,
    /// `diff[a][b] = a \ b`, the complement of `a ∧ b` relative to `a`.
    pub diff: Vec<Vec<usize>>,
    pub zero: usize,
}

impl GenBoolAlg {
    /// Builds the operations from a partial order and checks every axiom.
    pub fn from_order(labels: Vec<String>, leq: Vec<Vec<bool>>) -> Result<Self, StoneError> {
        let m = labels.len();
        let bad = |s: String| Err(StoneError::NotGba(s));
        if m == 0 || leq.len() != m || leq.iter().any(|r| r.len() != m) {
            return bad("order table has the wrong shape".into());
        }
        for a in 0..m {
            if !leq[a][a] {
                return bad(format!("not reflexive at {a}"));
            }
            for b in 0..m {
                if a != b && leq[a][b] && leq[b][a] {
                    return bad(format!("not antisymmetric at {a},{b}"));
                }
                for c in 0..m {
                    if leq[a][b] && leq[b][c] && !leq[a][c] {
                        return bad(format!("not transitive at {a},{b},{c}"));
                    }
                }
            }
        }
        let Some(zero) = (0..m).find(|&z| (0..m).all(|a| leq[z][a])) else {
            return bad("no bottom".into());
        };
        let glb = |a: usize, b: usize| {
            let lower: Vec<usize> = (0..m).filter(|&c| leq[c][a] && leq[c][b]).collect();
            lower.iter().copied().find(|&c| lower.iter().all(|&d| leq[d][c]))
        };
        let lub = |a: usize, b: usize| {
            let upper: Vec<usize> = (0..m).filter(|&c| leq[a][c] && leq[b][c]).collect();
            upper.iter().copied().find(|&c| upper.iter().all(|&d| leq[c][d]))
        };
        let mut meet = vec![vec![0; m]; m];
        let mut join = vec![vec![0; m]; m];
        for a in 0..m {
            for b in 0..m {
                meet[a][b] = match glb(a, b) {
                    Some(c) => c,
                    None => return bad(format!("no meet of {a},{b}")),
                };
                join[a][b] = match lub(a, b) {
                    Some(c) => c,
                    None => return bad(format!("no join of {a},{b}")),
                };
            }
        }
        let mut diff = vec![vec![0; m]; m];
        for a in 0..m {
            for b in 0..m {
                let ab = meet[a][b];
                let rc = (0..m).find(|&c| meet[c][ab] == zero && join[c][ab] == a);
                diff[a][b] = match rc {
                    Some(c) => c,
                    None => return bad(format!("no relative complement of {a} minus {b}")),
                };
            }
        }
        let alg = GenBoolAlg {
            labels,
            leq,
            meet,
            join,
            diff,
            zero,
        };
        alg.check_distributive()?;
        Ok(alg)
    }

    fn check_distributive(&self) -> Result<(), StoneError> {
        let m = self.len();
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    if self.meet[a][self.join[b][c]] != self.join[self.meet[a][b]][self.meet[a][c]] {
                        return Err(StoneError::NotGba(format!("not distributive at {a},{b},{c}")));
                    }
                }
            }
        }
        Ok(())
    }

    /// The Boolean algebra of subsets of `n` atoms; element `i` is the bitmask `i`.
    pub fn power_set(n: usize) -> Self {
        let m = 1usize << n;
        let labels = (0..m).map(|i| format!("{:?}", PointSet(i as u64))).collect();
        let leq = (0..m).map(|a| (0..m).map(|b| a & !b == 0).collect()).collect();
        GenBoolAlg::from_order(labels, leq).expect("power sets are Boolean")
    }

    /// A family of sets ordered by inclusion.
    pub fn from_sets(sets: &[PointSet]) -> Result<Self, StoneError> {
        let labels = sets.iter().map(|s| format!("{s:?}")).collect();
        let leq = sets.iter().map(|a| sets.iter().map(|b| a.is_subset(*b)).collect()).collect();
        GenBoolAlg::from_order(labels, leq)
    }

    pub fn from_ro(ro: &RoAlgebra) -> Result<Self, StoneError> {
        GenBoolAlg::from_sets(&ro.elements)
    }

    /// Same algebra with element `i` moved to position `perm[i]`.
    pub fn relabel(&self, perm: &[usize]) -> Self {
        let m = self.len();
        let mut inv = vec![0; m];
        for (i, &p) in perm.iter().enumerate() {
            inv[p] = i;
        }
        let labels = (0..m).map(|p| self.labels[inv[p]].clone()).collect();
        let leq = (0..m).map(|a| (0..m).map(|b| self.leq[inv[a]][inv[b]]).collect()).collect();
        GenBoolAlg::from_order(labels, leq).expect("isomorphic copy")
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn atoms(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&a| a != self.zero && (0..self.len()).all(|b| !self.leq[b][a] || b == a || b == self.zero))
            .collect()
    }

    /// Is `s` an ultrafilter (a prime filter not containing zero)?
    pub fn is_ultrafilter(&self, s: &BTreeSet<usize>) -> bool {
        if s.is_empty() || s.contains(&self.zero) {
            return false;
        }
        let m = self.len();
        let up = s.iter().all(|&a| (0..m).all(|b| !self.leq[a][b] || s.contains(&b)));
        let meets = s.iter().all(|&a| s.iter().all(|&b| s.contains(&self.meet[a][b])));
        let prime = (0..m).all(|a| (0..m).all(|b| !s.contains(&self.join[a][b]) || s.contains(&a) || s.contains(&b)));
        up && meets && prime
    }

    /// Every bounded subset has a least upper bound. Returns a subset without one.
    pub fn conditional_completeness_failure(&self, cap: u128) -> Result<Option<Vec<usize>>, StoneError> {
        let m = self.len();
        let count = 1u128 << m.min(127);
        if count > cap {
            return Err(StoneError::EnumerationCapExceeded(count, cap));
        }
        for mask in 0u128..count {
            let sub: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
            let upper: Vec<usize> = (0..m).filter(|&u| sub.iter().all(|&s| self.leq[s][u])).collect();
            if upper.is_empty() {
                continue;
            }
            if !upper.iter().any(|&u| upper.iter().all(|&v| self.leq[u][v])) {
                return Ok(Some(sub));
            }
        }
        Ok(None)
    }

    pub fn is_conditionally_complete(&self, cap: u128) -> Result<bool, StoneError> {
        Ok(self.conditional_completeness_failure(cap)?.is_none())
    }

    pub fn from_json(j: &AlgebraJson) -> Result<Self, StoneError> {
        match j {
            AlgebraJson::PowerSet { atoms } => Ok(GenBoolAlg::power_set(*atoms)),
            AlgebraJson::Order { elements, leq } => {
                let m = elements.len();
                let mut t = vec![vec![false; m]; m];
                for (i, row) in t.iter_mut().enumerate() {
                    row[i] = true;
                }
                for [a, b] in leq {
                    let ia = elements.iter().position(|e| e == a);
                    let ib = elements.iter().position(|e| e == b);
                    match (ia, ib) {
                        (Some(ia), Some(ib)) => t[ia][ib] = true,
                        _ => return Err(StoneError::NotGba(format!("unknown element in {a} <= {b}"))),
                    }
                }
                // close under transitivity
                for k in 0..m {
                    for i in 0..m {
                        for j in 0..m {
                            if t[i][k] && t[k][j] {
                                t[i][j] = true;
                            }
                        }
                    }
                }
                GenBoolAlg::from_order(elements.clone(), t)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlgebraJson {
    PowerSet {
        atoms: usize,
    },
    /// Pairs `[a, b]` meaning `a <= b`; reflexive and transitive closure is taken.
    Order {
        elements: Vec<String>,
        leq: Vec<[String; 2]>,
    },
}

/// The Stone space: ultrafilters, one per atom, with the discrete topology.
#[derive(Debug, Clone, PartialEq)]
pub struct StoneSpace {
    pub space: FiniteSpace,
    pub atoms: Vec<usize>,
    pub ultrafilters: Vec<BTreeSet<usize>>,
    /// `basis[a] = {ultrafilters containing a}`
    pub basis: Vec<PointSet>,
}

pub fn spec(b: &GenBoolAlg) -> Result<StoneSpace, StoneError> {
    if b.len() == 1 {
        return Err(StoneError::TrivialAlgebra);
    }
    let atoms = b.atoms();
    let ultrafilters: Vec<BTreeSet<usize>> = atoms.iter().map(|&a| (0..b.len()).filter(|&x| b.leq[a][x]).collect()).collect();
    let basis: Vec<PointSet> = (0..b.len())
        .map(|x| PointSet::from_points((0..atoms.len()).filter(|&u| ultrafilters[u].contains(&x))))
        .collect();
    let labels = atoms.iter().map(|&a| format!("U({})", b.labels[a])).collect();
    let space = FiniteSpace::generated(labels, basis.iter().copied())?;
    Ok(StoneSpace {
        space,
        atoms,
        ultrafilters,
        basis,
    })
}

/// Compact open sets of a zero-dimensional finite space (here: all opens).
pub fn ko(x: &FiniteSpace) -> Result<(Vec<PointSet>, GenBoolAlg), StoneError> {
    if !x.is_zero_dimensional() {
        return Err(StoneError::NotZeroDimensional);
    }
    let sets: Vec<PointSet> = x.opens().collect();
    let alg = GenBoolAlg::from_sets(&sets)?;
    Ok((sets, alg))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundTrip {
    pub isomorphism: bool,
    /// Image of each element (algebra side) or point (space side).
    pub map: Vec<usize>,
}

/// `a -> [a]` from `B` to `KO(Spec B)`.
pub fn duality_roundtrip(b: &GenBoolAlg) -> Result<RoundTrip, StoneError> {
    let st = spec(b)?;
    let (sets, kb) = ko(&st.space)?;
    let map: Vec<usize> = match st.basis.iter().map(|s| sets.iter().position(|t| t == s)).collect::<Option<Vec<_>>>() {
        Some(m) => m,
        None => {
            return Ok(RoundTrip {
                isomorphism: false,
                map: vec![],
            })
        }
    };
    let m = b.len();
    let distinct: BTreeSet<usize> = map.iter().copied().collect();
    let bijective = distinct.len() == m && kb.len() == m;
    let hom = (0..m).all(|x| {
        (0..m).all(|y| {
            kb.meet[map[x]][map[y]] == map[b.meet[x][y]]
                && kb.join[map[x]][map[y]] == map[b.join[x][y]]
                && kb.diff[map[x]][map[y]] == map[b.diff[x][y]]
                && kb.leq[map[x]][map[y]] == b.leq[x][y]
        })
    });
    Ok(RoundTrip {
        isomorphism: bijective && hom,
        map,
    })
}

/// `x -> {U ∈ KO(X) : x ∈ U}` from `X` to `Spec KO(X)`.
pub fn duality_roundtrip_space(x: &FiniteSpace) -> Result<RoundTrip, StoneError> {
    let (sets, kb) = ko(x)?;
    let st = spec(&kb)?;
    let mut map = Vec::with_capacity(x.len());
    for p in 0..x.len() {
        let uf: BTreeSet<usize> = (0..sets.len()).filter(|&i| sets[i].contains(p)).collect();
        match st.ultrafilters.iter().position(|u| *u == uf) {
            Some(i) => map.push(i),
            None => return Ok(RoundTrip { isomorphism: false, map }),
        }
    }
    let distinct: BTreeSet<usize> = map.iter().copied().collect();
    let bijective = distinct.len() == x.len() && st.space.len() == x.len();
    let push = |s: PointSet| PointSet::from_points(s.points().map(|p| map[p]));
    let homeo = bijective && x.opens().all(|u| st.space.is_open(push(u))) && x.opens().count() == st.space.opens().count();
    Ok(RoundTrip { isomorphism: homeo, map })
}

/// `RO(X) = KO(X)` as families of sets.
pub fn ro_equals_ko(x: &FiniteSpace) -> Result<bool, StoneError> {
    let (sets, _) = ko(x)?;
    let ro: BTreeSet<PointSet> = x.ro_algebra().elements.into_iter().collect();
    let kos: BTreeSet<PointSet> = sets.into_iter().collect();
    Ok(ro == kos)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fintop::all_topologies;

    /// Brute-force ultrafilter enumeration, independent of atoms.
    fn ultrafilters_by_search(b: &GenBoolAlg) -> BTreeSet<BTreeSet<usize>> {
        let m = b.len();
        (0u64..1 << m)
            .map(|mask| (0..m).filter(|i| mask >> i & 1 == 1).collect::<BTreeSet<usize>>())
            .filter(|s| b.is_ultrafilter(s))
            .collect()
    }

    #[test]
    fn power_sets_round_trip() {
        for n in 1..=3 {
            let b = GenBoolAlg::power_set(n);
            assert_eq!(b.atoms().len(), n);
            let st = spec(&b).unwrap();
            let found: BTreeSet<BTreeSet<usize>> = st.ultrafilters.iter().cloned().collect();
            assert_eq!(found, ultrafilters_by_search(&b));
            assert!(duality_roundtrip(&b).unwrap().isomorphism);
            assert!(b.is_conditionally_complete(1 << 20).unwrap());
        }
    }

    #[test]
    fn trivial_algebra_has_no_spectrum() {
        assert_eq!(spec(&GenBoolAlg::power_set(0)), Err(StoneError::TrivialAlgebra));
    }

    #[test]
    fn rejects_non_distributive_lattice() {
        // the diamond M3
        let labels: Vec<String> = ["0", "a", "b", "c", "1"].iter().map(|s| s.to_string()).collect();
        let mut leq = vec![vec![false; 5]; 5];
        for i in 0..5 {
            leq[i][i] = true;
            leq[0][i] = true;
            leq[i][4] = true;
        }
        assert!(matches!(GenBoolAlg::from_order(labels, leq), Err(StoneError::NotGba(_))));
    }

    #[test]
    fn discrete_spaces_round_trip() {
        for n in 1..=5 {
            let x = FiniteSpace::discrete(n);
            assert!(duality_roundtrip_space(&x).unwrap().isomorphism);
            assert!(ro_equals_ko(&x).unwrap());
        }
    }

    #[test]
    fn sierpinski_is_not_zero_dimensional() {
        let s = FiniteSpace::sierpinski();
        assert_eq!(ro_equals_ko(&s), Err(StoneError::NotZeroDimensional));
        assert!(ko(&s).is_err());
    }

    #[test]
    fn partition_topology_breaks_point_separation() {
        let x = FiniteSpace::indiscrete(2);
        assert!(!duality_roundtrip_space(&x).unwrap().isomorphism);
    }

    #[test]
    fn regular_open_algebras_are_boolean() {
        for n in 1..=3 {
            for x in all_topologies(n) {
                let b = GenBoolAlg::from_ro(&x.ro_algebra()).unwrap();
                if b.len() > 1 {
                    assert!(duality_roundtrip(&b).unwrap().isomorphism);
                }
            }
        }
    }

    #[test]
    fn order_json() {
        let j = r#"{"elements":["0","a","b","ab"],"leq":[["0","a"],["0","b"],["a","ab"],["b","ab"]]}"#;
        let b = GenBoolAlg::from_json(&serde_json::from_str(j).unwrap()).unwrap();
        assert_eq!(b.atoms(), vec![1, 2]);
        let p: AlgebraJson = serde_json::from_str(r#"{"atoms":2}"#).unwrap();
        assert_eq!(GenBoolAlg::from_json(&p).unwrap().len(), 4);
    }
}
