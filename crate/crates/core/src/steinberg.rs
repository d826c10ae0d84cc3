//! Finite discrete groupoids and their Steinberg algebras `A_R(G) = R^G` with
//! convolution, the diagonal `D_R(G)` of functions supported on units,
//! normalizers, the local bisection hypothesis and condition (S), cocycles,
//! and the decomposition `Tf(a) = χ(a)(f(φ(a)))` of diagonal-preserving
//! isomorphisms.
//!
//! Rings are `Z/n`, `Z` and finite products of `Z/n`. Elements are canonical
//! [`BigInt`] codes. Algebra maps are given by the images of the indicators
//! `1_a` and extended `R`-linearly; for `Z/n` and `Z` every additive map has
//! this form. Additive automorphisms of `Z/n` and `Z` are multiplications by
//! units, so a cocycle is stored as one unit multiplier per arrow.

use std::collections::{BTreeMap, BTreeSet};

use num::bigint::BigInt;
use num::{Integer, One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::combinat::all_maps;
use crate::fintop::PointSet;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SteinbergError {
    #[error("groupoid axiom violated: {0}")]
    GroupoidAxiomViolation(String),
    #[error("invalid ring: {0}")]
    BadRing(String),
    #[error("ring is decomposable: nontrivial idempotents {0:?}")]
    NotIndecomposable(Vec<BigInt>),
    #[error("element has the wrong length or a value outside the ring")]
    BadElement,
    #[error("map does not send the diagonal onto the diagonal (unit {0})")]
    NotDiagonalPreserving(usize),
    #[error("not a ring isomorphism: {0}")]
    NotRingIso(String),
    #[error("decomposition failed: {0}")]
    DecompositionFailed(String),
    #[error("invalid cocycle: {0}")]
    InvalidCocycle(String),
    #[error("map is not a groupoid isomorphism")]
    NotGroupoidIso,
    #[error("no structural inverse and the ring is infinite")]
    SearchCapExceeded,
    #[error("enumeration of {0} candidates exceeds the cap {1}")]
    EnumerationCapExceeded(u128, u128),
    #[error("unknown arrow {0:?}")]
    UnknownArrow(String),
    #[error("cannot parse ring element {0:?}")]
    Parse(String),
}

type Res<T> = Result<T, SteinbergError>;

pub const DEFAULT_ENUMERATION_CAP: u128 = 1 << 12;

/// A commutative unital ring.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RingSpec {
    Modular { n: u64 },
    Integer,
    Product { moduli: Vec<u64> },
}

impl RingSpec {
    pub fn zn(n: u64) -> Self {
        RingSpec::Modular { n }
    }

    pub fn validate(&self) -> Res<()> {
        match self {
            RingSpec::Modular { n } if *n < 2 => Err(SteinbergError::BadRing(format!("modulus {n} < 2"))),
            RingSpec::Product { moduli } if moduli.is_empty() || moduli.iter().any(|&m| m < 2) => {
                Err(SteinbergError::BadRing("product needs moduli >= 2".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> String {
        match self {
            RingSpec::Modular { n } => format!("Z/{n}"),
            RingSpec::Integer => "Z".into(),
            RingSpec::Product { moduli } => moduli.iter().map(|m| format!("Z/{m}")).collect::<Vec<_>>().join("×"),
        }
    }

    fn decode(&self, c: &BigInt) -> Vec<BigInt> {
        let RingSpec::Product { moduli } = self else { return vec![c.clone()] };
        let mut c = c.clone();
        moduli
            .iter()
            .map(|&m| {
                let (q, r) = c.div_mod_floor(&BigInt::from(m));
                c = q;
                r
            })
            .collect()
    }

    fn encode(&self, parts: &[BigInt]) -> BigInt {
        let RingSpec::Product { moduli } = self else { return parts[0].clone() };
        let mut code = BigInt::zero();
        for (p, &m) in parts.iter().zip(moduli).rev() {
            code = code * BigInt::from(m) + p.mod_floor(&BigInt::from(m));
        }
        code
    }

    fn componentwise(&self, a: &BigInt, b: &BigInt, op: impl Fn(&BigInt, &BigInt) -> BigInt) -> BigInt {
        match self {
            RingSpec::Modular { n } => op(a, b).mod_floor(&BigInt::from(*n)),
            RingSpec::Integer => op(a, b),
            RingSpec::Product { .. } => {
                let (x, y) = (self.decode(a), self.decode(b));
                let parts: Vec<BigInt> = x.iter().zip(&y).map(|(u, v)| op(u, v)).collect();
                self.encode(&parts)
            }
        }
    }

    pub fn zero(&self) -> BigInt {
        BigInt::zero()
    }

    pub fn one(&self) -> BigInt {
        self.from_int(&BigInt::one())
    }

    /// Image of an integer under `Z -> R`.
    pub fn from_int(&self, k: &BigInt) -> BigInt {
        match self {
            RingSpec::Modular { n } => k.mod_floor(&BigInt::from(*n)),
            RingSpec::Integer => k.clone(),
            RingSpec::Product { moduli } => self.encode(&vec![k.clone(); moduli.len()]),
        }
    }

    pub fn add(&self, a: &BigInt, b: &BigInt) -> BigInt {
        self.componentwise(a, b, |u, v| u + v)
    }

    pub fn mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        self.componentwise(a, b, |u, v| u * v)
    }

    pub fn neg(&self, a: &BigInt) -> BigInt {
        self.componentwise(a, a, |u, _| -u)
    }

    pub fn contains(&self, a: &BigInt) -> bool {
        match self.size() {
            Some(n) => !a.is_negative() && *a < BigInt::from(n),
            None => true,
        }
    }

    pub fn size(&self) -> Option<u128> {
        match self {
            RingSpec::Modular { n } => Some(*n as u128),
            RingSpec::Integer => None,
            RingSpec::Product { moduli } => Some(moduli.iter().map(|&m| m as u128).product()),
        }
    }

    /// All elements of a finite ring.
    pub fn elements(&self) -> Option<Vec<BigInt>> {
        self.size().map(|n| (0..n).map(BigInt::from).collect())
    }

    pub fn inverse(&self, a: &BigInt) -> Option<BigInt> {
        match self {
            RingSpec::Integer => (a.abs().is_one()).then(|| a.clone()),
            RingSpec::Modular { n } => {
                let e = a.extended_gcd(&BigInt::from(*n));
                e.gcd.is_one().then(|| e.x.mod_floor(&BigInt::from(*n)))
            }
            RingSpec::Product { moduli } => {
                let parts = self.decode(a);
                let inv: Option<Vec<BigInt>> = parts
                    .iter()
                    .zip(moduli)
                    .map(|(p, &m)| {
                        let e = p.extended_gcd(&BigInt::from(m));
                        e.gcd.is_one().then(|| e.x.mod_floor(&BigInt::from(m)))
                    })
                    .collect();
                inv.map(|v| self.encode(&v))
            }
        }
    }

    pub fn is_unit(&self, a: &BigInt) -> bool {
        self.inverse(a).is_some()
    }

    /// Units of the ring; `Z` has `±1`.
    pub fn units(&self) -> Vec<BigInt> {
        match self.elements() {
            Some(es) => es.into_iter().filter(|a| self.is_unit(a)).collect(),
            None => vec![BigInt::one(), -BigInt::one()],
        }
    }

    pub fn idempotents(&self) -> Vec<BigInt> {
        match self.elements() {
            Some(es) => es.into_iter().filter(|a| self.mul(a, a) == *a).collect(),
            None => vec![BigInt::zero(), BigInt::one()],
        }
    }

    pub fn is_indecomposable(&self) -> bool {
        self.idempotents().len() == 2
    }

    pub fn require_indecomposable(&self) -> Res<()> {
        let extra: Vec<BigInt> = self.idempotents().into_iter().filter(|e| !e.is_zero() && *e != self.one()).collect();
        if extra.is_empty() {
            Ok(())
        } else {
            Err(SteinbergError::NotIndecomposable(extra))
        }
    }

    /// Determinant of a square matrix over the ring.
    pub fn det(&self, m: &[Vec<BigInt>]) -> BigInt {
        match self {
            RingSpec::Product { moduli } => {
                let parts: Vec<BigInt> = (0..moduli.len())
                    .map(|i| {
                        let lifted: Vec<Vec<BigInt>> = m.iter().map(|row| row.iter().map(|e| self.decode(e)[i].clone()).collect()).collect();
                        bareiss(lifted)
                    })
                    .collect();
                self.encode(&parts)
            }
            _ => self.from_int(&bareiss(m.to_vec())),
        }
    }

    pub fn parse_element(&self, s: &str) -> Res<BigInt> {
        let k: BigInt = s.trim().parse().map_err(|_| SteinbergError::Parse(s.to_string()))?;
        Ok(self.from_int(&k))
    }
}

/// Integer determinant by fraction-free elimination.
fn bareiss(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(i, k);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    sign * &m[n - 1][n - 1]
}

/// A finite groupoid with the discrete topology.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroupoid {
    names: Vec<String>,
    source: Vec<usize>,
    range: Vec<usize>,
    product: Vec<Vec<Option<usize>>>,
    inverse: Vec<usize>,
    units: Vec<usize>,
    /// `(b, c, bc)` for every composable pair.
    triples: Vec<(usize, usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupoidJson {
    pub elements: Vec<String>,
    pub source: Vec<String>,
    pub range: Vec<String>,
    pub product: Vec<[String; 3]>,
}

impl FiniteGroupoid {
    /// Validates the groupoid axioms; `product[a][b]` is `ab`.
    pub fn make_groupoid(names: Vec<String>, source: Vec<usize>, range: Vec<usize>, product: Vec<Vec<Option<usize>>>) -> Res<Self> {
        let n = names.len();
        let bad = |s: String| Err(SteinbergError::GroupoidAxiomViolation(s));
        if n == 0 || n > 64 || source.len() != n || range.len() != n || product.len() != n || product.iter().any(|r| r.len() != n) {
            return bad("tables have inconsistent sizes".into());
        }
        if source.iter().chain(&range).chain(product.iter().flatten().flatten()).any(|&i| i >= n) {
            return bad("index out of range".into());
        }
        for a in 0..n {
            for b in 0..n {
                let composable = source[a] == range[b];
                match product[a][b] {
                    Some(_) if !composable => return bad(format!("({}, {}) is not composable but has a product", names[a], names[b])),
                    None if composable => return bad(format!("({}, {}) is composable but has no product", names[a], names[b])),
                    Some(c) if source[c] != source[b] || range[c] != range[a] => {
                        return bad(format!("{}·{} = {} has the wrong source or range", names[a], names[b], names[c]))
                    }
                    _ => {}
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if let (Some(ab), Some(bc)) = (product[a][b], product[b][c]) {
                        if product[ab][c] != product[a][bc] {
                            return bad(format!("associativity fails on ({}, {}, {})", names[a], names[b], names[c]));
                        }
                    }
                }
            }
        }
        let units: BTreeSet<usize> = source.iter().copied().collect();
        for &u in &units {
            if source[u] != u || range[u] != u {
                return bad(format!("unit {} has source or range different from itself", names[u]));
            }
        }
        for a in 0..n {
            if product[range[a]][a] != Some(a) || product[a][source[a]] != Some(a) {
                return bad(format!("units do not act as identities on {}", names[a]));
            }
        }
        let mut inverse = Vec::with_capacity(n);
        for a in 0..n {
            match (0..n).find(|&b| product[a][b] == Some(range[a]) && product[b][a] == Some(source[a])) {
                Some(b) => inverse.push(b),
                None => return bad(format!("{} has no inverse", names[a])),
            }
        }
        let mut triples = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if let Some(c) = product[a][b] {
                    triples.push((a, b, c));
                }
            }
        }
        Ok(FiniteGroupoid {
            names,
            source,
            range,
            product,
            inverse,
            units: units.into_iter().collect(),
            triples,
        })
    }

    /// The pair groupoid on `n` points, arrows `(i,j)` with `r = i`, `s = j`.
    pub fn pair(n: usize) -> Self {
        let idx = |i: usize, j: usize| i * n + j;
        let names = (0..n * n).map(|a| format!("({},{})", a / n + 1, a % n + 1)).collect();
        let source = (0..n * n).map(|a| idx(a % n, a % n)).collect();
        let range = (0..n * n).map(|a| idx(a / n, a / n)).collect();
        let product = (0..n * n)
            .map(|a| (0..n * n).map(|b| (a % n == b / n).then(|| idx(a / n, b % n))).collect())
            .collect();
        FiniteGroupoid::make_groupoid(names, source, range, product).expect("pair groupoid")
    }

    /// The cyclic group of order `n` as a one-object groupoid.
    pub fn cyclic_group(n: usize) -> Self {
        let names = (0..n).map(|k| if k == 0 { "e".to_string() } else { format!("g{k}") }).collect();
        let product = (0..n).map(|a| (0..n).map(|b| Some((a + b) % n)).collect()).collect();
        FiniteGroupoid::make_groupoid(names, vec![0; n], vec![0; n], product).expect("cyclic group")
    }

    /// `C₂ ⋉ C₂` for the action by left multiplication: arrows `(h, y)` with
    /// `s = (1, y)`, `r = (1, hy)` and `(h, ky)(k, y) = (hk, y)`.
    pub fn c2_ltimes_c2() -> Self {
        // index 2h + y, with 0 = 1 and 1 = g
        let e = |h: usize, y: usize| 2 * h + y;
        let label = |v: usize| if v == 0 { "1" } else { "g" };
        let names = (0..4).map(|a| format!("({},{})", label(a / 2), label(a % 2))).collect();
        let source = (0..4).map(|a| e(0, a % 2)).collect();
        let range = (0..4).map(|a| e(0, (a / 2) ^ (a % 2))).collect();
        let product = (0..4)
            .map(|a: usize| {
                (0..4)
                    .map(|b: usize| {
                        let (h, z) = (a / 2, a % 2);
                        let (k, y) = (b / 2, b % 2);
                        (z == k ^ y).then(|| e(h ^ k, y))
                    })
                    .collect()
            })
            .collect();
        FiniteGroupoid::make_groupoid(names, source, range, product).expect("transformation groupoid")
    }

    /// The space of `n` points as a groupoid of units.
    pub fn trivial(n: usize) -> Self {
        let names = (0..n).map(|i| format!("x{}", i + 1)).collect();
        let product = (0..n).map(|a| (0..n).map(|b| (a == b).then_some(a)).collect()).collect();
        FiniteGroupoid::make_groupoid(names, (0..n).collect(), (0..n).collect(), product).expect("unit groupoid")
    }

    /// Arrows of `self` followed by those of `other`; clashing names of
    /// `other` get a trailing prime.
    pub fn disjoint_union(&self, other: &FiniteGroupoid) -> Res<Self> {
        let k = self.len();
        let mut names = self.names.clone();
        for s in &other.names {
            let mut s = s.clone();
            while names.contains(&s) {
                s.push('\'');
            }
            names.push(s);
        }
        let source = self.source.iter().copied().chain(other.source.iter().map(|&x| x + k)).collect();
        let range = self.range.iter().copied().chain(other.range.iter().map(|&x| x + k)).collect();
        let n = k + other.len();
        let product = (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| match (a < k, b < k) {
                        (true, true) => self.product[a][b],
                        (false, false) => other.product[a - k][b - k].map(|c| c + k),
                        _ => None,
                    })
                    .collect()
            })
            .collect();
        FiniteGroupoid::make_groupoid(names, source, range, product)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Res<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| SteinbergError::UnknownArrow(name.to_string()))
    }

    pub fn source(&self, a: usize) -> usize {
        self.source[a]
    }

    pub fn range(&self, a: usize) -> usize {
        self.range[a]
    }

    pub fn inverse(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn product(&self, a: usize, b: usize) -> Option<usize> {
        self.product[a][b]
    }

    pub fn units(&self) -> &[usize] {
        &self.units
    }

    pub fn is_unit(&self, a: usize) -> bool {
        self.source[a] == a
    }

    pub fn isotropy(&self, x: usize) -> Vec<usize> {
        (0..self.len()).filter(|&a| self.source[a] == x && self.range[a] == x).collect()
    }

    /// Every isotropy group is trivial (in the discrete topology this is the
    /// density condition).
    pub fn is_topologically_principal(&self) -> bool {
        self.units.iter().all(|&x| self.isotropy(x).len() == 1)
    }

    pub fn is_bisection(&self, s: PointSet) -> bool {
        let pts: Vec<usize> = s.points().collect();
        let srcs: BTreeSet<usize> = pts.iter().map(|&a| self.source[a]).collect();
        let rngs: BTreeSet<usize> = pts.iter().map(|&a| self.range[a]).collect();
        srcs.len() == pts.len() && rngs.len() == pts.len()
    }

    /// All bisections; every subset is compact-open.
    pub fn bisections(&self) -> Vec<PointSet> {
        PointSet::full(self.len()).subsets().filter(|&s| self.is_bisection(s)).collect()
    }

    /// `α` is a bijection with `α(ab) = α(a)α(b)` and composability preserved both ways.
    pub fn is_isomorphism_to(&self, other: &FiniteGroupoid, alpha: &[usize]) -> bool {
        if alpha.len() != self.len() || other.len() != self.len() {
            return false;
        }
        let distinct: BTreeSet<usize> = alpha.iter().copied().collect();
        if distinct.len() != alpha.len() || alpha.iter().any(|&b| b >= other.len()) {
            return false;
        }
        (0..self.len()).all(|a| (0..self.len()).all(|b| self.product[a][b].map(|c| alpha[c]) == other.product[alpha[a]][alpha[b]]))
    }

    /// All groupoid isomorphisms onto `other`, by backtracking over arrows.
    pub fn isomorphisms_to(&self, other: &FiniteGroupoid) -> Vec<Vec<usize>> {
        let n = self.len();
        let mut out = Vec::new();
        if other.len() != n {
            return out;
        }
        let mut alpha: Vec<usize> = Vec::with_capacity(n);
        let mut used = vec![false; n];
        fn go(g: &FiniteGroupoid, h: &FiniteGroupoid, alpha: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
            let k = alpha.len();
            if k == g.len() {
                out.push(alpha.clone());
                return;
            }
            for cand in 0..h.len() {
                if used[cand] || g.is_unit(k) != h.is_unit(cand) {
                    continue;
                }
                alpha.push(cand);
                let ok = (0..=k).all(|a| {
                    (0..=k).all(|b| match g.product[a][b] {
                        Some(c) if c <= k => h.product[alpha[a]][alpha[b]] == Some(alpha[c]),
                        Some(_) => h.product[alpha[a]][alpha[b]].is_some(),
                        None => h.product[alpha[a]][alpha[b]].is_none(),
                    })
                });
                if ok {
                    used[cand] = true;
                    go(g, h, alpha, used, out);
                    used[cand] = false;
                }
                alpha.pop();
            }
        }
        go(self, other, &mut alpha, &mut used, &mut out);
        out.retain(|a| self.is_isomorphism_to(other, a));
        out
    }

    pub fn automorphisms(&self) -> Vec<Vec<usize>> {
        self.isomorphisms_to(self)
    }

    pub fn to_json(&self) -> GroupoidJson {
        let nm = |i: usize| self.names[i].clone();
        GroupoidJson {
            elements: self.names.clone(),
            source: self.source.iter().map(|&i| nm(i)).collect(),
            range: self.range.iter().map(|&i| nm(i)).collect(),
            product: self.triples.iter().map(|&(a, b, c)| [nm(a), nm(b), nm(c)]).collect(),
        }
    }

    pub fn from_json(j: &GroupoidJson) -> Res<Self> {
        let n = j.elements.len();
        let idx = |s: &str| {
            j.elements
                .iter()
                .position(|e| e == s)
                .ok_or_else(|| SteinbergError::UnknownArrow(s.to_string()))
        };
        let source = j.source.iter().map(|s| idx(s)).collect::<Res<Vec<_>>>()?;
        let range = j.range.iter().map(|s| idx(s)).collect::<Res<Vec<_>>>()?;
        let mut product = vec![vec![None; n]; n];
        for [a, b, c] in &j.product {
            let (a, b, c) = (idx(a)?, idx(b)?, idx(c)?);
            if product[a][b].replace(c).is_some_and(|old| old != c) {
                return Err(SteinbergError::GroupoidAxiomViolation(format!(
                    "two products for ({}, {})",
                    j.elements[a], j.elements[b]
                )));
            }
        }
        FiniteGroupoid::make_groupoid(j.elements.clone(), source, range, product)
    }
}

pub type AlgebraElement = Vec<BigInt>;

/// The Steinberg algebra of a finite groupoid over a ring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Steinberg {
    pub groupoid: FiniteGroupoid,
    pub ring: RingSpec,
}

impl Steinberg {
    pub fn new(groupoid: FiniteGroupoid, ring: RingSpec) -> Res<Self> {
        ring.validate()?;
        Ok(Steinberg { groupoid, ring })
    }

    pub fn dim(&self) -> usize {
        self.groupoid.len()
    }

    pub fn zero(&self) -> AlgebraElement {
        vec![BigInt::zero(); self.dim()]
    }

    /// `r·1_a`.
    pub fn basis(&self, a: usize, r: &BigInt) -> AlgebraElement {
        let mut f = self.zero();
        f[a] = r.clone();
        f
    }

    pub fn indicator(&self, s: PointSet) -> AlgebraElement {
        (0..self.dim())
            .map(|a| if s.contains(a) { self.ring.one() } else { BigInt::zero() })
            .collect()
    }

    pub fn unit_element(&self) -> AlgebraElement {
        self.indicator(PointSet::from_points(self.groupoid.units().iter().copied()))
    }

    pub fn check(&self, f: &[BigInt]) -> Res<()> {
        if f.len() != self.dim() || f.iter().any(|v| !self.ring.contains(v)) {
            return Err(SteinbergError::BadElement);
        }
        Ok(())
    }

    pub fn support(&self, f: &[BigInt]) -> PointSet {
        PointSet::from_points((0..f.len()).filter(|&a| !f[a].is_zero()))
    }

    /// `(fg)(a) = Σ_{bc = a} f(b) g(c)`.
    pub fn convolve(&self, f: &[BigInt], g: &[BigInt]) -> AlgebraElement {
        let mut out = self.zero();
        for &(b, c, a) in &self.groupoid.triples {
            if !f[b].is_zero() && !g[c].is_zero() {
                out[a] = self.ring.add(&out[a], &self.ring.mul(&f[b], &g[c]));
            }
        }
        out
    }

    pub fn add(&self, f: &[BigInt], g: &[BigInt]) -> AlgebraElement {
        f.iter().zip(g).map(|(a, b)| self.ring.add(a, b)).collect()
    }

    pub fn scale(&self, r: &BigInt, f: &[BigInt]) -> AlgebraElement {
        f.iter().map(|a| self.ring.mul(r, a)).collect()
    }

    pub fn in_diagonal(&self, f: &[BigInt]) -> bool {
        (0..f.len()).all(|a| f[a].is_zero() || self.groupoid.is_unit(a))
    }

    /// Every element, for finite rings within the cap.
    pub fn elements(&self, cap: u128) -> Res<Vec<AlgebraElement>> {
        let Some(r) = self.ring.elements() else {
            return Err(SteinbergError::SearchCapExceeded);
        };
        let count = (r.len() as u128).checked_pow(self.dim() as u32).unwrap_or(u128::MAX);
        if count > cap {
            return Err(SteinbergError::EnumerationCapExceeded(count, cap));
        }
        Ok(all_maps(self.dim(), r.len())
            .map(|c| c.into_iter().map(|i| r[i].clone()).collect())
            .collect())
    }

    /// `f*` with `f*(a) = f(a⁻¹)⁻¹`, when the support is a bisection and the
    /// values are invertible.
    pub fn star(&self, f: &[BigInt]) -> Option<AlgebraElement> {
        if !self.groupoid.is_bisection(self.support(f)) {
            return None;
        }
        let mut g = self.zero();
        for a in self.support(f).points() {
            g[self.groupoid.inverse(a)] = self.ring.inverse(&f[a])?;
        }
        Some(g)
    }

    /// `g` is an inverse of `f` relative to the diagonal.
    pub fn is_relative_inverse(&self, f: &[BigInt], g: &[BigInt]) -> bool {
        if self.convolve(&self.convolve(f, g), f) != f || self.convolve(&self.convolve(g, f), g) != g {
            return false;
        }
        // the diagonal is spanned by the unit indicators
        self.groupoid.units().iter().all(|&x| {
            let e = self.basis(x, &self.ring.one());
            self.in_diagonal(&self.convolve(&self.convolve(f, &e), g)) && self.in_diagonal(&self.convolve(&self.convolve(g, &e), f))
        })
    }

    /// A relative inverse of `f`, trying `f*` before exhaustive search.
    pub fn is_normalizer(&self, f: &[BigInt], cap: u128) -> Res<Option<AlgebraElement>> {
        self.check(f)?;
        if let Some(g) = self.star(f) {
            if self.is_relative_inverse(f, &g) {
                return Ok(Some(g));
            }
        }
        if self.ring.size().is_none() {
            return Err(SteinbergError::SearchCapExceeded);
        }
        Ok(self.elements(cap)?.into_iter().find(|g| self.is_relative_inverse(f, g)))
    }

    /// Units of the group ring of the isotropy group at `x`, with a nontrivial
    /// one if it exists.
    pub fn isotropy_units(&self, x: usize, cap: u128) -> Res<IsotropyUnits> {
        let k = self.groupoid.isotropy(x);
        if k.len() == 1 {
            return Ok(IsotropyUnits {
                unit: x,
                order: 1,
                units: self.ring.units().len() as u128,
                nontrivial: None,
            });
        }
        let Some(r) = self.ring.elements() else {
            return Err(SteinbergError::EnumerationCapExceeded(u128::MAX, cap));
        };
        let count = (r.len() as u128).checked_pow(k.len() as u32).unwrap_or(u128::MAX);
        if count.saturating_mul(count) > cap.saturating_mul(cap) {
            return Err(SteinbergError::EnumerationCapExceeded(count, cap));
        }
        let pos = |a: usize| k.iter().position(|&b| b == a).expect("isotropy closed");
        let mul = |u: &[BigInt], v: &[BigInt]| {
            let mut w = vec![BigInt::zero(); k.len()];
            for (i, &a) in k.iter().enumerate() {
                for (j, &b) in k.iter().enumerate() {
                    let c = pos(self.groupoid.product(a, b).expect("same unit"));
                    w[c] = self.ring.add(&w[c], &self.ring.mul(&u[i], &v[j]));
                }
            }
            w
        };
        let elems: Vec<Vec<BigInt>> = all_maps(k.len(), r.len())
            .map(|c| c.into_iter().map(|i| r[i].clone()).collect())
            .collect();
        let mut one = vec![BigInt::zero(); k.len()];
        one[pos(x)] = self.ring.one();
        let mut units = 0u128;
        let mut nontrivial = None;
        for u in &elems {
            if elems.iter().any(|v| mul(u, v) == one) {
                units += 1;
                let nz: Vec<&BigInt> = u.iter().filter(|c| !c.is_zero()).collect();
                let trivial = nz.len() == 1 && self.ring.is_unit(nz[0]);
                if !trivial && nontrivial.is_none() {
                    nontrivial = Some(u.clone());
                }
            }
        }
        Ok(IsotropyUnits {
            unit: x,
            order: k.len(),
            units,
            nontrivial,
        })
    }

    /// Every isotropy group ring has only trivial units.
    pub fn condition_s_check(&self, cap: u128) -> Res<ConditionS> {
        self.ring.require_indecomposable()?;
        let per_unit = self
            .groupoid
            .units()
            .iter()
            .map(|&x| self.isotropy_units(x, cap))
            .collect::<Res<Vec<_>>>()?;
        let holds = per_unit.iter().all(|u| u.nontrivial.is_none());
        Ok(ConditionS { per_unit, holds })
    }

    /// Enumerates all normalizers and checks that their supports are
    /// bisections, that their values are invertible, and that inclusion of
    /// supports matches `f = gp` with `p` diagonal.
    pub fn local_bisection_check(&self, cap: u128) -> Res<LocalBisection> {
        self.ring.require_indecomposable()?;
        let all = self.elements(cap)?;
        let mut normalizers = Vec::new();
        for f in &all {
            let found = match self.star(f) {
                Some(g) if self.is_relative_inverse(f, &g) => true,
                _ => all.iter().any(|g| self.is_relative_inverse(f, g)),
            };
            if found {
                normalizers.push(f.clone());
            }
        }
        let offending = normalizers.iter().find(|f| !self.groupoid.is_bisection(self.support(f))).cloned();
        let values_invertible = normalizers.iter().all(|f| f.iter().all(|v| v.is_zero() || self.ring.is_unit(v)));
        let diagonal: Vec<&AlgebraElement> = all.iter().filter(|p| self.in_diagonal(p)).collect();
        let inclusion = offending.is_some()
            || normalizers.iter().all(|f| {
                normalizers.iter().all(|g| {
                    let included = self.support(f).is_subset(self.support(g));
                    included == diagonal.iter().any(|p| self.convolve(g, p) == *f)
                })
            });
        Ok(LocalBisection {
            elements: all.len(),
            normalizers: normalizers.len(),
            holds: offending.is_none(),
            offending,
            values_invertible,
            inclusion_characterization: inclusion,
        })
    }

    /// Evidence for the local bisection hypothesis: condition (S), else full
    /// enumeration within the cap.
    pub fn local_bisection_evidence(&self, cap: u128) -> Res<HypothesisEvidence> {
        self.ring.require_indecomposable()?;
        match self.condition_s_check(cap) {
            Ok(s) if s.holds => return Ok(HypothesisEvidence::ConditionS),
            Ok(_) | Err(SteinbergError::EnumerationCapExceeded(..)) => {}
            Err(e) => return Err(e),
        }
        match self.local_bisection_check(cap) {
            Ok(r) if r.holds => Ok(HypothesisEvidence::Enumerated),
            Ok(r) => Err(SteinbergError::DecompositionFailed(format!(
                "local bisection hypothesis fails: normalizer {:?} has non-bisection support",
                r.offending.unwrap_or_default()
            ))),
            Err(SteinbergError::EnumerationCapExceeded(..)) | Err(SteinbergError::SearchCapExceeded) => Ok(HypothesisEvidence::Unverified),
            Err(e) => Err(e),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsotropyUnits {
    pub unit: usize,
    pub order: usize,
    pub units: u128,
    pub nontrivial: Option<Vec<BigInt>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionS {
    pub per_unit: Vec<IsotropyUnits>,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalBisection {
    pub elements: usize,
    pub normalizers: usize,
    pub holds: bool,
    pub offending: Option<AlgebraElement>,
    pub values_invertible: bool,
    pub inclusion_characterization: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HypothesisEvidence {
    ConditionS,
    Enumerated,
    Unverified,
}

/// `T: A_R(G) -> A_R(H)` given by `images[b] = T(1_b)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgebraMap {
    pub images: Vec<AlgebraElement>,
}

impl AlgebraMap {
    pub fn apply(&self, src: &Steinberg, tgt: &Steinberg, f: &[BigInt]) -> AlgebraElement {
        let mut out = tgt.zero();
        for (b, img) in self.images.iter().enumerate() {
            if !f[b].is_zero() {
                out = tgt.add(&out, &tgt.scale(&f[b], img));
            }
        }
        let _ = src;
        out
    }

    /// `(S ∘ T)`.
    pub fn compose(&self, after: &AlgebraMap, mid: &Steinberg, tgt: &Steinberg) -> AlgebraMap {
        AlgebraMap {
            images: self.images.iter().map(|img| after.apply(mid, tgt, img)).collect(),
        }
    }

    pub fn identity(alg: &Steinberg) -> AlgebraMap {
        AlgebraMap {
            images: (0..alg.dim()).map(|a| alg.basis(a, &alg.ring.one())).collect(),
        }
    }

    pub fn to_json(&self, src: &Steinberg, tgt: &Steinberg) -> AlgebraMapJson {
        let images = self
            .images
            .iter()
            .enumerate()
            .map(|(b, img)| {
                let entries = (0..img.len())
                    .filter(|&a| !img[a].is_zero())
                    .map(|a| (tgt.groupoid.names()[a].clone(), img[a].to_string()))
                    .collect();
                (src.groupoid.names()[b].clone(), entries)
            })
            .collect();
        AlgebraMapJson { images }
    }

    pub fn from_json(j: &AlgebraMapJson, src: &Steinberg, tgt: &Steinberg) -> Res<Self> {
        let mut images = vec![tgt.zero(); src.dim()];
        for (b, entries) in &j.images {
            let b = src.groupoid.index_of(b)?;
            for (a, v) in entries {
                images[b][tgt.groupoid.index_of(a)?] = tgt.ring.parse_element(v)?;
            }
        }
        Ok(AlgebraMap { images })
    }
}

/// Sparse images: arrow name -> (arrow name -> ring element).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgebraMapJson {
    pub images: BTreeMap<String, BTreeMap<String, String>>,
}

fn check_map_shape(t: &AlgebraMap, src: &Steinberg, tgt: &Steinberg) -> Res<()> {
    if src.ring != tgt.ring {
        return Err(SteinbergError::BadRing("source and target rings differ".into()));
    }
    if t.images.len() != src.dim() {
        return Err(SteinbergError::BadElement);
    }
    t.images.iter().try_for_each(|img| tgt.check(img))
}

/// Multiplicative on indicators and bijective (determinant a unit).
pub fn check_ring_iso(t: &AlgebraMap, src: &Steinberg, tgt: &Steinberg) -> Res<()> {
    check_map_shape(t, src, tgt)?;
    if src.dim() != tgt.dim() {
        return Err(SteinbergError::NotRingIso("dimensions differ".into()));
    }
    let one = src.ring.one();
    for a in 0..src.dim() {
        for b in 0..src.dim() {
            let prod = src.convolve(&src.basis(a, &one), &src.basis(b, &one));
            if t.apply(src, tgt, &prod) != tgt.convolve(&t.images[a], &t.images[b]) {
                return Err(SteinbergError::NotRingIso(format!(
                    "T(1_{} 1_{}) != T(1_{}) T(1_{})",
                    src.groupoid.names()[a],
                    src.groupoid.names()[b],
                    src.groupoid.names()[a],
                    src.groupoid.names()[b]
                )));
            }
        }
    }
    let matrix: Vec<Vec<BigInt>> = t.images.clone();
    if !src.ring.is_unit(&src.ring.det(&matrix)) {
        return Err(SteinbergError::NotRingIso("not bijective".into()));
    }
    Ok(())
}

/// `T(D_R(G)) = D_R(H)`, for a bijective `T`.
pub fn check_diagonal_preserving(t: &AlgebraMap, src: &Steinberg, tgt: &Steinberg) -> Res<()> {
    check_map_shape(t, src, tgt)?;
    let (ug, uh) = (src.groupoid.units(), tgt.groupoid.units());
    for &x in ug {
        if !tgt.in_diagonal(&t.images[x]) {
            return Err(SteinbergError::NotDiagonalPreserving(x));
        }
    }
    let block: Vec<Vec<BigInt>> = ug.iter().map(|&x| uh.iter().map(|&y| t.images[x][y].clone()).collect()).collect();
    if ug.len() != uh.len() || !src.ring.is_unit(&src.ring.det(&block)) {
        return Err(SteinbergError::NotDiagonalPreserving(ug.first().copied().unwrap_or(0)));
    }
    Ok(())
}

/// `χ(a) = (r ↦ c(a) r)` for a unit `c(a)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cocycle {
    pub multipliers: Vec<BigInt>,
}

impl Cocycle {
    pub fn trivial(alg: &Steinberg) -> Self {
        Cocycle {
            multipliers: vec![alg.ring.one(); alg.dim()],
        }
    }

    pub fn apply(&self, ring: &RingSpec, a: usize, r: &BigInt) -> BigInt {
        ring.mul(&self.multipliers[a], r)
    }

    /// Each `χ(a)` is an additive bijection and `χ(ab)(rs) = χ(a)(r) χ(b)(s)`.
    /// Finite rings are checked on every `r, s`; for `Z` the law reduces to
    /// `c(ab) = c(a) c(b)` by bilinearity.
    pub fn validate(&self, alg: &Steinberg) -> Res<()> {
        let (g, ring) = (&alg.groupoid, &alg.ring);
        if self.multipliers.len() != g.len() {
            return Err(SteinbergError::InvalidCocycle("wrong length".into()));
        }
        if let Some(a) = self.multipliers.iter().position(|c| !ring.contains(c) || !ring.is_unit(c)) {
            return Err(SteinbergError::InvalidCocycle(format!("χ({}) is not bijective", g.names()[a])));
        }
        let samples = ring.elements().unwrap_or_else(|| vec![BigInt::one()]);
        for &(a, b, c) in &g.triples {
            for r in &samples {
                for s in &samples {
                    if self.apply(ring, c, &ring.mul(r, s)) != ring.mul(&self.apply(ring, a, r), &self.apply(ring, b, s)) {
                        return Err(SteinbergError::InvalidCocycle(format!(
                            "law fails at ({}, {})",
                            g.names()[a],
                            g.names()[b]
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// `χ(a)` preserves products and the unit.
    pub fn is_ring_morphism_at(&self, ring: &RingSpec, a: usize) -> bool {
        let samples = ring.elements().unwrap_or_else(|| (-3..=3).map(BigInt::from).collect());
        self.apply(ring, a, &ring.one()) == ring.one()
            && samples.iter().all(|r| {
                samples
                    .iter()
                    .all(|s| self.apply(ring, a, &ring.mul(r, s)) == ring.mul(&self.apply(ring, a, r), &self.apply(ring, a, s)))
            })
    }

    /// `χ(x)` is a ring isomorphism on units, `χ(a)(u)⁻¹ = χ(a⁻¹)(u)` for
    /// invertible `u`, and `χ(s(a)) = χ(r(a))`.
    pub fn check_properties(&self, alg: &Steinberg) -> Result<(), String> {
        let (g, ring) = (&alg.groupoid, &alg.ring);
        for &x in g.units() {
            if !self.is_ring_morphism_at(ring, x) {
                return Err(format!("χ({}) is not a ring morphism", g.names()[x]));
            }
        }
        for a in 0..g.len() {
            for u in ring.units() {
                if ring.inverse(&self.apply(ring, a, &u)) != Some(self.apply(ring, g.inverse(a), &u)) {
                    return Err(format!("inverse law fails at {}", g.names()[a]));
                }
            }
            if self.multipliers[g.source(a)] != self.multipliers[g.range(a)] {
                return Err(format!("χ(s({0})) != χ(r({0}))", g.names()[a]));
            }
        }
        Ok(())
    }
}

/// All cocycles `G -> Iso₊(R, R)`.
pub fn all_cocycles(alg: &Steinberg, cap: u128) -> Res<Vec<Cocycle>> {
    let units = alg.ring.units();
    let count = (units.len() as u128).checked_pow(alg.dim() as u32).unwrap_or(u128::MAX);
    if count > cap {
        return Err(SteinbergError::EnumerationCapExceeded(count, cap));
    }
    Ok(all_maps(alg.dim(), units.len())
        .map(|c| Cocycle {
            multipliers: c.into_iter().map(|i| units[i].clone()).collect(),
        })
        .filter(|c| c.validate(alg).is_ok())
        .collect())
}

/// `T_{(φ, χ)} f (a) = χ(a)(f(φ(a)))` for `φ: H -> G` and a cocycle on `H`.
pub fn build_cocycle_map(src: &Steinberg, tgt: &Steinberg, phi: &[usize], chi: &Cocycle) -> Res<AlgebraMap> {
    if !tgt.groupoid.is_isomorphism_to(&src.groupoid, phi) {
        return Err(SteinbergError::NotGroupoidIso);
    }
    if src.ring != tgt.ring {
        return Err(SteinbergError::BadRing("source and target rings differ".into()));
    }
    chi.validate(tgt)?;
    let mut images = vec![tgt.zero(); src.dim()];
    for (a, &b) in phi.iter().enumerate() {
        images[b][a] = chi.multipliers[a].clone();
    }
    let t = AlgebraMap { images };
    check_ring_iso(&t, src, tgt)?;
    check_diagonal_preserving(&t, src, tgt)?;
    Ok(t)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    /// `φ: H -> G`.
    pub phi: Vec<usize>,
    pub chi: Cocycle,
    pub source_hypothesis: HypothesisEvidence,
    pub target_hypothesis: HypothesisEvidence,
}

/// Recovers `(φ, χ)` from a diagonal-preserving ring isomorphism.
pub fn decompose_diagonal_preserving(t: &AlgebraMap, src: &Steinberg, tgt: &Steinberg, cap: u128) -> Res<Decomposition> {
    check_ring_iso(t, src, tgt)?;
    check_diagonal_preserving(t, src, tgt)?;
    let source_hypothesis = src.local_bisection_evidence(cap)?;
    let target_hypothesis = tgt.local_bisection_evidence(cap)?;
    let fail = |s: String| Err(SteinbergError::DecompositionFailed(s));
    let (g, h) = (&src.groupoid, &tgt.groupoid);
    let mut phi = vec![usize::MAX; h.len()];
    for b in 0..g.len() {
        let supp: Vec<usize> = tgt.support(&t.images[b]).points().collect();
        if supp.len() != 1 {
            return fail(format!("T(1_{}) is supported on {} arrows", g.names()[b], supp.len()));
        }
        let a = supp[0];
        if g.is_unit(b) && t.images[b][a] != src.ring.one() {
            return fail(format!("T(1_{}) is not an indicator", g.names()[b]));
        }
        if phi[a] != usize::MAX {
            return fail(format!("two arrows map onto {}", h.names()[a]));
        }
        phi[a] = b;
    }
    if !h.is_isomorphism_to(g, &phi) {
        return fail("recovered point map is not a groupoid isomorphism".into());
    }
    // χ(a)(r) = T(r 1_{φ(a)})(a); R-linearity makes it multiplication by T(1_{φ(a)})(a)
    let multipliers: Vec<BigInt> = (0..h.len()).map(|a| t.images[phi[a]][a].clone()).collect();
    let chi = Cocycle { multipliers };
    if let Some(samples) = src.ring.elements() {
        for a in 0..h.len() {
            for r in &samples {
                let tf = t.apply(src, tgt, &src.basis(phi[a], r));
                if tf[a] != chi.apply(&src.ring, a, r) {
                    return fail(format!("section at {} is not additive", h.names()[a]));
                }
            }
        }
    }
    chi.validate(tgt).map_err(|e| SteinbergError::DecompositionFailed(e.to_string()))?;
    for b in 0..g.len() {
        for a in 0..h.len() {
            let expected = if phi[a] == b { chi.multipliers[a].clone() } else { BigInt::zero() };
            if t.images[b][a] != expected {
                return fail(format!("formula fails on 1_{} at {}", g.names()[b], h.names()[a]));
            }
        }
    }
    Ok(Decomposition {
        phi,
        chi,
        source_hypothesis,
        target_hypothesis,
    })
}

/// `Aut(A_R(G), D_R(G))` as `Coc(G, R) ⋊ Aut(G)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AutomorphismGroup {
    pub cocycles: Vec<Cocycle>,
    pub groupoid_automorphisms: Vec<Vec<usize>>,
    /// `Θ(χ, α)` for `(χ, α)` in cocycle-major order.
    pub elements: Vec<AlgebraMap>,
    /// `Θ((χ₁, α₁)(χ₂, α₂)) = Θ(χ₁, α₁) ∘ Θ(χ₂, α₂)` on every pair.
    pub homomorphism: bool,
    /// Every `Θ(χ, α)` decomposes back to `(α⁻¹, χ)`.
    pub round_trip: bool,
    /// Count from a search over all linear maps, when small enough.
    pub exhaustive_count: Option<usize>,
}

impl AutomorphismGroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }
}

fn invert_perm(p: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; p.len()];
    for (i, &j) in p.iter().enumerate() {
        inv[j] = i;
    }
    inv
}

/// `Θ(χ, α) f (a) = χ(a)(f(α⁻¹ a))`.
pub fn theta_map(alg: &Steinberg, chi: &Cocycle, alpha: &[usize]) -> Res<AlgebraMap> {
    build_cocycle_map(alg, alg, &invert_perm(alpha), chi)
}

/// `(χ₁, α₁)(χ₂, α₂) = (χ₁ · (α₁ · χ₂), α₁ α₂)` with `(α · χ)(a) = χ(α⁻¹ a)`.
pub fn semidirect_product(alg: &Steinberg, x: (&Cocycle, &[usize]), y: (&Cocycle, &[usize])) -> (Cocycle, Vec<usize>) {
    let inv = invert_perm(x.1);
    let multipliers = (0..alg.dim())
        .map(|a| alg.ring.mul(&x.0.multipliers[a], &y.0.multipliers[inv[a]]))
        .collect();
    let alpha = (0..alg.dim()).map(|a| x.1[y.1[a]]).collect();
    (Cocycle { multipliers }, alpha)
}

/// Counts diagonal-preserving ring automorphisms among all linear maps.
pub fn count_automorphisms_exhaustively(alg: &Steinberg, cap: u128) -> Res<usize> {
    let Some(r) = alg.ring.elements() else {
        return Err(SteinbergError::SearchCapExceeded);
    };
    let n = alg.dim();
    let count = (r.len() as u128).checked_pow((n * n) as u32).unwrap_or(u128::MAX);
    if count > cap {
        return Err(SteinbergError::EnumerationCapExceeded(count, cap));
    }
    let mut found = 0;
    for code in all_maps(n * n, r.len()) {
        let images: Vec<AlgebraElement> = (0..n).map(|b| (0..n).map(|a| r[code[b * n + a]].clone()).collect()).collect();
        let t = AlgebraMap { images };
        if check_diagonal_preserving(&t, alg, alg).is_ok() && check_ring_iso(&t, alg, alg).is_ok() {
            found += 1;
        }
    }
    Ok(found)
}

pub const EXHAUSTIVE_AUT_CAP: u128 = 1 << 16;

pub fn enumerate_aut(alg: &Steinberg, cap: u128) -> Res<AutomorphismGroup> {
    alg.ring.require_indecomposable()?;
    let cocycles = all_cocycles(alg, cap.max(1 << 20))?;
    let autos = alg.groupoid.automorphisms();
    let total = cocycles.len() as u128 * autos.len() as u128;
    if total * total > cap.max(1 << 20).saturating_mul(1 << 4) {
        return Err(SteinbergError::EnumerationCapExceeded(total, cap));
    }
    let mut elements = Vec::with_capacity(total as usize);
    let mut pairs = Vec::with_capacity(total as usize);
    let mut round_trip = true;
    for chi in &cocycles {
        for alpha in &autos {
            let t = theta_map(alg, chi, alpha)?;
            let d = decompose_diagonal_preserving(&t, alg, alg, cap)?;
            round_trip &= d.phi == invert_perm(alpha) && d.chi == *chi;
            elements.push(t);
            pairs.push((chi.clone(), alpha.clone()));
        }
    }
    let distinct = (0..elements.len()).all(|i| (0..i).all(|j| elements[i] != elements[j]));
    let mut homomorphism = distinct;
    for (i, x) in pairs.iter().enumerate() {
        for (j, y) in pairs.iter().enumerate() {
            let (c, a) = semidirect_product(alg, (&x.0, &x.1), (&y.0, &y.1));
            let prod = theta_map(alg, &c, &a)?;
            // Θ(x) ∘ Θ(y): apply Θ(y) first
            let composed = elements[j].compose(&elements[i], alg, alg);
            homomorphism &= prod == composed;
        }
    }
    let exhaustive_count = match count_automorphisms_exhaustively(alg, EXHAUSTIVE_AUT_CAP) {
        Ok(n) => Some(n),
        Err(SteinbergError::EnumerationCapExceeded(..)) | Err(SteinbergError::SearchCapExceeded) => None,
        Err(e) => return Err(e),
    };
    Ok(AutomorphismGroup {
        cocycles,
        groupoid_automorphisms: autos,
        elements,
        homomorphism,
        round_trip,
        exhaustive_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcrel::{DiscreteBackend, FunctionFamily, Relation};

    fn z(n: i64) -> BigInt {
        BigInt::from(n)
    }

    fn alg(g: FiniteGroupoid, n: u64) -> Steinberg {
        Steinberg::new(g, RingSpec::zn(n)).unwrap()
    }

    #[test]
    fn standard_groupoids_validate() {
        let p = FiniteGroupoid::pair(2);
        assert_eq!(p.len(), 4);
        assert!(p.is_topologically_principal());
        let swap = PointSet::from_points([p.index_of("(1,2)").unwrap(), p.index_of("(2,1)").unwrap()]);
        assert!(p.bisections().contains(&swap));
        assert!(!FiniteGroupoid::cyclic_group(2).is_topologically_principal());
        assert!(FiniteGroupoid::c2_ltimes_c2().is_topologically_principal());
        let j = p.to_json();
        assert_eq!(FiniteGroupoid::from_json(&j).unwrap(), p);
    }

    #[test]
    fn broken_product_table() {
        let mut j = FiniteGroupoid::cyclic_group(2).to_json();
        j.product[0][2] = "g1".into();
        assert!(matches!(FiniteGroupoid::from_json(&j), Err(SteinbergError::GroupoidAxiomViolation(_))));
    }

    #[test]
    fn matrix_units_multiply() {
        let a = alg(FiniteGroupoid::pair(2), 5);
        let g = &a.groupoid;
        let one = a.ring.one();
        let e12 = a.basis(g.index_of("(1,2)").unwrap(), &one);
        let e21 = a.basis(g.index_of("(2,1)").unwrap(), &one);
        assert_eq!(a.convolve(&e12, &e21), a.basis(g.index_of("(1,1)").unwrap(), &one));
        assert_eq!(a.convolve(&e12, &a.zero()), a.zero());
        // diagonal convolution is pointwise
        let d1 = vec![z(2), z(0), z(0), z(3)];
        let d2 = vec![z(4), z(0), z(0), z(4)];
        assert_eq!(a.convolve(&d1, &d2), vec![z(3), z(0), z(0), z(2)]);
    }

    #[test]
    fn group_ring_identity() {
        let a = alg(FiniteGroupoid::cyclic_group(2), 3);
        let plus = vec![z(1), z(1)];
        let minus = vec![z(1), z(2)];
        assert_eq!(a.convolve(&plus, &minus), a.zero());
    }

    #[test]
    fn normalizers() {
        let a = alg(FiniteGroupoid::pair(2), 2);
        let g = &a.groupoid;
        let u = PointSet::from_points([g.index_of("(1,2)").unwrap()]);
        let f = a.indicator(u);
        let inv = a.is_normalizer(&f, DEFAULT_ENUMERATION_CAP).unwrap().unwrap();
        assert_eq!(inv, a.indicator(PointSet::from_points([g.index_of("(2,1)").unwrap()])));
        assert_eq!(a.is_normalizer(&a.zero(), DEFAULT_ENUMERATION_CAP).unwrap(), Some(a.zero()));
        let f = a.add(&a.unit_element(), &a.basis(g.index_of("(1,2)").unwrap(), &a.ring.one()));
        assert_eq!(a.is_normalizer(&f, DEFAULT_ENUMERATION_CAP).unwrap(), None);
        let mut brute = 0;
        for h in a.elements(DEFAULT_ENUMERATION_CAP).unwrap() {
            if a.is_relative_inverse(&f, &h) {
                brute += 1;
            }
        }
        assert_eq!(brute, 0);
    }

    #[test]
    fn local_bisection_and_condition_s() {
        let a = alg(FiniteGroupoid::pair(2), 2);
        let r = a.local_bisection_check(DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(r.elements, 16);
        assert!(r.holds && r.values_invertible && r.inclusion_characterization);
        assert!(a.condition_s_check(DEFAULT_ENUMERATION_CAP).unwrap().holds);

        let t = alg(FiniteGroupoid::trivial(1), 2);
        assert!(t.local_bisection_check(DEFAULT_ENUMERATION_CAP).unwrap().holds);
        assert!(t.condition_s_check(DEFAULT_ENUMERATION_CAP).unwrap().holds);
    }

    #[test]
    fn group_ring_units() {
        // Z/3[C2] ≅ Z/3 × Z/3 has 4 units, all trivial
        let a = alg(FiniteGroupoid::cyclic_group(2), 3);
        let u = a.isotropy_units(0, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!((u.units, u.nontrivial.clone()), (4, None));
        // Z/5[C2] has 1 + 2g
        let b = alg(FiniteGroupoid::cyclic_group(2), 5);
        let s = b.condition_s_check(DEFAULT_ENUMERATION_CAP).unwrap();
        assert!(!s.holds);
        assert_eq!(s.per_unit[0].units, 16);
        let lb = b.local_bisection_check(DEFAULT_ENUMERATION_CAP).unwrap();
        assert!(!lb.holds);
        let off = lb.offending.unwrap();
        assert!(b.is_normalizer(&off, DEFAULT_ENUMERATION_CAP).unwrap().is_some());
        // Z[C2] has no enumeration
        let zc = Steinberg::new(FiniteGroupoid::cyclic_group(2), RingSpec::Integer).unwrap();
        assert!(matches!(
            zc.condition_s_check(DEFAULT_ENUMERATION_CAP),
            Err(SteinbergError::EnumerationCapExceeded(..))
        ));
    }

    #[test]
    fn z6_is_decomposable() {
        let r = RingSpec::zn(6);
        assert!(!r.is_indecomposable());
        assert_eq!(r.require_indecomposable(), Err(SteinbergError::NotIndecomposable(vec![z(3), z(4)])));
        let p = RingSpec::Product { moduli: vec![2, 3] };
        assert_eq!(p.idempotents().len(), 4);
        assert!(RingSpec::zn(4).is_indecomposable() && RingSpec::Integer.is_indecomposable());
        let a = alg(FiniteGroupoid::pair(2), 6);
        assert!(matches!(
            enumerate_aut(&a, DEFAULT_ENUMERATION_CAP),
            Err(SteinbergError::NotIndecomposable(_))
        ));
    }

    #[test]
    fn sign_cocycle_on_transformation_groupoid() {
        let g = FiniteGroupoid::c2_ltimes_c2();
        let a = Steinberg::new(g.clone(), RingSpec::Integer).unwrap();
        let mult = (0..4).map(|e| if e / 2 == 1 { z(-1) } else { z(1) }).collect();
        let chi = Cocycle { multipliers: mult };
        chi.validate(&a).unwrap();
        chi.check_properties(&a).unwrap();
        let g1 = g.index_of("(g,1)").unwrap();
        assert!(!chi.is_ring_morphism_at(&a.ring, g1));
        let t = build_cocycle_map(&a, &a, &(0..4).collect::<Vec<_>>(), &chi).unwrap();
        let d = decompose_diagonal_preserving(&t, &a, &a, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(d.chi, chi);
        assert_eq!(d.source_hypothesis, HypothesisEvidence::ConditionS);
    }

    #[test]
    fn identity_and_conjugation() {
        let a = alg(FiniteGroupoid::pair(2), 3);
        let id = AlgebraMap::identity(&a);
        let d = decompose_diagonal_preserving(&id, &a, &a, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(d.phi, vec![0, 1, 2, 3]);
        assert_eq!(d.chi, Cocycle::trivial(&a));
        // conjugation by the permutation matrix P: E_ij -> E_{σi σj}
        let conj = AlgebraMap {
            images: (0..4).map(|e| a.basis(3 - e, &a.ring.one())).collect(),
        };
        let d = decompose_diagonal_preserving(&conj, &a, &a, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(d.phi, vec![3, 2, 1, 0]);
        assert_eq!(d.chi, Cocycle::trivial(&a));
    }

    #[test]
    fn non_ring_maps_are_rejected() {
        let a = alg(FiniteGroupoid::pair(2), 3);
        let mut t = AlgebraMap::identity(&a);
        t.images[1] = a.basis(1, &z(2));
        t.images[2] = a.basis(2, &z(2));
        // (1,2)(2,1) = (1,1) but 2·2 = 1 in Z/3, so this is the coboundary of ±1
        assert!(decompose_diagonal_preserving(&t, &a, &a, DEFAULT_ENUMERATION_CAP).is_ok());
        t.images[2] = a.basis(2, &z(1));
        assert!(matches!(check_ring_iso(&t, &a, &a), Err(SteinbergError::NotRingIso(_))));
        let mut u = AlgebraMap::identity(&a);
        u.images[0] = a.basis(1, &z(1));
        assert!(check_diagonal_preserving(&u, &a, &a).is_err());
    }

    #[test]
    fn automorphism_groups() {
        let a = alg(FiniteGroupoid::pair(2), 2);
        let g = enumerate_aut(&a, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(g.order(), 2);
        assert!(g.homomorphism && g.round_trip);
        assert_eq!(g.exhaustive_count, Some(2));

        let b = alg(FiniteGroupoid::pair(2), 3);
        let g = enumerate_aut(&b, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!((g.cocycles.len(), g.groupoid_automorphisms.len(), g.order()), (2, 2, 4));
        assert!(g.homomorphism && g.round_trip);

        let t = alg(FiniteGroupoid::trivial(1), 2);
        assert_eq!(enumerate_aut(&t, DEFAULT_ENUMERATION_CAP).unwrap().order(), 1);
        let t5 = alg(FiniteGroupoid::trivial(1), 5);
        assert_eq!(enumerate_aut(&t5, DEFAULT_ENUMERATION_CAP).unwrap().order(), 1);
    }

    #[test]
    fn cocycle_properties_hold_on_small_groupoids() {
        let gs = [
            FiniteGroupoid::pair(2),
            FiniteGroupoid::cyclic_group(2),
            FiniteGroupoid::c2_ltimes_c2(),
            FiniteGroupoid::trivial(3),
        ];
        for g in gs {
            for n in [2, 3] {
                let a = alg(g.clone(), n);
                for c in all_cocycles(&a, 1 << 20).unwrap() {
                    c.check_properties(&a).unwrap();
                }
            }
        }
    }

    #[test]
    fn perp_coincides_with_strong_perp() {
        let a = alg(FiniteGroupoid::pair(2), 2);
        let members = a.elements(DEFAULT_ENUMERATION_CAP).unwrap();
        let backend = DiscreteBackend {
            space: crate::fintop::FiniteSpace::discrete(4),
            codomain: vec![z(0), z(1)],
            theta: a.zero(),
        };
        let fam = FunctionFamily::new(backend, members).unwrap();
        for f in 0..fam.len() {
            for g in 0..fam.len() {
                assert_eq!(fam.rel(Relation::Perp, f, g), fam.rel(Relation::PerpPerp, f, g));
            }
        }
    }

    #[test]
    fn determinants() {
        let r = RingSpec::Integer;
        let m = vec![vec![z(2), z(1)], vec![z(1), z(1)]];
        assert_eq!(r.det(&m), z(1));
        assert_eq!(RingSpec::zn(3).det(&[vec![z(2), z(1)], vec![z(1), z(2)]].to_vec()), z(0));
    }
}
