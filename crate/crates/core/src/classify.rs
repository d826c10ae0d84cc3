//! Classification of maps between function lattices and spaces of scalar
//! functions on finite discrete spaces: Kaplansky recovery of the point map,
//! additive lattice isomorphisms, and weighted composition operators under
//! non-vanishing, disjointness, sup-isometry and L¹-isometry hypotheses.
//!
//! For L¹ disjointness only the probes `A = 1` and `B = ±1` are needed. If
//! `f(x)` and `g(x)` are both nonzero, `f(x) + g(x)` and `f(x) - g(x)` cannot
//! both have modulus `|f(x)| + |g(x)|`, and every other point contributes at
//! most its share by the triangle inequality. The full `{1, i, -1, -i}²` grid
//! is still evaluated and reported.

use std::fmt;

use num::{One, Signed, Zero};

use crate::exact::{norm_sqr, q, unit_probes, GaussQ, Surd, Q};
use crate::fintop::{FiniteSpace, PointSet};
use crate::funcrel::{BlackBoxMap, DiscreteBackend, DiscreteFamily, FamilyError, FunctionFamily, Relation};
use crate::ideals::recover_homeo;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ClassifyError {
    #[error("family is not closed under min/max: members {0}, {1}")]
    NotSublattice(usize, usize),
    #[error("map does not preserve min/max on members {0}, {1}")]
    NotLatticeIso(usize, usize),
    #[error("map is not a bijection between the families")]
    NotBijection,
    #[error("no point map is consistent with the equality sets")]
    NoConsistentPhi,
    #[error("family lacks the indicator of point {0}")]
    MissingIndicators(usize),
    #[error("formula fails for member {f} at point {y}")]
    FormulaMismatch { f: usize, y: usize },
    #[error("hypothesis failed: {0}")]
    HypothesisFailed(String),
    #[error("density must be positive at every point")]
    DensityNotPositive,
    #[error("value vectors have the wrong length")]
    LengthMismatch,
    #[error(transparent)]
    Family(#[from] FamilyError),
}

pub trait Chain: Clone + Ord + fmt::Debug {}
impl<T: Clone + Ord + fmt::Debug> Chain for T {}

fn pmin<V: Chain>(f: &[V], g: &[V]) -> Vec<V> {
    f.iter().zip(g).map(|(a, b)| a.min(b).clone()).collect()
}

fn pmax<V: Chain>(f: &[V], g: &[V]) -> Vec<V> {
    f.iter().zip(g).map(|(a, b)| a.max(b).clone()).collect()
}

fn geq<V: Chain>(f: &[V], g: &[V]) -> bool {
    f.iter().zip(g).all(|(a, b)| a >= b)
}

fn eq_set<V: PartialEq>(f: &[V], g: &[V]) -> PointSet {
    PointSet::from_points((0..f.len()).filter(|&i| f[i] == g[i]))
}

/// Distinct values in first-seen order.
pub fn values_of<V: Clone + PartialEq>(members: &[Vec<V>]) -> Vec<V> {
    let mut out: Vec<V> = Vec::new();
    for v in members.iter().flatten() {
        if !out.contains(v) {
            out.push(v.clone());
        }
    }
    out
}

/// A finite sublattice of functions from a discrete space into a chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainFamily<V> {
    n: usize,
    members: Vec<Vec<V>>,
}

impl<V: Chain> ChainFamily<V> {
    pub fn new(n: usize, members: Vec<Vec<V>>) -> Result<Self, ClassifyError> {
        if members.is_empty() || members.iter().any(|f| f.len() != n) {
            return Err(ClassifyError::LengthMismatch);
        }
        for (i, f) in members.iter().enumerate() {
            if let Some(j) = members[..i].iter().position(|g| g == f) {
                return Err(FamilyError::DuplicateMember(j, i).into());
            }
        }
        for i in 0..members.len() {
            for j in i + 1..members.len() {
                let (a, b) = (&members[i], &members[j]);
                if !members.contains(&pmin(a, b)) || !members.contains(&pmax(a, b)) {
                    return Err(ClassifyError::NotSublattice(i, j));
                }
            }
        }
        Ok(ChainFamily { n, members })
    }

    /// All functions into the given values.
    pub fn full(n: usize, values: &[V]) -> Result<Self, ClassifyError> {
        let members = crate::combinat::all_maps(n, values.len())
            .map(|c| c.into_iter().map(|i| values[i].clone()).collect())
            .collect();
        ChainFamily::new(n, members)
    }

    pub fn points(&self) -> usize {
        self.n
    }

    pub fn members(&self) -> &[Vec<V>] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn index_of(&self, f: &[V]) -> Option<usize> {
        self.members.iter().position(|g| g == f)
    }

    /// Indices of the members above `f0`.
    pub fn above_indices(&self, f0: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| geq(&self.members[i], &self.members[f0])).collect()
    }

    /// `A_{≥f0}` as a function family with base point `f0`.
    pub fn above(&self, f0: usize) -> Result<DiscreteFamily<V>, ClassifyError> {
        let members: Vec<Vec<V>> = self.above_indices(f0).into_iter().map(|i| self.members[i].clone()).collect();
        let backend = DiscreteBackend {
            space: FiniteSpace::discrete(self.n),
            codomain: values_of(&members),
            theta: self.members[f0].clone(),
        };
        Ok(FunctionFamily::new(backend, members)?)
    }

    /// Every member can be changed at a single point to any of `values`.
    /// Returns the first `(f, x, value)` that cannot.
    pub fn l2_failure(&self, values: &[V]) -> Option<(usize, usize, V)> {
        for (i, f) in self.members.iter().enumerate() {
            for x in 0..self.n {
                for v in values {
                    let mut g = f.clone();
                    g[x] = v.clone();
                    if self.index_of(&g).is_none() {
                        return Some((i, x, v.clone()));
                    }
                }
            }
        }
        None
    }
}

/// A bijection between chain families, given by member indices.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainMap<V> {
    pub source: ChainFamily<V>,
    pub target: ChainFamily<V>,
    pub mapping: Vec<usize>,
}

impl<V: Chain> ChainMap<V> {
    pub fn new(source: ChainFamily<V>, target: ChainFamily<V>, mapping: Vec<usize>) -> Result<Self, ClassifyError> {
        let mut seen = vec![false; target.len()];
        if mapping.len() != source.len() || source.len() != target.len() {
            return Err(ClassifyError::NotBijection);
        }
        for &m in &mapping {
            if m >= seen.len() || std::mem::replace(&mut seen[m], true) {
                return Err(ClassifyError::NotBijection);
            }
        }
        Ok(ChainMap { source, target, mapping })
    }

    /// Builds the target family as the image of `t`.
    pub fn from_fn(source: ChainFamily<V>, ny: usize, t: impl Fn(&[V]) -> Vec<V>) -> Result<Self, ClassifyError> {
        let images: Vec<Vec<V>> = source.members().iter().map(|f| t(f)).collect();
        let target = ChainFamily::new(ny, images)?;
        let mapping = (0..source.len()).collect();
        ChainMap::new(source, target, mapping)
    }

    fn image(&self, f: usize) -> &[V] {
        &self.target.members[self.mapping[f]]
    }

    pub fn check_lattice_iso(&self) -> Result<(), ClassifyError> {
        let a = &self.source.members;
        for f in 0..a.len() {
            for g in f..a.len() {
                let ok = |m: Vec<V>, tm: Vec<V>| self.source.index_of(&m).map(|i| self.image(i) == tm.as_slice()).unwrap_or(false);
                let (tf, tg) = (self.image(f), self.image(g));
                if !ok(pmin(&a[f], &a[g]), pmin(tf, tg)) || !ok(pmax(&a[f], &a[g]), pmax(tf, tg)) {
                    return Err(ClassifyError::NotLatticeIso(f, g));
                }
            }
        }
        Ok(())
    }

    /// `T` restricted to `A_{≥f0} -> B_{≥Tf0}`.
    pub fn restrict(&self, f0: usize) -> Result<BlackBoxMap<DiscreteBackend<V>, DiscreteBackend<V>>, ClassifyError> {
        let src = self.source.above(f0)?;
        let tgt = self.target.above(self.mapping[f0])?;
        let images: Vec<Vec<V>> = self.source.above_indices(f0).into_iter().map(|i| self.image(i).to_vec()).collect();
        BlackBoxMap::from_images(src, tgt, &images).map_err(|_| ClassifyError::NotBijection)
    }
}

/// `(K)` for `f, g` in a family with base point `f0`: some upper bound of
/// `{h : h ⊆ f}` is `⊆ g`. Since any bounded `H` with `h ⊆ f` lies in this set,
/// checking the largest such `H` decides the condition for all of them.
pub fn condition_k<V: Chain>(fam: &DiscreteFamily<V>, f: usize, g: usize) -> bool {
    let below: Vec<usize> = (0..fam.len()).filter(|&h| fam.rel(Relation::Subset, h, f)).collect();
    (0..fam.len()).any(|k| below.iter().all(|&h| geq(fam.member(k), fam.member(h))) && fam.rel(Relation::Subset, k, g))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KaplanskyRestriction {
    /// Source indices of `A_{≥f0}`.
    pub members: Vec<usize>,
    pub weakly_regular: bool,
    /// `f ⊥ g ⟺ f ∧ g = f0` on every pair.
    pub perp_is_meet: bool,
    /// `(K) ⟺ f ⋐ g` on every pair.
    pub condition_k_agrees: bool,
    pub perp_perp_iso: bool,
}

pub fn kaplansky_restrict<V: Chain>(t: &ChainMap<V>, f0: usize) -> Result<KaplanskyRestriction, ClassifyError> {
    t.check_lattice_iso()?;
    if f0 >= t.source.len() {
        return Err(FamilyError::NotInFamily(f0).into());
    }
    let r = t.restrict(f0)?;
    let fam = &r.source;
    let theta = fam.member(fam.theta_index()).clone();
    let n = fam.len();
    let mut perp_is_meet = true;
    let mut k_agrees = true;
    for f in 0..n {
        for g in 0..n {
            let meet = pmin(fam.member(f), fam.member(g));
            perp_is_meet &= fam.rel(Relation::Perp, f, g) == (meet == theta);
            k_agrees &= condition_k(fam, f, g) == fam.rel(Relation::StrongSubset, f, g);
        }
    }
    Ok(KaplanskyRestriction {
        members: t.source.above_indices(f0),
        weakly_regular: fam.is_weakly_regular().holds && r.target.is_weakly_regular().holds,
        perp_is_meet,
        condition_k_agrees: k_agrees,
        perp_perp_iso: r.preserves(Relation::PerpPerp),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KaplanskyPhi {
    /// `φ: Y -> X`.
    pub phi: Vec<usize>,
    /// Base points `f0` whose restrictions were weakly regular and produced `φ`.
    pub bases: Vec<usize>,
}

/// The point map with `[Tf = Tg] = φ⁻¹([f = g])`, computed from every weakly
/// regular restriction `A_{≥f0}` and checked to be independent of `f0`.
pub fn kaplansky_recover_phi<V: Chain>(t: &ChainMap<V>) -> Result<KaplanskyPhi, ClassifyError> {
    t.check_lattice_iso()?;
    let mut phi: Option<Vec<usize>> = None;
    let mut bases = Vec::new();
    for f0 in 0..t.source.len() {
        let r = t.restrict(f0)?;
        if !r.source.is_weakly_regular().holds || !r.target.is_weakly_regular().holds {
            continue;
        }
        let found = recover_homeo(&r).map_err(|_| ClassifyError::NoConsistentPhi)?.phi;
        match &phi {
            Some(p) if *p != found => return Err(ClassifyError::NoConsistentPhi),
            _ => phi = Some(found),
        }
        bases.push(f0);
    }
    let phi = phi.ok_or(ClassifyError::NoConsistentPhi)?;
    let a = t.source.members();
    for f in 0..a.len() {
        for g in f + 1..a.len() {
            let pulled = PointSet::from_points((0..phi.len()).filter(|&y| eq_set(&a[f], &a[g]).contains(phi[y])));
            if eq_set(t.image(f), t.image(g)) != pulled {
                return Err(ClassifyError::NoConsistentPhi);
            }
        }
    }
    Ok(KaplanskyPhi { phi, bases })
}

fn indicator<S: Zero + One + Clone>(n: usize, x: usize) -> Vec<S> {
    (0..n).map(|i| if i == x { S::one() } else { S::zero() }).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdditiveDecomposition {
    pub phi: Vec<usize>,
    pub p: Vec<Q>,
}

/// `Tf(y) = p(y) f(φ(y))` with `p > 0` for an additive lattice isomorphism of
/// rational-valued families containing all point indicators.
pub fn additive_decompose(t: &ChainMap<Q>) -> Result<AdditiveDecomposition, ClassifyError> {
    let a = t.source.members();
    for f in 0..a.len() {
        for g in f..a.len() {
            let sum: Vec<Q> = a[f].iter().zip(&a[g]).map(|(u, v)| u + v).collect();
            if let Some(h) = t.source.index_of(&sum) {
                let tsum: Vec<Q> = t.image(f).iter().zip(t.image(g)).map(|(u, v)| u + v).collect();
                if t.image(h) != tsum.as_slice() {
                    return Err(ClassifyError::HypothesisFailed(format!("additivity on members {f}, {g}")));
                }
            }
        }
    }
    let phi = kaplansky_recover_phi(t)?.phi;
    let nx = t.source.points();
    let delta: Vec<usize> = (0..nx)
        .map(|x| t.source.index_of(&indicator::<Q>(nx, x)).ok_or(ClassifyError::MissingIndicators(x)))
        .collect::<Result<_, _>>()?;
    let p: Vec<Q> = phi.iter().enumerate().map(|(y, &x)| t.image(delta[x])[y].clone()).collect();
    for f in 0..a.len() {
        for (y, &x) in phi.iter().enumerate() {
            if t.image(f)[y] != &p[y] * &a[f][x] {
                return Err(ClassifyError::FormulaMismatch { f, y });
            }
        }
    }
    if let Some(y) = p.iter().position(|w| !w.is_positive()) {
        return Err(ClassifyError::FormulaMismatch { f: delta[phi[y]], y });
    }
    Ok(AdditiveDecomposition { phi, p })
}

pub type ScalarMap = BlackBoxMap<DiscreteBackend<GaussQ>, DiscreteBackend<GaussQ>>;

/// A Gaussian-valued family on a discrete space with base point zero.
pub fn scalar_family(n: usize, members: Vec<Vec<GaussQ>>) -> Result<DiscreteFamily<GaussQ>, ClassifyError> {
    if members.iter().any(|f| f.len() != n) {
        return Err(ClassifyError::LengthMismatch);
    }
    let backend = DiscreteBackend {
        space: FiniteSpace::discrete(n),
        codomain: values_of(&members),
        theta: vec![GaussQ::zero(); n],
    };
    Ok(FunctionFamily::new(backend, members)?)
}

/// All functions on `n` points with values in `values`.
pub fn scalar_grid(n: usize, values: &[GaussQ]) -> Result<DiscreteFamily<GaussQ>, ClassifyError> {
    let members = crate::combinat::all_maps(n, values.len())
        .map(|c| c.into_iter().map(|i| values[i].clone()).collect())
        .collect();
    scalar_family(n, members)
}

/// The linear map `Tf = Σ_x f(x) columns[x]`, with target family its image.
pub fn linear_map(source: &DiscreteFamily<GaussQ>, ny: usize, columns: &[Vec<GaussQ>]) -> Result<ScalarMap, ClassifyError> {
    let nx = source.space().len();
    if columns.len() != nx || columns.iter().any(|c| c.len() != ny) {
        return Err(ClassifyError::LengthMismatch);
    }
    let images: Vec<Vec<GaussQ>> = source
        .members()
        .iter()
        .map(|f| {
            (0..ny)
                .map(|y| (0..nx).fold(GaussQ::zero(), |acc, x| acc + &f[x] * &columns[x][y]))
                .collect()
        })
        .collect();
    let target = scalar_family(ny, images.clone())?;
    BlackBoxMap::from_images(source.clone(), target, &images).map_err(|_| ClassifyError::NotBijection)
}

/// `Tf(y) = p(y) f(φ(y))`.
pub fn weighted_map(source: &DiscreteFamily<GaussQ>, phi: &[usize], p: &[GaussQ]) -> Result<ScalarMap, ClassifyError> {
    let nx = source.space().len();
    if phi.len() != p.len() || phi.iter().any(|&x| x >= nx) {
        return Err(ClassifyError::LengthMismatch);
    }
    let columns: Vec<Vec<GaussQ>> = (0..nx)
        .map(|x| (0..phi.len()).map(|y| if phi[y] == x { p[y].clone() } else { GaussQ::zero() }).collect())
        .collect();
    linear_map(source, phi.len(), &columns)
}

/// Point masses of a measure on a finite discrete space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointDensity(pub Vec<Q>);

impl PointDensity {
    pub fn uniform(n: usize) -> Self {
        PointDensity(vec![Q::one(); n])
    }

    pub fn validate(&self, n: usize) -> Result<(), ClassifyError> {
        if self.0.len() != n {
            return Err(ClassifyError::LengthMismatch);
        }
        if self.0.iter().any(|w| !w.is_positive()) {
            return Err(ClassifyError::DensityNotPositive);
        }
        Ok(())
    }

    pub fn l1(&self, f: &[GaussQ]) -> Surd {
        f.iter().zip(&self.0).map(|(v, w)| Surd::modulus(v).scale(w)).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WeightedMode {
    /// Linear bijection preserving non-vanishing functions.
    LiWong,
    /// Linear `⊥`-isomorphism, decomposed per support block.
    Jarosz,
    /// Linear sup-norm isometry.
    BanachStone,
    /// Linear L¹ isometry for the given source and target densities.
    L1 { source: PointDensity, target: PointDensity },
}

impl WeightedMode {
    pub fn name(&self) -> &'static str {
        match self {
            WeightedMode::LiWong => "liwong",
            WeightedMode::Jarosz => "jarosz",
            WeightedMode::BanachStone => "banachstone",
            WeightedMode::L1 { .. } => "l1",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedDecomposition {
    pub phi: Vec<usize>,
    pub p: Vec<GaussQ>,
    /// `dμ_X/d(φ_*μ_Y)` at `φ(y)`, L¹ mode only.
    pub density_ratio: Option<Vec<Q>>,
    /// `p(y)` divided by the density ratio, L¹ mode only.
    pub unit: Option<Vec<GaussQ>>,
}

/// Linearity on combinations `f + λg` (`λ ∈ {1, i, -1, -i}`) and multiples
/// `λf` that stay inside the family.
pub fn linearity_violation(t: &ScalarMap) -> Option<(usize, usize)> {
    let a = t.source.members();
    let b = t.target.members();
    for f in 0..a.len() {
        let tf = &b[t.apply(f)];
        for lam in unit_probes() {
            let scaled: Vec<GaussQ> = a[f].iter().map(|v| v * &lam).collect();
            if let Some(h) = t.source.index_of(&scaled) {
                if b[t.apply(h)].iter().zip(tf).any(|(u, v)| *u != v * &lam) {
                    return Some((f, f));
                }
            }
            for g in f..a.len() {
                let comb: Vec<GaussQ> = a[f].iter().zip(&a[g]).map(|(u, v)| u + v * &lam).collect();
                if let Some(h) = t.source.index_of(&comb) {
                    let tg = &b[t.apply(g)];
                    if b[t.apply(h)].iter().zip(tf.iter().zip(tg)).any(|(w, (u, v))| *w != u + v * &lam) {
                        return Some((f, g));
                    }
                }
            }
        }
    }
    None
}

fn sup_sqr(f: &[GaussQ]) -> Q {
    f.iter().map(norm_sqr).max().unwrap_or_else(Q::zero)
}

fn check_hypothesis(t: &ScalarMap, mode: &WeightedMode) -> Result<(), ClassifyError> {
    let fail = |s: String| Err(ClassifyError::HypothesisFailed(s));
    if let Some((f, g)) = linearity_violation(t) {
        return fail(format!("linearity on members {f}, {g}"));
    }
    let (a, b) = (t.source.members(), t.target.members());
    match mode {
        WeightedMode::LiWong => {
            for f in 0..a.len() {
                let zx = a[f].iter().any(|v| v.is_zero());
                let zy = b[t.apply(f)].iter().any(|v| v.is_zero());
                if zx != zy {
                    return fail(format!("non-vanishing preservation at member {f}"));
                }
            }
        }
        WeightedMode::Jarosz => {
            if let Some((f, g)) = t.relation_violation(Relation::Perp) {
                return fail(format!("⊥ preservation on members {f}, {g}"));
            }
        }
        WeightedMode::BanachStone => {
            for f in 0..a.len() {
                if sup_sqr(&a[f]) != sup_sqr(&b[t.apply(f)]) {
                    return fail(format!("sup-isometry at member {f}"));
                }
            }
        }
        WeightedMode::L1 { source, target } => {
            source.validate(t.source.space().len())?;
            target.validate(t.target.space().len())?;
            for f in 0..a.len() {
                if source.l1(&a[f]) != target.l1(&b[t.apply(f)]) {
                    return fail(format!("L¹ isometry at member {f}"));
                }
            }
        }
    }
    Ok(())
}

/// Indicator members `δ_x`, indexed by point.
fn indicators(fam: &DiscreteFamily<GaussQ>) -> Result<Vec<usize>, ClassifyError> {
    let n = fam.space().len();
    (0..n)
        .map(|x| fam.index_of(&indicator::<GaussQ>(n, x)).ok_or(ClassifyError::MissingIndicators(x)))
        .collect()
}

/// Decomposes restricted to the block `supp(Tb) -> supp(b)`: `φ^b(y)` is the
/// unique `x ∈ supp(b)` with `T δ_x (y) != 0`.
fn block_decomposition(t: &ScalarMap, delta: &[usize], b: usize) -> Option<Vec<(usize, usize, GaussQ)>> {
    let sb = t.source.support(b);
    let stb = t.target.support(t.apply(b));
    let tgt = t.target.members();
    let mut out = Vec::new();
    for y in stb.points() {
        let hits: Vec<usize> = sb.points().filter(|&x| !tgt[t.apply(delta[x])][y].is_zero()).collect();
        if hits.len() != 1 {
            return None;
        }
        out.push((y, hits[0], tgt[t.apply(delta[hits[0]])][y].clone()));
    }
    Some(out)
}

/// Recovers `(φ, p)` with `Tf(y) = p(y) f(φ(y))` after verifying the mode's
/// hypothesis, then checks the mode's conclusion on `p`.
pub fn weighted_decompose(t: &ScalarMap, mode: &WeightedMode) -> Result<WeightedDecomposition, ClassifyError> {
    check_hypothesis(t, mode)?;
    let delta = indicators(&t.source)?;
    let phi = recover_homeo(t)
        .map_err(|e| ClassifyError::HypothesisFailed(format!("⊥⊥-isomorphism: {e}")))?
        .phi;
    let tgt = t.target.members();
    let p: Vec<GaussQ> = phi.iter().enumerate().map(|(y, &x)| tgt[t.apply(delta[x])][y].clone()).collect();
    let a = t.source.members();
    for f in 0..a.len() {
        for (y, &x) in phi.iter().enumerate() {
            if tgt[t.apply(f)][y] != &p[y] * &a[f][x] {
                return Err(ClassifyError::FormulaMismatch { f, y });
            }
        }
    }
    if p.iter().any(|w| w.is_zero()) {
        let y = p.iter().position(|w| w.is_zero()).expect("zero weight");
        return Err(ClassifyError::FormulaMismatch { f: delta[phi[y]], y });
    }
    let mut out = WeightedDecomposition {
        phi,
        p,
        density_ratio: None,
        unit: None,
    };
    match mode {
        WeightedMode::Jarosz => {
            for b in 0..a.len() {
                let block = block_decomposition(t, &delta, b).ok_or(ClassifyError::FormulaMismatch { f: b, y: 0 })?;
                if let Some(&(y, _, _)) = block.iter().find(|(y, x, w)| out.phi[*y] != *x || out.p[*y] != *w) {
                    return Err(ClassifyError::FormulaMismatch { f: b, y });
                }
            }
        }
        WeightedMode::BanachStone => {
            if let Some(y) = out.p.iter().position(|w| !norm_sqr(w).is_one()) {
                return Err(ClassifyError::FormulaMismatch { f: delta[out.phi[y]], y });
            }
        }
        WeightedMode::L1 { source, target } => {
            let ratio: Vec<Q> = out.phi.iter().enumerate().map(|(y, &x)| &source.0[x] / &target.0[y]).collect();
            let unit: Vec<GaussQ> = out.p.iter().zip(&ratio).map(|(w, r)| w / GaussQ::new(r.clone(), q(0))).collect();
            if let Some(y) = unit.iter().position(|u| !norm_sqr(u).is_one()) {
                return Err(ClassifyError::FormulaMismatch { f: delta[out.phi[y]], y });
            }
            out.density_ratio = Some(ratio);
            out.unit = Some(unit);
        }
        WeightedMode::LiWong => {}
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct L1Disjointness {
    pub disjoint: bool,
    /// `‖Af + Bg‖₁ = |A|‖f‖₁ + |B|‖g‖₁` for every probe pair.
    pub identity_holds: bool,
    pub violating_probe: Option<(GaussQ, GaussQ)>,
}

pub fn l1_disjointness(f: &[GaussQ], g: &[GaussQ], density: &PointDensity) -> Result<L1Disjointness, ClassifyError> {
    if f.len() != g.len() {
        return Err(ClassifyError::LengthMismatch);
    }
    density.validate(f.len())?;
    let disjoint = f.iter().zip(g).all(|(u, v)| u.is_zero() || v.is_zero());
    let (nf, ng) = (density.l1(f), density.l1(g));
    let mut violating = None;
    // unit probes have modulus one, so the right side is ‖f‖₁ + ‖g‖₁
    let rhs = &nf + &ng;
    'outer: for a in unit_probes() {
        for b in unit_probes() {
            let comb: Vec<GaussQ> = f.iter().zip(g).map(|(u, v)| u * &a + v * &b).collect();
            if density.l1(&comb) != rhs {
                violating = Some((a, b));
                break 'outer;
            }
        }
    }
    Ok(L1Disjointness {
        disjoint,
        identity_holds: violating.is_none(),
        violating_probe: violating,
    })
}
