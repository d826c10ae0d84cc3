//! Haar systems and unit measures on finite groupoids, weighted convolution,
//! the `L¹` and `(I,r)` norms, and exact verification of decompositions
//! `Tf(h) = p(h) D(φ(h)) f(φ(h))` of isometric algebra isomorphisms.
//!
//! At finite scale a Haar system is a positive weight `λ^{r(a)}({a})` per
//! arrow, Radon–Nikodym derivatives are weight ratios, and "almost every"
//! becomes "every". Composability is read off the product table.

use std::collections::BTreeMap;

use num::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::exact::{fmt_gauss, fmt_q, norm_sqr, parse_gauss, parse_q, GaussQ, Surd, Q};
use crate::steinberg::FiniteGroupoid;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HaarError {
    #[error("left invariance fails on the composable pair ({0}, {1})")]
    InvarianceViolation(String, String),
    #[error("weight at {0} is not positive")]
    NotFullySupported(String),
    #[error("weight for {arrow} is given in the fiber of {unit}, not of its range")]
    SupportViolation { unit: String, arrow: String },
    #[error("no weight for {0}")]
    MissingWeight(String),
    #[error("modulus of {0} is not rational")]
    ModulusNotRational(String),
    #[error("element or table has the wrong length")]
    BadLength,
    #[error("unknown arrow {0:?}")]
    UnknownArrow(String),
    #[error("cannot parse {0:?}")]
    Parse(String),
    #[error("probe lattice of {0} elements is too large")]
    LatticeTooLarge(u128),
}

type Res<T> = Result<T, HaarError>;

pub type GaussElement = Vec<GaussQ>;

fn czero() -> GaussQ {
    GaussQ::new(Q::zero(), Q::zero())
}

fn cone() -> GaussQ {
    GaussQ::new(Q::one(), Q::zero())
}

fn real(x: &Q) -> GaussQ {
    GaussQ::new(x.clone(), Q::zero())
}

/// `weights[a] = λ^{r(a)}({a})`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HaarSystem {
    weights: Vec<Q>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HaarEntry {
    pub unit: String,
    pub arrow: String,
    pub weight: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HaarJson {
    pub weights: Vec<HaarEntry>,
}

impl HaarSystem {
    /// Checks positivity and `λ^{r(a)}({ab}) = λ^{s(a)}({b})` on every composable pair.
    pub fn validate_haar(g: &FiniteGroupoid, weights: Vec<Q>) -> Res<Self> {
        if weights.len() != g.len() {
            return Err(HaarError::BadLength);
        }
        if let Some(a) = (0..g.len()).find(|&a| !weights[a].is_positive()) {
            return Err(HaarError::NotFullySupported(g.names()[a].clone()));
        }
        for a in 0..g.len() {
            for b in 0..g.len() {
                if let Some(ab) = g.product(a, b) {
                    if weights[ab] != weights[b] {
                        return Err(HaarError::InvarianceViolation(g.names()[a].clone(), g.names()[b].clone()));
                    }
                }
            }
        }
        Ok(HaarSystem { weights })
    }

    pub fn counting(g: &FiniteGroupoid) -> Self {
        HaarSystem {
            weights: vec![Q::one(); g.len()],
        }
    }

    /// `λ(a) = w(s(a))`; every Haar system on a finite groupoid has this form.
    pub fn from_source_weights(g: &FiniteGroupoid, w: impl Fn(usize) -> Q) -> Res<Self> {
        HaarSystem::validate_haar(g, (0..g.len()).map(|a| w(g.source(a))).collect())
    }

    pub fn weight(&self, a: usize) -> &Q {
        &self.weights[a]
    }

    pub fn weights(&self) -> &[Q] {
        &self.weights
    }

    pub fn scaled(&self, c: &Q) -> Self {
        HaarSystem {
            weights: self.weights.iter().map(|w| w * c).collect(),
        }
    }

    pub fn to_json(&self, g: &FiniteGroupoid) -> HaarJson {
        HaarJson {
            weights: (0..g.len())
                .map(|a| HaarEntry {
                    unit: g.names()[g.range(a)].clone(),
                    arrow: g.names()[a].clone(),
                    weight: fmt_q(&self.weights[a]),
                })
                .collect(),
        }
    }

    pub fn from_json(g: &FiniteGroupoid, j: &HaarJson) -> Res<Self> {
        let mut weights: Vec<Option<Q>> = vec![None; g.len()];
        for e in &j.weights {
            let a = index(g, &e.arrow)?;
            let x = index(g, &e.unit)?;
            if g.range(a) != x {
                return Err(HaarError::SupportViolation {
                    unit: e.unit.clone(),
                    arrow: e.arrow.clone(),
                });
            }
            weights[a] = Some(parse_q(&e.weight).map_err(|_| HaarError::Parse(e.weight.clone()))?);
        }
        let weights = weights
            .into_iter()
            .enumerate()
            .map(|(a, w)| w.ok_or_else(|| HaarError::MissingWeight(g.names()[a].clone())))
            .collect::<Res<Vec<_>>>()?;
        HaarSystem::validate_haar(g, weights)
    }
}

fn index(g: &FiniteGroupoid, name: &str) -> Res<usize> {
    g.index_of(name).map_err(|_| HaarError::UnknownArrow(name.to_string()))
}

/// Positive masses on the units, in the order of `g.units()`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitMeasure {
    mass: BTreeMap<usize, Q>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasureJson {
    pub mass: BTreeMap<String, String>,
}

impl UnitMeasure {
    pub fn new(g: &FiniteGroupoid, mass: impl Fn(usize) -> Q) -> Res<Self> {
        let mass: BTreeMap<usize, Q> = g.units().iter().map(|&x| (x, mass(x))).collect();
        if let Some((&x, _)) = mass.iter().find(|(_, m)| !m.is_positive()) {
            return Err(HaarError::NotFullySupported(g.names()[x].clone()));
        }
        Ok(UnitMeasure { mass })
    }

    pub fn uniform(g: &FiniteGroupoid) -> Self {
        UnitMeasure::new(g, |_| Q::one()).expect("positive")
    }

    pub fn at(&self, x: usize) -> &Q {
        &self.mass[&x]
    }

    pub fn to_json(&self, g: &FiniteGroupoid) -> MeasureJson {
        MeasureJson {
            mass: self.mass.iter().map(|(&x, m)| (g.names()[x].clone(), fmt_q(m))).collect(),
        }
    }

    pub fn from_json(g: &FiniteGroupoid, j: &MeasureJson) -> Res<Self> {
        let mut parsed = BTreeMap::new();
        for (name, m) in &j.mass {
            parsed.insert(index(g, name)?, parse_q(m).map_err(|_| HaarError::Parse(m.clone()))?);
        }
        if let Some(&x) = g.units().iter().find(|x| !parsed.contains_key(x)) {
            return Err(HaarError::MissingWeight(g.names()[x].clone()));
        }
        UnitMeasure::new(g, |x| parsed[&x].clone())
    }
}

/// `(fg)(a) = Σ_{s ∈ G^{r(a)}} f(s) g(s⁻¹a) λ^{r(a)}({s})`.
pub fn weighted_convolve(g: &FiniteGroupoid, lambda: &HaarSystem, f: &[GaussQ], h: &[GaussQ]) -> GaussElement {
    let mut out = vec![czero(); g.len()];
    for a in 0..g.len() {
        for s in 0..g.len() {
            if g.range(s) != g.range(a) || f[s].is_zero() {
                continue;
            }
            let t = g.product(g.inverse(s), a).expect("same range");
            if !h[t].is_zero() {
                out[a] = &out[a] + &f[s] * &h[t] * real(lambda.weight(s));
            }
        }
    }
    out
}

fn support(f: &[GaussQ]) -> Vec<usize> {
    (0..f.len()).filter(|&a| !f[a].is_zero()).collect()
}

/// `supp(f)·supp(g)` as a set of arrows.
pub fn support_product(g: &FiniteGroupoid, f: &[GaussQ], h: &[GaussQ]) -> Vec<bool> {
    let mut out = vec![false; g.len()];
    for a in support(f) {
        for b in support(h) {
            if let Some(c) = g.product(a, b) {
                out[c] = true;
            }
        }
    }
    out
}

/// `Σ_x μ(x) Σ_{a ∈ G^x} |f(a)| λ^x({a})`, exact.
pub fn l1_norm_exact(g: &FiniteGroupoid, lambda: &HaarSystem, mu: &UnitMeasure, f: &[GaussQ]) -> Surd {
    (0..g.len())
        .map(|a| Surd::modulus(&f[a]).scale(&(lambda.weight(a) * mu.at(g.range(a)))))
        .sum()
}

/// Fiber integrals `Σ_{a ∈ G^x} |f(a)| λ^x({a})` per unit.
pub fn fiber_norms(g: &FiniteGroupoid, lambda: &HaarSystem, f: &[GaussQ]) -> BTreeMap<usize, Surd> {
    let mut out: BTreeMap<usize, Surd> = g.units().iter().map(|&x| (x, Surd::zero())).collect();
    for a in 0..g.len() {
        let term = Surd::modulus(&f[a]).scale(lambda.weight(a));
        let e = out.get_mut(&g.range(a)).expect("unit");
        *e = &*e + &term;
    }
    out
}

pub fn ir_norm_exact(g: &FiniteGroupoid, lambda: &HaarSystem, f: &[GaussQ]) -> Surd {
    fiber_norms(g, lambda, f).into_values().max().unwrap_or_else(Surd::zero)
}

fn rational_or_err(f: &[GaussQ], s: Surd) -> Res<Q> {
    s.to_rational().ok_or_else(|| {
        let bad = f
            .iter()
            .find(|z| crate::exact::rational_modulus(z).is_none())
            .map(fmt_gauss)
            .unwrap_or_default();
        HaarError::ModulusNotRational(bad)
    })
}

pub fn l1_norm(g: &FiniteGroupoid, lambda: &HaarSystem, mu: &UnitMeasure, f: &[GaussQ]) -> Res<Q> {
    if f.len() != g.len() {
        return Err(HaarError::BadLength);
    }
    rational_or_err(f, l1_norm_exact(g, lambda, mu, f))
}

pub fn ir_norm(g: &FiniteGroupoid, lambda: &HaarSystem, f: &[GaussQ]) -> Res<Q> {
    if f.len() != g.len() {
        return Err(HaarError::BadLength);
    }
    rational_or_err(f, ir_norm_exact(g, lambda, f))
}

/// `T: C_c(G) -> C_c(H)` by `images[a] = T(1_a)`, extended linearly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaussMap {
    pub images: Vec<GaussElement>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GaussMapJson {
    pub images: BTreeMap<String, BTreeMap<String, String>>,
}

impl GaussMap {
    pub fn apply(&self, f: &[GaussQ]) -> GaussElement {
        let n = self.images.first().map_or(0, |i| i.len());
        let mut out = vec![czero(); n];
        for (a, img) in self.images.iter().enumerate() {
            if f[a].is_zero() {
                continue;
            }
            for (h, v) in img.iter().enumerate() {
                if !v.is_zero() {
                    out[h] = &out[h] + &f[a] * v;
                }
            }
        }
        out
    }

    pub fn to_json(&self, g: &FiniteGroupoid, h: &FiniteGroupoid) -> GaussMapJson {
        let images = self
            .images
            .iter()
            .enumerate()
            .map(|(a, img)| {
                (
                    g.names()[a].clone(),
                    support(img).into_iter().map(|b| (h.names()[b].clone(), fmt_gauss(&img[b]))).collect(),
                )
            })
            .collect();
        GaussMapJson { images }
    }

    pub fn from_json(g: &FiniteGroupoid, h: &FiniteGroupoid, j: &GaussMapJson) -> Res<Self> {
        let mut images = vec![vec![czero(); h.len()]; g.len()];
        for (a, entries) in &j.images {
            let a = index(g, a)?;
            for (b, v) in entries {
                images[a][index(h, b)?] = parse_gauss(v).map_err(|_| HaarError::Parse(v.clone()))?;
            }
        }
        Ok(GaussMap { images })
    }
}

fn basis(n: usize, a: usize) -> GaussElement {
    let mut f = vec![czero(); n];
    f[a] = cone();
    f
}

/// Determinant over `Q(i)` by elimination.
fn gauss_det(mut m: Vec<Vec<GaussQ>>) -> GaussQ {
    let n = m.len();
    let mut det = cone();
    for k in 0..n {
        let Some(p) = (k..n).find(|&i| !m[i][k].is_zero()) else { return czero() };
        if p != k {
            m.swap(p, k);
            det = -det;
        }
        det = &det * &m[k][k];
        for i in k + 1..n {
            let factor = &m[i][k] / &m[k][k];
            for j in k..n {
                let sub = &factor * &m[k][j];
                m[i][j] = &m[i][j] - sub;
            }
        }
    }
    det
}

/// The recovered or declared data `(φ, p, D)`: `phi[h] ∈ G`, `p[h]` per arrow
/// of `H`, `d[a]` per arrow of `G`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HaarData {
    pub phi: Vec<usize>,
    pub p: Vec<GaussQ>,
    pub d: Vec<Q>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub witness: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HaarReport {
    pub checks: Vec<Check>,
    pub data: Option<HaarData>,
}

impl HaarReport {
    pub fn verified(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    fn push(&mut self, name: &'static str, witness: Option<String>) -> bool {
        let passed = witness.is_none();
        self.checks.push(Check { name, passed, witness });
        passed
    }
}

/// One side of a decomposition problem.
#[derive(Debug, Clone)]
pub struct MeasuredGroupoid<'a> {
    pub groupoid: &'a FiniteGroupoid,
    pub lambda: &'a HaarSystem,
    pub mu: Option<&'a UnitMeasure>,
}

/// `Tf(h) = p(h) D(φ(h)) f(φ(h))` with `D(a) = λ_G(a) / λ_H(φ⁻¹(a))`.
pub fn radon_nikodym(src: &MeasuredGroupoid, tgt: &MeasuredGroupoid, phi: &[usize]) -> Vec<Q> {
    let mut d = vec![Q::zero(); src.groupoid.len()];
    for (h, &a) in phi.iter().enumerate() {
        d[a] = src.lambda.weight(a) / tgt.lambda.weight(h);
    }
    d
}

pub fn build_haar_map(src: &MeasuredGroupoid, tgt: &MeasuredGroupoid, data: &HaarData) -> Res<GaussMap> {
    let (g, h) = (src.groupoid, tgt.groupoid);
    if data.phi.len() != h.len() || data.p.len() != h.len() || data.d.len() != g.len() || data.phi.iter().any(|&a| a >= g.len()) {
        return Err(HaarError::BadLength);
    }
    let mut images = vec![vec![czero(); h.len()]; g.len()];
    for (b, &a) in data.phi.iter().enumerate() {
        images[a][b] = &data.p[b] * real(&data.d[a]);
    }
    Ok(GaussMap { images })
}

fn name(g: &FiniteGroupoid, a: usize) -> String {
    g.names()[a].clone()
}

fn check_algebra_iso(t: &GaussMap, src: &MeasuredGroupoid, tgt: &MeasuredGroupoid) -> Option<String> {
    let (g, h) = (src.groupoid, tgt.groupoid);
    if g.len() != h.len() {
        return Some("dimensions differ".into());
    }
    for a in 0..g.len() {
        for b in 0..g.len() {
            let lhs = t.apply(&weighted_convolve(g, src.lambda, &basis(g.len(), a), &basis(g.len(), b)));
            let rhs = weighted_convolve(h, tgt.lambda, &t.images[a], &t.images[b]);
            if lhs != rhs {
                return Some(format!("T(1_{0} 1_{1}) != T(1_{0}) T(1_{1})", name(g, a), name(g, b)));
            }
        }
    }
    if gauss_det(t.images.clone()).is_zero() {
        return Some("T is not bijective".into());
    }
    None
}

/// Exact `ℓ¹` isometry for a weighted norm, from basis and pairwise `±1`
/// probes: equality on `1_a ± 1_b` forces `T(1_a)` and `T(1_b)` to be
/// aligned and anti-aligned wherever both are nonzero, so the images have
/// disjoint supports and the norm is additive.
fn l1_probe_violation(
    t: &GaussMap,
    domain: &[usize],
    src_norm: &dyn Fn(&[GaussQ]) -> Surd,
    tgt_norm: &dyn Fn(&[GaussQ]) -> Surd,
    g: &FiniteGroupoid,
) -> Option<String> {
    let n = g.len();
    for &a in domain {
        let f = basis(n, a);
        if src_norm(&f) != tgt_norm(&t.apply(&f)) {
            return Some(format!("‖T(1_{})‖ differs", name(g, a)));
        }
    }
    for (i, &a) in domain.iter().enumerate() {
        for &b in &domain[i + 1..] {
            for sign in [cone(), -cone()] {
                let mut f = basis(n, a);
                f[b] = sign.clone();
                if src_norm(&f) != tgt_norm(&t.apply(&f)) {
                    return Some(format!(
                        "‖T(1_{} {} 1_{})‖ differs",
                        name(g, a),
                        if sign == cone() { "+" } else { "-" },
                        name(g, b)
                    ));
                }
            }
        }
    }
    None
}

/// Reads `φ` and `P` off a map whose basis images are single-arrow supported.
fn recover_point_map(t: &GaussMap, g: &FiniteGroupoid, h: &FiniteGroupoid) -> Result<(Vec<usize>, Vec<GaussQ>), String> {
    let mut phi = vec![usize::MAX; h.len()];
    let mut big_p = vec![czero(); h.len()];
    for a in 0..g.len() {
        let s = support(&t.images[a]);
        if s.len() != 1 {
            return Err(format!("T(1_{}) has {} support points", name(g, a), s.len()));
        }
        if phi[s[0]] != usize::MAX {
            return Err(format!("two basis images meet at {}", name(h, s[0])));
        }
        phi[s[0]] = a;
        big_p[s[0]] = t.images[a][s[0]].clone();
    }
    Ok((phi, big_p))
}

/// Checks shared by both verifiers, after `φ` and `P` are known.
fn conclusion_checks(
    report: &mut HaarReport,
    t: &GaussMap,
    src: &MeasuredGroupoid,
    tgt: &MeasuredGroupoid,
    phi: Vec<usize>,
    big_p: Vec<GaussQ>,
    declared: Option<&HaarData>,
) {
    let (g, h) = (src.groupoid, tgt.groupoid);
    let iso = h.is_isomorphism_to(g, &phi);
    let w = (!iso).then(|| "recovered point map does not preserve products".to_string());
    if !report.push("groupoid_isomorphism", w) {
        return;
    }
    let d = radon_nikodym(src, tgt, &phi);
    let p: Vec<GaussQ> = (0..h.len()).map(|b| &big_p[b] / real(&d[phi[b]])).collect();

    let mut w = None;
    'inv: for a in 0..g.len() {
        for b in 0..g.len() {
            if let Some(ab) = g.product(a, b) {
                if d[ab] != d[b] {
                    w = Some(format!("D({}) != D({})", name(g, ab), name(g, b)));
                    break 'inv;
                }
            }
        }
    }
    report.push("derivative_invariance", w);

    let mut w = (0..h.len())
        .find(|&b| norm_sqr(&p[b]) != Q::one())
        .map(|b| format!("|p({})| = {} != 1", name(h, b), Surd::modulus(&p[b])));
    if w.is_none() {
        'mor: for a in 0..h.len() {
            for b in 0..h.len() {
                if let Some(ab) = h.product(a, b) {
                    if p[ab] != &p[a] * &p[b] {
                        w = Some(format!("p({}) != p({}) p({})", name(h, ab), name(h, a), name(h, b)));
                        break 'mor;
                    }
                }
            }
        }
    }
    report.push("unimodular_morphism", w);

    if let (Some(mg), Some(mh)) = (src.mu, tgt.mu) {
        let w = h
            .units()
            .iter()
            .find(|&&y| mg.at(phi[y]) != mh.at(y))
            .map(|&y| format!("μ_G({}) != μ_H({})", name(g, phi[y]), name(h, y)));
        report.push("measure_pushforward", w);
    }

    let data = HaarData { phi, p, d };
    let rebuilt = build_haar_map(src, tgt, &data).expect("consistent lengths");
    let w = (rebuilt != *t).then(|| "T differs from the map built from (φ, p, D)".to_string());
    report.push("formula", w);

    if let Some(dec) = declared {
        let w = if dec.phi != data.phi {
            let b = (0..h.len()).find(|&b| dec.phi.get(b) != Some(&data.phi[b])).unwrap_or(0);
            Some(format!("declared φ({}) differs", name(h, b)))
        } else if dec.p != data.p {
            let b = (0..h.len()).find(|&b| dec.p.get(b) != Some(&data.p[b])).unwrap_or(0);
            Some(format!("declared p({}) differs", name(h, b)))
        } else if dec.d != data.d {
            let a = (0..g.len()).find(|&a| dec.d.get(a) != Some(&data.d[a])).unwrap_or(0);
            Some(format!("declared D({}) differs", name(g, a)))
        } else {
            None
        };
        report.push("declared_data", w);
    }
    report.data = Some(data);
}

fn shape_ok(t: &GaussMap, g: &FiniteGroupoid, h: &FiniteGroupoid) -> Res<()> {
    if t.images.len() != g.len() || t.images.iter().any(|i| i.len() != h.len()) {
        return Err(HaarError::BadLength);
    }
    Ok(())
}

/// Verification for an algebra isomorphism isometric for the `L¹` norms of
/// `λ ∘ μ`.
pub fn verify_measured_decomposition(t: &GaussMap, src: &MeasuredGroupoid, tgt: &MeasuredGroupoid, declared: Option<&HaarData>) -> Res<HaarReport> {
    let (g, h) = (src.groupoid, tgt.groupoid);
    shape_ok(t, g, h)?;
    let (Some(mg), Some(mh)) = (src.mu, tgt.mu) else {
        return Err(HaarError::MissingWeight("unit measure".into()));
    };
    let mut report = HaarReport {
        checks: Vec::new(),
        data: None,
    };
    if !report.push("algebra_isomorphism", check_algebra_iso(t, src, tgt)) {
        return Ok(report);
    }
    let all: Vec<usize> = (0..g.len()).collect();
    let ng = |f: &[GaussQ]| l1_norm_exact(g, src.lambda, mg, f);
    let nh = |f: &[GaussQ]| l1_norm_exact(h, tgt.lambda, mh, f);
    if !report.push("isometry", l1_probe_violation(t, &all, &ng, &nh, g)) {
        return Ok(report);
    }
    match recover_point_map(t, g, h) {
        Ok((phi, big_p)) => conclusion_checks(&mut report, t, src, tgt, phi, big_p, declared),
        Err(w) => {
            report.push("groupoid_isomorphism", Some(w));
        }
    }
    Ok(report)
}

/// Verification for a diagonal-preserving algebra isomorphism isometric for
/// the `(I,r)` norms. With `T(1_x) = 1_{φ⁻¹(x)}` on units, `‖1_y Tf‖_{I,r}`
/// is the fiber integral of `Tf` over `H^y`, so isometry reduces to exact
/// `ℓ¹` isometry of each fiber map `C(G^x) -> C(H^{φ⁻¹x})`.
pub fn verify_ir_decomposition(t: &GaussMap, src: &MeasuredGroupoid, tgt: &MeasuredGroupoid, declared: Option<&HaarData>) -> Res<HaarReport> {
    let (g, h) = (src.groupoid, tgt.groupoid);
    shape_ok(t, g, h)?;
    let mut report = HaarReport {
        checks: Vec::new(),
        data: None,
    };
    if !report.push("algebra_isomorphism", check_algebra_iso(t, src, tgt)) {
        return Ok(report);
    }
    // T restricted to the diagonal is an algebra isomorphism, so it sends the
    // minimal idempotents 1_x / λ(x) to minimal idempotents
    let mut unit_map = BTreeMap::new();
    let mut w = None;
    for &x in g.units() {
        let img = &t.images[x];
        let s = support(img);
        if s.iter().any(|&b| !h.is_unit(b)) {
            let b = s.iter().copied().find(|&b| !h.is_unit(b)).unwrap_or(0);
            w = Some(format!("T(1_{}) is nonzero at {}", name(g, x), name(h, b)));
            break;
        }
        if s.len() != 1 {
            w = Some(format!("T(1_{}) is not supported on one unit", name(g, x)));
            break;
        }
        unit_map.insert(x, s[0]);
    }
    if w.is_none() && (unit_map.values().collect::<std::collections::BTreeSet<_>>().len() != g.units().len() || g.units().len() != h.units().len()) {
        w = Some("units are not matched bijectively".into());
    }
    if !report.push("diagonal_preserving", w) {
        return Ok(report);
    }
    let mut w = None;
    for &x in g.units() {
        let y = unit_map[&x];
        let fiber: Vec<usize> = (0..g.len()).filter(|&a| g.range(a) == x).collect();
        if let Some(a) = fiber.iter().copied().find(|&a| support(&t.images[a]).iter().any(|&b| h.range(b) != y)) {
            w = Some(format!("T(1_{}) leaves the fiber over {}", name(g, a), name(h, y)));
            break;
        }
        let ng = |f: &[GaussQ]| fiber_norms(g, src.lambda, f).remove(&x).expect("unit");
        let nh = |f: &[GaussQ]| fiber_norms(h, tgt.lambda, f).remove(&y).expect("unit");
        if let Some(v) = l1_probe_violation(t, &fiber, &ng, &nh, g) {
            w = Some(v);
            break;
        }
    }
    if !report.push("isometry", w) {
        return Ok(report);
    }
    match recover_point_map(t, g, h) {
        Ok((phi, big_p)) => conclusion_checks(&mut report, t, src, tgt, phi, big_p, declared),
        Err(w) => {
            report.push("groupoid_isomorphism", Some(w));
        }
    }
    Ok(report)
}

pub const LATTICE_CAP: u128 = 20_000;

/// A witness `f ∈ {0, ±1, ±i}^G` with `‖Tf‖_{I,r} != ‖f‖_{I,r}`.
pub fn ir_isometric_on_lattice(t: &GaussMap, src: &MeasuredGroupoid, tgt: &MeasuredGroupoid) -> Res<Option<GaussElement>> {
    let n = src.groupoid.len();
    let size = 5u128.checked_pow(n as u32).unwrap_or(u128::MAX);
    if size > LATTICE_CAP {
        return Err(HaarError::LatticeTooLarge(size));
    }
    let vals = [
        czero(),
        cone(),
        -cone(),
        GaussQ::new(Q::zero(), Q::one()),
        GaussQ::new(Q::zero(), -Q::one()),
    ];
    Ok(crate::combinat::all_maps(n, vals.len())
        .map(|c| c.into_iter().map(|k| vals[k].clone()).collect::<GaussElement>())
        .find(|f| ir_norm_exact(src.groupoid, src.lambda, f) != ir_norm_exact(tgt.groupoid, tgt.lambda, &t.apply(f))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{gi, q, qf};
    use crate::steinberg::{RingSpec, Steinberg};
    use num::BigInt;

    fn pair_side<'a>(g: &'a FiniteGroupoid, l: &'a HaarSystem, m: Option<&'a UnitMeasure>) -> MeasuredGroupoid<'a> {
        MeasuredGroupoid {
            groupoid: g,
            lambda: l,
            mu: m,
        }
    }

    #[test]
    fn haar_validation() {
        let g = FiniteGroupoid::pair(2);
        assert!(HaarSystem::validate_haar(&g, vec![q(1); 4]).is_ok());
        // λ((x,y)) = w(y)
        assert!(HaarSystem::validate_haar(&g, vec![q(2), q(5), q(2), q(5)]).is_ok());
        assert!(matches!(
            HaarSystem::validate_haar(&g, vec![q(2), q(5), q(5), q(2)]),
            Err(HaarError::InvarianceViolation(..))
        ));
        assert!(matches!(
            HaarSystem::validate_haar(&g, vec![q(0), q(1), q(0), q(1)]),
            Err(HaarError::NotFullySupported(_))
        ));
        let l = HaarSystem::from_source_weights(&g, |x| q(x as i64 + 1)).unwrap();
        assert_eq!(HaarSystem::from_json(&g, &l.to_json(&g)).unwrap(), l);
        let mut j = l.to_json(&g);
        j.weights[1].unit = "(2,2)".into();
        assert!(matches!(HaarSystem::from_json(&g, &j), Err(HaarError::SupportViolation { .. })));
    }

    #[test]
    fn counting_convolution_matches_steinberg() {
        let g = FiniteGroupoid::pair(2);
        let alg = Steinberg::new(g.clone(), RingSpec::Integer).unwrap();
        let f = [3i64, -1, 2, 0];
        let h = [1i64, 4, -2, 5];
        let zf: Vec<BigInt> = f.iter().map(|&v| BigInt::from(v)).collect();
        let zh: Vec<BigInt> = h.iter().map(|&v| BigInt::from(v)).collect();
        let gf: Vec<GaussQ> = f.iter().map(|&v| gi(v, 0)).collect();
        let gh: Vec<GaussQ> = h.iter().map(|&v| gi(v, 0)).collect();
        let lhs = weighted_convolve(&g, &HaarSystem::counting(&g), &gf, &gh);
        let rhs: Vec<GaussQ> = alg
            .convolve(&zf, &zh)
            .iter()
            .map(|v| GaussQ::new(Q::from_integer(v.clone()), Q::zero()))
            .collect();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn norms() {
        let g = FiniteGroupoid::pair(2);
        let l = HaarSystem::counting(&g);
        let m = UnitMeasure::uniform(&g);
        let one = vec![cone(); 4];
        assert_eq!(l1_norm(&g, &l, &m, &one).unwrap(), q(4));
        assert_eq!(ir_norm(&g, &l, &one).unwrap(), q(2));
        let zero = vec![czero(); 4];
        assert_eq!(l1_norm(&g, &l, &m, &zero).unwrap(), q(0));
        assert_eq!(ir_norm(&g, &l, &zero).unwrap(), q(0));
        let v = vec![gi(1, 1), czero(), czero(), czero()];
        assert!(matches!(l1_norm(&g, &l, &m, &v), Err(HaarError::ModulusNotRational(_))));
        let v = vec![GaussQ::new(qf(3, 5), qf(4, 5)), czero(), czero(), czero()];
        assert_eq!(l1_norm(&g, &l, &m, &v).unwrap(), q(1));
    }

    #[test]
    fn identity_decomposes_trivially() {
        let g = FiniteGroupoid::pair(2);
        let l = HaarSystem::counting(&g);
        let m = UnitMeasure::uniform(&g);
        let t = GaussMap {
            images: (0..4).map(|a| basis(4, a)).collect(),
        };
        let side = pair_side(&g, &l, Some(&m));
        let r = verify_measured_decomposition(&t, &side, &side, None).unwrap();
        assert!(r.verified(), "{:?}", r.failed());
        let d = r.data.unwrap();
        assert_eq!(d.d, vec![q(1); 4]);
        assert_eq!(d.p, vec![cone(); 4]);
        assert!(verify_ir_decomposition(&t, &side, &side, None).unwrap().verified());
    }

    #[test]
    fn doubled_target_weights() {
        let g = FiniteGroupoid::pair(2);
        let lg = HaarSystem::counting(&g);
        let lh = lg.scaled(&q(2));
        let m = UnitMeasure::uniform(&g);
        let (src, tgt) = (pair_side(&g, &lg, Some(&m)), pair_side(&g, &lh, Some(&m)));
        let phi: Vec<usize> = (0..4).collect();
        let data = HaarData {
            phi: phi.clone(),
            p: vec![cone(); 4],
            d: radon_nikodym(&src, &tgt, &phi),
        };
        assert_eq!(data.d, vec![qf(1, 2); 4]);
        let t = build_haar_map(&src, &tgt, &data).unwrap();
        let r = verify_measured_decomposition(&t, &src, &tgt, Some(&data)).unwrap();
        assert!(r.verified(), "{:?}", r.failed());
        // doubling μ_H breaks isometry
        let m2 = UnitMeasure::new(&g, |_| q(2)).unwrap();
        let tgt2 = pair_side(&g, &lh, Some(&m2));
        let r = verify_measured_decomposition(&t, &src, &tgt2, Some(&data)).unwrap();
        assert_eq!(r.failed()[0].name, "isometry");
    }

    #[test]
    fn scaled_weights_in_ir_norm() {
        let g = FiniteGroupoid::pair(2);
        let lg = HaarSystem::counting(&g);
        let phi: Vec<usize> = vec![3, 2, 1, 0];
        for (ls, lt, expected) in [(lg.clone(), lg.scaled(&q(3)), qf(1, 3)), (lg.scaled(&q(3)), lg.clone(), q(3))] {
            let (src, tgt) = (pair_side(&g, &ls, None), pair_side(&g, &lt, None));
            let data = HaarData {
                phi: phi.clone(),
                p: vec![cone(); 4],
                d: radon_nikodym(&src, &tgt, &phi),
            };
            assert_eq!(data.d, vec![expected; 4]);
            let t = build_haar_map(&src, &tgt, &data).unwrap();
            let r = verify_ir_decomposition(&t, &src, &tgt, Some(&data)).unwrap();
            assert!(r.verified(), "{:?}", r.failed());
            assert_eq!(ir_isometric_on_lattice(&t, &src, &tgt).unwrap(), None);
        }
    }

    #[test]
    fn character_on_cyclic_isotropy() {
        let g = FiniteGroupoid::cyclic_group(4);
        let l = HaarSystem::counting(&g);
        let m = UnitMeasure::uniform(&g);
        let side = pair_side(&g, &l, Some(&m));
        let powers = [gi(1, 0), gi(0, 1), gi(-1, 0), gi(0, -1)];
        let data = HaarData {
            phi: (0..4).collect(),
            p: powers.to_vec(),
            d: vec![q(1); 4],
        };
        let t = build_haar_map(&side, &side, &data).unwrap();
        let r = verify_measured_decomposition(&t, &side, &side, Some(&data)).unwrap();
        assert!(r.verified(), "{:?}", r.failed());
        // i on the generator but 1 on its square is not a morphism, so T is not multiplicative
        let mut bad = data.clone();
        bad.p[2] = cone();
        let t = build_haar_map(&side, &side, &bad).unwrap();
        let r = verify_measured_decomposition(&t, &side, &side, None).unwrap();
        assert_eq!(r.failed()[0].name, "algebra_isomorphism");
    }

    #[test]
    fn non_unimodular_coboundary() {
        // p(i,j) = 2^{i-j} is a morphism into nonzero scalars; T is an algebra
        // isomorphism but neither norm is preserved
        let g = FiniteGroupoid::pair(2);
        let l = HaarSystem::counting(&g);
        let m = UnitMeasure::uniform(&g);
        let side = pair_side(&g, &l, Some(&m));
        let data = HaarData {
            phi: (0..4).collect(),
            p: vec![cone(), gi(2, 0), GaussQ::new(qf(1, 2), Q::zero()), cone()],
            d: vec![q(1); 4],
        };
        let t = build_haar_map(&side, &side, &data).unwrap();
        for r in [
            verify_measured_decomposition(&t, &side, &side, None).unwrap(),
            verify_ir_decomposition(&t, &side, &side, None).unwrap(),
        ] {
            assert!(r.checks[0].passed);
            assert_eq!(r.failed()[0].name, "isometry");
        }
    }

    #[test]
    fn non_diagonal_map_is_rejected() {
        let g = FiniteGroupoid::pair(2);
        let l = HaarSystem::counting(&g);
        let side = pair_side(&g, &l, None);
        // conjugation by (1 1; 0 1) is an algebra automorphism that moves the diagonal
        let e = |i: usize, j: usize| 2 * i + j;
        let mut images = vec![vec![czero(); 4]; 4];
        // T(E_ij) = S E_ij S⁻¹ with S = I + E_01
        for i in 0..2 {
            for j in 0..2 {
                let mut m = [[czero(), czero()], [czero(), czero()]];
                m[i][j] = cone();
                let s = [[cone(), cone()], [czero(), cone()]];
                let sinv = [[cone(), -cone()], [czero(), cone()]];
                let mul = |a: &[[GaussQ; 2]; 2], b: &[[GaussQ; 2]; 2]| {
                    let mut c = [[czero(), czero()], [czero(), czero()]];
                    for r in 0..2 {
                        for k in 0..2 {
                            for t in 0..2 {
                                c[r][t] = &c[r][t] + &a[r][k] * &b[k][t];
                            }
                        }
                    }
                    c
                };
                let c = mul(&mul(&s, &m), &sinv);
                for r in 0..2 {
                    for t in 0..2 {
                        images[e(i, j)][e(r, t)] = c[r][t].clone();
                    }
                }
            }
        }
        let t = GaussMap { images };
        let r = verify_ir_decomposition(&t, &side, &side, None).unwrap();
        assert!(r.checks[0].passed);
        let fail = r.failed()[0];
        assert_eq!(fail.name, "diagonal_preserving");
        assert!(fail.witness.as_ref().unwrap().contains("(1,2)"));
    }

    #[test]
    fn weighted_convolution_laws() {
        let g = FiniteGroupoid::pair(2);
        let l = HaarSystem::from_source_weights(&g, |x| if x == 0 { q(2) } else { qf(1, 3) }).unwrap();
        let f = vec![gi(1, 0), gi(0, 2), czero(), gi(-1, 1)];
        let h = vec![czero(), gi(3, 0), gi(1, -1), gi(2, 0)];
        let k = vec![gi(1, 1), czero(), gi(0, 1), gi(1, 0)];
        let lhs = weighted_convolve(&g, &l, &weighted_convolve(&g, &l, &f, &h), &k);
        let rhs = weighted_convolve(&g, &l, &f, &weighted_convolve(&g, &l, &h, &k));
        assert_eq!(lhs, rhs);
        let prod = weighted_convolve(&g, &l, &f, &h);
        let allowed = support_product(&g, &f, &h);
        assert!(support(&prod).iter().all(|&a| allowed[a]));
    }
}
