//! Piecewise-linear functions with rational breakpoints on finite unions of
//! closed rational intervals.

use std::fmt;

use num::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::exact::{fmt_q, parse_q, q, Q};

/// A finite union of intervals with rational endpoints, open or closed.
///
/// Stored as a partition of the line by `cuts` into atoms
/// `(-inf, c0), {c0}, (c0, c1), {c1}, .., (ck, inf)` together with a membership
/// flag per atom. Kept normalized, so structural equality is set equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntervalSet {
    cuts: Vec<Q>,
    atoms: Vec<bool>,
}

/// One connected component of an [`IntervalSet`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub lo: Q,
    pub lo_closed: bool,
    pub hi: Q,
    pub hi_closed: bool,
}

impl Interval {
    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn midpoint(&self) -> Q {
        (&self.lo + &self.hi) / q(2)
    }
}

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet {
            cuts: vec![],
            atoms: vec![false],
        }
    }

    pub fn point(p: Q) -> Self {
        IntervalSet {
            cuts: vec![p],
            atoms: vec![false, true, false],
        }
    }

    /// `[a, b]`, a point when `a == b`, empty when `a > b`.
    pub fn closed(a: Q, b: Q) -> Self {
        if a > b {
            return IntervalSet::empty();
        }
        if a == b {
            return IntervalSet::point(a);
        }
        IntervalSet {
            cuts: vec![a, b],
            atoms: vec![false, true, true, true, false],
        }
    }

    pub fn interval(a: Q, lo_closed: bool, b: Q, hi_closed: bool) -> Self {
        if a > b || (a == b && !(lo_closed && hi_closed)) {
            return IntervalSet::empty();
        }
        if a == b {
            return IntervalSet::point(a);
        }
        let s = IntervalSet {
            cuts: vec![a, b],
            atoms: vec![false, lo_closed, true, hi_closed, false],
        };
        s.normalized()
    }

    pub fn open(a: Q, b: Q) -> Self {
        IntervalSet::interval(a, false, b, false)
    }

    /// Union of closed intervals `[l, r]`.
    pub fn from_closed(parts: &[(Q, Q)]) -> Self {
        parts
            .iter()
            .fold(IntervalSet::empty(), |acc, (a, b)| acc.union(&IntervalSet::closed(a.clone(), b.clone())))
    }

    /// A point inside the atom `k` (even: gap, odd: cut point).
    fn representative(cuts: &[Q], k: usize) -> Q {
        if k % 2 == 1 {
            return cuts[k / 2].clone();
        }
        let i = k / 2;
        match (i.checked_sub(1).map(|j| &cuts[j]), cuts.get(i)) {
            (None, None) => Q::zero(),
            (None, Some(r)) => r - q(1),
            (Some(l), None) => l + q(1),
            (Some(l), Some(r)) => (l + r) / q(2),
        }
    }

    /// Builds a set from a predicate assumed constant on the atoms cut out by `cuts`.
    pub fn from_predicate(mut cuts: Vec<Q>, pred: impl Fn(&Q) -> bool) -> Self {
        cuts.sort();
        cuts.dedup();
        let atoms = (0..2 * cuts.len() + 1).map(|k| pred(&Self::representative(&cuts, k))).collect();
        IntervalSet { cuts, atoms }.normalized()
    }

    fn normalized(mut self) -> Self {
        let mut i = 0;
        while i < self.cuts.len() {
            let (a, b, c) = (self.atoms[2 * i], self.atoms[2 * i + 1], self.atoms[2 * i + 2]);
            if a == b && b == c {
                self.cuts.remove(i);
                self.atoms.drain(2 * i..2 * i + 2);
            } else {
                i += 1;
            }
        }
        self
    }

    pub fn contains(&self, x: &Q) -> bool {
        match self.cuts.binary_search(x) {
            Ok(i) => self.atoms[2 * i + 1],
            Err(i) => self.atoms[2 * i],
        }
    }

    fn combine(&self, other: &Self, op: impl Fn(bool, bool) -> bool) -> Self {
        let mut cuts: Vec<Q> = self.cuts.iter().chain(other.cuts.iter()).cloned().collect();
        cuts.sort();
        cuts.dedup();
        IntervalSet::from_predicate(cuts, |x| op(self.contains(x), other.contains(x)))
    }

    pub fn union(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a || b)
    }

    pub fn inter(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a && b)
    }

    pub fn minus(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a && !b)
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.iter().all(|a| !a)
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.minus(other).is_empty()
    }

    pub fn closure(&self) -> Self {
        let mut atoms = self.atoms.clone();
        for i in 0..self.cuts.len() {
            atoms[2 * i + 1] = self.atoms[2 * i] || self.atoms[2 * i + 1] || self.atoms[2 * i + 2];
        }
        IntervalSet {
            cuts: self.cuts.clone(),
            atoms,
        }
        .normalized()
    }

    /// Interior relative to `domain`: points with a neighbourhood whose trace on
    /// `domain` lies in `self`.
    pub fn interior_in(&self, domain: &Self) -> Self {
        let s = self.inter(domain);
        let mut cuts: Vec<Q> = s.cuts.iter().chain(domain.cuts.iter()).cloned().collect();
        cuts.sort();
        cuts.dedup();
        let n = cuts.len();
        let mut atoms: Vec<bool> = (0..2 * n + 1).map(|k| s.contains(&Self::representative(&cuts, k))).collect();
        let in_d: Vec<bool> = (0..2 * n + 1).map(|k| domain.contains(&Self::representative(&cuts, k))).collect();
        for i in 0..n {
            let p = 2 * i + 1;
            if atoms[p] {
                let left_ok = atoms[p - 1] || !in_d[p - 1];
                let right_ok = atoms[p + 1] || !in_d[p + 1];
                atoms[p] = left_ok && right_ok;
            }
        }
        IntervalSet { cuts, atoms }.normalized()
    }

    pub fn is_open_in(&self, domain: &Self) -> bool {
        self.is_subset(domain) && self.interior_in(domain) == *self
    }

    pub fn is_closed(&self) -> bool {
        self.closure() == *self
    }

    /// Connected components in increasing order.
    pub fn intervals(&self) -> Vec<Interval> {
        let mut out = Vec::new();
        let mut start: Option<(Q, bool)> = None;
        let n = self.cuts.len();
        for k in 0..2 * n + 1 {
            let inside = self.atoms[k];
            if inside && start.is_none() {
                assert!(k != 0, "unbounded set");
                if k % 2 == 1 {
                    start = Some((self.cuts[k / 2].clone(), true));
                } else {
                    start = Some((self.cuts[k / 2 - 1].clone(), false));
                }
            }
            if !inside {
                if let Some((lo, lc)) = start.take() {
                    // atom k-1 was the last one inside
                    let (hi, hc) = if (k - 1) % 2 == 1 {
                        (self.cuts[(k - 1) / 2].clone(), true)
                    } else {
                        (self.cuts[(k - 1) / 2].clone(), false)
                    };
                    out.push(Interval {
                        lo,
                        lo_closed: lc,
                        hi,
                        hi_closed: hc,
                    });
                }
            }
        }
        assert!(start.is_none(), "unbounded set");
        out
    }

    /// Midpoint of the first component, if any.
    pub fn sample_point(&self) -> Option<Q> {
        self.intervals().first().map(Interval::midpoint)
    }

    pub fn cut_points(&self) -> &[Q] {
        &self.cuts
    }
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts = self.intervals();
        if parts.is_empty() {
            return write!(f, "∅");
        }
        let s: Vec<String> = parts
            .iter()
            .map(|iv| {
                if iv.is_point() {
                    format!("{{{}}}", fmt_q(&iv.lo))
                } else {
                    format!(
                        "{}{},{}{}",
                        if iv.lo_closed { '[' } else { '(' },
                        fmt_q(&iv.lo),
                        fmt_q(&iv.hi),
                        if iv.hi_closed { ']' } else { ')' }
                    )
                }
            })
            .collect();
        write!(f, "{}", s.join(" ∪ "))
    }
}

impl fmt::Debug for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntervalSet({self})")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PlError {
    #[error("domain must be a nonempty finite union of closed intervals")]
    BadDomain,
    #[error("breakpoints must be strictly increasing, lie in the domain and include every component endpoint")]
    BadBreakpoints,
    #[error("breakpoints and values differ in length")]
    LengthMismatch,
    #[error("functions live on different domains")]
    DomainMismatch,
    #[error("product is not piecewise linear")]
    NotPiecewiseLinear,
    #[error("one-region and zero-region intersect")]
    RegionsOverlap,
    #[error("one-region and zero-region have no positive gap")]
    GapEmpty,
    #[error("region is not contained in the domain")]
    RegionOutsideDomain,
    #[error("invalid tent: {0}")]
    BadTent(String),
    #[error("density must be positive and defined on the whole domain")]
    DensityNotPositive,
    #[error("bad rational: {0}")]
    Parse(String),
}

/// A continuous function on a closed domain, linear between consecutive
/// breakpoints of the same component.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PLFunction {
    domain: IntervalSet,
    breakpoints: Vec<Q>,
    values: Vec<Q>,
}

impl PLFunction {
    pub fn new(domain: IntervalSet, breakpoints: Vec<Q>, values: Vec<Q>) -> Result<Self, PlError> {
        if domain.is_empty() || !domain.is_closed() {
            return Err(PlError::BadDomain);
        }
        if breakpoints.len() != values.len() {
            return Err(PlError::LengthMismatch);
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) || breakpoints.iter().any(|b| !domain.contains(b)) {
            return Err(PlError::BadBreakpoints);
        }
        for iv in domain.intervals() {
            if breakpoints.binary_search(&iv.lo).is_err() || breakpoints.binary_search(&iv.hi).is_err() {
                return Err(PlError::BadBreakpoints);
            }
        }
        Ok(PLFunction { domain, breakpoints, values }.simplified())
    }

    pub fn zero(domain: &IntervalSet) -> Result<Self, PlError> {
        PLFunction::constant(domain, Q::zero())
    }

    pub fn constant(domain: &IntervalSet, c: Q) -> Result<Self, PlError> {
        let bps: Vec<Q> = domain.intervals().iter().flat_map(|iv| [iv.lo.clone(), iv.hi.clone()]).collect();
        let mut b = bps;
        b.dedup();
        let n = b.len();
        PLFunction::new(domain.clone(), b, vec![c; n])
    }

    /// Drops breakpoints that are interior to a segment and collinear with
    /// their neighbours, giving a canonical representation.
    fn simplified(mut self) -> Self {
        let ends: Vec<Q> = self.domain.intervals().iter().flat_map(|iv| [iv.lo.clone(), iv.hi.clone()]).collect();
        let mut i = 1;
        while i + 1 < self.breakpoints.len() {
            let b = &self.breakpoints[i];
            let removable = !ends.contains(b) && {
                let (x0, x1, x2) = (&self.breakpoints[i - 1], b, &self.breakpoints[i + 1]);
                let (y0, y1, y2) = (&self.values[i - 1], &self.values[i], &self.values[i + 1]);
                (y1 - y0) * (x2 - x1) == (y2 - y1) * (x1 - x0)
            };
            if removable {
                self.breakpoints.remove(i);
                self.values.remove(i);
            } else {
                i += 1;
            }
        }
        self
    }

    pub fn domain(&self) -> &IntervalSet {
        &self.domain
    }

    pub fn breakpoints(&self) -> &[Q] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[Q] {
        &self.values
    }

    /// Value at `x`, `None` outside the domain.
    pub fn eval(&self, x: &Q) -> Option<Q> {
        if !self.domain.contains(x) {
            return None;
        }
        match self.breakpoints.binary_search(x) {
            Ok(i) => Some(self.values[i].clone()),
            Err(i) => {
                // x lies strictly between breakpoints i-1 and i of one component
                let (x0, x1) = (&self.breakpoints[i - 1], &self.breakpoints[i]);
                let (y0, y1) = (&self.values[i - 1], &self.values[i]);
                Some(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
            }
        }
    }

    /// Consecutive breakpoint pairs spanning a piece of the domain.
    fn segments(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.breakpoints.len().saturating_sub(1)).filter(move |&i| {
            let m = (&self.breakpoints[i] + &self.breakpoints[i + 1]) / q(2);
            self.domain.contains(&m)
        })
    }

    /// Breakpoints together with the interior sign changes.
    fn cuts_with_roots(&self) -> Vec<Q> {
        let mut cuts = self.breakpoints.clone();
        for i in self.segments() {
            let (y0, y1) = (&self.values[i], &self.values[i + 1]);
            if (y0.is_positive() && y1.is_negative()) || (y0.is_negative() && y1.is_positive()) {
                let (x0, x1) = (&self.breakpoints[i], &self.breakpoints[i + 1]);
                cuts.push(x0 + y0 * (x1 - x0) / (y0 - y1));
            }
        }
        cuts.sort();
        cuts
    }

    /// `[f != 0]`, open relative to the domain.
    pub fn nonzero_set(&self) -> IntervalSet {
        IntervalSet::from_predicate(self.cuts_with_roots(), |x| self.eval(x).is_some_and(|v| !v.is_zero()))
    }

    fn merged_breakpoints(&self, other: &Self) -> Vec<Q> {
        let mut b: Vec<Q> = self.breakpoints.iter().chain(other.breakpoints.iter()).cloned().collect();
        b.sort();
        b.dedup();
        b
    }

    fn pointwise(&self, other: &Self, op: impl Fn(&Q, &Q) -> Q) -> Result<Self, PlError> {
        if self.domain != other.domain {
            return Err(PlError::DomainMismatch);
        }
        let b = self.merged_breakpoints(other);
        let v = b.iter().map(|x| op(&self.eval(x).unwrap(), &other.eval(x).unwrap())).collect();
        PLFunction::new(self.domain.clone(), b, v)
    }

    pub fn add(&self, other: &Self) -> Result<Self, PlError> {
        self.pointwise(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, PlError> {
        self.pointwise(other, |a, b| a - b)
    }

    pub fn scale(&self, c: &Q) -> Self {
        PLFunction {
            domain: self.domain.clone(),
            breakpoints: self.breakpoints.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
        }
        .simplified()
    }

    /// Pointwise product, defined when it is again piecewise linear.
    pub fn mul(&self, other: &Self) -> Result<Self, PlError> {
        if self.domain != other.domain {
            return Err(PlError::DomainMismatch);
        }
        let b = self.merged_breakpoints(other);
        for w in b.windows(2) {
            let m = (&w[0] + &w[1]) / q(2);
            if !self.domain.contains(&m) {
                continue;
            }
            let f_const = self.eval(&w[0]) == self.eval(&w[1]);
            let g_const = other.eval(&w[0]) == other.eval(&w[1]);
            if !f_const && !g_const {
                return Err(PlError::NotPiecewiseLinear);
            }
        }
        let v = b.iter().map(|x| self.eval(x).unwrap() * other.eval(x).unwrap()).collect();
        PLFunction::new(self.domain.clone(), b, v)
    }

    pub fn to_json(&self) -> PlJson {
        PlJson {
            domain: self.domain.intervals().iter().map(|iv| [fmt_q(&iv.lo), fmt_q(&iv.hi)]).collect(),
            breakpoints: self.breakpoints.iter().map(fmt_q).collect(),
            values: self.values.iter().map(fmt_q).collect(),
        }
    }

    pub fn from_json(j: &PlJson) -> Result<Self, PlError> {
        let p = |s: &String| parse_q(s).map_err(|e| PlError::Parse(e.0));
        let parts: Vec<(Q, Q)> = j.domain.iter().map(|[a, b]| Ok((p(a)?, p(b)?))).collect::<Result<_, PlError>>()?;
        let domain = IntervalSet::from_closed(&parts);
        let b = j.breakpoints.iter().map(p).collect::<Result<Vec<_>, _>>()?;
        let v = j.values.iter().map(p).collect::<Result<Vec<_>, _>>()?;
        PLFunction::new(domain, b, v)
    }
}

impl fmt::Debug for PLFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pts: Vec<String> = self
            .breakpoints
            .iter()
            .zip(&self.values)
            .map(|(x, y)| format!("({},{})", fmt_q(x), fmt_q(y)))
            .collect();
        write!(f, "PL[{} | {}]", self.domain, pts.join(" "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlJson {
    pub domain: Vec<[String; 2]>,
    pub breakpoints: Vec<String>,
    pub values: Vec<String>,
}

/// `cl [f != 0]`.
pub fn pl_support(f: &PLFunction) -> IntervalSet {
    f.nonzero_set().closure()
}

/// Interior of the support, relative to the domain.
pub fn pl_sigma(f: &PLFunction) -> IntervalSet {
    pl_support(f).interior_in(f.domain())
}

/// Complement of the support in the domain.
pub fn pl_zero_set(f: &PLFunction) -> IntervalSet {
    f.domain().minus(&pl_support(f))
}

fn component_containing(domain: &IntervalSet, a: &Q, b: &Q) -> Option<Interval> {
    domain.intervals().into_iter().find(|iv| &iv.lo <= a && b <= &iv.hi)
}

/// Tent with the given peak value, vanishing outside `support = [a, b]`.
pub fn tent(domain: &IntervalSet, peak: &Q, support: (&Q, &Q), height: &Q) -> Result<PLFunction, PlError> {
    let (a, b) = support;
    if a >= b {
        return Err(PlError::BadTent("support must have positive length".into()));
    }
    if peak < a || peak > b {
        return Err(PlError::BadTent("peak outside support".into()));
    }
    let comp = component_containing(domain, a, b).ok_or_else(|| PlError::BadTent("support leaves the domain".into()))?;
    if (peak == a && a != &comp.lo) || (peak == b && b != &comp.hi) {
        return Err(PlError::BadTent("peak on an interior support edge would be discontinuous".into()));
    }
    let mut knots: Vec<(Q, Q)> = Vec::new();
    for iv in domain.intervals() {
        knots.push((iv.lo.clone(), Q::zero()));
        knots.push((iv.hi.clone(), Q::zero()));
    }
    knots.retain(|(x, _)| x != a && x != b && x != peak);
    knots.push((a.clone(), Q::zero()));
    knots.push((b.clone(), Q::zero()));
    knots.retain(|(x, _)| x != peak);
    knots.push((peak.clone(), height.clone()));
    knots.sort();
    knots.dedup();
    let (bx, vx): (Vec<Q>, Vec<Q>) = knots.into_iter().unzip();
    PLFunction::new(domain.clone(), bx, vx)
}

/// A function equal to 1 on `one_region`, 0 on `zero_region` and linear across gaps.
pub fn plateau(domain: &IntervalSet, one_region: &IntervalSet, zero_region: &IntervalSet) -> Result<PLFunction, PlError> {
    if !one_region.is_subset(domain) || !zero_region.is_subset(domain) {
        return Err(PlError::RegionOutsideDomain);
    }
    if !one_region.inter(zero_region).is_empty() {
        return Err(PlError::RegionsOverlap);
    }
    let (c1, c0) = (one_region.closure(), zero_region.closure());
    if !c1.inter(&c0).is_empty() {
        return Err(PlError::GapEmpty);
    }
    let mut marks: Vec<(Q, Q, Q)> = Vec::new();
    for iv in c1.intervals() {
        marks.push((iv.lo, iv.hi, q(1)));
    }
    for iv in c0.intervals() {
        marks.push((iv.lo, iv.hi, Q::zero()));
    }
    marks.sort();
    let mut knots: Vec<(Q, Q)> = Vec::new();
    for comp in domain.intervals() {
        let inside: Vec<&(Q, Q, Q)> = marks.iter().filter(|m| comp.lo <= m.0 && m.1 <= comp.hi).collect();
        let (first, last) = match (inside.first(), inside.last()) {
            (Some(f), Some(l)) => (f.2.clone(), l.2.clone()),
            _ => (Q::zero(), Q::zero()),
        };
        knots.push((comp.lo.clone(), first));
        for m in &inside {
            knots.push((m.0.clone(), m.2.clone()));
            knots.push((m.1.clone(), m.2.clone()));
        }
        knots.push((comp.hi.clone(), last));
    }
    knots.dedup_by(|a, b| a.0 == b.0);
    let (bx, vx): (Vec<Q>, Vec<Q>) = knots.into_iter().unzip();
    PLFunction::new(domain.clone(), bx, vx)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Milgram {
    /// `h` with `h f = f` and `h g = 0`.
    Witness(PLFunction),
    /// The supports meet at `point`.
    Absent { point: Q },
}

/// Searches for `h` with `h f = f` and `h g = 0`; exists iff the supports are disjoint.
pub fn milgram_witness(f: &PLFunction, g: &PLFunction) -> Result<Milgram, PlError> {
    if f.domain() != g.domain() {
        return Err(PlError::DomainMismatch);
    }
    let (sf, sg) = (pl_support(f), pl_support(g));
    if let Some(point) = sf.inter(&sg).sample_point() {
        return Ok(Milgram::Absent { point });
    }
    let h = plateau(f.domain(), &sf, &sg)?;
    let hf = h.mul(f)?;
    let hg = h.mul(g)?;
    assert!(hf == *f && hg == PLFunction::zero(f.domain())?, "plateau failed to separate supports");
    Ok(Milgram::Witness(h))
}

pub fn pl_sup_norm(f: &PLFunction) -> Q {
    f.values().iter().map(|v| v.abs()).max().unwrap_or_else(Q::zero)
}

/// Piecewise-constant density: weight `w` on each closed piece `[l, r]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Density {
    pub pieces: Vec<(Q, Q, Q)>,
}

impl Density {
    pub fn uniform(domain: &IntervalSet) -> Self {
        Density {
            pieces: domain.intervals().into_iter().map(|iv| (iv.lo, iv.hi, q(1))).collect(),
        }
    }

    fn weight_at(&self, x: &Q) -> Option<Q> {
        self.pieces.iter().find(|(l, r, _)| l <= x && x <= r).map(|p| p.2.clone())
    }
}

/// `∫ |f| w dx`, exact.
pub fn pl_l1_norm(f: &PLFunction, density: &Density) -> Result<Q, PlError> {
    if density.pieces.iter().any(|p| !p.2.is_positive() || p.0 > p.1) {
        return Err(PlError::DensityNotPositive);
    }
    let mut cuts = f.cuts_with_roots();
    for (l, r, _) in &density.pieces {
        cuts.push(l.clone());
        cuts.push(r.clone());
    }
    cuts.sort();
    cuts.dedup();
    let mut total = Q::zero();
    for w in cuts.windows(2) {
        let m = (&w[0] + &w[1]) / q(2);
        if !f.domain().contains(&m) {
            continue;
        }
        let weight = density.weight_at(&m).ok_or(PlError::DensityNotPositive)?;
        let (ya, yb) = (f.eval(&w[0]).unwrap(), f.eval(&w[1]).unwrap());
        // no sign change inside, so |f| is linear here
        total += (ya.abs() + yb.abs()) / q(2) * (&w[1] - &w[0]) * weight;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::qf;
    use proptest::prelude::*;

    fn unit() -> IntervalSet {
        IntervalSet::closed(q(0), q(1))
    }

    fn identity() -> PLFunction {
        PLFunction::new(unit(), vec![q(0), q(1)], vec![q(0), q(1)]).unwrap()
    }

    #[test]
    fn interval_set_normalizes() {
        let a = IntervalSet::closed(q(0), qf(1, 2)).union(&IntervalSet::closed(qf(1, 2), q(1)));
        assert_eq!(a, unit());
        let b = IntervalSet::open(q(0), qf(1, 2)).union(&IntervalSet::open(qf(1, 2), q(1)));
        assert!(!b.contains(&qf(1, 2)));
        assert_eq!(b.closure(), unit());
        assert_eq!(format!("{b}"), "(0,1/2) ∪ (1/2,1)");
    }

    #[test]
    fn relative_interior() {
        let d = IntervalSet::from_closed(&[(q(0), q(1)), (q(2), q(2))]);
        let s = IntervalSet::closed(q(0), qf(1, 2)).union(&IntervalSet::point(q(2)));
        let i = s.interior_in(&d);
        assert!(i.contains(&q(0)) && i.contains(&q(2)) && !i.contains(&qf(1, 2)));
    }

    #[test]
    fn identity_support_and_norms() {
        let f = identity();
        assert_eq!(pl_support(&f), unit());
        assert_eq!(pl_sigma(&f), unit());
        assert!(pl_zero_set(&f).is_empty());
        assert_eq!(pl_l1_norm(&f, &Density::uniform(&unit())).unwrap(), qf(1, 2));
        assert_eq!(pl_sup_norm(&f), q(1));
    }

    #[test]
    fn tent_sigma_is_open_interval() {
        let t = tent(&unit(), &qf(3, 8), (&qf(1, 4), &qf(1, 2)), &q(1)).unwrap();
        assert_eq!(pl_sigma(&t), IntervalSet::open(qf(1, 4), qf(1, 2)));
        assert_eq!(pl_support(&t), IntervalSet::closed(qf(1, 4), qf(1, 2)));
        assert!(tent(&unit(), &qf(1, 4), (&qf(1, 4), &qf(1, 2)), &q(1)).is_err());
    }

    #[test]
    fn sign_change_keeps_support_whole() {
        let f = PLFunction::new(unit(), vec![q(0), q(1)], vec![q(-1), q(1)]).unwrap();
        assert!(!f.nonzero_set().contains(&qf(1, 2)));
        assert_eq!(pl_support(&f), unit());
        assert_eq!(pl_l1_norm(&f, &Density::uniform(&unit())).unwrap(), qf(1, 2));
    }

    #[test]
    fn plateau_values() {
        let h = plateau(&unit(), &IntervalSet::closed(q(0), qf(1, 4)), &IntervalSet::closed(qf(1, 2), q(1))).unwrap();
        assert_eq!(h.eval(&qf(3, 8)), Some(qf(1, 2)));
        assert_eq!(h.eval(&q(0)), Some(q(1)));
        assert_eq!(h.eval(&qf(3, 4)), Some(q(0)));
        let overlap = plateau(&unit(), &IntervalSet::closed(q(0), qf(1, 2)), &IntervalSet::closed(qf(1, 2), q(1)));
        assert_eq!(overlap, Err(PlError::RegionsOverlap));
        let touch = plateau(
            &unit(),
            &IntervalSet::interval(q(0), true, qf(1, 2), false),
            &IntervalSet::closed(qf(1, 2), q(1)),
        );
        assert_eq!(touch, Err(PlError::GapEmpty));
    }

    #[test]
    fn milgram_on_touching_and_separated_tents() {
        let f = tent(&unit(), &qf(1, 4), (&q(0), &qf(1, 2)), &q(1)).unwrap();
        let g = tent(&unit(), &qf(3, 4), (&qf(1, 2), &q(1)), &q(1)).unwrap();
        assert_eq!(milgram_witness(&f, &g).unwrap(), Milgram::Absent { point: qf(1, 2) });
        assert_eq!(milgram_witness(&f, &f).unwrap(), Milgram::Absent { point: qf(1, 4) });
        let g2 = tent(&unit(), &qf(7, 8), (&qf(3, 4), &q(1)), &q(2)).unwrap();
        match milgram_witness(&f, &g2).unwrap() {
            Milgram::Witness(h) => {
                assert_eq!(h.mul(&f).unwrap(), f);
                assert!(pl_support(&h.mul(&g2).unwrap()).is_empty());
            }
            other => panic!("expected witness, got {other:?}"),
        }
        let other_domain = PLFunction::zero(&IntervalSet::closed(q(0), q(2))).unwrap();
        assert_eq!(milgram_witness(&f, &other_domain), Err(PlError::DomainMismatch));
    }

    #[test]
    fn general_products_can_leave_pl() {
        assert_eq!(identity().mul(&identity()), Err(PlError::NotPiecewiseLinear));
    }

    #[test]
    fn weighted_l1() {
        let f = PLFunction::constant(&unit(), q(1)).unwrap();
        let w = Density {
            pieces: vec![(q(0), qf(1, 2), q(1)), (qf(1, 2), q(1), q(3))],
        };
        assert_eq!(pl_l1_norm(&f, &w).unwrap(), q(2));
        let bad = Density {
            pieces: vec![(q(0), q(1), q(0))],
        };
        assert_eq!(pl_l1_norm(&f, &bad), Err(PlError::DensityNotPositive));
        let short = Density {
            pieces: vec![(q(0), qf(1, 2), q(1))],
        };
        assert_eq!(pl_l1_norm(&f, &short), Err(PlError::DensityNotPositive));
    }

    #[test]
    fn json_round_trip() {
        let t = tent(&unit(), &qf(1, 3), (&q(0), &qf(2, 3)), &qf(5, 2)).unwrap();
        let j = serde_json::to_string(&t.to_json()).unwrap();
        let back = PLFunction::from_json(&serde_json::from_str(&j).unwrap()).unwrap();
        assert_eq!(back, t);
    }

    fn rational() -> impl Strategy<Value = Q> {
        (-8i64..=8, 1i64..=6).prop_map(|(n, d)| qf(n, d))
    }

    fn pl_on_unit() -> impl Strategy<Value = PLFunction> {
        (proptest::collection::btree_set(1i64..16, 0..5), proptest::collection::vec(rational(), 7)).prop_map(|(inner, vals)| {
            let mut b = vec![q(0)];
            b.extend(inner.into_iter().map(|k| qf(k, 16)));
            b.push(q(1));
            let v = (0..b.len()).map(|i| if i % 3 == 0 { Q::zero() } else { vals[i % 7].clone() }).collect();
            PLFunction::new(unit(), b, v).unwrap()
        })
    }

    proptest! {
        #[test]
        fn support_laws(f in pl_on_unit()) {
            let s = pl_support(&f);
            let sig = pl_sigma(&f);
            prop_assert!(s.is_closed());
            prop_assert!(sig.is_subset(&s));
            prop_assert!(f.nonzero_set().is_subset(&sig));
            prop_assert!(sig.is_open_in(f.domain()));
            prop_assert_eq!(pl_zero_set(&f).union(&s), f.domain().clone());
        }

        #[test]
        fn l1_is_a_seminorm(f in pl_on_unit(), g in pl_on_unit(), c in rational()) {
            let w = Density::uniform(&unit());
            let n = |h: &PLFunction| pl_l1_norm(h, &w).unwrap();
            prop_assert!(n(&f.add(&g).unwrap()) <= n(&f) + n(&g));
            prop_assert_eq!(n(&f.scale(&c)), n(&f) * c.abs());
        }

        #[test]
        fn milgram_iff_disjoint_supports(f in pl_on_unit(), g in pl_on_unit()) {
            let disjoint = pl_support(&f).inter(&pl_support(&g)).is_empty();
            let found = matches!(milgram_witness(&f, &g).unwrap(), Milgram::Witness(_));
            prop_assert_eq!(disjoint, found);
        }
    }
}
