//! Exact scalars: rationals, Gaussian rationals and finite sums of rational
//! multiples of square roots (used for moduli and norms).

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num::bigint::{BigInt, Sign};
use num::rational::BigRational;
use num::{Complex, Integer, One, Signed, Zero};

pub type Q = BigRational;
pub type GaussQ = Complex<Q>;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn gq(re: Q, im: Q) -> GaussQ {
    Complex::new(re, im)
}

pub fn gi(re: i64, im: i64) -> GaussQ {
    Complex::new(q(re), q(im))
}

/// The four unimodular Gaussian integers `1, i, -1, -i`.
pub fn unit_probes() -> [GaussQ; 4] {
    [gi(1, 0), gi(0, 1), gi(-1, 0), gi(0, -1)]
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse rational from {0:?}")]
pub struct ParseRationalError(pub String);

/// Parses `"p/q"`, `"p"` or a decimal like `"0.25"`.
pub fn parse_q(s: &str) -> Result<Q, ParseRationalError> {
    let t = s.trim();
    let err = || ParseRationalError(s.to_string());
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| err())?;
        let d: BigInt = d.trim().parse().map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(Q::new(n, d));
    }
    if let Some((ip, fp)) = t.split_once('.') {
        let neg = ip.starts_with('-');
        let ip_abs = ip.trim_start_matches(['-', '+']);
        let whole: BigInt = if ip_abs.is_empty() {
            BigInt::zero()
        } else {
            ip_abs.parse().map_err(|_| err())?
        };
        if fp.is_empty() || !fp.chars().all(|c| c.is_ascii_digit()) {
            return Err(err());
        }
        let frac: BigInt = fp.parse().map_err(|_| err())?;
        let scale = num::pow(BigInt::from(10), fp.len());
        let v = Q::new(whole * &scale + frac, scale);
        return Ok(if neg { -v } else { v });
    }
    let n: BigInt = t.parse().map_err(|_| err())?;
    Ok(Q::from_integer(n))
}

pub fn fmt_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parses a Gaussian rational written as `"a"`, `"bi"`, `"a+bi"` or `"a-bi"`,
/// where `a` and `b` are rationals and `b` may be omitted (`"i"`, `"-i"`).
pub fn parse_gauss(s: &str) -> Result<GaussQ, ParseRationalError> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let err = || ParseRationalError(s.to_string());
    let Some(body) = t.strip_suffix('i') else {
        return Ok(gq(parse_q(&t)?, Q::zero()));
    };
    // split at the last sign that is not the leading one
    let split = body.char_indices().skip(1).filter(|&(_, c)| c == '+' || c == '-').map(|(i, _)| i).last();
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("", body),
    };
    let im = match im {
        "" | "+" => Q::one(),
        "-" => -Q::one(),
        other => parse_q(other.trim_end_matches('*')).map_err(|_| err())?,
    };
    let re = if re.is_empty() { Q::zero() } else { parse_q(re)? };
    Ok(gq(re, im))
}

pub fn fmt_gauss(z: &GaussQ) -> String {
    if z.im.is_zero() {
        return fmt_q(&z.re);
    }
    let im = if z.im.is_one() {
        "i".to_string()
    } else if (-&z.im).is_one() {
        "-i".to_string()
    } else {
        format!("{}i", fmt_q(&z.im))
    };
    if z.re.is_zero() {
        im
    } else if im.starts_with('-') {
        format!("{}{}", fmt_q(&z.re), im)
    } else {
        format!("{}+{}", fmt_q(&z.re), im)
    }
}

pub fn norm_sqr(z: &GaussQ) -> Q {
    &z.re * &z.re + &z.im * &z.im
}

/// Exact modulus when it is rational.
pub fn rational_modulus(z: &GaussQ) -> Option<Q> {
    rational_sqrt(&norm_sqr(z))
}

pub fn rational_sqrt(x: &Q) -> Option<Q> {
    if x.is_negative() {
        return None;
    }
    let n = x.numer().sqrt();
    let d = x.denom().sqrt();
    if &(&n * &n) == x.numer() && &(&d * &d) == x.denom() {
        Some(Q::new(n, d))
    } else {
        None
    }
}

/// Splits a positive integer into `(s, k)` with `n = s * k^2` and `s` square-free.
fn square_free_split(n: &BigInt) -> (BigInt, BigInt) {
    let mut rest = n.clone();
    let mut sf = BigInt::one();
    let mut k = BigInt::one();
    let mut p = BigInt::from(2);
    while &p * &p <= rest {
        let mut e = 0u32;
        while (&rest % &p).is_zero() {
            rest /= &p;
            e += 1;
        }
        if e > 0 {
            k *= num::pow(p.clone(), (e / 2) as usize);
            if e % 2 == 1 {
                sf *= &p;
            }
        }
        p += 1;
    }
    sf *= rest;
    (sf, k)
}

/// A finite sum `sum c_s * sqrt(s)` over distinct square-free positive integers `s`.
///
/// Square roots of distinct square-free integers are linearly independent over
/// the rationals, so the normal form decides equality; ordering is decided by
/// refining rational enclosures until they separate.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct Surd {
    terms: BTreeMap<BigInt, Q>,
}

impl Surd {
    pub fn zero() -> Self {
        Surd::default()
    }

    pub fn rational(c: Q) -> Self {
        let mut s = Surd::zero();
        s.add_term(BigInt::one(), c);
        s
    }

    /// `sqrt(x)` for a non-negative rational `x`.
    pub fn sqrt(x: &Q) -> Self {
        assert!(!x.is_negative(), "square root of a negative rational");
        if x.is_zero() {
            return Surd::zero();
        }
        // sqrt(n/d) = sqrt(n*d)/d
        let nd = x.numer() * x.denom();
        let (sf, k) = square_free_split(&nd);
        let mut s = Surd::zero();
        s.add_term(sf, Q::new(k, x.denom().clone()));
        s
    }

    pub fn modulus(z: &GaussQ) -> Self {
        Surd::sqrt(&norm_sqr(z))
    }

    fn add_term(&mut self, s: BigInt, c: Q) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(s.clone()).or_insert_with(Q::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&s);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn to_rational(&self) -> Option<Q> {
        match self.terms.len() {
            0 => Some(Q::zero()),
            1 => self.terms.get(&BigInt::one()).cloned(),
            _ => None,
        }
    }

    pub fn scale(&self, c: &Q) -> Surd {
        let mut out = Surd::zero();
        for (s, v) in &self.terms {
            out.add_term(s.clone(), v * c);
        }
        out
    }

    /// Rational enclosure `[lo, hi]` with each root bracketed to `10^-digits`.
    fn enclosure(&self, digits: usize) -> (Q, Q) {
        let scale = num::pow(BigInt::from(10), digits);
        let mut lo = Q::zero();
        let mut hi = Q::zero();
        for (s, c) in &self.terms {
            let r = (s * &scale * &scale).sqrt();
            let a = Q::new(r.clone(), scale.clone());
            let b = Q::new(r + 1, scale.clone());
            if c.is_positive() {
                lo += c * &a;
                hi += c * &b;
            } else {
                lo += c * &b;
                hi += c * &a;
            }
        }
        (lo, hi)
    }

    pub fn signum(&self) -> Ordering {
        if self.is_zero() {
            return Ordering::Equal;
        }
        let mut digits = 8;
        loop {
            let (lo, hi) = self.enclosure(digits);
            if lo.is_positive() {
                return Ordering::Greater;
            }
            if hi.is_negative() {
                return Ordering::Less;
            }
            digits *= 2;
        }
    }

    /// Decimal approximation for display only.
    pub fn approx(&self) -> String {
        let (lo, _) = self.enclosure(12);
        let scaled = (lo * Q::from_integer(num::pow(BigInt::from(10), 9))).floor().to_integer();
        let neg = scaled.sign() == Sign::Minus;
        let abs = scaled.abs();
        let (ip, fp) = abs.div_rem(&num::pow(BigInt::from(10), 9));
        format!("{}{}.{:09}", if neg { "-" } else { "" }, ip, fp)
    }
}

impl std::ops::Add for &Surd {
    type Output = Surd;
    fn add(self, rhs: &Surd) -> Surd {
        let mut out = self.clone();
        for (s, c) in &rhs.terms {
            out.add_term(s.clone(), c.clone());
        }
        out
    }
}

impl std::ops::Sub for &Surd {
    type Output = Surd;
    fn sub(self, rhs: &Surd) -> Surd {
        let mut out = self.clone();
        for (s, c) in &rhs.terms {
            out.add_term(s.clone(), -c.clone());
        }
        out
    }
}

impl std::iter::Sum for Surd {
    fn sum<I: Iterator<Item = Surd>>(iter: I) -> Surd {
        iter.fold(Surd::zero(), |a, b| &a + &b)
    }
}

impl PartialOrd for Surd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Surd {
    fn cmp(&self, other: &Self) -> Ordering {
        (self - other).signum()
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(s, c)| if s.is_one() { fmt_q(c) } else { format!("{}*sqrt({})", fmt_q(c), s) })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl fmt::Debug for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Surd({self})")
    }
}

#[cfg(test)]
mod tests {
    #[test]
    fn gaussian_strings_round_trip() {
        for (txt, z) in [
            ("0", gi(0, 0)),
            ("i", gi(0, 1)),
            ("-i", gi(0, -1)),
            ("1+i", gi(1, 1)),
            ("-2-3i", gi(-2, -3)),
        ] {
            assert_eq!(parse_gauss(txt).unwrap(), z);
            assert_eq!(fmt_gauss(&z), txt);
        }
        let z = gq(qf(1, 2), qf(-3, 4));
        assert_eq!(fmt_gauss(&z), "1/2-3/4i");
        assert_eq!(parse_gauss("1/2-3/4i").unwrap(), z);
        assert!(parse_gauss("1+").is_err());
    }

    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_q("3/8").unwrap(), qf(3, 8));
        assert_eq!(parse_q("-0.25").unwrap(), qf(-1, 4));
        assert_eq!(parse_q("7").unwrap(), q(7));
        assert!(parse_q("1/0").is_err());
        assert!(parse_q("x").is_err());
    }

    #[test]
    fn modulus_of_pythagorean_values() {
        assert_eq!(rational_modulus(&gi(3, 4)), Some(q(5)));
        assert_eq!(rational_modulus(&gi(1, 1)), None);
        assert_eq!(Surd::modulus(&gi(1, 1)), Surd::sqrt(&q(2)));
    }

    #[test]
    fn surd_normal_form() {
        // sqrt(8) = 2 sqrt(2), sqrt(1/2) = sqrt(2)/2
        let a = Surd::sqrt(&q(8));
        let b = Surd::sqrt(&qf(1, 2)).scale(&q(4));
        assert_eq!(a, b);
        assert_eq!(Surd::sqrt(&qf(9, 4)).to_rational(), Some(qf(3, 2)));
    }

    #[test]
    fn surd_ordering() {
        let s2 = Surd::sqrt(&q(2));
        let s3 = Surd::sqrt(&q(3));
        assert!(s2 < s3);
        let lhs = &s2 + &s3;
        assert!(lhs > Surd::rational(qf(314, 100)));
        assert!(lhs < Surd::rational(qf(315, 100)));
        assert_eq!((&s2 - &s2).signum(), Ordering::Equal);
    }
}
