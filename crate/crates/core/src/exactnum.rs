//! Exact arithmetic over Q and over the norm-Euclidean imaginary quadratic
//! fields Q(sqrt(d)), d in {-1, -2, -3, -7, -11}.
//!
//! Field elements are stored on the rational basis {1, sqrt(d)} for every d;
//! integrality is tested against the ring basis {1, omega} with
//! omega = sqrt(d) when d = 2,3 mod 4 and omega = (1 + sqrt(d))/2 when
//! d = 1 mod 4.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Norm-Euclidean imaginary quadratic discriminants (squarefree part).
pub const EUCLIDEAN_D: [i64; 5] = [-1, -2, -3, -7, -11];

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `p`, `-p` or `p/q` into a reduced rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("invalid rational `{s}`"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
            let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
        None => Ok(Rational::from_integer(
            BigInt::from_str(s).map_err(|_| bad())?,
        )),
    }
}

/// `p/q` with `q > 0`, or plain `p` when the denominator is one.
pub fn format_rational(r: &Rational) -> String {
    r.to_string()
}

fn is_int(r: &Rational) -> bool {
    r.denom().is_one()
}

/// floor(sqrt(r)) for a nonnegative rational.
pub fn floor_sqrt(r: &Rational) -> BigInt {
    debug_assert!(!r.is_negative());
    // floor(sqrt(p/q)) = floor(isqrt(p*q) / q)
    let pq = r.numer() * r.denom();
    pq.sqrt().div_floor(r.denom())
}

/// An element a + b*sqrt(d) of an imaginary quadratic field.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FieldElem {
    d: i64,
    a: Rational,
    b: Rational,
}

impl FieldElem {
    pub fn new(d: i64, a: Rational, b: Rational) -> Self {
        FieldElem { d, a, b }
    }

    pub fn from_rational(d: i64, a: Rational) -> Self {
        FieldElem {
            d,
            a,
            b: Rational::zero(),
        }
    }

    pub fn from_int(d: i64, n: i64) -> Self {
        Self::from_rational(d, int(n))
    }

    pub fn zero(d: i64) -> Self {
        Self::from_int(d, 0)
    }

    pub fn one(d: i64) -> Self {
        Self::from_int(d, 1)
    }

    pub fn sqrt_d(d: i64) -> Self {
        FieldElem {
            d,
            a: Rational::zero(),
            b: Rational::one(),
        }
    }

    pub fn d(&self) -> i64 {
        self.d
    }

    /// Rational part.
    pub fn re(&self) -> &Rational {
        &self.a
    }

    /// Coefficient of sqrt(d).
    pub fn sqrt_coeff(&self) -> &Rational {
        &self.b
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.a.is_one() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn conj(&self) -> Self {
        FieldElem {
            d: self.d,
            a: self.a.clone(),
            b: -&self.b,
        }
    }

    /// a^2 - d b^2, nonnegative for imaginary fields.
    pub fn norm(&self) -> Rational {
        &self.a * &self.a - Rational::from_integer(BigInt::from(self.d)) * &self.b * &self.b
    }

    /// Tr_{F/Q} = 2a.
    pub fn trace(&self) -> Rational {
        &self.a * int(2)
    }

    pub fn scale(&self, r: &Rational) -> Self {
        FieldElem {
            d: self.d,
            a: &self.a * r,
            b: &self.b * r,
        }
    }

    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm();
        Some(self.conj().scale(&n.recip()))
    }

    pub fn div(&self, other: &Self) -> Option<Self> {
        other.inv().map(|i| self * &i)
    }

    /// Coordinates (m, n) with self = m + n*omega.
    pub fn omega_coords(&self) -> (Rational, Rational) {
        if self.d.rem_euclid(4) == 1 {
            let n = &self.b * int(2);
            let m = &self.a - &self.b;
            (m, n)
        } else {
            (self.a.clone(), self.b.clone())
        }
    }

    pub fn from_omega_coords(d: i64, m: Rational, n: Rational) -> Self {
        if d.rem_euclid(4) == 1 {
            // m + n(1 + sqrt d)/2
            let half = rat(1, 2);
            FieldElem {
                d,
                a: &m + &n * &half,
                b: n * half,
            }
        } else {
            FieldElem { d, a: m, b: n }
        }
    }

    /// Membership in O_F.
    pub fn is_integer(&self) -> bool {
        let (m, n) = self.omega_coords();
        is_int(&m) && is_int(&n)
    }

    /// Least positive integer D with D * self in O_F.
    pub fn denominator(&self) -> BigInt {
        let (m, n) = self.omega_coords();
        m.denom().lcm(n.denom())
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = FieldElem::one(self.d);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    fn check(&self, other: &Self) {
        assert_eq!(self.d, other.d, "field mismatch");
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.d;
        let coeff = |c: &Rational| {
            if c.is_one() {
                format!("sqrt({d})")
            } else {
                format!("{}*sqrt({d})", format_rational(c))
            }
        };
        match (self.a.is_zero(), self.b.is_zero(), self.b.is_negative()) {
            (_, true, _) => write!(f, "{}", format_rational(&self.a)),
            (true, false, false) => write!(f, "{}", coeff(&self.b)),
            (true, false, true) => write!(f, "-{}", coeff(&-&self.b)),
            (false, false, false) => write!(f, "{} + {}", format_rational(&self.a), coeff(&self.b)),
            (false, false, true) => {
                write!(f, "{} - {}", format_rational(&self.a), coeff(&-&self.b))
            }
        }
    }
}

impl fmt::Debug for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FieldElem {
    /// Parses `a`, `b*sqrt(d)`, `a + b*sqrt(d)` or `a - b*sqrt(d)`.
    /// A bare `sqrt(d)` means coefficient one.
    pub fn parse(s: &str, d: i64) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || Error::Parse(format!("invalid field element `{s}`"));
        let Some(pos) = t.find("sqrt(") else {
            return Ok(FieldElem::from_rational(d, parse_rational(&t)?));
        };
        let tail = &t[pos..];
        let close = tail.find(')').ok_or_else(bad)?;
        let dd: i64 = tail[5..close].parse().map_err(|_| bad())?;
        if dd != d {
            return Err(Error::FieldMismatch(dd, d));
        }
        if close + 1 != tail.len() {
            return Err(bad());
        }
        let head = &t[..pos];
        let head = head.strip_suffix('*').unwrap_or(head);
        // binary operator: first sign after a digit
        let bytes = head.as_bytes();
        let split = (1..bytes.len())
            .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && bytes[i - 1].is_ascii_digit());
        let (a_str, b_str) = match split {
            Some(i) => (&head[..i], &head[i..]),
            None => ("0", head),
        };
        let (negate, coeff) = match b_str.as_bytes().first() {
            Some(b'+') => (false, &b_str[1..]),
            Some(b'-') => (true, &b_str[1..]),
            _ => (false, b_str),
        };
        let b = match coeff {
            "" => Rational::one(),
            "-" => -Rational::one(),
            c => parse_rational(c)?,
        };
        let b = if negate { -b } else { b };
        let a = parse_rational(a_str)?;
        Ok(FieldElem { d, a, b })
    }
}

impl<'a> Add<&'a FieldElem> for &'a FieldElem {
    type Output = FieldElem;
    fn add(self, o: &'a FieldElem) -> FieldElem {
        self.check(o);
        FieldElem {
            d: self.d,
            a: &self.a + &o.a,
            b: &self.b + &o.b,
        }
    }
}

impl<'a> Sub<&'a FieldElem> for &'a FieldElem {
    type Output = FieldElem;
    fn sub(self, o: &'a FieldElem) -> FieldElem {
        self.check(o);
        FieldElem {
            d: self.d,
            a: &self.a - &o.a,
            b: &self.b - &o.b,
        }
    }
}

impl<'a> Mul<&'a FieldElem> for &'a FieldElem {
    type Output = FieldElem;
    fn mul(self, o: &'a FieldElem) -> FieldElem {
        self.check(o);
        let d = Rational::from_integer(BigInt::from(self.d));
        FieldElem {
            d: self.d,
            a: &self.a * &o.a + d * &self.b * &o.b,
            b: &self.a * &o.b + &self.b * &o.a,
        }
    }
}

impl Neg for &FieldElem {
    type Output = FieldElem;
    fn neg(self) -> FieldElem {
        FieldElem {
            d: self.d,
            a: -&self.a,
            b: -&self.b,
        }
    }
}

impl Add for FieldElem {
    type Output = FieldElem;
    fn add(self, o: FieldElem) -> FieldElem {
        &self + &o
    }
}

impl Sub for FieldElem {
    type Output = FieldElem;
    fn sub(self, o: FieldElem) -> FieldElem {
        &self - &o
    }
}

impl Mul for FieldElem {
    type Output = FieldElem;
    fn mul(self, o: FieldElem) -> FieldElem {
        &self * &o
    }
}

impl Neg for FieldElem {
    type Output = FieldElem;
    fn neg(self) -> FieldElem {
        -&self
    }
}

/// F = Q(sqrt(d)) with its ring of integers, inverse different and units.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImagQuadField {
    d: i64,
    delta: FieldElem,
    units: Vec<FieldElem>,
}

impl ImagQuadField {
    pub fn new(d: i64) -> Result<Self> {
        if !EUCLIDEAN_D.contains(&d) {
            return Err(Error::UnsupportedField(d));
        }
        let sqrt_d = FieldElem::sqrt_d(d);
        let delta = if d.rem_euclid(4) == 1 {
            sqrt_d.inv().unwrap()
        } else {
            sqrt_d.scale(&int(2)).inv().unwrap()
        };
        // norm-one elements of O_F: in omega coordinates both are bounded by 1
        let mut units = Vec::new();
        for m in -1..=1 {
            for n in -1..=1 {
                let x = FieldElem::from_omega_coords(d, int(m), int(n));
                if x.norm().is_one() {
                    units.push(x);
                }
            }
        }
        units.sort_by(|x, y| assoc_order(x, y));
        Ok(ImagQuadField { d, delta, units })
    }

    pub fn d(&self) -> i64 {
        self.d
    }

    pub fn omega(&self) -> FieldElem {
        FieldElem::from_omega_coords(self.d, int(0), int(1))
    }

    /// The inverse different generator: 1/(2 sqrt d) or 1/sqrt d.
    pub fn delta(&self) -> &FieldElem {
        &self.delta
    }

    pub fn units(&self) -> &[FieldElem] {
        &self.units
    }

    /// Units other than 1.
    pub fn nontrivial_units(&self) -> impl Iterator<Item = &FieldElem> {
        self.units.iter().filter(|u| !u.is_one())
    }

    pub fn elem(&self, a: Rational, b: Rational) -> FieldElem {
        FieldElem::new(self.d, a, b)
    }

    pub fn from_int(&self, n: i64) -> FieldElem {
        FieldElem::from_int(self.d, n)
    }

    pub fn zero(&self) -> FieldElem {
        FieldElem::zero(self.d)
    }

    pub fn one(&self) -> FieldElem {
        FieldElem::one(self.d)
    }

    pub fn is_unit(&self, x: &FieldElem) -> bool {
        x.is_integer() && x.norm().is_one()
    }

    /// Multiplicative order of a unit.
    pub fn unit_order(&self, u: &FieldElem) -> Option<usize> {
        if !self.is_unit(u) {
            return None;
        }
        let mut acc = u.clone();
        for k in 1..=self.units.len() {
            if acc.is_one() {
                return Some(k);
            }
            acc = &acc * u;
        }
        None
    }

    /// Order of the subgroup of units generated by `gens`.
    pub fn generated_subgroup_order(&self, gens: &[FieldElem]) -> usize {
        let mut group = vec![self.one()];
        let mut frontier = vec![self.one()];
        while let Some(x) = frontier.pop() {
            for g in gens {
                let y = &x * g;
                if !group.contains(&y) {
                    group.push(y.clone());
                    frontier.push(y);
                }
            }
        }
        group.len()
    }

    /// Euclidean division x = q*y + r with N(r) < N(y), for x, y in O_F.
    pub fn div_rem(&self, x: &FieldElem, y: &FieldElem) -> (FieldElem, FieldElem) {
        let z = x.div(y).expect("division by zero");
        let (m, n) = z.omega_coords();
        let mut best: Option<(FieldElem, FieldElem, Rational)> = None;
        for nn in [n.floor(), n.ceil()] {
            for mm in [m.floor(), m.ceil()] {
                let q = FieldElem::from_omega_coords(self.d, mm.clone(), nn.clone());
                let r = x - &(&q * y);
                let nr = r.norm();
                if best.as_ref().map_or(true, |(_, _, b)| nr < *b) {
                    best = Some((q, r, nr));
                }
            }
        }
        let (q, r, nr) = best.unwrap();
        debug_assert!(nr < y.norm(), "field is not norm-Euclidean");
        (q, r)
    }

    /// True when `y` divides `x` in O_F (y = 0 divides only 0).
    pub fn divides(&self, y: &FieldElem, x: &FieldElem) -> bool {
        if y.is_zero() {
            return x.is_zero();
        }
        x.div(y).unwrap().is_integer()
    }

    /// Canonical associate: among u*x for units u, the one with the largest
    /// rational part, ties broken by the largest sqrt(d) coefficient.
    pub fn normalize(&self, x: &FieldElem) -> FieldElem {
        if x.is_zero() {
            return x.clone();
        }
        self.units
            .iter()
            .map(|u| u * x)
            .min_by(assoc_order)
            .unwrap()
    }

    /// Generator of the ideal (x, y). Accepts fractional elements: a common
    /// rational denominator is cleared first.
    pub fn gcd(&self, x: &FieldElem, y: &FieldElem) -> FieldElem {
        let den = x.denominator().lcm(&y.denominator());
        let den_r = Rational::from_integer(den);
        let mut a = x.scale(&den_r);
        let mut b = y.scale(&den_r);
        while !b.is_zero() {
            let (_, r) = self.div_rem(&a, &b);
            a = b;
            b = r;
        }
        self.normalize(&a.scale(&den_r.recip()))
    }

    pub fn gcd_all<'a, I: IntoIterator<Item = &'a FieldElem>>(&self, xs: I) -> FieldElem {
        xs.into_iter().fold(self.zero(), |g, x| self.gcd(&g, x))
    }

    /// Associates a and b (both nonzero) generate the same ideal.
    pub fn associated(&self, a: &FieldElem, b: &FieldElem) -> bool {
        self.normalize(a) == self.normalize(b)
    }

    /// Nonzero divisors of `x` in O_F up to units, sorted by norm.
    pub fn divisors(&self, x: &FieldElem) -> Vec<FieldElem> {
        assert!(x.is_integer() && !x.is_zero());
        let nx = x.norm().to_integer();
        // |m|, |n| bounded through N(m + n omega) <= N(x)
        let bound = floor_sqrt(&(Rational::from_integer(nx.clone()) * int(4))) + BigInt::one();
        let bound = bound.to_i64().expect("divisor search bound");
        let mut out: Vec<FieldElem> = Vec::new();
        for n in -bound..=bound {
            for m in -bound..=bound {
                let y = FieldElem::from_omega_coords(self.d, int(m), int(n));
                if y.is_zero() {
                    continue;
                }
                let ny = y.norm().to_integer();
                if !nx.is_multiple_of(&ny) {
                    continue;
                }
                if self.divides(&y, x) {
                    let y = self.normalize(&y);
                    if !out.contains(&y) {
                        out.push(y);
                    }
                }
            }
        }
        out.sort_by(|a, b| a.norm().cmp(&b.norm()).then_with(|| assoc_order(a, b)));
        out
    }
}

/// Ordering used to pick canonical associates: larger rational part first,
/// then larger sqrt(d) coefficient.
fn assoc_order(x: &FieldElem, y: &FieldElem) -> Ordering {
    y.a.cmp(&x.a).then_with(|| y.b.cmp(&x.b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(d: i64) -> ImagQuadField {
        ImagQuadField::new(d).unwrap()
    }

    #[test]
    fn gaussian_field_data() {
        let k = f(-1);
        assert_eq!(k.delta(), &FieldElem::new(-1, int(0), rat(-1, 2)));
        // 1/(2 sqrt(-1)) = -sqrt(-1)/2
        assert_eq!(k.delta().scale(&int(2)) * FieldElem::sqrt_d(-1), k.one());
        assert_eq!(k.units().len(), 4);
    }

    #[test]
    fn eisenstein_field_data() {
        let k = f(-3);
        assert_eq!(k.delta() * &FieldElem::sqrt_d(-3), k.one());
        assert_eq!(k.units().len(), 6);
        for u in k.units() {
            assert!(u.norm().is_one());
            assert!((u * &u.conj()).is_one());
        }
    }

    #[test]
    fn unit_counts_match_norm_one_enumeration() {
        // independent enumeration on the {1, sqrt d} basis with half-integers
        for d in EUCLIDEAN_D {
            let mut count = 0;
            for a2 in -4i64..=4 {
                for b2 in -4i64..=4 {
                    let x = FieldElem::new(d, rat(a2, 2), rat(b2, 2));
                    if x.is_integer() && x.norm().is_one() {
                        count += 1;
                    }
                }
            }
            assert_eq!(count, f(d).units().len(), "d = {d}");
        }
    }

    #[test]
    fn rejects_non_euclidean() {
        assert_eq!(ImagQuadField::new(-5), Err(Error::UnsupportedField(-5)));
        assert_eq!(ImagQuadField::new(-19), Err(Error::UnsupportedField(-19)));
        assert!(ImagQuadField::new(3).is_err());
    }

    #[test]
    fn integrality() {
        assert!(!FieldElem::new(-1, rat(1, 2), rat(1, 2)).is_integer());
        assert!(FieldElem::new(-3, rat(1, 2), rat(1, 2)).is_integer());
        assert_eq!(f(-3).omega(), FieldElem::new(-3, rat(1, 2), rat(1, 2)));
        for d in EUCLIDEAN_D {
            assert!(FieldElem::from_int(d, 5).is_integer());
        }
    }

    #[test]
    fn gcd_examples() {
        let k = f(-1);
        let one_plus_i = FieldElem::new(-1, int(1), int(1));
        let g = k.gcd(&one_plus_i, &k.from_int(2));
        assert!(k.associated(&g, &one_plus_i));
        assert_eq!(g, one_plus_i);
        let x = FieldElem::new(-1, int(3), int(-2));
        assert_eq!(k.gcd(&k.zero(), &x), k.normalize(&x));
        assert_eq!(k.gcd(&k.from_int(3), &k.from_int(5)), k.one());
        assert_eq!(k.gcd(&k.zero(), &k.zero()), k.zero());
    }

    #[test]
    fn gcd_of_fractional_elements() {
        let k = f(-1);
        // (1/2, (1+i)/2) = (1/2)
        let g = k.gcd(&k.elem(rat(1, 2), int(0)), &k.elem(rat(1, 2), rat(1, 2)));
        assert_eq!(g, k.elem(rat(1, 2), int(0)));
    }

    #[test]
    fn divisors_of_two() {
        let k = f(-1);
        let ds = k.divisors(&k.from_int(2));
        assert_eq!(ds.len(), 3);
        assert_eq!(ds[0], k.one());
        assert!(k.associated(&ds[1], &k.elem(int(1), int(1))));
        let k2 = f(-2);
        assert_eq!(k2.divisors(&k2.from_int(2)).len(), 3);
        let k3 = f(-3);
        assert_eq!(k3.divisors(&k3.from_int(2)).len(), 2);
    }

    #[test]
    fn unit_orders() {
        let k = f(-1);
        let i = FieldElem::sqrt_d(-1);
        assert_eq!(k.unit_order(&i), Some(4));
        assert_eq!(k.unit_order(&k.from_int(-1)), Some(2));
        assert_eq!(k.generated_subgroup_order(&[k.from_int(-1)]), 2);
        assert_eq!(k.generated_subgroup_order(&[i]), 4);
        let k3 = f(-3);
        assert_eq!(k3.unit_order(&k3.omega()), Some(6));
    }

    #[test]
    fn display_and_parse() {
        let x = FieldElem::new(-2, rat(1, 2), rat(-3, 4));
        assert_eq!(x.to_string(), "1/2 - 3/4*sqrt(-2)");
        assert_eq!(FieldElem::parse(&x.to_string(), -2).unwrap(), x);
        assert_eq!(FieldElem::parse("1/2 - 3/4*sqrt(-2)", -2).unwrap(), x);
        assert_eq!(
            FieldElem::parse("-sqrt(-1)", -1).unwrap(),
            FieldElem::new(-1, int(0), int(-1))
        );
        assert_eq!(
            FieldElem::parse("5", -7).unwrap(),
            FieldElem::from_int(-7, 5)
        );
        assert_eq!(
            FieldElem::parse("-1/2*sqrt(-3)", -3).unwrap(),
            FieldElem::new(-3, int(0), rat(-1, 2))
        );
        assert!(FieldElem::parse("1 + sqrt(-2)", -1).is_err());
        assert!(FieldElem::parse("1/0", -1).is_err());
    }

    #[test]
    fn floor_sqrt_rational() {
        assert_eq!(floor_sqrt(&rat(9, 4)), BigInt::from(1));
        assert_eq!(floor_sqrt(&rat(4, 1)), BigInt::from(2));
        assert_eq!(floor_sqrt(&rat(99, 100)), BigInt::from(0));
    }
}
