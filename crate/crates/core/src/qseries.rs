//! Truncated Fourier expansions `Σ c_m e(λ_m τ/2)` with exact exponents and certified
//! tail bounds.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::squarefree_decompose;
use crate::error::{domain, Error, Result};

/// Default exponent horizon `λ ≤ 400` used by the built-in constructors.
pub const DEFAULT_HORIZON: f64 = 400.0;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn rat_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// An exact real exponent `rat + irr·√surd` with `surd` squarefree.
///
/// Rational exponents have `surd = 1` and `irr = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Exponent {
    rat: BigRational,
    irr: BigRational,
    surd: u64,
}

fn sign_of(a: &BigRational, b: &BigRational, s: u64) -> Ordering {
    let zero = BigRational::zero();
    let sa = a.cmp(&zero);
    let sb = b.cmp(&zero);
    if sb == Ordering::Equal || s == 1 {
        return (a + b).cmp(&zero);
    }
    if sa == Ordering::Equal || sa == sb {
        return sb;
    }
    let a2 = a * a;
    let b2s = b * b * BigRational::from_integer(BigInt::from(s));
    match a2.cmp(&b2s) {
        Ordering::Greater => sa,
        Ordering::Less => sb,
        Ordering::Equal => Ordering::Equal,
    }
}

impl Exponent {
    fn normalized(rat: BigRational, irr: BigRational, surd: u64) -> Exponent {
        if irr.is_zero() || surd == 1 {
            Exponent { rat: rat + irr, irr: BigRational::zero(), surd: 1 }
        } else {
            Exponent { rat, irr, surd }
        }
    }

    pub fn zero() -> Exponent {
        Exponent::rational(BigRational::zero())
    }

    pub fn rational(q: BigRational) -> Exponent {
        Exponent { rat: q, irr: BigRational::zero(), surd: 1 }
    }

    pub fn integer(n: i64) -> Exponent {
        Exponent::rational(BigRational::from_integer(n.into()))
    }

    /// The exponent `q·√n`; `n` need not be squarefree.
    pub fn surd(q: BigRational, n: u64) -> Result<Exponent> {
        if n == 0 {
            return Ok(Exponent::zero());
        }
        let (s, t) = squarefree_decompose(n);
        Ok(Exponent::normalized(BigRational::zero(), q * BigRational::from_integer(t.into()), s))
    }

    /// The exponent `a + b·√n`; `n` need not be squarefree.
    pub fn quadratic(a: BigRational, b: BigRational, n: u64) -> Result<Exponent> {
        let e = Exponent::surd(b, n)?;
        Ok(Exponent::normalized(e.rat + a, e.irr, e.surd))
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.rat
    }

    pub fn surd_coefficient(&self) -> &BigRational {
        &self.irr
    }

    /// Squarefree radicand; 1 for rational exponents.
    pub fn surd_value(&self) -> u64 {
        self.surd
    }

    pub fn is_rational(&self) -> bool {
        self.surd == 1
    }

    /// True for exponents of the form `q·√surd` (including rationals).
    pub fn is_pure(&self) -> bool {
        self.surd == 1 || self.rat.is_zero()
    }

    /// The pair `(q, surd)` with value `q·√surd`, when the exponent is pure.
    pub fn as_pure(&self) -> Option<(BigRational, u64)> {
        if self.surd == 1 {
            Some((self.rat.clone(), 1))
        } else if self.rat.is_zero() {
            Some((self.irr.clone(), self.surd))
        } else {
            None
        }
    }

    pub fn to_f64(&self) -> f64 {
        rat_to_f64(&self.rat) + rat_to_f64(&self.irr) * (self.surd as f64).sqrt()
    }

    pub fn signum(&self) -> Ordering {
        sign_of(&self.rat, &self.irr, self.surd)
    }

    pub fn is_zero(&self) -> bool {
        self.rat.is_zero() && self.irr.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.signum() == Ordering::Less
    }

    fn common_surd(&self, other: &Exponent) -> Option<u64> {
        match (self.surd, other.surd) {
            (1, s) | (s, 1) => Some(s),
            (s, t) if s == t => Some(s),
            _ => None,
        }
    }

    pub fn checked_add(&self, other: &Exponent) -> Result<Exponent> {
        let s = self
            .common_surd(other)
            .ok_or_else(|| Error::Domain("cannot add exponents in different quadratic fields".into()))?;
        Ok(Exponent::normalized(&self.rat + &other.rat, &self.irr + &other.irr, s))
    }

    pub fn checked_sub(&self, other: &Exponent) -> Result<Exponent> {
        self.checked_add(&other.neg())
    }

    pub fn neg(&self) -> Exponent {
        Exponent { rat: -&self.rat, irr: -&self.irr, surd: self.surd }
    }

    pub fn scale(&self, q: &BigRational) -> Exponent {
        Exponent::normalized(&self.rat * q, &self.irr * q, self.surd)
    }

    /// Multiplies by `num/√div`, exact for pure exponents.
    pub fn scale_by_surd(&self, num: &BigRational, div: u64) -> Result<Exponent> {
        if div == 0 {
            return domain("surd divisor must be positive");
        }
        if div == 1 {
            return Ok(self.scale(num));
        }
        let Some((q, s)) = self.as_pure() else {
            return domain("rescaling a mixed exponent by a surd is not representable");
        };
        // q√s·num/√div = q·num·√(s·div)/div
        Exponent::surd(q * num / BigRational::from_integer(div.into()), s * div)
    }

    /// Exact product of two exponents, when it stays in one quadratic field.
    pub fn checked_mul(&self, other: &Exponent) -> Result<Exponent> {
        let s = self
            .common_surd(other)
            .ok_or_else(|| Error::Domain("cannot multiply exponents in different quadratic fields".into()))?;
        let sr = BigRational::from_integer(s.into());
        let rat = &self.rat * &other.rat + &self.irr * &other.irr * sr;
        let irr = &self.rat * &other.irr + &self.irr * &other.rat;
        Ok(Exponent::normalized(rat, irr, s))
    }

    /// Galois conjugate `rat − irr·√surd`.
    pub fn conjugate(&self) -> Exponent {
        Exponent { rat: self.rat.clone(), irr: -&self.irr, surd: self.surd }
    }
}

impl Ord for Exponent {
    fn cmp(&self, other: &Self) -> Ordering {
        if self == other {
            return Ordering::Equal;
        }
        if let Some(s) = self.common_surd(other) {
            let o = sign_of(&(&self.rat - &other.rat), &(&self.irr - &other.irr), s);
            if o != Ordering::Equal {
                return o;
            }
        } else if let Some(o) = self.to_f64().partial_cmp(&other.to_f64()) {
            if o != Ordering::Equal {
                return o;
            }
        }
        (&self.surd, &self.irr, &self.rat).cmp(&(&other.surd, &other.irr, &other.rat))
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.rat.is_zero(), self.surd) {
            (_, 1) => write!(f, "{}", self.rat),
            (true, s) => write!(f, "{}*sqrt({s})", self.irr),
            (false, s) => write!(f, "{} + {}*sqrt({s})", self.rat, self.irr),
        }
    }
}

/// A coefficient: exact Gaussian rational when available, complex float otherwise.
#[derive(Debug, Clone, PartialEq)]
pub enum Coeff {
    Exact { re: BigRational, im: BigRational },
    Float(Complex64),
}

impl Coeff {
    pub fn zero() -> Coeff {
        Coeff::from_integer(0)
    }

    pub fn one() -> Coeff {
        Coeff::from_integer(1)
    }

    pub fn from_integer(n: i64) -> Coeff {
        Coeff::Exact { re: BigRational::from_integer(n.into()), im: BigRational::zero() }
    }

    pub fn from_bigint(n: BigInt) -> Coeff {
        Coeff::Exact { re: BigRational::from_integer(n), im: BigRational::zero() }
    }

    pub fn from_rational(r: BigRational) -> Coeff {
        Coeff::Exact { re: r, im: BigRational::zero() }
    }

    pub fn exact(re: BigRational, im: BigRational) -> Coeff {
        Coeff::Exact { re, im }
    }

    pub fn float(z: Complex64) -> Coeff {
        Coeff::Float(z)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Coeff::Exact { .. })
    }

    pub fn to_c64(&self) -> Complex64 {
        match self {
            Coeff::Exact { re, im } => Complex64::new(rat_to_f64(re), rat_to_f64(im)),
            Coeff::Float(z) => *z,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Coeff::Exact { re, im } => re.is_zero() && im.is_zero(),
            Coeff::Float(z) => *z == Complex64::new(0.0, 0.0),
        }
    }

    pub fn abs_f64(&self) -> f64 {
        self.to_c64().norm()
    }

    pub fn add(&self, o: &Coeff) -> Coeff {
        match (self, o) {
            (Coeff::Exact { re: a, im: b }, Coeff::Exact { re: c, im: d }) => Coeff::Exact { re: a + c, im: b + d },
            _ => Coeff::Float(self.to_c64() + o.to_c64()),
        }
    }

    pub fn sub(&self, o: &Coeff) -> Coeff {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Coeff {
        match self {
            Coeff::Exact { re, im } => Coeff::Exact { re: -re, im: -im },
            Coeff::Float(z) => Coeff::Float(-z),
        }
    }

    pub fn mul(&self, o: &Coeff) -> Coeff {
        match (self, o) {
            (Coeff::Exact { re: a, im: b }, Coeff::Exact { re: c, im: d }) => {
                Coeff::Exact { re: a * c - b * d, im: a * d + b * c }
            }
            _ => Coeff::Float(self.to_c64() * o.to_c64()),
        }
    }

    pub fn scale(&self, q: &BigRational) -> Coeff {
        match self {
            Coeff::Exact { re, im } => Coeff::Exact { re: re * q, im: im * q },
            Coeff::Float(z) => Coeff::Float(z * rat_to_f64(q)),
        }
    }

    /// Multiplication by `i^n`, exact.
    pub fn mul_i_pow(&self, n: i64) -> Coeff {
        let mut c = self.clone();
        for _ in 0..n.rem_euclid(4) {
            c = match c {
                Coeff::Exact { re, im } => Coeff::Exact { re: -im, im: re },
                Coeff::Float(z) => Coeff::Float(z * Complex64::new(0.0, 1.0)),
            };
        }
        c
    }

    pub fn mul_c64(&self, z: Complex64) -> Coeff {
        Coeff::Float(self.to_c64() * z)
    }

    /// Textual form of a component: `p/q` for exact values, a float literal otherwise.
    pub fn component_strings(&self) -> (String, String) {
        match self {
            Coeff::Exact { re, im } => (re.to_string(), im.to_string()),
            Coeff::Float(z) => (format!("{:e}", z.re), format!("{:e}", z.im)),
        }
    }

    /// Parses the output of [`Coeff::component_strings`].
    pub fn parse_components(re: &str, im: &str) -> Result<Coeff> {
        match (parse_rational(re), parse_rational(im)) {
            (Ok(a), Ok(b)) => Ok(Coeff::Exact { re: a, im: b }),
            _ => {
                let a: f64 = re.trim().parse().map_err(|_| Error::Parse(format!("bad coefficient {re:?}")))?;
                let b: f64 = im.trim().parse().map_err(|_| Error::Parse(format!("bad coefficient {im:?}")))?;
                Ok(Coeff::Float(Complex64::new(a, b)))
            }
        }
    }
}

/// Parses `p` or `p/q` as an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let n: BigInt = n.trim().parse().map_err(|_| bad())?;
    let d: BigInt = d.trim().parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(n, d))
}

/// A growth certificate `|c_m| ≤ C(1+λ_m)^p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Growth {
    pub c: f64,
    pub p: f64,
}

impl Growth {
    pub fn new(c: f64, p: f64) -> Result<Growth> {
        if !(c > 0.0 && c.is_finite() && p >= 0.0 && p.is_finite()) {
            return domain("growth certificate needs C > 0 and p >= 0");
        }
        Ok(Growth { c, p })
    }

    pub fn bound(&self, lambda: f64) -> f64 {
        self.c * (1.0 + lambda).powf(self.p)
    }

    fn admits(&self, lambda: f64, abs: f64) -> bool {
        abs <= self.bound(lambda) * (1.0 + 1e-12)
    }

    /// Smallest certificate with exponent `p` covering the given `(λ, |c|)` pairs,
    /// inflated by `safety`.
    pub fn fit(points: impl IntoIterator<Item = (f64, f64)>, p: f64, safety: f64) -> Result<Growth> {
        let mut c: f64 = 1e-300;
        for (l, a) in points {
            c = c.max(a / (1.0 + l).powf(p));
        }
        Growth::new(c * safety, p)
    }

    /// Tail bound `C(1+H)^p e^{−πHt} / (1 − e^{−πgt/2})` for a series with terms of
    /// modulus `e^{−πλt}` past horizon `H` and exponent spacing `g`.
    pub fn tail(&self, horizon: f64, t: f64, gap: f64) -> Result<f64> {
        if t <= 0.0 {
            return domain("tail bound requires Im τ > 0");
        }
        if horizon < 2.0 * self.p / (PI * t) {
            return Ok(f64::INFINITY);
        }
        // sup_{λ>H} (1+λ)^p e^{−πλt/2} times Σ_j e^{−π(H+jg)t/2}
        Ok(self.bound(horizon) * (-PI * horizon * t).exp() / (1.0 - (-PI * gap * t / 2.0).exp()))
    }
}

/// Where a truncated series stops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Truncation {
    /// Every exponent `≤ horizon` is present; later exponents lie on a lattice of
    /// spacing at least `gap`.
    Horizon { horizon: f64, gap: f64 },
    /// The series is a finite sum; there is no tail.
    Complete,
}

impl Truncation {
    pub fn horizon(&self) -> f64 {
        match self {
            Truncation::Horizon { horizon, .. } => *horizon,
            Truncation::Complete => f64::INFINITY,
        }
    }

    fn tail(&self, growth: &Growth, t: f64) -> Result<f64> {
        match self {
            Truncation::Horizon { horizon, gap } => growth.tail(*horizon, t, *gap),
            Truncation::Complete => Ok(0.0),
        }
    }
}

/// A truncated expansion `Σ c_m e(λ_m τ/2)` in one variable.
#[derive(Debug, Clone, PartialEq)]
pub struct QSeries {
    terms: Vec<(Exponent, Coeff)>,
    surd: u64,
    growth: Growth,
    truncation: Truncation,
}

fn exact_gap(exps: &[&Exponent]) -> Option<f64> {
    let first = exps.first()?;
    let (q0, s) = first.as_pure()?;
    let mut g = BigRational::zero();
    for e in exps.iter().skip(1) {
        let (q, s2) = e.as_pure()?;
        if s2 != s && !q.is_zero() {
            return None;
        }
        g = rational_gcd(&g, &(q - &q0));
    }
    if g.is_zero() {
        return None;
    }
    Some(rat_to_f64(&g.abs()) * (s as f64).sqrt())
}

pub(crate) fn rational_gcd(a: &BigRational, b: &BigRational) -> BigRational {
    if a.is_zero() {
        return b.abs();
    }
    if b.is_zero() {
        return a.abs();
    }
    let den = a.denom().lcm(b.denom());
    let an = a.numer() * (&den / a.denom());
    let bn = b.numer() * (&den / b.denom());
    BigRational::new(an.gcd(&bn), den)
}

impl QSeries {
    /// Builds a series, checking ordering, the common surd and the growth certificate.
    ///
    /// For a horizon truncation the exponent gap is taken from `gap`, or computed as the
    /// lattice spacing of the stored exponents when `None`.
    pub fn new(terms: Vec<(Exponent, Coeff)>, growth: Growth, horizon: Option<f64>, gap: Option<f64>) -> Result<QSeries> {
        let mut surd = 1u64;
        for (i, (e, c)) in terms.iter().enumerate() {
            if e.is_negative() {
                return domain(format!("negative exponent {e}"));
            }
            if i > 0 && terms[i - 1].0 >= *e {
                return domain("exponents must be strictly increasing");
            }
            if !e.is_pure() {
                return domain("single-variable series need exponents of the form q·√surd");
            }
            if e.surd_value() != 1 {
                if surd != 1 && surd != e.surd_value() {
                    return domain("all exponents must share one surd");
                }
                surd = e.surd_value();
            }
            if !growth.admits(e.to_f64(), c.abs_f64()) {
                return domain(format!("coefficient at λ={e} violates the growth certificate"));
            }
        }
        let truncation = match horizon {
            None => Truncation::Complete,
            Some(h) => {
                if let Some((last, _)) = terms.last() {
                    if last.to_f64() > h * (1.0 + 1e-12) {
                        return domain("term beyond the declared horizon");
                    }
                }
                let exps: Vec<&Exponent> = terms.iter().map(|t| &t.0).collect();
                let g = match gap {
                    Some(g) => g,
                    None => exact_gap(&exps).ok_or_else(|| Error::Domain("cannot infer exponent gap".into()))?,
                };
                if !(g > 0.0) {
                    return domain("exponent gap must be positive");
                }
                Truncation::Horizon { horizon: h, gap: g }
            }
        };
        Ok(QSeries { terms, surd, growth, truncation })
    }

    /// A finite series from unordered terms; equal exponents are merged and zeros dropped.
    pub fn finite(terms: impl IntoIterator<Item = (Exponent, Coeff)>) -> Result<QSeries> {
        let mut map: BTreeMap<Exponent, Coeff> = BTreeMap::new();
        for (e, c) in terms {
            let slot = map.entry(e).or_insert_with(Coeff::zero);
            *slot = slot.add(&c);
        }
        let terms: Vec<_> = map.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        let growth = Growth::fit(terms.iter().map(|(e, c)| (e.to_f64(), c.abs_f64())), 0.0, 1.0)?;
        QSeries::new(terms, growth, None, None)
    }

    pub fn constant(c: Coeff) -> QSeries {
        QSeries::finite([(Exponent::zero(), c)]).expect("constant series")
    }

    /// A classical expansion `Σ_{m≥0} a_m e(mτ)`, stored with `λ = 2m`; all `m ≤ horizon/2`
    /// must be supplied.
    pub fn from_classical(coeffs: &[Coeff], growth: Growth, horizon: f64) -> Result<QSeries> {
        let m_max = (horizon / 2.0).floor() as usize;
        if coeffs.len() < m_max + 1 {
            return domain("not enough coefficients for the horizon");
        }
        let terms = coeffs
            .iter()
            .take(m_max + 1)
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(m, c)| (Exponent::integer(2 * m as i64), c.clone()))
            .collect();
        QSeries::new(terms, growth, Some(horizon), Some(2.0))
    }

    pub fn terms(&self) -> &[(Exponent, Coeff)] {
        &self.terms
    }

    pub fn surd(&self) -> u64 {
        self.surd
    }

    pub fn growth(&self) -> Growth {
        self.growth
    }

    pub fn truncation(&self) -> Truncation {
        self.truncation
    }

    pub fn horizon(&self) -> f64 {
        self.truncation.horizon()
    }

    /// The coefficient at an exponent, zero if absent.
    pub fn coeff(&self, e: &Exponent) -> Coeff {
        self.terms
            .binary_search_by(|(x, _)| x.cmp(e))
            .map(|i| self.terms[i].1.clone())
            .unwrap_or_else(|_| Coeff::zero())
    }

    /// Coefficient of `e(mτ)`, i.e. at `λ = 2m`.
    pub fn classical_coeff(&self, m: u64) -> Coeff {
        self.coeff(&Exponent::integer(2 * m as i64))
    }

    /// Certified bound on the omitted tail at `Im τ = t`.
    pub fn tail_bound(&self, t: f64) -> Result<f64> {
        self.truncation.tail(&self.growth, t)
    }

    /// Partial sum at `τ` and a certified tail bound; errors if the bound exceeds `tol`.
    pub fn evaluate(&self, tau: Complex64, tol: f64) -> Result<(Complex64, f64)> {
        if tau.im <= 0.0 {
            return domain("evaluation requires Im τ > 0");
        }
        let tail = self.tail_bound(tau.im)?;
        if tail > tol {
            return Err(Error::Truncation { achieved: tail, requested: tol });
        }
        Ok((self.partial_sum(tau), tail))
    }

    /// The partial sum without tail certification.
    pub fn partial_sum(&self, tau: Complex64) -> Complex64 {
        let i_pi_tau = Complex64::new(0.0, PI) * tau;
        self.terms.iter().map(|(e, c)| c.to_c64() * (i_pi_tau * e.to_f64()).exp()).sum()
    }

    fn lowest(&self) -> f64 {
        self.terms.first().map(|t| t.0.to_f64()).unwrap_or(f64::INFINITY)
    }

    fn gap(&self) -> Option<f64> {
        match self.truncation {
            Truncation::Horizon { gap, .. } => Some(gap),
            Truncation::Complete => {
                let exps: Vec<&Exponent> = self.terms.iter().map(|t| &t.0).collect();
                exact_gap(&exps)
            }
        }
    }

    /// Cauchy product truncated at `horizon`.
    pub fn multiply(&self, other: &QSeries, horizon: f64) -> Result<QSeries> {
        if self.surd != other.surd && self.surd != 1 && other.surd != 1 {
            return domain("cannot multiply series with different surds");
        }
        let valid = (self.horizon() + other.lowest()).min(other.horizon() + self.lowest());
        let complete = valid.is_infinite();
        let h = horizon.min(valid);
        let mut map: BTreeMap<Exponent, Coeff> = BTreeMap::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e = e1.checked_add(e2)?;
                if !complete && e.to_f64() > h * (1.0 + 1e-12) {
                    continue;
                }
                let slot = map.entry(e).or_insert_with(Coeff::zero);
                *slot = slot.add(&c1.mul(c2));
            }
        }
        let terms: Vec<_> = map.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        let g_self = self.gap().unwrap_or(1.0);
        let count = 1f64.max(1.0 / g_self);
        let growth = Growth::new(self.growth.c * other.growth.c * count, self.growth.p + other.growth.p + 1.0)?;
        if complete && horizon.is_infinite() {
            return QSeries::new(terms, growth, None, None);
        }
        let gap = match (self.gap(), other.gap()) {
            (Some(a), Some(b)) => a.min(b),
            (Some(a), None) | (None, Some(a)) => a,
            (None, None) => 1.0,
        };
        let gap = exact_gap(&terms.iter().map(|t| &t.0).collect::<Vec<_>>()).map_or(gap, |g| g.min(gap));
        let h = if h.is_finite() { h } else { terms.last().map_or(0.0, |t| t.0.to_f64()) };
        QSeries::new(terms, growth, Some(h), Some(gap))
    }

    /// `n`-fold product.
    pub fn power(&self, n: u32, horizon: f64) -> Result<QSeries> {
        if n == 0 {
            return domain("power requires n >= 1");
        }
        let mut acc = self.clone();
        for _ in 1..n {
            acc = acc.multiply(self, horizon)?;
        }
        Ok(acc)
    }

    /// The series of `τ ↦ f(num·τ/√surd_div)`.
    pub fn rescale_argument(&self, num: &BigRational, surd_div: u64) -> Result<QSeries> {
        if !num.is_positive() {
            return domain("rescaling factor must be positive");
        }
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| Ok((e.scale_by_surd(num, surd_div)?, c.clone())))
            .collect::<Result<Vec<_>>>()?;
        let s = rat_to_f64(num) / (surd_div as f64).sqrt();
        let growth = Growth::new(self.growth.c * 1f64.max(1.0 / s).powf(self.growth.p), self.growth.p)?;
        match self.truncation {
            Truncation::Complete => QSeries::new(terms, growth, None, None),
            Truncation::Horizon { horizon, gap } => QSeries::new(terms, growth, Some(horizon * s), Some(gap * s)),
        }
    }

    /// Multiplies every coefficient by a constant.
    pub fn scale(&self, c: &Coeff) -> Result<QSeries> {
        let terms: Vec<_> = self.terms.iter().map(|(e, x)| (e.clone(), x.mul(c))).collect();
        let growth = Growth::new(self.growth.c * c.abs_f64().max(1e-300), self.growth.p)?;
        Ok(QSeries { terms, surd: self.surd, growth, truncation: self.truncation })
    }

    /// CSV rows `exponent_numerator,exponent_denominator,surd,coeff_re,coeff_im`.
    pub fn to_csv(&self) -> Result<String> {
        let mut out = String::from("exponent_numerator,exponent_denominator,surd,coeff_re,coeff_im\n");
        for (e, c) in &self.terms {
            let (q, s) = e.as_pure().ok_or_else(|| Error::Domain("mixed exponent in CSV export".into()))?;
            let (re, im) = c.component_strings();
            out.push_str(&format!("{},{},{},{},{}\n", q.numer(), q.denom(), s, re, im));
        }
        Ok(out)
    }

    /// Parses CSV rows written by [`QSeries::to_csv`] into exponent/coefficient pairs.
    pub fn terms_from_csv(text: &str) -> Result<Vec<(Exponent, Coeff)>> {
        let mut out = Vec::new();
        // coefficient tables carry a leading `m` column, which is redundant with the exponent
        let skip = usize::from(text.lines().next().is_some_and(|h| h.starts_with("m,")));
        for (n, line) in text.lines().enumerate() {
            if n == 0 || line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').skip(skip).collect();
            if f.len() != 5 {
                return Err(Error::Parse(format!("line {}: expected 5 fields", n + 1)));
            }
            let num: BigInt = f[0].trim().parse().map_err(|_| Error::Parse(format!("line {}: numerator", n + 1)))?;
            let den: BigInt = f[1].trim().parse().map_err(|_| Error::Parse(format!("line {}: denominator", n + 1)))?;
            let surd: u64 = f[2].trim().parse().map_err(|_| Error::Parse(format!("line {}: surd", n + 1)))?;
            if den.is_zero() {
                return Err(Error::Parse(format!("line {}: zero denominator", n + 1)));
            }
            out.push((Exponent::surd(BigRational::new(num, den), surd)?, Coeff::parse_components(f[3], f[4])?));
        }
        Ok(out)
    }
}

/// Expansion of `∏_d η(dτ)^{r_d}` with `η(τ) = e(τ/24)∏(1−e(mτ))`, stored with
/// exponents `λ = Σ d·r_d/12 + 2n`.
pub fn eta_product(exponents: &BTreeMap<u64, i64>, horizon: f64) -> Result<QSeries> {
    if exponents.keys().any(|d| *d == 0) {
        return domain("eta product periods must be positive");
    }
    let lead: BigRational = exponents
        .iter()
        .map(|(d, r)| rat(*d as i64 * *r, 12))
        .fold(BigRational::zero(), |a, b| a + b);
    if lead.is_negative() {
        return domain("eta product has a negative leading exponent");
    }
    let lead_f = rat_to_f64(&lead);
    if lead_f > horizon {
        return domain("horizon too small to contain the leading exponent");
    }
    let n_max = ((horizon - lead_f) / 2.0).floor() as usize;
    let mut series = vec![BigInt::zero(); n_max + 1];
    series[0] = BigInt::one();
    for (&d, &r) in exponents {
        if r == 0 {
            continue;
        }
        let d = d as usize;
        for m in 1..=n_max / d {
            let step = m * d;
            for _ in 0..r.unsigned_abs() {
                if r > 0 {
                    // multiply by (1 - q^step)
                    for n in (step..=n_max).rev() {
                        let t = series[n - step].clone();
                        series[n] -= t;
                    }
                } else {
                    // divide by (1 - q^step)
                    for n in step..=n_max {
                        let t = series[n - step].clone();
                        series[n] += t;
                    }
                }
            }
        }
    }
    let weight: i64 = exponents.values().sum();
    let p = (weight as f64 / 2.0).max(0.0) + 1.0;
    let terms: Vec<(Exponent, Coeff)> = series
        .into_iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(n, c)| (Exponent::rational(&lead + rat(2 * n as i64, 1)), Coeff::from_bigint(c)))
        .collect();
    let growth = Growth::fit(terms.iter().map(|(e, c)| (e.to_f64(), c.abs_f64())), p, 2.0)?;
    QSeries::new(terms, growth, Some(horizon), Some(2.0))
}

/// A truncated expansion `Σ c e(λ̄·τ̄/2)` in several variables.
///
/// The growth certificate bounds the sum of `|c|` over each shell of equal total
/// exponent `s = Σ λ_i`, and the truncation horizon refers to `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiQSeries {
    vars: usize,
    terms: Vec<(Vec<Exponent>, Coeff)>,
    growth: Growth,
    truncation: Truncation,
}

impl MultiQSeries {
    /// Builds a series from unordered terms; equal exponent vectors are merged.
    pub fn new(vars: usize, terms: Vec<(Vec<Exponent>, Coeff)>, growth: Growth, truncation: Truncation) -> Result<MultiQSeries> {
        let mut map: BTreeMap<Vec<Exponent>, Coeff> = BTreeMap::new();
        for (e, c) in terms {
            if e.len() != vars {
                return domain("exponent vector has the wrong length");
            }
            if e.iter().any(|x| x.is_negative()) {
                return domain("negative exponent in multi-variable series");
            }
            let slot = map.entry(e).or_insert_with(Coeff::zero);
            *slot = slot.add(&c);
        }
        let terms: Vec<_> = map.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        let mut shells: BTreeMap<i64, (f64, f64)> = BTreeMap::new();
        for (e, c) in &terms {
            let s: f64 = e.iter().map(Exponent::to_f64).sum();
            let key = (s * 1e6).round() as i64;
            let slot = shells.entry(key).or_insert((s, 0.0));
            slot.1 += c.abs_f64();
        }
        for (s, total) in shells.values() {
            if !growth.admits(*s, *total) {
                return domain(format!("shell at total exponent {s} violates the growth certificate"));
            }
        }
        Ok(MultiQSeries { vars, terms, growth, truncation })
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn terms(&self) -> &[(Vec<Exponent>, Coeff)] {
        &self.terms
    }

    pub fn growth(&self) -> Growth {
        self.growth
    }

    pub fn truncation(&self) -> Truncation {
        self.truncation
    }

    pub fn coeff(&self, e: &[Exponent]) -> Coeff {
        self.terms
            .binary_search_by(|(x, _)| x.as_slice().cmp(e))
            .map(|i| self.terms[i].1.clone())
            .unwrap_or_else(|_| Coeff::zero())
    }

    pub fn tail_bound(&self, taus: &[Complex64]) -> Result<f64> {
        let t = taus.iter().map(|z| z.im).fold(f64::INFINITY, f64::min);
        self.truncation.tail(&self.growth, t)
    }

    pub fn partial_sum(&self, taus: &[Complex64]) -> Result<Complex64> {
        if taus.len() != self.vars {
            return domain("wrong number of variables");
        }
        let i_pi = Complex64::new(0.0, PI);
        Ok(self
            .terms
            .iter()
            .map(|(e, c)| {
                let arg: Complex64 = e.iter().zip(taus).map(|(l, t)| t * l.to_f64()).sum();
                c.to_c64() * (i_pi * arg).exp()
            })
            .sum())
    }

    pub fn evaluate(&self, taus: &[Complex64], tol: f64) -> Result<(Complex64, f64)> {
        if taus.iter().any(|t| t.im <= 0.0) {
            return domain("evaluation requires Im τ_i > 0");
        }
        let tail = self.tail_bound(taus)?;
        if tail > tol {
            return Err(Error::Truncation { achieved: tail, requested: tol });
        }
        Ok((self.partial_sum(taus)?, tail))
    }
}
