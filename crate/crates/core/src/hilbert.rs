//! Real quadratic fields of class number one, the weight-`(k,k)` Hilbert Eisenstein
//! series as a two-variable eigenmeasure, and the theta series of a rotated square lattice.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};

use crate::arith::{is_prime, is_squarefree};
use crate::error::{domain, Error, Result};
use crate::measures::SphericalMeasure;
use crate::qseries::{Coeff, Exponent, Growth, MultiQSeries, Truncation};
use crate::Phase4;

const SUPPORTED: [u64; 3] = [5, 13, 17];

/// `Q(√D)` for a squarefree `D ≡ 1 mod 4` with class number one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadField {
    d: u64,
}

impl QuadField {
    pub fn new(d: u64) -> Result<QuadField> {
        if d < 2 || !is_squarefree(d) {
            return domain(format!("D = {d} is not a squarefree integer > 1"));
        }
        if !SUPPORTED.contains(&d) {
            return domain(format!("D = {d} is not among the supported class-number-one fields {SUPPORTED:?}"));
        }
        Ok(QuadField { d })
    }

    pub fn discriminant(&self) -> u64 {
        self.d
    }

    /// Whether the ring of integers is `Z[(1+√D)/2]` (always true for the supported fields).
    pub fn half_integral_basis(&self) -> bool {
        self.d % 4 == 1
    }

    /// `ω² = ω + c` with `c = (D−1)/4`.
    fn omega_const(&self) -> i128 {
        ((self.d - 1) / 4) as i128
    }

    fn int_norm(&self, x: (i128, i128)) -> i128 {
        x.0 * x.0 + x.0 * x.1 - self.omega_const() * x.1 * x.1
    }

    fn int_mul(&self, x: (i128, i128), y: (i128, i128)) -> (i128, i128) {
        let bd = x.1 * y.1;
        (x.0 * y.0 + bd * self.omega_const(), x.0 * y.1 + x.1 * y.0 + bd)
    }

    fn int_conj(&self, x: (i128, i128)) -> (i128, i128) {
        (x.0 + x.1, -x.1)
    }

    /// `x/y` when it is integral.
    fn int_div(&self, x: (i128, i128), y: (i128, i128)) -> Option<(i128, i128)> {
        let n = self.int_norm(y);
        let p = self.int_mul(x, self.int_conj(y));
        (p.0 % n == 0 && p.1 % n == 0).then(|| (p.0 / n, p.1 / n))
    }

    /// Coordinates of an element `u + v√D` in the basis `(1, ω)`, when integral.
    fn to_integral(&self, x: &FieldElement) -> Option<(i128, i128)> {
        let two = BigRational::from_integer(2.into());
        let b = &x.v * &two;
        let a = &x.u - &x.v;
        if !a.is_integer() || !b.is_integer() {
            return None;
        }
        Some((a.to_integer().to_i128()?, b.to_integer().to_i128()?))
    }

    fn from_integral(&self, x: (i128, i128)) -> FieldElement {
        let half = BigRational::new(1.into(), 2.into());
        let b = BigRational::from_integer(x.1.into());
        FieldElement { u: BigRational::from_integer(x.0.into()) + &b * &half, v: b * half }
    }

    /// A generator of some prime ideal of norm `p` (for `p` split or ramified).
    fn prime_element(&self, p: i128) -> Result<(i128, i128)> {
        let mut bound = 4i128;
        while bound < 1 << 20 {
            for b in 0..=bound {
                for a in -bound..=bound {
                    if self.int_norm((a, b)).abs() == p {
                        return Ok((a, b));
                    }
                }
            }
            bound *= 2;
        }
        domain(format!("no element of norm {p} found"))
    }

    fn multiply_element(&self, x: &FieldElement, y: &FieldElement) -> FieldElement {
        let d = BigRational::from_integer(self.d.into());
        FieldElement { u: &x.u * &y.u + &x.v * &y.v * d, v: &x.u * &y.v + &x.v * &y.u }
    }
}

/// `u + v√D` with exact rational coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElement {
    pub u: BigRational,
    pub v: BigRational,
}

impl FieldElement {
    pub fn new(u: BigRational, v: BigRational) -> FieldElement {
        FieldElement { u, v }
    }

    pub fn trace(&self) -> BigRational {
        &self.u + &self.u
    }

    pub fn norm(&self, f: &QuadField) -> BigRational {
        &self.u * &self.u - &self.v * &self.v * BigRational::from_integer(f.d.into())
    }

    pub fn conjugate(&self) -> FieldElement {
        FieldElement { u: self.u.clone(), v: -self.v.clone() }
    }

    pub fn mul(&self, other: &FieldElement, f: &QuadField) -> FieldElement {
        f.multiply_element(self, other)
    }

    /// `(σ₁, σ₂)` with `σ₁(√D) = +√D`.
    pub fn embeddings(&self, f: &QuadField) -> (f64, f64) {
        let u = self.u.to_f64().unwrap_or(f64::NAN);
        let v = self.v.to_f64().unwrap_or(f64::NAN) * (f.d as f64).sqrt();
        (u + v, u - v)
    }

    /// Both embeddings positive, decided exactly.
    pub fn is_totally_positive(&self, f: &QuadField) -> bool {
        self.u.is_positive() && self.norm(f).is_positive()
    }

    /// `(2σ₁, 2σ₂)` as exact exponents.
    pub fn doubled_embeddings(&self, f: &QuadField) -> Result<(Exponent, Exponent)> {
        let two = BigRational::from_integer(2.into());
        let e1 = Exponent::quadratic(&self.u * &two, &self.v * &two, f.d)?;
        Ok((e1.clone(), e1.conjugate()))
    }
}

/// Totally positive elements of the inverse different `(1/√D)O_F` with trace at most the bound,
/// sorted by trace and then by the first embedding.
pub fn enumerate_totally_positive(f: &QuadField, trace_bound: &BigRational) -> Result<Vec<FieldElement>> {
    if !trace_bound.is_positive() {
        return domain("trace bound must be positive");
    }
    // m = (a + bω)/√D has trace b and is totally positive iff (2a+b)² < b²D
    let t_max = trace_bound.floor().to_integer().to_i64().ok_or_else(|| Error::Domain("trace bound too large".into()))?;
    let d = f.d as i128;
    let mut out = Vec::new();
    for b in 1..=t_max as i128 {
        let reach = ((b * b * d) as f64).sqrt().ceil() as i128 + 1;
        let mut row: Vec<(i128, FieldElement)> = Vec::new();
        for s in -reach..=reach {
            // s = 2a + b must have the parity of b
            if (s - b).rem_euclid(2) != 0 || s * s >= b * b * d {
                continue;
            }
            let a = (s - b) / 2;
            let x = f.from_integral((a, b));
            let inv_sqrt = FieldElement::new(BigRational::zero(), BigRational::new(1.into(), (f.d as i64).into()));
            row.push((s, x.mul(&inv_sqrt, f)));
        }
        row.sort_by(|x, y| y.0.cmp(&x.0));
        out.extend(row.into_iter().map(|(_, m)| m));
    }
    Ok(out)
}

/// `Σ_{𝔫 | 𝔡m} N(𝔫)^s` for `m` in the inverse different.
pub fn ideal_sigma(s: u32, f: &QuadField, m: &FieldElement) -> Result<BigInt> {
    let sqrt_d = FieldElement::new(BigRational::zero(), BigRational::one());
    let x = f
        .to_integral(&m.mul(&sqrt_d, f))
        .ok_or_else(|| Error::Domain("𝔡·m is not an integral ideal".into()))?;
    sigma_of_integral(s, f, x)
}

fn sigma_of_integral(s: u32, f: &QuadField, x: (i128, i128)) -> Result<BigInt> {
    let n = f.int_norm(x).abs();
    if n == 0 {
        return domain("the zero ideal has infinitely many divisors");
    }
    let mut result = BigInt::one();
    let geometric = |q: i128, e: u32| -> BigInt {
        let qs = BigInt::from(q).pow(s);
        let mut acc = BigInt::zero();
        let mut term = BigInt::one();
        for _ in 0..=e {
            acc += &term;
            term *= &qs;
        }
        acc
    };
    for (p, e) in factor(n as u64) {
        let p = p as i128;
        if f.d as i128 % p == 0 {
            result *= geometric(p, e);
        } else if legendre(f.d as i64, p as i64) == -1 {
            result *= geometric(p * p, e / 2);
        } else {
            let pi = f.prime_element(p)?;
            let mut y = x;
            let mut e1 = 0;
            while let Some(z) = f.int_div(y, pi) {
                y = z;
                e1 += 1;
            }
            result *= geometric(p, e1) * geometric(p, e - e1);
        }
    }
    Ok(result)
}

fn legendre(a: i64, p: i64) -> i8 {
    if p == 2 {
        // D ≡ 1 mod 8 splits 2, D ≡ 5 mod 8 keeps it inert
        return if a.rem_euclid(8) == 1 { 1 } else { -1 };
    }
    crate::arith::kronecker_symbol(a, p)
}

fn factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        debug_assert!(is_prime(n));
        out.push((n, 1));
    }
    out
}

/// Which exponent convention the non-constant part uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExponentConvention {
    /// `e(tr(mτ))`, the one satisfying the transformation law.
    Trace,
    /// `e(tr(m²τ))`, as in the displayed expansion; kept to report the discrepancy.
    TraceOfSquare,
}

/// The Hilbert Eisenstein series with its fitted constant term.
#[derive(Debug, Clone)]
pub struct HilbertEisenstein {
    pub series: MultiQSeries,
    pub fitted_constant: f64,
    /// The constant fitted at the second point instead.
    pub check_constant: f64,
    /// Transformation residual at the second point with the first fit.
    pub residual: f64,
    pub k: u32,
}

impl HilbertEisenstein {
    /// The measure on `R^{2k} × R^{2k}` whose theta series is the form; Fourier eigenvalue 1.
    pub fn measure(&self) -> Result<SphericalMeasure> {
        Ok(SphericalMeasure::from_multi_series(self.series.clone(), vec![2 * self.k, 2 * self.k])?.with_eigen(Phase4::ONE))
    }
}

/// First fitting point `(2i, 2i)` and check point `(i√2, i√2)`.
pub const FIT_POINTS: [[Complex64; 2]; 2] = [
    [Complex64::new(0.0, 2.0), Complex64::new(0.0, 2.0)],
    [Complex64::new(0.0, std::f64::consts::SQRT_2), Complex64::new(0.0, std::f64::consts::SQRT_2)],
];

fn non_constant_part(f: &QuadField, k: u32, trace_bound: &BigRational) -> Result<Vec<(FieldElement, BigInt)>> {
    enumerate_totally_positive(f, trace_bound)?
        .into_iter()
        .map(|m| Ok((m.clone(), ideal_sigma(k - 1, f, &m)? * 4)))
        .collect()
}

fn partial(f: &QuadField, terms: &[(FieldElement, BigInt)], conv: ExponentConvention, tau: [Complex64; 2]) -> Complex64 {
    let two_pi_i = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
    terms
        .iter()
        .map(|(m, c)| {
            let (s1, s2) = m.embeddings(f);
            let (e1, e2) = match conv {
                ExponentConvention::Trace => (s1, s2),
                ExponentConvention::TraceOfSquare => (s1 * s1, s2 * s2),
            };
            (two_pi_i * (tau[0] * e1 + tau[1] * e2)).exp() * c.to_f64().unwrap_or(f64::NAN)
        })
        .sum()
}

fn fit_at(f: &QuadField, k: u32, terms: &[(FieldElement, BigInt)], conv: ExponentConvention, tau: [Complex64; 2]) -> Complex64 {
    let inv = [-1.0 / tau[0], -1.0 / tau[1]];
    let j = (tau[0] * tau[1]).powi(k as i32);
    (j * partial(f, terms, conv, tau) - partial(f, terms, conv, inv)) / (1.0 - j)
}

/// Constants fitted at the two points under a given convention.
pub fn fitted_constants(f: &QuadField, k: u32, trace_bound: &BigRational, conv: ExponentConvention) -> Result<(f64, f64)> {
    let terms = non_constant_part(f, k, trace_bound)?;
    let c1 = fit_at(f, k, &terms, conv, FIT_POINTS[0]);
    let c2 = fit_at(f, k, &terms, conv, FIT_POINTS[1]);
    Ok((c1.re, c2.re))
}

/// `c + 4 Σ_{m ∈ 𝔡⁻¹, m ≫ 0} σ_{k−1}(𝔡m) e(tr(mτ))`, with `c` fitted from the weight-`(k,k)` law.
pub fn hilbert_eisenstein(f: &QuadField, k: u32, trace_bound: &BigRational) -> Result<HilbertEisenstein> {
    if k < 2 || !k.is_multiple_of(2) {
        return domain("Hilbert Eisenstein series needs even k >= 2");
    }
    let terms = non_constant_part(f, k, trace_bound)?;
    let t = trace_bound.floor().to_integer().to_f64().unwrap_or(0.0);
    let horizon = 2.0 * t;
    let shells: BTreeMap<i64, f64> = terms.iter().fold(BTreeMap::new(), |mut acc, (m, c)| {
        let tr = m.trace().to_integer().to_i64().unwrap_or(0);
        *acc.entry(2 * tr).or_insert(0.0) += c.to_f64().unwrap_or(f64::INFINITY);
        acc
    });
    let p = 2.0 * k as f64 - 1.0;
    let growth = Growth::fit(shells.iter().map(|(l, c)| (*l as f64, *c)).chain([(0.0, 1.0)]), p, 2.0)?;
    // inversion maps Im 1/2 to the fit points; that is where truncation matters most
    let tail = growth.tail(horizon, 0.5, 2.0)?;
    if !(tail < 1e-10) {
        return Err(Error::Truncation { achieved: tail, requested: 1e-10 });
    }
    let c1 = fit_at(f, k, &terms, ExponentConvention::Trace, FIT_POINTS[0]);
    let c2 = fit_at(f, k, &terms, ExponentConvention::Trace, FIT_POINTS[1]);
    let tau = FIT_POINTS[1];
    let inv = [-1.0 / tau[0], -1.0 / tau[1]];
    let lhs = c1.re + partial(f, &terms, ExponentConvention::Trace, inv);
    let rhs = (tau[0] * tau[1]).powi(k as i32) * (c1.re + partial(f, &terms, ExponentConvention::Trace, tau));
    let residual = (lhs - rhs).norm() / lhs.norm().max(1.0);
    let growth = Growth::new(growth.c.max(c1.re.abs()), growth.p)?;
    let mut series_terms = vec![(vec![Exponent::zero(), Exponent::zero()], Coeff::float(Complex64::new(c1.re, 0.0)))];
    for (m, c) in &terms {
        let (e1, e2) = m.doubled_embeddings(f)?;
        series_terms.push((vec![e1, e2], Coeff::from_bigint(c.clone())));
    }
    let series = MultiQSeries::new(2, series_terms, growth, Truncation::Horizon { horizon, gap: 2.0 })?;
    Ok(HilbertEisenstein { series, fitted_constant: c1.re, check_constant: c2.re, residual, k })
}

/// Terms of `Σ_{x ∈ Z[λ]} e(K²x²τ/2 + K'²x'²τ'/2)` over `a² + b² ≤ r²`, where `λ` is a root of
/// `X² + AX − 1`; `conjugate_root` picks the other root.
fn rotated_lattice_terms(a_param: u64, radius: i64, conjugate_root: bool) -> Result<Vec<(Vec<Exponent>, Coeff)>> {
    if a_param == 0 {
        return domain("A must be positive");
    }
    let n = a_param * a_param + 4;
    let q = |x: i64, y: i64| BigRational::new(x.into(), y.into());
    // λ = −A/2 ± √n/2 as p + s√n
    let lam = (q(-(a_param as i64), 2), q(if conjugate_root { -1 } else { 1 }, 2));
    let mul = |x: &(BigRational, BigRational), y: &(BigRational, BigRational)| {
        (&x.0 * &y.0 + &x.1 * &y.1 * BigRational::from_integer(n.into()), &x.0 * &y.1 + &x.1 * &y.0)
    };
    let inv = |x: &(BigRational, BigRational)| {
        let nn = &x.0 * &x.0 - &x.1 * &x.1 * BigRational::from_integer(n.into());
        (&x.0 / &nn, -&x.1 / &nn)
    };
    let one_plus_sq = {
        let s = mul(&lam, &lam);
        (s.0 + BigRational::one(), s.1)
    };
    let k2 = inv(&one_plus_sq);
    let mut out = Vec::new();
    for a in -radius..=radius {
        for b in -radius..=radius {
            if a * a + b * b > radius * radius {
                continue;
            }
            let x = (BigRational::from_integer(a.into()) + BigRational::from_integer(b.into()) * &lam.0, BigRational::from_integer(b.into()) * &lam.1);
            let e = mul(&k2, &mul(&x, &x));
            let e1 = Exponent::quadratic(e.0, e.1, n)?;
            let e2 = e1.conjugate();
            out.push((vec![e1, e2], Coeff::one()));
        }
    }
    Ok(out)
}

pub const ROTATED_RADIUS: i64 = 40;

/// The theta series of the square lattice rotated onto `(Kx, K'x')`, and its measure on
/// `R¹ × R¹`, which is its own Fourier transform.
pub fn rotated_lattice_theta(a_param: u64) -> Result<(MultiQSeries, SphericalMeasure)> {
    rotated_lattice_theta_with(a_param, false)
}

pub fn rotated_lattice_theta_with(a_param: u64, conjugate_root: bool) -> Result<(MultiQSeries, SphericalMeasure)> {
    let terms = rotated_lattice_terms(a_param, ROTATED_RADIUS, conjugate_root)?;
    // the shell at total exponent n holds r₂(n) ≤ 4d(n) ≤ 8√n points
    let growth = Growth::new(8.0, 0.5)?;
    let horizon = (ROTATED_RADIUS * ROTATED_RADIUS) as f64;
    let series = MultiQSeries::new(2, terms, growth, Truncation::Horizon { horizon, gap: 1.0 })?;
    let measure = SphericalMeasure::from_multi_series(series.clone(), vec![1, 1])?.with_eigen(Phase4::ONE);
    Ok((series, measure))
}
