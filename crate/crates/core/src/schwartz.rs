//! Polynomial-times-Gaussian test functions on the line and radial ones on `R^k`,
//! closed under derivatives and the Fourier transform `φ̂(y) = ∫ φ(x) e(−xy) dx`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::arith::principal_sqrt;
use crate::error::{domain, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

fn trim(mut p: Vec<Complex64>) -> Vec<Complex64> {
    while p.len() > 1 && p.last().is_some_and(|c| *c == Complex64::new(0.0, 0.0)) {
        p.pop();
    }
    if p.is_empty() {
        p.push(Complex64::new(0.0, 0.0));
    }
    p
}

fn horner(p: &[Complex64], x: Complex64) -> Complex64 {
    p.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * x + c)
}

fn poly_add(p: &[Complex64], q: &[Complex64]) -> Vec<Complex64> {
    let n = p.len().max(q.len());
    (0..n)
        .map(|i| p.get(i).copied().unwrap_or_default() + q.get(i).copied().unwrap_or_default())
        .collect()
}

fn poly_scale(p: &[Complex64], c: Complex64) -> Vec<Complex64> {
    p.iter().map(|x| x * c).collect()
}

fn poly_derivative(p: &[Complex64]) -> Vec<Complex64> {
    p.iter().enumerate().skip(1).map(|(n, c)| c * n as f64).collect()
}

fn poly_shift(p: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0)];
    out.extend_from_slice(p);
    out
}

/// Relative closeness of two coefficient lists.
fn polys_close(p: &[Complex64], q: &[Complex64], rel: f64) -> bool {
    let scale = p.iter().chain(q).map(|c| c.norm()).fold(0.0, f64::max).max(1e-300);
    let n = p.len().max(q.len());
    (0..n).all(|i| {
        let a = p.get(i).copied().unwrap_or_default();
        let b = q.get(i).copied().unwrap_or_default();
        (a - b).norm() <= rel * scale
    })
}

/// Parity of a function or distribution on the line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of_degree(n: usize) -> Parity {
        if n.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// `x ↦ P(x)·e^{−πax²}` with `Re a > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyGaussian {
    poly: Vec<Complex64>,
    a: Complex64,
}

impl PolyGaussian {
    pub fn new(poly: Vec<Complex64>, a: Complex64) -> Result<PolyGaussian> {
        if !(a.re > 0.0) {
            return domain("Gaussian parameter needs Re a > 0");
        }
        let poly = trim(poly);
        if poly.iter().all(|c| c.norm() == 0.0) {
            return domain("polynomial factor must be nonzero");
        }
        Ok(PolyGaussian { poly, a })
    }

    /// Real-coefficient convenience constructor.
    pub fn real(poly: &[f64], a: f64) -> Result<PolyGaussian> {
        PolyGaussian::new(poly.iter().map(|c| Complex64::new(*c, 0.0)).collect(), Complex64::new(a, 0.0))
    }

    pub fn poly(&self) -> &[Complex64] {
        &self.poly
    }

    pub fn a(&self) -> Complex64 {
        self.a
    }

    pub fn degree(&self) -> usize {
        self.poly.len() - 1
    }

    pub fn evaluate(&self, x: f64) -> Complex64 {
        horner(&self.poly, Complex64::new(x, 0.0)) * (-PI * self.a * x * x).exp()
    }

    fn derivative_once(&self) -> PolyGaussian {
        // (P' − 2πa x P) e^{−πax²}
        let shifted = poly_scale(&poly_shift(&self.poly), -2.0 * PI * self.a);
        PolyGaussian { poly: trim(poly_add(&poly_derivative(&self.poly), &shifted)), a: self.a }
    }

    /// The `j`-th derivative, exactly within the algebra.
    pub fn derivative(&self, j: usize) -> PolyGaussian {
        (0..j).fold(self.clone(), |f, _| f.derivative_once())
    }

    /// `x ↦ x·φ(x)`.
    pub fn mul_x(&self) -> PolyGaussian {
        PolyGaussian { poly: poly_shift(&self.poly), a: self.a }
    }

    pub fn scale(&self, c: Complex64) -> PolyGaussian {
        PolyGaussian { poly: trim(poly_scale(&self.poly, c)), a: self.a }
    }

    /// Fourier transform: `e^{−πax²} ↦ a^{−1/2} e^{−πy²/a}`, with `x ↦ (i/2π)·d/dy`.
    pub fn fourier(&self) -> PolyGaussian {
        let b = 1.0 / self.a;
        let mut v = PolyGaussian { poly: vec![1.0 / principal_sqrt(self.a)], a: b };
        let mut acc = vec![Complex64::new(0.0, 0.0)];
        for (n, c) in self.poly.iter().enumerate() {
            if n > 0 {
                v = v.derivative_once().scale(I / (2.0 * PI));
            }
            acc = poly_add(&acc, &poly_scale(&v.poly, *c));
        }
        PolyGaussian { poly: trim(acc), a: b }
    }

    /// `x ↦ φ(−x)`.
    pub fn reflect(&self) -> PolyGaussian {
        let poly = self.poly.iter().enumerate().map(|(n, c)| if n % 2 == 1 { -c } else { *c }).collect();
        PolyGaussian { poly, a: self.a }
    }

    /// Keeps the monomials of the given parity; `None` when nothing is left.
    pub fn parity_project(&self, parity: Parity) -> Option<PolyGaussian> {
        let poly: Vec<Complex64> = self
            .poly
            .iter()
            .enumerate()
            .map(|(n, c)| if Parity::of_degree(n) == parity { *c } else { Complex64::new(0.0, 0.0) })
            .collect();
        if poly.iter().all(|c| c.norm() == 0.0) {
            return None;
        }
        Some(PolyGaussian { poly: trim(poly), a: self.a })
    }

    /// The parity of the function, if it has one.
    pub fn parity(&self) -> Option<Parity> {
        let has = |p: Parity| self.poly.iter().enumerate().any(|(n, c)| Parity::of_degree(n) == p && c.norm() != 0.0);
        match (has(Parity::Even), has(Parity::Odd)) {
            (true, false) => Some(Parity::Even),
            (false, true) => Some(Parity::Odd),
            _ => None,
        }
    }

    /// Sum of two functions sharing the same Gaussian parameter.
    pub fn add(&self, other: &PolyGaussian) -> Result<PolyGaussian> {
        if (self.a - other.a).norm() > 1e-15 * self.a.norm() {
            return domain("sum of PolyGaussians with different Gaussian parameters");
        }
        Ok(PolyGaussian { poly: trim(poly_add(&self.poly, &other.poly)), a: self.a })
    }

    /// Coefficient-level equality within relative tolerance `rel`.
    pub fn approx_eq(&self, other: &PolyGaussian, rel: f64) -> bool {
        (self.a - other.a).norm() <= rel * self.a.norm() && polys_close(&self.poly, &other.poly, rel)
    }

    /// If `other = c·self` (within relative tolerance `rel`), returns `c`.
    pub fn proportionality(&self, other: &PolyGaussian, rel: f64) -> Option<Complex64> {
        if (self.a - other.a).norm() > rel * self.a.norm() || self.poly.len() != other.poly.len() {
            return None;
        }
        let (idx, lead) = self.poly.iter().enumerate().max_by(|x, y| x.1.norm().total_cmp(&y.1.norm()))?;
        let c = other.poly[idx] / lead;
        polys_close(&poly_scale(&self.poly, c), &other.poly, rel).then_some(c)
    }
}

/// `x ↦ P(|x|²)·e^{−πa|x|²}` on `R^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialPolyGaussian {
    dim: u32,
    poly_u: Vec<Complex64>,
    a: Complex64,
}

impl RadialPolyGaussian {
    pub fn new(dim: u32, poly_u: Vec<Complex64>, a: Complex64) -> Result<RadialPolyGaussian> {
        if dim == 0 {
            return domain("dimension must be positive");
        }
        if !(a.re > 0.0) {
            return domain("Gaussian parameter needs Re a > 0");
        }
        let poly_u = trim(poly_u);
        if poly_u.iter().all(|c| c.norm() == 0.0) {
            return domain("polynomial factor must be nonzero");
        }
        Ok(RadialPolyGaussian { dim, poly_u, a })
    }

    pub fn real(dim: u32, poly_u: &[f64], a: f64) -> Result<RadialPolyGaussian> {
        RadialPolyGaussian::new(dim, poly_u.iter().map(|c| Complex64::new(*c, 0.0)).collect(), Complex64::new(a, 0.0))
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn poly_u(&self) -> &[Complex64] {
        &self.poly_u
    }

    pub fn a(&self) -> Complex64 {
        self.a
    }

    /// Value at any point with `|x|² = u`.
    pub fn evaluate_sq(&self, u: f64) -> Complex64 {
        horner(&self.poly_u, Complex64::new(u, 0.0)) * (-PI * self.a * u).exp()
    }

    /// Value at a point of norm `r`.
    pub fn evaluate(&self, r: f64) -> Complex64 {
        self.evaluate_sq(r * r)
    }

    /// Laplacian of `Q(u)e^{−πbu}` as a radial function: `4uF'' + 2kF'` in `u`.
    fn laplacian(dim: u32, q: &[Complex64], b: Complex64) -> Vec<Complex64> {
        let d1 = poly_derivative(q);
        let d2 = poly_derivative(&d1);
        let pb = PI * b;
        // F' = (Q' − πbQ)e, F'' = (Q'' − 2πbQ' + π²b²Q)e
        let f1 = poly_add(&d1, &poly_scale(q, -pb));
        let f2 = poly_add(&poly_add(&d2, &poly_scale(&d1, -2.0 * pb)), &poly_scale(q, pb * pb));
        poly_add(&poly_scale(&poly_shift(&f2), Complex64::new(4.0, 0.0)), &poly_scale(&f1, Complex64::new(2.0 * dim as f64, 0.0)))
    }

    /// `k`-dimensional Fourier transform, using `FT(uφ) = −(2π)^{−2} Δ φ̂`.
    pub fn fourier_radial(&self) -> RadialPolyGaussian {
        let b = 1.0 / self.a;
        let mut v = vec![principal_sqrt(self.a).powi(-(self.dim as i32))];
        let mut acc = vec![Complex64::new(0.0, 0.0)];
        let factor = Complex64::new(-1.0 / (4.0 * PI * PI), 0.0);
        for (n, c) in self.poly_u.iter().enumerate() {
            if n > 0 {
                v = poly_scale(&Self::laplacian(self.dim, &v, b), factor);
            }
            acc = poly_add(&acc, &poly_scale(&v, *c));
        }
        RadialPolyGaussian { dim: self.dim, poly_u: trim(acc), a: b }
    }

    /// The one-dimensional function `x ↦ P(x²)e^{−πax²}`.
    pub fn to_line(&self) -> PolyGaussian {
        let mut poly = vec![Complex64::new(0.0, 0.0); 2 * self.poly_u.len() - 1];
        for (n, c) in self.poly_u.iter().enumerate() {
            poly[2 * n] = *c;
        }
        PolyGaussian { poly: trim(poly), a: self.a }
    }

    pub fn approx_eq(&self, other: &RadialPolyGaussian, rel: f64) -> bool {
        self.dim == other.dim && (self.a - other.a).norm() <= rel * self.a.norm() && polys_close(&self.poly_u, &other.poly_u, rel)
    }

    pub fn proportionality(&self, other: &RadialPolyGaussian, rel: f64) -> Option<Complex64> {
        if self.dim != other.dim {
            return None;
        }
        self.to_line().proportionality(&other.to_line(), rel)
    }
}

/// The Gaussian `x ↦ e(|x|²τ/2) = e^{−πa|x|²}` on `R^k`, `a = −iτ`.
pub fn gaussian_from_tau(tau: Complex64, k: u32) -> Result<RadialPolyGaussian> {
    if tau.im <= 0.0 {
        return domain("Gaussian needs Im τ > 0");
    }
    RadialPolyGaussian::new(k, vec![Complex64::new(1.0, 0.0)], -I * tau)
}
