//! Spherical measures, one-dimensional distributions obtained from them by radial
//! descent, and the theta map between measures and Fourier series.
//!
//! A [`SphericalMeasure`] stores for every product of spheres the total mass it
//! carries, which is exactly the corresponding Fourier coefficient of its theta
//! function. Densities are recovered by dividing by [`sphere_volume`].

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::arith::{principal_sqrt, MultiplierSystem};
use crate::error::{domain, Error, Result};
use crate::qseries::{parse_rational, Coeff, Exponent, Growth, MultiQSeries, QSeries, Truncation};
use crate::schwartz::{Parity, PolyGaussian, RadialPolyGaussian};
use crate::Phase4;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn gamma_half(k: u32) -> f64 {
    // Γ(k/2) by the recursion from Γ(1/2) = √π and Γ(1) = 1
    let mut g = if k.is_multiple_of(2) { 1.0 } else { PI.sqrt() };
    let mut x = if k.is_multiple_of(2) { 1.0 } else { 0.5 };
    while x < k as f64 / 2.0 - 1e-9 {
        g *= x;
        x += 1.0;
    }
    g
}

/// Total surface measure of the sphere of squared radius `λ` in `R^k`; 1 for `λ = 0`.
pub fn sphere_volume(k: u32, lambda: f64) -> f64 {
    if lambda == 0.0 {
        return 1.0;
    }
    2.0 * PI.powf(k as f64 / 2.0) / gamma_half(k) * lambda.powf((k as f64 - 1.0) / 2.0)
}

/// Volume of a product of spheres.
pub fn product_volume(dims: &[u32], lambdas: &[Exponent]) -> f64 {
    dims.iter().zip(lambdas).map(|(k, l)| sphere_volume(*k, l.to_f64())).product()
}

/// A weight, dimension and multiplier attached to a form, with its Fricke eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformLaw {
    /// Twice the weight, per variable.
    pub twice_weight: Vec<i64>,
    pub level: u64,
    pub multiplier: MultiplierSystem,
    /// `v(W_N)/v_ϑ^k(W₄)`.
    pub fricke_eigenvalue: Complex64,
}

impl TransformLaw {
    pub fn new(twice_weight: Vec<i64>, multiplier: MultiplierSystem) -> TransformLaw {
        let k: i64 = twice_weight.iter().sum();
        let v = multiplier.fricke_value();
        // snap to an exact fourth root of unity when both factors are one
        let fricke_eigenvalue = match (k % 2 == 0, Phase4::from_complex(v, 1e-12)) {
            (true, Some(p)) => p.mul(Phase4::new(k / 2)).to_complex(),
            _ => v * Complex64::from_polar(1.0, PI * (k.rem_euclid(8)) as f64 / 4.0),
        };
        TransformLaw { twice_weight, level: multiplier.level, multiplier, fricke_eigenvalue }
    }

    /// Total `k = Σ 2·weight`.
    pub fn k(&self) -> i64 {
        self.twice_weight.iter().sum()
    }

    /// The eigenvalue as an exact fourth root of unity, when it is one.
    pub fn eigen_phase(&self) -> Option<Phase4> {
        Phase4::from_complex(self.fricke_eigenvalue, 1e-12)
    }
}

/// A generator of the metaplectic group acting on measures.
#[derive(Debug, Clone, PartialEq)]
pub enum WeilGenerator {
    /// `τ ↦ a²τ` with automorphy factor `a^{-1}`.
    Rot(BigRational),
    /// `τ ↦ τ + b`.
    T(BigRational),
    /// `τ ↦ −1/τ` with automorphy factor `√τ`.
    S,
}

impl WeilGenerator {
    /// `(f|_{k/2} gen)(τ)` for a function of a single variable.
    pub fn slash(&self, k: i64, tau: Complex64, f: &dyn Fn(Complex64) -> Result<Complex64>) -> Result<Complex64> {
        match self {
            WeilGenerator::Rot(a) => {
                let a = a.to_f64().unwrap_or(f64::NAN);
                Ok(a.powf(k as f64 / 2.0) * f(tau * a * a)?)
            }
            WeilGenerator::T(b) => f(tau + b.to_f64().unwrap_or(f64::NAN)),
            WeilGenerator::S => Ok(principal_sqrt(tau).powi(-(k as i32)) * f(-1.0 / tau)?),
        }
    }
}

/// A finite-dimensional family of spheres with masses, possibly with a declared Fourier
/// side and eigenvalue tag `μ̂ = i^ε μ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalMeasure {
    dims: Vec<u32>,
    masses: MultiQSeries,
    fourier: Option<Vec<(Vec<Exponent>, Coeff)>>,
    eigen: Option<Phase4>,
}

fn scale_terms(terms: &[(Vec<Exponent>, Coeff)], c: &Coeff) -> Vec<(Vec<Exponent>, Coeff)> {
    terms.iter().map(|(e, x)| (e.clone(), x.mul(c))).collect()
}

fn phase_coeff(p: Phase4) -> Coeff {
    Coeff::one().mul_i_pow(p.exponent() as i64)
}

/// `e^{−iπK/4}`, exact when `K` is even.
fn minus_eighth_root(k: i64) -> Coeff {
    if k % 2 == 0 {
        phase_coeff(Phase4::new(-k / 2))
    } else {
        Coeff::float(Complex64::from_polar(1.0, -PI * k as f64 / 4.0))
    }
}

impl SphericalMeasure {
    /// A measure whose theta function is the given multi-variable series.
    pub fn from_multi_series(series: MultiQSeries, dims: Vec<u32>) -> Result<SphericalMeasure> {
        if dims.len() != series.vars() || dims.contains(&0) {
            return domain("dimension vector must match the series and be positive");
        }
        Ok(SphericalMeasure { dims, masses: series, fourier: None, eigen: None })
    }

    /// Inverse theta map: the measure `Σ c_m / vol(S^k_{λ_m}) δ_{S^k_{λ_m}}`.
    pub fn from_series(f: &QSeries, k: u32) -> Result<SphericalMeasure> {
        SphericalMeasure::from_multi_series(single_to_multi(f)?, vec![k])
    }

    /// Declares `μ̂ = i^ε μ`.
    pub fn with_eigen(mut self, eps: Phase4) -> SphericalMeasure {
        self.fourier = Some(scale_terms(self.masses.terms(), &phase_coeff(eps)));
        self.eigen = Some(eps);
        self
    }

    /// Declares a Fourier side (masses of `μ̂`, on the same truncation).
    pub fn with_fourier(mut self, terms: Vec<(Vec<Exponent>, Coeff)>) -> Result<SphericalMeasure> {
        if terms.iter().any(|(e, _)| e.len() != self.dims.len()) {
            return domain("Fourier side has the wrong number of variables");
        }
        self.fourier = Some(terms);
        self.eigen = None;
        Ok(self)
    }

    pub fn dims(&self) -> &[u32] {
        &self.dims
    }

    /// Total dimension `Σ k_i`.
    pub fn total_dim(&self) -> i64 {
        self.dims.iter().map(|k| *k as i64).sum()
    }

    pub fn eigen(&self) -> Option<Phase4> {
        self.eigen
    }

    /// Masses per sphere product; these are the theta coefficients.
    pub fn masses(&self) -> &[(Vec<Exponent>, Coeff)] {
        self.masses.terms()
    }

    pub fn fourier_masses(&self) -> Option<&[(Vec<Exponent>, Coeff)]> {
        self.fourier.as_deref()
    }

    /// The theta series `Σ mass · e(λ̄·τ̄/2)`.
    pub fn theta_series(&self) -> &MultiQSeries {
        &self.masses
    }

    /// Density `c_m = mass/vol` of each term.
    pub fn densities(&self) -> Vec<(Vec<Exponent>, Complex64)> {
        self.masses
            .terms()
            .iter()
            .map(|(e, m)| (e.clone(), m.to_c64() / product_volume(&self.dims, e)))
            .collect()
    }

    pub fn mass_at(&self, e: &[Exponent]) -> Coeff {
        self.masses.coeff(e)
    }

    pub fn density_at(&self, e: &[Exponent]) -> Complex64 {
        self.mass_at(e).to_c64() / product_volume(&self.dims, e)
    }

    /// `θ_μ(τ̄) = ⟨μ, g(·, τ̄)⟩` with a certified tail bound below `tol`.
    pub fn theta(&self, taus: &[Complex64], tol: f64) -> Result<(Complex64, f64)> {
        self.masses.evaluate(taus, tol)
    }

    /// The measure with its declared Fourier side as primary data.
    pub fn fourier_measure(&self) -> Result<SphericalMeasure> {
        let fourier = self.fourier.clone().ok_or(Error::MissingFourierSide)?;
        let masses = MultiQSeries::new(self.dims.len(), fourier, self.masses.growth(), self.masses.truncation())?;
        // radial measures are even, so the transform of μ̂ is μ again
        let mut out = SphericalMeasure { dims: self.dims.clone(), masses, fourier: Some(self.masses.terms().to_vec()), eigen: None };
        if let Some(e) = self.eigen {
            out.eigen = Some(e);
        }
        Ok(out)
    }

    /// Action of a generator, acting diagonally on every variable, so that the theta
    /// function of the result is `θ_μ |_{K/2} gen`.
    pub fn weil_action(&self, gen: &WeilGenerator) -> Result<SphericalMeasure> {
        let n = self.dims.len();
        let k = self.total_dim();
        match gen {
            WeilGenerator::Rot(a) => {
                if !a.is_positive() {
                    return domain("rot(a) needs a > 0");
                }
                let a2 = a * a;
                let factor = rational_power_half(a, k);
                let map = |terms: &[(Vec<Exponent>, Coeff)], f: &Coeff, s: &BigRational| -> Vec<(Vec<Exponent>, Coeff)> {
                    terms.iter().map(|(e, c)| (e.iter().map(|x| x.scale(s)).collect(), c.mul(f))).collect()
                };
                let masses = map(self.masses.terms(), &factor, &a2);
                let af = a.to_f64().unwrap_or(f64::NAN);
                let g = self.masses.growth();
                let growth = Growth::new(g.c * factor.abs_f64() * 1f64.max(1.0 / (af * af)).powf(g.p), g.p)?;
                let truncation = match self.masses.truncation() {
                    Truncation::Complete => Truncation::Complete,
                    Truncation::Horizon { horizon, gap } => Truncation::Horizon { horizon: horizon * af * af, gap: gap * af * af },
                };
                let series = MultiQSeries::new(n, masses, growth, truncation)?;
                let fourier = self.fourier.as_ref().map(|f| {
                    let inv = BigRational::one() / a;
                    map(f, &rational_power_half(&inv, k), &(&inv * &inv))
                });
                let eigen = if a.is_one() { self.eigen } else { None };
                Ok(SphericalMeasure { dims: self.dims.clone(), masses: series, fourier, eigen })
            }
            WeilGenerator::T(b) => {
                let masses: Vec<_> = self
                    .masses
                    .terms()
                    .iter()
                    .map(|(e, c)| Ok((e.clone(), c.mul(&phase_of_half_product(e, b)?))))
                    .collect::<Result<_>>()?;
                let series = MultiQSeries::new(n, masses, self.masses.growth(), self.masses.truncation())?;
                let keep = b.is_zero();
                Ok(SphericalMeasure {
                    dims: self.dims.clone(),
                    masses: series,
                    fourier: if keep { self.fourier.clone() } else { None },
                    eigen: if keep { self.eigen } else { None },
                })
            }
            WeilGenerator::S => {
                let fourier = self.fourier.as_ref().ok_or(Error::MissingFourierSide)?;
                let c = minus_eighth_root(k);
                let series = MultiQSeries::new(n, scale_terms(fourier, &c), self.masses.growth(), self.masses.truncation())?;
                Ok(SphericalMeasure {
                    dims: self.dims.clone(),
                    masses: series,
                    fourier: Some(scale_terms(self.masses.terms(), &c)),
                    eigen: self.eigen.map(|e| e.inv()),
                })
            }
        }
    }

    /// `μ ⊗ μ′` on the product of the underlying spaces.
    pub fn tensor(&self, other: &SphericalMeasure) -> Result<SphericalMeasure> {
        let (g1, g2) = (self.masses.growth(), other.masses.growth());
        let (t1, t2) = (self.masses.truncation(), other.masses.truncation());
        let low = |m: &SphericalMeasure| {
            m.masses.terms().iter().map(|(e, _)| e.iter().map(Exponent::to_f64).sum::<f64>()).fold(f64::INFINITY, f64::min)
        };
        let valid = (t1.horizon() + low(other)).min(t2.horizon() + low(self));
        let gap1 = match t1 {
            Truncation::Horizon { gap, .. } => gap,
            Truncation::Complete => 1.0,
        };
        let gap2 = match t2 {
            Truncation::Horizon { gap, .. } => gap,
            Truncation::Complete => 1.0,
        };
        let truncation = if valid.is_infinite() {
            Truncation::Complete
        } else {
            Truncation::Horizon { horizon: valid, gap: gap1.min(gap2) }
        };
        let product = |a: &[(Vec<Exponent>, Coeff)], b: &[(Vec<Exponent>, Coeff)]| {
            let mut out = Vec::new();
            for (e1, c1) in a {
                let s1: f64 = e1.iter().map(Exponent::to_f64).sum();
                for (e2, c2) in b {
                    let s2: f64 = e2.iter().map(Exponent::to_f64).sum();
                    if s1 + s2 > valid * (1.0 + 1e-12) {
                        continue;
                    }
                    let mut e = e1.clone();
                    e.extend(e2.iter().cloned());
                    out.push((e, c1.mul(c2)));
                }
            }
            out
        };
        let growth = Growth::new(g1.c * g2.c * 1f64.max(1.0 / gap1), g1.p + g2.p + 1.0)?;
        let n = self.dims.len() + other.dims.len();
        let masses = MultiQSeries::new(n, product(self.masses.terms(), other.masses.terms()), growth, truncation)?;
        let fourier = match (&self.fourier, &other.fourier) {
            (Some(a), Some(b)) => Some(product(a, b)),
            _ => None,
        };
        let eigen = match (self.eigen, other.eigen) {
            (Some(a), Some(b)) => Some(a.mul(b)),
            _ => None,
        };
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Ok(SphericalMeasure { dims, masses, fourier, eigen })
    }

    /// Restriction to the diagonal of each block of a partition of the variables: the
    /// variables of a block are identified, and the block becomes one sphere factor of
    /// dimension equal to the sum of the block's dimensions.
    pub fn diag_restrict(&self, blocks: &[Vec<usize>]) -> Result<SphericalMeasure> {
        let n = self.dims.len();
        let mut seen = vec![false; n];
        for b in blocks {
            if b.is_empty() {
                return domain("empty block in partition");
            }
            for &i in b {
                if i >= n || seen[i] {
                    return domain("blocks must partition the variables");
                }
                seen[i] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return domain("blocks must partition the variables");
        }
        let restrict = |terms: &[(Vec<Exponent>, Coeff)]| -> Result<Vec<(Vec<Exponent>, Coeff)>> {
            let mut map: BTreeMap<Vec<Exponent>, Coeff> = BTreeMap::new();
            for (e, c) in terms {
                let mut key = Vec::with_capacity(blocks.len());
                for b in blocks {
                    let mut s = Exponent::zero();
                    for &i in b {
                        s = s.checked_add(&e[i])?;
                    }
                    key.push(s);
                }
                let slot = map.entry(key).or_insert_with(Coeff::zero);
                *slot = slot.add(c);
            }
            Ok(map.into_iter().collect())
        };
        let masses = MultiQSeries::new(blocks.len(), restrict(self.masses.terms())?, self.masses.growth(), self.masses.truncation())?;
        let fourier = self.fourier.as_ref().map(|f| restrict(f)).transpose()?;
        let dims = blocks.iter().map(|b| b.iter().map(|&i| self.dims[i]).sum()).collect();
        Ok(SphericalMeasure { dims, masses, fourier, eigen: self.eigen })
    }

    /// `⟨μ, φ⟩` for a radial test function on `R^k` (single sphere factor), with a
    /// certified tail bound below `tol`.
    pub fn pair_radial(&self, phi: &RadialPolyGaussian, tol: f64) -> Result<(Complex64, f64)> {
        pair_radial_terms(&self.dims, self.masses.terms(), self.masses.growth(), self.masses.truncation(), phi, tol)
    }

    /// `⟨μ̂, φ⟩` using the declared Fourier side.
    pub fn pair_radial_fourier(&self, phi: &RadialPolyGaussian, tol: f64) -> Result<(Complex64, f64)> {
        let f = self.fourier.as_ref().ok_or(Error::MissingFourierSide)?;
        pair_radial_terms(&self.dims, f, self.masses.growth(), self.masses.truncation(), phi, tol)
    }

    /// JSON form: masses as exact rationals, exponents as `{num, den, surd}`.
    pub fn to_json(&self) -> Value {
        let g = self.masses.growth();
        let truncation = match self.masses.truncation() {
            Truncation::Complete => Value::Null,
            Truncation::Horizon { horizon, gap } => json!({"horizon": horizon, "gap": gap}),
        };
        json!({
            "dims": self.dims,
            "terms": terms_to_json(self.masses.terms()),
            "fourier": self.fourier.as_ref().map(|f| json!({"terms": terms_to_json(f)})),
            "eigen": self.eigen.map(|e| e.exponent()),
            "growth": {"c": g.c, "p": g.p},
            "truncation": truncation,
        })
    }

    pub fn from_json(v: &Value) -> Result<SphericalMeasure> {
        let bad = |m: &str| Error::Parse(format!("measure JSON: {m}"));
        let dims: Vec<u32> = v["dims"]
            .as_array()
            .ok_or_else(|| bad("dims"))?
            .iter()
            .map(|d| d.as_u64().map(|x| x as u32).ok_or_else(|| bad("dims entry")))
            .collect::<Result<_>>()?;
        let terms = terms_from_json(&v["terms"])?;
        let growth = Growth::new(
            v["growth"]["c"].as_f64().ok_or_else(|| bad("growth.c"))?,
            v["growth"]["p"].as_f64().ok_or_else(|| bad("growth.p"))?,
        )?;
        let truncation = match &v["truncation"] {
            Value::Null => Truncation::Complete,
            t => Truncation::Horizon {
                horizon: t["horizon"].as_f64().ok_or_else(|| bad("truncation.horizon"))?,
                gap: t["gap"].as_f64().ok_or_else(|| bad("truncation.gap"))?,
            },
        };
        let masses = MultiQSeries::new(dims.len(), terms, growth, truncation)?;
        let mut m = SphericalMeasure::from_multi_series(masses, dims)?;
        if let Some(f) = v.get("fourier").filter(|f| !f.is_null()) {
            m = m.with_fourier(terms_from_json(&f["terms"])?)?;
        }
        if let Some(e) = v.get("eigen").and_then(Value::as_u64) {
            let fourier = m.fourier.take();
            m = m.with_eigen(Phase4::new(e as i64));
            if let Some(f) = fourier {
                if f.as_slice() != m.fourier.as_deref().unwrap_or(&[]) {
                    return Err(bad("declared Fourier side disagrees with the eigen tag"));
                }
            }
        }
        Ok(m)
    }
}

fn pair_radial_terms(
    dims: &[u32],
    terms: &[(Vec<Exponent>, Coeff)],
    growth: Growth,
    truncation: Truncation,
    phi: &RadialPolyGaussian,
    tol: f64,
) -> Result<(Complex64, f64)> {
    if dims.len() != 1 || dims[0] != phi.dim() {
        return domain("test function dimension does not match the measure");
    }
    let value: Complex64 = terms.iter().map(|(e, c)| c.to_c64() * phi.evaluate_sq(e[0].to_f64())).sum();
    let poly_norm: f64 = phi.poly_u().iter().map(|c| c.norm()).sum();
    let deg = phi.poly_u().len() as f64 - 1.0;
    let g = Growth::new(growth.c * poly_norm.max(1e-300), growth.p + deg)?;
    let tail = match truncation {
        Truncation::Complete => 0.0,
        Truncation::Horizon { horizon, gap } => g.tail(horizon, phi.a().re, gap)?,
    };
    if tail > tol {
        return Err(Error::Truncation { achieved: tail, requested: tol });
    }
    Ok((value, tail))
}

pub(crate) fn single_to_multi(f: &QSeries) -> Result<MultiQSeries> {
    let terms = f.terms().iter().map(|(e, c)| (vec![e.clone()], c.clone())).collect();
    MultiQSeries::new(1, terms, f.growth(), f.truncation())
}

/// `a^{K/2}`, exact when it is rational.
fn rational_power_half(a: &BigRational, k: i64) -> Coeff {
    let base = if k >= 0 { a.clone() } else { BigRational::one() / a };
    let k = k.unsigned_abs();
    let whole = num_traits::pow(base.clone(), (k / 2) as usize);
    if k.is_multiple_of(2) {
        return Coeff::from_rational(whole);
    }
    let (n, d) = (base.numer(), base.denom());
    let (rn, rd) = (n.sqrt(), d.sqrt());
    if &(&rn * &rn) == n && &(&rd * &rd) == d {
        return Coeff::from_rational(whole * BigRational::new(rn, rd));
    }
    Coeff::float(Complex64::new(whole.to_f64().unwrap_or(f64::NAN) * base.to_f64().unwrap_or(f64::NAN).sqrt(), 0.0))
}

/// `e(Σλ_i·b/2)`, exact when the phase is a fourth root of unity.
fn phase_of_half_product(e: &[Exponent], b: &BigRational) -> Result<Coeff> {
    let mut s = Exponent::zero();
    for x in e {
        s = s.checked_add(x)?;
    }
    if let Some((q, 1)) = s.as_pure() {
        // e(q b / 2) = i^{2qb}
        let t = q * b * BigRational::from_integer(2.into());
        if t.is_integer() {
            let n = t.to_integer() % BigInt::from(4);
            return Ok(phase_coeff(Phase4::new(n.to_i64().unwrap_or(0))));
        }
    }
    let theta = PI * s.to_f64() * b.to_f64().unwrap_or(f64::NAN);
    Ok(Coeff::float(Complex64::new(theta.cos(), theta.sin())))
}

fn exponent_to_json(e: &Exponent) -> Value {
    match e.as_pure() {
        Some((q, s)) => json!({"num": q.numer().to_string(), "den": q.denom().to_string(), "surd": s}),
        None => {
            let q = e.surd_coefficient();
            let r = e.rational_part();
            json!({
                "num": q.numer().to_string(), "den": q.denom().to_string(), "surd": e.surd_value(),
                "rat_num": r.numer().to_string(), "rat_den": r.denom().to_string(),
            })
        }
    }
}

fn exponent_from_json(v: &Value) -> Result<Exponent> {
    let field = |name: &str| -> Result<String> {
        match &v[name] {
            Value::String(s) => Ok(s.clone()),
            Value::Number(n) => Ok(n.to_string()),
            _ => Err(Error::Parse(format!("exponent field {name}"))),
        }
    };
    let q = parse_rational(&format!("{}/{}", field("num")?, field("den")?))?;
    let surd = v["surd"].as_u64().ok_or_else(|| Error::Parse("exponent surd".into()))?;
    let r = if v.get("rat_num").is_some() {
        parse_rational(&format!("{}/{}", field("rat_num")?, field("rat_den")?))?
    } else {
        BigRational::zero()
    };
    Exponent::quadratic(r, q, surd)
}

fn terms_to_json(terms: &[(Vec<Exponent>, Coeff)]) -> Value {
    Value::Array(
        terms
            .iter()
            .map(|(e, c)| {
                let (re, im) = c.component_strings();
                json!({"lambda": e.iter().map(exponent_to_json).collect::<Vec<_>>(), "re": re, "im": im})
            })
            .collect(),
    )
}

fn terms_from_json(v: &Value) -> Result<Vec<(Vec<Exponent>, Coeff)>> {
    let arr = v.as_array().ok_or_else(|| Error::Parse("terms must be an array".into()))?;
    arr.iter()
        .map(|t| {
            let lam = t["lambda"]
                .as_array()
                .ok_or_else(|| Error::Parse("lambda must be an array".into()))?
                .iter()
                .map(exponent_from_json)
                .collect::<Result<Vec<_>>>()?;
            let s = |x: &Value| match x {
                Value::String(s) => Ok(s.clone()),
                Value::Number(n) => Ok(n.to_string()),
                _ => Err(Error::Parse("coefficient component".into())),
            };
            Ok((lam, Coeff::parse_components(&s(&t["re"])?, &s(&t["im"])?)?))
        })
        .collect()
}

/// An exact real constant `q·(2π)^e`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DescentConstant {
    pub rational: BigRational,
    pub two_pi_pow: i32,
}

impl DescentConstant {
    pub fn to_f64(&self) -> f64 {
        self.rational.to_f64().unwrap_or(f64::NAN) * (2.0 * PI).powi(self.two_pi_pow)
    }
}

fn double_factorial(n: i64) -> BigInt {
    let mut acc = BigInt::one();
    let mut m = n;
    while m > 1 {
        acc *= m;
        m -= 2;
    }
    acc
}

fn factorial(n: i64) -> BigInt {
    (2..=n.max(1)).fold(BigInt::one(), |a, m| a * m)
}

/// The constants `(α_k, β_{j,k})` of radial descent in odd dimension `k`, exactly.
pub fn descent_constants_exact(j: u32, k: u32) -> Result<(DescentConstant, DescentConstant)> {
    if k.is_multiple_of(2) {
        return domain("descent constants need odd k");
    }
    if j > (k - 1) / 2 {
        return domain("j must satisfy 0 <= j <= (k-1)/2");
    }
    let (k, j) = (k as i64, j as i64);
    let e = -((k - 1) / 2) as i32;
    let sign = |n: i64| if n % 2 == 0 { BigInt::one() } else { -BigInt::one() };
    let alpha = DescentConstant { rational: BigRational::new(sign((k - 1) / 2), double_factorial(k - 2)), two_pi_pow: e };
    let beta = if j == 0 {
        let q = if k == 1 { BigRational::one() } else { BigRational::zero() };
        DescentConstant { rational: q, two_pi_pow: 0 }
    } else {
        DescentConstant {
            rational: BigRational::new(sign(j) * factorial(k - j - 2), factorial(j - 1) * double_factorial(k - 2 * j - 1)),
            two_pi_pow: e,
        }
    };
    Ok((alpha, beta))
}

/// `(α_k, β_{j,k})` as floats.
pub fn descent_constants(j: u32, k: u32) -> Result<(f64, f64)> {
    let (a, b) = descent_constants_exact(j, k)?;
    Ok((a.to_f64(), b.to_f64()))
}

/// Weight of a line atom: `base · (2π)^{two_pi_pow} · λ^{sqrt_pow/2}` with `λ` the atom's
/// squared position.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomWeight {
    pub base: Coeff,
    pub two_pi_pow: i32,
    pub sqrt_pow: i32,
}

impl AtomWeight {
    pub fn value(&self, lambda: f64) -> Complex64 {
        let l = if self.sqrt_pow == 0 { 1.0 } else { lambda.powf(self.sqrt_pow as f64 / 2.0) };
        self.base.to_c64() * (2.0 * PI).powi(self.two_pi_pow) * l
    }

    /// Folds even powers of a rational `λ` into the exact base.
    fn normalized(&self, lambda: &Exponent) -> AtomWeight {
        let mut w = self.clone();
        if lambda.is_zero() || !lambda.is_rational() || !w.base.is_exact() {
            return w;
        }
        let l = lambda.rational_part();
        while w.sqrt_pow >= 2 {
            w.base = w.base.scale(l);
            w.sqrt_pow -= 2;
        }
        while w.sqrt_pow < 0 {
            w.base = w.base.scale(&(BigRational::one() / l));
            w.sqrt_pow += 2;
        }
        if w.base.is_zero() {
            w.two_pi_pow = 0;
            w.sqrt_pow = 0;
        }
        w
    }
}

/// An atom `a·δ^{(j)}_x` at `x = √λ ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LineAtom {
    pub radius_sq: Exponent,
    pub order: u32,
    pub weight: AtomWeight,
}

/// A distribution on the line given by atoms at `x ≥ 0`, extended to `x < 0` by its parity.
///
/// For `x > 0` an atom `a·δ^{(j)}_x` stands for `a(δ^{(j)}_x ± reflection)`, so its pairing
/// with a test function of the same parity is `2a(−1)^j φ^{(j)}(x)`; atoms at the origin
/// pair as `a(−1)^j φ^{(j)}(0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LineDistribution {
    atoms: Vec<LineAtom>,
    parity: Parity,
    /// Bound `|a(λ)| ≤ C(1+λ)^p` on the atom weights per radius.
    growth: Growth,
    truncation: Truncation,
    /// `ν̂ = i^ε ν`, when known.
    eigen: Option<Phase4>,
}

impl LineDistribution {
    pub fn new(mut atoms: Vec<LineAtom>, parity: Parity, growth: Growth, truncation: Truncation) -> Result<LineDistribution> {
        atoms.retain(|a| !a.weight.base.is_zero());
        atoms.sort_by(|a, b| a.radius_sq.cmp(&b.radius_sq).then(a.order.cmp(&b.order)));
        for w in atoms.windows(2) {
            if w[0].radius_sq == w[1].radius_sq && w[0].order == w[1].order {
                return domain("duplicate (x, j) atom");
            }
        }
        if atoms.iter().any(|a| a.radius_sq.is_negative()) {
            return domain("atoms must sit at x >= 0");
        }
        Ok(LineDistribution { atoms, parity, growth, truncation, eigen: None })
    }

    pub fn atoms(&self) -> &[LineAtom] {
        &self.atoms
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn eigen(&self) -> Option<Phase4> {
        self.eigen
    }

    pub fn with_eigen(mut self, eps: Option<Phase4>) -> LineDistribution {
        self.eigen = eps;
        self
    }

    /// `⟨ν, φ⟩` with a certified tail bound below `tol`. The part of `φ` of the wrong
    /// parity pairs to zero.
    pub fn pair(&self, phi: &PolyGaussian, tol: f64) -> Result<(Complex64, f64)> {
        let Some(phi) = phi.parity_project(self.parity) else {
            return Ok((Complex64::new(0.0, 0.0), 0.0));
        };
        let max_order = self.atoms.iter().map(|a| a.order).max().unwrap_or(0) as usize;
        let derivs: Vec<PolyGaussian> = (0..=max_order).map(|j| phi.derivative(j)).collect();
        let mut value = Complex64::new(0.0, 0.0);
        for atom in &self.atoms {
            let l = atom.radius_sq.to_f64();
            let x = l.sqrt();
            let sign = if atom.order % 2 == 0 { 1.0 } else { -1.0 };
            let mult = if atom.radius_sq.is_zero() { 1.0 } else { 2.0 };
            value += atom.weight.value(l) * sign * mult * derivs[atom.order as usize].evaluate(x);
        }
        let tail = match self.truncation {
            Truncation::Complete => 0.0,
            Truncation::Horizon { horizon, gap } => {
                let deriv_norm = derivs.iter().map(|d| d.poly().iter().map(|c| c.norm()).sum::<f64>()).fold(0.0, f64::max);
                let deg = derivs.iter().map(|d| d.degree()).max().unwrap_or(0) as f64;
                let g = Growth::new(self.growth.c * 2.0 * (max_order as f64 + 1.0) * deriv_norm.max(1e-300), self.growth.p + deg / 2.0)?;
                g.tail(horizon, phi.a().re, gap)?
            }
        };
        if tail > tol {
            return Err(Error::Truncation { achieved: tail, requested: tol });
        }
        Ok((value, tail))
    }

    /// Atom list with even powers of rational radii folded into the coefficients, for
    /// exact comparison.
    pub fn normalized_atoms(&self) -> Vec<LineAtom> {
        self.atoms
            .iter()
            .map(|a| LineAtom { radius_sq: a.radius_sq.clone(), order: a.order, weight: a.weight.normalized(&a.radius_sq) })
            .collect()
    }

    /// Multiplies every weight by an exact coefficient.
    pub fn scale(&self, c: &Coeff) -> LineDistribution {
        let atoms = self
            .atoms
            .iter()
            .map(|a| LineAtom { radius_sq: a.radius_sq.clone(), order: a.order, weight: AtomWeight { base: a.weight.base.mul(c), ..a.weight.clone() } })
            .collect();
        let growth = Growth { c: self.growth.c * c.abs_f64().max(1e-300), p: self.growth.p };
        LineDistribution { atoms, parity: self.parity, growth, truncation: self.truncation, eigen: self.eigen }
    }
}

fn scalar_odd_dim(mu: &SphericalMeasure) -> Result<u32> {
    match mu.dims() {
        [k] if k % 2 == 1 => Ok(*k),
        _ => domain("descent needs a single sphere factor of odd dimension"),
    }
}

/// Growth of descended weights: masses times `λ^{h/2}` with `h ∈ [h_min, h_max]`.
fn descended_growth(mu: &SphericalMeasure, scale: f64, h_max: i32) -> Result<Growth> {
    let g = mu.masses.growth();
    Growth::new(g.c * scale.max(1e-300), g.p + (h_max.max(0) as f64) / 2.0)
}

fn check_no_small_radii(terms: &[(Vec<Exponent>, Coeff)]) -> Result<()> {
    // negative powers of λ are bounded by the smallest positive radius, which is ≥ 1e-6 here
    if terms.iter().any(|(e, _)| !e[0].is_zero() && e[0].to_f64() < 1e-6) {
        return domain("radii too close to the origin for descent");
    }
    Ok(())
}

fn max_inverse_scale(terms: &[(Vec<Exponent>, Coeff)], h_min: i32) -> f64 {
    if h_min >= 0 {
        return 1.0;
    }
    let l0 = terms.iter().map(|(e, _)| e[0].to_f64()).filter(|l| *l > 0.0).fold(f64::INFINITY, f64::min);
    if l0.is_finite() {
        1f64.max(l0.powf(h_min as f64 / 2.0))
    } else {
        1.0
    }
}

/// Even descent `ν = i^*μ` and its Fourier transform, assembled from the declared
/// Fourier side of `μ`.
pub fn descend_even(mu: &SphericalMeasure) -> Result<(LineDistribution, LineDistribution)> {
    let k = scalar_odd_dim(mu)?;
    let fourier = mu.fourier.as_ref().ok_or(Error::MissingFourierSide)?;
    check_no_small_radii(mu.masses())?;
    let half = rat(1, 2);
    let mut nu = Vec::new();
    for (e, m) in mu.masses() {
        let base = if e[0].is_zero() { m.clone() } else { m.scale(&half) };
        nu.push(LineAtom { radius_sq: e[0].clone(), order: 0, weight: AtomWeight { base, two_pi_pow: 0, sqrt_pow: 0 } });
    }
    let (alpha, _) = descent_constants_exact(0, k)?;
    let mut nu_hat = Vec::new();
    let kk = k as i32;
    for (e, m) in fourier {
        if e[0].is_zero() {
            nu_hat.push(LineAtom {
                radius_sq: e[0].clone(),
                order: k - 1,
                weight: AtomWeight { base: m.scale(&alpha.rational), two_pi_pow: alpha.two_pi_pow, sqrt_pow: 0 },
            });
            continue;
        }
        for j in 0..=(k - 1) / 2 {
            let (_, beta) = descent_constants_exact(j, k)?;
            if beta.rational.is_zero() {
                continue;
            }
            let sign = if j % 2 == 0 { rat(1, 2) } else { rat(-1, 2) };
            nu_hat.push(LineAtom {
                radius_sq: e[0].clone(),
                order: j,
                weight: AtomWeight { base: m.scale(&(sign * &beta.rational)), two_pi_pow: beta.two_pi_pow, sqrt_pow: j as i32 - kk + 1 },
            });
        }
    }
    let t = mu.masses.truncation();
    let nu = LineDistribution::new(nu, Parity::Even, descended_growth(mu, 1.0, 0)?, t)?;
    let hmin = 1 - kk;
    let scale = max_inverse_scale(fourier, hmin) * max_beta(k);
    let nu_hat = LineDistribution::new(nu_hat, Parity::Even, descended_growth(mu, scale, 0)?, t)?;
    Ok((nu, nu_hat))
}

fn max_beta(k: u32) -> f64 {
    (0..=(k - 1) / 2)
        .map(|j| descent_constants(j, k).map(|(a, b)| a.abs().max(b.abs())).unwrap_or(1.0))
        .fold(1.0, f64::max)
        * 2.0
        * PI
}

/// Odd descent `ν = (1/x) i^*μ` for `k ≥ 3` and its Fourier transform.
///
/// When `k = 3` and `μ̂ = i^ε μ`, the result carries `ν̂ = i^{ε+3} ν`.
pub fn descend_odd(mu: &SphericalMeasure) -> Result<(LineDistribution, LineDistribution)> {
    let k = scalar_odd_dim(mu)?;
    if k < 3 {
        return domain("odd descent needs k >= 3");
    }
    let fourier = mu.fourier.as_ref().ok_or(Error::MissingFourierSide)?;
    let has_zero = |t: &[(Vec<Exponent>, Coeff)]| t.iter().any(|(e, _)| e[0].is_zero());
    if !has_zero(mu.masses()) || !has_zero(fourier) {
        return domain("odd descent needs a zero-radius term on both sides");
    }
    check_no_small_radii(mu.masses())?;
    let half = rat(1, 2);
    let mut nu = Vec::new();
    for (e, m) in mu.masses() {
        if e[0].is_zero() {
            nu.push(LineAtom { radius_sq: e[0].clone(), order: 1, weight: AtomWeight { base: m.neg(), two_pi_pow: 0, sqrt_pow: 0 } });
        } else {
            nu.push(LineAtom { radius_sq: e[0].clone(), order: 0, weight: AtomWeight { base: m.scale(&half), two_pi_pow: 0, sqrt_pow: -1 } });
        }
    }
    let (alpha, _) = descent_constants_exact(0, k)?;
    let kk = k as i32;
    let mut nu_hat = Vec::new();
    for (e, m) in fourier {
        if e[0].is_zero() {
            // −2πi·M̂₀·α_k
            nu_hat.push(LineAtom {
                radius_sq: e[0].clone(),
                order: k - 2,
                weight: AtomWeight { base: m.scale(&(-&alpha.rational)).mul_i_pow(1), two_pi_pow: alpha.two_pi_pow + 1, sqrt_pow: 0 },
            });
            continue;
        }
        for j in 1..=(k - 1) / 2 {
            let (_, beta) = descent_constants_exact(j, k)?;
            // (−1)^{j−1}·πi·M̂·β_{j,k}·λ^{(j−k+1)/2}
            let sign = if (j - 1) % 2 == 0 { rat(1, 2) } else { rat(-1, 2) };
            nu_hat.push(LineAtom {
                radius_sq: e[0].clone(),
                order: j - 1,
                weight: AtomWeight {
                    base: m.scale(&(sign * &beta.rational)).mul_i_pow(1),
                    two_pi_pow: beta.two_pi_pow + 1,
                    sqrt_pow: j as i32 - kk + 1,
                },
            });
        }
    }
    let t = mu.masses.truncation();
    let inv = max_inverse_scale(mu.masses(), -1);
    let nu = LineDistribution::new(nu, Parity::Odd, descended_growth(mu, inv, 0)?, t)?;
    let scale = max_inverse_scale(fourier, 1 - kk) * max_beta(k) * 2.0 * PI;
    let nu_hat = LineDistribution::new(nu_hat, Parity::Odd, descended_growth(mu, scale, 0)?, t)?;
    let eigen = if k == 3 { mu.eigen.map(|e| e.mul(Phase4::MINUS_I)) } else { None };
    Ok((nu.with_eigen(eigen), nu_hat.with_eigen(eigen)))
}

/// Pairing of a one-variable measure with a radial test function, or of a line
/// distribution with a test function on the line.
pub enum Pairable<'a> {
    Spherical(&'a SphericalMeasure),
    Line(&'a LineDistribution),
}

pub enum TestFunction<'a> {
    Radial(&'a RadialPolyGaussian),
    Line(&'a PolyGaussian),
}

/// `⟨d, φ⟩` with a certified tail bound below `tol`.
pub fn pair(d: Pairable<'_>, phi: TestFunction<'_>, tol: f64) -> Result<(Complex64, f64)> {
    match (d, phi) {
        (Pairable::Spherical(m), TestFunction::Radial(f)) => m.pair_radial(f, tol),
        (Pairable::Line(l), TestFunction::Line(f)) => l.pair(f, tol),
        (Pairable::Spherical(m), TestFunction::Line(f)) if m.dims() == [1] => {
            let even = match f.parity_project(Parity::Even) {
                Some(e) => e,
                None => return Ok((Complex64::new(0.0, 0.0), 0.0)),
            };
            // a radial function on R^1 is an even function of x; rewrite P(x) e^{−πax²} as Q(x²)
            let q: Vec<Complex64> = even.poly().iter().step_by(2).copied().collect();
            let r = RadialPolyGaussian::new(1, q, even.a())?;
            m.pair_radial(&r, tol)
        }
        _ => domain("incompatible dimensions for pairing"),
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::arith::rep_numbers;
    use crate::qseries::Coeff;

    pub(crate) fn dirac_comb(horizon: f64) -> SphericalMeasure {
        let m_max = horizon.sqrt().floor() as i64;
        let terms: Vec<_> = (0..=m_max)
            .map(|m| (Exponent::integer(m * m), Coeff::from_integer(if m == 0 { 1 } else { 2 })))
            .collect();
        let f = QSeries::new(terms, Growth::new(2.0, 0.0).unwrap(), Some(horizon), Some(1.0)).unwrap();
        SphericalMeasure::from_series(&f, 1).unwrap().with_eigen(Phase4::ONE)
    }

    pub(crate) fn sigma3(horizon: f64) -> SphericalMeasure {
        let n = horizon.floor() as usize;
        let r = rep_numbers(3, n).unwrap();
        let terms: Vec<_> = r
            .into_iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(m, c)| (Exponent::integer(m as i64), Coeff::from_bigint(c)))
            .collect();
        let f = QSeries::new(terms, Growth::new(8.0, 1.5).unwrap(), Some(horizon), Some(1.0)).unwrap();
        SphericalMeasure::from_series(&f, 3).unwrap().with_eigen(Phase4::ONE)
    }

    #[test]
    fn sphere_volume_examples() {
        assert!((sphere_volume(1, 4.0) - 2.0).abs() < 1e-15);
        assert!((sphere_volume(2, 1.0) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_volume(3, 1.0) - 4.0 * PI).abs() < 1e-14);
        assert_eq!(sphere_volume(7, 0.0), 1.0);
        // vol(S^{k-1}) of radius r is k·vol(B^k)·r^{k−1}
        assert!((sphere_volume(4, 4.0) - 2.0 * PI * PI * 8.0).abs() < 1e-12);
    }

    #[test]
    fn inverse_theta_map_examples() {
        let d = dirac_comb(400.0);
        assert!((d.density_at(&[Exponent::integer(4)]) - 1.0).norm() < 1e-15);
        assert!((d.density_at(&[Exponent::zero()]) - 1.0).norm() < 1e-15);
        let s = sigma3(400.0);
        for m in 1..10 {
            let r = rep_numbers(3, m).unwrap()[m].to_f64().unwrap();
            let want = r / (4.0 * PI * m as f64);
            assert!((s.density_at(&[Exponent::integer(m as i64)]).re - want).abs() < 1e-14);
        }
        let (v, _) = d.theta(&[Complex64::new(0.0, 1.0)], 1e-12).unwrap();
        assert!((v.re - 1.0864348112133).abs() < 1e-12);
        let c0 = SphericalMeasure::from_series(&QSeries::constant(Coeff::from_integer(3)), 2).unwrap();
        assert_eq!(c0.theta(&[Complex64::new(0.3, 0.2)], 1e-12).unwrap().0, Complex64::new(3.0, 0.0));
    }

    #[test]
    fn pairing_examples() {
        let d = dirac_comb(400.0);
        let g = PolyGaussian::real(&[1.0], 1.0).unwrap();
        let (v, _) = pair(Pairable::Spherical(&d), TestFunction::Line(&g), 1e-12).unwrap();
        assert!((v.re - 1.0864348112133).abs() < 1e-12);
        let dp = LineDistribution::new(
            vec![LineAtom { radius_sq: Exponent::zero(), order: 1, weight: AtomWeight { base: Coeff::one(), two_pi_pow: 0, sqrt_pow: 0 } }],
            Parity::Odd,
            Growth::new(1.0, 0.0).unwrap(),
            Truncation::Complete,
        )
        .unwrap();
        let phi = PolyGaussian::real(&[0.0, 3.0, 0.0, 1.0], 2.0).unwrap();
        assert!((dp.pair(&phi, 1e-12).unwrap().0 + 3.0).norm() < 1e-14);
        let s = sigma3(400.0);
        let tau = Complex64::new(0.0, 1.0);
        let gauss = crate::schwartz::gaussian_from_tau(tau, 3).unwrap();
        let (a, _) = s.pair_radial(&gauss, 1e-12).unwrap();
        let (b, _) = s.theta(&[tau], 1e-12).unwrap();
        assert!((a - b).norm() < 1e-12);
    }

    #[test]
    fn descent_constant_examples() {
        assert_eq!(descent_constants(0, 1).unwrap(), (1.0, 1.0));
        let (a, b) = descent_constants(1, 3).unwrap();
        assert!((a + 1.0 / (2.0 * PI)).abs() < 1e-15 && (b + 1.0 / (2.0 * PI)).abs() < 1e-15);
        let (_, b) = descent_constants(1, 5).unwrap();
        assert!((b + 1.0 / (4.0 * PI * PI)).abs() < 1e-15);
        assert!(descent_constants(2, 3).is_err());
        assert!(descent_constants(0, 4).is_err());
    }

    #[test]
    fn weil_identities() {
        let d = dirac_comb(400.0);
        assert_eq!(d.weil_action(&WeilGenerator::Rot(rat(1, 1))).unwrap(), d);
        let b = rat(1, 3);
        let back = d.weil_action(&WeilGenerator::T(b.clone())).unwrap().weil_action(&WeilGenerator::T(-b)).unwrap();
        for ((e1, c1), (e2, c2)) in back.masses().iter().zip(d.masses()) {
            assert_eq!(e1, e2);
            assert!((c1.to_c64() - c2.to_c64()).norm() < 1e-14);
        }
        let t1 = d.weil_action(&WeilGenerator::T(rat(1, 1))).unwrap();
        assert!(t1.masses().iter().all(|(_, c)| c.is_exact()));
    }

    #[test]
    fn tensor_and_diagonal() {
        let d = dirac_comb(100.0);
        let dd = d.tensor(&d).unwrap();
        assert_eq!(dd.dims(), &[1, 1]);
        let one = [Exponent::integer(1), Exponent::integer(1)];
        assert!((dd.density_at(&one) - 1.0).norm() < 1e-15);
        let taus = [Complex64::new(0.1, 0.9), Complex64::new(-0.2, 1.3)];
        let (v, _) = dd.theta(&taus, 1e-12).unwrap();
        let v1 = d.theta(&taus[..1], 1e-12).unwrap().0 * d.theta(&taus[1..], 1e-12).unwrap().0;
        assert!((v - v1).norm() < 1e-12);
        let diag = dd.diag_restrict(&[vec![0, 1]]).unwrap();
        assert_eq!(diag.dims(), &[2]);
        let r2 = rep_numbers(2, 50).unwrap();
        for m in 0..=50i64 {
            assert_eq!(diag.mass_at(&[Exponent::integer(m)]), Coeff::from_bigint(r2[m as usize].clone()));
        }
        assert!((diag.density_at(&[Exponent::integer(1)]).re - 4.0 / (2.0 * PI)).abs() < 1e-15);
        assert_eq!(dd.diag_restrict(&[vec![0], vec![1]]).unwrap(), dd);
        assert!(dd.diag_restrict(&[vec![0]]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let s = sigma3(30.0);
        let v = s.to_json();
        let back = SphericalMeasure::from_json(&v).unwrap();
        assert_eq!(back, s);
        let d = dirac_comb(30.0).weil_action(&WeilGenerator::T(rat(1, 5))).unwrap();
        assert_eq!(SphericalMeasure::from_json(&d.to_json()).unwrap(), d);
    }

    #[test]
    fn k1_descent_is_identity() {
        let d = dirac_comb(400.0);
        let (nu, nu_hat) = descend_even(&d).unwrap();
        assert_eq!(nu.normalized_atoms(), nu_hat.normalized_atoms());
    }

    #[test]
    fn even_descent_adjunction_on_sigma3() {
        let s = sigma3(400.0);
        let (nu, nu_hat) = descend_even(&s).unwrap();
        for (poly, a) in [(vec![1.0], 2.0), (vec![0.0, 0.0, 1.0], 3.0), (vec![1.0, 0.0, -0.5, 0.0, 0.25], 1.7)] {
            let phi = PolyGaussian::real(&poly, a).unwrap();
            let lhs = nu_hat.pair(&phi, 1e-11).unwrap().0;
            let rhs = nu.pair(&phi.fourier(), 1e-11).unwrap().0;
            assert!((lhs - rhs).norm() < 1e-9, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn even_descent_point_mass() {
        let m = SphericalMeasure::from_series(&QSeries::constant(Coeff::one()), 3).unwrap().with_eigen(Phase4::ONE);
        let (nu, nu_hat) = descend_even(&m).unwrap();
        assert_eq!(nu.atoms().len(), 1);
        let a = &nu_hat.atoms()[0];
        assert_eq!(a.order, 2);
        assert!((a.weight.value(0.0).re + 1.0 / (2.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn odd_descent_k3_closed_form() {
        let s = sigma3(100.0);
        let (nu, nu_hat) = descend_odd(&s).unwrap();
        // ν̂ = −i · ν(μ̂) with μ̂ = μ
        assert_eq!(nu_hat.normalized_atoms(), nu.scale(&Coeff::one().mul_i_pow(3)).normalized_atoms());
        assert_eq!(nu.eigen(), Some(Phase4::MINUS_I));
    }

    #[test]
    fn odd_descent_adjunction() {
        for k in [3u32, 5, 7] {
            let n = 400usize;
            let r = rep_numbers(k, n).unwrap();
            let terms: Vec<_> = r
                .into_iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(m, c)| (Exponent::integer(m as i64), Coeff::from_bigint(c)))
                .collect();
            let f = QSeries::new(terms, Growth::new(2f64.powi(k as i32), k as f64 / 2.0).unwrap(), Some(n as f64), Some(1.0)).unwrap();
            let mu = SphericalMeasure::from_series(&f, k).unwrap();
            // the theta function of Σ r_k(m) δ on radii √m is ϑ(τ/2)^k, with μ̂ = μ
            let mu = mu.with_eigen(Phase4::ONE);
            let (nu, nu_hat) = descend_odd(&mu).unwrap();
            for (poly, a) in [(vec![0.0, 1.0], 2.0), (vec![0.0, 1.0, 0.0, -1.0], 3.0)] {
                let phi = PolyGaussian::real(&poly, a).unwrap();
                let lhs = nu_hat.pair(&phi, 1e-10).unwrap().0;
                let rhs = nu.pair(&phi.fourier(), 1e-10).unwrap().0;
                assert!((lhs - rhs).norm() < 1e-8, "k={k}: {lhs} vs {rhs}");
            }
        }
    }
}
