//! Numerical certification of transformation laws and summation formulas.
//!
//! Every check returns a [`Report`] listing one residual per probe. Series are evaluated with
//! a tail budget of `tol/10`; when the truncation cannot meet it the check fails with
//! [`Error::Truncation`] instead of reporting a pass it cannot back up.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arith::principal_sqrt;
use crate::error::{domain, Error, Result};
use crate::measures::{descend_even, descend_odd, LineDistribution, SphericalMeasure, TransformLaw, WeilGenerator};
use crate::modforms::associated_measure;
use crate::qseries::QSeries;
use crate::schwartz::{Parity, PolyGaussian, RadialPolyGaussian};
use crate::Phase4;

/// The default probe grid: a Fricke fixed point for level 4, the S fixed point, and two
/// points off the imaginary axis.
pub fn default_grid() -> Vec<Complex64> {
    vec![
        Complex64::new(0.0, 0.5),
        Complex64::new(0.0, 1.0),
        Complex64::new(0.0, 2.0),
        Complex64::new(0.3, 1.1),
        Complex64::new(-0.25, 0.8),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// One probe: both sides of the identity, their distance and the truncation error spent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub probe: String,
    pub lhs: [f64; 2],
    pub rhs: [f64; 2],
    pub residual: f64,
    pub tail_budget: f64,
    /// The identity holds by construction for this probe; excluded from the verdict.
    pub vacuous: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub identity: String,
    pub parameters: BTreeMap<String, String>,
    pub tolerance: f64,
    pub residuals: Vec<Residual>,
    pub verdict: Verdict,
}

impl Report {
    fn new(identity: &str, parameters: BTreeMap<String, String>, tolerance: f64, mut residuals: Vec<Residual>) -> Report {
        residuals.sort_by(|a, b| a.probe.cmp(&b.probe));
        let live: Vec<_> = residuals.iter().filter(|r| !r.vacuous).collect();
        let ok = !live.is_empty() && live.iter().all(|r| r.residual <= tolerance && r.tail_budget <= tolerance / 10.0);
        Report {
            identity: identity.to_string(),
            parameters,
            tolerance,
            residuals,
            verdict: if ok { Verdict::Pass } else { Verdict::Fail },
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// Largest non-vacuous residual.
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().filter(|r| !r.vacuous).map(|r| r.residual).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports are plain data")
    }
}

fn residual(probe: String, lhs: Complex64, rhs: Complex64, tail_budget: f64, vacuous: bool) -> Residual {
    Residual { probe, lhs: [lhs.re, lhs.im], rhs: [rhs.re, rhs.im], residual: (lhs - rhs).norm(), tail_budget, vacuous }
}

fn fmt_c(z: Complex64) -> String {
    format!("{}{:+}i", z.re, z.im)
}

fn params<const N: usize>(items: [(&str, String); N]) -> BTreeMap<String, String> {
    items.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn close(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() < 1e-12
}

/// `f(−1/(Nτ)) = v(W_N)·(√N τ)^{k/2}·f(τ)` at every grid point.
pub fn check_modular_transform(f: &QSeries, law: &TransformLaw, grid: &[Complex64], tol: f64) -> Result<Report> {
    if law.twice_weight.len() != 1 {
        return domain("modular check needs a single-variable law");
    }
    if grid.iter().any(|t| t.im < 0.3) {
        return domain("grid points need Im τ >= 0.3");
    }
    let n = law.level as f64;
    let k = law.k() as i32;
    let v = law.multiplier.fricke_value();
    let budget = tol / 10.0;
    let mut out = Vec::new();
    for &tau in grid {
        let image = -1.0 / (tau * n);
        let (lhs, t1) = f.evaluate(image, budget / 2.0)?;
        let factor = v * principal_sqrt(tau * n.sqrt()).powi(k);
        let (value, t2) = f.evaluate(tau, budget / 2.0 / factor.norm().max(1.0))?;
        let fixed = close(image, tau) && close(factor, Complex64::new(1.0, 0.0));
        out.push(residual(fmt_c(tau), lhs, factor * value, t1 + factor.norm() * t2, fixed));
    }
    Ok(Report::new(
        "modular",
        params([("level", law.level.to_string()), ("k", k.to_string()), ("fricke_value", fmt_c(v))]),
        tol,
        out,
    ))
}

fn law_measure(f: &QSeries, law: &TransformLaw, k: u32) -> Result<SphericalMeasure> {
    if law.k() != k as i64 {
        return domain(format!("dimension {k} does not match twice the weight {}", law.k()));
    }
    associated_measure(f, law)
}

/// `⟨μ, φ⟩ = e⁻¹⟨μ, φ̂⟩` for the measure attached to the form, `e` its Fricke eigenvalue.
pub fn check_psf_radial(f: &QSeries, law: &TransformLaw, k: u32, testfns: &[RadialPolyGaussian], tol: f64) -> Result<Report> {
    let mu = law_measure(f, law, k)?;
    let eig = law.fricke_eigenvalue;
    let budget = tol / 10.0;
    let mut out = Vec::new();
    for (i, phi) in testfns.iter().enumerate() {
        if phi.dim() != k {
            return domain("test function lives in the wrong dimension");
        }
        let hat = phi.fourier_radial();
        let (lhs, t1) = mu.pair_radial(phi, budget / 2.0)?;
        let (r, t2) = mu.pair_radial(&hat, budget / 2.0)?;
        let vacuous = phi.proportionality(&hat, 1e-12).is_some_and(|c| close(c.conj() * eig.conj(), Complex64::new(1.0, 0.0)));
        out.push(residual(format!("phi{i}"), lhs, eig.conj() * r, t1 + t2, vacuous));
    }
    Ok(Report::new("psf-radial", params([("k", k.to_string()), ("level", law.level.to_string()), ("eigenvalue", fmt_c(eig))]), tol, out))
}

fn require_parity(phi: &PolyGaussian, parity: Parity) -> Result<()> {
    match phi.parity_project(parity) {
        Some(p) if p.approx_eq(phi, 1e-14) => Ok(()),
        _ => domain(format!("test function must be {parity:?}")),
    }
}

fn odd_k(law: &TransformLaw) -> Result<u32> {
    let k = law.k();
    if k <= 0 || k % 2 == 0 {
        return domain("summation formulas on the line need odd k");
    }
    Ok(k as u32)
}

fn line_checks(name: &str, k: u32, nu: &LineDistribution, nu_hat: &LineDistribution, testfns: &[PolyGaussian], parity: Parity, tol: f64) -> Result<Report> {
    let budget = tol / 10.0;
    let mut out = Vec::new();
    for (i, phi) in testfns.iter().enumerate() {
        require_parity(phi, parity)?;
        // ⟨ν, φ⟩ = ⟨ν̂, φ̂(−·)⟩ by Fourier inversion
        let hat = phi.fourier();
        let (lhs, t1) = nu.pair(phi, budget / 2.0)?;
        let (rhs, t2) = nu_hat.pair(&hat.reflect(), budget / 2.0)?;
        // with φ̂ = cφ and ν̂ = i^ε ν the right side is i^ε·c·(±1)·⟨ν, φ⟩
        let sign = if parity == Parity::Even { 1.0 } else { -1.0 };
        let vacuous = match (phi.proportionality(&hat, 1e-12), nu.eigen()) {
            (Some(c), Some(e)) => close(e.to_complex() * c * sign, Complex64::new(1.0, 0.0)),
            _ => false,
        };
        out.push(residual(format!("phi{i}"), lhs, rhs, t1 + t2, vacuous));
    }
    Ok(Report::new(name, params([("k", k.to_string())]), tol, out))
}

/// The even summation formula: `ν = i^*μ` against its transform from the descent constants.
pub fn check_psf_even(f: &QSeries, law: &TransformLaw, testfns: &[PolyGaussian], tol: f64) -> Result<Report> {
    let k = odd_k(law)?;
    let (nu, nu_hat) = descend_even(&associated_measure(f, law)?)?;
    line_checks("psf-even", k, &nu, &nu_hat, testfns, Parity::Even, tol)
}

/// The odd summation formula: `ν = (1/x)i^*μ` against its transform; needs `k ≥ 3`.
pub fn check_psf_odd(f: &QSeries, law: &TransformLaw, testfns: &[PolyGaussian], tol: f64) -> Result<Report> {
    let k = odd_k(law)?;
    if k < 3 {
        return domain("the odd summation formula needs k >= 3");
    }
    let (nu, nu_hat) = descend_odd(&associated_measure(f, law)?)?;
    line_checks("psf-odd", k, &nu, &nu_hat, testfns, Parity::Odd, tol)
}

fn word_name(word: &[WeilGenerator]) -> String {
    word.iter()
        .map(|g| match g {
            WeilGenerator::Rot(a) => format!("rot({a})"),
            WeilGenerator::T(b) => format!("t({b})"),
            WeilGenerator::S => "S".to_string(),
        })
        .collect::<Vec<_>>()
        .join("*")
}

/// `θ_{μ|M}(τ) = (θ_μ|_{K/2} M)(τ)` on the diagonal `τ̄ = (τ, …, τ)`, with `M` applied
/// letter by letter from the left.
pub fn check_weil_equivariance(mu: &SphericalMeasure, word: &[WeilGenerator], grid: &[Complex64], tol: f64) -> Result<Report> {
    let mut acted = mu.clone();
    for g in word {
        acted = acted.weil_action(g)?;
    }
    let n = mu.dims().len();
    let k = mu.total_dim();
    let budget = tol / 10.0;
    let spent = std::cell::Cell::new(0.0f64);
    let theta = |t: Complex64| -> Result<Complex64> {
        let (v, tail) = mu.theta(&vec![t; n], budget / 4.0)?;
        spent.set(spent.get() + tail);
        Ok(v)
    };
    fn slashed(word: &[WeilGenerator], k: i64, tau: Complex64, base: &dyn Fn(Complex64) -> Result<Complex64>) -> Result<Complex64> {
        match word.split_last() {
            None => base(tau),
            Some((g, rest)) => g.slash(k, tau, &|t| slashed(rest, k, t, base)),
        }
    }
    let mut out = Vec::new();
    for &tau in grid {
        spent.set(0.0);
        let (lhs, t1) = acted.theta(&vec![tau; n], budget / 2.0)?;
        let rhs = slashed(word, k, tau, &theta)?;
        out.push(residual(fmt_c(tau), lhs, rhs, t1 + spent.get(), false));
    }
    Ok(Report::new("weil", params([("word", word_name(word)), ("K", k.to_string())]), tol, out))
}

/// `⟨μ, ĝ⟩ = i^ε⟨μ, g⟩` for the Gaussians `g(·, τ)`, i.e.
/// `θ_μ(−1/τ) = i^ε √(−iτ)^K θ_μ(τ)` on the diagonal.
pub fn check_eigen_spherical(mu: &SphericalMeasure, eps: Phase4, grid: &[Complex64], tol: f64) -> Result<Report> {
    let n = mu.dims().len();
    let budget = tol / 10.0;
    let mut out = Vec::new();
    for &tau in grid {
        let inv = -1.0 / tau;
        let (lhs, t1) = mu.theta(&vec![inv; n], budget / 2.0)?;
        let factor: Complex64 = mu.dims().iter().map(|&k| principal_sqrt(-Complex64::i() * tau).powi(k as i32)).product::<Complex64>() * eps.to_complex();
        let (v, t2) = mu.theta(&vec![tau; n], budget / 2.0 / factor.norm().max(1.0))?;
        let vacuous = close(inv, tau) && close(factor, Complex64::new(1.0, 0.0));
        out.push(residual(fmt_c(tau), lhs, factor * v, t1 + factor.norm() * t2, vacuous));
    }
    let dims = mu.dims().iter().map(u32::to_string).collect::<Vec<_>>().join(",");
    Ok(Report::new("eigen", params([("dims", dims), ("epsilon", eps.exponent().to_string())]), tol, out))
}

/// `⟨ν, φ̂⟩ = i^ε⟨ν, φ⟩` on line test functions.
pub fn check_eigen_line(nu: &LineDistribution, eps: Phase4, testfns: &[PolyGaussian], tol: f64) -> Result<Report> {
    let budget = tol / 10.0;
    let mut out = Vec::new();
    for (i, phi) in testfns.iter().enumerate() {
        let hat = phi.fourier();
        let (lhs, t1) = nu.pair(&hat, budget / 2.0)?;
        let (v, t2) = nu.pair(phi, budget / 2.0)?;
        // a test function with no component of ν's parity pairs to zero on both sides
        let vacuous = phi.parity_project(nu.parity()).is_none()
            || phi.proportionality(&hat, 1e-12).is_some_and(|c| close(c, eps.to_complex()));
        out.push(residual(format!("phi{i}"), lhs, eps.to_complex() * v, t1 + t2, vacuous));
    }
    Ok(Report::new("eigen-line", params([("parity", format!("{:?}", nu.parity())), ("epsilon", eps.exponent().to_string())]), tol, out))
}

/// Whether an error came from an unattainable tail budget.
pub fn is_truncation(e: &Error) -> bool {
    matches!(e, Error::Truncation { .. })
}
