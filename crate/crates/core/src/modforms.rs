//! Concrete modular forms with their transformation laws, and the registry of names
//! used by the command line.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::arith::{divisor_sigma, is_prime, kronecker_symbol, rep_numbers, MultiplierSystem};
use crate::error::{domain, Error, Result};
use crate::measures::{SphericalMeasure, TransformLaw};
use crate::qseries::{eta_product, Coeff, Growth, QSeries, DEFAULT_HORIZON};
use crate::Phase4;

/// A named form: its expansion and, when known, its transformation law.
#[derive(Debug, Clone)]
pub struct Form {
    pub name: String,
    pub series: QSeries,
    pub law: Option<TransformLaw>,
}

impl Form {
    pub fn law(&self) -> Result<&TransformLaw> {
        self.law
            .as_ref()
            .ok_or_else(|| Error::Domain(format!("{} has no transformation law under the Fricke group", self.name)))
    }

    /// `τ ↦ f(τ/√N)`, whose coefficients are the masses of the associated measure.
    pub fn rescaled_series(&self) -> Result<QSeries> {
        let law = self.law()?;
        self.series.rescale_argument(&BigRational::one(), law.level)
    }

    /// The associated measure; see [`associated_measure`].
    pub fn measure(&self) -> Result<SphericalMeasure> {
        associated_measure(&self.series, self.law()?)
    }
}

/// The measure `Σ c_m/vol(S^k_λ) δ_{S^k_λ}` on `R^k` with `λ = 2m/√N`, built from the
/// expansion of `τ ↦ f(τ/√N)`, with Fourier side `μ̂ = v(W_N)/v_ϑ^k(W₄)·μ`.
pub fn associated_measure(series: &QSeries, law: &TransformLaw) -> Result<SphericalMeasure> {
    let k = law.k();
    if k <= 0 {
        return domain("the associated measure needs positive weight");
    }
    let rescaled = series.rescale_argument(&BigRational::one(), law.level)?;
    let m = SphericalMeasure::from_series(&rescaled, k as u32)?;
    match law.eigen_phase() {
        Some(p) => Ok(m.with_eigen(p)),
        None => {
            let c = Coeff::float(law.fricke_eigenvalue);
            let f = m.masses().iter().map(|(e, x)| (e.clone(), x.mul(&c))).collect();
            m.with_fourier(f)
        }
    }
}

/// `ϑ^k = Σ r_k(m) e(mτ)` up to `λ = 2m ≤ horizon`.
pub fn theta_pow_with_horizon(k: u32, horizon: f64) -> Result<(QSeries, TransformLaw)> {
    if k == 0 {
        return domain("theta power needs k >= 1");
    }
    let m_max = (horizon / 2.0).floor() as usize;
    let coeffs: Vec<Coeff> = rep_numbers(k, m_max)?.into_iter().map(Coeff::from_bigint).collect();
    // r_k(m) ≤ (2√m+1)^k ≤ 2^k (1+2m)^{k/2}
    let growth = Growth::new(2f64.powi(k as i32), k as f64 / 2.0)?;
    let series = QSeries::from_classical(&coeffs, growth, horizon)?;
    Ok((series, TransformLaw::new(vec![k as i64], MultiplierSystem::theta_power(k))))
}

pub fn theta_pow(k: u32) -> Result<(QSeries, TransformLaw)> {
    theta_pow_with_horizon(k, DEFAULT_HORIZON)
}

/// Coefficients of `∏(1−q^n)^{24}` up to `q^n_max`, from Jacobi's identity
/// `∏(1−q^n)^3 = Σ (−1)^m (2m+1) q^{m(m+1)/2}` raised to the eighth power.
fn delta_product(n_max: usize) -> Vec<BigInt> {
    let mut cube = vec![BigInt::zero(); n_max + 1];
    let mut m = 0usize;
    while m * (m + 1) / 2 <= n_max {
        let sign = if m.is_multiple_of(2) { 1 } else { -1 };
        cube[m * (m + 1) / 2] = BigInt::from(sign * (2 * m as i64 + 1));
        m += 1;
    }
    let mut acc = cube.clone();
    for _ in 1..8 {
        acc = crate::arith::truncated_convolution(&acc, &cube, n_max);
    }
    acc
}

/// `Δ = q∏(1−q^n)^{24}`, the weight-12 cusp form.
pub fn delta_with_horizon(horizon: f64) -> Result<(QSeries, TransformLaw)> {
    let m_max = (horizon / 2.0).floor() as usize;
    let prod = delta_product(m_max.max(1));
    let mut coeffs = vec![Coeff::zero(); m_max + 1];
    for m in 1..=m_max {
        coeffs[m] = Coeff::from_bigint(prod[m - 1].clone());
    }
    // |τ(m)| ≤ d(m) m^{11/2} ≤ m^7 ≤ (1+2m)^7
    let series = QSeries::from_classical(&coeffs, Growth::new(1.0, 7.0)?, horizon)?;
    Ok((series, TransformLaw::new(vec![24], MultiplierSystem::trivial(1))))
}

pub fn delta() -> Result<(QSeries, TransformLaw)> {
    delta_with_horizon(DEFAULT_HORIZON)
}

/// `E₆ = 1 − 504 Σ σ₅(m) e(mτ)`.
pub fn eisenstein6_with_horizon(horizon: f64) -> Result<(QSeries, TransformLaw)> {
    let m_max = (horizon / 2.0).floor() as usize;
    let mut coeffs = vec![Coeff::one()];
    for m in 1..=m_max {
        coeffs.push(Coeff::from_bigint(divisor_sigma(5, m as u64)? * -504));
    }
    // σ₅(m) ≤ ζ(5) m^5 < 1.04 m^5
    let series = QSeries::from_classical(&coeffs, Growth::new(525.0, 5.0)?, horizon)?;
    Ok((series, TransformLaw::new(vec![12], MultiplierSystem::trivial(1))))
}

pub fn eisenstein6() -> Result<(QSeries, TransformLaw)> {
    eisenstein6_with_horizon(DEFAULT_HORIZON)
}

/// `L(χ, s)` for the Legendre character mod `n` at an integer `s ≥ 2`, with the partial sum
/// taken far enough that `Σ_{m>M} m^{−s} ≤ M^{1−s}/(s−1) < 1e−12`.
pub fn dirichlet_l_value(n: u64, s: u32) -> Result<(f64, f64)> {
    if s < 2 {
        return domain("L-value needs s >= 2");
    }
    let m_max = ((1e12 / (s as f64 - 1.0)).powf(1.0 / (s as f64 - 1.0))).ceil() as u64 + 1;
    let tail = (m_max as f64).powf(1.0 - s as f64) / (s as f64 - 1.0);
    // sum from the small terms upward to limit rounding
    let mut total = 0.0f64;
    for m in (1..=m_max).rev() {
        let chi = kronecker_symbol(m as i64, n as i64) as f64;
        if chi != 0.0 {
            total += chi * (m as f64).powi(-(s as i32));
        }
    }
    Ok((total, tail))
}

/// Sign choice of the Fricke Eisenstein series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrickeSign {
    Plus,
    Minus,
}

/// The Eisenstein series of weight `h` for `Γ₀⁺(N)` with the Legendre character mod `N`:
/// `1 + A^{−1} Σ_m Σ_{d|m} (χ(d) ± N^{(h−1)/2} χ(m/d)) d^{h−1} e(mτ)`.
pub fn fricke_eisenstein_with_horizon(n: u64, h: u32, sign: FrickeSign, horizon: f64) -> Result<(QSeries, TransformLaw)> {
    if n < 3 || !is_prime(n) {
        return domain("Fricke Eisenstein series needs an odd prime level");
    }
    if h < 3 {
        return domain("Fricke Eisenstein series needs weight >= 3");
    }
    let chi_minus_one = kronecker_symbol(-1, n as i64);
    let parity = if h.is_multiple_of(2) { 1 } else { -1 };
    if chi_minus_one != parity {
        return domain("character parity does not match the weight: need χ(−1) = (−1)^h");
    }
    let (l_value, _) = dirichlet_l_value(n, h)?;
    let hf = h as f64;
    let floor_sign = if (h / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
    let fact: f64 = (1..h).map(|x| x as f64).product();
    let a = floor_sign * (n as f64).powf((2.0 * hf - 1.0) / 2.0) * fact / (2.0 * PI).powi(h as i32) * l_value;
    let eps = match sign {
        FrickeSign::Plus => 1.0,
        FrickeSign::Minus => -1.0,
    };
    let root = (n as f64).powf((hf - 1.0) / 2.0);
    let m_max = (horizon / 2.0).floor() as u64;
    let mut coeffs = vec![Coeff::one()];
    for m in 1..=m_max {
        let mut s = 0.0;
        for d in 1..=m {
            if m % d == 0 {
                let chi_d = kronecker_symbol(d as i64, n as i64) as f64;
                let chi_e = kronecker_symbol((m / d) as i64, n as i64) as f64;
                s += (chi_d + eps * root * chi_e) * (d as f64).powi(h as i32 - 1);
            }
        }
        coeffs.push(Coeff::float(Complex64::new(s / a, 0.0)));
    }
    // σ_{h−1}(m) ≤ ζ(2) m^{h−1} ≤ (1+2m)^h
    let growth = Growth::new(((1.0 + root) / a.abs()).max(1.0), hf)?;
    let series = QSeries::from_classical(&coeffs, growth, horizon)?;
    // χ(W_N) = ±(−i)^h (−1)^{⌊h/2⌋}
    let mut w = Phase4::new(-(h as i64));
    if (h / 2) % 2 == 1 {
        w = w.mul(Phase4::MINUS_ONE);
    }
    if sign == FrickeSign::Minus {
        w = w.mul(Phase4::MINUS_ONE);
    }
    let mult = MultiplierSystem::dirichlet_extension(n, w)?;
    Ok((series, TransformLaw::new(vec![2 * h as i64], mult)))
}

pub fn fricke_eisenstein(n: u64, h: u32, sign: FrickeSign) -> Result<(QSeries, TransformLaw)> {
    fricke_eisenstein_with_horizon(n, h, sign, DEFAULT_HORIZON)
}

/// `v(W_N)/v_ϑ^k(W₄)` with `v_ϑ(W₄) = e^{−iπ/4}`.
pub fn transform_law_eigenvalue(law: &TransformLaw) -> Complex64 {
    law.fricke_eigenvalue
}

/// An eta product with its law, when the exponents are symmetric under `d ↦ N/d`.
pub fn eta_form(exponents: &BTreeMap<u64, i64>, horizon: f64) -> Result<(QSeries, Option<TransformLaw>)> {
    let series = eta_product(exponents, horizon)?;
    let law = MultiplierSystem::eta_quotient(exponents.clone())
        .ok()
        .map(|m| TransformLaw::new(vec![exponents.values().sum()], m));
    Ok((series, law))
}

fn parse_kv(spec: &str) -> Result<BTreeMap<String, String>> {
    spec.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            p.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| Error::Parse(format!("expected key=value, got {p:?}")))
        })
        .collect()
}

/// Looks up a form by registry name: `theta^k`, `delta`, `E6`, `etaprod:{d:r,...}`,
/// `frickeE:N=..,k2=..,sign=..` (with `k2` the weight).
pub fn form_by_name(name: &str, horizon: f64) -> Result<Form> {
    let name = name.trim();
    let wrap = |(series, law): (QSeries, TransformLaw)| Form { name: name.to_string(), series, law: Some(law) };
    if let Some(k) = name.strip_prefix("theta^") {
        let k: u32 = k.parse().map_err(|_| Error::Parse(format!("bad theta power in {name:?}")))?;
        return theta_pow_with_horizon(k, horizon).map(wrap);
    }
    if name == "theta" {
        return theta_pow_with_horizon(1, horizon).map(wrap);
    }
    if name == "delta" {
        return delta_with_horizon(horizon).map(wrap);
    }
    if name == "E6" {
        return eisenstein6_with_horizon(horizon).map(wrap);
    }
    if let Some(rest) = name.strip_prefix("etaprod:") {
        let body = rest.trim().trim_start_matches('{').trim_end_matches('}');
        let mut exps = BTreeMap::new();
        for part in body.split(',').filter(|p| !p.trim().is_empty()) {
            let (d, r) = part.split_once(':').ok_or_else(|| Error::Parse(format!("expected d:r, got {part:?}")))?;
            let d: u64 = d.trim().parse().map_err(|_| Error::Parse(format!("bad period {d:?}")))?;
            let r: i64 = r.trim().parse().map_err(|_| Error::Parse(format!("bad exponent {r:?}")))?;
            *exps.entry(d).or_insert(0) += r;
        }
        let (series, law) = eta_form(&exps, horizon)?;
        return Ok(Form { name: name.to_string(), series, law });
    }
    if let Some(rest) = name.strip_prefix("frickeE:") {
        let kv = parse_kv(rest)?;
        let get = |k: &str| kv.get(k).ok_or_else(|| Error::Parse(format!("frickeE needs {k}=")));
        let n: u64 = get("N")?.parse().map_err(|_| Error::Parse("bad N".into()))?;
        let h: u32 = get("k2")?.parse().map_err(|_| Error::Parse("bad k2".into()))?;
        let sign = match get("sign")?.as_str() {
            "+" | "plus" | "+1" => FrickeSign::Plus,
            "-" | "minus" | "-1" => FrickeSign::Minus,
            s => return Err(Error::Parse(format!("bad sign {s:?}"))),
        };
        return fricke_eisenstein_with_horizon(n, h, sign, horizon).map(wrap);
    }
    Err(Error::Parse(format!("unknown form {name:?}")))
}

/// Evaluates a form at `τ` using its stored expansion.
pub fn evaluate_form(series: &QSeries, tau: Complex64, tol: f64) -> Result<Complex64> {
    series.evaluate(tau, tol).map(|(v, _)| v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;
    use crate::arith::principal_sqrt;

    fn c(n: i64) -> Coeff {
        Coeff::from_integer(n)
    }

    #[test]
    fn theta_examples() {
        let (t3, law) = theta_pow(3).unwrap();
        assert_eq!(t3.classical_coeff(2), c(12));
        assert!((transform_law_eigenvalue(&law) - 1.0).norm() < 1e-15);
        let (t1, _) = theta_pow(1).unwrap();
        assert_eq!(t1.classical_coeff(0), c(1));
        let (t2, _) = theta_pow(2).unwrap();
        assert_eq!(t2.classical_coeff(5), c(8));
    }

    #[test]
    fn delta_examples() {
        let (d, law) = delta().unwrap();
        assert_eq!(d.classical_coeff(0), c(0));
        assert_eq!(d.classical_coeff(1), c(1));
        assert_eq!(d.classical_coeff(2), c(-24));
        assert_eq!(d.classical_coeff(3), c(252));
        assert_eq!(d.classical_coeff(4), c(-1472));
        assert!((transform_law_eigenvalue(&law) - 1.0).norm() < 1e-15);
        let mut e = BTreeMap::new();
        e.insert(1u64, 24i64);
        let eta24 = eta_product(&e, DEFAULT_HORIZON).unwrap();
        assert_eq!(eta24.terms(), d.terms());
    }

    #[test]
    fn e6_examples() {
        let (e, law) = eisenstein6().unwrap();
        assert_eq!(e.classical_coeff(0), c(1));
        assert_eq!(e.classical_coeff(1), c(-504));
        assert_eq!(e.classical_coeff(2), c(-16632));
        assert!((transform_law_eigenvalue(&law) + 1.0).norm() < 1e-15);
        let trivial8 = TransformLaw::new(vec![16], MultiplierSystem::trivial(1));
        assert!((transform_law_eigenvalue(&trivial8) - 1.0).norm() < 1e-14);
    }

    #[test]
    fn growth_certificates_hold_exactly() {
        for m in 1..=200u64 {
            let r = rep_numbers(3, m as usize).unwrap()[m as usize].clone();
            let bound = (2.0 * (m as f64).sqrt() + 1.0).powi(3);
            assert!(r.to_f64().unwrap() <= bound);
        }
        let (d, _) = delta().unwrap();
        for m in 1..=200u64 {
            let t = d.classical_coeff(m).to_c64().re.abs();
            assert!(t <= (m as f64).powi(7));
        }
        for m in 1..=200u64 {
            let s = divisor_sigma(5, m).unwrap() * 504;
            assert!(s <= BigInt::from(m).pow(6) * 504 * 2);
        }
    }

    #[test]
    fn fricke_eisenstein_examples() {
        let (f, law) = fricke_eisenstein(5, 4, FrickeSign::Plus).unwrap();
        assert_eq!(f.classical_coeff(0), c(1));
        // the m = 1 coefficient is (1 + 5√5)/A
        let (l, _) = dirichlet_l_value(5, 4).unwrap();
        let a = 5f64.powf(3.5) * 6.0 / (2.0 * PI).powi(4) * l;
        assert!((f.classical_coeff(1).to_c64().re - (1.0 + 5f64.powf(1.5)) / a).abs() < 1e-12);
        let eig = transform_law_eigenvalue(&law);
        assert!((eig.norm() - 1.0).abs() < 1e-15);
        assert!(fricke_eisenstein(5, 3, FrickeSign::Plus).is_err());
        assert!(fricke_eisenstein(9, 4, FrickeSign::Plus).is_err());
    }

    fn fricke_residual(series: &QSeries, law: &TransformLaw, tau: Complex64) -> f64 {
        let n = law.level as f64;
        let lhs = series.evaluate(-1.0 / (tau * n), 1e-12).unwrap().0;
        let rhs = law.multiplier.fricke_value() * principal_sqrt(tau * n.sqrt()).powi(law.k() as i32) * series.evaluate(tau, 1e-12).unwrap().0;
        (lhs - rhs).norm() / (1.0 + lhs.norm())
    }

    #[test]
    fn fricke_eisenstein_transformation() {
        let grid = [Complex64::new(0.0, 1.0 / 5f64.sqrt()), Complex64::new(0.1, 0.5), Complex64::new(-0.2, 0.7)];
        for (n, h) in [(5u64, 4u32), (3, 3), (7, 3), (5, 6), (13, 4)] {
            for sign in [FrickeSign::Plus, FrickeSign::Minus] {
                let (f, law) = fricke_eisenstein(n, h, sign).unwrap();
                for &tau in &grid {
                    if (tau * n as f64).im < 0.25 || (-1.0 / (tau * n as f64)).im < 0.25 {
                        continue;
                    }
                    let r = fricke_residual(&f, &law, tau);
                    assert!(r < 1e-6, "N={n} h={h} {sign:?} τ={tau}: {r}");
                }
            }
        }
    }

    #[test]
    fn eta_quotient_transformation() {
        let grid = [Complex64::new(0.05, 0.6), Complex64::new(-0.2, 0.8)];
        for spec in ["etaprod:{1:2,2:2}", "etaprod:{1:8,2:8}", "etaprod:{1:3,3:3}", "etaprod:{1:1,23:1}", "etaprod:{1:24}"] {
            let form = form_by_name(spec, 400.0).unwrap();
            let law = form.law().unwrap();
            assert!((transform_law_eigenvalue(law) - 1.0).norm() < 1e-12);
            for &tau in &grid {
                let n = law.level as f64;
                if (tau * n).im < 0.3 || (-1.0 / (tau * n)).im < 0.3 {
                    continue;
                }
                let r = fricke_residual(&form.series, law, tau);
                assert!(r < 1e-9, "{spec}: {r}");
            }
        }
    }

    #[test]
    fn registry() {
        assert!(form_by_name("theta^3", 100.0).is_ok());
        assert!(form_by_name("delta", 100.0).is_ok());
        assert!(form_by_name("E6", 100.0).is_ok());
        assert!(form_by_name("frickeE:N=5,k2=4,sign=+", 100.0).is_ok());
        assert!(form_by_name("etaprod:{1:2,2:1}", 100.0).unwrap().law.is_none());
        assert!(form_by_name("nonsense", 100.0).is_err());
    }
}
