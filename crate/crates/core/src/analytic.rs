//! Closed-form results: the weak-probe coherence without interference, and
//! the pump-only steady state at `Δ2 = 0`, `W12 = -G`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::SystemParams;

const POLE_TOL: f64 = 1e-14;

/// Weak-probe coherence `ρ13` without interference, including the factor
/// `g`. `η` is ignored.
pub fn rho13_no_vic(params: &SystemParams) -> Result<Complex64> {
    let SystemParams { gamma1: g1, gamma2: g2, big_g, small_g, delta1: d1, delta2: d2, .. } = *params;
    let i = Complex64::i();
    let gg = big_g * big_g;
    let num = (g2 * g2 + d2 * d2 + gg) * (d2 - d1 + i * (g1 + g2)) + gg * (d2 - i * g2);
    let den = (g2 * g2 + d2 * d2 + 2.0 * gg) * (gg + (d1 - i * g1) * (d2 - d1 + i * (g1 + g2)));
    if den.norm() < POLE_TOL {
        return Err(Error::ZeroDenominator);
    }
    Ok(num * small_g / den)
}

/// Pump-only steady state in closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpResponse {
    pub sigma23: Complex64,
    pub sigma11: f64,
    pub sigma_mm: f64,
    pub sigma_pp: f64,
    /// `⟨+|σ|−⟩`
    pub sigma_pm: Complex64,
    pub a_const: f64,
    pub b_const: f64,
}

impl PumpResponse {
    pub fn population_sum(&self) -> f64 {
        self.sigma11 + self.sigma_mm + self.sigma_pp
    }

    /// `|σ23 - ((σ−− - σ++)/2 + i Im σ+−)|`
    pub fn dressed_identity_error(&self) -> f64 {
        let rebuilt = Complex64::new((self.sigma_mm - self.sigma_pp) / 2.0, self.sigma_pm.im);
        (self.sigma23 - rebuilt).norm()
    }
}

pub(crate) fn check_closed_form_regime(params: &SystemParams) -> Result<()> {
    let scale = 1f64.max(params.big_g.abs());
    if params.delta2.abs() > 1e-12 * scale || (params.w12 + params.big_g).abs() > 1e-12 * scale {
        return Err(Error::RegimeViolation(format!(
            "closed forms need delta2 = 0 and w12 = -big_g, got delta2 = {}, w12 = {}, big_g = {}",
            params.delta2, params.w12, params.big_g
        )));
    }
    Ok(())
}

/// `γ1γ2 - η²`, written as `γ1γ2·sin²θ` so that it vanishes exactly for
/// parallel dipoles.
fn eta_deficit(params: &SystemParams) -> f64 {
    let g12 = params.gamma1 * params.gamma2;
    if params.vic_enabled() {
        g12 * params.theta_rad().sin().powi(2)
    } else {
        g12
    }
}

/// The constant `A`.
pub fn a_const(params: &SystemParams) -> f64 {
    let (g1, g2) = (params.gamma1, params.gamma2);
    let gg = params.big_g * params.big_g;
    gg * g2 * g2 + 4.0 * gg * g1 * g2 + g1 * g1 * g2 * g2 + 4.0 * gg * g1 * g1 + 2.0 * g1.powi(3) * g2 + g1.powi(4)
}

fn b_const(params: &SystemParams, a: f64) -> f64 {
    let (g1, g2) = (params.gamma1, params.gamma2);
    let gg = params.big_g * params.big_g;
    let e2 = params.eta().powi(2);
    let x = eta_deficit(params);
    x * (a * (g2 * g2 + 2.0 * gg) + e2 * gg * g1 * (g2 + 2.0 * g1))
        + e2 * gg * gg * (g2 + 2.0 * g1).powi(2)
        + e2 * (g1 + g2).powi(2) * (3.0 * g1 * g2 * e2 - 2.0 * g1 * g1 * g2 * g2 - e2 * e2)
}

/// Pump coherence and dressed populations to all orders in `G`.
///
/// `σ11` and `σ−−` use the forms that agree with the numerical steady state:
/// `σ11 = G²η²[G²γ2(γ2+2γ1) + (γ1+γ2)²(γ1γ2-η²)]/B`, and the `G⁴` term of
/// `σ−−` carries `4G⁴η²γ1(γ2+2γ1)`.
pub fn sigma23_exact(params: &SystemParams) -> Result<PumpResponse> {
    closed_form(params, 0.0)
}

/// [`sigma23_exact`] with `A` scaled by `1 + perturbation`. Only useful to
/// demonstrate that the checks detect a wrong constant.
#[doc(hidden)]
pub fn sigma23_exact_perturbed(params: &SystemParams, perturbation: f64) -> Result<PumpResponse> {
    closed_form(params, perturbation)
}

fn closed_form(params: &SystemParams, perturbation: f64) -> Result<PumpResponse> {
    check_closed_form_regime(params)?;
    let (g1, g2, big_g) = (params.gamma1, params.gamma2, params.big_g);
    let gg = big_g * big_g;
    let e2 = params.eta().powi(2);
    let x = eta_deficit(params);
    let s12 = (g1 + g2).powi(2);
    let a = a_const(params) * (1.0 + perturbation);
    let b = b_const(params, a);
    if b == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    let tail = 3.0 * g1 * g2 * e2 - 2.0 * g1 * g1 * g2 * g2 - e2 * e2;

    let sigma23 = Complex64::new(
        gg * e2 * (gg * (2.0 * g1 + g2) * g1 + (e2 - g1 * g2) * s12),
        big_g * x * (a * g2 - e2 * g1 * s12),
    ) / b;

    let sigma11 = gg * e2 * (gg * g2 * (g2 + 2.0 * g1) + s12 * x) / b;

    let sigma_mm = ((g2 * g2 + 2.0 * gg) * a * x
        - e2 * gg * x * (3.0 * g2 * g2 + 5.0 * g1 * g2 + g1 * g1)
        + 4.0 * gg * gg * e2 * g1 * (g2 + 2.0 * g1)
        + e2 * s12 * tail)
        / (2.0 * b);

    let sigma_pp = x
        * (a * (g2 * g2 + 2.0 * gg) + gg * e2 * g1 * (g2 + 2.0 * g1) + e2 * s12 * (gg - 2.0 * g1 * g2 + e2))
        / (2.0 * b);

    let sigma_pm = Complex64::new(
        -x * (a * g2 * g2 - gg * (g2 * g2 + g1 * g2 - g1 * g1) * e2) - e2 * s12 * tail,
        2.0 * big_g * x * (a * g2 - e2 * g1 * s12),
    ) / (2.0 * b);

    Ok(PumpResponse { sigma23, sigma11, sigma_mm, sigma_pp, sigma_pm, a_const: a, b_const: b })
}

/// Small-angle approximation of `σ23`, accurate when `η² ≈ γ1γ2`.
pub fn sigma23_small_theta(params: &SystemParams) -> Result<Complex64> {
    let (g1, g2, big_g) = (params.gamma1, params.gamma2, params.big_g);
    if big_g == 0.0 {
        return Err(Error::ZeroPump);
    }
    check_closed_form_regime(params)?;
    Ok(Complex64::new(g1 / (g2 + 2.0 * g1), small_theta_im_pm(params)))
}

fn small_theta_im_pm(params: &SystemParams) -> f64 {
    let (g1, g2, big_g) = (params.gamma1, params.gamma2, params.big_g);
    let x = eta_deficit(params);
    x * (a_const(params) - g1 * g1 * (g1 + g2).powi(2)) / (big_g.powi(3) * g1 * (g2 + 2.0 * g1).powi(2))
}

/// Small-angle dressed populations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallThetaPopulations {
    pub sigma11: f64,
    pub sigma_mm: f64,
    pub sigma_pp: f64,
    pub im_sigma_pm: f64,
}

pub fn trap_populations_small_theta(params: &SystemParams) -> Result<SmallThetaPopulations> {
    let (g1, g2, big_g) = (params.gamma1, params.gamma2, params.big_g);
    if big_g == 0.0 {
        return Err(Error::ZeroPump);
    }
    check_closed_form_regime(params)?;
    let gg = big_g * big_g;
    let x = eta_deficit(params);
    let d = g2 + 2.0 * g1;
    let a = a_const(params);
    let sigma_pp = x
        * (a * (g2 * g2 + 2.0 * gg) + gg * g1 * g1 * g2 * d + g1 * g2 * (g1 + g2).powi(2) * (gg - g1 * g2))
        / (2.0 * gg * gg * g1 * g2 * d * d);
    Ok(SmallThetaPopulations {
        sigma11: g2 / d,
        sigma_mm: 2.0 * g1 / d,
        sigma_pp,
        im_sigma_pm: small_theta_im_pm(params),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::Preset;

    fn pump(g1: f64, g2: f64, theta: f64, big_g: f64) -> SystemParams {
        SystemParams {
            gamma1: g1,
            gamma2: g2,
            theta_deg: theta,
            big_g,
            w12: -big_g,
            delta2: 0.0,
            ..Preset::Fig5.params()
        }
    }

    #[test]
    fn rho13_resonant_value() {
        let p = SystemParams {
            gamma1: 1.0,
            gamma2: 1.0,
            big_g: 10.0,
            delta1: 0.0,
            delta2: 0.0,
            small_g: 1.0,
            ..Preset::Fig2a.params()
        };
        let r = rho13_no_vic(&p).unwrap();
        assert!(r.re.abs() < 1e-16);
        assert!((r.im - 102.0 / 20502.0).abs() < 1e-15);
    }

    #[test]
    fn rho13_pole_is_reported() {
        // the numerator and denominator both vanish only with zero widths
        let p = SystemParams {
            gamma1: 1e-9,
            gamma2: 1e-9,
            big_g: 0.0,
            delta1: 0.0,
            delta2: 0.0,
            ..Preset::Fig2a.params()
        };
        assert_eq!(rho13_no_vic(&p), Err(Error::ZeroDenominator));
    }

    #[test]
    fn no_interference_dressed_states_balance() {
        let r = sigma23_exact(&SystemParams { eta0: 0, ..pump(1.0, 1.0, 15.0, 20.0) }).unwrap();
        assert!((r.sigma_mm - r.sigma_pp).abs() < 1e-14);
        assert!(r.sigma_pm.im.abs() > 1e-3);
        assert!(r.sigma23.re.abs() < 1e-15);
    }

    #[test]
    fn fig6_dispersion() {
        let r = sigma23_exact(&Preset::Fig6.params()).unwrap();
        assert!((r.sigma23.re - 0.412095).abs() < 1e-6);
        assert!((r.sigma23.im - 0.003124).abs() < 1e-6);
        assert!(r.dressed_identity_error() < 1e-12);
        assert!((r.population_sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn regime_is_enforced() {
        let p = Preset::Fig6.params();
        for bad in [SystemParams { delta2: 1.0, ..p }, SystemParams { w12: 20.0, ..p }] {
            assert!(matches!(sigma23_exact(&bad), Err(Error::RegimeViolation(_))));
            assert!(matches!(sigma23_small_theta(&bad), Err(Error::RegimeViolation(_))));
        }
        let zero = SystemParams { big_g: 0.0, w12: 0.0, ..p };
        assert_eq!(sigma23_small_theta(&zero), Err(Error::ZeroPump));
        assert_eq!(trap_populations_small_theta(&zero), Err(Error::ZeroPump));
    }

    #[test]
    fn small_theta_limits() {
        let s = sigma23_small_theta(&pump(1.0, 1.0, 0.0, 20.0)).unwrap();
        assert_eq!(s.im, 0.0);
        assert!((s.re - 1.0 / 3.0).abs() < 1e-15);
        let s = sigma23_small_theta(&pump(1.0, 1.0, 15.0, 20.0)).unwrap();
        assert!((s.re - 1.0 / 3.0).abs() < 1e-15);

        let f6 = sigma23_small_theta(&Preset::Fig6.params()).unwrap();
        assert!((f6.re - 10.0 / 21.0).abs() < 1e-15);
        assert!((f6.im - 0.003349).abs() < 1e-6);
    }

    #[test]
    fn small_theta_populations() {
        let p = trap_populations_small_theta(&pump(1.0, 1.0, 15.0, 20.0)).unwrap();
        assert!((p.sigma11 - 1.0 / 3.0).abs() < 1e-15);
        assert!((p.sigma_mm - 2.0 / 3.0).abs() < 1e-15);
        assert!(p.sigma_mm > p.sigma11);

        let p = trap_populations_small_theta(&pump(1.0, 6.0, 15.0, 20.0)).unwrap();
        assert!((p.sigma11 - 0.75).abs() < 1e-15);
        assert!((p.sigma_mm - 0.25).abs() < 1e-15);

        let p = trap_populations_small_theta(&pump(1.0, 2.0, 0.0, 20.0)).unwrap();
        assert_eq!(p.sigma_pp, 0.0);
        assert_eq!(p.im_sigma_pm, 0.0);
    }

    #[test]
    fn small_theta_deviation_grows_with_angle() {
        let p = Preset::Fig6.params();
        let dev = |theta: f64| {
            let q = SystemParams { theta_deg: theta, ..p };
            let exact = sigma23_exact(&q).unwrap().sigma23;
            let approx = sigma23_small_theta(&q).unwrap();
            (exact - approx).norm()
        };
        let (d1, d5, d15) = (dev(1.0), dev(5.0), dev(15.0));
        assert!(d1 < d5 && d5 < d15, "{d1} {d5} {d15}");
    }

    #[test]
    fn perturbed_constant_moves_coherence() {
        let p = Preset::Fig6.params();
        let r = sigma23_exact_perturbed(&p, 1e-3).unwrap();
        let exact = sigma23_exact(&p).unwrap();
        assert!((r.sigma23 - exact.sigma23).norm() > 1e-6);
    }
}
