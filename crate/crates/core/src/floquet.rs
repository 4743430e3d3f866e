//! Periodic steady state of the driven equations by harmonic expansion
//! `ρ(t) = Σ_m ρ⁽ᵐ⁾ e^{-imδt}`, the probe absorption coefficient, and the
//! first-order-in-probe decomposition.
//!
//! Substituting the expansion into the affine form of the equations (see
//! [`AffineGenerator`]) and matching powers of `e^{-iδt}` gives, for each
//! harmonic,
//!
//! ```text
//! (A0 + imδ)·x⁽ᵐ⁾ + g·A₊·x⁽ᵐ⁻¹⁾ + g·A₋·x⁽ᵐ⁺¹⁾ = -(b0·[m=0] + g·b₊·[m=1] + g·b₋·[m=-1])
//! ```
//!
//! which is truncated at `|m| ≤ M` and solved as one dense system.

use nalgebra::{DMatrix, DVector, Matrix3};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg;
use crate::master::{from_generator_vector, steady_state_pump_only, to_generator_vector, AffineGenerator, GenMatrix, GenVector};
use crate::model::{DensityMatrix, SystemParams};
use crate::scan::ScanResult;

const BLOCK: usize = 8;

/// Residual tolerance for the harmonic linear system.
pub const FLOQUET_RESIDUAL_TOL: f64 = 1e-10;

/// Truncated harmonic coefficients `ρ⁽ᵐ⁾`, `m ∈ [-M, M]`.
#[derive(Debug, Clone)]
pub struct HarmonicSet {
    order: usize,
    delta: f64,
    coeffs: Vec<Matrix3<Complex64>>,
    residual: f64,
}

impl HarmonicSet {
    pub fn order(&self) -> usize {
        self.order
    }

    /// Probe-pump beat the expansion was computed for.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `ρ⁽ᵐ⁾`, or `None` outside the truncation.
    pub fn get(&self, m: i64) -> Option<&Matrix3<Complex64>> {
        let idx = m + self.order as i64;
        if idx < 0 {
            return None;
        }
        self.coeffs.get(idx as usize)
    }

    /// `ρ⁽ᵐ⁾`; panics outside the truncation.
    pub fn coeff(&self, m: i64) -> &Matrix3<Complex64> {
        self.get(m).unwrap_or_else(|| panic!("harmonic {m} outside order {}", self.order))
    }

    /// Largest entry magnitude of the outermost harmonics `ρ⁽±ᴹ⁾`.
    pub fn tail_norm(&self) -> f64 {
        let m = self.order as i64;
        self.coeff(m).camax().max(self.coeff(-m).camax())
    }

    /// Max-norm residual of the linear solve.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// `ρ(t)` summed from the stored harmonics.
    pub fn reconstruct(&self, t: f64) -> Matrix3<Complex64> {
        self.harmonics()
            .map(|(m, c)| c * Complex64::from_polar(1.0, -(m as f64) * self.delta * t))
            .sum()
    }

    /// `dρ/dt` of the reconstructed series.
    pub fn reconstruct_derivative(&self, t: f64) -> Matrix3<Complex64> {
        self.harmonics()
            .map(|(m, c)| {
                let w = m as f64 * self.delta;
                c * (Complex64::new(0.0, -w) * Complex64::from_polar(1.0, -w * t))
            })
            .sum()
    }

    /// Largest violation of `ρ⁽ᵐ⁾ij = conj(ρ⁽⁻ᵐ⁾ji)`.
    pub fn conjugation_error(&self) -> f64 {
        let mut err = 0.0_f64;
        for (m, c) in self.harmonics() {
            let mirror = self.coeff(-m).adjoint();
            err = err.max((c - mirror).camax());
        }
        err
    }

    /// `(m, ρ⁽ᵐ⁾)` in ascending `m`.
    pub fn harmonics(&self) -> impl Iterator<Item = (i64, &Matrix3<Complex64>)> {
        let m0 = self.order as i64;
        self.coeffs.iter().enumerate().map(move |(k, c)| (k as i64 - m0, c))
    }
}

fn check_delta(params: &SystemParams) -> Result<f64> {
    let delta = params.delta();
    let scale = 1f64.max(params.w12.abs()).max(params.delta1.abs()).max(params.delta2.abs());
    if delta.abs() <= 1e-12 * scale {
        return Err(Error::DegenerateDetuning);
    }
    Ok(delta)
}

fn to_dmatrix(m: &GenMatrix) -> DMatrix<Complex64> {
    DMatrix::from_iterator(BLOCK, BLOCK, m.iter().copied())
}

/// Harmonic steady state truncated at a fixed order `M`.
pub fn solve_floquet(params: &SystemParams, order: usize) -> Result<HarmonicSet> {
    if order < 1 {
        return Err(Error::InvalidArgument("harmonic order must be at least 1".into()));
    }
    let delta = check_delta(params)?;
    let gen = AffineGenerator::new(params);
    let g = Complex64::from(params.small_g);
    let n_blocks = 2 * order + 1;
    let dim = BLOCK * n_blocks;

    let a0 = to_dmatrix(&gen.a0);
    let lower = to_dmatrix(&gen.a_plus) * g;
    let upper = to_dmatrix(&gen.a_minus) * g;
    let mut k = DMatrix::<Complex64>::zeros(dim, dim);
    let mut rhs = DVector::<Complex64>::zeros(dim);
    for blk in 0..n_blocks {
        let m = blk as i64 - order as i64;
        let row = BLOCK * blk;
        let mut diag = a0.clone();
        for d in 0..BLOCK {
            diag[(d, d)] += Complex64::new(0.0, m as f64 * delta);
        }
        k.view_mut((row, row), (BLOCK, BLOCK)).copy_from(&diag);
        if blk > 0 {
            k.view_mut((row, row - BLOCK), (BLOCK, BLOCK)).copy_from(&lower);
        }
        if blk + 1 < n_blocks {
            k.view_mut((row, row + BLOCK), (BLOCK, BLOCK)).copy_from(&upper);
        }
        let source = match m {
            0 => Some(gen.b0),
            1 => Some(gen.b_plus * g),
            -1 => Some(gen.b_minus * g),
            _ => None,
        };
        if let Some(s) = source {
            for d in 0..BLOCK {
                rhs[row + d] = -s[d];
            }
        }
    }

    let x = linalg::solve(k.clone(), &rhs, FLOQUET_RESIDUAL_TOL)?;
    let residual = (&k * &x - &rhs).camax();
    let coeffs = (0..n_blocks)
        .map(|blk| {
            let trace = if blk == order { 1.0 } else { 0.0 };
            from_generator_vector(&x.as_slice()[BLOCK * blk..BLOCK * (blk + 1)], trace)
        })
        .collect();
    Ok(HarmonicSet { order, delta, coeffs, residual })
}

/// Truncation control for [`solve_floquet_converged`].
#[derive(Debug, Clone, Copy)]
pub struct FloquetOptions {
    pub initial_order: usize,
    pub max_order: usize,
    pub tail_tol: f64,
}

impl Default for FloquetOptions {
    fn default() -> Self {
        Self { initial_order: 2, max_order: 64, tail_tol: 1e-12 }
    }
}

/// Harmonic steady state, doubling the truncation order until the outermost
/// harmonics fall below `tail_tol`.
pub fn solve_floquet_converged(params: &SystemParams, opts: &FloquetOptions) -> Result<HarmonicSet> {
    let mut order = opts.initial_order.max(1).min(opts.max_order.max(1));
    loop {
        let set = solve_floquet(params, order)?;
        let tail = set.tail_norm();
        if tail < opts.tail_tol {
            return Ok(set);
        }
        if order >= opts.max_order {
            return Err(Error::NotConverged { order, tail });
        }
        order = (2 * order).min(opts.max_order);
    }
}

/// Probe absorption `α/α₀ = (γ1/g)·Im ρ⁽⁺¹⁾13`; negative values are gain.
/// Requires `small_g > 0`.
pub fn absorption_coefficient(h: &HarmonicSet, params: &SystemParams) -> f64 {
    params.gamma1 / params.small_g * h.coeff(1)[(0, 2)].im
}

/// Converged harmonic solve followed by [`absorption_coefficient`].
pub fn probe_absorption(params: &SystemParams) -> Result<f64> {
    let h = solve_floquet_converged(params, &FloquetOptions::default())?;
    Ok(absorption_coefficient(&h, params))
}

/// Weak-probe decomposition `ρ ≈ σ⁰ + g·σ⁺·e^{-iδt} + g·σ⁻·e^{iδt}`.
#[derive(Debug, Clone)]
pub struct PerturbativeSolution {
    pub sigma0: DensityMatrix,
    pub sigma_plus: Matrix3<Complex64>,
    pub sigma_minus: Matrix3<Complex64>,
    delta: f64,
}

impl PerturbativeSolution {
    /// First-order reconstruction of `ρ(t)` for probe amplitude `g`.
    pub fn reconstruct(&self, t: f64, g: f64) -> Matrix3<Complex64> {
        let e = Complex64::from_polar(1.0, -self.delta * t);
        self.sigma0.matrix() + self.sigma_plus * (e * g) + self.sigma_minus * (e.conj() * g)
    }

    /// Linear-response absorption `γ1·Im σ⁺13`.
    pub fn absorption(&self, params: &SystemParams) -> f64 {
        params.gamma1 * self.sigma_plus[(0, 2)].im
    }
}

/// Probe response to first order: `σ⁰` from the pump-only solve, `σ±` from
/// the linear systems collecting the `e^{∓iδt}` terms.
pub fn solve_perturbative(params: &SystemParams) -> Result<PerturbativeSolution> {
    let sigma0 = steady_state_pump_only(params)?;
    let delta = params.delta();
    let gen = AffineGenerator::new(params);
    let x0 = to_generator_vector(sigma0.matrix());

    let first_order = |a: &GenMatrix, b: GenVector, shift: f64| -> Result<Matrix3<Complex64>> {
        let mut k = to_dmatrix(&gen.a0);
        for d in 0..BLOCK {
            k[(d, d)] += Complex64::new(0.0, shift);
        }
        let source = a * x0 + b;
        let rhs = DVector::from_iterator(BLOCK, source.iter().map(|z| -z));
        let y = linalg::solve(k, &rhs, FLOQUET_RESIDUAL_TOL)?;
        Ok(from_generator_vector(y.as_slice(), 0.0))
    };
    let sigma_plus = first_order(&gen.a_plus, gen.b_plus, delta)?;
    let sigma_minus = first_order(&gen.a_minus, gen.b_minus, -delta)?;
    Ok(PerturbativeSolution { sigma0, sigma_plus, sigma_minus, delta })
}

/// A spectral extremum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub position: f64,
    pub value: f64,
}

/// Local maxima of `|ys|` that reach at least this fraction of the global
/// maximum count as spectral features.
pub const PEAK_FLOOR: f64 = 1e-2;

/// Local extrema of `|ys|` on a sampled spectrum, in ascending position.
pub fn find_peaks(xs: &[f64], ys: &[f64]) -> Result<Vec<Peak>> {
    let mags: Vec<f64> = ys.iter().map(|y| y.abs()).collect();
    let top = mags.iter().cloned().fold(0.0, f64::max);
    let peaks: Vec<Peak> = (1..mags.len().saturating_sub(1))
        .filter(|&k| mags[k] > mags[k - 1] && mags[k] >= mags[k + 1] && mags[k] >= PEAK_FLOOR * top)
        .map(|k| Peak { position: xs[k], value: ys[k] })
        .collect();
    if peaks.len() < 2 {
        return Err(Error::PeaksNotFound { found: peaks.len() });
    }
    Ok(peaks)
}

/// Autler-Townes extrema of a probe scan's `alpha_over_alpha0` column.
pub fn autler_townes_peaks(scan: &ScanResult) -> Result<Vec<Peak>> {
    let ys = scan.column("alpha_over_alpha0").ok_or_else(|| {
        Error::InvalidArgument("scan has no `alpha_over_alpha0` column".into())
    })?;
    find_peaks(&scan.sweep_values, ys)
}

/// Resonance positions `(Δ2 ± √(Δ2² + 4G²))/2` of the no-interference
/// spectrum, upper first.
pub fn autler_townes_positions(params: &SystemParams) -> (f64, f64) {
    let root = (params.delta2.powi(2) + 4.0 * params.big_g.powi(2)).sqrt();
    ((params.delta2 + root) / 2.0, (params.delta2 - root) / 2.0)
}

/// Golden-section search for the maximum of `|f|` on `[lo, hi]`.
pub fn refine_extremum<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<Peak>
where
    F: Fn(f64) -> Result<f64>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?.abs();
    let mut fd = f(d)?.abs();
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?.abs();
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?.abs();
        }
    }
    let x = 0.5 * (a + b);
    Ok(Peak { position: x, value: f(x)? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::rho13_no_vic;
    use crate::master::MasterRhs;
    use crate::presets::Preset;

    fn at(p: SystemParams, delta1: f64) -> SystemParams {
        SystemParams { delta1, ..p }
    }

    #[test]
    fn no_probe_means_no_harmonics() {
        let p = SystemParams { small_g: 0.0, delta1: 3.0, ..Preset::Fig2a.params() };
        let h = solve_floquet(&p, 3).unwrap();
        for (m, c) in h.harmonics() {
            if m != 0 {
                assert_eq!(c.camax(), 0.0);
            }
        }
        let ss = steady_state_pump_only(&p).unwrap();
        assert!((h.coeff(0) - ss.matrix()).camax() < 1e-13);
    }

    #[test]
    fn degenerate_detuning_rejected() {
        let p = at(Preset::Fig2a.params(), -10.0);
        assert_eq!(p.delta(), 0.0);
        assert_eq!(solve_floquet(&p, 2).unwrap_err(), Error::DegenerateDetuning);
        assert!(solve_floquet(&at(p, 1.0), 0).is_err());
    }

    #[test]
    fn gain_on_upper_component_with_negative_splitting() {
        // W12 = -G: |1⟩ is degenerate with |−⟩, gain appears on the |1⟩ → |+⟩
        // line at Δ1 = λ+ = +G.
        let p = at(Preset::Fig2a.params(), 10.0);
        let h = solve_floquet_converged(&p, &FloquetOptions::default()).unwrap();
        assert!(h.coeff(1)[(0, 2)].im < 0.0);
        assert!(absorption_coefficient(&h, &p) < 0.0);
        assert!(probe_absorption(&at(p, -10.05)).unwrap() > 0.0);
    }

    #[test]
    fn gain_on_lower_component_with_positive_splitting() {
        let p = SystemParams { w12: 10.0, ..Preset::Fig2a.params() };
        assert!(probe_absorption(&at(p, -10.0)).unwrap() < 0.0);
        assert!(probe_absorption(&at(p, 10.05)).unwrap() > 0.0);
    }

    #[test]
    fn matches_no_vic_linear_response_on_grid() {
        let p = Preset::Fig2a.params().without_vic();
        let g = 1e-4;
        for k in 0..400 {
            let d1 = -20.0 + 40.0 * (k as f64 + 0.5) / 400.0;
            let q = SystemParams { small_g: g, ..at(p, d1) };
            let h = solve_floquet_converged(&q, &FloquetOptions::default()).unwrap();
            let oracle = rho13_no_vic(&q).unwrap();
            let got = h.coeff(1)[(0, 2)];
            assert!((got - oracle).norm() / oracle.norm() < 1e-6, "Δ1 = {d1}");
        }
    }

    #[test]
    fn absorption_is_linear_in_weak_probe() {
        let p = at(Preset::Fig2a.params(), 4.0);
        let a = probe_absorption(&SystemParams { small_g: 1e-2, ..p }).unwrap();
        let b = probe_absorption(&SystemParams { small_g: 1e-3, ..p }).unwrap();
        assert!((a - b).abs() / b.abs() < 1e-4);
    }

    #[test]
    fn no_vic_spectrum_is_absorptive() {
        let p = Preset::Fig2a.params().without_vic();
        for k in 0..200 {
            let d1 = -30.0 + 60.0 * (k as f64 + 0.25) / 200.0;
            assert!(probe_absorption(&at(p, d1)).unwrap() > 0.0);
        }
    }

    #[test]
    fn truncation_converges() {
        let p = SystemParams { small_g: 0.3, ..at(Preset::Fig2a.params(), 6.0) };
        let h8 = solve_floquet(&p, 8).unwrap();
        let h16 = solve_floquet(&p, 16).unwrap();
        assert!(h8.tail_norm() < 1e-12);
        assert!((h8.coeff(1)[(0, 2)] - h16.coeff(1)[(0, 2)]).norm() <= 1e-12);
        assert!(h16.residual() <= FLOQUET_RESIDUAL_TOL);
        let err = solve_floquet_converged(&p, &FloquetOptions { initial_order: 1, max_order: 2, tail_tol: 1e-12 });
        assert!(matches!(err, Err(Error::NotConverged { order: 2, .. })));
    }

    #[test]
    fn harmonic_invariants() {
        let p = SystemParams { small_g: 0.5, ..at(Preset::Fig3DashDot.params(), 7.0) };
        let h = solve_floquet_converged(&p, &FloquetOptions::default()).unwrap();
        assert!(h.conjugation_error() < 1e-10);
        for (m, c) in h.harmonics() {
            let tr = c.trace();
            let expected = if m == 0 { 1.0 } else { 0.0 };
            assert!((tr - Complex64::from(expected)).norm() < 1e-10);
        }
    }

    #[test]
    fn reconstruction_satisfies_equations_of_motion() {
        let p = SystemParams { small_g: 0.8, ..at(Preset::Fig2a.params(), 3.0) };
        let h = solve_floquet_converged(&p, &FloquetOptions::default()).unwrap();
        let r = MasterRhs::driven(p);
        for k in 0..10 {
            let t = k as f64 * 0.137;
            let lhs = h.reconstruct_derivative(t);
            let rhs = r.derivative(t, &h.reconstruct(t));
            assert!((lhs - rhs).camax() < 1e-10);
        }
    }

    #[test]
    fn undriven_absorber_is_lorentzian() {
        let p = SystemParams { big_g: 0.0, w12: 0.0, eta0: 0, gamma1: 1.3, ..Preset::Fig2a.params() };
        for d1 in [-3.0, -0.5, 0.7, 2.0] {
            let s = solve_perturbative(&at(p, d1)).unwrap();
            // σ⁺13 = i/(γ1 + iΔ1) = 1/(Δ1 - iγ1)
            let expected = Complex64::new(1.0, 0.0) / Complex64::new(d1, -p.gamma1);
            assert!((s.sigma_plus[(0, 2)] - expected).norm() < 1e-13);
        }
    }

    #[test]
    fn perturbative_matches_floquet_first_harmonic() {
        let p = at(Preset::Fig3Solid.params(), -8.0);
        let s = solve_perturbative(&p).unwrap();
        let h = solve_floquet_converged(&SystemParams { small_g: 1e-4, ..p }, &FloquetOptions::default()).unwrap();
        let rel = (s.sigma_plus[(0, 2)] * 1e-4 - h.coeff(1)[(0, 2)]).norm() / h.coeff(1)[(0, 2)].norm();
        assert!(rel < 1e-7);
        assert!((s.sigma_minus - s.sigma_plus.adjoint()).camax() < 1e-12);
    }

    #[test]
    fn first_order_error_is_cubic_in_probe() {
        let p = at(Preset::Fig2a.params(), 3.0);
        let s = solve_perturbative(&p).unwrap().sigma_plus[(0, 2)];
        let err = |g: f64| {
            let h = solve_floquet_converged(&SystemParams { small_g: g, ..p }, &FloquetOptions::default()).unwrap();
            (h.coeff(1)[(0, 2)] - s * g).norm()
        };
        let slope = (err(8e-3) / err(1e-3)).ln() / 8f64.ln();
        assert!((slope - 3.0).abs() < 0.05, "{slope}");
    }

    #[test]
    fn peak_detection() {
        let xs: Vec<f64> = (0..101).map(|k| k as f64 * 0.1 - 5.0).collect();
        let lorentz = |x: f64, c: f64| 1.0 / (1.0 + (x - c).powi(2) * 16.0);
        let ys: Vec<f64> = xs.iter().map(|&x| lorentz(x, -2.0) - 0.5 * lorentz(x, 3.0)).collect();
        let peaks = find_peaks(&xs, &ys).unwrap();
        assert_eq!(peaks.len(), 2);
        assert!((peaks[0].position + 2.0).abs() < 1e-9);
        assert!((peaks[1].position - 3.0).abs() < 1e-9);
        assert!(peaks[1].value < 0.0);
        assert_eq!(find_peaks(&xs, &vec![1.0; 101]), Err(Error::PeaksNotFound { found: 0 }));
    }

    #[test]
    fn resonance_positions() {
        let p = SystemParams { delta2: 3.0, big_g: 4.0, ..Preset::Fig2a.params() };
        let (up, lo) = autler_townes_positions(&p);
        assert!((up - (3.0 + 73f64.sqrt()) / 2.0).abs() < 1e-12);
        assert!((up - 5.772).abs() < 1e-3 && (lo + 2.772).abs() < 1e-3);
    }

    #[test]
    fn golden_section_finds_extremum() {
        let peak = refine_extremum(|x| Ok(-(1.0 - (x - 0.3).powi(2))), -1.0, 1.0, 1e-10).unwrap();
        assert!((peak.position - 0.3).abs() < 1e-8);
        assert!((peak.value + 1.0).abs() < 1e-12);
    }
}
