//! Pump-dressed states, the trap basis `{|+⟩, |c⟩, |uc⟩}`, the decay rate
//! of the quasi-trapped state, and the secular equations of motion in that
//! basis.
//!
//! The pump mixes `|2⟩` and `|3⟩` into
//!
//! ```text
//! |+⟩ =  cos ψ |2⟩ + sin ψ |3⟩      (eigenvalue λ+)
//! |−⟩ = -sin ψ |2⟩ + cos ψ |3⟩      (eigenvalue λ−)
//! ```
//!
//! with `tan ψ = -G/λ+`. `ψ` is taken on the principal branch, so
//! `sin ψ < 0` for `G > 0`. With that sign, `|uc⟩ ∝ √γ2|1⟩ - √(2γ1)|−⟩` is
//! the superposition whose decay amplitudes nearly cancel for small θ. The
//! trapping interpretation holds when `|1⟩` is degenerate with `|−⟩`
//! (`Δ2 + W12 = λ−`, i.e. `W12 = -G` at `Δ2 = 0`); away from it the basis is
//! still orthonormal and usable for bookkeeping.

use std::f64::consts::SQRT_2;

use nalgebra::Matrix3;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{DensityMatrix, SystemParams};
use crate::ode::{DormandPrince, OdeSystem, Output};

/// Eigen-structure of the pump-dressed system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DressedBasis {
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    /// Mixing angle in radians.
    pub psi: f64,
    /// Rows are `⟨1|, ⟨+|, ⟨−|` in bare components.
    pub dressed: Matrix3<f64>,
    /// Rows are `⟨+|, ⟨c|, ⟨uc|` in bare components.
    pub trap: Matrix3<f64>,
}

/// Dressed eigenvalues `λ± = (Δ2 ± √(Δ2² + 4G²))/2`, the mixing angle and
/// both change-of-basis matrices.
pub fn dressed_basis(params: &SystemParams) -> Result<DressedBasis> {
    let (big_g, d2) = (params.big_g, params.delta2);
    if big_g == 0.0 {
        return Err(Error::ZeroPump);
    }
    let root = (d2 * d2 + 4.0 * big_g * big_g).sqrt();
    let lambda_plus = (d2 + root) / 2.0;
    // λ+λ− = -G²; this form avoids cancellation when Δ2 ≪ -G.
    let lambda_minus = if d2 <= 0.0 { (d2 - root) / 2.0 } else { -big_g * big_g / lambda_plus };
    let lambda_plus = if d2 >= 0.0 { lambda_plus } else { -big_g * big_g / lambda_minus };
    let psi = (-big_g / lambda_plus).atan();
    let (s, c) = psi.sin_cos();

    let dressed = Matrix3::new(1.0, 0.0, 0.0, 0.0, c, s, 0.0, -s, c);
    let (g1, g2) = (params.gamma1, params.gamma2);
    let norm = (g2 + 2.0 * g1).sqrt();
    let (a, b) = ((2.0 * g1).sqrt() / norm, g2.sqrt() / norm);
    // |c⟩ = a|1⟩ + b|−⟩, |uc⟩ = b|1⟩ - a|−⟩
    let trap = Matrix3::new(0.0, c, s, a, -b * s, b * c, b, a * s, -a * c);
    Ok(DressedBasis { lambda_plus, lambda_minus, psi, dressed, trap })
}

/// A density matrix viewed in the dressed and trap bases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DressedDecomposition {
    pub basis: DressedBasis,
    /// `ρ` in `{|1⟩, |+⟩, |−⟩}`.
    pub dressed: Matrix3<Complex64>,
    /// `ρ` in `{|+⟩, |c⟩, |uc⟩}`.
    pub trap: Matrix3<Complex64>,
}

impl DressedDecomposition {
    pub fn sigma_pp(&self) -> f64 {
        self.trap[(0, 0)].re
    }
    pub fn sigma_cc(&self) -> f64 {
        self.trap[(1, 1)].re
    }
    pub fn sigma_ucuc(&self) -> f64 {
        self.trap[(2, 2)].re
    }
    /// `⟨uc|ρ|c⟩`
    pub fn sigma_ucc(&self) -> Complex64 {
        self.trap[(2, 1)]
    }
    /// `⟨+|ρ|uc⟩`
    pub fn sigma_puc(&self) -> Complex64 {
        self.trap[(0, 2)]
    }
    /// `⟨+|ρ|c⟩`
    pub fn sigma_pc(&self) -> Complex64 {
        self.trap[(0, 1)]
    }
    pub fn sigma11(&self) -> f64 {
        self.dressed[(0, 0)].re
    }
    pub fn sigma_mm(&self) -> f64 {
        self.dressed[(2, 2)].re
    }
    /// `⟨+|ρ|−⟩`
    pub fn sigma_pm(&self) -> Complex64 {
        self.dressed[(1, 2)]
    }
}

fn conjugate(rows: &Matrix3<f64>, rho: &Matrix3<Complex64>) -> Matrix3<Complex64> {
    let u = rows.map(Complex64::from);
    u * rho * u.transpose()
}

/// Express `rho` in the dressed and trap bases.
pub fn to_trap_basis(rho: &DensityMatrix, params: &SystemParams) -> Result<DressedDecomposition> {
    let basis = dressed_basis(params)?;
    Ok(DressedDecomposition {
        basis,
        dressed: conjugate(&basis.dressed, rho.matrix()),
        trap: conjugate(&basis.trap, rho.matrix()),
    })
}

/// Decay rate of the quasi-trapped population,
/// `4γ1γ2(γ1+γ2)(1 - cos θ)/(2γ1+γ2)²`.
pub fn gamma_uc(params: &SystemParams) -> f64 {
    let (g1, g2) = (params.gamma1, params.gamma2);
    4.0 * g1 * g2 * (g1 + g2) * (1.0 - params.theta_rad().cos()) / (2.0 * g1 + g2).powi(2)
}

/// Unknowns of the secular trap-basis equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecularState {
    pub sigma_ucuc: f64,
    pub sigma_cc: f64,
    pub sigma_pp: f64,
    pub sigma_ucc: Complex64,
    pub sigma_puc: Complex64,
    pub sigma_pc: Complex64,
}

impl SecularState {
    pub fn from_decomposition(d: &DressedDecomposition) -> Self {
        Self {
            sigma_ucuc: d.sigma_ucuc(),
            sigma_cc: d.sigma_cc(),
            sigma_pp: d.sigma_pp(),
            sigma_ucc: d.sigma_ucc(),
            sigma_puc: d.sigma_puc(),
            sigma_pc: d.sigma_pc(),
        }
    }

    /// Bare ground state `|3⟩⟨3|` mapped into the trap basis.
    pub fn ground(params: &SystemParams) -> Result<Self> {
        Ok(Self::from_decomposition(&to_trap_basis(&DensityMatrix::ground(), params)?))
    }

    pub fn total_population(&self) -> f64 {
        self.sigma_ucuc + self.sigma_cc + self.sigma_pp
    }

    fn pack(&self) -> [f64; 9] {
        [
            self.sigma_ucuc,
            self.sigma_cc,
            self.sigma_pp,
            self.sigma_ucc.re,
            self.sigma_ucc.im,
            self.sigma_puc.re,
            self.sigma_puc.im,
            self.sigma_pc.re,
            self.sigma_pc.im,
        ]
    }

    fn unpack(y: &[f64; 9]) -> Self {
        Self {
            sigma_ucuc: y[0],
            sigma_cc: y[1],
            sigma_pp: y[2],
            sigma_ucc: Complex64::new(y[3], y[4]),
            sigma_puc: Complex64::new(y[5], y[6]),
            sigma_pc: Complex64::new(y[7], y[8]),
        }
    }
}

/// Coefficients of the secular equations, valid for `Δ2 = 0`, `W12 = -G`
/// with interference on. Terms rotating at `e^{±2iGt}` are dropped.
#[derive(Debug, Clone, Copy)]
pub struct SecularRhs {
    // population block: d/dt [ucuc, cc, pp] = m · [ucuc, cc, pp] + v · 2 Re σucc
    pop: [[f64; 3]; 3],
    pop_coh: [f64; 3],
    // σucc equation
    ucc_self: f64,
    ucc_conj: f64,
    ucc_pop: [f64; 3],
    // σ+uc, σ+c
    puc_puc: f64,
    puc_pc: f64,
    pc_puc: f64,
    pc_pc: f64,
}

impl SecularRhs {
    pub fn new(params: &SystemParams) -> Result<Self> {
        check_secular_regime(params)?;
        let (g1, g2) = (params.gamma1, params.gamma2);
        let c = params.theta_rad().cos();
        let u = 1.0 - c;
        let d = 2.0 * g1 + g2;
        let d2 = d * d;
        let q = 4.0 * g1 * g1 + 4.0 * g1 * g2 * c + g2 * g2;
        let s = (g1 * g2).sqrt();
        let asym = 2.0 * g1 - g2;

        let pop = [
            [-4.0 * g1 * g2 * (g1 + g2) * u / d2, g1 * q / d2, g1 * g2 / d],
            [2.0 * g1 * g2 * g2 * u / d2, -(4.0 * g1 + g2) * q / (2.0 * d2), g2 * g2 / (2.0 * d)],
            [2.0 * g1 * g2 * u / d, q / (2.0 * d), -g2 / 2.0],
        ];
        let pop_coh = [
            -g2 * s * asym * u / (SQRT_2 * d2),
            -g1 * asym * (2.0 * g1 * g2).sqrt() * u / d2,
            asym * s * u / (SQRT_2 * d),
        ];
        let ucc_self = -(4.0 * g1 * g1 * g2 * u / d2 + (g1 * g2 * c + g2 * g2) / d + g1);
        let ucc_conj = -g1 * g2 * u * asym / d2;
        let ucc_pop = [
            -s * u / SQRT_2,
            -(8.0 * g1 * g1 * u + d2 * c) * s / (SQRT_2 * d2),
            -g2 * s / (SQRT_2 * d),
        ];
        // The `6√2` coefficient is kept exactly as derived for this basis; it
        // only enters the |+⟩ coherences, which do not feed the populations.
        let puc_puc = -g2 / (2.0 * d) * (g2 + g1 * (1.0 + 6.0 * SQRT_2 - c));
        let puc_pc = -s / (SQRT_2 * d) * (2.0 * g1 + g2 * c - 2.0 * g2);
        let pc_puc = -(2.0 * g1 * g2).sqrt() / d * (g1 * u - g2);
        let pc_pc = -(2.0 * g1 * g2 * (1.0 + c) + 4.0 * g1 * g1 + 3.0 * g2 * g2) / (2.0 * d);

        Ok(Self { pop, pop_coh, ucc_self, ucc_conj, ucc_pop, puc_puc, puc_pc, pc_puc, pc_pc })
    }

    pub fn derivative(&self, x: &SecularState) -> SecularState {
        let pops = [x.sigma_ucuc, x.sigma_cc, x.sigma_pp];
        let two_re = 2.0 * x.sigma_ucc.re;
        let row = |k: usize| -> f64 {
            self.pop[k].iter().zip(&pops).map(|(a, b)| a * b).sum::<f64>() + self.pop_coh[k] * two_re
        };
        let pop_drive: f64 = self.ucc_pop.iter().zip(&pops).map(|(a, b)| a * b).sum();
        SecularState {
            sigma_ucuc: row(0),
            sigma_cc: row(1),
            sigma_pp: row(2),
            sigma_ucc: x.sigma_ucc * self.ucc_self + x.sigma_ucc.conj() * self.ucc_conj + pop_drive,
            sigma_puc: x.sigma_puc * self.puc_puc + x.sigma_pc * self.puc_pc,
            sigma_pc: x.sigma_puc * self.pc_puc + x.sigma_pc * self.pc_pc,
        }
    }
}

impl OdeSystem<9> for SecularRhs {
    fn eval(&self, _t: f64, y: &[f64; 9], dydt: &mut [f64; 9]) {
        *dydt = self.derivative(&SecularState::unpack(y)).pack();
    }
}

fn check_secular_regime(params: &SystemParams) -> Result<()> {
    let scale = 1f64.max(params.big_g.abs());
    if params.eta0 != 1 {
        return Err(Error::RegimeViolation("secular equations assume eta0 = 1".into()));
    }
    if params.delta2.abs() > 1e-12 * scale {
        return Err(Error::RegimeViolation(format!(
            "secular equations need delta2 = 0, got {}",
            params.delta2
        )));
    }
    if (params.w12 + params.big_g).abs() > 1e-12 * scale {
        return Err(Error::RegimeViolation(format!(
            "secular equations need w12 = -big_g, got w12 = {} with big_g = {}",
            params.w12, params.big_g
        )));
    }
    if params.big_g == 0.0 {
        return Err(Error::ZeroPump);
    }
    Ok(())
}

fn run_secular(
    params: &SystemParams,
    initial: &SecularState,
    t_end: f64,
    output: Output<'_>,
) -> Result<Vec<(f64, SecularState)>> {
    let rhs = SecularRhs::new(params)?;
    if !(t_end > 0.0) {
        return Err(Error::InvalidArgument(format!("t_end must be positive, got {t_end}")));
    }
    let h0 = 0.01 / params.gamma1.max(params.gamma2);
    let samples = DormandPrince::default().integrate(&rhs, 0.0, initial.pack(), t_end, h0, output)?;
    Ok(samples.into_iter().map(|(t, y)| (t, SecularState::unpack(&y))).collect())
}

/// Integrate the secular equations from `t = 0` to `t_end`, recording every
/// accepted step.
pub fn evolve_secular(
    params: &SystemParams,
    initial: &SecularState,
    t_end: f64,
) -> Result<Vec<(f64, SecularState)>> {
    run_secular(params, initial, t_end, Output::Steps)
}

/// Integrate the secular equations and report the state at `times`.
pub fn evolve_secular_at(
    params: &SystemParams,
    initial: &SecularState,
    times: &[f64],
) -> Result<Vec<(f64, SecularState)>> {
    let t_end = times.last().copied().unwrap_or(0.0);
    run_secular(params, initial, t_end, Output::At(times))
}
