//! Rotating-frame master equation of the pump-probe V-system, the
//! field-free interaction-picture equations, and their time integration.
//!
//! Bare states are indexed `|1⟩ = 0`, `|2⟩ = 1`, `|3⟩ = 2`. In the driven
//! frame both optical coherences `ρ13`, `ρ23` rotate at the pump frequency,
//! `ρ12` is left in the Schrödinger picture, and the only explicit time
//! dependence is `e^{∓iδt}` on the probe terms.

use nalgebra::{DMatrix, DVector, Matrix3, SMatrix, SVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{hermiticity_error, pack_hermitian, unpack_hermitian, DensityMatrix, SystemParams, PACKED_LEN};
use crate::ode::{DormandPrince, OdeSystem, Output};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Which set of equations to evolve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Pump and probe present, rotating frame.
    Driven,
    /// No fields, interaction picture: the interference terms carry
    /// `e^{±iW12 t}`.
    FieldFree,
}

/// Right-hand side of the density-matrix equations for fixed parameters.
#[derive(Debug, Clone, Copy)]
pub struct MasterRhs {
    pub params: SystemParams,
    pub mode: Mode,
}

impl MasterRhs {
    pub fn driven(params: SystemParams) -> Self {
        Self { params, mode: Mode::Driven }
    }

    pub fn field_free(params: SystemParams) -> Self {
        Self { params, mode: Mode::FieldFree }
    }

    /// `dρ/dt` at time `t`. See [`rhs`].
    pub fn derivative(&self, t: f64, rho: &Matrix3<Complex64>) -> Matrix3<Complex64> {
        match self.mode {
            Mode::Driven => driven(t, rho, &self.params),
            Mode::FieldFree => field_free(t, rho, &self.params),
        }
    }
}

impl OdeSystem<PACKED_LEN> for MasterRhs {
    fn eval(&self, t: f64, y: &[f64; PACKED_LEN], dydt: &mut [f64; PACKED_LEN]) {
        let rho = unpack_hermitian(y);
        *dydt = pack_hermitian(&self.derivative(t, &rho));
    }
}

/// Time derivative of `rho` at time `t`.
///
/// The five independent component equations are evaluated as written; the
/// rest of the matrix follows from Hermiticity and `dρ33/dt = -dρ11/dt -
/// dρ22/dt`, so the result is traceless and Hermitian. The driven
/// equations assume unit trace (they use `ρ33 = 1 - ρ11 - ρ22`).
pub fn rhs(t: f64, rho: &DensityMatrix, r: &MasterRhs) -> Matrix3<Complex64> {
    r.derivative(t, rho.matrix())
}

fn fill(d11: Complex64, d22: Complex64, d12: Complex64, d13: Complex64, d23: Complex64) -> Matrix3<Complex64> {
    let d11 = Complex64::new(d11.re, 0.0);
    let d22 = Complex64::new(d22.re, 0.0);
    let d33 = -(d11 + d22);
    Matrix3::new(
        d11,
        d12,
        d13,
        d12.conj(),
        d22,
        d23,
        d13.conj(),
        d23.conj(),
        d33,
    )
}

fn driven(t: f64, rho: &Matrix3<Complex64>, p: &SystemParams) -> Matrix3<Complex64> {
    let (g1, g2, big_g, g) = (p.gamma1, p.gamma2, p.big_g, p.small_g);
    let eta = p.eta();
    let probe = Complex64::from_polar(1.0, -p.delta() * t);
    let probe_c = probe.conj();

    let r11 = rho[(0, 0)];
    let r22 = rho[(1, 1)];
    let r12 = rho[(0, 1)];
    let r21 = rho[(1, 0)];
    let r13 = rho[(0, 2)];
    let r31 = rho[(2, 0)];
    let r23 = rho[(1, 2)];
    let r32 = rho[(2, 1)];
    let one = Complex64::new(1.0, 0.0);

    let d11 = -2.0 * g1 * r11 - eta * (r12 + r21) + I * g * probe * r31 - I * g * probe_c * r13;
    let d22 = -2.0 * g2 * r22 - eta * (r12 + r21) + I * big_g * r32 - I * big_g * r23;
    let d12 = -(g1 + g2 + I * p.w12) * r12 - eta * (r11 + r22) + I * g * probe * r32
        - I * big_g * r13;
    let d13 = -(g1 + I * (p.delta2 + p.w12)) * r13 - eta * r23 - I * big_g * r12
        + I * g * probe * (one - 2.0 * r11 - r22);
    let d23 = -(g2 + I * p.delta2) * r23 - eta * r13 - I * g * probe * r21
        + I * big_g * (one - r11 - 2.0 * r22);
    fill(d11, d22, d12, d13, d23)
}

fn field_free(t: f64, rho: &Matrix3<Complex64>, p: &SystemParams) -> Matrix3<Complex64> {
    let (g1, g2) = (p.gamma1, p.gamma2);
    let eta = p.eta();
    let phase = Complex64::from_polar(1.0, p.w12 * t);

    let r11 = rho[(0, 0)];
    let r22 = rho[(1, 1)];
    let r12 = rho[(0, 1)];
    let r21 = rho[(1, 0)];
    let r13 = rho[(0, 2)];
    let r23 = rho[(1, 2)];

    let cross = r12 * phase.conj() + r21 * phase;
    let d11 = -2.0 * g1 * r11 - eta * cross;
    let d22 = -2.0 * g2 * r22 - eta * cross;
    let d12 = -(g1 + g2) * r12 - eta * phase * (r11 + r22);
    let d13 = -g1 * r13 - eta * phase * r23;
    let d23 = -g2 * r23 - eta * phase.conj() * r13;
    fill(d11, d22, d12, d13, d23)
}

/// Unknown ordering of [`AffineGenerator`]: `ρ11, ρ22, ρ12, ρ21, ρ13, ρ31,
/// ρ23, ρ32`. `ρ33` is eliminated through the trace condition.
pub const GENERATOR_ORDER: [(usize, usize); 8] =
    [(0, 0), (1, 1), (0, 1), (1, 0), (0, 2), (2, 0), (1, 2), (2, 1)];

pub type GenMatrix = SMatrix<Complex64, 8, 8>;
pub type GenVector = SVector<Complex64, 8>;

/// The driven equations as an affine map on the eight unknowns of
/// [`GENERATOR_ORDER`]:
///
/// `dx/dt = a0·x + b0 + g·e^{-iδt}·(a_plus·x + b_plus) + g·e^{iδt}·(a_minus·x + b_minus)`.
///
/// Conjugate elements are carried as independent unknowns so the map is
/// complex-linear; this is the form the harmonic and perturbative solvers
/// work with. It is assembled term by term independently of [`rhs`].
#[derive(Debug, Clone)]
pub struct AffineGenerator {
    pub a0: GenMatrix,
    pub b0: GenVector,
    pub a_plus: GenMatrix,
    pub b_plus: GenVector,
    pub a_minus: GenMatrix,
    pub b_minus: GenVector,
}

impl AffineGenerator {
    pub fn new(p: &SystemParams) -> Self {
        const R11: usize = 0;
        const R22: usize = 1;
        const R12: usize = 2;
        const R21: usize = 3;
        const R13: usize = 4;
        const R31: usize = 5;
        const R23: usize = 6;
        const R32: usize = 7;
        let (g1, g2, big_g) = (p.gamma1, p.gamma2, p.big_g);
        let eta = Complex64::from(p.eta());
        let c = |x: f64| Complex64::new(x, 0.0);

        let mut a0 = GenMatrix::zeros();
        let mut b0 = GenVector::zeros();
        let mut ap = GenMatrix::zeros();
        let mut bp = GenVector::zeros();
        let mut am = GenMatrix::zeros();
        let mut bm = GenVector::zeros();

        // ρ11
        a0[(R11, R11)] = c(-2.0 * g1);
        a0[(R11, R12)] -= eta;
        a0[(R11, R21)] -= eta;
        ap[(R11, R31)] += I;
        am[(R11, R13)] -= I;
        // ρ22
        a0[(R22, R22)] = c(-2.0 * g2);
        a0[(R22, R12)] -= eta;
        a0[(R22, R21)] -= eta;
        a0[(R22, R32)] += I * big_g;
        a0[(R22, R23)] -= I * big_g;
        // ρ12 and ρ21
        a0[(R12, R12)] = -(c(g1 + g2) + I * p.w12);
        a0[(R12, R11)] -= eta;
        a0[(R12, R22)] -= eta;
        a0[(R12, R13)] -= I * big_g;
        ap[(R12, R32)] += I;
        a0[(R21, R21)] = -(c(g1 + g2) - I * p.w12);
        a0[(R21, R11)] -= eta;
        a0[(R21, R22)] -= eta;
        a0[(R21, R31)] += I * big_g;
        am[(R21, R23)] -= I;
        // ρ13 and ρ31; ρ33 - ρ11 = 1 - 2ρ11 - ρ22
        a0[(R13, R13)] = -(c(g1) + I * (p.delta2 + p.w12));
        a0[(R13, R23)] -= eta;
        a0[(R13, R12)] -= I * big_g;
        bp[R13] += I;
        ap[(R13, R11)] -= 2.0 * I;
        ap[(R13, R22)] -= I;
        a0[(R31, R31)] = -(c(g1) - I * (p.delta2 + p.w12));
        a0[(R31, R32)] -= eta;
        a0[(R31, R21)] += I * big_g;
        bm[R31] -= I;
        am[(R31, R11)] += 2.0 * I;
        am[(R31, R22)] += I;
        // ρ23 and ρ32; ρ33 - ρ22 = 1 - ρ11 - 2ρ22
        a0[(R23, R23)] = -(c(g2) + I * p.delta2);
        a0[(R23, R13)] -= eta;
        ap[(R23, R21)] -= I;
        b0[R23] += I * big_g;
        a0[(R23, R11)] -= I * big_g;
        a0[(R23, R22)] -= 2.0 * I * big_g;
        a0[(R32, R32)] = -(c(g2) - I * p.delta2);
        a0[(R32, R31)] -= eta;
        am[(R32, R12)] += I;
        b0[R32] -= I * big_g;
        a0[(R32, R11)] += I * big_g;
        a0[(R32, R22)] += 2.0 * I * big_g;

        Self { a0, b0, a_plus: ap, b_plus: bp, a_minus: am, b_minus: bm }
    }

    /// Evaluate the affine map at time `t` for probe amplitude `g` and beat `delta`.
    pub fn apply(&self, t: f64, g: f64, delta: f64, x: &GenVector) -> GenVector {
        let e = Complex64::from_polar(1.0, -delta * t);
        self.a0 * x
            + self.b0
            + (self.a_plus * x + self.b_plus) * (e * g)
            + (self.a_minus * x + self.b_minus) * (e.conj() * g)
    }
}

/// Generator unknowns extracted from a matrix.
pub fn to_generator_vector(m: &Matrix3<Complex64>) -> GenVector {
    GenVector::from_iterator(GENERATOR_ORDER.iter().map(|&(i, j)| m[(i, j)]))
}

/// Matrix assembled from generator unknowns, with `ρ33 = trace - ρ11 - ρ22`.
pub fn from_generator_vector(x: &[Complex64], trace: f64) -> Matrix3<Complex64> {
    let mut m = Matrix3::zeros();
    for (&(i, j), v) in GENERATOR_ORDER.iter().zip(x) {
        m[(i, j)] = *v;
    }
    m[(2, 2)] = Complex64::from(trace) - m[(0, 0)] - m[(1, 1)];
    m
}

/// Sampled time evolution.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(f64, &DensityMatrix)> {
        self.times.last().copied().zip(self.states.last())
    }
}

/// Default initial step: resolve the fastest frequency in the problem.
pub fn default_dt_hint(params: &SystemParams) -> f64 {
    let fastest = params.big_g.abs().max(params.w12.abs()).max(params.delta().abs());
    if fastest > 0.0 {
        (0.01f64).min(0.1 / fastest)
    } else {
        0.01
    }
}

fn check_initial(rho0: &DensityMatrix) -> Result<()> {
    DensityMatrix::from_matrix(*rho0.matrix()).map(|_| ())
}

fn collect(samples: Vec<(f64, [f64; PACKED_LEN])>) -> Trajectory {
    let (times, states) = samples
        .into_iter()
        .map(|(t, y)| (t, DensityMatrix::unpack(&y)))
        .unzip();
    Trajectory { times, states }
}

/// Evolve `rho0` from `t = 0` to `t_end`, recording every accepted step.
pub fn integrate(r: &MasterRhs, rho0: &DensityMatrix, t_end: f64, dt_hint: f64) -> Result<Trajectory> {
    if !(t_end > 0.0) {
        return Err(Error::InvalidArgument(format!("t_end must be positive, got {t_end}")));
    }
    check_initial(rho0)?;
    let samples = DormandPrince::default().integrate(r, 0.0, rho0.pack(), t_end, dt_hint, Output::Steps)?;
    Ok(collect(samples))
}

/// Evolve `rho0` from `t = 0` and report the state at each of `times`.
pub fn integrate_at(r: &MasterRhs, rho0: &DensityMatrix, times: &[f64]) -> Result<Trajectory> {
    let t_end = times.last().copied().unwrap_or(0.0);
    if !(t_end > 0.0) {
        return Err(Error::InvalidArgument("need at least one positive output time".into()));
    }
    check_initial(rho0)?;
    let samples = DormandPrince::default().integrate(
        r,
        0.0,
        rho0.pack(),
        t_end,
        default_dt_hint(&r.params),
        Output::At(times),
    )?;
    Ok(collect(samples))
}

/// Residual tolerance of the steady-state solve.
pub const STEADY_RESIDUAL_TOL: f64 = 1e-10;

/// Steady state with the probe switched off. Without the probe the driven
/// equations are time independent, so the steady state is a single 8×8
/// complex linear solve (trace already eliminated).
pub fn steady_state_pump_only(params: &SystemParams) -> Result<DensityMatrix> {
    let p = params.pump_only();
    let gen = AffineGenerator::new(&p);
    let a = DMatrix::from_iterator(8, 8, gen.a0.iter().copied());
    let b = DVector::from_iterator(8, gen.b0.iter().map(|z| -z));
    let x = linalg::solve(a, &b, STEADY_RESIDUAL_TOL)?;
    let raw = from_generator_vector(x.as_slice(), 1.0);
    // The solve returns ρij and ρji separately; average onto an exactly
    // Hermitian matrix.
    let sym = (raw + raw.adjoint()) * Complex64::from(0.5);
    let rho = DensityMatrix::from_matrix_unchecked(sym);
    let residual = rhs(0.0, &rho, &MasterRhs::driven(p)).camax();
    if hermiticity_error(&raw) > 1e-8 || !(residual <= STEADY_RESIDUAL_TOL) {
        return Err(Error::SingularSystem { residual });
    }
    Ok(rho)
}
