//! Parameter set and density-matrix value types.
//!
//! Every rate, detuning and field amplitude is a plain number measured in
//! units of a reference decay rate (see [`ReferenceRate`]); times are in
//! units of its inverse. Rates follow the half-width convention: the
//! population of `|1⟩` decays at `2·gamma1`.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::Matrix3;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Field names accepted by [`make_params`] and the config parser, in
/// canonical output order.
pub const PARAM_KEYS: [&str; 9] = [
    "gamma1",
    "gamma2",
    "theta_deg",
    "eta0",
    "big_g",
    "small_g",
    "w12",
    "delta2",
    "delta1",
];

/// Which decay rate the numbers are expressed in. Only a label: the
/// equations are homogeneous, so changing it rescales nothing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReferenceRate {
    #[default]
    Gamma1,
    Gamma2,
}

impl ReferenceRate {
    pub fn as_str(self) -> &'static str {
        match self {
            ReferenceRate::Gamma1 => "gamma1",
            ReferenceRate::Gamma2 => "gamma2",
        }
    }
}

impl std::str::FromStr for ReferenceRate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gamma1" => Ok(ReferenceRate::Gamma1),
            "gamma2" => Ok(ReferenceRate::Gamma2),
            other => Err(Error::InvalidArgument(format!(
                "reference rate must be gamma1 or gamma2, got `{other}`"
            ))),
        }
    }
}

/// Physical parameters of the driven V-system.
///
/// Fields are public so presets can be tweaked in place; values obtained
/// through [`make_params`] or [`SystemParams::validate`] are guaranteed to
/// satisfy the invariants. The probe-pump beat `δ` is derived from the three
/// detunings and is never stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Half the population decay rate of `|1⟩ → |3⟩`.
    pub gamma1: f64,
    /// Half the population decay rate of `|2⟩ → |3⟩`.
    pub gamma2: f64,
    /// Angle between the two transition dipoles, in degrees.
    pub theta_deg: f64,
    /// Interference switch, 0 or 1.
    pub eta0: u8,
    /// Pump Rabi half-amplitude `G`.
    pub big_g: f64,
    /// Probe Rabi half-amplitude `g`.
    pub small_g: f64,
    /// Excited-level splitting `W13 - W23`.
    pub w12: f64,
    /// Pump detuning `W23 - ω2`.
    pub delta2: f64,
    /// Probe detuning `W13 - ω1`.
    pub delta1: f64,
}

impl SystemParams {
    /// Interference strength `η = η0·√(γ1γ2)·cos θ`.
    pub fn eta(&self) -> f64 {
        eta(self)
    }

    /// Probe-pump beat `δ = ω1 - ω2 = W12 - Δ1 + Δ2`.
    pub fn delta(&self) -> f64 {
        self.w12 - self.delta1 + self.delta2
    }

    pub fn theta_rad(&self) -> f64 {
        self.theta_deg.to_radians()
    }

    pub fn vic_enabled(&self) -> bool {
        self.eta0 == 1
    }

    /// Copy with the interference switched off.
    pub fn without_vic(&self) -> Self {
        Self { eta0: 0, ..*self }
    }

    /// Copy with the probe removed.
    pub fn pump_only(&self) -> Self {
        Self { small_g: 0.0, ..*self }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [("gamma1", self.gamma1), ("gamma2", self.gamma2)] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::NonPositiveRate { name, value });
            }
        }
        if self.eta0 > 1 {
            return Err(Error::InvalidSwitch(self.eta0 as f64));
        }
        for (key, value) in self.entries() {
            if !value.is_finite() {
                return Err(Error::BadNumber {
                    key: key.to_string(),
                    raw: value.to_string(),
                    line: None,
                });
            }
        }
        Ok(())
    }

    /// `(key, value)` pairs in [`PARAM_KEYS`] order.
    pub fn entries(&self) -> [(&'static str, f64); 9] {
        [
            ("gamma1", self.gamma1),
            ("gamma2", self.gamma2),
            ("theta_deg", self.theta_deg),
            ("eta0", self.eta0 as f64),
            ("big_g", self.big_g),
            ("small_g", self.small_g),
            ("w12", self.w12),
            ("delta2", self.delta2),
            ("delta1", self.delta1),
        ]
    }

    /// Raw string map suitable for [`make_params`].
    pub fn to_raw(&self) -> RawParams {
        self.entries()
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }

    /// Serialize as a flat `key = value` config. `f64`'s `Display` is the
    /// shortest representation that parses back to the same bits.
    pub fn to_config_string(&self) -> String {
        self.entries()
            .iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    /// Single-line `key=value` summary used in CSV comment headers.
    pub fn summary(&self) -> String {
        self.entries()
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl fmt::Display for SystemParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.summary())
    }
}

/// Interference strength `η = η0·√(γ1γ2)·cos θ`.
pub fn eta(params: &SystemParams) -> f64 {
    if params.eta0 == 0 {
        return 0.0;
    }
    (params.gamma1 * params.gamma2).sqrt() * params.theta_rad().cos()
}

/// Unvalidated key/value strings, ordered by key.
pub type RawParams = BTreeMap<String, String>;

fn parse_number(key: &str, raw: &str, line: Option<usize>) -> Result<f64> {
    raw.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::BadNumber {
            key: key.to_string(),
            raw: raw.to_string(),
            line,
        })
}

/// Build validated parameters from a raw key/value map.
pub fn make_params(raw: &RawParams) -> Result<SystemParams> {
    for key in raw.keys() {
        if !PARAM_KEYS.contains(&key.as_str()) {
            return Err(Error::UnknownKey { key: key.clone(), line: None });
        }
    }
    let get = |key: &str| -> Result<f64> {
        let value = raw.get(key).ok_or_else(|| Error::MissingKey(key.to_string()))?;
        parse_number(key, value, None)
    };
    let switch = get("eta0")?;
    let eta0 = if switch == 0.0 {
        0
    } else if switch == 1.0 {
        1
    } else {
        return Err(Error::InvalidSwitch(switch));
    };
    let params = SystemParams {
        gamma1: get("gamma1")?,
        gamma2: get("gamma2")?,
        theta_deg: get("theta_deg")?,
        eta0,
        big_g: get("big_g")?,
        small_g: get("small_g")?,
        w12: get("w12")?,
        delta2: get("delta2")?,
        delta1: get("delta1")?,
    };
    params.validate()?;
    Ok(params)
}

/// Parse a flat `key = value` config. Blank lines and `#` comments are
/// ignored. Keys must be known parameter names and values must parse as
/// numbers; problems are reported with their 1-based line number. Missing
/// keys are not an error here, since configs usually override a preset.
pub fn parse_config(text: &str) -> Result<RawParams> {
    let mut raw = RawParams::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| Error::ConfigSyntax {
            line: lineno,
            message: format!("expected `key = value`, got `{content}`"),
        })?;
        let key = key.trim();
        let value = value.trim();
        if !PARAM_KEYS.contains(&key) {
            return Err(Error::UnknownKey { key: key.to_string(), line: Some(lineno) });
        }
        parse_number(key, value, Some(lineno))?;
        if raw.insert(key.to_string(), value.to_string()).is_some() {
            return Err(Error::ConfigSyntax {
                line: lineno,
                message: format!("duplicate key `{key}`"),
            });
        }
    }
    Ok(raw)
}

pub(crate) const TRACE_TOL: f64 = 1e-10;
pub(crate) const HERMITIAN_TOL: f64 = 1e-12;

/// 3×3 density matrix in the bare basis `{|1⟩, |2⟩, |3⟩}` (index 0, 1, 2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(Matrix3<Complex64>);

/// Number of reals in the packed representation used by the integrators:
/// `[ρ11, ρ22, ρ33, Re ρ12, Im ρ12, Re ρ13, Im ρ13, Re ρ23, Im ρ23]`.
pub const PACKED_LEN: usize = 9;

impl DensityMatrix {
    /// Wrap a matrix without checking the invariants.
    pub fn from_matrix_unchecked(m: Matrix3<Complex64>) -> Self {
        Self(m)
    }

    /// Wrap a matrix, rejecting non-Hermitian or non-normalized input.
    pub fn from_matrix(m: Matrix3<Complex64>) -> Result<Self> {
        let rho = Self(m);
        let herm = rho.hermiticity_error();
        let trace = (rho.trace() - 1.0).abs();
        if herm > HERMITIAN_TOL || trace > TRACE_TOL {
            return Err(Error::InvalidArgument(format!(
                "not a density matrix: hermiticity error {herm:e}, trace error {trace:e}"
            )));
        }
        Ok(rho)
    }

    /// Pure bare state `|k⟩⟨k|`, `k` in `0..3`.
    pub fn pure_bare(k: usize) -> Self {
        let mut m = Matrix3::zeros();
        m[(k, k)] = Complex64::new(1.0, 0.0);
        Self(m)
    }

    /// The ground state `|3⟩⟨3|`.
    pub fn ground() -> Self {
        Self::pure_bare(2)
    }

    pub fn matrix(&self) -> &Matrix3<Complex64> {
        &self.0
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn population(&self, k: usize) -> f64 {
        self.0[(k, k)].re
    }

    pub fn trace(&self) -> f64 {
        (0..3).map(|k| self.0[(k, k)].re).sum()
    }

    /// Largest `|ρij - conj(ρji)|`, including imaginary parts of the diagonal.
    pub fn hermiticity_error(&self) -> f64 {
        hermiticity_error(&self.0)
    }

    pub fn pack(&self) -> [f64; PACKED_LEN] {
        let m = &self.0;
        [
            m[(0, 0)].re,
            m[(1, 1)].re,
            m[(2, 2)].re,
            m[(0, 1)].re,
            m[(0, 1)].im,
            m[(0, 2)].re,
            m[(0, 2)].im,
            m[(1, 2)].re,
            m[(1, 2)].im,
        ]
    }

    pub fn unpack(y: &[f64; PACKED_LEN]) -> Self {
        Self(unpack_hermitian(y))
    }
}

pub(crate) fn hermiticity_error(m: &Matrix3<Complex64>) -> f64 {
    let mut err = 0.0_f64;
    for i in 0..3 {
        for j in 0..3 {
            err = err.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    err
}

/// Rebuild a Hermitian matrix from its packed form.
pub(crate) fn unpack_hermitian(y: &[f64; PACKED_LEN]) -> Matrix3<Complex64> {
    let c = Complex64::new;
    let r12 = c(y[3], y[4]);
    let r13 = c(y[5], y[6]);
    let r23 = c(y[7], y[8]);
    Matrix3::new(
        c(y[0], 0.0),
        r12,
        r13,
        r12.conj(),
        c(y[1], 0.0),
        r23,
        r13.conj(),
        r23.conj(),
        c(y[2], 0.0),
    )
}

/// Pack a Hermitian-consistent matrix (only the upper triangle is read).
pub(crate) fn pack_hermitian(m: &Matrix3<Complex64>) -> [f64; PACKED_LEN] {
    DensityMatrix(*m).pack()
}
