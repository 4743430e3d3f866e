//! Parameter sets of the reference spectra.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::model::{ReferenceRate, SystemParams};

/// What a preset is meant to be run with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PresetKind {
    ProbeScan,
    PumpScan,
    Evolve,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Probe spectrum, G = 10γ1, θ = 15°.
    Fig2a,
    /// Probe spectrum, G = 50γ1, θ = 15°.
    Fig2b,
    /// Probe spectrum, θ = 35°: one Autler-Townes component nearly vanishes.
    Fig3Solid,
    /// Probe spectrum, γ2 = 6γ1, θ = 15°: both components show gain.
    Fig3DashDot,
    /// Trap-basis populations vs pump detuning, interference off.
    Fig4a,
    /// Trap-basis populations vs pump detuning, interference on.
    Fig4b,
    /// Time evolution into the quasi-trapped state.
    Fig5,
    /// Pump absorption and dispersion, γ1 = 10γ2.
    Fig6,
}

impl Preset {
    pub const ALL: [Preset; 8] = [
        Preset::Fig2a,
        Preset::Fig2b,
        Preset::Fig3Solid,
        Preset::Fig3DashDot,
        Preset::Fig4a,
        Preset::Fig4b,
        Preset::Fig5,
        Preset::Fig6,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig2a => "fig2a",
            Preset::Fig2b => "fig2b",
            Preset::Fig3Solid => "fig3solid",
            Preset::Fig3DashDot => "fig3dashdot",
            Preset::Fig4a => "fig4a",
            Preset::Fig4b => "fig4b",
            Preset::Fig5 => "fig5",
            Preset::Fig6 => "fig6",
        }
    }

    pub fn params(self) -> SystemParams {
        // Probe spectra: units of γ1, g = 0.01, Δ2 = 0, W12 = -G.
        let probe = |big_g: f64, gamma2: f64, theta_deg: f64| SystemParams {
            gamma1: 1.0,
            gamma2,
            theta_deg,
            eta0: 1,
            big_g,
            small_g: 0.01,
            w12: -big_g,
            delta2: 0.0,
            delta1: 0.0,
        };
        // Pump-only runs: units of γ2, G = 20, W12 = -G.
        let pump = |gamma1: f64, eta0: u8| SystemParams {
            gamma1,
            gamma2: 1.0,
            theta_deg: 15.0,
            eta0,
            big_g: 20.0,
            small_g: 0.0,
            w12: -20.0,
            delta2: 0.0,
            delta1: 0.0,
        };
        match self {
            Preset::Fig2a => probe(10.0, 1.0, 15.0),
            Preset::Fig2b => probe(50.0, 1.0, 15.0),
            Preset::Fig3Solid => probe(10.0, 1.0, 35.0),
            Preset::Fig3DashDot => probe(10.0, 6.0, 15.0),
            Preset::Fig4a => pump(1.0, 0),
            Preset::Fig4b | Preset::Fig5 => pump(1.0, 1),
            Preset::Fig6 => pump(10.0, 1),
        }
    }

    pub fn reference(self) -> ReferenceRate {
        match self {
            Preset::Fig2a | Preset::Fig2b | Preset::Fig3Solid | Preset::Fig3DashDot => {
                ReferenceRate::Gamma1
            }
            Preset::Fig4a | Preset::Fig4b | Preset::Fig5 | Preset::Fig6 => ReferenceRate::Gamma2,
        }
    }

    pub fn kind(self) -> PresetKind {
        match self {
            Preset::Fig2a | Preset::Fig2b | Preset::Fig3Solid | Preset::Fig3DashDot => {
                PresetKind::ProbeScan
            }
            Preset::Fig4a | Preset::Fig4b | Preset::Fig6 => PresetKind::PumpScan,
            Preset::Fig5 => PresetKind::Evolve,
        }
    }

    /// Default sweep range `(from, to, points)`: probe detuning over ±2G
    /// for probe spectra, pump detuning over ±3G for pump scans.
    pub fn default_range(self) -> (f64, f64, usize) {
        let g = self.params().big_g;
        match self.kind() {
            PresetKind::ProbeScan => (-2.0 * g, 2.0 * g, 1000),
            PresetKind::PumpScan => (-3.0 * g, 3.0 * g, 601),
            PresetKind::Evolve => (0.0, 100.0, 1001),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown preset `{s}`")))
    }
}
