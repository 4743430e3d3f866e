//! Parameter sweeps and their CSV form.

use std::io::{self, Write};

use rayon::prelude::*;

use crate::dressed::{evolve_secular_at, to_trap_basis, SecularState};
use crate::error::{Error, Result};
use crate::floquet::probe_absorption;
use crate::master::{integrate_at, steady_state_pump_only, MasterRhs};
use crate::model::{DensityMatrix, ReferenceRate, SystemParams};

/// A sampled observable table: one sweep variable and named columns of
/// equal length.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub sweep_name: String,
    pub sweep_values: Vec<f64>,
    pub columns: Vec<(String, Vec<f64>)>,
    /// Grid points left out because no solution exists there.
    pub skipped: Vec<f64>,
}

impl ScanResult {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    pub fn len(&self) -> usize {
        self.sweep_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sweep_values.is_empty()
    }

    /// Write as CSV: a comment line with the parameters, one comment per
    /// skipped point, the column header, then rows with 15 significant digits.
    pub fn write_csv<W: Write>(&self, out: &mut W, params: &SystemParams, units: ReferenceRate) -> io::Result<()> {
        writeln!(out, "# {} units={}", params.summary(), units.as_str())?;
        for x in &self.skipped {
            writeln!(out, "# skipped {}={:.14e}: pump-probe beat vanishes", self.sweep_name, x)?;
        }
        write!(out, "{}", self.sweep_name)?;
        for (name, _) in &self.columns {
            write!(out, ",{name}")?;
        }
        writeln!(out)?;
        for (k, x) in self.sweep_values.iter().enumerate() {
            write!(out, "{x:.14e}")?;
            for (_, col) in &self.columns {
                write!(out, ",{:.14e}", col[k])?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn to_csv(&self, params: &SystemParams, units: ReferenceRate) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf, params, units).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("CSV output is ASCII")
    }
}

/// `n` evenly spaced points from `from` to `to` inclusive.
pub fn linspace(from: f64, to: f64, n: usize) -> Result<Vec<f64>> {
    if !(from.is_finite() && to.is_finite()) || from >= to {
        return Err(Error::InvalidArgument(format!("empty range [{from}, {to}]")));
    }
    if n < 2 {
        return Err(Error::InvalidArgument(format!("a scan needs at least 2 points, got {n}")));
    }
    let step = (to - from) / (n - 1) as f64;
    Ok((0..n).map(|k| if k == n - 1 { to } else { from + step * k as f64 }).collect())
}

/// Evaluate `f` at every index on a pool of `jobs` threads (`0` means one
/// per logical CPU). Results keep
/// index order and the reported error is the one at the lowest index, so
/// the outcome does not depend on `jobs`.
pub fn map_indexed<T, F>(n: usize, jobs: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    let results: Vec<Result<T>> = if jobs == 1 {
        (0..n).map(&f).collect()
    } else if jobs == 0 {
        (0..n).into_par_iter().map(&f).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?;
        pool.install(|| (0..n).into_par_iter().map(&f).collect())
    };
    results.into_iter().collect()
}

fn annotate(name: &str, value: f64) -> impl FnOnce(Error) -> Error + '_ {
    move |e| Error::AtGridPoint { name: name.to_string(), value, source: Box::new(e) }
}

/// Probe absorption `α/α₀` against `Δ1`, optionally next to the same curve
/// with interference switched off. Points where `δ = 0` are skipped.
pub fn probe_scan(
    params: &SystemParams,
    from: f64,
    to: f64,
    points: usize,
    compare_no_vic: bool,
    jobs: usize,
) -> Result<ScanResult> {
    params.validate()?;
    let grid = linspace(from, to, points)?;
    let rows = map_indexed(grid.len(), jobs, |k| {
        let p = SystemParams { delta1: grid[k], ..*params };
        let with = match probe_absorption(&p) {
            Err(Error::DegenerateDetuning) => return Ok(None),
            r => r.map_err(annotate("delta1", grid[k]))?,
        };
        let without = if compare_no_vic {
            probe_absorption(&p.without_vic()).map_err(annotate("delta1", grid[k]))?
        } else {
            f64::NAN
        };
        Ok(Some((with, without)))
    })?;

    let mut result = ScanResult {
        sweep_name: "delta1".into(),
        sweep_values: Vec::new(),
        columns: Vec::new(),
        skipped: Vec::new(),
    };
    let (mut with, mut without) = (Vec::new(), Vec::new());
    for (x, row) in grid.iter().zip(rows) {
        match row {
            Some((a, b)) => {
                result.sweep_values.push(*x);
                with.push(a);
                without.push(b);
            }
            None => result.skipped.push(*x),
        }
    }
    result.columns.push(("alpha_over_alpha0".into(), with));
    if compare_no_vic {
        result.columns.push(("alpha_no_vic".into(), without));
    }
    Ok(result)
}

/// Pump-only steady state against `Δ2`: trap-basis populations and `σ23`.
pub fn pump_scan(params: &SystemParams, from: f64, to: f64, points: usize, jobs: usize) -> Result<ScanResult> {
    params.validate()?;
    let grid = linspace(from, to, points)?;
    let rows = map_indexed(grid.len(), jobs, |k| {
        let p = SystemParams { delta2: grid[k], ..*params };
        let rho = steady_state_pump_only(&p).map_err(annotate("delta2", grid[k]))?;
        let d = to_trap_basis(&rho, &p).map_err(annotate("delta2", grid[k]))?;
        let s23 = rho.get(1, 2);
        Ok([d.sigma_pp(), d.sigma_cc(), d.sigma_ucuc(), s23.re, s23.im])
    })?;
    let names = ["sigma_pp", "sigma_cc", "sigma_ucuc", "re_sigma23", "im_sigma23"];
    let columns = names
        .iter()
        .enumerate()
        .map(|(c, n)| (n.to_string(), rows.iter().map(|r| r[c]).collect()))
        .collect();
    Ok(ScanResult { sweep_name: "delta2".into(), sweep_values: grid, columns, skipped: Vec::new() })
}

/// Time evolution from the ground state, sampled at `points` evenly spaced
/// times in `[0, t_end]`. Columns are trap-basis populations; the full
/// master equation also reports bare populations.
pub fn evolve_scan(params: &SystemParams, t_end: f64, points: usize, secular: bool) -> Result<ScanResult> {
    params.validate()?;
    if !(t_end > 0.0) {
        return Err(Error::InvalidArgument(format!("t_end must be positive, got {t_end}")));
    }
    let times = linspace(0.0, t_end, points)?;
    let mut columns: Vec<(String, Vec<f64>)> = Vec::new();
    let mut push = |name: &str, v: Vec<f64>| columns.push((name.to_string(), v));
    if secular {
        let x0 = SecularState::ground(params)?;
        let out = evolve_secular_at(params, &x0, &times)?;
        push("sigma_ucuc", out.iter().map(|(_, x)| x.sigma_ucuc).collect());
        push("sigma_cc", out.iter().map(|(_, x)| x.sigma_cc).collect());
        push("sigma_pp", out.iter().map(|(_, x)| x.sigma_pp).collect());
    } else {
        let traj = integrate_at(&MasterRhs::driven(*params), &DensityMatrix::ground(), &times)?;
        let trap = traj
            .states
            .iter()
            .map(|r| to_trap_basis(r, params))
            .collect::<Result<Vec<_>>>()?;
        push("sigma_ucuc", trap.iter().map(|d| d.sigma_ucuc()).collect());
        push("sigma_cc", trap.iter().map(|d| d.sigma_cc()).collect());
        push("sigma_pp", trap.iter().map(|d| d.sigma_pp()).collect());
        for k in 0..3 {
            push(&format!("rho{0}{0}", k + 1), traj.states.iter().map(|r| r.population(k)).collect());
        }
    }
    Ok(ScanResult { sweep_name: "t".into(), sweep_values: times, columns, skipped: Vec::new() })
}
