//! Parameter sweeps: concurrence over time and initial weight, and
//! stationary concurrence over temperature/coupling planes.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::dynamics::{build_liouvillian, evolve_with, Basis, DensityMatrix, StateReport};
use crate::entanglement::stationary_concurrence;
use crate::error::{Error, Result};
use crate::model::{EigenSystem, Level, SystemParams};
use crate::numerics::{Tolerances, C64, ZERO};

/// Two-parameter families of initial states.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    /// √p|01⟩ + √(1−p)|10⟩
    Onebit,
    /// √p|00⟩ + √(1−p)|11⟩
    Twobit,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Onebit => "onebit",
            Family::Twobit => "twobit",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "onebit" => Ok(Family::Onebit),
            "twobit" => Ok(Family::Twobit),
            other => Err(format!("unknown family '{other}' (expected onebit or twobit)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitialStateSpec {
    Onebit(f64),
    Twobit(f64),
    /// Computational basis state, index 2·q₁ + q₂.
    Basis(usize),
    Eigen(Level),
    /// Amplitudes on |00⟩, |01⟩, |10⟩, |11⟩, normalized.
    Ket(Vec<C64>),
}

impl InitialStateSpec {
    pub fn family(family: Family, p: f64) -> Self {
        match family {
            Family::Onebit => InitialStateSpec::Onebit(p),
            Family::Twobit => InitialStateSpec::Twobit(p),
        }
    }

    pub fn ket(&self, es: &EigenSystem) -> Result<Vec<C64>> {
        let weight = |p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok((C64::new(p.sqrt(), 0.0), C64::new((1.0 - p).sqrt(), 0.0)))
            } else {
                Err(Error::InvalidArgument(format!("weight p = {p} outside [0, 1]")))
            }
        };
        match self {
            InitialStateSpec::Onebit(p) => {
                let (x, y) = weight(*p)?;
                Ok(vec![ZERO, x, y, ZERO])
            }
            InitialStateSpec::Twobit(p) => {
                let (x, y) = weight(*p)?;
                Ok(vec![x, ZERO, ZERO, y])
            }
            InitialStateSpec::Basis(k) => {
                if *k > 3 {
                    return Err(Error::InvalidArgument(format!("basis index {k} out of range")));
                }
                let mut v = vec![ZERO; 4];
                v[*k] = C64::new(1.0, 0.0);
                Ok(v)
            }
            InitialStateSpec::Eigen(level) => Ok(es.ket(*level)),
            InitialStateSpec::Ket(v) => {
                if v.len() != 4 {
                    return Err(Error::InvalidArgument(format!("ket needs 4 amplitudes, got {}", v.len())));
                }
                let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                if !(n >= 1e-12) || !n.is_finite() {
                    return Err(Error::InvalidArgument("ket has zero norm".into()));
                }
                Ok(v.iter().map(|z| z / n).collect())
            }
        }
    }

    /// Pure state in the computational basis.
    pub fn to_density(&self, es: &EigenSystem) -> Result<DensityMatrix> {
        DensityMatrix::pure(&self.ket(es)?, Basis::Computational)
    }
}

impl fmt::Display for InitialStateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialStateSpec::Onebit(p) => write!(f, "onebit:p={p}"),
            InitialStateSpec::Twobit(p) => write!(f, "twobit:p={p}"),
            InitialStateSpec::Basis(k) => write!(f, "basis:{}{}", k >> 1, k & 1),
            InitialStateSpec::Eigen(l) => write!(f, "eigen:{}", l.name()),
            InitialStateSpec::Ket(v) => {
                f.write_str("ket:")?;
                for (i, z) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{}{:+}i", z.re, z.im)?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Axis {
    pub name: &'static str,
    pub unit: &'static str,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepMetadata {
    pub params: SystemParams,
    pub family: Option<Family>,
    /// Worst invariant deviations over all trajectories, when the sweep
    /// integrated any.
    pub worst: Option<StateReport>,
}

/// Scalar field over a rectangular grid, stored row-major (last axis
/// fastest).
#[derive(Clone, Debug, PartialEq)]
pub struct SweepGrid {
    pub axes: Vec<Axis>,
    pub values: Vec<f64>,
    pub metadata: SweepMetadata,
}

impl SweepGrid {
    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.values.len()).collect()
    }

    /// Value at grid indices (i, j) of a two-axis grid.
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.axes[1].values.len() + j]
    }

    /// Row-major iteration over (coordinates, value).
    pub fn points(&self) -> impl Iterator<Item = (Vec<f64>, f64)> + '_ {
        let shape = self.shape();
        self.values.iter().enumerate().map(move |(flat, &v)| {
            let mut rem = flat;
            let mut coords = vec![0.0; shape.len()];
            for k in (0..shape.len()).rev() {
                coords[k] = self.axes[k].values[rem % shape[k]];
                rem /= shape[k];
            }
            (coords, v)
        })
    }
}

/// `count` evenly spaced values from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![start],
        _ => {
            let step = (stop - start) / (count - 1) as f64;
            (0..count).map(|k| if k + 1 == count { stop } else { start + step * k as f64 }).collect()
        }
    }
}

/// Time by which the slowest population channel has relaxed ten times
/// over: 10/(c_I + c̄_I).
pub fn default_horizon(p: &SystemParams) -> Result<f64> {
    let l = build_liouvillian(p)?;
    let r = l.rates();
    let rate = r.c_i + r.cbar_i;
    if rate > 0.0 {
        Ok(10.0 / rate)
    } else {
        Err(Error::InvalidParams("zero damping: no relaxation horizon".into()))
    }
}

fn check_grid(name: &str, values: &[f64], strictly_increasing: bool) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidArgument(format!("{name} grid is empty")));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!("{name} grid has non-finite values")));
    }
    if strictly_increasing && values.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument(format!("{name} grid must be strictly increasing")));
    }
    Ok(())
}

fn merge_reports(a: Option<StateReport>, b: Option<StateReport>) -> Option<StateReport> {
    match (a, b) {
        (Some(x), Some(y)) => Some(StateReport {
            trace_error: x.trace_error.max(y.trace_error),
            hermiticity: x.hermiticity.max(y.hermiticity),
            min_eigenvalue: x.min_eigenvalue.min(y.min_eigenvalue),
        }),
        (x, None) => x,
        (None, y) => y,
    }
}

/// C(t) for each weight p, one integration per p.
pub fn sweep_time_weight(family: Family, p_grid: &[f64], t_grid: &[f64], p: &SystemParams) -> Result<SweepGrid> {
    sweep_time_weight_with(family, p_grid, t_grid, p, &Tolerances::default())
}

pub fn sweep_time_weight_with(
    family: Family,
    p_grid: &[f64],
    t_grid: &[f64],
    p: &SystemParams,
    tol: &Tolerances,
) -> Result<SweepGrid> {
    check_grid("p", p_grid, true)?;
    check_grid("t", t_grid, true)?;
    if let Some(bad) = p_grid.iter().find(|w| !(0.0..=1.0).contains(*w)) {
        return Err(Error::InvalidArgument(format!("weight p = {bad} outside [0, 1]")));
    }
    let l = build_liouvillian(p)?;
    let rows: Vec<(Vec<f64>, Option<StateReport>)> = p_grid
        .par_iter()
        .map(|&w| {
            let rho0 = InitialStateSpec::family(family, w).to_density(l.eigensystem())?;
            let traj = evolve_with(&l, &rho0, t_grid, tol)?;
            Ok((traj.concurrence, traj.worst))
        })
        .collect::<Result<_>>()?;
    let worst = rows.iter().fold(None, |acc, (_, w)| merge_reports(acc, *w));
    Ok(SweepGrid {
        axes: vec![
            Axis { name: "p", unit: "", values: p_grid.to_vec() },
            Axis { name: "t_ns", unit: "ns", values: t_grid.to_vec() },
        ],
        values: rows.into_iter().flat_map(|(v, _)| v).collect(),
        metadata: SweepMetadata { params: *p, family: Some(family), worst },
    })
}

fn stationary_plane(
    outer: &[f64],
    inner: &[f64],
    point: impl Fn(f64, f64) -> SystemParams + Sync,
) -> Result<Vec<f64>> {
    let rows: Vec<Vec<f64>> = outer
        .par_iter()
        .map(|&x| inner.iter().map(|&y| stationary_concurrence(&point(x, y))).collect::<Result<_>>())
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}

/// C(∞) over T₁ = T₂ = T and λ.
pub fn sweep_t_lambda(t_grid: &[f64], lambda_grid: &[f64], p: &SystemParams) -> Result<SweepGrid> {
    check_grid("T", t_grid, false)?;
    check_grid("lambda", lambda_grid, false)?;
    let values = stationary_plane(t_grid, lambda_grid, |t, lam| p.with_temperatures(t, t).with_lambda(lam))?;
    Ok(SweepGrid {
        axes: vec![
            Axis { name: "T_mK", unit: "mK", values: t_grid.to_vec() },
            Axis { name: "lambda", unit: "rad/ns", values: lambda_grid.to_vec() },
        ],
        values,
        metadata: SweepMetadata { params: *p, family: None, worst: None },
    })
}

/// C(∞) over (T₁, T₂).
pub fn sweep_t1_t2(t1_grid: &[f64], t2_grid: &[f64], p: &SystemParams) -> Result<SweepGrid> {
    check_grid("T1", t1_grid, false)?;
    check_grid("T2", t2_grid, false)?;
    let values = stationary_plane(t1_grid, t2_grid, |t1, t2| p.with_temperatures(t1, t2))?;
    Ok(SweepGrid {
        axes: vec![
            Axis { name: "T1_mK", unit: "mK", values: t1_grid.to_vec() },
            Axis { name: "T2_mK", unit: "mK", values: t2_grid.to_vec() },
        ],
        values,
        metadata: SweepMetadata { params: *p, family: None, worst: None },
    })
}
