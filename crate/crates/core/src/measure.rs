//! Finite measures on the line and the distances between them.
//!
//! A grid density is read as point masses `ρ_j dx` at the cell centres, the
//! same convention the field module uses, so both variants are atomic and the
//! 1-D Wasserstein distance `∫ |F_μ - F_ν|` is evaluated exactly from the
//! merged atom lists.

use crate::aggregates::AggregateState;
use crate::error::{Error, Result};
use crate::field::{Grid1D, GridField};

#[derive(Debug, Clone, PartialEq)]
pub enum Measure1D {
    Dirac(AggregateState),
    Grid(GridField),
}

/// Three-point Gauss–Legendre nodes and weights on `[-1, 1]`.
const GAUSS3: [(f64, f64); 3] = [
    (-0.774_596_669_241_483_4, 5.0 / 9.0),
    (0.0, 8.0 / 9.0),
    (0.774_596_669_241_483_4, 5.0 / 9.0),
];

/// `∫` of `f` over every cell of `grid`, 3-point Gauss–Legendre per cell.
pub fn cell_masses(f: impl Fn(f64) -> f64, grid: &Grid1D) -> Vec<f64> {
    let half = 0.5 * grid.dx();
    (0..grid.len())
        .map(|j| {
            let x = grid.node(j);
            half * GAUSS3.iter().map(|&(u, w)| w * f(x + half * u)).sum::<f64>()
        })
        .collect()
}

/// Cell averages of `f`.
pub fn project_density(f: impl Fn(f64) -> f64, grid: &Grid1D) -> Result<GridField> {
    let dx = grid.dx();
    GridField::new(*grid, cell_masses(f, grid).into_iter().map(|m| m / dx).collect())
}

/// Replaces `rho_ini` by Dirac masses at the centres of the cells whose mass
/// exceeds `threshold` times the largest cell mass.
pub fn discretize_density(rho_ini: impl Fn(f64) -> f64, grid: &Grid1D, threshold: f64) -> Result<AggregateState> {
    let masses = cell_masses(rho_ini, grid);
    if let Some(index) = masses.iter().position(|m| !m.is_finite()) {
        return Err(Error::NonFinite { what: "cell mass", index });
    }
    if let Some((index, &value)) = masses.iter().enumerate().find(|(_, &m)| m < 0.0) {
        return Err(Error::NegativeDensity { index, value });
    }
    let largest = masses.iter().copied().fold(0.0, f64::max);
    let cut = threshold * largest;
    let (y, m): (Vec<f64>, Vec<f64>) = masses
        .iter()
        .enumerate()
        .filter(|(_, &m)| m > cut && m > 0.0)
        .map(|(j, &m)| (grid.node(j), m))
        .unzip();
    if y.is_empty() {
        return Err(Error::EmptyDiscretization);
    }
    AggregateState::new(0.0, y, m)
}

/// Nearest-cell deposit of a Dirac sum onto `grid` as a density.
pub fn deposit(state: &AggregateState, grid: &Grid1D) -> GridField {
    let mut v = vec![0.0; grid.len()];
    let inv_dx = 1.0 / grid.dx();
    for (&y, &m) in state.positions().iter().zip(state.masses()) {
        v[grid.cell_of(y)] += m * inv_dx;
    }
    GridField::new(*grid, v).expect("finite deposit")
}

impl Measure1D {
    /// Atoms `(position, mass)` in increasing position; grid cells with zero
    /// mass are skipped.
    pub fn atoms(&self) -> Vec<(f64, f64)> {
        match self {
            Measure1D::Dirac(s) => s.positions().iter().copied().zip(s.masses().iter().copied()).collect(),
            Measure1D::Grid(f) => {
                let g = f.grid();
                f.values()
                    .iter()
                    .enumerate()
                    .filter(|(_, &v)| v != 0.0)
                    .map(|(j, &v)| (g.node(j), v * g.dx()))
                    .collect()
            }
        }
    }

    pub fn total_mass(&self) -> f64 {
        match self {
            Measure1D::Dirac(s) => s.total_mass(),
            Measure1D::Grid(f) => f.integral(),
        }
    }

    fn check_masses(&self) -> Result<()> {
        if let Some((index, value)) = self
            .atoms()
            .into_iter()
            .enumerate()
            .find(|(_, (_, m))| *m < 0.0)
            .map(|(i, (_, m))| (i, m))
        {
            return Err(Error::NegativeDensity { index, value });
        }
        Ok(())
    }
}

/// Right-continuous cumulative mass `μ((-∞, x])` at sorted points `xs`.
pub fn cdf_at(mu: &Measure1D, xs: &[f64]) -> Vec<f64> {
    let atoms = mu.atoms();
    let mut out = Vec::with_capacity(xs.len());
    let mut k = 0;
    let mut acc = 0.0;
    for &x in xs {
        while k < atoms.len() && atoms[k].0 <= x {
            acc += atoms[k].1;
            k += 1;
        }
        out.push(acc);
    }
    out
}

/// Result of [`wasserstein1`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Distance {
    pub value: f64,
    /// Set when the total masses differed by more than `1e-8` relative and
    /// both measures were scaled to unit mass first.
    pub renormalized: bool,
}

/// `W₁(μ, ν) = ∫ |F_μ - F_ν| dx`, exact for atomic measures.
pub fn wasserstein1(mu: &Measure1D, nu: &Measure1D) -> Result<Distance> {
    mu.check_masses()?;
    nu.check_masses()?;
    let (m_mu, m_nu) = (mu.total_mass(), nu.total_mass());
    if !(m_mu > 0.0 && m_nu > 0.0) {
        return Err(Error::ZeroMass);
    }
    let renormalized = (m_mu - m_nu).abs() > 1e-8 * m_mu.max(m_nu);
    let (w_mu, w_nu) = if renormalized { (1.0 / m_mu, 1.0 / m_nu) } else { (1.0, 1.0) };

    // merge both atom lists as signed increments of F_μ - F_ν
    let a = mu.atoms();
    let b = nu.atoms();
    let (mut i, mut j) = (0, 0);
    let mut diff = 0.0f64;
    let mut value = 0.0;
    let mut last: Option<f64> = None;
    while i < a.len() || j < b.len() {
        let take_a = j >= b.len() || (i < a.len() && a[i].0 <= b[j].0);
        let (x, dm) = if take_a {
            i += 1;
            (a[i - 1].0, a[i - 1].1 * w_mu)
        } else {
            j += 1;
            (b[j - 1].0, -b[j - 1].1 * w_nu)
        };
        if let Some(x0) = last {
            value += diff.abs() * (x - x0);
        }
        diff += dm;
        last = Some(x);
    }
    Ok(Distance { value, renormalized })
}

pub fn center_of_mass(mu: &Measure1D) -> Result<f64> {
    let atoms = mu.atoms();
    let mass: f64 = atoms.iter().map(|a| a.1).sum();
    if mass.is_nan() || mass <= 0.0 {
        return Err(Error::ZeroMass);
    }
    Ok(atoms.iter().map(|(y, m)| y * m).sum::<f64>() / mass)
}
