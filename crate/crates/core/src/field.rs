//! Chemoattractant field `S = K * ρ` with `K(x) = ½ e^{-|x|}`.
//!
//! `S` solves `-S'' + S = ρ` with decay at infinity. Grid densities are
//! treated as a comb of point masses `ρ_j dx` at the cell centres, so the
//! convolution reduces to a forward and a backward first-order recursion with
//! factor `e^{-dx}`. The gradient stored at a node is the principal value: the
//! node's own mass does not contribute (`K'(0) := 0`).

use crate::aggregates::AggregateState;
use crate::error::{Error, Result};
use crate::model::{ChemoModel, VelocityLaw};

/// Uniform cell-centred grid on `[x_min, x_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    x_min: f64,
    x_max: f64,
    n: usize,
    dx: f64,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) || x_min >= x_max {
            return Err(Error::InvalidGrid(format!(
                "need finite x_min < x_max, got [{x_min}, {x_max}]"
            )));
        }
        if n < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 cells, got {n}")));
        }
        Ok(Grid1D {
            x_min,
            x_max,
            n,
            dx: (x_max - x_min) / n as f64,
        })
    }

    /// Grid whose spacing is as close to `dx` as an integer cell count allows.
    pub fn with_spacing(x_min: f64, x_max: f64, dx: f64) -> Result<Self> {
        if !(dx.is_finite() && dx > 0.0) {
            return Err(Error::InvalidGrid(format!("dx must be > 0, got {dx}")));
        }
        let n = ((x_max - x_min) / dx).round();
        if !n.is_finite() || n < 2.0 {
            return Err(Error::InvalidGrid(format!(
                "domain [{x_min}, {x_max}] holds fewer than 2 cells of width {dx}"
            )));
        }
        Self::new(x_min, x_max, n as usize)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Centre of cell `j`.
    #[inline]
    pub fn node(&self, j: usize) -> f64 {
        self.x_min + (j as f64 + 0.5) * self.dx
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.node(j)).collect()
    }

    /// Index of the cell containing `x`, clamped to the grid.
    pub fn cell_of(&self, x: f64) -> usize {
        let k = ((x - self.x_min) / self.dx).floor();
        if k <= 0.0 {
            0
        } else {
            (k as usize).min(self.n - 1)
        }
    }

    fn describe(&self) -> String {
        format!("[{}, {}] x {}", self.x_min, self.x_max, self.n)
    }

    pub(crate) fn ensure_same(&self, other: &Grid1D) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                left: self.describe(),
                right: other.describe(),
            })
        }
    }
}

/// Values sampled at the nodes of a [`Grid1D`]. Always finite.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    grid: Grid1D,
    values: Vec<f64>,
}

impl GridField {
    pub fn new(grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "{} values for a grid of {} cells",
                values.len(),
                grid.len()
            )));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "grid field",
                index,
            });
        }
        Ok(GridField { grid, values })
    }

    pub fn zeros(grid: Grid1D) -> Self {
        GridField {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.nodes().into_iter().map(f).collect())
    }

    /// Skips the finiteness scan; callers guarantee it.
    pub(crate) fn from_parts(grid: Grid1D, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        debug_assert!(values.iter().all(|v| v.is_finite()));
        GridField { grid, values }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// `Σ v_j dx`.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.dx
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[inline]
pub fn kernel(x: f64) -> f64 {
    0.5 * (-x.abs()).exp()
}

/// `K'(x) = -½ sign(x) e^{-|x|}` with `K'(0) = 0`.
#[inline]
pub fn kernel_gradient(x: f64) -> f64 {
    if x > 0.0 {
        -0.5 * (-x).exp()
    } else if x < 0.0 {
        0.5 * x.exp()
    } else {
        0.0
    }
}

/// `S` and `∂xS` of a Dirac sum at arbitrary points, by direct summation.
pub fn field_from_aggregates(state: &AggregateState, xs: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut s = Vec::with_capacity(xs.len());
    let mut ds = Vec::with_capacity(xs.len());
    for &x in xs {
        let mut sv = 0.0;
        let mut dv = 0.0;
        for (&y, &m) in state.positions().iter().zip(state.masses()) {
            sv += m * kernel(x - y);
            dv += m * kernel_gradient(x - y);
        }
        s.push(sv);
        ds.push(dv);
    }
    (s, ds)
}

/// Two-sided recursive exponential sums of `weights` on a uniform lattice.
///
/// Returns `(left, right)` with `left[j] = Σ_{k<=j} w_k e^{-(j-k) h}` and
/// `right[j] = Σ_{k>=j} w_k e^{-(k-j) h}`.
pub fn exponential_sums(weights: &[f64], h: f64) -> (Vec<f64>, Vec<f64>) {
    let n = weights.len();
    let decay = (-h).exp();
    let mut left = vec![0.0; n];
    let mut right = vec![0.0; n];
    let mut acc = 0.0;
    for j in 0..n {
        acc = acc * decay + weights[j];
        left[j] = acc;
    }
    acc = 0.0;
    for j in (0..n).rev() {
        acc = acc * decay + weights[j];
        right[j] = acc;
    }
    (left, right)
}

/// `S = K * ρ` and its principal-value gradient on the grid of `rho`, in O(n).
pub fn field_from_grid_density(rho: &GridField) -> (GridField, GridField) {
    let grid = *rho.grid();
    let dx = grid.dx();
    let weights: Vec<f64> = rho.values().iter().map(|r| r * dx).collect();
    let (left, right) = exponential_sums(&weights, dx);
    let mut s = Vec::with_capacity(grid.len());
    let mut ds = Vec::with_capacity(grid.len());
    for j in 0..grid.len() {
        s.push(0.5 * (left[j] + right[j] - weights[j]));
        ds.push(0.5 * (right[j] - left[j]));
    }
    (GridField::from_parts(grid, s), GridField::from_parts(grid, ds))
}

/// `max_j (D²S_j - S_j)` over interior nodes; non-positive up to truncation
/// error whenever `ρ >= 0`. Returns `-∞` on grids without interior nodes.
pub fn check_one_sided(s: &GridField, rho: &GridField) -> Result<f64> {
    s.grid().ensure_same(rho.grid())?;
    let v = s.values();
    let inv_dx2 = 1.0 / (s.grid().dx() * s.grid().dx());
    Ok(v.windows(3)
        .map(|w| (w[2] - 2.0 * w[1] + w[0]) * inv_dx2 - w[1])
        .fold(f64::NEG_INFINITY, f64::max))
}

/// One-sided Lipschitz excess of the velocity field `a(∂xS)`.
///
/// Returns `max_j (D⁺a(dS)_j - L · max(S_j, S_{j+1}))` with `L` the
/// Lipschitz constant of `a`. Between two nodes the grid field has no mass,
/// so `S'' = S > 0` there and `S` peaks at an endpoint of the cell; the
/// bound is therefore sharp for the discrete field. The step law has an
/// unbounded `φ'` and is rejected.
pub fn check_osl(ds: &GridField, s: &GridField, m: &ChemoModel) -> Result<f64> {
    ds.grid().ensure_same(s.grid())?;
    let lip = m.velocity_lipschitz().ok_or(Error::UnsupportedMode(m.law.name()))?;
    let dx = ds.grid().dx();
    let a: Vec<f64> = ds.values().iter().map(|&g| m.velocity(g)).collect();
    let sv = s.values();
    Ok((0..a.len().saturating_sub(1))
        .map(|j| (a[j + 1] - a[j]) / dx - lip * sv[j].max(sv[j + 1]))
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Macroscopic flux `J = -∂x A(∂xS) + a(∂xS) S` with centred differences.
///
/// A node carrying mass `w = ρ_j dx` sits on a jump of `∂xS` from
/// `dS_j + w/2` to `dS_j - w/2`; the node value of `A(∂xS)` is the mean of the
/// two one-sided values. End nodes use one-sided differences.
pub fn macroscopic_flux(
    rho: &GridField,
    s: &GridField,
    ds: &GridField,
    m: &ChemoModel,
) -> Result<GridField> {
    let grid = *rho.grid();
    grid.ensure_same(s.grid())?;
    grid.ensure_same(ds.grid())?;
    let dx = grid.dx();
    let potential: Vec<f64> = rho
        .values()
        .iter()
        .zip(ds.values())
        .map(|(&r, &g)| {
            let half_jump = 0.5 * r * dx;
            0.5 * (m.velocity_potential(g + half_jump) + m.velocity_potential(g - half_jump))
        })
        .collect();
    let n = grid.len();
    let sv = s.values();
    let dv = ds.values();
    let mut j = Vec::with_capacity(n);
    for k in 0..n {
        let dpot = if k == 0 {
            (potential[1] - potential[0]) / dx
        } else if k == n - 1 {
            (potential[n - 1] - potential[n - 2]) / dx
        } else {
            (potential[k + 1] - potential[k - 1]) / (2.0 * dx)
        };
        j.push(-dpot + m.velocity(dv[k]) * sv[k]);
    }
    GridField::new(grid, j)
}

/// Whether [`check_osl`] applies to this law.
pub fn osl_applicable(m: &ChemoModel) -> bool {
    m.law != VelocityLaw::Step
}
