//! Two-velocity run-and-tumble model at finite relaxation parameter `ε`.
//!
//! ```text
//! ∂t f± ± c ∂x f± = (Φ(∓c ∂xS) f∓ - Φ(±c ∂xS) f±) / ε,    -∂xx S + S = f+ + f-
//! ```
//!
//! Each step transports both populations with first-order upwinding (zero
//! inflow at the ends), recomputes the field from `ρ = f+ + f-`, and then
//! applies the exact solution of the relaxation at frozen field. Because
//! `Φ(x) + Φ(-x) = 2φ0`, the relaxation is a linear exchange with rate
//! `2φ0/ε` toward `f+ = ½ (1 + a(∂xS)/c) ρ`.

use crate::error::{Error, Result};
use crate::field::{field_from_grid_density, macroscopic_flux, Grid1D, GridField};
use crate::model::{ChemoModel, VelocityLaw};

/// How the initial density is split between right and left movers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitialSplit {
    /// Local equilibrium of the initial field.
    #[default]
    Equilibrium,
    /// `f+ = f- = ρ/2`.
    Even,
}

impl std::str::FromStr for InitialSplit {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "equilibrium" => Ok(InitialSplit::Equilibrium),
            "even" => Ok(InitialSplit::Even),
            other => Err(format!("unknown initial split `{other}` (equilibrium|even)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KineticState {
    grid: Grid1D,
    f_plus: Vec<f64>,
    f_minus: Vec<f64>,
    eps: f64,
    t: f64,
}

fn require_kinetic_law(model: &ChemoModel) -> Result<()> {
    if model.law == VelocityLaw::Identity {
        Err(Error::UnsupportedMode(model.law.name()))
    } else {
        Ok(())
    }
}

fn check_populations(what: &'static str, f: &[f64]) -> Result<()> {
    for (index, &v) in f.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite { what, index });
        }
        if v < 0.0 {
            return Err(Error::NegativeDensity { index, value: v });
        }
    }
    Ok(())
}

/// Right-mover share of the local equilibrium, `½ (1 + a/c)`.
#[inline]
fn equilibrium_fraction(model: &ChemoModel, ds: f64) -> f64 {
    0.5 * (1.0 + model.velocity(ds) / model.c)
}

impl KineticState {
    pub fn new(grid: Grid1D, f_plus: Vec<f64>, f_minus: Vec<f64>, eps: f64, t: f64) -> Result<Self> {
        if f_plus.len() != grid.len() || f_minus.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "populations of length {}/{} on a grid of {} cells",
                f_plus.len(),
                f_minus.len(),
                grid.len()
            )));
        }
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::InvalidModel {
                key: "eps",
                reason: format!("must be finite and > 0, got {eps}"),
            });
        }
        check_populations("f_plus", &f_plus)?;
        check_populations("f_minus", &f_minus)?;
        Ok(KineticState {
            grid,
            f_plus,
            f_minus,
            eps,
            t,
        })
    }

    /// Splits `rho` between the two velocities according to `split`.
    pub fn from_density(rho: &GridField, eps: f64, model: &ChemoModel, split: InitialSplit) -> Result<Self> {
        require_kinetic_law(model)?;
        check_populations("rho", rho.values())?;
        let (f_plus, f_minus) = match split {
            InitialSplit::Even => {
                let half: Vec<f64> = rho.values().iter().map(|r| 0.5 * r).collect();
                (half.clone(), half)
            }
            InitialSplit::Equilibrium => {
                let (_, ds) = field_from_grid_density(rho);
                rho.values()
                    .iter()
                    .zip(ds.values())
                    .map(|(&r, &g)| {
                        let share = equilibrium_fraction(model, g);
                        (share * r, (1.0 - share) * r)
                    })
                    .unzip()
            }
        };
        Self::new(*rho.grid(), f_plus, f_minus, eps, 0.0)
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn f_plus(&self) -> &[f64] {
        &self.f_plus
    }

    pub fn f_minus(&self) -> &[f64] {
        &self.f_minus
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn density(&self) -> GridField {
        let rho = self.f_plus.iter().zip(&self.f_minus).map(|(p, m)| p + m).collect();
        GridField::from_parts(self.grid, rho)
    }

    pub fn total_mass(&self) -> f64 {
        (self.f_plus.iter().sum::<f64>() + self.f_minus.iter().sum::<f64>()) * self.grid.dx()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.f_plus.iter().chain(&self.f_minus).all(|&v| v >= 0.0)
    }

    /// Advances by `dt` and returns the mass that left through the ends.
    pub fn step(&mut self, dt: f64, model: &ChemoModel) -> Result<f64> {
        require_kinetic_law(model)?;
        let dx = self.grid.dx();
        let courant = model.c * dt / dx;
        if dt.is_nan() || dt <= 0.0 || courant > 1.0 + 1e-12 {
            return Err(Error::Cfl { courant });
        }
        let nu = courant.min(1.0);
        let n = self.grid.len();

        // transport: +c sweeps right, -c sweeps left, nothing flows in
        let outflow = nu * (self.f_plus[n - 1] + self.f_minus[0]) * dx;
        for j in (1..n).rev() {
            self.f_plus[j] = (1.0 - nu) * self.f_plus[j] + nu * self.f_plus[j - 1];
        }
        self.f_plus[0] *= 1.0 - nu;
        for j in 0..n - 1 {
            self.f_minus[j] = (1.0 - nu) * self.f_minus[j] + nu * self.f_minus[j + 1];
        }
        self.f_minus[n - 1] *= 1.0 - nu;

        // relaxation toward the equilibrium of the updated field
        let (_, ds) = field_from_grid_density(&self.density());
        let keep = (-2.0 * model.phi0 * dt / self.eps).exp();
        for ((fp, fm), &g) in self.f_plus.iter_mut().zip(self.f_minus.iter_mut()).zip(ds.values()) {
            let rho = *fp + *fm;
            let share = equilibrium_fraction(model, g);
            *fp = keep * *fp + (1.0 - keep) * share * rho;
            *fm = keep * *fm + (1.0 - keep) * (1.0 - share) * rho;
        }
        debug_assert!(self.is_nonnegative());
        self.t += dt;
        Ok(outflow)
    }
}

/// Functional form of [`KineticState::step`].
pub fn kinetic_step(state: &KineticState, dt: f64, model: &ChemoModel) -> Result<KineticState> {
    let mut next = state.clone();
    next.step(dt, model)?;
    Ok(next)
}

/// Density `ρ = f+ + f-` and flux `J = c (f+ - f-)`.
pub fn moments(state: &KineticState, c: f64) -> (GridField, GridField) {
    let flux = state
        .f_plus
        .iter()
        .zip(&state.f_minus)
        .map(|(p, m)| c * (p - m))
        .collect();
    (state.density(), GridField::from_parts(state.grid, flux))
}

/// `max |J_ε - J|` over interior nodes, where `J` is the macroscopic flux of
/// the field induced by the kinetic density.
pub fn flux_comparison(state: &KineticState, model: &ChemoModel) -> Result<f64> {
    let (rho, kinetic_flux) = moments(state, model.c);
    let (s, ds) = field_from_grid_density(&rho);
    let macro_flux = macroscopic_flux(&rho, &s, &ds, model)?;
    let n = rho.grid().len();
    Ok((1..n - 1)
        .map(|j| (kinetic_flux.values()[j] - macro_flux.values()[j]).abs())
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq)]
pub struct KineticSample {
    pub t: f64,
    pub rho: GridField,
    pub flux: GridField,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KineticParams {
    pub eps: f64,
    pub dt: f64,
    pub t_end: f64,
    pub split: InitialSplit,
    /// Record moments every this many steps; the first and last states are
    /// always recorded.
    pub sample_every: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KineticRun {
    pub samples: Vec<KineticSample>,
    pub terminal: KineticState,
    pub initial_mass: f64,
    /// Total mass that left through the domain ends.
    pub outflow: f64,
    pub steps: usize,
    /// `f± >= 0` held after every step.
    pub stayed_nonnegative: bool,
}

/// Runs the kinetic model from `rho_ini` to `params.t_end`.
pub fn simulate_kinetic(rho_ini: &GridField, model: &ChemoModel, params: &KineticParams) -> Result<KineticRun> {
    let (steps, time_at) = crate::aggregates::step_times(0.0, params.t_end, params.dt)?;
    let courant = model.c * params.dt / rho_ini.grid().dx();
    if courant > 1.0 + 1e-12 {
        return Err(Error::Cfl { courant });
    }
    let mut state = KineticState::from_density(rho_ini, params.eps, model, params.split)?;
    let initial_mass = state.total_mass();
    let every = params.sample_every.max(1);
    let record = |s: &KineticState| {
        let (rho, flux) = moments(s, model.c);
        KineticSample { t: s.t, rho, flux }
    };
    let mut samples = vec![record(&state)];
    let mut outflow = 0.0;
    let mut stayed_nonnegative = true;
    for k in 1..=steps {
        outflow += state.step(time_at(k) - time_at(k - 1), model)?;
        state.t = time_at(k);
        stayed_nonnegative &= state.is_nonnegative();
        if k % every == 0 || k == steps {
            samples.push(record(&state));
        }
    }
    Ok(KineticRun {
        samples,
        terminal: state,
        initial_mass,
        outflow,
        steps,
        stayed_nonnegative,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss_pair(grid: Grid1D) -> GridField {
        GridField::from_fn(grid, |x| (-20.0 * (x - 0.5f64).powi(2)).exp() + (-20.0 * (x + 0.5f64).powi(2)).exp()).unwrap()
    }

    #[test]
    fn uniform_equilibrium_is_fixed_by_relaxation() {
        // with ∂xS = 0 the equilibrium split is even
        let m = ChemoModel::default();
        assert_eq!(equilibrium_fraction(&m, 0.0), 0.5);
        let g = Grid1D::new(-1.0, 1.0, 20).unwrap();
        let rho = GridField::new(g, vec![0.0; 20]).unwrap();
        let mut s = KineticState::from_density(&rho, 0.1, &m, InitialSplit::Equilibrium).unwrap();
        s.step(0.05, &m).unwrap();
        assert!(s.f_plus().iter().chain(s.f_minus()).all(|&v| v == 0.0));
    }

    #[test]
    fn relaxation_reaches_equilibrium() {
        let m = ChemoModel::default();
        let g = Grid1D::new(-25.0, 25.0, 5000).unwrap();
        let rho = gauss_pair(g);
        let eps = 1e-3;
        let dt = 0.5 * g.dx();
        let state = KineticState::from_density(&rho, eps, &m, InitialSplit::Even).unwrap();
        let next = kinetic_step(&state, dt, &m).unwrap();
        // exact frozen-field solution at the transported density
        let (r, _) = moments(&next, m.c);
        let (_, ds) = field_from_grid_density(&r);
        let keep = (-2.0 * m.phi0 * dt / eps).exp();
        let mut transported = state.clone();
        transported.f_plus = {
            let mut f = state.f_plus.clone();
            for j in (1..f.len()).rev() {
                f[j] = 0.5 * f[j] + 0.5 * state.f_plus[j - 1];
            }
            f[0] *= 0.5;
            f
        };
        for j in 0..g.len() {
            let eq = equilibrium_fraction(&m, ds.values()[j]) * r.values()[j];
            let expected = eq + (transported.f_plus[j] - eq) * keep;
            assert!((next.f_plus()[j] - expected).abs() <= 1e-12 * (1.0 + r.values()[j]));
            assert!((next.f_plus()[j] - eq).abs() <= keep * r.values()[j] + 1e-15);
        }
    }

    #[test]
    fn moments_and_flux_bounds() {
        let m = ChemoModel::default();
        let g = Grid1D::new(-25.0, 25.0, 2000).unwrap();
        let rho = gauss_pair(g);
        let even = KineticState::from_density(&rho, 0.1, &m, InitialSplit::Even).unwrap();
        let (_, j) = moments(&even, m.c);
        assert!(j.values().iter().all(|&v| v == 0.0));

        let eq = KineticState::from_density(&rho, 0.1, &m, InitialSplit::Equilibrium).unwrap();
        let (r, j) = moments(&eq, m.c);
        let (_, ds) = field_from_grid_density(&r);
        for k in 0..g.len() {
            assert!(j.values()[k].abs() <= m.c * r.values()[k] + 1e-15);
            let a_rho = m.velocity(ds.values()[k]) * rho.values()[k];
            assert!((j.values()[k] - a_rho).abs() < 1e-12);
        }
    }

    #[test]
    fn cfl_and_law_checks() {
        let m = ChemoModel::default();
        let g = Grid1D::new(-1.0, 1.0, 100).unwrap();
        let rho = GridField::zeros(g);
        let mut s = KineticState::from_density(&rho, 0.1, &m, InitialSplit::Equilibrium).unwrap();
        assert!(matches!(s.step(2.0 * g.dx(), &m), Err(Error::Cfl { .. })));
        assert!(s.step(g.dx() / m.c, &m).is_ok());
        assert!(KineticState::from_density(&rho, 0.1, &ChemoModel::identity(), InitialSplit::Even).is_err());
        let neg = GridField::new(g, (0..100).map(|j| if j == 3 { -1.0 } else { 0.0 }).collect()).unwrap();
        assert!(matches!(
            KineticState::from_density(&neg, 0.1, &m, InitialSplit::Even),
            Err(Error::NegativeDensity { index: 3, .. })
        ));
    }

    #[test]
    fn mass_and_positivity_over_a_run() {
        let m = ChemoModel::default();
        let g = Grid1D::with_spacing(-22.0, 22.0, 4e-3).unwrap();
        let rho = gauss_pair(g);
        for &(eps, cfl) in &[(0.2, 1.0), (0.05, 0.7)] {
            let params = KineticParams { eps, dt: cfl * g.dx() / m.c, t_end: 0.5, split: InitialSplit::Equilibrium, sample_every: 50 };
            let run = simulate_kinetic(&rho, &m, &params).unwrap();
            let rel = (run.terminal.total_mass() - run.initial_mass).abs() / run.initial_mass;
            assert!(rel < 1e-10, "{rel}");
            assert!(run.stayed_nonnegative);
            assert_eq!(run.outflow, 0.0);
            let (r, _) = moments(&run.terminal, m.c);
            let (_, ds) = field_from_grid_density(&r);
            assert!(ds.max_abs() <= 0.5 * run.initial_mass * (1.0 + 1e-12));
        }
    }

    #[test]
    fn zero_density_stays_zero() {
        let m = ChemoModel::default();
        let g = Grid1D::new(-2.0, 2.0, 200).unwrap();
        let params = KineticParams { eps: 0.1, dt: g.dx(), t_end: 0.2, split: InitialSplit::Equilibrium, sample_every: 1 };
        let run = simulate_kinetic(&GridField::zeros(g), &m, &params).unwrap();
        assert!(run.samples.iter().all(|s| s.rho.max_abs() == 0.0 && s.flux.max_abs() == 0.0));
    }

    #[test]
    fn symmetric_data_stays_symmetric() {
        let m = ChemoModel::default();
        let g = Grid1D::with_spacing(-22.0, 22.0, 4e-3).unwrap();
        let rho = gauss_pair(g);
        let params = KineticParams { eps: 0.1, dt: 0.8 * g.dx(), t_end: 1.0, split: InitialSplit::Equilibrium, sample_every: 1000 };
        let run = simulate_kinetic(&rho, &m, &params).unwrap();
        let v = run.terminal.density().into_values();
        let n = v.len();
        let asym = (0..n).map(|j| (v[j] - v[n - 1 - j]).abs()).fold(0.0, f64::max);
        assert!(asym < 1e-8, "{asym}");
    }

    #[test]
    fn flux_gap_vanishes_at_equilibrium_of_smooth_data() {
        let m = ChemoModel::default();
        let g = Grid1D::with_spacing(-22.0, 22.0, 2e-3).unwrap();
        let rho = gauss_pair(g);
        let state = KineticState::from_density(&rho, 1.0, &m, InitialSplit::Equilibrium).unwrap();
        // J_ε = a ρ exactly, J = a ρ up to the difference quotient
        assert!(flux_comparison(&state, &m).unwrap() < 1e-3);
        let even = KineticState::from_density(&rho, 1.0, &m, InitialSplit::Even).unwrap();
        assert!(flux_comparison(&even, &m).unwrap() > 0.1);
    }
}
