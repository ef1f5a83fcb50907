//! Initial data used by the numerical experiments.

use crate::aggregates::AggregateState;
use crate::error::{Error, Result};
use crate::field::{Grid1D, GridField};
use crate::measure::{deposit, discretize_density, project_density};

/// `amplitude · exp(-rate (x - center)²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gaussian {
    pub amplitude: f64,
    pub center: f64,
    pub rate: f64,
}

impl Gaussian {
    pub const fn new(amplitude: f64, center: f64, rate: f64) -> Self {
        Gaussian {
            amplitude,
            center,
            rate,
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        let d = x - self.center;
        self.amplitude * (-self.rate * d * d).exp()
    }

    /// Half-width beyond which the term is below `e^{-28} ≈ 7e-13` of its peak.
    pub fn reach(&self) -> f64 {
        (28.0 / self.rate).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Scenario {
    /// `e^{-20(x-0.5)²} + e^{-20(x+0.5)²}`
    TwoGauss,
    /// `e^{-10(x-1)²} + e^{-20(x-0.2)²} + e^{-20(x+0.5)²}`
    ThreeGauss,
    /// `5e^{-20(x-1)²} + 0.5e^{-20(x+0.5)²}`
    Asymmetric,
    /// Unit mass at the origin.
    SingleDirac,
    /// Sum of Gaussians.
    CustomDensity(Vec<Gaussian>),
    /// Explicit `(position, mass)` pairs.
    CustomParticles(Vec<(f64, f64)>),
}

pub const SCENARIO_NAMES: [&str; 4] = ["two_gauss", "three_gauss", "asymmetric", "single_dirac"];

impl Scenario {
    pub fn from_name(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().replace('-', "_").as_str() {
            "two_gauss" | "twogauss" => Ok(Scenario::TwoGauss),
            "three_gauss" | "threegauss" => Ok(Scenario::ThreeGauss),
            "asymmetric" => Ok(Scenario::Asymmetric),
            "single_dirac" | "singledirac" => Ok(Scenario::SingleDirac),
            _ => Err(Error::UnknownScenario(name.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::TwoGauss => "two_gauss",
            Scenario::ThreeGauss => "three_gauss",
            Scenario::Asymmetric => "asymmetric",
            Scenario::SingleDirac => "single_dirac",
            Scenario::CustomDensity(_) => "custom_density",
            Scenario::CustomParticles(_) => "custom_particles",
        }
    }

    pub fn formula(&self) -> String {
        match self {
            Scenario::TwoGauss => "exp(-20(x-0.5)^2) + exp(-20(x+0.5)^2)".into(),
            Scenario::ThreeGauss => "exp(-10(x-1)^2) + exp(-20(x-0.2)^2) + exp(-20(x+0.5)^2)".into(),
            Scenario::Asymmetric => "5 exp(-20(x-1)^2) + 0.5 exp(-20(x+0.5)^2)".into(),
            Scenario::SingleDirac => "delta(x)".into(),
            Scenario::CustomDensity(g) => g
                .iter()
                .map(|t| format!("{} exp(-{}(x-{})^2)", t.amplitude, t.rate, t.center))
                .collect::<Vec<_>>()
                .join(" + "),
            Scenario::CustomParticles(p) => p
                .iter()
                .map(|(y, m)| format!("{m} delta(x-{y})"))
                .collect::<Vec<_>>()
                .join(" + "),
        }
    }

    /// Gaussian terms of a density scenario; `None` for point-mass data.
    pub fn gaussians(&self) -> Option<Vec<Gaussian>> {
        match self {
            Scenario::TwoGauss => Some(vec![Gaussian::new(1.0, 0.5, 20.0), Gaussian::new(1.0, -0.5, 20.0)]),
            Scenario::ThreeGauss => Some(vec![
                Gaussian::new(1.0, 1.0, 10.0),
                Gaussian::new(1.0, 0.2, 20.0),
                Gaussian::new(1.0, -0.5, 20.0),
            ]),
            Scenario::Asymmetric => Some(vec![Gaussian::new(5.0, 1.0, 20.0), Gaussian::new(0.5, -0.5, 20.0)]),
            Scenario::CustomDensity(g) => Some(g.clone()),
            Scenario::SingleDirac | Scenario::CustomParticles(_) => None,
        }
    }

    fn particles(&self) -> Option<Vec<(f64, f64)>> {
        match self {
            Scenario::SingleDirac => Some(vec![(0.0, 1.0)]),
            Scenario::CustomParticles(p) => Some(p.clone()),
            _ => None,
        }
    }

    /// Initial density as a function of position, for density scenarios.
    pub fn density(&self) -> Option<impl Fn(f64) -> f64> {
        self.gaussians().map(|terms| move |x: f64| terms.iter().map(|g| g.eval(x)).sum())
    }

    /// Interval outside which the initial data is numerically zero.
    pub fn support(&self) -> (f64, f64) {
        if let Some(terms) = self.gaussians() {
            let lo = terms.iter().map(|g| g.center - g.reach()).fold(f64::INFINITY, f64::min);
            let hi = terms.iter().map(|g| g.center + g.reach()).fold(f64::NEG_INFINITY, f64::max);
            (lo.min(hi), hi.max(lo))
        } else {
            let p = self.particles().unwrap_or_default();
            let lo = p.iter().map(|q| q.0).fold(f64::INFINITY, f64::min);
            let hi = p.iter().map(|q| q.0).fold(f64::NEG_INFINITY, f64::max);
            if lo.is_finite() {
                (lo, hi)
            } else {
                (0.0, 0.0)
            }
        }
    }

    /// Dirac-sum initial data on `grid`.
    pub fn initial_aggregates(&self, grid: &Grid1D, threshold: f64) -> Result<AggregateState> {
        match self.density() {
            Some(f) => discretize_density(f, grid, threshold),
            None => {
                let mut p = self.particles().unwrap_or_default();
                p.sort_by(|a, b| a.0.total_cmp(&b.0));
                let (y, m) = p.into_iter().unzip();
                AggregateState::new(0.0, y, m)
            }
        }
    }

    /// Grid density for the kinetic solver: cell averages, or point masses
    /// deposited into their cells.
    pub fn initial_density(&self, grid: &Grid1D) -> Result<GridField> {
        match self.density() {
            Some(f) => project_density(f, grid),
            None => Ok(deposit(&self.initial_aggregates(grid, 0.0)?, grid)),
        }
    }
}

/// The density of a named scenario.
pub fn scenario_density(name: &str) -> Result<impl Fn(f64) -> f64> {
    let s = Scenario::from_name(name)?;
    s.density().ok_or(Error::UnknownScenario(format!("{name} has no density")))
}
