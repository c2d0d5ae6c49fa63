//! Potential kernels and their application to sampled fields.

mod bessel;
mod riesz;
mod wolff;

pub use bessel::{bessel_integral, bessel_kernel, bessel_prefactor};
pub use riesz::{
    riesz_fourier_constant, riesz_inverse_constant, riesz_potential, riesz_potential_at,
    riesz_potential_radial, riesz_potential_with, self_cell_constant, shell_mass_fraction,
    RieszMethod, RieszOptions, RieszPotential,
};
pub use wolff::{
    wolff_outer_integral, wolff_potential, wolff_potential_at, wolff_potential_with, WolffOptions,
    WolffPotential,
};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RieszSpec {
    n: usize,
    alpha: f64,
}

impl RieszSpec {
    /// Kernel `|x|^{alpha-n}`, locally integrable for `0 < alpha < n`.
    pub fn new(n: usize, alpha: f64) -> Result<Self> {
        check_dim(n)?;
        if !(alpha > 0.0 && alpha < n as f64) {
            return Err(Error::InvalidKernel(format!(
                "Riesz order must lie in (0, {n}), got {alpha}"
            )));
        }
        Ok(Self { n, alpha })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesselSpec {
    n: usize,
    alpha: f64,
}

impl BesselSpec {
    pub fn new(n: usize, alpha: f64) -> Result<Self> {
        check_dim(n)?;
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidKernel(format!(
                "Bessel order must be positive, got {alpha}"
            )));
        }
        Ok(Self { n, alpha })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WolffSpec {
    n: usize,
    beta: f64,
    gamma: f64,
}

impl WolffSpec {
    pub fn new(n: usize, beta: f64, gamma: f64) -> Result<Self> {
        check_dim(n)?;
        if !(gamma > 1.0 && gamma.is_finite()) {
            return Err(Error::InvalidKernel(format!(
                "Wolff gamma must exceed 1, got {gamma}"
            )));
        }
        if !(beta > 0.0 && n as f64 - beta * gamma > 0.0) {
            return Err(Error::InvalidKernel(format!(
                "Wolff parameters need beta > 0 and n - beta*gamma > 0, got beta={beta}, gamma={gamma}, n={n}"
            )));
        }
        Ok(Self { n, beta, gamma })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Outer exponent `1/(gamma-1)`.
    pub fn outer_power(&self) -> f64 {
        1.0 / (self.gamma - 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelSpec {
    Riesz(RieszSpec),
    Bessel(BesselSpec),
    Wolff(WolffSpec),
}

impl KernelSpec {
    pub fn n(&self) -> usize {
        match self {
            KernelSpec::Riesz(s) => s.n,
            KernelSpec::Bessel(s) => s.n,
            KernelSpec::Wolff(s) => s.n,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            KernelSpec::Riesz(_) => "riesz",
            KernelSpec::Bessel(_) => "bessel",
            KernelSpec::Wolff(_) => "wolff",
        }
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidKernel(format!("dimension must be >= 2, got {n}")));
    }
    Ok(())
}

/// Volume of the unit ball in R^n.
pub fn unit_ball_volume(n: usize) -> f64 {
    std::f64::consts::PI.powf(n as f64 / 2.0) / libm::tgamma(n as f64 / 2.0 + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_validation() {
        assert!(RieszSpec::new(3, 2.0).is_ok());
        assert!(matches!(RieszSpec::new(3, 3.0), Err(Error::InvalidKernel(_))));
        assert!(matches!(RieszSpec::new(3, 0.0), Err(Error::InvalidKernel(_))));
        assert!(BesselSpec::new(3, 5.0).is_ok());
        assert!(matches!(BesselSpec::new(3, -1.0), Err(Error::InvalidKernel(_))));
        assert!(WolffSpec::new(3, 1.0, 2.0).is_ok());
        assert!(matches!(WolffSpec::new(3, 1.0, 1.0), Err(Error::InvalidKernel(_))));
        assert!(matches!(WolffSpec::new(3, 1.5, 2.0), Err(Error::InvalidKernel(_))));
    }

    #[test]
    fn ball_volumes() {
        assert!((unit_ball_volume(2) - std::f64::consts::PI).abs() < 1e-14);
        assert!((unit_ball_volume(3) - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-14);
    }
}
