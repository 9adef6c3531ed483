//! Center-of-mass kinematics of the two-fermion system.
//!
//! Natural units (hbar = c = 1); every dimensionful quantity is in MeV.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

pub const ELECTRON_MASS_MEV: f64 = 0.51099895;
pub const PROTON_MASS_MEV: f64 = 938.27208;
pub const MUON_MASS_MEV: f64 = 105.65837;
pub const ALPHA_FINE_STRUCTURE: f64 = 7.2973525693e-3;

/// Physics input record: constituent masses, charge number and coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoBodyConfig {
    /// Mass of particle 1 (the lighter fermion in the named presets), MeV.
    pub m1: f64,
    /// Mass of particle 2, MeV.
    pub m2: f64,
    /// Charge number of particle 2 (Z = 1 for hydrogen).
    pub z: u32,
    /// Fine-structure coupling.
    pub alpha: f64,
}

impl TwoBodyConfig {
    pub fn new(m1: f64, m2: f64, z: u32, alpha: f64) -> Result<Self> {
        if m1 <= 0.0 || m2 <= 0.0 {
            return Err(Error::config(format!(
                "masses must be positive (m1={m1}, m2={m2})"
            )));
        }
        if alpha <= 0.0 {
            return Err(Error::config(format!(
                "alpha must be positive (alpha={alpha})"
            )));
        }
        if z < 1 {
            return Err(Error::config("Z must be >= 1".to_string()));
        }
        Ok(TwoBodyConfig { m1, m2, z, alpha })
    }

    pub fn hydrogen() -> Self {
        TwoBodyConfig {
            m1: ELECTRON_MASS_MEV,
            m2: PROTON_MASS_MEV,
            z: 1,
            alpha: ALPHA_FINE_STRUCTURE,
        }
    }

    pub fn muonic_hydrogen() -> Self {
        TwoBodyConfig {
            m1: MUON_MASS_MEV,
            m2: PROTON_MASS_MEV,
            z: 1,
            alpha: ALPHA_FINE_STRUCTURE,
        }
    }

    /// Equal-mass test system with an adjustable coupling.
    pub fn equal_mass(m: f64, alpha: f64) -> Self {
        TwoBodyConfig {
            m1: m,
            m2: m,
            z: 1,
            alpha,
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "hydrogen" => Ok(Self::hydrogen()),
            "muonic-hydrogen" | "muonic_hydrogen" => Ok(Self::muonic_hydrogen()),
            "equal-mass" | "equal_mass" => Ok(Self::equal_mass(1.0, 0.3)),
            other => Err(Error::config(format!("unknown system preset '{other}'"))),
        }
    }

    /// Reduced mass m1 m2 / (m1 + m2).
    pub fn reduced_mass(&self) -> f64 {
        self.m1 * self.m2 / (self.m1 + self.m2)
    }

    /// Bohr momentum mu * Z * alpha, the natural grid scale.
    pub fn bohr_momentum(&self) -> f64 {
        self.reduced_mass() * self.z as f64 * self.alpha
    }

    /// Nonrelativistic Coulomb level -mu (Z alpha)^2 / (2 n^2), MeV.
    pub fn bohr_binding(&self, n: u32) -> f64 {
        let za = self.z as f64 * self.alpha;
        -self.reduced_mass() * za * za / (2.0 * (n * n) as f64)
    }
}

/// Pair of relative-momentum magnitudes (incoming k, outgoing k'), MeV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinPoint {
    pub k: f64,
    pub kp: f64,
}

impl KinPoint {
    pub fn new(k: f64, kp: f64) -> Result<Self> {
        if k <= 0.0 || kp <= 0.0 {
            return Err(Error::domain(format!(
                "momenta must be positive (k={k}, kp={kp})"
            )));
        }
        Ok(KinPoint { k, kp })
    }
}

/// omega_m(k) = sqrt(m^2 + k^2).
pub fn omega(m: f64, k: f64) -> f64 {
    debug_assert!(m >= 0.0 && k >= 0.0);
    m.hypot(k)
}

/// Invariant mass of the noninteracting pair, M0 = omega_1(k) + omega_2(k).
pub fn m0(cfg: &TwoBodyConfig, k: f64) -> f64 {
    omega(cfg.m1, k) + omega(cfg.m2, k)
}

/// upsilon = k / omega_m(k), in [0, 1).
pub fn velocity(m: f64, k: f64) -> Result<f64> {
    if m == 0.0 && k == 0.0 {
        return Err(Error::domain("velocity undefined at m = k = 0".to_string()));
    }
    if m < 0.0 || k < 0.0 {
        return Err(Error::domain("velocity: negative input".to_string()));
    }
    Ok(k / omega(m, k))
}

/// W_{lambda,rho}(k) = sqrt(1 + lambda v_1) sqrt(1 + rho v_2) with the
/// velocities of both constituents evaluated at momentum k.
pub fn w_factor(lambda: i32, rho: i32, cfg: &TwoBodyConfig, k: f64) -> f64 {
    debug_assert!(lambda == 1 || lambda == -1);
    debug_assert!(rho == 1 || rho == -1);
    let v1 = k / omega(cfg.m1, k);
    let v2 = k / omega(cfg.m2, k);
    (1.0 + lambda as f64 * v1).sqrt() * (1.0 + rho as f64 * v2).sqrt()
}

/// y = (k^2 + k'^2) / (2 k k') >= 1.
pub fn y_of(p: &KinPoint) -> f64 {
    (p.k * p.k + p.kp * p.kp) / (2.0 * p.k * p.kp)
}

/// Spacelike transfer q^2 = -2 k k' (y - x) <= 0, x = cos(beta).
pub fn q2_of(p: &KinPoint, x: f64) -> f64 {
    debug_assert!((-1.0..=1.0).contains(&x));
    -2.0 * p.k * p.kp * (y_of(p) - x)
}

/// Dimension factor rho_12 = (omega_1(k') - omega_1(k)) (omega_2(k) - omega_2(k')).
pub fn rho12(cfg: &TwoBodyConfig, p: &KinPoint) -> f64 {
    (omega(cfg.m1, p.kp) - omega(cfg.m1, p.k)) * (omega(cfg.m2, p.k) - omega(cfg.m2, p.kp))
}
