//! Electromagnetic vertex structure and partial-wave moments.
//!
//! Form-factor models (point-like by default, with optional proton dipole,
//! electron anomalous moment, and Uehling vacuum polarization), the four
//! vertex products K_I..K_IV, and the angular moments of the photon
//! propagator weighted by Legendre polynomials.

use crate::error::{Error, Result};
use crate::kinematics::{
    omega, q2_of, rho12, y_of, KinPoint, TwoBodyConfig, ELECTRON_MASS_MEV, PROTON_MASS_MEV,
};
use crate::oracle::VertexStrengths;
use crate::quad::integrate_gl;
use crate::special::{legendre_p, legendre_q, legendre_q_prime};

/// Dipole scale 0.71 GeV^2 in MeV^2.
const DIPOLE_SCALE_MEV2: f64 = 7.1e5;
/// Proton magnetic moment in nuclear magnetons.
pub const PROTON_MAGNETIC_MOMENT: f64 = 2.7928;

/// Electromagnetic structure model of the two vertices. Particle 1 carries
/// the "electron-like" options, particle 2 the "proton-like" ones.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FormFactorSet {
    pub alpha: f64,
    /// Proton dipole G_E/G_M with mu_p, inverted to F1, F2.
    pub dipole_proton: bool,
    /// Electron anomalous moment F2^e = alpha/(2 pi), q^2-independent.
    pub electron_anomalous: bool,
    /// One-loop Uehling vacuum polarization factor.
    pub uehling: bool,
}

impl FormFactorSet {
    pub fn point(alpha: f64) -> Self {
        FormFactorSet {
            alpha,
            dipole_proton: false,
            electron_anomalous: false,
            uehling: false,
        }
    }

    /// Parse a comma-separated model list, e.g. "point" or
    /// "dipole-proton,uehling".
    pub fn from_names(names: &str, alpha: f64) -> Result<Self> {
        let mut set = Self::point(alpha);
        for name in names.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match name {
                "point" => {}
                "dipole-proton" | "dipole_proton" => set.dipole_proton = true,
                "electron-anomalous" | "electron_anomalous" => set.electron_anomalous = true,
                "uehling" => set.uehling = true,
                other => {
                    return Err(Error::config(format!(
                        "unknown form-factor model '{other}'"
                    )))
                }
            }
        }
        Ok(set)
    }

    pub fn is_point(&self) -> bool {
        !(self.dipole_proton || self.electron_anomalous || self.uehling)
    }

    /// Electron Dirac form factor (always 1 in the implemented models).
    pub fn f1e(&self, _q2: f64) -> f64 {
        1.0
    }

    /// Electron Pauli form factor.
    pub fn f2e(&self, _q2: f64) -> f64 {
        if self.electron_anomalous {
            self.alpha / (2.0 * std::f64::consts::PI)
        } else {
            0.0
        }
    }

    fn dipole(q2: f64) -> f64 {
        let d = 1.0 - q2 / DIPOLE_SCALE_MEV2;
        1.0 / (d * d)
    }

    /// Proton Dirac form factor; Sachs inversion of the dipole model.
    pub fn f1p(&self, q2: f64) -> f64 {
        if !self.dipole_proton {
            return 1.0;
        }
        let tau = q2 / (4.0 * PROTON_MASS_MEV * PROTON_MASS_MEV);
        let ge = Self::dipole(q2);
        let gm = PROTON_MAGNETIC_MOMENT * ge;
        (ge - tau * gm) / (1.0 - tau)
    }

    /// Proton Pauli form factor.
    pub fn f2p(&self, q2: f64) -> f64 {
        if !self.dipole_proton {
            return 0.0;
        }
        let tau = q2 / (4.0 * PROTON_MASS_MEV * PROTON_MASS_MEV);
        let ge = Self::dipole(q2);
        let gm = PROTON_MAGNETIC_MOMENT * ge;
        (gm - ge) / (1.0 - tau)
    }

    /// Photon dressing factor; 1 or the one-loop Uehling polarization
    /// 1 + (2 alpha/pi) Int_0^1 x(1-x) ln(1 - q^2 x(1-x)/m_e^2) dx.
    pub fn pi_vp(&self, q2: f64) -> f64 {
        if !self.uehling {
            return 1.0;
        }
        let me2 = ELECTRON_MASS_MEV * ELECTRON_MASS_MEV;
        let integral = integrate_gl(
            &|x| x * (1.0 - x) * (1.0 - q2 * x * (1.0 - x) / me2).ln(),
            0.0,
            1.0,
            48,
        );
        1.0 + 2.0 * self.alpha / std::f64::consts::PI * integral
    }

    /// Raw vertex values packaged for the matrix-element reference code.
    pub fn vertex_strengths(&self, q2: f64) -> VertexStrengths {
        VertexStrengths {
            f1_1: self.f1e(q2),
            f2_1: self.f2e(q2),
            f1_2: self.f1p(q2),
            f2_2: self.f2p(q2),
            vac_pol: self.pi_vp(q2),
        }
    }
}

/// The four vertex products entering the kernel:
/// K_I = Pi G_M^p G_M^e, K_II = Pi G_M^p F2^e,
/// K_III = Pi F2^p G_M^e, K_IV = Pi F2^p F2^e.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KFunctions {
    pub k_i: f64,
    pub k_ii: f64,
    pub k_iii: f64,
    pub k_iv: f64,
}

impl KFunctions {
    pub fn as_array(&self) -> [f64; 4] {
        [self.k_i, self.k_ii, self.k_iii, self.k_iv]
    }
}

/// Sachs combinations gE = f1 + q^2/(4 m^2) f2, gM = f1 + f2.
pub fn sachs(f1: f64, f2: f64, q2: f64, m: f64) -> (f64, f64) {
    (f1 + q2 / (4.0 * m * m) * f2, f1 + f2)
}

/// Evaluate the K functions at a spacelike transfer; both vertex arguments
/// are taken at the common q^2 (leading approximation).
pub fn k_functions(ffs: &FormFactorSet, q2: f64) -> Result<KFunctions> {
    if q2 > 0.0 {
        return Err(Error::domain(format!(
            "k_functions needs spacelike q^2, got {q2}"
        )));
    }
    let pi = ffs.pi_vp(q2);
    let gme = ffs.f1e(q2) + ffs.f2e(q2);
    let gmp = ffs.f1p(q2) + ffs.f2p(q2);
    let f2e = ffs.f2e(q2);
    let f2p = ffs.f2p(q2);
    Ok(KFunctions {
        k_i: pi * gmp * gme,
        k_ii: pi * gmp * f2e,
        k_iii: pi * f2p * gme,
        k_iv: pi * f2p * f2e,
    })
}

/// Relative size of the neglected frequency part of the particle-i transfer,
/// (omega_m(k) - omega_m(k'))^2 / |q^2|; diagnostic only.
pub fn delta_q2_rel(m: f64, p: &KinPoint, x: f64) -> f64 {
    let d = omega(m, p.k) - omega(m, p.kp);
    d * d / q2_of(p, x).abs()
}

/// Weight function K(q^2) for the angular moments; the constant variant
/// unlocks the closed Legendre-Q forms.
pub enum MomentKernel<'a> {
    Constant(f64),
    Function(&'a dyn Fn(f64) -> f64),
}

impl MomentKernel<'_> {
    fn eval(&self, q2: f64) -> f64 {
        match self {
            MomentKernel::Constant(c) => *c,
            MomentKernel::Function(f) => f(q2),
        }
    }
}

fn check_offdiagonal(p: &KinPoint) -> Result<f64> {
    let y = y_of(p);
    if !y.is_finite() || y <= 1.0 {
        return Err(Error::domain(format!(
            "angular moment undefined at coincident momenta (k={}, kp={})",
            p.k, p.kp
        )));
    }
    Ok(y)
}

/// Integrate g(u) with u = ln(y - x) over the full angular range using
/// fixed-order panels; the substitution removes the 1/(y - x) weight
/// analytically, so the integrand is smooth even for y -> 1.
fn integrate_log_sub(y: f64, g: &dyn Fn(f64) -> f64) -> f64 {
    let lo = (y - 1.0).ln();
    let hi = (y + 1.0).ln();
    let panels = ((hi - lo).ceil() as usize).max(1);
    let width = (hi - lo) / panels as f64;
    let mut total = 0.0;
    for i in 0..panels {
        let a = lo + i as f64 * width;
        total += integrate_gl(&|u| g(u), a, a + width, 24);
    }
    total
}

/// R-moment: Int_{-1}^{1} K(q^2) P_ell(x) / q^2 dx, q^2 = -2 k k'(y - x).
/// For constant K this is -K Q_ell(y)/(k k').
pub fn r_tilde(ell: u32, p: &KinPoint, kfn: &MomentKernel) -> Result<f64> {
    let y = check_offdiagonal(p)?;
    let kkp = p.k * p.kp;
    match kfn {
        MomentKernel::Constant(c) => Ok(-c * legendre_q(ell, y)? / kkp),
        MomentKernel::Function(_) => {
            let g = |u: f64| {
                let x = y - u.exp();
                let q2 = -2.0 * kkp * u.exp();
                kfn.eval(q2) * legendre_p(ell, x.clamp(-1.0, 1.0)).unwrap()
            };
            Ok(-integrate_log_sub(y, &g) / (2.0 * kkp))
        }
    }
}

/// U-moment: rho_12 Int_{-1}^{1} K(q^2) P_ell(x) / q^4 dx.
/// For constant K this is -rho_12 K Q'_ell(y)/(2 k^2 k'^2).
pub fn u_tilde(ell: u32, cfg: &TwoBodyConfig, p: &KinPoint, kfn: &MomentKernel) -> Result<f64> {
    let y = check_offdiagonal(p)?;
    let kkp = p.k * p.kp;
    let rho = rho12(cfg, p);
    match kfn {
        MomentKernel::Constant(c) => Ok(-rho * c * legendre_q_prime(ell, y)? / (2.0 * kkp * kkp)),
        MomentKernel::Function(_) => {
            let g = |u: f64| {
                let x = y - u.exp();
                let q2 = -2.0 * kkp * u.exp();
                kfn.eval(q2) * legendre_p(ell, x.clamp(-1.0, 1.0)).unwrap() * (-u).exp()
            };
            Ok(rho * integrate_log_sub(y, &g) / (4.0 * kkp * kkp))
        }
    }
}

/// x-weighted R-moment via the three-term recurrence:
/// Z_ell = [(ell+1) R_{ell+1} + ell R_{ell-1}] / (2 ell + 1);
/// r_prev is ignored for ell = 0.
pub fn z_tilde(ell: u32, r_prev: f64, r_next: f64) -> f64 {
    ((ell + 1) as f64 * r_next + ell as f64 * r_prev) / (2 * ell + 1) as f64
}
