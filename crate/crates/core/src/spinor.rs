//! Basis-spinor reduction of fermion current contractions.
//!
//! Dirac spinor chains are expanded over four massless basis spinors tied to
//! an isotropic tetrad; every chain becomes a finite sum of scalar
//! coefficients, so current products evaluate without explicit 4x4 matrix
//! algebra. The five contraction functions at the bottom are the closed
//! forms consumed by the partial-wave kernel.

use num_complex::Complex64;

use crate::halfint::HalfInt;
use crate::kinematics::{omega, KinPoint, TwoBodyConfig};
use crate::special::wigner_d;

pub type CVec4 = [Complex64; 4];

const I: Complex64 = Complex64::new(0.0, 1.0);

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Lightlike tetrad vector b_rho = (1, 0, 0, -rho)/2, contravariant components.
pub fn tetrad_b(rho: i32) -> CVec4 {
    debug_assert!(rho == 1 || rho == -1);
    [c(0.5), c(0.0), c(0.0), c(-0.5 * rho as f64)]
}

/// Lightlike tetrad vector n_lam = (0, -lam, -i, 0)/2, contravariant
/// components.
///
/// The spatial signs are fixed so that, with standard Dirac matrices, the
/// n-slash operators raise and lower the basis-spinor helicity with unit
/// phase; flipping them is the same tetrad with indices lowered.
pub fn tetrad_n(lam: i32) -> CVec4 {
    debug_assert!(lam == 1 || lam == -1);
    [
        c(0.0),
        c(-0.5 * lam as f64),
        Complex64::new(0.0, -0.5),
        c(0.0),
    ]
}

/// Minkowski scalar product with metric (+,-,-,-); no conjugation (the
/// complex tetrad components are analytic, not a Hermitian structure).
pub fn mdot(a: &CVec4, b: &CVec4) -> Complex64 {
    a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3]
}

/// Basic matrix element of gamma^mu between basis spinors:
/// Gamma^{C,A}_{sigma,rho} = 2 delta_{sigma,-rho} (delta_{C,-A} b_{-A}
/// + A delta_{C,A} n_{-A rho}), returned as a contravariant four-vector.
pub fn gamma_block(cc: i32, a: i32, sigma: i32, rho: i32) -> CVec4 {
    debug_assert!([cc, a, sigma, rho].iter().all(|&x| x == 1 || x == -1));
    let mut out = [c(0.0); 4];
    if sigma != -rho {
        return out;
    }
    if cc == -a {
        let b = tetrad_b(-a);
        for mu in 0..4 {
            out[mu] += 2.0 * b[mu];
        }
    }
    if cc == a {
        let n = tetrad_n(-a * rho);
        for mu in 0..4 {
            out[mu] += 2.0 * a as f64 * n[mu];
        }
    }
    out
}

/// A momentum in polar form together with the fermion mass; the angles fix
/// the helicity phase convention of the state.
#[derive(Debug, Clone, Copy)]
pub struct PolarMomentum {
    pub m: f64,
    pub mag: f64,
    pub theta: f64,
    pub phi: f64,
}

impl PolarMomentum {
    pub fn new(m: f64, mag: f64, theta: f64, phi: f64) -> Self {
        PolarMomentum { m, mag, theta, phi }
    }

    pub fn energy(&self) -> f64 {
        omega(self.m, self.mag)
    }

    /// Contravariant four-momentum (omega, p sin t cos f, p sin t sin f, p cos t).
    pub fn fourvec(&self) -> CVec4 {
        let (st, ct) = (self.theta.sin(), self.theta.cos());
        let (sf, cf) = (self.phi.sin(), self.phi.cos());
        [
            c(self.energy()),
            c(self.mag * st * cf),
            c(self.mag * st * sf),
            c(self.mag * ct),
        ]
    }
}

/// Decomposition coefficient of a helicity state over the basis spinors:
/// s^{(A)}_{rho,lambda}(p) = -lambda W(-lambda rho p)
/// D*^{1/2}_{A rho/2, -lambda/2}(phi, theta, -phi),
/// W(+-p) = sqrt(omega +- p). All spin labels are doubled (+-1).
pub fn s_coeff(p: &PolarMomentum, a: i32, rho: i32, lambda: i32) -> Complex64 {
    debug_assert!([a, rho, lambda].iter().all(|&x| x == 1 || x == -1));
    let w = (p.energy() - (lambda * rho) as f64 * p.mag).sqrt();
    let d = wigner_d(
        HalfInt::HALF,
        HalfInt::from_doubled(a * rho),
        HalfInt::from_doubled(-lambda),
        p.theta,
    )
    .expect("spin-1/2 projections are always valid");
    // conj(D_{m,mp}(phi,theta,-phi)) = d(theta) * exp(i (m - mp) phi)
    let phase = (I * (0.5 * (a * rho + lambda) as f64 * p.phi)).exp();
    -(lambda as f64) * w * d * phase
}

/// Conjugate-side coefficient: sbar^{(C)}_{sigma,lambda}(p)
/// = conj(s^{(-C)}_{-sigma,lambda}(p)).
pub fn sbar_coeff(p: &PolarMomentum, cc: i32, sigma: i32, lambda: i32) -> Complex64 {
    s_coeff(p, -cc, -sigma, lambda).conj()
}

/// Scalar chain ubar_{lp}(pout) u_{lk}(pin).
pub fn chain_scalar(pout: &PolarMomentum, lp: i32, pin: &PolarMomentum, lk: i32) -> Complex64 {
    let mut acc = c(0.0);
    for a in [-1, 1] {
        for rho in [-1, 1] {
            acc += sbar_coeff(pout, a, rho, lp) * s_coeff(pin, a, rho, lk);
        }
    }
    acc
}

/// Vector chain ubar_{lp}(pout) gamma^mu u_{lk}(pin), contravariant.
pub fn chain_vector(pout: &PolarMomentum, lp: i32, pin: &PolarMomentum, lk: i32) -> CVec4 {
    let mut out = [c(0.0); 4];
    for a in [-1, 1] {
        for rho in [-1, 1] {
            let s_in = s_coeff(pin, a, rho, lk);
            // sigma = -rho is forced; the C sum leaves one b and one n term.
            let sb_b = sbar_coeff(pout, -a, -rho, lp);
            let sb_n = sbar_coeff(pout, a, -rho, lp);
            let b = tetrad_b(-a);
            let n = tetrad_n(-a * rho);
            for mu in 0..4 {
                out[mu] += 2.0 * (sb_b * b[mu] + a as f64 * sb_n * n[mu]) * s_in;
            }
        }
    }
    out
}

/// Slash chain ubar_{lp}(pout) (v-slash) u_{lk}(pin) for a four-vector v.
pub fn chain_slash(
    pout: &PolarMomentum,
    lp: i32,
    pin: &PolarMomentum,
    lk: i32,
    v: &CVec4,
) -> Complex64 {
    mdot(v, &chain_vector(pout, lp, pin, lk))
}

/// Doubled helicities of the four external legs (k: incoming, p: outgoing).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HelicityLabels {
    pub lk1: i32,
    pub lk2: i32,
    pub lp1: i32,
    pub lp2: i32,
}

impl HelicityLabels {
    pub fn new(lk1: i32, lk2: i32, lp1: i32, lp2: i32) -> Self {
        debug_assert!([lk1, lk2, lp1, lp2].iter().all(|&x| x == 1 || x == -1));
        HelicityLabels { lk1, lk2, lp1, lp2 }
    }

    /// All 16 helicity combinations, fixed order.
    pub fn all() -> Vec<HelicityLabels> {
        let mut v = Vec::with_capacity(16);
        for &lk1 in &[-1, 1] {
            for &lk2 in &[-1, 1] {
                for &lp1 in &[-1, 1] {
                    for &lp2 in &[-1, 1] {
                        v.push(HelicityLabels { lk1, lk2, lp1, lp2 });
                    }
                }
            }
        }
        v
    }
}

/// Center-of-mass geometry for the contraction formulas: incoming relative
/// momentum k along +z, outgoing k' in the x-z plane at angle beta.
/// Particle 2 carries the opposite momenta; its polar angles continue the
/// particle-1 angles through the mirror (pi - theta, phi + pi).
pub struct PairGeometry {
    pub p1_in: PolarMomentum,
    pub p1_out: PolarMomentum,
    pub p2_in: PolarMomentum,
    pub p2_out: PolarMomentum,
}

impl PairGeometry {
    pub fn new(cfg: &TwoBodyConfig, p: &KinPoint, beta: f64) -> Self {
        let pi = std::f64::consts::PI;
        PairGeometry {
            p1_in: PolarMomentum::new(cfg.m1, p.k, 0.0, 0.0),
            p1_out: PolarMomentum::new(cfg.m1, p.kp, beta, 0.0),
            p2_in: PolarMomentum::new(cfg.m2, p.k, pi, pi),
            p2_out: PolarMomentum::new(cfg.m2, p.kp, pi - beta, pi),
        }
    }

    /// 1/sqrt(omega1 omega1' omega2 omega2').
    pub fn norm(&self) -> f64 {
        1.0 / (self.p1_in.energy()
            * self.p1_out.energy()
            * self.p2_in.energy()
            * self.p2_out.energy())
        .sqrt()
    }
}

fn d_half(m_doubled: i32, mp_doubled: i32, beta: f64) -> f64 {
    wigner_d(
        HalfInt::HALF,
        HalfInt::from_doubled(m_doubled),
        HalfInt::from_doubled(mp_doubled),
        beta,
    )
    .expect("spin-1/2 projections are always valid")
}

/// N ubar1' gamma^mu u1 ubar2' gamma_mu u2 as the closed double sum over
/// sigma, rho of velocity factors times spin-1/2 rotation elements.
pub fn contract_vector_vector(
    cfg: &TwoBodyConfig,
    p: &KinPoint,
    beta: f64,
    labels: &HelicityLabels,
) -> f64 {
    let vk1 = p.k / omega(cfg.m1, p.k);
    let vk2 = p.k / omega(cfg.m2, p.k);
    let vp1 = p.kp / omega(cfg.m1, p.kp);
    let vp2 = p.kp / omega(cfg.m2, p.kp);
    let HelicityLabels { lk1, lk2, lp1, lp2 } = *labels;

    let mut acc = 0.0;
    for sigma in [-1, 1] {
        for rho in [-1, 1] {
            let pref = ((1.0 - (sigma * lk1) as f64 * vk1) * (1.0 - (rho * lk2) as f64 * vk2))
                .sqrt()
                * ((1.0 - (sigma * lp1) as f64 * vp1) * (1.0 - (rho * lp2) as f64 * vp2)).sqrt();
            let mut term = 0.0;
            if lk1 == lk2 {
                term -= (rho * sigma) as f64 * d_half(-lk1, lp1, beta) * d_half(lk1, -lp2, beta);
            }
            if rho * lk1 == sigma * lk2 {
                term += d_half(lk1, lp1, beta) * d_half(-lk2, -lp2, beta);
            }
            acc += pref * term;
        }
    }
    2.0 * (lk2 * lp2) as f64 * acc
}

fn real_part(label: &str, z: Complex64) -> f64 {
    debug_assert!(
        z.im.abs() <= 1e-10 * z.re.abs().max(1.0),
        "{label}: nonvanishing imaginary part {z}"
    );
    z.re
}

/// N ubar1' u1 ubar2' (p1-slash + k1-slash) u2.
pub fn contract_scalar_slash1(
    cfg: &TwoBodyConfig,
    p: &KinPoint,
    beta: f64,
    labels: &HelicityLabels,
) -> f64 {
    let g = PairGeometry::new(cfg, p, beta);
    let mut a = g.p1_out.fourvec();
    let k1 = g.p1_in.fourvec();
    for mu in 0..4 {
        a[mu] += k1[mu];
    }
    let s1 = chain_scalar(&g.p1_out, labels.lp1, &g.p1_in, labels.lk1);
    let v2 = chain_slash(&g.p2_out, labels.lp2, &g.p2_in, labels.lk2, &a);
    real_part("scalar_slash1", g.norm() * s1 * v2)
}

/// N ubar1' (p2-slash + k2-slash) u1 ubar2' u2.
pub fn contract_slash2_scalar(
    cfg: &TwoBodyConfig,
    p: &KinPoint,
    beta: f64,
    labels: &HelicityLabels,
) -> f64 {
    let g = PairGeometry::new(cfg, p, beta);
    let mut a = g.p2_out.fourvec();
    let k2 = g.p2_in.fourvec();
    for mu in 0..4 {
        a[mu] += k2[mu];
    }
    let v1 = chain_slash(&g.p1_out, labels.lp1, &g.p1_in, labels.lk1, &a);
    let s2 = chain_scalar(&g.p2_out, labels.lp2, &g.p2_in, labels.lk2);
    real_part("slash2_scalar", g.norm() * v1 * s2)
}

/// N (p1 + k1).(p2 + k2) ubar1' u1 ubar2' u2.
pub fn contract_scalar_scalar(
    cfg: &TwoBodyConfig,
    p: &KinPoint,
    beta: f64,
    labels: &HelicityLabels,
) -> f64 {
    let g = PairGeometry::new(cfg, p, beta);
    let mut a1 = g.p1_out.fourvec();
    let k1 = g.p1_in.fourvec();
    let mut a2 = g.p2_out.fourvec();
    let k2 = g.p2_in.fourvec();
    for mu in 0..4 {
        a1[mu] += k1[mu];
        a2[mu] += k2[mu];
    }
    let s1 = chain_scalar(&g.p1_out, labels.lp1, &g.p1_in, labels.lk1);
    let s2 = chain_scalar(&g.p2_out, labels.lp2, &g.p2_in, labels.lk2);
    real_part("scalar_scalar", g.norm() * mdot(&a1, &a2) * s1 * s2)
}

/// N times the time-time current product with the vertex split into its
/// magnetic and convective pieces, weighted by the four vertex functions
/// kf = [K_I, K_II, K_III, K_IV]:
/// K_I j1^0 j2^0 - K_II/(2 m1) P1^0 s1 j2^0 - K_III/(2 m2) P2^0 j1^0 s2
/// + K_IV/(4 m1 m2) P1^0 P2^0 s1 s2, with P_i = p_i + k_i.
pub fn contract_time_time(
    cfg: &TwoBodyConfig,
    p: &KinPoint,
    beta: f64,
    labels: &HelicityLabels,
    kf: &[f64; 4],
) -> f64 {
    let g = PairGeometry::new(cfg, p, beta);
    let p1_0 = g.p1_in.energy() + g.p1_out.energy();
    let p2_0 = g.p2_in.energy() + g.p2_out.energy();
    let cv1 = chain_vector(&g.p1_out, labels.lp1, &g.p1_in, labels.lk1)[0];
    let cv2 = chain_vector(&g.p2_out, labels.lp2, &g.p2_in, labels.lk2)[0];
    let cs1 = chain_scalar(&g.p1_out, labels.lp1, &g.p1_in, labels.lk1);
    let cs2 = chain_scalar(&g.p2_out, labels.lp2, &g.p2_in, labels.lk2);
    let bracket = kf[0] * cv1 * cv2
        - kf[1] / (2.0 * cfg.m1) * p1_0 * cs1 * cv2
        - kf[2] / (2.0 * cfg.m2) * p2_0 * cv1 * cs2
        + kf[3] / (4.0 * cfg.m1 * cfg.m2) * p1_0 * p2_0 * cs1 * cs2;
    real_part("time_time", g.norm() * bracket)
}
