//! Explicit Dirac-matrix reference implementation.
//!
//! Everything here is built directly from 4x4 gamma matrices in the standard
//! representation: helicity bispinors, electromagnetic vertex currents, and
//! the one-photon exchange amplitude. The fast closed forms in `spinor` and
//! `kernel` are validated against these slow but transparent computations.

// Lorentz indices address fixed 4-vector slots; iterator forms would obscure
// the component structure.
#![allow(clippy::needless_range_loop)]

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;

use crate::kinematics::{KinPoint, TwoBodyConfig};
use crate::spinor::{mdot, CVec4, HelicityLabels, PairGeometry, PolarMomentum};

pub type CMat4 = Matrix4<Complex64>;
pub type CSpinor = Vector4<Complex64>;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

const I: Complex64 = Complex64::new(0.0, 1.0);
const Z: Complex64 = Complex64::new(0.0, 0.0);

/// gamma^0 = diag(1, 1, -1, -1).
pub fn gamma0() -> CMat4 {
    CMat4::from_diagonal(&Vector4::new(c(1.0), c(1.0), c(-1.0), c(-1.0)))
}

/// Spatial gamma matrices, [[0, sigma_i], [-sigma_i, 0]].
pub fn gamma_i(i: usize) -> CMat4 {
    let o = Z;
    match i {
        1 => CMat4::new(
            o,
            o,
            o,
            c(1.0), //
            o,
            o,
            c(1.0),
            o, //
            o,
            c(-1.0),
            o,
            o, //
            c(-1.0),
            o,
            o,
            o,
        ),
        2 => CMat4::new(
            o, o, o, -I, //
            o, o, I, o, //
            o, I, o, o, //
            -I, o, o, o,
        ),
        3 => CMat4::new(
            o,
            o,
            c(1.0),
            o, //
            o,
            o,
            o,
            c(-1.0), //
            c(-1.0),
            o,
            o,
            o, //
            o,
            c(1.0),
            o,
            o,
        ),
        _ => panic!("gamma_i index must be 1..=3"),
    }
}

pub fn gamma(mu: usize) -> CMat4 {
    if mu == 0 {
        gamma0()
    } else {
        gamma_i(mu)
    }
}

/// gamma^5 = i gamma^0 gamma^1 gamma^2 gamma^3 = [[0, 1], [1, 0]].
pub fn gamma5() -> CMat4 {
    let o = Z;
    CMat4::new(
        o,
        o,
        c(1.0),
        o, //
        o,
        o,
        o,
        c(1.0), //
        c(1.0),
        o,
        o,
        o, //
        o,
        c(1.0),
        o,
        o,
    )
}

/// a-slash = a_mu gamma^mu for contravariant components a.
pub fn slash(a: &CVec4) -> CMat4 {
    let mut m = gamma0() * a[0];
    for i in 1..4 {
        m -= gamma(i) * a[i];
    }
    m
}

/// Massless basis spinor u_lambda(b_A); constant by construction.
/// Doubled labels: a, lambda in {-1, +1}.
pub fn basis_spinor(a: i32, lambda: i32) -> CSpinor {
    debug_assert!((a == 1 || a == -1) && (lambda == 1 || lambda == -1));
    let r = c(std::f64::consts::FRAC_1_SQRT_2);
    match (a, lambda) {
        (-1, 1) => CSpinor::new(r, Z, r, Z),
        (-1, -1) => CSpinor::new(Z, -r, Z, r),
        (1, 1) => CSpinor::new(Z, -r, Z, -r),
        (1, -1) => CSpinor::new(r, Z, -r, Z),
        _ => unreachable!(),
    }
}

/// Dirac adjoint as a row: u-dagger gamma^0.
pub fn bar(u: &CSpinor) -> nalgebra::Matrix1x4<Complex64> {
    u.adjoint() * gamma0()
}

/// Spinor-space rotation exp(-i phi S3) exp(-i theta S2) exp(i phi S3),
/// the same zyz convention as the Wigner functions used elsewhere.
pub fn spin_rotation(theta: f64, phi: f64) -> CMat4 {
    let (s, co) = ((theta / 2.0).sin(), (theta / 2.0).cos());
    let o = Z;
    let ry = CMat4::new(
        c(co),
        c(-s),
        o,
        o, //
        c(s),
        c(co),
        o,
        o, //
        o,
        o,
        c(co),
        c(-s), //
        o,
        o,
        c(s),
        c(co),
    );
    let e = |sign: f64| (I * (sign * phi / 2.0)).exp();
    let rz = |sign: f64| CMat4::from_diagonal(&Vector4::new(e(-sign), e(sign), e(-sign), e(sign)));
    rz(1.0) * ry * rz(-1.0)
}

/// Helicity bispinor of a massive fermion, normalized to ubar u = 2m.
///
/// Built at momentum along +z by the covariant projector
/// -lambda (p-slash + m)(1 + lambda gamma5 s-slash) u_{-lambda}(b_{+1})
/// / (2 sqrt(omega + |p|)), s = (|p|, omega p-hat)/m, then rotated to
/// (theta, phi). The overall sign matches the decomposition convention of
/// `spinor::s_coeff`.
pub fn helicity_bispinor(p: &PolarMomentum, lambda: i32) -> CSpinor {
    debug_assert!(lambda == 1 || lambda == -1);
    assert!(p.m > 0.0, "helicity bispinor needs a massive fermion");
    let (m, k) = (p.m, p.mag);
    let om = p.energy();
    let pz: CVec4 = [c(om), Z, Z, c(k)];
    let sz: CVec4 = [c(k / m), Z, Z, c(om / m)];
    let lam = lambda as f64;
    let proj = (slash(&pz) + CMat4::identity() * c(m))
        * (CMat4::identity() + gamma5() * slash(&sz) * c(lam));
    let uz = proj * basis_spinor(1, -lambda) * c(-lam / (2.0 * (om + k).sqrt()));
    spin_rotation(p.theta, p.phi) * uz
}

/// Electromagnetic vertex current
/// J^mu = ubar(p') [f1 gamma^mu + f2/(2m) i sigma^{mu nu} q_nu] u(p),
/// q = p' - p, as a contravariant four-vector.
pub fn current(
    f1: f64,
    f2: f64,
    pout: &PolarMomentum,
    lp: i32,
    pin: &PolarMomentum,
    lk: i32,
) -> CVec4 {
    debug_assert!((pout.m - pin.m).abs() < 1e-12 * pin.m.max(1.0));
    let m = pin.m;
    let u_in = helicity_bispinor(pin, lk);
    let ub = bar(&helicity_bispinor(pout, lp));
    let mut q = pout.fourvec();
    let kin = pin.fourvec();
    for mu in 0..4 {
        q[mu] -= kin[mu];
    }
    let qs = slash(&q);
    let mut out: CVec4 = [Z; 4];
    for mu in 0..4 {
        let g = gamma(mu);
        // i sigma^{mu nu} q_nu = -(gamma^mu q-slash - q-slash gamma^mu)/2
        let vertex = g * c(f1) - (g * qs - qs * g) * c(f2 / (4.0 * m));
        out[mu] = (ub * vertex * u_in)[(0, 0)];
    }
    out
}

/// Raw form-factor and polarization values at a given q^2; the two vertex
/// pairs belong to particles 1 and 2.
#[derive(Debug, Clone, Copy)]
pub struct VertexStrengths {
    pub f1_1: f64,
    pub f2_1: f64,
    pub f1_2: f64,
    pub f2_2: f64,
    pub vac_pol: f64,
}

impl VertexStrengths {
    pub fn point() -> Self {
        VertexStrengths {
            f1_1: 1.0,
            f2_1: 0.0,
            f1_2: 1.0,
            f2_2: 0.0,
            vac_pol: 1.0,
        }
    }
}

/// Instantaneous photon momentum q = (0, k - k') for the center-of-mass
/// geometry of `PairGeometry` (incoming along +z, outgoing at angle beta).
pub fn transfer_vector(p: &KinPoint, beta: f64) -> CVec4 {
    [Z, c(-p.kp * beta.sin()), Z, c(p.k - p.kp * beta.cos())]
}

/// Remove the longitudinal piece: J -> J - q (q.J)/q^2.
pub fn gauge_project(j: &CVec4, q: &CVec4, q2: Complex64) -> CVec4 {
    let qj = mdot(q, j);
    let mut out = *j;
    for mu in 0..4 {
        out[mu] -= q[mu] * qj / q2;
    }
    out
}

/// One-photon exchange amplitude between helicity states:
/// -N Z alpha Pi/(8 pi^2 q^2) J1 D(xi) J2 with the instantaneous photon
/// propagator D_{mu nu} = g_{mu nu} - q_mu q_nu/q^2 + xi q_mu q_nu/q^2
/// contracted on gauge-projected currents; N = 1/sqrt(w1 w1' w2 w2').
pub fn one_photon_amplitude(
    cfg: &TwoBodyConfig,
    p: &KinPoint,
    beta: f64,
    labels: &HelicityLabels,
    vv: &VertexStrengths,
    xi: f64,
) -> Complex64 {
    let g = PairGeometry::new(cfg, p, beta);
    let j1 = current(
        vv.f1_1, vv.f2_1, &g.p1_out, labels.lp1, &g.p1_in, labels.lk1,
    );
    let j2 = current(
        vv.f1_2, vv.f2_2, &g.p2_out, labels.lp2, &g.p2_in, labels.lk2,
    );
    let q = transfer_vector(p, beta);
    let q2 = mdot(&q, &q);
    let j1p = gauge_project(&j1, &q, q2);
    let j2p = gauge_project(&j2, &q, q2);
    // residual longitudinal parts vanish up to rounding; the xi term keeps
    // the gauge-parameter dependence explicitly testable
    let contracted = mdot(&j1p, &j2p) + (xi - 1.0) * mdot(&q, &j1p) * mdot(&q, &j2p) / q2;
    let pref =
        -g.norm() * cfg.z as f64 * cfg.alpha * vv.vac_pol / (8.0 * std::f64::consts::PI.powi(2));
    contracted * pref / q2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spinor;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn metric(mu: usize, nu: usize) -> f64 {
        if mu != nu {
            0.0
        } else if mu == 0 {
            1.0
        } else {
            -1.0
        }
    }

    #[test]
    fn clifford_algebra() {
        for mu in 0..4 {
            for nu in 0..4 {
                let anti = gamma(mu) * gamma(nu) + gamma(nu) * gamma(mu);
                let expect = CMat4::identity() * c(2.0 * metric(mu, nu));
                assert!((anti - expect).norm() < 1e-14, "mu={mu} nu={nu}");
            }
            let g5 = gamma5() * gamma(mu) + gamma(mu) * gamma5();
            assert!(g5.norm() < 1e-14);
        }
        assert!((gamma5() * gamma5() - CMat4::identity()).norm() < 1e-14);
    }

    #[test]
    fn basis_spinor_relations() {
        for &a in &[-1, 1] {
            let b = spinor::tetrad_b(a);
            for &l in &[-1, 1] {
                let u = basis_spinor(a, l);
                // lightlike Dirac equation along the defining tetrad vector
                assert!((slash(&b) * u).norm() < 1e-14);
                // chirality
                assert!((gamma5() * u - u * c(l as f64)).norm() < 1e-14);
                // u ubar = (1 + l gamma5)/2 b-slash
                let outer = u * bar(&u);
                let proj = (CMat4::identity() + gamma5() * c(l as f64)) * slash(&b) * c(0.5);
                assert!((outer - proj).norm() < 1e-13);
            }
        }
        // pairing ubar_l(b_C) u_r(b_A) = delta_{l,-r} delta_{C,-A}
        for &cc in &[-1, 1] {
            for &a in &[-1, 1] {
                for &l in &[-1, 1] {
                    for &r in &[-1, 1] {
                        let v = (bar(&basis_spinor(cc, l)) * basis_spinor(a, r))[(0, 0)];
                        let expect = if l == -r && cc == -a { 1.0 } else { 0.0 };
                        assert!((v - c(expect)).norm() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn gamma_block_matches_matrices() {
        for &cc in &[-1, 1] {
            for &a in &[-1, 1] {
                for &sigma in &[-1, 1] {
                    for &rho in &[-1, 1] {
                        let block = spinor::gamma_block(cc, a, sigma, rho);
                        let ub = bar(&basis_spinor(cc, sigma));
                        let u = basis_spinor(-a, -rho);
                        for mu in 0..4 {
                            let direct = (ub * gamma(mu) * u)[(0, 0)];
                            assert!(
                                (direct - block[mu]).norm() < 1e-13,
                                "C={cc} A={a} s={sigma} r={rho} mu={mu}: {direct} vs {}",
                                block[mu]
                            );
                        }
                    }
                }
            }
        }
    }

    fn random_momentum(rng: &mut ChaCha8Rng) -> PolarMomentum {
        PolarMomentum::new(
            rng.gen_range(0.2..5.0),
            rng.gen_range(1e-3..8.0),
            rng.gen_range(0.0..std::f64::consts::PI),
            rng.gen_range(0.0..2.0 * std::f64::consts::PI),
        )
    }

    #[test]
    fn bispinor_physics() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..50 {
            let p = random_momentum(&mut rng);
            for &l in &[-1, 1] {
                let u = helicity_bispinor(&p, l);
                let pv = p.fourvec();
                // Dirac equation
                let resid = (slash(&pv) - CMat4::identity() * c(p.m)) * u;
                assert!(
                    resid.norm() < 1e-12 * p.energy(),
                    "dirac residual {}",
                    resid.norm()
                );
                // normalization
                let ub = bar(&u);
                assert_abs_diff_eq!((ub * u)[(0, 0)].re, 2.0 * p.m, epsilon = 1e-10 * p.m);
                assert!((ub * u)[(0, 0)].im.abs() < 1e-12 * p.m);
                assert_abs_diff_eq!(
                    (ub * gamma0() * u)[(0, 0)].re,
                    2.0 * p.energy(),
                    epsilon = 1e-10 * p.energy()
                );
                // helicity eigenstate: Sigma.p-hat u = lambda u
                let nhat = [
                    p.theta.sin() * p.phi.cos(),
                    p.theta.sin() * p.phi.sin(),
                    p.theta.cos(),
                ];
                let mut sp = CMat4::zeros();
                for i in 0..3 {
                    sp += gamma5() * gamma0() * gamma(i + 1) * c(nhat[i]);
                }
                assert!(((sp * u) - u * c(l as f64)).norm() < 1e-11 * u.norm());
            }
        }
    }

    #[test]
    fn s_coeff_matches_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..40 {
            let p = random_momentum(&mut rng);
            for &l in &[-1, 1] {
                let u = helicity_bispinor(&p, l);
                for &a in &[-1, 1] {
                    for &rho in &[-1, 1] {
                        let direct = (bar(&basis_spinor(a, rho)) * u)[(0, 0)];
                        let closed = spinor::s_coeff(&p, a, rho, l);
                        assert!(
                            (direct - closed).norm() < 1e-12 * p.energy().sqrt(),
                            "A={a} rho={rho} l={l}: {direct} vs {closed}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn chains_match_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..25 {
            let pin = random_momentum(&mut rng);
            let mut pout = random_momentum(&mut rng);
            pout.m = pin.m;
            for &lk in &[-1, 1] {
                for &lp in &[-1, 1] {
                    let u = helicity_bispinor(&pin, lk);
                    let ub = bar(&helicity_bispinor(&pout, lp));
                    let scale = (pin.energy() * pout.energy()).sqrt();
                    let direct = (ub * u)[(0, 0)];
                    let closed = spinor::chain_scalar(&pout, lp, &pin, lk);
                    assert!((direct - closed).norm() < 1e-11 * scale);
                    let cv = spinor::chain_vector(&pout, lp, &pin, lk);
                    for mu in 0..4 {
                        let direct = (ub * gamma(mu) * u)[(0, 0)];
                        assert!(
                            (direct - cv[mu]).norm() < 1e-11 * scale,
                            "mu={mu}: {direct} vs {}",
                            cv[mu]
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn contractions_match_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let cfg = TwoBodyConfig::new(0.7, 3.1, 1, 0.05).unwrap();
        for _ in 0..10 {
            let p = KinPoint::new(rng.gen_range(0.05..4.0), rng.gen_range(0.05..4.0)).unwrap();
            let beta = rng.gen_range(0.05..3.0);
            let g = PairGeometry::new(&cfg, &p, beta);
            let n = g.norm();
            for labels in HelicityLabels::all() {
                let u1 = helicity_bispinor(&g.p1_in, labels.lk1);
                let ub1 = bar(&helicity_bispinor(&g.p1_out, labels.lp1));
                let u2 = helicity_bispinor(&g.p2_in, labels.lk2);
                let ub2 = bar(&helicity_bispinor(&g.p2_out, labels.lp2));

                // vector-vector
                let mut jj = Complex64::default();
                for mu in 0..4 {
                    jj += (ub1 * gamma(mu) * u1)[(0, 0)]
                        * (ub2 * gamma(mu) * u2)[(0, 0)]
                        * metric(mu, mu);
                }
                let closed = spinor::contract_vector_vector(&cfg, &p, beta, &labels);
                assert!(
                    ((jj * n).re - closed).abs() < 1e-10 && (jj * n).im.abs() < 1e-10,
                    "vv {labels:?}: {} vs {closed}",
                    (jj * n).re
                );

                // scalar x slash and slash x scalar
                let mut p1k1 = g.p1_out.fourvec();
                let k1 = g.p1_in.fourvec();
                let mut p2k2 = g.p2_out.fourvec();
                let k2 = g.p2_in.fourvec();
                for mu in 0..4 {
                    p1k1[mu] += k1[mu];
                    p2k2[mu] += k2[mu];
                }
                let s1 = (ub1 * u1)[(0, 0)];
                let s2 = (ub2 * u2)[(0, 0)];
                let direct = n * s1 * (ub2 * slash(&p1k1) * u2)[(0, 0)];
                let closed = spinor::contract_scalar_slash1(&cfg, &p, beta, &labels);
                assert!((direct - c(closed)).norm() < 1e-10, "s-slash {labels:?}");
                let direct = n * (ub1 * slash(&p2k2) * u1)[(0, 0)] * s2;
                let closed = spinor::contract_slash2_scalar(&cfg, &p, beta, &labels);
                assert!((direct - c(closed)).norm() < 1e-10, "slash-s {labels:?}");
                let direct = n * mdot(&p1k1, &p2k2) * s1 * s2;
                let closed = spinor::contract_scalar_scalar(&cfg, &p, beta, &labels);
                assert!((direct - c(closed)).norm() < 1e-9, "s-s {labels:?}");

                // time-time bracket
                let kf = [0.9, 0.3, 0.2, 0.6];
                let j10 = (ub1 * gamma0() * u1)[(0, 0)];
                let j20 = (ub2 * gamma0() * u2)[(0, 0)];
                let direct = n
                    * (kf[0] * j10 * j20
                        - kf[1] / (2.0 * cfg.m1) * p1k1[0] * s1 * j20
                        - kf[2] / (2.0 * cfg.m2) * p2k2[0] * j10 * s2
                        + kf[3] / (4.0 * cfg.m1 * cfg.m2) * p1k1[0] * p2k2[0] * s1 * s2);
                let closed = spinor::contract_time_time(&cfg, &p, beta, &labels, &kf);
                assert!((direct - c(closed)).norm() < 1e-10, "tt {labels:?}");
            }
        }
    }

    #[test]
    fn current_is_conserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let cfg = TwoBodyConfig::new(0.9, 2.4, 1, 0.05).unwrap();
        for _ in 0..10 {
            let p = KinPoint::new(rng.gen_range(0.05..3.0), rng.gen_range(0.05..3.0)).unwrap();
            let beta = rng.gen_range(0.1..3.0);
            let g = PairGeometry::new(&cfg, &p, beta);
            for labels in HelicityLabels::all() {
                for (f1, f2) in [(1.0, 0.0), (0.7, 1.9)] {
                    let j1 = current(f1, f2, &g.p1_out, labels.lp1, &g.p1_in, labels.lk1);
                    let mut q1 = g.p1_out.fourvec();
                    let k1 = g.p1_in.fourvec();
                    for mu in 0..4 {
                        q1[mu] -= k1[mu];
                    }
                    assert!(mdot(&q1, &j1).norm() < 1e-11, "particle 1 q.J != 0");
                    let j2 = current(f1, f2, &g.p2_out, labels.lp2, &g.p2_in, labels.lk2);
                    let mut q2 = g.p2_out.fourvec();
                    let k2 = g.p2_in.fourvec();
                    for mu in 0..4 {
                        q2[mu] -= k2[mu];
                    }
                    assert!(mdot(&q2, &j2).norm() < 1e-11, "particle 2 q.J != 0");
                }
            }
        }
    }

    #[test]
    fn amplitude_gauge_independent() {
        let mut rng = ChaCha8Rng::seed_from_u64(57);
        let cfg = TwoBodyConfig::hydrogen();
        let vv = VertexStrengths {
            f1_1: 1.0,
            f2_1: 0.4,
            f1_2: 0.8,
            f2_2: 2.3,
            vac_pol: 1.0,
        };
        for _ in 0..6 {
            let p = KinPoint::new(rng.gen_range(0.001..1.0), rng.gen_range(0.001..1.0)).unwrap();
            let beta = rng.gen_range(0.1..3.0);
            for labels in HelicityLabels::all() {
                let a1 = one_photon_amplitude(&cfg, &p, beta, &labels, &vv, 1.0);
                let a17 = one_photon_amplitude(&cfg, &p, beta, &labels, &vv, 17.0);
                let scale = a1.norm().max(1e-30);
                assert!(
                    (a1 - a17).norm() < 1e-12 * scale.max(1.0),
                    "{labels:?}: {a1} vs {a17}"
                );
            }
        }
    }

    #[test]
    fn amplitude_matches_vector_contraction_for_point_charges() {
        // for f2 = 0 and no projector corrections beyond leading, compare the
        // g_{mu nu} part against the closed vector-vector contraction
        let cfg = TwoBodyConfig::new(1.0, 2.0, 1, 0.1).unwrap();
        let p = KinPoint::new(0.4, 0.9).unwrap();
        let beta = 1.1;
        let labels = HelicityLabels::new(1, -1, 1, 1);
        let g = PairGeometry::new(&cfg, &p, beta);
        let j1 = current(1.0, 0.0, &g.p1_out, labels.lp1, &g.p1_in, labels.lk1);
        let j2 = current(1.0, 0.0, &g.p2_out, labels.lp2, &g.p2_in, labels.lk2);
        let direct = (mdot(&j1, &j2) * g.norm()).re;
        let closed = spinor::contract_vector_vector(&cfg, &p, beta, &labels);
        assert_abs_diff_eq!(direct, closed, epsilon = 1e-10);
    }
}
