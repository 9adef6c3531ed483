//! Partial-wave kernel of the two-fermion bound-state equation.
//!
//! The one-photon interaction, reduced to closed helicity structures in
//! `spinor`, is projected here onto |J, ell, S> channels: the G coefficient
//! sums couple the Legendre moments of `interaction` to Clebsch-Gordan
//! factors, the five v_term functions assemble the helicity-space potential,
//! and `kernel_element` applies the final channel projection. A slow angular
//! quadrature of the explicit matrix-element amplitude (`oracle`) provides
//! the reference value for every element.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::halfint::HalfInt;
use crate::interaction::{k_functions, r_tilde, u_tilde, z_tilde, FormFactorSet, MomentKernel};
use crate::kinematics::{omega, q2_of, w_factor, y_of, KinPoint, TwoBodyConfig};
use crate::oracle::{current, gauge_project, one_photon_amplitude, VertexStrengths};
use crate::quad::{gauss_legendre, integrate_gl};
use crate::special::{clebsch_gordan, wigner_d};
use crate::spinor::{mdot, CVec4, HelicityLabels, PolarMomentum};

/// Global sign calibration of the assembled kernel.
///
/// The channel projection below is written with an explicit (-1) prefactor;
/// tracking every sign through the current product, the instantaneous
/// propagator and the partial-wave reduction leaves the overall orientation
/// ambiguous at the one place where conventions meet. It is fixed here, once,
/// by the physical requirement that the nonrelativistic limit reproduce the
/// attractive Coulomb partial wave -(Z alpha/pi) Q_ell(y)/(k k') for opposite
/// charges (bound states must exist). The same constant multiplies the
/// quadrature reference in `oracle_kernel_element`, so direct/reference
/// comparisons are independent of it; the Coulomb-limit and spectrum tests
/// are what pin it.
pub const KERNEL_SIGN: f64 = -1.0;

/// Jacob-Wick phase of the second (backward-moving) particle.
///
/// The closed contraction formulas in `spinor` use mirror-convention states
/// for particle 2; two-particle partial-wave states carry an extra
/// (-1)^{s - lambda_2} per spin-1/2 leg. The in/out product of those phases
/// is real and multiplies every helicity amplitude before the channel
/// projection.
pub fn jw_phase(labels: &HelicityLabels) -> f64 {
    (labels.lk2 * labels.lp2) as f64
}

/// A parity-consistent group of (ell, S) channels coupled at fixed J.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ChannelBlock {
    pub j: u32,
    /// Ordered (ell, s) pairs, s in {0, 1}.
    pub channels: Vec<(u32, u32)>,
}

impl ChannelBlock {
    /// Spin-singlet/triplet block with ell = J: {(J,0), (J,1)}; J = 0 keeps
    /// only (0,0).
    pub fn block_a(j: u32) -> Self {
        let channels = if j == 0 {
            vec![(0, 0)]
        } else {
            vec![(j, 0), (j, 1)]
        };
        ChannelBlock { j, channels }
    }

    /// Triplet block with ell = J -+ 1: {(J-1,1), (J+1,1)}; J = 0 keeps only
    /// (1,1).
    pub fn block_b(j: u32) -> Self {
        let channels = if j == 0 {
            vec![(1, 1)]
        } else {
            vec![(j - 1, 1), (j + 1, 1)]
        };
        ChannelBlock { j, channels }
    }

    pub fn from_name(j: u32, name: &str) -> Result<Self> {
        match name {
            "a" | "A" => Ok(Self::block_a(j)),
            "b" | "B" => Ok(Self::block_b(j)),
            other => Err(Error::config(format!(
                "unknown channel block '{other}' (use a or b)"
            ))),
        }
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    pub fn label(&self) -> String {
        let names: Vec<String> = self
            .channels
            .iter()
            .map(|&(l, s)| format!("(l={l},S={s})"))
            .collect();
        format!("J={} [{}]", self.j, names.join(" "))
    }
}

/// Coupled Clebsch-Gordan weight sum
/// G^{J,s1,s2}[Phi] = sum_{s,ell} (2 ell + 1)/(2 J + 1)
///   C{s1 s2 s; lk1/2, -lk2/2, lam} C{ell s J; 0, lam, lam}
///   C{s1 s2 s; lp1/2, -lp2/2, lam'} C{ell s J; 0, lam', lam'} Phi(ell),
/// with lam = (lk1 - lk2)/2 and lam' = (lp1 - lp2)/2.
pub fn g_coeff(
    j: u32,
    s1: HalfInt,
    s2: HalfInt,
    labels: &HelicityLabels,
    phi: &dyn Fn(u32) -> f64,
) -> f64 {
    let lam = HalfInt::from_doubled(labels.lk1 - labels.lk2);
    let lamp = HalfInt::from_doubled(labels.lp1 - labels.lp2);
    let jj = HalfInt::from_int(j as i32);
    let mut total = 0.0;
    let mut sd = (s1.doubled() - s2.doubled()).abs();
    while sd <= s1.doubled() + s2.doubled() {
        let s = HalfInt::from_doubled(sd);
        let c_in = clebsch_gordan(
            s1,
            HalfInt::from_doubled(labels.lk1),
            s2,
            HalfInt::from_doubled(-labels.lk2),
            s,
            lam,
        );
        let c_out = clebsch_gordan(
            s1,
            HalfInt::from_doubled(labels.lp1),
            s2,
            HalfInt::from_doubled(-labels.lp2),
            s,
            lamp,
        );
        if c_in * c_out != 0.0 {
            // s1, s2 are both half-integer here, so s and ell are integers
            let s_int = sd / 2;
            let l_lo = (j as i32 - s_int).unsigned_abs();
            let l_hi = j + s_int as u32;
            for ell in l_lo..=l_hi {
                let le = HalfInt::from_int(ell as i32);
                let ca = clebsch_gordan(le, HalfInt::ZERO, s, lam, jj, lam);
                let cb = clebsch_gordan(le, HalfInt::ZERO, s, lamp, jj, lamp);
                if ca != 0.0 && cb != 0.0 {
                    total += (2 * ell + 1) as f64 / (2 * j + 1) as f64
                        * c_in
                        * c_out
                        * ca
                        * cb
                        * phi(ell);
                }
            }
        }
        sd += 2;
    }
    total
}

/// gamma^mu x gamma_mu structure: velocity-factor weighted sum of two
/// G terms. The helicity-diagonal piece enters with a minus sign and couples
/// the in-pair through lambda = 0 (labels (-lk1, -lk1)).
pub fn v_term_i(
    cfg: &TwoBodyConfig,
    j: u32,
    p: &KinPoint,
    labels: &HelicityLabels,
    r: &dyn Fn(u32) -> f64,
) -> f64 {
    let HelicityLabels { lk1, lk2, lp1, lp2 } = *labels;
    let g_diag = if lk1 == lk2 {
        g_coeff(
            j,
            HalfInt::HALF,
            HalfInt::HALF,
            &HelicityLabels::new(-lk1, -lk1, lp1, lp2),
            r,
        )
    } else {
        0.0
    };
    let g_main = g_coeff(j, HalfInt::HALF, HalfInt::HALF, labels, r);
    let mut acc = 0.0;
    for sigma in [-1, 1] {
        for rho in [-1, 1] {
            let w = w_factor(-sigma * lk1, -rho * lk2, cfg, p.k)
                * w_factor(-sigma * lp1, -rho * lp2, cfg, p.kp);
            let mut t = 0.0;
            if lk1 == lk2 {
                t -= (rho * sigma) as f64 * g_diag;
            }
            if rho * lk1 == sigma * lk2 {
                t += g_main;
            }
            acc += w * t;
        }
    }
    2.0 * acc
}

/// 1 x (p1-slash + k1-slash) structure weighted by -1/(2 m1); r and z are the
/// plain and x-weighted moment tables of the same vertex product.
pub fn v_term_ii(
    cfg: &TwoBodyConfig,
    j: u32,
    p: &KinPoint,
    labels: &HelicityLabels,
    r: &dyn Fn(u32) -> f64,
    z: &dyn Fn(u32) -> f64,
) -> f64 {
    let HelicityLabels { lk1, lk2, lp1, lp2 } = *labels;
    let g_z = g_coeff(j, HalfInt::HALF, HalfInt::HALF, labels, z);
    let g_32 = g_coeff(j, HalfInt::HALF, HalfInt::THREE_HALVES, labels, r);
    let g_r = g_coeff(j, HalfInt::HALF, HalfInt::HALF, labels, r);
    let om = omega(cfg.m1, p.k) + omega(cfg.m1, p.kp);
    let mut acc = 0.0;
    for sigma in [-1, 1] {
        for rho in [-1, 1] {
            let w = w_factor(-sigma * lk1, -rho * lk2, cfg, p.k)
                * w_factor(sigma * lp1, -rho * lp2, cfg, p.kp);
            let bracket = om * g_r
                - rho as f64
                    * ((lk2 as f64 * p.k + 2.0 / 3.0 * lp2 as f64 * p.kp) * g_r
                        + lk2 as f64 * p.kp * (g_z - 2.0 / 3.0 * g_32));
            acc += w * bracket;
        }
    }
    -acc / (2.0 * cfg.m1)
}

/// (p2-slash + k2-slash) x 1 structure weighted by -1/(2 m2); the particle
/// roles of `v_term_ii` exchanged.
pub fn v_term_iii(
    cfg: &TwoBodyConfig,
    j: u32,
    p: &KinPoint,
    labels: &HelicityLabels,
    r: &dyn Fn(u32) -> f64,
    z: &dyn Fn(u32) -> f64,
) -> f64 {
    let HelicityLabels { lk1, lk2, lp1, lp2 } = *labels;
    let g_z = g_coeff(j, HalfInt::HALF, HalfInt::HALF, labels, z);
    let g_32 = g_coeff(j, HalfInt::THREE_HALVES, HalfInt::HALF, labels, r);
    let g_r = g_coeff(j, HalfInt::HALF, HalfInt::HALF, labels, r);
    let om = omega(cfg.m2, p.k) + omega(cfg.m2, p.kp);
    let mut acc = 0.0;
    for sigma in [-1, 1] {
        for rho in [-1, 1] {
            let w = w_factor(-sigma * lk1, -rho * lk2, cfg, p.k)
                * w_factor(-sigma * lp1, rho * lp2, cfg, p.kp);
            let bracket = om * g_r
                - sigma as f64
                    * ((lk1 as f64 * p.k + 2.0 / 3.0 * lp1 as f64 * p.kp) * g_r
                        + lk1 as f64 * p.kp * (g_z - 2.0 / 3.0 * g_32));
            acc += w * bracket;
        }
    }
    -acc / (2.0 * cfg.m2)
}

/// (p1 + k1).(p2 + k2) 1 x 1 structure weighted by 1/(4 m1 m2).
pub fn v_term_iv(
    cfg: &TwoBodyConfig,
    j: u32,
    p: &KinPoint,
    labels: &HelicityLabels,
    r: &dyn Fn(u32) -> f64,
    z: &dyn Fn(u32) -> f64,
) -> f64 {
    let HelicityLabels { lk1, lk2, lp1, lp2 } = *labels;
    let g_r = g_coeff(j, HalfInt::HALF, HalfInt::HALF, labels, r);
    let g_z = g_coeff(j, HalfInt::HALF, HalfInt::HALF, labels, z);
    let om1 = omega(cfg.m1, p.k) + omega(cfg.m1, p.kp);
    let om2 = omega(cfg.m2, p.k) + omega(cfg.m2, p.kp);
    let scal = p.k * p.k + p.kp * p.kp + om1 * om2;
    let mut acc = 0.0;
    for sigma in [-1, 1] {
        for rho in [-1, 1] {
            let w = w_factor(-sigma * lk1, -rho * lk2, cfg, p.k)
                * w_factor(sigma * lp1, rho * lp2, cfg, p.kp);
            acc += w * (scal * g_r + 2.0 * p.k * p.kp * g_z);
        }
    }
    acc / (4.0 * cfg.m1 * cfg.m2)
}

/// Longitudinal (time-time) part built from the 1/q^4 moments; u holds the
/// four vertex-product moment tables in order I..IV. The overall minus comes
/// from tracking the projector term of the propagator through the same
/// (-1) prefactor convention as the other four terms.
pub fn v_term_b(
    cfg: &TwoBodyConfig,
    j: u32,
    p: &KinPoint,
    labels: &HelicityLabels,
    u: [&dyn Fn(u32) -> f64; 4],
) -> f64 {
    let HelicityLabels { lk1, lk2, lp1, lp2 } = *labels;
    let g: Vec<f64> = u
        .iter()
        .map(|f| g_coeff(j, HalfInt::HALF, HalfInt::HALF, labels, *f))
        .collect();
    let om1 = omega(cfg.m1, p.k) + omega(cfg.m1, p.kp);
    let om2 = omega(cfg.m2, p.k) + omega(cfg.m2, p.kp);
    let (m1, m2) = (cfg.m1, cfg.m2);
    let mut acc = 0.0;
    for sigma in [-1, 1] {
        for rho in [-1, 1] {
            let wk = w_factor(-sigma * lk1, -rho * lk2, cfg, p.k);
            acc += wk
                * (4.0 * m1 * m2 * g[0] * w_factor(-sigma * lp1, -rho * lp2, cfg, p.kp)
                    - 2.0 * m2 * om1 * g[1] * w_factor(sigma * lp1, -rho * lp2, cfg, p.kp)
                    - 2.0 * m1 * om2 * g[2] * w_factor(-sigma * lp1, rho * lp2, cfg, p.kp)
                    + om1 * om2 * g[3] * w_factor(sigma * lp1, rho * lp2, cfg, p.kp));
        }
    }
    -acc / (4.0 * m1 * m2)
}

/// Precomputed angular moments of the four vertex products at one (k, k')
/// pair: r (1/q^2 weight), z (x/q^2), u (rho_12/q^4), each indexed by ell.
pub struct KernelMoments {
    pub lmax: u32,
    pub r: [Vec<f64>; 4],
    pub z: [Vec<f64>; 4],
    pub u: [Vec<f64>; 4],
    /// Vertex products that are not identically zero for this model.
    pub active: [bool; 4],
}

/// Build all moments needed at total angular momentum j. The moment
/// integrals dominate assembly cost, so they are computed once per momentum
/// pair and shared across all 16 helicity terms and all channels.
pub fn build_moments(
    cfg: &TwoBodyConfig,
    p: &KinPoint,
    ffs: &FormFactorSet,
    j: u32,
) -> Result<KernelMoments> {
    let lmax = j + 2;
    let active = [
        true,
        ffs.electron_anomalous,
        ffs.dipole_proton,
        ffs.electron_anomalous && ffs.dipole_proton,
    ];
    // without q^2-dependent structure every vertex product is a constant and
    // the closed Legendre-Q forms apply
    let constant = !ffs.dipole_proton && !ffs.uehling;
    let mut r: [Vec<f64>; 4] = Default::default();
    let mut z: [Vec<f64>; 4] = Default::default();
    let mut u: [Vec<f64>; 4] = Default::default();
    for idx in 0..4 {
        let nr = (lmax + 2) as usize;
        if !active[idx] {
            r[idx] = vec![0.0; nr];
            z[idx] = vec![0.0; (lmax + 1) as usize];
            u[idx] = vec![0.0; (lmax + 1) as usize];
            continue;
        }
        let kfun = |q2: f64| {
            k_functions(ffs, q2)
                .map(|k| k.as_array()[idx])
                .unwrap_or(0.0)
        };
        let kernel = if constant {
            MomentKernel::Constant(k_functions(ffs, -1.0)?.as_array()[idx])
        } else {
            MomentKernel::Function(&kfun)
        };
        let mut rv = Vec::with_capacity(nr);
        for ell in 0..=lmax + 1 {
            rv.push(r_tilde(ell, p, &kernel)?);
        }
        let mut zv = Vec::with_capacity((lmax + 1) as usize);
        let mut uv = Vec::with_capacity((lmax + 1) as usize);
        for ell in 0..=lmax {
            let prev = if ell == 0 {
                0.0
            } else {
                rv[(ell - 1) as usize]
            };
            zv.push(z_tilde(ell, prev, rv[(ell + 1) as usize]));
            uv.push(u_tilde(ell, cfg, p, &kernel)?);
        }
        r[idx] = rv;
        z[idx] = zv;
        u[idx] = uv;
    }
    Ok(KernelMoments {
        lmax,
        r,
        z,
        u,
        active,
    })
}

/// Sum of the five helicity-space terms for one helicity combination.
pub fn v_total(
    cfg: &TwoBodyConfig,
    j: u32,
    p: &KinPoint,
    labels: &HelicityLabels,
    m: &KernelMoments,
) -> f64 {
    let mut v = v_term_i(cfg, j, p, labels, &|l: u32| m.r[0][l as usize]);
    if m.active[1] {
        v += v_term_ii(
            cfg,
            j,
            p,
            labels,
            &|l: u32| m.r[1][l as usize],
            &|l: u32| m.z[1][l as usize],
        );
    }
    if m.active[2] {
        v += v_term_iii(
            cfg,
            j,
            p,
            labels,
            &|l: u32| m.r[2][l as usize],
            &|l: u32| m.z[2][l as usize],
        );
    }
    if m.active[3] {
        v += v_term_iv(
            cfg,
            j,
            p,
            labels,
            &|l: u32| m.r[3][l as usize],
            &|l: u32| m.z[3][l as usize],
        );
    }
    let u: [&dyn Fn(u32) -> f64; 4] = [
        &|l: u32| m.u[0][l as usize],
        &|l: u32| m.u[1][l as usize],
        &|l: u32| m.u[2][l as usize],
        &|l: u32| m.u[3][l as usize],
    ];
    v + v_term_b(cfg, j, p, labels, u)
}

fn check_channel(j: u32, ell: u32, s: u32) -> Result<()> {
    if s > 1 {
        return Err(Error::config(format!("total spin must be 0 or 1, got {s}")));
    }
    let lo = (ell as i32 - s as i32).unsigned_abs();
    if !(lo..=ell + s).contains(&j) {
        return Err(Error::config(format!(
            "channel (ell={ell}, S={s}) does not couple to J={j}"
        )));
    }
    Ok(())
}

/// Channel projection of the helicity potential for arbitrary quantum
/// numbers; `kernel_element` is the block-indexed wrapper. Momenta: p.k is
/// the incoming and p.kp the outgoing relative momentum.
pub fn kernel_element_channels(
    cfg: &TwoBodyConfig,
    j: u32,
    out_chan: (u32, u32),
    in_chan: (u32, u32),
    p: &KinPoint,
    ffs: &FormFactorSet,
) -> Result<f64> {
    check_channel(j, out_chan.0, out_chan.1)?;
    check_channel(j, in_chan.0, in_chan.1)?;
    let m = build_moments(cfg, p, ffs, j)?;
    Ok(project(cfg, j, out_chan, in_chan, p, &m))
}

fn project(
    cfg: &TwoBodyConfig,
    j: u32,
    (l_out, s_out): (u32, u32),
    (l_in, s_in): (u32, u32),
    p: &KinPoint,
    m: &KernelMoments,
) -> f64 {
    let jj = HalfInt::from_int(j as i32);
    let si = HalfInt::from_int(s_in as i32);
    let so = HalfInt::from_int(s_out as i32);
    let li = HalfInt::from_int(l_in as i32);
    let lo = HalfInt::from_int(l_out as i32);
    let mut sum = 0.0;
    for labels in HelicityLabels::all() {
        let lam = HalfInt::from_doubled(labels.lk1 - labels.lk2);
        let lamp = HalfInt::from_doubled(labels.lp1 - labels.lp2);
        let w = clebsch_gordan(
            HalfInt::HALF,
            HalfInt::from_doubled(labels.lk1),
            HalfInt::HALF,
            HalfInt::from_doubled(-labels.lk2),
            si,
            lam,
        ) * clebsch_gordan(li, HalfInt::ZERO, si, lam, jj, lam)
            * clebsch_gordan(lo, HalfInt::ZERO, so, lamp, jj, lamp)
            * clebsch_gordan(
                HalfInt::HALF,
                HalfInt::from_doubled(labels.lp1),
                HalfInt::HALF,
                HalfInt::from_doubled(-labels.lp2),
                so,
                lamp,
            );
        if w == 0.0 {
            continue;
        }
        sum += w * v_total(cfg, j, p, &labels, m);
    }
    let pref = -(((2 * l_in + 1) * (2 * l_out + 1)) as f64).sqrt() / (2 * j + 1) as f64
        * KERNEL_SIGN
        * cfg.z as f64
        * cfg.alpha
        / (4.0 * PI);
    pref * sum
}

/// One kernel matrix element V^J_{l' S'; l S}(k' = p.kp, k = p.k) in 1/MeV^2.
pub fn kernel_element(
    cfg: &TwoBodyConfig,
    block: &ChannelBlock,
    chan_out: usize,
    chan_in: usize,
    p: &KinPoint,
    ffs: &FormFactorSet,
) -> Result<f64> {
    let get = |i: usize| {
        block
            .channels
            .get(i)
            .copied()
            .ok_or_else(|| Error::config(format!("channel index {i} out of range")))
    };
    kernel_element_channels(cfg, block.j, get(chan_out)?, get(chan_in)?, p, ffs)
}

/// All channel pairs of a block at one momentum pair, sharing the moment
/// tables; entry [out][in].
pub fn kernel_block_matrix(
    cfg: &TwoBodyConfig,
    block: &ChannelBlock,
    p: &KinPoint,
    ffs: &FormFactorSet,
) -> Result<Vec<Vec<f64>>> {
    for &(l, s) in &block.channels {
        check_channel(block.j, l, s)?;
    }
    let m = build_moments(cfg, p, ffs, block.j)?;
    Ok(block
        .channels
        .iter()
        .map(|&co| {
            block
                .channels
                .iter()
                .map(|&ci| project(cfg, block.j, co, ci, p, &m))
                .collect()
        })
        .collect())
}

// ---------------------------------------------------------------------------
// quadrature reference
// ---------------------------------------------------------------------------

/// Integrate f(x) over x in [-1, 1] with the substitution u = ln(y - x),
/// which absorbs the 1/(y - x) photon-pole enhancement near x = 1.
fn integrate_angular(p: &KinPoint, f: &dyn Fn(f64) -> f64) -> f64 {
    let y = y_of(p);
    let lo = (y - 1.0).ln();
    let hi = (y + 1.0).ln();
    let panels = ((hi - lo).ceil() as usize).max(1);
    let width = (hi - lo) / panels as f64;
    let mut total = 0.0;
    for i in 0..panels {
        let a = lo + i as f64 * width;
        total += integrate_gl(
            &|u: f64| {
                let x = (y - u.exp()).clamp(-1.0, 1.0);
                f(x) * u.exp()
            },
            a,
            a + width,
            24,
        );
    }
    total
}

/// Reduced helicity matrix element by direct angular quadrature of the
/// explicit-matrix amplitude: 2 pi Int d^J_{lam lam'}(beta) A(beta) dx,
/// including the Jacob-Wick phase.
pub fn oracle_helicity_element(
    cfg: &TwoBodyConfig,
    j: u32,
    p: &KinPoint,
    labels: &HelicityLabels,
    ffs: &FormFactorSet,
    xi: f64,
) -> Result<f64> {
    let jj = HalfInt::from_int(j as i32);
    let lam = HalfInt::from_doubled(labels.lk1 - labels.lk2);
    let lamp = HalfInt::from_doubled(labels.lp1 - labels.lp2);
    if !jj.admits_projection(lam) || !jj.admits_projection(lamp) {
        return Ok(0.0);
    }
    let jw = jw_phase(labels);
    let f = |x: f64| {
        let beta = x.acos();
        let vv = ffs.vertex_strengths(q2_of(p, x));
        let amp = one_photon_amplitude(cfg, p, beta, labels, &vv, xi);
        debug_assert!(amp.im.abs() <= 1e-9 * amp.re.abs().max(1e-300));
        let d = wigner_d(jj, lam, lamp, beta).expect("projections validated above");
        d * jw * amp.re
    };
    Ok(2.0 * PI * integrate_angular(p, &f))
}

/// Reference value for `kernel_element`: the same channel projection applied
/// to the quadrature helicity elements. Used in tests; xi exposes the gauge
/// parameter of the photon propagator.
pub fn oracle_kernel_element(
    cfg: &TwoBodyConfig,
    block: &ChannelBlock,
    chan_out: usize,
    chan_in: usize,
    p: &KinPoint,
    ffs: &FormFactorSet,
    xi: f64,
) -> Result<f64> {
    let (l_out, s_out) = *block
        .channels
        .get(chan_out)
        .ok_or_else(|| Error::config(format!("channel index {chan_out} out of range")))?;
    let (l_in, s_in) = *block
        .channels
        .get(chan_in)
        .ok_or_else(|| Error::config(format!("channel index {chan_in} out of range")))?;
    check_channel(block.j, l_out, s_out)?;
    check_channel(block.j, l_in, s_in)?;
    let j = block.j;
    let jj = HalfInt::from_int(j as i32);
    let si = HalfInt::from_int(s_in as i32);
    let so = HalfInt::from_int(s_out as i32);
    let li = HalfInt::from_int(l_in as i32);
    let lo = HalfInt::from_int(l_out as i32);
    let mut sum = 0.0;
    for labels in HelicityLabels::all() {
        let lam = HalfInt::from_doubled(labels.lk1 - labels.lk2);
        let lamp = HalfInt::from_doubled(labels.lp1 - labels.lp2);
        let w = clebsch_gordan(
            HalfInt::HALF,
            HalfInt::from_doubled(labels.lk1),
            HalfInt::HALF,
            HalfInt::from_doubled(-labels.lk2),
            si,
            lam,
        ) * clebsch_gordan(li, HalfInt::ZERO, si, lam, jj, lam)
            * clebsch_gordan(lo, HalfInt::ZERO, so, lamp, jj, lamp)
            * clebsch_gordan(
                HalfInt::HALF,
                HalfInt::from_doubled(labels.lp1),
                HalfInt::HALF,
                HalfInt::from_doubled(-labels.lp2),
                so,
                lamp,
            );
        if w == 0.0 {
            continue;
        }
        sum += w * oracle_helicity_element(cfg, j, p, &labels, ffs, xi)?;
    }
    let pref =
        (((2 * l_in + 1) * (2 * l_out + 1)) as f64).sqrt() / (2 * j + 1) as f64 * KERNEL_SIGN;
    Ok(pref * sum)
}

/// Explicit-matrix amplitude for arbitrary in/out directions (theta, phi) of
/// particle 1; particle 2 carries the mirrored directions. Used by the
/// rotational-invariance (angular-probe) checks.
pub fn amplitude_at(
    cfg: &TwoBodyConfig,
    p: &KinPoint,
    dir_in: (f64, f64),
    dir_out: (f64, f64),
    labels: &HelicityLabels,
    vv: &VertexStrengths,
    xi: f64,
) -> Complex64 {
    let zero = Complex64::new(0.0, 0.0);
    let p1_in = PolarMomentum::new(cfg.m1, p.k, dir_in.0, dir_in.1);
    let p2_in = PolarMomentum::new(cfg.m2, p.k, PI - dir_in.0, dir_in.1 + PI);
    let p1_out = PolarMomentum::new(cfg.m1, p.kp, dir_out.0, dir_out.1);
    let p2_out = PolarMomentum::new(cfg.m2, p.kp, PI - dir_out.0, dir_out.1 + PI);
    let j1 = current(vv.f1_1, vv.f2_1, &p1_out, labels.lp1, &p1_in, labels.lk1);
    let j2 = current(vv.f1_2, vv.f2_2, &p2_out, labels.lp2, &p2_in, labels.lk2);
    let kv = p1_in.fourvec();
    let kpv = p1_out.fourvec();
    let q: CVec4 = [zero, kv[1] - kpv[1], kv[2] - kpv[2], kv[3] - kpv[3]];
    let q2 = mdot(&q, &q);
    let j1p = gauge_project(&j1, &q, q2);
    let j2p = gauge_project(&j2, &q, q2);
    let contracted = mdot(&j1p, &j2p) + (xi - 1.0) * mdot(&q, &j1p) * mdot(&q, &j2p) / q2;
    let norm = 1.0 / (p1_in.energy() * p1_out.energy() * p2_in.energy() * p2_out.energy()).sqrt();
    let pref = -norm * cfg.z as f64 * cfg.alpha * vv.vac_pol / (8.0 * PI * PI);
    contracted * pref / q2
}

/// Overlap of the amplitude (incoming pair along +z) with a total-angular-
/// momentum probe on the outgoing sphere:
/// Int dOmega' D^{j_probe}_{mu_probe, lam'}(phi', theta', -phi') A.
/// Rotational invariance makes this vanish unless j_probe equals the J
/// content of the amplitude row and mu_probe = lam of the incoming pair.
#[allow(clippy::too_many_arguments)]
pub fn angular_probe_overlap(
    cfg: &TwoBodyConfig,
    p: &KinPoint,
    j_probe: u32,
    mu_probe: i32,
    labels: &HelicityLabels,
    ffs: &FormFactorSet,
    xi: f64,
    n_theta: usize,
) -> Result<Complex64> {
    let jj = HalfInt::from_int(j_probe as i32);
    let mu = HalfInt::from_int(mu_probe);
    let lamp = HalfInt::from_doubled(labels.lp1 - labels.lp2);
    if !jj.admits_projection(mu) || !jj.admits_projection(lamp) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let (nodes, weights) = gauss_legendre(n_theta);
    let n_phi = 2 * n_theta.max(4);
    let mut total = Complex64::new(0.0, 0.0);
    for (x, w) in nodes.iter().zip(weights.iter()) {
        let theta = x.acos();
        let d = wigner_d(jj, mu, lamp, theta)?;
        let vv = ffs.vertex_strengths(q2_of(p, *x));
        for iphi in 0..n_phi {
            let phi = 2.0 * PI * iphi as f64 / n_phi as f64;
            let amp = amplitude_at(cfg, p, (0.0, 0.0), (theta, phi), labels, &vv, xi);
            // The amplitude row goes like conj(D^J_{lam,lam'}) times an
            // extra exp(i lp2 phi) from the mirror convention of the second
            // particle (its azimuth is phi + pi); the matching probe weight
            // compensates both.
            let phase = (Complex64::new(0.0, -1.0)
                * ((mu.as_f64() - lamp.as_f64() - labels.lp2 as f64) * phi))
                .exp();
            total += *w * (2.0 * PI / n_phi as f64) * d * phase * amp;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::ALPHA_FINE_STRUCTURE;
    use crate::special::{legendre_p, legendre_q};
    use crate::spinor::{
        contract_scalar_scalar, contract_scalar_slash1, contract_slash2_scalar, contract_time_time,
        contract_vector_vector,
    };
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn channel_blocks() {
        assert_eq!(ChannelBlock::block_a(0).channels, vec![(0, 0)]);
        assert_eq!(ChannelBlock::block_a(2).channels, vec![(2, 0), (2, 1)]);
        assert_eq!(ChannelBlock::block_b(0).channels, vec![(1, 1)]);
        assert_eq!(ChannelBlock::block_b(3).channels, vec![(2, 1), (4, 1)]);
        assert!(ChannelBlock::from_name(1, "c").is_err());
        for block in [ChannelBlock::block_a(4), ChannelBlock::block_b(4)] {
            for &(l, s) in &block.channels {
                assert!(check_channel(block.j, l, s).is_ok());
            }
        }
    }

    #[test]
    fn g_coeff_reference_values() {
        // all helicities +1 at J=0 with Phi = delta_{l0}: single s=0 term
        let labels = HelicityLabels::new(1, 1, 1, 1);
        let phi = |l: u32| if l == 0 { 1.0 } else { 0.0 };
        let g = g_coeff(0, HalfInt::HALF, HalfInt::HALF, &labels, &phi);
        assert_abs_diff_eq!(g, 0.5, epsilon = 1e-14);
        // zero functional
        let z = |_: u32| 0.0;
        assert_eq!(
            g_coeff(2, HalfInt::HALF, HalfInt::THREE_HALVES, &labels, &z),
            0.0
        );
    }

    /// The five closed partial-wave structures, evaluated pointwise with
    /// Phi_l = P_l(x) (and x P_l(x) for the z slots), must reproduce
    /// d^J(beta) times the matrix-verified contraction at every angle.
    #[test]
    fn partial_wave_structures_match_contractions() {
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        for trial in 0..12 {
            let cfg = TwoBodyConfig::new(rng.gen_range(0.4..2.0), rng.gen_range(2.0..6.0), 1, 0.1)
                .unwrap();
            let p = KinPoint::new(rng.gen_range(0.05..3.0), rng.gen_range(0.05..3.0)).unwrap();
            let x: f64 = rng.gen_range(-0.95..0.95);
            let beta = x.acos();
            let j = trial % 4;
            let jj = HalfInt::from_int(j as i32);
            let pl = |l: u32| legendre_p(l, x).unwrap();
            let xpl = |l: u32| x * legendre_p(l, x).unwrap();
            let kf = [0.9, 0.3, 0.2, 0.6];
            let u0 = |l: u32| kf[0] * legendre_p(l, x).unwrap();
            let u1 = |l: u32| kf[1] * legendre_p(l, x).unwrap();
            let u2 = |l: u32| kf[2] * legendre_p(l, x).unwrap();
            let u3 = |l: u32| kf[3] * legendre_p(l, x).unwrap();
            for labels in HelicityLabels::all() {
                let lam = HalfInt::from_doubled(labels.lk1 - labels.lk2);
                let lamp = HalfInt::from_doubled(labels.lp1 - labels.lp2);
                if !jj.admits_projection(lam) || !jj.admits_projection(lamp) {
                    continue;
                }
                let d = wigner_d(jj, lam, lamp, beta).unwrap();
                let jw = jw_phase(&labels);
                let scale = 1e-11;

                let lhs = d * jw * contract_vector_vector(&cfg, &p, beta, &labels);
                let rhs = v_term_i(&cfg, j, &p, &labels, &pl);
                assert!(
                    (lhs - rhs).abs() < scale * lhs.abs().max(1.0),
                    "I j={j} {labels:?}: {lhs} vs {rhs}"
                );

                let lhs =
                    -d * jw * contract_scalar_slash1(&cfg, &p, beta, &labels) / (2.0 * cfg.m1);
                let rhs = v_term_ii(&cfg, j, &p, &labels, &pl, &xpl);
                assert!(
                    (lhs - rhs).abs() < scale * lhs.abs().max(1.0),
                    "II j={j} {labels:?}: {lhs} vs {rhs}"
                );

                let lhs =
                    -d * jw * contract_slash2_scalar(&cfg, &p, beta, &labels) / (2.0 * cfg.m2);
                let rhs = v_term_iii(&cfg, j, &p, &labels, &pl, &xpl);
                assert!(
                    (lhs - rhs).abs() < scale * lhs.abs().max(1.0),
                    "III j={j} {labels:?}: {lhs} vs {rhs}"
                );

                let lhs = d * jw * contract_scalar_scalar(&cfg, &p, beta, &labels)
                    / (4.0 * cfg.m1 * cfg.m2);
                let rhs = v_term_iv(&cfg, j, &p, &labels, &pl, &xpl);
                assert!(
                    (lhs - rhs).abs() < scale * lhs.abs().max(1.0),
                    "IV j={j} {labels:?}: {lhs} vs {rhs}"
                );

                let lhs = -d * jw * contract_time_time(&cfg, &p, beta, &labels, &kf);
                let rhs = v_term_b(&cfg, j, &p, &labels, [&u0, &u1, &u2, &u3]);
                assert!(
                    (lhs - rhs).abs() < scale * lhs.abs().max(1.0),
                    "B j={j} {labels:?}: {lhs} vs {rhs}"
                );
            }
        }
    }

    #[test]
    fn nonrelativistic_coulomb_limit() {
        let cfg = TwoBodyConfig::hydrogen();
        let ffs = FormFactorSet::point(cfg.alpha);
        let kb = cfg.bohr_momentum();
        let p = KinPoint::new(kb, 2.0 * kb).unwrap();
        let block = ChannelBlock::block_a(0);
        let v = kernel_element(&cfg, &block, 0, 0, &p, &ffs).unwrap();
        let coulomb =
            -(cfg.z as f64) * cfg.alpha / PI * legendre_q(0, y_of(&p)).unwrap() / (p.k * p.kp);
        assert!(
            (v - coulomb).abs() < 1e-4 * coulomb.abs(),
            "{v} vs {coulomb} (rel {})",
            (v / coulomb - 1.0).abs()
        );
        // and for a p-wave channel
        let block = ChannelBlock::block_a(1);
        let v = kernel_element(&cfg, &block, 0, 0, &p, &ffs).unwrap();
        let coulomb =
            -(cfg.z as f64) * cfg.alpha / PI * legendre_q(1, y_of(&p)).unwrap() / (p.k * p.kp);
        assert!(
            (v - coulomb).abs() < 1e-4 * coulomb.abs(),
            "{v} vs {coulomb}"
        );
    }

    #[test]
    fn nonrelativistic_channel_structure() {
        // at hydrogen momenta the kernel must be close to (ell, S)-diagonal:
        // singlet-triplet mixing and the block-B off-diagonal vanish with v/c
        let cfg = TwoBodyConfig::hydrogen();
        let ffs = FormFactorSet::point(cfg.alpha);
        let kb = cfg.bohr_momentum();
        let p = KinPoint::new(kb, 1.7 * kb).unwrap();
        for j in [1u32, 2] {
            let a = kernel_block_matrix(&cfg, &ChannelBlock::block_a(j), &p, &ffs).unwrap();
            let scale = a[0][0].abs();
            assert!(
                a[0][1].abs() < 1e-3 * scale,
                "J={j} mixing {} vs {scale}",
                a[0][1]
            );
            let b = kernel_block_matrix(&cfg, &ChannelBlock::block_b(j), &p, &ffs).unwrap();
            assert!(b[0][1].abs() < 1e-3 * b[0][0].abs());
            // diagonals approach the Coulomb partial waves of their ell
            for (i, &(l, _)) in ChannelBlock::block_b(j).channels.iter().enumerate() {
                let coulomb = -(cfg.z as f64) * cfg.alpha / PI * legendre_q(l, y_of(&p)).unwrap()
                    / (p.k * p.kp);
                assert!(
                    (b[i][i] - coulomb).abs() < 1e-3 * coulomb.abs(),
                    "J={j} l={l}: {} vs {coulomb}",
                    b[i][i]
                );
            }
        }
    }

    #[test]
    fn hermiticity_under_momentum_swap() {
        let cfg = TwoBodyConfig::new(1.0, 3.0, 1, 0.15).unwrap();
        let ffs = FormFactorSet::point(cfg.alpha);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for j in 0..=2u32 {
            for block in [ChannelBlock::block_a(j), ChannelBlock::block_b(j)] {
                for _ in 0..3 {
                    let (k, kp) = (rng.gen_range(0.1..2.0), rng.gen_range(0.1..2.0));
                    let fwd = KinPoint::new(k, kp).unwrap();
                    let rev = KinPoint::new(kp, k).unwrap();
                    for a in 0..block.len() {
                        for b in 0..block.len() {
                            let v1 = kernel_element(&cfg, &block, a, b, &fwd, &ffs).unwrap();
                            let v2 = kernel_element(&cfg, &block, b, a, &rev, &ffs).unwrap();
                            assert!(
                                (v1 - v2).abs() < 1e-10 * v1.abs().max(1e-8),
                                "J={j} ({a},{b}): {v1} vs {v2}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn cross_parity_elements_vanish() {
        let cfg = TwoBodyConfig::new(0.8, 2.5, 1, 0.2).unwrap();
        let ffs = FormFactorSet::point(cfg.alpha);
        let p = KinPoint::new(0.7, 1.3).unwrap();
        // opposite-parity channel pairs at the same J
        for (j, co, ci) in [
            (1u32, (1, 0), (0, 1)),
            (1, (1, 1), (2, 1)),
            (2, (2, 0), (1, 1)),
        ] {
            let v = kernel_element_channels(&cfg, j, co, ci, &p, &ffs).unwrap();
            assert!(v.abs() < 1e-12, "J={j} {co:?}<-{ci:?}: {v}");
        }
    }

    #[test]
    fn equal_mass_singlet_triplet_decoupling() {
        let cfg = TwoBodyConfig::equal_mass(1.0, 0.3);
        let ffs = FormFactorSet::point(cfg.alpha);
        let p = KinPoint::new(0.8, 1.9).unwrap();
        for j in [1u32, 2, 3] {
            let a = kernel_block_matrix(&cfg, &ChannelBlock::block_a(j), &p, &ffs).unwrap();
            assert!(
                a[0][1].abs() < 1e-12 * a[0][0].abs().max(1.0),
                "J={j}: {}",
                a[0][1]
            );
            assert!(a[1][0].abs() < 1e-12 * a[1][1].abs().max(1.0));
        }
    }

    #[test]
    fn kernel_matches_quadrature_reference() {
        let cfg = TwoBodyConfig::new(1.0, 2.0, 1, 0.2).unwrap();
        let ffs = FormFactorSet::point(cfg.alpha);
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for j in 0..=1u32 {
            for block in [ChannelBlock::block_a(j), ChannelBlock::block_b(j)] {
                for _ in 0..2 {
                    let p =
                        KinPoint::new(rng.gen_range(0.1..1.5), rng.gen_range(0.1..1.5)).unwrap();
                    for a in 0..block.len() {
                        for b in 0..block.len() {
                            let fast = kernel_element(&cfg, &block, a, b, &p, &ffs).unwrap();
                            let slow =
                                oracle_kernel_element(&cfg, &block, a, b, &p, &ffs, 1.0).unwrap();
                            assert!(
                                (fast - slow).abs() < 1e-9 * fast.abs().max(1e-10),
                                "J={j} ({a},{b}) k={} kp={}: {fast} vs {slow}",
                                p.k,
                                p.kp
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn kernel_matches_quadrature_with_structure() {
        // composite vertices and vacuum polarization: muonic-hydrogen scale
        let cfg = TwoBodyConfig::muonic_hydrogen();
        let ffs = FormFactorSet::from_names("dipole-proton,electron-anomalous,uehling", cfg.alpha)
            .unwrap();
        let p = KinPoint::new(0.4 * cfg.bohr_momentum(), 1.9 * cfg.bohr_momentum()).unwrap();
        for block in [ChannelBlock::block_a(1), ChannelBlock::block_b(1)] {
            for a in 0..block.len() {
                for b in 0..block.len() {
                    let fast = kernel_element(&cfg, &block, a, b, &p, &ffs).unwrap();
                    let slow = oracle_kernel_element(&cfg, &block, a, b, &p, &ffs, 1.0).unwrap();
                    assert!(
                        (fast - slow).abs() < 1e-8 * fast.abs().max(1e-12),
                        "({a},{b}): {fast} vs {slow}"
                    );
                }
            }
        }
    }

    #[test]
    fn probe_overlap_is_angular_momentum_diagonal() {
        let cfg = TwoBodyConfig::new(1.0, 2.0, 1, 0.2).unwrap();
        let ffs = FormFactorSet::point(cfg.alpha);
        let p = KinPoint::new(0.5, 1.1).unwrap();
        let labels = HelicityLabels::new(1, -1, 1, 1);
        let lam = (labels.lk1 - labels.lk2) / 2;
        // the probe at mu = lam extracts exactly the J' helicity element
        // reconstructed by the reduced 1D quadrature, for every J'
        let mut scale: f64 = 0.0;
        for jp in 1..=3u32 {
            let diag = angular_probe_overlap(&cfg, &p, jp, lam, &labels, &ffs, 1.0, 32).unwrap();
            let reduced = oracle_helicity_element(&cfg, jp, &p, &labels, &ffs, 1.0).unwrap()
                / jw_phase(&labels);
            assert!(
                (diag.re - reduced).abs() < 1e-6 * reduced.abs() && diag.im.abs() < 1e-9,
                "J'={jp}: {diag} vs {reduced}"
            );
            scale = scale.max(diag.norm());
        }
        // projections other than the incoming pair's lambda vanish
        for (jp, mu) in [(1u32, lam - 1), (1, lam + 1), (2, lam - 2), (2, lam + 1)] {
            if mu.unsigned_abs() > jp {
                continue;
            }
            let off = angular_probe_overlap(&cfg, &p, jp, mu, &labels, &ffs, 1.0, 32).unwrap();
            assert!(off.norm() < 1e-8 * scale, "J'={jp} mu={mu}: {off}");
        }
    }

    #[test]
    fn invalid_channels_are_rejected() {
        let cfg = TwoBodyConfig::hydrogen();
        let ffs = FormFactorSet::point(ALPHA_FINE_STRUCTURE);
        let p = KinPoint::new(1e-3, 2e-3).unwrap();
        assert!(kernel_element_channels(&cfg, 0, (2, 1), (0, 0), &p, &ffs).is_err());
        assert!(kernel_element_channels(&cfg, 1, (1, 2), (1, 0), &p, &ffs).is_err());
        let block = ChannelBlock::block_a(0);
        assert!(kernel_element(&cfg, &block, 3, 0, &p, &ffs).is_err());
    }
}
