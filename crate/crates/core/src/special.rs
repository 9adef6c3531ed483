//! Legendre P and Q, Wigner small-d matrices and SU(2) Clebsch-Gordan
//! coefficients.
//!
//! All angular momentum arguments are [`HalfInt`]; orbital indices that are
//! plain integers take `u32`. Supported up to l, j = 50.

use crate::error::{Error, Result};
use crate::halfint::HalfInt;
use std::sync::OnceLock;

pub const MAX_ELL: u32 = 50;

fn ln_factorials() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = vec![0.0f64; 301];
        for n in 1..t.len() {
            t[n] = t[n - 1] + (n as f64).ln();
        }
        t
    })
}

#[inline]
fn ln_fact(n: i32) -> f64 {
    ln_factorials()[n as usize]
}

/// Legendre polynomial P_l(x) by upward Bonnet recurrence.
pub fn legendre_p(ell: u32, x: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::domain(format!("legendre_p: |x| > 1 (x = {x})")));
    }
    Ok(legendre_p_unchecked(ell, x))
}

pub(crate) fn legendre_p_unchecked(ell: u32, x: f64) -> f64 {
    let mut prev = 1.0;
    if ell == 0 {
        return prev;
    }
    let mut cur = x;
    for n in 1..ell {
        let n = n as f64;
        let next = ((2.0 * n + 1.0) * x * cur - n * prev) / (n + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// All of P_0(x) .. P_lmax(x) in one pass.
pub fn legendre_p_all(lmax: u32, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(lmax as usize + 1);
    out.push(1.0);
    if lmax == 0 {
        return out;
    }
    out.push(x);
    for n in 1..lmax {
        let nf = n as f64;
        let next = ((2.0 * nf + 1.0) * x * out[n as usize] - nf * out[n as usize - 1]) / (nf + 1.0);
        out.push(next);
    }
    out
}

fn legendre_q0(y: f64) -> f64 {
    // ln((y+1)/(y-1)) written with ln_1p so the large-y tail keeps digits.
    0.5 * (2.0 / (y - 1.0)).ln_1p()
}

/// Legendre function of the second kind Q_l(y) for y > 1.
///
/// Upward recurrence is only used where the growing-solution contamination
/// stays below ~1e-11; otherwise Q is generated by downward (Miller)
/// recurrence normalized on Q_0.
pub fn legendre_q(ell: u32, y: f64) -> Result<f64> {
    if y <= 1.0 {
        return Err(Error::domain(format!(
            "legendre_q: y must be > 1 (y = {y})"
        )));
    }
    if ell > MAX_ELL {
        return Err(Error::domain(format!(
            "legendre_q: l = {ell} exceeds supported {MAX_ELL}"
        )));
    }
    Ok(legendre_q_all(ell, y)?[ell as usize])
}

/// Q_0(y) .. Q_lmax(y) for y > 1.
pub fn legendre_q_all(lmax: u32, y: f64) -> Result<Vec<f64>> {
    if y <= 1.0 {
        return Err(Error::domain(format!(
            "legendre_q: y must be > 1 (y = {y})"
        )));
    }
    if lmax > MAX_ELL {
        return Err(Error::domain(format!(
            "legendre_q: l = {lmax} exceeds supported {MAX_ELL}"
        )));
    }
    let q0 = legendre_q0(y);
    if lmax == 0 {
        return Ok(vec![q0]);
    }
    let q1 = y * q0 - 1.0;
    if lmax == 1 {
        return Ok(vec![q0, q1]);
    }

    // xi = y + sqrt(y^2-1); upward error grows like xi^(2l).
    let ln_xi = (y + (y * y - 1.0).sqrt()).ln();
    if 2.0 * (lmax as f64) * ln_xi < 11.5 {
        // Upward Bonnet recurrence, same coefficients as for P.
        let mut out = Vec::with_capacity(lmax as usize + 1);
        out.push(q0);
        out.push(q1);
        for n in 1..lmax {
            let nf = n as f64;
            let next =
                ((2.0 * nf + 1.0) * y * out[n as usize] - nf * out[n as usize - 1]) / (nf + 1.0);
            out.push(next);
        }
        Ok(out)
    } else {
        // Miller: seed far above lmax, recurse downward (Q is dominant
        // there), then scale so index 0 matches the closed-form Q_0.
        let pad = ((21.0 / ln_xi).ceil() as u32).clamp(10, 400);
        let top = lmax + pad;
        let mut vals = vec![0.0f64; top as usize + 2];
        vals[top as usize + 1] = 0.0;
        vals[top as usize] = 1e-280;
        for n in (1..=top).rev() {
            let nf = n as f64;
            let v =
                ((2.0 * nf + 1.0) * y * vals[n as usize] - (nf + 1.0) * vals[n as usize + 1]) / nf;
            vals[n as usize - 1] = v;
            if v.abs() > 1e260 {
                let scale = 1e-260;
                for w in vals[n as usize - 1..].iter_mut() {
                    *w *= scale;
                }
            }
        }
        let scale = q0 / vals[0];
        let mut out = Vec::with_capacity(lmax as usize + 1);
        for v in vals.iter().take(lmax as usize + 1) {
            out.push(v * scale);
        }
        Ok(out)
    }
}

/// dQ_l/dy via (y^2-1) Q'_l = l (y Q_l - Q_{l-1}); Q'_0 = -1/(y^2-1).
pub fn legendre_q_prime(ell: u32, y: f64) -> Result<f64> {
    if ell == 0 {
        if y <= 1.0 {
            return Err(Error::domain("legendre_q_prime: y must be > 1".to_string()));
        }
        return Ok(-1.0 / (y * y - 1.0));
    }
    let q = legendre_q_all(ell, y)?;
    let lf = ell as f64;
    Ok(lf * (y * q[ell as usize] - q[ell as usize - 1]) / (y * y - 1.0))
}

/// Wigner small-d matrix element d^j_{m,mp}(beta) in the z-y-z convention
/// where D^j_{m,mp}(alpha,beta,gamma) = e^{-i m alpha} d^j_{m,mp}(beta) e^{-i mp gamma}.
pub fn wigner_d(j: HalfInt, m: HalfInt, mp: HalfInt, beta: f64) -> Result<f64> {
    if j.doubled() < 0 || j.doubled() > 2 * MAX_ELL as i32 {
        return Err(Error::domain(format!("wigner_d: j = {j} out of range")));
    }
    if !j.admits_projection(m) || !j.admits_projection(mp) {
        return Err(Error::domain(format!(
            "wigner_d: invalid (j,m,mp) = ({j},{m},{mp})"
        )));
    }
    // All in doubled units; every factorial argument below is an integer.
    let (tj, tm, tmp) = (j.doubled(), m.doubled(), mp.doubled());
    let jm = (tj + tm) / 2;
    let jmm = (tj - tm) / 2;
    let jmp = (tj + tmp) / 2;
    let jmmp = (tj - tmp) / 2;

    let ln_pref = 0.5 * (ln_fact(jm) + ln_fact(jmm) + ln_fact(jmp) + ln_fact(jmmp));
    let (c, s) = ((beta / 2.0).cos(), (beta / 2.0).sin());

    let s_min = 0.max((tmp - tm) / 2);
    let s_max = jmp.min(jmm);
    let mut acc = 0.0f64;
    for k in s_min..=s_max {
        let a = jmp - k; // (j + mp - s)!
        let b = k; // s!
        let cc = (tm - tmp) / 2 + k; // (m - mp + s)!
        let d = jmm - k; // (j - m - s)!
        let cos_pow = a + d; // 2j + mp - m - 2s
        let sin_pow = cc + b; // m - mp + 2s
        let ln_term = ln_pref - ln_fact(a) - ln_fact(b) - ln_fact(cc) - ln_fact(d);
        let sign = if (cc % 2).abs() == 1 { -1.0 } else { 1.0 };
        let mut term = sign * ln_term.exp();
        term *= c.powi(cos_pow) * s.powi(sin_pow);
        acc += term;
    }
    Ok(acc)
}

/// Clebsch-Gordan coefficient <j1 m1 j2 m2 | J M> in the Condon-Shortley
/// convention. Selection-rule violations return 0.
pub fn clebsch_gordan(
    j1: HalfInt,
    m1: HalfInt,
    j2: HalfInt,
    m2: HalfInt,
    j: HalfInt,
    m: HalfInt,
) -> f64 {
    if m != m1 + m2 {
        return 0.0;
    }
    if !j.couples(j1, j2) {
        return 0.0;
    }
    if !j1.admits_projection(m1) || !j2.admits_projection(m2) || !j.admits_projection(m) {
        return 0.0;
    }
    let (tj1, tm1, tj2, tm2, tj, tm) = (
        j1.doubled(),
        m1.doubled(),
        j2.doubled(),
        m2.doubled(),
        j.doubled(),
        m.doubled(),
    );

    // Racah's closed formula, all factorial arguments in doubled/2 units.
    let f = |x: i32| -> f64 { ln_fact(x / 2) };
    let ln_delta =
        0.5 * (f(tj1 + tj2 - tj) + f(tj1 - tj2 + tj) + f(-tj1 + tj2 + tj) - f(tj1 + tj2 + tj + 2));
    let ln_pref = 0.5
        * (((tj + 1) as f64).ln()
            + f(tj1 + tm1)
            + f(tj1 - tm1)
            + f(tj2 + tm2)
            + f(tj2 - tm2)
            + f(tj + tm)
            + f(tj - tm));

    let k_min = 0.max((tj2 - tj - tm1).max(tj1 + tm2 - tj)) / 2;
    let k_max = ((tj1 + tj2 - tj).min(tj1 - tm1).min(tj2 + tm2)) / 2;
    let mut acc = 0.0f64;
    for k in k_min..=k_max {
        let tk = 2 * k;
        let ln_den = f(tk)
            + f(tj1 + tj2 - tj - tk)
            + f(tj1 - tm1 - tk)
            + f(tj2 + tm2 - tk)
            + f(tj - tj2 + tm1 + tk)
            + f(tj - tj1 - tm2 + tk);
        let sign = if k % 2 == 1 { -1.0 } else { 1.0 };
        acc += sign * (ln_delta + ln_pref - ln_den).exp();
    }
    acc
}
