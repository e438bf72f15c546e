//! Error probabilities of conventional optical receivers, for comparison
//! against the optimal measurements: photon-number-resolving direct
//! detection, homodyne detection, and a click-then-Dolinar switched
//! receiver for the two-amplitude constellation.

use libm::{erf, erfc};

use crate::error::{Error, Result};
use crate::util::binomial;

const SIMPSON_MAX_DEPTH: u32 = 60;

fn check_nbar(nbar: f64) -> Result<()> {
    if nbar.is_nan() || nbar < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "mean photon number must be nonnegative, got {nbar}"
        )));
    }
    Ok(())
}

fn check_n(n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::InvalidParameter(format!(
            "need at least {min} codewords, got {n}"
        )));
    }
    Ok(())
}

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
        h / 6.0 * (fa + 4.0 * fm + fb)
    }
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64> {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol {
            return Ok(left + right + delta / 15.0);
        }
        if depth == 0 {
            return Err(Error::QuadratureNonConvergence);
        }
        let l = recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
        let r = recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
        Ok(l + r)
    }

    if !(b > a) {
        return Ok(0.0);
    }
    let fa = f(a);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let fb = f(b);
    let whole = simpson(fa, fm, fb, b - a);
    recurse(f, a, b, fa, fm, fb, whole, tol, SIMPSON_MAX_DEPTH)
}

/// Direct detection of pulse position modulation with a photon-number
/// resolving detector: an error happens only when the pulse slot stays
/// dark and the guess among all N words misses.
pub fn ppm_pnr_pe(n: usize, nbar: f64) -> Result<f64> {
    check_n(n, 2)?;
    check_nbar(nbar)?;
    let nf = n as f64;
    Ok((nf - 1.0) / nf * (-nbar).exp())
}

/// Direct detection of two-pulse position modulation, `nbar` photons per
/// pulse: both slots click, or one does and the guess covers the other,
/// or neither does and the guess runs over all pairs.
pub fn two_pulse_pnr_ps(n: usize, nbar: f64) -> Result<f64> {
    check_n(n, 4)?;
    check_nbar(nbar)?;
    let k2 = (-nbar).exp();
    let hit = 1.0 - k2;
    let nf = n as f64;
    Ok(hit * hit + 2.0 * hit * k2 / (nf - 1.0) + k2 * k2 / binomial(n, 2) as f64)
}

/// Homodyne receiver for the two-amplitude pulse position constellation:
/// pick the slot with the largest quadrature magnitude, then read the sign.
/// The slot statistic is a folded normal with mean `sqrt(nbar)` and
/// standard deviation 1/2 against N-1 zero-mean competitors.
pub fn pcppm_homodyne_ps(n: usize, nbar: f64) -> Result<f64> {
    check_n(n, 2)?;
    check_nbar(nbar)?;
    if nbar.is_infinite() {
        return Ok(1.0);
    }
    let mu = nbar.sqrt();
    let sigma = 0.5;
    let norm = 1.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt());
    let density = move |x: f64| {
        let up = (x - mu) / sigma;
        let dn = (x + mu) / sigma;
        norm * ((-0.5 * up * up).exp() + (-0.5 * dn * dn).exp())
    };
    let noise_cdf = move |x: f64| erf(x / (sigma * std::f64::consts::SQRT_2));
    let integrand = move |x: f64| density(x) * noise_cdf(x).powi(n as i32 - 1);

    // the integrand is negligible past nine standard deviations
    let upper = mu + 9.0 * sigma;
    let slot = adaptive_simpson(&integrand, 0.0, upper, 1e-10)?;
    let phase = 1.0 - 0.5 * erfc((2.0 * nbar).sqrt());
    Ok((slot * phase).clamp(0.0, 1.0))
}

/// Structured receiver for the two-amplitude constellation: photon counting
/// over the slots, switched into a binary Dolinar stage once the pulse slot
/// is found. `p0 = exp(-nbar)` is the no-click probability.
///
/// The integral term carries a 1/2 that the source expression drops;
/// without it the value goes negative for large `nbar` instead of decaying
/// like `exp(-nbar)`.
pub fn pcppm_structured_pe(n: usize, nbar: f64) -> Result<f64> {
    check_n(n, 2)?;
    check_nbar(nbar)?;
    let p0 = (-nbar).exp();
    let nf = n as f64;
    if p0 == 0.0 {
        return Ok(0.0);
    }
    // substitute x = p0 + t^2 to remove the square-root endpoint singularity
    let integrand = move |t: f64| {
        let x = p0 + t * t;
        let r = p0 / x;
        let r4 = r * r * r * r;
        2.0 * t * (1.0 - r4).max(0.0).sqrt()
    };
    let tmax = (1.0 - p0).max(0.0).sqrt();
    let integral = adaptive_simpson(&integrand, 0.0, tmax, 1e-12)?;
    let pe = p0 * (2.0 * nf - 1.0) / (2.0 * nf) + 0.5 * (1.0 - p0) - 0.5 * integral;
    Ok(pe.clamp(0.0, 1.0))
}

/// Helstrom error probability for distinguishing two opposite-phase
/// coherent states of `nb` mean photons each.
pub fn dolinar_binary_pe(nb: f64) -> Result<f64> {
    check_nbar(nb)?;
    Ok(0.5 * (1.0 - (1.0 - (-4.0 * nb).exp()).sqrt()))
}
