//! Stokes multipliers of `ψ″ = V(λ)ψ` by direct integration in the complex
//! plane. Independent of the WKB machinery: used as an oracle.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::CubicPotential;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonodromyOptions {
    /// Matching radius; `None` picks `max(8, 4(1 + max|λᵢ|))`.
    pub radius: Option<f64>,
    /// Largest accepted truncation error of the asymptotic series at the
    /// matching point, relative.
    pub series_tol: f64,
    pub taylor_order: usize,
    /// Step length in units of the local wavelength `1/(1 + √|V|)`.
    pub step_scale: f64,
}

impl Default for MonodromyOptions {
    fn default() -> Self {
        Self {
            radius: None,
            series_tol: 1e-13,
            taylor_order: 40,
            step_scale: 4.0,
        }
    }
}

pub fn default_radius(p: &CubicPotential) -> f64 {
    let m = p.turning_points(1e-8).max_modulus();
    f64::max(8.0, 4.0 * (1.0 + m))
}

/// `(ψ, ψ′) = e^{log_scale} (psi, dpsi)`; keeps dominant solutions
/// representable far beyond the range of `f64`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledPair {
    pub log_scale: Complex64,
    pub psi: Complex64,
    pub dpsi: Complex64,
}

impl ScaledPair {
    fn normalized(mut self) -> Self {
        let n = self.psi.norm() + self.dpsi.norm();
        if n > 0.0 && n.is_finite() {
            self.psi /= n;
            self.dpsi /= n;
            self.log_scale += n.ln();
        }
        self
    }

    pub fn log_abs(&self) -> f64 {
        self.log_scale.re + self.psi.norm().ln()
    }
}

/// Wronskian `f g′ − f′ g` as `(log scale, mantissa)`.
pub fn wronskian(f: &ScaledPair, g: &ScaledPair) -> (Complex64, Complex64) {
    (f.log_scale + g.log_scale, f.psi * g.dpsi - f.dpsi * g.psi)
}

/// One Taylor step of `ψ″ = Vψ` from `z0` by `h`.
fn taylor_step(p: &CubicPotential, z0: Complex64, h: Complex64, y: [Complex64; 2], order: usize) -> Result<[Complex64; 2]> {
    let v = p.taylor(z0);
    let mut c = vec![Complex64::new(0.0, 0.0); order + 1];
    c[0] = y[0];
    c[1] = y[1];
    for j in 0..order - 1 {
        let mut s = v[0] * c[j];
        for (i, vi) in v.iter().enumerate().skip(1) {
            if j >= i {
                s += vi * c[j - i];
            }
        }
        c[j + 2] = s / ((j + 2) * (j + 1)) as f64;
    }
    let mut val = Complex64::new(0.0, 0.0);
    let mut der = Complex64::new(0.0, 0.0);
    let mut hp = Complex64::new(1.0, 0.0);
    for (j, cj) in c.iter().enumerate() {
        if j >= 1 {
            der += *cj * (j as f64) * (hp / h);
        }
        val += cj * hp;
        hp *= h;
    }
    let scale = y[0].norm() + y[1].norm() * h.norm();
    let tail = (c[order] * hp / h).norm() + (c[order - 1] * hp / (h * h)).norm();
    if !(val.is_finite() && der.is_finite()) || tail > 1e-15 * (scale + val.norm()) {
        return Err(Error::Integration(format!("Taylor step of length {:.3e} did not converge", h.norm())));
    }
    Ok([val, der])
}

/// Propagates along the straight segment `from → to`; calls `visit` after
/// every step.
fn propagate(
    p: &CubicPotential,
    from: Complex64,
    to: Complex64,
    start: ScaledPair,
    opts: &MonodromyOptions,
    mut visit: impl FnMut(Complex64, &ScaledPair),
) -> Result<ScaledPair> {
    let mut z = from;
    let mut y = start.normalized();
    let len = (to - from).norm();
    if len == 0.0 {
        return Ok(y);
    }
    let dir = (to - from) / len;
    let mut done = 0.0;
    while done < len {
        let mut h = opts.step_scale / (1.0 + p.value(z).norm().sqrt());
        if done + h > len {
            h = len - done;
        }
        let mut tries = 0;
        let next = loop {
            match taylor_step(p, z, dir * h, [y.psi, y.dpsi], opts.taylor_order) {
                Ok(r) => break r,
                Err(e) => {
                    tries += 1;
                    h *= 0.5;
                    if tries > 30 || h < 1e-12 * (1.0 + len) {
                        return Err(e);
                    }
                }
            }
        };
        z = if done + h >= len { to } else { z + dir * h };
        done += h;
        y = ScaledPair {
            log_scale: y.log_scale,
            psi: next[0],
            dpsi: next[1],
        }
        .normalized();
        visit(z, &y);
    }
    Ok(y)
}

/// Coefficients `e_n` of `ψ′/ψ = Σ e_n t^{3−n}`, `t² = λ`, for the solution
/// recessive where `t⁵ > 0`.
pub fn riccati_coefficients(p: &CubicPotential, n: usize) -> Vec<Complex64> {
    let vn = |k: usize| -> Complex64 {
        match k {
            0 => Complex64::new(4.0, 0.0),
            4 => -2.0 * p.a,
            6 => -28.0 * p.b,
            _ => Complex64::new(0.0, 0.0),
        }
    };
    let mut e = vec![Complex64::new(-2.0, 0.0)];
    for k in 1..n {
        let mut s = vn(k);
        for i in 1..k {
            s -= e[i] * e[k - i];
        }
        if k >= 5 {
            s -= e[k - 5] * ((8.0 - k as f64) / 2.0);
        }
        e.push(-s / 4.0);
    }
    e
}

/// Asymptotic `(log ψ_k, ψ_k′/ψ_k, truncation estimate)` at `λ`, with
/// `λ^{1/2} = (−1)^k √λ` (principal root) and the principal `λ^{−3/4}`.
fn asymptotic(p: &CubicPotential, k: i32, l: Complex64) -> (Complex64, Complex64, f64) {
    let e = riccati_coefficients(p, 120);
    let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let t = sign * l.sqrt();
    let terms: Vec<(Complex64, Complex64)> = e
        .iter()
        .enumerate()
        .map(|(n, en)| {
            if n == 5 {
                (Complex64::new(0.0, 0.0), en / l)
            } else {
                (
                    2.0 * en * t.powi(5 - n as i32) / (5.0 - n as f64),
                    en * t.powi(3 - n as i32),
                )
            }
        })
        .collect();
    let y_scale = (e[0] * t.powi(3)).norm();
    let size = |n: usize| terms[n].0.norm() + terms[n].1.norm() / y_scale;
    // optimal truncation of the divergent series: stop at the smallest term
    let mut cut = terms.len() - 1;
    let mut err = f64::INFINITY;
    for n in 7..terms.len() {
        let s = size(n);
        if s != 0.0 && s < err {
            err = s;
            cut = n;
        }
    }
    let mut log = -0.75 * l.ln();
    if k.rem_euclid(2) == 1 {
        log += Complex64::new(0.0, PI);
    }
    let mut y = Complex64::new(0.0, 0.0);
    for (tl, ty) in &terms[..cut] {
        log += tl;
        y += ty;
    }
    (log, y, err)
}

/// Solution recessive in `Σ_k` (centred on `arg λ = 2πk/5`), sampled on the
/// arc `|λ| = R` and carried to the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecessiveSolution {
    pub sector: i32,
    pub radius: f64,
    pub start: Complex64,
    /// Value at the matching point `R e^{2πik/5}`.
    pub initial: ScaledPair,
    pub series_error: f64,
    pub at_origin: ScaledPair,
    /// `(λ, ψ)` on the arc, ordered by argument from `2πk/5 − 4π/5` to
    /// `2πk/5 + 4π/5`.
    pub arc: Vec<(Complex64, ScaledPair)>,
}

fn initial_value(p: &CubicPotential, k: i32, r: f64, opts: &MonodromyOptions) -> Result<(Complex64, ScaledPair, f64)> {
    let start = Complex64::from_polar(r, 2.0 * PI * k as f64 / 5.0);
    let (log, y, err) = asymptotic(p, k, start);
    if err > opts.series_tol {
        return Err(Error::RadiusTooSmall {
            radius: r,
            tail: err,
            tol: opts.series_tol,
        });
    }
    Ok((
        start,
        ScaledPair {
            log_scale: log,
            psi: Complex64::new(1.0, 0.0),
            dpsi: y,
        },
        err,
    ))
}

fn origin_value(p: &CubicPotential, k: i32, r: f64, opts: &MonodromyOptions) -> Result<ScaledPair> {
    let (start, init, _) = initial_value(p, k, r, opts)?;
    propagate(p, start, Complex64::new(0.0, 0.0), init, opts, |_, _| {})
}

pub fn recessive_solution(p: &CubicPotential, k: i32, r: f64, opts: &MonodromyOptions) -> Result<RecessiveSolution> {
    let (start, init, err) = initial_value(p, k, r, opts)?;
    let at_origin = propagate(p, start, Complex64::new(0.0, 0.0), init, opts, |_, _| {})?;
    let theta = 2.0 * PI * k as f64 / 5.0;
    let pieces = 16;
    let mut arc = vec![(start, init)];
    for dir in [-1.0, 1.0] {
        let mut y = init;
        let mut z = start;
        let mut side = vec![];
        for j in 1..=pieces {
            let next = Complex64::from_polar(r, theta + dir * 0.8 * PI * j as f64 / pieces as f64);
            y = propagate(p, z, next, y, opts, |_, _| {})?;
            z = next;
            side.push((z, y));
        }
        if dir < 0.0 {
            side.reverse();
            side.extend(arc);
            arc = side;
        } else {
            arc.extend(side);
        }
    }
    Ok(RecessiveSolution {
        sector: k,
        radius: r,
        start,
        initial: init,
        series_error: err,
        at_origin,
        arc,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StokesMultipliers {
    /// `σ_k` at index `k mod 5`.
    pub sigma: [Complex64; 5],
    /// `1 + σ_kσ_{k+1} + iσ_{k+3}` at index `k mod 5`.
    pub admissibility_residuals: [Complex64; 5],
    pub radius: f64,
}

impl StokesMultipliers {
    pub fn get(&self, k: i32) -> Complex64 {
        self.sigma[k.rem_euclid(5) as usize]
    }

    pub fn from_sigma(sigma: [Complex64; 5], radius: f64) -> Self {
        let i = Complex64::i();
        let s = |k: i32| sigma[k.rem_euclid(5) as usize];
        let mut res = [Complex64::new(0.0, 0.0); 5];
        for k in 0..5 {
            res[k as usize] = 1.0 + s(k) * s(k + 1) + i * s(k + 3);
        }
        Self {
            sigma,
            admissibility_residuals: res,
            radius,
        }
    }

    pub fn max_admissibility_residual(&self) -> f64 {
        self.admissibility_residuals.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Residuals divided by `1 + |σ_kσ_{k+1}| + |σ_{k+3}|`, the size of the
    /// terms that cancel; this is what floating point can resolve when the
    /// multipliers are large.
    pub fn max_relative_admissibility_residual(&self) -> f64 {
        (0..5)
            .map(|k| {
                let size = 1.0 + (self.get(k) * self.get(k + 1)).norm() + self.get(k + 3).norm();
                self.admissibility_residuals[k as usize].norm() / size
            })
            .fold(0.0, f64::max)
    }
}

/// `σ_k = W(ψ_{k−1}, ψ_{k+1}) / W(ψ_k, ψ_{k+1})` from solutions known at one
/// common point, indexed `k = −2..=2` as `psi[k + 2]`.
fn multipliers_from(psi: &[ScaledPair; 5], radius: f64) -> Result<StokesMultipliers> {
    let get = |k: i32| -> ScaledPair {
        if k == -3 {
            // continuing ψ₂ once around infinity
            let mut s = psi[4];
            s.log_scale += Complex64::new(0.0, PI / 2.0);
            s
        } else {
            psi[(k.rem_euclid(5) as usize + 2) % 5]
        }
    };
    let mut sigma = [Complex64::new(0.0, 0.0); 5];
    for k in -2..=2 {
        let (ln, wn) = wronskian(&get(k - 1), &get(k + 1));
        let (ld, wd) = wronskian(&get(k), &get(k + 1));
        if wd.norm() == 0.0 || !wd.is_finite() {
            return Err(Error::Integration(format!("vanishing Wronskian W(ψ_{k}, ψ_{})", k + 1)));
        }
        sigma[k.rem_euclid(5) as usize] = (ln - ld).exp() * wn / wd;
    }
    Ok(StokesMultipliers::from_sigma(sigma, radius))
}

fn psi_index_check() {
    // psi[k + 2] holds ψ_k; `get` above maps k mod 5 to that slot
    debug_assert_eq!((0i32.rem_euclid(5) as usize + 2) % 5, 2);
    debug_assert_eq!(((-2i32).rem_euclid(5) as usize + 2) % 5, 0);
}

fn solutions_at_origin(p: &CubicPotential, r: f64, opts: &MonodromyOptions) -> Result<[ScaledPair; 5]> {
    psi_index_check();
    let v: Vec<ScaledPair> = (-2..=2)
        .into_par_iter()
        .map(|k| origin_value(p, k, r, opts))
        .collect::<Result<_>>()?;
    Ok([v[0], v[1], v[2], v[3], v[4]])
}

/// `ψ_k` at the origin (key −1) and on `|λ| = R` at the angles `πj/5`
/// (key `j`), each with the largest `log|ψ|` met on the way. Rounding
/// errors in a value are relative to that peak, not to the value itself.
fn tracked_values(p: &CubicPotential, k: i32, r: f64, opts: &MonodromyOptions) -> Result<Vec<(i32, ScaledPair, f64)>> {
    let (start, init, _) = initial_value(p, k, r, opts)?;
    let peak0 = init.normalized().log_scale.re;
    let mut out = vec![((2 * k).rem_euclid(10), init.normalized(), peak0)];
    let mut peak = peak0;
    let y = propagate(p, start, Complex64::new(0.0, 0.0), init, opts, |_, y| peak = peak.max(y.log_scale.re))?;
    out.push((-1, y, peak));
    let theta = 2.0 * PI * k as f64 / 5.0;
    for dir in [-1.0, 1.0] {
        let (mut y, mut z, mut peak) = (init, start, peak0);
        for m in 1..=4 {
            for q in 1..=4 {
                let next = Complex64::from_polar(r, theta + dir * PI / 5.0 * (m as f64 - 1.0 + q as f64 / 4.0));
                y = propagate(p, z, next, y, opts, |_, y| peak = peak.max(y.log_scale.re))?;
                z = next;
            }
            out.push(((2 * k + dir as i32 * m).rem_euclid(10), y, peak));
        }
    }
    Ok(out)
}

/// Wronskian of `f` and `g` at the shared point where the rounding error,
/// judged by the peaks, is smallest.
fn best_wronskian(f: &[(i32, ScaledPair, f64)], g: &[(i32, ScaledPair, f64)]) -> Option<(Complex64, Complex64)> {
    let mut best: Option<(f64, (Complex64, Complex64))> = None;
    for (kf, yf, mf) in f {
        for (kg, yg, mg) in g {
            if kf != kg {
                continue;
            }
            let err = f64::max(mf + yg.log_scale.re, yf.log_scale.re + mg);
            if best.is_none_or(|(e, _)| err < e) {
                best = Some((err, wronskian(yf, yg)));
            }
        }
    }
    best.map(|(_, w)| w)
}

/// Multipliers with every Wronskian taken at its best conditioned point
/// among the origin and ten points on the matching circle.
pub fn stokes_multipliers(p: &CubicPotential, opts: &MonodromyOptions) -> Result<StokesMultipliers> {
    let r = opts.radius.unwrap_or_else(|| default_radius(p));
    let vals: Vec<Vec<(i32, ScaledPair, f64)>> = (-2..=2)
        .into_par_iter()
        .map(|k| tracked_values(p, k, r, opts))
        .collect::<Result<_>>()?;
    let get = |k: i32| -> Vec<(i32, ScaledPair, f64)> {
        let mut v = vals[(k + 5 + 2).rem_euclid(5) as usize].clone();
        if k == -3 {
            // ψ₋₃ = iψ₂
            for e in &mut v {
                e.1.log_scale += Complex64::new(0.0, PI / 2.0);
            }
        }
        v
    };
    let mut sigma = [Complex64::new(0.0, 0.0); 5];
    for k in -2..=2 {
        let (ln, wn) = best_wronskian(&get(k - 1), &get(k + 1)).expect("neighbouring arcs overlap");
        let (ld, wd) = best_wronskian(&get(k), &get(k + 1)).expect("neighbouring arcs overlap");
        if wd.norm() == 0.0 || !wd.is_finite() {
            return Err(Error::Integration(format!("vanishing Wronskian W(ψ_{k}, ψ_{})", k + 1)));
        }
        sigma[k.rem_euclid(5) as usize] = (ln - ld).exp() * wn / wd;
    }
    Ok(StokesMultipliers::from_sigma(sigma, r))
}

/// Same, with the Wronskians evaluated at `point` instead of the origin.
pub fn stokes_multipliers_at(p: &CubicPotential, point: Complex64, opts: &MonodromyOptions) -> Result<StokesMultipliers> {
    let r = opts.radius.unwrap_or_else(|| default_radius(p));
    let at0 = solutions_at_origin(p, r, opts)?;
    let mut moved = at0;
    for (m, y) in moved.iter_mut().zip(at0.iter()) {
        *m = propagate(p, Complex64::new(0.0, 0.0), point, *y, opts, |_, _| {})?;
    }
    multipliers_from(&moved, r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TritronqueeTest {
    pub passed: bool,
    /// `max(|σ₂|, |σ₋₂|)`.
    pub margin: f64,
}

pub fn tritronquee_test(s: &StokesMultipliers, threshold: f64) -> TritronqueeTest {
    let margin = s.get(2).norm().max(s.get(-2).norm());
    TritronqueeTest {
        passed: margin <= threshold,
        margin,
    }
}

/// Quintuple with `σ₂ = σ₋₂ = 0`; the relations then force `σ₀ = σ₁ = σ₋₁ = i`.
pub fn tritronquee_multipliers() -> StokesMultipliers {
    let i = Complex64::i();
    let z = Complex64::new(0.0, 0.0);
    StokesMultipliers::from_sigma([i, i, z, z, i], f64::INFINITY)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonodromyReport {
    pub a: Complex64,
    pub b: Complex64,
    pub radius: f64,
    /// `σ_k` for `k = −2..=2`.
    pub sigma: [Complex64; 5],
    pub admissibility_residuals: [Complex64; 5],
    pub tritronquee_margin: f64,
}

pub fn report(p: &CubicPotential, s: &StokesMultipliers) -> MonodromyReport {
    let order = |v: &[Complex64; 5]| [-2, -1, 0, 1, 2].map(|k: i32| v[k.rem_euclid(5) as usize]);
    MonodromyReport {
        a: p.a,
        b: p.b,
        radius: s.radius,
        sigma: order(&s.sigma),
        admissibility_residuals: order(&s.admissibility_residuals),
        tritronquee_margin: tritronquee_test(s, 0.0).margin,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn riccati_leading_terms() {
        let p = CubicPotential::new(c(1.5, -0.5), c(0.2, 0.1));
        let e = riccati_coefficients(&p, 8);
        assert_eq!(e[0], c(-2.0, 0.0));
        assert!(e[1].norm() + e[2].norm() + e[3].norm() == 0.0);
        assert!((e[4] - p.a / 2.0).norm() < 1e-15);
        assert!((e[5] + 0.75).norm() < 1e-15);
    }

    #[test]
    fn taylor_step_matches_exponential() {
        // V = 4λ³ − 2aλ − 28b with a = 0 and b = −1/7 gives V ≡ 4 near 0 only
        // to leading order; use a tiny step against the local exponential
        let p = CubicPotential::real(0.0, -1.0 / 7.0);
        let y = taylor_step(&p, c(0.0, 0.0), c(1e-3, 0.0), [c(1.0, 0.0), c(-2.0, 0.0)], 30).unwrap();
        assert!((y[0] - (-2e-3f64).exp()).norm() < 1e-8);
    }

    #[test]
    fn pure_cubic_multipliers_are_equal() {
        let p = CubicPotential::real(0.0, 0.0);
        let s = stokes_multipliers(&p, &MonodromyOptions::default()).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        for k in 0..5 {
            assert!((s.get(k) - c(0.0, -phi)).norm() < 1e-8, "σ_{k} = {}", s.get(k));
        }
        assert!(s.max_admissibility_residual() < 1e-8);
    }

    #[test]
    fn admissible_for_generic_potential() {
        let p = CubicPotential::new(c(1.2, -0.7), c(-0.4, 0.9));
        let s = stokes_multipliers(&p, &MonodromyOptions::default()).unwrap();
        assert!(s.max_relative_admissibility_residual() < 1e-8, "{:?}", s);
        let s2 = stokes_multipliers_at(&p, c(0.4, -0.3), &MonodromyOptions::default()).unwrap();
        for k in 0..5 {
            assert!((s.get(k) - s2.get(k)).norm() < 1e-8 * (1.0 + s.get(k).norm()), "{} {}", s.get(k), s2.get(k));
        }
        let r = default_radius(&p);
        let s3 = stokes_multipliers(
            &p,
            &MonodromyOptions {
                radius: Some(1.25 * r),
                ..Default::default()
            },
        )
        .unwrap();
        for k in 0..5 {
            assert!((s.get(k) - s3.get(k)).norm() < 1e-8 * (1.0 + s.get(k).norm()), "{} {}", s.get(k), s3.get(k));
        }
    }

    #[test]
    fn tiny_multipliers_next_to_huge_ones() {
        // |σ| spans 1e-17 .. 1e30 here; the small ones are lost if every
        // Wronskian is taken at the origin
        let p = CubicPotential::new(c(-2.312, -0.852), c(0.433, -2.672));
        let s = stokes_multipliers(&p, &MonodromyOptions::default()).unwrap();
        assert!(s.max_relative_admissibility_residual() < 1e-8, "{:?}", s);
        let s2 = stokes_multipliers(
            &p,
            &MonodromyOptions {
                radius: Some(1.3 * s.radius),
                ..Default::default()
            },
        )
        .unwrap();
        for k in 0..5 {
            assert!((s.get(k) - s2.get(k)).norm() < 1e-8 * s.get(k).norm(), "{} {}", s.get(k), s2.get(k));
        }
    }

    #[test]
    fn tritronquee_quintuple_is_admissible() {
        let s = tritronquee_multipliers();
        assert_eq!(s.max_admissibility_residual(), 0.0);
        assert!(tritronquee_test(&s, 1e-12).passed);
    }

    #[test]
    fn dominance_along_arc() {
        let p = CubicPotential::new(c(0.5, 0.2), c(0.1, -0.3));
        let sol = recessive_solution(&p, 1, 8.0, &MonodromyOptions::default()).unwrap();
        let mid = sol.arc.len() / 2;
        assert_eq!(sol.arc[mid].0, sol.start);
        let centre = sol.arc[mid].1.log_abs();
        // half-way to the neighbouring sector centres the solution is larger
        let q = mid / 2;
        assert!(sol.arc[mid + q].1.log_abs() > centre + 10.0);
        assert!(sol.arc[mid - q].1.log_abs() > centre + 10.0);
    }

    #[test]
    fn wronskian_constant_along_arc() {
        let p = CubicPotential::new(c(-1.0, 0.4), c(0.2, 0.0));
        let o = MonodromyOptions::default();
        let s0 = recessive_solution(&p, 0, 8.0, &o).unwrap();
        let s1 = recessive_solution(&p, 1, 8.0, &o).unwrap();
        let (l0, w0) = wronskian(&s0.at_origin, &s1.at_origin);
        // carry both along the same arc and compare
        let mut y0 = s0.at_origin;
        let mut y1 = s1.at_origin;
        let mut z = c(0.0, 0.0);
        for j in 0..8 {
            let next = Complex64::from_polar(3.0, 0.3 * j as f64);
            y0 = propagate(&p, z, next, y0, &o, |_, _| {}).unwrap();
            y1 = propagate(&p, z, next, y1, &o, |_, _| {}).unwrap();
            z = next;
            let (l, w) = wronskian(&y0, &y1);
            let ratio = (l - l0).exp() * w / w0;
            assert!((ratio - 1.0).norm() < 1e-8, "{ratio}");
        }
    }

    #[test]
    fn radius_too_small_is_reported() {
        let p = CubicPotential::real(2.0, 1.0);
        let err = stokes_multipliers(
            &p,
            &MonodromyOptions {
                radius: Some(0.5),
                ..Default::default()
            },
        );
        assert!(matches!(err, Err(Error::RadiusTooSmall { .. })));
    }
}
