//! WKB asymptotic values and quantization residuals for Boutroux graphs,
//! and the relative errors ρ_l^k of the WKB approximation.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::action::{alpha_abs, alpha_tail, sector_actions, sqrt_near, ActionOptions};
use crate::error::{Error, Result};
use crate::potential::{CubicPotential, TurningPointSet};
use crate::quadrature::GL8;
use crate::stokes::{ClassCode, StokesComplexGraph};

/// Point of the Riemann sphere in homogeneous coordinates `[num : den]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpherePoint {
    pub num: Complex64,
    pub den: Complex64,
}

impl SpherePoint {
    pub fn finite(z: Complex64) -> Self {
        Self {
            num: z,
            den: Complex64::new(1.0, 0.0),
        }
    }

    pub fn infinity() -> Self {
        Self {
            num: Complex64::new(1.0, 0.0),
            den: Complex64::new(0.0, 0.0),
        }
    }

    pub fn new(num: Complex64, den: Complex64) -> Self {
        assert!(num.norm() + den.norm() > 0.0, "[0:0] is not a point");
        Self { num, den }
    }

    pub fn is_infinite(&self, tol: f64) -> bool {
        self.den.norm() <= tol * self.num.norm()
    }

    /// Affine value, `None` at infinity.
    pub fn value(&self) -> Option<Complex64> {
        (self.den.norm() > 0.0).then(|| self.num / self.den)
    }

    /// Chordal distance on the unit sphere (0 for equal points, at most 1).
    pub fn chordal(&self, o: &SpherePoint) -> f64 {
        let cross = (self.num * o.den - o.num * self.den).norm();
        let n1 = (self.num.norm_sqr() + self.den.norm_sqr()).sqrt();
        let n2 = (o.num.norm_sqr() + o.den.norm_sqr()).sqrt();
        cross / (n1 * n2)
    }

    /// Image under `w ↦ (a w + b)/(c w + d)`.
    pub fn mobius(&self, m: [Complex64; 4]) -> Self {
        let [a, b, c, d] = m;
        Self::new(a * self.num + b * self.den, c * self.num + d * self.den)
    }
}

/// Möbius map sending `z1, z2, z3` to `0, 1, ∞`.
pub fn mobius_to_01inf(z1: SpherePoint, z2: SpherePoint, z3: SpherePoint) -> [Complex64; 4] {
    // w ↦ (w − z1)(z2 − z3) / ((w − z3)(z2 − z1)) in homogeneous form
    let det = |x: SpherePoint, y: SpherePoint| x.num * y.den - y.num * x.den;
    let k1 = det(z2, z3);
    let k3 = det(z2, z1);
    [k1 * z1.den, -k1 * z1.num, k3 * z3.den, -k3 * z3.num]
}

/// Asymptotic values `w_k` for `k = 0, 1, 2, −2, −1` (index `k mod 5`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticValues {
    pub w: [SpherePoint; 5],
    /// `true` where the value is exact rather than a WKB approximation `ŵ_k`.
    pub exact: [bool; 5],
}

impl AsymptoticValues {
    pub fn get(&self, k: i32) -> SpherePoint {
        self.w[k.rem_euclid(5) as usize]
    }

    pub fn mobius(&self, m: [Complex64; 4]) -> Self {
        Self {
            w: self.w.map(|p| p.mobius(m)),
            exact: self.exact,
        }
    }

    /// Largest chordal distance to the tritronquée quintuple
    /// `(w₀, w₁, w₂, w₋₁, w₋₂) = (0, 1, ∞, ∞, 1)` after normalizing
    /// `w₀, w₁, w₂` to `0, 1, ∞`.
    pub fn tritronquee_mismatch(&self) -> f64 {
        let (w0, w1, w2) = (self.get(0), self.get(1), self.get(2));
        if w0.chordal(&w1) < 1e-14 || w1.chordal(&w2) < 1e-14 || w0.chordal(&w2) < 1e-14 {
            return 1.0;
        }
        let m = mobius_to_01inf(w0, w1, w2);
        let wm1 = self.get(-1).mobius(m);
        let wm2 = self.get(-2).mobius(m);
        wm1.chordal(&SpherePoint::infinity())
            .max(wm2.chordal(&SpherePoint::finite(Complex64::new(1.0, 0.0))))
    }
}

/// Action differences `Δ₁ = S₀(λ₁) − S₀(λ₀)`, `Δ₋₁ = S₀(λ₋₁) − S₀(λ₀)`.
pub fn turning_point_actions(p: &CubicPotential, g: &StokesComplexGraph) -> Result<[Complex64; 2]> {
    if g.class_code != ClassCode::C320 {
        return Err(Error::WrongClass {
            expected: ClassCode::C320,
            found: g.class_code,
        });
    }
    let theta = 2.0 * PI * g.decoration_shift as f64 / 5.0;
    sector_actions(p, &g.tp_labels, theta, &ActionOptions::default())
}

fn check_finite(d: &[Complex64; 2]) -> Result<()> {
    if d.iter().all(|z| z.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidArgument("non-finite turning-point actions".into()))
    }
}

/// Quintuple in the `(0, −2)` normalization, with `S₀(λ₀) = 0`:
/// `w₀ = 0`, `w₋₂ = ∞`, `w₋₁ = i e^{−2Δ₋₁}` exact and
/// `ŵ₂ = −i`, `ŵ₁ = −i e^{−2Δ₁}/(1 + e^{−2Δ₁})` approximate.
pub fn asymptotic_values_320(p: &CubicPotential, g: &StokesComplexGraph) -> Result<AsymptoticValues> {
    let d = turning_point_actions(p, g)?;
    check_finite(&d)?;
    Ok(values_from_actions(d))
}

pub fn values_from_actions(d: [Complex64; 2]) -> AsymptoticValues {
    let i = Complex64::i();
    let one = Complex64::new(1.0, 0.0);
    let e1 = (-2.0 * d[0]).exp();
    let em1 = (-2.0 * d[1]).exp();
    let mut w = [SpherePoint::finite(Complex64::new(0.0, 0.0)); 5];
    w[0] = SpherePoint::finite(Complex64::new(0.0, 0.0));
    w[1] = SpherePoint::new(-i * e1, one + e1);
    w[2] = SpherePoint::finite(-i);
    w[3] = SpherePoint::infinity();
    w[4] = SpherePoint::finite(i * em1);
    AsymptoticValues {
        w,
        exact: [true, false, false, true, true],
    }
}

/// Quintuple in the `(0, 2)` normalization, computed directly:
/// `w₀ = 0`, `w₂ = ∞`, `w₁ = −i e^{−2Δ₁}` exact, `ŵ₋₂ = i`,
/// `ŵ₋₁ = i e^{−2Δ₋₁}/(1 + e^{−2Δ₋₁})`.
pub fn values_from_actions_02(d: [Complex64; 2]) -> AsymptoticValues {
    let i = Complex64::i();
    let one = Complex64::new(1.0, 0.0);
    let e1 = (-2.0 * d[0]).exp();
    let em1 = (-2.0 * d[1]).exp();
    let mut w = [SpherePoint::finite(Complex64::new(0.0, 0.0)); 5];
    w[1] = SpherePoint::finite(-i * e1);
    w[2] = SpherePoint::infinity();
    w[3] = SpherePoint::finite(i);
    w[4] = SpherePoint::new(i * em1, one + em1);
    AsymptoticValues {
        w,
        exact: [true, true, true, false, false],
    }
}

/// Möbius map from the `(0, 2)` to the `(0, −2)` normalization:
/// `w ↦ −i w / (w − i)`.
pub fn mobius_02_to_0m2() -> [Complex64; 4] {
    let i = Complex64::i();
    [-i, Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), -i]
}

/// Values quoted for the degenerate classes: `(100)`: `w₀(1,−1) = −1`,
/// `ŵ±₂(1,−1) = 1`; `(110)`: `ŵ₋₁(1,−2) = 1`, `w₂(1,−2) = −1`.
/// Entries are `(k, value, exact)`.
pub fn degenerate_class_values(code: ClassCode) -> Result<Vec<(i32, Complex64, bool)>> {
    let one = Complex64::new(1.0, 0.0);
    match code {
        ClassCode::C100 => Ok(vec![(0, -one, true), (2, one, false), (-2, one, false)]),
        ClassCode::C110 => Ok(vec![(-1, one, false), (2, -one, true)]),
        other => Err(Error::WrongClass {
            expected: ClassCode::C100,
            found: other,
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantizationResiduals {
    pub r1: Complex64,
    pub r2: Complex64,
    pub r3: Complex64,
}

pub fn residuals_from_actions(d: [Complex64; 2]) -> QuantizationResiduals {
    let one = Complex64::new(1.0, 0.0);
    let e1 = (-2.0 * d[0]).exp();
    let em1 = (-2.0 * d[1]).exp();
    QuantizationResiduals {
        r1: e1 + one,
        r2: em1 + one,
        r3: (-2.0 * (d[0] - d[1])).exp() + one - e1,
    }
}

pub fn quantization_residuals(p: &CubicPotential, g: &StokesComplexGraph) -> Result<QuantizationResiduals> {
    let d = turning_point_actions(p, g)?;
    check_finite(&d)?;
    Ok(residuals_from_actions(d))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoOptions {
    /// Sample radii in units of `max|λᵢ|`.
    pub radii: [f64; 8],
    /// Angular samples per radius; a multiple of 5 keeps the sample set
    /// invariant under `λ ↦ Ω λ`.
    pub angles: usize,
    /// Radius, in units of `max|λᵢ|`, beyond which the analytic tail is used.
    pub far: f64,
    pub step_factor: f64,
}

impl Default for RhoOptions {
    fn default() -> Self {
        Self {
            radii: [0.2, 0.45, 0.7, 1.0, 1.4, 2.0, 3.0, 4.5],
            angles: 60,
            far: 60.0,
            step_factor: 0.04,
        }
    }
}

/// Relative errors ρ_l^k, indexed by `(l mod 5, k mod 5)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelativeError {
    pub rho: [[f64; 5]; 5],
    /// Whether `ρ_l^k < log 3 / 2` holds exactly for the related pairs.
    pub matches_relation: bool,
}

impl RelativeError {
    pub fn get(&self, l: i32, k: i32) -> f64 {
        self.rho[l.rem_euclid(5) as usize][k.rem_euclid(5) as usize]
    }

    /// Largest finite entry.
    pub fn max_finite(&self) -> f64 {
        self.rho
            .iter()
            .flatten()
            .copied()
            .filter(|x| x.is_finite())
            .fold(0.0, f64::max)
    }
}

/// Threshold of the relation `Σ_l ∼ Σ_k`.
pub fn sim_threshold() -> f64 {
    3f64.ln() / 2.0
}

struct Trajectory {
    end_sector: i32,
    alpha: f64,
}

/// Follows the gradient of `Re S` (an anti-Stokes trajectory) from `start`
/// to infinity, accumulating `∫|α dλ|`. `sign` selects the direction.
fn follow(
    p: &CubicPotential,
    tps: &TurningPointSet,
    start: Complex64,
    w0: Complex64,
    r_far: f64,
    min_dist: f64,
    step: f64,
) -> Option<Trajectory> {
    let mut l = start;
    let mut w = w0;
    let mut acc = 0.0;
    let vel = |z: Complex64, wr: Complex64| {
        let wz = sqrt_near(p.value(z), wr);
        wz.conj() / wz.norm()
    };
    let mut im_ref = 0.0;
    for _ in 0..20_000 {
        let dist = tps.nearest(l).1;
        if dist < min_dist {
            return None;
        }
        let h = step * dist;
        let k1 = vel(l, w);
        let k2 = vel(l + k1 * (0.5 * h), w);
        let k3 = vel(l + k2 * (0.5 * h), w);
        let k4 = vel(l + k3 * h, w);
        let next = l + (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (h / 6.0);
        let wn = sqrt_near(p.value(next), w);
        if (wn - w).norm() > 0.5 * w.norm() {
            return None;
        }
        let chord = next - l;
        let mut ds = Complex64::new(0.0, 0.0);
        let mut da = 0.0;
        for (x, wt) in GL8 {
            let t = 0.5 * (x + 1.0);
            let z = l + chord * t;
            ds += sqrt_near(p.value(z), w + (wn - w) * t) * (0.5 * wt);
            da += alpha_abs(p, z) * 0.5 * wt;
        }
        im_ref += (ds * chord).im;
        // keep Im S fixed
        let delta = -im_ref * Complex64::i() * wn.conj() / wn.norm_sqr();
        acc += da * chord.norm();
        l = next + delta;
        w = sqrt_near(p.value(l), wn);
        im_ref += (w * delta).im;
        if l.norm() > r_far {
            acc += alpha_tail(l.norm());
            let sector = ((l.arg() / (2.0 * PI / 5.0)).round() as i32).rem_euclid(5);
            return Some(Trajectory {
                end_sector: sector,
                alpha: acc,
            });
        }
    }
    None
}

/// ρ_l^k: smallest `∫|α dλ|` over sampled anti-Stokes trajectories (paths of
/// monotone `Re S`) joining infinity in `Σ_l` to infinity in `Σ_k`;
/// `0` for consecutive sectors and `∞` for pairs that are not related.
pub fn relative_errors(p: &CubicPotential, g: &StokesComplexGraph, opts: &RhoOptions) -> Result<RelativeError> {
    let tps = &g.trace.turning_points;
    let scale = {
        let s = tps.max_modulus();
        if s > 0.0 {
            s
        } else {
            1.0
        }
    };
    let min_dist = 1e-3 * scale;
    let mut starts = vec![];
    for &r in &opts.radii {
        for j in 0..opts.angles {
            let z = Complex64::from_polar(r * scale, 2.0 * PI * (j as f64 + 0.5) / opts.angles as f64);
            if tps.nearest(z).1 > 0.05 * scale {
                starts.push(z);
            }
        }
    }
    let found: Vec<(usize, usize, f64)> = starts
        .par_iter()
        .filter_map(|&z| {
            let w = p.value(z).sqrt();
            let fwd = follow(p, tps, z, w, opts.far * scale, min_dist, opts.step_factor)?;
            let back = follow(p, tps, z, -w, opts.far * scale, min_dist, opts.step_factor)?;
            Some((
                fwd.end_sector as usize,
                back.end_sector as usize,
                fwd.alpha + back.alpha,
            ))
        })
        .collect();
    let mut rho = [[f64::INFINITY; 5]; 5];
    for (a, b, v) in found {
        if v < rho[a][b] {
            rho[a][b] = v;
            rho[b][a] = v;
        }
    }
    for l in 0..5 {
        rho[l][(l + 1) % 5] = 0.0;
        rho[(l + 1) % 5][l] = 0.0;
        rho[l][l] = 0.0;
    }
    let rel = crate::stokes::sector_relation(g);
    let mut matches = true;
    for l in 0..5i32 {
        for k in 0..5i32 {
            let (lu, ku) = (l as usize, k as usize);
            let sim = rho[lu][ku] < sim_threshold();
            if sim != rel.related(l, k) {
                matches = false;
            }
        }
    }
    Ok(RelativeError {
        rho,
        matches_relation: matches,
    })
}
