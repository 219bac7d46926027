use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::action::sqrt_near;
use crate::error::{Error, Result};
use crate::potential::{CubicPotential, TurningPointSet, DEFAULT_CLUSTER_TOL};
use crate::quadrature::{integrate, GL8};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceOptions {
    /// Escape radius in units of `1 + max|λᵢ|`.
    pub r_max_factor: f64,
    /// Angular tolerance for assigning an escaping line to a ray.
    pub wedge_tol: f64,
    /// Capture radius around a turning point, relative to its distance to the
    /// nearest other turning point.
    pub capture_factor: f64,
    /// Relative size of the conserved part of the action below which a
    /// captured line is taken to end at the turning point.
    pub edge_tol: f64,
    /// Above `edge_tol` but below this, the capture is reported as ambiguous.
    pub ambiguity_tol: f64,
    /// Step length relative to the distance to the nearest turning point.
    pub step_factor: f64,
    pub max_steps: usize,
    pub cluster_tol: f64,
    /// Trace anti-Stokes lines (Im S constant) instead.
    pub anti_stokes: bool,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            r_max_factor: 10.0,
            wedge_tol: PI / 20.0,
            capture_factor: 0.1,
            edge_tol: 1e-6,
            ambiguity_tol: 1e-3,
            step_factor: 0.05,
            max_steps: 50_000,
            cluster_tol: DEFAULT_CLUSTER_TOL,
            anti_stokes: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LineEnd {
    TurningPoint(usize),
    /// Asymptotic ray index `k ∈ {0,…,4}`.
    Ray(i32),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StokesLine {
    pub from: usize,
    pub launch_angle: f64,
    pub end: LineEnd,
    pub points: Vec<Complex64>,
    /// Argument of the line where it crosses the escape radius (rays only).
    pub exit_arg: Option<f64>,
    /// Direction from the terminal turning point back along the line.
    pub arrival_angle: Option<f64>,
    /// Action accumulated from the turning point to the end of the line.
    pub action: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StokesTrace {
    pub turning_points: TurningPointSet,
    pub lines: Vec<StokesLine>,
    pub r_max: f64,
    pub anti_stokes: bool,
}

/// Local leading coefficient `V^{(m)}(λᵢ)/m!` of a root of order `m`.
fn leading_coeff(p: &CubicPotential, l: Complex64, m: usize) -> Complex64 {
    match m {
        1 => p.derivative(l),
        2 => p.second_derivative(l) / 2.0,
        _ => Complex64::new(4.0, 0.0),
    }
}

/// Distance from root `i` to the nearest other root, or a global scale for a
/// single root.
fn separation(tps: &TurningPointSet, i: usize) -> f64 {
    let li = tps.roots[i].value;
    let d = tps
        .roots
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != i)
        .map(|(_, r)| (r.value - li).norm())
        .fold(f64::INFINITY, f64::min);
    if d.is_finite() {
        d
    } else {
        1.0 + tps.max_modulus()
    }
}

/// `∫_{λᵢ}^{λᵢ+D} √V` along the straight segment, substituting `λ = λᵢ + D u²`.
/// `w_end` is √V at `λᵢ + D` and fixes the sheet.
fn local_action(p: &CubicPotential, li: Complex64, order: usize, d: Complex64, w_end: Complex64) -> Complex64 {
    let q = integrate(
        |u| {
            let l = li + d * u * u;
            let guess = w_end * u.powi(order as i32);
            sqrt_near(p.value(l), guess) * d * 2.0 * u
        },
        0.0,
        1.0,
        1e-15 * (1.0 + w_end.norm() * d.norm()),
        1e-13,
    );
    q.value
}

struct Tracer<'a> {
    p: &'a CubicPotential,
    tps: &'a TurningPointSet,
    opts: &'a TraceOptions,
    r_max: f64,
    /// `dλ/ds = c·conj(√V)/|√V|`; `c = i` for Stokes lines, `1` for anti-Stokes.
    c: Complex64,
}

impl Tracer<'_> {
    /// Quantity held at zero along the line: `Im(S/c)`.
    fn conserved(&self, s: Complex64) -> f64 {
        (s / self.c).im
    }

    fn velocity(&self, l: Complex64, w_ref: Complex64) -> Complex64 {
        let w = sqrt_near(self.p.value(l), w_ref);
        self.c * w.conj() / w.norm()
    }

    fn ray_angle(&self, k: i32) -> f64 {
        if self.opts.anti_stokes {
            2.0 * k as f64 * PI / 5.0
        } else {
            super::ray_angle(k)
        }
    }

    fn nearest_ray(&self, arg: f64) -> (i32, f64) {
        (0..5)
            .map(|k| {
                let mut d = (arg - self.ray_angle(k)).rem_euclid(2.0 * PI);
                if d > PI {
                    d -= 2.0 * PI;
                }
                (k, d)
            })
            .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .expect("five rays")
    }

    fn launch_angles(&self, i: usize) -> Vec<f64> {
        let r = &self.tps.roots[i];
        let m = r.multiplicity.order();
        let cm = leading_coeff(self.p, r.value, m);
        // c_m z^{m+2} negative (Stokes) or positive (anti-Stokes)
        let target = if self.opts.anti_stokes { 0.0 } else { PI };
        let n = (m + 2) as f64;
        (0..m + 2)
            .map(|j| ((target - cm.arg() + 2.0 * PI * j as f64) / n).rem_euclid(2.0 * PI))
            .collect()
    }

    fn trace(&self, i: usize, theta: f64) -> Result<StokesLine> {
        let tp = self.tps.roots[i];
        let li = tp.value;
        let m = tp.multiplicity.order();
        let sep_i = separation(self.tps, i);
        let z = Complex64::from_polar(1.0, theta);
        let r0 = 0.02 * sep_i;
        let d0 = z * r0;
        let cm = leading_coeff(self.p, li, m);
        // sheet chosen so that the tangent c·conj(w)/|w| points along z
        let w_dir = (z / self.c).conj();
        let w_loc = sqrt_near(cm * d0.powu(m as u32), w_dir);
        let mut l = li + d0;
        let mut w = sqrt_near(self.p.value(l), w_loc);
        let mut s_acc = local_action(self.p, li, m, d0, w);
        let mut points = vec![li, l];
        let fail = || Error::UnresolvedStokesLine {
            from: format!("{li} at angle {theta:.4}"),
        };
        let mut inside: Vec<bool> = (0..self.tps.roots.len()).map(|j| j == i).collect();
        let mut exit_arg = None;
        let mut radius = self.r_max;
        for _ in 0..self.opts.max_steps {
            let (_, dist) = self.tps.nearest(l);
            let mut h = self.opts.step_factor * dist;
            let (l_new, w_new) = loop {
                let k1 = self.velocity(l, w);
                let k2 = self.velocity(l + k1 * (0.5 * h), w);
                let k3 = self.velocity(l + k2 * (0.5 * h), w);
                let k4 = self.velocity(l + k3 * h, w);
                let cand = l + (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (h / 6.0);
                let wc = sqrt_near(self.p.value(cand), w);
                if (wc - w).norm() < 0.5 * w.norm() {
                    break (cand, wc);
                }
                h *= 0.5;
                if h < 1e-14 * (1.0 + l.norm()) {
                    return Err(fail());
                }
            };
            // action increment over the chord, then project back onto the level set
            let chord = l_new - l;
            let mut ds = Complex64::new(0.0, 0.0);
            for (x, wt) in GL8 {
                let t = 0.5 * (x + 1.0);
                let guess = w + (w_new - w) * t;
                ds += sqrt_near(self.p.value(l + chord * t), guess) * (0.5 * wt);
            }
            s_acc += ds * chord;
            let q = self.conserved(s_acc);
            let delta = -q * Complex64::i() * self.c * w_new.conj() / w_new.norm_sqr();
            let l_next = l_new + delta;
            let w_next = sqrt_near(self.p.value(l_next), w_new);
            s_acc += w_next * delta;
            let l_prev = l;
            l = l_next;
            w = w_next;
            points.push(l);

            // capture by another turning point
            for (j, r) in self.tps.roots.iter().enumerate() {
                let dj = (l - r.value).norm();
                let cap = self.opts.capture_factor * separation(self.tps, j);
                if dj >= cap {
                    inside[j] = false;
                    continue;
                }
                if inside[j] {
                    continue;
                }
                inside[j] = true;
                let mj = r.multiplicity.order();
                let tail = -local_action(self.p, r.value, mj, l - r.value, w);
                let total = s_acc + tail;
                let rel = self.conserved(total).abs() / total.norm().max(f64::MIN_POSITIVE);
                if rel < self.opts.edge_tol {
                    points.push(r.value);
                    return Ok(StokesLine {
                        from: i,
                        launch_angle: theta,
                        end: LineEnd::TurningPoint(j),
                        points,
                        exit_arg: None,
                        arrival_angle: Some((l - r.value).arg()),
                        action: total,
                    });
                }
                if rel < self.opts.ambiguity_tol {
                    let simple = self.tps.roots.iter().filter(|t| t.multiplicity.order() == 1).count();
                    return Err(Error::AmbiguousClass {
                        nearest: super::ClassCode::ALL
                            .into_iter()
                            .filter(|c| c.simple_count() == simple)
                            .collect(),
                        reason: format!(
                            "line from {li} passes within {dj:.2e} of {} (relative action {rel:.2e})",
                            r.value
                        ),
                    });
                }
            }

            // escape to infinity
            if l.norm() >= radius {
                let crossing = if exit_arg.is_none() && l_prev.norm() < self.r_max {
                    let (a, b) = (l_prev.norm(), l.norm());
                    let t = (self.r_max - a) / (b - a);
                    Some((l_prev + (l - l_prev) * t).arg())
                } else {
                    None
                };
                if exit_arg.is_none() {
                    exit_arg = crossing.or(Some(l.arg()));
                }
                let (k, off) = self.nearest_ray(l.arg());
                let extend_limit = 100.0 * self.r_max;
                if off.abs() < self.opts.wedge_tol || (radius >= extend_limit && off.abs() < PI / 5.0) {
                    return Ok(StokesLine {
                        from: i,
                        launch_angle: theta,
                        end: LineEnd::Ray(k),
                        points,
                        exit_arg,
                        arrival_angle: None,
                        action: s_acc,
                    });
                }
                if radius >= extend_limit {
                    return Err(fail());
                }
                radius *= 10.0;
            }
        }
        Err(fail())
    }
}

/// Traces the 3/4/5 Stokes lines issuing from every simple/double/triple
/// turning point until they end at another turning point or escape along
/// an asymptotic ray.
pub fn trace_stokes_lines(p: &CubicPotential, opts: &TraceOptions) -> Result<StokesTrace> {
    let tps = p.turning_points(opts.cluster_tol);
    let r_max = opts.r_max_factor * (1.0 + tps.max_modulus());
    let tracer = Tracer {
        p,
        tps: &tps,
        opts,
        r_max,
        c: if opts.anti_stokes {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::i()
        },
    };
    let launches: Vec<(usize, f64)> = (0..tps.roots.len())
        .flat_map(|i| tracer.launch_angles(i).into_iter().map(move |t| (i, t)))
        .collect();
    let lines = launches
        .par_iter()
        .map(|&(i, t)| tracer.trace(i, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(StokesTrace {
        turning_points: tps.clone(),
        lines,
        r_max,
        anti_stokes: opts.anti_stokes,
    })
}
