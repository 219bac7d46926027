//! Branch-tracked integrals of √V: line actions, turning-point actions,
//! the two cycle periods of the Boutroux system and their derivatives, and
//! the WKB error density α.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::{
    CubicPotential, Multiplicity, TurningPointLabels, TurningPointSet, DEFAULT_CLUSTER_TOL,
};
use crate::quadrature::integrate;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Minimum distance from a path to any turning point, relative to the
    /// smallest root separation.
    pub clearance: f64,
    pub cluster_tol: f64,
}

impl Default for ActionOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-13,
            rel_tol: 1e-12,
            clearance: 1e-3,
            cluster_tol: DEFAULT_CLUSTER_TOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionValue {
    pub value: Complex64,
    pub est_error: f64,
}

impl std::ops::Add for ActionValue {
    type Output = ActionValue;
    fn add(self, o: ActionValue) -> ActionValue {
        ActionValue {
            value: self.value + o.value,
            est_error: self.est_error + o.est_error,
        }
    }
}

/// Polyline in the λ-plane together with the value of √V at its first node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchedPath {
    pub nodes: Vec<Complex64>,
    pub branch_seed: Complex64,
}

impl BranchedPath {
    pub fn new(nodes: Vec<Complex64>, branch_seed: Complex64) -> Self {
        Self { nodes, branch_seed }
    }

    /// Path starting on the principal branch of √V at the first node.
    pub fn principal(p: &CubicPotential, nodes: Vec<Complex64>) -> Self {
        let seed = p.value(nodes[0]).sqrt();
        Self::new(nodes, seed)
    }

    /// √V continued to the last node.
    pub fn end_value(&self, p: &CubicPotential, opts: &ActionOptions) -> Result<Complex64> {
        let tps = p.turning_points(opts.cluster_tol);
        let clear = clearance_radius(&tps, opts.clearance);
        let mut w = self.branch_seed;
        for seg in self.nodes.windows(2) {
            w = walk(p, &tps, seg[0], w, seg[1], clear)?.last().expect("non-empty").1;
        }
        Ok(w)
    }

    /// The same path traversed backwards, seeded so that it lies on the same sheet.
    pub fn reversed(&self, p: &CubicPotential, opts: &ActionOptions) -> Result<Self> {
        let seed = self.end_value(p, opts)?;
        let mut nodes = self.nodes.clone();
        nodes.reverse();
        Ok(Self::new(nodes, seed))
    }

    pub fn concat(&self, other: &BranchedPath) -> Self {
        let mut nodes = self.nodes.clone();
        nodes.extend(other.nodes.iter().skip(1));
        Self::new(nodes, self.branch_seed)
    }
}

/// Root of `v` closest to `reference`.
#[inline]
pub fn sqrt_near(v: Complex64, reference: Complex64) -> Complex64 {
    let r = v.sqrt();
    if (r - reference).norm_sqr() <= (r + reference).norm_sqr() {
        r
    } else {
        -r
    }
}

pub(crate) fn clearance_radius(tps: &TurningPointSet, factor: f64) -> f64 {
    let sep = tps.min_separation();
    let scale = if sep > 0.0 { sep } else { 1.0 + tps.max_modulus() };
    factor * scale
}

pub(crate) fn segment_distance(a: Complex64, b: Complex64, c: Complex64) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (c - a).norm();
    }
    let t = ((c - a) * d.conj()).re / len2;
    (a + d * t.clamp(0.0, 1.0) - c).norm()
}

fn check_clearance(tps: &TurningPointSet, a: Complex64, b: Complex64, clear: f64) -> Result<()> {
    for r in &tps.roots {
        let dist = segment_distance(a, b, r.value);
        if dist < clear {
            return Err(Error::ClearanceViolation {
                distance: dist,
                clearance: clear,
            });
        }
    }
    Ok(())
}

/// Continues √V along the straight segment `from → to`, returning knots
/// `(t, √V(λ(t)))` dense enough that nearest-root selection between
/// neighbouring knots is unambiguous.
fn walk(
    p: &CubicPotential,
    tps: &TurningPointSet,
    from: Complex64,
    w_from: Complex64,
    to: Complex64,
    clear: f64,
) -> Result<Vec<(f64, Complex64)>> {
    check_clearance(tps, from, to, clear)?;
    let len = (to - from).norm();
    let mut knots = vec![(0.0, w_from)];
    if len == 0.0 {
        return Ok(knots);
    }
    let mut t = 0.0;
    let mut w = w_from;
    while t < 1.0 {
        let here = from + (to - from) * t;
        let dist = tps.nearest(here).1;
        let mut dt = (0.25 * dist / len).min(1.0 - t);
        loop {
            let next = from + (to - from) * (t + dt);
            let wn = sqrt_near(p.value(next), w);
            if (wn - w).norm() < 0.8 * w.norm().max(wn.norm()) {
                t += dt;
                w = wn;
                break;
            }
            dt *= 0.5;
            if dt < 1e-14 {
                return Err(Error::BranchAmbiguity(format!("{here}")));
            }
        }
        if 1.0 - t < 1e-15 {
            t = 1.0;
        }
        knots.push((t, w));
    }
    Ok(knots)
}

/// Continues the value `w_from` of √V at `from` to `to` along a straight line.
pub fn continue_sqrt(
    p: &CubicPotential,
    from: Complex64,
    w_from: Complex64,
    to: Complex64,
    opts: &ActionOptions,
) -> Result<Complex64> {
    let tps = p.turning_points(opts.cluster_tol);
    let clear = clearance_radius(&tps, opts.clearance);
    Ok(walk(p, &tps, from, w_from, to, clear)?.last().expect("non-empty").1)
}

/// `∫ √V dλ` along the path with continuous branch.
pub fn line_action(p: &CubicPotential, path: &BranchedPath, opts: &ActionOptions) -> Result<ActionValue> {
    let tps = p.turning_points(opts.cluster_tol);
    let clear = clearance_radius(&tps, opts.clearance);
    let mut total = ActionValue {
        value: Complex64::new(0.0, 0.0),
        est_error: 0.0,
    };
    let mut w = path.branch_seed;
    for seg in path.nodes.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let knots = walk(p, &tps, a, w, b, clear)?;
        let d = b - a;
        for pair in knots.windows(2) {
            let (t0, w0) = pair[0];
            let (t1, w1) = pair[1];
            let q = integrate(
                |t| {
                    let s = (t - t0) / (t1 - t0);
                    let guess = w0 + (w1 - w0) * s;
                    sqrt_near(p.value(a + d * t), guess) * d
                },
                t0,
                t1,
                opts.abs_tol * (t1 - t0),
                opts.rel_tol,
            );
            total.value += q.value;
            total.est_error += q.error;
        }
        w = knots.last().expect("non-empty").1;
    }
    let budget = 10.0 * opts.abs_tol.max(opts.rel_tol * total.value.norm());
    if total.est_error > budget.max(1e-14 * total.value.norm()) {
        return Err(Error::QuadratureFailed {
            tol: budget,
            estimate: total.est_error,
        });
    }
    Ok(total)
}

fn snap_simple(tps: &TurningPointSet, l: Complex64) -> Result<usize> {
    let (i, dist) = tps.nearest(l);
    if dist > 1e-6 * (1.0 + tps.max_modulus()) {
        return Err(Error::NotATurningPoint(format!("{l}")));
    }
    if tps.roots[i].multiplicity != Multiplicity::Simple {
        return Err(Error::DegenerateTurningPoint(format!("{l}")));
    }
    Ok(i)
}

enum Kernel<'a> {
    Sqrt,
    /// `g(λ)/√V`
    Inverse(&'a dyn Fn(Complex64) -> Complex64),
}

/// Integral between two simple turning points `li`, `lj` along the straight
/// segment, with third root `lk` and √V equal to `w_mid` at the midpoint.
/// Uses λ = λᵢ + (λⱼ−λᵢ)(1−cos θ)/2, which makes the integrand smooth.
fn tp_segment(
    li: Complex64,
    lj: Complex64,
    lk: Complex64,
    w_mid: Complex64,
    kernel: Kernel<'_>,
    opts: &ActionOptions,
) -> ActionValue {
    let i = Complex64::i();
    let d = lj - li;
    let mid = li + d * 0.5;
    let s_mid = w_mid / (i * d);
    let root_ratio = move |l: Complex64| ((l - lk) / (mid - lk)).sqrt();
    let q = integrate(
        |th| {
            let t = 0.5 * (1.0 - th.cos());
            let l = li + d * t;
            match &kernel {
                Kernel::Sqrt => i * d * d * s_mid * 0.5 * th.sin().powi(2) * root_ratio(l),
                Kernel::Inverse(g) => g(l) / (2.0 * i * s_mid * root_ratio(l)),
            }
        },
        0.0,
        PI,
        opts.abs_tol,
        opts.rel_tol,
    );
    ActionValue {
        value: q.value,
        est_error: q.error,
    }
}

/// √V at the midpoint of `[li, lj]`, continued from the principal value at
/// `reference`. Falls back to a reference shifted off the segment line if the
/// straight continuation passes too close to a root.
fn midpoint_sheet(
    p: &CubicPotential,
    tps: &TurningPointSet,
    reference: Complex64,
    li: Complex64,
    lj: Complex64,
    clear: f64,
) -> Result<Complex64> {
    let mid = 0.5 * (li + lj);
    let direct = walk(p, tps, reference, p.value(reference).sqrt(), mid, clear)
        .ok()
        .filter(|_| tps.nearest(reference).1 >= clear);
    if let Some(k) = direct {
        return Ok(k.last().expect("non-empty").1);
    }
    let normal = Complex64::i() * (lj - li) / (lj - li).norm();
    let shifted = mid + normal * 0.5 * tps.min_separation();
    let k = walk(p, tps, shifted, p.value(shifted).sqrt(), mid, clear)?;
    Ok(k.last().expect("non-empty").1)
}

/// Integral of √V from one simple turning point to another along the straight
/// segment joining them. The sheet is the continuation of the principal root
/// at the regular point `side_hint` to the midpoint of the segment.
pub fn turning_point_action(
    p: &CubicPotential,
    from_tp: Complex64,
    to_tp: Complex64,
    side_hint: Complex64,
    opts: &ActionOptions,
) -> Result<ActionValue> {
    let tps = p.turning_points(opts.cluster_tol);
    let i = snap_simple(&tps, from_tp)?;
    let j = snap_simple(&tps, to_tp)?;
    if i == j {
        return Ok(ActionValue {
            value: Complex64::new(0.0, 0.0),
            est_error: 0.0,
        });
    }
    let k = 3 - i - j;
    let (li, lj, lk) = (tps.roots[i].value, tps.roots[j].value, tps.roots[k].value);
    let clear = clearance_radius(&tps, opts.clearance);
    check_clearance(&tps, li, lj, clear).or_else(|e| {
        // the two endpoints themselves are at distance 0; only λₖ matters
        if segment_distance(li, lj, lk) >= clear {
            Ok(())
        } else {
            Err(e)
        }
    })?;
    let w_mid = walk(
        p,
        &tps,
        side_hint,
        p.value(side_hint).sqrt(),
        0.5 * (li + lj),
        clear,
    )?
    .last()
    .expect("non-empty")
    .1;
    Ok(tp_segment(li, lj, lk, w_mid, Kernel::Sqrt, opts))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cycle {
    /// Encircles λ₀ and λ₁.
    A1,
    /// Encircles λ₀ and λ₋₁.
    AMinus1,
}

impl Cycle {
    pub fn index(self) -> usize {
        match self {
            Cycle::A1 => 0,
            Cycle::AMinus1 => 1,
        }
    }
}

/// Half-loop period `∫_{λ₀}^{λ±₁} √V dλ`; the closed-loop integral is twice this.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CyclePeriod {
    pub cycle_id: Cycle,
    pub value: Complex64,
    pub est_error: f64,
}

impl CyclePeriod {
    pub fn loop_integral(&self) -> Complex64 {
        2.0 * self.value
    }
}

struct CycleSheet {
    roots: [Complex64; 3],
    w_mid: [Complex64; 2],
    /// Integrals on the sheet continued from the principal root at the centroid.
    raw: [ActionValue; 2],
    sign: f64,
    centroid: Complex64,
}

fn cycle_sheet(p: &CubicPotential, labels: &TurningPointLabels, opts: &ActionOptions) -> Result<CycleSheet> {
    let tps = p.turning_points(opts.cluster_tol);
    if tps.roots.len() != 3 || !tps.all_simple() {
        return Err(Error::DegenerateTurningPoint(
            "cycle periods need three simple turning points".into(),
        ));
    }
    let l0 = tps.roots[snap_simple(&tps, labels.lambda0)?].value;
    let l1 = tps.roots[snap_simple(&tps, labels.lambda1)?].value;
    let lm = tps.roots[snap_simple(&tps, labels.lambda_minus1)?].value;
    if l0 == l1 || l0 == lm || l1 == lm {
        return Err(Error::LabelsUnavailable("labels do not name three distinct roots".into()));
    }
    let clear = clearance_radius(&tps, opts.clearance);
    let centroid = (l0 + l1 + lm) / 3.0;
    let w1 = midpoint_sheet(p, &tps, centroid, l0, l1, clear)?;
    let wm = midpoint_sheet(p, &tps, centroid, l0, lm, clear)?;
    let i1 = tp_segment(l0, l1, lm, w1, Kernel::Sqrt, opts);
    let im = tp_segment(l0, lm, l1, wm, Kernel::Sqrt, opts);
    let sign = if (i1.value - im.value).im >= 0.0 { 1.0 } else { -1.0 };
    Ok(CycleSheet {
        roots: [l0, l1, lm],
        w_mid: [w1, wm],
        raw: [i1, im],
        sign,
        centroid,
    })
}

/// Both half-loop periods `(P₁, P₋₁)` for the given labels.
pub fn cycle_periods(
    p: &CubicPotential,
    labels: &TurningPointLabels,
    opts: &ActionOptions,
) -> Result<[CyclePeriod; 2]> {
    let sh = cycle_sheet(p, labels, opts)?;
    let [i1, im] = sh.raw;
    Ok([
        CyclePeriod {
            cycle_id: Cycle::A1,
            value: sh.sign * i1.value,
            est_error: i1.est_error,
        },
        CyclePeriod {
            cycle_id: Cycle::AMinus1,
            value: sh.sign * im.value,
            est_error: im.est_error,
        },
    ])
}

pub fn cycle_period_labeled(
    p: &CubicPotential,
    labels: &TurningPointLabels,
    cycle: Cycle,
    opts: &ActionOptions,
) -> Result<CyclePeriod> {
    Ok(cycle_periods(p, labels, opts)?[cycle.index()])
}

/// Cycle period with labels obtained from the Stokes classification of `p`.
pub fn cycle_period(p: &CubicPotential, cycle: Cycle) -> Result<CyclePeriod> {
    let g = crate::stokes::classify(p, &Default::default())?;
    cycle_period_labeled(p, &g.tp_labels, cycle, &ActionOptions::default())
}

/// Action differences `(S₀(λ₁) − S₀(λ₀), S₀(λ₋₁) − S₀(λ₀))` on the sheet of
/// √V whose real part grows along the ray of argument `theta` (the centre of
/// the Stokes sector in which the WKB solution ψ₀ is recessive).
pub fn sector_actions(
    p: &CubicPotential,
    labels: &TurningPointLabels,
    theta: f64,
    opts: &ActionOptions,
) -> Result<[Complex64; 2]> {
    let sh = cycle_sheet(p, labels, opts)?;
    let tps = p.turning_points(opts.cluster_tol);
    let clear = clearance_radius(&tps, opts.clearance);
    let far = Complex64::from_polar(20.0 * (1.0 + tps.max_modulus()), theta);
    let w_far = walk(p, &tps, sh.centroid, p.value(sh.centroid).sqrt(), far, clear)?
        .last()
        .expect("non-empty")
        .1;
    let s = if (w_far * Complex64::from_polar(1.0, theta)).re >= 0.0 { 1.0 } else { -1.0 };
    Ok([s * sh.raw[0].value, s * sh.raw[1].value])
}

/// `(∂P/∂a, ∂P/∂b) = (−∫ λ/√V dλ, −14 ∫ dλ/√V)` on the same sheet as the period.
pub fn period_jacobian(
    p: &CubicPotential,
    labels: &TurningPointLabels,
    cycle: Cycle,
    opts: &ActionOptions,
) -> Result<(Complex64, Complex64)> {
    let sh = cycle_sheet(p, labels, opts)?;
    let [l0, l1, lm] = sh.roots;
    let (other, third, w) = match cycle {
        Cycle::A1 => (l1, lm, sh.w_mid[0]),
        Cycle::AMinus1 => (lm, l1, sh.w_mid[1]),
    };
    let lin = |l: Complex64| l;
    let one = |_: Complex64| Complex64::new(1.0, 0.0);
    let da = tp_segment(l0, other, third, w, Kernel::Inverse(&lin), opts);
    let db = tp_segment(l0, other, third, w, Kernel::Inverse(&one), opts);
    Ok((-sh.sign * da.value, -14.0 * sh.sign * db.value))
}

/// Both Jacobian rows at once: `[[∂P₁/∂a, ∂P₁/∂b], [∂P₋₁/∂a, ∂P₋₁/∂b]]`.
pub fn period_jacobians(
    p: &CubicPotential,
    labels: &TurningPointLabels,
    opts: &ActionOptions,
) -> Result<[[Complex64; 2]; 2]> {
    let (a1, b1) = period_jacobian(p, labels, Cycle::A1, opts)?;
    let (am, bm) = period_jacobian(p, labels, Cycle::AMinus1, opts)?;
    Ok([[a1, b1], [am, bm]])
}

/// `α = (4VV″ − 5V′²) / (32 V^{5/2})` on the principal branch.
pub fn alpha(p: &CubicPotential, l: Complex64) -> Complex64 {
    let v = p.value(l);
    let num = 4.0 * v * p.second_derivative(l) - 5.0 * p.derivative(l).powi(2);
    num / (32.0 * v * v * v.sqrt())
}

/// `|α|`, which does not depend on the branch.
pub fn alpha_abs(p: &CubicPotential, l: Complex64) -> f64 {
    let v = p.value(l);
    let num = 4.0 * v * p.second_derivative(l) - 5.0 * p.derivative(l).powi(2);
    num.norm() / (32.0 * v.norm().powf(2.5))
}

fn real_quad<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, opts: &ActionOptions) -> (f64, f64) {
    let q = integrate(|t| Complex64::new(f(t), 0.0), a, b, opts.abs_tol, opts.rel_tol);
    (q.value.re, q.error)
}

/// `∫ |α(λ) dλ|` along the polyline.
pub fn alpha_integral(p: &CubicPotential, path: &BranchedPath, opts: &ActionOptions) -> Result<f64> {
    let tps = p.turning_points(opts.cluster_tol);
    let clear = clearance_radius(&tps, opts.clearance);
    let mut total = 0.0;
    for seg in path.nodes.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        check_clearance(&tps, a, b, clear)?;
        let d = b - a;
        let len = d.norm();
        let (v, _) = real_quad(|t| alpha_abs(p, a + d * t) * len, 0.0, 1.0, opts);
        total += v;
    }
    Ok(total)
}

/// `∫ |α dλ|` along the ray `start + s·e^{iθ}`, `s ∈ [0, ∞)`.
pub fn alpha_integral_to_infinity(
    p: &CubicPotential,
    start: Complex64,
    theta: f64,
    opts: &ActionOptions,
) -> Result<f64> {
    let tps = p.turning_points(opts.cluster_tol);
    let clear = clearance_radius(&tps, opts.clearance);
    let dir = Complex64::from_polar(1.0, theta);
    for r in &tps.roots {
        let s = ((r.value - start) * dir.conj()).re.max(0.0);
        let dist = (start + dir * s - r.value).norm();
        if dist < clear {
            return Err(Error::ClearanceViolation {
                distance: dist,
                clearance: clear,
            });
        }
    }
    let s0 = start.norm().max(1e-3 * (1.0 + tps.max_modulus()));
    // s = s0·u/(1−u)
    let (v, _) = real_quad(
        |u| {
            if u >= 1.0 {
                return 0.0;
            }
            let s = s0 * u / (1.0 - u);
            alpha_abs(p, start + dir * s) * s0 / ((1.0 - u) * (1.0 - u))
        },
        0.0,
        1.0,
        opts,
    );
    Ok(v)
}

/// Leading-order tail `∫_R^∞ |α| dr ≈ (21/160) R^{−5/2}` of the error density.
pub fn alpha_tail(r: f64) -> f64 {
    21.0 / 160.0 * r.powf(-2.5)
}
