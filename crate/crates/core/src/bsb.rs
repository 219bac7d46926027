//! Bohr–Sommerfeld–Boutroux system
//! `P₁(a,b) = iπ(n−½)`, `P₋₁(a,b) = −iπ(m−½)` and the real poles.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::action::{cycle_periods, period_jacobians, ActionOptions};
use crate::error::{Error, Result};
use crate::potential::{CubicPotential, TurningPointLabels};
use crate::stokes::{classify, ClassCode, TraceOptions};
use crate::wkb::{quantization_residuals, relative_errors, RhoOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BsbIndex {
    pub n: u32,
    pub m: u32,
}

impl BsbIndex {
    pub fn new(n: u32, m: u32) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidArgument(format!("indices must be positive, got ({n}, {m})")));
        }
        Ok(Self { n, m })
    }

    pub fn swapped(self) -> Self {
        Self { n: self.m, m: self.n }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BsbSolution {
    pub index: BsbIndex,
    pub a: Complex64,
    pub b: Complex64,
    pub residual_norm: f64,
    /// Largest finite ρ_l^k; NaN when not computed.
    pub rho_max: f64,
    pub class_checked: bool,
    pub iterations: usize,
    pub labels: TurningPointLabels,
}

impl BsbSolution {
    pub fn potential(&self) -> CubicPotential {
        CubicPotential::new(self.a, self.b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BsbOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Re-classify the result and require class (320).
    pub check_class: bool,
    pub compute_rho: bool,
    pub action: ActionOptions,
}

impl Default for BsbOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 50,
            check_class: true,
            compute_rho: true,
            action: ActionOptions::default(),
        }
    }
}

fn residual(p: &CubicPotential, labels: &TurningPointLabels, n: f64, m: f64, o: &ActionOptions) -> Result<[Complex64; 2]> {
    let [p1, pm] = cycle_periods(p, labels, o)?;
    let i = Complex64::i();
    Ok([p1.value - i * PI * (n - 0.5), pm.value + i * PI * (m - 0.5)])
}

fn norm2(f: &[Complex64; 2]) -> f64 {
    (f[0].norm_sqr() + f[1].norm_sqr()).sqrt()
}

/// Damped Newton iteration for real-valued targets `(n, m)`; used directly
/// for integer indices and for continuation between them.
pub(crate) fn newton(
    seed: CubicPotential,
    labels: TurningPointLabels,
    n: f64,
    m: f64,
    opts: &BsbOptions,
) -> Result<(CubicPotential, TurningPointLabels, f64, usize)> {
    let o = &opts.action;
    let mut p = seed;
    let mut lab = labels
        .follow(&p.turning_points(o.cluster_tol))
        .ok_or_else(|| Error::LabelsUnavailable("seed labels do not match three roots".into()))?;
    let mut f = residual(&p, &lab, n, m, o)?;
    let mut fn_ = norm2(&f);
    for it in 0..opts.max_iter {
        if fn_ <= opts.tol {
            return Ok((p, lab, fn_, it));
        }
        let j = period_jacobians(&p, &lab, o)?;
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let scale = (j[0][0].norm() + j[0][1].norm()) * (j[1][0].norm() + j[1][1].norm());
        if !(det.norm() > 1e-14 * scale) {
            return Err(Error::SingularJacobian);
        }
        let da = (j[1][1] * f[0] - j[0][1] * f[1]) / det;
        let db = (j[0][0] * f[1] - j[1][0] * f[0]) / det;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let q = CubicPotential::new(p.a - t * da, p.b - t * db);
            let tps = q.turning_points(o.cluster_tol);
            let trial = lab.follow(&tps).filter(|_| tps.all_simple() && tps.roots.len() == 3);
            if let Some(ql) = trial {
                if let Ok(fq) = residual(&q, &ql, n, m, o) {
                    let nq = norm2(&fq);
                    if nq < fn_ {
                        p = q;
                        lab = ql;
                        f = fq;
                        fn_ = nq;
                        accepted = true;
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        if !accepted {
            if fn_ <= 100.0 * opts.tol {
                // stalled at the quadrature noise floor
                return Ok((p, lab, fn_, it));
            }
            return Err(Error::NewtonFailed(format!(
                "no decrease from ‖F‖ = {fn_:.3e} at iteration {it}"
            )));
        }
    }
    if fn_ <= opts.tol {
        Ok((p, lab, fn_, opts.max_iter))
    } else {
        Err(Error::NewtonFailed(format!(
            "‖F‖ = {fn_:.3e} after {} iterations",
            opts.max_iter
        )))
    }
}

fn finish(
    idx: BsbIndex,
    p: CubicPotential,
    labels: TurningPointLabels,
    res: f64,
    iterations: usize,
    opts: &BsbOptions,
) -> Result<BsbSolution> {
    if p.a.arg().abs() <= 4.0 * PI / 5.0 {
        return Err(Error::NewtonFailed(format!(
            "solution a = {} violates |arg a| > 4π/5",
            p.a
        )));
    }
    let mut labels = labels;
    let mut rho_max = f64::NAN;
    let mut class_checked = false;
    if opts.check_class || opts.compute_rho {
        let g = classify(&p, &TraceOptions::default())?;
        if g.class_code != ClassCode::C320 {
            return Err(Error::WrongClass {
                expected: ClassCode::C320,
                found: g.class_code,
            });
        }
        // the classifier's labels must name the same roots
        let same = |x: Complex64, y: Complex64| (x - y).norm() <= 1e-6 * (1.0 + x.norm());
        if !(same(g.tp_labels.lambda0, labels.lambda0)
            && same(g.tp_labels.lambda1, labels.lambda1)
            && same(g.tp_labels.lambda_minus1, labels.lambda_minus1))
        {
            return Err(Error::WrongClass {
                expected: ClassCode::C320,
                found: g.class_code,
            });
        }
        let r = quantization_residuals(&p, &g)?;
        let qtol = 1e3 * opts.tol.max(1e-12);
        if r.r1.norm() > qtol || r.r2.norm() > qtol || r.r3.norm() < 0.5 {
            return Err(Error::NewtonFailed(format!(
                "quantization residuals off: |r1| = {:.2e}, |r2| = {:.2e}, |r3| = {:.2e}",
                r.r1.norm(),
                r.r2.norm(),
                r.r3.norm()
            )));
        }
        labels = g.tp_labels;
        class_checked = true;
        if opts.compute_rho {
            rho_max = relative_errors(&p, &g, &RhoOptions::default())?.max_finite();
        }
    }
    Ok(BsbSolution {
        index: idx,
        a: p.a,
        b: p.b,
        residual_norm: res,
        rho_max,
        class_checked,
        iterations,
        labels,
    })
}

/// Labels of a seed potential from its Stokes classification.
pub fn seed_labels(seed: &CubicPotential) -> Result<TurningPointLabels> {
    let g = classify(seed, &TraceOptions::default())?;
    if g.class_code != ClassCode::C320 {
        return Err(Error::WrongClass {
            expected: ClassCode::C320,
            found: g.class_code,
        });
    }
    Ok(g.tp_labels)
}

/// Newton solve of the system for `idx` from a (320) seed.
pub fn solve_bsb(idx: BsbIndex, seed: &CubicPotential, opts: &BsbOptions) -> Result<BsbSolution> {
    let labels = seed_labels(seed)?;
    solve_bsb_labeled(idx, seed, labels, opts)
}

pub fn solve_bsb_labeled(
    idx: BsbIndex,
    seed: &CubicPotential,
    labels: TurningPointLabels,
    opts: &BsbOptions,
) -> Result<BsbSolution> {
    let (p, lab, res, it) = newton(*seed, labels, idx.n as f64, idx.m as f64, opts)?;
    finish(idx, p, lab, res, it, opts)
}

/// Constants of the real orbit: `μ* = a³/b²` on the orbit and the
/// coefficients of `a_n = a*(n−½)^{4/5}`, `b_n = b*(n−½)^{6/5}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealOrbit {
    pub mu_star: f64,
    pub a_star: f64,
    pub b_star: f64,
    /// `β*` with the orbit point `(a, b) = (−1, −β*)`.
    pub beta: f64,
    /// `P₁` at `(−1, −β*)`, purely imaginary.
    pub period: Complex64,
}

fn orbit_point(beta: f64) -> CubicPotential {
    CubicPotential::real(-1.0, -beta)
}

/// Labels on `(−1, −β)`: the real root is λ₀, the root in the upper half
/// plane is λ₋₁ (as the classifier assigns them on this family).
fn orbit_labels(p: &CubicPotential) -> Result<TurningPointLabels> {
    let tps = p.turning_points(1e-8);
    if tps.roots.len() != 3 {
        return Err(Error::DegenerateTurningPoint("orbit family needs three roots".into()));
    }
    let mut r: Vec<Complex64> = tps.roots.iter().map(|t| t.value).collect();
    r.sort_by(|x, y| x.im.partial_cmp(&y.im).unwrap());
    Ok(TurningPointLabels {
        lambda0: r[1],
        lambda1: r[0],
        lambda_minus1: r[2],
    })
}

/// Root of `Re P₁ = 0` along `(−1, −β)`, bracketed in `β ∈ [0.002, 0.2]`.
pub fn real_orbit_constants(tol: f64) -> Result<RealOrbit> {
    let o = ActionOptions::default();
    let g = |beta: f64| -> Result<Complex64> {
        let p = orbit_point(beta);
        Ok(cycle_periods(&p, &orbit_labels(&p)?, &o)?[0].value)
    };
    let (mut lo, mut hi) = (0.002, 0.2);
    let (mut flo, fhi) = (g(lo)?.re, g(hi)?.re);
    if flo * fhi > 0.0 {
        return Err(Error::Bracketing(format!(
            "Re P₁ has one sign on [{lo}, {hi}]: {flo:.3e}, {fhi:.3e}"
        )));
    }
    // bisection down to the tolerance in β
    while hi - lo > tol * hi {
        let mid = 0.5 * (lo + hi);
        let fm = g(mid)?.re;
        if fm == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if fm * flo < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    let beta = 0.5 * (lo + hi);
    let period = g(beta)?;
    if period.im <= 0.0 {
        return Err(Error::Bracketing(format!("Im P₁ = {} is not positive", period.im)));
    }
    // (x,0) scales P₁ by x^{5/2}; x^{5/2}·Im P₁ = π is the n − ½ = 1 point
    let x = (PI / period.im).powf(0.4);
    Ok(RealOrbit {
        mu_star: -1.0 / (beta * beta),
        a_star: -x * x,
        b_star: -beta * x * x * x,
        beta,
        period,
    })
}

/// `(a_n, b_n)` on the real orbit for `n = 1..=n_max`.
pub fn real_poles(orbit: &RealOrbit, n_max: u32) -> Vec<(f64, f64)> {
    (1..=n_max)
        .map(|n| {
            let h = n as f64 - 0.5;
            (orbit.a_star * h.powf(0.8), orbit.b_star * h.powf(1.2))
        })
        .collect()
}

/// Seed for a lattice cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Seed {
    pub potential: CubicPotential,
    pub labels: Option<TurningPointLabels>,
    /// Solved neighbour used for continuation.
    pub from: Option<BsbIndex>,
}

/// Seed for `idx`: the real-pole point on the diagonal, otherwise the
/// nearest solved neighbour, falling back to the diagonal seed at
/// `round((n+m)/2)`.
pub fn seed_from_scaling(orbit: &RealOrbit, idx: BsbIndex, solved: &BTreeMap<BsbIndex, BsbSolution>) -> Seed {
    let diagonal = |k: u32| {
        let (a, b) = real_poles(orbit, k)[k as usize - 1];
        Seed {
            potential: CubicPotential::real(a, b),
            labels: None,
            from: None,
        }
    };
    if idx.n == idx.m {
        return diagonal(idx.n);
    }
    let dist = |j: &BsbIndex| j.n.abs_diff(idx.n) + j.m.abs_diff(idx.m);
    let best = solved
        .values()
        .filter(|s| dist(&s.index) == 1)
        .min_by_key(|s| (s.index.n.abs_diff(s.index.m), s.index));
    match best {
        Some(s) => Seed {
            potential: s.potential(),
            labels: Some(s.labels),
            from: Some(s.index),
        },
        None => diagonal(((idx.n + idx.m) as f64 / 2.0).round().max(1.0) as u32),
    }
}

/// Solves `idx` from a seed, walking the targets from the seed's index in
/// quarter steps when they differ.
pub fn solve_from_seed(idx: BsbIndex, seed: &Seed, opts: &BsbOptions) -> Result<BsbSolution> {
    let mut labels = match seed.labels {
        Some(l) => l,
        None => seed_labels(&seed.potential)?,
    };
    let mut p = seed.potential;
    if let Some(from) = seed.from {
        let inner = BsbOptions {
            tol: opts.tol.max(1e-8),
            ..*opts
        };
        let steps = 4;
        for s in 1..steps {
            let t = s as f64 / steps as f64;
            let n = from.n as f64 + t * (idx.n as f64 - from.n as f64);
            let m = from.m as f64 + t * (idx.m as f64 - from.m as f64);
            let (q, l, _, _) = newton(p, labels, n, m, &inner)?;
            p = q;
            labels = l;
        }
    }
    solve_bsb_labeled(idx, &p, labels, opts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeCell {
    pub index: BsbIndex,
    pub solution: Option<BsbSolution>,
    pub error: Option<String>,
}

/// Fills the `n ≤ n_max`, `m ≤ m_max` lattice: the diagonal first, then
/// cells in order of `|n − m|`, each level in parallel.
pub fn solve_lattice(orbit: &RealOrbit, n_max: u32, m_max: u32, opts: &BsbOptions) -> Vec<LatticeCell> {
    let mut solved: BTreeMap<BsbIndex, BsbSolution> = BTreeMap::new();
    let mut cells: BTreeMap<BsbIndex, LatticeCell> = BTreeMap::new();
    let max_d = n_max.max(m_max);
    for d in 0..max_d {
        let level: Vec<BsbIndex> = (1..=n_max)
            .flat_map(|n| (1..=m_max).map(move |m| BsbIndex { n, m }))
            .filter(|i| i.n.abs_diff(i.m) == d)
            .collect();
        let results: Vec<LatticeCell> = level
            .par_iter()
            .map(|&idx| {
                let seed = seed_from_scaling(orbit, idx, &solved);
                match solve_from_seed(idx, &seed, opts) {
                    Ok(s) => LatticeCell {
                        index: idx,
                        solution: Some(s),
                        error: None,
                    },
                    Err(e) => LatticeCell {
                        index: idx,
                        solution: None,
                        error: Some(e.to_string()),
                    },
                }
            })
            .collect();
        for c in results {
            if let Some(s) = c.solution {
                solved.insert(c.index, s);
            }
            cells.insert(c.index, c);
        }
    }
    cells.into_values().collect()
}

pub const CSV_HEADER: &str = "n,m,re_a,im_a,re_b,im_b,residual,rho_max";

/// CSV rows for the solved cells, full precision.
pub fn lattice_csv(cells: &[LatticeCell]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for c in cells {
        if let Some(s) = &c.solution {
            out.push_str(&format!(
                "{},{},{:e},{:e},{:e},{:e},{:e},{:e}\n",
                s.index.n, s.index.m, s.a.re, s.a.im, s.b.re, s.b.im, s.residual_norm, s.rho_max
            ));
        }
    }
    out
}

/// `min |arg a|` over the solved cells.
pub fn min_abs_arg(cells: &[LatticeCell]) -> Option<f64> {
    cells
        .iter()
        .filter_map(|c| c.solution.as_ref())
        .map(|s| s.a.arg().abs())
        .min_by(|x, y| x.partial_cmp(y).unwrap())
}
