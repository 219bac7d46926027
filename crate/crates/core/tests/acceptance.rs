//! Exit criteria. Runs without the libtest harness so that every criterion
//! prints its `PASS`/`FAIL` line; the process fails if any criterion does.

use std::f64::consts::PI;
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use piwkb::action::{cycle_period, cycle_periods, period_jacobians, ActionOptions, Cycle};
use piwkb::bsb::{self, BsbIndex, BsbOptions};
use piwkb::monodromy::{stokes_multipliers, tritronquee_test, MonodromyOptions};
use piwkb::painleve::{exact_coefficients, laurent_coeffs, pi_residual};
use piwkb::stokes::{classify, classify_by_periods, ClassCode, TraceOptions};
use piwkb::wkb::{relative_errors, RhoOptions};
use piwkb::{CubicPotential, Error, GroupElement};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

static ANY_FAILED: AtomicBool = AtomicBool::new(false);

fn report(id: u32, pass: bool, detail: String) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("acceptance {id}: {verdict} | {detail}");
    if !pass {
        ANY_FAILED.store(true, Ordering::SeqCst);
    }
}

fn within_rel(x: f64, target: f64, rel: f64) -> bool {
    ((x - target) / target).abs() <= rel
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_in_disk(rng: &mut ChaCha8Rng, r: f64) -> Complex64 {
    let rad = r * rng.gen::<f64>().sqrt();
    Complex64::from_polar(rad, rng.gen_range(-PI..PI))
}

fn quick() -> BsbOptions {
    BsbOptions {
        compute_rho: false,
        ..Default::default()
    }
}

fn diagonal(n_max: u32) -> Vec<bsb::BsbSolution> {
    let orbit = bsb::real_orbit_constants(1e-13).unwrap();
    bsb::real_poles(&orbit, n_max)
        .into_iter()
        .enumerate()
        .map(|(i, (a, b))| {
            let idx = BsbIndex::new(i as u32 + 1, i as u32 + 1).unwrap();
            bsb::solve_bsb(idx, &CubicPotential::real(a, b), &quick()).unwrap()
        })
        .collect()
}

fn criterion_1_real_orbit_constants() {
    let t = Instant::now();
    let o = bsb::real_orbit_constants(1e-13).unwrap();
    let el = t.elapsed();
    // μ(a_n, b_n) must not depend on n
    let mus: Vec<f64> = bsb::real_poles(&o, 5)
        .iter()
        .map(|(a, b)| a.powi(3) / b.powi(2))
        .collect();
    let spread = mus.iter().map(|m| (m - mus[0]).abs()).fold(0.0, f64::max) / mus[0].abs();
    let pass = within_rel(o.mu_star, -3158.92, 1e-3)
        && within_rel(o.a_star, -4.0874, 1e-3)
        && within_rel(o.b_star, -0.1470, 1e-3)
        && spread < 1e-8
        && el.as_secs() <= 30;
    report(
        1,
        pass,
        format!(
            "mu* = {:.4} (want -3158.92 ± 0.1%), a* = {:.5} (-4.0874 ± 0.1%), b* = {:.5} (-0.1470 ± 0.1%), mu(a_n,b_n) spread {:.1e}, {:.2}s",
            o.mu_star,
            o.a_star,
            o.b_star,
            spread,
            secs(el)
        ),
    );
}

fn criterion_2_table_two() {
    let t = Instant::now();
    let sols = diagonal(2);
    let el = t.elapsed();
    let (a1, b1, a2, b2) = (sols[0].a.re, sols[0].b.re, sols[1].a.re, sols[1].b.re);
    let pct = |x: f64, n: f64| 100.0 * ((x - n) / n).abs();
    let (e_a1, e_b1, e_a2) = (pct(a1, -2.38), pct(b1, -0.062), pct(a2, -5.66));
    let checks = [
        ("a1", within(a1, -2.34, 0.005)),
        ("b1", within(b1, -0.064, 0.001)),
        ("a2", within(a2, -5.65, 0.01)),
        ("b2", within(b2, -0.23, 0.005)),
        ("err a1", within(e_a1, 1.5, 0.5)),
        ("err b1", within(e_b1, 2.0, 0.5)),
        ("err a2", within(e_a2, 0.2, 0.5)),
        ("time", el.as_secs() <= 60),
    ];
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    report(
        2,
        failed.is_empty(),
        format!(
            "a1 = {a1:.5} (-2.34 ± 0.005), b1 = {b1:.5} (-0.064 ± 0.001), a2 = {a2:.5} (-5.65 ± 0.01), b2 = {b2:.5} (-0.23 ± 0.005); errors {e_a1:.2}% / {e_b1:.2}% / {e_a2:.2}% (1.5 / 2 / 0.2 ± 0.5); {:.2}s; off: {failed:?}",
            secs(el)
        ),
    );
}

fn criterion_3_argument_bound() {
    let t = Instant::now();
    let orbit = bsb::real_orbit_constants(1e-13).unwrap();
    let cells = bsb::solve_lattice(&orbit, 5, 5, &BsbOptions::default());
    let el = t.elapsed();
    let solved = cells.iter().filter(|c| c.solution.is_some()).count();
    let min_arg = bsb::min_abs_arg(&cells).unwrap_or(0.0);
    let failures: Vec<String> = cells
        .iter()
        .filter_map(|c| c.error.as_ref().map(|e| format!("({},{}): {e}", c.index.n, c.index.m)))
        .collect();
    let pass = solved == 25 && min_arg > 0.8 * PI && el.as_secs() <= 300;
    report(
        3,
        pass,
        format!(
            "{solved}/25 cells solved, min |arg a| = {min_arg:.5} (> 4π/5 = {:.5}), {:.1}s {}",
            0.8 * PI,
            secs(el),
            failures.join("; ")
        ),
    );
}

fn criterion_4_admissibility() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_abs: f64 = 0.0;
    let mut worst_rel: f64 = 0.0;
    let mut worst_at = (c(0.0, 0.0), c(0.0, 0.0), 0.0);
    let mut errors = vec![];
    let mut within_bound = 0;
    let mut worst_floor: f64 = 0.0;
    for _ in 0..20 {
        let p = CubicPotential::new(random_in_disk(&mut rng, 3.0), random_in_disk(&mut rng, 3.0));
        match stokes_multipliers(&p, &MonodromyOptions::default()) {
            Ok(s) => {
                let r = s.max_admissibility_residual();
                if r <= 1e-6 {
                    within_bound += 1;
                }
                if r > worst_abs {
                    // rounding the terms of the relation to f64 alone leaves this much
                    worst_floor = (0..5)
                        .map(|k| f64::EPSILON * (1.0 + (s.get(k) * s.get(k + 1)).norm() + s.get(k + 3).norm()))
                        .fold(0.0, f64::max);
                    let big = s.sigma.iter().map(|z| z.norm()).fold(0.0, f64::max);
                    worst_at = (p.a, p.b, big);
                }
                worst_abs = worst_abs.max(r);
                worst_rel = worst_rel.max(s.max_relative_admissibility_residual());
            }
            Err(e) => errors.push(e.to_string()),
        }
    }
    let el = t.elapsed();
    let pass = errors.is_empty() && worst_abs <= 1e-6 && el.as_secs() <= 300;
    report(
        4,
        pass,
        format!(
            "max |1+σ_kσ_k+1+iσ_k+3| = {worst_abs:.2e} (≤ 1e-6) at a = {:.3}, b = {:.3} where max|σ| = {:.2e} (f64 rounding floor {worst_floor:.1e}); {within_bound}/20 within bound; relative {worst_rel:.2e}; {} errors; {:.1}s",
            worst_at.0,
            worst_at.1,
            worst_at.2,
            errors.len(),
            secs(el)
        ),
    );
}

fn criterion_5_oracle_convergence() {
    let t = Instant::now();
    let sols = diagonal(4);
    let margins: Vec<f64> = sols
        .iter()
        .map(|s| {
            let m = stokes_multipliers(&s.potential(), &MonodromyOptions::default()).unwrap();
            tritronquee_test(&m, 0.1).margin
        })
        .collect();
    let el = t.elapsed();
    let monotone = margins.windows(2).all(|w| w[1] < w[0]);
    report(
        5,
        monotone && el.as_secs() <= 300,
        format!("max(|σ2|,|σ-2|) for n = 1..4: {:?}, {:.1}s", margins.iter().map(|m| format!("{m:.4e}")).collect::<Vec<_>>(), secs(el)),
    );
}

fn criterion_6_classification() {
    let t = Instant::now();
    let topts = TraceOptions::default();
    let zero = classify(&CubicPotential::real(0.0, 0.0), &topts).unwrap().class_code;
    let orbit = bsb::real_orbit_constants(1e-13).unwrap();
    let on_orbit = classify(&CubicPotential::real(-1.0, -orbit.beta), &topts).unwrap().class_code;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut violations = vec![];
    let mut disagreements = vec![];
    let mut ambiguous = 0;
    let mut compared = 0;
    for _ in 0..100 {
        let p = CubicPotential::real(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        match classify(&p, &topts) {
            Ok(g) => {
                if p.turning_points(1e-8).all_simple() {
                    compared += 1;
                    match classify_by_periods(&p, topts.edge_tol, topts.ambiguity_tol) {
                        Ok(pc) if pc.matches(g.class_code) => {}
                        other => disagreements.push(format!("{} {}: {} vs {:?}", p.a, p.b, g.class_code, other)),
                    }
                }
            }
            Err(Error::AmbiguousClass { .. }) => ambiguous += 1,
            Err(e) => violations.push(format!("{} {}: {e}", p.a, p.b)),
        }
    }
    let el = t.elapsed();
    let pass = zero == ClassCode::C000
        && on_orbit == ClassCode::C320
        && violations.is_empty()
        && ambiguous == 0
        && disagreements.is_empty()
        && el.as_secs() <= 300;
    report(
        6,
        pass,
        format!(
            "(0,0) -> ({zero}), real orbit -> ({on_orbit}), 100 real samples: {} violations, {ambiguous} ambiguous, {}/{compared} period disagreements; {:.1}s {:?} {:?}",
            violations.len(),
            disagreements.len(),
            secs(el),
            violations,
            disagreements
        ),
    );
}

fn criterion_7_scaling_laws() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_p: f64 = 0.0;
    let mut worst_rho: f64 = 0.0;
    let mut errors = vec![];
    let mut n = 0;
    while n < 10 {
        let p = CubicPotential::new(random_in_disk(&mut rng, 3.0), random_in_disk(&mut rng, 3.0));
        let x: f64 = rng.gen_range(0.5..2.0);
        let q = GroupElement::new(x, 0).apply(&p);
        let gp = match classify(&p, &TraceOptions::default()) {
            Ok(g) if g.class_code.simple_count() == 3 => g,
            _ => continue,
        };
        n += 1;
        let run = || -> piwkb::Result<(f64, f64)> {
            let gq = classify(&q, &TraceOptions::default())?;
            let mut wp: f64 = 0.0;
            for cyc in [Cycle::A1, Cycle::AMinus1] {
                let pp = cycle_period(&p, cyc)?.value;
                let pq = cycle_period(&q, cyc)?.value;
                wp = wp.max((pq - x.powf(2.5) * pp).norm() / pq.norm());
            }
            let rp = relative_errors(&p, &gp, &RhoOptions::default())?;
            let rq = relative_errors(&q, &gq, &RhoOptions::default())?;
            let mut wr: f64 = 0.0;
            for l in 0..5 {
                for k in 0..5 {
                    let (u, v) = (rp.get(l, k), rq.get(l, k));
                    if u.is_finite() && u > 0.0 {
                        wr = wr.max((v - x.powf(-2.5) * u).abs() / v);
                    } else if u != v {
                        wr = f64::INFINITY;
                    }
                }
            }
            Ok((wp, wr))
        };
        match run() {
            Ok((wp, wr)) => {
                worst_p = worst_p.max(wp);
                worst_rho = worst_rho.max(wr);
            }
            Err(e) => errors.push(e.to_string()),
        }
    }
    let pass = errors.is_empty() && worst_p <= 1e-8 && worst_rho <= 1e-8;
    report(
        7,
        pass,
        format!(
            "10 samples: period x^(5/2) rel. error {worst_p:.2e}, rho x^(-5/2) rel. error {worst_rho:.2e} (≤ 1e-8); errors {errors:?}"
        ),
    );
}

fn criterion_8_jacobian() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let orbit = bsb::real_orbit_constants(1e-13).unwrap();
    let base: Vec<bsb::BsbSolution> = bsb::solve_lattice(&orbit, 3, 3, &quick())
        .into_iter()
        .filter_map(|c| c.solution)
        .collect();
    let o = ActionOptions::default();
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    let mut errors = vec![];
    for i in 0..20 {
        let s = &base[i % base.len()];
        let g = GroupElement::new(rng.gen_range(0.6..1.8), rng.gen_range(0..5));
        let p = g.apply(&s.potential());
        let run = || -> piwkb::Result<f64> {
            let gr = classify(&p, &TraceOptions::default())?;
            if gr.class_code != ClassCode::C320 {
                return Err(Error::WrongClass {
                    expected: ClassCode::C320,
                    found: gr.class_code,
                });
            }
            let lab = gr.tp_labels;
            let j = period_jacobians(&p, &lab, &o)?;
            let mut w: f64 = 0.0;
            for col in 0..2 {
                let h = 1e-5 * if col == 0 { p.a.norm() } else { p.b.norm() };
                let shift = |t: f64| {
                    let mut q = p;
                    if col == 0 {
                        q.a += t;
                    } else {
                        q.b += t;
                    }
                    q
                };
                let (qp, qm) = (shift(h), shift(-h));
                let lp = lab.follow(&qp.turning_points(1e-8)).ok_or(Error::LabelsUnavailable("+h".into()))?;
                let lm = lab.follow(&qm.turning_points(1e-8)).ok_or(Error::LabelsUnavailable("-h".into()))?;
                let fp = cycle_periods(&qp, &lp, &o)?;
                let fm = cycle_periods(&qm, &lm, &o)?;
                for row in 0..2 {
                    let fd = (fp[row].value - fm[row].value) / (2.0 * h);
                    w = w.max((fd - j[row][col]).norm() / j[row][col].norm());
                }
            }
            Ok(w)
        };
        match run() {
            Ok(w) => {
                checked += 1;
                worst = worst.max(w);
            }
            Err(e) => errors.push(e.to_string()),
        }
    }
    report(
        8,
        checked == 20 && worst <= 1e-6,
        format!("{checked}/20 (320) samples, max relative |J − FD| = {worst:.2e} (≤ 1e-6); errors {errors:?}"),
    );
}

fn criterion_9_laurent() {
    let e = exact_coefficients();
    let (a, b) = (c(-2.347591993156585, 0.0), c(-0.06399774265973625, 0.0));
    let s = laurent_coeffs(a, b, 20).unwrap();
    let c2_exact = e[4].0.len() == 1 && e[4].0.get(&(1, 0)).map(|r| r.to_string()) == Some("1/10".into());
    let c3_exact = e[5].0.len() == 1 && e[5].0.get(&(0, 0)).map(|r| r.to_string()) == Some("1/6".into());
    let c2_value = s.coeff(2) == a / 10.0;
    let worst = (0..8)
        .map(|k| {
            let z = a + Complex64::from_polar(0.05, 2.0 * PI * k as f64 / 8.0);
            pi_residual(&s, z, None).unwrap()
        })
        .fold(0.0, f64::max);
    report(
        9,
        c2_exact && c3_exact && c2_value && worst < 1e-10,
        format!("c2 = a/10: {c2_exact}, c3 = 1/6: {c3_exact}; max residual at |z−a| = 0.05, N = 20: {worst:.2e} (< 1e-10)"),
    );
}

fn main() {
    let criteria: [(u32, fn()); 9] = [
        (1, criterion_1_real_orbit_constants),
        (2, criterion_2_table_two),
        (3, criterion_3_argument_bound),
        (4, criterion_4_admissibility),
        (5, criterion_5_oracle_convergence),
        (6, criterion_6_classification),
        (7, criterion_7_scaling_laws),
        (8, criterion_8_jacobian),
        (9, criterion_9_laurent),
    ];
    for (id, run) in criteria {
        if std::panic::catch_unwind(run).is_err() {
            report(id, false, "panicked".into());
        }
    }
    if ANY_FAILED.load(Ordering::SeqCst) {
        std::process::exit(1);
    }
}
