//! Cubic potentials `V(λ; a, b) = 4λ³ − 2aλ − 28b`, their turning points,
//! the `R⁺ × Z₅` rescaling action and the invariant coordinates (ν, μ).

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default relative tolerance used to merge roots into double/triple points.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-8;

/// `Ω = e^{2πi/5}`.
pub fn omega() -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI / 5.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubicPotential {
    pub a: Complex64,
    pub b: Complex64,
}

impl CubicPotential {
    pub fn new(a: Complex64, b: Complex64) -> Self {
        Self { a, b }
    }

    pub fn real(a: f64, b: f64) -> Self {
        Self::new(Complex64::new(a, 0.0), Complex64::new(b, 0.0))
    }

    #[inline]
    pub fn value(&self, l: Complex64) -> Complex64 {
        4.0 * l * l * l - 2.0 * self.a * l - 28.0 * self.b
    }

    #[inline]
    pub fn derivative(&self, l: Complex64) -> Complex64 {
        12.0 * l * l - 2.0 * self.a
    }

    #[inline]
    pub fn second_derivative(&self, l: Complex64) -> Complex64 {
        24.0 * l
    }

    /// Taylor coefficients of V at `l` (V, V′, V″/2, V‴/6).
    pub fn taylor(&self, l: Complex64) -> [Complex64; 4] {
        [
            self.value(l),
            self.derivative(l),
            Complex64::new(12.0, 0.0) * l,
            Complex64::new(4.0, 0.0),
        ]
    }

    pub fn conj(&self) -> Self {
        Self::new(self.a.conj(), self.b.conj())
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.a.im.abs() <= tol * self.a.norm().max(1.0) && self.b.im.abs() <= tol * self.b.norm().max(1.0)
    }

    /// Scale used for relative tolerances: `max(1, |a|, |b|)`.
    pub fn coefficient_scale(&self) -> f64 {
        1f64.max(self.a.norm()).max(self.b.norm())
    }

    /// Natural length scale of the turning-point cloud, `|a|^{1/2} + |b|^{1/3}`.
    pub fn length_scale(&self) -> f64 {
        self.a.norm().sqrt() + self.b.norm().cbrt()
    }

    pub fn moduli(&self) -> Result<ModuliCoords> {
        if self.a == Complex64::new(0.0, 0.0) {
            return Err(Error::DegenerateCoordinates);
        }
        Ok(ModuliCoords {
            nu: self.b / self.a,
            mu: self.b * self.b / (self.a * self.a * self.a),
        })
    }

    pub fn turning_points(&self, tol: f64) -> TurningPointSet {
        turning_points(self, tol)
    }
}

/// (ν, μ) = (b/a, b²/a³).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModuliCoords {
    pub nu: Complex64,
    pub mu: Complex64,
}

impl ModuliCoords {
    /// `a³/b² = 1/μ`, the quantity tabulated for the real pole orbit.
    pub fn inverse_mu(&self) -> Complex64 {
        self.mu.inv()
    }
}

/// Element `(x, m)` of `R⁺ × Z₅`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupElement {
    pub x: f64,
    pub m: i32,
}

impl GroupElement {
    pub fn new(x: f64, m: i32) -> Self {
        assert!(x > 0.0, "group element needs x > 0");
        Self { x, m: m.rem_euclid(5) }
    }

    pub fn identity() -> Self {
        Self::new(1.0, 0)
    }

    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        GroupElement::new(self.x * other.x, self.m + other.m)
    }

    pub fn inverse(&self) -> GroupElement {
        GroupElement::new(1.0 / self.x, -self.m)
    }

    /// `(a, b) ↦ (Ω^{2m} x² a, Ω^{3m} x³ b)`.
    pub fn apply(&self, p: &CubicPotential) -> CubicPotential {
        let w = omega();
        CubicPotential::new(
            w.powi(2 * self.m) * self.x * self.x * p.a,
            w.powi(3 * self.m) * self.x.powi(3) * p.b,
        )
    }

    /// Image of a point of the λ-plane under the induced map `λ ↦ Ω^m x λ`,
    /// which carries the turning points of `p` onto those of `apply(p)`.
    pub fn map_point(&self, l: Complex64) -> Complex64 {
        omega().powi(self.m) * self.x * l
    }
}

pub fn apply_group(g: &GroupElement, p: &CubicPotential) -> CubicPotential {
    g.apply(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Multiplicity {
    Simple,
    Double,
    Triple,
}

impl Multiplicity {
    pub fn order(self) -> usize {
        match self {
            Multiplicity::Simple => 1,
            Multiplicity::Double => 2,
            Multiplicity::Triple => 3,
        }
    }

    /// Number of Stokes lines emanating from a turning point of this order.
    pub fn valency(self) -> usize {
        self.order() + 2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurningPoint {
    pub value: Complex64,
    pub multiplicity: Multiplicity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurningPointSet {
    pub roots: Vec<TurningPoint>,
}

impl TurningPointSet {
    pub fn total_multiplicity(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity.order()).sum()
    }

    /// Roots repeated by multiplicity.
    pub fn expanded(&self) -> Vec<Complex64> {
        self.roots
            .iter()
            .flat_map(|r| std::iter::repeat_n(r.value, r.multiplicity.order()))
            .collect()
    }

    pub fn all_simple(&self) -> bool {
        self.roots.iter().all(|r| r.multiplicity == Multiplicity::Simple)
    }

    /// Smallest distance between distinct roots (0 for a single root).
    pub fn min_separation(&self) -> f64 {
        let mut d = f64::INFINITY;
        for i in 0..self.roots.len() {
            for j in i + 1..self.roots.len() {
                d = d.min((self.roots[i].value - self.roots[j].value).norm());
            }
        }
        if d.is_finite() {
            d
        } else {
            0.0
        }
    }

    pub fn max_modulus(&self) -> f64 {
        self.roots.iter().map(|r| r.value.norm()).fold(0.0, f64::max)
    }

    /// Index of the root nearest to `l`.
    pub fn nearest(&self, l: Complex64) -> (usize, f64) {
        self.roots
            .iter()
            .enumerate()
            .map(|(i, r)| (i, (r.value - l).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .expect("a cubic has roots")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TurningPointLabel {
    Lambda0,
    Lambda1,
    LambdaMinus1,
}

/// Assignment of the labels λ₀, λ₁, λ₋₁ to roots. Produced by the Stokes
/// classifier; entries may coincide for degenerate classes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurningPointLabels {
    pub lambda0: Complex64,
    pub lambda1: Complex64,
    pub lambda_minus1: Complex64,
}

impl TurningPointLabels {
    pub fn get(&self, label: TurningPointLabel) -> Complex64 {
        match label {
            TurningPointLabel::Lambda0 => self.lambda0,
            TurningPointLabel::Lambda1 => self.lambda1,
            TurningPointLabel::LambdaMinus1 => self.lambda_minus1,
        }
    }

    /// Labels carried along by `λ ↦ Ω^m x λ`.
    pub fn mapped(&self, g: &GroupElement) -> Self {
        Self {
            lambda0: g.map_point(self.lambda0),
            lambda1: g.map_point(self.lambda1),
            lambda_minus1: g.map_point(self.lambda_minus1),
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            lambda0: self.lambda0.conj(),
            lambda1: self.lambda_minus1.conj(),
            lambda_minus1: self.lambda1.conj(),
        }
    }

    /// Re-matches each label to the nearest root of `tps`, used to follow the
    /// labels through a small change of the potential.
    pub fn follow(&self, tps: &TurningPointSet) -> Option<Self> {
        let pick = |l: Complex64| tps.roots[tps.nearest(l).0].value;
        let out = Self {
            lambda0: pick(self.lambda0),
            lambda1: pick(self.lambda1),
            lambda_minus1: pick(self.lambda_minus1),
        };
        let distinct = out.lambda0 != out.lambda1
            && out.lambda0 != out.lambda_minus1
            && out.lambda1 != out.lambda_minus1;
        distinct.then_some(out)
    }
}

fn polish(p: &CubicPotential, mut x: Complex64) -> Complex64 {
    for _ in 0..4 {
        let d = p.derivative(x);
        if d.norm() == 0.0 {
            break;
        }
        let step = p.value(x) / d;
        if !step.is_finite() {
            break;
        }
        x -= step;
        if step.norm() <= 1e-17 * (1.0 + x.norm()) {
            break;
        }
    }
    x
}

/// Roots of `4λ³ − 2aλ − 28b`, merged into double/triple points when the
/// relative discriminant falls below `tol`.
pub fn turning_points(p: &CubicPotential, tol: f64) -> TurningPointSet {
    assert!(tol > 0.0, "tolerance must be positive");
    // depressed monic form λ³ + sλ + t
    let s = -p.a / 2.0;
    let t = -7.0 * p.b;
    if p.a.norm() + p.b.norm() <= tol {
        return TurningPointSet {
            roots: vec![TurningPoint {
                value: Complex64::new(0.0, 0.0),
                multiplicity: Multiplicity::Triple,
            }],
        };
    }
    let disc = -4.0 * s * s * s - 27.0 * t * t;
    let disc_scale = 4.0 * s.norm().powi(3) + 27.0 * t.norm_sqr();
    if disc.norm() <= tol * disc_scale && s.norm() > 0.0 {
        let double = -3.0 * t / (2.0 * s);
        let simple = 3.0 * t / s;
        return TurningPointSet {
            roots: vec![
                TurningPoint {
                    value: simple,
                    multiplicity: Multiplicity::Simple,
                },
                TurningPoint {
                    value: double,
                    multiplicity: Multiplicity::Double,
                },
            ],
        };
    }
    // Cardano with the larger-modulus choice of the inner square root.
    let sq = (t * t / 4.0 + s * s * s / 27.0).sqrt();
    let u1 = -t / 2.0 + sq;
    let u2 = -t / 2.0 - sq;
    let u = if u1.norm() >= u2.norm() { u1 } else { u2 };
    let c = u.powf(1.0 / 3.0);
    let w = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
    let mut roots = Vec::with_capacity(3);
    let mut ck = c;
    for _ in 0..3 {
        let r = ck - s / (3.0 * ck);
        roots.push(TurningPoint {
            value: polish(p, r),
            multiplicity: Multiplicity::Simple,
        });
        ck *= w;
    }
    TurningPointSet { roots }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_potential_has_triple_root() {
        let tp = CubicPotential::real(0.0, 0.0).turning_points(DEFAULT_CLUSTER_TOL);
        assert_eq!(tp.roots.len(), 1);
        assert_eq!(tp.roots[0].multiplicity, Multiplicity::Triple);
        assert_eq!(tp.total_multiplicity(), 3);
    }

    #[test]
    fn a2_b0_roots() {
        let tp = CubicPotential::real(2.0, 0.0).turning_points(DEFAULT_CLUSTER_TOL);
        assert!(tp.all_simple());
        let mut re: Vec<f64> = tp.roots.iter().map(|r| r.value.re).collect();
        re.sort_by(f64::total_cmp);
        for (x, e) in re.iter().zip([-1.0, 0.0, 1.0]) {
            assert!((x - e).abs() < 1e-14);
        }
        assert!(tp.roots.iter().all(|r| r.value.im.abs() < 1e-14));
    }

    #[test]
    fn table_pair_has_one_real_root_and_a_conjugate_pair() {
        let tp = CubicPotential::real(-2.34, -0.064).turning_points(DEFAULT_CLUSTER_TOL);
        assert!(tp.all_simple());
        let real: Vec<_> = tp.roots.iter().filter(|r| r.value.im.abs() < 1e-12).collect();
        assert_eq!(real.len(), 1);
        assert!(real[0].value.re < 0.0);
        let cplx: Vec<_> = tp.roots.iter().filter(|r| r.value.im.abs() >= 1e-12).collect();
        assert_eq!(cplx.len(), 2);
        assert!((cplx[0].value - cplx[1].value.conj()).norm() < 1e-12);
    }

    #[test]
    fn double_root_family_is_detected() {
        // (λ + c)²(λ − 2c) scaled by 4: a = 6c², b = 2c³/7
        let cc = 0.7;
        let p = CubicPotential::real(6.0 * cc * cc, 2.0 * cc * cc * cc / 7.0);
        let tp = p.turning_points(DEFAULT_CLUSTER_TOL);
        assert_eq!(tp.roots.len(), 2);
        let double = tp.roots.iter().find(|r| r.multiplicity == Multiplicity::Double).unwrap();
        assert!((double.value - c(-cc, 0.0)).norm() < 1e-12);
        let simple = tp.roots.iter().find(|r| r.multiplicity == Multiplicity::Simple).unwrap();
        assert!((simple.value - c(2.0 * cc, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn group_identity_and_scaling() {
        let p = CubicPotential::new(c(0.3, -1.2), c(2.0, 0.5));
        assert_eq!(GroupElement::identity().apply(&p), p);
        let q = GroupElement::new(1.7, 0).apply(&p);
        assert!((q.a - 1.7 * 1.7 * p.a).norm() < 1e-14);
        assert!((q.b - 1.7f64.powi(3) * p.b).norm() < 1e-14);
    }

    #[test]
    fn group_rotation_of_unit_potential() {
        let q = GroupElement::new(1.0, 1).apply(&CubicPotential::real(1.0, 1.0));
        assert!((q.a - Complex64::from_polar(1.0, 4.0 * PI / 5.0)).norm() < 1e-14);
        assert!((q.b - Complex64::from_polar(1.0, 6.0 * PI / 5.0)).norm() < 1e-14);
    }

    #[test]
    fn moduli_of_unit_potential() {
        let m = CubicPotential::real(1.0, 1.0).moduli().unwrap();
        assert!((m.nu - 1.0).norm() < 1e-15);
        assert!((m.mu - 1.0).norm() < 1e-15);
    }

    #[test]
    fn moduli_degenerate_for_zero_a() {
        assert_eq!(
            CubicPotential::real(0.0, 1.0).moduli(),
            Err(Error::DegenerateCoordinates)
        );
    }

    #[test]
    fn table_pair_inverse_mu() {
        // the tabulated μ₁ ≈ −3158 is a³/b² of the WKB pair
        let m = CubicPotential::real(-2.347_592, -0.063_998).moduli().unwrap();
        assert!((m.inverse_mu().re + 3158.9).abs() < 1.0);
    }

    #[test]
    fn mapped_turning_points_follow_the_group() {
        let p = CubicPotential::new(c(1.1, 0.4), c(-0.3, 0.9));
        let g = GroupElement::new(1.3, 2);
        let q = g.apply(&p);
        for r in p.turning_points(DEFAULT_CLUSTER_TOL).roots {
            assert!(q.value(g.map_point(r.value)).norm() < 1e-12);
        }
    }
}
