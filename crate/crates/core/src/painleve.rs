//! Laurent expansion of Painlevé-I solutions `y″ = 6y² − z` at a pole:
//! `y = (z−a)⁻² + a(z−a)²/10 + (z−a)³/6 + b(z−a)⁴ + Σ_{j≥5} c_j (z−a)^j`.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported truncation order.
pub const MAX_ORDER: usize = 50;

/// Polynomial in `(a, b)` with exact rational coefficients, keyed by the
/// exponents `(p, q)` of `a^p b^q`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly(pub BTreeMap<(u32, u32), BigRational>);

impl Poly {
    fn constant(c: BigRational) -> Self {
        let mut m = BTreeMap::new();
        if !c.is_zero() {
            m.insert((0, 0), c);
        }
        Poly(m)
    }

    fn monomial(p: u32, q: u32) -> Self {
        let mut m = BTreeMap::new();
        m.insert((p, q), BigRational::from_integer(1.into()));
        Poly(m)
    }

    fn add_scaled(&mut self, o: &Poly, s: &BigRational) {
        for (k, v) in &o.0 {
            let e = self.0.entry(*k).or_insert_with(BigRational::zero);
            *e += v * s;
        }
        self.0.retain(|_, v| !v.is_zero());
    }

    fn mul(&self, o: &Poly) -> Poly {
        let mut out = Poly::default();
        for ((p1, q1), v1) in &self.0 {
            for ((p2, q2), v2) in &o.0 {
                let e = out.0.entry((p1 + p2, q1 + q2)).or_insert_with(BigRational::zero);
                *e += v1 * v2;
            }
        }
        out.0.retain(|_, v| !v.is_zero());
        out
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn eval(&self, a: Complex64, b: Complex64) -> Complex64 {
        self.0
            .iter()
            .map(|((p, q), v)| a.powu(*p) * b.powu(*q) * v.to_f64().unwrap_or(f64::NAN))
            .sum()
    }
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Exact coefficients `c_j(a, b)` for `j = −2..=MAX_ORDER`, stored at `j + 2`.
/// From `(j−4)(j+3) c_j = 6 Σ c_i c_k − a δ_{j2} − δ_{j3}`, the sum over
/// `i + k = j − 2` with `i, k ≥ −1`.
pub fn exact_coefficients() -> &'static [Poly] {
    static CACHE: OnceLock<Vec<Poly>> = OnceLock::new();
    CACHE.get_or_init(|| {
        let mut c: Vec<Poly> = vec![Poly::constant(rat(1, 1))];
        for j in -1..=MAX_ORDER as i64 {
            if j == 4 {
                c.push(Poly::monomial(0, 1));
                continue;
            }
            let mut rhs = Poly::default();
            for i in -1..=j - 1 {
                let k = j - 2 - i;
                if k < -1 {
                    continue;
                }
                let prod = c[(i + 2) as usize].mul(&c[(k + 2) as usize]);
                rhs.add_scaled(&prod, &rat(6, 1));
            }
            if j == 2 {
                rhs.add_scaled(&Poly::monomial(1, 0), &rat(-1, 1));
            }
            if j == 3 {
                rhs.add_scaled(&Poly::constant(rat(1, 1)), &rat(-1, 1));
            }
            let mut cj = Poly::default();
            cj.add_scaled(&rhs, &rat(1, (j - 4) * (j + 3)));
            c.push(cj);
        }
        c
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaurentSeries {
    pub pole: Complex64,
    pub b: Complex64,
    /// `c_j` at index `j + 2`, for `j = −2..=order`.
    pub coeffs: Vec<Complex64>,
    pub order: usize,
}

impl LaurentSeries {
    pub fn coeff(&self, j: i64) -> Complex64 {
        self.coeffs[(j + 2) as usize]
    }

    /// `(y, y′, y″)` of the truncated series.
    pub fn eval(&self, z: Complex64) -> (Complex64, Complex64, Complex64) {
        let s = z - self.pole;
        let mut y = Complex64::new(0.0, 0.0);
        let mut d1 = Complex64::new(0.0, 0.0);
        let mut d2 = Complex64::new(0.0, 0.0);
        for (idx, c) in self.coeffs.iter().enumerate() {
            let j = idx as i32 - 2;
            let jf = j as f64;
            y += c * s.powi(j);
            d1 += c * jf * s.powi(j - 1);
            d2 += c * jf * (jf - 1.0) * s.powi(j - 2);
        }
        (y, d1, d2)
    }

    /// Radius inside which the truncated series is trusted:
    /// `0.3 · min(1, (10/|a|)^{1/4}, |b|^{−1/6})`.
    pub fn safe_radius(&self) -> f64 {
        let mut r: f64 = 1.0;
        if self.pole.norm() > 0.0 {
            r = r.min((10.0 / self.pole.norm()).powf(0.25));
        }
        if self.b.norm() > 0.0 {
            r = r.min(self.b.norm().powf(-1.0 / 6.0));
        }
        0.3 * r
    }
}

pub fn laurent_coeffs(a: Complex64, b: Complex64, n: usize) -> Result<LaurentSeries> {
    if !(5..=MAX_ORDER).contains(&n) {
        return Err(Error::InvalidArgument(format!(
            "truncation order {n} outside 5..={MAX_ORDER}"
        )));
    }
    let coeffs = exact_coefficients()[..n + 3].iter().map(|c| c.eval(a, b)).collect();
    Ok(LaurentSeries {
        pole: a,
        b,
        coeffs,
        order: n,
    })
}

/// `|y″ − 6y² + z|` of the truncated series; `radius` overrides the safe
/// radius.
pub fn pi_residual(s: &LaurentSeries, z: Complex64, radius: Option<f64>) -> Result<f64> {
    let d = (z - s.pole).norm();
    let r = radius.unwrap_or_else(|| s.safe_radius());
    if d == 0.0 || d >= r {
        return Err(Error::InvalidArgument(format!(
            "|z − a| = {d:.3e} outside (0, {r:.3e})"
        )));
    }
    // with y = h⁻² + r the h⁻⁴ terms cancel exactly:
    // y″ − 6y² + z = r″ − 12 r/h² − 6r² + z
    let h = z - s.pole;
    let mut r = Complex64::new(0.0, 0.0);
    let mut r2 = Complex64::new(0.0, 0.0);
    let mut r_over_h2 = Complex64::new(0.0, 0.0);
    for j in 2..=s.order as i32 {
        let cj = s.coeff(j as i64);
        let jf = j as f64;
        r += cj * h.powi(j);
        r2 += cj * jf * (jf - 1.0) * h.powi(j - 2);
        r_over_h2 += cj * h.powi(j - 2);
    }
    Ok((r2 - 12.0 * r_over_h2 - 6.0 * r * r + z).norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    const A1: f64 = -2.347_591_993_156_67;
    const B1: f64 = -0.063_997_742_659_733;

    #[test]
    fn fixed_low_orders() {
        let e = exact_coefficients();
        assert_eq!(e[0], Poly::constant(rat(1, 1)));
        assert!(e[1].is_zero() && e[2].is_zero() && e[3].is_zero());
        let mut a10 = Poly::default();
        a10.add_scaled(&Poly::monomial(1, 0), &rat(1, 10));
        assert_eq!(e[4], a10);
        assert_eq!(e[5], Poly::constant(rat(1, 6)));
        assert_eq!(e[6], Poly::monomial(0, 1));
        // every product in the j = 5 sum has a vanishing factor; at j = 6
        // only c₂² survives: 18 c₆ = 6 a²/100
        assert!(e[7].is_zero());
        let mut c6 = Poly::default();
        c6.add_scaled(&Poly::monomial(2, 0), &rat(1, 300));
        assert_eq!(e[8], c6);
    }

    #[test]
    fn series_substitution() {
        // independent oracle: full Cauchy product of the truncated series
        let (a, b) = (c(-1.3, 0.4), c(0.2, -0.7));
        let n = 24;
        let s = laurent_coeffs(a, b, n).unwrap();
        // powers s^k for k = −4.. collected at k + 4
        let mut lhs = vec![Complex64::new(0.0, 0.0); 2 * n + 8];
        for j in -2..=n as i64 {
            let jf = j as f64;
            lhs[(j - 2 + 4) as usize] += s.coeff(j) * jf * (jf - 1.0);
        }
        for i in -2..=n as i64 {
            for k in -2..=n as i64 {
                lhs[(i + k + 4) as usize] -= 6.0 * s.coeff(i) * s.coeff(k);
            }
        }
        lhs[4] += a;
        lhs[5] += 1.0;
        // powers up to s^{n−3} involve only known coefficients
        for (k, v) in lhs.iter().enumerate().take(n - 3 + 4 + 1) {
            assert!(v.norm() < 1e-11, "s^{}: {v}", k as i64 - 4);
        }
    }

    #[test]
    fn real_coefficients() {
        for p in exact_coefficients() {
            for v in p.0.values() {
                assert!(v.to_f64().unwrap().is_finite());
            }
        }
        let (a, b) = (c(0.7, -1.1), c(-0.3, 0.5));
        let s1 = laurent_coeffs(a, b, 20).unwrap();
        let s2 = laurent_coeffs(a.conj(), b.conj(), 20).unwrap();
        for (x, y) in s1.coeffs.iter().zip(&s2.coeffs) {
            assert!((x.conj() - y).norm() <= 1e-14 * (1.0 + x.norm()));
        }
        let z = a + c(0.04, 0.03);
        let r1 = pi_residual(&s1, z, None).unwrap();
        let r2 = pi_residual(&s2, z.conj(), None).unwrap();
        assert!((r1 - r2).abs() <= 1e-12 * (1.0 + r1));
    }

    #[test]
    fn residual_decays_with_order() {
        let (a, b) = (c(A1, 0.0), c(B1, 0.0));
        let z = a + 0.1;
        let mut last = f64::INFINITY;
        // the sparsity pattern of c_j makes single steps uneven; compare
        // orders five apart
        for n in [6, 11, 16, 21] {
            let r = pi_residual(&laurent_coeffs(a, b, n).unwrap(), z, None).unwrap();
            assert!(r < 0.1 * last || r < 1e-15, "N = {n}: {r:e}");
            last = r;
        }
        assert!(last < 1e-12);
    }

    #[test]
    fn double_pole() {
        let s = laurent_coeffs(c(A1, 0.0), c(B1, 0.0), 20).unwrap();
        for k in 0..3 {
            let h = Complex64::from_polar(1e-3, 2.0 * std::f64::consts::PI * k as f64 / 3.0 + 0.1);
            let (y, _, _) = s.eval(s.pole + h);
            assert!((h * h * y - 1.0).norm() < 1e-8);
        }
    }

    #[test]
    fn outside_radius_rejected() {
        let s = laurent_coeffs(c(1.0, 0.0), c(0.0, 0.0), 10).unwrap();
        assert!(pi_residual(&s, c(3.0, 0.0), None).is_err());
        assert!(pi_residual(&s, c(1.0, 0.0), None).is_err());
        assert!(laurent_coeffs(c(1.0, 0.0), c(0.0, 0.0), 51).is_err());
        assert!(laurent_coeffs(c(1.0, 0.0), c(0.0, 0.0), 4).is_err());
    }
}
