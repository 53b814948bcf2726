//! Interpolation on the annulus `D1′ = {ε < |z| < 1}` with nodes on `|z| = 1/2`.
//!
//! An interpolant with `G(z) = z̄` on `E_n` has `z·G(z) = 1/4` there, so its
//! `n`-fold trace through `w = (ε/z)^n` equals `1/4` at `w = (2ε)^n`; the
//! Cauchy formula on the `w`-annulus then bounds `‖G‖` from below.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::surface::{nth_roots, principal_root};

/// Sample count on `|z| = 1/4` for the certified minimum modulus.
pub const MIN_MODULUS_SAMPLES: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnulusRegime {
    pub eps: f64,
    pub n: u32,
}

impl AnnulusRegime {
    /// Requires `2^{-n} < ε < 1/2`.
    pub fn new(eps: f64, n: u32) -> Result<Self> {
        if n == 0 || !(eps > 0.0 && eps < 0.5) {
            return Err(Error::InvalidParameter(format!(
                "annulus regime needs n >= 1 and 0 < eps < 1/2, got eps = {eps}, n = {n}"
            )));
        }
        if 0.5f64.powi(n as i32) >= eps {
            return Err(Error::InvalidParameter(format!(
                "annulus regime needs 2^-n < eps, got eps = {eps}, n = {n}"
            )));
        }
        Ok(AnnulusRegime { eps, n })
    }

    pub fn contains(&self, z: Complex64) -> bool {
        let r = z.norm();
        self.eps < r && r < 1.0
    }
}

/// Interpolation data: `G(z) = z̄` at the nodes `E_n`, Laurent band `|k| ≤ K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpProblem {
    pub regime: AnnulusRegime,
    pub nodes: Vec<Complex64>,
    pub values: Vec<Complex64>,
    pub k_max: u32,
}

impl InterpProblem {
    pub fn new(regime: AnnulusRegime, k_max: u32) -> Self {
        let nodes = roots_e(regime.n);
        let values = nodes.iter().map(|z| z.conj()).collect();
        InterpProblem {
            regime,
            nodes,
            values,
            k_max,
        }
    }
}

/// The `n`-th roots of `2^{-n}`: `(1/2)·e^{2πik/n}`, each of modulus exactly `1/2`.
pub fn roots_e(n: u32) -> Vec<Complex64> {
    (0..n)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / n as f64;
            let (mut re, mut im) = (0.5 * t.cos(), 0.5 * t.sin());
            // rounding in cos/sin can leave the modulus an ulp off 1/2
            for _ in 0..8 {
                let r = re.hypot(im);
                if r == 0.5 {
                    break;
                }
                if re.abs() >= im.abs() {
                    re = (0.25 - im * im).sqrt().copysign(re);
                } else {
                    im = (0.25 - re * re).sqrt().copysign(im);
                }
                if re.hypot(im) != 0.5 {
                    let s = if re.hypot(im) > 0.5 { -1.0 } else { 1.0 };
                    if re.abs() >= im.abs() {
                        re = next_toward(re, s * re.signum());
                    } else {
                        im = next_toward(im, s * im.signum());
                    }
                }
            }
            Complex64::new(re, im)
        })
        .collect()
}

/// One ulp step of `x` away from zero (`dir > 0`) or toward zero.
fn next_toward(x: f64, dir: f64) -> f64 {
    let bits = x.abs().to_bits();
    let stepped = if dir * x.signum() > 0.0 { bits + 1 } else { bits - 1 };
    f64::from_bits(stepped).copysign(x)
}

/// Lower bound on `‖G‖` for any bounded `G` on `D1′` with `G = z̄` on `E_n`:
/// `(1/4) / (ε/(1-(2ε)^n) + 1/(2^n - 1))`.
pub fn interp_lb(r: &AnnulusRegime) -> f64 {
    let n = r.n as i32;
    let outer = r.eps / (1.0 - (2.0 * r.eps).powi(n));
    let inner = 1.0 / (2.0f64.powi(n) - 1.0);
    0.25 / (outer + inner)
}

/// `(1/n) Σ z·G(z)` over the `n` solutions of `(ε/z)^n = w`.
pub fn annulus_trace<G>(g: G, w: Complex64, r: &AnnulusRegime) -> Result<Complex64>
where
    G: Fn(Complex64) -> Complex64,
{
    let lo = r.eps.powi(r.n as i32);
    let m = w.norm();
    if !(lo * (1.0 - 1e-12) <= m && m <= 1.0 + 1e-12) {
        return Err(Error::OutOfDomain {
            z: w,
            domain: "closed w-annulus eps^n <= |w| <= 1",
        });
    }
    let sum: Complex64 = nth_roots(w.inv(), r.n)
        .into_iter()
        .map(|root| {
            let z = root * r.eps;
            z * g(z)
        })
        .sum();
    Ok(sum / r.n as f64)
}

/// `q(z) = (z^n - 2^{-n})/(1 - 2^{-n} z^n)`.
pub fn blaschke_quotient(z: Complex64, n: u32) -> Complex64 {
    let a = 0.5f64.powi(n as i32);
    let zn = z.powu(n);
    (zn - a) / (1.0 - a * zn)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootOrder {
    /// Smallest `N` with `m^{1/N} ≥ 1/4`.
    #[serde(rename = "N")]
    pub big_n: u32,
    /// Certified lower bound on `min |q|` over `|z| ≤ 1/4`.
    pub certified_min_modulus: f64,
    pub sampled_min_modulus: f64,
    pub lipschitz_margin: f64,
}

/// Root order `N` making every branch of `q^{1/N}` at least `1/4` in modulus
/// on `|z| ≤ 1/4`.
///
/// `q` has no zeros in `|z| < 1/2`, so its minimum modulus on the closed
/// disc is attained on `|z| = 1/4`. The sampled minimum there is lowered by
/// `max|q'|` times half the arc spacing to give a certified bound.
pub fn choose_root_order(n: u32) -> Result<RootOrder> {
    if n == 0 {
        return Err(Error::InvalidParameter("choose_root_order needs n >= 1".into()));
    }
    let radius = 0.25;
    let a = 0.5f64.powi(n as i32);
    let sampled = (0..MIN_MODULUS_SAMPLES)
        .map(|k| {
            let z = Complex64::from_polar(radius, 2.0 * PI * k as f64 / MIN_MODULUS_SAMPLES as f64);
            blaschke_quotient(z, n).norm()
        })
        .fold(f64::INFINITY, f64::min);
    let rn = radius.powi(n as i32);
    // |q'| = n|z|^{n-1}(1-a²)/|1-a z^n|², largest where |1 - a z^n| is smallest
    let max_deriv = n as f64 * radius.powi(n as i32 - 1) * (1.0 - a * a) / (1.0 - a * rn).powi(2);
    let arc = radius * 2.0 * PI / MIN_MODULUS_SAMPLES as f64;
    let margin = max_deriv * arc / 2.0;
    let certified = sampled - margin;
    if certified <= 0.0 {
        return Err(Error::InvariantViolation(format!(
            "certified minimum modulus {certified} is not positive"
        )));
    }
    let mut big_n = ((1.0 / certified).ln() / 4.0f64.ln()).ceil().max(1.0) as u32;
    while certified.powf(1.0 / big_n as f64) < 0.25 {
        big_n += 1;
    }
    while big_n > 1 && certified.powf(1.0 / (big_n - 1) as f64) >= 0.25 {
        big_n -= 1;
    }
    Ok(RootOrder {
        big_n,
        certified_min_modulus: certified,
        sampled_min_modulus: sampled,
        lipschitz_margin: margin,
    })
}

/// Branch `branch` of `F(z) = q(z)^{1/N}`: the principal root times `e^{2πi·branch/N}`.
pub fn eval_interp_f(z: Complex64, big_n: u32, branch: u32, r: &AnnulusRegime) -> Result<Complex64> {
    if big_n == 0 {
        return Err(Error::InvalidParameter("root order N must be >= 1".into()));
    }
    if z.norm() > 1.0 {
        return Err(Error::OutOfDomain {
            z,
            domain: "closed unit disc",
        });
    }
    let q = blaschke_quotient(z, r.n);
    let turn = Complex64::from_polar(1.0, 2.0 * PI * (branch % big_n) as f64 / big_n as f64);
    Ok(principal_root(q, big_n) * turn)
}

/// `δ₀ = inf_{D1′} max(|F2|, |z|)` for `F2 = q`, from the exact radial
/// minimum `min_{|z|=ρ} |q| = |ρ^n - 2^{-n}|/(1 - 2^{-n}ρ^n)` on a radius grid.
pub fn delta0(r: &AnnulusRegime, grid: usize) -> f64 {
    let a = 0.5f64.powi(r.n as i32);
    let grid = grid.max(2);
    (0..grid)
        .map(|i| {
            let rho = r.eps + (1.0 - r.eps) * i as f64 / grid as f64;
            let rn = rho.powi(r.n as i32);
            let q = (rn - a).abs() / (1.0 - a * rn);
            q.max(rho)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Evaluates the Laurent polynomial `Σ_{k=-K}^{K} a_k z^k` (coefficients
/// ordered from `k = -K`).
pub fn laurent_eval(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    let k_max = (coeffs.len() as i32 - 1) / 2;
    coeffs
        .iter()
        .enumerate()
        .map(|(i, a)| a * z.powi(i as i32 - k_max))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::{cauchy_annulus, QuadratureOptions};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn regime_validation() {
        assert!(AnnulusRegime::new(0.05, 5).is_ok());
        assert!(AnnulusRegime::new(0.05, 4).is_err());
        assert!(AnnulusRegime::new(0.5, 5).is_err());
        assert!(AnnulusRegime::new(0.3, 0).is_err());
    }

    #[test]
    fn roots_have_exact_modulus() {
        assert_eq!(roots_e(1), vec![Complex64::new(0.5, 0.0)]);
        for n in 1..=64 {
            let roots = roots_e(n);
            assert_eq!(roots.len(), n as usize);
            for (k, z) in roots.iter().enumerate() {
                assert_eq!(z.norm(), 0.5, "n = {n}, k = {k}");
                let expected = Complex64::from_polar(0.5, 2.0 * PI * k as f64 / n as f64);
                assert!((z - expected).norm() < 1e-15);
            }
            let prod: Complex64 = roots.iter().product();
            let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
            assert!((prod - sign * 0.5f64.powi(n as i32)).norm() < 1e-14 * 0.5f64.powi(n as i32).max(1e-300) + 1e-30);
        }
    }

    #[test]
    fn lower_bound_arithmetic() {
        let r = AnnulusRegime::new(0.05, 5).unwrap();
        assert!((interp_lb(&r) - 3.039197212538088).abs() < 1e-12);
        let mut last = f64::INFINITY;
        for i in 1..40 {
            let eps = 0.04 + 0.01 * i as f64;
            if eps >= 0.5 {
                break;
            }
            let v = interp_lb(&AnnulusRegime::new(eps, 6).unwrap());
            assert!(v < last);
            last = v;
        }
        let big = AnnulusRegime::new(0.05, 200).unwrap();
        assert!((interp_lb(&big) - 0.25 / 0.05).abs() < 1e-12);
        for eps in [1e-2f64, 1e-3, 1e-4] {
            let n = (1.0 / eps).log2().ceil() as u32 + 1;
            let v = interp_lb(&AnnulusRegime::new(eps, n).unwrap()) * eps;
            assert!(v > 0.125 && v < 0.25, "eps = {eps}: {v}");
        }
    }

    #[test]
    fn trace_examples() {
        let r = AnnulusRegime::new(0.05, 5).unwrap();
        let w = Complex64::new(0.01, 0.02);
        assert_eq!(annulus_trace(|_| Complex64::new(0.0, 0.0), w, &r).unwrap(), Complex64::new(0.0, 0.0));
        let quarter = annulus_trace(|z| 0.25 / z, w, &r).unwrap();
        assert!((quarter - 0.25).norm() < 1e-15);
        assert!(annulus_trace(|z| z, Complex64::new(2.0, 0.0), &r).is_err());
    }

    #[test]
    fn exact_interpolant_traces_to_a_quarter() {
        // G(z) = 1/(4z) matches z̄ on |z| = 1/2
        let r = AnnulusRegime::new(0.05, 5).unwrap();
        for z in roots_e(5) {
            assert!((0.25 / z - z.conj()).norm() < 1e-15);
        }
        let w = Complex64::new((2.0 * r.eps).powi(5), 0.0);
        assert!((annulus_trace(|z| 0.25 / z, w, &r).unwrap() - 0.25).norm() < 1e-15);
    }

    #[test]
    fn trace_of_laurent_polynomial_is_analytic() {
        let r = AnnulusRegime::new(0.2, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let coeffs: Vec<Complex64> = (0..9)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let g = |z: Complex64| laurent_eval(&coeffs, z);
        let lo = r.eps.powi(3);
        for i in 0..10 {
            let rho = lo * (1.0 / lo).powf((i as f64 + 0.5) / 10.0);
            let w = Complex64::from_polar(rho, 0.7 * i as f64);
            let direct = annulus_trace(g, w, &r).unwrap();
            let rebuilt = cauchy_annulus(|v| annulus_trace(g, v, &r), 1.0, lo, w, QuadratureOptions::default()).unwrap();
            assert!((direct - rebuilt.value).norm() < 1e-8, "{direct} vs {}", rebuilt.value);
        }
    }

    #[test]
    fn trace_is_branch_independent() {
        // the orbit is summed in full, so rotating w by 2π leaves it unchanged
        let r = AnnulusRegime::new(0.05, 5).unwrap();
        let coeffs: Vec<Complex64> = (0..7).map(|k| Complex64::new(k as f64, 1.0)).collect();
        let g = |z: Complex64| laurent_eval(&coeffs, z);
        let w = Complex64::new(-0.3, 1e-17);
        let w2 = Complex64::new(-0.3, -1e-17);
        let a = annulus_trace(g, w, &r).unwrap();
        let b = annulus_trace(g, w2, &r).unwrap();
        assert!((a - b).norm() < 1e-9 * a.norm().max(1.0));
    }

    #[test]
    fn root_order_examples() {
        let four = choose_root_order(4).unwrap();
        assert_eq!(four.big_n, 3);
        let exact = (1.0 / 16.0 - 1.0 / 256.0) / (1.0 - 1.0 / 4096.0);
        assert!((four.sampled_min_modulus - exact).abs() < 1e-15);
        assert!(four.certified_min_modulus >= 0.0585 && four.certified_min_modulus <= exact);
        let one = choose_root_order(1).unwrap();
        assert!((one.sampled_min_modulus - 2.0 / 7.0).abs() < 1e-15);
        assert_eq!(one.big_n, 1);
        for n in 1..=12 {
            let ro = choose_root_order(n).unwrap();
            assert!(ro.certified_min_modulus.powf(1.0 / ro.big_n as f64) >= 0.25);
            if ro.big_n > 1 {
                assert!(ro.certified_min_modulus.powf(1.0 / (ro.big_n - 1) as f64) < 0.25);
            }
        }
    }

    #[test]
    fn f_branches() {
        let r = AnnulusRegime::new(0.07, 4).unwrap();
        let n_big = choose_root_order(4).unwrap().big_n;
        for z in roots_e(4) {
            assert!(eval_interp_f(z, n_big, 0, &r).unwrap().norm() < 1e-5);
            assert!(blaschke_quotient(z, 4).norm() < 1e-15);
        }
        for k in 0..32 {
            let t = 2.0 * PI * k as f64 / 32.0;
            for b in 0..n_big {
                let on_circle = eval_interp_f(Complex64::from_polar(1.0, t), n_big, b, &r).unwrap();
                assert!((on_circle.norm() - 1.0).abs() < 1e-14);
                let quarter = eval_interp_f(Complex64::from_polar(0.25, t), n_big, b, &r).unwrap();
                assert!(quarter.norm() >= 0.25);
                let inside = eval_interp_f(Complex64::from_polar(0.7, t), n_big, b, &r).unwrap();
                assert!(inside.norm() <= 1.0);
            }
        }
        let quarter = eval_interp_f(Complex64::new(0.25, 0.0), 3, 0, &r).unwrap();
        assert!((quarter.norm() - 0.3882).abs() < 1e-3);
    }

    #[test]
    fn delta0_of_blaschke_quotient_is_eps() {
        let r = AnnulusRegime::new(0.05, 5).unwrap();
        assert!((delta0(&r, 4096) - 0.05).abs() < 1e-15);
    }
}
