//! Fiber traces and the certified lower bound.
//!
//! For a function `h` on `R` the trace `T[h](z) = n⁻³ Σ h(z1, z2)` over the
//! fiber `z1^n = z` is single valued and analytic on `A`. With
//! `h = F1·G1` and `F1 G1 + F2 G2 = 1` the trace equals 1 at `z = c`
//! (where `F2` vanishes on the whole fiber), is bounded by `‖G1‖` on the
//! inner circle and by `d^{1/n}‖G1‖` on the outer one. Cauchy's formula on
//! the annulus then forces `‖G1‖ ≥ 1/(d^{1/n}/(1-c) + d/(c-d))`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::Params;
use crate::surface::{fiber_over_base_closure, SurfacePoint};

/// Doubling schedule for the annulus Cauchy formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureOptions {
    pub start_nodes: usize,
    pub max_nodes: usize,
    pub tol: f64,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions {
            start_nodes: 64,
            max_nodes: 1 << 16,
            tol: 1e-10,
        }
    }
}

impl QuadratureOptions {
    fn check(&self) -> Result<()> {
        if self.start_nodes < 8 || !self.start_nodes.is_power_of_two() || !self.max_nodes.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "quadrature node counts must be powers of two >= 8, got {} and {}",
                self.start_nodes, self.max_nodes
            )));
        }
        if self.max_nodes < self.start_nodes {
            return Err(Error::InvalidParameter("max_nodes below start_nodes".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CauchyEval {
    pub value: Complex64,
    /// Node count per circle of the accepted value.
    pub nodes: usize,
}

/// Fiber mean `n⁻³ Σ mult·h(pt)` over `z1^n = z`, for `d ≤ |z| ≤ 1`.
pub fn trace_mean<H>(h: H, z: Complex64, p: &Params) -> Result<Complex64>
where
    H: Fn(&SurfacePoint) -> Result<Complex64>,
{
    let fiber = fiber_over_base_closure(z, p)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for pt in &fiber.points {
        acc += h(pt)? * pt.multiplicity as f64;
    }
    Ok(acc / p.n_cubed() as f64)
}

/// `n`-point trapezoid sum `(1/N) Σ f(ξ_k)·ξ_k/(ξ_k - z0)` on `|ξ| = r`,
/// which approximates `(1/2πi) ∮ f(ξ)/(ξ - z0) dξ`.
fn circle_term(values: &[Complex64], radius: f64, z0: Complex64) -> Complex64 {
    let n = values.len();
    let step = 2.0 * PI / n as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, v) in values.iter().enumerate() {
        let xi = Complex64::from_polar(radius, step * k as f64);
        acc += v * xi / (xi - z0);
    }
    acc / n as f64
}

fn circle_values<F>(f: &mut F, radius: f64, n: usize) -> Result<Vec<Complex64>>
where
    F: FnMut(Complex64) -> Result<Complex64>,
{
    let step = 2.0 * PI / n as f64;
    (0..n).map(|k| f(Complex64::from_polar(radius, step * k as f64))).collect()
}

/// Annulus Cauchy formula: outer circle minus inner circle, both centred at
/// the origin, evaluated by trapezoid sums with node doubling until two
/// successive values differ by less than `opts.tol`.
pub fn cauchy_annulus<F>(
    mut f: F,
    outer_radius: f64,
    inner_radius: f64,
    z0: Complex64,
    opts: QuadratureOptions,
) -> Result<CauchyEval>
where
    F: FnMut(Complex64) -> Result<Complex64>,
{
    opts.check()?;
    let r0 = z0.norm();
    if !(inner_radius < r0 && r0 < outer_radius) {
        return Err(Error::OutOfDomain {
            z: z0,
            domain: "open annulus between the contours",
        });
    }
    let mut eval_at = |n: usize| -> Result<Complex64> {
        let outer = circle_values(&mut f, outer_radius, n)?;
        let inner = circle_values(&mut f, inner_radius, n)?;
        Ok(circle_term(&outer, outer_radius, z0) - circle_term(&inner, inner_radius, z0))
    };
    annulus_doubling(&mut eval_at, opts)
}

fn annulus_doubling<E>(eval_at: &mut E, opts: QuadratureOptions) -> Result<CauchyEval>
where
    E: FnMut(usize) -> Result<Complex64>,
{
    let mut n = opts.start_nodes;
    let mut previous = eval_at(n)?;
    while n < opts.max_nodes {
        n *= 2;
        let value = eval_at(n)?;
        if (value - previous).norm() < opts.tol {
            return Ok(CauchyEval { value, nodes: n });
        }
        previous = value;
    }
    let last = eval_at(n)?;
    Err(Error::NonConvergence {
        nodes: n,
        previous,
        last,
    })
}

/// Offset of the trace contours from the border of `A`; functions known only
/// on the open surface are sampled just inside it.
pub const CONTOUR_OFFSET: f64 = 1e-6;

/// The trace of `h` together with cached samples on the two contours.
pub struct TraceFunction<'a, H> {
    h: H,
    params: &'a Params,
    pub outer_radius: f64,
    pub inner_radius: f64,
    cache: BTreeMap<usize, (Vec<Complex64>, Vec<Complex64>)>,
}

impl<'a, H> TraceFunction<'a, H>
where
    H: Fn(&SurfacePoint) -> Result<Complex64>,
{
    /// Contours at `1 - 1e-6` and `d + 1e-6·(c - d)`.
    pub fn new(h: H, params: &'a Params) -> Result<Self> {
        params.require_float()?;
        let outer = 1.0 - CONTOUR_OFFSET;
        let inner = params.d + CONTOUR_OFFSET * (params.c - params.d);
        Ok(Self::with_radii(h, params, outer, inner))
    }

    pub fn with_radii(h: H, params: &'a Params, outer_radius: f64, inner_radius: f64) -> Self {
        TraceFunction {
            h,
            params,
            outer_radius,
            inner_radius,
            cache: BTreeMap::new(),
        }
    }

    pub fn value(&self, z: Complex64) -> Result<Complex64> {
        trace_mean(&self.h, z, self.params)
    }

    /// Trace samples on the outer and inner contour at `n` nodes each.
    pub fn boundary_samples(&mut self, n: usize) -> Result<&(Vec<Complex64>, Vec<Complex64>)> {
        if !self.cache.contains_key(&n) {
            let (ro, ri) = (self.outer_radius, self.inner_radius);
            let mut f = |z: Complex64| trace_mean(&self.h, z, self.params);
            let outer = circle_values(&mut f, ro, n)?;
            let inner = circle_values(&mut f, ri, n)?;
            self.cache.insert(n, (outer, inner));
        }
        Ok(&self.cache[&n])
    }

    /// Cauchy reconstruction of the trace at `z0` from the contour samples.
    pub fn cauchy(&mut self, z0: Complex64, opts: QuadratureOptions) -> Result<CauchyEval> {
        opts.check()?;
        let r0 = z0.norm();
        if !(self.inner_radius < r0 && r0 < self.outer_radius) {
            return Err(Error::OutOfDomain {
                z: z0,
                domain: "open annulus between the contours",
            });
        }
        let (ro, ri) = (self.outer_radius, self.inner_radius);
        let mut eval_at = |n: usize| -> Result<Complex64> {
            let (outer, inner) = self.boundary_samples(n)?;
            Ok(circle_term(outer, ro, z0) - circle_term(inner, ri, z0))
        };
        annulus_doubling(&mut eval_at, opts)
    }
}

/// Largest gap between the direct fiber trace and its Cauchy reconstruction.
///
/// Test points must sit at least `0.1·(1 - d)` inside both borders of `A`.
pub fn trace_consistency_check<H>(h: H, p: &Params, test_points: &[Complex64], opts: QuadratureOptions) -> Result<f64>
where
    H: Fn(&SurfacePoint) -> Result<Complex64>,
{
    let margin = 0.1 * (1.0 - p.d);
    for &z in test_points {
        let r = z.norm();
        if !(r >= p.d + margin && r <= 1.0 - margin) {
            return Err(Error::OutOfDomain {
                z,
                domain: "A shrunk by 0.1(1-d)",
            });
        }
    }
    let mut tf = TraceFunction::new(h, p)?;
    let mut worst = 0.0f64;
    for &z in test_points {
        let direct = tf.value(z)?;
        let rebuilt = tf.cauchy(z, opts)?.value;
        worst = worst.max((direct - rebuilt).norm());
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateVariant {
    /// Only the sharp bound (no `δ` available).
    Sharp,
    /// Sharp bound plus the bound with the constants `4δ^{n+1}`.
    SharpAndPaper,
}

/// Lower bound on `‖G1‖` valid for every exact corona solution on `R(n, c, d)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub n: u32,
    pub c: f64,
    pub d: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// `d^{1/n}/(1 - c)`: outer circle, where `|F1| = d^{1/n}`.
    pub term_outer: f64,
    /// `d/(c - d)`: inner circle, where `|F1| ≤ 1`.
    pub term_inner: f64,
    pub lb_sharp: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lb_paper: Option<f64>,
    pub variant: CertificateVariant,
}

impl Certificate {
    /// Whether `1 ≤ (term_outer + term_inner)·norm`, the inequality every
    /// exact solution's `‖G1‖` satisfies.
    pub fn admits(&self, norm_g1: f64) -> bool {
        1.0 <= (self.term_outer + self.term_inner) * norm_g1
    }
}

pub fn certify_lb(p: &Params) -> Result<Certificate> {
    p.require_float()?;
    if !(p.d > 0.0 && p.d < p.c && p.c < 1.0) {
        return Err(Error::ParameterOrder { c: p.c, d: p.d });
    }
    let term_outer = p.d_root() / (1.0 - p.c);
    let term_inner = p.d / (p.c - p.d);
    let lb_sharp = 1.0 / (term_outer + term_inner);
    let lb_paper = p
        .delta
        .map(|delta| 1.0 / (4.0 * delta.powi(p.n as i32 + 1) / (1.0 - p.c) + term_inner));
    Ok(Certificate {
        n: p.n,
        c: p.c,
        d: p.d,
        delta: p.delta,
        term_outer,
        term_inner,
        lb_sharp,
        lb_paper,
        variant: if lb_paper.is_some() {
            CertificateVariant::SharpAndPaper
        } else {
            CertificateVariant::Sharp
        },
    })
}

/// `(1 - r)·lb_sharp`: a candidate whose Bezout residual is at most `r` on
/// `R` has trace modulus at least `1 - r` at `c`. Zero once `r ≥ 1`;
/// negative `r` is treated as 0.
pub fn residual_adjusted_lb(cert: &Certificate, r: f64) -> f64 {
    let r = r.max(0.0);
    if r >= 1.0 {
        0.0
    } else {
        (1.0 - r) * cert.lb_sharp
    }
}
