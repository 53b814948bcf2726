//! The bordered surface `R = {(z1, z2) : L(z1^n) = z2^{n²}}` and its three
//! covering maps: `(z1, z2) ↦ z1^n` onto `A` (degree n³, branched over `c`),
//! `↦ z1` onto `D1` (degree n²) and `↦ z2` onto `D2` (degree n, unbranched).

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{hole_disc, in_domain, mobius_l, mobius_l_inv, DomainId};
use crate::params::Params;

/// Default absolute tolerance on `|L(z1^n) - z2^{n²}|`.
pub const ON_SURFACE_TOL: f64 = 1e-9;

/// Which defining relation a point satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SurfaceForm {
    /// `L(z1^n) = z2^{n²}`, with `F1 = d^{1/n}/z1`.
    Reciprocal,
    /// `L(d/z1^n) = z2^{n²}`, with `F1 = z1`.
    Projection,
}

impl SurfaceForm {
    pub fn other(self) -> Self {
        match self {
            SurfaceForm::Reciprocal => SurfaceForm::Projection,
            SurfaceForm::Projection => SurfaceForm::Reciprocal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub z1: Complex64,
    pub z2: Complex64,
    pub form: SurfaceForm,
    pub multiplicity: u32,
}

impl SurfacePoint {
    pub fn new(z1: Complex64, z2: Complex64) -> Self {
        SurfacePoint {
            z1,
            z2,
            form: SurfaceForm::Reciprocal,
            multiplicity: 1,
        }
    }

    /// `z1` in the reciprocal normalisation, whatever the form.
    pub fn reciprocal_z1(&self, p: &Params) -> Complex64 {
        match self.form {
            SurfaceForm::Reciprocal => self.z1,
            SurfaceForm::Projection => p.d_root() / self.z1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BasePlane {
    A,
    D1,
    D2,
}

/// Preimage of one base value, with multiplicities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fiber {
    pub base: Complex64,
    pub base_plane: BasePlane,
    pub points: Vec<SurfacePoint>,
}

impl Fiber {
    pub fn total_multiplicity(&self) -> u32 {
        self.points.iter().map(|pt| pt.multiplicity).sum()
    }
}

/// The `k` roots of `w^{1/k}`: principal root first, then by increasing
/// argument. `w = 0` yields the single root `0`.
pub fn nth_roots(w: Complex64, k: u32) -> Vec<Complex64> {
    assert!(k >= 1);
    if w == Complex64::new(0.0, 0.0) {
        return vec![w];
    }
    let r = w.norm().powf(1.0 / k as f64);
    let theta = w.arg() / k as f64;
    (0..k)
        .map(|j| Complex64::from_polar(r, theta + 2.0 * PI * j as f64 / k as f64))
        .collect()
}

/// Principal `k`-th root.
pub fn principal_root(w: Complex64, k: u32) -> Complex64 {
    if w == Complex64::new(0.0, 0.0) {
        return w;
    }
    Complex64::from_polar(w.norm().powf(1.0 / k as f64), w.arg() / k as f64)
}

/// `|L(z1^n) - z2^{n²}|`, or the projection-form analogue.
pub fn relation_residual(pt: &SurfacePoint, p: &Params) -> Result<f64> {
    p.require_float()?;
    if pt.z1 == Complex64::new(0.0, 0.0) {
        return Err(Error::OutOfDomain { z: pt.z1, domain: "D1" });
    }
    let z1n = pt.z1.powu(p.n);
    let arg = match pt.form {
        SurfaceForm::Reciprocal => z1n,
        SurfaceForm::Projection => p.d / z1n,
    };
    Ok((mobius_l(arg, p.c)? - pt.z2.powu(p.n_squared())).norm())
}

pub fn on_surface(pt: &SurfacePoint, p: &Params, tol: f64) -> bool {
    match relation_residual(pt, p) {
        Ok(res) => res <= tol && in_domain(pt.z1, DomainId::D1, p) && in_domain(pt.z2, DomainId::D2, p),
        Err(_) => false,
    }
}

/// `L(s)`, snapped to zero when it is within rounding of the branch value
/// `s = c`. `s` carries a relative error of about `rel_err`.
fn radicand_at(s: Complex64, rel_err: f64, p: &Params) -> Result<Complex64> {
    let w = mobius_l(s, p.c)?;
    let den = (Complex64::new(1.0, 0.0) - s * p.c).norm();
    let noise = 16.0 * rel_err * (s.norm() + p.c) / den;
    Ok(if w.norm() <= noise { Complex64::new(0.0, 0.0) } else { w })
}

/// Lifts of `z1` with `z1^n = s`: the `n²` roots of `L(s)`, collapsing to the
/// single point `z2 = 0` of multiplicity `n²` when `s = c`.
fn lifts_of_z1(z1: Complex64, w: Complex64, p: &Params) -> Vec<SurfacePoint> {
    let n2 = p.n_squared();
    let roots = nth_roots(w, n2);
    let multiplicity = if roots.len() == 1 { n2 } else { 1 };
    roots
        .into_iter()
        .map(|z2| SurfacePoint {
            z1,
            z2,
            form: SurfaceForm::Reciprocal,
            multiplicity,
        })
        .collect()
}

/// Fiber of `(z1, z2) ↦ z1^n` over `z ∈ A`; total multiplicity `n³`.
pub fn fiber_over_base(z: Complex64, p: &Params) -> Result<Fiber> {
    p.require_float()?;
    if !in_domain(z, DomainId::A, p) {
        return Err(Error::OutOfDomain { z, domain: "A" });
    }
    fiber_over_base_closure(z, p)
}

/// As [`fiber_over_base`] but also accepting the two boundary circles of `A`,
/// where the lifts lie on the border of `R`.
pub fn fiber_over_base_closure(z: Complex64, p: &Params) -> Result<Fiber> {
    p.require_float()?;
    let r = z.norm();
    if !(z.is_finite() && r >= p.d && r <= 1.0) {
        return Err(Error::OutOfDomain { z, domain: "closure of A" });
    }
    // every lift shares z1^n = z, so L is evaluated once at the base
    let w = radicand_at(z, f64::EPSILON, p)?;
    let mut points = Vec::with_capacity(p.n_cubed() as usize);
    for z1 in nth_roots(z, p.n) {
        points.extend(lifts_of_z1(z1, w, p));
    }
    Ok(Fiber {
        base: z,
        base_plane: BasePlane::A,
        points,
    })
}

/// Fiber of `(z1, z2) ↦ z1`; total multiplicity `n²`.
pub fn fiber_over_d1(z1: Complex64, p: &Params) -> Result<Fiber> {
    p.require_float()?;
    if !in_domain(z1, DomainId::D1, p) {
        return Err(Error::OutOfDomain { z: z1, domain: "D1" });
    }
    Ok(Fiber {
        base: z1,
        base_plane: BasePlane::D1,
        points: lifts_of_z1(z1, radicand_at(z1.powu(p.n), p.n as f64 * f64::EPSILON, p)?, p),
    })
}

/// Fiber of `(z1, z2) ↦ z2`: the `n` roots of `L⁻¹(z2^{n²})`, never ramified.
pub fn fiber_over_d2(z2: Complex64, p: &Params) -> Result<Fiber> {
    p.require_float()?;
    if !in_domain(z2, DomainId::D2, p) {
        return Err(Error::OutOfDomain { z: z2, domain: "D2" });
    }
    lift_z2_unchecked(z2, p)
}

/// Lifts of any `z2` with `|z2| ≤ 1` off the holes, boundary included.
pub(crate) fn lift_z2_unchecked(z2: Complex64, p: &Params) -> Result<Fiber> {
    let u = mobius_l_inv(z2.powu(p.n_squared()), p.c)?;
    let points = nth_roots(u, p.n)
        .into_iter()
        .map(|z1| SurfacePoint::new(z1, z2))
        .collect();
    Ok(Fiber {
        base: z2,
        base_plane: BasePlane::D2,
        points,
    })
}

/// The `n` ramification points `(c^{1/n}·ω^j, 0)`, each of index `n²`.
pub fn branch_points(p: &Params) -> Result<Vec<SurfacePoint>> {
    p.require_float()?;
    let n2 = p.n_squared();
    Ok(nth_roots(Complex64::new(p.c, 0.0), p.n)
        .into_iter()
        .map(|z1| SurfacePoint {
            z1,
            z2: Complex64::new(0.0, 0.0),
            form: SurfaceForm::Reciprocal,
            multiplicity: n2,
        })
        .collect())
}

/// Radii `(r_lo, 1)` of the annulus `z2` is drawn from in [`sample_surface`].
///
/// `r_lo` is a quarter of the modulus at which the holes of `D2` begin, so the
/// draws cover the holes, the small-`|z2|` region inside them and the outer
/// collar.
pub fn sampling_annulus(p: &Params) -> Result<(f64, f64)> {
    let hole = hole_disc(p.c, p.d)?;
    let inner = (hole.center.norm() - hole.radius).powf(1.0 / p.n_squared() as f64);
    Ok((0.25 * inner, 1.0))
}

/// Seeded sample of `R`: `count` base points `z2 ∈ D2`, each with all `n` lifts.
///
/// `z2` is uniform in angle and in log-radius over [`sampling_annulus`];
/// draws in a hole are rejected.
pub fn sample_surface(p: &Params, count: usize, seed: u64) -> Result<Vec<SurfacePoint>> {
    Ok(sample_surface_with_stats(p, count, seed)?.0)
}

/// [`sample_surface`] plus the number of draws it took.
pub fn sample_surface_with_stats(p: &Params, count: usize, seed: u64) -> Result<(Vec<SurfacePoint>, usize)> {
    p.require_float()?;
    if count == 0 {
        return Err(Error::InvalidParameter("sample count must be at least 1".into()));
    }
    let (r_lo, r_hi) = sampling_annulus(p)?;
    let (log_lo, log_hi) = (r_lo.ln(), r_hi.ln());
    let max_attempts = count.saturating_mul(1000);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count * p.n as usize);
    let mut accepted = 0;
    let mut attempts = 0;
    while accepted < count {
        if attempts >= max_attempts {
            return Err(Error::SamplingStarvation { accepted, attempts });
        }
        attempts += 1;
        let log_r = log_lo + (log_hi - log_lo) * rng.random::<f64>();
        let theta = 2.0 * PI * rng.random::<f64>();
        let z2 = Complex64::from_polar(log_r.exp(), theta);
        if !in_domain(z2, DomainId::D2, p) {
            continue;
        }
        out.extend(lift_z2_unchecked(z2, p)?.points);
        accepted += 1;
    }
    Ok((out, attempts))
}

/// `(z1, z2) ↦ (d^{1/n}/z1, z2)`, switching between the two forms.
pub fn form_map(pt: &SurfacePoint, p: &Params) -> Result<SurfacePoint> {
    if pt.z1 == Complex64::new(0.0, 0.0) {
        return Err(Error::OutOfDomain { z: pt.z1, domain: "D1" });
    }
    Ok(SurfacePoint {
        z1: p.d_root() / pt.z1,
        z2: pt.z2,
        form: pt.form.other(),
        multiplicity: pt.multiplicity,
    })
}

/// 17 significant digits, enough to round-trip an f64.
pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV with header `re_z1,im_z1,re_z2,im_z2,multiplicity`.
pub fn samples_to_csv(samples: &[SurfacePoint]) -> String {
    let mut out = String::from("re_z1,im_z1,re_z2,im_z2,multiplicity\n");
    for pt in samples {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_f64(pt.z1.re),
            fmt_f64(pt.z1.im),
            fmt_f64(pt.z2.re),
            fmt_f64(pt.z2.im),
            pt.multiplicity
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn regime_s() -> Params {
        Params::direct(2, 0.25, 0.01).unwrap()
    }

    // z1² = L⁻¹(0.9⁴) = 0.9061/1.164025
    fn z1_over_09() -> f64 {
        (0.9061f64 / 1.164025).sqrt()
    }

    #[test]
    fn residual_examples() {
        let p = regime_s();
        let a = SurfacePoint::new(cx(0.5, 0.0), cx(0.0, 0.0));
        assert_eq!(relation_residual(&a, &p).unwrap(), 0.0);
        let b = SurfacePoint::new(cx(0.882281, 0.0), cx(0.9, 0.0));
        assert!(relation_residual(&b, &p).unwrap() <= 1e-6);
        let c = SurfacePoint::new(cx(0.5, 0.0), cx(0.5, 0.0));
        assert!((relation_residual(&c, &p).unwrap() - 0.0625).abs() < 1e-16);

        let exact = SurfacePoint::new(cx(z1_over_09(), 0.0), cx(0.9, 0.0));
        assert!(on_surface(&a, &p, 1e-9));
        assert!(on_surface(&exact, &p, 1e-9));
        assert!(!on_surface(&c, &p, 1e-9));
        assert!(relation_residual(&SurfacePoint::new(cx(0.0, 0.0), cx(0.1, 0.0)), &p).is_err());
    }

    #[test]
    fn fiber_at_branch_value() {
        let p = regime_s();
        let f = fiber_over_base(cx(0.25, 0.0), &p).unwrap();
        assert_eq!(f.points.len(), 2);
        assert_eq!(f.total_multiplicity(), 8);
        assert!(f.points.iter().all(|pt| pt.multiplicity == 4 && pt.z2 == cx(0.0, 0.0)));
        assert!((f.points[0].z1 - cx(0.5, 0.0)).norm() < 1e-16);
        assert!((f.points[1].z1 - cx(-0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn generic_fiber() {
        let p = regime_s();
        let z = cx(0.9061 / 1.164025, 0.0);
        let f = fiber_over_base(z, &p).unwrap();
        assert_eq!(f.points.len(), 8);
        assert_eq!(f.total_multiplicity(), 8);
        let mut sum = cx(0.0, 0.0);
        for pt in &f.points {
            assert!((pt.z1.norm() - z1_over_09()).abs() < 1e-14);
            assert!((pt.z2.powu(4) - cx(0.6561, 0.0)).norm() < 1e-12);
            assert!(on_surface(pt, &p, 1e-9));
            sum += pt.z1;
        }
        assert!(sum.norm() < 1e-14);
        assert!(fiber_over_base(cx(0.005, 0.0), &p).is_err());
    }

    #[test]
    fn d1_and_d2_fibers() {
        let p = regime_s();
        let f = fiber_over_d2(cx(0.9, 0.0), &p).unwrap();
        assert_eq!(f.points.len(), 2);
        assert!((f.points[0].z1 - cx(z1_over_09(), 0.0)).norm() < 1e-15);
        assert!((f.points[1].z1 + cx(z1_over_09(), 0.0)).norm() < 1e-15);

        let g = fiber_over_d1(cx(0.5, 0.0), &p).unwrap();
        assert_eq!(g.points.len(), 1);
        assert_eq!(g.total_multiplicity(), 4);
        assert_eq!(g.points[0].z2, cx(0.0, 0.0));

        assert!(fiber_over_d1(cx(0.05, 0.0), &p).is_err());
        assert!(fiber_over_d2(cx(1.0, 0.0), &p).is_err());
    }

    #[test]
    fn root_ordering_is_principal_first() {
        let roots = nth_roots(cx(-1.0, 0.0), 4);
        assert!((roots[0] - Complex64::from_polar(1.0, PI / 4.0)).norm() < 1e-15);
        for w in roots.windows(2) {
            let step = (w[1] / w[0]).arg();
            assert!((step - PI / 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn branch_point_examples() {
        let p = regime_s();
        let b = branch_points(&p).unwrap();
        assert_eq!(b.len(), 2);
        assert!((b[0].z1 - cx(0.5, 0.0)).norm() < 1e-16);
        assert!((b[1].z1 - cx(-0.5, 0.0)).norm() < 1e-15);
        for n in [2, 3, 5] {
            let q = Params::direct(n, 0.25, 0.01).unwrap();
            let pts = branch_points(&q).unwrap();
            assert_eq!(pts.len(), n as usize);
            assert!(pts.iter().all(|pt| on_surface(pt, &q, 1e-12)));
        }
    }

    #[test]
    fn branch_points_are_where_d1_fibers_collapse() {
        let p = Params::direct(3, 0.25, 0.01).unwrap();
        for b in branch_points(&p).unwrap() {
            assert!(fiber_over_d1(b.z1, &p).unwrap().points.len() < 9);
        }
        let generic = fiber_over_d1(cx(0.5, 0.3), &p).unwrap();
        assert_eq!(generic.points.len(), 9);
    }

    #[test]
    fn sampling_is_deterministic_and_on_surface() {
        let p = regime_s();
        let a = sample_surface(&p, 100, 7).unwrap();
        let b = sample_surface(&p, 100, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 200);
        assert!(a.iter().all(|pt| on_surface(pt, &p, 1e-9)));
        assert!(a.iter().all(|pt| pt.z1.norm() > 0.1 && pt.z1.norm() < 1.0));
        assert_ne!(a, sample_surface(&p, 100, 8).unwrap());
    }

    #[test]
    fn sampling_rejects_underflow() {
        let p = Params::delta_chain(0.9, 1e6).unwrap();
        assert!(matches!(sample_surface(&p, 10, 1), Err(Error::Underflow { .. })));
    }

    #[test]
    fn form_map_examples() {
        let p = regime_s();
        let pt = SurfacePoint::new(cx(0.5, 0.0), cx(0.0, 0.0));
        let q = form_map(&pt, &p).unwrap();
        assert_eq!(q.form, SurfaceForm::Projection);
        assert!((q.z1 - cx(0.2, 0.0)).norm() < 1e-16);
        assert!(on_surface(&q, &p, 1e-9));
        for s in sample_surface(&p, 500, 3).unwrap() {
            let m = form_map(&s, &p).unwrap();
            assert!(on_surface(&m, &p, 1e-9));
            let back = form_map(&m, &p).unwrap();
            assert!((back.z1 - s.z1).norm() <= 1e-15 * s.z1.norm().max(1.0) * 4.0);
            assert_eq!(back.form, SurfaceForm::Reciprocal);
        }
    }

    #[test]
    fn csv_header_and_rows() {
        let p = regime_s();
        let s = sample_surface(&p, 2, 1).unwrap();
        let csv = samples_to_csv(&s);
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "re_z1,im_z1,re_z2,im_z2,multiplicity");
        assert_eq!(lines.len(), 5);
        let first: f64 = lines[1].split(',').next().unwrap().parse().unwrap();
        assert_eq!(first, s[0].z1.re);
    }
}
