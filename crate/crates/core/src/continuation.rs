//! Analytic continuation of the `n`-valued function
//! `z ↦ (L⁻¹(z^{n²}))^{1/n} = ((z^{n²} + c)/(1 + c z^{n²}))^{1/n}` on `D2`,
//! whose Riemann surface is `R`.
//!
//! Sheets are labelled against the principal root: sheet `j` carries the value
//! `principal(u)·e^{2πij/n}` where `u = L⁻¹(z^{n²})`. The label jumps by one
//! exactly where `u` crosses its negative real axis, which happens on the
//! `n²` radial cuts from the holes of `D2` to the unit circle at arguments
//! `(2k+1)π/n²`. This is the slit-and-glue model in which copy `j` is pasted
//! to copy `j+1` along every cut.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{hole_disc, in_domain, mobius_l, mobius_l_inv, DomainId};
use crate::params::Params;
use crate::surface::{nth_roots, principal_root, SurfacePoint};

/// Midpoint samples per segment used to check that a path stays in `D2`.
pub const SEGMENT_CHECKS: usize = 32;

/// Cap on adaptive steps for one continuation.
pub const MAX_STEPS: usize = 1 << 20;

/// Relative offset of lifted border curves into `D2`.
pub const BORDER_OFFSET: f64 = 1e-6;

/// A polyline in the `z2`-plane; closed paths return to their first vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSpec {
    pub vertices: Vec<Complex64>,
    pub closed: bool,
}

impl PathSpec {
    pub fn open(vertices: Vec<Complex64>) -> Self {
        PathSpec { vertices, closed: false }
    }

    pub fn closed(vertices: Vec<Complex64>) -> Self {
        PathSpec { vertices, closed: true }
    }

    /// Consecutive `(start, end)` pairs, including the closing segment.
    pub fn segments(&self) -> Vec<(Complex64, Complex64)> {
        let mut segs: Vec<_> = self.vertices.windows(2).map(|w| (w[0], w[1])).collect();
        if self.closed && self.vertices.len() > 1 {
            let last = *self.vertices.last().unwrap();
            if last != self.vertices[0] {
                segs.push((last, self.vertices[0]));
            }
        }
        segs
    }

    pub fn reversed(&self) -> Self {
        let mut vertices = self.vertices.clone();
        vertices.reverse();
        PathSpec {
            vertices,
            closed: self.closed,
        }
    }

    /// `self` followed by `other`; the two must share the joining vertex.
    pub fn concat(&self, other: &PathSpec) -> Self {
        let mut vertices = self.vertices.clone();
        if self.closed {
            vertices.push(self.vertices[0]);
        }
        let skip = usize::from(vertices.last() == other.vertices.first());
        vertices.extend(other.vertices.iter().skip(skip));
        if other.closed {
            vertices.push(other.vertices[0]);
        }
        PathSpec {
            vertices,
            closed: self.closed && other.closed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SheetState {
    pub sheet: u32,
    pub value: Complex64,
}

/// `u = L⁻¹(z^{n²})`, whose `n`-th roots are the values of the function.
pub fn radicand(z: Complex64, p: &Params) -> Result<Complex64> {
    mobius_l_inv(z.powu(p.n_squared()), p.c)
}

/// All `n` values at `z ∈ D2`, principal first.
pub fn multivalue_f(z: Complex64, p: &Params) -> Result<Vec<Complex64>> {
    p.require_float()?;
    if !in_domain(z, DomainId::D2, p) {
        return Err(Error::OutOfDomain { z, domain: "D2" });
    }
    Ok(nth_roots(radicand(z, p)?, p.n))
}

/// Sheet label of `value` relative to the principal root of `u`.
pub fn sheet_of(value: Complex64, u: Complex64, n: u32) -> u32 {
    let turns = (value / principal_root(u, n)).arg() * n as f64 / (2.0 * PI);
    (turns.round() as i64).rem_euclid(n as i64) as u32
}

/// The state on sheet `sheet` at `z`.
pub fn state_at(z: Complex64, sheet: u32, p: &Params) -> Result<SheetState> {
    p.require_float()?;
    let u = radicand(z, p)?;
    let omega = Complex64::from_polar(1.0, 2.0 * PI * (sheet % p.n) as f64 / p.n as f64);
    Ok(SheetState {
        sheet: sheet % p.n,
        value: principal_root(u, p.n) * omega,
    })
}

/// The `n`-th root of `u` nearest to `guess`.
fn snap_root(u: Complex64, guess: Complex64, n: u32) -> Complex64 {
    let base = principal_root(u, n);
    let turns = (guess / base).arg() * n as f64 / (2.0 * PI);
    base * Complex64::from_polar(1.0, 2.0 * PI * turns.round() / n as f64)
}

fn step_ok(from: Complex64, to: Complex64) -> bool {
    let ratio = to / from;
    (to.norm() - from.norm()).abs() < 0.5 * from.norm() && ratio.arg().abs() < 0.5 * PI
}

/// Follows the branch through straight segments with step halving.
struct Tracker<'a> {
    p: &'a Params,
    steps: usize,
    max_steps: usize,
}

impl<'a> Tracker<'a> {
    fn new(p: &'a Params) -> Self {
        Tracker {
            p,
            steps: 0,
            max_steps: MAX_STEPS,
        }
    }

    /// Carries `value` (a root of `u(a)`) from `a` to `b`.
    fn segment(&mut self, a: Complex64, b: Complex64, value: Complex64) -> Result<Complex64> {
        let n = self.p.n;
        let mut t = 0.0f64;
        let mut h = 1.0f64;
        let mut z = a;
        let mut u = radicand(a, self.p)?;
        let mut v = value;
        while t < 1.0 {
            h = h.min(1.0 - t);
            let z_next = if t + h >= 1.0 { b } else { a + (b - a) * (t + h) };
            let z_mid = 0.5 * (z + z_next);
            let u_next = radicand(z_next, self.p)?;
            let u_mid = radicand(z_mid, self.p)?;
            // the two half steps must agree with the whole step, so no winding
            // of u about 0 can hide between the sample points
            let whole = (u_next / u).arg();
            let halves = (u_mid / u).arg() + (u_next / u_mid).arg();
            let accept = step_ok(u, u_next)
                && step_ok(u, u_mid)
                && step_ok(u_mid, u_next)
                && (whole - halves).abs() < 1e-9 * (1.0 + whole.abs());
            if accept {
                let guess = v * principal_root(u_next / u, n);
                v = snap_root(u_next, guess, n);
                z = z_next;
                u = u_next;
                t += h;
                self.steps += 1;
                if self.steps > self.max_steps {
                    return Err(Error::StepUnderflow {
                        max_steps: self.max_steps,
                        z,
                    });
                }
                h *= 2.0;
            } else {
                h *= 0.5;
                if h < 1e-15 {
                    return Err(Error::StepUnderflow {
                        max_steps: self.max_steps,
                        z,
                    });
                }
            }
        }
        Ok(v)
    }
}

/// Whether every check point of every segment lies in `D2`.
fn check_path_in_d2(path: &PathSpec, p: &Params) -> Result<()> {
    for (a, b) in path.segments() {
        for i in 0..=SEGMENT_CHECKS {
            let z = a + (b - a) * (i as f64 / SEGMENT_CHECKS as f64);
            if !in_domain(z, DomainId::D2, p) {
                return Err(Error::PathOutsideDomain { z, domain: "D2" });
            }
        }
    }
    if path.vertices.len() == 1 && !in_domain(path.vertices[0], DomainId::D2, p) {
        return Err(Error::PathOutsideDomain {
            z: path.vertices[0],
            domain: "D2",
        });
    }
    Ok(())
}

/// Whether the path keeps `|z^{n²} - hole centre| ≥ 2·hole radius` at every
/// check point.
pub fn check_hole_margin(path: &PathSpec, p: &Params) -> Result<()> {
    let hole = hole_disc(p.c, p.d)?;
    let n2 = p.n_squared();
    for (a, b) in path.segments() {
        for i in 0..=SEGMENT_CHECKS {
            let z = a + (b - a) * (i as f64 / SEGMENT_CHECKS as f64);
            if (z.powu(n2) - hole.center).norm() < 2.0 * hole.radius {
                return Err(Error::PathOutsideDomain {
                    z,
                    domain: "D2 with hole margin",
                });
            }
        }
    }
    Ok(())
}

/// Continue `start` along `path` (closing segment included for closed paths).
pub fn continue_path(path: &PathSpec, start: SheetState, p: &Params) -> Result<SheetState> {
    p.require_float()?;
    let first = *path
        .vertices
        .first()
        .ok_or_else(|| Error::InvalidParameter("path has no vertices".into()))?;
    check_path_in_d2(path, p)?;
    let u0 = radicand(first, p)?;
    if (start.value.powu(p.n) - u0).norm() > 1e-9 * (1.0 + u0.norm()) {
        return Err(Error::InvalidParameter(format!(
            "start value {} is not an n-th root of {u0}",
            start.value
        )));
    }
    let mut tracker = Tracker::new(p);
    let mut v = start.value;
    let mut end = first;
    for (a, b) in path.segments() {
        v = tracker.segment(a, b, v)?;
        end = b;
    }
    Ok(SheetState {
        sheet: sheet_of(v, radicand(end, p)?, p.n),
        value: v,
    })
}

/// Sheet shift produced by one traversal of a closed loop, in `0..n`.
///
/// The loop must keep twice the hole radius away from every hole (measured
/// after `z ↦ z^{n²}`).
pub fn monodromy_loop(path: &PathSpec, p: &Params) -> Result<u32> {
    monodromy_loop_from(path, 0, p)
}

pub fn monodromy_loop_from(path: &PathSpec, start_sheet: u32, p: &Params) -> Result<u32> {
    if !path.closed {
        return Err(Error::InvalidParameter("monodromy needs a closed loop".into()));
    }
    p.require_float()?;
    check_hole_margin(path, p)?;
    let start = state_at(path.vertices[0], start_sheet, p)?;
    let end = continue_path(path, start, p)?;
    Ok(offset_between(start.value, end.value, p.n))
}

fn offset_between(from: Complex64, to: Complex64, n: u32) -> u32 {
    let turns = (to / from).arg() * n as f64 / (2.0 * PI);
    (turns.round() as i64).rem_euclid(n as i64) as u32
}

/// A signed passage through cut `cut` (`+1` with increasing argument).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Crossing {
    pub cut: u32,
    pub sign: i8,
}

/// One radial slit from the far edge of a hole to the unit circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cut {
    pub index: u32,
    pub angle: f64,
    pub inner_radius: f64,
}

/// `n` slit copies of `D2` glued so that crossing any cut with increasing
/// argument moves copy `j` to copy `j + 1 (mod n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutPasteModel {
    pub sheets: u32,
    pub cuts: Vec<Cut>,
    /// `gluing[j]` is the copy reached from copy `j` on a positive crossing.
    pub gluing: Vec<u32>,
}

impl CutPasteModel {
    /// Copy reached from `start` after the crossing sequence.
    pub fn transport(&self, start: u32, crossings: &[Crossing]) -> u32 {
        let mut sheet = start % self.sheets;
        for c in crossings {
            sheet = if c.sign > 0 {
                self.gluing[sheet as usize]
            } else {
                self.gluing.iter().position(|&g| g == sheet).unwrap() as u32
            };
        }
        sheet
    }
}

pub fn cut_paste_build(p: &Params) -> Result<CutPasteModel> {
    if p.n < 2 {
        return Err(Error::InvalidParameter("the slit model needs n >= 2".into()));
    }
    let hole = hole_disc(p.c, p.d)?;
    let n2 = p.n_squared();
    // the slit starts where u = L⁻¹(w) leaves the hole on the negative axis
    let far_edge = (hole.center.re - hole.radius).abs();
    let inner_radius = far_edge.powf(1.0 / n2 as f64);
    let cuts = (0..n2)
        .map(|k| Cut {
            index: k,
            angle: (2 * k + 1) as f64 * PI / n2 as f64,
            inner_radius,
        })
        .collect();
    Ok(CutPasteModel {
        sheets: p.n,
        cuts,
        gluing: (0..p.n).map(|j| (j + 1) % p.n).collect(),
    })
}

/// Net sheet shift of a crossing sequence, in `0..n`.
pub fn model_monodromy(m: &CutPasteModel, crossings: &[Crossing]) -> u32 {
    let total: i64 = crossings.iter().map(|c| c.sign as i64).sum();
    total.rem_euclid(m.sheets as i64) as u32
}

/// Cut crossings of a polyline in path order, from plane geometry alone.
pub fn record_crossings(path: &PathSpec, m: &CutPasteModel) -> Vec<Crossing> {
    let mut out = Vec::new();
    for (a, b) in path.segments() {
        let mut hits: Vec<(f64, Crossing)> = Vec::new();
        for cut in &m.cuts {
            let rot = Complex64::from_polar(1.0, -cut.angle);
            let (ra, rb) = (a * rot, b * rot);
            let sign = if ra.im < 0.0 && rb.im >= 0.0 {
                1
            } else if ra.im >= 0.0 && rb.im < 0.0 {
                -1
            } else {
                continue;
            };
            let t = ra.im / (ra.im - rb.im);
            let hit = ra + (rb - ra) * t;
            if hit.re > cut.inner_radius {
                hits.push((t, Crossing { cut: cut.index, sign }));
            }
        }
        hits.sort_by(|x, y| x.0.total_cmp(&y.0));
        out.extend(hits.into_iter().map(|(_, c)| c));
    }
    out
}

/// A component of the border of `D2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BorderCurve {
    Outer,
    Hole(u32),
}

/// Point at angle `theta` on a border curve, pushed `BORDER_OFFSET` into `D2`.
///
/// Hole `k` is the preimage under `z ↦ z^{n²}` of the circle about the hole
/// centre, on the branch with argument near `(2k+1)π/n²`.
pub fn border_point(curve: BorderCurve, theta: f64, p: &Params) -> Result<Complex64> {
    match curve {
        BorderCurve::Outer => Ok(Complex64::from_polar(1.0 - BORDER_OFFSET, theta)),
        BorderCurve::Hole(k) => {
            let n2 = p.n_squared();
            if k >= n2 {
                return Err(Error::InvalidParameter(format!("hole index {k} out of range")));
            }
            let hole = hole_disc(p.c, p.d)?;
            let w = hole.center + Complex64::from_polar(hole.radius * (1.0 + BORDER_OFFSET), theta);
            let arg = (2 * k + 1) as f64 * PI / n2 as f64;
            Ok(Complex64::from_polar(1.0, arg) * principal_root(-w, n2))
        }
    }
}

/// Closed lift of a border curve: the sheets visited at the start point and
/// the surface points along the way.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftedContour {
    pub curve: BorderCurve,
    pub sheets: Vec<u32>,
    pub points: Vec<SurfacePoint>,
}

/// Lift a border curve to `R`.
///
/// Starting on `start_sheet`, the curve is traversed until the branch
/// returns to its starting value; each such cycle is one closed contour.
/// Further cycles start on sheets not yet visited until all `n` are covered.
pub fn lift_boundary(curve: BorderCurve, start_sheet: u32, p: &Params, node_count: usize) -> Result<Vec<LiftedContour>> {
    lift_boundary_phased(curve, start_sheet, p, node_count, 0.0)
}

/// As [`lift_boundary`], with nodes at angles `2π(i + phase)/node_count`.
pub fn lift_boundary_phased(
    curve: BorderCurve,
    start_sheet: u32,
    p: &Params,
    node_count: usize,
    phase: f64,
) -> Result<Vec<LiftedContour>> {
    p.require_float()?;
    if node_count < 8 {
        return Err(Error::InvalidParameter("border lifts need at least 8 nodes".into()));
    }
    let zs: Vec<Complex64> = (0..node_count)
        .map(|i| border_point(curve, 2.0 * PI * (i as f64 + phase) / node_count as f64, p))
        .collect::<Result<_>>()?;
    let n = p.n;
    let mut covered = vec![false; n as usize];
    let mut out = Vec::new();
    let mut next = Some(start_sheet % n);
    while let Some(first_sheet) = next {
        let mut tracker = Tracker::new(p);
        let start = state_at(zs[0], first_sheet, p)?;
        let mut v = start.value;
        let mut sheets = Vec::new();
        let mut points = Vec::new();
        loop {
            let sheet = sheet_of(v, radicand(zs[0], p)?, n);
            covered[sheet as usize] = true;
            sheets.push(sheet);
            for i in 0..node_count {
                points.push(SurfacePoint::new(v, zs[i]));
                v = tracker.segment(zs[i], zs[(i + 1) % node_count], v)?;
            }
            if (v - start.value).norm() <= 1e-9 * (1.0 + v.norm()) {
                break;
            }
            if sheets.len() > n as usize {
                return Err(Error::InvariantViolation("border lift did not close after n turns".into()));
            }
        }
        out.push(LiftedContour { curve, sheets, points });
        next = covered.iter().position(|&c| !c).map(|j| j as u32);
    }
    Ok(out)
}

/// Every border curve of `D2`: the unit circle, then the `n²` holes.
pub fn border_curves(p: &Params) -> Vec<BorderCurve> {
    std::iter::once(BorderCurve::Outer)
        .chain((0..p.n_squared()).map(BorderCurve::Hole))
        .collect()
}

/// Points on every lifted border contour, `node_count` per curve and sheet.
pub fn boundary_samples(p: &Params, node_count: usize) -> Result<Vec<SurfacePoint>> {
    boundary_samples_phased(p, node_count, 0.0)
}

pub fn boundary_samples_phased(p: &Params, node_count: usize, phase: f64) -> Result<Vec<SurfacePoint>> {
    let mut out = Vec::new();
    for curve in border_curves(p) {
        for lift in lift_boundary_phased(curve, 0, p, node_count, phase)? {
            out.extend(lift.points);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    /// `n·χ(D2) = n(1 - n²)`.
    pub euler: i64,
    /// `n³·χ(A)` minus the ramification over `c`.
    pub euler_riemann_hurwitz: i64,
    pub boundary_components: u64,
    pub genus: i64,
}

/// Euler characteristic, border count and genus of `R`.
///
/// The border count comes from lifting every border curve of `D2`; the
/// Euler characteristic is derived twice, as an unbranched `n`-fold cover of
/// `D2` and as a cover of the annulus `A` branched over `c`.
pub fn topology(p: &Params) -> Result<Topology> {
    if p.n < 2 {
        return Err(Error::InvalidParameter("topology needs n >= 2".into()));
    }
    p.require_float()?;
    let n = p.n as i64;
    let mut boundary_components = 0u64;
    for curve in border_curves(p) {
        boundary_components += lift_boundary(curve, 0, p, 64)?.len() as u64;
    }
    let chi_d2 = 1 - n * n;
    let euler = n * chi_d2;
    // over A (χ = 0) the n branch points each have ramification index n²
    let ramification: i64 = crate::surface::branch_points(p)?
        .iter()
        .map(|b| b.multiplicity as i64 - 1)
        .sum();
    // degree·χ(A) vanishes
    let euler_riemann_hurwitz = -ramification;
    if euler != euler_riemann_hurwitz {
        return Err(Error::InvariantViolation(format!(
            "Euler characteristic {euler} disagrees with Riemann-Hurwitz {euler_riemann_hurwitz}"
        )));
    }
    let twice_genus = 2 - euler - boundary_components as i64;
    if twice_genus < 0 || twice_genus % 2 != 0 {
        return Err(Error::InvariantViolation(format!(
            "2 - χ - b = {twice_genus} is not a non-negative even number"
        )));
    }
    Ok(Topology {
        euler,
        euler_riemann_hurwitz,
        boundary_components,
        genus: twice_genus / 2,
    })
}

/// `L(z1^n)` recomputed from a continued value, for consistency checks.
pub fn check_value(z: Complex64, value: Complex64, p: &Params) -> Result<f64> {
    Ok((mobius_l(value.powu(p.n), p.c)? - z.powu(p.n_squared())).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn regime_s() -> Params {
        Params::direct(2, 0.25, 0.01).unwrap()
    }

    fn circle(center: Complex64, radius: f64, k: usize) -> PathSpec {
        PathSpec::closed(
            (0..k)
                .map(|i| center + Complex64::from_polar(radius, 2.0 * PI * i as f64 / k as f64))
                .collect(),
        )
    }

    fn hole_center(k: u32, p: &Params) -> Complex64 {
        let n2 = p.n_squared();
        let h = hole_disc(p.c, p.d).unwrap();
        Complex64::from_polar(h.center.norm().powf(1.0 / n2 as f64), (2 * k + 1) as f64 * PI / n2 as f64)
    }

    /// Reference continuation: fixed steps, nearest root at each step.
    fn dense_reference(a: Complex64, b: Complex64, v0: Complex64, steps: usize, p: &Params) -> Complex64 {
        let mut v = v0;
        for i in 1..=steps {
            let z = a + (b - a) * (i as f64 / steps as f64);
            let roots = nth_roots(radicand(z, p).unwrap(), p.n);
            v = *roots
                .iter()
                .min_by(|x, y| (*x - v).norm().total_cmp(&(*y - v).norm()))
                .unwrap();
        }
        v
    }

    #[test]
    fn multivalue_examples() {
        let p = regime_s();
        let vals = multivalue_f(cx(0.0, 0.0), &p).unwrap();
        assert!((vals[0] - cx(0.5, 0.0)).norm() < 1e-15);
        assert!((vals[1] + cx(0.5, 0.0)).norm() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut seen = 0;
        while seen < 1000 {
            let z = Complex64::from_polar(rng.random::<f64>().sqrt(), 2.0 * PI * rng.random::<f64>());
            if !in_domain(z, DomainId::D2, &p) {
                continue;
            }
            seen += 1;
            let vals = multivalue_f(z, &p).unwrap();
            let first = vals[0].powu(2);
            for v in &vals {
                assert!(in_domain(*v, DomainId::D1, &p));
                assert!((v.powu(2) - first).norm() < 1e-14);
            }
        }
        assert!(multivalue_f(hole_center(0, &p), &p).is_err());
    }

    #[test]
    fn constant_path_keeps_state() {
        let p = regime_s();
        let s = state_at(cx(0.3, 0.2), 1, &p).unwrap();
        let end = continue_path(&PathSpec::open(vec![cx(0.3, 0.2)]), s, &p).unwrap();
        assert_eq!(end, s);
    }

    #[test]
    fn segment_matches_dense_reference() {
        let p = regime_s();
        let (a, b) = (cx(0.9, 0.0), cx(0.0, 0.9));
        for sheet in 0..2 {
            let s = state_at(a, sheet, &p).unwrap();
            let end = continue_path(&PathSpec::open(vec![a, b]), s, &p).unwrap();
            let reference = dense_reference(a, b, s.value, 10_000, &p);
            assert!((end.value - reference).norm() < 1e-12);
            assert!(check_value(b, end.value, &p).unwrap() < 1e-12);
        }
    }

    #[test]
    fn single_hole_loop_shifts_by_one() {
        let p = regime_s();
        let center = hole_center(0, &p);
        assert!((center - Complex64::from_polar(0.707, PI / 4.0)).norm() < 1e-3);
        let lp = circle(center, 0.05, 24);
        assert_eq!(monodromy_loop(&lp, &p).unwrap(), 1);
        assert_eq!(monodromy_loop_from(&lp, 1, &p).unwrap(), 1);
        assert_eq!(monodromy_loop(&lp.reversed(), &p).unwrap(), 1);
    }

    #[test]
    fn contractible_and_all_holes_loops() {
        let p = regime_s();
        assert_eq!(monodromy_loop(&circle(cx(0.1, 0.0), 0.2, 16), &p).unwrap(), 0);
        assert_eq!(monodromy_loop(&circle(cx(0.0, 0.0), 0.95, 64), &p).unwrap(), 0);
        let q = Params::direct(3, 0.25, 0.01).unwrap();
        assert_eq!(monodromy_loop(&circle(cx(0.0, 0.0), 0.95, 128), &q).unwrap(), 0);
        let lp = circle(hole_center(4, &q), 0.03, 24);
        assert_eq!(monodromy_loop(&lp, &q).unwrap(), 1);
    }

    #[test]
    fn loops_too_close_to_a_hole_are_rejected() {
        let p = regime_s();
        let lp = circle(hole_center(0, &p), 0.009, 24);
        assert!(matches!(monodromy_loop(&lp, &p), Err(Error::PathOutsideDomain { .. })));
        let through = PathSpec::open(vec![cx(0.0, 0.0), cx(0.9, 0.9)]);
        let s = state_at(cx(0.0, 0.0), 0, &p).unwrap();
        assert!(matches!(continue_path(&through, s, &p), Err(Error::PathOutsideDomain { .. })));
    }

    #[test]
    fn offsets_add_under_concatenation() {
        let q = Params::direct(3, 0.25, 0.01).unwrap();
        let base = cx(0.0, 0.0);
        let around = |k: u32| {
            let c = hole_center(k, &q);
            let dir = c / c.norm();
            let entry = c - dir * 0.04;
            let mut v = vec![base, entry];
            for i in 1..24 {
                v.push(c - dir * Complex64::from_polar(0.04, 2.0 * PI * i as f64 / 24.0));
            }
            v.push(entry);
            PathSpec::closed(v)
        };
        let one = around(0);
        let two = around(3);
        let both = one.concat(&two);
        let a = monodromy_loop(&one, &q).unwrap();
        let b = monodromy_loop(&two, &q).unwrap();
        assert_eq!(monodromy_loop(&both, &q).unwrap(), (a + b) % 3);
    }

    #[test]
    fn model_examples() {
        let p = regime_s();
        let m = cut_paste_build(&p).unwrap();
        assert_eq!(m.cuts.len(), 4);
        assert_eq!(model_monodromy(&m, &[Crossing { cut: 0, sign: 1 }]), 1);
        let all: Vec<_> = (0..4).map(|k| Crossing { cut: k, sign: 1 }).collect();
        assert_eq!(model_monodromy(&m, &all), 0);
        assert_eq!(model_monodromy(&m, &[]), 0);
        assert_eq!(m.transport(0, &[Crossing { cut: 2, sign: -1 }]), 1);
        assert!(cut_paste_build(&Params::direct(1, 0.25, 0.01).unwrap()).is_err());
    }

    #[test]
    fn recorded_crossings_match_continuation() {
        let p = regime_s();
        let m = cut_paste_build(&p).unwrap();
        let lp = circle(hole_center(1, &p), 0.05, 24);
        let crossings = record_crossings(&lp, &m);
        assert_eq!(crossings, vec![Crossing { cut: 1, sign: 1 }]);
        let big = circle(cx(0.0, 0.0), 0.95, 64);
        assert_eq!(record_crossings(&big, &m).len(), 4);
    }

    #[test]
    fn reversal_undoes_continuation() {
        let p = regime_s();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut done = 0;
        while done < 100 {
            let verts: Vec<_> = (0..4)
                .map(|_| Complex64::from_polar(0.95 * rng.random::<f64>(), 2.0 * PI * rng.random::<f64>()))
                .collect();
            let path = PathSpec::open(verts);
            if check_path_in_d2(&path, &p).is_err() || check_hole_margin(&path, &p).is_err() {
                continue;
            }
            done += 1;
            let s = state_at(path.vertices[0], rng.random_range(0..2), &p).unwrap();
            let there = continue_path(&path, s, &p).unwrap();
            let back = continue_path(&path.reversed(), there, &p).unwrap();
            assert!((back.value - s.value).norm() < 1e-12);
            assert_eq!(back.sheet, s.sheet);
        }
    }

    #[test]
    fn border_lifts_regime_s() {
        let p = regime_s();
        let outer = lift_boundary(BorderCurve::Outer, 0, &p, 64).unwrap();
        assert_eq!(outer.len(), 2);
        assert_eq!(outer[0].sheets, vec![0]);
        assert_eq!(outer[1].sheets, vec![1]);
        let hole = lift_boundary(BorderCurve::Hole(0), 0, &p, 64).unwrap();
        assert_eq!(hole.len(), 1);
        assert_eq!(hole[0].sheets, vec![0, 1]);
        for pt in &hole[0].points {
            assert!(check_value(pt.z2, pt.z1, &p).unwrap() < 1e-12);
            assert!((pt.z1.norm() - 0.1).abs() < 1e-5);
        }
        for pt in &outer[1].points {
            assert!((pt.z1.norm() - 1.0).abs() < 1e-5);
        }
        let total: usize = border_curves(&p)
            .into_iter()
            .map(|c| lift_boundary(c, 0, &p, 32).unwrap().len())
            .sum();
        assert_eq!(total, 6);
    }

    #[test]
    fn topology_values() {
        let t = topology(&regime_s()).unwrap();
        assert_eq!((t.euler, t.boundary_components, t.genus), (-6, 6, 1));
        let t = topology(&Params::direct(3, 0.25, 0.01).unwrap()).unwrap();
        assert_eq!((t.euler, t.boundary_components, t.genus), (-24, 12, 7));
        assert_eq!(t.euler_riemann_hurwitz, -24);
    }
}
