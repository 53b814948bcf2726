//! Plane primitives: the disc automorphism `L(z) = (z - c)/(1 - cz)`, its
//! inverse, the five plane domains of the construction and circle contours
//! for trapezoid quadrature.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::Params;

/// Denominators below this are treated as a pole of `L` or `L⁻¹`.
pub const POLE_GUARD: f64 = 1e-300;

/// Smallest contour accepted by [`contour_nodes`].
pub const MIN_NODES: usize = 8;

/// The plane domains used by the construction.
///
/// `A` is the punctured disc `d < |z| < 1`, `B` the hole `|z| < d`, `D` the
/// image of `A` under `L`, and `D1`, `D2` the preimages of `A` and `D` under
/// `z ↦ z^n` and `z ↦ z^{n²}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DomainId {
    A,
    B,
    D,
    D1,
    D2,
}

impl DomainId {
    pub const ALL: [DomainId; 5] = [DomainId::A, DomainId::B, DomainId::D, DomainId::D1, DomainId::D2];

    pub fn name(self) -> &'static str {
        match self {
            DomainId::A => "A",
            DomainId::B => "B",
            DomainId::D => "D",
            DomainId::D1 => "D1",
            DomainId::D2 => "D2",
        }
    }
}

impl fmt::Display for DomainId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Ccw,
    Cw,
}

impl Orientation {
    fn sign(self) -> f64 {
        match self {
            Orientation::Ccw => 1.0,
            Orientation::Cw => -1.0,
        }
    }
}

/// A circle traversed once, discretised by `node_count` equispaced nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    pub center: Complex64,
    pub radius: f64,
    pub orientation: Orientation,
    pub node_count: usize,
}

impl Contour {
    pub fn new(center: Complex64, radius: f64, orientation: Orientation, node_count: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParameter(format!("contour radius must be positive, got {radius}")));
        }
        if node_count < MIN_NODES || !node_count.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "contour node count must be a power of two >= {MIN_NODES}, got {node_count}"
            )));
        }
        Ok(Contour {
            center,
            radius,
            orientation,
            node_count,
        })
    }

    /// Counter-clockwise circle about the origin.
    pub fn centered(radius: f64, node_count: usize) -> Result<Self> {
        Contour::new(Complex64::new(0.0, 0.0), radius, Orientation::Ccw, node_count)
    }

    pub fn with_nodes(&self, node_count: usize) -> Result<Self> {
        Contour::new(self.center, self.radius, self.orientation, node_count)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disc {
    pub center: Complex64,
    pub radius: f64,
}

impl Disc {
    pub fn contains_closed(&self, z: Complex64) -> bool {
        (z - self.center).norm() <= self.radius
    }
}

fn check_c(c: f64) -> Result<()> {
    if c > 0.0 && c < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("Möbius parameter must lie in (0, 1), got {c}")))
    }
}

/// `L(z) = (z - c)/(1 - cz)`.
pub fn mobius_l(z: Complex64, c: f64) -> Result<Complex64> {
    check_c(c)?;
    let den = Complex64::new(1.0, 0.0) - z * c;
    if den.norm() < POLE_GUARD {
        return Err(Error::Pole { z, denominator: den.norm() });
    }
    Ok((z - c) / den)
}

/// `L⁻¹(w) = (w + c)/(1 + cw)`.
pub fn mobius_l_inv(w: Complex64, c: f64) -> Result<Complex64> {
    check_c(c)?;
    let den = Complex64::new(1.0, 0.0) + w * c;
    if den.norm() < POLE_GUARD {
        return Err(Error::Pole { z: w, denominator: den.norm() });
    }
    Ok((w + c) / den)
}

/// The image `L({|z| ≤ d})`, i.e. the hole of `D`.
///
/// `L` has real coefficients, so the image circle is symmetric about the real
/// axis and its diameter is the segment between `L(-d)` and `L(d)`.
pub fn hole_disc(c: f64, d: f64) -> Result<Disc> {
    if !(d >= 0.0 && d < c && c < 1.0) {
        return Err(Error::ParameterOrder { c, d });
    }
    let right = mobius_l(Complex64::new(d, 0.0), c)?.re;
    let left = mobius_l(Complex64::new(-d, 0.0), c)?.re;
    Ok(Disc {
        center: Complex64::new(0.5 * (right + left), 0.0),
        radius: 0.5 * (right - left).abs(),
    })
}

/// Open-set membership test; non-finite input is never a member.
pub fn in_domain(z: Complex64, id: DomainId, p: &Params) -> bool {
    if !z.is_finite() {
        return false;
    }
    let r = z.norm();
    match id {
        DomainId::A => p.d < r && r < 1.0,
        DomainId::B => r < p.d,
        DomainId::D => {
            r < 1.0
                && match mobius_l_inv(z, p.c) {
                    Ok(u) => in_domain(u, DomainId::A, p),
                    Err(_) => false,
                }
        }
        DomainId::D1 => p.d_root() < r && r < 1.0,
        DomainId::D2 => r < 1.0 && in_domain(z.powu(p.n * p.n), DomainId::D, p),
    }
}

/// Nodes and trapezoid weights for `∮ g(ξ) dξ` over the contour.
///
/// With `ξ_k = center + r·e^{iθ_k}` the weight is `±i(ξ_k - center)·2π/N`, the
/// sign carrying the orientation.
pub fn contour_nodes(ct: &Contour) -> Vec<(Complex64, Complex64)> {
    let n = ct.node_count;
    let step = 2.0 * PI / n as f64;
    let scale = Complex64::new(0.0, ct.orientation.sign() * step);
    (0..n)
        .map(|k| {
            let offset = Complex64::from_polar(ct.radius, step * k as f64);
            (ct.center + offset, scale * offset)
        })
        .collect()
}

/// Trapezoid approximation of `∮ g(ξ) dξ`.
pub fn contour_integral<F>(ct: &Contour, mut g: F) -> Complex64
where
    F: FnMut(Complex64) -> Complex64,
{
    contour_nodes(ct)
        .into_iter()
        .fold(Complex64::new(0.0, 0.0), |acc, (node, w)| acc + g(node) * w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Params;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn regime_s() -> Params {
        Params::direct(2, 0.25, 0.01).unwrap()
    }

    #[test]
    fn mobius_fixed_values() {
        assert_eq!(mobius_l(c(0.25), 0.25).unwrap(), c(0.0));
        assert_eq!(mobius_l(c(0.0), 0.25).unwrap(), c(-0.25));
        assert_eq!(mobius_l(c(1.0), 0.25).unwrap(), c(1.0));
        assert_eq!(mobius_l_inv(c(0.0), 0.3).unwrap(), c(0.3));
        assert_eq!(mobius_l_inv(c(-0.3), 0.3).unwrap(), c(0.0));
    }

    #[test]
    fn mobius_inverse_value() {
        // 0.9061 / 1.164025 in 40-digit arithmetic
        let w = mobius_l_inv(c(0.6561), 0.25).unwrap();
        assert!((w.re - 0.778_419_707_480_509_4).abs() < 1e-15);
        assert_eq!(w.im, 0.0);
    }

    #[test]
    fn mobius_pole_and_bad_c() {
        assert!(matches!(mobius_l(c(4.0), 0.25), Err(Error::Pole { .. })));
        assert!(matches!(mobius_l_inv(c(-4.0), 0.25), Err(Error::Pole { .. })));
        assert!(mobius_l(c(0.0), 1.0).is_err());
        assert!(mobius_l(c(0.0), 0.0).is_err());
    }

    #[test]
    fn hole_disc_values() {
        let h = hole_disc(0.25, 0.01).unwrap();
        // L(0.01) = -0.24/0.9975, L(-0.01) = -0.26/1.0025
        let right = -0.24 / 0.9975;
        let left = -0.26 / 1.0025;
        assert!((h.center.re - 0.5 * (left + right)).abs() < 1e-15);
        assert!((h.center.re + 0.249_977).abs() < 1e-6);
        assert!((h.radius - 0.009_375).abs() < 1e-6);
        assert!(h.contains_closed(c(-0.25)));

        let degenerate = hole_disc(0.25, 0.0).unwrap();
        assert_eq!(degenerate.center, c(-0.25));
        assert_eq!(degenerate.radius, 0.0);

        assert!(matches!(hole_disc(0.25, 0.25), Err(Error::ParameterOrder { .. })));
    }

    #[test]
    fn domain_membership() {
        let p = regime_s();
        assert!(in_domain(c(0.25), DomainId::A, &p));
        assert!(in_domain(c(0.0), DomainId::D2, &p));
        assert!(!in_domain(c(0.1), DomainId::D1, &p));
        assert!(in_domain(c(0.100_001), DomainId::D1, &p));
        assert!(in_domain(c(0.005), DomainId::B, &p));
        assert!(!in_domain(c(0.01), DomainId::B, &p));
        assert!(!in_domain(c(0.01), DomainId::A, &p));
        assert!(!in_domain(c(-0.25), DomainId::D, &p));
        assert!(in_domain(c(0.25), DomainId::D, &p));
        assert!(!in_domain(Complex64::new(f64::NAN, 0.0), DomainId::A, &p));
        assert!(!in_domain(Complex64::new(f64::INFINITY, 0.0), DomainId::B, &p));
        // 0.7071·e^{iπ/4} sits over the hole centre -c
        let hole = Complex64::from_polar(0.25f64.powf(0.25), PI / 4.0);
        assert!(!in_domain(hole, DomainId::D2, &p));
    }

    #[test]
    fn trapezoid_exact_cases() {
        let unit8 = Contour::centered(1.0, 8).unwrap();
        let one = contour_integral(&unit8, |_| c(1.0));
        assert!(one.norm() < 1e-15);
        let inv = contour_integral(&unit8, |z| 1.0 / z);
        assert!((inv - Complex64::new(0.0, 2.0 * PI)).norm() < 1e-14);
        let unit16 = Contour::centered(1.0, 16).unwrap();
        assert!(contour_integral(&unit16, |z| z.powu(3)).norm() < 1e-14);

        let cw = Contour::new(c(0.0), 1.0, Orientation::Cw, 8).unwrap();
        let inv_cw = contour_integral(&cw, |z| 1.0 / z);
        assert!((inv_cw + Complex64::new(0.0, 2.0 * PI)).norm() < 1e-14);
    }

    #[test]
    fn contour_rejects_bad_node_counts() {
        assert!(Contour::centered(1.0, 4).is_err());
        assert!(Contour::centered(1.0, 12).is_err());
        assert!(Contour::centered(0.0, 16).is_err());
    }
}
