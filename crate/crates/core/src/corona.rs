//! Corona data `F1 = d^{1/n}/z1`, `F2 = z2` on `R`, the check
//! `δ ≤ max(|F1|, |F2|) ≤ 1`, and candidate Bezout solutions `(G1, G2)` in
//! the monomial ansatz `span{z1^j z2^k : |j| ≤ J, 0 ≤ k ≤ K}`.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::Params;
use crate::surface::{fmt_f64, form_map, SurfaceForm, SurfacePoint};

/// Slack allowed below `δ` before a sample counts as a violation.
pub const DATA_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoronaData {
    pub f1: Complex64,
    pub f2: Complex64,
}

impl CoronaData {
    pub fn max_modulus(&self) -> f64 {
        self.f1.norm().max(self.f2.norm())
    }
}

pub fn eval_data(pt: &SurfacePoint, p: &Params) -> Result<CoronaData> {
    if pt.z1 == Complex64::new(0.0, 0.0) {
        return Err(Error::OutOfDomain { z: pt.z1, domain: "D1" });
    }
    let f1 = match pt.form {
        SurfaceForm::Reciprocal => p.d_root() / pt.z1,
        SurfaceForm::Projection => pt.z1,
    };
    Ok(CoronaData { f1, f2: pt.z2 })
}

/// Points with `|F2| < δ` must have `|z1|^n < c + 2δ^{n²}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallF2Check {
    pub count: usize,
    pub bound: f64,
    /// Largest `|z1|^n / bound` among those points; below 1 when the chain holds.
    pub max_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataReport {
    pub min_of_max: f64,
    pub max_of_max: f64,
    pub argmin: SurfacePoint,
    pub delta: Option<f64>,
    pub samples: usize,
    pub small_f2: Option<SmallF2Check>,
}

/// Sweep `max(|F1|, |F2|)` over the samples.
///
/// With `δ` known the minimum must be at least `δ - 1e-12`; with or without
/// it the maximum must stay below 1. A failure is reported as an error that
/// carries the offending point.
pub fn verify_data(samples: &[SurfacePoint], p: &Params) -> Result<DataReport> {
    p.require_float()?;
    let first = samples
        .first()
        .ok_or_else(|| Error::InvalidParameter("verify_data needs at least one sample".into()))?;
    let mut min_of_max = f64::INFINITY;
    let mut max_of_max = f64::NEG_INFINITY;
    let mut argmin = *first;
    let mut small = p.delta.map(|delta| SmallF2Check {
        count: 0,
        bound: p.c + 2.0 * delta.powi(p.n_squared() as i32),
        max_ratio: 0.0,
    });

    for pt in samples {
        let data = eval_data(pt, p)?;
        let m = data.max_modulus();
        if m < min_of_max {
            min_of_max = m;
            argmin = *pt;
        }
        if m > max_of_max {
            max_of_max = m;
        }
        if m >= 1.0 {
            return Err(Error::InvariantViolation(format!(
                "max(|F1|,|F2|) = {m} >= 1 at z1 = {}, z2 = {}",
                pt.z1, pt.z2
            )));
        }
        if let (Some(delta), Some(check)) = (p.delta, small.as_mut()) {
            if data.f2.norm() < delta {
                check.count += 1;
                let z1n = pt.reciprocal_z1(p).norm().powi(p.n as i32);
                check.max_ratio = check.max_ratio.max(z1n / check.bound);
            }
        }
    }

    if let Some(delta) = p.delta {
        if min_of_max < delta - DATA_SLACK {
            return Err(Error::DataViolation {
                value: min_of_max,
                bound: delta,
                z1: argmin.z1,
                z2: argmin.z2,
            });
        }
        if let Some(check) = &small {
            if check.max_ratio >= 1.0 {
                return Err(Error::InvariantViolation(format!(
                    "|z1|^n reached {} of c + 2δ^(n²) at a point with |F2| < δ",
                    check.max_ratio
                )));
            }
        }
    }

    Ok(DataReport {
        min_of_max,
        max_of_max,
        argmin,
        delta: p.delta,
        samples: samples.len(),
        small_f2: small,
    })
}

/// Sample CSV with `absF1,absF2` appended.
pub fn sweep_csv(samples: &[SurfacePoint], p: &Params) -> Result<String> {
    let mut out = String::from("re_z1,im_z1,re_z2,im_z2,multiplicity,absF1,absF2\n");
    for pt in samples {
        let data = eval_data(pt, p)?;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_f64(pt.z1.re),
            fmt_f64(pt.z1.im),
            fmt_f64(pt.z2.re),
            fmt_f64(pt.z2.im),
            pt.multiplicity,
            fmt_f64(data.f1.norm()),
            fmt_f64(data.f2.norm())
        );
    }
    Ok(out)
}

/// Index range of the monomial ansatz: `j ∈ [-J, J]`, `k ∈ [0, K]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ansatz {
    #[serde(rename = "J")]
    pub j_max: u32,
    #[serde(rename = "K")]
    pub k_max: u32,
}

impl Ansatz {
    pub fn new(j_max: u32, k_max: u32) -> Self {
        Ansatz { j_max, k_max }
    }

    pub fn len(&self) -> usize {
        (2 * self.j_max as usize + 1) * (self.k_max as usize + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index(&self, j: i32, k: u32) -> Option<usize> {
        if j.unsigned_abs() > self.j_max || k > self.k_max {
            return None;
        }
        Some((j + self.j_max as i32) as usize * (self.k_max as usize + 1) + k as usize)
    }

    /// `(j, k)` pairs in storage order.
    pub fn monomials(&self) -> impl Iterator<Item = (i32, u32)> + '_ {
        let j_max = self.j_max as i32;
        (-j_max..=j_max).flat_map(move |j| (0..=self.k_max).map(move |k| (j, k)))
    }

    /// Every monomial evaluated at `(z1, z2)`, in storage order.
    pub fn basis(&self, z1: Complex64, z2: Complex64) -> Vec<Complex64> {
        let j_max = self.j_max as i32;
        let inv = z1.inv();
        let mut z1_pows = Vec::with_capacity(2 * self.j_max as usize + 1);
        for j in -j_max..=j_max {
            z1_pows.push(if j < 0 { inv.powu(j.unsigned_abs()) } else { z1.powu(j as u32) });
        }
        let mut z2_pows = Vec::with_capacity(self.k_max as usize + 1);
        let mut acc = Complex64::new(1.0, 0.0);
        for _ in 0..=self.k_max {
            z2_pows.push(acc);
            acc *= z2;
        }
        let mut out = Vec::with_capacity(self.len());
        for a in &z1_pows {
            for b in &z2_pows {
                out.push(a * b);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSolution {
    pub form: SurfaceForm,
    pub ansatz: Ansatz,
    pub coeffs_g1: Vec<Complex64>,
    pub coeffs_g2: Vec<Complex64>,
    pub measured_norm_g1: f64,
    pub measured_norm_g2: f64,
    pub residual_sup: f64,
    pub sample_spec: String,
}

impl CandidateSolution {
    pub fn zero(form: SurfaceForm, ansatz: Ansatz) -> Self {
        CandidateSolution {
            form,
            ansatz,
            coeffs_g1: vec![Complex64::new(0.0, 0.0); ansatz.len()],
            coeffs_g2: vec![Complex64::new(0.0, 0.0); ansatz.len()],
            measured_norm_g1: 0.0,
            measured_norm_g2: 0.0,
            residual_sup: 1.0,
            sample_spec: "zero function".into(),
        }
    }
}

/// The exact witness `G1 = 1/F1`, `G2 = 0`, so `F1·G1 ≡ 1`.
///
/// In the reciprocal form this is `G1 = d^{-1/n} z1` with sup norm `d^{-1/n}`
/// (approached as `|z1| → 1`); in the projection form `G1 = 1/z1`, same norm.
pub fn baseline_solution(p: &Params) -> Result<CandidateSolution> {
    baseline_solution_in(p, SurfaceForm::Reciprocal)
}

pub fn baseline_solution_in(p: &Params, form: SurfaceForm) -> Result<CandidateSolution> {
    p.require_float()?;
    let ansatz = Ansatz::new(1, 0);
    let mut sol = CandidateSolution::zero(form, ansatz);
    let inv_root = 1.0 / p.d_root();
    match form {
        SurfaceForm::Reciprocal => sol.coeffs_g1[ansatz.index(1, 0).unwrap()] = Complex64::new(inv_root, 0.0),
        SurfaceForm::Projection => sol.coeffs_g1[ansatz.index(-1, 0).unwrap()] = Complex64::new(1.0, 0.0),
    }
    sol.measured_norm_g1 = inv_root;
    sol.measured_norm_g2 = 0.0;
    sol.residual_sup = 0.0;
    sol.sample_spec = "closed form: sup over |z1| -> 1 (reciprocal) or |z1| -> d^(1/n) (projection)".into();
    Ok(sol)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CandidateValue {
    pub g1: Complex64,
    pub g2: Complex64,
    /// `F1·G1 + F2·G2 - 1`.
    pub bezout_residual: Complex64,
}

fn dot(coeffs: &[Complex64], basis: &[Complex64]) -> Complex64 {
    coeffs.iter().zip(basis).map(|(a, b)| a * b).sum()
}

pub fn eval_candidate(sol: &CandidateSolution, pt: &SurfacePoint, p: &Params) -> Result<CandidateValue> {
    let pt = if pt.form == sol.form { *pt } else { form_map(pt, p)? };
    let data = eval_data(&pt, p)?;
    let basis = sol.ansatz.basis(pt.z1, pt.z2);
    let g1 = dot(&sol.coeffs_g1, &basis);
    let g2 = dot(&sol.coeffs_g2, &basis);
    Ok(CandidateValue {
        g1,
        g2,
        bezout_residual: data.f1 * g1 + data.f2 * g2 - 1.0,
    })
}

/// `max |F1·G1 + F2·G2 - 1|` over boundary samples.
///
/// The residual is holomorphic on `R`, so its sup is approached on the
/// border; a dense sample of the lifted border gives the estimate.
pub fn residual_sup_estimate(sol: &CandidateSolution, p: &Params, boundary_samples: &[SurfacePoint]) -> Result<f64> {
    let mut sup = 0.0f64;
    for pt in boundary_samples {
        sup = sup.max(eval_candidate(sol, pt, p)?.bezout_residual.norm());
    }
    Ok(sup)
}

/// Sampled `(‖G1‖, ‖G2‖)` over the given points.
pub fn measured_norms(sol: &CandidateSolution, p: &Params, samples: &[SurfacePoint]) -> Result<(f64, f64)> {
    let mut n1 = 0.0f64;
    let mut n2 = 0.0f64;
    for pt in samples {
        let v = eval_candidate(sol, pt, p)?;
        n1 = n1.max(v.g1.norm());
        n2 = n2.max(v.g2.norm());
    }
    Ok((n1, n2))
}
