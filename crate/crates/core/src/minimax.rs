//! Discrete complex Chebyshev fitting: Lawson's iteratively reweighted least
//! squares with the equality constraints eliminated through their null space.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::continuation::boundary_samples_phased;
use crate::corona::{eval_data, measured_norms, residual_sup_estimate, Ansatz, CandidateSolution};
use crate::error::{Error, Result};
use crate::interp::{annulus_trace, interp_lb, laurent_eval, roots_e, AnnulusRegime};
use crate::params::Params;
use crate::surface::{form_map, SurfaceForm, SurfacePoint};
use crate::trace::{certify_lb, residual_adjusted_lb};

/// Relative singular value cutoff for ranks and null spaces.
pub const RANK_TOL: f64 = 1e-10;

/// Gram-Schmidt remainder below which a Bezout row counts as dependent.
pub const GREEDY_TOL: f64 = 1e-6;

/// Bezout residual above which a corona candidate counts as infeasible.
pub const FEASIBLE_TOL: f64 = 1e-6;

/// `min_x max_i |(A x - b)_i|` subject to `C x = e`.
#[derive(Debug, Clone, PartialEq)]
pub struct MinimaxProblem {
    pub objective: DMatrix<Complex64>,
    pub objective_target: DVector<Complex64>,
    pub constraints: DMatrix<Complex64>,
    pub constraint_target: DVector<Complex64>,
    /// Ridge weight on the (column-scaled) free coordinates.
    pub regularization: f64,
}

impl MinimaxProblem {
    pub fn unconstrained(objective: DMatrix<Complex64>, objective_target: DVector<Complex64>) -> Self {
        let cols = objective.ncols();
        MinimaxProblem {
            objective,
            objective_target,
            constraints: DMatrix::zeros(0, cols),
            constraint_target: DVector::zeros(0),
            regularization: 0.0,
        }
    }

    pub fn unknowns(&self) -> usize {
        self.objective.ncols()
    }

    fn check(&self) -> Result<()> {
        let p = self.unknowns();
        if self.constraints.ncols() != p
            || self.objective_target.len() != self.objective.nrows()
            || self.constraint_target.len() != self.constraints.nrows()
        {
            return Err(Error::InvalidParameter("minimax problem dimensions disagree".into()));
        }
        if self.objective.nrows() < p {
            return Err(Error::InvalidParameter(format!(
                "{} objective rows for {p} unknowns",
                self.objective.nrows()
            )));
        }
        if self.regularization.is_nan() || self.regularization < 0.0 {
            return Err(Error::InvalidParameter("regularization must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LawsonOptions {
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for LawsonOptions {
    fn default() -> Self {
        LawsonOptions { max_iter: 400, tol: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimaxResult {
    pub coefficients: Vec<Complex64>,
    /// `max |A x - b|` at the returned iterate.
    pub objective: f64,
    /// Largest weighted least-squares value seen; no feasible `x` does better.
    pub lower_bound: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `max |C x - e|`.
    pub constraint_residual: f64,
    /// Best objective after each iteration.
    pub history: Vec<f64>,
}

fn column_scales(a: &DMatrix<Complex64>, c: &DMatrix<Complex64>) -> Vec<f64> {
    (0..a.ncols())
        .map(|j| {
            let na = a.column(j).norm();
            let nc = c.column(j).norm();
            let n = if na > 0.0 { na } else { nc };
            if n > 0.0 { 1.0 / n } else { 1.0 }
        })
        .collect()
}

fn scale_columns(m: &DMatrix<Complex64>, s: &[f64]) -> DMatrix<Complex64> {
    let mut out = m.clone();
    for (j, sj) in s.iter().enumerate() {
        out.column_mut(j).scale_mut(*sj);
    }
    out
}

/// Particular solution and orthonormal null-space basis of `C x = e`.
fn eliminate(c: &DMatrix<Complex64>, e: &DVector<Complex64>) -> Result<(DVector<Complex64>, DMatrix<Complex64>)> {
    let (q, p) = c.shape();
    if q == 0 {
        return Ok((DVector::zeros(p), DMatrix::identity(p, p)));
    }
    let rows = q.max(p);
    let mut padded = DMatrix::zeros(rows, p);
    padded.view_mut((0, 0), (q, p)).copy_from(c);
    let svd = padded.svd(true, true);
    let u = svd.u.as_ref().unwrap();
    let v_t = svd.v_t.as_ref().unwrap();
    let sigma_max = svd.singular_values.max();
    let cut = RANK_TOL * sigma_max;
    let mut e_pad = DVector::zeros(rows);
    e_pad.rows_mut(0, q).copy_from(e);
    let mut x = DVector::zeros(p);
    let mut null = Vec::new();
    let mut rank = 0;
    for (i, s) in svd.singular_values.iter().enumerate() {
        let v = v_t.row(i).adjoint();
        if *s > cut && sigma_max > 0.0 {
            rank += 1;
            let coef = u.column(i).dotc(&e_pad) / Complex64::new(*s, 0.0);
            x += v * coef;
        } else {
            null.push(v);
        }
    }
    if rank < q {
        return Err(Error::RankDeficient {
            what: "equality constraints",
            rank,
            needed: q,
        });
    }
    let z = if null.is_empty() {
        DMatrix::zeros(p, 0)
    } else {
        DMatrix::from_columns(&null)
    };
    Ok((x, z))
}

fn max_abs(v: &DVector<Complex64>) -> f64 {
    v.iter().fold(0.0f64, |m, z| m.max(z.norm()))
}

/// Weighted least squares `min Σ w_i |(B y - b)_i|²` (+ ridge).
fn weighted_solve(b_mat: &DMatrix<Complex64>, rhs: &DVector<Complex64>, w: &[f64], ridge: f64) -> DVector<Complex64> {
    let (m, k) = b_mat.shape();
    let extra = if ridge > 0.0 { k } else { 0 };
    let mut lhs = DMatrix::zeros(m + extra, k);
    let mut r = DVector::zeros(m + extra);
    for i in 0..m {
        let sw = w[i].sqrt();
        for j in 0..k {
            lhs[(i, j)] = b_mat[(i, j)] * sw;
        }
        r[i] = rhs[i] * sw;
    }
    for j in 0..extra {
        lhs[(m + j, j)] = Complex64::new(ridge.sqrt(), 0.0);
    }
    let svd = lhs.svd(true, true);
    let cut = svd.singular_values.max() * 1e-13;
    svd.solve(&r, cut).unwrap_or_else(|_| DVector::zeros(k))
}

pub fn lawson(prob: &MinimaxProblem, opts: LawsonOptions) -> Result<MinimaxResult> {
    lawson_warm(prob, opts, None)
}

/// Lawson iteration, optionally seeded with a feasible point whose objective
/// then caps the result.
pub fn lawson_warm(prob: &MinimaxProblem, opts: LawsonOptions, warm: Option<&[Complex64]>) -> Result<MinimaxResult> {
    prob.check()?;
    let p = prob.unknowns();
    let s = column_scales(&prob.objective, &prob.constraints);
    let a = scale_columns(&prob.objective, &s);
    let c = scale_columns(&prob.constraints, &s);
    let (x_p, z) = eliminate(&c, &prob.constraint_target)?;
    let b_mat = &a * &z;
    let rhs = &prob.objective_target - &a * &x_p;
    let m = b_mat.nrows();
    let k = z.ncols();

    let residual = |y: &DVector<Complex64>| -> DVector<Complex64> { &b_mat * y - &rhs };
    let mut best_y = DVector::zeros(k);
    let mut best = max_abs(&residual(&best_y));
    let mut w = vec![1.0 / m as f64; m];

    if let Some(x0) = warm {
        if x0.len() != p {
            return Err(Error::InvalidParameter("warm start has the wrong length".into()));
        }
        let xs = DVector::from_iterator(p, x0.iter().zip(&s).map(|(v, sj)| v / *sj));
        let cres = max_abs(&(&c * &xs - &prob.constraint_target));
        if cres <= 1e-9 * (1.0 + max_abs(&prob.constraint_target)) {
            let y0 = z.adjoint() * (&xs - &x_p);
            let r0 = residual(&y0);
            let obj = max_abs(&r0);
            if obj < best {
                best = obj;
                best_y = y0;
            }
            let total: f64 = r0.iter().map(|v| v.norm()).sum();
            if total > 0.0 {
                w = r0.iter().map(|v| v.norm() / total).collect();
            }
        }
    }

    let mut history = Vec::new();
    let mut lower_bound = 0.0f64;
    let mut converged = k == 0;
    let mut iterations = 0;
    let mut prev_weighted = f64::NAN;
    while !converged && iterations < opts.max_iter {
        iterations += 1;
        let y = weighted_solve(&b_mat, &rhs, &w, prob.regularization);
        let r = residual(&y);
        let obj = max_abs(&r);
        let weighted = w.iter().zip(r.iter()).map(|(wi, ri)| wi * ri.norm_sqr()).sum::<f64>().sqrt();
        if prob.regularization == 0.0 {
            lower_bound = lower_bound.max(weighted);
        }
        if obj < best {
            best = obj;
            best_y = y;
        }
        history.push(best);
        let mut total = 0.0;
        for (wi, ri) in w.iter_mut().zip(r.iter()) {
            *wi *= ri.norm();
            total += *wi;
        }
        if total <= 0.0 || best == 0.0 {
            converged = true;
            break;
        }
        for wi in w.iter_mut() {
            *wi /= total;
        }
        if (weighted - prev_weighted).abs() <= opts.tol * weighted {
            converged = true;
        }
        prev_weighted = weighted;
    }

    let xs = &x_p + &z * &best_y;
    let x = DVector::from_iterator(p, xs.iter().zip(&s).map(|(v, sj)| v * *sj));
    let objective = max_abs(&(&prob.objective * &x - &prob.objective_target));
    let constraint_residual = if prob.constraints.nrows() == 0 {
        0.0
    } else {
        max_abs(&(&prob.constraints * &x - &prob.constraint_target))
    };
    Ok(MinimaxResult {
        coefficients: x.iter().copied().collect(),
        objective,
        lower_bound: lower_bound.min(objective),
        iterations,
        converged,
        constraint_residual,
        history,
    })
}

/// Indices of a greedy maximal set of linearly independent rows, visited in
/// the given order and capped at `limit`.
pub fn independent_rows(rows: &[Vec<Complex64>], order: &[usize], limit: usize, tol: f64) -> Vec<usize> {
    let mut basis: Vec<DVector<Complex64>> = Vec::new();
    let mut chosen = Vec::new();
    for &i in order {
        if chosen.len() >= limit {
            break;
        }
        let mut v = DVector::from_column_slice(&rows[i]);
        let norm = v.norm();
        if norm == 0.0 {
            continue;
        }
        v.unscale_mut(norm);
        // two passes of Gram-Schmidt keep the basis orthonormal to rounding
        for _ in 0..2 {
            for q in &basis {
                let coef = q.dotc(&v);
                v -= q * coef;
            }
        }
        let rest = v.norm();
        if rest > tol {
            v.unscale_mut(rest);
            basis.push(v);
            chosen.push(i);
        }
    }
    chosen
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoronaSolveOptions {
    pub form: SurfaceForm,
    /// Equality constraints; `None` takes every independent Bezout row found.
    pub collocation: Option<usize>,
    /// Border nodes per curve and sheet for the objective.
    pub boundary_nodes: usize,
    pub seed: u64,
    pub lawson: LawsonOptions,
}

impl Default for CoronaSolveOptions {
    fn default() -> Self {
        CoronaSolveOptions {
            form: SurfaceForm::Reciprocal,
            collocation: None,
            boundary_nodes: 64,
            seed: 0,
            lawson: LawsonOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoronaSolveResult {
    pub solution: CandidateSolution,
    pub collocation_count: usize,
    pub objective: f64,
    pub lower_bound: f64,
    pub iterations: usize,
    pub converged: bool,
    pub constraint_residual: f64,
    /// Bezout residual on the dense check set is at most [`FEASIBLE_TOL`].
    pub feasible: bool,
    pub lb_sharp: f64,
    /// `(1 - r)·lb_sharp` for the measured residual `r`.
    pub certified_floor: f64,
}

fn border_in_form(p: &Params, nodes: usize, phase: f64, form: SurfaceForm) -> Result<Vec<SurfacePoint>> {
    let pts = boundary_samples_phased(p, nodes, phase)?;
    match form {
        SurfaceForm::Reciprocal => Ok(pts),
        SurfaceForm::Projection => pts.iter().map(|pt| form_map(pt, p)).collect(),
    }
}

fn pad_coeffs(sol: &CandidateSolution, target: Ansatz) -> Option<Vec<Complex64>> {
    if sol.ansatz.j_max > target.j_max || sol.ansatz.k_max > target.k_max {
        return None;
    }
    let mut g1 = vec![Complex64::new(0.0, 0.0); target.len()];
    let mut g2 = g1.clone();
    for (i, (j, k)) in sol.ansatz.monomials().enumerate() {
        let t = target.index(j, k)?;
        g1[t] = sol.coeffs_g1[i];
        g2[t] = sol.coeffs_g2[i];
    }
    g1.extend(g2);
    Some(g1)
}

/// Small-norm solution of `F1·G1 + F2·G2 = 1` with `G1, G2` in the monomial
/// ansatz `z1^j z2^k`.
///
/// Bezout rows at shuffled border points are picked greedily while they add
/// rank and imposed exactly; `max(|G1|, |G2|)` on the lifted border is then
/// minimised. Norms and the Bezout residual are measured on a border set
/// eight times denser and shifted by half a node.
pub fn solve_corona(
    p: &Params,
    ansatz: Ansatz,
    opts: &CoronaSolveOptions,
    warm: Option<&CandidateSolution>,
) -> Result<CoronaSolveResult> {
    p.require_float()?;
    if opts.boundary_nodes < 8 {
        return Err(Error::InvalidParameter("boundary_nodes must be >= 8".into()));
    }
    let cert = certify_lb(p)?;
    let len = ansatz.len();
    let samples = border_in_form(p, opts.boundary_nodes, 0.0, opts.form)?;

    let mut bezout_rows = Vec::with_capacity(samples.len());
    let mut objective = DMatrix::zeros(2 * samples.len(), 2 * len);
    for (i, pt) in samples.iter().enumerate() {
        let data = eval_data(pt, p)?;
        let basis = ansatz.basis(pt.z1, pt.z2);
        let mut row = Vec::with_capacity(2 * len);
        row.extend(basis.iter().map(|b| data.f1 * b));
        row.extend(basis.iter().map(|b| data.f2 * b));
        bezout_rows.push(row);
        for (j, b) in basis.iter().enumerate() {
            objective[(2 * i, j)] = *b;
            objective[(2 * i + 1, len + j)] = *b;
        }
    }

    // rank decisions are made on column-scaled rows
    let scales = column_scales(&objective, &DMatrix::zeros(0, 2 * len));
    let scaled: Vec<Vec<Complex64>> = bezout_rows
        .iter()
        .map(|r| r.iter().zip(&scales).map(|(v, s)| v * *s).collect())
        .collect();
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(opts.seed));
    let limit = opts.collocation.unwrap_or(usize::MAX);
    let chosen = independent_rows(&scaled, &order, limit, GREEDY_TOL);
    if let Some(want) = opts.collocation {
        if chosen.len() < want {
            return Err(Error::RankDeficient {
                what: "Bezout collocation rows",
                rank: chosen.len(),
                needed: want,
            });
        }
    }
    // unit rows (in scaled coordinates) keep the rank test in step with the greedy pick
    let row_norms: Vec<f64> = chosen
        .iter()
        .map(|&i| scaled[i].iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let constraints = DMatrix::from_fn(chosen.len(), 2 * len, |r, c| bezout_rows[chosen[r]][c] / row_norms[r]);
    let prob = MinimaxProblem {
        objective,
        objective_target: DVector::zeros(2 * samples.len()),
        constraints,
        constraint_target: DVector::from_iterator(chosen.len(), row_norms.iter().map(|n| Complex64::new(1.0 / n, 0.0))),
        regularization: 0.0,
    };
    let warm_x = warm.and_then(|w| if w.form == opts.form { pad_coeffs(w, ansatz) } else { None });
    let res = lawson_warm(&prob, opts.lawson, warm_x.as_deref())?;

    let mut solution = CandidateSolution::zero(opts.form, ansatz);
    solution.coeffs_g1 = res.coefficients[..len].to_vec();
    solution.coeffs_g2 = res.coefficients[len..].to_vec();
    let dense_nodes = 8 * opts.boundary_nodes;
    let check = border_in_form(p, dense_nodes, 0.5, opts.form)?;
    let (n1, n2) = measured_norms(&solution, p, &check)?;
    let residual = residual_sup_estimate(&solution, p, &check)?;
    solution.measured_norm_g1 = n1;
    solution.measured_norm_g2 = n2;
    solution.residual_sup = residual;
    solution.sample_spec = format!(
        "lifted border of D2, {dense_nodes} nodes per curve and sheet, half-node shift, {} points",
        check.len()
    );
    Ok(CoronaSolveResult {
        solution,
        collocation_count: chosen.len(),
        objective: res.objective,
        lower_bound: res.lower_bound,
        iterations: res.iterations,
        converged: res.converged,
        constraint_residual: res.constraint_residual,
        feasible: residual <= FEASIBLE_TOL,
        lb_sharp: cert.lb_sharp,
        certified_floor: residual_adjusted_lb(&cert, residual),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpResult {
    pub eps: f64,
    pub n: u32,
    #[serde(rename = "K")]
    pub k_max: u32,
    pub lb: f64,
    /// Sup of `|G|` on both circles at the dense check nodes.
    pub achieved_norm: f64,
    /// Objective on the optimisation nodes.
    pub objective: f64,
    /// Annulus trace at `w = (2ε)^n`; an exact interpolant gives `1/4`.
    pub trace_check: Complex64,
    pub constraint_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub boundary_samples: usize,
    pub check_samples: usize,
    /// Laurent coefficients `a_{-K} … a_K`.
    pub coefficients: Vec<Complex64>,
}

fn circle_points(r: &AnnulusRegime, per_circle: usize, phase: f64) -> Vec<Complex64> {
    let mut pts = Vec::with_capacity(2 * per_circle);
    for radius in [r.eps, 1.0] {
        for i in 0..per_circle {
            pts.push(Complex64::from_polar(radius, 2.0 * PI * (i as f64 + phase) / per_circle as f64));
        }
    }
    pts
}

fn laurent_row(z: Complex64, k_max: u32) -> Vec<Complex64> {
    let k = k_max as i32;
    (-k..=k).map(|e| z.powi(e)).collect()
}

/// Smallest-norm Laurent interpolant `G = Σ_{|k|≤K} a_k z^k` with `G(z) = z̄`
/// on `E_n`, sup taken over both border circles of `D1′`.
pub fn solve_interp(r: &AnnulusRegime, k_max: u32, per_circle: usize, warm: Option<&[Complex64]>) -> Result<InterpResult> {
    if 2 * k_max < r.n {
        return Err(Error::InvalidParameter(format!(
            "ansatz 2K+1 = {} leaves no freedom beyond {} nodes",
            2 * k_max + 1,
            r.n
        )));
    }
    if per_circle < 8 {
        return Err(Error::InvalidParameter("need at least 8 samples per circle".into()));
    }
    let cols = 2 * k_max as usize + 1;
    let nodes = roots_e(r.n);
    let pts = circle_points(r, per_circle, 0.0);
    let objective = DMatrix::from_fn(pts.len(), cols, |i, j| laurent_row(pts[i], k_max)[j]);
    let constraints = DMatrix::from_fn(nodes.len(), cols, |i, j| laurent_row(nodes[i], k_max)[j]);
    let prob = MinimaxProblem {
        objective,
        objective_target: DVector::zeros(pts.len()),
        constraints,
        constraint_target: DVector::from_iterator(nodes.len(), nodes.iter().map(|z| z.conj())),
        regularization: 0.0,
    };
    let padded = warm.map(|w| {
        let pad = (cols - w.len().min(cols)) / 2;
        let mut x = vec![Complex64::new(0.0, 0.0); cols];
        for (i, v) in w.iter().enumerate().take(cols) {
            x[pad + i] = *v;
        }
        x
    });
    let res = lawson_warm(&prob, LawsonOptions::default(), padded.as_deref())?;
    let coeffs = res.coefficients.clone();
    let check = circle_points(r, 8 * per_circle, 0.5);
    let achieved = check
        .iter()
        .chain(pts.iter())
        .map(|z| laurent_eval(&coeffs, *z).norm())
        .fold(0.0f64, f64::max);
    let w = Complex64::new((2.0 * r.eps).powi(r.n as i32), 0.0);
    let trace_check = annulus_trace(|z| laurent_eval(&coeffs, z), w, r)?;
    Ok(InterpResult {
        eps: r.eps,
        n: r.n,
        k_max,
        lb: interp_lb(r),
        achieved_norm: achieved,
        objective: res.objective,
        trace_check,
        constraint_residual: res.constraint_residual,
        iterations: res.iterations,
        converged: res.converged,
        boundary_samples: pts.len(),
        check_samples: check.len() + pts.len(),
        coefficients: coeffs,
    })
}

/// [`solve_interp`] over increasing `K`, each run seeded with the previous one.
pub fn solve_interp_sequence(r: &AnnulusRegime, ks: &[u32], per_circle: usize) -> Result<Vec<InterpResult>> {
    let mut out: Vec<InterpResult> = Vec::new();
    for &k in ks {
        let warm = out.last().map(|prev| prev.coefficients.clone());
        out.push(solve_interp(r, k, per_circle, warm.as_deref())?);
    }
    Ok(out)
}
