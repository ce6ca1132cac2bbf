use carnot_core::{Error, Result};
use minilp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::problem::ModulusProblem;

#[derive(Clone, Debug, Serialize)]
pub struct SolverOptions {
    pub tolerance: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tolerance: 1e-8, max_iter: 100_000 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ModulusSolution {
    pub value: f64,
    pub density: Vec<f64>,
    /// One multiplier per measure.
    pub duals: Vec<f64>,
    /// Set when some measure has no mass, so no density is admissible.
    pub infinite: bool,
    pub kkt_residual: f64,
    /// `(primal - dual) / primal`.
    pub duality_gap: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl ModulusSolution {
    fn trivial(n: usize, j: usize, value: f64) -> Self {
        Self {
            value,
            density: vec![0.0; n],
            duals: vec![0.0; j],
            infinite: value.is_infinite(),
            kkt_residual: 0.0,
            duality_gap: 0.0,
            iterations: 0,
            converged: true,
        }
    }
}

pub fn solve_modulus(problem: &ModulusProblem) -> Result<ModulusSolution> {
    solve_modulus_with(problem, &SolverOptions::default())
}

pub fn solve_modulus_with(problem: &ModulusProblem, opts: &SolverOptions) -> Result<ModulusSolution> {
    if !(opts.tolerance > 0.0) || opts.max_iter == 0 {
        return Err(Error::invalid("tolerance and iteration cap must be positive"));
    }
    if problem.p < 1.0 {
        return Err(Error::Unsupported(format!(
            "p = {} < 1 is not a convex program; use the witness route (lp_norm_estimate and surface_divergence_check)",
            problem.p
        )));
    }
    let (n, j) = (problem.n_cells(), problem.rows.len());
    if problem.has_empty_measure() {
        return Ok(ModulusSolution::trivial(n, j, f64::INFINITY));
    }
    if j == 0 {
        return Ok(ModulusSolution::trivial(n, j, 0.0));
    }
    if problem.p == 1.0 {
        solve_lp(problem, opts)
    } else {
        NewtonDual::new(problem).solve(opts)
    }
}

/// Max of the primal infeasibility and the complementarity defect
/// `lambda_j |(A f)_j - 1|` relative to `sum lambda`.
fn kkt_residual(lam: &[f64], af: &[f64]) -> f64 {
    let infeas = af.iter().map(|v| (1.0 - v).max(0.0)).fold(0.0, f64::max);
    let total: f64 = lam.iter().sum();
    if total <= 0.0 {
        return infeas;
    }
    let comp = lam.iter().zip(af).map(|(l, v)| l * (v - 1.0).abs()).fold(0.0, f64::max) / total;
    infeas.max(comp)
}

/// Projected Newton ascent on the dual of the strictly convex program. For
/// multipliers `lambda` the minimising density is
/// `f_i = (z_i / (p m_i))^(1/(p-1))` with `z = A^T lambda`.
struct NewtonDual<'a> {
    pr: &'a ModulusProblem,
    /// Per cell, the measures charging it.
    cols: Vec<Vec<(usize, f64)>>,
    q: f64,
}

struct State {
    lam: Vec<f64>,
    z: Vec<f64>,
    f: Vec<f64>,
    af: Vec<f64>,
    dual: f64,
}

impl<'a> NewtonDual<'a> {
    fn new(pr: &'a ModulusProblem) -> Self {
        let mut cols = vec![Vec::new(); pr.n_cells()];
        for (j, r) in pr.rows.iter().enumerate() {
            for (&i, &v) in r.idx.iter().zip(&r.val) {
                cols[i].push((j, v));
            }
        }
        Self { pr, cols, q: 1.0 / (pr.p - 1.0) }
    }

    fn state(&self, lam: Vec<f64>) -> State {
        let p = self.pr.p;
        let z: Vec<f64> = self.cols.iter().map(|c| c.iter().map(|&(j, v)| lam[j] * v).sum()).collect();
        let f: Vec<f64> =
            z.iter().zip(&self.pr.masses).map(|(z, m)| if *z > 0.0 { (z / (p * m)).powf(self.q) } else { 0.0 }).collect();
        let af = self.pr.integrals(&f);
        let dual = lam.iter().sum::<f64>() - (p - 1.0) * self.pr.energy(&f);
        State { lam, z, f, af, dual }
    }

    fn newton_direction(&self, s: &State, grad: &[f64], free: &[usize]) -> Option<Vec<f64>> {
        let nf = free.len();
        let mut pos = vec![usize::MAX; s.lam.len()];
        for (k, &j) in free.iter().enumerate() {
            pos[j] = k;
        }
        let mut h = DMatrix::<f64>::zeros(nf, nf);
        for (i, col) in self.cols.iter().enumerate() {
            if s.z[i] <= 0.0 || s.f[i] <= 0.0 {
                continue;
            }
            let d = self.q * s.f[i] / s.z[i];
            for &(a, va) in col {
                let pa = pos[a];
                if pa == usize::MAX {
                    continue;
                }
                for &(b, vb) in col {
                    let pb = pos[b];
                    if pb != usize::MAX && pb >= pa {
                        h[(pa, pb)] += d * va * vb;
                    }
                }
            }
        }
        for a in 0..nf {
            for b in 0..a {
                h[(a, b)] = h[(b, a)];
            }
        }
        let scale = (0..nf).map(|k| h[(k, k)]).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let rhs = DVector::from_iterator(nf, free.iter().map(|&j| grad[j]));
        let mut mu = 1e-14 * scale;
        for _ in 0..8 {
            let mut hm = h.clone();
            for k in 0..nf {
                hm[(k, k)] += mu;
            }
            if let Some(ch) = hm.cholesky() {
                let d = ch.solve(&rhs);
                if d.iter().all(|v| v.is_finite()) {
                    let mut out = vec![0.0; s.lam.len()];
                    for (k, &j) in free.iter().enumerate() {
                        out[j] = d[k];
                    }
                    return Some(out);
                }
            }
            mu *= 100.0;
        }
        None
    }

    /// Backtracking along the projected path `max(0, lambda + t d)`.
    fn line_search(&self, s: &State, grad: &[f64], dir: &[f64], res: f64) -> Option<State> {
        let mut t = 1.0;
        for _ in 0..60 {
            let lam: Vec<f64> = s.lam.iter().zip(dir).map(|(l, d)| (l + t * d).max(0.0)).collect();
            let gain: f64 = lam.iter().zip(&s.lam).zip(grad).map(|((a, b), g)| (a - b) * g).sum();
            let next = self.state(lam);
            let ok = next.dual.is_finite()
                && (next.dual >= s.dual + 1e-4 * gain
                    || (next.dual >= s.dual - 1e-13 * s.dual.abs() && kkt_residual(&next.lam, &next.af) < res));
            if ok && next.lam.iter().any(|l| *l > 0.0) {
                return Some(next);
            }
            t *= 0.5;
        }
        None
    }

    fn solve(&self, opts: &SolverOptions) -> Result<ModulusSolution> {
        let jn = self.pr.rows.len();
        let mut s = self.state(vec![1.0; jn]);
        let mut iterations = 0;
        let mut res = kkt_residual(&s.lam, &s.af);
        // Iterate well past the tolerance; the final rescaling spends part of it.
        while res > 1e-2 * opts.tolerance && iterations < opts.max_iter {
            iterations += 1;
            let grad: Vec<f64> = s.af.iter().map(|v| 1.0 - v).collect();
            let free: Vec<usize> = (0..jn).filter(|&j| s.lam[j] > 0.0 || grad[j] > 0.0).collect();
            let newton = self.newton_direction(&s, &grad, &free).and_then(|d| self.line_search(&s, &grad, &d, res));
            let next = match newton {
                Some(n) => n,
                None => {
                    // Scaled projected gradient as a fallback.
                    let lsum: f64 = s.lam.iter().sum::<f64>().max(f64::MIN_POSITIVE);
                    let dir: Vec<f64> = grad.iter().map(|g| g * lsum).collect();
                    match self.line_search(&s, &grad, &dir, res) {
                        Some(n) => n,
                        None => break,
                    }
                }
            };
            s = next;
            res = kkt_residual(&s.lam, &s.af);
        }
        let min_af = s.af.iter().copied().fold(f64::INFINITY, f64::min);
        if !(min_af > 0.0 && min_af.is_finite()) {
            return Err(Error::numerical("dual ascent produced a density that misses a measure"));
        }
        let scale = 1.0 / min_af.min(1.0);
        let density: Vec<f64> = s.f.iter().map(|v| v * scale).collect();
        let af: Vec<f64> = s.af.iter().map(|v| v * scale).collect();
        let value = self.pr.energy(&density);
        let kkt = kkt_residual(&s.lam, &af);
        Ok(ModulusSolution {
            value,
            density,
            duality_gap: ((value - s.dual) / value).max(0.0),
            duals: s.lam,
            infinite: false,
            kkt_residual: kkt,
            iterations,
            converged: kkt <= opts.tolerance,
        })
    }
}

fn lp_error(e: minilp::Error) -> Error {
    Error::numerical(format!("linear program: {e}"))
}

/// `p = 1`: the primal LP gives the density, the dual LP
/// `max sum lambda` subject to `A^T lambda <= m` gives the multipliers.
fn solve_lp(pr: &ModulusProblem, opts: &SolverOptions) -> Result<ModulusSolution> {
    let mut primal = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<_> = pr.masses.iter().map(|&m| primal.add_var(m, (0.0, f64::INFINITY))).collect();
    for r in &pr.rows {
        primal.add_constraint(r.idx.iter().zip(&r.val).map(|(&i, &v)| (vars[i], v)), ComparisonOp::Ge, 1.0);
    }
    let sol = primal.solve().map_err(lp_error)?;
    let density: Vec<f64> = vars.iter().map(|v| sol[*v].max(0.0)).collect();

    let mut dual = Problem::new(OptimizationDirection::Maximize);
    let lvars: Vec<_> = pr.rows.iter().map(|_| dual.add_var(1.0, (0.0, f64::INFINITY))).collect();
    let mut cols = vec![Vec::new(); pr.n_cells()];
    for (j, r) in pr.rows.iter().enumerate() {
        for (&i, &v) in r.idx.iter().zip(&r.val) {
            cols[i].push((lvars[j], v));
        }
    }
    for (i, c) in cols.into_iter().enumerate() {
        if !c.is_empty() {
            dual.add_constraint(c, ComparisonOp::Le, pr.masses[i]);
        }
    }
    let dsol = dual.solve().map_err(lp_error)?;
    let duals: Vec<f64> = lvars.iter().map(|v| dsol[*v].max(0.0)).collect();

    let value = pr.energy(&density);
    let af = pr.integrals(&density);
    let dual_value: f64 = duals.iter().sum();
    let gap = ((value - dual_value) / value).abs();
    let kkt = kkt_residual(&duals, &af).max(gap);
    Ok(ModulusSolution {
        value,
        density,
        duals,
        infinite: false,
        kkt_residual: kkt,
        duality_gap: gap,
        iterations: 1,
        converged: kkt <= opts.tolerance,
    })
}
