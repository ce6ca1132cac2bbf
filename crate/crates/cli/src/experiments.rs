//! One function per subcommand. Each fills the defaults into its
//! configuration, so the echoed configuration is complete, then runs.

use std::fs;
use std::path::{Path, PathBuf};

use carnot_core::{selftest, Error, HTypeAlgebra, HomogeneousNorm, Result};
use crofton::{
    corollary_experiment, euclidean_crofton, htype_crofton_horizontal, htype_crofton_vertical, CorollaryOptions,
    CorollaryReport, CroftonOptions, Integrand, Separable, Space,
};
use grassmann::{reference_subalgebra, sample_isometries};
use modulus::{
    fuglede_refinement_study, lp_norm_estimate, solve_modulus_with, surface_divergence_check, Annulus, LpGrid,
    ModulusProblem, PointFamily, RingThresholds, SolverOptions, StudyOptions, Thresholds, WitnessFunction,
    WitnessKind,
};
use serde::Serialize;
use serde_json::{json, Value};
use splits_graphs::{
    ahlfors_on_graph, ahlfors_profile, c0_estimate, GraphFixture, GraphGrid, GraphMap, HomogeneousSplit,
    IntrinsicGraph,
};

use crate::args::*;

const CLOSURE_TOL: f64 = 1e-10;
const COMPATIBILITY_TOL: f64 = 1e-12;

fn algebra(kind: AlgebraArg, n: usize) -> Result<HTypeAlgebra> {
    match kind {
        AlgebraArg::Real => HTypeAlgebra::real_heisenberg(n),
        AlgebraArg::Complex => HTypeAlgebra::complex_heisenberg(n),
        AlgebraArg::Quaternion => HTypeAlgebra::quaternion_heisenberg(n),
    }
}

fn space(kind: SpaceArg, n: usize) -> Result<Space> {
    let alg = match kind {
        SpaceArg::Euclid => return Ok(Space::Euclid { n }),
        SpaceArg::Real => AlgebraArg::Real,
        SpaceArg::Complex => AlgebraArg::Complex,
        SpaceArg::Quaternion => AlgebraArg::Quaternion,
    };
    Ok(Space::Algebra(algebra(alg, n)?))
}

fn norm(kind: NormArg) -> HomogeneousNorm {
    match kind {
        NormArg::Max => HomogeneousNorm::default(),
        NormArg::Cygan => HomogeneousNorm::Cygan,
    }
}

fn seed(value: Option<u64>) -> Result<u64> {
    value.ok_or_else(|| Error::invalid("--seed is required for stochastic experiments"))
}

fn path(value: &Option<PathBuf>, flag: &str) -> Result<PathBuf> {
    value.clone().ok_or_else(|| Error::invalid(format!("{flag} is required")))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::invalid(format!("{}: {e}", path.display())))
}

fn to_json(v: &impl Serialize) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::invalid(e.to_string()))
}

/// `k` and `kh` name the same dimension.
fn horizontal_dim(k: Option<usize>, kh: &mut Option<usize>, default: usize) -> Result<usize> {
    match (k, *kh) {
        (Some(a), Some(b)) if a != b => Err(Error::invalid(format!("--k {a} and --kh {b} disagree"))),
        (a, b) => Ok(*kh.insert(a.or(b).unwrap_or(default))),
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::invalid(format!("csv: {e}"))
}

pub fn group_selftest(a: &mut SelftestArgs) -> Result<Value> {
    let alg = algebra(*a.algebra.get_or_insert(AlgebraArg::Real), *a.n.get_or_insert(1))?;
    let samples = *a.samples.get_or_insert(1000);
    if samples == 0 {
        return Err(Error::invalid("--samples must be positive"));
    }
    // The triples are a fixed sample, so the seed has a default.
    let report = selftest::run(&alg, &norm(*a.norm.get_or_insert(NormArg::Max)), samples, *a.seed.get_or_insert(0));
    if !report.passed() {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        return Err(Error::numerical(format!("self-test failed: {}", failed.join(", "))));
    }
    Ok(json!({ "passed": true, "report": report }))
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0).max(1.0);
    (m, (var / n).sqrt())
}

pub fn haar_test(a: &mut HaarArgs) -> Result<Value> {
    let alg = algebra(*a.algebra.get_or_insert(AlgebraArg::Real), *a.n.get_or_insert(1))?;
    let (kh, kv) = (*a.kh.get_or_insert(1), *a.kv.get_or_insert(0));
    let count = *a.count.get_or_insert(1000);
    let reflections = *a.with_reflections.get_or_insert(false);
    let seed = seed(a.seed)?;
    if count < 2 {
        return Err(Error::invalid("--count must be at least 2"));
    }
    let reference = reference_subalgebra(&alg, kh, kv)?;
    let isometries = sample_isometries(&alg, count, seed, reflections)?;
    let subs: Vec<_> = isometries.iter().map(|g| reference.act(g)).collect();
    let closure: Vec<f64> = subs.iter().map(|s| s.closure_defect(&alg)).collect();
    let compat: Vec<f64> = isometries.iter().map(|g| g.defect(&alg)).collect();
    let closed = closure.iter().filter(|d| **d <= CLOSURE_TOL).count();
    let compatible = compat.iter().filter(|d| **d <= COMPATIBILITY_TOL).count();
    // The first column of U is uniform on the unit sphere of the first layer.
    let u11: Vec<f64> = isometries.iter().map(|g| g.u[(0, 0)].powi(2)).collect();
    let (mean, se) = mean_se(&u11);
    let expected = 1.0 / alg.m1() as f64;
    if let Some(out) = &a.samples_csv {
        let mut w = csv::Writer::from_path(out).map_err(csv_error)?;
        let mut header = vec!["index".to_string()];
        header.extend((0..kh).flat_map(|i| (0..alg.m1()).map(move |j| format!("h{i}_{j}"))));
        header.extend((0..kv).flat_map(|i| (0..alg.m2()).map(move |j| format!("t{i}_{j}"))));
        w.write_record(&header).map_err(csv_error)?;
        for (i, s) in subs.iter().enumerate() {
            let mut row = vec![i.to_string()];
            row.extend(s.h_basis.iter().chain(&s.t_basis).flatten().map(|v| format!("{v:e}")));
            w.write_record(&row).map_err(csv_error)?;
        }
        w.flush()?;
    }
    if closed < count || compatible < count {
        return Err(Error::numerical(format!(
            "{} of {count} samples fail closure, {} fail compatibility",
            count - closed,
            count - compatible
        )));
    }
    Ok(json!({
        "shape": [kh, kv],
        "m1": alg.m1(),
        "m2": alg.m2(),
        "count": count,
        "closure": { "tolerance": CLOSURE_TOL, "passed": closed, "max_defect": closure.iter().copied().fold(0.0, f64::max) },
        "compatibility": { "tolerance": COMPATIBILITY_TOL, "passed": compatible, "max_defect": compat.iter().copied().fold(0.0, f64::max) },
        "first_column_moment": { "mean": mean, "se": se, "expected": expected, "within_3se": (mean - expected).abs() <= 3.0 * se },
    }))
}

pub fn ahlfors_check(a: &mut AhlforsArgs) -> Result<Value> {
    let alg = algebra(*a.algebra.get_or_insert(AlgebraArg::Real), *a.n.get_or_insert(1))?;
    let radii = a.radii.get_or_insert_with(|| (1..=5).map(|k| 0.5f64.powi(k)).collect()).clone();
    let lipschitz = *a.lipschitz.get_or_insert(1.0);
    let resolution = *a.resolution.get_or_insert(16);
    let samples = *a.c0_samples.get_or_insert(100_000);
    let norm = norm(*a.norm.get_or_insert(NormArg::Max));
    let seed = seed(a.seed)?;
    let graph = match &a.fixture {
        Some(p) => {
            if a.mh.is_some() || a.mv.is_some() {
                return Err(Error::invalid("--fixture already fixes the split; drop --mh and --mv"));
            }
            Some(GraphFixture::from_json(&read(p)?)?.build(&alg)?)
        }
        None => None,
    };
    let split = match &graph {
        Some(g) => g.split.clone(),
        None => HomogeneousSplit::new(&alg, a.mh.get_or_insert(vec![0]).clone(), a.mv.get_or_insert(vec![0]).clone())?,
    };
    let c0 = c0_estimate(&alg, &split, &norm, samples, seed)?;
    let profile = match &graph {
        Some(g) if matches!(g.map, GraphMap::Table(_)) => {
            ahlfors_on_graph(&alg, g, &norm, &alg.identity(), lipschitz, &radii, c0.value)?
        }
        Some(g) => ahlfors_profile(&alg, &split, &g.map, &norm, lipschitz, &radii, resolution, c0.value)?,
        None => ahlfors_profile(&alg, &split, &GraphMap::Zero, &norm, lipschitz, &radii, resolution, c0.value)?,
    };
    Ok(json!({ "c0": c0, "profile": profile }))
}

fn solver(a: &mut ModulusArgs) -> SolverOptions {
    let d = SolverOptions::default();
    SolverOptions { tolerance: *a.tolerance.get_or_insert(d.tolerance), max_iter: *a.max_iter.get_or_insert(d.max_iter) }
}

fn solve(problem: &ModulusProblem, opts: &SolverOptions) -> Result<Value> {
    let s = solve_modulus_with(problem, opts)?;
    if !s.converged {
        return Err(Error::numerical(format!(
            "solver did not reach KKT residual {:e} in {} iterations (residual {:e})",
            opts.tolerance, s.iterations, s.kkt_residual
        )));
    }
    Ok(json!({
        "value": s.value,
        "infinite": s.infinite,
        "kkt_residual": s.kkt_residual,
        "duality_gap": s.duality_gap,
        "iterations": s.iterations,
        "converged": s.converged,
        "cells": s.density.len(),
        "measures": s.duals.len(),
    }))
}

pub fn modulus_solve(a: &mut ModulusArgs) -> Result<Value> {
    let family = *a.family.get_or_insert(FamilyArg::Annulus);
    let opts = solver(a);
    match family {
        FamilyArg::Annulus => {
            let ann = Annulus {
                inner: *a.inner.get_or_insert(1.0),
                outer: *a.outer.get_or_insert(2.0),
                radial: *a.radial.get_or_insert(200),
                angular: *a.angular.get_or_insert(200),
            };
            let p = *a.p.get_or_insert(2.0);
            let mut out = solve(&ann.problem(p)?, &opts)?;
            if p == 2.0 {
                let exact = ann.exact_p2();
                out["exact"] = json!(exact);
                out["rel_error"] = json!(out["value"].as_f64().unwrap_or(f64::NAN) / exact - 1.0);
            }
            Ok(out)
        }
        FamilyArg::Problem => {
            let mut problem = ModulusProblem::from_json(&read(&path(&a.problem, "--problem")?)?)?;
            problem.p = *a.p.get_or_insert(problem.p);
            solve(&problem, &opts)
        }
        FamilyArg::Lines | FamilyArg::HorizontalPlanes => {
            let p = *a.p.get_or_insert(2.0);
            let d = StudyOptions::default();
            let study = StudyOptions {
                refinements: *a.refinements.get_or_insert(d.refinements),
                floor: *a.floor.get_or_insert(d.floor),
                solver: opts,
                ..d
            };
            let fam = if family == FamilyArg::Lines {
                PointFamily::lines_in_plane(*a.count.get_or_insert(16), *a.divisions.get_or_insert(8))?
            } else {
                let alg = algebra(*a.algebra.get_or_insert(AlgebraArg::Real), *a.n.get_or_insert(2))?;
                let (k, count, div) = (*a.k.get_or_insert(2), *a.count.get_or_insert(48), *a.divisions.get_or_insert(3));
                PointFamily::horizontal_planes(&alg, k, count, seed(a.seed)?, div)?
            };
            to_json(&fuglede_refinement_study(&fam, p, &study)?)
        }
    }
}

pub fn exceptional_witness(a: &mut WitnessArgs) -> Result<Value> {
    let alg = algebra(*a.algebra.get_or_insert(AlgebraArg::Real), *a.n.get_or_insert(1))?;
    let d_m = *a.d_m.get_or_insert(1.0);
    let kind = match *a.witness.get_or_insert(WitnessArg::RadialPow) {
        WitnessArg::RadialPow => WitnessKind::RadialPow { d_m },
        WitnessArg::RadialLog => WitnessKind::RadialLog { d_m, alpha: *a.alpha.get_or_insert(0.75) },
    };
    let p = *a.p.get_or_insert(2.0);
    let grid = LpGrid::radial(*a.cells.get_or_insert(48), *a.depth.get_or_insert(32));
    let rings = *a.rings.get_or_insert(6);
    let step = *a.step.get_or_insert(0.5f64.powi(12));
    let w = WitnessFunction::new(&alg, kind, norm(*a.norm.get_or_insert(NormArg::Max)))?;
    let split = HomogeneousSplit::new(&alg, a.mh.get_or_insert(vec![0]).clone(), a.mv.get_or_insert(vec![]).clone())?;
    let d = split.d_t();
    let surface = IntrinsicGraph::new(split, GraphGrid::new(vec![-1.0; d], vec![1.0; d], vec![step; d])?, GraphMap::Zero)?;
    let lp = lp_norm_estimate(&alg, &w, p, &grid, &Thresholds::default())?;
    let rings = surface_divergence_check(&alg, &w, &surface, rings, &RingThresholds::default())?;
    Ok(json!({ "witness": w, "lp": lp, "rings": rings }))
}

/// Built-in integrand on a layer of dimension `d` with centre `c`.
fn builtin(kind: IntegrandArg, a: &CroftonArgs, c: &[f64]) -> Integrand {
    match kind {
        IntegrandArg::Gauss => Integrand::gauss(c.to_vec(), a.sigma.unwrap_or_default()),
        IntegrandArg::Bump => Integrand::bump(c.to_vec(), a.radius.unwrap_or_default()),
        _ => Integrand::annulus(a.inner.unwrap_or_default(), a.outer.unwrap_or_default()),
    }
}

pub fn crofton_verify(a: &mut CroftonArgs) -> Result<Value> {
    let kind = *a.space.get_or_insert(SpaceArg::Euclid);
    let space = space(kind, *a.n.get_or_insert(2))?;
    let kh = horizontal_dim(a.k, &mut a.kh, 1)?;
    let kv = *a.kv.get_or_insert(0);
    let samples = *a.samples.get_or_insert(100_000);
    let opts = CroftonOptions {
        batches: *a.batches.get_or_insert(20),
        reflections: *a.with_reflections.get_or_insert(false),
        ..Default::default()
    };
    let seed = seed(a.seed)?;
    let (dh, dv) = match &space {
        Space::Euclid { n } => (*n, 0),
        Space::Algebra(alg) => (alg.m1(), if kv > 0 { alg.m2() } else { 0 }),
    };
    let integrand = *a.integrand.get_or_insert(IntegrandArg::Gauss);
    let file = match integrand {
        IntegrandArg::File => Some(read(&path(&a.integrand_file, "--integrand-file")?)?),
        IntegrandArg::Gauss | IntegrandArg::Bump => {
            if integrand == IntegrandArg::Gauss {
                a.sigma.get_or_insert(0.6);
            } else {
                a.radius.get_or_insert(1.0);
            }
            let c = a.center.get_or_insert_with(|| {
                let mut c = vec![0.0; dh + dv];
                c[0] = 0.5;
                c
            });
            if c.len() != dh + dv {
                return Err(Error::DimensionMismatch { expected: dh + dv, got: c.len() });
            }
            None
        }
        IntegrandArg::Annulus => {
            a.inner.get_or_insert(1.0);
            a.outer.get_or_insert(2.0);
            None
        }
    };
    let center = a.center.clone().unwrap_or_default();
    let parse_err = |e: serde_json::Error| Error::invalid(format!("integrand file: {e}"));
    let report = match (&space, kv) {
        (Space::Algebra(alg), kv) if kv > 0 => {
            let f: Separable = match &file {
                Some(text) => serde_json::from_str(text).map_err(parse_err)?,
                None => Separable::product(
                    builtin(integrand, a, center.get(..dh).unwrap_or(&[])),
                    builtin(integrand, a, center.get(dh..).unwrap_or(&[])),
                ),
            };
            htype_crofton_vertical(alg, kh, kv, &f, samples, seed, &opts)?
        }
        _ => {
            let f: Integrand = match &file {
                Some(text) => serde_json::from_str(text).map_err(parse_err)?,
                None => builtin(integrand, a, &center),
            };
            match &space {
                Space::Euclid { n } => euclidean_crofton(*n, kh, &f, samples, seed, &opts)?,
                Space::Algebra(alg) => htype_crofton_horizontal(alg, kh, &f, samples, seed, &opts)?,
            }
        }
    };
    to_json(&report)
}

/// Shortest round-trip form, in exponent notation outside `[1e-4, 1e6)`.
fn num(v: f64) -> String {
    if v == 0.0 || !v.is_finite() || (1e-4..1e6).contains(&v.abs()) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

fn trend_rows(w: &mut csv::Writer<fs::File>, r: &CorollaryReport) -> Result<()> {
    let verdict = |v: &Value| v.as_str().unwrap_or_default().to_string();
    let base = [r.space.clone(), r.k_h.to_string(), r.k_v.to_string(), num(r.p), r.holder.finite.to_string()];
    let consistent = r.consistent.map(|c| c.to_string()).unwrap_or_default();
    match &r.study {
        Some(s) => {
            let v = verdict(&to_json(&s.verdict)?);
            for (l, value) in s.values.iter().enumerate() {
                let ratio = if l == 0 { String::new() } else { num(s.ratios[l - 1]) };
                let row = [l.to_string(), num(*value), ratio, num(s.kkt_residuals[l]), v.clone(), consistent.clone()];
                w.write_record(base.iter().chain(&row)).map_err(csv_error)?;
            }
        }
        None => {
            let row = ["", "", "", "", "", ""].map(String::from);
            w.write_record(base.iter().chain(&row)).map_err(csv_error)?;
        }
    }
    Ok(())
}

pub fn corollary_trend(a: &mut CorollaryArgs) -> Result<Value> {
    let space = space(*a.space.get_or_insert(SpaceArg::Euclid), *a.n.get_or_insert(2))?;
    let kh = horizontal_dim(a.k, &mut a.kh, 1)?;
    let kv = *a.kv.get_or_insert(0);
    let ps = a.p.get_or_insert_with(|| vec![2.0, 3.0]).clone();
    let resolutions = *a.resolutions.get_or_insert(4);
    let d = CorollaryOptions::default();
    let opts = CorollaryOptions {
        planes: *a.planes.get_or_insert(d.planes),
        divisions: *a.divisions.get_or_insert(d.divisions),
        reflections: *a.with_reflections.get_or_insert(false),
        ..d
    };
    let seed = seed(a.seed)?;
    if ps.is_empty() {
        return Err(Error::invalid("--p needs at least one exponent"));
    }
    let reports = ps
        .iter()
        .map(|&p| corollary_experiment(&space, (kh, kv), p, resolutions, seed, &opts))
        .collect::<Result<Vec<_>>>()?;
    if let Some(out) = &a.csv {
        let mut w = csv::Writer::from_path(out).map_err(csv_error)?;
        w.write_record([
            "space", "k_h", "k_v", "p", "holder_finite", "level", "value", "ratio", "kkt_residual", "verdict", "consistent",
        ])
        .map_err(csv_error)?;
        for r in &reports {
            trend_rows(&mut w, r)?;
        }
        w.flush()?;
    }
    Ok(json!({ "reports": reports }))
}
