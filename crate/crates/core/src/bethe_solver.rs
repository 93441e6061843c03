//! Numerical solution of the nested Bethe equations: damped Newton
//! refinement on the denominator-cleared system in exponentiated variables,
//! homotopy continuation in the anisotropy from the free-fermion point
//! (where the equations decouple into scalar polynomial conditions), and
//! sector-complete enumeration with a multistart fallback.

use crate::numerics::{self, CMatrix, CPoly, C};
use crate::operator_oracle::multinomial;
use crate::xxz_bethe::{self, BetheRoots, ChainSpec, ExpBethe, EXCLUDED_LOCUS_TOL};
use itertools::Itertools;
use num_complex::ComplexFloat;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("Newton did not converge within {iters} iterations (residual {residual:.3e})")]
    NoConvergence { iters: usize, residual: f64 },
    #[error("Newton iterate entered the excluded locus (distance {0:.3e})")]
    ExcludedLocus(f64),
    #[error("Jacobian is singular at the current iterate")]
    SingularJacobian,
    #[error("occupations are not admissible: negative weight M_{0}")]
    BadOccupations(usize),
    #[error(transparent)]
    Chain(#[from] xxz_bethe::ChainError),
    #[error(transparent)]
    Numerics(#[from] numerics::NumericsError),
}

pub type Result<T> = std::result::Result<T, SolverError>;

/// Tuning knobs; defaults are adequate for all shipped configurations.
#[derive(Debug, Clone, Serialize, serde::Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Convergence threshold on the normalized cleared residual.
    pub newton_tol: f64,
    pub max_newton_iters: usize,
    /// Backtracking factor for damped steps.
    pub damping: f64,
    pub max_halvings: usize,
    pub homotopy_steps: usize,
    /// Two solutions closer than this (per-level unordered matching of
    /// exponentiated roots) are considered identical.
    pub dedup_radius: f64,
    /// Seed for the reproducible multistart fallback.
    pub seed: u64,
    /// Random starts used to top up a sector shortfall.
    pub multistart_tries: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            newton_tol: 1e-12,
            max_newton_iters: 60,
            damping: 0.5,
            max_halvings: 20,
            homotopy_steps: 40,
            dedup_radius: 1e-7,
            seed: 1,
            multistart_tries: 2000,
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub enum PathStatus {
    /// Continued from the free-fermion point all the way to the target.
    Continued,
    /// Found by the random multistart fallback.
    Multistart,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolutionDiagnostics {
    pub residual_norm: f64,
    pub locus_distance: f64,
    pub path_status: PathStatus,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolutionSet {
    pub spec: ChainSpec,
    pub occupations: Vec<usize>,
    pub solutions: Vec<BetheRoots>,
    pub diagnostics: Vec<SolutionDiagnostics>,
    /// Sector dimension multinomial(N; M_1, ..., M_n).
    pub expected: usize,
    pub found: usize,
    /// Continuation branches that failed mid-path, with the last good
    /// continuation parameter.
    pub lost_branches: Vec<f64>,
    pub config: SolverConfig,
}

/// Flattened exponentiated unknowns, level by level.
fn flatten(levels: &[Vec<C>]) -> Vec<C> {
    levels.iter().flatten().copied().collect()
}

fn unflatten(x: &[C], occupations: &[usize]) -> Vec<Vec<C>> {
    let mut out = Vec::with_capacity(occupations.len());
    let mut pos = 0;
    for &n in occupations {
        out.push(x[pos..pos + n].to_vec());
        pos += n;
    }
    out
}

/// LHS/RHS products of the cleared level-b equation at root beta, plus the
/// per-factor lists needed for analytic derivatives.
struct ClearedParts {
    lhs: C,
    rhs: C,
}

fn cleared_parts(exp: &ExpBethe, levels: &[Vec<C>], b: usize, beta: usize) -> ClearedParts {
    let t = levels[b - 1][beta];
    let upper: &[C] = if b == 1 { &exp.w } else { &levels[b - 2] };
    let lower: &[C] = if b < levels.len() { &levels[b] } else { &[] };
    let mut lhs = exp.twist[b - 1] * exp.e_h.powi(-(upper.len() as i32));
    let mut rhs = exp.twist[b] * exp.e_h.powi(-(lower.len() as i32));
    for &u in upper {
        lhs *= t * exp.h - u;
        rhs *= t - u;
    }
    for (g, &tg) in levels[b - 1].iter().enumerate() {
        if g != beta {
            lhs *= t - exp.h * tg;
            rhs *= t * exp.h - tg;
        }
    }
    for &s in lower {
        lhs *= t - s;
        rhs *= t - exp.h * s;
    }
    ClearedParts { lhs, rhs }
}

/// Unnormalized residual vector G (Newton works on this) for a root set.
fn residual_raw(exp: &ExpBethe, levels: &[Vec<C>]) -> Vec<C> {
    let mut out = Vec::new();
    for b in 1..exp.n {
        for beta in 0..levels[b - 1].len() {
            let p = cleared_parts(exp, levels, b, beta);
            out.push(p.lhs - p.rhs);
        }
    }
    out
}

/// Scale-invariant residual max-norm, the convergence measure:
/// |lhs - rhs| / (|lhs| + |rhs|) per equation. Unlike a normalization with
/// an additive constant, this stays O(1) on the spurious "all roots to
/// zero" sink of the cleared polynomial system, where both sides vanish
/// without becoming equal.
fn residual_norm(exp: &ExpBethe, levels: &[Vec<C>]) -> f64 {
    let mut worst: f64 = 0.0;
    for b in 1..exp.n {
        for beta in 0..levels[b - 1].len() {
            let p = cleared_parts(exp, levels, b, beta);
            let denom = (p.lhs.norm() + p.rhs.norm()).max(1e-300);
            worst = worst.max((p.lhs - p.rhs).norm() / denom);
        }
    }
    worst
}

/// Analytic Jacobian of the unnormalized residuals with respect to the
/// flattened exponentiated roots. Each factor appears once, so logarithmic
/// derivatives (lhs * h / (t h - u), etc.) are exact off the excluded locus.
fn jacobian(exp: &ExpBethe, levels: &[Vec<C>]) -> CMatrix {
    let occ: Vec<usize> = levels.iter().map(|l| l.len()).collect();
    let offset: Vec<usize> = occ
        .iter()
        .scan(0, |acc, &n| {
            let o = *acc;
            *acc += n;
            Some(o)
        })
        .collect();
    let dim: usize = occ.iter().sum();
    let mut jac = CMatrix::zeros(dim, dim);
    let mut row = 0;
    for b in 1..exp.n {
        for beta in 0..occ[b - 1] {
            let p = cleared_parts(exp, levels, b, beta);
            let t = levels[b - 1][beta];
            let upper: &[C] = if b == 1 { &exp.w } else { &levels[b - 2] };
            let lower: &[C] = if b < levels.len() { &levels[b] } else { &[] };
            // d/dt (own root)
            let mut dl = C::new(0.0, 0.0);
            let mut dr = C::new(0.0, 0.0);
            for &u in upper {
                dl += exp.h / (t * exp.h - u);
                dr += 1.0 / (t - u);
            }
            for (g, &tg) in levels[b - 1].iter().enumerate() {
                if g != beta {
                    dl += 1.0 / (t - exp.h * tg);
                    dr += exp.h / (t * exp.h - tg);
                }
            }
            for &s in lower {
                dl += 1.0 / (t - s);
                dr += 1.0 / (t - exp.h * s);
            }
            jac[(row, offset[b - 1] + beta)] = p.lhs * dl - p.rhs * dr;
            // d/du (level b-1 roots; none when b = 1, those are fixed w)
            if b >= 2 {
                for (g, &u) in upper.iter().enumerate() {
                    jac[(row, offset[b - 2] + g)] =
                        p.lhs * (-1.0 / (t * exp.h - u)) - p.rhs * (-1.0 / (t - u));
                }
            }
            // d/dt_g (same level, g != beta)
            for (g, &tg) in levels[b - 1].iter().enumerate() {
                if g != beta {
                    jac[(row, offset[b - 1] + g)] =
                        p.lhs * (-exp.h / (t - exp.h * tg)) - p.rhs * (-1.0 / (t * exp.h - tg));
                }
            }
            // d/ds (level b+1 roots)
            for (g, &s) in lower.iter().enumerate() {
                jac[(row, offset[b] + g)] =
                    p.lhs * (-1.0 / (t - s)) - p.rhs * (-exp.h / (t - exp.h * s));
            }
            row += 1;
        }
    }
    jac
}

/// Damped Newton iteration on the exponentiated root set. Returns the
/// refined set and the number of iterations used.
fn newton_exp(
    exp: &ExpBethe,
    start: &[Vec<C>],
    cfg: &SolverConfig,
) -> Result<(Vec<Vec<C>>, usize)> {
    let occ: Vec<usize> = start.iter().map(|l| l.len()).collect();
    let mut levels = start.to_vec();
    let mut norm = residual_norm(exp, &levels);
    for iter in 0..cfg.max_newton_iters {
        if norm <= cfg.newton_tol {
            return Ok((levels, iter));
        }
        let dist = exp.locus_distance(&levels);
        if dist < EXCLUDED_LOCUS_TOL {
            return Err(SolverError::ExcludedLocus(dist));
        }
        let g = residual_raw(exp, &levels);
        let jac = jacobian(exp, &levels);
        let step = numerics::solve_linear(&jac, &g.iter().map(|x| -x).collect::<Vec<_>>())
            .map_err(|_| SolverError::SingularJacobian)?;
        let x = flatten(&levels);
        let mut accepted = false;
        let mut lambda = 1.0;
        for _ in 0..=cfg.max_halvings {
            let trial: Vec<C> = x.iter().zip(&step).map(|(a, d)| a + d * lambda).collect();
            let trial_levels = unflatten(&trial, &occ);
            if exp.locus_distance(&trial_levels) >= EXCLUDED_LOCUS_TOL {
                let trial_norm = residual_norm(exp, &trial_levels);
                if trial_norm < norm {
                    levels = trial_levels;
                    norm = trial_norm;
                    accepted = true;
                    break;
                }
            }
            lambda *= cfg.damping;
        }
        if !accepted {
            return Err(SolverError::NoConvergence {
                iters: iter,
                residual: norm,
            });
        }
    }
    if norm <= cfg.newton_tol {
        Ok((levels, cfg.max_newton_iters))
    } else {
        Err(SolverError::NoConvergence {
            iters: cfg.max_newton_iters,
            residual: norm,
        })
    }
}

fn levels_to_roots(occupations: &[usize], levels: Vec<Vec<C>>) -> BetheRoots {
    let mu_levels = levels
        .into_iter()
        .map(|lvl| lvl.into_iter().map(|t| t.ln() / 2.0).collect())
        .collect();
    BetheRoots::new(occupations.to_vec(), mu_levels).expect("consistent occupations")
}

/// Refine a root set in place by damped Newton on the cleared system.
pub fn newton_refine(spec: &ChainSpec, roots: &BetheRoots, cfg: &SolverConfig) -> Result<BetheRoots> {
    if roots.total_roots() == 0 {
        return Ok(roots.clone());
    }
    let exp = ExpBethe::new(spec);
    let start = exp.exp_levels(roots);
    let (levels, _) = newton_exp(&exp, &start, cfg)?;
    Ok(levels_to_roots(&roots.occupations, levels))
}

/// Per-level unordered distance between two exponentiated root sets.
fn solution_distance(a: &[Vec<C>], b: &[Vec<C>]) -> f64 {
    let mut worst: f64 = 0.0;
    for (la, lb) in a.iter().zip(b) {
        worst = worst.max(numerics::multiset_match_distance(la, lb));
    }
    worst
}

/// The anisotropy path from the free-fermion point i*pi/2 to the target,
/// with a fixed imaginary bulge when the straight segment passes too close
/// to a degenerate anisotropy (sinh = 0).
fn hbar_path(target: C, steps: usize) -> Vec<C> {
    let xx = C::new(0.0, PI / 2.0);
    let straight =
        |s: f64| xx + (target - xx) * s;
    let needs_detour = (0..=steps)
        .map(|k| straight(k as f64 / steps as f64))
        .any(|h| h.sinh().norm() < 0.05);
    (0..=steps)
        .map(|k| {
            let s = k as f64 / steps as f64;
            let mut h = straight(s);
            if needs_detour {
                h += C::new(0.0, 0.3) * (PI * s).sin();
            }
            h
        })
        .collect()
}

/// Candidate exponentiated root sets at the free-fermion point, built level
/// by level from the scalar polynomial conditions (level b couples only to
/// the already-chosen level b-1 set; the weaker forward coupling is left
/// for Newton to absorb).
fn xx_candidates(spec_xx: &ChainSpec, occupations: &[usize]) -> Result<Vec<Vec<Vec<C>>>> {
    let exp = ExpBethe::new(spec_xx);
    let n = spec_xx.rank();
    let occ = |a: usize| -> usize {
        if a == 0 {
            spec_xx.sites()
        } else if a <= occupations.len() {
            occupations[a - 1]
        } else {
            0
        }
    };
    for b in 1..=n {
        if occ(b - 1) < occ(b) {
            // negative weight: sector is empty for monotone counting
            return Err(SolverError::BadOccupations(b));
        }
    }
    // i = e^{hbar} at the free-fermion point
    let i_unit = C::new(0.0, 1.0);
    let mut branches: Vec<Vec<Vec<C>>> = vec![Vec::new()];
    for b in 1..n {
        let nb = occ(b);
        let mut next = Vec::new();
        for branch in &branches {
            let upper: Vec<C> = if b == 1 {
                exp.w.clone()
            } else {
                branch[b - 2].clone()
            };
            if nb == 0 {
                let mut grown = branch.clone();
                grown.push(Vec::new());
                next.push(grown);
                continue;
            }
            // i^{N_{b-1}} V_b prod (t + u) = V_{b+1} (-1)^{N_b - 1} i^{-N_{b+1}} prod (t - u)
            let c_l = spec_xx.twist()[b - 1] * i_unit.powi(occ(b - 1) as i32);
            let c_r = spec_xx.twist()[b]
                * C::new(if occ(b) % 2 == 0 { -1.0 } else { 1.0 }, 0.0)
                * i_unit.powi(-(occ(b + 1) as i32));
            let mut p_plus = CPoly::constant(c_l);
            let mut p_minus = CPoly::constant(c_r);
            for &u in &upper {
                p_plus = p_plus.mul(&CPoly::new(vec![u, C::new(1.0, 0.0)]));
                p_minus = p_minus.mul(&CPoly::new(vec![-u, C::new(1.0, 0.0)]));
            }
            let poly = p_plus.sub(&p_minus);
            let roots = match numerics::poly_roots(&poly) {
                Ok(r) => r,
                Err(_) => continue,
            };
            for combo in roots.iter().copied().combinations(nb) {
                // require pairwise distinct roots within the level
                let distinct = combo
                    .iter()
                    .tuple_combinations()
                    .all(|(a, c)| (a - c).norm() > 1e-9 * (1.0 + a.norm()));
                if !distinct {
                    continue;
                }
                let mut grown = branch.clone();
                grown.push(combo);
                next.push(grown);
            }
        }
        branches = next;
    }
    Ok(branches)
}

/// Random Newton starts around the inhomogeneity centroid; new solutions
/// are deduplicated into `found` with the given status.
fn multistart_top_up(
    spec: &ChainSpec,
    occupations: &[usize],
    found: &mut Vec<Found>,
    target: usize,
    status: PathStatus,
    cfg: &SolverConfig,
) {
    let exp = ExpBethe::new(spec);
    let centroid: C = spec.q().iter().sum::<C>() / spec.sites() as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.multistart_tries {
        if found.len() >= target {
            break;
        }
        let start: Vec<Vec<C>> = occupations
            .iter()
            .map(|&nb| {
                (0..nb)
                    .map(|_| {
                        let mu =
                            centroid + C::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
                        (mu * 2.0).exp()
                    })
                    .collect()
            })
            .collect();
        if let Ok((levels, _)) = newton_exp(&exp, &start, cfg) {
            push_dedup(found, levels, status.clone(), cfg.dedup_radius);
        }
    }
}

/// Continue one branch along the anisotropy path, bisecting any failed step
/// up to a fixed depth. Returns the levels at the end of the path or the
/// last good path fraction.
fn continue_branch(
    spec: &ChainSpec,
    path: &[C],
    mut levels: Vec<Vec<C>>,
    cfg: &SolverConfig,
) -> std::result::Result<Vec<Vec<C>>, f64> {
    let steps = path.len() - 1;
    for k in 1..=steps {
        let frac = (k - 1) as f64 / steps as f64;
        levels = step_segment(spec, path[k - 1], path[k], levels, cfg, 5).map_err(|_| frac)?;
    }
    Ok(levels)
}

fn step_segment(
    spec: &ChainSpec,
    from: C,
    to: C,
    levels: Vec<Vec<C>>,
    cfg: &SolverConfig,
    depth: usize,
) -> Result<Vec<Vec<C>>> {
    let spec_to = spec.with_hbar(to)?;
    let exp_to = ExpBethe::new(&spec_to);
    match newton_exp(&exp_to, &levels, cfg) {
        Ok((next, _)) => Ok(next),
        Err(e) if depth == 0 => Err(e),
        Err(_) => {
            let mid = (from + to) / 2.0;
            let half = step_segment(spec, from, mid, levels, cfg, depth - 1)?;
            step_segment(spec, mid, to, half, cfg, depth - 1)
        }
    }
}

fn weights_of(spec: &ChainSpec, occupations: &[usize]) -> Result<Vec<usize>> {
    let w = xxz_bethe::weight_vector(spec.rank(), spec.sites(), occupations);
    for (a, &m) in w.iter().enumerate() {
        if m < 0 {
            return Err(SolverError::BadOccupations(a + 1));
        }
    }
    Ok(w.iter().map(|&m| m as usize).collect())
}

struct Found {
    levels: Vec<Vec<C>>,
    status: PathStatus,
}

fn push_dedup(found: &mut Vec<Found>, levels: Vec<Vec<C>>, status: PathStatus, radius: f64) {
    let dup = found
        .iter()
        .any(|f| solution_distance(&f.levels, &levels) < radius);
    if !dup {
        found.push(Found { levels, status });
    }
}

fn assemble(
    spec: &ChainSpec,
    occupations: &[usize],
    found: Vec<Found>,
    lost_branches: Vec<f64>,
    expected: usize,
    cfg: &SolverConfig,
) -> SolutionSet {
    let exp = ExpBethe::new(spec);
    let mut solutions = Vec::new();
    let mut diagnostics = Vec::new();
    for f in found {
        diagnostics.push(SolutionDiagnostics {
            residual_norm: residual_norm(&exp, &f.levels),
            locus_distance: exp.locus_distance(&f.levels),
            path_status: f.status,
        });
        solutions.push(levels_to_roots(occupations, f.levels));
    }
    let found_count = solutions.len();
    SolutionSet {
        spec: spec.clone(),
        occupations: occupations.to_vec(),
        solutions,
        diagnostics,
        expected,
        found: found_count,
        lost_branches,
        config: cfg.clone(),
    }
}

/// Solve the sector by continuation in the anisotropy from the
/// free-fermion point.
pub fn homotopy_from_xx(
    spec: &ChainSpec,
    occupations: &[usize],
    cfg: &SolverConfig,
) -> Result<SolutionSet> {
    let weights = weights_of(spec, occupations)?;
    let expected = multinomial(&weights);
    if occupations.iter().all(|&n| n == 0) {
        let found = vec![Found {
            levels: vec![Vec::new(); spec.rank() - 1],
            status: PathStatus::Continued,
        }];
        return Ok(assemble(spec, occupations, found, Vec::new(), expected, cfg));
    }
    let path = hbar_path(spec.hbar(), cfg.homotopy_steps);
    let spec_xx = spec.with_hbar(path[0])?;
    let exp_xx = ExpBethe::new(&spec_xx);
    // exact starts: polished candidates at the free-fermion point, topped
    // up by multistart there when the decoupled guesses land on overlapping
    // basins (possible for rank >= 3 where the forward coupling is dropped)
    let mut starts: Vec<Found> = Vec::new();
    for cand in xx_candidates(&spec_xx, occupations)? {
        if let Ok((levels, _)) = newton_exp(&exp_xx, &cand, cfg) {
            push_dedup(&mut starts, levels, PathStatus::Continued, cfg.dedup_radius);
        }
    }
    if starts.len() < expected {
        multistart_top_up(
            &spec_xx,
            occupations,
            &mut starts,
            expected,
            PathStatus::Continued,
            cfg,
        );
    }
    let mut found: Vec<Found> = Vec::new();
    let mut lost = Vec::new();
    for start in starts {
        match continue_branch(spec, &path, start.levels, cfg) {
            Ok(levels) => {
                push_dedup(&mut found, levels, PathStatus::Continued, cfg.dedup_radius)
            }
            Err(frac) => lost.push(frac),
        }
    }
    Ok(assemble(spec, occupations, found, lost, expected, cfg))
}

/// Homotopy plus random multistart top-up; shortfall is reported in the
/// found/expected fields rather than raised.
pub fn enumerate_sector(
    spec: &ChainSpec,
    occupations: &[usize],
    cfg: &SolverConfig,
) -> Result<SolutionSet> {
    let set = homotopy_from_xx(spec, occupations, cfg)?;
    if set.found >= set.expected || occupations.iter().all(|&n| n == 0) {
        return Ok(set);
    }
    let exp = ExpBethe::new(spec);
    let mut found: Vec<Found> = set
        .solutions
        .iter()
        .zip(&set.diagnostics)
        .map(|(roots, diag)| Found {
            levels: exp.exp_levels(roots),
            status: diag.path_status.clone(),
        })
        .collect();
    multistart_top_up(
        spec,
        occupations,
        &mut found,
        set.expected,
        PathStatus::Multistart,
        cfg,
    );
    Ok(assemble(
        spec,
        occupations,
        found,
        set.lost_branches,
        set.expected,
        cfg,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator_oracle;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn spec_n2(sites: usize, seed: u64) -> ChainSpec {
        use rand::rngs::StdRng;
        use rand::SeedableRng as _;
        let mut rng = StdRng::seed_from_u64(seed);
        let q = (0..sites)
            .map(|k| {
                c(
                    k as f64 * 0.8 + rng.gen_range(-0.15..0.15),
                    rng.gen_range(-0.3..0.3),
                )
            })
            .collect();
        ChainSpec::new(2, q, vec![c(1.0, 0.3), c(-0.7, 0.9)], c(0.3, 0.1)).unwrap()
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let spec = ChainSpec::new(
            3,
            vec![c(0.1, -0.1), c(0.9, 0.2), c(1.7, 0.05)],
            vec![c(1.0, 0.3), c(-0.7, 0.9), c(0.2, -1.1)],
            c(0.3, 0.1),
        )
        .unwrap();
        let exp = ExpBethe::new(&spec);
        let levels = vec![vec![c(1.3, 0.4), c(0.7, -0.9)], vec![c(2.1, 0.6)]];
        let jac = jacobian(&exp, &levels);
        let x0 = flatten(&levels);
        let occ = [2usize, 1];
        let dim = x0.len();
        for col in 0..dim {
            let scale = 1e-7 * (1.0 + x0[col].norm());
            for dir in [c(scale, 0.0), c(0.0, scale)] {
                let mut xp = x0.clone();
                let mut xm = x0.clone();
                xp[col] += dir;
                xm[col] -= dir;
                let gp = residual_raw(&exp, &unflatten(&xp, &occ));
                let gm = residual_raw(&exp, &unflatten(&xm, &occ));
                for row in 0..dim {
                    let fd = (gp[row] - gm[row]) / (2.0 * dir);
                    let an = jac[(row, col)];
                    assert!(
                        (fd - an).norm() < 1e-5 * (1.0 + an.norm()),
                        "row {row} col {col}: fd {fd} vs analytic {an}"
                    );
                }
            }
        }
    }

    #[test]
    fn refine_fixes_exact_quadratic_root() {
        let spec = spec_n2(2, 61);
        let t = crate::xxz_bethe::tests::one_magnon_quadratic_roots(&spec)[0];
        let roots = BetheRoots::new(vec![1], vec![vec![t.ln() / 2.0]]).unwrap();
        let refined = newton_refine(&spec, &roots, &SolverConfig::default()).unwrap();
        let t_out = (refined.levels[0][0] * 2.0).exp();
        assert!((t_out - t).norm() < 1e-13 * (1.0 + t.norm()));
    }

    #[test]
    fn refine_converges_from_nearby_start() {
        let spec = spec_n2(2, 62);
        let t = crate::xxz_bethe::tests::one_magnon_quadratic_roots(&spec)[1];
        let mu = t.ln() / 2.0 + c(1e-3, -7e-4);
        let exp = ExpBethe::new(&spec);
        let start = vec![vec![(mu * 2.0).exp()]];
        let (levels, iters) = newton_exp(&exp, &start, &SolverConfig::default()).unwrap();
        assert!(iters <= 8, "took {iters} iterations");
        assert!((levels[0][0] - t).norm() < 1e-10 * (1.0 + t.norm()));
    }

    #[test]
    fn refine_vacuum_is_identity() {
        let spec = spec_n2(3, 63);
        let vacuum = BetheRoots::vacuum(2);
        let out = newton_refine(&spec, &vacuum, &SolverConfig::default()).unwrap();
        assert_eq!(out.total_roots(), 0);
    }

    #[test]
    fn homotopy_one_magnon_matches_quadratic() {
        let spec = spec_n2(2, 64);
        let set = homotopy_from_xx(&spec, &[1], &SolverConfig::default()).unwrap();
        assert_eq!(set.found, 2);
        assert_eq!(set.expected, 2);
        let exact = crate::xxz_bethe::tests::one_magnon_quadratic_roots(&spec);
        for t in exact {
            let hit = set.solutions.iter().any(|roots| {
                ((roots.levels[0][0] * 2.0).exp() - t).norm() < 1e-8 * (1.0 + t.norm())
            });
            assert!(hit, "quadratic root {t} not found");
        }
    }

    #[test]
    fn homotopy_vacuum_single_empty_solution() {
        let spec = spec_n2(3, 65);
        let set = homotopy_from_xx(&spec, &[0], &SolverConfig::default()).unwrap();
        assert_eq!(set.found, 1);
        assert_eq!(set.solutions[0].total_roots(), 0);
    }

    #[test]
    fn returned_solutions_satisfy_residual_and_locus_bounds() {
        let spec = spec_n2(3, 66);
        let cfg = SolverConfig::default();
        let set = enumerate_sector(&spec, &[1], &cfg).unwrap();
        assert_eq!(set.found, 3);
        for (roots, diag) in set.solutions.iter().zip(&set.diagnostics) {
            assert!(diag.residual_norm <= cfg.newton_tol);
            assert!(diag.locus_distance >= 1e-8);
            let res = xxz_bethe::bethe_residuals(&spec, roots).unwrap();
            for r in res {
                assert!(r.norm() <= 1e-11);
            }
        }
    }

    /// Injective matching of solver H-values against oracle sector states.
    fn assert_oracle_bijection(spec: &ChainSpec, set: &SolutionSet, weights: &[i64]) {
        let spectrum = operator_oracle::sector_spectra(spec, weights).unwrap();
        assert_eq!(set.found, spectrum.states.len());
        let mut used = vec![false; spectrum.states.len()];
        for roots in &set.solutions {
            let h = xxz_bethe::hamiltonian_eigenvalues(spec, roots).unwrap();
            let mut best: Option<(usize, f64)> = None;
            for (s, state) in spectrum.states.iter().enumerate() {
                let d = state
                    .h_values
                    .iter()
                    .zip(&h)
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0f64, f64::max);
                if best.map_or(true, |(_, bd)| d < bd) {
                    best = Some((s, d));
                }
            }
            let (s, d) = best.unwrap();
            assert!(d < 1e-6, "solver state matches no oracle state (gap {d:.2e})");
            assert!(!used[s], "two solver states hit oracle state {s}");
            used[s] = true;
        }
    }

    #[test]
    fn two_magnon_sector_complete_against_oracle() {
        let spec = spec_n2(4, 47);
        let set = enumerate_sector(&spec, &[2], &SolverConfig::default()).unwrap();
        assert_eq!(set.expected, 6);
        assert_oracle_bijection(&spec, &set, &[2, 2]);
    }

    #[test]
    fn rank3_sector_complete_against_oracle() {
        let spec = ChainSpec::new(
            3,
            vec![c(0.05, -0.12), c(0.85, 0.2), c(1.62, 0.07)],
            vec![c(1.0, 0.3), c(-0.7, 0.9), c(0.2, -1.1)],
            c(0.3, 0.1),
        )
        .unwrap();
        let set = enumerate_sector(&spec, &[2, 1], &SolverConfig::default()).unwrap();
        assert_eq!(set.expected, 6);
        assert_oracle_bijection(&spec, &set, &[1, 1, 1]);
    }

    #[test]
    fn enumeration_is_deterministic() {
        let spec = spec_n2(3, 68);
        let cfg = SolverConfig::default();
        let a = enumerate_sector(&spec, &[1], &cfg).unwrap();
        let b = enumerate_sector(&spec, &[1], &cfg).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn negative_weight_occupations_rejected() {
        let spec = spec_n2(2, 69);
        // N_1 = 3 > N = 2 gives M_1 < 0
        let err = homotopy_from_xx(&spec, &[3], &SolverConfig::default());
        assert!(matches!(err, Err(SolverError::BadOccupations(_))));
    }
}
