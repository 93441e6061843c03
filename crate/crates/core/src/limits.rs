//! Limiting regimes of the correspondence: the non-relativistic
//! Calogero-Sutherland / trigonometric Gaudin duality, and the XX
//! free-fermion point hbar = i pi/2 where the Bethe equations decouple.

use crate::bethe_solver::{self, SolverConfig};
use crate::duality::{DualityReport, DualityStatus};
use crate::numerics::{self, CMatrix, C};
use crate::rs_model::{self, RsParams};
use crate::xxz_bethe::{self, BetheRoots, ChainSpec};
use itertools::Itertools;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;
use thiserror::Error;

const LOCUS_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum LimitsError {
    #[error("need rank n >= 2, got {0}")]
    BadRank(usize),
    #[error("need at least one site")]
    NoSites,
    #[error("twist vector must have length n = {n}, got {got}")]
    BadTwistCount { n: usize, got: usize },
    #[error("twist entries v_{0} and v_{1} coincide")]
    DegenerateTwist(usize, usize),
    #[error("hbar must be nonzero")]
    DegenerateHbar,
    #[error("coupling nu must be nonzero")]
    DegenerateCoupling,
    #[error("coordinates q_{i} and q_{j} collide: |sinh(q_i - q_j)| = {magnitude:.3e}")]
    Collision { i: usize, j: usize, magnitude: f64 },
    #[error("excluded locus: {0}")]
    ExcludedLocus(String),
    #[error("hbar = {0} is not the free-fermion point i*pi/2")]
    NotXxPoint(C),
    #[error("Newton iteration on the Gaudin equations did not converge")]
    NoConvergence,
    #[error("mismatched root structure: {0}")]
    BadRoots(String),
    #[error(transparent)]
    Chain(#[from] xxz_bethe::ChainError),
    #[error(transparent)]
    Solver(#[from] bethe_solver::SolverError),
    #[error(transparent)]
    Rs(#[from] rs_model::RsError),
    #[error(transparent)]
    Numerics(#[from] numerics::NumericsError),
}

pub type Result<T> = std::result::Result<T, LimitsError>;

/// Trigonometric Gaudin data: rank n, inhomogeneities q, diagonal twist v,
/// and the Planck-like constant (identified with the Calogero-Sutherland
/// coupling nu under the duality).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaudinSpec {
    n: usize,
    #[serde(with = "crate::numerics::json_complex::vec")]
    q: Vec<C>,
    #[serde(with = "crate::numerics::json_complex::vec")]
    v: Vec<C>,
    #[serde(with = "crate::numerics::json_complex")]
    hbar: C,
}

impl GaudinSpec {
    pub fn new(n: usize, q: Vec<C>, v: Vec<C>, hbar: C) -> Result<Self> {
        if n < 2 {
            return Err(LimitsError::BadRank(n));
        }
        if q.is_empty() {
            return Err(LimitsError::NoSites);
        }
        if v.len() != n {
            return Err(LimitsError::BadTwistCount { n, got: v.len() });
        }
        for (a, &va) in v.iter().enumerate() {
            for (b, &vb) in v.iter().enumerate().skip(a + 1) {
                if (va - vb).norm() < 1e-12 {
                    return Err(LimitsError::DegenerateTwist(a + 1, b + 1));
                }
            }
        }
        if hbar.norm() < 1e-12 {
            return Err(LimitsError::DegenerateHbar);
        }
        for i in 0..q.len() {
            for j in i + 1..q.len() {
                let m = (q[i] - q[j]).sinh().norm();
                if m < LOCUS_TOL {
                    return Err(LimitsError::Collision {
                        i: i + 1,
                        j: j + 1,
                        magnitude: m,
                    });
                }
            }
        }
        Ok(GaudinSpec { n, q, v, hbar })
    }

    pub fn rank(&self) -> usize {
        self.n
    }

    pub fn sites(&self) -> usize {
        self.q.len()
    }

    pub fn q(&self) -> &[C] {
        &self.q
    }

    pub fn v(&self) -> &[C] {
        &self.v
    }

    pub fn hbar(&self) -> C {
        self.hbar
    }
}

/// Calogero-Sutherland coupling.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CMParams {
    #[serde(with = "crate::numerics::json_complex")]
    nu: C,
}

impl CMParams {
    pub fn new(nu: C) -> Result<Self> {
        if nu.norm() < 1e-12 {
            return Err(LimitsError::DegenerateCoupling);
        }
        Ok(CMParams { nu })
    }

    pub fn nu(&self) -> C {
        self.nu
    }
}

fn coth(z: C) -> C {
    z.cosh() / z.sinh()
}

/// Calogero-Sutherland Lax matrix: diagonal qdot_j, off-diagonal
/// nu / sinh(q_i - q_j).
pub fn cm_lax(params: &CMParams, q: &[C], qdot: &[C]) -> Result<CMatrix> {
    let n = q.len();
    assert_eq!(n, qdot.len(), "q and qdot must have equal length");
    for i in 0..n {
        for j in i + 1..n {
            let m = (q[i] - q[j]).sinh().norm();
            if m < LOCUS_TOL {
                return Err(LimitsError::Collision {
                    i: i + 1,
                    j: j + 1,
                    magnitude: m,
                });
            }
        }
    }
    Ok(CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            qdot[j]
        } else {
            params.nu / (q[i] - q[j]).sinh()
        }
    }))
}

/// Velocities generated by the Calogero-Sutherland Hamiltonian:
/// qdot_j = p_j - nu sum_{k != j} coth(q_j - q_k).
pub fn cm_velocities(nu: C, q: &[C], p: &[C]) -> Vec<C> {
    (0..q.len())
        .map(|j| {
            let mut v = p[j];
            for k in 0..q.len() {
                if k != j {
                    v -= nu * coth(q[j] - q[k]);
                }
            }
            v
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SlopeReport {
    pub abscissae: Vec<f64>,
    pub deviations: Vec<f64>,
    /// Least-squares log-log slope of deviation vs abscissa.
    pub slope: f64,
}

fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.max(1e-300).ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

/// Non-relativistic limit: the relativistic Lax matrix built from momenta
/// satisfies L = I + eta L_cm + O(eta^2) with the Calogero-Sutherland
/// velocities; reports ||(L - I)/eta - L_cm|| across the eta ladder and the
/// fitted log-log slope (expected 1).
pub fn nonrel_limit_check(nu: C, q: &[C], p: &[C], etas: &[f64]) -> Result<SlopeReport> {
    let cm = cm_lax(&CMParams::new(nu)?, q, &cm_velocities(nu, q, p))?;
    let mut deviations = Vec::with_capacity(etas.len());
    for &eta in etas {
        let params = RsParams::new(C::new(eta, 0.0), nu)?;
        let lrs = rs_model::lax_from_momenta(&params, q, p)?;
        let diff = CMatrix::from_fn(q.len(), q.len(), |i, j| {
            let id = if i == j { C::new(1.0, 0.0) } else { C::new(0.0, 0.0) };
            (lrs[(i, j)] - id) / eta - cm[(i, j)]
        });
        deviations.push(diff.max_norm());
    }
    let slope = fit_slope(etas, &deviations);
    Ok(SlopeReport {
        abscissae: etas.to_vec(),
        deviations,
        slope,
    })
}

/// Gaudin Hamiltonian eigenvalue function:
/// H_i = v_1 + hbar sum_{k != i} coth(q_i - q_k)
///           - hbar sum_g coth(q_i - mu^1_g).
pub fn gaudin_hamiltonian_eigenvalues(gspec: &GaudinSpec, mu1: &[C]) -> Result<Vec<C>> {
    let q = &gspec.q;
    for (i, &qi) in q.iter().enumerate() {
        for (g, &mu) in mu1.iter().enumerate() {
            if (qi - mu).sinh().norm() < LOCUS_TOL {
                return Err(LimitsError::ExcludedLocus(format!(
                    "mu^1_{} collides with q_{}",
                    g + 1,
                    i + 1
                )));
            }
        }
    }
    Ok((0..q.len())
        .map(|i| {
            let mut h = gspec.v[0];
            for k in 0..q.len() {
                if k != i {
                    h += gspec.hbar * coth(q[i] - q[k]);
                }
            }
            for &mu in mu1 {
                h -= gspec.hbar * coth(q[i] - mu);
            }
            h
        })
        .collect())
}

fn check_roots_shape(gspec: &GaudinSpec, roots: &BetheRoots) -> Result<()> {
    if roots.occupations.len() != gspec.n - 1 {
        return Err(LimitsError::BadRoots(format!(
            "expected {} occupation numbers, got {}",
            gspec.n - 1,
            roots.occupations.len()
        )));
    }
    Ok(())
}

/// The additive Bethe equation at level b (1-based), root beta, as
/// (lhs, rhs):
///   v_b + delta_{1b} hbar sum_k coth(mu - q_k)
///       + hbar sum_g coth(mu - mu^{b-1}_g)
/// = v_{b+1} + 2 hbar sum_{g != beta} coth(mu - mu^b_g)
///           - hbar sum_g coth(mu - mu^{b+1}_g).
fn gaudin_additive_sides(gspec: &GaudinSpec, levels: &[Vec<C>], b: usize, beta: usize) -> (C, C) {
    let hbar = gspec.hbar;
    let mu = levels[b - 1][beta];
    let mut lhs = gspec.v[b - 1];
    if b == 1 {
        for &qk in &gspec.q {
            lhs += hbar * coth(mu - qk);
        }
    } else {
        for &u in &levels[b - 2] {
            lhs += hbar * coth(mu - u);
        }
    }
    let mut rhs = gspec.v[b];
    for (g, &t) in levels[b - 1].iter().enumerate() {
        if g != beta {
            rhs += 2.0 * hbar * coth(mu - t);
        }
    }
    if b < gspec.n - 1 {
        for &s in &levels[b] {
            rhs -= hbar * coth(mu - s);
        }
    }
    (lhs, rhs)
}

/// Cleared residuals of the Gaudin Bethe system in exponentiated variables
/// t = e^{2 mu}: each additive equation is multiplied through by the product
/// of its sinh denominators (so both sides become polynomials in t) and the
/// difference is normalized by 1 + |lhs| + |rhs|.
pub fn gaudin_bethe_residuals(gspec: &GaudinSpec, roots: &BetheRoots) -> Result<Vec<C>> {
    check_roots_shape(gspec, roots)?;
    let hbar = gspec.hbar;
    let exp2 = |z: C| (z * 2.0).exp();
    let w: Vec<C> = gspec.q.iter().map(|&q| exp2(q)).collect();
    let tlv: Vec<Vec<C>> = roots.levels.iter().map(|l| l.iter().map(|&m| exp2(m)).collect()).collect();
    let mut out = Vec::new();
    for b in 1..gspec.n {
        for beta in 0..roots.levels[b - 1].len() {
            let t = tlv[b - 1][beta];
            // shared denominator factor list: (value t - x, numerator t + x,
            // side coefficient)
            let mut factors: Vec<(C, C, C)> = Vec::new();
            if b == 1 {
                for &wk in &w {
                    factors.push((t - wk, t + wk, hbar));
                }
            } else {
                for &u in &tlv[b - 2] {
                    factors.push((t - u, t + u, hbar));
                }
            }
            let lhs_terms = factors.len();
            for (g, &tg) in tlv[b - 1].iter().enumerate() {
                if g != beta {
                    factors.push((t - tg, t + tg, hbar * 2.0));
                }
            }
            if b < gspec.n - 1 {
                for &s in &tlv[b - 1 + 1] {
                    factors.push((t - s, t + s, -hbar));
                }
            }
            for (f, _, _) in &factors {
                if f.norm() / (1.0 + t.norm()) < 1e-14 {
                    return Err(LimitsError::ExcludedLocus(format!(
                        "level-{b} root {} sits on a pole of its equation",
                        beta + 1
                    )));
                }
            }
            let full: C = factors.iter().map(|(f, _, _)| *f).product();
            let term = |idx: usize| -> C {
                let mut p = factors[idx].2 * factors[idx].1;
                for (k, (f, _, _)) in factors.iter().enumerate() {
                    if k != idx {
                        p *= *f;
                    }
                }
                p
            };
            let mut lhs = gspec.v[b - 1] * full;
            for idx in 0..lhs_terms {
                lhs += term(idx);
            }
            let mut rhs = gspec.v[b] * full;
            for idx in lhs_terms..factors.len() {
                rhs += term(idx);
            }
            out.push((lhs - rhs) / (1.0 + lhs.norm() + rhs.norm()));
        }
    }
    Ok(out)
}

fn gaudin_residual_vec(gspec: &GaudinSpec, levels: &[Vec<C>]) -> Vec<C> {
    let mut out = Vec::new();
    for b in 1..gspec.n {
        for beta in 0..levels[b - 1].len() {
            let (lhs, rhs) = gaudin_additive_sides(gspec, levels, b, beta);
            out.push(lhs - rhs);
        }
    }
    out
}

fn flatten(levels: &[Vec<C>]) -> Vec<C> {
    levels.iter().flatten().copied().collect()
}

fn unflatten(template: &[Vec<C>], flat: &[C]) -> Vec<Vec<C>> {
    let mut out = Vec::with_capacity(template.len());
    let mut k = 0;
    for lvl in template {
        out.push(flat[k..k + lvl.len()].to_vec());
        k += lvl.len();
    }
    out
}

fn residual_max(r: &[C]) -> f64 {
    r.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Damped Newton on the additive Gaudin system with a forward-difference
/// Jacobian (the system is tiny, so numerical differentiation is adequate).
fn gaudin_newton(gspec: &GaudinSpec, start: &[Vec<C>]) -> Result<Vec<Vec<C>>> {
    let mut x = flatten(start);
    let dim = x.len();
    if dim == 0 {
        return Ok(start.to_vec());
    }
    let tol = 1e-12 * (1.0 + gspec.hbar.norm());
    for _ in 0..100 {
        let levels = unflatten(start, &x);
        let f = gaudin_residual_vec(gspec, &levels);
        let fnorm = residual_max(&f);
        if !fnorm.is_finite() {
            return Err(LimitsError::NoConvergence);
        }
        if fnorm <= tol {
            return Ok(levels);
        }
        let mut jac = CMatrix::zeros(dim, dim);
        for col in 0..dim {
            let h = 1e-7 * (1.0 + x[col].norm());
            let mut xp = x.clone();
            xp[col] += C::new(h, 0.0);
            let fp = gaudin_residual_vec(gspec, &unflatten(start, &xp));
            for row in 0..dim {
                jac[(row, col)] = (fp[row] - f[row]) / h;
            }
        }
        let rhs: Vec<C> = f.iter().map(|&z| -z).collect();
        let step = numerics::solve_linear(&jac, &rhs)?;
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..25 {
            let xt: Vec<C> = x
                .iter()
                .zip(&step)
                .map(|(&xi, &si)| xi + lambda * si)
                .collect();
            let ft = gaudin_residual_vec(gspec, &unflatten(start, &xt));
            let fn_t = residual_max(&ft);
            if fn_t.is_finite() && fn_t < fnorm {
                x = xt;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Err(LimitsError::NoConvergence);
        }
    }
    let levels = unflatten(start, &x);
    if residual_max(&gaudin_residual_vec(gspec, &levels)) <= tol {
        Ok(levels)
    } else {
        Err(LimitsError::NoConvergence)
    }
}

fn levels_distance(a: &[Vec<C>], b: &[Vec<C>]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(la, lb)| numerics::multiset_match_distance(la, lb))
        .fold(0.0, f64::max)
}

/// XXZ chain that degenerates to this Gaudin model at scale eps:
/// twist 1 + eps v, anisotropy eps hbar.
pub fn epsilon_chain(gspec: &GaudinSpec, eps: f64) -> Result<ChainSpec> {
    let twist: Vec<C> = gspec.v.iter().map(|&va| C::new(1.0, 0.0) + eps * va).collect();
    Ok(ChainSpec::new(gspec.n, gspec.q.clone(), twist, eps * gspec.hbar)?)
}

/// All Bethe solutions of the Gaudin system in a sector, obtained by
/// continuation: the sector is enumerated on the XXZ chain at eps = 1e-2
/// and each solution is handed to Newton on the additive Gaudin equations.
pub fn gaudin_sector_solutions(
    gspec: &GaudinSpec,
    occupations: &[usize],
    cfg: &SolverConfig,
) -> Result<Vec<BetheRoots>> {
    if occupations.iter().all(|&k| k == 0) {
        return Ok(vec![BetheRoots::vacuum(gspec.n)]);
    }
    let chain = epsilon_chain(gspec, 1e-2)?;
    let set = bethe_solver::enumerate_sector(&chain, occupations, cfg)?;
    let mut out: Vec<BetheRoots> = Vec::new();
    for sol in &set.solutions {
        let Ok(levels) = gaudin_newton(gspec, &sol.levels) else {
            continue;
        };
        if out.iter().any(|r| levels_distance(&r.levels, &levels) < 1e-7) {
            continue;
        }
        out.push(BetheRoots::new(occupations.to_vec(), levels)?);
    }
    Ok(out)
}

fn group_sizes(n: usize, sites: usize, occupations: &[usize]) -> Result<Vec<usize>> {
    let w = xxz_bethe::weight_vector(n, sites, occupations);
    for (a, &m) in w.iter().enumerate() {
        if m < 0 {
            return Err(LimitsError::BadRoots(format!(
                "occupations give negative group size M_{}",
                a + 1
            )));
        }
    }
    Ok(w.into_iter().map(|m| m as usize).collect())
}

/// Arithmetic strings centered at the Gaudin twist values:
/// {v_a + (2 alpha - (M_a - 1)) hbar : alpha = 0..M_a-1}.
pub fn gaudin_predicted_spectrum(gspec: &GaudinSpec, occupations: &[usize]) -> Result<Vec<C>> {
    let sizes = group_sizes(gspec.n, gspec.q.len(), occupations)?;
    let mut out = Vec::new();
    for (a, &m) in sizes.iter().enumerate() {
        for alpha in 0..m {
            out.push(gspec.v[a] + gspec.hbar * (2.0 * alpha as f64 - (m as f64 - 1.0)));
        }
    }
    Ok(out)
}

fn monotone_occupations(sites: usize, occupations: &[usize]) -> bool {
    let mut occ_full = vec![sites];
    occ_full.extend_from_slice(occupations);
    occ_full.push(0);
    occ_full.windows(2).all(|w| w[0] >= w[1])
}

/// Gaudin duality verification: nu = hbar, qdot_j = H^G_j; the
/// Calogero-Sutherland Lax spectrum must equal the arithmetic strings.
/// (With this substitution the Lax matrix diagonal is exactly H^G_i, which
/// is the matrix appearing in the additive determinant identity.)
pub fn verify_gaudin_duality(gspec: &GaudinSpec, roots: &BetheRoots, tol: f64) -> DualityReport {
    let mut report = DualityReport {
        regime: "gaudin".to_string(),
        spec: serde_json::to_value(gspec).unwrap_or(serde_json::Value::Null),
        occupations: roots.occupations.clone(),
        roots: roots.clone(),
        h_values: Vec::new(),
        eta: C::new(1.0, 0.0),
        predicted: Vec::new(),
        computed: Vec::new(),
        max_match_distance: f64::INFINITY,
        spectral_residuals: Vec::new(),
        status: DualityStatus::Failed,
        warning: None,
        error: None,
    };
    if !monotone_occupations(gspec.q.len(), &roots.occupations) {
        report.warning = Some("non-monotone occupations: prediction emitted anyway".into());
    }
    let roots_ok = match gaudin_bethe_residuals(gspec, roots) {
        Ok(res) => res.iter().all(|r| r.norm() <= 1e-10),
        Err(e) => {
            report.error = Some(e.to_string());
            false
        }
    };
    let run = || -> Result<(Vec<C>, Vec<C>, Vec<C>)> {
        let predicted = gaudin_predicted_spectrum(gspec, &roots.occupations)?;
        let h = gaudin_hamiltonian_eigenvalues(gspec, &roots.levels[0])?;
        let qdot = h.clone();
        let lax = cm_lax(&CMParams::new(gspec.hbar)?, &gspec.q, &qdot)?;
        let computed = numerics::eigenvalues(&lax)?;
        Ok((predicted, computed, h))
    };
    match run() {
        Ok((predicted, computed, h)) => {
            report.max_match_distance = numerics::multiset_match_distance(&predicted, &computed);
            report.predicted = predicted;
            report.computed = computed;
            report.h_values = h;
            report.status = if !roots_ok {
                DualityStatus::UnverifiedRoots
            } else if report.max_match_distance <= tol {
                DualityStatus::Verified
            } else {
                DualityStatus::Failed
            };
        }
        Err(e) => {
            report.error = Some(e.to_string());
        }
    }
    report
}

/// O(eps) convergence of the XXZ duality data to the Gaudin duality data:
/// for each eps the XXZ sector solution nearest the Gaudin roots is
/// refined, its Lax spectrum lambda is compared via (lambda - 1)/eps
/// against the Gaudin Lax spectrum, and the log-log slope is fitted
/// (expected 1).
pub fn gaudin_epsilon_slope(
    gspec: &GaudinSpec,
    roots: &BetheRoots,
    epsilons: &[f64],
    cfg: &SolverConfig,
) -> Result<SlopeReport> {
    let gaudin_report = verify_gaudin_duality(gspec, roots, 1e-6);
    if gaudin_report.computed.is_empty() {
        return Err(LimitsError::BadRoots(
            gaudin_report
                .error
                .unwrap_or_else(|| "Gaudin spectrum unavailable".into()),
        ));
    }
    let target = gaudin_report.computed;
    let mut deviations = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let chain = epsilon_chain(gspec, eps)?;
        let refined = bethe_solver::newton_refine(&chain, roots, cfg)?;
        let xxz = crate::duality::verify_duality(&chain, &refined, C::new(1.0, 0.0), 1e-6);
        let rescaled: Vec<C> = xxz
            .computed
            .iter()
            .map(|&l| (l - C::new(1.0, 0.0)) / eps)
            .collect();
        deviations.push(numerics::multiset_match_distance(&rescaled, &target));
    }
    let slope = fit_slope(epsilons, &deviations);
    Ok(SlopeReport {
        abscissae: epsilons.to_vec(),
        deviations,
        slope,
    })
}

// ---------------------------------------------------------------------------
// XX free-fermion point
// ---------------------------------------------------------------------------

/// The free-fermion anisotropy i*pi/2.
pub fn xx_hbar() -> C {
    C::new(0.0, FRAC_PI_2)
}

fn require_xx(spec: &ChainSpec) -> Result<()> {
    if (spec.hbar() - xx_hbar()).norm() > 1e-12 {
        return Err(LimitsError::NotXxPoint(spec.hbar()));
    }
    Ok(())
}

fn i_pow(k: i64) -> C {
    match k.rem_euclid(4) {
        0 => C::new(1.0, 0.0),
        1 => C::new(0.0, 1.0),
        2 => C::new(-1.0, 0.0),
        _ => C::new(0.0, -1.0),
    }
}

fn coth_guarded(z: C, what: &str) -> Result<C> {
    if z.sinh().norm() < 1e-12 {
        return Err(LimitsError::ExcludedLocus(format!("coth pole: {what}")));
    }
    Ok(coth(z))
}

/// Transfer-matrix eigenvalue at the free-fermion point:
/// T(z) = i^{N - N_1} V_1 prod_k coth(z - q_k) prod_g coth(z - mu^1_g)
///      + sum_{b>=2} i^{N_{b-1} - N_b} V_b
///        prod coth(z - mu^{b-1}) prod coth(z - mu^b).
pub fn xx_transfer_eigenvalue(spec: &ChainSpec, roots: &BetheRoots, z: C) -> Result<C> {
    require_xx(spec)?;
    let n = spec.rank();
    let sites = spec.sites();
    let occ = &roots.occupations;
    let count = |b: usize| -> i64 {
        // N_0 = N, N_n = 0
        if b == 0 {
            sites as i64
        } else if b >= n {
            0
        } else {
            occ[b - 1] as i64
        }
    };
    let mut total = C::new(0.0, 0.0);
    for b in 1..=n {
        let mut term = i_pow(count(b - 1) - count(b)) * spec.twist()[b - 1];
        if b == 1 {
            for &qk in spec.q() {
                term *= coth_guarded(z - qk, "z - q_k")?;
            }
        } else {
            for &mu in &roots.levels[b - 2] {
                term *= coth_guarded(z - mu, "z - mu^{b-1}")?;
            }
        }
        if b <= n - 1 {
            for &mu in &roots.levels[b - 1] {
                term *= coth_guarded(z - mu, "z - mu^b")?;
            }
        }
        total += term;
    }
    Ok(total)
}

/// Hamiltonian eigenvalues at the free-fermion point:
/// H_j = i^{N - N_1} V_1 prod_{k != j} coth(q_j - q_k)
///       prod_g coth(q_j - mu^1_g).
pub fn xx_hamiltonian_eigenvalues(spec: &ChainSpec, roots: &BetheRoots) -> Result<Vec<C>> {
    require_xx(spec)?;
    let sites = spec.sites();
    let n1 = roots.occupations.first().copied().unwrap_or(0) as i64;
    let mut out = Vec::with_capacity(sites);
    for j in 0..sites {
        let mut h = i_pow(sites as i64 - n1) * spec.twist()[0];
        for k in 0..sites {
            if k != j {
                h *= coth_guarded(spec.q()[j] - spec.q()[k], "q_j - q_k")?;
            }
        }
        for &mu in &roots.levels[0] {
            h *= coth_guarded(spec.q()[j] - mu, "q_j - mu^1")?;
        }
        out.push(h);
    }
    Ok(out)
}

/// Collapsed Bethe equations at the free-fermion point, cleared in the
/// exponentiated variables t = e^{2 mu}: level b, root beta gives
///   i^{N_{b-1}} V_b prod_g (t + U_g) prod_g (t - S_g)
/// = V_{b+1} (-1)^{N_b - 1} i^{-N_{b+1}} prod_g (t - U_g) prod_g (t + S_g)
/// where U are the previous-level exponentiated roots (sites for b = 1) and
/// S the next-level ones; residual normalized by 1 + |lhs| + |rhs|.
pub fn xx_collapsed_residuals(spec: &ChainSpec, roots: &BetheRoots) -> Result<Vec<C>> {
    require_xx(spec)?;
    let n = spec.rank();
    let exp2 = |z: C| (z * 2.0).exp();
    let w: Vec<C> = spec.q().iter().map(|&q| exp2(q)).collect();
    let tlv: Vec<Vec<C>> = roots
        .levels
        .iter()
        .map(|l| l.iter().map(|&m| exp2(m)).collect())
        .collect();
    let count = |b: usize| -> i64 {
        if b == 0 {
            spec.sites() as i64
        } else if b >= n {
            0
        } else {
            roots.occupations[b - 1] as i64
        }
    };
    let mut out = Vec::new();
    for b in 1..n {
        let upper: &[C] = if b == 1 { &w } else { &tlv[b - 2] };
        let lower: &[C] = if b < n - 1 { &tlv[b] } else { &[] };
        for &t in &tlv[b - 1] {
            let mut lhs = i_pow(count(b - 1)) * spec.twist()[b - 1];
            let mut rhs = i_pow(-count(b + 1))
                * spec.twist()[b]
                * (-1.0f64).powi((count(b) - 1) as i32);
            for &u in upper {
                lhs *= t + u;
                rhs *= t - u;
            }
            for &s in lower {
                lhs *= t - s;
                rhs *= t + s;
            }
            out.push((lhs - rhs) / (1.0 + lhs.norm() + rhs.norm()));
        }
    }
    Ok(out)
}

/// Predicted Lax spectrum at the free-fermion point:
/// {i^{-(M_a - 1)} (-1)^alpha V_a : alpha = 0..M_a-1}.
pub fn xx_predicted_spectrum(spec: &ChainSpec, occupations: &[usize]) -> Result<Vec<C>> {
    let sizes = group_sizes(spec.rank(), spec.sites(), occupations)?;
    let mut out = Vec::new();
    for (a, &m) in sizes.iter().enumerate() {
        for alpha in 0..m {
            out.push(
                i_pow(-((m as i64) - 1)) * (-1.0f64).powi(alpha as i32) * spec.twist()[a],
            );
        }
    }
    Ok(out)
}

/// Spectral polynomial system at the free-fermion point, k = 1..N:
/// sum over k-subsets of prod H^XX prod tanh^2(q_a - q_b)
/// = i^k e_k(lambda); normalized residuals.
pub fn xx_spectral_residuals(spec: &ChainSpec, h_values: &[C], lambda: &[C]) -> Result<Vec<f64>> {
    require_xx(spec)?;
    let sites = spec.sites();
    let e = crate::duality::elementary_symmetric(lambda);
    let mut out = Vec::with_capacity(sites);
    for k in 1..=sites {
        let mut lhs = C::new(0.0, 0.0);
        for subset in (0..sites).combinations(k) {
            let mut term = C::new(1.0, 0.0);
            for &i in &subset {
                term *= h_values[i];
            }
            for (a, b) in subset.iter().tuple_combinations() {
                let d = spec.q()[*a] - spec.q()[*b];
                if d.cosh().norm() < 1e-12 {
                    return Err(LimitsError::ExcludedLocus("tanh pole".into()));
                }
                let t = d.sinh() / d.cosh();
                term *= t * t;
            }
            lhs += term;
        }
        let rhs = i_pow(k as i64) * e[k];
        out.push((lhs - rhs).norm() / (1.0 + lhs.norm() + rhs.norm()));
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct TransferSample {
    #[serde(with = "crate::numerics::json_complex")]
    pub z: C,
    #[serde(with = "crate::numerics::json_complex")]
    pub value: C,
}

#[derive(Debug, Clone, Serialize)]
pub struct XxQuantities {
    pub transfer_samples: Vec<TransferSample>,
    #[serde(with = "crate::numerics::json_complex::vec")]
    pub h_values: Vec<C>,
    #[serde(with = "crate::numerics::json_complex::vec")]
    pub residuals: Vec<C>,
    /// Maximum relative gap between the free-fermion closed forms and the
    /// generic formulas evaluated at hbar = i pi/2 (must be ~0).
    pub specialization_gap: f64,
}

/// All free-fermion quantities for one root set plus the cross-check
/// against the generic-anisotropy formulas specialized to hbar = i pi/2.
pub fn xx_quantities(spec: &ChainSpec, roots: &BetheRoots, z_samples: &[C]) -> Result<XxQuantities> {
    require_xx(spec)?;
    let mut gap: f64 = 0.0;
    let mut transfer_samples = Vec::with_capacity(z_samples.len());
    for &z in z_samples {
        let xx = xx_transfer_eigenvalue(spec, roots, z)?;
        let generic = xxz_bethe::transfer_eigenvalue(spec, roots, z)?;
        gap = gap.max((xx - generic).norm() / (1.0 + generic.norm()));
        transfer_samples.push(TransferSample { z, value: xx });
    }
    let h_values = xx_hamiltonian_eigenvalues(spec, roots)?;
    let generic_h = xxz_bethe::hamiltonian_eigenvalues(spec, roots)?;
    for (a, b) in h_values.iter().zip(&generic_h) {
        gap = gap.max((a - b).norm() / (1.0 + b.norm()));
    }
    let residuals = xx_collapsed_residuals(spec, roots)?;
    Ok(XxQuantities {
        transfer_samples,
        h_values,
        residuals,
        specialization_gap: gap,
    })
}

/// Duality verification at the free-fermion point: collapsed-equation root
/// check, Lax spectrum against the phase multiset, and the tanh^2 spectral
/// system.
pub fn xx_verify_duality(spec: &ChainSpec, roots: &BetheRoots, eta: C, tol: f64) -> DualityReport {
    let mut report = DualityReport {
        regime: "xx".to_string(),
        spec: serde_json::to_value(spec).unwrap_or(serde_json::Value::Null),
        occupations: roots.occupations.clone(),
        roots: roots.clone(),
        h_values: Vec::new(),
        eta,
        predicted: Vec::new(),
        computed: Vec::new(),
        max_match_distance: f64::INFINITY,
        spectral_residuals: Vec::new(),
        status: DualityStatus::Failed,
        warning: None,
        error: None,
    };
    if !monotone_occupations(spec.sites(), &roots.occupations) {
        report.warning = Some("non-monotone occupations: prediction emitted anyway".into());
    }
    let roots_ok = match xx_collapsed_residuals(spec, roots) {
        Ok(res) => res.iter().all(|r| r.norm() <= 1e-10),
        Err(e) => {
            report.error = Some(e.to_string());
            false
        }
    };
    let run = || -> Result<(Vec<C>, Vec<C>, Vec<C>, Vec<f64>)> {
        let predicted = xx_predicted_spectrum(spec, &roots.occupations)?;
        let h = xx_hamiltonian_eigenvalues(spec, roots)?;
        let params = RsParams::new(eta, spec.hbar() / eta)?;
        let qdot: Vec<C> = h.iter().map(|&hj| eta * hj / spec.hbar().sinh()).collect();
        let lax = rs_model::lax_from_velocities(&params, spec.q(), &qdot)?;
        let computed = numerics::eigenvalues(&lax)?;
        let spectral = xx_spectral_residuals(spec, &h, &predicted)?;
        Ok((predicted, computed, h, spectral))
    };
    match run() {
        Ok((predicted, computed, h, spectral)) => {
            report.max_match_distance = numerics::multiset_match_distance(&predicted, &computed);
            report.predicted = predicted;
            report.computed = computed;
            report.h_values = h;
            report.spectral_residuals = spectral;
            report.status = if !roots_ok {
                DualityStatus::UnverifiedRoots
            } else if report.max_match_distance <= tol {
                DualityStatus::Verified
            } else {
                DualityStatus::Failed
            };
        }
        Err(e) => {
            report.error = Some(e.to_string());
        }
    }
    report
}
