//! Classical trigonometric Ruijsenaars-Schneider model.
//!
//! Lax matrix in momentum and velocity form, the Vandermonde-type
//! factorization L = D V~^{-1}(eps) V~(eps - eta*nu) D^{-1} e^{eta P},
//! the Lax-pair partner B, equations of motion and an RK4 flow integrator
//! that records the (conserved) Lax spectrum along the trajectory.

use crate::numerics::{self, CMatrix, C};
use thiserror::Error;

/// Pairwise |sinh(q_i - q_j)| below this is treated as a collision.
pub const COLLISION_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum RsError {
    #[error("degenerate parameters: sinh(eta*nu) vanishes (eta*nu = {value})")]
    DegenerateCoupling { value: C },
    #[error("singular configuration: |sinh(q_{i} - q_{j} + shift)| = {magnitude:.3e}")]
    SingularConfiguration {
        i: usize,
        j: usize,
        magnitude: f64,
    },
    #[error("state needs {needed} but has neither momenta nor velocities")]
    MissingPhaseData { needed: String },
    #[error("Vandermonde matrix too ill-conditioned at eps = {eps} (cond ~ {cond:.3e}); pick a different eps")]
    DegenerateEpsilon { eps: C, cond: f64 },
    #[error("regime {requested:?} requested but eta*nu = {etanu} does not match")]
    RegimeMismatch { requested: Regime, etanu: C },
    #[error("flow approached a collision at t = {time:.6} (min |sinh dq| = {magnitude:.3e})")]
    FlowSingularity { time: f64, magnitude: f64 },
    #[error(transparent)]
    Numerics(#[from] numerics::NumericsError),
}

pub type Result<T> = std::result::Result<T, RsError>;

/// Relativistic deformation eta and coupling nu; their product plays the
/// role of the chain anisotropy hbar.
#[derive(Debug, Clone, Copy)]
pub struct RsParams {
    eta: C,
    nu: C,
}

impl RsParams {
    pub fn new(eta: C, nu: C) -> Result<Self> {
        let etanu = eta * nu;
        if etanu.sinh().norm() < 1e-12 {
            return Err(RsError::DegenerateCoupling { value: etanu });
        }
        Ok(RsParams { eta, nu })
    }

    pub fn eta(&self) -> C {
        self.eta
    }

    pub fn nu(&self) -> C {
        self.nu
    }

    /// eta * nu, the quantity identified with hbar under the duality.
    pub fn hbar(&self) -> C {
        self.eta * self.nu
    }
}

/// Phase-space point: coordinates plus momenta and/or velocities.
#[derive(Debug, Clone)]
pub struct RsState {
    pub q: Vec<C>,
    pub p: Option<Vec<C>>,
    pub qdot: Option<Vec<C>>,
}

impl RsState {
    pub fn from_momenta(q: Vec<C>, p: Vec<C>) -> Self {
        assert_eq!(q.len(), p.len());
        RsState {
            q,
            p: Some(p),
            qdot: None,
        }
    }

    pub fn from_velocities(q: Vec<C>, qdot: Vec<C>) -> Self {
        assert_eq!(q.len(), qdot.len());
        RsState {
            q,
            p: None,
            qdot: Some(qdot),
        }
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }
}

fn check_collisions(params: &RsParams, q: &[C]) -> Result<()> {
    let etanu = params.hbar();
    for i in 0..q.len() {
        for j in 0..q.len() {
            if i == j {
                continue;
            }
            let plain = (q[i] - q[j]).sinh().norm();
            if plain < 1e-12 {
                return Err(RsError::SingularConfiguration {
                    i,
                    j,
                    magnitude: plain,
                });
            }
            let shifted = (q[i] - q[j] + etanu).sinh().norm();
            if shifted < 1e-12 {
                return Err(RsError::SingularConfiguration {
                    i,
                    j,
                    magnitude: shifted,
                });
            }
        }
    }
    Ok(())
}

/// Velocities q'_j = eta e^{eta p_j} prod_{k!=j} sinh(q_j-q_k-eta nu)/sinh(q_j-q_k).
pub fn velocities(params: &RsParams, q: &[C], p: &[C]) -> Result<Vec<C>> {
    check_collisions(params, q)?;
    let etanu = params.hbar();
    let mut out = Vec::with_capacity(q.len());
    for j in 0..q.len() {
        let mut v = params.eta * (params.eta * p[j]).exp();
        for k in 0..q.len() {
            if k != j {
                v *= (q[j] - q[k] - etanu).sinh() / (q[j] - q[k]).sinh();
            }
        }
        out.push(v);
    }
    Ok(out)
}

/// Lax matrix in velocity form: L_ij = sinh(eta nu)/sinh(q_i-q_j+eta nu) * qdot_j / eta.
pub fn lax_from_velocities(params: &RsParams, q: &[C], qdot: &[C]) -> Result<CMatrix> {
    check_collisions(params, q)?;
    let etanu = params.hbar();
    let s = etanu.sinh();
    let n = q.len();
    Ok(CMatrix::from_fn(n, n, |i, j| {
        s / (q[i] - q[j] + etanu).sinh() * qdot[j] / params.eta
    }))
}

/// Lax matrix in momentum form (Cauchy kernel times the momentum products).
pub fn lax_from_momenta(params: &RsParams, q: &[C], p: &[C]) -> Result<CMatrix> {
    let qdot = velocities(params, q, p)?;
    lax_from_velocities(params, q, &qdot)
}

/// H = tr L, the RS Hamiltonian.
pub fn rs_hamiltonian(params: &RsParams, q: &[C], p: &[C]) -> Result<C> {
    let etanu = params.hbar();
    check_collisions(params, q)?;
    let mut h = C::new(0.0, 0.0);
    for j in 0..q.len() {
        let mut term = (params.eta * p[j]).exp();
        for k in 0..q.len() {
            if k != j {
                term *= (q[j] - q[k] - etanu).sinh() / (q[j] - q[k]).sinh();
            }
        }
        h += term;
    }
    Ok(h)
}

/// Default fictitious spectral parameter for the factorized Lax form.
pub const DEFAULT_EPSILON: C = C::new(0.37, 0.19);

/// Factorized Lax matrix L = D V~^{-1}(eps) V~(eps - eta nu) D^{-1} e^{eta P}.
/// The result must not depend on eps (checked in tests).
pub fn factorized_lax(params: &RsParams, q: &[C], p: &[C], eps: C) -> Result<CMatrix> {
    check_collisions(params, q)?;
    let n = q.len();
    let etanu = params.hbar();

    let vand = |shift: C| {
        CMatrix::from_fn(n, n, |i, j| {
            let exponent = C::new((2 * (i + 1)) as f64 - 1.0 - n as f64, 0.0) * (q[j] + shift);
            exponent.exp()
        })
    };
    let v_eps = vand(eps);
    let cond = v_eps
        .condition_estimate()
        .map_err(|_| RsError::DegenerateEpsilon {
            eps,
            cond: f64::INFINITY,
        })?;
    if cond > 1e10 {
        return Err(RsError::DegenerateEpsilon { eps, cond });
    }
    let v_shift = vand(eps - etanu);

    let d: Vec<C> = (0..n)
        .map(|j| {
            (0..n)
                .filter(|&k| k != j)
                .map(|k| (q[j] - q[k]).sinh())
                .product()
        })
        .collect();
    let d_mat = CMatrix::diagonal(&d);
    let d_inv = CMatrix::diagonal(&d.iter().map(|&x| C::new(1.0, 0.0) / x).collect::<Vec<_>>());
    let e_eta_p = CMatrix::diagonal(
        &p.iter()
            .map(|&pj| (params.eta * pj).exp())
            .collect::<Vec<_>>(),
    );

    let v_inv = v_eps.inverse()?;
    Ok(d_mat.mul(&v_inv).mul(&v_shift).mul(&d_inv).mul(&e_eta_p))
}

/// Diagonal of the shift matrix S(zeta): S_ii = exp(-(2i-1-N) zeta), i = 1..N.
pub fn shift_matrix_diagonal(n: usize, zeta: C) -> Vec<C> {
    (0..n)
        .map(|i| (-(C::new((2 * (i + 1)) as f64 - 1.0 - n as f64, 0.0)) * zeta).exp())
        .collect()
}

/// Lax-pair partner B satisfying dL/dt = [B, L] along the RS flow:
/// diagonal sum_l qdot_l coth(q_jl + eta nu) - sum_{l!=j} qdot_l coth q_jl,
/// off-diagonal qdot_k / sinh q_jk. The off-diagonal velocity factor is
/// forced by the consistency conditions of the Lax equation (matching the
/// equations of motion requires B_jk linear in qdot_k for j != k).
pub fn b_matrix(params: &RsParams, q: &[C], qdot: &[C]) -> Result<CMatrix> {
    check_collisions(params, q)?;
    let etanu = params.hbar();
    let n = q.len();
    let coth = |z: C| z.cosh() / z.sinh();
    Ok(CMatrix::from_fn(n, n, |j, k| {
        if j == k {
            let mut diag = C::new(0.0, 0.0);
            for l in 0..n {
                let qjl = q[j] - q[l];
                diag += qdot[l] * coth(qjl + etanu);
                if l != j {
                    diag -= qdot[l] * coth(qjl);
                }
            }
            diag
        } else {
            qdot[k] / (q[j] - q[k]).sinh()
        }
    }))
}

/// Right-hand-side regime for the equations of motion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Generic eta*nu (eq. of motion with the three-sinh denominator).
    Generic,
    /// eta*nu -> +-infinity: qddot_j = 2 sum qdot_j qdot_k coth q_jk.
    InfiniteCoupling,
    /// eta*nu = i pi/2: qddot_j = 4 sum qdot_j qdot_k / sinh(2 q_jk).
    XxPoint,
}

/// Accelerations per the RS equations of motion in the selected regime.
pub fn accelerations(params: &RsParams, q: &[C], qdot: &[C], regime: Regime) -> Result<Vec<C>> {
    let n = q.len();
    let etanu = params.hbar();
    if regime == Regime::XxPoint {
        let target = C::new(0.0, std::f64::consts::FRAC_PI_2);
        if (etanu - target).norm() > 1e-12 {
            return Err(RsError::RegimeMismatch {
                requested: regime,
                etanu,
            });
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let mag = (q[i] - q[j]).sinh().norm();
            if mag < 1e-12 {
                return Err(RsError::SingularConfiguration {
                    i,
                    j,
                    magnitude: mag,
                });
            }
        }
    }
    let s2 = etanu.sinh() * etanu.sinh();
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        let mut acc = C::new(0.0, 0.0);
        for k in 0..n {
            if k == j {
                continue;
            }
            let qjk = q[j] - q[k];
            acc += match regime {
                Regime::Generic => {
                    -C::new(2.0, 0.0) * qdot[j] * qdot[k] * s2 * qjk.cosh()
                        / ((qjk - etanu).sinh() * qjk.sinh() * (qjk + etanu).sinh())
                }
                Regime::InfiniteCoupling => {
                    C::new(2.0, 0.0) * qdot[j] * qdot[k] * qjk.cosh() / qjk.sinh()
                }
                Regime::XxPoint => {
                    C::new(4.0, 0.0) * qdot[j] * qdot[k] / (C::new(2.0, 0.0) * qjk).sinh()
                }
            };
        }
        out.push(acc);
    }
    Ok(out)
}

/// One sampled point of an integrated trajectory.
#[derive(Debug, Clone)]
pub struct FlowSample {
    pub t: f64,
    pub q: Vec<C>,
    pub qdot: Vec<C>,
    /// Lax eigenvalues at this time, canonically sorted.
    pub lax_eigenvalues: Vec<C>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<FlowSample>,
}

impl Trajectory {
    /// Max eigenvalue drift of any sample relative to the initial spectrum.
    pub fn max_spectral_drift(&self) -> f64 {
        let first = &self.samples[0].lax_eigenvalues;
        self.samples
            .iter()
            .map(|s| numerics::multiset_match_distance(first, &s.lax_eigenvalues))
            .fold(0.0, f64::max)
    }

    /// CSV export: t, re/im of each coordinate and velocity, eigenvalue drift.
    pub fn to_csv(&self) -> String {
        let n = self.samples[0].q.len();
        let mut header = String::from("t");
        for j in 1..=n {
            header.push_str(&format!(",re_q{j},im_q{j}"));
        }
        for j in 1..=n {
            header.push_str(&format!(",re_qdot{j},im_qdot{j}"));
        }
        header.push_str(",eig_drift\n");
        let first = &self.samples[0].lax_eigenvalues;
        let mut out = header;
        for s in &self.samples {
            let drift = numerics::multiset_match_distance(first, &s.lax_eigenvalues);
            out.push_str(&format!("{:.12e}", s.t));
            for z in &s.q {
                out.push_str(&format!(",{:.17e},{:.17e}", z.re, z.im));
            }
            for z in &s.qdot {
                out.push_str(&format!(",{:.17e},{:.17e}", z.re, z.im));
            }
            out.push_str(&format!(",{:.6e}\n", drift));
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FlowConfig {
    pub steps: usize,
    pub samples: usize,
    pub regime: Regime,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            steps: 4000,
            samples: 50,
            regime: Regime::Generic,
        }
    }
}

/// Classical RK4 integration of the second-order RS flow in (q, qdot) form.
/// Records the Lax spectrum at each sample time.
pub fn integrate_flow(
    params: &RsParams,
    initial: &RsState,
    t_end: f64,
    cfg: &FlowConfig,
) -> Result<Trajectory> {
    let q0 = initial.q.clone();
    let qdot0 = match (&initial.qdot, &initial.p) {
        (Some(v), _) => v.clone(),
        (None, Some(p)) => velocities(params, &q0, p)?,
        (None, None) => {
            return Err(RsError::MissingPhaseData {
                needed: "velocities (or momenta)".into(),
            })
        }
    };
    let n = q0.len();
    let steps = cfg.steps.max(1);
    let dt = t_end / steps as f64;
    let sample_every = (steps / cfg.samples.max(1)).max(1);

    let rhs = |q: &[C], qdot: &[C]| -> Result<(Vec<C>, Vec<C>)> {
        Ok((qdot.to_vec(), accelerations(params, q, qdot, cfg.regime)?))
    };

    let guard = |q: &[C], t: f64| -> Result<()> {
        for i in 0..n {
            for j in (i + 1)..n {
                let mag = (q[i] - q[j]).sinh().norm();
                if mag < COLLISION_TOL {
                    return Err(RsError::FlowSingularity {
                        time: t,
                        magnitude: mag,
                    });
                }
            }
        }
        Ok(())
    };

    let mut q = q0;
    let mut qdot = qdot0;
    let mut samples = Vec::new();
    let record =
        |samples: &mut Vec<FlowSample>, t: f64, q: &[C], qdot: &[C]| -> Result<()> {
            let lax = lax_from_velocities(params, q, qdot)?;
            samples.push(FlowSample {
                t,
                q: q.to_vec(),
                qdot: qdot.to_vec(),
                lax_eigenvalues: numerics::eigenvalues(&lax)?,
            });
            Ok(())
        };
    record(&mut samples, 0.0, &q, &qdot)?;

    for step in 1..=steps {
        let t = (step - 1) as f64 * dt;
        guard(&q, t)?;
        let h = C::new(dt, 0.0);
        let half = C::new(0.5, 0.0);
        let (k1q, k1v) = rhs(&q, &qdot)?;
        let q2: Vec<C> = (0..n).map(|i| q[i] + half * h * k1q[i]).collect();
        let v2: Vec<C> = (0..n).map(|i| qdot[i] + half * h * k1v[i]).collect();
        let (k2q, k2v) = rhs(&q2, &v2)?;
        let q3: Vec<C> = (0..n).map(|i| q[i] + half * h * k2q[i]).collect();
        let v3: Vec<C> = (0..n).map(|i| qdot[i] + half * h * k2v[i]).collect();
        let (k3q, k3v) = rhs(&q3, &v3)?;
        let q4: Vec<C> = (0..n).map(|i| q[i] + h * k3q[i]).collect();
        let v4: Vec<C> = (0..n).map(|i| qdot[i] + h * k3v[i]).collect();
        let (k4q, k4v) = rhs(&q4, &v4)?;
        let sixth = C::new(1.0 / 6.0, 0.0);
        for i in 0..n {
            q[i] += h * sixth * (k1q[i] + C::new(2.0, 0.0) * (k2q[i] + k3q[i]) + k4q[i]);
            qdot[i] += h * sixth * (k1v[i] + C::new(2.0, 0.0) * (k2v[i] + k3v[i]) + k4v[i]);
        }
        if step % sample_every == 0 || step == steps {
            guard(&q, step as f64 * dt)?;
            record(&mut samples, step as f64 * dt, &q, &qdot)?;
        }
    }
    Ok(Trajectory { samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::multiset_match_distance;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn random_points(rng: &mut StdRng, n: usize) -> Vec<C> {
        // spread out enough to stay clear of collisions
        (0..n)
            .map(|k| {
                c(
                    k as f64 * 0.9 + rng.gen_range(-0.2..0.2),
                    rng.gen_range(-0.3..0.3),
                )
            })
            .collect()
    }

    fn params() -> RsParams {
        RsParams::new(c(1.0, 0.0), c(0.3, 0.1)).unwrap()
    }

    #[test]
    fn lax_velocity_single_particle() {
        let p = params();
        let qd = c(2.0, -1.0);
        let l = lax_from_velocities(&p, &[c(0.4, 0.2)], &[qd]).unwrap();
        assert!((l[(0, 0)] - qd / p.eta()).norm() < 1e-14);
    }

    #[test]
    fn lax_velocity_zero_velocities() {
        let p = params();
        let l = lax_from_velocities(&p, &[c(0.0, 0.0), c(1.0, 0.0)], &[c(0.0, 0.0); 2]).unwrap();
        assert!(l.max_norm() < 1e-15);
    }

    #[test]
    fn lax_velocity_matches_scalar_formula() {
        let p = params();
        let mut rng = StdRng::seed_from_u64(1);
        let q = random_points(&mut rng, 3);
        let qdot: Vec<C> = (0..3)
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let l = lax_from_velocities(&p, &q, &qdot).unwrap();
        let etanu = p.hbar();
        for i in 0..3 {
            for j in 0..3 {
                let expected = etanu.sinh() / (q[i] - q[j] + etanu).sinh() * qdot[j] / p.eta();
                assert!((l[(i, j)] - expected).norm() < 1e-14);
            }
        }
        let trace_expected: C = qdot.iter().sum::<C>() / p.eta();
        assert!((l.trace() - trace_expected).norm() < 1e-12);
    }

    #[test]
    fn lax_momentum_single_particle() {
        let p = params();
        let l = lax_from_momenta(&p, &[c(0.1, 0.0)], &[c(0.7, 0.2)]).unwrap();
        let expected = (p.eta() * c(0.7, 0.2)).exp();
        assert!((l[(0, 0)] - expected).norm() < 1e-13);
    }

    #[test]
    fn zero_momentum_spectrum_is_shift_matrix() {
        // Spec(L|_{P=0}) = {e^{(2i-1-N) eta nu}}, independent of q
        let p = params();
        let mut rng = StdRng::seed_from_u64(2);
        for n in 2..=6 {
            for _ in 0..2 {
                let q = random_points(&mut rng, n);
                let l = lax_from_momenta(&p, &q, &vec![c(0.0, 0.0); n]).unwrap();
                let eig = crate::numerics::eigenvalues(&l).unwrap();
                let expected = shift_matrix_diagonal(n, p.hbar());
                assert!(
                    multiset_match_distance(&eig, &expected) < 1e-9,
                    "P=0 spectrum mismatch at N={n}"
                );
            }
        }
    }

    #[test]
    fn velocity_single_particle() {
        let p = params();
        let v = velocities(&p, &[c(0.3, 0.1)], &[c(0.5, 0.0)]).unwrap();
        let expected = p.eta() * (p.eta() * c(0.5, 0.0)).exp();
        assert!((v[0] - expected).norm() < 1e-14);
    }

    #[test]
    fn velocity_two_particles_zero_momentum() {
        let p = params();
        let q = [c(0.0, 0.0), c(1.2, 0.3)];
        let v = velocities(&p, &q, &[c(0.0, 0.0); 2]).unwrap();
        let etanu = p.hbar();
        for (j, k) in [(0usize, 1usize), (1, 0)] {
            let expected = p.eta() * (q[j] - q[k] - etanu).sinh() / (q[j] - q[k]).sinh();
            assert!((v[j] - expected).norm() < 1e-14);
        }
    }

    #[test]
    fn velocity_is_hamiltonian_derivative() {
        // qdot_j = dH/dp_j by central finite differences
        let prm = params();
        let mut rng = StdRng::seed_from_u64(3);
        let q = random_points(&mut rng, 3);
        let p: Vec<C> = (0..3)
            .map(|_| c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)))
            .collect();
        let v = velocities(&prm, &q, &p).unwrap();
        let h = 1e-5;
        for j in 0..3 {
            let mut pp = p.clone();
            pp[j] += c(h, 0.0);
            let mut pm = p.clone();
            pm[j] -= c(h, 0.0);
            let dh = (rs_hamiltonian(&prm, &q, &pp).unwrap()
                - rs_hamiltonian(&prm, &q, &pm).unwrap())
                / c(2.0 * h, 0.0);
            assert!(
                (dh - v[j]).norm() < 1e-6 * (1.0 + v[j].norm()),
                "dH/dp mismatch at j={j}"
            );
        }
    }

    #[test]
    fn hamiltonian_is_trace_of_lax() {
        let prm = params();
        let mut rng = StdRng::seed_from_u64(4);
        let q = random_points(&mut rng, 3);
        let p: Vec<C> = (0..3)
            .map(|_| c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)))
            .collect();
        let h = rs_hamiltonian(&prm, &q, &p).unwrap();
        let tr = lax_from_momenta(&prm, &q, &p).unwrap().trace();
        assert!((h - tr).norm() < 1e-12 * (1.0 + h.norm()));
    }

    #[test]
    fn factorization_agrees_with_direct_lax() {
        let prm = params();
        let mut rng = StdRng::seed_from_u64(5);
        for n in 1..=5 {
            for _ in 0..10 {
                let q = random_points(&mut rng, n);
                let p: Vec<C> = (0..n)
                    .map(|_| c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)))
                    .collect();
                let eps = c(rng.gen_range(0.1..0.9), rng.gen_range(-0.3..0.3));
                let direct = lax_from_momenta(&prm, &q, &p).unwrap();
                let fact = factorized_lax(&prm, &q, &p, eps).unwrap();
                assert!(
                    direct.sub(&fact).max_norm() < 1e-9 * (1.0 + direct.max_norm()),
                    "factorization mismatch at N={n}"
                );
            }
        }
    }

    #[test]
    fn factorization_epsilon_independent() {
        let prm = params();
        let mut rng = StdRng::seed_from_u64(6);
        let q = random_points(&mut rng, 3);
        let p: Vec<C> = (0..3)
            .map(|_| c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)))
            .collect();
        let a = factorized_lax(&prm, &q, &p, c(0.3, 0.0)).unwrap();
        let b = factorized_lax(&prm, &q, &p, c(0.7, 0.2)).unwrap();
        assert!(a.sub(&b).max_norm() < 1e-9);
    }

    #[test]
    fn factorization_p0_eigenvalues_are_shift_diagonal() {
        let prm = params();
        let mut rng = StdRng::seed_from_u64(7);
        let q = random_points(&mut rng, 4);
        let l = factorized_lax(&prm, &q, &[c(0.0, 0.0); 4], DEFAULT_EPSILON).unwrap();
        let eig = crate::numerics::eigenvalues(&l).unwrap();
        let expected = shift_matrix_diagonal(4, prm.hbar());
        assert!(multiset_match_distance(&eig, &expected) < 1e-9);
    }

    #[test]
    fn b_matrix_single_site() {
        // only the l = j term of the shifted sum survives
        let prm = params();
        let qd = c(1.3, -0.4);
        let b = b_matrix(&prm, &[c(0.2, 0.0)], &[qd]).unwrap();
        let etanu = prm.hbar();
        let expected = qd * etanu.cosh() / etanu.sinh();
        assert!((b[(0, 0)] - expected).norm() < 1e-13);
    }

    #[test]
    fn b_matrix_vanishes_at_rest() {
        // every entry carries a velocity factor, so a frozen configuration
        // has B = 0 (consistent with L constant)
        let prm = params();
        let q = [c(0.0, 0.0), c(1.0, 0.2)];
        let b = b_matrix(&prm, &q, &[c(0.0, 0.0); 2]).unwrap();
        assert!(b.max_norm() < 1e-15);
    }

    #[test]
    fn accelerations_single_particle_vanish() {
        let prm = params();
        let acc = accelerations(&prm, &[c(0.1, 0.0)], &[c(2.0, 0.0)], Regime::Generic).unwrap();
        assert!(acc[0].norm() < 1e-15);
    }

    #[test]
    fn accelerations_zero_velocity_vanish() {
        let prm = params();
        let acc = accelerations(
            &prm,
            &[c(0.0, 0.0), c(1.0, 0.0), c(2.5, 0.0)],
            &[c(0.0, 0.0); 3],
            Regime::Generic,
        )
        .unwrap();
        assert!(acc.iter().all(|a| a.norm() < 1e-15));
    }

    #[test]
    fn generic_rhs_reduces_to_xx_form_at_i_pi_half() {
        // at eta nu = i pi/2 the generic summand equals 4 qdot_j qdot_k / sinh(2 q_jk)
        let prm = RsParams::new(c(1.0, 0.0), c(0.0, std::f64::consts::FRAC_PI_2)).unwrap();
        let q = [c(0.0, 0.0), c(0.9, 0.3)];
        let qdot = [c(1.1, 0.0), c(-0.4, 0.7)];
        let generic = accelerations(&prm, &q, &qdot, Regime::Generic).unwrap();
        let special = accelerations(&prm, &q, &qdot, Regime::XxPoint).unwrap();
        for (g, s) in generic.iter().zip(&special) {
            assert!((g - s).norm() < 1e-11 * (1.0 + s.norm()));
        }
    }

    #[test]
    fn xx_regime_rejects_wrong_coupling() {
        let prm = params();
        assert!(matches!(
            accelerations(&prm, &[c(0.0, 0.0)], &[c(1.0, 0.0)], Regime::XxPoint),
            Err(RsError::RegimeMismatch { .. })
        ));
    }

    #[test]
    fn stationary_flow() {
        let prm = params();
        let state = RsState::from_velocities(
            vec![c(0.0, 0.0), c(1.0, 0.1)],
            vec![c(0.0, 0.0), c(0.0, 0.0)],
        );
        let traj = integrate_flow(
            &prm,
            &state,
            1.0,
            &FlowConfig {
                steps: 100,
                samples: 5,
                regime: Regime::Generic,
            },
        )
        .unwrap();
        let last = traj.samples.last().unwrap();
        assert!((last.q[0] - c(0.0, 0.0)).norm() < 1e-13);
        assert!((last.q[1] - c(1.0, 0.1)).norm() < 1e-13);
    }

    #[test]
    fn flow_is_isospectral_and_conserves_trace() {
        let prm = params();
        let state = RsState::from_velocities(
            vec![c(0.0, 0.2), c(1.4, -0.1)],
            vec![c(0.5, 0.1), c(-0.3, 0.2)],
        );
        let traj = integrate_flow(&prm, &state, 5.0, &FlowConfig::default()).unwrap();
        assert!(
            traj.max_spectral_drift() < 1e-7,
            "drift = {}",
            traj.max_spectral_drift()
        );
        let tr0: C = traj.samples[0].lax_eigenvalues.iter().sum();
        for s in &traj.samples {
            let tr: C = s.lax_eigenvalues.iter().sum();
            assert!((tr - tr0).norm() < 1e-9);
        }
    }

    #[test]
    fn lax_pair_residual_second_order() {
        // finite-difference dL/dt along the flow matches [B, L] to O(dt^2)
        let prm = params();
        let q0 = vec![c(0.0, 0.1), c(1.1, -0.2), c(2.3, 0.3)];
        let v0 = vec![c(0.4, 0.0), c(-0.2, 0.3), c(0.1, -0.1)];
        let mut residuals = Vec::new();
        for &dt in &[1e-3, 5e-4] {
            let state = RsState::from_velocities(q0.clone(), v0.clone());
            let traj = integrate_flow(
                &prm,
                &state,
                2.0 * dt,
                &FlowConfig {
                    steps: 2,
                    samples: 2,
                    regime: Regime::Generic,
                },
            )
            .unwrap();
            let s0 = &traj.samples[0];
            let s1 = &traj.samples[1];
            let s2 = &traj.samples[2];
            let l0 = lax_from_velocities(&prm, &s0.q, &s0.qdot).unwrap();
            let l1 = lax_from_velocities(&prm, &s1.q, &s1.qdot).unwrap();
            let l2 = lax_from_velocities(&prm, &s2.q, &s2.qdot).unwrap();
            let dl = l2.sub(&l0).scale(c(1.0 / (2.0 * dt), 0.0));
            let b = b_matrix(&prm, &s1.q, &s1.qdot).unwrap();
            let bracket = b.commutator(&l1);
            residuals.push(dl.sub(&bracket).max_norm());
        }
        // halving the step should cut the residual by about 4
        let ratio = residuals[0] / residuals[1];
        assert!(
            ratio > 2.5 && ratio < 6.0,
            "residuals {residuals:?}, ratio {ratio}"
        );
    }

    #[test]
    fn collision_detected() {
        let prm = params();
        let q = [c(0.0, 0.0), c(1e-13, 0.0)];
        assert!(matches!(
            lax_from_velocities(&prm, &q, &[c(1.0, 0.0); 2]),
            Err(RsError::SingularConfiguration { .. })
        ));
    }
}
