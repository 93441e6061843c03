//! Dense complex linear algebra and polynomial root kernel.
//!
//! Everything downstream (Lax matrices, transfer operators, determinant
//! identities) runs through this module: pivoted LU for determinants and
//! linear solves, Faddeev-LeVerrier characteristic polynomials, and an
//! Aberth-Ehrlich simultaneous root finder. Matrices are small (size <= 64
//! enforced on the polynomial paths) so dense O(n^3) routines are fine.

use num_complex::Complex64;
use thiserror::Error;

pub type C = Complex64;

/// Serde adapters that (de)serialize complex scalars as `{ "re": .., "im": .. }`
/// objects — the published report/config schema — instead of the `[re, im]`
/// tuples num-complex would emit.
pub mod json_complex {
    use super::C;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    pub(crate) struct Repr {
        pub re: f64,
        pub im: f64,
    }

    pub fn serialize<S: Serializer>(c: &C, s: S) -> Result<S::Ok, S::Error> {
        Repr { re: c.re, im: c.im }.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C, D::Error> {
        let r = Repr::deserialize(d)?;
        Ok(C::new(r.re, r.im))
    }

    pub mod vec {
        use super::*;

        pub fn serialize<S: Serializer>(v: &[C], s: S) -> Result<S::Ok, S::Error> {
            v.iter()
                .map(|c| Repr { re: c.re, im: c.im })
                .collect::<Vec<_>>()
                .serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<C>, D::Error> {
            Ok(Vec::<Repr>::deserialize(d)?
                .into_iter()
                .map(|r| C::new(r.re, r.im))
                .collect())
        }
    }

    pub mod vec_vec {
        use super::*;

        pub fn serialize<S: Serializer>(v: &[Vec<C>], s: S) -> Result<S::Ok, S::Error> {
            v.iter()
                .map(|lvl| lvl.iter().map(|c| Repr { re: c.re, im: c.im }).collect())
                .collect::<Vec<Vec<_>>>()
                .serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<C>>, D::Error> {
            Ok(Vec::<Vec<Repr>>::deserialize(d)?
                .into_iter()
                .map(|lvl| lvl.into_iter().map(|r| C::new(r.re, r.im)).collect())
                .collect())
        }
    }

    pub mod opt {
        use super::*;

        pub fn serialize<S: Serializer>(c: &Option<C>, s: S) -> Result<S::Ok, S::Error> {
            c.map(|c| Repr { re: c.re, im: c.im }).serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<C>, D::Error> {
            Ok(Option::<Repr>::deserialize(d)?.map(|r| C::new(r.re, r.im)))
        }
    }

    pub mod opt_vec {
        use super::*;

        pub fn serialize<S: Serializer>(v: &Option<Vec<C>>, s: S) -> Result<S::Ok, S::Error> {
            v.as_ref()
                .map(|v| {
                    v.iter()
                        .map(|c| Repr { re: c.re, im: c.im })
                        .collect::<Vec<_>>()
                })
                .serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<C>>, D::Error> {
            Ok(Option::<Vec<Repr>>::deserialize(d)?
                .map(|v| v.into_iter().map(|r| C::new(r.re, r.im)).collect()))
        }
    }

    pub mod opt_vec_vec {
        use super::*;

        pub fn serialize<S: Serializer>(v: &Option<Vec<Vec<C>>>, s: S) -> Result<S::Ok, S::Error> {
            v.as_ref()
                .map(|v| {
                    v.iter()
                        .map(|lvl| {
                            lvl.iter()
                                .map(|c| Repr { re: c.re, im: c.im })
                                .collect::<Vec<_>>()
                        })
                        .collect::<Vec<_>>()
                })
                .serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> Result<Option<Vec<Vec<C>>>, D::Error> {
            Ok(Option::<Vec<Vec<Repr>>>::deserialize(d)?.map(|v| {
                v.into_iter()
                    .map(|lvl| lvl.into_iter().map(|r| C::new(r.re, r.im)).collect())
                    .collect()
            }))
        }
    }
}

/// Largest matrix size accepted by `char_poly` / `eigenvalues`.
pub const MAX_EIG_SIZE: usize = 64;

#[derive(Debug, Error)]
pub enum NumericsError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: String, got: String },
    #[error("matrix is numerically singular (pivot {pivot:.3e} below threshold)")]
    Singular { pivot: f64 },
    #[error("zero polynomial has no well-defined roots")]
    ZeroPolynomial,
    #[error("root iteration did not converge within {iters} iterations")]
    NoConvergence { iters: usize, best: Vec<C> },
    #[error("matrix size {size} exceeds the kernel cap {cap}")]
    SizeCap { size: usize, cap: usize },
    #[error("non-finite entry encountered at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
}

pub type Result<T> = std::result::Result<T, NumericsError>;

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![C::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<C>>) -> Self {
        let r = rows.len();
        let c = if r > 0 { rows[0].len() } else { 0 };
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        CMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn diagonal(diag: &[C]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = diag[i];
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C] {
        &self.data
    }

    fn require_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(NumericsError::Dimension {
                expected: "square matrix".into(),
                got: format!("{}x{}", self.rows, self.cols),
            })
        }
    }

    fn require_finite(&self) -> Result<()> {
        for i in 0..self.rows {
            for j in 0..self.cols {
                let z = self[(i, j)];
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(NumericsError::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(())
    }

    pub fn trace(&self) -> C {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == C::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a -= b;
        }
        out
    }

    pub fn scale(&self, s: C) -> CMatrix {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a *= s;
        }
        out
    }

    /// Commutator [A, B] = AB - BA.
    pub fn commutator(&self, other: &CMatrix) -> CMatrix {
        self.mul(other).sub(&other.mul(self))
    }

    /// Max entry magnitude.
    pub fn max_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Submatrix keeping the listed rows and columns in order.
    pub fn submatrix(&self, row_idx: &[usize], col_idx: &[usize]) -> CMatrix {
        CMatrix::from_fn(row_idx.len(), col_idx.len(), |i, j| {
            self[(row_idx[i], col_idx[j])]
        })
    }

    pub fn inverse(&self) -> Result<CMatrix> {
        let n = self.require_square()?;
        let lu = LuDecomposition::new(self)?;
        let mut inv = CMatrix::zeros(n, n);
        let mut e = vec![C::new(0.0, 0.0); n];
        for j in 0..n {
            e[j] = C::new(1.0, 0.0);
            let col = lu.solve(&e)?;
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
            e[j] = C::new(0.0, 0.0);
        }
        Ok(inv)
    }

    /// Crude condition estimate ||A||_max * ||A^-1||_max * n.
    pub fn condition_estimate(&self) -> Result<f64> {
        let inv = self.inverse()?;
        Ok(self.max_norm() * inv.max_norm() * self.rows as f64)
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = C;
    fn index(&self, (i, j): (usize, usize)) -> &C {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C {
        &mut self.data[i * self.cols + j]
    }
}

/// Pivoted LU factorization kept around for repeated solves.
pub struct LuDecomposition {
    lu: CMatrix,
    perm: Vec<usize>,
    sign: f64,
    smallest_pivot: f64,
}

impl LuDecomposition {
    pub fn new(a: &CMatrix) -> Result<Self> {
        let n = a.require_square()?;
        a.require_finite()?;
        // Singularity threshold scales with the largest row norm of A.
        let max_row_norm = (0..n)
            .map(|i| (0..n).map(|j| a[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max);
        let pivot_threshold = 1e-13 * max_row_norm.max(f64::MIN_POSITIVE);

        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let mut smallest_pivot = f64::INFINITY;

        for k in 0..n {
            let (pivot_row, pivot_mag) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            if pivot_mag < pivot_threshold {
                return Err(NumericsError::Singular { pivot: pivot_mag });
            }
            smallest_pivot = smallest_pivot.min(pivot_mag);
            if pivot_row != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(pivot_row, j)];
                    lu[(pivot_row, j)] = tmp;
                }
                perm.swap(k, pivot_row);
                sign = -sign;
            }
            let pivot = lu[(k, k)];
            for i in (k + 1)..n {
                let factor = lu[(i, k)] / pivot;
                lu[(i, k)] = factor;
                for j in (k + 1)..n {
                    let sub = factor * lu[(k, j)];
                    lu[(i, j)] -= sub;
                }
            }
        }
        Ok(LuDecomposition {
            lu,
            perm,
            sign,
            smallest_pivot,
        })
    }

    pub fn det(&self) -> C {
        let n = self.lu.rows();
        let mut d = C::new(self.sign, 0.0);
        for k in 0..n {
            d *= self.lu[(k, k)];
        }
        d
    }

    pub fn smallest_pivot(&self) -> f64 {
        self.smallest_pivot
    }

    pub fn solve(&self, b: &[C]) -> Result<Vec<C>> {
        let n = self.lu.rows();
        if b.len() != n {
            return Err(NumericsError::Dimension {
                expected: format!("rhs of length {n}"),
                got: format!("length {}", b.len()),
            });
        }
        let mut x: Vec<C> = self.perm.iter().map(|&p| b[p]).collect();
        // forward substitution (unit lower triangle)
        for i in 1..n {
            for j in 0..i {
                let s = self.lu[(i, j)] * x[j];
                x[i] -= s;
            }
        }
        // back substitution
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                let s = self.lu[(i, j)] * x[j];
                x[i] -= s;
            }
            x[i] /= self.lu[(i, i)];
        }
        Ok(x)
    }
}

/// Determinant via pivoted elimination. Degenerate (size 0) matrices have det 1.
pub fn lu_det(a: &CMatrix) -> Result<C> {
    let n = a.require_square()?;
    if n == 0 {
        return Ok(C::new(1.0, 0.0));
    }
    // A singular matrix has determinant 0; the LU error only signals that
    // pivots underflowed, which for the determinant is an answer, not a failure.
    match LuDecomposition::new(a) {
        Ok(lu) => Ok(lu.det()),
        Err(NumericsError::Singular { .. }) => Ok(C::new(0.0, 0.0)),
        Err(e) => Err(e),
    }
}

/// Solve A x = b, rejecting numerically singular systems.
pub fn solve_linear(a: &CMatrix, b: &[C]) -> Result<Vec<C>> {
    LuDecomposition::new(a)?.solve(b)
}

/// Complex polynomial in ascending-degree coefficient order.
#[derive(Debug, Clone, PartialEq)]
pub struct CPoly {
    coeffs: Vec<C>,
}

impl CPoly {
    /// Build from ascending coefficients, trimming (numerically) zero leaders.
    pub fn new(coeffs: Vec<C>) -> Self {
        let mut p = CPoly { coeffs };
        p.trim();
        p
    }

    pub fn zero() -> Self {
        CPoly {
            coeffs: vec![C::new(0.0, 0.0)],
        }
    }

    pub fn constant(c: C) -> Self {
        CPoly { coeffs: vec![c] }
    }

    fn trim(&mut self) {
        let max_mag = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let cutoff = max_mag * 1e-300;
        while self.coeffs.len() > 1 && self.coeffs.last().unwrap().norm() <= cutoff {
            self.coeffs.pop();
        }
        if self.coeffs.is_empty() {
            self.coeffs.push(C::new(0.0, 0.0));
        }
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.norm() == 0.0)
    }

    /// Horner evaluation.
    pub fn eval(&self, z: C) -> C {
        let mut acc = C::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    pub fn derivative(&self) -> CPoly {
        if self.coeffs.len() <= 1 {
            return CPoly::zero();
        }
        CPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * C::new(k as f64, 0.0))
                .collect(),
        )
    }

    pub fn mul(&self, other: &CPoly) -> CPoly {
        let mut out = vec![C::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        CPoly::new(out)
    }

    pub fn sub(&self, other: &CPoly) -> CPoly {
        let len = self.coeffs.len().max(other.coeffs.len());
        let get = |v: &[C], k: usize| v.get(k).copied().unwrap_or(C::new(0.0, 0.0));
        CPoly::new(
            (0..len)
                .map(|k| get(&self.coeffs, k) - get(&other.coeffs, k))
                .collect(),
        )
    }

    /// Max coefficient magnitude; the scale used in residual normalization.
    pub fn coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// Characteristic polynomial det(lambda*I - A) by Faddeev-LeVerrier,
/// returned in ascending-degree order (monic, degree = size of A).
pub fn char_poly(a: &CMatrix) -> Result<CPoly> {
    let n = a.require_square()?;
    if n > MAX_EIG_SIZE {
        return Err(NumericsError::SizeCap {
            size: n,
            cap: MAX_EIG_SIZE,
        });
    }
    a.require_finite()?;
    // c[k] is the coefficient of lambda^(n-k); c[0] = 1.
    let mut coeffs_desc = vec![C::new(0.0, 0.0); n + 1];
    coeffs_desc[0] = C::new(1.0, 0.0);
    // M_1 = I; c_k = -tr(A M_k)/k; M_{k+1} = A M_k + c_k I
    let mut m = CMatrix::identity(n);
    for k in 1..=n {
        let am = a.mul(&m);
        let c = -am.trace() / C::new(k as f64, 0.0);
        coeffs_desc[k] = c;
        if k < n {
            m = am;
            for i in 0..n {
                m[(i, i)] += c;
            }
        }
    }
    let mut asc: Vec<C> = coeffs_desc.into_iter().rev().collect();
    // keep the monic leading term exactly 1
    let last = asc.len() - 1;
    asc[last] = C::new(1.0, 0.0);
    Ok(CPoly { coeffs: asc })
}

/// Aberth-Ehrlich simultaneous iteration for all roots with multiplicity.
pub fn poly_roots(p: &CPoly) -> Result<Vec<C>> {
    if p.is_zero() {
        return Err(NumericsError::ZeroPolynomial);
    }
    let mut coeffs = p.coeffs().to_vec();
    // roots at the origin: strip low-order zero coefficients
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut zero_roots = 0usize;
    while coeffs.len() > 1 && coeffs[0].norm() <= scale * 1e-300 {
        coeffs.remove(0);
        zero_roots += 1;
    }
    let work = CPoly { coeffs };
    let deg = work.degree();
    let mut roots = vec![C::new(0.0, 0.0); zero_roots];
    if deg == 0 {
        if zero_roots == 0 {
            return Err(NumericsError::ZeroPolynomial);
        }
        return Ok(roots);
    }

    let lead = *work.coeffs().last().unwrap();
    // Cauchy-style inclusion radius for initial guesses.
    let radius = 1.0
        + work
            .coeffs()
            .iter()
            .take(deg)
            .map(|c| (c / lead).norm())
            .fold(0.0, f64::max);
    let deriv = work.derivative();
    let mut z: Vec<C> = (0..deg)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * (k as f64) / (deg as f64) + 0.4;
            C::from_polar(radius, theta)
        })
        .collect();

    let max_iters = 400;
    let mut converged = vec![false; deg];
    for _ in 0..max_iters {
        let mut all_done = true;
        for i in 0..deg {
            if converged[i] {
                continue;
            }
            let pv = work.eval(z[i]);
            // backward-error stop: |p(z)| small relative to the evaluated scale
            let eval_scale: f64 = work
                .coeffs()
                .iter()
                .enumerate()
                .map(|(k, c)| c.norm() * z[i].norm().powi(k as i32))
                .sum();
            if pv.norm() <= 1e-14 * eval_scale.max(f64::MIN_POSITIVE) {
                converged[i] = true;
                continue;
            }
            all_done = false;
            let dv = deriv.eval(z[i]);
            let newton = if dv.norm() > 0.0 {
                pv / dv
            } else {
                C::new(1e-8, 1e-8)
            };
            let mut repulse = C::new(0.0, 0.0);
            for j in 0..deg {
                if j != i {
                    let diff = z[i] - z[j];
                    if diff.norm() > 1e-300 {
                        repulse += C::new(1.0, 0.0) / diff;
                    }
                }
            }
            let denom = C::new(1.0, 0.0) - newton * repulse;
            let step = if denom.norm() > 1e-300 {
                newton / denom
            } else {
                newton
            };
            z[i] -= step;
        }
        if all_done {
            break;
        }
    }

    // Contract check: |p(root)| / ||p|| <= 1e-11 with a mild growth allowance
    // away from the unit disk.
    let pnorm = work.coeff_norm();
    for &zi in &z {
        let growth = zi.norm().max(1.0).powi(deg as i32);
        if work.eval(zi).norm() > 1e-11 * pnorm * growth {
            return Err(NumericsError::NoConvergence {
                iters: max_iters,
                best: z,
            });
        }
    }
    roots.extend(z);
    Ok(roots)
}

/// Eigenvalue multiset of a square matrix via its characteristic polynomial.
pub fn eigenvalues(a: &CMatrix) -> Result<Vec<C>> {
    let n = a.require_square()?;
    if n == 0 {
        return Ok(vec![]);
    }
    let p = char_poly(a)?;
    let mut roots = poly_roots(&p)?;
    // one Newton polish pass on the characteristic polynomial
    let dp = p.derivative();
    for z in roots.iter_mut() {
        for _ in 0..3 {
            let pv = p.eval(*z);
            let dv = dp.eval(*z);
            if dv.norm() > 1e-300 {
                let step = pv / dv;
                if step.norm() < 0.5 * (1.0 + z.norm()) {
                    *z -= step;
                }
            }
        }
    }
    // Newton polish on det(A - lambda I) itself, which is immune to the
    // conditioning of the characteristic-polynomial coefficients:
    // d/d lambda log det(A - lambda I) = -tr((A - lambda I)^{-1}),
    // so the Newton step is lambda += 1 / tr((A - lambda I)^{-1}).
    for z in roots.iter_mut() {
        for _ in 0..4 {
            let mut shifted = a.clone();
            for i in 0..n {
                shifted[(i, i)] -= *z;
            }
            let lu = match LuDecomposition::new(&shifted) {
                Ok(lu) => lu,
                Err(_) => break, // numerically singular: already an eigenvalue
            };
            let mut trace_inv = C::new(0.0, 0.0);
            let mut ok = true;
            for j in 0..n {
                let mut e = vec![C::new(0.0, 0.0); n];
                e[j] = C::new(1.0, 0.0);
                match lu.solve(&e) {
                    Ok(col) => trace_inv += col[j],
                    Err(_) => {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok || trace_inv.norm() < 1e-300 {
                break;
            }
            let step = C::new(1.0, 0.0) / trace_inv;
            if step.norm() > 0.1 * (1.0 + z.norm()) {
                break; // untrusted step: likely a clustered eigenvalue
            }
            *z += step;
            if step.norm() < 1e-15 * (1.0 + z.norm()) {
                break;
            }
        }
    }
    sort_complex(&mut roots);
    Ok(roots)
}

/// Lexicographic (re, im) sort used as the canonical multiset order.
pub fn sort_complex(v: &mut [C]) {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// Distance between two complex multisets: both are sorted by (re, im),
/// then matched greedily by minimal distance. Returns the max matched
/// distance (infinity on size mismatch).
pub fn multiset_match_distance(a: &[C], b: &[C]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    sort_complex(&mut xs);
    sort_complex(&mut ys);
    let mut used = vec![false; ys.len()];
    let mut max_dist: f64 = 0.0;
    for x in &xs {
        let mut best = None;
        let mut best_d = f64::INFINITY;
        for (j, y) in ys.iter().enumerate() {
            if !used[j] {
                let d = (x - y).norm();
                if d < best_d {
                    best_d = d;
                    best = Some(j);
                }
            }
        }
        if let Some(j) = best {
            used[j] = true;
            max_dist = max_dist.max(best_d);
        }
    }
    max_dist
}
