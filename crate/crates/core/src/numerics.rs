//! Dense complex linear algebra for the 4×4 state space and its 16×16
//! superoperator space.
//!
//! Everything here is hand-rolled and specialized to small matrices:
//! cyclic Jacobi for Hermitian eigenproblems, Hessenberg + shifted QR for
//! general eigenvalues, and Padé scaling-and-squaring for the exponential.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Numerical thresholds shared across the crate. The defaults are the
/// contract values; callers may loosen or tighten them.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Maximum entrywise |m − m†| accepted as Hermitian input.
    pub hermiticity: f64,
    /// Allowed |tr ρ − 1| for a state to count as normalized.
    pub trace: f64,
    /// Most negative eigenvalue a density matrix may carry.
    pub positivity: f64,
    /// Integrator relative tolerance.
    pub rtol: f64,
    /// Integrator absolute tolerance.
    pub atol: f64,
    /// Trace drift along a trajectory that counts as integration failure.
    pub trace_failure: f64,
    /// ρρ̃ eigenvalues above this (but negative) are clamped to zero.
    pub concurrence_clamp: f64,
    /// ρρ̃ eigenvalues below this are rejected.
    pub concurrence_error: f64,
    /// Largest imaginary part tolerated in the ρρ̃ spectrum.
    pub concurrence_imag: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermiticity: 1e-10,
            trace: 1e-10,
            positivity: -1e-9,
            rtol: 1e-10,
            atol: 1e-12,
            trace_failure: 1e-8,
            concurrence_clamp: -1e-10,
            concurrence_error: -1e-8,
            concurrence_imag: 1e-9,
        }
    }
}

/// Square complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![ZERO; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    /// Builds from row-major entries; panics if the length is not a square.
    pub fn from_rows(n: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), n * n, "expected {} entries", n * n);
        Self { n, data }
    }

    pub fn from_real(n: usize, data: &[f64]) -> Self {
        Self::from_rows(n, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn diag(values: &[C64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let v: Vec<C64> = values.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::diag(&v)
    }

    /// |ψ⟩⟨φ|
    pub fn outer(ket: &[C64], bra: &[C64]) -> Self {
        assert_eq!(ket.len(), bra.len());
        Self::from_fn(ket.len(), |i, j| ket[i] * bra[j].conj())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self { n: self.n, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { n: self.n, data: self.data.iter().map(|&z| z * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self { n: self.n, data: self.data.iter().map(|&z| z * s).collect() }
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.n).map(|i| self[(i, i)]).collect()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Induced 1-norm (maximum absolute column sum).
    pub fn norm_1(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// max entrywise |m − m†|
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.n {
            for j in i..self.n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.n, other.n);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn mat_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.n);
        (0..self.n)
            .map(|i| {
                let row = &self.data[i * self.n..(i + 1) * self.n];
                row.iter().zip(v).map(|(a, b)| a * b).sum()
            })
            .collect()
    }

    /// Kronecker product self ⊗ other.
    pub fn kron(&self, other: &Self) -> Self {
        let (n, m) = (self.n, other.n);
        Self::from_fn(n * m, |i, j| self[(i / m, j / m)] * other[(i % m, j % m)])
    }

    /// Column `j` as a vector.
    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.n).map(|i| self[(i, j)]).collect()
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.n + j]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n);
        let n = self.n;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n);
        CMatrix {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n);
        CMatrix {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix({}x{})", self.n, self.n)?;
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n)
                .map(|j| {
                    let z = self[(i, j)];
                    format!("{:+.6e}{:+.6e}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Eigenvalues in ascending order with matching orthonormal eigenvector
/// columns.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }
}

pub fn hermitian_eigen(m: &CMatrix) -> Result<HermitianEigen> {
    hermitian_eigen_tol(m, Tolerances::default().hermiticity)
}

/// Cyclic complex Jacobi.
pub fn hermitian_eigen_tol(m: &CMatrix, hermiticity_tol: f64) -> Result<HermitianEigen> {
    if !m.is_finite() {
        return Err(Error::NonFinite("hermitian_eigen input"));
    }
    let defect = m.hermiticity_defect();
    if defect > hermiticity_tol {
        return Err(Error::NotHermitian { defect, tol: hermiticity_tol });
    }
    let n = m.dim();
    // Symmetrize so the rotations see an exactly Hermitian matrix.
    let mut a = CMatrix::from_fn(n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)].conj()));
    let mut v = CMatrix::identity(n);
    let scale = a.max_abs().max(f64::MIN_POSITIVE);

    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum();
        if off.sqrt() <= 1e-17 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= 1e-300 {
                    continue;
                }
                let phase = apq / mag;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // J = [[c, s], [-s·e^{-iφ}, c·e^{-iφ}]] on the (p, q) plane.
                let jpp = C64::new(c, 0.0);
                let jpq = C64::new(s, 0.0);
                let jqp = -s * phase.conj();
                let jqq = c * phase.conj();
                // a ← a·J (columns p, q)
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * jpp + akq * jqp;
                    a[(k, q)] = akp * jpq + akq * jqq;
                }
                // a ← J†·a (rows p, q)
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
                    a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * jpp + vkq * jqp;
                    v[(k, q)] = vkp * jpq + vkq * jqq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, |r, c| v[(r, order[c])]);
    Ok(HermitianEigen { values, vectors })
}

/// Eigenvalues of an arbitrary finite square matrix via Householder
/// reduction to Hessenberg form followed by Wilkinson-shifted complex QR.
/// Returned in no particular order.
pub fn general_eigenvalues(m: &CMatrix) -> Result<Vec<C64>> {
    if !m.is_finite() {
        return Err(Error::NonFinite("general_eigenvalues input"));
    }
    let n = m.dim();
    let mut h = m.clone();
    hessenberg_in_place(&mut h);

    let mut eig = vec![ZERO; n];
    let mut hi = n;
    let mut iter_since_deflation = 0usize;
    let mut total_iter = 0usize;
    let eps = f64::EPSILON;

    while hi > 0 {
        if hi == 1 {
            eig[0] = h[(0, 0)];
            break;
        }
        // find active block [lo, hi)
        let mut lo = hi - 1;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let diag = h[(lo, lo)].norm() + h[(lo - 1, lo - 1)].norm();
            if sub <= eps * diag || sub < f64::MIN_POSITIVE {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi - 1 {
            eig[hi - 1] = h[(hi - 1, hi - 1)];
            hi -= 1;
            iter_since_deflation = 0;
            continue;
        }

        total_iter += 1;
        iter_since_deflation += 1;
        if total_iter > 200 * n {
            return Err(Error::NoConvergence("general_eigenvalues"));
        }

        let shift = if iter_since_deflation % 11 == 10 {
            // exceptional shift to break cycles
            h[(hi - 1, hi - 1)] + 0.75 * h[(hi - 1, hi - 2)].norm()
        } else {
            wilkinson_shift(
                h[(hi - 2, hi - 2)],
                h[(hi - 2, hi - 1)],
                h[(hi - 1, hi - 2)],
                h[(hi - 1, hi - 1)],
            )
        };

        // QR step on the active block: H − μI = QR, H ← RQ + μI.
        for k in lo..hi {
            h[(k, k)] -= shift;
        }
        let mut rotations = Vec::with_capacity(hi - lo - 1);
        for k in lo..hi - 1 {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            // rows k, k+1 ← G·rows
            for j in k..hi {
                let x = h[(k, j)];
                let y = h[(k + 1, j)];
                h[(k, j)] = c * x + s * y;
                h[(k + 1, j)] = -s.conj() * x + c * y;
            }
            rotations.push((c, s));
        }
        for (idx, &(c, s)) in rotations.iter().enumerate() {
            let k = lo + idx;
            // cols k, k+1 ← cols·G†
            for i in lo..(k + 2).min(hi) {
                let x = h[(i, k)];
                let y = h[(i, k + 1)];
                h[(i, k)] = x * c + y * s.conj();
                h[(i, k + 1)] = -x * s + y * c;
            }
        }
        for k in lo..hi {
            h[(k, k)] += shift;
        }
    }
    if eig.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("general_eigenvalues output"));
    }
    Ok(eig)
}

/// Rotation with real cosine `c` and complex sine `s` such that
/// [c s; -s̄ c]·[a; b] = [r; 0].
fn givens(a: C64, b: C64) -> (C64, C64) {
    let bn = b.norm();
    if bn == 0.0 {
        return (ONE, ZERO);
    }
    let an = a.norm();
    if an == 0.0 {
        return (ZERO, b.conj() / bn);
    }
    let r = an.hypot(bn);
    let c = an / r;
    let s = (a / an) * b.conj() / r;
    (C64::new(c, 0.0), s)
}

fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr * 0.25 - det).sqrt();
    let half = tr * 0.5;
    let l1 = half + disc;
    let l2 = half - disc;
    if (l1 - d).norm() < (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

fn hessenberg_in_place(h: &mut CMatrix) {
    let n = h.dim();
    for k in 0..n.saturating_sub(2) {
        let x: Vec<C64> = ((k + 1)..n).map(|i| h[(i, k)]).collect();
        let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let phase = if x[0].norm() == 0.0 { ONE } else { x[0] / x[0].norm() };
        let alpha = -phase * xnorm;
        let mut v = x.clone();
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in &mut v {
            *z /= vnorm;
        }
        // H ← (I − 2vv†) H
        for j in 0..n {
            let dot: C64 = v.iter().enumerate().map(|(r, vi)| vi.conj() * h[(k + 1 + r, j)]).sum();
            for (r, vi) in v.iter().enumerate() {
                h[(k + 1 + r, j)] -= 2.0 * vi * dot;
            }
        }
        // H ← H (I − 2vv†)
        for i in 0..n {
            let dot: C64 = v.iter().enumerate().map(|(r, vi)| h[(i, k + 1 + r)] * vi).sum();
            for (r, vi) in v.iter().enumerate() {
                h[(i, k + 1 + r)] -= 2.0 * dot * vi.conj();
            }
        }
        for i in (k + 2)..n {
            h[(i, k)] = ZERO;
        }
    }
}

/// Solves A·X = B by LU with partial pivoting.
pub fn solve(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    let n = a.dim();
    assert_eq!(b.dim(), n);
    let mut lu = a.clone();
    let mut x = b.clone();
    for k in 0..n {
        let pivot = (k..n)
            .max_by(|&i, &j| lu[(i, k)].norm().total_cmp(&lu[(j, k)].norm()))
            .unwrap_or(k);
        if lu[(pivot, k)].norm() == 0.0 {
            return Err(Error::Singular);
        }
        if pivot != k {
            for j in 0..n {
                let t = lu[(k, j)];
                lu[(k, j)] = lu[(pivot, j)];
                lu[(pivot, j)] = t;
                let t = x[(k, j)];
                x[(k, j)] = x[(pivot, j)];
                x[(pivot, j)] = t;
            }
        }
        let inv = ONE / lu[(k, k)];
        for i in (k + 1)..n {
            let f = lu[(i, k)] * inv;
            if f == ZERO {
                continue;
            }
            for j in k..n {
                let t = lu[(k, j)];
                lu[(i, j)] -= f * t;
            }
            for j in 0..n {
                let t = x[(k, j)];
                x[(i, j)] -= f * t;
            }
        }
    }
    for k in (0..n).rev() {
        let inv = ONE / lu[(k, k)];
        for j in 0..n {
            let mut s = x[(k, j)];
            for i in (k + 1)..n {
                s -= lu[(k, i)] * x[(i, j)];
            }
            x[(k, j)] = s * inv;
        }
    }
    Ok(x)
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// 1-norm bound below which the [13/13] Padé approximant is accurate to
/// double precision without scaling.
const THETA13: f64 = 5.371920351148152;

/// Matrix exponential by scaling and squaring with a [13/13] Padé core.
pub fn expm(m: &CMatrix) -> Result<CMatrix> {
    if !m.is_finite() {
        return Err(Error::NonFinite("expm input"));
    }
    let n = m.dim();
    let norm = m.norm_1();
    if norm == 0.0 {
        return Ok(CMatrix::identity(n));
    }
    let squarings = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    if squarings > 1000 {
        return Err(Error::Overflow("expm: norm too large for scaling"));
    }
    let a = m.scale_real(0.5_f64.powi(squarings));

    let id = CMatrix::identity(n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = &PADE13;
    let lin = |c6: f64, c4: f64, c2: f64, c0: f64| {
        let mut out = a6.scale_real(c6);
        out = &out + &a4.scale_real(c4);
        out = &out + &a2.scale_real(c2);
        &out + &id.scale_real(c0)
    };
    let u_inner = &a6 * &lin(b[13], b[11], b[9], 0.0);
    let u_poly = &u_inner + &lin(b[7], b[5], b[3], b[1]);
    let u = &a * &u_poly;
    let v_inner = &a6 * &lin(b[12], b[10], b[8], 0.0);
    let v = &v_inner + &lin(b[6], b[4], b[2], b[0]);

    let p = &v + &u;
    let q = &v - &u;
    let mut r = solve(&q, &p)?;
    for _ in 0..squarings {
        r = &r * &r;
        if !r.is_finite() {
            return Err(Error::Overflow("expm: squaring overflowed"));
        }
    }
    if !r.is_finite() {
        return Err(Error::Overflow("expm: result not finite"));
    }
    Ok(r)
}

/// Column-stacking vectorization: vec(ρ)[j + n·k] = ρ[j][k].
pub fn vectorize(m: &CMatrix) -> Vec<C64> {
    let n = m.dim();
    let mut v = Vec::with_capacity(n * n);
    for k in 0..n {
        for j in 0..n {
            v.push(m[(j, k)]);
        }
    }
    v
}

pub fn devectorize(v: &[C64]) -> CMatrix {
    let n = (v.len() as f64).sqrt().round() as usize;
    assert_eq!(n * n, v.len(), "vector length {} is not a square", v.len());
    CMatrix::from_fn(n, |j, k| v[j + n * k])
}

/// Superoperator of ρ ↦ A·ρ·B under column stacking: Bᵀ ⊗ A.
pub fn sandwich_superop(a: &CMatrix, b: &CMatrix) -> CMatrix {
    b.transpose().kron(a)
}
