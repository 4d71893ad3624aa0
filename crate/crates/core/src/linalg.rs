//! Dense 4x4 complex linear algebra: products, pivoted LU solves, and a
//! complex Schur decomposition (Householder Hessenberg reduction followed by
//! Wilkinson-shifted QR sweeps) used for eigenvalues and eigenvectors.

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::Real;

pub const DIM: usize = 4;

pub type CVec4<T> = [Complex<T>; DIM];
pub type CMat4<T> = [[Complex<T>; DIM]; DIM];

pub fn zeros<T: Real>() -> CMat4<T> {
    [[Complex::zero(); DIM]; DIM]
}

pub fn identity<T: Real>() -> CMat4<T> {
    let mut m = zeros();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Complex::one();
    }
    m
}

pub fn matmul<T: Real>(a: &CMat4<T>, b: &CMat4<T>) -> CMat4<T> {
    let mut c = zeros();
    for i in 0..DIM {
        for k in 0..DIM {
            let aik = a[i][k];
            for j in 0..DIM {
                c[i][j] = c[i][j] + aik * b[k][j];
            }
        }
    }
    c
}

pub fn matvec<T: Real>(a: &CMat4<T>, v: &CVec4<T>) -> CVec4<T> {
    let mut out = [Complex::zero(); DIM];
    for (o, row) in out.iter_mut().zip(a) {
        *o = row
            .iter()
            .zip(v)
            .fold(Complex::zero(), |acc, (x, y)| acc + x * y);
    }
    out
}

pub fn adjoint<T: Real>(a: &CMat4<T>) -> CMat4<T> {
    let mut out = zeros();
    for i in 0..DIM {
        for j in 0..DIM {
            out[j][i] = a[i][j].conj();
        }
    }
    out
}

pub fn sub<T: Real>(a: &CMat4<T>, b: &CMat4<T>) -> CMat4<T> {
    let mut out = *a;
    for i in 0..DIM {
        for j in 0..DIM {
            out[i][j] = out[i][j] - b[i][j];
        }
    }
    out
}

pub fn frobenius_norm<T: Real>(a: &CMat4<T>) -> T {
    a.iter()
        .flatten()
        .fold(T::zero(), |acc, z| acc + z.norm_sqr())
        .sqrt()
}

/// Maximum absolute column sum.
pub fn one_norm<T: Real>(a: &CMat4<T>) -> T {
    (0..DIM)
        .map(|j| (0..DIM).fold(T::zero(), |acc, i| acc + a[i][j].norm()))
        .fold(T::zero(), T::max)
}

pub fn vec_norm<T: Real>(v: &CVec4<T>) -> T {
    v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
}

/// Builds a matrix whose columns are the given vectors.
pub fn from_columns<T: Real>(cols: &[CVec4<T>; DIM]) -> CMat4<T> {
    let mut m = zeros();
    for (j, col) in cols.iter().enumerate() {
        for i in 0..DIM {
            m[i][j] = col[i];
        }
    }
    m
}

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct Lu<T: Real> {
    lu: CMat4<T>,
    perm: [usize; DIM],
}

impl<T: Real> Lu<T> {
    pub fn new(a: &CMat4<T>) -> Result<Self> {
        let mut lu = *a;
        let mut perm = [0, 1, 2, 3];
        for k in 0..DIM {
            let pivot = (k..DIM)
                .max_by(|&i, &j| lu[i][k].norm().partial_cmp(&lu[j][k].norm()).unwrap())
                .unwrap();
            if lu[pivot][k].norm() == T::zero() || !lu[pivot][k].norm().is_finite() {
                return Err(Error::Singular);
            }
            lu.swap(k, pivot);
            perm.swap(k, pivot);
            for i in k + 1..DIM {
                let factor = lu[i][k] / lu[k][k];
                lu[i][k] = factor;
                for j in k + 1..DIM {
                    lu[i][j] = lu[i][j] - factor * lu[k][j];
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn solve(&self, b: &CVec4<T>) -> CVec4<T> {
        let mut x = [Complex::zero(); DIM];
        for i in 0..DIM {
            x[i] = b[self.perm[i]];
        }
        for i in 0..DIM {
            for j in 0..i {
                x[i] = x[i] - self.lu[i][j] * x[j];
            }
        }
        for i in (0..DIM).rev() {
            for j in i + 1..DIM {
                x[i] = x[i] - self.lu[i][j] * x[j];
            }
            x[i] = x[i] / self.lu[i][i];
        }
        x
    }

    pub fn inverse(&self) -> CMat4<T> {
        let mut cols = [[Complex::zero(); DIM]; DIM];
        for (j, col) in cols.iter_mut().enumerate() {
            let mut e = [Complex::zero(); DIM];
            e[j] = Complex::one();
            *col = self.solve(&e);
        }
        from_columns(&cols)
    }
}

/// One-norm condition number; infinite for exactly singular input.
pub fn condition_number<T: Real>(a: &CMat4<T>) -> T {
    match Lu::new(a) {
        Ok(lu) => one_norm(a) * one_norm(&lu.inverse()),
        Err(_) => T::infinity(),
    }
}

/// Complex Schur form `A = Z T Z^H` with `T` upper triangular.
#[derive(Debug, Clone)]
pub struct Schur<T: Real> {
    pub t: CMat4<T>,
    pub z: CMat4<T>,
}

const MAX_SWEEPS: usize = 60 * DIM;

impl<T: Real> Schur<T> {
    pub fn new(a: &CMat4<T>) -> Result<Self> {
        if a.iter()
            .flatten()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::Domain("non-finite matrix entry".into()));
        }
        let (mut h, mut z) = hessenberg(a);
        let scale = frobenius_norm(a);
        if scale == T::zero() {
            return Ok(Self { t: h, z });
        }
        let eps = T::epsilon();
        let mut hi = DIM - 1;
        let mut iter = 0usize;
        let mut total = 0usize;
        while hi > 0 {
            // Deflate negligible subdiagonal entries.
            let mut lo = hi;
            while lo > 0 {
                let off = h[lo][lo - 1].norm();
                let diag = h[lo][lo].norm() + h[lo - 1][lo - 1].norm();
                let reference = if diag == T::zero() { scale } else { diag };
                if off <= eps * reference {
                    h[lo][lo - 1] = Complex::zero();
                    break;
                }
                lo -= 1;
            }
            if lo == hi {
                hi -= 1;
                iter = 0;
                continue;
            }
            iter += 1;
            total += 1;
            if total > MAX_SWEEPS {
                return Err(Error::Singular);
            }
            let shift = if iter % 11 == 0 {
                // Exceptional shift to break cycles.
                h[hi][hi] + Complex::from(h[hi][hi - 1].norm() * T::lit(0.75))
            } else {
                wilkinson_shift(h[hi - 1][hi - 1], h[hi - 1][hi], h[hi][hi - 1], h[hi][hi])
            };
            qr_sweep(&mut h, &mut z, lo, hi, shift);
        }
        // Clear the strictly lower triangle left over from rounding.
        for i in 1..DIM {
            for j in 0..i {
                h[i][j] = Complex::zero();
            }
        }
        Ok(Self { t: h, z })
    }

    pub fn eigenvalues(&self) -> CVec4<T> {
        [self.t[0][0], self.t[1][1], self.t[2][2], self.t[3][3]]
    }

    /// Right eigenvectors (one per diagonal entry of `T`), normalized so that
    /// the largest-magnitude component equals one.
    pub fn eigenvectors(&self) -> [CVec4<T>; DIM] {
        let t = &self.t;
        let small = T::epsilon() * frobenius_norm(t).max(T::min_positive_value());
        let mut out = [[Complex::zero(); DIM]; DIM];
        for (k, vec) in out.iter_mut().enumerate() {
            let lambda = t[k][k];
            let mut y = [Complex::zero(); DIM];
            y[k] = Complex::one();
            for j in (0..k).rev() {
                let mut acc: Complex<T> = Complex::zero();
                for (l, yl) in y.iter().enumerate().take(k + 1).skip(j + 1) {
                    acc = acc + t[j][l] * yl;
                }
                let mut denom = t[j][j] - lambda;
                if denom.norm() < small {
                    denom = Complex::from(small);
                }
                y[j] = -acc / denom;
            }
            *vec = normalize_max(&matvec(&self.z, &y));
        }
        out
    }
}

/// Eigenvalues of a general complex 4x4 matrix.
pub fn eigenvalues<T: Real>(a: &CMat4<T>) -> Result<CVec4<T>> {
    Ok(Schur::new(a)?.eigenvalues())
}

/// Eigenvalues with matching eigenvectors (largest component scaled to one).
pub fn eigen<T: Real>(a: &CMat4<T>) -> Result<(CVec4<T>, [CVec4<T>; DIM])> {
    let s = Schur::new(a)?;
    Ok((s.eigenvalues(), s.eigenvectors()))
}

/// Scales `v` so its largest-magnitude component is exactly one.
pub fn normalize_max<T: Real>(v: &CVec4<T>) -> CVec4<T> {
    let pivot = v
        .iter()
        .copied()
        .max_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap())
        .unwrap();
    if pivot.norm() == T::zero() {
        return *v;
    }
    let mut out = v.map(|z| z / pivot);
    // Remove rounding from the pivot itself.
    for z in out.iter_mut() {
        if (*z - Complex::one()).norm() <= T::epsilon() {
            *z = Complex::one();
            break;
        }
    }
    out
}

fn hessenberg<T: Real>(a: &CMat4<T>) -> (CMat4<T>, CMat4<T>) {
    let mut h = *a;
    let mut q = identity();
    for k in 0..DIM - 2 {
        let alpha_norm = (k + 1..DIM)
            .fold(T::zero(), |acc, i| acc + h[i][k].norm_sqr())
            .sqrt();
        if alpha_norm == T::zero() {
            continue;
        }
        let x0 = h[k + 1][k];
        let phase = if x0.norm() == T::zero() {
            Complex::one()
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * alpha_norm;
        let mut v = [Complex::zero(); DIM];
        for i in k + 1..DIM {
            v[i] = h[i][k];
        }
        v[k + 1] = v[k + 1] - alpha;
        let vnorm2 = v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr());
        if vnorm2 == T::zero() {
            continue;
        }
        let two = T::lit(2.0) / vnorm2;
        // H <- (I - 2 v v^H / v^H v) H
        for j in 0..DIM {
            let mut dot = Complex::zero();
            for i in k + 1..DIM {
                dot = dot + v[i].conj() * h[i][j];
            }
            let dot = dot * two;
            for i in k + 1..DIM {
                h[i][j] = h[i][j] - v[i] * dot;
            }
        }
        // H <- H (I - 2 v v^H / v^H v), Q likewise.
        for m in [&mut h, &mut q] {
            for row in m.iter_mut() {
                let mut dot = Complex::zero();
                for i in k + 1..DIM {
                    dot = dot + row[i] * v[i];
                }
                let dot = dot * two;
                for i in k + 1..DIM {
                    row[i] = row[i] - dot * v[i].conj();
                }
            }
        }
        for i in k + 2..DIM {
            h[i][k] = Complex::zero();
        }
    }
    (h, q)
}

fn wilkinson_shift<T: Real>(
    a: Complex<T>,
    b: Complex<T>,
    c: Complex<T>,
    d: Complex<T>,
) -> Complex<T> {
    let half = T::lit(0.5);
    let mean = (a + d) * half;
    let delta = (a - d) * half;
    let disc = (delta * delta + b * c).sqrt();
    let r1 = mean + disc;
    let r2 = mean - disc;
    if (r1 - d).norm() <= (r2 - d).norm() {
        r1
    } else {
        r2
    }
}

/// Givens rotation `[c s; -conj(s) c]` mapping `(a, b)` to `(r, 0)`.
fn givens<T: Real>(a: Complex<T>, b: Complex<T>) -> (T, Complex<T>) {
    let na = a.norm();
    let r = (na * na + b.norm_sqr()).sqrt();
    if r == T::zero() {
        return (T::one(), Complex::zero());
    }
    if na == T::zero() {
        return (T::zero(), Complex::one());
    }
    (na / r, (a / na) * b.conj() / r)
}

fn qr_sweep<T: Real>(h: &mut CMat4<T>, z: &mut CMat4<T>, lo: usize, hi: usize, shift: Complex<T>) {
    for i in lo..=hi {
        h[i][i] = h[i][i] - shift;
    }
    let mut rotations = [(T::one(), Complex::zero()); DIM];
    for k in lo..hi {
        let (c, s) = givens(h[k][k], h[k + 1][k]);
        rotations[k] = (c, s);
        for j in k..DIM {
            let x = h[k][j];
            let y = h[k + 1][j];
            h[k][j] = x * c + s * y;
            h[k + 1][j] = -s.conj() * x + y * c;
        }
    }
    for (k, &(c, s)) in rotations.iter().enumerate().take(hi).skip(lo) {
        let rows = (k + 2).min(hi) + 1;
        for row in h.iter_mut().take(rows) {
            let x = row[k];
            let y = row[k + 1];
            row[k] = x * c + y * s.conj();
            row[k + 1] = -x * s + y * c;
        }
        for row in z.iter_mut() {
            let x = row[k];
            let y = row[k + 1];
            row[k] = x * c + y * s.conj();
            row[k + 1] = -x * s + y * c;
        }
    }
    for i in lo..=hi {
        h[i][i] = h[i][i] + shift;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn sample() -> CMat4<f64> {
        [
            [c(1.0, 0.5), c(-2.0, 0.1), c(0.3, 0.0), c(0.0, -1.0)],
            [c(0.7, 0.0), c(0.2, -0.4), c(1.5, 1.0), c(-0.6, 0.2)],
            [c(0.0, 2.0), c(0.9, 0.0), c(-1.1, 0.0), c(0.4, 0.4)],
            [c(-0.3, 0.3), c(0.0, 0.0), c(0.8, -0.2), c(2.0, 1.0)],
        ]
    }

    #[test]
    fn schur_reconstructs_input() {
        let a = sample();
        let s = Schur::new(&a).unwrap();
        let back = matmul(&matmul(&s.z, &s.t), &adjoint(&s.z));
        assert!(frobenius_norm(&sub(&back, &a)) < 1e-12);
        let unit = matmul(&adjoint(&s.z), &s.z);
        assert!(frobenius_norm(&sub(&unit, &identity())) < 1e-12);
        for i in 1..DIM {
            for j in 0..i {
                assert_eq!(s.t[i][j], Complex::zero());
            }
        }
    }

    #[test]
    fn eigenpairs_have_small_residual() {
        let a = sample();
        let (vals, vecs) = eigen(&a).unwrap();
        for (e, v) in vals.iter().zip(&vecs) {
            let av = matvec(&a, v);
            let r = av
                .iter()
                .zip(v)
                .fold(0.0, |acc, (x, y)| acc + (x - e * y).norm_sqr())
                .sqrt();
            assert!(r < 1e-12, "residual {r}");
            let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!((max - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn diagonal_and_zero_matrices() {
        let z: CMat4<f64> = zeros();
        assert_eq!(eigenvalues(&z).unwrap(), [Complex::zero(); DIM]);
        let mut d = zeros();
        for (i, row) in d.iter_mut().enumerate() {
            row[i] = c(i as f64, -(i as f64));
        }
        let vals = eigenvalues(&d).unwrap();
        for (i, v) in vals.iter().enumerate() {
            assert_eq!(*v, c(i as f64, -(i as f64)));
        }
    }

    #[test]
    fn repeated_eigenvalues_keep_independent_vectors() {
        // Diagonalizable with a doubled eigenvalue.
        let mut a = zeros();
        a[0][1] = c(1.0, 0.0);
        a[1][0] = c(1.0, 0.0);
        a[2][3] = c(1.0, 0.0);
        a[3][2] = c(1.0, 0.0);
        let (vals, vecs) = eigen(&a).unwrap();
        for (e, v) in vals.iter().zip(&vecs) {
            let av = matvec(&a, v);
            for (x, y) in av.iter().zip(v) {
                assert!((x - e * y).norm() < 1e-12);
            }
        }
        assert!(condition_number(&from_columns(&vecs)) < 1e3);
    }

    #[test]
    fn lu_solves_and_detects_singularity() {
        let a = sample();
        let b = [c(1.0, 0.0), c(0.0, 1.0), c(-2.0, 0.5), c(0.3, 0.3)];
        let x = Lu::new(&a).unwrap().solve(&b);
        let back = matvec(&a, &x);
        for (u, v) in back.iter().zip(&b) {
            assert!((u - v).norm() < 1e-13);
        }
        let mut s = a;
        s[3] = s[2];
        assert!(condition_number(&s) > 1e14);
        assert!(matches!(Lu::new(&zeros::<f64>()), Err(Error::Singular)));
    }
}
