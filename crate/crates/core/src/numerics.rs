//! Dense complex linear-algebra kernel.
//!
//! Everything downstream works on [`CMatrix`] (an `nalgebra` dynamic matrix of
//! `Complex64`). The SVD is backed by `nalgebra`; this module adds the sorting
//! and phase convention that make repeated runs bit-reproducible, plus the
//! pseudo-inverse, null-space projector and log-det capacity built on top of it.

use nalgebra::{Cholesky, DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Orthonormality tolerance for singular-vector bases (Frobenius norm of `X*X - I`).
pub const ORTHONORMAL_TOL: f64 = 1e-10;
/// Relative reconstruction tolerance `‖A - U S V*‖_F / ‖A‖_F`.
pub const RECONSTRUCTION_TOL: f64 = 1e-8;
/// Singular values below `PINV_RTOL * max(S)` are treated as zero.
pub const PINV_RTOL: f64 = 1e-10;
/// Relative tolerance for projector identities (idempotence, annihilation).
pub const PROJECTOR_TOL: f64 = 1e-8;
/// Entries with modulus at or below this are treated as zero by the phase convention.
pub const PHASE_EPS: f64 = 1e-12;
/// Relative Hermitian-symmetry tolerance accepted by [`logdet_capacity`].
pub const HERMITIAN_TOL: f64 = 1e-10;

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Thin SVD `A = U diag(S) V*` with `S` sorted non-increasing.
#[derive(Debug, Clone)]
pub struct SvdResult {
    pub u: CMatrix,
    pub s: Vec<f64>,
    pub v: CMatrix,
}

impl SvdResult {
    pub fn rank(&self, rtol: f64) -> usize {
        let smax = self.s.first().copied().unwrap_or(0.0);
        if smax == 0.0 {
            return 0;
        }
        self.s.iter().filter(|&&s| s > rtol * smax).count()
    }

    pub fn reconstruct(&self) -> CMatrix {
        let mut us = self.u.clone();
        for (j, s) in self.s.iter().enumerate() {
            us.column_mut(j).scale_mut(*s);
        }
        us * self.v.adjoint()
    }
}

pub fn check_finite(op: &'static str, a: &CMatrix) -> Result<()> {
    if a.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { op })
    }
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// `‖X*X - I‖_F`.
pub fn orthonormality_error(x: &CMatrix) -> f64 {
    (x.adjoint() * x - identity(x.ncols())).norm()
}

/// `‖A - A*‖_F`.
pub fn hermitian_error(a: &CMatrix) -> f64 {
    (a - a.adjoint()).norm()
}

/// Thin SVD with descending singular values and the column phase convention
/// "first entry of each U column with modulus above [`PHASE_EPS`] is real-positive"
/// (the matching V column is rotated by the same phase).
pub fn svd(a: &CMatrix) -> Result<SvdResult> {
    check_finite("svd", a)?;
    let (m, n) = a.shape();
    let r = m.min(n);
    if r == 0 {
        return Ok(SvdResult { u: CMatrix::zeros(m, 0), s: Vec::new(), v: CMatrix::zeros(n, 0) });
    }
    let fa = faer::Mat::<Complex64>::from_fn(m, n, |i, j| a[(i, j)]);
    let dec = fa.thin_svd().map_err(|_| Error::NonFinite { op: "svd" })?;
    let u_raw = CMatrix::from_fn(m, r, |i, j| dec.U()[(i, j)]);
    let v_raw = CMatrix::from_fn(n, r, |i, j| dec.V()[(i, j)]);
    let s_raw: Vec<f64> = (0..r).map(|j| dec.S()[j].re).collect();

    let mut order: Vec<usize> = (0..r).collect();
    // stable sort keeps the backend's order among exact ties
    order.sort_by(|&i, &j| s_raw[j].partial_cmp(&s_raw[i]).unwrap_or(std::cmp::Ordering::Equal));

    let mut u = CMatrix::zeros(m, r);
    let mut v = CMatrix::zeros(n, r);
    let mut s = Vec::with_capacity(r);
    for (dst, &src) in order.iter().enumerate() {
        let mut ucol = u_raw.column(src).into_owned();
        let mut vcol = v_raw.column(src).into_owned();
        if let Some(pivot) = ucol.iter().find(|z| z.norm() > PHASE_EPS) {
            let rot = pivot.conj() / pivot.norm();
            ucol *= rot;
            vcol *= rot;
        }
        u.set_column(dst, &ucol);
        v.set_column(dst, &vcol);
        s.push(s_raw[src].max(0.0));
    }
    Ok(SvdResult { u, s, v })
}

fn pad_columns(a: &CMatrix, width: usize) -> CMatrix {
    if a.ncols() >= width {
        return a.clone();
    }
    let mut out = CMatrix::zeros(a.nrows(), width);
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out
}

/// First `n` columns of the phase-fixed left singular basis of `a`.
///
/// `n` may exceed the numerical rank; the trailing columns then span part of the
/// left null space deterministically. `n > min(rows, cols)` is rejected.
pub fn dominant_left_singular_vectors(a: &CMatrix, n: usize) -> Result<CMatrix> {
    let (m, c) = a.shape();
    if n > m.min(c) {
        return Err(Error::arg(
            "dominant_left_singular_vectors",
            format!("requested {n} vectors from a {m}x{c} matrix"),
        ));
    }
    let dec = svd(a)?;
    Ok(dec.u.columns(0, n).into_owned())
}

/// Like [`dominant_left_singular_vectors`] but allows `n` up to the row count by
/// zero-padding `a` with extra columns, which extends the basis into the left null
/// space deterministically.
pub fn left_basis(a: &CMatrix, n: usize) -> Result<CMatrix> {
    if n > a.nrows() {
        return Err(Error::arg("left_basis", format!("requested {n} vectors in dimension {}", a.nrows())));
    }
    if n <= a.ncols() {
        return dominant_left_singular_vectors(a, n);
    }
    dominant_left_singular_vectors(&pad_columns(a, n), n)
}

/// First `n` columns of the right singular basis (`n ≤ min(rows, cols)`).
pub fn dominant_right_singular_vectors(a: &CMatrix, n: usize) -> Result<CMatrix> {
    let (m, c) = a.shape();
    if n > m.min(c) {
        return Err(Error::arg(
            "dominant_right_singular_vectors",
            format!("requested {n} vectors from a {m}x{c} matrix"),
        ));
    }
    let dec = svd(a)?;
    Ok(dec.v.columns(0, n).into_owned())
}

/// Moore–Penrose pseudo-inverse with relative cutoff [`PINV_RTOL`].
pub fn pseudo_inverse(c: &CMatrix) -> Result<CMatrix> {
    let (m, n) = c.shape();
    let dec = svd(c)?;
    let mut out = CMatrix::zeros(n, m);
    let smax = dec.s.first().copied().unwrap_or(0.0);
    for (j, &s) in dec.s.iter().enumerate() {
        if smax == 0.0 || s <= PINV_RTOL * smax {
            break;
        }
        let vj = dec.v.column(j);
        let uj = dec.u.column(j);
        out += (vj * uj.adjoint()) * Complex64::new(1.0 / s, 0.0);
    }
    Ok(out)
}

/// Orthogonal projector onto the complement of `range(C)`: `I - C C†`.
pub fn null_projector(c: &CMatrix) -> Result<CMatrix> {
    let pinv = pseudo_inverse(c)?;
    let mut p = identity(c.nrows()) - c * pinv;
    // symmetrize away rounding so the result is exactly Hermitian
    let ph = p.adjoint();
    p += ph;
    p.scale_mut(0.5);
    Ok(p)
}

/// Numerical rank of `c` under the pseudo-inverse cutoff.
pub fn numerical_rank(c: &CMatrix) -> Result<usize> {
    Ok(svd(c)?.rank(PINV_RTOL))
}

/// `log2 det(I + p · E Q⁻¹ E*)` for Hermitian positive-definite `Q`.
///
/// Computed as `Σ log2(1 + p s_i²)` over the singular values of `L⁻¹E*`, where
/// `Q = L L*` is the Cholesky factorization.
pub fn logdet_capacity(effective: &CMatrix, noise_cov: &CMatrix, power_scale: f64) -> Result<f64> {
    const OP: &str = "logdet_capacity";
    check_finite(OP, effective)?;
    check_finite(OP, noise_cov)?;
    let q = noise_cov.nrows();
    if noise_cov.ncols() != q || effective.ncols() != q {
        return Err(Error::dim(
            OP,
            format!("effective {:?} vs noise covariance {:?}", effective.shape(), noise_cov.shape()),
        ));
    }
    if !(power_scale >= 0.0) || !power_scale.is_finite() {
        return Err(Error::arg(OP, format!("power scale {power_scale} must be finite and nonnegative")));
    }
    let scale = noise_cov.norm().max(f64::MIN_POSITIVE);
    if hermitian_error(noise_cov) > HERMITIAN_TOL * scale {
        return Err(Error::NotPositiveDefinite { op: OP });
    }
    let sym = (noise_cov + noise_cov.adjoint()) * Complex64::new(0.5, 0.0);
    let chol = Cholesky::new(sym).ok_or(Error::NotPositiveDefinite { op: OP })?;
    let l = chol.l();
    // complex Cholesky happily takes square roots of negative pivots
    if l.diagonal().iter().any(|d| !(d.re > 0.0) || d.im.abs() > HERMITIAN_TOL * d.re) {
        return Err(Error::NotPositiveDefinite { op: OP });
    }
    let whitened = l
        .solve_lower_triangular(&effective.adjoint())
        .ok_or(Error::NotPositiveDefinite { op: OP })?;
    let dec = svd(&whitened)?;
    let bits: f64 = dec.s.iter().map(|s| (1.0 + power_scale * s * s).log2()).sum();
    Ok(bits.max(0.0))
}

/// `H[k] = Σ_ℓ H[ℓ] e^{-j 2π k ℓ / K}`.
pub fn dft_taps(taps: &[CMatrix], k: usize, n_subcarriers: usize) -> Result<CMatrix> {
    const OP: &str = "dft_taps";
    let first = taps.first().ok_or_else(|| Error::arg(OP, "empty tap sequence"))?;
    if k >= n_subcarriers {
        return Err(Error::arg(OP, format!("subcarrier {k} outside 0..{n_subcarriers}")));
    }
    if taps.len() > n_subcarriers {
        return Err(Error::arg(OP, format!("{} taps exceed {n_subcarriers} subcarriers", taps.len())));
    }
    let shape = first.shape();
    let mut acc = CMatrix::zeros(shape.0, shape.1);
    for (l, tap) in taps.iter().enumerate() {
        if tap.shape() != shape {
            return Err(Error::dim(OP, format!("tap {l} is {:?}, expected {shape:?}", tap.shape())));
        }
        // reduce the index product mod K so the phase argument stays small
        let idx = (k * l) % n_subcarriers;
        let phase = -2.0 * std::f64::consts::PI * idx as f64 / n_subcarriers as f64;
        acc += tap * Complex64::from_polar(1.0, phase);
    }
    Ok(acc)
}

/// Closest matrix with orthonormal columns (polar factor `U V*` of the thin SVD).
pub fn nearest_orthonormal(x: &CMatrix) -> Result<CMatrix> {
    let dec = svd(x)?;
    Ok(&dec.u * dec.v.adjoint())
}

/// Extends `basis` (orthonormal columns, possibly fewer than `n`) to `n` orthonormal
/// columns, drawing new directions first from `range(preferred)` (an orthogonal
/// projector) and then from the whole space.
pub fn complete_orthonormal(basis: &CMatrix, preferred: &CMatrix, n: usize) -> Result<CMatrix> {
    let m = basis.nrows();
    if n > m {
        return Err(Error::arg("complete_orthonormal", format!("{n} columns in dimension {m}")));
    }
    let mut cols: Vec<DVector<Complex64>> = basis.column_iter().map(|c| c.into_owned()).collect();
    for source in [preferred.clone(), identity(m)] {
        if cols.len() >= n {
            break;
        }
        let residual = if cols.is_empty() {
            source
        } else {
            let current = CMatrix::from_columns(&cols);
            &source - &current * (current.adjoint() * &source)
        };
        let dec = svd(&residual)?;
        let smax = dec.s.first().copied().unwrap_or(0.0);
        for (j, &s) in dec.s.iter().enumerate() {
            if cols.len() >= n || smax == 0.0 || s <= 1e-8 * smax.max(1.0) {
                break;
            }
            cols.push(dec.u.column(j).into_owned());
        }
    }
    if cols.len() < n {
        return Err(Error::arg("complete_orthonormal", "could not extend basis"));
    }
    if n == 0 {
        return Ok(CMatrix::zeros(m, 0));
    }
    Ok(CMatrix::from_columns(&cols[..n]))
}

/// Entrywise phase projection onto the unit-modulus set. Zero entries become `1`;
/// their count is returned alongside.
pub fn phase_only(y: &CMatrix) -> (CMatrix, usize) {
    let mut degenerate = 0;
    let out = y.map(|z| {
        let r = z.norm();
        if r > 0.0 && r.is_finite() {
            z / r
        } else {
            degenerate += 1;
            ONE
        }
    });
    (out, degenerate)
}

pub fn c64(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}
