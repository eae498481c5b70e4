//! Dense complex eigensolver: diagonal balancing, Householder reduction to
//! Hessenberg form, single-shift QR iteration to a complex Schur form, and
//! eigenvectors by back substitution on the triangular factor.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);

/// Eigenpairs of a square complex matrix. Eigenvectors are the columns of
/// `eigenvectors`, each of unit 2-norm.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<C>,
    pub eigenvectors: DMatrix<C>,
    /// `‖A v − λ v‖` per pair.
    pub residuals: Vec<f64>,
    /// `σ_max / σ_min` of the eigenvector matrix; infinite when it is singular.
    pub vector_condition: f64,
    /// Whether every residual is within `tol_eig · (1 + ‖A‖_F)`.
    pub accepted: bool,
}

/// Summary of a decomposition for reports.
#[derive(Clone, Debug, Serialize)]
pub struct EigenSummary {
    pub eigenvalues: Vec<C>,
    pub max_residual: f64,
    pub vector_condition: f64,
    pub accepted: bool,
}

impl EigenDecomposition {
    pub fn summary(&self) -> EigenSummary {
        EigenSummary {
            eigenvalues: self.eigenvalues.clone(),
            max_residual: self.residuals.iter().copied().fold(0.0, f64::max),
            vector_condition: self.vector_condition,
            accepted: self.accepted,
        }
    }

    /// Smallest distance between two eigenvalues (infinite for a 1×1 matrix).
    pub fn min_gap(&self) -> f64 {
        min_gap(&self.eigenvalues)
    }
}

pub(crate) fn min_gap(values: &[C]) -> f64 {
    let mut gap = f64::INFINITY;
    for (k, a) in values.iter().enumerate() {
        for b in &values[k + 1..] {
            gap = gap.min((a - b).norm());
        }
    }
    gap
}

fn abs1(z: C) -> f64 {
    z.re.abs() + z.im.abs()
}

pub fn frobenius(a: &DMatrix<C>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn eigen(a: &DMatrix<C>, tol_eig: f64) -> Result<EigenDecomposition> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::InvalidParameter(format!(
            "eigen: matrix is {}x{}, expected square",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.iter().any(|z| !z.is_finite()) {
        return Err(Error::NonFinite {
            context: "eigen input".into(),
        });
    }
    if n == 0 {
        return Ok(EigenDecomposition {
            eigenvalues: vec![],
            eigenvectors: DMatrix::zeros(0, 0),
            residuals: vec![],
            vector_condition: 1.0,
            accepted: true,
        });
    }

    let (mut h, scale) = balance(a);
    let mut q = hessenberg(&mut h);
    schur(&mut h, &mut q)?;
    let eigenvalues: Vec<C> = (0..n).map(|k| h[(k, k)]).collect();

    let x = triangular_eigenvectors(&h);
    let mut vectors = &q * x;
    for (i, s) in scale.iter().enumerate() {
        for j in 0..n {
            vectors[(i, j)] *= *s;
        }
    }
    for mut col in vectors.column_iter_mut() {
        let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            col.iter_mut().for_each(|z| *z /= norm);
        }
    }

    let av = a * &vectors;
    let residuals: Vec<f64> = (0..n)
        .map(|j| {
            (0..n)
                .map(|i| (av[(i, j)] - eigenvalues[j] * vectors[(i, j)]).norm_sqr())
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    let bound = tol_eig * (1.0 + frobenius(a));
    let accepted = residuals.iter().all(|&r| r <= bound);

    let sv = vectors.clone().singular_values();
    let smax = sv.max();
    let smin = sv.min();
    let vector_condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };

    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors: vectors,
        residuals,
        vector_condition,
        accepted,
    })
}

/// Returns `D⁻¹ A D` with `D` a diagonal of powers of two, and `D`'s diagonal.
fn balance(a: &DMatrix<C>) -> (DMatrix<C>, Vec<f64>) {
    const RADIX: f64 = 2.0;
    let n = a.nrows();
    let mut b = a.clone();
    let mut d = vec![1.0; n];
    let mut converged = false;
    let mut sweeps = 0;
    while !converged && sweeps < 100 {
        converged = true;
        sweeps += 1;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += abs1(b[(j, i)]);
                    r += abs1(b[(i, j)]);
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= RADIX * RADIX;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= RADIX * RADIX;
            }
            if (c + r) / f < 0.95 * s {
                converged = false;
                d[i] *= f;
                for j in 0..n {
                    b[(i, j)] /= f;
                    b[(j, i)] *= f;
                }
            }
        }
    }
    (b, d)
}

/// Reduces `h` to upper Hessenberg form in place and returns the unitary `Q`
/// with `A = Q H Qᴴ`.
fn hessenberg(h: &mut DMatrix<C>) -> DMatrix<C> {
    let n = h.nrows();
    let mut q = DMatrix::<C>::identity(n, n);
    for k in 0..n.saturating_sub(2) {
        let len = n - k - 1;
        let mut v: Vec<C> = (0..len).map(|i| h[(k + 1 + i, k)]).collect();
        let xnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let phase = if v[0].norm() > 0.0 { v[0] / v[0].norm() } else { ONE };
        let alpha = -phase * xnorm;
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        v.iter_mut().for_each(|z| *z /= vnorm);

        // H ← (I − 2vvᴴ) H
        for j in 0..n {
            let dot: C = (0..len).map(|i| v[i].conj() * h[(k + 1 + i, j)]).sum();
            for i in 0..len {
                h[(k + 1 + i, j)] -= 2.0 * v[i] * dot;
            }
        }
        // H ← H (I − 2vvᴴ), Q ← Q (I − 2vvᴴ)
        for m in [&mut *h, &mut q] {
            for i in 0..n {
                let dot: C = (0..len).map(|l| m[(i, k + 1 + l)] * v[l]).sum();
                for l in 0..len {
                    m[(i, k + 1 + l)] -= 2.0 * dot * v[l].conj();
                }
            }
        }
        h[(k + 1, k)] = alpha;
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
    q
}

/// Plane rotation `[c s; −s̄ c]` mapping `(x, y)` to `(r, 0)`.
fn givens(x: C, y: C) -> (f64, C) {
    let ax = x.norm();
    let ay = y.norm();
    if ay == 0.0 {
        return (1.0, ZERO);
    }
    if ax == 0.0 {
        return (0.0, y.conj() / ay);
    }
    let norm = ax.hypot(ay);
    (ax / norm, (x / ax) * y.conj() / norm)
}

fn rotate_rows(m: &mut DMatrix<C>, k: usize, c: f64, s: C, cols: std::ops::Range<usize>) {
    for j in cols {
        let a = m[(k, j)];
        let b = m[(k + 1, j)];
        m[(k, j)] = c * a + s * b;
        m[(k + 1, j)] = -s.conj() * a + c * b;
    }
}

fn rotate_cols(m: &mut DMatrix<C>, k: usize, c: f64, s: C, rows: std::ops::Range<usize>) {
    for i in rows {
        let a = m[(i, k)];
        let b = m[(i, k + 1)];
        m[(i, k)] = c * a + s.conj() * b;
        m[(i, k + 1)] = -s * a + c * b;
    }
}

/// Eigenvalue of the trailing 2×2 block closest to its last diagonal entry.
fn wilkinson_shift(h: &DMatrix<C>, hi: usize) -> C {
    let a = h[(hi - 1, hi - 1)];
    let b = h[(hi - 1, hi)];
    let c = h[(hi, hi - 1)];
    let d = h[(hi, hi)];
    let p = 0.5 * (a - d);
    let bc = b * c;
    let mut disc = (p * p + bc).sqrt();
    if (p.conj() * disc).re < 0.0 {
        disc = -disc;
    }
    let denom = p + disc;
    if denom.norm() == 0.0 {
        d
    } else {
        d - bc / denom
    }
}

/// Reduces the Hessenberg matrix `h` to upper triangular Schur form,
/// accumulating the rotations into `q`.
fn schur(h: &mut DMatrix<C>, q: &mut DMatrix<C>) -> Result<()> {
    let n = h.nrows();
    let eps = f64::EPSILON;
    let hnorm = frobenius(h).max(f64::MIN_POSITIVE);
    let max_iter = 30 * n.max(10);

    let mut hi = n - 1;
    let mut iter = 0;
    while hi > 0 {
        let mut lo = hi;
        while lo > 0 {
            let mut s = abs1(h[(lo - 1, lo - 1)]) + abs1(h[(lo, lo)]);
            if s == 0.0 {
                s = hnorm;
            }
            if abs1(h[(lo, lo - 1)]) <= eps * s {
                h[(lo, lo - 1)] = ZERO;
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
        if iter > max_iter {
            return Err(Error::NonConvergence {
                converged: n - 1 - hi,
                size: n,
            });
        }

        let shift = if iter % 10 == 0 {
            // exceptional shift to break cycles
            h[(hi, hi)] + C::new(0.75 * h[(hi, hi - 1)].re.abs(), 0.0)
        } else {
            wilkinson_shift(h, hi)
        };

        let mut x = h[(lo, lo)] - shift;
        let mut y = h[(lo + 1, lo)];
        for k in lo..hi {
            if k > lo {
                x = h[(k, k - 1)];
                y = h[(k + 1, k - 1)];
            }
            let (c, s) = givens(x, y);
            let first_col = if k > lo { k - 1 } else { lo };
            rotate_rows(h, k, c, s, first_col..n);
            rotate_cols(h, k, c, s, 0..(k + 3).min(hi + 1));
            rotate_cols(q, k, c, s, 0..n);
            if k > lo {
                h[(k + 1, k - 1)] = ZERO;
            }
        }
    }
    for j in 0..n {
        for i in j + 1..n {
            h[(i, j)] = ZERO;
        }
    }
    Ok(())
}

/// Eigenvectors of an upper triangular `t`, as columns with unit last pivot.
/// Tiny pivots are perturbed to `eps · ‖T‖` so defective blocks still yield
/// (nearly parallel) vectors.
fn triangular_eigenvectors(t: &DMatrix<C>) -> DMatrix<C> {
    let n = t.nrows();
    let small = f64::EPSILON * frobenius(t).max(f64::MIN_POSITIVE);
    let mut x = DMatrix::<C>::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        x[(k, k)] = ONE;
        for i in (0..k).rev() {
            let rhs: C = -(i + 1..=k).map(|j| t[(i, j)] * x[(j, k)]).sum::<C>();
            let mut pivot = t[(i, i)] - lambda;
            if pivot.norm() < small {
                pivot = C::new(small, 0.0);
            }
            x[(i, k)] = rhs / pivot;
            // rescale to keep the column bounded
            let big = (i..=k).map(|j| x[(j, k)].norm()).fold(0.0, f64::max);
            if big > 1e100 {
                for j in i..=k {
                    x[(j, k)] /= big;
                }
            }
        }
    }
    x
}
