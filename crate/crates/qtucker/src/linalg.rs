//! Small dense linear-algebra helpers shared across the crate.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Frobenius distance between two matrices.
pub fn fro_dist(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Max |U†U − I| entry; zero for a unitary.
pub fn unitarity_defect(u: &DMatrix<C64>) -> f64 {
    let d = u.ncols();
    let gram = u.adjoint() * u;
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            let expect = if i == j { ONE } else { ZERO };
            worst = worst.max((gram[(i, j)] - expect).norm());
        }
    }
    worst
}

/// True when `u` equals a global phase times the identity within `tol`.
pub fn is_identity_up_to_phase(u: &DMatrix<C64>, tol: f64) -> bool {
    let d = u.nrows();
    if u.ncols() != d {
        return false;
    }
    let phase = u[(0, 0)];
    if (phase.norm() - 1.0).abs() > tol {
        return false;
    }
    for i in 0..d {
        for j in 0..d {
            let expect = if i == j { phase } else { ZERO };
            if (u[(i, j)] - expect).norm() > tol {
                return false;
            }
        }
    }
    true
}

/// Multiply each column by a unit phase so its largest-magnitude entry
/// (lowest index on near-ties) is real and nonnegative. Removes the phase
/// arbitrariness of singular vectors so repeated factorizations are
/// reproducible.
pub fn canonicalize_column_phases(m: &mut DMatrix<C64>) {
    for j in 0..m.ncols() {
        let mut best = 0usize;
        let mut best_mag = 0.0f64;
        for i in 0..m.nrows() {
            let mag = m[(i, j)].norm();
            if mag > best_mag + 1e-12 {
                best_mag = mag;
                best = i;
            }
        }
        if best_mag > 1e-300 {
            let phase = m[(best, j)] / C64::new(best_mag, 0.0);
            let fix = phase.conj();
            for i in 0..m.nrows() {
                m[(i, j)] *= fix;
            }
        }
    }
}

/// Complete a d×r column-orthonormal matrix to a full d×d unitary.
///
/// The first r columns of the result are the input columns verbatim; the
/// completion columns come from Householder reflectors of the input's QR
/// factorization applied to canonical basis vectors, which costs O(d²·r)
/// instead of the O(d³) of re-orthonormalizing a full basis.
pub fn complete_to_unitary(cols: &DMatrix<C64>) -> DMatrix<C64> {
    let d = cols.nrows();
    let r = cols.ncols();
    assert!(r <= d, "more columns than rows");
    if r == d {
        return cols.clone();
    }

    // Householder QR of the input block. reflectors[t] is the vector v of
    // H_t = I − 2 v v†/(v†v), acting on rows t..d.
    let mut work = cols.clone();
    let mut reflectors: Vec<Option<Vec<C64>>> = Vec::with_capacity(r);
    for t in 0..r {
        let mut x: Vec<C64> = (t..d).map(|i| work[(i, t)]).collect();
        let norm_x = x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm_x < 1e-300 {
            reflectors.push(None);
            continue;
        }
        let phase = if x[0].norm() > 1e-300 {
            x[0] / C64::new(x[0].norm(), 0.0)
        } else {
            ONE
        };
        let alpha = -phase * norm_x;
        x[0] -= alpha;
        let vnorm2 = x.iter().map(|c| c.norm_sqr()).sum::<f64>();
        if vnorm2 < 1e-300 {
            reflectors.push(None);
            continue;
        }
        // Apply H_t to the remaining columns of the work block.
        for j in t..r {
            let mut dot = ZERO;
            for (off, v) in x.iter().enumerate() {
                dot += v.conj() * work[(t + off, j)];
            }
            let scale = dot * (2.0 / vnorm2);
            for (off, v) in x.iter().enumerate() {
                let cur = work[(t + off, j)];
                work[(t + off, j)] = cur - scale * v;
            }
        }
        reflectors.push(Some(x));
    }

    let mut out = DMatrix::<C64>::zeros(d, d);
    out.view_mut((0, 0), (d, r)).copy_from(cols);
    // Completion column j is H_1 … H_r e_j.
    for j in r..d {
        let mut col: Vec<C64> = vec![ZERO; d];
        col[j] = ONE;
        for (t, refl) in reflectors.iter().enumerate().rev() {
            if let Some(v) = refl {
                let vnorm2 = v.iter().map(|c| c.norm_sqr()).sum::<f64>();
                let mut dot = ZERO;
                for (off, vv) in v.iter().enumerate() {
                    dot += vv.conj() * col[t + off];
                }
                let scale = dot * (2.0 / vnorm2);
                for (off, vv) in v.iter().enumerate() {
                    col[t + off] -= scale * vv;
                }
            }
        }
        for i in 0..d {
            out[(i, j)] = col[i];
        }
    }
    out
}

/// Kronecker product of two small matrices (row-major index pairing: the
/// first operand owns the most significant index).
pub fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = DMatrix::<C64>::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let s = a[(i, j)];
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = s * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Haar-distributed random unitary via QR of a complex Gaussian matrix with
/// the phase convention fixed on R's diagonal.
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DMatrix<C64> {
    let g = DMatrix::<C64>::from_fn(d, d, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let diag = r[(j, j)];
        if diag.norm() > 1e-300 {
            let fix = diag / C64::new(diag.norm(), 0.0);
            for i in 0..d {
                q[(i, j)] *= fix;
            }
        }
    }
    q
}
