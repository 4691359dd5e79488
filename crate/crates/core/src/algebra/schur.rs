use crate::error::Result;
use crate::linalg::{self, C64, CMat};

/// Complex Schur factorization `M = Q T Q^H` whose leading `selected`
/// diagonal entries of `T` satisfy the selection predicate.
#[derive(Debug, Clone)]
pub struct OrderedSchur {
    pub q: CMat,
    pub t: CMat,
    pub selected: usize,
}

/// Computes the Schur form of `m` and moves every eigenvalue accepted by
/// `select` to the leading block, preserving the relative order inside each
/// group.
pub fn ordered_schur<F: Fn(C64) -> bool>(m: &CMat, select: F) -> Result<OrderedSchur> {
    let (mut q, mut t) = linalg::schur(m)?;
    let n = t.nrows();
    // Clear the strictly lower part; nalgebra leaves rounding noise there.
    for j in 0..n {
        for i in (j + 1)..n {
            t[(i, j)] = C64::new(0.0, 0.0);
        }
    }
    // Stable insertion: bubble each selected eigenvalue leftwards.
    let mut placed = 0;
    for k in 0..n {
        if select(t[(k, k)]) {
            let mut pos = k;
            while pos > placed {
                swap_adjacent(&mut t, &mut q, pos - 1);
                pos -= 1;
            }
            placed += 1;
        }
    }
    Ok(OrderedSchur { q, t, selected: placed })
}

/// Exchanges the diagonal entries at `k` and `k+1` of the upper triangular
/// `t` with a unitary rotation, accumulating it into `q`.
fn swap_adjacent(t: &mut CMat, q: &mut CMat, k: usize) {
    let n = t.nrows();
    let t11 = t[(k, k)];
    let t22 = t[(k + 1, k + 1)];
    let t12 = t[(k, k + 1)];
    // First column of the rotation is the eigenvector of the 2x2 block for t22.
    let x = t12;
    let y = t22 - t11;
    let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
    if r == 0.0 {
        return;
    }
    let (x, y) = (x / r, y / r);
    // Z = [[x, -conj(y)], [y, conj(x)]]
    let z = [[x, -y.conj()], [y, x.conj()]];
    // rows: T <- Z^H T
    for j in 0..n {
        let a = t[(k, j)];
        let b = t[(k + 1, j)];
        t[(k, j)] = z[0][0].conj() * a + z[1][0].conj() * b;
        t[(k + 1, j)] = z[0][1].conj() * a + z[1][1].conj() * b;
    }
    // columns: T <- T Z, Q <- Q Z
    for i in 0..n {
        let a = t[(i, k)];
        let b = t[(i, k + 1)];
        t[(i, k)] = a * z[0][0] + b * z[1][0];
        t[(i, k + 1)] = a * z[0][1] + b * z[1][1];
        let a = q[(i, k)];
        let b = q[(i, k + 1)];
        q[(i, k)] = a * z[0][0] + b * z[1][0];
        q[(i, k + 1)] = a * z[0][1] + b * z[1][1];
    }
    t[(k + 1, k)] = C64::new(0.0, 0.0);
    t[(k, k)] = t22;
    t[(k + 1, k + 1)] = t11;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn reorders_and_preserves_similarity() {
        let m = CMat::from_row_slice(
            3,
            3,
            &[
                c(1.0, 0.5), c(0.3, 0.0), c(-0.2, 1.0),
                c(0.0, 0.1), c(-2.0, 0.0), c(0.4, 0.0),
                c(0.7, 0.0), c(0.0, -0.3), c(0.5, 2.0),
            ],
        );
        let s = ordered_schur(&m, |z| z.re < 0.0).unwrap();
        assert_eq!(s.selected, 1);
        assert!(s.t[(0, 0)].re < 0.0);
        let back = &s.q * &s.t * s.q.adjoint();
        assert!((back - &m).norm() < 1e-12);
        let unit = s.q.adjoint() * &s.q - CMat::identity(3, 3);
        assert!(unit.norm() < 1e-13);
        for j in 0..3 {
            for i in (j + 1)..3 {
                assert_eq!(s.t[(i, j)], c(0.0, 0.0));
            }
        }
    }
}
