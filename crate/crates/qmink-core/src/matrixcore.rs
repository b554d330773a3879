//! Dense complex linear algebra used by every other module: Kronecker
//! products, tensor-factor flips, inverses, nullspaces and spectral
//! reports with a diagonalizability test.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::QminkError;

pub type C64 = Complex64;
pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub const I: C64 = C64::new(0.0, 1.0);

/// Kronecker product, pair index (i,j) -> i*dim(b)+j.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Kronecker product of vectors, same flattening as `kron`.
pub fn kron_vec(a: &CVec, b: &CVec) -> CVec {
    let mut out = CVec::zeros(a.len() * b.len());
    for i in 0..a.len() {
        for j in 0..b.len() {
            out[i * b.len() + j] = a[i] * b[j];
        }
    }
    out
}

/// Permutation matrix for the flip C^m (x) C^n -> C^n (x) C^m.
pub fn flip(m: usize, n: usize) -> CMat {
    let mut p = CMat::zeros(m * n, m * n);
    for i in 0..m {
        for j in 0..n {
            p[(j * m + i, i * n + j)] = cr(1.0);
        }
    }
    p
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Inverse with a pivot-magnitude guard.
pub fn inverse(a: &CMat) -> Result<CMat, QminkError> {
    assert!(a.is_square(), "inverse of non-square matrix");
    let scale = a.norm().max(1.0);
    match a.clone().try_inverse() {
        Some(inv) => {
            // try_inverse can succeed on near-singular input; check the residual
            let resid = (a * &inv - identity(a.nrows())).norm();
            if resid > 1e-8 * scale {
                Err(QminkError::SingularMatrix)
            } else {
                Ok(inv)
            }
        }
        None => Err(QminkError::SingularMatrix),
    }
}

/// Orthonormal basis of the right kernel via SVD thresholding at `tol`.
pub fn nullspace(a: &CMat, tol: f64) -> Vec<CVec> {
    assert!(tol > 0.0);
    let (rows, cols) = a.shape();
    // thin SVD only covers min(rows, cols) right singular vectors; pad to square
    let m = if rows < cols {
        let mut p = CMat::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("svd requested v_t");
    let mut basis = Vec::new();
    for (i, &sv) in svd.singular_values.iter().enumerate() {
        if sv <= tol {
            // rows of V^H conjugated give columns of V
            let row = v_t.row(i);
            let v = CVec::from_iterator(cols, row.iter().map(|z| z.conj()));
            basis.push(v);
        }
    }
    basis
}

pub fn rank(a: &CMat, tol: f64) -> usize {
    let svd = a.clone().svd(false, false);
    svd.singular_values.iter().filter(|&&s| s > tol).count()
}

#[derive(Debug, Clone)]
pub struct SpectrumReport {
    pub label: String,
    pub eigenvalues: Vec<C64>,
    pub all_real: bool,
    pub diagonalizable: bool,
}

/// Eigenvalues plus reality / diagonalizability flags.
///
/// Diagonalizability compares the sum of geometric multiplicities
/// (kernel dimensions at eigenvalue clusters of radius 1e-7*scale)
/// with the dimension.
pub fn spectrum_report(a: &CMat, tol: f64) -> SpectrumReport {
    assert!(a.is_square());
    let n = a.nrows();
    let scale = a.norm().max(1.0);
    if n == 0 {
        return SpectrumReport {
            label: String::new(),
            eigenvalues: vec![],
            all_real: true,
            diagonalizable: true,
        };
    }
    let schur = a
        .clone()
        .try_schur(1e-14, 10_000)
        .unwrap_or_else(|| a.clone().schur());
    let t = schur.unpack().1;
    let eigenvalues: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();

    let all_real = eigenvalues.iter().all(|l| l.im.abs() <= tol * scale);

    // cluster eigenvalues, then sum geometric multiplicities
    let cluster_radius = 1e-7 * scale;
    let mut reps: Vec<(C64, usize)> = Vec::new();
    for &l in &eigenvalues {
        match reps.iter_mut().find(|(r, _)| (l - *r).norm() <= cluster_radius) {
            Some((_, count)) => *count += 1,
            None => reps.push((l, 1)),
        }
    }
    let mut geo_sum = 0usize;
    let mut ok = true;
    for &(l, alg) in &reps {
        let shifted = a - identity(n) * l;
        let geo = n - rank(&shifted, (tol * scale).max(1e-12));
        geo_sum += geo;
        if geo < alg {
            ok = false;
        }
    }
    let diagonalizable = ok && geo_sum == n;

    SpectrumReport {
        label: String::new(),
        eigenvalues,
        all_real,
        diagonalizable,
    }
}

/// Max-magnitude entry difference.
pub fn max_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn approx_eq(a: &CMat, b: &CMat, tol: f64) -> bool {
    max_diff(a, b) <= tol
}

pub fn assert_finite(a: &CMat) -> Result<(), QminkError> {
    if a.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(QminkError::NonFinite)
    }
}

/// Matrix as nested arrays of [re, im] pairs.
pub fn mat_to_json(a: &CMat) -> serde_json::Value {
    let rows: Vec<serde_json::Value> = (0..a.nrows())
        .map(|i| {
            let row: Vec<serde_json::Value> = (0..a.ncols())
                .map(|j| serde_json::json!([a[(i, j)].re, a[(i, j)].im]))
                .collect();
            serde_json::Value::Array(row)
        })
        .collect();
    serde_json::Value::Array(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sigma1() -> CMat {
        CMat::from_row_slice(2, 2, &[cr(0.0), cr(1.0), cr(1.0), cr(0.0)])
    }

    #[test]
    fn kron_identity() {
        let i2 = identity(2);
        assert!(approx_eq(&kron(&i2, &i2), &identity(4), 1e-12));
    }

    #[test]
    fn kron_mixed_product() {
        // kron(a,b)*kron(c,d) = kron(ac, bd)
        let rand = |seed: u64| {
            CMat::from_fn(2, 2, |i, j| {
                let x = ((seed + 3 * i as u64 + 7 * j as u64) % 11) as f64;
                c(x / 3.0, (x * x % 5.0) / 2.0)
            })
        };
        let (a, b, cc, d) = (rand(1), rand(5), rand(9), rand(13));
        let lhs = kron(&a, &b) * kron(&cc, &d);
        let rhs = kron(&(&a * &cc), &(&b * &d));
        assert!(approx_eq(&lhs, &rhs, 1e-10));
    }

    #[test]
    fn kron_sigma1_on_basis() {
        // sigma1 (x) sigma1 sends e0 (x) e0 to e1 (x) e1
        let s = sigma1();
        let m = kron(&s, &s);
        let mut e00 = CVec::zeros(4);
        e00[0] = cr(1.0);
        let out = &m * e00;
        let mut want = CVec::zeros(4);
        want[3] = cr(1.0);
        assert!((out - want).norm() < 1e-12);
    }

    #[test]
    fn flip_trivial_and_involution() {
        assert!(approx_eq(&flip(1, 5), &identity(5), 1e-12));
        let f = flip(2, 2);
        assert!(approx_eq(&(&f * &f), &identity(4), 1e-12));
    }

    #[test]
    fn flip_swaps_factors() {
        let x = CVec::from_vec(vec![c(1.0, 2.0), c(-0.5, 0.3)]);
        let y = CVec::from_vec(vec![c(0.7, -1.0), c(2.0, 0.0)]);
        let lhs = flip(2, 2) * kron_vec(&x, &y);
        let rhs = kron_vec(&y, &x);
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn inverse_examples() {
        assert!(approx_eq(&inverse(&identity(4)).unwrap(), &identity(4), 1e-12));

        // E of case 1 read as a 2x2 matrix
        let e = CMat::from_row_slice(2, 2, &[cr(0.0), cr(1.0), cr(-1.0), cr(0.0)]);
        let want = CMat::from_row_slice(2, 2, &[cr(0.0), cr(-1.0), cr(1.0), cr(0.0)]);
        assert!(approx_eq(&inverse(&e).unwrap(), &want, 1e-12));

        let t = 0.7;
        let d = CMat::from_diagonal(&CVec::from_vec(vec![cr(t), cr(1.0 / t)]));
        let want = CMat::from_diagonal(&CVec::from_vec(vec![cr(1.0 / t), cr(t)]));
        assert!(approx_eq(&inverse(&d).unwrap(), &want, 1e-12));
    }

    #[test]
    fn inverse_singular() {
        let z = CMat::zeros(2, 2);
        assert!(matches!(inverse(&z), Err(QminkError::SingularMatrix)));
    }

    #[test]
    fn nullspace_examples() {
        assert_eq!(nullspace(&CMat::zeros(2, 2), 1e-9).len(), 2);
        assert_eq!(nullspace(&identity(4), 1e-9).len(), 0);

        // rank-1 projector e0 e0^T on C^2: kernel spanned by e1
        let mut p = CMat::zeros(2, 2);
        p[(0, 0)] = cr(1.0);
        let ns = nullspace(&p, 1e-9);
        assert_eq!(ns.len(), 1);
        assert!(ns[0][0].norm() < 1e-10);
        assert!((ns[0][1].norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn nullspace_residual_bound() {
        let a = CMat::from_fn(4, 4, |i, j| c((i as f64 - j as f64) / 3.0, 0.1 * i as f64));
        let tol = 1e-9;
        for v in nullspace(&a, tol) {
            assert!((&a * &v).norm() <= 10.0 * tol * a.norm().max(1.0));
        }
    }

    #[test]
    fn spectrum_diag() {
        let d = CMat::from_diagonal(&CVec::from_vec(vec![cr(1.0), cr(2.0)]));
        let rep = spectrum_report(&d, 1e-9);
        assert!(rep.all_real);
        assert!(rep.diagonalizable);
    }

    #[test]
    fn spectrum_jordan_block() {
        let j = CMat::from_row_slice(2, 2, &[cr(0.0), cr(1.0), cr(0.0), cr(0.0)]);
        let rep = spectrum_report(&j, 1e-9);
        assert!(rep.all_real);
        assert!(!rep.diagonalizable);
        assert_eq!(rep.eigenvalues.len(), 2);
        assert!(rep.eigenvalues.iter().all(|l| l.norm() < 1e-7));
    }

    #[test]
    fn spectrum_rotation() {
        let r = CMat::from_row_slice(2, 2, &[cr(0.0), cr(-1.0), cr(1.0), cr(0.0)]);
        let rep = spectrum_report(&r, 1e-9);
        assert!(!rep.all_real);
        let mut ims: Vec<f64> = rep.eigenvalues.iter().map(|l| l.im).collect();
        ims.sort_by(f64::total_cmp);
        assert!((ims[0] + 1.0).abs() < 1e-9 && (ims[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn kron_associative() {
        let a = CMat::from_fn(2, 2, |i, j| c(i as f64 + 1.0, j as f64));
        let b = CMat::from_fn(2, 2, |i, j| c(j as f64 - 1.0, i as f64 * 2.0));
        let d = CMat::from_fn(2, 2, |i, j| c(0.5 * i as f64, 1.0 - j as f64));
        let lhs = kron(&kron(&a, &b), &d);
        let rhs = kron(&a, &kron(&b, &d));
        assert!(approx_eq(&lhs, &rhs, 1e-12));
    }

    #[test]
    fn double_inverse_roundtrip() {
        let a = CMat::from_fn(4, 4, |i, j| {
            c(
                if i == j { 3.0 } else { 0.3 * (i as f64 - j as f64) },
                0.1 * (i * j) as f64,
            )
        });
        let back = inverse(&inverse(&a).unwrap()).unwrap();
        assert!(approx_eq(&a, &back, 1e-10));
    }

    #[test]
    fn flip_inverse_pairs() {
        for &(m, n) in &[(1usize, 2usize), (2, 2), (2, 4), (4, 4), (1, 4)] {
            let lhs = flip(n, m) * flip(m, n);
            assert!(approx_eq(&lhs, &identity(m * n), 1e-12));
        }
    }
}
