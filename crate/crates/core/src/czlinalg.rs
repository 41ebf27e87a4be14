//! Complex matrix decompositions behind the critical-point normal form:
//! Takagi factorization of complex symmetric matrices and normalization of
//! positive definite Levi forms to the identity.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

/// Entrywise tolerance for the symmetry tags on [`ComplexMatrix`].
pub const TAG_TOL: f64 = 1e-12;

/// Smallest Levi eigenvalue still accepted as strictly positive.
pub const PD_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    Symmetric,
    Hermitian,
    General,
}

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("entries violate the {tag:?} tag by {defect:.3e} (tolerance {TAG_TOL:.0e})")]
    TagViolation { tag: Symmetry, defect: f64 },
    #[error("expected a {expected:?} matrix, got {got:?}")]
    WrongTag { expected: Symmetry, got: Symmetry },
    #[error(
        "not strictly plurisubharmonic: smallest Levi eigenvalue {min_eigenvalue:.3e} is below {PD_THRESHOLD:.0e}"
    )]
    NotStrictlyPlurisubharmonic { min_eigenvalue: f64 },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
}

/// Square complex matrix carrying a validated symmetry tag.
#[derive(Debug, Clone)]
pub struct ComplexMatrix {
    data: DMatrix<Complex64>,
    symmetry: Symmetry,
}

impl ComplexMatrix {
    pub fn symmetric(data: DMatrix<Complex64>) -> Result<Self, LinalgError> {
        Self::tagged(data, Symmetry::Symmetric)
    }

    pub fn hermitian(data: DMatrix<Complex64>) -> Result<Self, LinalgError> {
        Self::tagged(data, Symmetry::Hermitian)
    }

    pub fn general(data: DMatrix<Complex64>) -> Result<Self, LinalgError> {
        Self::tagged(data, Symmetry::General)
    }

    fn tagged(data: DMatrix<Complex64>, symmetry: Symmetry) -> Result<Self, LinalgError> {
        if data.nrows() != data.ncols() {
            return Err(LinalgError::NotSquare {
                rows: data.nrows(),
                cols: data.ncols(),
            });
        }
        let defect = match symmetry {
            Symmetry::Symmetric => max_abs(&(&data - data.transpose())),
            Symmetry::Hermitian => max_abs(&(&data - data.adjoint())),
            Symmetry::General => 0.0,
        };
        if defect > TAG_TOL {
            return Err(LinalgError::TagViolation {
                tag: symmetry,
                defect,
            });
        }
        Ok(Self { data, symmetry })
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }
}

/// Q = U diag(d) Uᵀ with U unitary and d ≥ 0 descending.
#[derive(Debug, Clone)]
pub struct TakagiFactorization {
    pub u: DMatrix<Complex64>,
    pub d: DVector<f64>,
}

impl TakagiFactorization {
    /// Reassembles U diag(d) Uᵀ.
    pub fn reconstruct(&self) -> DMatrix<Complex64> {
        let n = self.u.nrows();
        let diag = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(self.d[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        &self.u * diag * self.u.transpose()
    }
}

/// Substitution z = C z' bringing a Levi form to the identity: C^H H C = I.
#[derive(Debug, Clone)]
pub struct LeviNormalization {
    pub c: DMatrix<Complex64>,
}

/// Takagi factorization of a complex symmetric matrix.
///
/// Solves the con-eigenvalue problem Q u̅ = d u through the real symmetric
/// embedding [[Re Q, Im Q], [Im Q, -Re Q]], whose spectrum is {±d_j}. Picking
/// one eigenvector per ± pair and reading u = x + iy off the stacked real
/// vector (x, y) yields unitary U with Q = U diag(d) Uᵀ. Ties and kernels are
/// resolved by a greedy selection that rejects candidates already spanned by
/// earlier picks and their con-images.
pub fn takagi_factorize(q: &ComplexMatrix) -> Result<TakagiFactorization, LinalgError> {
    if q.symmetry() != Symmetry::Symmetric {
        return Err(LinalgError::WrongTag {
            expected: Symmetry::Symmetric,
            got: q.symmetry(),
        });
    }
    let n = q.dim();
    let m = q.matrix();
    let scale = max_abs(m);
    if n == 0 || scale == 0.0 {
        return Ok(TakagiFactorization {
            u: DMatrix::identity(n, n),
            d: DVector::zeros(n),
        });
    }

    let mut embed = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = m[(i, j)];
            embed[(i, j)] = z.re;
            embed[(i, j + n)] = z.im;
            embed[(i + n, j)] = z.im;
            embed[(i + n, j + n)] = -z.re;
        }
    }
    let eig = nalgebra::SymmetricEigen::new(embed);
    let mut order: Vec<usize> = (0..2 * n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    // Multiplying u by i maps the eigenvector (x, y) to (-y, x); that image
    // belongs to the -d eigenspace, so spanning it would duplicate a pick.
    let j_image = |v: &DVector<f64>| -> DVector<f64> {
        let mut w = DVector::zeros(2 * n);
        for k in 0..n {
            w[k] = -v[k + n];
            w[k + n] = v[k];
        }
        w
    };

    let mut picked: Vec<(f64, DVector<f64>)> = Vec::with_capacity(n);
    let mut spanned: Vec<DVector<f64>> = Vec::with_capacity(2 * n);
    let mut deferred: Vec<usize> = Vec::new();
    let select = |idx: usize,
                      threshold: f64,
                      picked: &mut Vec<(f64, DVector<f64>)>,
                      spanned: &mut Vec<DVector<f64>>|
     -> bool {
        let mut w = eig.eigenvectors.column(idx).clone_owned();
        for _ in 0..2 {
            for b in spanned.iter() {
                let c = b.dot(&w);
                w.axpy(-c, b, 1.0);
            }
        }
        let norm = w.norm();
        if norm <= threshold {
            return false;
        }
        w /= norm;
        let jw = j_image(&w);
        picked.push((eig.eigenvalues[idx], w.clone()));
        spanned.push(w);
        spanned.push(jw);
        true
    };
    for &idx in &order {
        if picked.len() == n {
            break;
        }
        if !select(idx, 0.5, &mut picked, &mut spanned) {
            deferred.push(idx);
        }
    }
    for &idx in &deferred {
        if picked.len() == n {
            break;
        }
        select(idx, 1e-6, &mut picked, &mut spanned);
    }
    debug_assert_eq!(picked.len(), n);

    picked.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut u = DMatrix::<Complex64>::zeros(n, n);
    let mut d = DVector::<f64>::zeros(n);
    for (col, (lambda, v)) in picked.iter().enumerate() {
        d[col] = lambda.max(0.0);
        for row in 0..n {
            u[(row, col)] = Complex64::new(v[row], v[row + n]);
        }
    }

    // Gram-Schmidt polish; only near-kernel columns move, and those carry
    // d ~ 0, so the reconstruction residual is unaffected.
    for col in 0..n {
        for prev in 0..col {
            let c = u.column(prev).dotc(&u.column(col)).conj();
            let prev_col = u.column(prev).clone_owned();
            let mut cur = u.column_mut(col);
            cur.axpy(-c.conj(), &prev_col, Complex64::new(1.0, 0.0));
        }
        let norm = u.column(col).norm();
        u.column_mut(col).unscale_mut(norm);
    }

    Ok(TakagiFactorization { u, d })
}

/// Finds C with C^H H C = I for a positive definite Hermitian H via the
/// Cholesky factor: H = L L^H gives C = L^{-H}.
pub fn levi_normalize(h: &ComplexMatrix) -> Result<LeviNormalization, LinalgError> {
    if h.symmetry() != Symmetry::Hermitian {
        return Err(LinalgError::WrongTag {
            expected: Symmetry::Hermitian,
            got: h.symmetry(),
        });
    }
    let eig = nalgebra::SymmetricEigen::new(h.matrix().clone());
    let min_eigenvalue = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min_eigenvalue > PD_THRESHOLD) {
        return Err(LinalgError::NotStrictlyPlurisubharmonic { min_eigenvalue });
    }
    let chol = h
        .matrix()
        .clone()
        .cholesky()
        .ok_or(LinalgError::NotStrictlyPlurisubharmonic { min_eigenvalue })?;
    let c = chol
        .l()
        .adjoint()
        .try_inverse()
        .ok_or(LinalgError::NotStrictlyPlurisubharmonic { min_eigenvalue })?;
    Ok(LeviNormalization { c })
}

/// Substitution z = C z' on a quadratic form: returns Cᵀ Q C.
pub fn transform_quadratic(
    q: &ComplexMatrix,
    c: &DMatrix<Complex64>,
) -> Result<ComplexMatrix, LinalgError> {
    if q.symmetry() != Symmetry::Symmetric {
        return Err(LinalgError::WrongTag {
            expected: Symmetry::Symmetric,
            got: q.symmetry(),
        });
    }
    check_dims(q, c)?;
    let raw = c.transpose() * q.matrix() * c;
    let sym = (&raw + raw.transpose()).scale(0.5);
    ComplexMatrix::symmetric(sym)
}

/// Substitution z = C z' on a Hermitian form: returns C^H H C.
pub fn transform_hermitian(
    h: &ComplexMatrix,
    c: &DMatrix<Complex64>,
) -> Result<ComplexMatrix, LinalgError> {
    if h.symmetry() != Symmetry::Hermitian {
        return Err(LinalgError::WrongTag {
            expected: Symmetry::Hermitian,
            got: h.symmetry(),
        });
    }
    check_dims(h, c)?;
    let raw = c.adjoint() * h.matrix() * c;
    let herm = (&raw + raw.adjoint()).scale(0.5);
    ComplexMatrix::hermitian(herm)
}

fn check_dims(m: &ComplexMatrix, c: &DMatrix<Complex64>) -> Result<(), LinalgError> {
    if c.nrows() != c.ncols() {
        return Err(LinalgError::NotSquare {
            rows: c.nrows(),
            cols: c.ncols(),
        });
    }
    if m.dim() != c.nrows() {
        return Err(LinalgError::DimensionMismatch {
            left: m.dim(),
            right: c.nrows(),
        });
    }
    Ok(())
}

pub(crate) fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_complex_matrix(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<Complex64> {
        DMatrix::from_fn(n, n, |_, _| {
            c(rng.sample(StandardNormal), rng.sample(StandardNormal))
        })
    }

    fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
        let a = random_complex_matrix(rng, n);
        ComplexMatrix::symmetric((&a + a.transpose()).scale(0.5)).unwrap()
    }

    fn random_hermitian_pd(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
        let a = random_complex_matrix(rng, n);
        let h = &a * a.adjoint() + DMatrix::identity(n, n).scale(0.1);
        ComplexMatrix::hermitian((&h + h.adjoint()).scale(0.5)).unwrap()
    }

    fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<Complex64> {
        let a = random_complex_matrix(rng, n);
        let qr = a.qr();
        qr.q()
    }

    fn unitary_defect(u: &DMatrix<Complex64>) -> f64 {
        let n = u.nrows();
        max_abs(&(u.adjoint() * u - DMatrix::identity(n, n)))
    }

    fn svd_singular_values(m: &DMatrix<Complex64>) -> Vec<f64> {
        let svd = m.clone().svd(false, false);
        let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }

    #[test]
    fn zero_matrix_factorizes_to_identity() {
        let q = ComplexMatrix::symmetric(DMatrix::zeros(3, 3)).unwrap();
        let f = takagi_factorize(&q).unwrap();
        assert_eq!(f.d.as_slice(), &[0.0, 0.0, 0.0]);
        assert!(max_abs(&(f.u.clone() - DMatrix::identity(3, 3))) == 0.0);
    }

    #[test]
    fn diagonal_nonnegative_matrix_is_its_own_factorization() {
        let q = ComplexMatrix::symmetric(DMatrix::from_diagonal(&DVector::from_vec(vec![
            c(3.0, 0.0),
            c(1.0, 0.0),
        ])))
        .unwrap();
        let f = takagi_factorize(&q).unwrap();
        assert!((f.d[0] - 3.0).abs() < 1e-12);
        assert!((f.d[1] - 1.0).abs() < 1e-12);
        assert!(max_abs(&(f.reconstruct() - q.matrix())) < 1e-12);
    }

    #[test]
    fn antidiagonal_pair_reconstructs_with_tied_singular_values() {
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 1)] = c(1.0, 0.0);
        m[(1, 0)] = c(1.0, 0.0);
        let q = ComplexMatrix::symmetric(m).unwrap();
        let f = takagi_factorize(&q).unwrap();
        assert!((f.d[0] - 1.0).abs() < 1e-12);
        assert!((f.d[1] - 1.0).abs() < 1e-12);
        assert!(max_abs(&(f.reconstruct() - q.matrix())) < 1e-10);
        assert!(unitary_defect(&f.u) < 1e-12);
    }

    #[test]
    fn random_factorizations_meet_tolerances() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..400 {
            let n = 1 + trial % 8;
            let q = random_symmetric(&mut rng, n);
            let f = takagi_factorize(&q).unwrap();
            assert!(unitary_defect(&f.u) < 1e-10);
            assert!(max_abs(&(f.reconstruct() - q.matrix())) < 1e-9);
            for i in 1..n {
                assert!(f.d[i - 1] >= f.d[i]);
                assert!(f.d[i] >= 0.0);
            }
            let sv = svd_singular_values(q.matrix());
            for i in 0..n {
                assert!((f.d[i] - sv[i]).abs() < 1e-9, "d disagrees with SVD");
            }
        }
    }

    #[test]
    fn rank_deficient_input_keeps_unitary_factor() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 2..=6 {
            // rank-1 symmetric: v vᵀ has n-1 zero singular values.
            let v = DVector::from_fn(n, |_, _| {
                c(rng.sample(StandardNormal), rng.sample(StandardNormal))
            });
            let q = ComplexMatrix::symmetric(&v * v.transpose()).unwrap();
            let f = takagi_factorize(&q).unwrap();
            assert!(unitary_defect(&f.u) < 1e-10);
            assert!(max_abs(&(f.reconstruct() - q.matrix())) < 1e-9);
        }
    }

    #[test]
    fn singular_values_are_unitarily_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for trial in 0..100 {
            let n = 2 + trial % 6;
            let q = random_symmetric(&mut rng, n);
            let v = random_unitary(&mut rng, n);
            let rotated = transform_quadratic(&q, &v).unwrap();
            let d0 = takagi_factorize(&q).unwrap().d;
            let d1 = takagi_factorize(&rotated).unwrap().d;
            for i in 0..n {
                assert!((d0[i] - d1[i]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn factorization_is_idempotent_on_its_output() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for n in 1..=8 {
            let q = random_symmetric(&mut rng, n);
            let f = takagi_factorize(&q).unwrap();
            let again =
                takagi_factorize(&ComplexMatrix::symmetric(f.reconstruct()).unwrap()).unwrap();
            for i in 0..n {
                assert!((f.d[i] - again.d[i]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn levi_identity_is_fixed() {
        let h = ComplexMatrix::hermitian(DMatrix::identity(3, 3)).unwrap();
        let norm = levi_normalize(&h).unwrap();
        assert!(max_abs(&(norm.c.clone() - DMatrix::identity(3, 3))) < 1e-14);
    }

    #[test]
    fn levi_diagonal_scales_by_inverse_square_roots() {
        let h = ComplexMatrix::hermitian(DMatrix::from_diagonal(&DVector::from_vec(vec![
            c(4.0, 0.0),
            c(1.0, 0.0),
        ])))
        .unwrap();
        let norm = levi_normalize(&h).unwrap();
        assert!((norm.c[(0, 0)] - c(0.5, 0.0)).norm() < 1e-14);
        assert!((norm.c[(1, 1)] - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn levi_normalization_matches_eigen_inverse_square_root_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for trial in 0..1000 {
            let n = 1 + trial % 8;
            let h = random_hermitian_pd(&mut rng, n);
            let norm = levi_normalize(&h).unwrap();
            let normalized = transform_hermitian(&h, &norm.c).unwrap();
            assert!(max_abs(&(normalized.matrix() - DMatrix::identity(n, n))) < 1e-10);

            // independent route: H^{-1/2} from the eigendecomposition also
            // brings H to the identity
            let eig = nalgebra::SymmetricEigen::new(h.matrix().clone());
            let inv_sqrt = DMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    c(1.0 / eig.eigenvalues[i].sqrt(), 0.0)
                } else {
                    c(0.0, 0.0)
                }
            });
            let e = &eig.eigenvectors * inv_sqrt * eig.eigenvectors.adjoint();
            let via_eigen = transform_hermitian(&h, &e).unwrap();
            assert!(max_abs(&(via_eigen.matrix() - DMatrix::identity(n, n))) < 1e-10);
        }
    }

    #[test]
    fn indefinite_levi_form_is_rejected() {
        let h = ComplexMatrix::hermitian(DMatrix::from_diagonal(&DVector::from_vec(vec![
            c(1.0, 0.0),
            c(-1.0, 0.0),
        ])))
        .unwrap();
        let err = levi_normalize(&h).unwrap_err();
        assert!(err.to_string().contains("not strictly plurisubharmonic"));
    }

    #[test]
    fn tags_are_validated_on_construction() {
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 1)] = c(1.0, 0.0);
        assert!(ComplexMatrix::symmetric(m.clone()).is_err());
        m[(1, 0)] = c(1.0, 0.0);
        assert!(ComplexMatrix::symmetric(m).is_ok());

        let mut h = DMatrix::zeros(2, 2);
        h[(0, 0)] = c(0.0, 1.0);
        assert!(ComplexMatrix::hermitian(h).is_err());
    }

    #[test]
    fn takagi_rejects_wrong_tag() {
        let h = ComplexMatrix::hermitian(DMatrix::identity(2, 2)).unwrap();
        assert!(matches!(
            takagi_factorize(&h),
            Err(LinalgError::WrongTag { .. })
        ));
    }

    #[test]
    fn quadratic_transform_examples() {
        let q = ComplexMatrix::symmetric(DMatrix::from_diagonal(&DVector::from_vec(vec![
            c(1.0, 0.0),
            c(0.0, 0.0),
        ])))
        .unwrap();
        let id = DMatrix::identity(2, 2);
        let same = transform_quadratic(&q, &id).unwrap();
        assert!(max_abs(&(same.matrix() - q.matrix())) == 0.0);

        let scale = DMatrix::from_diagonal(&DVector::from_vec(vec![c(0.5, 0.0), c(1.0, 0.0)]));
        let scaled = transform_quadratic(&q, &scale).unwrap();
        assert!((scaled.matrix()[(0, 0)] - c(0.25, 0.0)).norm() < 1e-15);
        assert!(scaled.matrix()[(1, 1)].norm() < 1e-15);
    }

    #[test]
    fn transform_rejects_dimension_mismatch() {
        let q = ComplexMatrix::symmetric(DMatrix::zeros(2, 2)).unwrap();
        let c3 = DMatrix::<Complex64>::identity(3, 3);
        assert!(matches!(
            transform_quadratic(&q, &c3),
            Err(LinalgError::DimensionMismatch { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn transformed_quadratics_stay_symmetric(seed in 0u64..1u64 << 48, n in 1usize..6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let q = random_symmetric(&mut rng, n);
            let m = random_complex_matrix(&mut rng, n);
            let t = transform_quadratic(&q, &m).unwrap();
            prop_assert!(max_abs(&(t.matrix() - t.matrix().transpose())) <= 1e-12);
        }

        #[test]
        fn takagi_invariants_hold_on_random_input(seed in 0u64..1u64 << 48, n in 1usize..9) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let q = random_symmetric(&mut rng, n);
            let f = takagi_factorize(&q).unwrap();
            prop_assert!(unitary_defect(&f.u) <= 1e-10);
            prop_assert!(max_abs(&(f.reconstruct() - q.matrix())) <= 1e-9);
            for i in 1..n {
                prop_assert!(f.d[i - 1] >= f.d[i]);
            }
            prop_assert!(f.d.iter().all(|v| *v >= 0.0));
        }
    }
}
