//! Dense complex matrix helpers shared by the representation modules:
//! orthonormal complements, seeded Haar-like unitaries, null spaces and
//! polar factors.

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;

/// Relative singular-value threshold for rank decisions.
pub const RANK_REL_TOL: f64 = 1e-10;

pub fn czero() -> C64 {
    Complex::new(0.0, 0.0)
}

pub fn creal(x: f64) -> C64 {
    Complex::new(x, 0.0)
}

pub fn frobenius_norm(m: &CMat) -> f64 {
    m.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Frobenius distance of `m` from the identity of its own size.
pub fn identity_residual(m: &CMat) -> f64 {
    let mut sum = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let expect = if i == j { creal(1.0) } else { czero() };
            sum += (m[(i, j)] - expect).norm_sqr();
        }
    }
    sum.sqrt()
}

pub fn is_unitary(m: &CMat, tol: f64) -> bool {
    m.is_square() && identity_residual(&(m.adjoint() * m)) <= tol
}

/// True when every entry has exactly zero imaginary part.
pub fn is_real(m: &CMat) -> bool {
    m.iter().all(|c| c.im == 0.0)
}

/// Order in which candidate basis vectors are tried when completing an
/// isometry to a full orthonormal basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PivotOrder {
    /// Standard basis vectors in ascending index order (the default).
    Ascending,
    /// Standard basis vectors in a deterministic seed-dependent order.
    Seeded(u64),
}

impl Default for PivotOrder {
    fn default() -> Self {
        PivotOrder::Ascending
    }
}

/// Completes the columns of the isometry `iso` (shape m x k, orthonormal
/// columns) to an orthonormal basis of the ambient space and returns the
/// new columns as an m x (m-k) matrix.
///
/// Modified Gram-Schmidt with one re-orthogonalization pass over standard
/// basis candidates in the configured pivot order. Real input yields real
/// output since no complex constants are introduced.
///
/// Returns `None` when fewer than m-k candidates survive, which signals a
/// numerical rank failure in the caller.
pub fn orthonormal_complement(iso: &CMat, order: PivotOrder) -> Option<CMat> {
    let m = iso.nrows();
    let k = iso.ncols();
    debug_assert!(k <= m);
    let want = m - k;
    if want == 0 {
        return Some(CMat::zeros(m, 0));
    }

    let mut candidates: Vec<usize> = (0..m).collect();
    if let PivotOrder::Seeded(seed) = order {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // Fisher-Yates shuffle.
        for i in (1..candidates.len()).rev() {
            let j = rng.gen_range(0..=i);
            candidates.swap(i, j);
        }
    }

    let mut accepted: Vec<nalgebra::DVector<C64>> = Vec::with_capacity(want);
    for &j in &candidates {
        if accepted.len() == want {
            break;
        }
        let mut v = nalgebra::DVector::<C64>::zeros(m);
        v[j] = creal(1.0);
        for _ in 0..2 {
            if k > 0 {
                let coeffs = iso.adjoint() * &v;
                v -= iso * coeffs;
            }
            for u in &accepted {
                let c = u.adjoint() * &v;
                v -= u * c[(0, 0)];
            }
        }
        let norm = v.norm();
        if norm > 1e-6 {
            accepted.push(v / creal(norm));
        }
    }
    if accepted.len() != want {
        return None;
    }
    Some(CMat::from_columns(&accepted))
}

/// Deterministic Haar-like random unitary of size n from a seeded RNG:
/// a complex Gaussian matrix followed by QR with the R-diagonal phases
/// absorbed into Q.
pub fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> CMat {
    if n == 0 {
        return CMat::zeros(0, 0);
    }
    let g = CMat::from_fn(n, n, |_, _| {
        let (a, b) = gaussian_pair(rng);
        Complex::new(a, b)
    });
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let mut unitary = q;
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { creal(1.0) };
        for i in 0..n {
            unitary[(i, j)] *= phase;
        }
    }
    unitary
}

/// One standard normal pair via Box-Muller on the uniform generator.
fn gaussian_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = 2.0 * std::f64::consts::PI * u2;
    (r * theta.cos(), r * theta.sin())
}

/// Orthonormal basis of the null space of `m`, as matrix columns. Singular
/// values at or below `RANK_REL_TOL` times the largest are treated as zero.
pub fn null_space(m: &CMat) -> CMat {
    let cols = m.ncols();
    if cols == 0 {
        return CMat::zeros(0, 0);
    }
    if m.nrows() == 0 {
        return CMat::identity(cols, cols);
    }
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested v_t");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let threshold = RANK_REL_TOL * smax.max(1e-300);
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > threshold)
        .count();
    // Rows rank.. of v_t span the null space; v_t may have fewer rows than
    // cols when nrows < ncols, the remaining directions are free.
    let mut basis: Vec<nalgebra::DVector<C64>> = Vec::new();
    for r in rank..v_t.nrows() {
        basis.push(v_t.row(r).adjoint());
    }
    if v_t.nrows() < cols {
        // Complete the free directions orthogonal to all rows of v_t.
        let v_rows = CMat::from_fn(cols, v_t.nrows(), |i, j| v_t[(j, i)].conj());
        if let Some(extra) = orthonormal_complement(&v_rows, PivotOrder::Ascending) {
            for j in 0..extra.ncols() {
                basis.push(extra.column(j).into_owned());
            }
        }
    }
    if basis.is_empty() {
        return CMat::zeros(cols, 0);
    }
    CMat::from_columns(&basis)
}

/// The unitary polar factor U of `m` = U P with P positive semidefinite,
/// computed from the SVD. Requires a square matrix.
pub fn polar_unitary(m: &CMat) -> CMat {
    debug_assert!(m.is_square());
    if m.nrows() == 0 {
        return CMat::zeros(0, 0);
    }
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("requested u");
    let v_t = svd.v_t.expect("requested v_t");
    u * v_t
}

/// Smallest singular value, or zero for an empty matrix.
pub fn smallest_singular_value(m: &CMat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    let svd = m.clone().svd(false, false);
    svd.singular_values.iter().cloned().fold(f64::MAX, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complement_of_partial_isometry() {
        // First column of the 3-dimensional standard basis.
        let mut iso = CMat::zeros(3, 1);
        iso[(0, 0)] = creal(1.0);
        let comp = orthonormal_complement(&iso, PivotOrder::Ascending).unwrap();
        assert_eq!(comp.ncols(), 2);
        assert!(identity_residual(&(comp.adjoint() * &comp)) < 1e-12);
        assert!(frobenius_norm(&(iso.adjoint() * &comp)) < 1e-12);
    }

    #[test]
    fn complement_of_empty_isometry_is_identity_like() {
        let iso = CMat::zeros(3, 0);
        let comp = orthonormal_complement(&iso, PivotOrder::Ascending).unwrap();
        assert_eq!(comp.ncols(), 3);
        assert!(identity_residual(&(comp.adjoint() * &comp)) < 1e-12);
    }

    #[test]
    fn complement_keeps_real_input_real() {
        let mut iso = CMat::zeros(3, 1);
        iso[(0, 0)] = creal(0.6);
        iso[(1, 0)] = creal(0.8);
        let comp = orthonormal_complement(&iso, PivotOrder::Ascending).unwrap();
        assert!(is_real(&comp));
    }

    #[test]
    fn seeded_complement_is_deterministic_and_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let q = random_unitary(4, &mut rng);
        let iso = q.columns(0, 2).into_owned();
        let c1 = orthonormal_complement(&iso, PivotOrder::Seeded(99)).unwrap();
        let c2 = orthonormal_complement(&iso, PivotOrder::Seeded(99)).unwrap();
        assert_eq!(c1, c2);
        assert!(identity_residual(&(c1.adjoint() * &c1)) < 1e-10);
        assert!(frobenius_norm(&(iso.adjoint() * &c1)) < 1e-10);
    }

    #[test]
    fn random_unitary_is_unitary_and_deterministic() {
        let mut rng1 = ChaCha8Rng::seed_from_u64(42);
        let mut rng2 = ChaCha8Rng::seed_from_u64(42);
        let u1 = random_unitary(5, &mut rng1);
        let u2 = random_unitary(5, &mut rng2);
        assert_eq!(u1, u2);
        assert!(is_unitary(&u1, 1e-10));
    }

    #[test]
    fn null_space_of_rank_one() {
        // [1 1; 1 1] has null space spanned by (1, -1)/sqrt(2).
        let m = CMat::from_fn(2, 2, |_, _| creal(1.0));
        let ns = null_space(&m);
        assert_eq!(ns.ncols(), 1);
        assert!(frobenius_norm(&(&m * &ns)) < 1e-10);
    }

    #[test]
    fn polar_of_unitary_is_itself() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_unitary(3, &mut rng);
        let p = polar_unitary(&u);
        assert!(frobenius_norm(&(&p - &u)) < 1e-10);
    }
}
