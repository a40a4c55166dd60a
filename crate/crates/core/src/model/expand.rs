use nalgebra::DMatrix;
use num_complex::Complex64;

/// ω(a) = [Re a; Im a].
pub fn real_expand_vector(a: &[Complex64]) -> Vec<f64> {
    a.iter()
        .map(|c| c.re)
        .chain(a.iter().map(|c| c.im))
        .collect()
}

/// ω(A) = [Re A, -Im A; Im A, Re A].
pub fn real_expand_matrix(a: &DMatrix<Complex64>) -> DMatrix<f64> {
    let (r, c) = a.shape();
    DMatrix::from_fn(2 * r, 2 * c, |i, j| {
        let z = a[(i % r, j % c)];
        match (i < r, j < c) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Inverse of [`real_expand_vector`] for even-length input.
pub fn complex_from_real(v: &[f64]) -> Vec<Complex64> {
    let n = v.len() / 2;
    (0..n).map(|i| Complex64::new(v[i], v[n + i])).collect()
}
