//! Cross-checks against independent computations: nalgebra factorizations
//! and eigensolvers, closed-form spectra, Kronecker products and explicit
//! dense operator products.

use approx::assert_abs_diff_eq;
use glt_schwarz::assembly::{abs_theta_coefficient, assemble, univariate_matrices, Family, ProblemSpec};
use glt_schwarz::dense::DenseMatrix;
use glt_schwarz::matrices::{toeplitz, BandLu, StructuredMatrix, Symmetry};
use glt_schwarz::partition::{make_partition, operators};
use glt_schwarz::schwarz::{setup, Kind};
use glt_schwarz::spectra::{eigenvalues_dense, general_eigenvalues, symmetric_eigenvalues};
use glt_schwarz::symbols::{fourier_coeffs, Symbol};
use nalgebra::{Complex, DMatrix};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::f64::consts::PI;

fn to_na(m: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

fn random_band(rng: &mut StdRng, n: usize, lower: usize, upper: usize) -> StructuredMatrix {
    let mut trip = Vec::new();
    for i in 0..n {
        for j in i.saturating_sub(lower)..=(i + upper).min(n - 1) {
            let v: f64 = rng.gen_range(-1.0..1.0);
            trip.push((i, j, if i == j { v + 2.0 * (lower + upper + 1) as f64 } else { v }));
        }
    }
    StructuredMatrix::from_triplets(n, trip, Symmetry::General).unwrap()
}

/// Greedy nearest matching; returns the largest distance.
fn match_spectra(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let (k, d) = b
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, y)| (k, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        used[k] = true;
        worst = worst.max(d);
    }
    worst
}

#[test]
fn band_lu_matches_nalgebra_lu() {
    let mut rng = StdRng::seed_from_u64(7);
    for (n, kl, ku) in [(30, 2, 1), (50, 0, 3), (41, 4, 4), (12, 11, 11)] {
        let a = random_band(&mut rng, n, kl, ku);
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = BandLu::factor(&a).unwrap().solve(&b).unwrap();
        let want = to_na(&a.to_dense()).lu().solve(&nalgebra::DVector::from_vec(b)).unwrap();
        for i in 0..n {
            assert_abs_diff_eq!(x[i], want[i], epsilon = 1e-11);
        }
    }
}

#[test]
fn symmetric_eigenvalues_match_nalgebra() {
    let mut rng = StdRng::seed_from_u64(11);
    for n in [1, 2, 5, 40, 120] {
        let mut raw = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v: f64 = rng.gen_range(-1.0..1.0);
                raw.as_mut_slice()[i * n + j] = v;
                raw.as_mut_slice()[j * n + i] = v;
            }
        }
        let ours = symmetric_eigenvalues(&raw).unwrap();
        let mut theirs: Vec<f64> = to_na(&raw).symmetric_eigenvalues().iter().copied().collect();
        theirs.sort_by(f64::total_cmp);
        for (a, b) in ours.iter().zip(&theirs) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-11);
        }
    }
}

#[test]
fn general_eigenvalues_match_nalgebra() {
    let mut rng = StdRng::seed_from_u64(13);
    for n in [3, 10, 33, 90] {
        let vals: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let m = DenseMatrix::from_fn(n, n, |i, j| vals[i * n + j]);
        let ours = general_eigenvalues(&m).unwrap();
        let theirs: Vec<Complex64> = to_na(&m)
            .complex_eigenvalues()
            .iter()
            .map(|z: &Complex<f64>| Complex64::new(z.re, z.im))
            .collect();
        assert!(match_spectra(&ours, &theirs) < 1e-9, "n = {n}");
    }
}

#[test]
fn eigenpair_residual_contract_on_multiplicative_image() {
    // For each lambda, the smallest singular value of M - lambda I bounds
    // min ||Mv - lambda v|| over unit v.
    let a = assemble(&ProblemSpec::new(Family::Fd1d, 48)).unwrap().matrix;
    let p = make_partition(48, 3, 4).unwrap();
    let m = setup(&a, &p, Kind::Bms, None).unwrap().dense_preconditioned().unwrap();
    let eigs = eigenvalues_dense(&m).unwrap();
    let fro = m.frobenius_norm();
    let mc: DMatrix<Complex<f64>> = to_na(&m).map(|v| Complex::new(v, 0.0));
    for lam in eigs {
        let shifted = &mc - DMatrix::<Complex<f64>>::identity(48, 48) * Complex::new(lam.re, lam.im);
        let smin = shifted.singular_values().iter().copied().fold(f64::INFINITY, f64::min);
        assert!(smin <= 1e-8 * fro, "lambda {lam}: {smin}");
    }
}

#[test]
fn tridiagonal_toeplitz_closed_form() {
    for n in [5, 17, 64, 200] {
        let a = assemble(&ProblemSpec::new(Family::Fd1d, n)).unwrap().matrix;
        let eigs = symmetric_eigenvalues(&a.to_dense()).unwrap();
        for (j, v) in eigs.iter().enumerate() {
            let want = 2.0 - 2.0 * ((j + 1) as f64 * PI / (n + 1) as f64).cos();
            assert_abs_diff_eq!(*v, want, epsilon = 1e-10);
        }
    }
}

#[test]
fn abs_theta_coefficients_match_quadrature() {
    let coeffs = fourier_coeffs(&Symbol::abs_theta(), 12, 1 << 16).unwrap();
    for k in -12i64..=12 {
        let numeric = coeffs[(k + 12) as usize][(0, 0)];
        assert_abs_diff_eq!(numeric.re, abs_theta_coefficient(k), epsilon = 1e-8);
        assert!(numeric.im.abs() < 1e-12);
    }
    let a = assemble(&ProblemSpec::new(Family::ToeplitzAbsTheta, 3)).unwrap().matrix;
    assert_abs_diff_eq!(a.get(0, 0), PI / 2.0, epsilon = 1e-15);
    assert_abs_diff_eq!(a.get(0, 1), -2.0 / PI, epsilon = 1e-15);
    assert_eq!(a.get(0, 2), 0.0);
}

#[test]
fn spline_matrices_are_truncated_block_toeplitz() {
    for (p, n) in [(2usize, 9usize), (3, 7)] {
        let a = assemble(&ProblemSpec::new(Family::Spline1dC0, n).with_degree(p)).unwrap().matrix;
        let coeffs = fourier_coeffs(&Symbol::spline_c0(p).unwrap(), 1, 256).unwrap();
        let t = toeplitz(&coeffs, n).unwrap();
        assert_eq!(a.dim(), p * n - 1);
        for i in 0..a.dim() {
            for j in 0..a.dim() {
                assert_abs_diff_eq!(a.get(i, j), t.get(i, j), epsilon = 1e-12);
            }
        }
    }
}

#[test]
fn spline_symbol_fourier_coefficients() {
    let f = fourier_coeffs(&Symbol::spline_c0(2).unwrap(), 2, 4096).unwrap();
    let f0 = &f[2];
    let want = [[4.0, -2.0], [-2.0, 8.0]];
    for a in 0..2 {
        for b in 0..2 {
            assert_abs_diff_eq!(f0[(a, b)].re, want[a][b] / 3.0, epsilon = 1e-10);
            assert_abs_diff_eq!(f0[(a, b)].im, 0.0, epsilon = 1e-10);
        }
    }
    assert!(f[0].max_abs() < 1e-12 && f[4].max_abs() < 1e-12);

    let k3 = Symbol::spline_c0(3).unwrap().eval(&[0.5], &[0.0]).unwrap();
    let v = [Complex64::new(1.0, 0.0); 3];
    assert!(k3.mul_vec(&v).iter().all(|z| z.norm() < 1e-12));
}

#[test]
fn iga2d_constant_coefficient_is_kronecker_sum() {
    for (p, n) in [(2, 6), (3, 5), (2, 8)] {
        let a = assemble(&ProblemSpec::new(Family::Iga2d, n).with_degree(p)).unwrap().matrix;
        let (k, m) = univariate_matrices(n, p).unwrap();
        let (k, m) = (to_na(&k.to_dense()), to_na(&m.to_dense()));
        let want = m.kronecker(&k) + k.kronecker(&m);
        let got = to_na(&a.to_dense());
        assert_eq!(got.nrows(), (n + p - 2) * (n + p - 2));
        assert!((got - want).amax() <= 1e-12);
    }
}

/// T = E_nu ... E_1 with E_i = I - W_i^T A_i^{-1} R_i A for multiplicative
/// kinds, I - sum_i W_i^T A_i^{-1} R_i A for additive ones, all dense.
fn explicit_iteration(a: &StructuredMatrix, nu: usize, o: usize, kind: Kind) -> DMatrix<f64> {
    let n = a.dim();
    let part = make_partition(n, nu, o).unwrap();
    let ops = operators(&part, kind.default_scheme());
    let ad = to_na(&a.to_dense());
    let eye = DMatrix::<f64>::identity(n, n);
    let pieces: Vec<DMatrix<f64>> = (0..nu)
        .map(|i| {
            let r = ops.range(i);
            let len = r.len();
            let restrict = DMatrix::from_fn(len, n, |k, g| f64::from(u8::from(g == r.start + k)));
            let weighted = DMatrix::from_fn(len, n, |k, g| if g == r.start + k { ops.weights(i)[k] } else { 0.0 });
            let local = &restrict * &ad * restrict.transpose();
            weighted.transpose() * local.try_inverse().unwrap() * &restrict * &ad
        })
        .collect();
    if kind.is_multiplicative() {
        pieces.iter().fold(eye.clone(), |t, c| (&eye - c) * t)
    } else {
        pieces.iter().fold(eye, |t, c| t - c)
    }
}

#[test]
fn iteration_operators_match_explicit_products() {
    let mut rng = StdRng::seed_from_u64(21);
    for trial in 0..20 {
        let n = rng.gen_range(12..60);
        let nu = rng.gen_range(2..5);
        let kind = [Kind::Bj, Kind::Bgs, Kind::Bas, Kind::Bms, Kind::Bras, Kind::Brms][trial % 6];
        let o = if kind.requires_zero_overlap() { 0 } else { rng.gen_range(0..=n / nu) };
        let a = if trial % 2 == 0 {
            random_band(&mut rng, n, 2, 2)
        } else {
            assemble(&ProblemSpec::new(Family::Fd1d, n).with_coefficient(Symbol::one_plus_x_squared()))
                .unwrap()
                .matrix
        };
        let pre = setup(&a, &make_partition(n, nu, o).unwrap(), kind, None).unwrap();
        let got = to_na(&pre.dense_iteration().unwrap());
        let want = explicit_iteration(&a, nu, o, kind);
        let diff = (got - want).amax();
        assert!(diff <= 1e-10, "{kind} n={n} nu={nu} o={o}: {diff}");
    }
}

#[test]
fn reciprocal_identity_on_block_jacobi() {
    let a = assemble(&ProblemSpec::new(Family::Fd1d, 30).with_coefficient(Symbol::one_plus_x_squared()))
        .unwrap()
        .matrix;
    let pre = setup(&a, &make_partition(30, 2, 0).unwrap(), Kind::Bj, None).unwrap();
    let mut from_inverse: Vec<f64> = eigenvalues_dense(&pre.dense_inverse_image().unwrap())
        .unwrap()
        .iter()
        .map(|z| 1.0 / z.re)
        .collect();
    from_inverse.sort_by(f64::total_cmp);
    let mut blocks: Vec<f64> = [0..15, 15..30]
        .into_iter()
        .flat_map(|r| symmetric_eigenvalues(&a.principal_block(r).unwrap().to_dense()).unwrap())
        .collect();
    blocks.sort_by(f64::total_cmp);
    for (x, y) in from_inverse.iter().zip(&blocks) {
        assert_abs_diff_eq!(*x, *y, epsilon = 1e-8);
    }
}

#[test]
fn additive_inverse_image_matches_sum_of_local_inverses() {
    let a = assemble(&ProblemSpec::new(Family::ToeplitzAbsTheta, 40)).unwrap().matrix;
    let part = make_partition(40, 3, 5).unwrap();
    let pre = setup(&a, &part, Kind::Bas, None).unwrap();
    let ad = to_na(&a.to_dense());
    let mut want = DMatrix::<f64>::zeros(40, 40);
    for r in part.extended() {
        let inv = ad.view((r.start, r.start), (r.len(), r.len())).clone_owned().try_inverse().unwrap();
        let mut v = want.view_mut((r.start, r.start), (r.len(), r.len()));
        v += inv;
    }
    let got = to_na(&pre.dense_inverse_image().unwrap());
    assert!((got - want).amax() <= 1e-12);
}
