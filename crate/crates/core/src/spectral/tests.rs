use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::temporal_graph::{build_supra_system, constant_weights, lart_weights, TemporalNetwork};
use crate::wavelet::WaveletFilterSpec;

fn system(net: &TemporalNetwork, omega: f64) -> SupraSystem {
    build_supra_system(net, &constant_weights(net, omega).unwrap()).unwrap()
}

fn path_layers(n: usize, t: usize) -> TemporalNetwork {
    TemporalNetwork::from_edges(n, t, (0..t).flat_map(|l| (0..n - 1).map(move |i| (l, i, i + 1, 1.0)))).unwrap()
}

fn two_cliques(k: usize, t: usize, bridge: bool) -> TemporalNetwork {
    let mut edges = Vec::new();
    for l in 0..t {
        for c in 0..2 {
            for i in 0..k {
                for j in i + 1..k {
                    edges.push((l, c * k + i, c * k + j, 1.0));
                }
            }
        }
        if bridge {
            edges.push((l, 0, k, 1.0));
        }
    }
    TemporalNetwork::from_edges(2 * k, t, edges).unwrap()
}

fn dense_cfg() -> EigenConfig {
    EigenConfig { method: EigenMethod::Dense, ..Default::default() }
}

#[test]
fn zero_eigenvalues_count_components() {
    // uncoupled layers: one zero eigenvalue per layer component
    let net = two_cliques(3, 2, false);
    let sys = system(&net, 0.0);
    let basis = full_spectrum(&sys);
    let zeros = basis.eigenvalues().iter().filter(|l| l.abs() < 1e-10).count();
    assert_eq!(zeros, 4);
    let coupled = full_spectrum(&system(&net, 1.0));
    assert_eq!(coupled.eigenvalues().iter().filter(|l| l.abs() < 1e-10).count(), 2);
}

#[test]
fn two_coupled_paths_match_hand_built_laplacian() {
    let net = path_layers(4, 2);
    let sys = system(&net, 1.0);
    // independent construction of I - D^-1/2 A D^-1/2
    let mut a = DMatrix::<f64>::zeros(8, 8);
    for l in 0..2 {
        for i in 0..3 {
            a[(l * 4 + i, l * 4 + i + 1)] = 1.0;
            a[(l * 4 + i + 1, l * 4 + i)] = 1.0;
        }
    }
    for i in 0..4 {
        a[(i, i + 4)] = 1.0;
        a[(i + 4, i)] = 1.0;
    }
    let d: Vec<f64> = (0..8).map(|r| a.row(r).sum()).collect();
    let lap = DMatrix::from_fn(8, 8, |r, c| f64::from(u8::from(r == c)) - a[(r, c)] / (d[r] * d[c]).sqrt());
    assert!((sys.laplacian().to_dense() - &lap).amax() < 1e-15);
    let mut ev: Vec<f64> = lap.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    let basis = leading_eigenpairs(&sys, 8, &dense_cfg()).unwrap();
    for (x, y) in basis.eigenvalues().iter().zip(&ev) {
        assert!((x - y).abs() < 1e-12);
    }
}

#[test]
fn full_basis_reconstructs_the_laplacian() {
    let net = two_cliques(4, 3, true);
    let sys = build_supra_system(&net, &lart_weights(&net)).unwrap();
    let b = full_spectrum(&sys);
    let chi = b.eigenvectors();
    let lam = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(b.eigenvalues().to_vec()));
    let rebuilt = chi * lam * chi.transpose();
    assert!((rebuilt - sys.laplacian().to_dense()).amax() < 1e-12);
    let gram = chi.transpose() * chi;
    assert!((gram - DMatrix::identity(24, 24)).amax() < 1e-12);
    assert!(b.eigenvalues().iter().all(|&l| l > -1e-12 && l < 2.0 + 1e-12));
}

#[test]
fn lanczos_and_dense_agree_on_a_supra_laplacian() {
    let net = two_cliques(10, 6, true);
    let sys = build_supra_system(&net, &lart_weights(&net)).unwrap();
    let lz = leading_eigenpairs(&sys, 8, &EigenConfig { method: EigenMethod::Lanczos, ..Default::default() }).unwrap();
    let de = leading_eigenpairs(&sys, 8, &dense_cfg()).unwrap();
    for (x, y) in lz.eigenvalues().iter().zip(de.eigenvalues()) {
        assert!((x - y).abs() < 1e-9);
    }
}

#[test]
fn null_basis_of_a_regular_layer_is_uniform() {
    let net = two_cliques(3, 1, false);
    let ring = TemporalNetwork::from_edges(5, 1, (0..5).map(|i| (0, i.min((i + 1) % 5), i.max((i + 1) % 5), 1.0))).unwrap();
    let nb = layer_null_basis(&ring, &system(&ring, 0.0));
    for r in 0..5 {
        assert!((nb.vectors()[(r, 0)] - 1.0 / 5f64.sqrt()).abs() < 1e-15);
    }
    assert_eq!(nb.n_extra(), 0);
    // two components: one extra column
    assert_eq!(layer_null_basis(&net, &system(&net, 0.0)).n_extra(), 1);
}

#[test]
fn null_basis_of_a_star_follows_square_root_degrees() {
    let star = TemporalNetwork::from_edges(4, 2, (0..2).flat_map(|l| (1..4).map(move |j| (l, 0, j, 1.0)))).unwrap();
    let sys = system(&star, 1.0);
    let nb = layer_null_basis(&star, &sys);
    let expect = [3f64.sqrt(), 1.0, 1.0, 1.0].map(|x| x / 6f64.sqrt());
    for (r, e) in expect.iter().enumerate() {
        assert!((nb.vectors()[(r, 0)] - e).abs() < 1e-15);
        assert!((nb.vectors()[(r + 4, 1)] - e).abs() < 1e-15);
        assert_eq!(nb.vectors()[(r + 4, 0)], 0.0);
    }
}

#[test]
fn decoupled_layers_push_the_search_past_the_null_space() {
    // with omega = 0 the first T eigenvectors span the layer null space
    let net = two_cliques(4, 3, true);
    let sys = system(&net, 0.0);
    let basis = full_spectrum(&sys);
    let ls = select_lambda_star(&basis, &layer_null_basis(&net, &sys), DEFAULT_RESIDUAL_THRESHOLD).unwrap();
    assert_eq!(ls.q_index, 4);
    assert!(!ls.capped);
    assert_eq!(ls.lambda_star, basis.eigenvalues()[3]);
    assert!(ls.residual_norms[..3].iter().all(|&r| r < 1e-8));
}

#[test]
fn single_layer_selects_the_fiedler_value() {
    let net = two_cliques(4, 1, true);
    let sys = system(&net, 0.0);
    let basis = full_spectrum(&sys);
    let ls = select_lambda_star(&basis, &layer_null_basis(&net, &sys), DEFAULT_RESIDUAL_THRESHOLD).unwrap();
    assert_eq!(ls.q_index, 2);
    assert_eq!(ls.lambda_star, basis.eigenvalues()[1]);
}

#[test]
fn selection_ignores_eigenvector_signs() {
    let net = two_cliques(4, 3, true);
    let sys = build_supra_system(&net, &lart_weights(&net)).unwrap();
    let basis = full_spectrum(&sys);
    let nb = layer_null_basis(&net, &sys);
    let flipped = SpectralBasis::from_parts(basis.eigenvalues().to_vec(), -basis.eigenvectors(), basis.lambda_max_estimate()).unwrap();
    let a = select_lambda_star(&basis, &nb, 0.8).unwrap();
    let b = select_lambda_star(&flipped, &nb, 0.8).unwrap();
    assert_eq!(a.q_index, b.q_index);
    for (x, y) in a.residual_norms.iter().zip(&b.residual_norms) {
        assert!((x - y).abs() < 1e-12);
    }
}

#[test]
fn weak_coupling_is_continuous_with_decoupled_layers() {
    let net = two_cliques(4, 3, true);
    let nb0 = layer_null_basis(&net, &system(&net, 0.0));
    let zero = select_lambda_star(&full_spectrum(&system(&net, 0.0)), &nb0, 0.8).unwrap();
    let sys = system(&net, 1e-6);
    let tiny = select_lambda_star(&full_spectrum(&sys), &layer_null_basis(&net, &sys), 0.8).unwrap();
    assert_eq!(zero.q_index, tiny.q_index);
    assert!((zero.lambda_star - tiny.lambda_star).abs() < 1e-4);
}

#[test]
fn selection_needs_enough_eigenpairs() {
    let net = two_cliques(4, 3, true);
    let sys = system(&net, 1.0);
    let partial = leading_eigenpairs(&sys, 3, &dense_cfg()).unwrap();
    assert!(matches!(select_lambda_star(&partial, &layer_null_basis(&net, &sys), 0.8), Err(Error::Precondition(_))));
    let full = full_spectrum(&sys);
    assert!(select_lambda_star(&full, &layer_null_basis(&net, &sys), 0.0).is_err());
}

#[test]
fn basis_cache_round_trip() {
    let net = two_cliques(3, 2, true);
    let sys = system(&net, 1.0);
    let b = leading_eigenpairs(&sys, 5, &dense_cfg()).unwrap();
    let mut buf = Vec::new();
    write_basis(&b, &mut buf).unwrap();
    let back = read_basis(buf.as_slice()).unwrap();
    assert_eq!(back.eigenvalues(), b.eigenvalues());
    assert_eq!(back.eigenvectors(), b.eigenvectors());
    assert_eq!(back.lambda_max_estimate(), b.lambda_max_estimate());
    assert!(read_basis(&buf[..10]).is_err());
    assert!(read_basis(&b"XXXX0000000000000000"[..]).is_err());
}

#[test]
fn chebyshev_constant_and_accuracy() {
    let c = chebyshev_expand(|_| 3.0, 12, 2.0).unwrap();
    assert!((c.coeffs[0] - 6.0).abs() < 1e-13);
    let g = WaveletFilterSpec::new(1.0, 2.0, 2.0, 4.0).unwrap();
    for s in [1.0, 1.5, 2.0] {
        // s * lambda_max <= y4 keeps the filter smooth on the interval
        let e80 = chebyshev_coefficients(&g, s, 80, 2.0).unwrap();
        assert!(e80.max_error < 1e-3, "scale {s}: {}", e80.max_error);
        let e40 = chebyshev_coefficients(&g, s, 40, 2.0).unwrap();
        assert!(e80.max_error <= e40.max_error * 1.0001);
    }
    assert!(chebyshev_coefficients(&g, 1.0, 2, 2.0).is_err());
}

#[test]
fn chebyshev_operator_matches_exact_filters() {
    let net = two_cliques(4, 3, true);
    let sys = build_supra_system(&net, &lart_weights(&net)).unwrap();
    let basis = full_spectrum(&sys);
    let n = sys.dim();
    let lm = sys.lambda_max_estimate();
    let chi = basis.eigenvectors();
    let exact = |h: &dyn Fn(f64) -> f64, x: &[f64]| -> Vec<f64> {
        let xv = nalgebra::DVector::from_column_slice(x);
        let coeffs = chi.tr_mul(&xv);
        let scaled = nalgebra::DVector::from_iterator(n, coeffs.iter().zip(basis.eigenvalues()).map(|(c, l)| c * h(*l)));
        (chi * scaled).iter().copied().collect()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    let mut delta = vec![0.0; n];
    delta[5] = 1.0;
    let g = WaveletFilterSpec::new(1.0, 2.0, 2.0, 4.0).unwrap();
    let filters: Vec<Box<dyn Fn(f64) -> f64>> =
        vec![Box::new(|_| 1.0), Box::new(|_| 0.0), Box::new(move |l| g.eval(1.5 * l)), Box::new(|l: f64| (-3.0 * l).exp())];
    for h in &filters {
        let e = chebyshev_expand(h, 80, lm).unwrap();
        for sig in [&x, &delta] {
            let got = apply_filtered_operator(&sys, &e, sig).unwrap();
            let want = exact(h.as_ref(), sig);
            let err = got.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err < 1e-3, "error {err}");
        }
    }
    assert!(apply_filtered_operator(&sys, &chebyshev_expand(|_| 1.0, 5, lm).unwrap(), &x[..3]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn residuals_lie_in_unit_interval(seed in 0u64..1000, omega in 0.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (n, t) = (6, 3);
        let mut edges = Vec::new();
        for l in 0..t {
            for i in 0..n {
                edges.push((l, i.min((i + 1) % n), i.max((i + 1) % n), 1.0));
                for j in i + 2..n {
                    if !(i == 0 && j == n - 1) && rng.random::<f64>() < 0.3 {
                        edges.push((l, i, j, 1.0));
                    }
                }
            }
        }
        let net = TemporalNetwork::from_edges(n, t, edges).unwrap();
        let sys = system(&net, omega);
        let ls = select_lambda_star(&full_spectrum(&sys), &layer_null_basis(&net, &sys), 0.8).unwrap();
        prop_assert!(ls.q_index >= 1 && ls.q_index <= t + 1);
        for r in &ls.residual_norms {
            prop_assert!(*r >= 0.0 && *r <= 1.0 + 1e-12);
        }
    }
}
