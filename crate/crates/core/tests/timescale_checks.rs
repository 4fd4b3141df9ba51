mod common;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use common::{random_density, random_hermitian, random_matrix, random_pure, rel_err, rng};
use mixedness::dynamics::{evolve_normalized, purity_derivatives, reduced_trajectory, TimeGrid};
use mixedness::hamiltonians::{
    driven_qubit, effective_from_jumps, ising_all_to_all, xy_chain, JumpChannel, NonHermitianHamiltonian,
};
use mixedness::linalg::{anticommutator, commutator, partial_trace, tensor_product, ComplexMatrix, C64};
use mixedness::states::{ghz_mixed_state, linear_entropy, qubit_from_bloch, BlochParams, DensityMatrix};
use mixedness::timescales::{
    bipartite_coefficients, cov, ghz_xy_coefficients, qubit_coefficients, separable_pure_coefficients,
    short_time_entropy, short_time_entropy_bipartite, t1_inverse, t2_inverse_sq, BipartiteCoefficients,
};
use proptest::prelude::*;

const I: C64 = C64::new(0.0, 1.0);

/// Marginal-purity coefficients assembled term by term from nested
/// commutators and explicit partial traces.
fn literal_bipartite(
    rho: &ComplexMatrix,
    da: usize,
    db: usize,
    h1: &ComplexMatrix,
    h2: &ComplexMatrix,
) -> [C64; 4] {
    let tr_b = |x: &ComplexMatrix| partial_trace(x, &[da, db], &[0]).unwrap();
    let rho_a = tr_b(rho);
    let exp_a = |x: &ComplexMatrix| rho_a.matmul(&tr_b(x)).trace();
    let exp_ab = |x: &ComplexMatrix| rho.matmul(x).trace();
    let f_a = rho_a.matmul(&rho_a).trace();
    let c = |a: &ComplexMatrix, b: &ComplexMatrix| commutator(a, b).unwrap();
    let ac = |a: &ComplexMatrix, b: &ComplexMatrix| anticommutator(a, b).unwrap();
    let sq = |x: &ComplexMatrix| x.matmul(x).trace();

    let rh1 = c(rho, h1);
    let rh2 = ac(rho, h2);
    let m_h2 = exp_ab(h2);

    let t1h = I * 2.0 * exp_a(&rh1);
    let t1nh = exp_a(&rh2) * 2.0 - f_a * m_h2 * 4.0;
    let t2h = -exp_a(&c(&rh1, h1)) - sq(&tr_b(&rh1));
    let t2nh = exp_a(&ac(&rh2, h2)) + sq(&tr_b(&rh2)) + I * exp_a(&ac(&rh1, h2)) + I * exp_a(&c(&rh2, h1))
        - m_h2 * 8.0 * (exp_a(&rh2) + I * exp_a(&rh1))
        + f_a * 2.0 * (I * exp_ab(&c(h2, h1)) - (exp_ab(&h2.matmul(h2)) - m_h2 * m_h2 * 3.0) * 2.0)
        - I * 2.0 * tr_b(&c(h1, rho)).matmul(&tr_b(&rh2)).trace();
    [t1h, t1nh, t2h, t2nh]
}

fn assert_close(a: &BipartiteCoefficients, b: &BipartiteCoefficients, tol: f64) {
    let pairs = [
        (a.t1h_inv, b.t1h_inv),
        (a.t1nh_inv, b.t1nh_inv),
        (a.t2h_inv_sq, b.t2h_inv_sq),
        (a.t2nh_inv_sq, b.t2nh_inv_sq),
    ];
    for (x, y) in pairs {
        assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
    }
}

fn decaying_qubit(omega_over_gamma: f64, gamma: f64) -> NonHermitianHamiltonian {
    effective_from_jumps(
        &driven_qubit(0.5 * gamma, omega_over_gamma * gamma),
        &[JumpChannel::qubit_decay(gamma).unwrap()],
    )
    .unwrap()
}

fn ghz_hamiltonian(n: usize, j: f64, gamma_anis: f64, h: f64, jz: f64) -> NonHermitianHamiltonian {
    NonHermitianHamiltonian::new(xy_chain(n, j, gamma_anis, h).unwrap(), ising_all_to_all(n, jz).unwrap()).unwrap()
}

#[test]
fn covariance_matches_trace_arithmetic() {
    let mut r = rng(41);
    let (a, b, c) = (random_matrix(&mut r, 4), random_matrix(&mut r, 4), random_matrix(&mut r, 4));
    let direct = (a.matmul(&b).matmul(&c).trace() + a.matmul(&c).matmul(&b).trace()) * 0.5
        - a.matmul(&b).trace() * a.matmul(&c).trace();
    assert!((cov(&a, &b, &c).unwrap() - direct).norm() < 1e-12);
}

#[test]
fn coefficients_match_analytic_purity_derivatives() {
    let mut r = rng(42);
    for d in [2usize, 3, 4, 8, 16] {
        let rho = random_density(&mut r, d);
        let h = NonHermitianHamiltonian::from_matrix(&random_matrix(&mut r, d));
        let t1 = t1_inverse(&rho, h.h2()).unwrap();
        let t2 = t2_inverse_sq(&rho, h.h1(), h.h2()).unwrap();
        assert!((t1 - purity_derivatives(&rho, &h, 1).unwrap()).abs() <= 1e-10);
        assert!((t2 - 0.5 * purity_derivatives(&rho, &h, 2).unwrap()).abs() <= 1e-10);
    }
}

#[test]
fn commuting_parts_drop_the_commutator_term() {
    let mut r = rng(43);
    let rho = random_density(&mut r, 3);
    let diag1 = ComplexMatrix::from_diagonal(&[C64::new(0.3, 0.0), C64::new(-1.0, 0.0), C64::new(2.0, 0.0)]);
    let diag2 = ComplexMatrix::from_diagonal(&[C64::new(-0.5, 0.0), C64::new(0.1, 0.0), C64::new(0.7, 0.0)]);
    // With [H1, H2] = 0 the H1 dependence disappears entirely.
    let a = t2_inverse_sq(&rho, &diag1, &diag2).unwrap();
    let b = t2_inverse_sq(&rho, &ComplexMatrix::zeros(3), &diag2).unwrap();
    assert!((a - b).abs() < 1e-12);
}

#[test]
fn fig2_predictor_error_band() {
    let b = BlochParams::new(0.25, FRAC_PI_4, FRAC_PI_4).unwrap();
    let rho = qubit_from_bloch(b);
    for (omega, lo, hi) in [(0.1, 1e-8, 1e-3), (1.0, 1e-8, 1e-3), (10.0, 1e-7, 1e-2)] {
        let h = decaying_qubit(omega, 1.0);
        let rep = short_time_entropy(&rho, &h).unwrap();
        let times: Vec<f64> = (0..=91).map(|k| if k == 0 { 0.0 } else { 0.01 + (k - 1) as f64 * 0.001 }).collect();
        let traj = evolve_normalized(&rho, &h, &TimeGrid::new(times).unwrap()).unwrap();
        for (t, s) in traj.times.iter().zip(traj.linear_entropies().unwrap()).skip(1) {
            let e = rel_err(rep.predict(*t), s);
            assert!((lo..=hi).contains(&e), "omega={omega} t={t} err={e}");
        }
    }
}

#[test]
fn pure_input_predictor_is_zero() {
    let mut r = rng(44);
    let rho = random_pure(&mut r, 3);
    let h = NonHermitianHamiltonian::from_matrix(&random_matrix(&mut r, 3));
    let rep = short_time_entropy(&rho, &h).unwrap();
    for t in [0.0, 0.1, 0.5] {
        assert!(rep.predict(t).abs() < 1e-12);
    }
}

#[test]
fn efficient_bipartite_matches_literal_terms() {
    let mut r = rng(45);
    for (da, db) in [(2usize, 2usize), (4, 2), (2, 4), (3, 3), (4, 4)] {
        let d = da * db;
        let rho = random_density(&mut r, d);
        let h1 = random_hermitian(&mut r, d);
        let h2 = random_hermitian(&mut r, d);
        let fast = bipartite_coefficients(&rho, (da, db), &h1, &h2).unwrap();
        let lit = literal_bipartite(rho.matrix(), da, db, &h1, &h2);
        for z in &lit {
            assert!(z.im.abs() < 1e-10, "imaginary residue {z}");
        }
        let lit = BipartiteCoefficients {
            t1h_inv: lit[0].re,
            t1nh_inv: lit[1].re,
            t2h_inv_sq: lit[2].re,
            t2nh_inv_sq: lit[3].re,
        };
        assert_close(&fast, &lit, 1e-11);
    }
}

#[test]
fn bipartite_sums_match_marginal_purity_stencil() {
    let mut r = rng(46);
    let (da, db) = (4usize, 2usize);
    let rho = random_density(&mut r, 8);
    let m = random_matrix(&mut r, 8);
    let h = NonHermitianHamiltonian::from_matrix(&m.scale_real(2.0 / m.frobenius_norm()));
    let neg = NonHermitianHamiltonian::new(h.h1().scale_real(-1.0), h.h2().scale_real(-1.0)).unwrap();
    let dt = 1e-3;
    let grid = TimeGrid::new(vec![0.0, dt, 2.0 * dt]).unwrap();
    let fwd = reduced_trajectory(&evolve_normalized(&rho, &h, &grid).unwrap(), &[da, db], &[0])
        .unwrap()
        .purities();
    let bwd = reduced_trajectory(&evolve_normalized(&rho, &neg, &grid).unwrap(), &[da, db], &[0])
        .unwrap()
        .purities();
    let d1 = (bwd[2] - 8.0 * bwd[1] + 8.0 * fwd[1] - fwd[2]) / (12.0 * dt);
    let d2 = (-bwd[2] + 16.0 * bwd[1] - 30.0 * fwd[0] + 16.0 * fwd[1] - fwd[2]) / (12.0 * dt * dt);
    let c = bipartite_coefficients(&rho, (da, db), h.h1(), h.h2()).unwrap();
    assert!(rel_err(c.t1_inv(), d1) <= 1e-6, "{} vs {d1}", c.t1_inv());
    assert!(rel_err(c.t2_inv_sq(), 0.5 * d2) <= 1e-6, "{} vs {}", c.t2_inv_sq(), 0.5 * d2);
}

#[test]
fn hermitian_limit_has_no_nonhermitian_terms() {
    let mut r = rng(47);
    let rho = random_density(&mut r, 8);
    let c = bipartite_coefficients(&rho, (2, 4), &random_hermitian(&mut r, 8), &ComplexMatrix::zeros(8)).unwrap();
    assert!(c.t1nh_inv.abs() < 1e-14 && c.t2nh_inv_sq.abs() < 1e-14);
}

fn local_pair(r: &mut impl rand::Rng, da: usize, db: usize) -> (ComplexMatrix, ComplexMatrix) {
    (random_hermitian(r, da), random_hermitian(r, db))
}

fn assemble(terms: &[(ComplexMatrix, ComplexMatrix)], d: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(d);
    for (a, b) in terms {
        m += &tensor_product(a, b);
    }
    m
}

#[test]
fn separable_pure_closed_form_matches_generic() {
    let mut r = rng(48);
    for _ in 0..5 {
        let ra = random_pure(&mut r, 2);
        let rb = random_pure(&mut r, 2);
        let h1_terms = vec![local_pair(&mut r, 2, 2), local_pair(&mut r, 2, 2)];
        let h2_terms = vec![local_pair(&mut r, 2, 2), local_pair(&mut r, 2, 2)];
        let (t2h, t2nh) = separable_pure_coefficients(&ra, &rb, &h1_terms, &h2_terms).unwrap();
        let joint = DensityMatrix::new(tensor_product(ra.matrix(), rb.matrix())).unwrap();
        let c = bipartite_coefficients(&joint, (2, 2), &assemble(&h1_terms, 4), &assemble(&h2_terms, 4)).unwrap();
        assert!(c.t1h_inv.abs() < 1e-12 && c.t1nh_inv.abs() < 1e-12);
        assert!((c.t2h_inv_sq - t2h).abs() <= 1e-12);
        assert!((c.t2nh_inv_sq - t2nh).abs() <= 1e-12);
    }
}

#[test]
fn separable_pure_special_cases() {
    let mut r = rng(49);
    let ra = random_pure(&mut r, 2);
    let rb = random_pure(&mut r, 3);
    let h1_terms = vec![local_pair(&mut r, 2, 3)];
    let (_, t2nh) = separable_pure_coefficients(&ra, &rb, &h1_terms, &[]).unwrap();
    assert_eq!(t2nh, 0.0);

    // ρ_A is an eigenstate of A: no local variance, no entangling rate.
    let up = DensityMatrix::from_ket(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]).unwrap();
    let a = ComplexMatrix::from_diagonal(&[C64::new(1.0, 0.0), C64::new(-1.0, 0.0)]);
    let (t2h, _) = separable_pure_coefficients(&up, &rb, &[(a, random_hermitian(&mut r, 3))], &[]).unwrap();
    assert!(t2h.abs() < 1e-15);

    // Product pure state under local-product couplings has no first-order term.
    let joint = DensityMatrix::new(tensor_product(ra.matrix(), rb.matrix())).unwrap();
    let h1 = assemble(&[local_pair(&mut r, 2, 3), local_pair(&mut r, 2, 3)], 6);
    let h2 = assemble(&[local_pair(&mut r, 2, 3)], 6);
    let c = bipartite_coefficients(&joint, (2, 3), &h1, &h2).unwrap();
    assert!(c.t1h_inv.abs() < 1e-12 && c.t1nh_inv.abs() < 1e-12);
}

#[test]
fn ghz_closed_forms_match_generic_on_full_grid() {
    let (n, j, g) = (8usize, 1.0, 0.75);
    for jz in [0.0, 0.5] {
        let h = ghz_hamiltonian(n, j, g, 0.0, jz);
        for p in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let rho = ghz_mixed_state(n, p).unwrap();
            for k in 2..n {
                let generic = bipartite_coefficients(&rho, (1 << k, 1 << (n - k)), h.h1(), h.h2()).unwrap();
                let closed = ghz_xy_coefficients(n, k, p, j, g, jz).unwrap();
                assert_close(&generic, &closed, 1e-10);
            }
        }
    }
}

#[test]
fn ghz_closed_forms_are_field_independent() {
    let (n, k, p, jz) = (6usize, 3usize, 0.4, 0.9);
    let rho = ghz_mixed_state(n, p).unwrap();
    let closed = ghz_xy_coefficients(n, k, p, 1.3, 0.6, jz).unwrap();
    for field in [0.0, 0.3, -1.1] {
        let h = ghz_hamiltonian(n, 1.3, 0.6, field, jz);
        let generic = bipartite_coefficients(&rho, (1 << k, 1 << (n - k)), h.h1(), h.h2()).unwrap();
        assert_close(&generic, &closed, 1e-10);
    }
}

#[test]
fn ghz_unmixed_limit_of_second_order_rate() {
    // At p = 0 the second-order non-Hermitian rate is 2^{1-k} Jz² k(k-1) / N².
    for (n, k, jz) in [(8usize, 3usize, 0.5), (6, 2, 1.2), (7, 5, 0.8)] {
        let c = ghz_xy_coefficients(n, k, 0.0, 1.0, 0.75, jz).unwrap();
        let (nf, kf) = (n as f64, k as f64);
        let expected = 2f64.powi(1 - k as i32) * jz * jz * kf * (kf - 1.0) / (nf * nf);
        assert!((c.t2nh_inv_sq - expected).abs() < 1e-14);
        let h = ghz_hamiltonian(n, 1.0, 0.75, 0.0, jz);
        let generic =
            bipartite_coefficients(&ghz_mixed_state(n, 0.0).unwrap(), (1 << k, 1 << (n - k)), h.h1(), h.h2())
                .unwrap();
        assert!((generic.t2nh_inv_sq - expected).abs() < 1e-12);
    }
}

#[test]
fn ghz_first_order_rate_sign() {
    // The GHZ weight grows under the gain term, so the marginal purity rises.
    let (n, j, g) = (6usize, 1.0, 0.75);
    let h = ghz_hamiltonian(n, j, g, 0.0, 0.7);
    for k in 2..n {
        for p in [0.1, 0.5, 0.9] {
            let closed = ghz_xy_coefficients(n, k, p, j, g, 0.7).unwrap();
            assert!(closed.t1nh_inv > 0.0);
            let generic =
                bipartite_coefficients(&ghz_mixed_state(n, p).unwrap(), (1 << k, 1 << (n - k)), h.h1(), h.h2())
                    .unwrap();
            assert!(generic.t1nh_inv > 0.0);
        }
    }
}

#[test]
fn pure_ghz_predictor_curve() {
    let (n, k, j, g) = (8usize, 5usize, 1.0, 0.75);
    let rho = ghz_mixed_state(n, 1.0).unwrap();
    let h = ghz_hamiltonian(n, j, g, 0.0, 0.5);
    let rep = short_time_entropy_bipartite(&rho, (1 << k, 1 << (n - k)), &h).unwrap();
    for t in [0.0, 0.01, 0.05, 0.1, 0.2] {
        let expected = 16.0 / 31.0 * (1.0 + 2.0 * g * g * j * j * t * t);
        assert!((rep.predict(t) - expected).abs() <= 1e-12);
    }
}

#[test]
fn hermitian_ghz_marginal_with_two_dimensional_rest_is_flat() {
    let n = 6;
    let rho = ghz_mixed_state(n, 0.6).unwrap();
    let h = ghz_hamiltonian(n, 1.0, 0.75, 0.0, 0.0);
    let rep = short_time_entropy_bipartite(&rho, (1 << (n - 1), 2), &h).unwrap();
    let e = rep.expansion();
    assert!(e.c1.abs() < 1e-12 && e.c2.abs() < 1e-12);
}

#[test]
fn ghz_marginal_predictor_error_band() {
    let (n, k, p) = (8usize, 5usize, 0.5);
    let rho = ghz_mixed_state(n, p).unwrap();
    let h = ghz_hamiltonian(n, 1.0, 0.75, 0.0, 0.5);
    let dims = (1 << k, 1 << (n - k));
    let rep = short_time_entropy_bipartite(&rho, dims, &h).unwrap();
    let times: Vec<f64> = (0..=19).map(|i| if i == 0 { 0.0 } else { 0.01 + (i - 1) as f64 * 0.005 }).collect();
    let traj = evolve_normalized(&rho, &h, &TimeGrid::new(times).unwrap()).unwrap();
    let marg = reduced_trajectory(&traj, &[dims.0, dims.1], &[0]).unwrap();
    for (t, s) in marg.times.iter().zip(marg.linear_entropies().unwrap()).skip(1) {
        let e = rel_err(rep.predict(*t), s);
        assert!((1e-7..=1e-2).contains(&e), "t={t} err={e}");
    }
}

#[test]
fn qubit_closed_form_matches_matrices_on_grid() {
    let gamma = 0.9;
    for omega in [0.1, 1.0, 10.0] {
        let h = decaying_qubit(omega, gamma);
        for i in 0..6 {
            for jj in 0..6 {
                let b = BlochParams::new(i as f64 / 5.0, PI * jj as f64 / 5.0, 0.7).unwrap();
                let rho = qubit_from_bloch(b);
                let (c1, c2) = qubit_coefficients(b, omega);
                assert!((t1_inverse(&rho, h.h2()).unwrap() - gamma * c1).abs() <= 1e-12);
                assert!((t2_inverse_sq(&rho, h.h1(), h.h2()).unwrap() - gamma * gamma * c2).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn report_entropy_matches_marginal() {
    let rho = ghz_mixed_state(4, 0.3).unwrap();
    let h = ghz_hamiltonian(4, 1.0, 0.2, 0.1, 0.4);
    let rep = short_time_entropy_bipartite(&rho, (4, 4), &h).unwrap();
    let marg = rho.partial_trace(&[4, 4], &[0]).unwrap();
    assert!((rep.entropy0 - linear_entropy(&marg).unwrap()).abs() < 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn first_order_sign_follows_polar_angle(r in 0.01f64..0.99, theta in 0.0f64..=PI, phi in 0.0f64..TAU) {
        let (t1, _) = qubit_coefficients(BlochParams::new(r, theta, phi).unwrap(), 1.0);
        if theta < FRAC_PI_2 - 1e-9 {
            prop_assert!(t1 > 0.0);
        } else if theta > FRAC_PI_2 + 1e-9 {
            prop_assert!(t1 < 0.0);
        }
    }

    #[test]
    fn equatorial_second_order_rate_is_positive(r in 0.0f64..0.999, phi in 0.0f64..=PI, omega in 0.0f64..20.0) {
        let (_, t2) = qubit_coefficients(BlochParams::new(r, FRAC_PI_2, phi).unwrap(), omega);
        let expected = 0.125 * (1.0 - r * r) * (1.0 + 2.0 * r * omega * phi.sin());
        prop_assert!((t2 - expected).abs() < 1e-14);
        prop_assert!(t2 > 0.0);
    }

    #[test]
    fn ising_free_closed_forms_vanish(n in 3usize..11, p in 0.0f64..=1.0, j in 0.1f64..2.0, g in -1.0f64..=1.0) {
        for k in 2..n {
            let c = ghz_xy_coefficients(n, k, p, j, g, 0.0).unwrap();
            prop_assert_eq!(c.t1nh_inv, 0.0);
            prop_assert_eq!(c.t2nh_inv_sq, 0.0);
        }
    }

    #[test]
    fn closed_form_first_order_rate_nonnegative(n in 3usize..11, p in 0.001f64..0.999, jz in 0.01f64..3.0) {
        for k in 2..n {
            prop_assert!(ghz_xy_coefficients(n, k, p, 1.0, 0.5, jz).unwrap().t1nh_inv > 0.0);
        }
    }
}
