mod common;

use cnmpc::continuation::{
    assemble_jacobian, assemble_jacobian_sequential, backward_costates, eval_residual,
    forward_states, initial_solve, ContinuationEngine, DecisionVector, FdMap, NewtonSettings,
    OcpSpec, SolverKind, SolverSettings,
};
use cnmpc::krylov::{norm2, DenseMatrix, Identity, KrylovSettings, LinearMap};
use cnmpc::tfc::{TfcConstants, TfcProblem};
use common::*;
use proptest::prelude::*;
use rand::Rng;

fn tfc() -> TfcProblem {
    TfcProblem::new(TfcConstants::default(), 10)
}

fn cold_start() -> DecisionVector {
    let p = tfc();
    initial_solve(
        &p,
        &[0.0, 0.0],
        0.0,
        &p.initial_guess(),
        &NewtonSettings::default(),
    )
    .unwrap()
    .u
}

fn gmres_settings(k_max: usize) -> SolverSettings {
    SolverSettings {
        kind: SolverKind::Gmres,
        krylov: KrylovSettings::new(k_max, 1e-12),
    }
}

#[test]
fn forward_states_match_scripted_recursion() {
    let p = tfc();
    let k = p.consts;
    let mut u = DecisionVector::zeros(p.dims());
    for i in 0..10 {
        u.u_mut(i)[0] = k.c_u;
    }
    u.p_mut()[0] = 1.6;
    let states = forward_states(&p, &[0.0, 0.0], &u, 0.0).unwrap();

    let (mut x, mut y) = (0.0f64, 0.0f64);
    assert_eq!(states.len(), 11);
    assert_eq!(states[0], vec![0.0, 0.0]);
    for s in &states[1..] {
        let v = 1.6 * (x + 1.0) * 0.1;
        x += v * 0.8f64.cos();
        y += v * 0.8f64.sin();
        assert!((s[0] - x).abs() <= 1e-14 && (s[1] - y).abs() <= 1e-14);
    }
}

#[test]
fn backward_costates_match_scripted_recursion() {
    let p = tfc();
    let mut r = rng(3);
    let u = random_tfc_point(&mut r, p.dims());
    let states = forward_states(&p, &[0.1, -0.2], &u, 0.5).unwrap();
    let lam = backward_costates(&p, &states, &u, 0.5).unwrap();

    let tf = u.p()[0];
    let mut l = [u.nu()[0], u.nu()[1]];
    assert_eq!(lam[10], l.to_vec());
    for i in (0..10).rev() {
        let h = u.u(i)[0];
        l[0] += tf * (h.cos() * l[0] + h.sin() * l[1]) * 0.1;
        assert!(max_abs_diff(&lam[i], &l) <= 1e-14, "stage {i}");
    }
}

#[test]
fn zero_dynamics_keep_the_state() {
    let k = TfcConstants {
        a: 0.0,
        b: 0.0,
        ..TfcConstants::default()
    };
    let p = TfcProblem::new(k, 6);
    let mut r = rng(5);
    let u = random_tfc_point(&mut r, p.dims());
    let states = forward_states(&p, &[0.3, 0.7], &u, 0.0).unwrap();
    assert!(states.iter().all(|s| s == &vec![0.3, 0.7]));
}

#[test]
fn residual_is_gradient_of_lagrangian() {
    let p = tfc();
    let k = p.consts;
    let mut r = rng(11);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let u = random_tfc_point(&mut r, p.dims());
        let x0 = [r.gen_range(-0.2..0.5), r.gen_range(-0.2..0.5)];
        let f = eval_residual(&p, &u, &x0, 0.0).unwrap();
        let g = central_gradient(|z| tfc_lagrangian(&k, 10, z, x0), u.as_slice(), 1e-4);
        worst = worst.max(max_abs_diff(&f, &g));
    }
    assert!(worst <= 1e-6, "max deviation {worst:e}");
}

#[test]
fn residual_is_gradient_for_affine_problem() {
    let p = Affine::new(5);
    let dims = p.dims();
    let mut r = rng(2);
    let u = DecisionVector::from_vec(dims, random_vec(&mut r, dims.decision_dim())).unwrap();
    let x0 = [0.2, -0.1];
    let lag = |z: &[f64]| {
        let n = 5;
        let dtau = 0.2;
        let (mut a, mut b) = (x0[0], x0[1]);
        let mut total = 0.0;
        for i in 0..n {
            let (u1, u2, mui) = (z[2 * i], z[2 * i + 1], z[2 * n + i]);
            total += (0.5 * (a * a + b * b + u1 * u1 + u2 * u2) + mui * (u2 - 0.3)) * dtau;
            let na = a + b * dtau;
            b += u1 * dtau;
            a = na;
        }
        total + 0.5 * (a * a + b * b) + z[3 * n] * (a - 1.0)
    };
    let f = eval_residual(&p, &u, &x0, 0.0).unwrap();
    let g = central_gradient(lag, u.as_slice(), 1e-4);
    assert!(max_abs_diff(&f, &g) <= 1e-8);
}

#[test]
fn fd_map_of_zero_is_zero() {
    let p = tfc();
    let u = p.initial_guess();
    let map = FdMap::new(&p, &u, &[0.0, 0.0], 0.0, 1e-5).unwrap();
    let a0 = map.apply(&vec![0.0; 33]).unwrap();
    assert!(a0.iter().all(|&v| v == 0.0));
}

#[test]
fn fd_map_rejects_bad_inputs() {
    let p = tfc();
    let u = p.initial_guess();
    assert!(FdMap::new(&p, &u, &[0.0, 0.0], 0.0, 0.0).is_err());
    assert!(FdMap::new(&p, &u, &[0.0], 0.0, 1e-5).is_err());
    let map = FdMap::new(&p, &u, &[0.0, 0.0], 0.0, 1e-5).unwrap();
    assert!(map.apply(&[1.0; 3]).is_err());
}

#[test]
fn fd_map_linearity_defect_scales_with_h() {
    let p = tfc();
    let u = cold_start();
    let mut r = rng(9);
    let v = random_vec(&mut r, 33);
    let w = random_vec(&mut r, 33);
    let (alpha, beta) = (0.7, -1.3);
    let vw: Vec<f64> = v
        .iter()
        .zip(&w)
        .map(|(a, b)| alpha * a + beta * b)
        .collect();
    let defect = |h: f64| {
        let map = FdMap::new(&p, &u, &[0.0, 0.0], 0.0, h).unwrap();
        let lhs = map.apply(&vw).unwrap();
        let av = map.apply(&v).unwrap();
        let aw = map.apply(&w).unwrap();
        let d: Vec<f64> = (0..33)
            .map(|i| lhs[i] - alpha * av[i] - beta * aw[i])
            .collect();
        norm2(&d)
    };
    let ratio = defect(1e-4) / defect(1e-5);
    assert!((10.0 / 3.0..=30.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn fd_map_is_exact_for_affine_residual() {
    let p = Affine::new(4);
    let dims = p.dims();
    let mut r = rng(4);
    let u = DecisionVector::from_vec(dims, random_vec(&mut r, dims.decision_dim())).unwrap();
    let x = [0.5, 0.5];
    let a = assemble_jacobian(&FdMap::new(&p, &u, &x, 0.0, 1e-5).unwrap()).unwrap();
    let map = FdMap::new(&p, &u, &x, 0.0, 1e-5).unwrap();
    let v = random_vec(&mut r, dims.decision_dim());
    let w = random_vec(&mut r, dims.decision_dim());
    let sum: Vec<f64> = v.iter().zip(&w).map(|(a, b)| 2.0 * a - b).collect();
    let lhs = map.apply(&sum).unwrap();
    let av = map.apply(&v).unwrap();
    let aw = map.apply(&w).unwrap();
    for i in 0..lhs.len() {
        assert!((lhs[i] - 2.0 * av[i] + aw[i]).abs() <= 1e-9);
    }
    assert!(max_abs_diff(&a.mul_vec(&v), &av) <= 1e-9);
}

#[test]
fn jacobian_converges_to_central_difference() {
    let p = tfc();
    let u = cold_start();
    let x = [0.0, 0.0];
    let reference = central_jacobian(
        |z| {
            let d = DecisionVector::from_vec(p.dims(), z.to_vec()).unwrap();
            eval_residual(&p, &d, &x, 0.0).unwrap()
        },
        u.as_slice(),
        1e-4,
    );
    let err = |h: f64| {
        let a = assemble_jacobian(&FdMap::new(&p, &u, &x, 0.0, h).unwrap()).unwrap();
        a.sub(&reference).frobenius_norm()
    };
    let (e5, e6) = (err(1e-5), err(1e-6));
    let ratio = e5 / e6;
    assert!(
        (10.0 / 3.0..=30.0).contains(&ratio),
        "{e5:e} / {e6:e} = {ratio}"
    );
}

#[test]
fn jacobian_asymmetry_scales_with_h() {
    let p = tfc();
    let u = cold_start();
    let asym = |h: f64| {
        let a = assemble_jacobian(&FdMap::new(&p, &u, &[0.0, 0.0], 0.0, h).unwrap()).unwrap();
        a.sub(&a.transpose()).frobenius_norm() / a.frobenius_norm()
    };
    let ratio = asym(1e-5) / asym(1e-6);
    assert!((3.0..=30.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn parallel_and_sequential_assembly_agree_bitwise() {
    let p = tfc();
    let u = cold_start();
    let map = FdMap::new(&p, &u, &[0.1, 0.2], 0.3, 1e-5).unwrap();
    let a = assemble_jacobian(&map).unwrap();
    let b = assemble_jacobian_sequential(&map).unwrap();
    assert_eq!(a.as_slice(), b.as_slice());
}

#[test]
fn zero_residual_leaves_decision_unchanged() {
    let p = Affine::new(4);
    let sol = initial_solve(
        &p,
        &[0.0, 0.0],
        0.0,
        &DecisionVector::zeros(p.dims()),
        &NewtonSettings::default(),
    )
    .unwrap();
    assert!(sol.converged);
    let exact = sol.u.clone();
    let mut eng = ContinuationEngine::new(exact.clone(), 1e-5, 0.01, gmres_settings(10)).unwrap();
    let f = eval_residual(&p, &exact, &[0.0, 0.0], 0.0).unwrap();
    let (_, diag) = eng.step(&p, &[0.0, 0.0], 0.0, &Identity).unwrap();
    assert_eq!(diag.norm_f, norm2(&f));
    if diag.norm_f == 0.0 {
        assert_eq!(eng.decision(), &exact);
    } else {
        assert!(max_abs_diff(eng.decision().as_slice(), exact.as_slice()) <= 1e-10);
    }
}

#[test]
fn full_krylov_step_solves_affine_problem() {
    let p = Affine::new(4);
    let m = p.dims().decision_dim();
    let mut r = rng(6);
    let u = DecisionVector::from_vec(p.dims(), random_vec(&mut r, m)).unwrap();
    let mut eng = ContinuationEngine::new(u, 1e-5, 0.01, gmres_settings(m)).unwrap();
    let x = [0.4, -0.3];
    let (_, diag) = eng.step(&p, &x, 0.0, &Identity).unwrap();
    assert!(diag.norm_f > 1e-2);
    let after = norm2(&eval_residual(&p, eng.decision(), &x, 0.0).unwrap());
    assert!(after <= 1e-6 * diag.norm_f, "‖F‖ after = {after:e}");
    assert_eq!(eng.step_index(), 1);
}

#[test]
fn newton_is_one_step_on_affine_problem() {
    let p = Affine::new(6);
    let sol = initial_solve(
        &p,
        &[0.1, 0.0],
        0.0,
        &DecisionVector::zeros(p.dims()),
        &NewtonSettings::default(),
    )
    .unwrap();
    assert!(sol.converged);
    assert_eq!(sol.iterations, 1);
}

#[test]
fn newton_returns_converged_guess_untouched() {
    let p = tfc();
    let first = initial_solve(
        &p,
        &[0.0, 0.0],
        0.0,
        &p.initial_guess(),
        &NewtonSettings::default(),
    )
    .unwrap();
    let again = initial_solve(&p, &[0.0, 0.0], 0.0, &first.u, &NewtonSettings::default()).unwrap();
    assert_eq!(again.iterations, 0);
    assert_eq!(again.u, first.u);
}

#[test]
fn tfc_cold_start_converges() {
    let p = tfc();
    let sol = initial_solve(
        &p,
        &[0.0, 0.0],
        0.0,
        &p.initial_guess(),
        &NewtonSettings::default(),
    )
    .unwrap();
    assert!(sol.converged);
    assert!(sol.norm_f <= 1e-6);
    assert!(sol.iterations <= 50);
    let tf = sol.u.p()[0];
    assert!((0.9..1.1).contains(&tf), "t_f = {tf}");
}

#[test]
fn singular_jacobian_is_detected() {
    let p = Affine {
        horizon_steps: 3,
        degenerate: true,
    };
    let u = DecisionVector::zeros(p.dims());
    let a: DenseMatrix =
        assemble_jacobian(&FdMap::new(&p, &u, &[0.0, 0.0], 0.0, 1e-5).unwrap()).unwrap();
    assert!(cnmpc::krylov::lu_factor(&a).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn generic_and_direct_tfc_residuals_agree(seed in any::<u64>(), x in -0.3f64..0.6, y in -0.3f64..0.6) {
        let p = tfc();
        let mut r = rng(seed);
        let u = random_tfc_point(&mut r, p.dims());
        let generic = eval_residual(&p, &u, &[x, y], 0.0).unwrap();
        let direct = p.residual(&u, &[x, y]);
        for (a, b) in generic.iter().zip(&direct) {
            prop_assert!((a - b).abs() <= 4.0 * f64::EPSILON * a.abs().max(b.abs()).max(1.0));
        }
    }

    #[test]
    fn decision_vector_round_trip(seed in any::<u64>()) {
        let p = tfc();
        let mut r = rng(seed);
        let u = random_tfc_point(&mut r, p.dims());
        let back = DecisionVector::from_vec(p.dims(), u.clone().into_vec()).unwrap();
        prop_assert_eq!(back, u);
    }
}
