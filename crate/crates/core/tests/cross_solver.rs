//! Solvers checked against each other and against independent oracles.

mod common;

use common::brute_force_boundary_distance_2d;
use ellipsoid_distance::nonconvex::default_start;
use ellipsoid_distance::probgen::{analytic_instance, gen_convex, gen_nonconvex};
use ellipsoid_distance::{
    solve_convex, solve_global, solve_nonconvex, solve_with_restart, ConvexSolverOptions, Ellipsoid, NonconvexSolverOptions,
    Status, SymPdMatrix, Vector,
};

#[test]
fn fixed_and_adaptive_penalties_agree() {
    for d in [2, 6, 15] {
        for seed in 0..10 {
            let (a, b) = gen_convex(d, seed).unwrap();
            let r1 = solve_convex(&a, &b, &ConvexSolverOptions::default()).unwrap();
            let r2 = solve_convex(&a, &b, &ConvexSolverOptions::self_adaptive()).unwrap();
            assert!(r1.converged() && r2.converged());
            assert!((r1.distance - r2.distance).abs() < 1e-5, "d={d} seed={seed}");
        }
    }
}

#[test]
fn reduced_system_gives_the_same_run() {
    let (a, b) = gen_convex(8, 3).unwrap();
    let full = solve_convex(&a, &b, &ConvexSolverOptions::self_adaptive()).unwrap();
    let reduced = solve_convex(
        &a,
        &b,
        &ConvexSolverOptions {
            use_reduced_system: true,
            ..ConvexSolverOptions::self_adaptive()
        },
    )
    .unwrap();
    assert!((full.distance - reduced.distance).abs() < 1e-8);
}

#[test]
fn convex_distance_of_separated_balls_in_any_direction() {
    // closed form: ‖z₁ − z₂‖ − r₁ − r₂
    let dir = Vector::from_vec(vec![0.3, -0.5, 0.8]).normalize();
    let a = Ellipsoid::ball(Vector::zeros(3), 0.5).unwrap();
    let b = Ellipsoid::ball(&dir * 7.0, 2.0).unwrap();
    let r = solve_convex(&a, &b, &ConvexSolverOptions { epsilon: 1e-10, ..ConvexSolverOptions::self_adaptive() }).unwrap();
    assert!((r.distance - 4.5).abs() < 1e-7, "{}", r.distance);
}

#[test]
fn convex_distance_is_zero_inside_and_matches_boundary_gap_outside() {
    for name in ["nested_offset_balls", "concentric_spheres"] {
        let f = analytic_instance(name, 3).unwrap();
        let r = solve_convex(&f.e1, &f.e2, &ConvexSolverOptions::self_adaptive()).unwrap();
        assert!(r.distance < 1e-6, "{name}: {}", r.distance);
    }
}

#[test]
fn restart_agrees_with_global_in_low_dimension() {
    for seed in 0..15 {
        let (a, b) = gen_nonconvex(3, seed).unwrap();
        let g = solve_global(&a, &b, 1e-6).unwrap();
        assert_eq!(g.status, Status::Converged);
        let r = solve_with_restart(&a, &b, &NonconvexSolverOptions::default()).unwrap();
        assert!((r.distance - g.distance).abs() < 1e-4, "seed {seed}: {} vs {}", r.distance, g.distance);
    }
}

#[test]
fn global_matches_planar_grid_search() {
    for seed in 100..105 {
        let (a, b) = gen_nonconvex(2, seed).unwrap();
        let oracle = brute_force_boundary_distance_2d(&a, &b, 800, 5e-2);
        let g = solve_global(&a, &b, 1e-6).unwrap();
        assert!((g.distance - oracle).abs() < 1e-4, "seed {seed}: {} vs {oracle}", g.distance);
    }
}

#[test]
fn boundary_distance_of_rotated_ellipse_pair() {
    // x²/4 + y² = 1 inside the circle of radius 3, rotated by 30°: gap 1.
    let (c, s) = (30f64.to_radians().cos(), 30f64.to_radians().sin());
    let r = nalgebra::Matrix2::new(c, -s, s, c);
    let q = r * nalgebra::Matrix2::new(0.25, 0.0, 0.0, 1.0) * r.transpose();
    let inner = Ellipsoid::new(
        SymPdMatrix::from_rows(&[vec![q[(0, 0)], q[(0, 1)]], vec![q[(1, 0)], q[(1, 1)]]]).unwrap(),
        Vector::zeros(2),
    )
    .unwrap();
    let outer = Ellipsoid::ball(Vector::zeros(2), 3.0).unwrap();
    // a shared center leaves both pencils singular
    assert_eq!(solve_global(&inner, &outer, 1e-6).unwrap().status, Status::Degenerate);
    let opts = NonconvexSolverOptions { epsilon: 1e-9, epsilon0: 1e-9, ..NonconvexSolverOptions::default() };
    let n = solve_with_restart(&inner, &outer, &opts).unwrap();
    assert!((n.distance - 1.0).abs() < 1e-6, "{}", n.distance);
}

#[test]
fn single_run_never_beats_the_global_minimum() {
    for seed in 0..10 {
        let (a, b) = gen_nonconvex(4, seed).unwrap();
        let g = solve_global(&a, &b, 1e-6).unwrap();
        let (y0, l0) = default_start(4);
        let s = solve_nonconvex(&a, &b, &NonconvexSolverOptions::default(), &y0, &l0).unwrap();
        assert!(s.distance >= g.distance - 1e-5, "seed {seed}: {} < {}", s.distance, g.distance);
    }
}

#[test]
fn shrinking_both_sets_never_decreases_the_distance() {
    for seed in 0..20 {
        let (a, b) = gen_convex(4, seed).unwrap();
        let shrink = |e: &Ellipsoid| Ellipsoid::new(SymPdMatrix::new(e.q().as_matrix() * 4.0).unwrap(), e.center().clone()).unwrap();
        let opts = ConvexSolverOptions::self_adaptive();
        let full = solve_convex(&a, &b, &opts).unwrap();
        let small = solve_convex(&shrink(&a), &shrink(&b), &opts).unwrap();
        assert!(small.distance >= full.distance - 1e-6, "seed {seed}: {} < {}", small.distance, full.distance);
    }
}

#[test]
fn nested_protocol_mostly_puts_the_first_set_inside_the_second() {
    // E₁ ⊂ E₂ iff the boundaries are apart and the closest point of ∂E₁ lies inside E₂
    let mut contained = 0;
    for seed in 0..100 {
        let (a, b) = gen_nonconvex(5, seed).unwrap();
        let g = solve_global(&a, &b, 1e-6).unwrap();
        if g.status == Status::Converged && g.distance > 1e-6 && ellipsoid_distance::constraint_value(&b, &g.x1).unwrap() < 1.0 {
            contained += 1;
        }
    }
    assert!(contained > 50, "{contained} of 100");
}
