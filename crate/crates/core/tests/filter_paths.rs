use proptest::prelude::*;

use qg2::bench::{self, CaseName};
use qg2::filter::{apply_filter, indicator, FilterConfig, FilterMode};
use qg2::grid::{BoundaryCondition, GridSpec, ScalarField};
use qg2::linsolve::SolverSettings;
use qg2::timeloop::{Integrator, SimState, StepConfig};

fn grid() -> GridSpec {
    GridSpec::new(16, 32, 0.0, 1.0, -1.0, 1.0).unwrap()
}

fn config(filter: FilterConfig) -> StepConfig {
    let mut cfg = bench::make_case(CaseName::Case1, (16, 32), FilterMode::None, None)
        .unwrap()
        .step_config()
        .unwrap();
    cfg.filter = filter;
    cfg
}

#[test]
fn zero_radius_trajectory_matches_unfiltered() {
    let g = grid();
    let none = Integrator::new(config(FilterConfig::none())).unwrap();
    let lin = Integrator::new(config(FilterConfig::new(FilterMode::Linear, 0.0).unwrap())).unwrap();
    let nl = Integrator::new(config(FilterConfig::new(FilterMode::Nonlinear, 0.0).unwrap())).unwrap();
    let (mut a, mut b, mut c) = (SimState::rest(&g), SimState::rest(&g), SimState::rest(&g));
    for _ in 0..100 {
        a = none.step(&a).unwrap();
        b = lin.step(&b).unwrap();
        c = nl.step(&c).unwrap();
        assert!(a.max_abs_diff(&b).unwrap() <= 1e-12);
        assert!(a.max_abs_diff(&c).unwrap() <= 1e-12);
    }
}

#[test]
fn unit_indicator_tracks_linear_filter_along_a_trajectory() {
    let g = grid();
    let alpha = bench::default_alpha(CaseName::Case1, g.h());
    let lin = Integrator::new(config(FilterConfig::new(FilterMode::Linear, alpha).unwrap())).unwrap();
    let solver = SolverSettings::default();
    let one = ScalarField::constant(g, 1.0);
    let bc = BoundaryCondition::YCoordinate;
    let mut s = SimState::rest(&g);
    for _ in 0..20 {
        s = lin.step(&s).unwrap();
        for q in [&s.q1, &s.q2] {
            let (l, _) = apply_filter(q, None, alpha, &bc, &solver, None).unwrap();
            let (n, _) = apply_filter(q, Some(&one), alpha, &bc, &solver, None).unwrap();
            assert!(l.max_abs_diff(&n).unwrap() <= 10.0 * solver.tol * q.max_abs());
        }
    }
}

#[test]
fn filtered_runs_differ_from_unfiltered() {
    let g = grid();
    let alpha = bench::default_alpha(CaseName::Case1, g.h());
    let none = Integrator::new(config(FilterConfig::none())).unwrap();
    let nl = Integrator::new(config(FilterConfig::new(FilterMode::Nonlinear, alpha).unwrap())).unwrap();
    let (mut a, mut b) = (SimState::rest(&g), SimState::rest(&g));
    for _ in 0..50 {
        a = none.step(&a).unwrap();
        b = nl.step(&b).unwrap();
    }
    assert!(a.max_abs_diff(&b).unwrap() > 0.0);
    assert_ne!(b.qbar1, b.q1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn indicator_range(
        c in prop::collection::vec(-1.0f64..1.0, 5),
        kx in 0.5f64..4.0,
        ky in 0.5f64..4.0,
    ) {
        let g = GridSpec::unit_square(16).unwrap();
        let f = move |x: f64, y: f64| {
            c[0] + c[1] * x + c[2] * y * y + c[3] * (kx * std::f64::consts::PI * x).sin() * (ky * y).cos() + c[4] * x * y
        };
        let cfg = FilterConfig::new(FilterMode::Nonlinear, 0.05).unwrap();
        let a = indicator(&ScalarField::from_fn(g, f.clone()), &BoundaryCondition::function(f), &cfg);
        let max = a.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(a.values().iter().all(|v| (0.0..=1.0).contains(v)));
        prop_assert!(max == 0.0 || (max - 1.0).abs() < 1e-15);
    }
}
