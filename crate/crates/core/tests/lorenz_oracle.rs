mod common;

use common::{oracles, reference};
use routevar_core::chaos::{
    integrate, lorenz_deriv, rk4_step, LorenzParams, State3, VariationConfig, DEFAULT_IC_R,
};

fn rk4_to(y0: State3, h: f64, steps: usize) -> State3 {
    let p = LorenzParams::default();
    (0..steps).fold(y0, |s, _| rk4_step(s, h, &p))
}

fn dist(a: State3, b: [f64; 3]) -> f64 {
    ((a.x - b[0]).powi(2) + (a.y - b[1]).powi(2) + (a.z - b[2]).powi(2)).sqrt()
}

#[test]
fn derivative_matches_direct_formula() {
    let p = LorenzParams::default();
    for s in [[1.0, 1.0, 1.0], [-13.0, -12.0, 52.0], [0.3, -7.1, 20.0]] {
        let d = lorenz_deriv(State3::from(s), &p);
        let r = reference::lorenz(s, 16.0, 45.0, 4.0);
        assert_eq!(d.to_array(), r);
    }
}

#[test]
fn reference_integrator_is_self_consistent() {
    let ic = DEFAULT_IC_R.to_array();
    let a = reference::solve(ic, 1.005, 1e-14);
    let b = reference::solve(ic, 1.005, 1e-13);
    let d = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
    assert!(d < 1e-9, "{d}");
}

/// Global error at t = 67 * 0.015 (every halved step lands on it exactly).
#[test]
fn rk4_convergence_order() {
    let t_end = 67.0 * 0.015;
    let exact = reference::solve(DEFAULT_IC_R.to_array(), t_end, 1e-14);
    let errors: Vec<f64> = [(0.015, 67), (0.0075, 134), (0.00375, 268)]
        .iter()
        .map(|&(h, n)| dist(rk4_to(DEFAULT_IC_R, h, n), exact))
        .collect();
    for pair in errors.windows(2) {
        let order = (pair[0] / pair[1]).log2();
        assert!(
            (3.7..=4.3).contains(&order),
            "order {order} from {errors:?}"
        );
    }
}

#[test]
fn one_step_against_reference() {
    let h = 0.015;
    let start = State3::new(1.0, 1.0, 1.0);
    let exact = reference::solve(start.to_array(), h, 1e-14);
    let got = rk4_step(start, h, &LorenzParams::default());
    // the step's local truncation error is O(h^5); measured at about 1.8e-4
    for (g, e) in got.to_array().iter().zip(exact) {
        assert!((g - e).abs() < 2.5e-4, "{g} vs {e}");
    }
    // local order: halving h cuts the one-step error ~32x
    let e1 = dist(got, exact);
    let half = reference::solve(start.to_array(), h / 2.0, 1e-14);
    let e2 = dist(rk4_step(start, h / 2.0, &LorenzParams::default()), half);
    let order = (e1 / e2).log2();
    assert!((4.5..=5.5).contains(&order), "local order {order}");
}

#[test]
fn default_trajectory_stays_in_the_attractor_box() {
    let t = integrate(DEFAULT_IC_R, 30, &VariationConfig::default()).unwrap();
    for (i, p) in t.points.iter().enumerate() {
        assert!(
            p.x.abs() <= 40.0 && p.y.abs() <= 40.0 && (0.0..=80.0).contains(&p.z),
            "{i}: {p:?}"
        );
        let r = reference::solve(DEFAULT_IC_R.to_array(), i as f64 * 0.015, 1e-14);
        assert!(r[0].abs() <= 40.0 && r[1].abs() <= 40.0 && (0.0..=80.0).contains(&r[2]));
    }
}

#[test]
fn trajectory_matches_array_oracle() {
    let cfg = VariationConfig::default();
    let t = integrate(cfg.ic_v, 200, &cfg).unwrap();
    let o = oracles::trajectory(cfg.ic_v.to_array(), 200, cfg.h);
    for (a, b) in t.points.iter().zip(&o) {
        assert!(dist(*a, *b) <= 1e-9 * (1.0 + b[0].abs() + b[1].abs() + b[2].abs()));
    }
}
