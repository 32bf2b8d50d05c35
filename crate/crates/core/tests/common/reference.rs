//! Independent reference integrator: adaptive Dormand-Prince 5(4) with tight
//! tolerances, written against plain `[f64; 3]` so it shares nothing with the
//! library's stepping code.

pub fn lorenz(s: [f64; 3], a: f64, r: f64, b: f64) -> [f64; 3] {
    [
        a * (s[1] - s[0]),
        s[0] * (r - s[2]) - s[1],
        s[0] * s[1] - b * s[2],
    ]
}

fn axpy(y: [f64; 3], terms: &[(f64, [f64; 3])], h: f64) -> [f64; 3] {
    let mut out = y;
    for (c, k) in terms {
        for i in 0..3 {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Integrates the default Lorenz system (a=16, r=45, b=4) from `y0` over `[0, t_end]`.
pub fn solve(y0: [f64; 3], t_end: f64, tol: f64) -> [f64; 3] {
    solve_with(y0, t_end, tol, 16.0, 45.0, 4.0)
}

pub fn solve_with(y0: [f64; 3], t_end: f64, tol: f64, a: f64, r: f64, b: f64) -> [f64; 3] {
    let f = |s: [f64; 3]| lorenz(s, a, r, b);
    let mut t = 0.0;
    let mut y = y0;
    let mut h = 1e-4_f64.min(t_end);
    while t < t_end {
        if t + h > t_end {
            h = t_end - t;
        }
        let k1 = f(y);
        let k2 = f(axpy(y, &[(1.0 / 5.0, k1)], h));
        let k3 = f(axpy(y, &[(3.0 / 40.0, k1), (9.0 / 40.0, k2)], h));
        let k4 = f(axpy(
            y,
            &[(44.0 / 45.0, k1), (-56.0 / 15.0, k2), (32.0 / 9.0, k3)],
            h,
        ));
        let k5 = f(axpy(
            y,
            &[
                (19372.0 / 6561.0, k1),
                (-25360.0 / 2187.0, k2),
                (64448.0 / 6561.0, k3),
                (-212.0 / 729.0, k4),
            ],
            h,
        ));
        let k6 = f(axpy(
            y,
            &[
                (9017.0 / 3168.0, k1),
                (-355.0 / 33.0, k2),
                (46732.0 / 5247.0, k3),
                (49.0 / 176.0, k4),
                (-5103.0 / 18656.0, k5),
            ],
            h,
        ));
        let y5 = axpy(
            y,
            &[
                (35.0 / 384.0, k1),
                (500.0 / 1113.0, k3),
                (125.0 / 192.0, k4),
                (-2187.0 / 6784.0, k5),
                (11.0 / 84.0, k6),
            ],
            h,
        );
        let k7 = f(y5);
        let y4 = axpy(
            y,
            &[
                (5179.0 / 57600.0, k1),
                (7571.0 / 16695.0, k3),
                (393.0 / 640.0, k4),
                (-92097.0 / 339200.0, k5),
                (187.0 / 2100.0, k6),
                (1.0 / 40.0, k7),
            ],
            h,
        );
        let mut err: f64 = 0.0;
        for i in 0..3 {
            let scale = tol * (1.0 + y[i].abs().max(y5[i].abs()));
            err = err.max((y5[i] - y4[i]).abs() / scale);
        }
        if err <= 1.0 {
            t += h;
            y = y5;
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
    }
    y
}
