//! Second implementations used as test oracles. They work on plain arrays
//! and are deliberately written in the most direct way possible.

/// Exhaustive scan: list every admissible candidate with its distance, then
/// take the minimum, earliest first on equal distance.
/// `mode`: 0 = 2D in the plane of coordinate axes (u, v), 1 = 3D, 2 = x-axis
/// at-or-above, 3 = x-axis at-or-below.
pub fn scan(
    target: [f64; 3],
    reference: &[[f64; 3]],
    mode: u8,
    plane: (usize, usize),
) -> Option<usize> {
    let mut admissible: Vec<(f64, usize)> = Vec::new();
    for (i, r) in reference.iter().enumerate() {
        let d = match mode {
            0 => {
                let du = r[plane.0] - target[plane.0];
                let dv = r[plane.1] - target[plane.1];
                du * du + dv * dv
            }
            1 => {
                let dx = r[0] - target[0];
                let dy = r[1] - target[1];
                let dz = r[2] - target[2];
                dx * dx + dy * dy + dz * dz
            }
            2 if r[0] >= target[0] => (r[0] - target[0]).abs(),
            3 if r[0] <= target[0] => (r[0] - target[0]).abs(),
            _ => continue,
        };
        admissible.push((d, i));
    }
    admissible.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    admissible.first().map(|&(_, i)| i)
}

fn deriv(s: [f64; 3]) -> [f64; 3] {
    let (a, r, b) = (16.0, 45.0, 4.0);
    [
        a * (s[1] - s[0]),
        s[0] * (r - s[2]) - s[1],
        s[0] * s[1] - b * s[2],
    ]
}

fn shift(s: [f64; 3], k: [f64; 3], c: f64) -> [f64; 3] {
    [s[0] + c * k[0], s[1] + c * k[1], s[2] + c * k[2]]
}

/// n points of the default Lorenz system from `ic`, classical RK4, no skip.
pub fn trajectory(ic: [f64; 3], n: usize, h: f64) -> Vec<[f64; 3]> {
    let mut out = vec![ic];
    while out.len() < n {
        let s = *out.last().unwrap();
        let k1 = deriv(s);
        let k2 = deriv(shift(s, k1, h / 2.0));
        let k3 = deriv(shift(s, k2, h / 2.0));
        let k4 = deriv(shift(s, k3, h));
        let mut next = [0.0; 3];
        for i in 0..3 {
            next[i] = s[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        out.push(next);
    }
    out.truncate(n);
    out
}

/// Effect and change of an x-y-plane assignment, straight from the definitions.
pub fn effect_change(ic_r: [f64; 3], ic_v: [f64; 3], n: usize, h: f64) -> (usize, f64) {
    let r = trajectory(ic_r, n, h);
    let v = trajectory(ic_v, n, h);
    let mut moved = Vec::new();
    for (j, p) in v.iter().enumerate() {
        let k = scan(*p, &r, 0, (0, 1)).unwrap();
        if k != j {
            moved.push((k as f64 - j as f64).abs());
        }
    }
    let change = if moved.is_empty() {
        0.0
    } else {
        moved.iter().sum::<f64>() / moved.len() as f64
    };
    (moved.len(), change)
}
