//! Modified Shepp-Logan head phantom.

/// (intensity, semi-axis a, semi-axis b, centre x, centre y, rotation in degrees)
const ELLIPSES: [(f64, f64, f64, f64, f64, f64); 10] = [
    (1.0, 0.69, 0.92, 0.0, 0.0, 0.0),
    (-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0),
    (-0.2, 0.11, 0.31, 0.22, 0.0, -18.0),
    (-0.2, 0.16, 0.41, -0.22, 0.0, 18.0),
    (0.1, 0.21, 0.25, 0.0, 0.35, 0.0),
    (0.1, 0.046, 0.046, 0.0, 0.1, 0.0),
    (0.1, 0.046, 0.046, 0.0, -0.1, 0.0),
    (0.1, 0.046, 0.023, -0.08, -0.605, 0.0),
    (0.1, 0.023, 0.023, 0.0, -0.606, 0.0),
    (0.1, 0.023, 0.046, 0.06, -0.605, 0.0),
];

/// Row-major `side x side` image on [-1, 1]^2, evaluated at pixel centres.
pub fn shepp_logan(side: usize) -> Vec<f64> {
    let mut img = vec![0.0; side * side];
    for i in 0..side {
        let y = 1.0 - (2.0 * i as f64 + 1.0) / side as f64;
        for j in 0..side {
            let x = (2.0 * j as f64 + 1.0) / side as f64 - 1.0;
            let mut v = 0.0;
            for &(val, a, b, x0, y0, deg) in &ELLIPSES {
                let (s, c) = deg.to_radians().sin_cos();
                let (dx, dy) = (x - x0, y - y0);
                let u = dx * c + dy * s;
                let w = -dx * s + dy * c;
                if (u / a).powi(2) + (w / b).powi(2) <= 1.0 {
                    v += val;
                }
            }
            img[i * side + j] = v;
        }
    }
    img
}
