//! Adaptive Dormand-Prince 5(4) integration of scalar ODEs, used as an
//! independent reference for the differential-inequality checks.

/// Integrates `z' = rhs(s, z)` from `(0, z0)` and returns `z` at each of the
/// increasing `times`.
pub fn integrate_scalar(
    rhs: impl Fn(f64, f64) -> f64,
    z0: f64,
    times: &[f64],
    rtol: f64,
    atol: f64,
) -> Vec<f64> {
    const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];

    let mut out = Vec::with_capacity(times.len());
    let (mut s, mut z) = (0.0_f64, z0);
    let mut h = 1e-6_f64;
    for &target in times {
        while s < target {
            let step = h.min(target - s);
            let mut k = [0.0; 7];
            for i in 0..7 {
                let zi = z + (0..i).map(|j| A[i][j] * k[j]).sum::<f64>() * step;
                k[i] = rhs(s + C[i] * step, zi);
            }
            let z5 = z + step * (0..7).map(|i| B5[i] * k[i]).sum::<f64>();
            let z4 = z + step * (0..7).map(|i| B4[i] * k[i]).sum::<f64>();
            let err = (z5 - z4).abs() / (atol + rtol * z5.abs().max(z.abs()));
            if err <= 1.0 || step <= 1e-14 * (1.0 + s) {
                s += step;
                z = z5;
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = step * factor;
            if !z.is_finite() {
                break;
            }
        }
        out.push(z);
    }
    out
}
