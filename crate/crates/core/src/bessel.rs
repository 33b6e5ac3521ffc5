//! Bessel functions of the first kind, J_0..J_n, by Miller's backward
//! recurrence. Used for the Chebyshev propagator coefficients and for the
//! infinite-line propagator oracle (-i)^d J_d(2t).

/// J_0(z)..J_n_max(z) for z >= 0.
///
/// Downward recurrence from a start order well above max(n_max, z),
/// normalized with J_0 + 2 sum_{m even} J_m = 1. Accurate to ~1e-14
/// relative over the ranges used here (z up to a few thousand).
pub fn bessel_j_seq(n_max: usize, z: f64) -> Vec<f64> {
    assert!(z >= 0.0, "bessel_j_seq requires z >= 0");
    let mut out = vec![0.0f64; n_max + 1];
    if z == 0.0 {
        out[0] = 1.0;
        return out;
    }
    if z < 1e-6 {
        // (z/2)^m / m! truncation; avoids the huge start order the
        // recurrence would want for the normalization sum.
        let half = 0.5 * z;
        let mut term = 1.0;
        for (m, slot) in out.iter_mut().enumerate() {
            *slot = term * (1.0 - half * half / (m as f64 + 1.0));
            term *= half / (m as f64 + 1.0);
        }
        return out;
    }
    let big = n_max.max(z.ceil() as usize);
    let start = big + ((40.0 * big as f64).sqrt() as usize) + 24;
    let start = start + (start & 1); // even start order
    let mut jp = 0.0f64; // J_{m+1}
    let mut j = 1e-30f64; // J_m (arbitrary scale)
    let mut norm = 0.0f64; // accumulates J_0 + 2 * sum_{even m >= 2} J_m
    for m in (1..=start).rev() {
        let jm = (2.0 * m as f64 / z) * j - jp;
        jp = j;
        j = jm;
        if m - 1 <= n_max {
            out[m - 1] = j;
        }
        if (m - 1) % 2 == 0 {
            norm += if m - 1 == 0 { j } else { 2.0 * j };
        }
        if j.abs() > 1e250 {
            let scale = 1e-250;
            j *= scale;
            jp *= scale;
            norm *= scale;
            for v in out.iter_mut() {
                *v *= scale;
            }
        }
    }
    for v in out.iter_mut() {
        *v /= norm;
    }
    out
}

/// Single value J_n(z).
pub fn bessel_j(n: usize, z: f64) -> f64 {
    bessel_j_seq(n, z)[n]
}

/// (-i)^m as a complex unit.
pub fn minus_i_pow(m: i64) -> num_complex::Complex64 {
    use num_complex::Complex64 as C64;
    match m.rem_euclid(4) {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, -1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, 1.0),
    }
}
