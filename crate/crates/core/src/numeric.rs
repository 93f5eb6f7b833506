//! Small numeric helpers shared by the metric and repair code.

/// Sums a slice in a canonical order (ascending by `total_cmp`).
///
/// The result depends only on the multiset of values, so two groups holding
/// the same masses in different row orders produce bit-identical totals.
pub fn canonical_sum(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    values.iter().sum()
}

pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `w0 * a + w1 * b`, evaluated coordinate-wise.
///
/// Every barycentric and interpolated point in the crate goes through this
/// function so identical inputs always produce identical bits.
pub fn convex_combination(a: &[f64], w0: f64, b: &[f64], w1: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| w0 * x + w1 * y).collect()
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
pub fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Mean and standard error of the mean.
pub fn mean_and_std_error(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}
