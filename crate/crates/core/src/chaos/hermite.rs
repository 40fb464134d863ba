//! Orthonormal probabilists' Hermite polynomials `ψ_n = He_n / √(n!)`.

/// `ψ_n(x)` by the normalized three-term recurrence
/// `ψ_{n+1} = (x ψ_n − √n ψ_{n−1}) / √(n+1)`.
pub fn hermite_normalized(n: usize, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = x;
    for k in 1..n {
        let kf = k as f64;
        let next = (x * cur - kf.sqrt() * prev) / (kf + 1.0).sqrt();
        prev = cur;
        cur = next;
    }
    cur
}

/// Fills `out[n] = ψ_n(x)` for `n = 0..out.len()`.
pub fn hermite_table(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() == 1 {
        return;
    }
    out[1] = x;
    for k in 1..out.len() - 1 {
        let kf = k as f64;
        out[k + 1] = (x * out[k] - kf.sqrt() * out[k - 1]) / (kf + 1.0).sqrt();
    }
}

/// Derivative `ψ_n'(x) = √n ψ_{n−1}(x)`.
pub fn hermite_normalized_derivative(n: usize, x: f64) -> f64 {
    if n == 0 {
        0.0
    } else {
        (n as f64).sqrt() * hermite_normalized(n - 1, x)
    }
}
