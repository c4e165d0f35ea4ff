//! Log-space likelihoods for sampled observations. Everything is evaluated
//! through log-gamma so binomial coefficients with large arguments stay
//! finite; probabilities of impossible events come back as `-inf`, and the
//! `0 * ln 0` boundary cases are defined as 0.

use statrs::function::gamma::ln_gamma;

/// Natural-log probability; `-inf` encodes probability zero.
pub type LogProb = f64;

/// `ln C(n, k)` via log-gamma.
pub fn log_binomial_coefficient(k: u64, n: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    if k == 0 || k == n {
        // C(n, 0) = C(n, n) = 1; skip log-gamma so the result is exactly 0.
        return 0.0;
    }
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// Log of the Binomial(`n`, `q`) probability mass at `k`.
///
/// Panics if `q` is outside `[0, 1]`.
pub fn log_binomial_pmf(k: u64, n: u64, q: f64) -> LogProb {
    assert!((0.0..=1.0).contains(&q), "q = {q} outside [0, 1]");
    if k > n {
        return f64::NEG_INFINITY;
    }
    let success = if k == 0 { 0.0 } else { k as f64 * q.ln() };
    let failure = if n == k {
        0.0
    } else {
        (n - k) as f64 * (1.0 - q).ln()
    };
    log_binomial_coefficient(k, n) + success + failure
}

/// Probability that a degree-`k` node shows degree `k_obs` after each edge is
/// kept with probability `p`: Binomial(`k`, `p`) at `k_obs`.
pub fn degree_likelihood(k_obs: u64, k: u64, p: f64) -> f64 {
    log_binomial_pmf(k_obs, k, p).exp()
}

/// Probability that an edge carrying `t` triangles shows `t_obs` of them,
/// given the edge itself was retained. Each triangle needs its two other
/// edges, so this is Binomial(`t`, `p^2`) at `t_obs`.
pub fn triangle_likelihood_retained(t_obs: u64, t: u64, p: f64) -> f64 {
    log_binomial_pmf(t_obs, t, p * p).exp()
}

/// Unconditional version of [`triangle_likelihood_retained`]: with
/// probability `1 - p` the edge disappears and shows zero triangles.
pub fn triangle_likelihood_total(t_obs: u64, t: u64, p: f64) -> f64 {
    assert!((0.0..=1.0).contains(&p), "p = {p} outside [0, 1]");
    let retained = p * triangle_likelihood_retained(t_obs, t, p);
    if t_obs == 0 {
        retained + (1.0 - p)
    } else {
        retained
    }
}
