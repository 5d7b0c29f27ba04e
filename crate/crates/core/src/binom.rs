//! Log-space binomial tails.

/// `ln C(n, j)` for `j = 0..=n`, built incrementally.
pub(crate) fn ln_choose_row(n: u64) -> Vec<f64> {
    let mut row = Vec::with_capacity(n as usize + 1);
    let mut acc = 0.0f64;
    row.push(acc);
    for j in 1..=n {
        acc += ((n - j + 1) as f64).ln() - (j as f64).ln();
        row.push(acc);
    }
    row
}

/// Stable `ln Σ exp(x_i)`.
pub(crate) fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let mut sorted: Vec<f64> = terms.iter().map(|t| (t - max).exp()).collect();
    sorted.sort_by(f64::total_cmp);
    max + sorted.iter().sum::<f64>().ln()
}

/// `P(X ≤ m)` for `X ~ Binomial(n, p)`.
pub(crate) fn lower_tail(n: u64, m: u64, p: f64) -> f64 {
    let row = ln_choose_row(n);
    let (ln_p, ln_q) = (p.ln(), (1.0 - p).ln());
    // 0 · ln 0 is taken as 0 so that p ∈ {0, 1} stays exact.
    let pow = |k: u64, ln: f64| if k == 0 { 0.0 } else { k as f64 * ln };
    let terms: Vec<f64> = (0..=m.min(n))
        .map(|j| row[j as usize] + pow(j, ln_p) + pow(n - j, ln_q))
        .collect();
    log_sum_exp(&terms).exp().min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn choose_row_matches_pascal() {
        let row = ln_choose_row(10);
        let exact = [1.0, 10.0, 45.0, 120.0, 210.0, 252.0, 210.0, 120.0, 45.0, 10.0, 1.0];
        for (l, e) in row.iter().zip(exact) {
            assert_relative_eq!(l.exp(), e, max_relative = 1e-12);
        }
    }

    #[test]
    fn tails_at_the_edges() {
        assert_relative_eq!(lower_tail(5, 5, 0.3), 1.0, max_relative = 1e-12);
        assert_relative_eq!(lower_tail(4, 0, 0.5), 0.0625, max_relative = 1e-12);
        assert_eq!(lower_tail(3, 2, 1.0), 0.0);
        assert_eq!(lower_tail(3, 0, 0.0), 1.0);
    }
}
