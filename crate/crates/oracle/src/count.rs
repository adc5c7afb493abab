//! Counting user-to-provider assignments by the binomial recursion.

use num_bigint::BigUint;

/// Number of ways to hand out `users` distinct bids across `providers`
/// distinct sellers, computed as sum over how many the last seller takes:
/// T(n, m) = sum_i C(n, i) * T(n - i, m - 1), with T(0, m) = 1.
pub fn count_mappings(users: usize, providers: usize) -> BigUint {
    let mut memo = vec![vec![None; providers + 1]; users + 1];
    count_memo(users, providers, &mut memo)
}

fn count_memo(n: usize, m: usize, memo: &mut Vec<Vec<Option<BigUint>>>) -> BigUint {
    if n == 0 {
        return BigUint::from(1u32);
    }
    if m == 0 {
        return BigUint::from(0u32);
    }
    if let Some(hit) = &memo[n][m] {
        return hit.clone();
    }
    let mut total = BigUint::from(0u32);
    let mut binom = BigUint::from(1u32);
    for i in 0..=n {
        total += &binom * count_memo(n - i, m - 1, memo);
        // C(n, i+1) = C(n, i) * (n - i) / (i + 1)
        binom = binom * (n - i) / (i + 1);
    }
    memo[n][m] = Some(total.clone());
    total
}
