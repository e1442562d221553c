//! Small exact combinatorial helpers shared by the engines.

use num_bigint::BigUint;
use num_traits::One;

pub fn factorial(k: u64) -> BigUint {
    (2..=k).fold(BigUint::one(), |acc, i| acc * i)
}

/// Falling factorial `top · (top-1) ⋯ (bottom+1)`, i.e. `top! / bottom!`.
pub fn factorial_ratio(top: u64, bottom: u64) -> BigUint {
    debug_assert!(bottom <= top);
    (bottom + 1..=top).fold(BigUint::one(), |acc, i| acc * i)
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::default();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// Table `[0!, 1!, ..., k!]`.
pub fn factorial_table(k: usize) -> Vec<BigUint> {
    let mut table = Vec::with_capacity(k + 1);
    table.push(BigUint::one());
    for i in 1..=k {
        let next = &table[i - 1] * i;
        table.push(next);
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_values() {
        assert_eq!(factorial(0), BigUint::from(1u32));
        assert_eq!(factorial(5), BigUint::from(120u32));
        assert_eq!(factorial_ratio(6, 3), BigUint::from(120u32));
        assert_eq!(binomial(6, 2), BigUint::from(15u32));
        assert_eq!(binomial(20, 10), BigUint::from(184_756u32));
        assert_eq!(binomial(3, 4), BigUint::default());
        assert_eq!(factorial_table(4)[4], BigUint::from(24u32));
    }
}
