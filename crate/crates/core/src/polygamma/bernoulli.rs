use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

/// `B_{2j} / (2j)!` for `j = 0..=n`, cached process-wide.
///
/// Uses `(x/2) coth(x/2) = Σ b_{2j} x^{2j}`, which with `c_j = 4^j b_{2j}`
/// gives `c_n = 1/(2n)! - Σ_{j<n} c_j / (2n-2j+1)!`.
pub fn scaled_even_bernoulli(n: usize) -> Vec<BigRational> {
    static CACHE: OnceLock<Mutex<Vec<BigRational>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(vec![BigRational::one()]));
    let mut c = cache.lock().expect("bernoulli cache poisoned");
    while c.len() <= n {
        let k = c.len();
        let mut acc = BigRational::new(BigInt::one(), factorial(2 * k));
        for (j, cj) in c.iter().enumerate() {
            acc -= cj / BigRational::from_integer(factorial(2 * (k - j) + 1));
        }
        c.push(acc);
    }
    c[..=n]
        .iter()
        .enumerate()
        .map(|(j, cj)| cj / BigRational::from_integer(BigInt::from(4u32).pow(j as u32)))
        .collect()
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * i)
}
