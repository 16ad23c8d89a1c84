//! Small integer helpers: primes, factorization, gcd/lcm with the `0` conventions
//! used for subgroup multipliers (`0·A = {0}`).

use num_integer::Integer;

pub type Rational = num_rational::Ratio<i64>;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Prime factorization as ascending `(prime, exponent)` pairs. `factorize(1)` is empty.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    assert!(n > 0, "factorize(0)");
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn prime_divisors(n: u64) -> Vec<u64> {
    factorize(n).into_iter().map(|(p, _)| p).collect()
}

/// The first `count` primes.
pub fn first_primes(count: usize) -> Vec<u64> {
    (2u64..).filter(|&n| is_prime(n)).take(count).collect()
}

/// gcd with `gcd(0, x) = x`.
pub fn gcd(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

/// lcm on multipliers: `0` absorbs (`lcm(0, x) = 0`).
pub fn lcm(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        0
    } else {
        a.lcm(&b)
    }
}

/// `p`-adic valuation of a nonzero integer.
pub fn valuation(mut n: u64, p: u64) -> u32 {
    debug_assert!(n != 0);
    let mut v = 0;
    while n.is_multiple_of(p) {
        n /= p;
        v += 1;
    }
    v
}

/// Primes dividing the denominator of a reduced rational.
pub fn denominator_primes(q: &Rational) -> Vec<u64> {
    prime_divisors(q.denom().unsigned_abs())
}

/// Least non-negative residue of `a` modulo `m > 0`.
pub fn modp(a: i64, m: i64) -> i64 {
    a.rem_euclid(m)
}
