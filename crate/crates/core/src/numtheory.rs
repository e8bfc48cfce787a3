//! Integer utilities: trial-division factorization with a hard budget,
//! squarefree classes in Q*/Q*², Jacobi symbols and fourth-power tests.

use std::fmt;
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, ExactRational};

/// Primes below this limit are stripped from big integers before the
/// perfect-square test in [`squarefree_kernel`].
const SMALL_PRIME_LIMIT: u64 = 1 << 16;

/// Upper bound on `|n|` accepted by [`factorize`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorBudget {
    pub max_abs: u64,
}

impl Default for FactorBudget {
    fn default() -> Self {
        FactorBudget { max_abs: 1 << 63 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factorization {
    pub sign: i8,
    /// `(prime, exponent)` with strictly increasing primes.
    pub prime_powers: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn reconstruct(&self) -> BigInt {
        let mut n = BigInt::from(self.sign);
        for &(p, e) in &self.prime_powers {
            n *= num_traits::pow(BigInt::from(p), e as usize);
        }
        n
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.prime_powers.iter().map(|&(p, _)| p)
    }

    /// Number of distinct odd prime divisors.
    pub fn omega_odd(&self) -> u32 {
        self.primes().filter(|&p| p != 2).count() as u32
    }

    pub fn is_squarefree(&self) -> bool {
        self.prime_powers.iter().all(|&(_, e)| e == 1)
    }
}

fn small_primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let n = SMALL_PRIME_LIMIT as usize;
        let mut sieve = vec![true; n];
        sieve[0] = false;
        sieve[1] = false;
        let mut i = 2;
        while i * i < n {
            if sieve[i] {
                let mut j = i * i;
                while j < n {
                    sieve[j] = false;
                    j += i;
                }
            }
            i += 1;
        }
        (0..n).filter(|&k| sieve[k]).map(|k| k as u64).collect()
    })
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin; the base set is a proof for all `n < 2^64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn factor_u64(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut push = |p: u64, n: &mut u64| {
        let mut e = 0;
        while (*n).is_multiple_of(p) {
            *n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
    };
    for &p in small_primes() {
        if p * p > n {
            break;
        }
        push(p, &mut n);
    }
    // Past the sieve: trial division by 6k +- 1, stopping as soon as the
    // cofactor is certified prime.
    let mut p = SMALL_PRIME_LIMIT + 1;
    let mut cofactor_prime = is_prime(n);
    while !cofactor_prime && p.checked_mul(p).is_some_and(|pp| pp <= n) {
        let before = n;
        push(p, &mut n);
        push(p + 2, &mut n);
        if n != before {
            cofactor_prime = is_prime(n);
        }
        p += 6;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out.sort_unstable();
    out
}

/// Factor a nonzero integer by trial division.
pub fn factorize(n: &BigInt, budget: &FactorBudget) -> Result<Factorization> {
    if n.is_zero() {
        return Err(Error::ZeroInput);
    }
    let abs = n.magnitude();
    let small = abs
        .to_u64()
        .filter(|&v| v < budget.max_abs)
        .ok_or_else(|| Error::FactorizationBudget(format!("|{n}| >= {}", budget.max_abs)))?;
    Ok(Factorization {
        sign: if n.is_negative() { -1 } else { 1 },
        prime_powers: factor_u64(small),
    })
}

pub fn factorize_i64(n: i64) -> Result<Factorization> {
    factorize(&BigInt::from(n), &FactorBudget::default())
}

/// Number of odd prime divisors.
pub fn omega_odd(n: i64) -> Result<u32> {
    Ok(factorize_i64(n)?.omega_odd())
}

pub fn is_squarefree(n: i64) -> Result<bool> {
    Ok(factorize_i64(n)?.is_squarefree())
}

/// Rejects zero and non-squarefree integers.
pub fn require_squarefree(n: i64) -> Result<()> {
    if !is_squarefree(n)? {
        return Err(Error::NotSquarefree(BigInt::from(n)));
    }
    Ok(())
}

/// A class in Q*/Q*², represented by its signed squarefree kernel.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SquarefreeClass(BigInt);

impl SquarefreeClass {
    /// Trusts the caller that `rep` is squarefree and nonzero.
    pub fn from_squarefree(rep: BigInt) -> Self {
        debug_assert!(!rep.is_zero());
        SquarefreeClass(rep)
    }

    pub fn representative(&self) -> &BigInt {
        &self.0
    }

    pub fn to_i64(&self) -> Option<i64> {
        self.0.to_i64()
    }

    /// Membership test without factoring: `q` lies in the class iff `q·rep`
    /// is a rational square.
    pub fn contains(&self, q: &ExactRational) -> bool {
        if q.is_zero() {
            return false;
        }
        let prod = q * ExactRational::from_integer(self.0.clone());
        rational::sqrt_rational(&prod).is_some()
    }

    pub fn mul(&self, other: &SquarefreeClass) -> SquarefreeClass {
        let g = self.0.gcd(&other.0);
        let mut rep = (&self.0 / &g) * (&other.0 / &g);
        if self.0.is_negative() && other.0.is_negative() {
            rep = rep.abs();
        }
        SquarefreeClass(rep)
    }
}

impl fmt::Display for SquarefreeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.0)
    }
}

/// Remainder of `n` modulo a `u64`, without building a `BigInt` modulus.
fn rem_u64(n: &BigUint, m: u64) -> u64 {
    (n % m).to_u64().expect("remainder fits")
}

/// Signed squarefree kernel of a nonzero integer.
///
/// Strips every prime below 2^16, then accepts the cofactor if it is a
/// perfect square or is certified prime. Large cofactors with unknown
/// structure raise a budget error rather than a guess.
pub fn squarefree_kernel(n: &BigInt) -> Result<BigInt> {
    if n.is_zero() {
        return Err(Error::ZeroInput);
    }
    let mut rest = n.magnitude().clone();
    let mut kernel = BigUint::one();
    // Batch primes into products that fit a u64 so each batch costs one
    // big remainder.
    for chunk in small_primes().chunks(4) {
        if rest.is_one() {
            break;
        }
        let modulus: u64 = chunk.iter().product();
        let r = rem_u64(&rest, modulus);
        for &p in chunk {
            if !r.is_multiple_of(p) {
                continue;
            }
            let mut e = 0u32;
            while rem_u64(&rest, p) == 0 {
                rest /= p;
                e += 1;
            }
            if e % 2 == 1 {
                kernel *= p;
            }
        }
    }
    if !rest.is_one() {
        let root = rest.sqrt();
        if &root * &root != rest {
            match rest.to_u64() {
                Some(v) if is_prime(v) => kernel *= v,
                Some(v) => {
                    for (p, e) in factor_u64(v) {
                        if e % 2 == 1 {
                            kernel *= p;
                        }
                    }
                }
                None => {
                    return Err(Error::FactorizationBudget(format!(
                        "cofactor with {} bits has no small prime factor and is not a square",
                        rest.bits()
                    )))
                }
            }
        }
    }
    let sign = if n.is_negative() { Sign::Minus } else { Sign::Plus };
    Ok(BigInt::from_biguint(sign, kernel))
}

pub fn squarefree_class(q: &ExactRational) -> Result<SquarefreeClass> {
    if q.is_zero() {
        return Err(Error::ZeroInput);
    }
    let n = q.numer() * q.denom();
    Ok(SquarefreeClass(squarefree_kernel(&n)?))
}

pub fn squarefree_class_int(n: i64) -> Result<SquarefreeClass> {
    squarefree_class(&rational::int(n))
}

/// Jacobi symbol `(a / n)` for odd positive `n`.
pub fn jacobi_symbol(a: &BigInt, n: &BigInt) -> Result<i8> {
    if !n.is_positive() || n.is_even() {
        return Err(Error::InvalidModulus(format!("Jacobi symbol needs odd n >= 1, got {n}")));
    }
    let mut a = a.mod_floor(n);
    let mut n = n.clone();
    let mut acc = 1i8;
    let eight = BigInt::from(8);
    let four = BigInt::from(4);
    while !a.is_zero() {
        let tz = a.trailing_zeros().unwrap_or(0);
        a >>= tz;
        let n8 = (&n % &eight).to_u8().unwrap();
        if tz % 2 == 1 && (n8 == 3 || n8 == 5) {
            acc = -acc;
        }
        if (&a % &four) == BigInt::from(3) && (&n % &four) == BigInt::from(3) {
            acc = -acc;
        }
        std::mem::swap(&mut a, &mut n);
        a = a.mod_floor(&n);
    }
    Ok(if n.is_one() { acc } else { 0 })
}

pub fn jacobi_i64(a: i64, n: i64) -> Result<i8> {
    jacobi_symbol(&BigInt::from(a), &BigInt::from(n))
}

/// Whether `a mod p` is a fourth power in F_p (0 counts).
pub fn is_fourth_power_mod_p(a: i64, p: u64) -> Result<bool> {
    if p == 2 || !is_prime(p) {
        return Err(Error::InvalidModulus(format!("{p} is not an odd prime")));
    }
    let r = a.rem_euclid(p as i64) as u64;
    if r == 0 {
        return Ok(true);
    }
    // The fourth powers form the subgroup of index gcd(4, p - 1).
    let index = 4u64.gcd(&(p - 1));
    Ok(pow_mod(r, (p - 1) / index, p) == 1)
}
