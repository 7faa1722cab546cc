//! Word-size number theory: primality, sieving, factoring, modular
//! arithmetic, multiplicative orders, and Chinese remaindering.
//!
//! Everything here is deterministic. Primality uses the Miller-Rabin
//! witness set {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}, which is
//! proven correct for all inputs below 3.317e24, far beyond the 2^62
//! word cap. Factoring trial-divides by sieved primes up to 2^21 and
//! finishes with Brent's cycle-finding variant of Pollard rho using
//! fixed iteration constants.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::bigint::{big_mul, BigUint};
use crate::error::{Error, Result};

/// Largest modulus the word-size routines accept.
pub const WORD_MODULUS_MAX: u64 = 1 << 62;

const MR_WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// A positive integer together with its prime factorization, factors
/// ascending by prime. The factorization always multiplies back to the
/// value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactoredInt {
    pub value: u64,
    pub factors: Vec<(u64, u32)>,
}

impl FactoredInt {
    /// Validating constructor: factors must be ascending primes with
    /// positive exponents whose product is `value`.
    pub fn from_parts(value: u64, factors: Vec<(u64, u32)>) -> Result<Self> {
        let mut prod: u64 = 1;
        let mut last = 0u64;
        for &(p, e) in &factors {
            if p <= last {
                return Err(Error::Mismatch(
                    "factor list not strictly ascending".into(),
                ));
            }
            last = p;
            if e == 0 {
                return Err(Error::Mismatch("zero exponent in factor list".into()));
            }
            for _ in 0..e {
                prod = prod
                    .checked_mul(p)
                    .ok_or_else(|| Error::Mismatch("factor product overflows".into()))?;
            }
        }
        if prod != value {
            return Err(Error::Mismatch(format!(
                "factors multiply to {prod}, not {value}"
            )));
        }
        Ok(FactoredInt { value, factors })
    }

    /// The distinct primes, ascending.
    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }
}

/// ceil(log2 n), clamped below at 1. Defined for n >= 1.
pub fn lg(n: u64) -> u64 {
    if n <= 2 {
        1
    } else {
        64 - (n - 1).leading_zeros() as u64
    }
}

/// ceil(log2 n) for big n, clamped below at 1.
pub fn lg_big(n: &BigUint) -> u64 {
    if n.cmp_val(&BigUint::from_u64(2)) != std::cmp::Ordering::Greater {
        1
    } else {
        n.sub(&BigUint::one()).bit_len()
    }
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// lcm with overflow check.
pub fn lcm(a: u64, b: u64) -> Result<u64> {
    if a == 0 || b == 0 {
        return Ok(0);
    }
    (a / gcd(a, b))
        .checked_mul(b)
        .ok_or_else(|| Error::UnsupportedWidth("lcm overflows u64".into()))
}

/// Inverse of a modulo m, if gcd(a, m) = 1.
pub fn inv_mod(a: u64, m: u64) -> Result<u64> {
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return Err(Error::NotCoprime(format!("{a} has no inverse mod {m}")));
    }
    Ok(t0.rem_euclid(m as i128) as u64)
}

pub(crate) fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod_raw(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    base %= m;
    let mut acc = 1u64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// base^exp mod modulus for word moduli up to 2^62. Intermediates are
/// double-width and exact.
pub fn pow_mod(base: u64, exp: u64, modulus: u64) -> Result<u64> {
    if modulus == 0 || modulus > WORD_MODULUS_MAX {
        return Err(Error::UnsupportedWidth(format!(
            "pow_mod modulus {modulus} outside (0, 2^62]"
        )));
    }
    Ok(pow_mod_raw(base, exp, modulus))
}

fn miller_rabin_word(n: u64) -> bool {
    debug_assert!(n >= 3 && n % 2 == 1);
    let d = (n - 1) >> (n - 1).trailing_zeros();
    let s = (n - 1).trailing_zeros();
    'witness: for &w in &MR_WITNESSES {
        let w = w % n;
        if w == 0 {
            continue;
        }
        let mut x = pow_mod_raw(w, d, n);
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

/// Deterministic primality for word inputs up to 2^62; wider inputs
/// are an error (see `is_prime_wide` for those).
pub fn is_prime(n: u64) -> Result<bool> {
    if n > WORD_MODULUS_MAX {
        return Err(Error::UnsupportedWidth(format!(
            "is_prime input {n} exceeds 2^62"
        )));
    }
    Ok(match n {
        0 | 1 => false,
        2 => true,
        _ if n % 2 == 0 => false,
        _ => miller_rabin_word(n),
    })
}

/// Deterministic Miller-Rabin for big inputs. The fixed witness set is
/// proven complete below 3.317e24; larger inputs are an error rather
/// than a probabilistic answer.
pub fn is_prime_wide(n: &BigUint) -> Result<bool> {
    static LIMIT: OnceLock<BigUint> = OnceLock::new();
    let limit = LIMIT.get_or_init(|| {
        BigUint::from_decimal("3317044064679887385961981").unwrap()
    });
    if n.cmp_val(limit) != std::cmp::Ordering::Less {
        return Err(Error::UnsupportedWidth(
            "is_prime_wide is deterministic only below 3.317e24".into(),
        ));
    }
    if let Some(w) = n.to_u64() {
        return is_prime(w);
    }
    // n > 2^64 here, odd check still needed
    if n.is_even() {
        return Ok(false);
    }
    let n_minus_1 = n.sub(&BigUint::one());
    let mut s = 0u64;
    let mut d = n_minus_1.clone();
    while d.is_even() {
        d = d.shr_bits(1);
        s += 1;
    }
    'witness: for &w in &MR_WITNESSES {
        let mut x = pow_mod_big(&BigUint::from_u64(w), &d, n);
        if x.is_one() || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = big_mul(&x, &x).divrem(n)?.1;
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return Ok(false);
    }
    Ok(true)
}

/// base^exp mod modulus over big integers (square and multiply).
pub fn pow_mod_big(base: &BigUint, exp: &BigUint, modulus: &BigUint) -> BigUint {
    assert!(!modulus.is_zero(), "pow_mod_big zero modulus");
    if modulus.is_one() {
        return BigUint::zero();
    }
    let mut acc = BigUint::one();
    let mut b = base.divrem(modulus).unwrap().1;
    for i in 0..exp.bit_len() {
        if exp.bit(i) {
            acc = big_mul(&acc, &b).divrem(modulus).unwrap().1;
        }
        b = big_mul(&b, &b).divrem(modulus).unwrap().1;
    }
    acc
}

fn simple_sieve(n: usize) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for p in 2..=n {
        if !composite[p] {
            primes.push(p as u64);
            let mut k = p * p;
            while k <= n {
                composite[k] = true;
                k += p;
            }
        }
    }
    primes
}

const SIEVE_SPAN_BUDGET: u64 = 1 << 28;
const SIEVE_HI_BUDGET: u64 = 1 << 52;

/// Primes in the half-open interval (lo, hi], ascending. A span beyond
/// the budget (2^28) or hi beyond 2^52 errors rather than allocating.
pub fn sieve_primes(lo: u64, hi: u64) -> Result<Vec<u64>> {
    if hi <= lo || hi < 2 {
        return Ok(Vec::new());
    }
    if hi - lo > SIEVE_SPAN_BUDGET {
        return Err(Error::BudgetExceeded(format!(
            "sieve span {} exceeds 2^28",
            hi - lo
        )));
    }
    if hi > SIEVE_HI_BUDGET {
        return Err(Error::BudgetExceeded(format!(
            "sieve endpoint {hi} exceeds 2^52"
        )));
    }
    let start = lo + 1; // first candidate
    let span = (hi - start + 1) as usize;
    let words = span.div_ceil(64);
    let mut composite = vec![0u64; words];
    let root = (hi as f64).sqrt() as u64 + 2;
    for p in simple_sieve(root as usize) {
        let first = if p * p > start {
            p * p
        } else {
            start.div_ceil(p) * p
        };
        let mut k = first;
        while k <= hi {
            let idx = (k - start) as usize;
            composite[idx / 64] |= 1 << (idx % 64);
            k += p;
        }
    }
    let mut out = Vec::new();
    for i in 0..span {
        let n = start + i as u64;
        if n >= 2 && composite[i / 64] >> (i % 64) & 1 == 0 {
            out.push(n);
        }
    }
    Ok(out)
}

const TRIAL_BOUND: u64 = 1 << 21;

fn trial_primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| sieve_primes(1, TRIAL_BOUND).unwrap())
}

// Brent's variant of Pollard rho; n must be odd, composite, and free
// of factors <= TRIAL_BOUND. Iteration constants are fixed so the
// factorization is deterministic.
fn brent_attempt(n: u64, c: u64) -> Option<u64> {
    let f = |x: u64| (mul_mod(x, x, n) + c) % n;
    let mut y = 2u64;
    let mut r = 1u64;
    let mut q = 1u64;
    let mut g = 1u64;
    let mut x = 0u64;
    let mut ys = 0u64;
    while g == 1 {
        x = y;
        for _ in 0..r {
            y = f(y);
        }
        let mut k = 0u64;
        while k < r && g == 1 {
            ys = y;
            let batch = 128.min(r - k);
            for _ in 0..batch {
                y = f(y);
                q = mul_mod(q, x.abs_diff(y), n);
            }
            g = gcd(q, n);
            k += batch;
        }
        r *= 2;
        if r > 1 << 34 {
            return None;
        }
    }
    if g == n {
        // the batch overshot; replay single steps from the checkpoint
        loop {
            ys = f(ys);
            g = gcd(x.abs_diff(ys), n);
            if g > 1 {
                break;
            }
        }
    }
    if g == n {
        None
    } else {
        Some(g)
    }
}

fn pollard_brent(n: u64) -> u64 {
    for c in 1..64u64 {
        if let Some(d) = brent_attempt(n, c) {
            return d;
        }
    }
    panic!("pollard rho exhausted its constants on {n}");
}

fn factor_into(n: u64, out: &mut Vec<(u64, u32)>) {
    if n == 1 {
        return;
    }
    if miller_rabin_word_or_small(n) {
        out.push((n, 1));
        return;
    }
    let d = pollard_brent(n);
    factor_into(d, out);
    factor_into(n / d, out);
}

fn miller_rabin_word_or_small(n: u64) -> bool {
    match n {
        0 | 1 => false,
        2 => true,
        _ if n % 2 == 0 => false,
        _ => miller_rabin_word(n),
    }
}

/// Full factorization of a word: trial division by sieved primes up to
/// 2^21, then deterministic Pollard-Brent on what remains.
pub fn factor_word(n: u64) -> Result<FactoredInt> {
    if n == 0 {
        return Err(Error::NotInvertible("cannot factor zero".into()));
    }
    if n > WORD_MODULUS_MAX {
        return Err(Error::UnsupportedWidth(format!(
            "factor_word input {n} exceeds 2^62"
        )));
    }
    let mut rest = n;
    let mut factors: Vec<(u64, u32)> = Vec::new();
    for &p in trial_primes() {
        if p * p > rest {
            break;
        }
        if rest % p == 0 {
            let mut e = 0u32;
            while rest % p == 0 {
                rest /= p;
                e += 1;
            }
            factors.push((p, e));
        }
    }
    if rest > 1 {
        if miller_rabin_word_or_small(rest) {
            factors.push((rest, 1));
        } else {
            let mut tail = Vec::new();
            factor_into(rest, &mut tail);
            tail.sort_unstable();
            let mut merged: Vec<(u64, u32)> = Vec::new();
            for (p, e) in tail {
                match merged.last_mut() {
                    Some((q, f)) if *q == p => *f += e,
                    _ => merged.push((p, e)),
                }
            }
            factors.extend(merged);
        }
    }
    factors.sort_unstable_by_key(|&(p, _)| p);
    FactoredInt::from_parts(n, factors)
}

/// True when no square divides n.
pub fn is_squarefree(n: u64) -> Result<bool> {
    Ok(factor_word(n)?.is_squarefree())
}

/// All positive divisors of n, ascending.
pub fn divisors(n: u64) -> Result<Vec<u64>> {
    let f = factor_word(n)?;
    let mut out = vec![1u64];
    for (p, e) in &f.factors {
        let prev = out.clone();
        let mut pk = 1u64;
        for _ in 0..*e {
            pk *= p;
            out.extend(prev.iter().map(|d| d * pk));
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// Multiplicative order of a modulo a prime, given the factorization
/// of modulus - 1: start at modulus - 1 and divide out primes while
/// the power stays 1.
pub fn mult_order(a: u64, modulus: u64, modulus_minus_one: &FactoredInt) -> Result<u64> {
    if modulus < 2 || modulus > WORD_MODULUS_MAX {
        return Err(Error::UnsupportedWidth(format!(
            "mult_order modulus {modulus} outside [2, 2^62]"
        )));
    }
    if a % modulus == 0 {
        return Err(Error::NotInvertible(format!(
            "{a} is zero mod {modulus}, order undefined"
        )));
    }
    if modulus_minus_one.value != modulus - 1 {
        return Err(Error::Mismatch(format!(
            "factorization is of {}, expected {}",
            modulus_minus_one.value,
            modulus - 1
        )));
    }
    if pow_mod_raw(a, modulus - 1, modulus) != 1 {
        return Err(Error::Mismatch(format!(
            "{a}^(m-1) != 1 mod {modulus}; modulus not prime?"
        )));
    }
    let mut k = modulus - 1;
    for &(l, e) in &modulus_minus_one.factors {
        for _ in 0..e {
            if k % l == 0 && pow_mod_raw(a, k / l, modulus) == 1 {
                k /= l;
            } else {
                break;
            }
        }
    }
    Ok(k)
}

/// Chinese remaindering of (residue, modulus) pairs with pairwise
/// coprime moduli. Returns (combined residue, combined modulus); the
/// accumulator is a big integer so the product may exceed word width.
pub fn crt_combine(pairs: &[(u64, u64)]) -> Result<(BigUint, BigUint)> {
    let mut x = BigUint::zero();
    let mut m_acc = BigUint::one();
    for &(r, m) in pairs {
        if m == 0 {
            return Err(Error::NotInvertible("zero modulus in CRT input".into()));
        }
        let m_red = m_acc.mod_u64(m);
        if gcd(m_red, m) != 1 {
            return Err(Error::NotCoprime(format!(
                "modulus {m} shares a factor with the accumulated product"
            )));
        }
        let x_red = x.mod_u64(m);
        let diff = ((r % m) + m - x_red % m) % m;
        let t = mul_mod(diff, inv_mod(m_red, m)?, m);
        x = x.add(&m_acc.mul_u64(t));
        m_acc = m_acc.mul_u64(m);
    }
    Ok((x, m_acc))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lg_examples() {
        assert_eq!(lg(1), 1);
        assert_eq!(lg(2), 1);
        assert_eq!(lg(3), 2);
        assert_eq!(lg(1024), 10);
        assert_eq!(lg(1025), 11);
        assert_eq!(lg_big(&BigUint::from_u64(1025)), 11);
        assert_eq!(lg_big(&BigUint::power_of_two(100)), 100);
        assert_eq!(lg_big(&BigUint::power_of_two(100).add_u64(1)), 101);
    }

    #[test]
    fn primality_small_and_wordsize() {
        let primes = [2u64, 3, 5, 7, 97, 65537, 2147483647, 67280421310721];
        for p in primes {
            assert!(is_prime(p).unwrap(), "{p}");
        }
        let composites = [0u64, 1, 4, 9, 561, 65536, 3215031751, 3825123056546413051];
        for c in composites {
            assert!(!is_prime(c).unwrap(), "{c}");
        }
        assert!(is_prime((1 << 62) + 1).is_err());
    }

    #[test]
    fn wide_primality() {
        // 2^89 - 1 is prime but exceeds the deterministic bound
        assert!(is_prime_wide(&BigUint::mersenne(89)).is_err());
        // wordsize values route through the word path
        assert!(is_prime_wide(&BigUint::mersenne(61)).unwrap());
        // a product of two 36-bit primes is composite and > 2^64
        let a = 34359738421u64;
        let b = 34359738473u64;
        assert!(is_prime(a).unwrap() && is_prime(b).unwrap());
        let prod = big_mul(&BigUint::from_u64(a), &BigUint::from_u64(b));
        assert!(!is_prime_wide(&prod).unwrap());
        // a 70-bit prime below the deterministic bound
        let p = BigUint::from_decimal("1000000000000000000117").unwrap();
        assert!(is_prime_wide(&p).unwrap());
        assert!(!is_prime_wide(&p.add_u64(2)).unwrap());
    }

    #[test]
    fn sieve_window() {
        assert_eq!(sieve_primes(0, 10).unwrap(), vec![2, 3, 5, 7]);
        assert_eq!(sieve_primes(10, 30).unwrap(), vec![11, 13, 17, 19, 23, 29]);
        // half-open: lo excluded, hi included
        assert_eq!(sieve_primes(7, 11).unwrap(), vec![11]);
        assert_eq!(sieve_primes(13, 13).unwrap(), Vec::<u64>::new());
        let w = sieve_primes(1 << 30, (1 << 30) + 1000).unwrap();
        assert!(w.iter().all(|&p| is_prime(p).unwrap()));
        assert!(sieve_primes(0, 1 << 29).is_err());
    }

    #[test]
    fn factoring() {
        let f = factor_word(2 * 2 * 3 * 29 * 29 * 1009).unwrap();
        assert_eq!(f.factors, vec![(2, 2), (3, 1), (29, 2), (1009, 1)]);
        // semiprime beyond trial bound
        let p = 2500000001u64; // 2.5e9+1 = ? ensure correctness via product
        let g = factor_word(p).unwrap();
        let mut prod = 1u64;
        for (q, e) in &g.factors {
            assert!(is_prime(*q).unwrap());
            prod *= q.pow(*e);
        }
        assert_eq!(prod, p);
        let h = factor_word(67280421310721u64 * 3).unwrap();
        assert_eq!(h.factors, vec![(3, 1), (67280421310721, 1)]);
        assert!(is_squarefree(2 * 3 * 5 * 7).unwrap());
        assert!(!is_squarefree(2 * 2 * 3).unwrap());
    }

    #[test]
    fn orders() {
        let f6 = factor_word(6).unwrap();
        assert_eq!(mult_order(3, 7, &f6).unwrap(), 6);
        assert_eq!(mult_order(2, 7, &f6).unwrap(), 3);
        assert_eq!(mult_order(6, 7, &f6).unwrap(), 2);
        assert_eq!(mult_order(1, 7, &f6).unwrap(), 1);
        assert!(mult_order(7, 7, &f6).is_err());
        assert!(mult_order(3, 7, &factor_word(4).unwrap()).is_err());
    }

    #[test]
    fn divisor_lists() {
        assert_eq!(divisors(1).unwrap(), vec![1]);
        assert_eq!(divisors(12).unwrap(), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(divisors(49).unwrap(), vec![1, 7, 49]);
        assert_eq!(divisors(30).unwrap().len(), 8);
    }

    #[test]
    fn crt() {
        let (x, m) = crt_combine(&[(2, 3), (3, 5), (2, 7)]).unwrap();
        assert_eq!(x.to_u64(), Some(23));
        assert_eq!(m.to_u64(), Some(105));
        assert!(crt_combine(&[(1, 6), (2, 4)]).is_err());
        let (x, m) = crt_combine(&[]).unwrap();
        assert!(x.is_zero());
        assert!(m.is_one());
    }

    #[test]
    fn pow_mod_contract() {
        assert_eq!(pow_mod(3, 100, 101).unwrap(), 1);
        assert_eq!(pow_mod(2, 61, (1 << 61) - 1).unwrap(), 1);
        assert!(pow_mod(2, 2, (1 << 62) + 1).is_err());
        let m = (1u64 << 61) - 1;
        // double-width exactness near the cap
        assert_eq!(pow_mod(m - 1, 2, m).unwrap(), 1);
    }
}
