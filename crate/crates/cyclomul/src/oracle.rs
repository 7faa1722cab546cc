//! Brute-force reference implementations.
//!
//! Every fast path in this crate is checked against one of these. They
//! share no code with the paths they certify: convolutions are literal
//! double loops, the big-integer product is its own schoolbook limb
//! loop, and the Mersenne reduction subtracts shifted copies of the
//! modulus instead of folding chunks. Only the carrier types
//! (`BigUint`, `CyclicInt`) and word arithmetic are reused.

use crate::bigint::{BigUint, CyclicInt};
use crate::error::Result;

/// Cyclic polynomial product over F_p by the defining double loop:
/// c_k = sum over i + j = k (mod r) of a_i b_j. Inputs must share a
/// common length r; coefficients are reduced mod p.
pub fn oracle_cyclic_poly_mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    assert_eq!(a.len(), b.len(), "cyclic operands must share a length");
    let r = a.len();
    let mut out = vec![0u64; r];
    for (i, &ai) in a.iter().enumerate() {
        let ai = ai % p;
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            let k = (i + j) % r;
            out[k] = ((out[k] as u128 + ai as u128 * (bj % p) as u128) % p as u128) as u64;
        }
    }
    out
}

/// Plain (non-cyclic) polynomial product over F_p, double loop.
pub fn oracle_poly_mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            let t = (ai % p) as u128 * (bj % p) as u128 + out[i + j] as u128;
            out[i + j] = (t % p as u128) as u64;
        }
    }
    out
}

/// Multidimensional cyclic convolution over F_p with explicit
/// mixed-radix index arithmetic, axis by axis.
pub fn oracle_multidim_cyclic_conv(a: &[u64], b: &[u64], dims: &[usize], p: u64) -> Vec<u64> {
    let size: usize = dims.iter().product();
    assert_eq!(a.len(), size);
    assert_eq!(b.len(), size);
    let decode = |mut flat: usize| -> Vec<usize> {
        let mut idx = vec![0usize; dims.len()];
        for (k, &d) in dims.iter().enumerate().rev() {
            idx[k] = flat % d;
            flat /= d;
        }
        idx
    };
    let encode = |idx: &[usize]| -> usize {
        let mut flat = 0usize;
        for (k, &d) in dims.iter().enumerate() {
            flat = flat * d + idx[k] % d;
        }
        flat
    };
    let mut out = vec![0u64; size];
    for i in 0..size {
        if a[i] % p == 0 {
            continue;
        }
        let ii = decode(i);
        for j in 0..size {
            let jj = decode(j);
            let sum: Vec<usize> = ii
                .iter()
                .zip(&jj)
                .zip(dims)
                .map(|((x, y), &d)| (x + y) % d)
                .collect();
            let k = encode(&sum);
            let t = (a[i] % p) as u128 * (b[j] % p) as u128 + out[k] as u128;
            out[k] = (t % p as u128) as u64;
        }
    }
    out
}

/// Reduction modulo 2^n - 1 by subtracting shifted copies of the
/// modulus, long-division style; never folds.
pub fn oracle_mod_mersenne(a: &BigUint, n: u64) -> BigUint {
    let m = BigUint::mersenne(n);
    let mut v = a.clone();
    while v.cmp_val(&m) != std::cmp::Ordering::Less {
        let s = v.bit_len().saturating_sub(n);
        let shifted = m.shl_bits(s);
        if v.cmp_val(&shifted) != std::cmp::Ordering::Less {
            v = v.sub(&shifted);
        } else {
            v = v.sub(&m.shl_bits(s - 1));
        }
    }
    if v == m {
        BigUint::zero()
    } else {
        v
    }
}

/// Product in Z/(2^n - 1)Z by a schoolbook limb loop and the
/// subtraction-based reduction above.
pub fn oracle_cyclic_int_mul(u: &CyclicInt, v: &CyclicInt) -> Result<CyclicInt> {
    let n = u.bits();
    let a = u.value().limbs();
    let b = v.value().limbs();
    let mut prod = vec![0u64; a.len() + b.len() + 1];
    for (i, &ai) in a.iter().enumerate() {
        let mut carry = 0u128;
        for (j, &bj) in b.iter().enumerate() {
            let t = ai as u128 * bj as u128 + prod[i + j] as u128 + carry;
            prod[i + j] = t as u64;
            carry = t >> 64;
        }
        let mut k = i + b.len();
        while carry > 0 {
            let t = prod[k] as u128 + carry;
            prod[k] = t as u64;
            carry = t >> 64;
            k += 1;
        }
    }
    let reduced = oracle_mod_mersenne(&BigUint::from_limbs(prod), n);
    CyclicInt::new(n, reduced)
}

/// The DFT by its defining sums: out_j = sum_i omega^{ij} a_i, with
/// the powers built by repeated multiplication. Ring operations come
/// in as closures so this stays independent of the transform stack.
pub fn oracle_dft<T: Clone>(
    a: &[T],
    omega: &T,
    one: T,
    add: impl Fn(&T, &T) -> T,
    mul: impl Fn(&T, &T) -> T,
) -> Vec<T> {
    let n = a.len();
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        // omega^j
        let mut wj = one.clone();
        for _ in 0..j {
            wj = mul(&wj, omega);
        }
        // running power omega^{ij}, accumulate sum
        let mut acc: Option<T> = None;
        let mut pw = one.clone();
        for ai in a {
            let term = mul(&pw, ai);
            acc = Some(match acc {
                None => term,
                Some(s) => add(&s, &term),
            });
            pw = mul(&pw, &wj);
        }
        out.push(acc.unwrap());
    }
    out
}

/// Cyclic convolution of big-integer residues modulo an arbitrary
/// modulus, double loop.
pub fn oracle_cyclic_conv_mod(a: &[BigUint], b: &[BigUint], modulus: &BigUint) -> Vec<BigUint> {
    assert_eq!(a.len(), b.len());
    let r = a.len();
    let mut out = vec![BigUint::zero(); r];
    for i in 0..r {
        if a[i].is_zero() {
            continue;
        }
        for j in 0..r {
            let k = (i + j) % r;
            let t = crate::bigint::big_mul(&a[i], &b[j]);
            out[k] = out[k].add(&t).divrem(modulus).unwrap().1;
        }
    }
    out
}
