//! Arbitrary-precision unsigned integers and cyclic (Mersenne-modulus)
//! integers.
//!
//! `BigUint` stores base-2^64 limbs little-endian with no trailing zero
//! limb; zero is the empty limb vector. `CyclicInt` wraps a residue in
//! Z/(2^n - 1)Z kept in the canonical range [0, 2^n - 2]: the all-ones
//! pattern 2^n - 1 folds to 0 on construction.
//!
//! Multiplication dispatches between schoolbook and Karatsuba at a
//! configurable limb-count crossover. Reduction modulo 2^n - 1 folds
//! n-bit chunks, never divides.

use std::cmp::Ordering;
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};

use crate::error::{Error, Result};

/// Bits per limb. The limb type is fixed at build time; widths in this
/// module's interfaces are always expressed in bits, not limbs.
pub const LIMB_BITS: usize = 64;

static KARATSUBA_THRESHOLD: AtomicUsize = AtomicUsize::new(32);

/// Sets the limb count below which `big_mul` uses the schoolbook loop.
/// Returns the previous threshold. Intended for tests and tuning.
pub fn set_karatsuba_threshold(limbs: usize) -> usize {
    KARATSUBA_THRESHOLD.swap(limbs.max(1), AtomicOrdering::Relaxed)
}

/// Current schoolbook/Karatsuba crossover in limbs.
pub fn karatsuba_threshold() -> usize {
    KARATSUBA_THRESHOLD.load(AtomicOrdering::Relaxed)
}

/// Unsigned big integer, base 2^64, little-endian limbs, canonical
/// (no trailing zero limb; zero is the empty vector).
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BigUint {
    limbs: Vec<u64>,
}

impl BigUint {
    pub fn zero() -> Self {
        BigUint { limbs: Vec::new() }
    }

    pub fn one() -> Self {
        BigUint { limbs: vec![1] }
    }

    pub fn from_u64(v: u64) -> Self {
        if v == 0 {
            Self::zero()
        } else {
            BigUint { limbs: vec![v] }
        }
    }

    pub fn from_u128(v: u128) -> Self {
        let lo = v as u64;
        let hi = (v >> 64) as u64;
        let mut limbs = vec![lo, hi];
        trim(&mut limbs);
        BigUint { limbs }
    }

    /// Builds from little-endian limbs, trimming trailing zeros.
    pub fn from_limbs(mut limbs: Vec<u64>) -> Self {
        trim(&mut limbs);
        BigUint { limbs }
    }

    /// 2^n - 1.
    pub fn mersenne(n: u64) -> Self {
        let n = n as usize;
        let full = n / LIMB_BITS;
        let rem = n % LIMB_BITS;
        let mut limbs = vec![u64::MAX; full];
        if rem > 0 {
            limbs.push((1u64 << rem) - 1);
        }
        trim(&mut limbs);
        BigUint { limbs }
    }

    /// 2^n.
    pub fn power_of_two(n: u64) -> Self {
        BigUint::one().shl_bits(n)
    }

    pub fn is_zero(&self) -> bool {
        self.limbs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.limbs.len() == 1 && self.limbs[0] == 1
    }

    pub fn limbs(&self) -> &[u64] {
        &self.limbs
    }

    /// Number of significant bits; 0 for zero.
    pub fn bit_len(&self) -> u64 {
        match self.limbs.last() {
            None => 0,
            Some(&top) => {
                (self.limbs.len() as u64 - 1) * LIMB_BITS as u64
                    + (LIMB_BITS as u64 - top.leading_zeros() as u64)
            }
        }
    }

    /// Bit at position i (little-endian), 0 beyond the top.
    pub fn bit(&self, i: u64) -> bool {
        let limb = (i / LIMB_BITS as u64) as usize;
        let off = (i % LIMB_BITS as u64) as u32;
        self.limbs.get(limb).is_some_and(|&l| (l >> off) & 1 == 1)
    }

    pub fn is_even(&self) -> bool {
        !self.bit(0)
    }

    /// Value as u64 if it fits.
    pub fn to_u64(&self) -> Option<u64> {
        match self.limbs.len() {
            0 => Some(0),
            1 => Some(self.limbs[0]),
            _ => None,
        }
    }

    pub fn add(&self, other: &BigUint) -> BigUint {
        let (long, short) = if self.limbs.len() >= other.limbs.len() {
            (&self.limbs, &other.limbs)
        } else {
            (&other.limbs, &self.limbs)
        };
        let mut out = Vec::with_capacity(long.len() + 1);
        let mut carry = 0u64;
        for i in 0..long.len() {
            let b = short.get(i).copied().unwrap_or(0);
            let (s1, c1) = long[i].overflowing_add(b);
            let (s2, c2) = s1.overflowing_add(carry);
            out.push(s2);
            carry = (c1 as u64) + (c2 as u64);
        }
        if carry > 0 {
            out.push(carry);
        }
        trim(&mut out);
        BigUint { limbs: out }
    }

    pub fn add_u64(&self, v: u64) -> BigUint {
        self.add(&BigUint::from_u64(v))
    }

    /// Subtraction; panics if other > self (callers must compare first).
    pub fn sub(&self, other: &BigUint) -> BigUint {
        assert!(
            self.cmp_val(other) != Ordering::Less,
            "BigUint::sub underflow"
        );
        let mut out = Vec::with_capacity(self.limbs.len());
        let mut borrow = 0u64;
        for i in 0..self.limbs.len() {
            let b = other.limbs.get(i).copied().unwrap_or(0);
            let (d1, b1) = self.limbs[i].overflowing_sub(b);
            let (d2, b2) = d1.overflowing_sub(borrow);
            out.push(d2);
            borrow = (b1 as u64) + (b2 as u64);
        }
        debug_assert_eq!(borrow, 0);
        trim(&mut out);
        BigUint { limbs: out }
    }

    pub fn cmp_val(&self, other: &BigUint) -> Ordering {
        if self.limbs.len() != other.limbs.len() {
            return self.limbs.len().cmp(&other.limbs.len());
        }
        for i in (0..self.limbs.len()).rev() {
            match self.limbs[i].cmp(&other.limbs[i]) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        Ordering::Equal
    }

    pub fn shl_bits(&self, n: u64) -> BigUint {
        if self.is_zero() {
            return BigUint::zero();
        }
        let limb_shift = (n / LIMB_BITS as u64) as usize;
        let bit_shift = (n % LIMB_BITS as u64) as u32;
        let mut out = vec![0u64; limb_shift];
        if bit_shift == 0 {
            out.extend_from_slice(&self.limbs);
        } else {
            let mut carry = 0u64;
            for &l in &self.limbs {
                out.push((l << bit_shift) | carry);
                carry = l >> (LIMB_BITS as u32 - bit_shift);
            }
            if carry > 0 {
                out.push(carry);
            }
        }
        trim(&mut out);
        BigUint { limbs: out }
    }

    pub fn shr_bits(&self, n: u64) -> BigUint {
        let limb_shift = (n / LIMB_BITS as u64) as usize;
        if limb_shift >= self.limbs.len() {
            return BigUint::zero();
        }
        let bit_shift = (n % LIMB_BITS as u64) as u32;
        let src = &self.limbs[limb_shift..];
        let mut out;
        if bit_shift == 0 {
            out = src.to_vec();
        } else {
            out = Vec::with_capacity(src.len());
            for i in 0..src.len() {
                let lo = src[i] >> bit_shift;
                let hi = src
                    .get(i + 1)
                    .map(|&l| l << (LIMB_BITS as u32 - bit_shift))
                    .unwrap_or(0);
                out.push(lo | hi);
            }
        }
        trim(&mut out);
        BigUint { limbs: out }
    }

    /// The `width` bits starting at bit `lo`, as a new value.
    pub fn extract_bits(&self, lo: u64, width: u64) -> BigUint {
        let shifted = self.shr_bits(lo);
        let keep_limbs = (width as usize).div_ceil(LIMB_BITS);
        let mut limbs: Vec<u64> = shifted
            .limbs
            .iter()
            .take(keep_limbs)
            .copied()
            .collect();
        let rem = (width % LIMB_BITS as u64) as u32;
        if rem > 0 && limbs.len() == keep_limbs {
            let mask = (1u64 << rem) - 1;
            if let Some(top) = limbs.last_mut() {
                *top &= mask;
            }
        }
        trim(&mut limbs);
        BigUint { limbs }
    }

    pub fn mul_u64(&self, v: u64) -> BigUint {
        if v == 0 || self.is_zero() {
            return BigUint::zero();
        }
        let mut out = Vec::with_capacity(self.limbs.len() + 1);
        let mut carry = 0u128;
        for &l in &self.limbs {
            let t = l as u128 * v as u128 + carry;
            out.push(t as u64);
            carry = t >> 64;
        }
        if carry > 0 {
            out.push(carry as u64);
        }
        trim(&mut out);
        BigUint { limbs: out }
    }

    /// Quotient and remainder; divisor must be nonzero.
    pub fn divrem(&self, divisor: &BigUint) -> Result<(BigUint, BigUint)> {
        if divisor.is_zero() {
            return Err(Error::NotInvertible("division by zero".into()));
        }
        if self.cmp_val(divisor) == Ordering::Less {
            return Ok((BigUint::zero(), self.clone()));
        }
        if divisor.limbs.len() == 1 {
            let (q, r) = self.divrem_u64(divisor.limbs[0]);
            return Ok((q, BigUint::from_u64(r)));
        }
        Ok(self.divrem_knuth(divisor))
    }

    /// Division by a single limb.
    pub fn divrem_u64(&self, divisor: u64) -> (BigUint, u64) {
        assert!(divisor != 0, "division by zero");
        let mut q = vec![0u64; self.limbs.len()];
        let mut rem = 0u128;
        for i in (0..self.limbs.len()).rev() {
            let cur = (rem << 64) | self.limbs[i] as u128;
            q[i] = (cur / divisor as u128) as u64;
            rem = cur % divisor as u128;
        }
        trim(&mut q);
        (BigUint { limbs: q }, rem as u64)
    }

    pub fn mod_u64(&self, modulus: u64) -> u64 {
        self.divrem_u64(modulus).1
    }

    // Knuth algorithm D on normalized limbs.
    fn divrem_knuth(&self, divisor: &BigUint) -> (BigUint, BigUint) {
        let shift = divisor.limbs.last().unwrap().leading_zeros() as u64;
        let u = self.shl_bits(shift);
        let v = divisor.shl_bits(shift);
        let n = v.limbs.len();
        let m = u.limbs.len() - n;
        let mut un = u.limbs.clone();
        un.push(0);
        let vn = &v.limbs;
        let mut q = vec![0u64; m + 1];
        let vtop = vn[n - 1] as u128;
        let vsec = vn[n - 2] as u128;
        for j in (0..=m).rev() {
            let num = ((un[j + n] as u128) << 64) | un[j + n - 1] as u128;
            let mut qhat = num / vtop;
            let mut rhat = num % vtop;
            if qhat >> 64 != 0 {
                qhat = u64::MAX as u128;
                rhat = num - qhat * vtop;
            }
            while rhat >> 64 == 0
                && qhat * vsec > ((rhat << 64) | un[j + n - 2] as u128)
            {
                qhat -= 1;
                rhat += vtop;
            }
            // multiply-subtract qhat*v from un[j..j+n+1]
            let mut borrow = 0i128;
            let mut carry = 0u128;
            for i in 0..n {
                let p = qhat * vn[i] as u128 + carry;
                carry = p >> 64;
                let sub = (un[j + i] as i128) - ((p as u64) as i128) - borrow;
                un[j + i] = sub as u64;
                borrow = if sub < 0 { 1 } else { 0 };
            }
            let sub = (un[j + n] as i128) - (carry as i128) - borrow;
            un[j + n] = sub as u64;
            if sub < 0 {
                // qhat was one too large: add v back
                qhat -= 1;
                let mut c = 0u64;
                for i in 0..n {
                    let (s1, c1) = un[j + i].overflowing_add(vn[i]);
                    let (s2, c2) = s1.overflowing_add(c);
                    un[j + i] = s2;
                    c = (c1 as u64) + (c2 as u64);
                }
                un[j + n] = un[j + n].wrapping_add(c);
            }
            q[j] = qhat as u64;
        }
        trim(&mut q);
        let mut rem_limbs = un[..n].to_vec();
        trim(&mut rem_limbs);
        let rem = BigUint { limbs: rem_limbs }.shr_bits(shift);
        (BigUint { limbs: q }, rem)
    }

    /// Lowercase hex, most significant digit first, "0" for zero.
    pub fn to_hex(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut s = String::new();
        let top = self.limbs.len() - 1;
        s.push_str(&format!("{:x}", self.limbs[top]));
        for i in (0..top).rev() {
            s.push_str(&format!("{:016x}", self.limbs[i]));
        }
        s
    }

    pub fn from_hex(s: &str) -> Result<BigUint> {
        let t = s.trim().trim_start_matches("0x");
        if t.is_empty() {
            return Err(Error::Parse("empty hex string".into()));
        }
        let mut out = BigUint::zero();
        for ch in t.chars() {
            let d = ch
                .to_digit(16)
                .ok_or_else(|| Error::Parse(format!("bad hex digit {ch:?}")))?;
            out = out.shl_bits(4).add_u64(d as u64);
        }
        Ok(out)
    }

    /// Decimal digit string, most significant first.
    pub fn to_decimal(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut chunks = Vec::new();
        let mut v = self.clone();
        while !v.is_zero() {
            let (q, r) = v.divrem_u64(10_000_000_000_000_000_000);
            chunks.push(r);
            v = q;
        }
        let mut s = format!("{}", chunks.pop().unwrap());
        while let Some(c) = chunks.pop() {
            s.push_str(&format!("{:019}", c));
        }
        s
    }

    pub fn from_decimal(s: &str) -> Result<BigUint> {
        let t = s.trim();
        if t.is_empty() || !t.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::Parse(format!("bad decimal string {t:?}")));
        }
        let mut out = BigUint::zero();
        for b in t.bytes() {
            out = out.mul_u64(10).add_u64((b - b'0') as u64);
        }
        Ok(out)
    }
}

impl Ord for BigUint {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_val(other)
    }
}

impl PartialOrd for BigUint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl std::fmt::Debug for BigUint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BigUint(0x{})", self.to_hex())
    }
}

impl std::fmt::Display for BigUint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.to_decimal())
    }
}

impl std::ops::Add for &BigUint {
    type Output = BigUint;
    fn add(self, rhs: &BigUint) -> BigUint {
        BigUint::add(self, rhs)
    }
}

impl std::ops::Sub for &BigUint {
    type Output = BigUint;
    fn sub(self, rhs: &BigUint) -> BigUint {
        BigUint::sub(self, rhs)
    }
}

impl std::ops::Mul for &BigUint {
    type Output = BigUint;
    fn mul(self, rhs: &BigUint) -> BigUint {
        big_mul(self, rhs)
    }
}

fn trim(limbs: &mut Vec<u64>) {
    while limbs.last() == Some(&0) {
        limbs.pop();
    }
}

fn mul_schoolbook(a: &[u64], b: &[u64]) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len()];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        let mut carry = 0u128;
        for (j, &bj) in b.iter().enumerate() {
            let t = ai as u128 * bj as u128 + out[i + j] as u128 + carry;
            out[i + j] = t as u64;
            carry = t >> 64;
        }
        let mut k = i + b.len();
        while carry > 0 {
            let t = out[k] as u128 + carry;
            out[k] = t as u64;
            carry = t >> 64;
            k += 1;
        }
    }
    trim(&mut out);
    out
}

fn mul_rec(a: &[u64], b: &[u64], threshold: usize) -> Vec<u64> {
    if a.len().min(b.len()) <= threshold {
        return mul_schoolbook(a, b);
    }
    // split at half the longer operand; empty high halves fall out
    let m = a.len().max(b.len()) / 2;
    let (a0, a1) = split_at_limb(a, m);
    let (b0, b1) = split_at_limb(b, m);
    let z0 = mul_rec(a0, b0, threshold);
    let z2 = mul_rec(a1, b1, threshold);
    let asum = BigUint::from_limbs(a0.to_vec()).add(&BigUint::from_limbs(a1.to_vec()));
    let bsum = BigUint::from_limbs(b0.to_vec()).add(&BigUint::from_limbs(b1.to_vec()));
    let zmid = mul_rec(&asum.limbs, &bsum.limbs, threshold);
    let z0b = BigUint::from_limbs(z0);
    let z2b = BigUint::from_limbs(z2);
    let z1 = BigUint::from_limbs(zmid).sub(&z0b).sub(&z2b);
    let shift = (m * LIMB_BITS) as u64;
    z0b.add(&z1.shl_bits(shift)).add(&z2b.shl_bits(2 * shift)).limbs
}

fn split_at_limb(x: &[u64], m: usize) -> (&[u64], &[u64]) {
    if x.len() <= m {
        (x, &[])
    } else {
        (&x[..m], &x[m..])
    }
}

/// Product of two big integers. Operands at or below the crossover (in
/// limbs) multiply with the schoolbook loop; larger ones split with
/// Karatsuba down to the crossover.
pub fn big_mul(a: &BigUint, b: &BigUint) -> BigUint {
    let threshold = karatsuba_threshold();
    BigUint {
        limbs: mul_rec(&a.limbs, &b.limbs, threshold),
    }
}

/// Reduces `a` modulo 2^n - 1 by folding n-bit chunks; the all-ones
/// value 2^n - 1 maps to 0. Requires n >= 1.
pub fn mod_mersenne(a: &BigUint, n: u64) -> BigUint {
    assert!(n >= 1, "mod_mersenne needs n >= 1");
    let mut v = a.clone();
    while v.bit_len() > n {
        let low = v.extract_bits(0, n);
        let high = v.shr_bits(n);
        v = low.add(&high);
    }
    if v == BigUint::mersenne(n) {
        BigUint::zero()
    } else {
        v
    }
}

/// Residue in Z/(2^n - 1)Z, canonical value in [0, 2^n - 2].
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CyclicInt {
    n: u64,
    value: BigUint,
}

impl CyclicInt {
    /// Wraps a value into the ring, folding and canonicalizing.
    pub fn new(n: u64, value: BigUint) -> Result<CyclicInt> {
        if n == 0 {
            return Err(Error::UnsupportedWidth(
                "cyclic integer needs n >= 1".into(),
            ));
        }
        Ok(CyclicInt {
            n,
            value: mod_mersenne(&value, n),
        })
    }

    pub fn zero(n: u64) -> Result<CyclicInt> {
        CyclicInt::new(n, BigUint::zero())
    }

    pub fn bits(&self) -> u64 {
        self.n
    }

    pub fn value(&self) -> &BigUint {
        &self.value
    }

    /// Parses a hex string (any length) and reduces it into the ring.
    pub fn from_hex(n: u64, s: &str) -> Result<CyclicInt> {
        CyclicInt::new(n, BigUint::from_hex(s)?)
    }

    /// Lowercase hex, zero-padded to ceil(n/4) digits so the width is
    /// visible in the output.
    pub fn to_hex(&self) -> String {
        let digits = (self.n as usize).div_ceil(4);
        let raw = self.value.to_hex();
        let raw = if raw == "0" { String::new() } else { raw };
        format!("{}{}", "0".repeat(digits - raw.len()), raw)
    }

    pub fn add(&self, other: &CyclicInt) -> Result<CyclicInt> {
        self.check_same(other)?;
        CyclicInt::new(self.n, self.value.add(&other.value))
    }
}

impl CyclicInt {
    fn check_same(&self, other: &CyclicInt) -> Result<()> {
        if self.n != other.n {
            return Err(Error::Mismatch(format!(
                "cyclic integers of width {} and {}",
                self.n, other.n
            )));
        }
        Ok(())
    }
}

/// Product in Z/(2^n - 1)Z: one big multiply, then Mersenne folding.
/// The operands must share the same width n.
pub fn cyclic_mul(u: &CyclicInt, v: &CyclicInt) -> Result<CyclicInt> {
    u.check_same(v)?;
    CyclicInt::new(u.n, big_mul(&u.value, &v.value))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(s: &str) -> BigUint {
        BigUint::from_decimal(s).unwrap()
    }

    #[test]
    fn canonical_forms() {
        assert!(BigUint::zero().limbs().is_empty());
        assert_eq!(BigUint::from_limbs(vec![5, 0, 0]).limbs(), &[5]);
        assert_eq!(BigUint::from_u64(0), BigUint::zero());
    }

    #[test]
    fn add_sub_roundtrip() {
        let a = big("340282366920938463463374607431768211456"); // 2^128
        let b = big("18446744073709551615"); // 2^64 - 1
        let s = a.add(&b);
        assert_eq!(s.sub(&b), a);
        assert_eq!(s.sub(&a), b);
        assert_eq!(s.to_decimal(), "340282366920938463481821351505477763071");
    }

    #[test]
    fn mul_matches_known_square() {
        let a = big("18446744073709551616"); // 2^64
        assert_eq!(
            big_mul(&a, &a).to_decimal(),
            "340282366920938463463374607431768211456"
        );
        let b = big("12345678901234567890123456789");
        let c = big("98765432109876543210987654321");
        assert_eq!(
            big_mul(&b, &c).to_decimal(),
            "1219326311370217952261850327336229233322374638011112635269"
        );
    }

    #[test]
    fn karatsuba_agrees_with_schoolbook() {
        let mut x = BigUint::one();
        for k in 1..200u64 {
            x = x.mul_u64(k * 2 + 1).add_u64(k);
        }
        let y = x.shl_bits(513).add(&x);
        let prev = set_karatsuba_threshold(2);
        let fast = big_mul(&x, &y);
        set_karatsuba_threshold(usize::MAX);
        let slow = big_mul(&x, &y);
        set_karatsuba_threshold(prev);
        assert_eq!(fast, slow);
    }

    #[test]
    fn divrem_reconstructs() {
        let a = big("123456789012345678901234567890123456789012345678901");
        let d = big("98765432109876543210987");
        let (q, r) = a.divrem(&d).unwrap();
        assert!(r.cmp_val(&d) == Ordering::Less);
        assert_eq!(big_mul(&q, &d).add(&r), a);
        assert!(BigUint::one().divrem(&BigUint::zero()).is_err());
    }

    #[test]
    fn shifts_and_bits() {
        let a = big("1");
        assert_eq!(a.shl_bits(130).bit_len(), 131);
        assert_eq!(a.shl_bits(130).shr_bits(130), a);
        let b = big("255").shl_bits(60);
        assert_eq!(b.extract_bits(60, 8).to_u64(), Some(255));
        assert_eq!(b.extract_bits(61, 4).to_u64(), Some(15));
        assert_eq!(b.extract_bits(200, 64), BigUint::zero());
    }

    #[test]
    fn hex_decimal_io() {
        let a = BigUint::from_hex("deadbeefcafe1234").unwrap();
        assert_eq!(a.to_hex(), "deadbeefcafe1234");
        assert_eq!(BigUint::from_decimal(&a.to_decimal()).unwrap(), a);
        assert_eq!(BigUint::zero().to_hex(), "0");
        assert_eq!(BigUint::zero().to_decimal(), "0");
        assert!(BigUint::from_hex("xyz").is_err());
        assert!(BigUint::from_decimal("12a").is_err());
    }

    #[test]
    fn mersenne_folding() {
        // n = 8: 200 * 200 = 40000; 40000 mod 255 = 220
        let a = BigUint::from_u64(40000);
        assert_eq!(mod_mersenne(&a, 8).to_u64(), Some(220));
        // all-ones folds to zero
        assert_eq!(mod_mersenne(&BigUint::mersenne(17), 17), BigUint::zero());
        // multiple folds: (2^8-1)^2 = 65025 -> 0 mod 255
        let sq = big_mul(&BigUint::mersenne(8), &BigUint::mersenne(8));
        assert_eq!(mod_mersenne(&sq, 8), BigUint::zero());
    }

    #[test]
    fn cyclic_mul_examples() {
        // 0xff = 255 == 0 in Z/(2^8 - 1)Z
        let u = CyclicInt::from_hex(8, "ff").unwrap();
        assert_eq!(u.to_hex(), "00");
        let v = CyclicInt::from_hex(8, "01").unwrap();
        assert_eq!(cyclic_mul(&u, &v).unwrap().to_hex(), "00");
        let a = CyclicInt::from_hex(8, "02").unwrap();
        let b = CyclicInt::from_hex(8, "03").unwrap();
        assert_eq!(cyclic_mul(&a, &b).unwrap().to_hex(), "06");
        // width mismatch is an error
        let w = CyclicInt::from_hex(9, "02").unwrap();
        assert!(cyclic_mul(&a, &w).is_err());
    }

    #[test]
    fn cyclic_int_canonical_range() {
        let n = 12u64;
        let m = BigUint::mersenne(n);
        for k in [0u64, 1, 4094, 4095, 4096, 8189, 8190, 8191] {
            let c = CyclicInt::new(n, BigUint::from_u64(k)).unwrap();
            assert!(c.value().cmp_val(&m) == Ordering::Less);
            assert_ne!(c.value(), &m);
            let expect = k % 4095;
            assert_eq!(c.value().to_u64(), Some(expect));
        }
    }
}
