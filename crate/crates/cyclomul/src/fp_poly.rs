//! Dense univariate polynomials over prime fields F_p.
//!
//! Coefficients are stored ascending by degree, reduced into [0, p),
//! with no trailing zeros; the zero polynomial is the empty vector and
//! its degree is `None`. The multiplication workhorse packs
//! coefficients into a big integer (Kronecker substitution) so large
//! products ride on the Karatsuba path in `bigint`; a schoolbook loop
//! covers small operands and serves as the oracle's twin.
//!
//! Division is classical. The repeated-squaring loops that dominate
//! root finding and equal-degree factorization reduce through a cached
//! reciprocal (Newton iteration on the reversed modulus) instead; the
//! two reductions agree everywhere and a property test pins that.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bigint::{big_mul, BigUint};
use crate::error::{Error, Result};
use crate::nt::{self, divisors, FactoredInt};

/// Polynomial over F_p, coefficients ascending, canonical.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FpPoly {
    p: u64,
    coeffs: Vec<u64>,
}

impl FpPoly {
    /// Builds a polynomial, reducing coefficients mod p and trimming.
    /// `p` must be a prime; callers are trusted on primality (the
    /// constructors in this crate always pass sieved or tested primes).
    pub fn new(p: u64, coeffs: Vec<u64>) -> FpPoly {
        assert!(p >= 2, "field characteristic must be at least 2");
        let mut c: Vec<u64> = coeffs.into_iter().map(|x| x % p).collect();
        while c.last() == Some(&0) {
            c.pop();
        }
        FpPoly { p, coeffs: c }
    }

    pub fn zero(p: u64) -> FpPoly {
        FpPoly::new(p, Vec::new())
    }

    pub fn one(p: u64) -> FpPoly {
        FpPoly::new(p, vec![1])
    }

    pub fn constant(p: u64, c: u64) -> FpPoly {
        FpPoly::new(p, vec![c])
    }

    /// c * Y^k.
    pub fn monomial(p: u64, c: u64, k: usize) -> FpPoly {
        let mut v = vec![0; k + 1];
        v[k] = c;
        FpPoly::new(p, v)
    }

    pub fn field(&self) -> u64 {
        self.p
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or None for the zero polynomial.
    pub fn deg(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> u64 {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    pub fn lead(&self) -> u64 {
        self.coeffs.last().copied().unwrap_or(0)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs == [1]
    }

    fn check_same(&self, other: &FpPoly) -> Result<()> {
        if self.p != other.p {
            return Err(Error::Mismatch(format!(
                "polynomials over F_{} and F_{}",
                self.p, other.p
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &FpPoly) -> FpPoly {
        assert_eq!(self.p, other.p, "field mismatch in add");
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push((self.coeff(i) + other.coeff(i)) % self.p);
        }
        FpPoly::new(self.p, out)
    }

    pub fn sub(&self, other: &FpPoly) -> FpPoly {
        assert_eq!(self.p, other.p, "field mismatch in sub");
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push((self.coeff(i) + self.p - other.coeff(i)) % self.p);
        }
        FpPoly::new(self.p, out)
    }

    pub fn scalar_mul(&self, c: u64) -> FpPoly {
        let c = c % self.p;
        FpPoly::new(
            self.p,
            self.coeffs
                .iter()
                .map(|&a| nt::mul_mod(a, c, self.p))
                .collect(),
        )
    }

    /// Divides every coefficient by the leading one.
    pub fn monic(&self) -> Result<FpPoly> {
        if self.is_zero() {
            return Err(Error::NotInvertible("zero polynomial has no monic form".into()));
        }
        let inv = nt::inv_mod(self.lead(), self.p)?;
        Ok(self.scalar_mul(inv))
    }

    /// Shifts by k: self * Y^k.
    pub fn shift_up(&self, k: usize) -> FpPoly {
        if self.is_zero() {
            return self.clone();
        }
        let mut v = vec![0u64; k];
        v.extend_from_slice(&self.coeffs);
        FpPoly { p: self.p, coeffs: v }
    }

    /// Keeps coefficients of degree < k (truncated power series view).
    pub fn truncate(&self, k: usize) -> FpPoly {
        FpPoly::new(self.p, self.coeffs.iter().take(k).copied().collect())
    }

    /// Coefficients reversed relative to degree d (Y^d * self(1/Y)).
    fn reverse(&self, d: usize) -> FpPoly {
        let mut v = vec![0u64; d + 1];
        for (i, &c) in self.coeffs.iter().enumerate() {
            v[d - i] = c;
        }
        FpPoly::new(self.p, v)
    }

    /// Text form `p: c0 c1 c2 ...`, constant term first.
    pub fn to_text(&self) -> String {
        let body = self
            .coeffs
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        format!("{}: {}", self.p, body)
    }

    pub fn from_text(s: &str) -> Result<FpPoly> {
        let (head, tail) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse("polynomial text needs `p: coeffs`".into()))?;
        let p: u64 = head
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad field {head:?}")))?;
        if p < 2 {
            return Err(Error::Parse(format!("field {p} too small")));
        }
        let mut coeffs = Vec::new();
        for tok in tail.split_whitespace() {
            let c: u64 = tok
                .parse()
                .map_err(|_| Error::Parse(format!("bad coefficient {tok:?}")))?;
            coeffs.push(c);
        }
        Ok(FpPoly::new(p, coeffs))
    }
}

impl std::fmt::Debug for FpPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "FpPoly({})", self.to_text())
    }
}

/// Schoolbook product, the quadratic reference path.
pub fn poly_mul_schoolbook(a: &FpPoly, b: &FpPoly) -> Result<FpPoly> {
    a.check_same(b)?;
    if a.is_zero() || b.is_zero() {
        return Ok(FpPoly::zero(a.p));
    }
    let p = a.p;
    let mut out = vec![0u64; a.coeffs.len() + b.coeffs.len() - 1];
    for (i, &ai) in a.coeffs.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.coeffs.iter().enumerate() {
            let t = (ai as u128 * bj as u128 + out[i + j] as u128) % p as u128;
            out[i + j] = t as u64;
        }
    }
    Ok(FpPoly::new(p, out))
}

const SCHOOLBOOK_MAX: usize = 32;

/// Product of two polynomials. Small operands use the schoolbook loop;
/// larger ones pack into big integers with enough headroom per digit
/// that the convolution coefficients never collide, multiply there, and
/// unpack.
pub fn poly_mul(a: &FpPoly, b: &FpPoly) -> Result<FpPoly> {
    a.check_same(b)?;
    if a.is_zero() || b.is_zero() {
        return Ok(FpPoly::zero(a.p));
    }
    let short = a.coeffs.len().min(b.coeffs.len());
    if short <= SCHOOLBOOK_MAX {
        return poly_mul_schoolbook(a, b);
    }
    let p = a.p;
    // digit bound: short * (p-1)^2 < 2^b
    let b_bits = 2 * nt::lg(p) + nt::lg(short as u64);
    if b_bits > 127 {
        return poly_mul_schoolbook(a, b);
    }
    let pa = pack_poly(&a.coeffs, b_bits);
    let pb = pack_poly(&b.coeffs, b_bits);
    let prod = big_mul(&pa, &pb);
    let out_len = a.coeffs.len() + b.coeffs.len() - 1;
    let limbs = prod.limbs();
    let mut out = Vec::with_capacity(out_len);
    for i in 0..out_len {
        let digit = read_digit(limbs, i as u64 * b_bits, b_bits);
        out.push((digit % p as u128) as u64);
    }
    Ok(FpPoly::new(p, out))
}

/// Read `width` bits starting at bit offset `off` from a little-endian limb
/// slice. The window spans at most three limbs; out-of-range limbs read as
/// zero, so a trimmed canonical representation is fine. Requires
/// `width <= 127`, which `poly_mul` guarantees because digits wider than
/// that would need operands far beyond the supported modulus range.
pub(crate) fn read_digit(limbs: &[u64], off: u64, width: u64) -> u128 {
    debug_assert!(width <= 127);
    let word = (off / 64) as usize;
    let sh = (off % 64) as u32;
    let at = |i: usize| limbs.get(i).copied().unwrap_or(0) as u128;
    let mut val = at(word) >> sh;
    if sh > 0 {
        val |= at(word + 1) << (64 - sh);
        val |= at(word + 2) << (128 - sh);
    } else {
        val |= at(word + 1) << 64;
    }
    val & ((1u128 << width) - 1)
}

pub(crate) fn pack_poly(coeffs: &[u64], b_bits: u64) -> BigUint {
    let total_bits = coeffs.len() as u64 * b_bits;
    let mut limbs = vec![0u64; (total_bits as usize).div_ceil(64) + 1];
    for (i, &c) in coeffs.iter().enumerate() {
        let off = i as u64 * b_bits;
        let limb = (off / 64) as usize;
        let sh = (off % 64) as u32;
        limbs[limb] |= c << sh;
        if sh > 0 {
            limbs[limb + 1] |= c >> (64 - sh);
        }
    }
    BigUint::from_limbs(limbs)
}

/// Reduces modulo Y^period - 1 by folding exponents onto their
/// residues.
pub(crate) fn fold_cyclic(poly: &FpPoly, period: usize) -> FpPoly {
    let p = poly.field();
    let mut out = vec![0u64; period];
    for (i, &c) in poly.coeffs().iter().enumerate() {
        out[i % period] = (out[i % period] + c) % p;
    }
    FpPoly::new(p, out)
}

/// Classical long division: returns (quotient, remainder) with
/// deg r < deg b. The divisor must be nonzero.
pub fn poly_divrem(a: &FpPoly, b: &FpPoly) -> Result<(FpPoly, FpPoly)> {
    a.check_same(b)?;
    if b.is_zero() {
        return Err(Error::NotInvertible("polynomial division by zero".into()));
    }
    let p = a.p;
    let db = b.coeffs.len() - 1;
    if a.coeffs.len() < b.coeffs.len() {
        return Ok((FpPoly::zero(p), a.clone()));
    }
    let inv_lead = nt::inv_mod(b.lead(), p)?;
    let mut rem = a.coeffs.clone();
    let mut quot = vec![0u64; a.coeffs.len() - db];
    for k in (0..quot.len()).rev() {
        let top = rem[k + db];
        if top == 0 {
            continue;
        }
        let c = nt::mul_mod(top, inv_lead, p);
        quot[k] = c;
        for (i, &bi) in b.coeffs.iter().enumerate() {
            let sub = nt::mul_mod(c, bi, p);
            let idx = k + i;
            rem[idx] = (rem[idx] + p - sub) % p;
        }
        debug_assert_eq!(rem[k + db], 0);
    }
    Ok((FpPoly::new(p, quot), FpPoly::new(p, rem)))
}

/// Monic gcd of two polynomials.
pub fn poly_gcd(a: &FpPoly, b: &FpPoly) -> Result<FpPoly> {
    a.check_same(b)?;
    let mut x = a.clone();
    let mut y = b.clone();
    while !y.is_zero() {
        let (_, r) = poly_divrem(&x, &y)?;
        x = y;
        y = r;
    }
    if x.is_zero() {
        Ok(x)
    } else {
        x.monic()
    }
}

/// Extended Euclid: returns (g, s, t) with g monic and s*a + t*b = g.
/// When a and b are coprime and nonconstant, deg s < deg b and
/// deg t < deg a.
pub fn poly_xgcd(a: &FpPoly, b: &FpPoly) -> Result<(FpPoly, FpPoly, FpPoly)> {
    a.check_same(b)?;
    let p = a.p;
    let (mut r0, mut r1) = (a.clone(), b.clone());
    let (mut s0, mut s1) = (FpPoly::one(p), FpPoly::zero(p));
    let (mut t0, mut t1) = (FpPoly::zero(p), FpPoly::one(p));
    while !r1.is_zero() {
        let (q, r) = poly_divrem(&r0, &r1)?;
        let s = s0.sub(&poly_mul(&q, &s1)?);
        let t = t0.sub(&poly_mul(&q, &t1)?);
        (r0, r1) = (r1, r);
        (s0, s1) = (s1, s);
        (t0, t1) = (t1, t);
    }
    if r0.is_zero() {
        return Ok((r0, s0, t0));
    }
    let lead_inv = nt::inv_mod(r0.lead(), p)?;
    Ok((
        r0.scalar_mul(lead_inv),
        s0.scalar_mul(lead_inv),
        t0.scalar_mul(lead_inv),
    ))
}

/// The alpha-th cyclotomic polynomial reduced mod p, computed by
/// exact division: phi_alpha = (Y^alpha - 1) / prod of phi_d over the
/// proper divisors d of alpha.
pub fn cyclotomic_mod_p(alpha: u64, p: u64) -> Result<FpPoly> {
    if alpha == 0 {
        return Err(Error::Mismatch("cyclotomic index must be positive".into()));
    }
    let divs = divisors(alpha)?;
    let mut table: Vec<(u64, FpPoly)> = Vec::with_capacity(divs.len());
    for &d in &divs {
        // Y^d - 1
        let mut v = vec![0u64; d as usize + 1];
        v[0] = p - 1;
        v[d as usize] = 1;
        let mut f = FpPoly::new(p, v);
        for (d2, phi) in table.iter() {
            if d % d2 == 0 {
                let (q, r) = poly_divrem(&f, phi)?;
                debug_assert!(r.is_zero(), "cyclotomic division must be exact");
                if !r.is_zero() {
                    return Err(Error::Mismatch(
                        "inexact division in cyclotomic recursion".into(),
                    ));
                }
                f = q;
            }
        }
        table.push((d, f));
    }
    Ok(table.pop().unwrap().1)
}

/// Cached context for repeated reduction modulo a fixed monic
/// polynomial: holds the Newton reciprocal of the reversed modulus so
/// a reduction is two multiplies instead of a long division.
pub(crate) struct PolyModCtx {
    pub(crate) modulus: FpPoly,
    rev_inv: FpPoly,
    pub(crate) deg: usize,
    /// Largest quotient length the cached reciprocal can serve.
    precision: usize,
}

impl PolyModCtx {
    pub(crate) fn new(modulus: &FpPoly) -> Result<PolyModCtx> {
        // quotients have deg <= d-1 when reducing products of two
        // residues, so precision d covers the common case
        let d = modulus.deg().unwrap_or(1);
        Self::with_capacity(modulus, 2 * d.saturating_sub(1))
    }

    /// A context whose reciprocal is long enough to reduce inputs up
    /// to `input_deg` with the fast path; degrees past that fall back
    /// to classical division.
    pub(crate) fn with_capacity(modulus: &FpPoly, input_deg: usize) -> Result<PolyModCtx> {
        let d = modulus
            .deg()
            .ok_or_else(|| Error::NotInvertible("zero modulus".into()))?;
        if d == 0 {
            return Err(Error::NotInvertible("constant modulus".into()));
        }
        let monic = modulus.monic()?;
        let rev = monic.reverse(d);
        let precision = (input_deg.saturating_sub(d) + 1).max(d);
        let rev_inv = series_inv(&rev, precision)?;
        Ok(PolyModCtx {
            modulus: monic,
            rev_inv,
            deg: d,
            precision,
        })
    }

    /// Remainder of `a` mod the context modulus. Inputs within the
    /// reciprocal's capacity reduce with two multiplies; anything
    /// longer folds through classical division (rare, cold paths only).
    pub(crate) fn reduce(&self, a: &FpPoly) -> Result<FpPoly> {
        let da = match a.deg() {
            None => return Ok(a.clone()),
            Some(d) => d,
        };
        if da < self.deg {
            return Ok(a.clone());
        }
        if da - self.deg + 1 > self.precision {
            return Ok(poly_divrem(a, &self.modulus)?.1);
        }
        let qd = da - self.deg; // quotient degree
        let ra = a.reverse(da);
        let q_rev = poly_mul(&ra, &self.rev_inv)?.truncate(qd + 1);
        let q = q_rev.reverse(qd);
        let r = a.sub(&poly_mul(&q, &self.modulus)?);
        debug_assert!(r.deg().map_or(true, |d| d < self.deg));
        if r.deg().is_some_and(|d| d >= self.deg) {
            // fall back if the reciprocal precision ever proves short
            return Ok(poly_divrem(a, &self.modulus)?.1);
        }
        Ok(r)
    }

    pub(crate) fn mul(&self, a: &FpPoly, b: &FpPoly) -> Result<FpPoly> {
        self.reduce(&poly_mul(a, b)?)
    }

    /// base^exp mod the context modulus, square and multiply.
    pub(crate) fn pow(&self, base: &FpPoly, exp: &BigUint) -> Result<FpPoly> {
        let p = self.modulus.field();
        let mut acc = FpPoly::one(p);
        let mut b = self.reduce(base)?;
        for i in 0..exp.bit_len() {
            if exp.bit(i) {
                acc = self.mul(&acc, &b)?;
            }
            if i + 1 < exp.bit_len() {
                b = self.mul(&b, &b)?;
            }
        }
        Ok(acc)
    }
}

// 1/f as a power series to `prec` coefficients (f(0) must be a unit),
// by Newton doubling.
fn series_inv(f: &FpPoly, prec: usize) -> Result<FpPoly> {
    let p = f.field();
    let c0 = f.coeff(0);
    if c0 == 0 {
        return Err(Error::NotInvertible(
            "power series with zero constant term".into(),
        ));
    }
    let mut g = FpPoly::constant(p, nt::inv_mod(c0, p)?);
    let mut k = 1usize;
    while k < prec {
        k = (2 * k).min(prec);
        // g <- g*(2 - f*g) mod Y^k
        let fg = poly_mul(&f.truncate(k), &g)?.truncate(k);
        let two_minus = FpPoly::constant(p, 2 % p).sub(&fg);
        g = poly_mul(&g, &two_minus)?.truncate(k);
    }
    Ok(g)
}

/// p^r - 1 as a big integer.
pub(crate) fn field_order_minus_one(p: u64, r: u64) -> BigUint {
    let mut acc = BigUint::one();
    for _ in 0..r {
        acc = acc.mul_u64(p);
    }
    acc.sub(&BigUint::one())
}

/// Equal-degree factorization (Cantor-Zassenhaus): splits a monic
/// squarefree product of degree-r irreducibles into its factors,
/// sorted by coefficient vector (constant term first). The degree of f
/// must be a multiple of r. Randomness comes from a seeded generator,
/// so results are reproducible.
pub fn factor_equal_degree(f: &FpPoly, r: u64, seed: u64) -> Result<Vec<FpPoly>> {
    let d = f
        .deg()
        .ok_or_else(|| Error::Mismatch("cannot factor the zero polynomial".into()))?;
    if r == 0 || d as u64 % r != 0 {
        return Err(Error::Mismatch(format!(
            "degree {d} is not a multiple of the factor degree {r}"
        )));
    }
    let f = f.monic()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(d / r as usize);
    split_equal_degree(&f, r, &mut rng, &mut out)?;
    out.sort_by(|a, b| a.coeffs().cmp(b.coeffs()));
    Ok(out)
}

fn random_poly(p: u64, deg_below: usize, rng: &mut ChaCha8Rng) -> FpPoly {
    let coeffs: Vec<u64> = (0..deg_below).map(|_| rng.gen_range(0..p)).collect();
    FpPoly::new(p, coeffs)
}

fn split_equal_degree(
    f: &FpPoly,
    r: u64,
    rng: &mut ChaCha8Rng,
    out: &mut Vec<FpPoly>,
) -> Result<()> {
    let d = f.deg().unwrap();
    if d as u64 == r {
        out.push(f.clone());
        return Ok(());
    }
    let p = f.field();
    let ctx = PolyModCtx::new(f)?;
    loop {
        let t = random_poly(p, d, rng);
        if t.deg().is_none() {
            continue;
        }
        // a shared factor with t splits immediately
        let g = poly_gcd(f, &t)?;
        let candidate = if g.deg().is_some_and(|dg| dg > 0 && dg < d) {
            g
        } else if p % 2 == 1 {
            // t^((p^r - 1)/2) is +-1 in each component; the -1 half
            // lands in gcd(f, h - 1)'s complement
            let exp = field_order_minus_one(p, r).shr_bits(1);
            let h = ctx.pow(&t, &exp)?;
            poly_gcd(f, &h.sub(&FpPoly::one(p)))?
        } else {
            // characteristic 2: additive trace map over F_{2^r}
            let mut tr = t.clone();
            let mut pw = t.clone();
            for _ in 1..r {
                pw = ctx.mul(&pw, &pw)?;
                tr = tr.add(&pw);
            }
            poly_gcd(f, &tr)?
        };
        if let Some(dg) = candidate.deg() {
            if dg > 0 && dg < d {
                let (rest, rem) = poly_divrem(f, &candidate)?;
                debug_assert!(rem.is_zero());
                split_equal_degree(&candidate, r, rng, out)?;
                split_equal_degree(&rest, r, rng, out)?;
                return Ok(());
            }
        }
    }
}

/// Finds an element of exact multiplicative order `order.value` in the
/// field F_p[Y]/(f), f irreducible. The order must divide p^deg(f) - 1
/// (checked); candidates are enumerated in a fixed base-p counting
/// order and raised to the cofactor, so the result is deterministic. A
/// capped search that finds nothing is an error.
pub fn primitive_root_of_order(f: &FpPoly, order: &FactoredInt) -> Result<FpPoly> {
    let p = f.field();
    let r = f
        .deg()
        .ok_or_else(|| Error::NotInvertible("zero modulus".into()))? as u64;
    if r == 0 {
        return Err(Error::NotInvertible("constant modulus".into()));
    }
    let group = field_order_minus_one(p, r);
    let order_big = BigUint::from_u64(order.value);
    let (cofactor, rem) = group.divrem(&order_big)?;
    if !rem.is_zero() {
        return Err(Error::BoundViolated(format!(
            "order {} does not divide p^r - 1 = {}",
            order.value,
            group.to_decimal()
        )));
    }
    let ctx = PolyModCtx::new(f)?;
    const CANDIDATE_CAP: u64 = 4096;
    for t in 1..CANDIDATE_CAP {
        // candidate = base-p digits of t, low digit first
        let mut digits = Vec::new();
        let mut v = t;
        while v > 0 {
            digits.push(v % p);
            v /= p;
        }
        let cand = FpPoly::new(p, digits);
        let zeta = ctx.pow(&cand, &cofactor)?;
        if zeta.is_zero() || (zeta.is_one() && order.value > 1) {
            continue;
        }
        // exact order check: zeta^order = 1 and no proper prime
        // quotient collapses to 1
        if !ctx.pow(&zeta, &order_big)?.is_one() {
            continue;
        }
        let mut exact = true;
        for &(l, _) in &order.factors {
            let sub = BigUint::from_u64(order.value / l);
            if ctx.pow(&zeta, &sub)?.is_one() {
                exact = false;
                break;
            }
        }
        if exact {
            return Ok(zeta);
        }
    }
    Err(Error::SearchExhausted(format!(
        "no element of order {} among {} candidates",
        order.value, CANDIDATE_CAP
    )))
}
