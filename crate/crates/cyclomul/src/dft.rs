//! Discrete Fourier transforms over arbitrary commutative rings.
//!
//! Transform lengths here are odd (products of odd primes), so the
//! classic power-of-two FFT never applies. Instead a length-n DFT is
//! Bluestein's chirp trick: multiply by chirp factors, take one cyclic
//! convolution of length n, multiply by chirp factors again. The
//! convolution itself is delegated to a caller-supplied function, which
//! lets the multiplication pipelines route it back into themselves
//! while the tests use a literal double loop.
//!
//! The second operand of that convolution depends only on the root of
//! unity, never on the data, so a plan computes it once. Batched calls
//! then share both the chirp tables and whatever precomputation the
//! convolver does with the fixed operand.

use crate::cyclo_ring::{ring_mul, CycloElem, CycloRing};
use crate::error::{Error, Result};
use crate::layout::{transpose, MultiDimArray};
use std::sync::Arc;

/// Full principal-root verification (quadratically many products) is
/// run at plan construction up to this length; beyond it only the
/// order-divides check runs and the caller certifies principality.
pub const PRINCIPAL_SUM_CHECK_MAX: usize = 256;

/// The ring operations a DFT needs. Elements are plain values; the
/// ring itself carries the modulus or structure.
pub trait Ring {
    type Elem: Clone + PartialEq + std::fmt::Debug;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    /// Inverse of the integer k (image of 1 + ... + 1) if it exists.
    fn inv_scalar(&self, k: u64) -> Result<Self::Elem>;
}

/// Prime field F_p with word-size elements.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FpField {
    p: u64,
}

impl FpField {
    pub fn new(p: u64) -> Result<FpField> {
        if !crate::nt::is_prime(p)? {
            return Err(Error::Mismatch(format!("{p} is not prime")));
        }
        Ok(FpField { p })
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }
}

impl Ring for FpField {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }

    fn one(&self) -> u64 {
        1 % self.p
    }

    fn add(&self, a: &u64, b: &u64) -> u64 {
        debug_assert!(*a < self.p && *b < self.p);
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    fn sub(&self, a: &u64, b: &u64) -> u64 {
        debug_assert!(*a < self.p && *b < self.p);
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    fn mul(&self, a: &u64, b: &u64) -> u64 {
        crate::nt::mul_mod(*a, *b, self.p)
    }

    fn inv_scalar(&self, k: u64) -> Result<u64> {
        crate::nt::inv_mod(k % self.p, self.p)
    }
}

impl Ring for Arc<CycloRing> {
    type Elem = CycloElem;

    fn zero(&self) -> CycloElem {
        CycloRing::zero(self)
    }

    fn one(&self) -> CycloElem {
        CycloRing::one(self)
    }

    fn add(&self, a: &CycloElem, b: &CycloElem) -> CycloElem {
        a.add(b).expect("operands from the same ring")
    }

    fn sub(&self, a: &CycloElem, b: &CycloElem) -> CycloElem {
        a.sub(b).expect("operands from the same ring")
    }

    fn mul(&self, a: &CycloElem, b: &CycloElem) -> CycloElem {
        ring_mul(a, b).expect("operands from the same ring")
    }

    fn inv_scalar(&self, k: u64) -> Result<CycloElem> {
        CycloRing::inv_scalar(self, k)
    }
}

/// base^exp by square and multiply.
pub fn ring_pow<R: Ring>(ring: &R, base: &R::Elem, exp: u64) -> R::Elem {
    let mut acc = ring.one();
    let mut sq = base.clone();
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            acc = ring.mul(&acc, &sq);
        }
        e >>= 1;
        if e > 0 {
            sq = ring.mul(&sq, &sq);
        }
    }
    acc
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Chirp factor tables for Bluestein's trick at odd length n, where
/// xi = omega^{(n+1)/2} is the square root of omega on the unit
/// circle. `xi_sq[i] = xi^{i^2 mod n}` and `xi_negsq[i]` is its
/// inverse; `xi_negsq` is also the fixed convolution operand of the
/// forward transform and `xi_sq` that of the inverse.
struct ChirpTables<R: Ring> {
    xi_sq: Vec<R::Elem>,
    xi_negsq: Vec<R::Elem>,
}

/// Precomputed data for length-n DFTs with respect to a fixed
/// principal root of unity.
pub struct DftPlan<R: Ring> {
    ring: R,
    n: usize,
    omega: R::Elem,
    omega_inv: R::Elem,
    n_inv: R::Elem,
    chirp: Option<ChirpTables<R>>,
}

impl<R: Ring> DftPlan<R> {
    /// Build a plan, verifying omega^n = 1 and, for n up to
    /// `PRINCIPAL_SUM_CHECK_MAX`, the full principal-root sum
    /// condition.
    pub fn new(ring: R, n: usize, omega: R::Elem) -> Result<DftPlan<R>> {
        if n == 0 {
            return Err(Error::Mismatch("transform length must be positive".into()));
        }
        let pow_n = ring_pow(&ring, &omega, n as u64);
        if pow_n != ring.one() {
            return Err(Error::BoundViolated(format!(
                "omega^{n} is not 1, not a root of unity of order dividing {n}"
            )));
        }
        if n <= PRINCIPAL_SUM_CHECK_MAX {
            // sum_i omega^{ij} must vanish for every j in 1..n
            let mut powers = Vec::with_capacity(n);
            let mut w = ring.one();
            for _ in 0..n {
                powers.push(w.clone());
                w = ring.mul(&w, &omega);
            }
            for j in 1..n {
                let mut s = ring.zero();
                for i in 0..n {
                    s = ring.add(&s, &powers[i * j % n]);
                }
                if s != ring.zero() {
                    return Err(Error::BoundViolated(format!(
                        "root is not principal: sum of omega^({j}i) is nonzero"
                    )));
                }
            }
        }
        let omega_inv = ring_pow(&ring, &omega, (n as u64).saturating_sub(1));
        let omega_inv = if n == 1 { ring.one() } else { omega_inv };
        let n_inv = ring.inv_scalar(n as u64)?;
        Ok(DftPlan {
            ring,
            n,
            omega,
            omega_inv,
            n_inv,
            chirp: None,
        })
    }

    /// Build a plan with chirp tables for Bluestein's trick. The
    /// length must be odd so that omega has a square root omega^{(n+1)/2}.
    pub fn new_bluestein(ring: R, n: usize, omega: R::Elem) -> Result<DftPlan<R>> {
        if n % 2 == 0 {
            return Err(Error::Mismatch(format!(
                "chirp transform needs odd length, got {n}"
            )));
        }
        let mut plan = DftPlan::new(ring, n, omega)?;
        let xi = ring_pow(&plan.ring, &plan.omega, (n as u64 + 1) / 2);
        let mut xi_pows = Vec::with_capacity(n);
        let mut w = plan.ring.one();
        for _ in 0..n {
            xi_pows.push(w.clone());
            w = plan.ring.mul(&w, &xi);
        }
        let xi_sq: Vec<R::Elem> = (0..n).map(|i| xi_pows[i * i % n].clone()).collect();
        let xi_negsq: Vec<R::Elem> = (0..n)
            .map(|i| xi_pows[(n - i * i % n) % n].clone())
            .collect();
        plan.chirp = Some(ChirpTables { xi_sq, xi_negsq });
        Ok(plan)
    }

    pub fn ring(&self) -> &R {
        &self.ring
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn omega(&self) -> &R::Elem {
        &self.omega
    }

    pub fn has_chirp(&self) -> bool {
        self.chirp.is_some()
    }
}

fn check_len<R: Ring>(plan: &DftPlan<R>, len: usize) -> Result<()> {
    if len != plan.n {
        return Err(Error::Mismatch(format!(
            "input length {len} does not match transform length {}",
            plan.n
        )));
    }
    Ok(())
}

fn dft_sum<R: Ring>(plan: &DftPlan<R>, a: &[R::Elem], omega: &R::Elem) -> Vec<R::Elem> {
    let ring = &plan.ring;
    let n = plan.n;
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        let wj = ring_pow(ring, omega, j as u64);
        let mut acc = ring.zero();
        let mut pw = ring.one();
        for ai in a {
            acc = ring.add(&acc, &ring.mul(&pw, ai));
            pw = ring.mul(&pw, &wj);
        }
        out.push(acc);
    }
    out
}

/// Forward DFT by the defining sums, quadratic time.
pub fn dft_naive<R: Ring>(plan: &DftPlan<R>, a: &[R::Elem]) -> Result<Vec<R::Elem>> {
    check_len(plan, a.len())?;
    Ok(dft_sum(plan, a, &plan.omega))
}

/// Inverse DFT: the transform with respect to omega^{-1}, scaled by
/// n^{-1}.
pub fn dft_naive_inv<R: Ring>(plan: &DftPlan<R>, a: &[R::Elem]) -> Result<Vec<R::Elem>> {
    check_len(plan, a.len())?;
    let out = dft_sum(plan, a, &plan.omega_inv);
    Ok(out
        .into_iter()
        .map(|x| plan.ring.mul(&x, &plan.n_inv))
        .collect())
}

/// Batched DFT via Bluestein's trick. Each row of `batch` is chirped,
/// handed to `convolver` together with the fixed chirp operand for one
/// length-n cyclic convolution per row, and chirped again. The fixed
/// operand is the same for every row and every call on this plan and
/// direction, so the convolver may cache work keyed on it.
///
/// The convolver receives the chirped rows and the fixed operand and
/// must return the cyclic convolution of each row with that operand.
pub fn dft_bluestein<R, F>(
    plan: &DftPlan<R>,
    batch: &[Vec<R::Elem>],
    dir: Direction,
    mut convolver: F,
) -> Result<Vec<Vec<R::Elem>>>
where
    R: Ring,
    F: FnMut(&[Vec<R::Elem>], &[R::Elem]) -> Result<Vec<Vec<R::Elem>>>,
{
    let chirp = plan
        .chirp
        .as_ref()
        .ok_or_else(|| Error::Mismatch("plan was built without chirp tables".into()))?;
    for row in batch {
        check_len(plan, row.len())?;
    }
    let ring = &plan.ring;
    let n = plan.n;
    if n == 1 {
        return Ok(batch.to_vec());
    }
    let (side, fixed): (&[R::Elem], &[R::Elem]) = match dir {
        Direction::Forward => (&chirp.xi_sq, &chirp.xi_negsq),
        Direction::Inverse => (&chirp.xi_negsq, &chirp.xi_sq),
    };
    let chirped: Vec<Vec<R::Elem>> = batch
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .map(|(i, x)| ring.mul(&side[i], x))
                .collect()
        })
        .collect();
    let prods = convolver(&chirped, fixed)?;
    if prods.len() != batch.len() || prods.iter().any(|r| r.len() != n) {
        return Err(Error::Mismatch(
            "convolver returned a batch of the wrong shape".into(),
        ));
    }
    let mut out = Vec::with_capacity(batch.len());
    for prod in &prods {
        let row: Vec<R::Elem> = prod
            .iter()
            .enumerate()
            .map(|(j, x)| {
                let y = ring.mul(&side[j], x);
                match dir {
                    Direction::Forward => y,
                    Direction::Inverse => ring.mul(&y, &plan.n_inv),
                }
            })
            .collect();
        out.push(row);
    }
    Ok(out)
}

/// A convolver for `dft_bluestein` that multiplies out the cyclic
/// convolution directly. Quadratic; meant for tests and tiny lengths.
pub fn naive_convolver<R: Ring + Clone>(
    ring: &R,
) -> impl FnMut(&[Vec<R::Elem>], &[R::Elem]) -> Result<Vec<Vec<R::Elem>>> {
    let ring = ring.clone();
    move |batch: &[Vec<R::Elem>], g: &[R::Elem]| {
        let mut out = Vec::with_capacity(batch.len());
        for f in batch {
            if f.len() != g.len() {
                return Err(Error::Mismatch(
                    "convolution operands differ in length".into(),
                ));
            }
            let n = f.len();
            let mut c = vec![ring.zero(); n];
            for (i, fi) in f.iter().enumerate() {
                for (j, gj) in g.iter().enumerate() {
                    let k = (i + j) % n;
                    c[k] = ring.add(&c[k], &ring.mul(fi, gj));
                }
            }
            out.push(c);
        }
        Ok(out)
    }
}

/// Batched one-axis transform built from the naive DFT, for use as the
/// `axis_transform` of `dft_multidim` in tests.
pub fn naive_axis_transform<R: Ring>(
    plan: &DftPlan<R>,
    batch: &[Vec<R::Elem>],
    dir: Direction,
) -> Result<Vec<Vec<R::Elem>>> {
    batch
        .iter()
        .map(|row| match dir {
            Direction::Forward => dft_naive(plan, row),
            Direction::Inverse => dft_naive_inv(plan, row),
        })
        .collect()
}

/// Multidimensional DFT: apply a one-dimensional transform along every
/// axis in turn. `plans[k]` must have length `dims[k]`. For each axis
/// the data is regrouped so that the lines along that axis become
/// contiguous rows, then handed to `axis_transform` as one batch.
pub fn dft_multidim<R, F>(
    plans: &[DftPlan<R>],
    data: &MultiDimArray<R::Elem>,
    dir: Direction,
    mut axis_transform: F,
) -> Result<MultiDimArray<R::Elem>>
where
    R: Ring,
    F: FnMut(&DftPlan<R>, &[Vec<R::Elem>], Direction) -> Result<Vec<Vec<R::Elem>>>,
{
    let dims = data.dims().to_vec();
    if plans.len() != dims.len() {
        return Err(Error::Mismatch(format!(
            "{} plans for {} axes",
            plans.len(),
            dims.len()
        )));
    }
    for (k, plan) in plans.iter().enumerate() {
        if plan.n != dims[k] {
            return Err(Error::Mismatch(format!(
                "plan length {} does not match axis {k} extent {}",
                plan.n, dims[k]
            )));
        }
    }
    let mut elems = data.elems().to_vec();
    for (k, plan) in plans.iter().enumerate() {
        let nk = dims[k];
        let before: usize = dims[..k].iter().product();
        let after: usize = dims[k + 1..].iter().product();
        let block = nk * after;
        // gather lines along axis k into contiguous rows
        let mut batch: Vec<Vec<R::Elem>> = Vec::with_capacity(before * after);
        for s in 0..before {
            let view = MultiDimArray::new(
                vec![nk, after],
                elems[s * block..(s + 1) * block].to_vec(),
            )?;
            let t = transpose(&view)?;
            for row in t.rows() {
                batch.push(row.to_vec());
            }
        }
        let transformed = axis_transform(plan, &batch, dir)?;
        if transformed.len() != batch.len() || transformed.iter().any(|r| r.len() != nk) {
            return Err(Error::Mismatch(
                "axis transform returned a batch of the wrong shape".into(),
            ));
        }
        // scatter the rows back
        for s in 0..before {
            let flat: Vec<R::Elem> = transformed[s * after..(s + 1) * after]
                .iter()
                .flat_map(|r| r.iter().cloned())
                .collect();
            let view = MultiDimArray::new(vec![after, nk], flat)?;
            let t = transpose(&view)?;
            elems[s * block..(s + 1) * block].clone_from_slice(t.elems());
        }
    }
    MultiDimArray::new(dims, elems)
}
