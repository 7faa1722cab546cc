//! Cyclic polynomial products over F_p: a batch of t products U_s * V
//! in F_p[X]/(X^r - 1), routed between two strategies.
//!
//! The basecase packs coefficients into big integers wide enough that
//! digits never collide and multiplies once modulo 2^{rb} - 1. The
//! admissible path pads to a searched length N = alpha * m, splits the
//! cyclic algebra as F_p[Y,Z]/(Y^alpha - 1, Z^m - 1), and works the
//! phi_alpha branch with DFTs over the cyclotomic coefficient ring
//! while the small psi branch goes back through the basecase. The DFT
//! lengths are odd primes, so each axis runs Bluestein's reduction,
//! whose inner cyclic product recurses into this module one level
//! deeper. A measure guard forces any non-shrinking recursion edge
//! into the basecase, which keeps termination independent of the
//! search heuristics.

use std::sync::Arc;

use crate::admissible::{build_divisor, find_admissible, AdmissibleDivisor, AdmissibleTuple};
use crate::bigint::{cyclic_mul, CyclicInt};
use crate::cyclo_ring::{ring_mul, CycloElem, CycloRing};
use crate::dft::{dft_bluestein, dft_multidim, DftPlan, Direction};
use crate::error::{Error, Result};
use crate::fp_poly::{fold_cyclic, pack_poly, poly_divrem, poly_mul, read_digit, FpPoly, PolyModCtx};
use crate::layout::{multidim_cyclic_inv, multidim_cyclic_map, MultiDimArray};
use crate::nt::{gcd, is_prime, lg};
use crate::trace::{Ctx, PolyPath, PolyRoute, TraceEvent};

/// A multiplication instance: t polynomials U_1..U_t and one shared V,
/// all in F_p[X]/(X^r - 1) as length-r coefficient vectors reduced
/// mod p.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CyclicPolyBatch {
    p: u64,
    r: u64,
    us: Vec<Vec<u64>>,
    v: Vec<u64>,
}

impl CyclicPolyBatch {
    pub fn new(p: u64, r: u64, us: Vec<Vec<u64>>, v: Vec<u64>) -> Result<CyclicPolyBatch> {
        if !is_prime(p)? {
            return Err(Error::Mismatch(format!("coefficient modulus {p} is not prime")));
        }
        if r == 0 {
            return Err(Error::Mismatch("cyclic length must be positive".into()));
        }
        if us.is_empty() {
            return Err(Error::Mismatch("batch needs at least one U".into()));
        }
        let fix = |mut v: Vec<u64>| -> Result<Vec<u64>> {
            if v.len() != r as usize {
                return Err(Error::Mismatch(format!(
                    "vector of length {} in a batch of cyclic length {r}",
                    v.len()
                )));
            }
            for c in v.iter_mut() {
                *c %= p;
            }
            Ok(v)
        };
        Ok(CyclicPolyBatch {
            p,
            r,
            us: us.into_iter().map(fix).collect::<Result<_>>()?,
            v: fix(v)?,
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn r(&self) -> u64 {
        self.r
    }

    pub fn t(&self) -> u64 {
        self.us.len() as u64
    }

    pub fn us(&self) -> &[Vec<u64>] {
        &self.us
    }

    pub fn v(&self) -> &[u64] {
        &self.v
    }

    /// Digit width for integer packing: cyclic product coefficients
    /// are below r * p^2, so this many bits never collide.
    pub fn packing_width(&self) -> u64 {
        2 * lg(self.p) + lg(self.r)
    }
}

/// Evaluates the coefficient vector at 2^b_bits, as a residue modulo
/// 2^{r * b_bits} - 1. Errors when the width could not round-trip a
/// cyclic product's digits.
pub fn kronecker_pack(coeffs: &[u64], p: u64, b_bits: u64) -> Result<CyclicInt> {
    let r = coeffs.len() as u64;
    if r == 0 {
        return Err(Error::Mismatch("cannot pack an empty vector".into()));
    }
    let need = 2 * lg(p) + lg(r);
    if b_bits < need {
        return Err(Error::BoundViolated(format!(
            "packing width {b_bits} below the collision-free bound {need}"
        )));
    }
    if b_bits > 127 {
        return Err(Error::UnsupportedWidth(format!(
            "packing width {b_bits} exceeds the digit reader's 127-bit limit"
        )));
    }
    for &c in coeffs {
        if c >= p {
            return Err(Error::Mismatch(format!("coefficient {c} not reduced mod {p}")));
        }
    }
    CyclicInt::new(r * b_bits, pack_poly(coeffs, b_bits))
}

/// Reads r digits of b_bits each and reduces them mod p; inverse of
/// `kronecker_pack` on packed products.
pub fn kronecker_unpack(w: &CyclicInt, r: u64, b_bits: u64, p: u64) -> Result<Vec<u64>> {
    if b_bits == 0 || b_bits > 127 {
        return Err(Error::UnsupportedWidth(format!(
            "digit width {b_bits} outside the reader's range"
        )));
    }
    if w.bits() != r * b_bits {
        return Err(Error::Mismatch(format!(
            "cyclic integer of {} bits cannot hold {r} digits of {b_bits}",
            w.bits()
        )));
    }
    let limbs = w.value().limbs();
    Ok((0..r)
        .map(|i| (read_digit(limbs, i * b_bits, b_bits) % p as u128) as u64)
        .collect())
}

/// Cyclic integer multiplier type for the refined path: the callee
/// receives the recursion depth it runs at.
pub type IntMultiplier<'a> = dyn FnMut(&CyclicInt, &CyclicInt, u32) -> Result<CyclicInt> + 'a;

/// t exact products U_s * V in F_p[X]/(X^r - 1).
///
/// Small r (relative to p) packs into integers; large r searches an
/// admissible length, runs `admissible_multiply`, and folds back. A
/// forced route on the context applies to the top-level call only;
/// recursive calls pick by size, and on any search failure the call
/// falls back to the always-correct basecase (recorded in the trace).
pub fn polynomial_multiply(batch: &CyclicPolyBatch, ctx: &Ctx, depth: u32) -> Result<Vec<Vec<u64>>> {
    let route = if depth == 0 { ctx.poly_route() } else { PolyRoute::Auto };
    multiply_impl(batch, ctx, depth, route, None)
}

/// Like `polynomial_multiply`, but when the profile says the packed
/// product is big enough, the basecase's one integer multiplication
/// goes through the supplied cyclic integer multiplier instead of the
/// plain one. This is the edge the integer pipeline recurses through.
pub fn refined_polynomial_multiply(
    batch: &CyclicPolyBatch,
    ctx: &Ctx,
    depth: u32,
    int_mul: &mut IntMultiplier,
) -> Result<Vec<Vec<u64>>> {
    let route = if depth == 0 { ctx.poly_route() } else { PolyRoute::Auto };
    multiply_impl(batch, ctx, depth, route, Some(int_mul))
}

fn multiply_impl(
    batch: &CyclicPolyBatch,
    ctx: &Ctx,
    depth: u32,
    route: PolyRoute,
    mut int_mul: Option<&mut IntMultiplier>,
) -> Result<Vec<Vec<u64>>> {
    ctx.ensure_depth(depth)?;
    let (p, r) = (batch.p, batch.r);
    let small = match route {
        PolyRoute::Basecase => true,
        PolyRoute::Admissible => false,
        PolyRoute::Auto => {
            ctx.profile().kronecker_switch(r, p) || depth >= ctx.depth_budget()
        }
    };
    if !small {
        match admissible_attempt(batch, ctx, depth, int_mul.as_deref_mut()) {
            Ok(out) => return Ok(out),
            Err(err) => {
                if route == PolyRoute::Admissible {
                    return Err(err);
                }
                ctx.record(TraceEvent::Fallback {
                    depth,
                    stage: "admissible-search".into(),
                    reason: err.to_string(),
                });
            }
        }
    }
    if let Some(mul) = int_mul {
        if ctx.profile().refined_range(r, p) {
            ctx.record(TraceEvent::PolyCall {
                depth,
                p,
                r,
                t: batch.t(),
                path: PolyPath::Refined,
            });
            return refined_basecase(batch, mul, depth);
        }
    }
    ctx.record(TraceEvent::PolyCall {
        depth,
        p,
        r,
        t: batch.t(),
        path: PolyPath::Basecase,
    });
    kronecker_basecase(batch)
}

fn kronecker_basecase(batch: &CyclicPolyBatch) -> Result<Vec<Vec<u64>>> {
    let b = batch.packing_width();
    let v_int = kronecker_pack(&batch.v, batch.p, b)?;
    batch
        .us
        .iter()
        .map(|u| {
            let u_int = kronecker_pack(u, batch.p, b)?;
            let w = cyclic_mul(&u_int, &v_int)?;
            kronecker_unpack(&w, batch.r, b, batch.p)
        })
        .collect()
}

fn refined_basecase(
    batch: &CyclicPolyBatch,
    int_mul: &mut IntMultiplier,
    depth: u32,
) -> Result<Vec<Vec<u64>>> {
    let b = batch.packing_width();
    let v_int = kronecker_pack(&batch.v, batch.p, b)?;
    batch
        .us
        .iter()
        .map(|u| {
            let u_int = kronecker_pack(u, batch.p, b)?;
            let w = int_mul(&u_int, &v_int, depth + 1)?;
            if w.bits() != batch.r * b {
                return Err(Error::Mismatch(format!(
                    "integer multiplier returned {} bits for a {}-bit ring",
                    w.bits(),
                    batch.r * b
                )));
            }
            kronecker_unpack(&w, batch.r, b, batch.p)
        })
        .collect()
}

fn admissible_attempt(
    batch: &CyclicPolyBatch,
    ctx: &Ctx,
    depth: u32,
    int_mul: Option<&mut IntMultiplier>,
) -> Result<Vec<Vec<u64>>> {
    let (p, r) = (batch.p, batch.r);
    let tuple = find_admissible(2 * r, p, ctx.profile())?;
    let divisor = build_divisor(&tuple, p, ctx.profile(), ctx.seed())?;
    ctx.record(TraceEvent::PolyCall {
        depth,
        p,
        r,
        t: batch.t(),
        path: PolyPath::Admissible,
    });
    let n_len = tuple.n() as usize;
    let pad = |v: &[u64]| {
        let mut out = v.to_vec();
        out.resize(n_len, 0);
        out
    };
    let us_padded: Vec<Vec<u64>> = batch.us.iter().map(|u| pad(u)).collect();
    let products = admissible_inner(&divisor, &us_padded, &pad(&batch.v), ctx, depth, int_mul)?;
    let r_us = r as usize;
    let mut out = Vec::with_capacity(products.len());
    for prod in &products {
        // The plain product has degree at most 2r - 2, so the padded
        // cyclic product must vanish above it; anything else means
        // wraparound corrupted the lift.
        for (i, &c) in prod.iter().enumerate().skip(2 * r_us - 1) {
            if c != 0 {
                return Err(Error::Mismatch(format!(
                    "padded product has unexpected coefficient at degree {i}"
                )));
            }
        }
        let mut folded = vec![0u64; r_us];
        for (i, &c) in prod.iter().enumerate().take(2 * r_us - 1) {
            folded[i % r_us] = (folded[i % r_us] + c) % p;
        }
        out.push(folded);
    }
    Ok(out)
}

/// t exact products in F_p[X]/(X^N - 1) for an admissible N.
///
/// The length splits as N = alpha * m with gcd(alpha, m) = 1. Mapping
/// X onto the pair (Y, Z) turns the algebra into
/// F_p[Y,Z]/(Y^alpha - 1, Z^m - 1); the Y-modulus factors as
/// phi_alpha * psi_alpha, and a Bezout pair chi_1 phi + chi_2 psi = 1
/// splits the problem into a phi branch over the coefficient ring
/// R = F_p[Y]/phi_alpha and a small psi branch. The phi branch groups
/// m's primes into coprime axes, transforms along each axis with roots
/// omega^{Q/m_i}, multiplies pointwise in R, and transforms back; the
/// inverse transforms carry the 1/m_i factors, so no separate division
/// by m remains. The psi branch maps Y to X and Z to X^{2 deg psi} and
/// multiplies through the basecase one level deeper.
pub fn admissible_multiply(
    tuple: &AdmissibleTuple,
    p: u64,
    us: &[Vec<u64>],
    v: &[u64],
    ctx: &Ctx,
    depth: u32,
) -> Result<Vec<Vec<u64>>> {
    let divisor = build_divisor(tuple, p, ctx.profile(), ctx.seed())?;
    admissible_inner(&divisor, us, v, ctx, depth, None)
}

/// `admissible_multiply` with the divisor already built; sweeps that
/// fix one tuple reuse the ring and root across calls.
pub fn admissible_multiply_with(
    divisor: &AdmissibleDivisor,
    us: &[Vec<u64>],
    v: &[u64],
    ctx: &Ctx,
    depth: u32,
) -> Result<Vec<Vec<u64>>> {
    admissible_inner(divisor, us, v, ctx, depth, None)
}

/// `admissible_multiply` with every multiplication edge that packs
/// into a single large integer routed through the supplied cyclic
/// integer multiplier. The integer pipeline calls this per residue
/// prime with itself as the multiplier, closing the recursion the
/// two pipelines share.
pub fn refined_admissible_multiply(
    tuple: &AdmissibleTuple,
    p: u64,
    us: &[Vec<u64>],
    v: &[u64],
    ctx: &Ctx,
    depth: u32,
    int_mul: &mut IntMultiplier,
) -> Result<Vec<Vec<u64>>> {
    let divisor = build_divisor(tuple, p, ctx.profile(), ctx.seed())?;
    admissible_inner(&divisor, us, v, ctx, depth, Some(int_mul))
}

fn admissible_inner(
    divisor: &AdmissibleDivisor,
    us: &[Vec<u64>],
    v: &[u64],
    ctx: &Ctx,
    depth: u32,
    mut int_mul: Option<&mut IntMultiplier>,
) -> Result<Vec<Vec<u64>>> {
    let ring = divisor.ring();
    let p = divisor.field();
    let alpha = divisor.alpha() as usize;
    let m = divisor.m() as usize;
    let n_len = alpha * m;
    if us.is_empty() {
        return Err(Error::Mismatch("batch needs at least one U".into()));
    }
    for seq in us.iter().chain(std::iter::once(&v.to_vec())) {
        if seq.len() != n_len {
            return Err(Error::Mismatch(format!(
                "sequence of length {} for cyclic length {n_len}",
                seq.len()
            )));
        }
    }

    // Y-modulus split: phi * psi = Y^alpha - 1, e_phi = 1 mod phi
    // and 0 mod psi. Cached on the ring.
    let (psi, e_phi) = ring.cofactor_split()?;
    // Columns have degree up to alpha - 1, far past twice psi's degree
    // at pipeline sizes, so reduce them with a reciprocal sized for the
    // full column instead of long division.
    let psi_reducer = match psi.deg() {
        Some(d) if d > 0 => Some(PolyModCtx::with_capacity(psi, alpha.saturating_sub(1))?),
        _ => None,
    };

    // Split every input into its phi-branch (R-elements) and
    // psi-branch (low-degree residues), one per Z index.
    let split_seq = |seq: &[u64]| -> Result<(Vec<CycloElem>, Vec<FpPoly>)> {
        let arr = multidim_cyclic_map(seq, &[alpha, m])?;
        let e = arr.elems();
        let mut phis = Vec::with_capacity(m);
        let mut psis = Vec::with_capacity(m);
        for z in 0..m {
            let col: Vec<u64> = (0..alpha).map(|y| e[y * m + z]).collect();
            let poly = FpPoly::new(p, col);
            psis.push(match &psi_reducer {
                Some(rx) => rx.reduce(&poly)?,
                None => poly_divrem(&poly, psi)?.1,
            });
            phis.push(ring.element(poly)?);
        }
        Ok((phis, psis))
    };
    let (v_phi, v_psi) = split_seq(v)?;
    let mut us_phi = Vec::with_capacity(us.len());
    let mut us_psi = Vec::with_capacity(us.len());
    for u in us {
        let (a, b) = split_seq(u)?;
        us_phi.push(a);
        us_psi.push(b);
    }

    // Axis grouping of m's primes.
    let plan = divisor.plan();
    let m_primes: Vec<u64> = divisor
        .tuple()
        .tail()
        .iter()
        .zip(&plan.sigma)
        .filter(|(_, &on)| !on)
        .map(|(&q, _)| q)
        .collect();
    let groups = group_primes(&m_primes, ctx.profile().group_width(n_len as u64) as u64);
    debug_assert_eq!(groups.iter().product::<u64>(), m as u64);
    ctx.record(TraceEvent::AdmissiblePlan {
        depth,
        big_n: n_len as u64,
        alpha: alpha as u64,
        m: m as u64,
        dims: groups.clone(),
    });

    let phi_products: Vec<Vec<CycloElem>> = if groups.is_empty() {
        // m = 1: the phi branch is a single R-element per sequence.
        us_phi
            .iter()
            .map(|u| Ok(vec![ring_mul(&u[0], &v_phi[0])?]))
            .collect::<Result<_>>()?
    } else {
        let dims: Vec<usize> = groups.iter().map(|&g| g as usize).collect();
        let big_q = plan.root_order;
        let mut plans = Vec::with_capacity(groups.len());
        for &g in &groups {
            let omega_i = divisor.omega().pow(big_q / g)?;
            plans.push(DftPlan::new_bluestein(Arc::clone(ring), g as usize, omega_i)?);
        }
        let mut axis = |plan: &DftPlan<Arc<CycloRing>>,
                        rows: &[Vec<CycloElem>],
                        dir: Direction| {
            transform(
                plan,
                rows,
                dir,
                ctx,
                depth,
                Some(n_len as u64),
                int_mul.as_deref_mut(),
            )
        };
        let fwd = |vecs: &[CycloElem],
                   axis: &mut dyn FnMut(
            &DftPlan<Arc<CycloRing>>,
            &[Vec<CycloElem>],
            Direction,
        ) -> Result<Vec<Vec<CycloElem>>>|
         -> Result<MultiDimArray<CycloElem>> {
            ctx.record(TraceEvent::Transform {
                depth,
                dims: groups.clone(),
                inverse: false,
            });
            let arr = multidim_cyclic_map(vecs, &dims)?;
            dft_multidim(&plans, &arr, Direction::Forward, axis)
        };
        let v_hat = fwd(&v_phi, &mut axis)?;
        let mut out = Vec::with_capacity(us_phi.len());
        for u in &us_phi {
            let u_hat = fwd(u, &mut axis)?;
            let prod: Vec<CycloElem> = u_hat
                .elems()
                .iter()
                .zip(v_hat.elems())
                .map(|(a, b)| ring_mul(a, b))
                .collect::<Result<_>>()?;
            ctx.record(TraceEvent::Transform {
                depth,
                dims: groups.clone(),
                inverse: true,
            });
            let back = dft_multidim(
                &plans,
                &MultiDimArray::new(dims.clone(), prod)?,
                Direction::Inverse,
                &mut axis,
            )?;
            out.push(multidim_cyclic_inv(&back)?);
        }
        out
    };

    let psi_products = psi_branch_products(psi, m, &us_psi, &v_psi, ctx, depth, int_mul)?;

    // CRT recombination per Z index, then the inverse coprime map.
    let mut results = Vec::with_capacity(us.len());
    for (phi_prod, psi_prod) in phi_products.iter().zip(&psi_products) {
        let mut flat = vec![0u64; n_len];
        for z in 0..m {
            // x = psi_part + (phi_part - psi_part) * e_phi mod Y^alpha - 1
            let diff = phi_prod[z].rep().sub(&psi_prod[z]);
            let mixed = fold_cyclic(&poly_mul(&diff, e_phi)?, alpha).add(&psi_prod[z]);
            for (y, &c) in mixed.coeffs().iter().enumerate() {
                flat[y * m + z] = c;
            }
        }
        results.push(multidim_cyclic_inv(&MultiDimArray::new(
            vec![alpha, m],
            flat,
        )?)?);
    }
    Ok(results)
}

/// Products in F_p[Y,Z]/(psi(Y), Z^m - 1) by Kronecker substitution:
/// Y goes to X and Z to X^{2 deg psi}, so each Z slot holds a product
/// of degree at most 2 deg psi - 2 with one spare coefficient, and the
/// Z wraparound matches the cyclic length 2 deg psi * m exactly.
fn psi_branch_products(
    psi: &FpPoly,
    m: usize,
    us_psi: &[Vec<FpPoly>],
    v_psi: &[FpPoly],
    ctx: &Ctx,
    depth: u32,
    int_mul: Option<&mut IntMultiplier>,
) -> Result<Vec<Vec<FpPoly>>> {
    let p = psi.field();
    let s_deg = psi.deg().ok_or_else(|| Error::Mismatch("psi is zero".into()))?;
    if s_deg == 0 {
        // psi constant: the branch carries no information.
        return Ok(vec![vec![FpPoly::zero(p); m]; us_psi.len()]);
    }
    let width = 2 * s_deg;
    let pack = |seq: &[FpPoly]| {
        let mut flat = vec![0u64; width * m];
        for (z, poly) in seq.iter().enumerate() {
            for (y, &c) in poly.coeffs().iter().enumerate() {
                flat[z * width + y] = c;
            }
        }
        flat
    };
    let inner = CyclicPolyBatch::new(
        p,
        (width * m) as u64,
        us_psi.iter().map(|u| pack(u)).collect(),
        pack(v_psi),
    )?;
    let flats = multiply_impl(&inner, ctx, depth + 1, PolyRoute::Basecase, int_mul)?;
    flats
        .into_iter()
        .map(|flat| {
            (0..m)
                .map(|z| {
                    let slot = &flat[z * width..(z + 1) * width];
                    if slot[width - 1] != 0 {
                        return Err(Error::Mismatch(
                            "psi-branch slot overflowed its spare coefficient".into(),
                        ));
                    }
                    Ok(poly_divrem(&FpPoly::new(p, slot.to_vec()), psi)?.1)
                })
                .collect()
        })
        .collect()
}

/// One batched DFT along a single odd axis over the coefficient ring,
/// via Bluestein's reduction. The chirped cyclic convolution lifts
/// R-sequences to F_p[X]/(X^{n alpha} - 1) and recurses through
/// `polynomial_multiply`; when `measure_cap` says the inner length
/// would not shrink below the caller's instance, the inner call is
/// pinned to the basecase so the recursion cannot echo.
pub fn transform(
    plan: &DftPlan<Arc<CycloRing>>,
    seqs: &[Vec<CycloElem>],
    dir: Direction,
    ctx: &Ctx,
    depth: u32,
    measure_cap: Option<u64>,
    mut int_mul: Option<&mut IntMultiplier>,
) -> Result<Vec<Vec<CycloElem>>> {
    let ring = Arc::clone(plan.ring());
    let n = plan.len();
    if n % 2 == 0 {
        return Err(Error::Mismatch(format!(
            "transform length must be odd, got {n}"
        )));
    }
    let alpha = ring.alpha();
    if gcd(n as u64, alpha) != 1 {
        return Err(Error::NotCoprime(format!(
            "transform length {n} shares a factor with alpha = {alpha}"
        )));
    }
    let p = ring.field();
    let conv = |rows: &[Vec<CycloElem>], fixed: &[CycloElem]| -> Result<Vec<Vec<CycloElem>>> {
        let inner_r = n as u64 * alpha;
        let v_flat = lift_cyclic(fixed, &ring)?;
        let us_flat: Vec<Vec<u64>> = rows
            .iter()
            .map(|row| lift_cyclic(row, &ring))
            .collect::<Result<_>>()?;
        let inner = CyclicPolyBatch::new(p, inner_r, us_flat, v_flat)?;
        let route = match measure_cap {
            Some(cap) if inner_r >= cap => PolyRoute::Basecase,
            _ => PolyRoute::Auto,
        };
        let prods = multiply_impl(&inner, ctx, depth + 1, route, int_mul.as_deref_mut())?;
        prods
            .into_iter()
            .map(|f| unlift_cyclic(&f, &ring, n))
            .collect()
    };
    dft_bluestein(plan, seqs, dir, conv)
}

/// R-sequence of length n into F_p[X]/(X^{n alpha} - 1): pad each
/// representative to alpha coefficients, lay them out on the (Z, Y)
/// grid, and merge the coprime axes.
fn lift_cyclic(seq: &[CycloElem], ring: &Arc<CycloRing>) -> Result<Vec<u64>> {
    let alpha = ring.alpha() as usize;
    let mut flat = vec![0u64; seq.len() * alpha];
    for (z, e) in seq.iter().enumerate() {
        if !Arc::ptr_eq(e.ring(), ring) && e.ring().alpha() != ring.alpha() {
            return Err(Error::Mismatch("sequence element from a different ring".into()));
        }
        for (y, &c) in e.rep().coeffs().iter().enumerate() {
            flat[z * alpha + y] = c;
        }
    }
    multidim_cyclic_inv(&MultiDimArray::new(vec![seq.len(), alpha], flat)?)
}

fn unlift_cyclic(flat: &[u64], ring: &Arc<CycloRing>, n: usize) -> Result<Vec<CycloElem>> {
    let alpha = ring.alpha() as usize;
    let arr = multidim_cyclic_map(flat, &[n, alpha])?;
    arr.elems()
        .chunks(alpha)
        .map(|ch| ring.element(FpPoly::new(ring.field(), ch.to_vec())))
        .collect()
}

/// Groups a list of distinct primes into products of `w` consecutive
/// primes each; the final group absorbs the remainder and holds up to
/// 2w - 1 of them. Fewer than 2w primes make a single group.
fn group_primes(primes: &[u64], w: u64) -> Vec<u64> {
    let u = primes.len() as u64;
    if u == 0 {
        return Vec::new();
    }
    let w = w.max(1);
    if u < 2 * w {
        return vec![primes.iter().product()];
    }
    let d = (u / w) as usize;
    let mut groups = Vec::with_capacity(d);
    for chunk in 0..d - 1 {
        groups.push(
            primes[chunk * w as usize..(chunk + 1) * w as usize]
                .iter()
                .product(),
        );
    }
    groups.push(primes[(d - 1) * w as usize..].iter().product());
    groups
}
