//! Cyclic integer multiplication modulo 2^n - 1.
//!
//! Large residues split into variable-width chunks weighted by powers
//! of a root theta with theta^N = 2 mod P (the Crandall-Fagin trick),
//! turning the integer product into a length-N cyclic convolution over
//! Z/PZ. P is a product of word-size primes, so each coefficient
//! splits by CRT into per-prime rows that the admissible polynomial
//! pipeline multiplies; the packed products inside that pipeline come
//! back here as cyclic integer multiplies, closing the recursion.
//! Every routing decision and every fallback leaves a trace event.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::admissible::{find_admissible, AdmissibleTuple};
use crate::bigint::{big_mul, cyclic_mul, BigUint, CyclicInt};
use crate::error::{Error, Result};
use crate::fp_poly::read_digit;
use crate::nt::{crt_combine, inv_mod, lg, lg_big, mul_mod, pow_mod, pow_mod_big, sieve_primes};
use crate::pipeline_poly::refined_admissible_multiply;
use crate::profile::{ParamProfile, ProfileKind};
use crate::trace::{Ctx, IntPath, IntRoute, PolyPath, TraceEvent};

/// Spare bits demanded beyond the bare convolution bound. With
/// d := lg P - lg n - 3 slack bits, the chunk-count target becomes
/// ceil(2n / d), so holding d at five or more keeps that target (and
/// with it every recursive size) strictly under n / 2.
const MIN_WEIGHT_CAPACITY: u64 = 5;

/// Smallest prime-set size the desk search tries. Three odd primes cap
/// lg P at 7, nowhere near the capacity bound at any size the basecase
/// threshold lets through, so starting lower only burns attempts.
const DESK_PRIME_COUNT_MIN: usize = 4;

/// Largest prime-set size the desk search tries. Each added prime
/// widens the slack d and shrinks the chunk-count target toward the
/// search window's floor; by two dozen primes the outcome is decided
/// either way.
const DESK_PRIME_COUNT_MAX: usize = 24;

/// Depth levels a recursive integer product needs in front of it: one
/// for the integer call itself, one for the per-prime polynomial call
/// it spawns, and one for the packed products under that. A recursion
/// that cannot fit this headroom multiplies directly instead of
/// starting a pipeline it would have to abandon.
const RECURSION_HEADROOM: u32 = 3;

/// Cached configurations. The search is deterministic per (n, profile)
/// pair, so a small map amortizes table construction across calls.
const CONFIG_CACHE_CAP: usize = 24;

/// Everything a fixed width n needs to run the integer pipeline: the
/// residue primes with their weight tables, the chunk geometry, and
/// the admissible tuple whose product is the chunk count.
#[derive(Debug)]
pub struct IntPipelineConfig {
    n: u64,
    target: u64,
    primes: Vec<u64>,
    p_prod: BigUint,
    tuple: AdmissibleTuple,
    theta: BigUint,
    /// theta_pows[j][c] = theta^c mod primes[j].
    theta_pows: Vec<Vec<u64>>,
    /// inv2[j] = the inverse of 2 mod primes[j].
    inv2: Vec<u64>,
    /// Chunk boundaries e_0..e_N (e_N = n).
    e_table: Vec<u64>,
    /// Weight exponents c_0..c_{N-1}.
    c_table: Vec<u64>,
}

impl IntPipelineConfig {
    /// Input width the configuration serves.
    pub fn n(&self) -> u64 {
        self.n
    }

    /// Chunk count N, the admissible tuple's product.
    pub fn chunk_count(&self) -> u64 {
        self.tuple.n()
    }

    /// The chunk-count target ceil(2n / d) handed to the tuple search.
    pub fn search_target(&self) -> u64 {
        self.target
    }

    /// Residue primes whose product is the coefficient modulus.
    pub fn residue_primes(&self) -> &[u64] {
        &self.primes
    }

    /// The coefficient modulus P.
    pub fn modulus(&self) -> &BigUint {
        &self.p_prod
    }

    /// The admissible tuple multiplying the per-prime polynomials.
    pub fn tuple(&self) -> &AdmissibleTuple {
        &self.tuple
    }

    /// The weight root, theta^N = 2 mod P.
    pub fn theta(&self) -> &BigUint {
        &self.theta
    }

    fn build(n: u64, profile: &ParamProfile) -> Result<IntPipelineConfig> {
        if n < 2 {
            return Err(Error::BoundViolated(format!(
                "pipeline widths start at 2 bits, got {n}"
            )));
        }
        match profile.kind() {
            ProfileKind::Paper => Self::candidate(n, select_primes(n)?, profile),
            ProfileKind::Desk => {
                let floor = profile.int_prime_floor(n);
                let pool = primes_above(floor, DESK_PRIME_COUNT_MAX)?;
                let mut last = String::new();
                for k in DESK_PRIME_COUNT_MIN..=DESK_PRIME_COUNT_MAX {
                    match Self::candidate(n, pool[..k].to_vec(), profile) {
                        Ok(cfg) => return Ok(cfg),
                        Err(e) => last = format!("{k} primes: {e}"),
                    }
                }
                Err(Error::SearchExhausted(format!(
                    "no prime set of {DESK_PRIME_COUNT_MIN}..={DESK_PRIME_COUNT_MAX} \
                     primes above {floor} supports n = {n}; last attempt: {last}"
                )))
            }
        }
    }

    /// Validate one prime set and assemble the tables. Every bound the
    /// pipeline later relies on is checked here, not assumed.
    fn candidate(n: u64, primes: Vec<u64>, profile: &ParamProfile) -> Result<IntPipelineConfig> {
        let Some((&p_max, _)) = primes.split_last() else {
            return Err(Error::BoundViolated("empty prime set".into()));
        };
        if primes[0] < 3 {
            return Err(Error::BoundViolated(
                "residue primes must be odd for the weights to unwind".into(),
            ));
        }
        let p_prod = product_of(&primes);
        let lg_p = lg_big(&p_prod);
        let lg_n = lg(n);
        if lg_p < lg_n + 3 + MIN_WEIGHT_CAPACITY {
            return Err(Error::BoundViolated(format!(
                "lg P = {lg_p} is under lg n + 3 + {MIN_WEIGHT_CAPACITY} = {}",
                lg_n + 3 + MIN_WEIGHT_CAPACITY
            )));
        }
        let d = lg_p - lg_n - 3;
        let target = (2 * n as u128).div_ceil(d as u128) as u64;

        // The tuple's primes must clear every residue prime, so the
        // search window starts above the largest one.
        let mut search = profile.clone();
        if p_max > search.q_window(target).0 {
            search.set("q_lo", p_max)?;
        }
        let tuple = find_admissible(target, 2, &search)?;
        let big_n = tuple.n();
        if big_n > n {
            return Err(Error::BoundViolated(format!(
                "chunk count {big_n} exceeds the width {n}"
            )));
        }
        let q_min = tuple.primes().iter().min().copied().unwrap_or(0);
        if q_min <= p_max {
            return Err(Error::BoundViolated(format!(
                "tuple prime {q_min} does not clear the residue prime {p_max}"
            )));
        }
        if big_n as u128 <= p_max as u128 * p_max as u128 {
            return Err(Error::BoundViolated(format!(
                "chunk count {big_n} is not above {p_max}^2"
            )));
        }
        let width = n.div_ceil(big_n);
        if width > 127 {
            return Err(Error::UnsupportedWidth(format!(
                "chunk width {width} exceeds 127 bits"
            )));
        }
        if lg_p <= 2 * width + lg(big_n) + 1 {
            return Err(Error::BoundViolated(format!(
                "lg P = {lg_p} does not clear 2 ceil(n/N) + lg N + 1 = {}",
                2 * width + lg(big_n) + 1
            )));
        }

        let parts = theta_parts(big_n, &primes)?;
        let theta = theta_from_parts(big_n, &parts, &p_prod)?;
        let (e_table, c_table) = cf_exponents(n, big_n);
        let mut theta_pows = Vec::with_capacity(primes.len());
        let mut inv2 = Vec::with_capacity(primes.len());
        for &(p, theta_p) in &parts {
            let mut row = Vec::with_capacity(big_n as usize);
            let mut cur = 1u64;
            for _ in 0..big_n {
                row.push(cur);
                cur = mul_mod(cur, theta_p, p);
            }
            theta_pows.push(row);
            inv2.push(inv_mod(2, p)?);
        }
        Ok(IntPipelineConfig {
            n,
            target,
            primes,
            p_prod,
            tuple,
            theta,
            theta_pows,
            inv2,
            e_table,
            c_table,
        })
    }
}

enum CacheSlot {
    Built(Arc<IntPipelineConfig>),
    Failed(String),
}

static CONFIGS: OnceLock<Mutex<BTreeMap<(u64, String), CacheSlot>>> = OnceLock::new();

/// The pipeline configuration for width n under a profile, built on
/// first use and cached after. Failed searches are cached too: the
/// search is deterministic, so retrying cannot change the answer.
pub fn config_for(n: u64, profile: &ParamProfile) -> Result<Arc<IntPipelineConfig>> {
    let key = (n, format!("{profile:?}"));
    let cache = CONFIGS.get_or_init(|| Mutex::new(BTreeMap::new()));
    if let Some(slot) = cache.lock().unwrap().get(&key) {
        return match slot {
            CacheSlot::Built(cfg) => Ok(Arc::clone(cfg)),
            CacheSlot::Failed(msg) => Err(Error::SearchExhausted(msg.clone())),
        };
    }
    let outcome = match IntPipelineConfig::build(n, profile) {
        Ok(cfg) => CacheSlot::Built(Arc::new(cfg)),
        Err(e) => CacheSlot::Failed(e.to_string()),
    };
    let mut guard = cache.lock().unwrap();
    if guard.len() >= CONFIG_CACHE_CAP && !guard.contains_key(&key) {
        guard.pop_first();
    }
    match guard.entry(key).or_insert(outcome) {
        CacheSlot::Built(cfg) => Ok(Arc::clone(cfg)),
        CacheSlot::Failed(msg) => Err(Error::SearchExhausted(msg.clone())),
    }
}

/// The first lg n primes above (lg n)^2 / 2, the residue moduli the
/// coefficient ring Z/PZ is assembled from at full scale. For
/// n = 10^5 the window above 144 holds 17 such primes, 149 through
/// 233; the count always equals lg n by construction.
pub fn select_primes(n: u64) -> Result<Vec<u64>> {
    if n < 2 {
        return Err(Error::BoundViolated(format!(
            "prime selection needs n >= 2, got {n}"
        )));
    }
    let l = lg(n);
    primes_above(l * l / 2, l as usize)
}

/// The first `count` primes strictly above `floor`, sieved in windows
/// of doubling width.
fn primes_above(floor: u64, count: usize) -> Result<Vec<u64>> {
    let mut out = Vec::with_capacity(count);
    let mut lo = floor;
    let mut span = 64u64.max(floor / 2);
    while out.len() < count {
        let hi = lo.saturating_add(span);
        for q in sieve_primes(lo, hi)? {
            out.push(q);
            if out.len() == count {
                return Ok(out);
            }
        }
        lo = hi;
        span *= 2;
    }
    Ok(out)
}

fn product_of(primes: &[u64]) -> BigUint {
    let mut prod = BigUint::one();
    for &p in primes {
        prod = prod.mul_u64(p);
    }
    prod
}

/// Per-prime parts of the weight root: modulo p the root is
/// theta_p = 2^{a_p} with a_p N = 1 (mod p - 1), so theta_p^N = 2.
/// Requires gcd(N, p - 1) = 1 for every prime, which the pipeline
/// guarantees by keeping every prime factor of N above p.
fn theta_parts(big_n: u64, primes: &[u64]) -> Result<Vec<(u64, u64)>> {
    let mut parts = Vec::with_capacity(primes.len());
    for &p in primes {
        if p < 3 {
            return Err(Error::BoundViolated(format!(
                "weight roots need odd primes, got {p}"
            )));
        }
        let a = inv_mod(big_n % (p - 1), p - 1)?;
        parts.push((p, pow_mod(2, a, p)?));
    }
    Ok(parts)
}

fn theta_from_parts(big_n: u64, parts: &[(u64, u64)], p_prod: &BigUint) -> Result<BigUint> {
    let pairs: Vec<(u64, u64)> = parts.iter().map(|&(p, theta_p)| (theta_p, p)).collect();
    let (theta, modulus) = crt_combine(&pairs)?;
    if modulus != *p_prod {
        return Err(Error::Mismatch(
            "prime product disagrees with the supplied modulus".into(),
        ));
    }
    if pow_mod_big(&theta, &BigUint::from_u64(big_n), p_prod) != BigUint::from_u64(2) {
        return Err(Error::Mismatch(format!(
            "weight root fails theta^{big_n} = 2"
        )));
    }
    Ok(theta)
}

/// The weight root theta < P with theta^N = 2 (mod P): each prime
/// contributes 2 raised to the inverse of N mod p - 1, the CRT
/// stitches the parts together, and the N-th power is checked before
/// the value is trusted.
pub fn build_theta(big_n: u64, primes: &[u64], p_prod: &BigUint) -> Result<BigUint> {
    let parts = theta_parts(big_n, primes)?;
    theta_from_parts(big_n, &parts, p_prod)
}

/// Chunk boundaries e_i = ceil(n i / N) for i = 0..=N and weight
/// exponents c_i = N e_i - n i. Chunk i holds bits e_i..e_{i+1}, so
/// widths vary between floor(n/N) and ceil(n/N) and e_N lands on n.
fn cf_exponents(n: u64, big_n: u64) -> (Vec<u64>, Vec<u64>) {
    let count = big_n as usize;
    let mut e = Vec::with_capacity(count + 1);
    let mut c = Vec::with_capacity(count);
    for i in 0..=count as u128 {
        let num = n as u128 * i;
        let ei = num.div_ceil(big_n as u128);
        e.push(ei as u64);
        if i < count as u128 {
            c.push((big_n as u128 * ei - num) as u64);
        }
    }
    (e, c)
}

/// Preconditions shared by split and recombine, each rejection naming
/// the inequality it failed.
fn cf_checks(n: u64, big_n: u64, p_prod: &BigUint, theta: &BigUint) -> Result<()> {
    if big_n == 0 || big_n > n {
        return Err(Error::BoundViolated(format!(
            "chunk count {big_n} outside 1..={n}"
        )));
    }
    let width = n.div_ceil(big_n);
    if width > 127 {
        return Err(Error::UnsupportedWidth(format!(
            "chunk width {width} exceeds 127 bits"
        )));
    }
    let lg_p = lg_big(p_prod);
    let need = 2 * width + lg(big_n) + 1;
    if lg_p <= need {
        return Err(Error::BoundViolated(format!(
            "lg P = {lg_p} does not clear 2 ceil(n/N) + lg N + 1 = {need}"
        )));
    }
    if pow_mod_big(theta, &BigUint::from_u64(big_n), p_prod) != BigUint::from_u64(2) {
        return Err(Error::Mismatch(
            "weight root fails theta^N = 2 under the given modulus".into(),
        ));
    }
    Ok(())
}

/// Successive powers theta^0..theta^{N-1} mod P.
pub fn theta_power_table(theta: &BigUint, big_n: u64, p_prod: &BigUint) -> Result<Vec<BigUint>> {
    let mut pows = Vec::with_capacity(big_n as usize);
    let mut cur = BigUint::one();
    for _ in 0..big_n {
        pows.push(cur.clone());
        cur = big_mul(&cur, theta).divrem(p_prod)?.1;
    }
    Ok(pows)
}

/// Split a residue mod 2^n - 1 into N weighted chunks: coefficient i
/// is the chunk covering bits e_i..e_{i+1}, times theta^{c_i}, mod P.
/// The cyclic convolution of two such vectors recombines to the
/// product of the underlying integers.
pub fn crandall_fagin_split(
    u: &CyclicInt,
    big_n: u64,
    p_prod: &BigUint,
    theta: &BigUint,
) -> Result<Vec<BigUint>> {
    let n = u.bits();
    cf_checks(n, big_n, p_prod, theta)?;
    let (e, c) = cf_exponents(n, big_n);
    let pows = theta_power_table(theta, big_n, p_prod)?;
    let limbs = u.value().limbs();
    let mut chunks = Vec::with_capacity(big_n as usize);
    for i in 0..big_n as usize {
        let digit = read_digit(limbs, e[i], e[i + 1] - e[i]);
        if digit == 0 {
            chunks.push(BigUint::zero());
            continue;
        }
        let weighted = big_mul(&BigUint::from_u128(digit), &pows[c[i] as usize]);
        chunks.push(weighted.divrem(p_prod)?.1);
    }
    Ok(chunks)
}

/// Rebuild the product residue from convolution coefficients: each w_i
/// is unweighted by theta^{-c_i} = theta^{N - c_i} / 2 (P is odd, so 2
/// inverts), shifted to bit e_i, and the overlapping sum is folded
/// modulo 2^n - 1.
pub fn crandall_fagin_recombine(
    w: &[BigUint],
    n: u64,
    p_prod: &BigUint,
    theta: &BigUint,
) -> Result<CyclicInt> {
    let big_n = w.len() as u64;
    cf_checks(n, big_n, p_prod, theta)?;
    if p_prod.is_even() {
        return Err(Error::NotInvertible(
            "unweighting divides by 2, so the modulus must be odd".into(),
        ));
    }
    let (e, c) = cf_exponents(n, big_n);
    let pows = theta_power_table(theta, big_n, p_prod)?;
    // (P + 1) / 2 inverts 2 modulo the odd P.
    let inv2 = p_prod.add_u64(1).shr_bits(1);
    let mut acc: Vec<u64> = Vec::new();
    for (i, wi) in w.iter().enumerate() {
        if wi.cmp_val(p_prod) != Ordering::Less {
            return Err(Error::BoundViolated(format!(
                "coefficient {i} is not reduced modulo P"
            )));
        }
        let zi = if c[i] == 0 {
            wi.clone()
        } else {
            let t = big_mul(wi, &pows[(big_n - c[i]) as usize]).divrem(p_prod)?.1;
            big_mul(&t, &inv2).divrem(p_prod)?.1
        };
        add_at(&mut acc, &zi, e[i]);
    }
    CyclicInt::new(n, BigUint::from_limbs(acc))
}

/// acc += value << shift, rippling carries in place.
fn add_at(acc: &mut Vec<u64>, value: &BigUint, shift: u64) {
    if value.is_zero() {
        return;
    }
    let word = (shift / 64) as usize;
    let sh = (shift % 64) as u32;
    let src = value.limbs();
    let needed = word + src.len() + 2;
    if acc.len() < needed {
        acc.resize(needed, 0);
    }
    let mut idx = word;
    let mut spill = 0u64;
    let mut carry = 0u64;
    for &limb in src {
        let shifted = if sh == 0 { limb } else { (limb << sh) | spill };
        spill = if sh == 0 { 0 } else { limb >> (64 - sh) };
        let (s, o1) = acc[idx].overflowing_add(shifted);
        let (s, o2) = s.overflowing_add(carry);
        acc[idx] = s;
        carry = o1 as u64 + o2 as u64;
        idx += 1;
    }
    let (s, o) = acc[idx].overflowing_add(spill);
    let (s, o2) = s.overflowing_add(carry);
    acc[idx] = s;
    carry = o as u64 + o2 as u64;
    idx += 1;
    while carry != 0 {
        if idx == acc.len() {
            acc.push(0);
        }
        let (s, o) = acc[idx].overflowing_add(carry);
        acc[idx] = s;
        carry = o as u64;
        idx += 1;
    }
}

/// Multiply every residue in `us` by `v`, all modulo 2^n - 1. Route
/// selection honors the context at the top call; recursive calls pick
/// by size. Small widths multiply directly, larger ones run the
/// chunked pipeline, and any pipeline failure falls back to the direct
/// product with a trace event, so the result is exact either way.
pub fn integer_multiply(
    us: &[CyclicInt],
    v: &CyclicInt,
    ctx: &Ctx,
    depth: u32,
) -> Result<Vec<CyclicInt>> {
    if us.is_empty() {
        return Err(Error::Mismatch("integer batch needs at least one u".into()));
    }
    let n = v.bits();
    for u in us {
        if u.bits() != n {
            return Err(Error::Mismatch(format!(
                "batch width {} disagrees with v's width {n}",
                u.bits()
            )));
        }
    }
    let route = if depth == 0 { ctx.int_route() } else { IntRoute::Auto };
    mul_impl(us, v, ctx, depth, route)
}

fn direct(us: &[CyclicInt], v: &CyclicInt) -> Result<Vec<CyclicInt>> {
    us.iter().map(|u| cyclic_mul(u, v)).collect()
}

fn mul_impl(
    us: &[CyclicInt],
    v: &CyclicInt,
    ctx: &Ctx,
    depth: u32,
    route: IntRoute,
) -> Result<Vec<CyclicInt>> {
    ctx.ensure_depth(depth)?;
    let n = v.bits();
    let basecase = match route {
        IntRoute::Basecase => true,
        IntRoute::Pipeline => false,
        IntRoute::Auto => ctx.profile().int_basecase(n),
    };
    if basecase {
        ctx.record(TraceEvent::IntCall {
            depth,
            n,
            path: IntPath::Basecase,
        });
        return direct(us, v);
    }
    let cfg = match config_for(n, ctx.profile()) {
        Ok(cfg) => cfg,
        Err(e) => {
            ctx.record(TraceEvent::Fallback {
                depth,
                stage: "configuration".into(),
                reason: e.to_string(),
            });
            ctx.record(TraceEvent::IntCall {
                depth,
                n,
                path: IntPath::Basecase,
            });
            return direct(us, v);
        }
    };
    ctx.record(TraceEvent::IntCall {
        depth,
        n,
        path: IntPath::Pipeline,
    });
    match run_pipeline(&cfg, us, v, ctx, depth) {
        Ok(out) => Ok(out),
        Err(e) => {
            ctx.record(TraceEvent::Fallback {
                depth,
                stage: "residue-products".into(),
                reason: e.to_string(),
            });
            direct(us, v)
        }
    }
}

/// The chunked multiply under a fixed configuration: weight the chunks
/// into one row per residue prime, multiply the rows with the
/// admissible polynomial pipeline (packed products recurse back into
/// `mul_impl`), then unweight, CRT-combine, and overlap-add.
fn run_pipeline(
    cfg: &IntPipelineConfig,
    us: &[CyclicInt],
    v: &CyclicInt,
    ctx: &Ctx,
    depth: u32,
) -> Result<Vec<CyclicInt>> {
    let n = cfg.n;
    let big_n = cfg.chunk_count();
    let count = big_n as usize;
    ctx.record(TraceEvent::CfSplit {
        depth,
        n,
        big_n,
        chunk_count: big_n,
    });
    ctx.record(TraceEvent::CrtSplit {
        depth,
        primes: cfg.primes.clone(),
    });

    // One pass per operand: read each chunk once, reduce it into every
    // residue field, and weight it there. This fuses the split over
    // Z/PZ with the CRT transpose, so no big-integer arithmetic runs
    // per coefficient.
    let weight_rows = |x: &CyclicInt| -> Vec<Vec<u64>> {
        let limbs = x.value().limbs();
        let mut rows = vec![vec![0u64; count]; cfg.primes.len()];
        for k in 0..count {
            let chunk = read_digit(limbs, cfg.e_table[k], cfg.e_table[k + 1] - cfg.e_table[k]);
            if chunk == 0 {
                continue;
            }
            let c = cfg.c_table[k] as usize;
            for (j, &p) in cfg.primes.iter().enumerate() {
                let res = (chunk % p as u128) as u64;
                rows[j][k] = mul_mod(res, cfg.theta_pows[j][c], p);
            }
        }
        rows
    };
    let mut u_rows: Vec<Vec<Vec<u64>>> = us.iter().map(weight_rows).collect();
    let v_rows = weight_rows(v);

    // Per-prime polynomial products. The callback closes the loop:
    // packed products re-enter the integer multiplier, recursing only
    // while the width keeps shrinking and the budget keeps room for
    // the frames a nested pipeline needs.
    let budget = ctx.depth_budget();
    let cap = n / 2;
    let mut int_edge = |a: &CyclicInt, b: &CyclicInt, d: u32| -> Result<CyclicInt> {
        ctx.ensure_depth(d)?;
        let bits = a.bits();
        if bits >= cap || ctx.profile().int_basecase(bits) || d + RECURSION_HEADROOM > budget {
            ctx.record(TraceEvent::IntCall {
                depth: d,
                n: bits,
                path: IntPath::Basecase,
            });
            return cyclic_mul(a, b);
        }
        Ok(mul_impl(std::slice::from_ref(a), b, ctx, d, IntRoute::Auto)?.remove(0))
    };
    let mut residue_products: Vec<Vec<Vec<u64>>> = Vec::with_capacity(cfg.primes.len());
    for (j, &p) in cfg.primes.iter().enumerate() {
        let batch: Vec<Vec<u64>> = u_rows
            .iter_mut()
            .map(|rows| std::mem::take(&mut rows[j]))
            .collect();
        ctx.record(TraceEvent::PolyCall {
            depth: depth + 1,
            p,
            r: big_n,
            t: batch.len() as u64,
            path: PolyPath::Admissible,
        });
        residue_products.push(refined_admissible_multiply(
            &cfg.tuple,
            p,
            &batch,
            &v_rows[j],
            ctx,
            depth + 1,
            &mut int_edge,
        )?);
    }

    // Unweight per prime, CRT the parts to the exact coefficient under
    // P, and overlap-add the chunks back into a cyclic residue.
    let mut out = Vec::with_capacity(us.len());
    for i in 0..us.len() {
        let mut acc: Vec<u64> = Vec::new();
        for k in 0..count {
            let c = cfg.c_table[k] as usize;
            let mut parts = Vec::with_capacity(cfg.primes.len());
            for (j, &p) in cfg.primes.iter().enumerate() {
                let w = residue_products[j][i][k];
                let z = if c == 0 {
                    w
                } else {
                    // theta^{-c} = theta^{N-c} / 2 since theta^N = 2.
                    let t = mul_mod(w, cfg.theta_pows[j][count - c], p);
                    mul_mod(t, cfg.inv2[j], p)
                };
                parts.push((z, p));
            }
            let (z, _) = crt_combine(&parts)?;
            add_at(&mut acc, &z, cfg.e_table[k]);
        }
        out.push(CyclicInt::new(n, BigUint::from_limbs(acc))?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{oracle_cyclic_conv_mod, oracle_cyclic_int_mul, oracle_cyclic_poly_mul};
    use crate::trace::{depths_consistent, int_calls_contract};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_cyclic(n: u64, rng: &mut ChaCha8Rng) -> CyclicInt {
        let limbs: Vec<u64> = (0..n.div_ceil(64)).map(|_| rng.gen()).collect();
        CyclicInt::new(n, BigUint::from_limbs(limbs)).unwrap()
    }

    /// Odd primes accumulated until lg P clears the convolution bound
    /// for (n, N), skipping primes whose p - 1 shares a factor with N.
    fn pick_primes(n: u64, big_n: u64) -> (Vec<u64>, BigUint) {
        let need = 2 * n.div_ceil(big_n) + lg(big_n) + 1;
        let mut primes = Vec::new();
        let mut prod = BigUint::one();
        for q in sieve_primes(2, 4000).unwrap() {
            if inv_mod(big_n % (q - 1), q - 1).is_err() {
                continue;
            }
            primes.push(q);
            prod = prod.mul_u64(q);
            if lg_big(&prod) > need {
                break;
            }
        }
        assert!(lg_big(&prod) > need, "prime pool too small for ({n}, {big_n})");
        (primes, prod)
    }

    #[test]
    fn paper_prime_rule_matches_the_sieve() {
        assert_eq!(
            select_primes(256).unwrap(),
            vec![37, 41, 43, 47, 53, 59, 61, 67]
        );
        let big = select_primes(100_000).unwrap();
        assert_eq!(big.len(), 17);
        assert_eq!(big.first(), Some(&149));
        assert_eq!(big.last(), Some(&233));
        assert!(big.iter().all(|&p| p > 144));
        for n in [2u64, 100, 1024, 1 << 20] {
            assert_eq!(select_primes(n).unwrap().len(), lg(n) as usize);
        }
        assert!(select_primes(1).is_err());
    }

    #[test]
    fn chunk_exponents_match_hand_values() {
        let (e, c) = cf_exponents(10, 4);
        assert_eq!(e, vec![0, 3, 5, 8, 10]);
        assert_eq!(c, vec![0, 2, 0, 2]);

        // When N divides n every chunk is even and unweighted.
        let (e, c) = cf_exponents(12, 4);
        assert_eq!(e, vec![0, 3, 6, 9, 12]);
        assert_eq!(c, vec![0, 0, 0, 0]);

        for (n, big_n) in [(100u64, 7u64), (64, 9), (127, 11), (4096, 437)] {
            let (e, c) = cf_exponents(n, big_n);
            assert_eq!(e[0], 0);
            assert_eq!(*e.last().unwrap(), n);
            let lo = n / big_n;
            let hi = n.div_ceil(big_n);
            for w in e.windows(2) {
                assert!(w[1] - w[0] == lo || w[1] - w[0] == hi);
            }
            assert!(c.iter().all(|&ci| ci < big_n));
        }
    }

    #[test]
    fn theta_single_prime_and_desk_set() {
        let five = BigUint::from_u64(5);
        assert_eq!(build_theta(1, &[5], &five).unwrap(), BigUint::from_u64(2));

        let primes = [3u64, 5, 7, 11, 13, 17];
        let p_prod = product_of(&primes);
        assert_eq!(p_prod, BigUint::from_u64(255255));
        let theta = build_theta(437, &primes, &p_prod).unwrap();
        assert_eq!(
            pow_mod_big(&theta, &BigUint::from_u64(437), &p_prod),
            BigUint::from_u64(2)
        );
        // The CRT image in each field is itself an N-th root of 2.
        for &p in &primes {
            assert_eq!(pow_mod(theta.mod_u64(p), 437, p).unwrap(), 2);
            let a = inv_mod(437 % (p - 1), p - 1).unwrap();
            assert_eq!(theta.mod_u64(p), pow_mod(2, a, p).unwrap());
        }

        // gcd(N, p - 1) > 1 leaves no exponent to invert.
        assert!(build_theta(4, &[5], &five).is_err());
        // Mismatched product is rejected.
        assert!(build_theta(437, &primes, &five).is_err());
    }

    #[test]
    fn split_unit_value_gives_unit_polynomial() {
        let primes = [3u64, 5, 7, 11, 13, 17];
        let p_prod = product_of(&primes);
        let theta = build_theta(7, &primes, &p_prod).unwrap();
        let one = CyclicInt::new(40, BigUint::one()).unwrap();
        let chunks = crandall_fagin_split(&one, 7, &p_prod, &theta).unwrap();
        assert_eq!(chunks.len(), 7);
        assert!(chunks[0].is_one());
        assert!(chunks[1..].iter().all(|c| c.is_zero()));

        let back = crandall_fagin_recombine(&chunks, 40, &p_prod, &theta).unwrap();
        assert_eq!(back, one);
    }

    #[test]
    fn split_rejects_bad_parameters() {
        let primes = [3u64, 5, 7, 11, 13, 17];
        let p_prod = product_of(&primes);
        let theta = build_theta(7, &primes, &p_prod).unwrap();
        let u = CyclicInt::new(40, BigUint::from_u64(77)).unwrap();

        // More chunks than bits.
        let err = crandall_fagin_split(&u, 50, &p_prod, &theta).unwrap_err();
        assert!(matches!(err, Error::BoundViolated(_)));

        // A modulus too small for the convolution bound names lg P.
        let small = product_of(&[3, 5, 7]);
        let theta_small = build_theta(7, &[3, 5, 7], &small).unwrap();
        let err = crandall_fagin_split(&u, 7, &small, &theta_small).unwrap_err();
        assert!(err.to_string().contains("lg P"));

        // A wrong root fails the theta^N = 2 check.
        let err = crandall_fagin_split(&u, 7, &p_prod, &theta.add_u64(1)).unwrap_err();
        assert!(matches!(err, Error::Mismatch(_)));
    }

    #[test]
    fn split_recombine_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
        for (n, big_n) in [(64u64, 5u64), (100, 9), (256, 31), (1000, 51), (4096, 437)] {
            let (primes, p_prod) = pick_primes(n, big_n);
            let theta = build_theta(big_n, &primes, &p_prod).unwrap();
            for _ in 0..4 {
                let u = rand_cyclic(n, &mut rng);
                let chunks = crandall_fagin_split(&u, big_n, &p_prod, &theta).unwrap();
                assert_eq!(chunks.len(), big_n as usize);
                assert!(chunks.iter().all(|c| c.cmp_val(&p_prod) == Ordering::Less));
                let back = crandall_fagin_recombine(&chunks, n, &p_prod, &theta).unwrap();
                assert_eq!(back, u, "round trip at n = {n}, N = {big_n}");
            }
        }
    }

    #[test]
    fn split_products_recombine_to_the_integer_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for (n, big_n) in [(256u64, 31u64), (1000, 51), (1024, 437)] {
            let (primes, p_prod) = pick_primes(n, big_n);
            let theta = build_theta(big_n, &primes, &p_prod).unwrap();
            for _ in 0..3 {
                let u = rand_cyclic(n, &mut rng);
                let v = rand_cyclic(n, &mut rng);
                let us = crandall_fagin_split(&u, big_n, &p_prod, &theta).unwrap();
                let vs = crandall_fagin_split(&v, big_n, &p_prod, &theta).unwrap();
                let w = oracle_cyclic_conv_mod(&us, &vs, &p_prod);
                let prod = crandall_fagin_recombine(&w, n, &p_prod, &theta).unwrap();
                assert_eq!(prod, oracle_cyclic_int_mul(&u, &v).unwrap());
            }

            let zeros = vec![BigUint::zero(); big_n as usize];
            let z = crandall_fagin_recombine(&zeros, n, &p_prod, &theta).unwrap();
            assert_eq!(z, CyclicInt::zero(n).unwrap());
        }
    }

    #[test]
    fn config_finds_the_tight_prime_set() {
        let desk = ParamProfile::desk();
        let cfg = config_for(1024, &desk).unwrap();
        assert_eq!(cfg.residue_primes(), &[3, 5, 7, 11, 13, 17]);
        assert_eq!(cfg.modulus(), &BigUint::from_u64(255255));
        assert_eq!(cfg.search_target(), 410);
        assert_eq!(cfg.chunk_count(), 437);
        assert_eq!(cfg.tuple().primes(), &[19, 23]);
        assert_eq!(
            pow_mod_big(cfg.theta(), &BigUint::from_u64(437), cfg.modulus()),
            BigUint::from_u64(2)
        );

        // Larger widths pull in just enough primes for the capacity
        // bound and land tuples whose primes clear the residue set.
        let frozen = [(4096u64, 1081u64, vec![47u64, 23]), (16384, 5497, vec![239, 23])];
        for (n, big_n, qs) in frozen {
            let cfg = config_for(n, &desk).unwrap();
            assert_eq!(cfg.chunk_count(), big_n, "chunk count at n = {n}");
            assert_eq!(cfg.tuple().primes(), qs.as_slice());
        }
        for n in [1024u64, 4096, 16384, 65536, 262144] {
            let cfg = config_for(n, &desk).unwrap();
            let p_max = *cfg.residue_primes().last().unwrap();
            let lg_p = lg_big(cfg.modulus());
            assert!(lg_p >= lg(n) + 3 + MIN_WEIGHT_CAPACITY);
            assert!(cfg.chunk_count() <= n);
            assert!(cfg.tuple().primes().iter().all(|&q| q > p_max));
            assert!(cfg.chunk_count() as u128 > p_max as u128 * p_max as u128);
            let width = n.div_ceil(cfg.chunk_count());
            assert!(lg_p > 2 * width + lg(cfg.chunk_count()) + 1);
        }
    }

    #[test]
    fn config_rejects_sizes_without_room() {
        let desk = ParamProfile::desk();
        for n in [256u64, 300, 512] {
            let err = config_for(n, &desk).unwrap_err();
            assert!(matches!(err, Error::SearchExhausted(_)), "n = {n}");
        }
    }

    #[test]
    fn identities_through_the_forced_pipeline() {
        let ctx = Ctx::new(ParamProfile::desk()).with_int_route(IntRoute::Pipeline);
        let one = CyclicInt::new(1024, BigUint::one()).unwrap();
        let out = integer_multiply(std::slice::from_ref(&one), &one, &ctx, 0).unwrap();
        assert_eq!(out, vec![one.clone()]);

        // 2^n - 2 is -1 in the ring, and (-1)(-1) = 1.
        let minus_one =
            CyclicInt::new(1024, BigUint::mersenne(1024).sub(&BigUint::one())).unwrap();
        let out = integer_multiply(std::slice::from_ref(&minus_one), &minus_one, &ctx, 0).unwrap();
        assert_eq!(out, vec![one]);

        let events = ctx.take_events();
        assert!(events
            .iter()
            .any(|e| matches!(e, TraceEvent::CfSplit { .. })));
        assert!(events
            .iter()
            .any(|e| matches!(e, TraceEvent::CrtSplit { .. })));
    }

    #[test]
    fn forced_pipeline_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for round in 0..6 {
            let ctx = Ctx::new(ParamProfile::desk()).with_int_route(IntRoute::Pipeline);
            let u = rand_cyclic(1024, &mut rng);
            let v = rand_cyclic(1024, &mut rng);
            let out = integer_multiply(std::slice::from_ref(&u), &v, &ctx, 0).unwrap();
            assert_eq!(out[0], oracle_cyclic_int_mul(&u, &v).unwrap(), "round {round}");

            let events = ctx.take_events();
            assert_eq!(
                events[0],
                TraceEvent::IntCall {
                    depth: 0,
                    n: 1024,
                    path: IntPath::Pipeline
                }
            );
            assert_eq!(
                events[1],
                TraceEvent::CfSplit {
                    depth: 0,
                    n: 1024,
                    big_n: 437,
                    chunk_count: 437
                }
            );
            assert_eq!(
                events[2],
                TraceEvent::CrtSplit {
                    depth: 0,
                    primes: vec![3, 5, 7, 11, 13, 17]
                }
            );
            // One admissible call per residue prime, each planning the
            // whole tuple (alpha = N, a single component) and packing
            // its cofactor branch through the integer edge.
            let admissible: Vec<_> = events
                .iter()
                .filter(|e| {
                    matches!(
                        e,
                        TraceEvent::PolyCall {
                            depth: 1,
                            path: PolyPath::Admissible,
                            ..
                        }
                    )
                })
                .collect();
            assert_eq!(admissible.len(), 6);
            assert!(admissible.iter().all(|e| matches!(
                e,
                TraceEvent::PolyCall { r: 437, t: 1, .. }
            )));
            let plans: Vec<_> = events
                .iter()
                .filter(|e| matches!(e, TraceEvent::AdmissiblePlan { .. }))
                .collect();
            assert_eq!(plans.len(), 6);
            assert!(plans.iter().all(|e| matches!(
                e,
                TraceEvent::AdmissiblePlan {
                    depth: 1,
                    big_n: 437,
                    alpha: 437,
                    m: 1,
                    ..
                }
            )));
            let refined = events
                .iter()
                .filter(|e| {
                    matches!(
                        e,
                        TraceEvent::PolyCall {
                            depth: 2,
                            path: PolyPath::Refined,
                            r: 82,
                            ..
                        }
                    )
                })
                .count();
            assert_eq!(refined, 6);
            let leaves = events
                .iter()
                .filter(|e| {
                    matches!(
                        e,
                        TraceEvent::IntCall {
                            depth: 3,
                            path: IntPath::Basecase,
                            ..
                        }
                    )
                })
                .count();
            assert_eq!(leaves, 6);
            assert!(events.iter().all(|e| !matches!(e, TraceEvent::Fallback { .. })));
            assert!(depths_consistent(&events, 0));
            assert!(int_calls_contract(&events));
            assert_eq!(events.iter().map(|e| e.depth()).max(), Some(3));
        }

        // A batch shares v's tables across both rows.
        let ctx = Ctx::new(ParamProfile::desk()).with_int_route(IntRoute::Pipeline);
        let us = [rand_cyclic(1024, &mut rng), rand_cyclic(1024, &mut rng)];
        let v = rand_cyclic(1024, &mut rng);
        let out = integer_multiply(&us, &v, &ctx, 0).unwrap();
        for (u, w) in us.iter().zip(&out) {
            assert_eq!(w, &oracle_cyclic_int_mul(u, &v).unwrap());
        }
    }

    #[test]
    fn auto_route_multiplies_small_sizes_directly() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let ctx = Ctx::new(ParamProfile::desk());
        let u = rand_cyclic(256, &mut rng);
        let v = rand_cyclic(256, &mut rng);
        let out = integer_multiply(std::slice::from_ref(&u), &v, &ctx, 0).unwrap();
        assert_eq!(out[0], oracle_cyclic_int_mul(&u, &v).unwrap());
        let events = ctx.take_events();
        assert_eq!(
            events,
            vec![TraceEvent::IntCall {
                depth: 0,
                n: 256,
                path: IntPath::Basecase
            }]
        );
    }

    #[test]
    fn forced_pipeline_falls_back_when_no_config_exists() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let ctx = Ctx::new(ParamProfile::desk()).with_int_route(IntRoute::Pipeline);
        let u = rand_cyclic(300, &mut rng);
        let v = rand_cyclic(300, &mut rng);
        let out = integer_multiply(std::slice::from_ref(&u), &v, &ctx, 0).unwrap();
        assert_eq!(out[0], oracle_cyclic_int_mul(&u, &v).unwrap());
        let events = ctx.take_events();
        assert!(events.iter().any(|e| matches!(
            e,
            TraceEvent::Fallback { depth: 0, stage, .. } if stage == "configuration"
        )));
        assert!(events.iter().any(|e| matches!(
            e,
            TraceEvent::IntCall {
                depth: 0,
                n: 300,
                path: IntPath::Basecase
            }
        )));
    }

    #[test]
    fn per_prime_residues_recombine_consistently() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let desk = ParamProfile::desk();
        let cfg = config_for(1024, &desk).unwrap();
        let big_n = cfg.chunk_count();
        let u = rand_cyclic(1024, &mut rng);
        let v = rand_cyclic(1024, &mut rng);
        let us = crandall_fagin_split(&u, big_n, cfg.modulus(), cfg.theta()).unwrap();
        let vs = crandall_fagin_split(&v, big_n, cfg.modulus(), cfg.theta()).unwrap();
        let w = oracle_cyclic_conv_mod(&us, &vs, cfg.modulus());
        for &p in cfg.residue_primes() {
            let up: Vec<u64> = us.iter().map(|x| x.mod_u64(p)).collect();
            let vp: Vec<u64> = vs.iter().map(|x| x.mod_u64(p)).collect();
            let wp = oracle_cyclic_poly_mul(&up, &vp, p);
            for (big, small) in w.iter().zip(&wp) {
                assert_eq!(big.mod_u64(p), *small, "residue drift at p = {p}");
            }
        }
    }

    #[test]
    fn tight_budget_falls_back_to_the_basecase() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let ctx = Ctx::new(ParamProfile::desk())
            .with_int_route(IntRoute::Pipeline)
            .with_depth_budget(1);
        let u = rand_cyclic(1024, &mut rng);
        let v = rand_cyclic(1024, &mut rng);
        let out = integer_multiply(std::slice::from_ref(&u), &v, &ctx, 0).unwrap();
        assert_eq!(out[0], oracle_cyclic_int_mul(&u, &v).unwrap());
        let events = ctx.take_events();
        assert!(events.iter().any(|e| matches!(
            e,
            TraceEvent::Fallback { stage, .. } if stage == "residue-products"
        )));
    }
}
