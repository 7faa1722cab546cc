//! Admissible lengths and divisors: the parameter search that drives
//! both multiplication pipelines.
//!
//! An admissible tuple is a list of distinct primes (q_0, q_1, ..., q_e)
//! whose product N serves as a transform length. The tail primes must
//! have squarefree q_i - 1 with a small lcm lambda; this is what later
//! guarantees that the cyclotomic ring F_p[Y]/phi_alpha contains a
//! principal root of unity of order q_1...q_e. The search scans a window
//! of primes, accumulates counts and partial products per candidate
//! lambda, and as soon as some lambda's primes can cover the target it
//! attempts the explicit construction: pick the shortest prefix whose
//! product brings the quotient under the prime ceiling, then take q_0
//! as the least prime exceeding that quotient.
//!
//! A divisor alpha of N is then forced by the tail orders: for every
//! prime l dividing lambda, the first tail prime whose order of p is
//! divisible by l is switched on. The ring F_p[Y]/phi_alpha splits into
//! equal-degree fields of degree r = ord_alpha(p), and every tail prime
//! divides p^r - 1, which is exactly what root construction needs.

use crate::cyclo_ring::{build_principal_root, CycloElem, CycloRing};
use crate::error::{Error, Result};
use crate::nt::{
    factor_word, inv_mod, is_prime, lcm, lg, mult_order, sieve_primes, FactoredInt,
};
use crate::profile::ParamProfile;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Hard ceiling on the search's counter array, independent of profile
/// overrides, to keep memory bounded. Lambda values beyond the cap are
/// simply not explored.
const LAMBDA_ARRAY_CAP: u64 = 1 << 22;

/// Upper bound on construction attempts per search round.
const CONSTRUCT_ATTEMPT_BUDGET: usize = 4096;

/// Distinct primes (q_0, q_1, ..., q_e) with product N and
/// lambda = lcm(q_1 - 1, ..., q_e - 1). The head prime q_0 is exempt
/// from the squarefree and lcm conditions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmissibleTuple {
    q: Vec<u64>,
    n: u64,
    lambda: u64,
    lambda_factors: FactoredInt,
}

impl AdmissibleTuple {
    /// Assemble a tuple from its primes (q_0 first), computing the
    /// product and lambda. No admissibility judgment happens here;
    /// that is `verify_tuple`, so tests can build broken tuples.
    pub fn from_primes(q: Vec<u64>) -> Result<AdmissibleTuple> {
        if q.len() < 2 {
            return Err(Error::BoundViolated(format!(
                "a tuple needs at least two primes, got {}",
                q.len()
            )));
        }
        let mut n: u64 = 1;
        for &qi in &q {
            n = n
                .checked_mul(qi)
                .ok_or_else(|| Error::BoundViolated("tuple product overflows u64".into()))?;
        }
        let mut lambda = 1u64;
        for &qi in &q[1..] {
            lambda = lcm(lambda, qi - 1)?;
        }
        let lambda_factors = factor_word(lambda)?;
        Ok(AdmissibleTuple {
            q,
            n,
            lambda,
            lambda_factors,
        })
    }

    /// All primes, q_0 first.
    pub fn primes(&self) -> &[u64] {
        &self.q
    }

    pub fn q0(&self) -> u64 {
        self.q[0]
    }

    /// The tail q_1, ..., q_e.
    pub fn tail(&self) -> &[u64] {
        &self.q[1..]
    }

    pub fn e(&self) -> usize {
        self.q.len() - 1
    }

    /// The product N.
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn lambda(&self) -> u64 {
        self.lambda
    }

    pub fn lambda_factors(&self) -> &FactoredInt {
        &self.lambda_factors
    }

    /// q_1 q_2 ... q_e, the order of the principal root a divisor ring
    /// must contain.
    pub fn root_order(&self) -> u64 {
        self.q[1..].iter().product()
    }
}

/// Check every admissibility condition from scratch: primality,
/// distinctness, window bounds, squarefree tails, the lambda bound and
/// its stored factorization, and p-admissibility (N > p^2, p not a
/// factor). Internal arithmetic failures count as "not admissible".
pub fn verify_tuple(t: &AdmissibleTuple, p: u64, profile: &ParamProfile) -> bool {
    verify_tuple_inner(t, p, profile).unwrap_or(false)
}

fn verify_tuple_inner(t: &AdmissibleTuple, p: u64, profile: &ParamProfile) -> Result<bool> {
    if t.e() < 1 {
        return Ok(false);
    }
    let mut seen = std::collections::BTreeSet::new();
    let (q_lo, q_hi) = profile.q_window(t.n);
    let mut product: u128 = 1;
    for &qi in &t.q {
        if !is_prime(qi)? || qi == p || !seen.insert(qi) {
            return Ok(false);
        }
        if qi <= q_lo || qi >= q_hi {
            return Ok(false);
        }
        product *= qi as u128;
    }
    if product != t.n as u128 {
        return Ok(false);
    }
    let mut lambda = 1u64;
    for &qi in t.tail() {
        if !crate::nt::is_squarefree(qi - 1)? {
            return Ok(false);
        }
        lambda = match lcm(lambda, qi - 1) {
            Ok(l) => l,
            Err(_) => return Ok(false),
        };
    }
    if lambda != t.lambda
        || lambda > profile.lambda_max(t.n)
        || !crate::nt::is_squarefree(lambda)?
        || factor_word(lambda)? != t.lambda_factors
    {
        return Ok(false);
    }
    // p-admissibility
    if (t.n as u128) <= (p as u128) * (p as u128) || t.n % p == 0 {
        return Ok(false);
    }
    Ok(true)
}

/// Multiplicative orders of p modulo each tail prime.
pub fn order_table(t: &AdmissibleTuple, p: u64) -> Result<Vec<(u64, u64)>> {
    t.tail()
        .iter()
        .map(|&q| {
            let f = factor_word(q - 1)?;
            Ok((q, mult_order(p % q, q, &f)?))
        })
        .collect()
}

fn squarefree_flags(max: u64) -> Vec<bool> {
    let max = max as usize;
    let mut flags = vec![true; max + 1];
    flags[0] = false;
    let mut d = 2usize;
    while d * d <= max {
        let sq = d * d;
        let mut k = sq;
        while k <= max {
            flags[k] = false;
            k += sq;
        }
        d += 1;
    }
    flags
}

/// Search for a p-admissible length in the profile's interval above n.
///
/// The scan enumerates window primes q in ascending order, increments a
/// counter for every squarefree lambda divisible by q - 1, and tracks
/// the product of those primes per lambda. A lambda becomes a
/// construction candidate once its counter reaches lg n (the classical
/// stop rule) or, far earlier at desk scale, once its prime product
/// suffices to cover n under the prime ceiling. Each candidate is run
/// through the explicit construction; the first success wins. One retry
/// with a doubled lambda ceiling happens before giving up.
pub fn find_admissible(n: u64, p: u64, profile: &ParamProfile) -> Result<AdmissibleTuple> {
    if !is_prime(p)? {
        return Err(Error::Mismatch(format!("{p} is not prime")));
    }
    if n < profile.min_target() {
        return Err(Error::BoundViolated(format!(
            "target {n} is below the {} profile minimum {}",
            profile.name(),
            profile.min_target()
        )));
    }
    let (_, hi) = profile.target_interval(n);
    if hi as u128 <= (p as u128) * (p as u128) {
        return Err(Error::SearchExhausted(format!(
            "no length in (n, {hi}] can exceed p^2 = {}",
            (p as u128) * (p as u128)
        )));
    }
    let base_lambda_max = profile.lambda_max(n);
    let mut last_lambda_max = 0;
    for round in 0..2 {
        let lambda_max = (base_lambda_max << round).min(LAMBDA_ARRAY_CAP);
        if lambda_max == last_lambda_max {
            break;
        }
        last_lambda_max = lambda_max;
        if let Some(t) = search_round(n, p, profile, lambda_max)? {
            debug_assert!(verify_tuple(&t, p, profile));
            return Ok(t);
        }
    }
    Err(Error::SearchExhausted(format!(
        "no {} admissible length found in ({n}, {hi}] for p = {p} \
         (lambda ceiling {last_lambda_max})",
        profile.name()
    )))
}

fn search_round(
    n: u64,
    p: u64,
    profile: &ParamProfile,
    lambda_max: u64,
) -> Result<Option<AdmissibleTuple>> {
    let (q_lo, q_hi) = profile.q_window(n);
    if q_hi <= q_lo + 1 {
        return Ok(None);
    }
    let sieve_hi = (q_hi - 1).min(lambda_max.saturating_add(1));
    if sieve_hi <= q_lo {
        return Ok(None);
    }
    let primes = sieve_primes(q_lo, sieve_hi)?;
    let squarefree = squarefree_flags(lambda_max);
    let mut counts = vec![0u32; lambda_max as usize + 1];
    let mut prods = vec![1u64; lambda_max as usize + 1];
    let quota = lg(n) as u32;
    let mut budget = CONSTRUCT_ATTEMPT_BUDGET;
    for &q in &primes {
        if q == p {
            continue;
        }
        let d = q - 1;
        if d > lambda_max || !squarefree[d as usize] {
            continue;
        }
        let mut lam = d;
        while lam <= lambda_max {
            if squarefree[lam as usize] {
                let i = lam as usize;
                counts[i] += 1;
                prods[i] = prods[i].saturating_mul(q);
                let covered = prods[i].saturating_mul(q_hi - 1) > n;
                if counts[i] >= quota || covered {
                    if budget == 0 {
                        return Err(Error::BudgetExceeded(format!(
                            "gave up after {CONSTRUCT_ATTEMPT_BUDGET} construction attempts"
                        )));
                    }
                    budget -= 1;
                    if let Some(t) = try_construct(lam, n, p, profile)? {
                        return Ok(Some(t));
                    }
                }
            }
            lam += d;
        }
    }
    Ok(None)
}

/// Attempt the explicit construction for one candidate lambda: gather
/// the window primes q with q - 1 dividing it, take the shortest
/// prefix whose product forces the quotient below the prime ceiling,
/// and complete with the least admissible prime above the quotient.
fn try_construct(
    lambda0: u64,
    n: u64,
    p: u64,
    profile: &ParamProfile,
) -> Result<Option<AdmissibleTuple>> {
    let (q_lo, q_hi) = profile.q_window(n);
    let (_, hi) = profile.target_interval(n);
    let p_sq = (p as u128) * (p as u128);
    let mut tail: Vec<u64> = Vec::new();
    for d in crate::nt::divisors(lambda0)? {
        let q = d + 1;
        if d >= q_lo && q < q_hi && q != p && is_prime(q)? {
            tail.push(q);
        }
    }
    if tail.is_empty() {
        return Ok(None);
    }
    let mut prefix: u128 = 1;
    for e in 1..=tail.len() {
        prefix *= tail[e - 1] as u128;
        // q_0 must stay under the ceiling: need n / prefix < q_hi
        if prefix * (q_hi as u128 - 1) <= n as u128 {
            continue;
        }
        let quotient = (n as u128 / prefix) as u64;
        let mut cand = quotient.max(q_lo) + 1;
        let q0 = loop {
            if cand >= q_hi || cand as u128 * prefix > hi as u128 {
                break None;
            }
            if cand != p && !tail[..e].contains(&cand) && is_prime(cand)? {
                break Some(cand);
            }
            cand += 1;
        };
        let Some(q0) = q0 else { continue };
        let big_n = q0 as u128 * prefix;
        if big_n <= p_sq || big_n > hi as u128 {
            continue;
        }
        let mut primes = vec![q0];
        primes.extend_from_slice(&tail[..e]);
        let t = AdmissibleTuple::from_primes(primes)?;
        if t.lambda <= profile.lambda_max(n) && verify_tuple(&t, p, profile) {
            return Ok(Some(t));
        }
    }
    Ok(None)
}

/// The arithmetic part of divisor construction: which tail primes are
/// switched on, the resulting alpha, the splitting degree r, and the
/// component count. Cheap at any scale; building the actual ring is
/// `build_divisor`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivisorPlan {
    /// One flag per tail prime; set means the prime divides alpha.
    pub sigma: Vec<bool>,
    /// q_0 times the switched-on tail primes.
    pub alpha: u64,
    pub phi_alpha: u64,
    /// Degree of each irreducible factor of phi_alpha mod p.
    pub r: u64,
    /// Number of factors, phi(alpha) / r.
    pub component_count: u64,
    /// Order q_1 ... q_e the ring's root must have.
    pub root_order: u64,
    /// Primes of lambda that divide no tail order; harmless but
    /// surfaced in reports.
    pub ignored: Vec<u64>,
}

/// Derive the divisor plan for a verified tuple: for each prime l of
/// lambda, switch on the first tail prime whose order of p is
/// divisible by l ("if no i is found, ignore this l"), then check the
/// profile's alpha bounds.
pub fn plan_divisor(t: &AdmissibleTuple, p: u64, profile: &ParamProfile) -> Result<DivisorPlan> {
    if !verify_tuple(t, p, profile) {
        return Err(Error::Mismatch(
            "tuple fails admissibility verification".into(),
        ));
    }
    let orders = order_table(t, p)?;
    let e = t.e();
    let mut sigma = vec![false; e];
    let mut ignored = Vec::new();
    for &(l, _) in &t.lambda_factors.factors {
        match orders.iter().position(|&(_, ord)| ord % l == 0) {
            Some(i) => sigma[i] = true,
            None => ignored.push(l),
        }
    }
    let mut alpha: u128 = t.q0() as u128;
    let mut phi: u128 = (t.q0() - 1) as u128;
    for (i, &(q, _)) in orders.iter().enumerate() {
        if sigma[i] {
            alpha *= q as u128;
            phi *= (q - 1) as u128;
        }
    }
    let (a_lo, a_hi) = profile.alpha_window(t.n);
    if alpha <= a_lo as u128 || alpha >= a_hi as u128 {
        return Err(Error::BoundViolated(format!(
            "alpha = {alpha} forced by sigma falls outside the {} profile window \
             ({a_lo}, {a_hi})",
            profile.name()
        )));
    }
    let alpha = alpha as u64;
    let phi = phi as u64;
    if !profile.totient_ok(alpha, phi, t.n) {
        return Err(Error::BoundViolated(format!(
            "phi(alpha)/alpha = {phi}/{alpha} is below the {} profile totient bound",
            profile.name()
        )));
    }
    // alpha is squarefree, so the splitting degree is the lcm of the
    // per-prime orders of p
    let q0_fact = factor_word(t.q0() - 1)?;
    let mut r = mult_order(p % t.q0(), t.q0(), &q0_fact)?;
    for (i, &(_, ord)) in orders.iter().enumerate() {
        if sigma[i] {
            r = lcm(r, ord)?;
        }
    }
    debug_assert_eq!(phi % r, 0);
    let root_order = t.root_order();
    // every tail prime must divide p^r - 1, switched on or not
    for &(q, _) in &orders {
        if crate::nt::pow_mod(p % q, r, q)? != 1 {
            return Err(Error::BoundViolated(format!(
                "{q} does not divide p^{r} - 1; the forced sigma cannot host the root"
            )));
        }
    }
    Ok(DivisorPlan {
        sigma,
        alpha,
        phi_alpha: phi,
        r,
        component_count: phi / r,
        root_order,
        ignored,
    })
}

/// A realized divisor: the plan plus the cyclotomic ring and its
/// principal root of unity.
#[derive(Clone)]
pub struct AdmissibleDivisor {
    tuple: AdmissibleTuple,
    p: u64,
    plan: DivisorPlan,
    ring: Arc<CycloRing>,
    omega: CycloElem,
}

impl AdmissibleDivisor {
    pub fn tuple(&self) -> &AdmissibleTuple {
        &self.tuple
    }

    pub fn field(&self) -> u64 {
        self.p
    }

    pub fn plan(&self) -> &DivisorPlan {
        &self.plan
    }

    pub fn alpha(&self) -> u64 {
        self.plan.alpha
    }

    /// Cofactor m = N / alpha, the length of the outer convolution.
    pub fn m(&self) -> u64 {
        self.tuple.n() / self.plan.alpha
    }

    pub fn ring(&self) -> &Arc<CycloRing> {
        &self.ring
    }

    /// Principal root of unity of order `plan().root_order`.
    pub fn omega(&self) -> &CycloElem {
        &self.omega
    }
}

impl std::fmt::Debug for AdmissibleDivisor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "AdmissibleDivisor(p={}, N={}, alpha={}, r={}, k={})",
            self.p,
            self.tuple.n(),
            self.plan.alpha,
            self.plan.r,
            self.plan.component_count
        )
    }
}

/// Build the divisor ring and its principal root for a verified tuple.
/// The seed steers only factorization internals; the plan itself is
/// deterministic.
pub fn build_divisor(
    t: &AdmissibleTuple,
    p: u64,
    profile: &ParamProfile,
    seed: u64,
) -> Result<AdmissibleDivisor> {
    let plan = plan_divisor(t, p, profile)?;
    let ring = CycloRing::cached(p, plan.alpha, seed)?;
    if ring.component_degree() != plan.r {
        return Err(Error::Mismatch(format!(
            "ring reports splitting degree {} but the plan computed {}",
            ring.component_degree(),
            plan.r
        )));
    }
    let pairs: Vec<(u64, u32)> = t.tail().iter().map(|&q| (q, 1)).collect();
    let order = FactoredInt::from_parts(plan.root_order, pairs)?;
    let omega = build_principal_root(&ring, &order)?;
    Ok(AdmissibleDivisor {
        tuple: t.clone(),
        p,
        plan,
        ring,
        omega,
    })
}

/// Structured summary of a tuple and its divisor plan, for reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivisorReport {
    pub primes: Vec<u64>,
    pub n: u64,
    pub lambda: u64,
    pub lambda_factors: Vec<(u64, u32)>,
    pub sigma: Vec<bool>,
    pub alpha: u64,
    pub r: u64,
    pub component_count: u64,
    pub ignored: Vec<u64>,
}

impl DivisorReport {
    pub fn new(t: &AdmissibleTuple, plan: &DivisorPlan) -> DivisorReport {
        DivisorReport {
            primes: t.primes().to_vec(),
            n: t.n(),
            lambda: t.lambda(),
            lambda_factors: t.lambda_factors().factors.clone(),
            sigma: plan.sigma.clone(),
            alpha: plan.alpha,
            r: plan.r,
            component_count: plan.component_count,
            ignored: plan.ignored.clone(),
        }
    }
}

/// Inverse of m modulo n for coprime pair; exposed for reuse by the
/// layout maps' tests.
pub fn coprime_inverse(m: u64, n: u64) -> Result<u64> {
    inv_mod(m % n, n)
}
