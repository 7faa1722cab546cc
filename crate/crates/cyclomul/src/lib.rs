//! Integer and polynomial multiplication over cyclotomic coefficient
//! rings.
//!
//! The crate builds up from arbitrary-precision and word-size number
//! theory through polynomial and cyclotomic-ring arithmetic to two
//! pipelines: a polynomial multiplier for F_p[X] and a cyclic integer
//! multiplier for Z/(2^n - 1)Z. Both reduce large products to many
//! small ones through DFTs over rings R = F_p[Y]/phi_alpha(Y) chosen by
//! an admissible-parameter search, and both can recurse into each
//! other. Brute-force oracles with no shared code back every path in
//! the test suites.

pub mod admissible;
pub mod bigint;
pub mod cyclo_ring;
pub mod dft;
pub mod error;
pub mod fp_poly;
pub mod layout;
pub mod nt;
pub mod oracle;
pub mod pipeline_int;
pub mod pipeline_poly;
pub mod profile;
pub mod trace;

pub use admissible::{
    build_divisor, find_admissible, order_table, verify_tuple, AdmissibleDivisor, AdmissibleTuple,
};
pub use bigint::{big_mul, cyclic_mul, mod_mersenne, BigUint, CyclicInt};
pub use error::{Error, Result};
pub use pipeline_int::{
    build_theta, config_for, crandall_fagin_recombine, crandall_fagin_split, integer_multiply,
    select_primes, theta_power_table, IntPipelineConfig,
};
pub use pipeline_poly::{
    polynomial_multiply, refined_admissible_multiply, refined_polynomial_multiply,
    CyclicPolyBatch, IntMultiplier,
};
pub use profile::{ParamProfile, ProfileKind};
pub use nt::{
    crt_combine, factor_word, is_prime, is_prime_wide, is_squarefree, mult_order,
    pow_mod, sieve_primes, FactoredInt,
};
pub use trace::{
    depths_consistent, int_calls_contract, Ctx, IntPath, IntRoute, PolyPath, PolyRoute,
    TraceEvent, DEFAULT_DEPTH_BUDGET,
};
