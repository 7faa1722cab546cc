//! Parameter profiles: every threshold the algorithms branch on.
//!
//! The `paper` preset encodes the original asymptotic inequalities,
//! which only become satisfiable at astronomically large sizes. The
//! `desk` preset shrinks the size-driven bounds to ranges testable in
//! seconds while keeping every correctness-critical condition intact:
//! primes stay distinct, q_i - 1 stays squarefree, p never divides N,
//! N > p^2 still holds, and roots of unity of the required orders
//! still exist. Individual knobs can be overridden by name, and the
//! effective values echo into run reports.

use crate::error::{Error, Result};
use crate::nt::lg;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    Paper,
    Desk,
}

/// Thresholds and windows, preset plus overrides.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamProfile {
    kind: ProfileKind,
    #[serde(default)]
    overrides: BTreeMap<String, u64>,
}

const DESK_Q_LO: u64 = 17;
const DESK_Q_HI: u64 = 1 << 14;
const DESK_LAMBDA_MAX: u64 = 1 << 20;
const DESK_ALPHA_HI: u64 = 1 << 20;
const DESK_W: u64 = 2;
const DESK_INT_BASECASE: u64 = 512;
const DESK_REFINED_MIN: u64 = 512;
const DESK_PRIME_FLOOR: u64 = 2;
/// Smallest target the desk search can serve: the two smallest primes
/// above DESK_Q_LO are 19 and 23, so no admissible product is below
/// 437, and the window (n, 2n] first contains 437 at n = 219.
const DESK_MIN_TARGET: u64 = 219;

const OVERRIDE_KEYS: &[&str] = &[
    "q_lo",
    "q_hi",
    "lambda_max",
    "alpha_hi",
    "w",
    "int_basecase",
    "refined_min",
    "prime_floor",
];

/// 2^e saturating at u64::MAX; the paper-preset exponents overflow
/// any machine word long before the inequalities become binding.
fn pow2_sat(e: u64) -> u64 {
    if e >= 64 {
        u64::MAX
    } else {
        1u64 << e
    }
}

fn lg_lg(n: u64) -> u64 {
    lg(lg(n))
}

impl ParamProfile {
    pub fn paper() -> ParamProfile {
        ParamProfile {
            kind: ProfileKind::Paper,
            overrides: BTreeMap::new(),
        }
    }

    pub fn desk() -> ParamProfile {
        ParamProfile {
            kind: ProfileKind::Desk,
            overrides: BTreeMap::new(),
        }
    }

    pub fn from_name(name: &str) -> Result<ParamProfile> {
        match name {
            "paper" => Ok(ParamProfile::paper()),
            "desk" => Ok(ParamProfile::desk()),
            other => Err(Error::Parse(format!(
                "unknown profile {other:?}, expected \"paper\" or \"desk\""
            ))),
        }
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            ProfileKind::Paper => "paper",
            ProfileKind::Desk => "desk",
        }
    }

    /// Override one knob by name. Only desk-adjustable keys are
    /// accepted; anything else is a usage error.
    pub fn set(&mut self, key: &str, value: u64) -> Result<()> {
        if !OVERRIDE_KEYS.contains(&key) {
            return Err(Error::Parse(format!(
                "unknown profile key {key:?}; known keys: {}",
                OVERRIDE_KEYS.join(", ")
            )));
        }
        if value == 0 {
            return Err(Error::Parse(format!("profile key {key:?} must be positive")));
        }
        self.overrides.insert(key.to_string(), value);
        Ok(())
    }

    pub fn overrides(&self) -> &BTreeMap<String, u64> {
        &self.overrides
    }

    fn knob(&self, key: &str, preset: u64) -> u64 {
        self.overrides.get(key).copied().unwrap_or(preset)
    }

    /// Exclusive window (q_lo, q_hi) that every tuple prime must lie
    /// in, as a function of the product size being targeted.
    pub fn q_window(&self, target: u64) -> (u64, u64) {
        match self.kind {
            ProfileKind::Paper => {
                let l = lg(target);
                (l * l * l, pow2_sat(lg_lg(target) * lg_lg(target)))
            }
            ProfileKind::Desk => (
                self.knob("q_lo", DESK_Q_LO),
                self.knob("q_hi", DESK_Q_HI),
            ),
        }
    }

    /// Upper bound for lambda = lcm(q_1 - 1, ..., q_e - 1).
    pub fn lambda_max(&self, target: u64) -> u64 {
        match self.kind {
            ProfileKind::Paper => pow2_sat(lg_lg(target) * lg_lg(target)),
            ProfileKind::Desk => self.knob("lambda_max", DESK_LAMBDA_MAX),
        }
    }

    /// Interval (lo, hi] the product N must land in, given target n.
    pub fn target_interval(&self, n: u64) -> (u64, u64) {
        match self.kind {
            ProfileKind::Paper => (n, n + n / lg(n)),
            ProfileKind::Desk => (n, n.saturating_mul(2)),
        }
    }

    /// Smallest target n the search accepts.
    pub fn min_target(&self) -> u64 {
        match self.kind {
            ProfileKind::Paper => 4,
            ProfileKind::Desk => DESK_MIN_TARGET,
        }
    }

    /// Exclusive window (alpha_lo, alpha_hi) for divisor sizes.
    pub fn alpha_window(&self, target: u64) -> (u64, u64) {
        match self.kind {
            ProfileKind::Paper => {
                let e = lg_lg(target);
                (lg(target), pow2_sat(e * e * e * e))
            }
            ProfileKind::Desk => (lg(target), self.knob("alpha_hi", DESK_ALPHA_HI)),
        }
    }

    /// Totient density requirement on a divisor: paper wants
    /// phi(alpha) > (1 - 1/lg N) alpha, desk settles for 3/4.
    pub fn totient_ok(&self, alpha: u64, phi: u64, target: u64) -> bool {
        match self.kind {
            ProfileKind::Paper => {
                let l = lg(target) as u128;
                (phi as u128) * l > (l - 1) * alpha as u128
            }
            ProfileKind::Desk => 4 * phi as u128 > 3 * alpha as u128,
        }
    }

    /// Number of primes grouped into one axis of the multidimensional
    /// convolution.
    pub fn group_width(&self, target: u64) -> usize {
        match self.kind {
            ProfileKind::Paper => {
                let e = lg_lg(target);
                ((2 * e * e * e * e * e) / 5).max(1) as usize
            }
            ProfileKind::Desk => self.knob("w", DESK_W).max(1) as usize,
        }
    }

    /// True when the polynomial pipeline should take the packing
    /// basecase instead of the admissible path: r <= p^2.
    pub fn kronecker_switch(&self, r: u64, p: u64) -> bool {
        r as u128 <= (p as u128) * (p as u128)
    }

    /// True when a basecase-bound product is big enough to route
    /// through the cyclic integer multiplier instead.
    pub fn refined_range(&self, r: u64, p: u64) -> bool {
        match self.kind {
            ProfileKind::Paper => {
                let llp = lg_lg(p);
                let lr = lg(r);
                llp * llp < lr && lr * lr < lg(p)
            }
            ProfileKind::Desk => {
                let b = 2 * lg(p) + lg(r);
                r.saturating_mul(b) >= self.knob("refined_min", DESK_REFINED_MIN)
            }
        }
    }

    /// True when the integer pipeline should just multiply directly.
    pub fn int_basecase(&self, n: u64) -> bool {
        match self.kind {
            ProfileKind::Paper => n < 1 << 20,
            ProfileKind::Desk => n < self.knob("int_basecase", DESK_INT_BASECASE),
        }
    }

    /// Floor above which the integer pipeline picks its small primes.
    /// The paper takes primes above half the squared size logarithm;
    /// at desk sizes that floor would exceed the tuple primes and
    /// break q_i > p, so the desk preset starts just above 2.
    pub fn int_prime_floor(&self, n: u64) -> u64 {
        match self.kind {
            ProfileKind::Paper => lg(n) * lg(n) / 2,
            ProfileKind::Desk => self.knob("prime_floor", DESK_PRIME_FLOOR),
        }
    }

    /// Every effective value at a given target size, for reports.
    pub fn echo(&self, n: u64) -> BTreeMap<String, u64> {
        let mut m = BTreeMap::new();
        let (qlo, qhi) = self.q_window(n);
        let (alo, ahi) = self.alpha_window(n);
        let (tlo, thi) = self.target_interval(n);
        m.insert("q_lo".into(), qlo);
        m.insert("q_hi".into(), qhi);
        m.insert("lambda_max".into(), self.lambda_max(n));
        m.insert("alpha_lo".into(), alo);
        m.insert("alpha_hi".into(), ahi);
        m.insert("target_lo".into(), tlo);
        m.insert("target_hi".into(), thi);
        m.insert("w".into(), self.group_width(n) as u64);
        m.insert("min_target".into(), self.min_target());
        m.insert("prime_floor".into(), self.int_prime_floor(n));
        m.insert(
            "int_basecase".into(),
            match self.kind {
                ProfileKind::Paper => 1 << 20,
                ProfileKind::Desk => self.knob("int_basecase", DESK_INT_BASECASE),
            },
        );
        m.insert(
            "refined_min".into(),
            match self.kind {
                ProfileKind::Paper => 0,
                ProfileKind::Desk => self.knob("refined_min", DESK_REFINED_MIN),
            },
        );
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_preset_formulas() {
        let p = ParamProfile::paper();
        // n = 10^6: lg n = 20, lg lg n = 5
        assert_eq!(p.q_window(1_000_000), (8000, 1 << 25));
        assert_eq!(p.lambda_max(1_000_000), 1 << 25);
        let (alo, ahi) = p.alpha_window(1_000_000);
        assert_eq!(alo, 20);
        assert_eq!(ahi, u64::MAX, "5^4 = 625 bits saturates");
        assert_eq!(p.target_interval(1_000_000), (1_000_000, 1_050_000));
        // phi > (1 - 1/20) alpha
        assert!(p.totient_ok(100, 96, 1_000_000));
        assert!(!p.totient_ok(100, 95, 1_000_000));
        assert_eq!(p.group_width(1_000_000), 2 * 5u64.pow(5) as usize / 5);
    }

    #[test]
    fn desk_preset_constants() {
        let d = ParamProfile::desk();
        assert_eq!(d.q_window(123456), (17, 16384));
        assert_eq!(d.lambda_max(123456), 1 << 20);
        assert_eq!(d.target_interval(1000), (1000, 2000));
        assert_eq!(d.alpha_window(1000), (10, 1 << 20));
        assert!(d.totient_ok(4, 4, 1000));
        assert!(!d.totient_ok(4, 3, 1000), "3/4 is not strictly above 3/4");
        assert_eq!(d.group_width(1000), 2);
        assert!(d.int_basecase(511));
        assert!(!d.int_basecase(512));
    }

    #[test]
    fn switch_predicates() {
        let d = ParamProfile::desk();
        assert!(d.kronecker_switch(9, 3));
        assert!(!d.kronecker_switch(10, 3));
        // r (2 lg p + lg r): p = 101 (lg = 7), r = 32 (lg = 5): 32*19 = 608
        assert!(d.refined_range(32, 101));
        assert!(!d.refined_range(16, 101), "16*19 = 304 < 512");
    }

    #[test]
    fn overrides_and_echo() {
        let mut d = ParamProfile::desk();
        d.set("q_hi", 4096).unwrap();
        assert_eq!(d.q_window(0), (17, 4096));
        assert!(d.set("bogus", 1).is_err());
        assert!(d.set("q_lo", 0).is_err());
        let echo = d.echo(1000);
        assert_eq!(echo["q_hi"], 4096);
        assert_eq!(echo["w"], 2);
        // serde round trip
        let s = serde_json::to_string(&d).unwrap();
        let back: ParamProfile = serde_json::from_str(&s).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn profile_names() {
        assert_eq!(ParamProfile::from_name("paper").unwrap().name(), "paper");
        assert_eq!(ParamProfile::from_name("desk").unwrap().name(), "desk");
        assert!(ParamProfile::from_name("fast").is_err());
    }
}
