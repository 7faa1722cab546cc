//! Execution context for the multiplication pipelines: profile, depth
//! budget, forced routing, and a recorded trace of the stages each call
//! walked through.
//!
//! The trace exists for two consumers. Tests assert structural facts
//! (a Crandall-Fagin cycle actually ran, a multiply recursed to depth
//! two, an admissible multiply issued exactly 2t + 1 transforms), and
//! the CLI embeds the events in its JSON run report. Events are plain
//! data; nothing in the pipelines reads them back.

use std::cell::RefCell;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::ParamProfile;

/// Route selection for the polynomial multiplier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolyRoute {
    /// Pick by operand size.
    Auto,
    /// Always pack into one big integer product.
    Basecase,
    /// Always run the admissible-ring pipeline.
    Admissible,
}

/// Route selection for the integer multiplier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntRoute {
    /// Pick by operand size.
    Auto,
    /// Always multiply directly.
    Basecase,
    /// Always run the Crandall-Fagin pipeline.
    Pipeline,
}

/// The path a polynomial multiply actually executed (as opposed to the
/// route it was asked to prefer).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolyPath {
    Basecase,
    Admissible,
    /// Basecase-shaped, but the packed product went through the
    /// supplied cyclic integer multiplier.
    Refined,
}

/// The path an integer multiply actually executed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntPath {
    Basecase,
    Pipeline,
}

/// One recorded pipeline step. Every event carries the recursion depth
/// of the call that emitted it; a child call runs at its parent's depth
/// plus one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "kebab-case")]
pub enum TraceEvent {
    /// A polynomial multiply call and the path it took.
    PolyCall {
        depth: u32,
        p: u64,
        r: u64,
        t: u64,
        path: PolyPath,
    },
    /// An integer multiply call and the path it took.
    IntCall { depth: u32, n: u64, path: IntPath },
    /// An admissible multiply committed to a ring decomposition.
    AdmissiblePlan {
        depth: u32,
        big_n: u64,
        alpha: u64,
        m: u64,
        dims: Vec<u64>,
    },
    /// One multidimensional transform pass (forward or inverse).
    Transform {
        depth: u32,
        dims: Vec<u64>,
        inverse: bool,
    },
    /// Integer pipeline: Crandall-Fagin split parameters.
    CfSplit {
        depth: u32,
        n: u64,
        big_n: u64,
        chunk_count: u64,
    },
    /// Integer pipeline: residue split across a prime set.
    CrtSplit { depth: u32, primes: Vec<u64> },
    /// A stage gave up and the call fell back to a direct method.
    Fallback {
        depth: u32,
        stage: String,
        reason: String,
    },
}

impl TraceEvent {
    pub fn depth(&self) -> u32 {
        match self {
            TraceEvent::PolyCall { depth, .. }
            | TraceEvent::IntCall { depth, .. }
            | TraceEvent::AdmissiblePlan { depth, .. }
            | TraceEvent::Transform { depth, .. }
            | TraceEvent::CfSplit { depth, .. }
            | TraceEvent::CrtSplit { depth, .. }
            | TraceEvent::Fallback { depth, .. } => *depth,
        }
    }
}

/// Shared state for one top-level multiplication: the parameter
/// profile, routing overrides, a recursion depth budget, a seed for
/// anything randomized downstream, and the event log.
///
/// Not thread-safe by design; a context belongs to one call tree.
pub struct Ctx {
    profile: ParamProfile,
    poly_route: PolyRoute,
    int_route: IntRoute,
    depth_budget: u32,
    seed: u64,
    trace: RefCell<Vec<TraceEvent>>,
}

/// Recursion depth cap when the caller does not set one. Paper-scale
/// inputs would need three or four levels; desk-scale inputs never
/// legitimately pass two, so anything deeper is a runaway.
pub const DEFAULT_DEPTH_BUDGET: u32 = 8;

impl Ctx {
    pub fn new(profile: ParamProfile) -> Ctx {
        Ctx {
            profile,
            poly_route: PolyRoute::Auto,
            int_route: IntRoute::Auto,
            depth_budget: DEFAULT_DEPTH_BUDGET,
            seed: 0,
            trace: RefCell::new(Vec::new()),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Ctx {
        self.seed = seed;
        self
    }

    pub fn with_depth_budget(mut self, budget: u32) -> Ctx {
        self.depth_budget = budget;
        self
    }

    pub fn with_poly_route(mut self, route: PolyRoute) -> Ctx {
        self.poly_route = route;
        self
    }

    pub fn with_int_route(mut self, route: IntRoute) -> Ctx {
        self.int_route = route;
        self
    }

    pub fn profile(&self) -> &ParamProfile {
        &self.profile
    }

    pub fn poly_route(&self) -> PolyRoute {
        self.poly_route
    }

    pub fn int_route(&self) -> IntRoute {
        self.int_route
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn depth_budget(&self) -> u32 {
        self.depth_budget
    }

    /// Errors when a call would run below the depth budget.
    pub fn ensure_depth(&self, depth: u32) -> Result<()> {
        if depth > self.depth_budget {
            return Err(Error::BudgetExceeded(format!(
                "recursion depth {depth} exceeds budget {}",
                self.depth_budget
            )));
        }
        Ok(())
    }

    pub fn record(&self, event: TraceEvent) {
        self.trace.borrow_mut().push(event);
    }

    /// Snapshot of the events recorded so far.
    pub fn events(&self) -> Vec<TraceEvent> {
        self.trace.borrow().clone()
    }

    /// Drains the log, leaving the context reusable.
    pub fn take_events(&self) -> Vec<TraceEvent> {
        std::mem::take(&mut *self.trace.borrow_mut())
    }
}

/// Contraction check for integer recursion: every pipeline-path
/// integer call that runs below another integer call must be less than
/// half its enclosing call's size (the enclosing call is the nearest
/// preceding `IntCall` at a strictly shallower depth). Basecase leaves
/// are exempt; they multiply directly and never re-enter the pipeline.
pub fn int_calls_contract(events: &[TraceEvent]) -> bool {
    for (i, e) in events.iter().enumerate() {
        let TraceEvent::IntCall {
            depth,
            n,
            path: IntPath::Pipeline,
        } = e
        else {
            continue;
        };
        let parent = events[..i].iter().rev().find_map(|prev| match prev {
            TraceEvent::IntCall {
                depth: pd, n: pn, ..
            } if pd < depth => Some(*pn),
            _ => None,
        });
        if let Some(pn) = parent {
            if n.saturating_mul(2) >= pn {
                return false;
            }
        }
    }
    true
}

/// Depth consistency for a depth-first event stream: the first event
/// sits at the base depth, and no event is more than one level deeper
/// than its predecessor (a frame at depth d can only be entered from a
/// frame at depth d - 1).
pub fn depths_consistent(events: &[TraceEvent], base: u32) -> bool {
    let mut prev = match events.first() {
        Some(e) => {
            if e.depth() != base {
                return false;
            }
            e.depth()
        }
        None => return true,
    };
    for e in &events[1..] {
        if e.depth() > prev + 1 {
            return false;
        }
        prev = e.depth();
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::ParamProfile;

    #[test]
    fn recording_and_draining() {
        let ctx = Ctx::new(ParamProfile::desk()).with_seed(9);
        ctx.record(TraceEvent::IntCall {
            depth: 0,
            n: 1024,
            path: IntPath::Basecase,
        });
        ctx.record(TraceEvent::CfSplit {
            depth: 0,
            n: 1024,
            big_n: 64,
            chunk_count: 64,
        });
        assert_eq!(ctx.events().len(), 2);
        let drained = ctx.take_events();
        assert_eq!(drained.len(), 2);
        assert!(ctx.events().is_empty());
        assert_eq!(drained[1].depth(), 0);
    }

    #[test]
    fn depth_budget_enforced() {
        let ctx = Ctx::new(ParamProfile::desk()).with_depth_budget(2);
        assert!(ctx.ensure_depth(2).is_ok());
        assert!(matches!(
            ctx.ensure_depth(3),
            Err(crate::error::Error::BudgetExceeded(_))
        ));
    }

    #[test]
    fn depth_consistency_rule() {
        let ev = |d| TraceEvent::Transform {
            depth: d,
            dims: vec![23],
            inverse: false,
        };
        assert!(depths_consistent(&[], 0));
        assert!(depths_consistent(&[ev(0), ev(1), ev(1), ev(0)], 0));
        assert!(!depths_consistent(&[ev(1)], 0));
        assert!(!depths_consistent(&[ev(0), ev(2)], 0));
    }

    #[test]
    fn contraction_rule_on_nested_integer_calls() {
        let call = |d, n, path| TraceEvent::IntCall { depth: d, n, path };
        // No nesting at all: trivially fine.
        assert!(int_calls_contract(&[call(0, 1024, IntPath::Pipeline)]));
        // Nested pipeline call under half the parent size passes.
        assert!(int_calls_contract(&[
            call(0, 1024, IntPath::Pipeline),
            call(3, 500, IntPath::Pipeline),
        ]));
        // Exactly half fails the strict bound.
        assert!(!int_calls_contract(&[
            call(0, 1024, IntPath::Pipeline),
            call(3, 512, IntPath::Pipeline),
        ]));
        // Basecase leaves of any size are exempt.
        assert!(int_calls_contract(&[
            call(0, 1024, IntPath::Pipeline),
            call(3, 902, IntPath::Basecase),
        ]));
        // The nearest shallower call is the parent, not the first one.
        assert!(int_calls_contract(&[
            call(0, 4096, IntPath::Pipeline),
            call(3, 1024, IntPath::Pipeline),
            call(6, 500, IntPath::Pipeline),
        ]));
        assert!(!int_calls_contract(&[
            call(0, 4096, IntPath::Pipeline),
            call(3, 1024, IntPath::Pipeline),
            call(6, 512, IntPath::Pipeline),
        ]));
    }

    #[test]
    fn events_serialize_round_trip() {
        let events = vec![
            TraceEvent::PolyCall {
                depth: 0,
                p: 3,
                r: 100,
                t: 1,
                path: PolyPath::Admissible,
            },
            TraceEvent::Fallback {
                depth: 1,
                stage: "admissible-search".into(),
                reason: "window exhausted".into(),
            },
        ];
        let json = serde_json::to_string(&events).unwrap();
        assert!(json.contains("\"event\":\"poly-call\""));
        assert!(json.contains("\"path\":\"admissible\""));
        let back: Vec<TraceEvent> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, events);
    }
}
