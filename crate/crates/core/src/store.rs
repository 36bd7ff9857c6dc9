//! The decision store: identifier to decision map with variable chains,
//! transactional constraint addition and an undo trail.

use std::collections::HashMap;
use std::rc::Rc;

use crate::supply::RawId;
use crate::value::{Constraint, Decision, LazyBinding};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Mark(usize);

enum Undo {
    Decision(RawId, Option<Decision>),
    LinkAdded,
    LinkSynced(usize),
}

/// Two variables bound to each other. Once their common class has a
/// concrete decision, their generator arguments must be bound pairwise.
#[derive(Clone, Debug)]
struct Link {
    a: RawId,
    b: RawId,
    synced: bool,
}

/// Result of adding constraints.
#[derive(Debug)]
pub enum Added {
    /// Applied. The returned lazy bindings must be forced and their
    /// constraints solved for the addition to be complete.
    Consistent(Vec<Rc<LazyBinding>>),
    Inconsistent,
}

impl Added {
    pub fn is_consistent(&self) -> bool {
        matches!(self, Added::Consistent(_))
    }
}

impl std::fmt::Debug for LazyBinding {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "LazyBinding")
    }
}

#[derive(Default)]
pub struct DecisionStore {
    map: HashMap<RawId, Decision>,
    trail: Vec<Undo>,
    links: Vec<Link>,
}

impl DecisionStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// No identifier has a decision.
    pub fn is_empty(&self) -> bool {
        self.map.is_empty() && self.links.is_empty()
    }

    pub fn mark(&self) -> Mark {
        Mark(self.trail.len())
    }

    pub fn undo_to(&mut self, m: Mark) {
        while self.trail.len() > m.0 {
            match self.trail.pop().unwrap() {
                Undo::Decision(id, None) => {
                    self.map.remove(&id);
                }
                Undo::Decision(id, Some(d)) => {
                    self.map.insert(id, d);
                }
                Undo::LinkAdded => {
                    self.links.pop();
                }
                Undo::LinkSynced(k) => self.links[k].synced = false,
            }
        }
    }

    /// Representative of the chain starting at `i`.
    pub fn find(&self, i: &RawId) -> RawId {
        let mut cur = i;
        while let Some(Decision::BindTo(j)) = self.map.get(cur) {
            cur = j;
        }
        cur.clone()
    }

    pub fn lookup(&self, i: &RawId) -> Decision {
        let r = self.find(i);
        self.map.get(&r).cloned().unwrap_or(Decision::NoDecision)
    }

    /// Records `d` at the representative of `i`. Callers check consistency
    /// first; `BindTo` here re-targets representatives so chains stay
    /// acyclic.
    pub fn set(&mut self, i: &RawId, d: Decision) {
        let r = self.find(i);
        if let Decision::BindTo(j) = &d {
            let rj = self.find(j);
            if rj == r {
                return;
            }
            self.put(r, Decision::BindTo(rj));
            return;
        }
        self.put(r, d);
    }

    fn put(&mut self, r: RawId, d: Decision) {
        let prev = if d == Decision::NoDecision {
            self.map.remove(&r)
        } else {
            self.map.insert(r.clone(), d)
        };
        self.trail.push(Undo::Decision(r, prev));
    }

    /// Applies all of `cs` or none of them.
    pub fn add_constraints(&mut self, cs: &[Constraint]) -> Added {
        let m = self.mark();
        let mut pending = Vec::new();
        for c in cs {
            if !self.add_one(c, &mut pending) {
                self.undo_to(m);
                return Added::Inconsistent;
            }
        }
        Added::Consistent(pending)
    }

    fn add_one(&mut self, c: &Constraint, pending: &mut Vec<Rc<LazyBinding>>) -> bool {
        let r = self.find(&c.id);
        let cur = self.map.get(&r).cloned().unwrap_or(Decision::NoDecision);
        match &c.decision {
            Decision::NoDecision => true,
            Decision::ChooseLeft | Decision::ChooseRight => match cur {
                Decision::NoDecision => {
                    self.put(r, c.decision.clone());
                    true
                }
                Decision::LazyBind(p) => {
                    self.put(r, c.decision.clone());
                    pending.push(p);
                    true
                }
                d => d == c.decision,
            },
            Decision::LazyBind(p) => match cur {
                Decision::NoDecision => {
                    self.put(r, c.decision.clone());
                    true
                }
                Decision::LazyBind(q) if Rc::ptr_eq(p, &q) => true,
                Decision::LazyBind(q) => {
                    // Both bindings are evaluated; their constraints then
                    // meet on the same variable.
                    self.put(r, Decision::NoDecision);
                    pending.push(q);
                    pending.push(p.clone());
                    true
                }
                _ => {
                    pending.push(p.clone());
                    true
                }
            },
            Decision::BindTo(j) => {
                let rj = self.find(j);
                if rj == r {
                    return true;
                }
                let other = self.map.get(&rj).cloned().unwrap_or(Decision::NoDecision);
                self.put(r.clone(), Decision::BindTo(rj.clone()));
                self.links.push(Link {
                    a: r,
                    b: rj.clone(),
                    synced: false,
                });
                self.trail.push(Undo::LinkAdded);
                match (cur, other) {
                    (Decision::NoDecision, _) => true,
                    (d, Decision::NoDecision) => {
                        self.put(rj, d);
                        true
                    }
                    (Decision::LazyBind(p), Decision::LazyBind(q)) => {
                        self.put(rj, Decision::NoDecision);
                        pending.push(q);
                        pending.push(p);
                        true
                    }
                    (Decision::LazyBind(p), _) => {
                        pending.push(p);
                        true
                    }
                    (d, Decision::LazyBind(q)) => {
                        self.put(rj, d);
                        pending.push(q);
                        true
                    }
                    (d, e) => d == e,
                }
            }
        }
    }

    /// Removes the lazy binding held by the representative of `i`, leaving
    /// it undecided, so that the binding's constraints can be solved.
    pub fn take_lazy(&mut self, i: &RawId) -> Option<Rc<LazyBinding>> {
        let r = self.find(i);
        match self.map.get(&r).cloned() {
            Some(Decision::LazyBind(p)) => {
                self.put(r, Decision::NoDecision);
                Some(p)
            }
            _ => None,
        }
    }

    /// Pairs of bound variables whose class has just received a concrete
    /// decision, with that decision.
    pub fn take_pending_syncs(&mut self) -> Vec<(RawId, RawId, Decision)> {
        let mut out = Vec::new();
        for k in 0..self.links.len() {
            if self.links[k].synced {
                continue;
            }
            let d = self.lookup(&self.links[k].a);
            if d.is_concrete() {
                self.links[k].synced = true;
                self.trail.push(Undo::LinkSynced(k));
                out.push((self.links[k].a.clone(), self.links[k].b.clone(), d));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(n: u64) -> RawId {
        RawId::from(n)
    }

    fn c(i: u64, d: Decision) -> Constraint {
        Constraint::new(id(i), d)
    }

    #[test]
    fn lookup_follows_chains() {
        let mut st = DecisionStore::new();
        assert_eq!(st.lookup(&id(5)), Decision::NoDecision);
        st.set(&id(1), Decision::BindTo(id(2)));
        assert_eq!(st.lookup(&id(1)), Decision::NoDecision);
        st.set(&id(2), Decision::ChooseLeft);
        assert_eq!(st.lookup(&id(1)), Decision::ChooseLeft);
    }

    #[test]
    fn undo_and_cycles() {
        let mut st = DecisionStore::new();
        let m = st.mark();
        st.set(&id(1), Decision::ChooseLeft);
        assert_eq!(st.lookup(&id(1)), Decision::ChooseLeft);
        st.undo_to(m);
        assert_eq!(st.lookup(&id(1)), Decision::NoDecision);
        st.set(&id(1), Decision::BindTo(id(2)));
        st.set(&id(2), Decision::BindTo(id(1)));
        assert_eq!(st.find(&id(1)), st.find(&id(2)));
        st.set(&id(2), Decision::ChooseRight);
        assert_eq!(st.lookup(&id(1)), Decision::ChooseRight);
    }

    #[test]
    fn add_is_transactional() {
        let mut st = DecisionStore::new();
        assert!(st.add_constraints(&[c(1, Decision::ChooseLeft)]).is_consistent());
        assert!(st.add_constraints(&[c(1, Decision::ChooseLeft)]).is_consistent());
        assert!(!st.add_constraints(&[c(2, Decision::ChooseLeft), c(1, Decision::ChooseRight)]).is_consistent());
        assert_eq!(st.lookup(&id(1)), Decision::ChooseLeft);
        assert_eq!(st.lookup(&id(2)), Decision::NoDecision);
    }

    #[test]
    fn bind_then_decide() {
        let mut st = DecisionStore::new();
        let m = st.mark();
        assert!(st
            .add_constraints(&[c(1, Decision::BindTo(id(2))), c(1, Decision::ChooseLeft)])
            .is_consistent());
        assert_eq!(st.lookup(&id(2)), Decision::ChooseLeft);
        st.undo_to(m);
        assert!(st.is_empty());
    }

    #[test]
    fn nested_undo_restores_empty() {
        let mut st = DecisionStore::new();
        let a = st.mark();
        st.add_constraints(&[c(1, Decision::ChooseLeft)]);
        let b = st.mark();
        st.add_constraints(&[c(3, Decision::BindTo(id(1)))]);
        st.undo_to(b);
        st.undo_to(a);
        assert!(st.is_empty());
    }

    #[test]
    fn bind_merges_conflicting_classes() {
        let mut st = DecisionStore::new();
        st.add_constraints(&[c(1, Decision::ChooseLeft), c(2, Decision::ChooseRight)]);
        assert!(!st.add_constraints(&[c(1, Decision::BindTo(id(2)))]).is_consistent());
        assert!(st.add_constraints(&[c(3, Decision::BindTo(id(1)))]).is_consistent());
        assert_eq!(st.lookup(&id(3)), Decision::ChooseLeft);
    }

    #[test]
    fn syncs_are_reported_once() {
        let mut st = DecisionStore::new();
        st.add_constraints(&[c(1, Decision::BindTo(id(2)))]);
        assert!(st.take_pending_syncs().is_empty());
        let m = st.mark();
        st.add_constraints(&[c(2, Decision::ChooseRight)]);
        assert_eq!(st.take_pending_syncs().len(), 1);
        assert!(st.take_pending_syncs().is_empty());
        st.undo_to(m);
        st.add_constraints(&[c(1, Decision::ChooseLeft)]);
        assert_eq!(st.take_pending_syncs().len(), 1);
    }
}
