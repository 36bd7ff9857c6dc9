//! A persistent-map model of the decision store, and random operation
//! sequences checked against the real store.

use std::collections::BTreeMap;

use rand::Rng;

use flx::store::{DecisionStore, Mark};
use flx::supply::RawId;
use flx::value::{Constraint, Decision};

pub const IDS: u64 = 6;

#[derive(Clone, Copy, Debug)]
pub enum MDec {
    Left,
    Right,
    Bind(u64),
}

#[derive(Clone, Debug)]
pub enum Op {
    Add(Vec<(u64, MDec)>),
    Mark,
    Undo,
}

/// Variables are grouped by a class label; decisions belong to classes.
#[derive(Clone, Default)]
pub struct Model {
    class: BTreeMap<u64, u64>,
    dec: BTreeMap<u64, bool>,
}

impl Model {
    fn label(&self, i: u64) -> u64 {
        *self.class.get(&i).unwrap_or(&i)
    }

    pub fn lookup(&self, i: u64) -> Option<bool> {
        self.dec.get(&self.label(i)).copied()
    }

    pub fn add(&mut self, cs: &[(u64, MDec)]) -> bool {
        let mut next = self.clone();
        if cs.iter().all(|&(i, d)| next.add_one(i, d)) {
            *self = next;
            true
        } else {
            false
        }
    }

    fn add_one(&mut self, i: u64, d: MDec) -> bool {
        let li = self.label(i);
        match d {
            MDec::Left | MDec::Right => {
                let left = matches!(d, MDec::Left);
                *self.dec.entry(li).or_insert(left) == left
            }
            MDec::Bind(j) => {
                let lj = self.label(j);
                if li == lj {
                    return true;
                }
                for k in 1..=IDS {
                    if self.label(k) == li {
                        self.class.insert(k, lj);
                    }
                }
                match (self.dec.remove(&li), self.dec.get(&lj).copied()) {
                    (Some(a), Some(b)) => a == b,
                    (Some(a), None) => {
                        self.dec.insert(lj, a);
                        true
                    }
                    _ => true,
                }
            }
        }
    }
}

pub fn random_ops(rng: &mut impl Rng, len: usize) -> Vec<Op> {
    (0..len)
        .map(|_| match rng.gen_range(0..6) {
            0 => Op::Mark,
            1 => Op::Undo,
            _ => Op::Add(
                (0..rng.gen_range(1..=3))
                    .map(|_| {
                        let i = rng.gen_range(1..=IDS);
                        let d = match rng.gen_range(0..3) {
                            0 => MDec::Left,
                            1 => MDec::Right,
                            _ => MDec::Bind(rng.gen_range(1..=IDS)),
                        };
                        (i, d)
                    })
                    .collect(),
            ),
        })
        .collect()
}

fn decision(d: MDec) -> Decision {
    match d {
        MDec::Left => Decision::ChooseLeft,
        MDec::Right => Decision::ChooseRight,
        MDec::Bind(j) => Decision::BindTo(RawId::from(j)),
    }
}

/// Runs `ops` on both; returns a description of the first divergence.
pub fn check(ops: &[Op]) -> Result<(), String> {
    let mut st = DecisionStore::new();
    let base = st.mark();
    let mut model = Model::default();
    let mut saved: Vec<(Mark, Model)> = Vec::new();
    for (k, op) in ops.iter().enumerate() {
        match op {
            Op::Mark => saved.push((st.mark(), model.clone())),
            Op::Undo => {
                if let Some((m, old)) = saved.pop() {
                    st.undo_to(m);
                    model = old;
                }
            }
            Op::Add(cs) => {
                let real: Vec<Constraint> = cs
                    .iter()
                    .map(|&(i, d)| Constraint::new(RawId::from(i), decision(d)))
                    .collect();
                let a = st.add_constraints(&real).is_consistent();
                let b = model.add(cs);
                if a != b {
                    return Err(format!("op {k} {op:?}: store says {a}, model says {b}"));
                }
            }
        }
        for i in 1..=IDS {
            let got = match st.lookup(&RawId::from(i)) {
                Decision::NoDecision => None,
                Decision::ChooseLeft => Some(true),
                Decision::ChooseRight => Some(false),
                d => return Err(format!("op {k}: lookup({i}) = {d:?}")),
            };
            if got != model.lookup(i) {
                return Err(format!("op {k} {op:?}: lookup({i}) = {got:?}, model {:?}", model.lookup(i)));
            }
        }
    }
    st.undo_to(base);
    if !st.is_empty() {
        return Err("store not empty after undoing everything".into());
    }
    Ok(())
}
