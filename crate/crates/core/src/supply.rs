//! Identifier supplies.
//!
//! A supply denotes an infinite set of identifiers. It hands out one
//! identifier of its own and splits the remainder into two disjoint
//! sub-supplies. The engine is parametric over the concrete numbering:
//! [`IntegerSupply`] is the binary doubling scheme (`left = 2n`,
//! `right = 2n + 1`) that makes identifier traces reproducible, and
//! [`CounterSupply`] numbers identifiers in the order they are requested.

use std::cell::{Cell, OnceCell};
use std::fmt;
use std::rc::Rc;

use num_bigint::BigUint;
use num_traits::One;

/// A raw choice identifier.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RawId(BigUint);

impl RawId {
    pub fn new(n: impl Into<BigUint>) -> Self {
        RawId(n.into())
    }

    pub fn value(&self) -> &BigUint {
        &self.0
    }
}

impl From<u64> for RawId {
    fn from(n: u64) -> Self {
        RawId(BigUint::from(n))
    }
}

impl fmt::Display for RawId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for RawId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One step into a supply tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Dir {
    Left,
    Right,
}

/// A node of a supply tree.
pub trait SupplyNode {
    fn this_id(&self) -> RawId;
    fn left(&self) -> Supply;
    fn right(&self) -> Supply;
}

/// Shared handle to an identifier supply.
#[derive(Clone)]
pub struct Supply(Rc<dyn SupplyNode>);

impl Supply {
    pub fn from_node(node: impl SupplyNode + 'static) -> Self {
        Supply(Rc::new(node))
    }

    pub fn this_id(&self) -> RawId {
        self.0.this_id()
    }

    pub fn left(&self) -> Supply {
        self.0.left()
    }

    pub fn right(&self) -> Supply {
        self.0.right()
    }

    pub fn split(&self, dir: Dir) -> Supply {
        match dir {
            Dir::Left => self.left(),
            Dir::Right => self.right(),
        }
    }

    /// Walks a path of splits from this supply.
    pub fn follow(&self, path: &[Dir]) -> Supply {
        path.iter().fold(self.clone(), |s, d| s.split(*d))
    }
}

impl fmt::Debug for Supply {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Supply({})", self.this_id())
    }
}

/// The unbounded-integer supply: `n` denotes `{n} ∪ ids(2n) ∪ ids(2n+1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegerSupply(pub BigUint);

impl IntegerSupply {
    pub fn root() -> Supply {
        Supply::from_node(IntegerSupply(BigUint::one()))
    }
}

impl SupplyNode for IntegerSupply {
    fn this_id(&self) -> RawId {
        RawId(self.0.clone())
    }

    fn left(&self) -> Supply {
        Supply::from_node(IntegerSupply(&self.0 << 1u32))
    }

    fn right(&self) -> Supply {
        Supply::from_node(IntegerSupply((&self.0 << 1u32) + 1u32))
    }
}

/// Supply that numbers identifiers by first request, from a shared counter.
///
/// Sub-supplies are created on demand and memoized, so asking the same node
/// twice yields the same identifier.
pub struct CounterSupply {
    counter: Rc<Cell<u64>>,
    id: OnceCell<RawId>,
    left: OnceCell<Supply>,
    right: OnceCell<Supply>,
}

impl CounterSupply {
    pub fn root() -> Supply {
        Supply::from_node(Self::with_counter(Rc::new(Cell::new(1))))
    }

    fn with_counter(counter: Rc<Cell<u64>>) -> Self {
        CounterSupply {
            counter,
            id: OnceCell::new(),
            left: OnceCell::new(),
            right: OnceCell::new(),
        }
    }
}

impl SupplyNode for CounterSupply {
    fn this_id(&self) -> RawId {
        self.id
            .get_or_init(|| {
                let n = self.counter.get();
                self.counter.set(n + 1);
                RawId::from(n)
            })
            .clone()
    }

    fn left(&self) -> Supply {
        self.left
            .get_or_init(|| Supply::from_node(Self::with_counter(self.counter.clone())))
            .clone()
    }

    fn right(&self) -> Supply {
        self.right
            .get_or_init(|| Supply::from_node(Self::with_counter(self.counter.clone())))
            .clone()
    }
}

/// Named supply models selectable at runtime.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SupplyModel {
    #[default]
    Integer,
    Counter,
}

impl SupplyModel {
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "integer" => Some(SupplyModel::Integer),
            "counter" => Some(SupplyModel::Counter),
            _ => None,
        }
    }

    pub fn init(self) -> Supply {
        match self {
            SupplyModel::Integer => IntegerSupply::root(),
            SupplyModel::Counter => CounterSupply::root(),
        }
    }
}

/// The root supply of the reference model.
pub fn init_supply() -> Supply {
    IntegerSupply::root()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn ids_to_depth(s: &Supply, depth: u32, out: &mut Vec<RawId>) {
        out.push(s.this_id());
        if depth > 0 {
            ids_to_depth(&s.left(), depth - 1, out);
            ids_to_depth(&s.right(), depth - 1, out);
        }
    }

    #[test]
    fn root_and_splits() {
        let s = init_supply();
        assert_eq!(s.this_id(), RawId::from(1));
        assert_eq!(s.left().this_id(), RawId::from(2));
        assert_eq!(s.right().this_id(), RawId::from(3));
        assert_eq!(init_supply().this_id(), init_supply().this_id());
        assert_eq!(s.follow(&[Dir::Right, Dir::Left]).this_id(), RawId::from(6));
    }

    #[test]
    fn injective_to_depth_12() {
        for root in [IntegerSupply::root(), CounterSupply::root()] {
            let mut ids = Vec::new();
            ids_to_depth(&root, 12, &mut ids);
            let set: HashSet<_> = ids.iter().cloned().collect();
            assert_eq!(set.len(), ids.len());
        }
    }

    #[test]
    fn random_supplies_split_disjointly() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..1000 {
            let path: Vec<Dir> = (0..rng.gen_range(0..20))
                .map(|_| if rng.gen() { Dir::Left } else { Dir::Right })
                .collect();
            let s = init_supply().follow(&path);
            let (mut l, mut r) = (Vec::new(), Vec::new());
            ids_to_depth(&s.left(), 10, &mut l);
            ids_to_depth(&s.right(), 10, &mut r);
            let l: HashSet<_> = l.into_iter().collect();
            let r: HashSet<_> = r.into_iter().collect();
            assert!(l.is_disjoint(&r));
            assert!(!l.contains(&s.this_id()) && !r.contains(&s.this_id()));
        }
    }

    #[test]
    fn counter_supply_is_stable() {
        let s = CounterSupply::root();
        let a = s.left().this_id();
        assert_eq!(s.left().this_id(), a);
        assert_ne!(s.right().this_id(), a);
    }
}
