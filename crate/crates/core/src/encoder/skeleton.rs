use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::tree::{Position, Tree};

/// A prefix-closed set of positions, indexed in pre-order.
#[derive(Clone, Debug)]
pub struct Skeleton {
    positions: Vec<Position>,
    index: HashMap<Position, usize>,
    children: Vec<Vec<Option<usize>>>,
    parent: Vec<Option<usize>>,
    arity: usize,
}

impl Skeleton {
    /// All words over `0..d` of length at most `h`.
    pub fn full(d: usize, h: usize, cap: usize) -> Result<Skeleton> {
        let mut size: usize = 0;
        let mut level: usize = 1;
        for _ in 0..=h {
            size = size.saturating_add(level);
            level = level.saturating_mul(d);
            if d == 0 {
                break;
            }
        }
        if size > cap {
            return Err(Error::InvalidInstance(format!(
                "skeleton with degree {d} and depth {h} has {size} nodes, above the cap of {cap}"
            )));
        }
        let mut set = BTreeSet::new();
        let mut frontier = vec![Position::root()];
        set.insert(Position::root());
        for _ in 0..h {
            let mut next = Vec::new();
            for p in &frontier {
                for c in 0..d {
                    let q = p.child(c);
                    set.insert(q.clone());
                    next.push(q);
                }
            }
            frontier = next;
        }
        Ok(Skeleton::from_set(set))
    }

    /// Positions of every subtree of the given trees, each re-rooted.
    pub fn observed<'a>(trees: impl IntoIterator<Item = &'a Tree>, cap: usize) -> Result<Skeleton> {
        let mut set = BTreeSet::new();
        let mut seen = std::collections::HashSet::new();
        for t in trees {
            for (_, sub) in t.nodes() {
                if seen.insert(sub.clone()) {
                    set.extend(sub.positions());
                }
            }
        }
        if set.len() > cap {
            return Err(Error::InvalidInstance(format!(
                "skeleton has {} nodes, above the cap of {cap}",
                set.len()
            )));
        }
        Ok(Skeleton::from_set(set))
    }

    fn from_set(set: BTreeSet<Position>) -> Skeleton {
        let positions: Vec<Position> = set.into_iter().collect();
        let index: HashMap<Position, usize> =
            positions.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
        let arity = positions.iter().filter_map(|p| p.last()).max().map_or(0, |m| m + 1);
        let mut children = vec![vec![None; arity]; positions.len()];
        let mut parent = vec![None; positions.len()];
        for (i, p) in positions.iter().enumerate() {
            if let (Some(par), Some(c)) = (p.parent(), p.last()) {
                let pi = index[&par];
                children[pi][c] = Some(i);
                parent[i] = Some(pi);
            }
        }
        Skeleton {
            positions,
            index,
            children,
            parent,
            arity,
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn position(&self, i: usize) -> &Position {
        &self.positions[i]
    }

    pub fn positions(&self) -> &[Position] {
        &self.positions
    }

    pub fn index_of(&self, p: &Position) -> Option<usize> {
        self.index.get(p).copied()
    }

    /// Largest number of children any skeleton node can have.
    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn child(&self, i: usize, c: usize) -> Option<usize> {
        self.children[i].get(c).copied().flatten()
    }

    pub fn parent(&self, i: usize) -> Option<usize> {
        self.parent[i]
    }

    /// The index of `position(v) . position(w)`, if it is in the skeleton.
    pub fn concat(&self, v: usize, w: usize) -> Option<usize> {
        let mut cur = v;
        for &c in self.positions[w].indices() {
            cur = self.child(cur, c)?;
        }
        Some(cur)
    }

    pub fn contains_tree(&self, t: &Tree) -> bool {
        t.positions().iter().all(|p| self.index.contains_key(p))
    }
}
