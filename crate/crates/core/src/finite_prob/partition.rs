use std::collections::HashMap;
use std::hash::Hash;

use super::Rational;
use crate::error::{Error, Result};

/// A σ-algebra on a finite space, stored as an atom → block map.
///
/// Block indices are canonical: blocks are numbered by first appearance in
/// atom order, so two partitions describe the same σ-algebra iff they compare
/// equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition {
    block_of: Vec<usize>,
    blocks: usize,
}

impl Partition {
    /// Groups atoms by equal keys.
    pub fn from_keys<K: Hash + Eq>(keys: impl IntoIterator<Item = K>) -> Self {
        let mut ids: HashMap<K, usize> = HashMap::new();
        let mut block_of = Vec::new();
        for key in keys {
            let next = ids.len();
            block_of.push(*ids.entry(key).or_insert(next));
        }
        let blocks = ids.len();
        Self { block_of, blocks }
    }

    /// Validates and canonicalizes an explicit block assignment.
    pub fn from_assignment(block_of: Vec<usize>) -> Result<Self> {
        let max = block_of.iter().copied().max().map_or(0, |m| m + 1);
        let mut seen = vec![false; max];
        for &b in &block_of {
            seen[b] = true;
        }
        if let Some(b) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidPartition(format!("block {b} is empty")));
        }
        Ok(Self::from_keys(block_of))
    }

    pub fn trivial(len: usize) -> Self {
        Self { block_of: vec![0; len], blocks: usize::from(len > 0) }
    }

    pub fn discrete(len: usize) -> Self {
        Self { block_of: (0..len).collect(), blocks: len }
    }

    pub fn len(&self) -> usize {
        self.block_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.block_of.is_empty()
    }

    pub fn block_count(&self) -> usize {
        self.blocks
    }

    pub fn block_of(&self, atom: usize) -> usize {
        self.block_of[atom]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.block_of
    }

    /// Atoms of each block, in atom order.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.blocks];
        for (atom, &b) in self.block_of.iter().enumerate() {
            out[b].push(atom);
        }
        out
    }

    /// True iff every block of `self` lies inside a block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        if self.len() != coarser.len() {
            return false;
        }
        let mut image = vec![usize::MAX; self.blocks];
        for (atom, &b) in self.block_of.iter().enumerate() {
            let c = coarser.block_of[atom];
            if image[b] == usize::MAX {
                image[b] = c;
            } else if image[b] != c {
                return false;
            }
        }
        true
    }

    /// The coarsest common refinement.
    pub fn join(&self, other: &Partition) -> Partition {
        Partition::from_keys(self.block_of.iter().zip(&other.block_of).map(|(a, b)| (*a, *b)))
    }

    pub fn is_measurable(&self, x: &[Rational]) -> bool {
        self.first_non_constant(x).is_none()
    }

    /// First atom where `x` differs from the value seen earlier in its block.
    pub fn first_non_constant(&self, x: &[Rational]) -> Option<usize> {
        let mut rep: Vec<Option<&Rational>> = vec![None; self.blocks];
        for (atom, &b) in self.block_of.iter().enumerate() {
            match rep[b] {
                None => rep[b] = Some(&x[atom]),
                Some(v) if *v != x[atom] => return Some(atom),
                _ => {}
            }
        }
        None
    }

    pub fn is_event_measurable(&self, event: &[bool]) -> bool {
        let mut rep: Vec<Option<bool>> = vec![None; self.blocks];
        for (atom, &b) in self.block_of.iter().enumerate() {
            match rep[b] {
                None => rep[b] = Some(event[atom]),
                Some(v) if v != event[atom] => return false,
                _ => {}
            }
        }
        true
    }

    /// Compares the traces of `self` and `other` on the atoms where `on` holds.
    ///
    /// Returns a pair of atoms of `on` that one partition puts in the same
    /// block and the other separates, or `None` when the traces coincide.
    pub fn trace_difference(&self, other: &Partition, on: &[bool]) -> Option<(usize, usize)> {
        let mut first_by_self: Vec<Option<usize>> = vec![None; self.blocks];
        let mut first_by_other: Vec<Option<usize>> = vec![None; other.blocks];
        for atom in 0..self.len() {
            if !on[atom] {
                continue;
            }
            let (a, b) = (self.block_of[atom], other.block_of[atom]);
            match first_by_self[a] {
                None => first_by_self[a] = Some(atom),
                Some(f) if other.block_of[f] != b => return Some((f, atom)),
                _ => {}
            }
            match first_by_other[b] {
                None => first_by_other[b] = Some(atom),
                Some(f) if self.block_of[f] != a => return Some((f, atom)),
                _ => {}
            }
        }
        None
    }

    /// The σ-algebra `Σ_i D_i ∩ P_i` for disjoint pieces `D_i` covering the space.
    pub fn piecewise(pieces: &[(&[bool], &Partition)]) -> Result<Partition> {
        let len = pieces.first().map_or(0, |(d, _)| d.len());
        let mut keys = Vec::with_capacity(len);
        for atom in 0..len {
            let mut owner = None;
            for (i, (d, _)) in pieces.iter().enumerate() {
                if d[atom] {
                    if owner.is_some() {
                        return Err(Error::InvalidPartition(format!("pieces overlap at atom {atom}")));
                    }
                    owner = Some(i);
                }
            }
            let i = owner.ok_or_else(|| Error::InvalidPartition(format!("atom {atom} is in no piece")))?;
            keys.push((i, pieces[i].1.block_of[atom]));
        }
        Ok(Partition::from_keys(keys))
    }
}

/// A generator of a σ-algebra.
#[derive(Clone, Copy, Debug)]
pub enum Generator<'a> {
    Variable(&'a [Rational]),
    Event(&'a [bool]),
    Partition(&'a Partition),
}

impl Generator<'_> {
    fn len(&self) -> usize {
        match self {
            Generator::Variable(x) => x.len(),
            Generator::Event(e) => e.len(),
            Generator::Partition(p) => p.len(),
        }
    }
}

/// The coarsest partition of `len` atoms making every generator block-constant.
pub fn generate_partition(len: usize, generators: &[Generator<'_>]) -> Result<Partition> {
    if len == 0 {
        return Err(Error::InvalidPartition("cannot generate a partition of an empty space".into()));
    }
    if let Some(g) = generators.iter().find(|g| g.len() != len) {
        return Err(Error::Dimension(format!("generator of length {} on {len} atoms", g.len())));
    }
    let mut current = Partition::trivial(len);
    for g in generators {
        let next = match g {
            Generator::Variable(x) => Partition::from_keys(x.iter()),
            Generator::Event(e) => Partition::from_keys(e.iter()),
            Generator::Partition(p) => (*p).clone(),
        };
        current = current.join(&next);
    }
    Ok(current)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_prob::int;

    #[test]
    fn canonical_numbering() {
        let p = Partition::from_assignment(vec![3, 3, 0, 1, 1, 2]).unwrap();
        assert_eq!(p.assignment(), &[0, 0, 1, 2, 2, 3]);
        assert!(Partition::from_assignment(vec![0, 2]).is_err());
    }

    #[test]
    fn generating_from_events() {
        let a = [true, true, false, false];
        let b = [false, true, true, false];
        let p = generate_partition(4, &[Generator::Event(&a), Generator::Event(&b)]).unwrap();
        assert_eq!(p, Partition::discrete(4));
        assert_eq!(generate_partition(4, &[]).unwrap(), Partition::trivial(4));
        assert!(generate_partition(0, &[]).is_err());
    }

    #[test]
    fn generation_is_idempotent() {
        let x = [int(1), int(1), int(2), int(3)];
        let p = generate_partition(4, &[Generator::Variable(&x)]).unwrap();
        let q = generate_partition(4, &[Generator::Partition(&p), Generator::Variable(&x)]).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn refinement_and_traces() {
        let fine = Partition::from_assignment(vec![0, 1, 2, 2]).unwrap();
        let coarse = Partition::from_assignment(vec![0, 0, 1, 1]).unwrap();
        assert!(fine.refines(&coarse));
        assert!(!coarse.refines(&fine));
        assert_eq!(fine.trace_difference(&coarse, &[false, false, true, true]), None);
        assert_eq!(fine.trace_difference(&coarse, &[true, true, false, false]), Some((0, 1)));
    }

    #[test]
    fn piecewise_union() {
        let d1 = [true, true, false, false];
        let d2 = [false, false, true, true];
        let p = Partition::piecewise(&[(&d1, &Partition::trivial(4)), (&d2, &Partition::discrete(4))]).unwrap();
        assert_eq!(p.assignment(), &[0, 0, 1, 2]);
        assert!(Partition::piecewise(&[(&d1, &Partition::trivial(4))]).is_err());
    }
}
