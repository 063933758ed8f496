//! Block structure of two-mode operators.
//!
//! An operator whose nonzero entries `⟨n,m|ρ|n',m'⟩` only occur at offsets
//! `(n−n', m−m')` drawn from an integer lattice `L ⊂ Z²` is block diagonal
//! over the cosets of `L`. Passive loss shifts both indices of an entry by
//! the same amount and diagonal filters only delete entries, so both keep
//! the coset structure intact. Fidelities, square roots and positivity
//! checks then decompose into independent, much smaller eigenproblems.

use std::collections::BTreeMap;

use super::space::TwoModeSpace;

/// Integer lattice in `Z²` kept in echelon form: generated by
/// `(lead, shear)` and `(0, period)`.
///
/// `lead == 0` means no generator has a nonzero first coordinate;
/// `period == 0` likewise for the second echelon vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SectorLattice {
    lead: i64,
    shear: i64,
    period: i64,
}

impl SectorLattice {
    /// The trivial lattice `{0}`: every basis state is its own sector.
    pub fn trivial() -> Self {
        Self {
            lead: 0,
            shear: 0,
            period: 0,
        }
    }

    /// All of `Z²`: a single dense sector.
    pub fn full() -> Self {
        Self {
            lead: 1,
            shear: 0,
            period: 1,
        }
    }

    pub fn generated_by<I: IntoIterator<Item = (i64, i64)>>(gens: I) -> Self {
        let mut lat = Self::trivial();
        for g in gens {
            lat = lat.with(g);
        }
        lat
    }

    /// Smallest lattice containing `self` and `g`.
    pub fn with(self, g: (i64, i64)) -> Self {
        if self.contains(g) {
            return self;
        }
        // Euclid on the first coordinate between the lead vector and g
        let mut v = (self.lead, self.shear);
        let mut w = g;
        while w.0 != 0 {
            let q = v.0.div_euclid(w.0);
            v = (v.0 - q * w.0, v.1 - q * w.1);
            std::mem::swap(&mut v, &mut w);
        }
        let mut period = gcd(self.period, w.1);
        if v.0 < 0 {
            v = (-v.0, -v.1);
        }
        if v.0 == 0 {
            // no first-coordinate component at all: fold into the period
            period = gcd(period, v.1);
            v = (0, 0);
        }
        let shear = if period > 0 { v.1.rem_euclid(period) } else { v.1 };
        Self {
            lead: v.0,
            shear,
            period,
        }
    }

    pub fn join(self, other: Self) -> Self {
        self.with((other.lead, other.shear)).with((0, other.period))
    }

    pub fn contains(&self, p: (i64, i64)) -> bool {
        self.label(p) == self.label((0, 0))
    }

    /// Canonical coset representative of `p`.
    pub fn label(&self, p: (i64, i64)) -> (i64, i64) {
        let (mut n, mut m) = p;
        if self.lead > 0 {
            let t = n.div_euclid(self.lead);
            n -= t * self.lead;
            m -= t * self.shear;
        }
        if self.period > 0 {
            m = m.rem_euclid(self.period);
        }
        (n, m)
    }

    /// Lattice generated by the pairwise offsets of a support set.
    pub fn from_support<I: IntoIterator<Item = (usize, usize)>>(support: I) -> Self {
        let mut it = support.into_iter();
        let Some(first) = it.next() else {
            return Self::trivial();
        };
        let (n0, m0) = (first.0 as i64, first.1 as i64);
        Self::generated_by(it.map(|(n, m)| (n as i64 - n0, m as i64 - m0)))
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Partition of a space's basis into lattice cosets.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorLayout {
    lattice: SectorLattice,
    sectors: Vec<Vec<usize>>,
    // basis index -> (sector, position within sector)
    locate: Vec<(u32, u32)>,
}

impl SectorLayout {
    pub fn new(space: &TwoModeSpace, lattice: SectorLattice) -> Self {
        let mut groups: BTreeMap<(i64, i64), Vec<usize>> = BTreeMap::new();
        for i in 0..space.dimension() {
            let (n, m) = space.occupation(i);
            groups.entry(lattice.label((n as i64, m as i64))).or_default().push(i);
        }
        let sectors: Vec<Vec<usize>> = groups.into_values().collect();
        let mut locate = vec![(0u32, 0u32); space.dimension()];
        for (s, idx) in sectors.iter().enumerate() {
            for (p, &i) in idx.iter().enumerate() {
                locate[i] = (s as u32, p as u32);
            }
        }
        Self {
            lattice,
            sectors,
            locate,
        }
    }

    pub fn lattice(&self) -> SectorLattice {
        self.lattice
    }

    pub fn sectors(&self) -> &[Vec<usize>] {
        &self.sectors
    }

    pub fn len(&self) -> usize {
        self.sectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sectors.is_empty()
    }

    #[inline]
    pub fn locate(&self, index: usize) -> (usize, usize) {
        let (s, p) = self.locate[index];
        (s as usize, p as usize)
    }

    pub fn largest(&self) -> usize {
        self.sectors.iter().map(Vec::len).max().unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::BasisLabel;
    use proptest::prelude::*;

    #[test]
    fn parity_lattice_has_four_cosets() {
        let lat = SectorLattice::generated_by([(2, 0), (0, 2), (4, 6)]);
        let space = TwoModeSpace::new(5, BasisLabel::hv());
        let layout = SectorLayout::new(&space, lat);
        assert_eq!(layout.len(), 4);
        assert_eq!(layout.largest(), 9);
    }

    #[test]
    fn diagonal_lattice_labels_by_difference() {
        let lat = SectorLattice::from_support([(1, 0), (2, 1), (5, 4)]);
        assert!(lat.contains((3, 3)));
        assert!(!lat.contains((1, 0)));
        let space = TwoModeSpace::new(3, BasisLabel::hv());
        // n − m ∈ {−3..3}
        assert_eq!(SectorLayout::new(&space, lat).len(), 7);
    }

    #[test]
    fn total_parity_lattice() {
        let lat = SectorLattice::generated_by([(2, 0), (0, 2), (1, -1)]);
        assert!(lat.contains((1, 1)));
        assert!(!lat.contains((1, 0)));
        let space = TwoModeSpace::new(4, BasisLabel::hv());
        assert_eq!(SectorLayout::new(&space, lat).len(), 2);
    }

    #[test]
    fn trivial_and_full() {
        let space = TwoModeSpace::new(2, BasisLabel::hv());
        assert_eq!(SectorLayout::new(&space, SectorLattice::trivial()).len(), 9);
        assert_eq!(SectorLayout::new(&space, SectorLattice::full()).len(), 1);
        assert_eq!(SectorLattice::generated_by([(1, 0), (0, 1)]), SectorLattice::full());
    }

    proptest! {
        #[test]
        fn generators_are_members(gens in prop::collection::vec((-9i64..9, -9i64..9), 0..5),
                                  a in -3i64..3, b in -3i64..3,
                                  p0 in (-20i64..20, -20i64..20)) {
            let lat = SectorLattice::generated_by(gens.iter().copied());
            for &g in &gens {
                prop_assert!(lat.contains(g));
            }
            // closed under integer combinations
            if gens.len() >= 2 {
                let c = (a * gens[0].0 + b * gens[1].0, a * gens[0].1 + b * gens[1].1);
                prop_assert!(lat.contains(c));
                let q = (p0.0 + c.0, p0.1 + c.1);
                prop_assert_eq!(lat.label(p0), lat.label(q));
            }
        }

        #[test]
        fn membership_is_minimal(gens in prop::collection::vec((-6i64..6, -6i64..6), 1..4),
                                 p in (-12i64..12, -12i64..12)) {
            // brute force: p is reachable from small combinations iff contained
            let lat = SectorLattice::generated_by(gens.iter().copied());
            let mut reach = false;
            let r = 12i64;
            let coeffs: Vec<Vec<i64>> = (0..gens.len()).map(|_| (-r..=r).collect()).collect();
            let mut idx = vec![0usize; gens.len()];
            'outer: loop {
                let mut s = (0i64, 0i64);
                for (k, &i) in idx.iter().enumerate() {
                    s.0 += coeffs[k][i] * gens[k].0;
                    s.1 += coeffs[k][i] * gens[k].1;
                }
                if s == p { reach = true; break; }
                for k in 0..idx.len() {
                    idx[k] += 1;
                    if idx[k] < coeffs[k].len() { continue 'outer; }
                    idx[k] = 0;
                }
                break;
            }
            if reach {
                prop_assert!(lat.contains(p));
            }
        }
    }
}
