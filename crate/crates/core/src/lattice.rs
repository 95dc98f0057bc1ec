//! Discrete tori, regions, half-torus boundaries and boundary strips.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
}

impl Axis {
    pub fn other(self) -> Axis {
        match self {
            Axis::One => Axis::Two,
            Axis::Two => Axis::One,
        }
    }
}

/// Which boundary circle of a half torus: `Minus` sits between coordinates 0 and 1,
/// `Plus` between `L/2` and `L/2 + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Minus,
    Plus,
}

/// An `L1 × L2` periodic lattice. Site `(i1, i2)` has linear index `i1 + L1·i2`;
/// rings are `L2 = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TorusLattice {
    l1: usize,
    l2: usize,
}

/// Nearest-neighbour bond `from → to` along `axis` (`to = from + e_axis`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Bond {
    pub from: usize,
    pub to: usize,
    pub axis: Axis,
}

pub fn build_torus(l1: usize, l2: usize) -> Result<TorusLattice> {
    if l1 < 2 || l2 < 1 {
        return Err(Error::InvalidLattice(format!(
            "side lengths must satisfy L1 >= 2 and L2 >= 1, got {l1}x{l2}"
        )));
    }
    if l1.checked_mul(l2).map_or(true, |n| n > 1 << 16) {
        return Err(Error::InvalidLattice(format!("{l1}x{l2} is too large")));
    }
    Ok(TorusLattice { l1, l2 })
}

impl TorusLattice {
    pub fn l1(&self) -> usize {
        self.l1
    }

    pub fn l2(&self) -> usize {
        self.l2
    }

    pub fn len_along(&self, axis: Axis) -> usize {
        match axis {
            Axis::One => self.l1,
            Axis::Two => self.l2,
        }
    }

    /// Number of sites.
    pub fn dim(&self) -> usize {
        self.l1 * self.l2
    }

    /// Linear index of `(i1, i2)`; coordinates are reduced modulo the side lengths.
    pub fn site(&self, i1: isize, i2: isize) -> usize {
        let a = i1.rem_euclid(self.l1 as isize) as usize;
        let b = i2.rem_euclid(self.l2 as isize) as usize;
        a + self.l1 * b
    }

    pub fn coords(&self, site: usize) -> (usize, usize) {
        (site % self.l1, site / self.l1)
    }

    pub fn coord(&self, site: usize, axis: Axis) -> usize {
        let (a, b) = self.coords(site);
        match axis {
            Axis::One => a,
            Axis::Two => b,
        }
    }

    /// Graph distance with wrapping in both directions.
    pub fn torus_distance(&self, a: usize, b: usize) -> usize {
        let (a1, a2) = self.coords(a);
        let (b1, b2) = self.coords(b);
        cyclic_distance(a1, b1, self.l1) + cyclic_distance(a2, b2, self.l2)
    }

    /// Site reached from `site` by moving `shift` lattice vectors.
    pub fn translate(&self, site: usize, shift: (isize, isize)) -> usize {
        let (a, b) = self.coords(site);
        self.site(a as isize + shift.0, b as isize + shift.1)
    }

    /// All nearest-neighbour bonds. A direction of length 1 has none; a direction of
    /// length 2 contributes one bond per pair.
    pub fn bonds(&self) -> Vec<Bond> {
        let mut out = Vec::new();
        for axis in [Axis::One, Axis::Two] {
            let len = self.len_along(axis);
            if len < 2 {
                continue;
            }
            for s in 0..self.dim() {
                if len == 2 && self.coord(s, axis) == 1 {
                    continue;
                }
                let step = match axis {
                    Axis::One => (1, 0),
                    Axis::Two => (0, 1),
                };
                out.push(Bond {
                    from: s,
                    to: self.translate(s, step),
                    axis,
                });
            }
        }
        out
    }

    pub fn full_region(&self) -> Region {
        Region::from_predicate(self, "all", |_| true)
    }

    pub fn empty_region(&self) -> Region {
        Region::from_predicate(self, "empty", |_| false)
    }

    /// Rectangular block `{i1 ∈ c1, i2 ∈ c2}` given by (start, length) along each axis.
    pub fn block(&self, label: &str, c1: (isize, usize), c2: (isize, usize)) -> Region {
        let in_range = |x: usize, (start, len): (isize, usize), l: usize| {
            let d = (x as isize - start).rem_euclid(l as isize) as usize;
            d < len
        };
        Region::from_predicate(self, label, |s| {
            let (a, b) = self.coords(s);
            in_range(a, c1, self.l1) && in_range(b, c2, self.l2)
        })
    }

    /// Sites whose coordinate along `axis` is in the given residues.
    pub fn columns(&self, label: &str, axis: Axis, columns: &[isize]) -> Region {
        let len = self.len_along(axis) as isize;
        let cols: Vec<usize> = columns.iter().map(|c| c.rem_euclid(len) as usize).collect();
        Region::from_predicate(self, label, |s| cols.contains(&self.coord(s, axis)))
    }
}

fn cyclic_distance(a: usize, b: usize, l: usize) -> usize {
    let d = a.abs_diff(b);
    d.min(l - d)
}

/// A set of lattice sites with a label, stored as a bitset.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Region {
    label: String,
    bits: Vec<u64>,
    n_sites: usize,
}

impl Region {
    fn empty(n_sites: usize, label: &str) -> Region {
        Region {
            label: label.to_string(),
            bits: vec![0; n_sites.div_ceil(64)],
            n_sites,
        }
    }

    fn insert(&mut self, s: usize) {
        self.bits[s / 64] |= 1 << (s % 64);
    }

    fn zip_with(&self, other: &Region, label: String, f: impl Fn(u64, u64) -> u64) -> Region {
        assert_eq!(self.n_sites, other.n_sites, "regions live on different lattices");
        Region {
            label,
            bits: self.bits.iter().zip(&other.bits).map(|(&a, &b)| f(a, b)).collect(),
            n_sites: self.n_sites,
        }
    }

    pub fn from_sites(t: &TorusLattice, label: &str, sites: &[usize]) -> Result<Region> {
        let mut r = Region::empty(t.dim(), label);
        for &s in sites {
            if s >= t.dim() {
                return Err(Error::InvalidRegion(format!(
                    "site {s} outside a lattice of {} sites",
                    t.dim()
                )));
            }
            r.insert(s);
        }
        Ok(r)
    }

    pub fn from_predicate(t: &TorusLattice, label: &str, f: impl Fn(usize) -> bool) -> Region {
        let mut r = Region::empty(t.dim(), label);
        for s in (0..t.dim()).filter(|&s| f(s)) {
            r.insert(s);
        }
        r
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: &str) -> Region {
        self.label = label.to_string();
        self
    }

    /// Bit mask of the region; only meaningful on lattices of at most 64 sites.
    pub fn mask(&self) -> u64 {
        assert!(self.n_sites <= 64, "bit masks need at most 64 sites");
        self.bits[0]
    }

    pub fn lattice_sites(&self) -> usize {
        self.n_sites
    }

    pub fn contains(&self, site: usize) -> bool {
        site < self.n_sites && self.bits[site / 64] >> (site % 64) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub fn sites(&self) -> Vec<usize> {
        (0..self.n_sites).filter(|&s| self.contains(s)).collect()
    }

    pub fn complement(&self) -> Region {
        let mut r = Region::empty(self.n_sites, &format!("{}^c", self.label));
        for s in (0..self.n_sites).filter(|&s| !self.contains(s)) {
            r.insert(s);
        }
        r
    }

    pub fn intersection(&self, other: &Region) -> Region {
        self.zip_with(other, format!("{}∩{}", self.label, other.label), |a, b| a & b)
    }

    pub fn union(&self, other: &Region) -> Region {
        self.zip_with(other, format!("{}∪{}", self.label, other.label), |a, b| a | b)
    }

    pub fn difference(&self, other: &Region) -> Region {
        self.zip_with(other, format!("{}∖{}", self.label, other.label), |a, b| a & !b)
    }

    pub fn intersects(&self, other: &Region) -> bool {
        !self.intersection(other).is_empty()
    }

    pub fn is_subset(&self, other: &Region) -> bool {
        self.difference(other).is_empty()
    }

    pub fn translated(&self, t: &TorusLattice, shift: (isize, isize)) -> Region {
        let sites: Vec<usize> = self.sites().into_iter().map(|s| t.translate(s, shift)).collect();
        Region::from_sites(t, &self.label, &sites).expect("translation stays on the lattice")
    }
}

/// The half torus `Γ = {0 < i_axis ≤ L/2}` with its two boundary circles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HalfTorus {
    lattice: TorusLattice,
    axis: Axis,
    region: Region,
}

pub fn half_torus_region(t: &TorusLattice, axis: Axis) -> Result<HalfTorus> {
    let len = t.len_along(axis);
    if len % 2 != 0 || len < 2 {
        return Err(Error::InvalidRegion(format!(
            "half torus needs an even side length along axis {axis:?}, got {len}"
        )));
    }
    let label = match axis {
        Axis::One => "Γ",
        Axis::Two => "Γ₂",
    };
    let region = Region::from_predicate(t, label, |s| {
        let c = t.coord(s, axis);
        c >= 1 && c <= len / 2
    });
    Ok(HalfTorus {
        lattice: *t,
        axis,
        region,
    })
}

impl HalfTorus {
    pub fn lattice(&self) -> &TorusLattice {
        &self.lattice
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn side_length(&self) -> usize {
        self.lattice.len_along(self.axis)
    }

    /// Coordinate of the last column before the boundary (the boundary sits at `b + 1/2`).
    pub fn boundary_column(&self, side: Side) -> isize {
        match side {
            Side::Minus => 0,
            Side::Plus => (self.side_length() / 2) as isize,
        }
    }

    /// Largest strip width for which the two strips stay disjoint.
    pub fn max_strip_width(&self) -> usize {
        self.side_length() / 4
    }

    /// Default strip width `floor(L/4)` (at least 1).
    pub fn default_strip_width(&self) -> usize {
        self.max_strip_width().max(1)
    }

    /// Sites within `width` columns of the boundary circle: columns `b−width+1 ..= b+width`.
    pub fn boundary_strip(&self, side: Side, width: usize) -> Result<Region> {
        if width == 0 {
            return Err(Error::InvalidRegion("strip width must be at least 1".into()));
        }
        if 4 * width > self.side_length() {
            return Err(Error::InvalidRegion(format!(
                "strips of width {width} overlap on a side of length {}",
                self.side_length()
            )));
        }
        let b = self.boundary_column(side);
        let cols: Vec<isize> = (b - width as isize + 1..=b + width as isize).collect();
        let label = match side {
            Side::Minus => "∂−",
            Side::Plus => "∂+",
        };
        Ok(self.lattice.columns(label, self.axis, &cols))
    }

    /// Which boundary a nearest-neighbour bond crosses, if any.
    pub fn crossing_side(&self, bond: &Bond) -> Option<Side> {
        let a = self.region.contains(bond.from);
        let b = self.region.contains(bond.to);
        if a == b {
            return None;
        }
        // `to` is one step further along the bond axis; inside→outside crosses ∂+.
        if a {
            Some(Side::Plus)
        } else {
            Some(Side::Minus)
        }
    }
}
