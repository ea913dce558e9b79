use super::cluster::ClusterIndex;
use super::lattice::{Bond, BondConfig};
use crate::error::{Error, Result};

/// Axis-aligned rectangle of the internal lattice: vertices
/// `x0..=x0+length` by `y0..=y0+width`. Crossing is between the left and
/// right columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub x0: i64,
    pub y0: i64,
    pub length: i64,
    pub width: i64,
}

impl Rect {
    /// Width `l`, length `n l`, centered at the origin.
    pub fn long_way(n: i64, l: i64) -> Self {
        Self::centered(n * l, l)
    }

    pub fn centered(length: i64, width: i64) -> Self {
        Self {
            x0: -(length / 2),
            y0: -(width / 2),
            length,
            width,
        }
    }

    pub fn bond_count(&self) -> usize {
        let (l, w) = (self.length as usize, self.width as usize);
        l * (w + 1) + (l + 1) * w
    }

    pub fn bonds(&self) -> impl Iterator<Item = Bond> + '_ {
        let horiz = (self.y0..=self.y0 + self.width).flat_map(move |n| {
            (self.x0..self.x0 + self.length).map(move |m| Bond::Horizontal(m, n))
        });
        let vert = (self.y0..self.y0 + self.width).flat_map(move |n| {
            (self.x0..=self.x0 + self.length).map(move |m| Bond::Vertical(m, n))
        });
        horiz.chain(vert)
    }

    /// Half-side of the smallest centered box containing the rectangle.
    pub fn required_extent(&self) -> i64 {
        [self.x0, self.x0 + self.length, self.y0, self.y0 + self.width]
            .iter()
            .map(|v| v.abs())
            .max()
            .unwrap()
    }
}

/// Whether occupied bonds inside `rect` join its left and right columns.
pub fn crossing_exists_rect(config: &BondConfig, rect: Rect) -> Result<bool> {
    if rect.length < 1 || rect.width < 0 {
        return Err(Error::Region(format!("degenerate rectangle {rect:?}")));
    }
    if rect.required_extent() > config.lattice.extent {
        return Err(Error::Region(format!(
            "rectangle needs extent {} but configuration covers {}",
            rect.required_extent(),
            config.lattice.extent
        )));
    }
    let cols = (rect.length + 1) as usize;
    let rows = (rect.width + 1) as usize;
    let local = |v: [i64; 2]| ((v[1] - rect.y0) as usize) * cols + (v[0] - rect.x0) as usize;
    let left = cols * rows;
    let right = left + 1;
    let mut uf = ClusterIndex::new(cols * rows + 2);
    for r in 0..rows {
        uf.union(left, r * cols);
        uf.union(right, r * cols + cols - 1);
    }
    for b in rect.bonds() {
        if config.is_occupied(b) {
            let [a, c] = b.endpoints();
            uf.union(local(a), local(c));
        }
    }
    Ok(uf.connected(left, right))
}

/// Long-way crossing of the width-`l`, length-`n l` rectangle.
pub fn crossing_exists(config: &BondConfig, n: i64, l: i64) -> Result<bool> {
    crossing_exists_rect(config, Rect::long_way(n, l))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::percolation::lattice::{sample_bonds, DualLattice};
    use proptest::prelude::*;

    /// Independent oracle: iterative depth-first search over an explicit
    /// adjacency list.
    fn dfs_crossing(rect: Rect, occupied: &[bool], bonds: &[Bond]) -> bool {
        use std::collections::HashMap;
        let mut adj: HashMap<[i64; 2], Vec<[i64; 2]>> = HashMap::new();
        for (b, &o) in bonds.iter().zip(occupied) {
            if o {
                let [a, c] = b.endpoints();
                adj.entry(a).or_default().push(c);
                adj.entry(c).or_default().push(a);
            }
        }
        let mut seen = std::collections::HashSet::new();
        let mut stack: Vec<[i64; 2]> = (rect.y0..=rect.y0 + rect.width).map(|y| [rect.x0, y]).collect();
        while let Some(v) = stack.pop() {
            if !seen.insert(v) {
                continue;
            }
            if v[0] == rect.x0 + rect.length {
                return true;
            }
            if let Some(ns) = adj.get(&v) {
                stack.extend(ns.iter().copied());
            }
        }
        false
    }

    pub(crate) fn small_shapes() -> Vec<(i64, i64)> {
        let mut shapes = vec![];
        for l in 1..=12 {
            for w in 0..=12 {
                if Rect::centered(l, w).bond_count() <= 12 {
                    shapes.push((l, w));
                }
            }
        }
        shapes
    }

    #[test]
    fn exhaustive_agreement_on_small_rectangles() {
        let shapes = small_shapes();
        assert!(shapes.contains(&(2, 2)) && shapes.contains(&(1, 0)) && shapes.contains(&(1, 3)));
        for (l, w) in shapes {
            let rect = Rect::centered(l, w);
            let bonds: Vec<Bond> = rect.bonds().collect();
            assert_eq!(bonds.len(), rect.bond_count());
            let mut cfg = BondConfig::filled(DualLattice::new(rect.required_extent().max(1)).unwrap(), false);
            for mask in 0u32..(1 << bonds.len()) {
                let occ: Vec<bool> = (0..bonds.len()).map(|i| mask >> i & 1 == 1).collect();
                for (b, &o) in bonds.iter().zip(&occ) {
                    cfg.set(*b, o);
                }
                assert_eq!(crossing_exists_rect(&cfg, rect).unwrap(), dfs_crossing(rect, &occ, &bonds));
            }
        }
    }

    #[test]
    fn trivial_fillings() {
        let full = BondConfig::filled(DualLattice::new(8).unwrap(), true);
        let empty = BondConfig::filled(DualLattice::new(8).unwrap(), false);
        assert!(crossing_exists(&full, 2, 4).unwrap());
        assert!(!crossing_exists(&empty, 2, 4).unwrap());
        assert!(crossing_exists(&full, 3, 8).is_err());
    }

    proptest! {
        #[test]
        fn adding_bonds_never_destroys_a_crossing(seed: u64, p in 0.3f64..0.7, extra in proptest::collection::vec(0usize..144, 1..40)) {
            let mut cfg = sample_bonds(p, 6, seed).unwrap();
            let rect = Rect::long_way(1, 6);
            let mut before = crossing_exists_rect(&cfg, rect).unwrap();
            for k in extra {
                let b = cfg.lattice.bond_at(k % cfg.lattice.bond_count());
                cfg.set(b, true);
                let after = crossing_exists_rect(&cfg, rect).unwrap();
                prop_assert!(!before || after);
                before = after;
            }
        }
    }
}
