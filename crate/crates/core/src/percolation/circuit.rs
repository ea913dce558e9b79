//! Innermost closed circuit of occupied bonds in the annulus r_{3l} \ r_l.
//!
//! A breadth-first search over lattice faces starts inside the inner box
//! and may cross any edge except an occupied annulus bond. If it cannot
//! reach the outer box boundary, the boundary of the reached region (holes
//! filled) is made of occupied annulus bonds and is contained in every
//! other separating circuit, so it is the unique minimal-area one.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::lattice::{Bond, BondConfig, DualLattice};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    /// Γ-bond midpoints in cyclic order, starting from the smallest.
    pub bonds: Vec<[i64; 2]>,
    pub inner: i64,
    pub outer: i64,
}

/// Strict annulus membership of an internal vertex.
fn in_annulus(v: [i64; 2], inner: i64, outer: i64) -> bool {
    let r = v[0].abs().max(v[1].abs());
    inner < r && r < outer
}

pub fn bond_in_annulus(b: Bond, inner: i64, outer: i64) -> bool {
    b.endpoints().iter().all(|&v| in_annulus(v, inner, outer))
}

fn shared_vertex(a: Bond, b: Bond) -> Option<[i64; 2]> {
    let ea = a.endpoints();
    b.endpoints().into_iter().find(|v| ea.contains(v))
}

impl Circuit {
    pub fn len(&self) -> usize {
        self.bonds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bonds.is_empty()
    }

    pub fn internal_bonds(&self) -> impl Iterator<Item = Bond> + '_ {
        self.bonds.iter().map(|&j| Bond::from_midpoint(j))
    }

    /// Vertices `v_i` shared by bonds `i` and `i + 1` (cyclically).
    pub fn vertices(&self) -> Option<Vec<[i64; 2]>> {
        let bonds: Vec<Bond> = self.internal_bonds().collect();
        let k = bonds.len();
        (0..k)
            .map(|i| shared_vertex(bonds[i], bonds[(i + 1) % k]))
            .collect()
    }

    /// Winding number of the vertex cycle about the point (1/4, 1/4) of
    /// the internal lattice, which is never a lattice vertex.
    pub fn winding_number(&self) -> Option<i64> {
        let vs = self.vertices()?;
        let angle = |v: [i64; 2]| (v[1] as f64 - 0.25).atan2(v[0] as f64 - 0.25);
        let mut total = 0.0;
        for i in 0..vs.len() {
            let mut d = angle(vs[(i + 1) % vs.len()]) - angle(vs[i]);
            while d > std::f64::consts::PI {
                d -= 2.0 * std::f64::consts::PI;
            }
            while d <= -std::f64::consts::PI {
                d += 2.0 * std::f64::consts::PI;
            }
            total += d;
        }
        Some((total / (2.0 * std::f64::consts::PI)).round() as i64)
    }

    /// Area enclosed in internal lattice units (shoelace formula).
    pub fn enclosed_area(&self) -> Option<f64> {
        let vs = self.vertices()?;
        let twice: i64 = (0..vs.len())
            .map(|i| {
                let (p, q) = (vs[i], vs[(i + 1) % vs.len()]);
                p[0] * q[1] - q[0] * p[1]
            })
            .sum();
        Some(twice.abs() as f64 / 2.0)
    }

    /// Checks closure, containment in the annulus and nonzero winding.
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.bonds.len() < 4 {
            return Err("a circuit needs at least four bonds".into());
        }
        for b in self.internal_bonds() {
            if !bond_in_annulus(b, self.inner, self.outer) {
                return Err(format!("bond {:?} leaves the annulus", b.midpoint()));
            }
        }
        match self.winding_number() {
            None => Err("consecutive bonds do not share a vertex".into()),
            Some(0) => Err("circuit does not wind around the inner box".into()),
            Some(_) => Ok(()),
        }
    }

    /// Segment endpoints of each bond on Γ.
    pub fn segments(&self, lattice: &DualLattice) -> Vec<[[f64; 2]; 2]> {
        self.internal_bonds()
            .map(|b| b.endpoints().map(|v| lattice.vertex_position(v)))
            .collect()
    }
}

/// Innermost circuit of occupied bonds in the annulus with inner half-side
/// `l` and outer half-side `3 l`, if one exists.
pub fn find_closed_circuit(config: &BondConfig, l: i64) -> Result<Option<Circuit>> {
    if l < 1 {
        return Err(Error::Region("inner half-side must be at least 1".into()));
    }
    let outer = 3 * l;
    if config.lattice.extent < outer {
        return Err(Error::Region(format!(
            "annulus needs extent {outer} but configuration covers {}",
            config.lattice.extent
        )));
    }
    // Faces (a, b) = [a, a+1] x [b, b+1] with a, b in -outer..outer.
    let side = (2 * outer) as usize;
    let fidx = |a: i64, b: i64| ((b + outer) as usize) * side + (a + outer) as usize;
    let blocked = |e: Bond| bond_in_annulus(e, l, outer) && config.is_occupied(e);
    let on_rim = |a: i64, b: i64| a == -outer || a + 1 == outer || b == -outer || b + 1 == outer;

    // Neighbours of a face with the separating edge.
    let neighbours = |a: i64, b: i64| {
        [
            (a + 1, b, Bond::Vertical(a + 1, b)),
            (a - 1, b, Bond::Vertical(a, b)),
            (a, b + 1, Bond::Horizontal(a, b + 1)),
            (a, b - 1, Bond::Horizontal(a, b)),
        ]
    };

    let mut inside = vec![false; side * side];
    let mut queue = VecDeque::new();
    for b in -l..l {
        for a in -l..l {
            inside[fidx(a, b)] = true;
            queue.push_back((a, b));
        }
    }
    while let Some((a, b)) = queue.pop_front() {
        if on_rim(a, b) {
            return Ok(None);
        }
        for (na, nb, e) in neighbours(a, b) {
            if !inside[fidx(na, nb)] && !blocked(e) {
                inside[fidx(na, nb)] = true;
                queue.push_back((na, nb));
            }
        }
    }

    // Fill holes: faces not reachable from the rim through non-inside faces.
    let mut outside = vec![false; side * side];
    for b in -outer..outer {
        for a in -outer..outer {
            if on_rim(a, b) && !inside[fidx(a, b)] {
                outside[fidx(a, b)] = true;
                queue.push_back((a, b));
            }
        }
    }
    while let Some((a, b)) = queue.pop_front() {
        for (na, nb, _) in neighbours(a, b) {
            if (-outer..outer).contains(&na) && (-outer..outer).contains(&nb) {
                let k = fidx(na, nb);
                if !outside[k] && !inside[k] {
                    outside[k] = true;
                    queue.push_back((na, nb));
                }
            }
        }
    }

    // Directed boundary edges with the filled region on the left.
    let mut next: HashMap<[i64; 2], [i64; 2]> = HashMap::new();
    for b in -outer..outer {
        for a in -outer..outer {
            if outside[fidx(a, b)] {
                continue;
            }
            let sides = [
                ((a, b - 1), [a, b], [a + 1, b]),
                ((a + 1, b), [a + 1, b], [a + 1, b + 1]),
                ((a, b + 1), [a + 1, b + 1], [a, b + 1]),
                ((a - 1, b), [a, b + 1], [a, b]),
            ];
            for ((na, nb), from, to) in sides {
                if outside[fidx(na, nb)] {
                    let prev = next.insert(from, to);
                    debug_assert!(prev.is_none(), "pinched boundary at {from:?}");
                }
            }
        }
    }
    let start = *next.keys().min().expect("nonempty boundary");
    let mut vertices = vec![start];
    let mut v = next[&start];
    while v != start {
        vertices.push(v);
        v = next[&v];
    }
    assert_eq!(vertices.len(), next.len(), "boundary is not a single cycle");

    let k = vertices.len();
    let mut bonds: Vec<[i64; 2]> = (0..k)
        .map(|i| {
            let (p, q) = (vertices[i], vertices[(i + 1) % k]);
            let bond = if p[1] == q[1] {
                Bond::Horizontal(p[0].min(q[0]), p[1])
            } else {
                Bond::Vertical(p[0], p[1].min(q[1]))
            };
            debug_assert!(blocked(bond));
            bond.midpoint()
        })
        .collect();
    let first = (0..k).min_by_key(|&i| bonds[i]).unwrap();
    bonds.rotate_left(first);
    Ok(Some(Circuit {
        bonds,
        inner: l,
        outer,
    }))
}
