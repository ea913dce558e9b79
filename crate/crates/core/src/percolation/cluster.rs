/// Union-find over lattice vertices (plus any virtual vertices the caller
/// appends). Union by size, path halving.
#[derive(Debug, Clone)]
pub struct ClusterIndex {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl ClusterIndex {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let gp = self.parent[self.parent[x] as usize];
            self.parent[x] = gp;
            x = gp as usize;
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra as u32;
        self.size[ra] += self.size[rb];
    }

    pub fn connected(&mut self, a: usize, b: usize) -> bool {
        self.find(a) == self.find(b)
    }

    /// Canonical component label: the smallest vertex in the component.
    pub fn labels(&mut self) -> Vec<usize> {
        let n = self.len();
        let mut min_of_root = vec![usize::MAX; n];
        for v in 0..n {
            let r = self.find(v);
            min_of_root[r] = min_of_root[r].min(v);
        }
        (0..n).map(|v| min_of_root[self.find(v)]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn labels_agree_with_naive_closure(edges in proptest::collection::vec((0usize..20, 0usize..20), 0..30)) {
            let mut uf = ClusterIndex::new(20);
            for &(a, b) in &edges {
                uf.union(a, b);
            }
            // Naive transitive closure.
            let mut reach = [[false; 20]; 20];
            for (i, row) in reach.iter_mut().enumerate() {
                row[i] = true;
            }
            for &(a, b) in &edges {
                reach[a][b] = true;
                reach[b][a] = true;
            }
            for k in 0..20 {
                for i in 0..20 {
                    for j in 0..20 {
                        if reach[i][k] && reach[k][j] {
                            reach[i][j] = true;
                        }
                    }
                }
            }
            let labels = uf.labels();
            for i in 0..20 {
                for j in 0..20 {
                    prop_assert_eq!(labels[i] == labels[j], reach[i][j]);
                }
            }
        }
    }
}
