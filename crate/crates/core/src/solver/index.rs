//! Uniform-cell hash for radius queries on the flat 4-torus.

use std::collections::HashMap;
use std::f64::consts::TAU;

use crate::residual::TorusQuadruple;

pub struct TorusIndex {
    cells_per_axis: i64,
    cell: f64,
    buckets: HashMap<[i64; 4], Vec<usize>>,
    points: Vec<TorusQuadruple>,
}

impl TorusIndex {
    /// Queries are exact for radii up to `radius`.
    pub fn new(radius: f64) -> Self {
        let cells_per_axis = ((TAU / radius.max(1e-12)).floor() as i64).clamp(1, 1 << 20);
        Self {
            cells_per_axis,
            cell: TAU / cells_per_axis as f64,
            buckets: HashMap::new(),
            points: Vec::new(),
        }
    }

    fn key(&self, q: &TorusQuadruple) -> [i64; 4] {
        q.angles().map(|t| ((t / self.cell).floor() as i64).rem_euclid(self.cells_per_axis))
    }

    pub fn insert(&mut self, q: TorusQuadruple) -> usize {
        let id = self.points.len();
        let key = self.key(&q);
        self.buckets.entry(key).or_default().push(id);
        self.points.push(q);
        id
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Ids of stored points within `radius` of `q`.
    pub fn within(&self, q: &TorusQuadruple, radius: f64) -> Vec<usize> {
        let base = self.key(q);
        let n = self.cells_per_axis;
        let span: &[i64] = if n >= 3 { &[-1, 0, 1] } else if n == 2 { &[0, 1] } else { &[0] };
        let mut out = Vec::new();
        for &a in span {
            for &b in span {
                for &c in span {
                    for &d in span {
                        let key = [
                            (base[0] + a).rem_euclid(n),
                            (base[1] + b).rem_euclid(n),
                            (base[2] + c).rem_euclid(n),
                            (base[3] + d).rem_euclid(n),
                        ];
                        if let Some(ids) = self.buckets.get(&key) {
                            out.extend(ids.iter().copied().filter(|&i| self.points[i].distance(q) <= radius));
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_neighbours_across_the_seam() {
        let mut idx = TorusIndex::new(0.1);
        idx.insert(TorusQuadruple::new([0.01, 1.0, 2.0, 3.0]));
        idx.insert(TorusQuadruple::new([3.0, 1.0, 2.0, 3.0]));
        let probe = TorusQuadruple::new([TAU - 0.02, 1.0, 2.0, 3.0]);
        assert_eq!(idx.within(&probe, 0.05), vec![0]);
        assert!(idx.within(&probe, 0.01).is_empty());
        assert_eq!(idx.len(), 2);
    }
}
