//! Uniform hash grid for fixed-radius neighbour queries.

use std::collections::HashMap;

use crate::geom::{dist_sq, Point};

pub(crate) struct HashGrid {
    cell: f64,
    dim: usize,
    cells: HashMap<Vec<i64>, Vec<usize>>,
}

impl HashGrid {
    pub fn new(cell: f64, dim: usize) -> Self {
        Self {
            cell: if cell > 0.0 && cell.is_finite() { cell } else { 1.0 },
            dim,
            cells: HashMap::new(),
        }
    }

    pub fn build(points: &[Point], idx: impl IntoIterator<Item = usize>, cell: f64) -> Self {
        let dim = points.first().map_or(1, Point::dim);
        let mut g = Self::new(cell, dim);
        for i in idx {
            g.insert(i, &points[i]);
        }
        g
    }

    fn key(&self, c: &[f64]) -> Vec<i64> {
        c.iter().map(|x| (x / self.cell).floor() as i64).collect()
    }

    pub fn insert(&mut self, id: usize, p: &Point) {
        let k = self.key(p.coords());
        self.cells.entry(k).or_default().push(id);
    }

    /// Calls `f` on every stored id whose cell may hold points within `r` of
    /// `q`. Callers filter by exact distance.
    pub fn for_each_candidate(&self, q: &[f64], r: f64, mut f: impl FnMut(usize)) {
        let lo: Vec<i64> = q.iter().map(|x| ((x - r) / self.cell).floor() as i64).collect();
        let hi: Vec<i64> = q.iter().map(|x| ((x + r) / self.cell).floor() as i64).collect();
        let span: u128 = lo.iter().zip(&hi).map(|(a, b)| (b - a + 1) as u128).product();
        if span > 4 * self.cells.len() as u128 {
            for ids in self.cells.values() {
                ids.iter().for_each(|&i| f(i));
            }
            return;
        }
        let mut key = lo.clone();
        loop {
            if let Some(ids) = self.cells.get(&key) {
                ids.iter().for_each(|&i| f(i));
            }
            let mut axis = 0;
            loop {
                if axis == self.dim {
                    return;
                }
                if key[axis] < hi[axis] {
                    key[axis] += 1;
                    break;
                }
                key[axis] = lo[axis];
                axis += 1;
            }
        }
    }

    /// Ids within closed distance `r` of `q`.
    pub fn within(&self, points: &[Point], q: &Point, r: f64) -> Vec<usize> {
        let r2 = r * r;
        let mut out = Vec::new();
        self.for_each_candidate(q.coords(), r, |i| {
            if dist_sq(points[i].coords(), q.coords()) <= r2 {
                out.push(i);
            }
        });
        out
    }

    pub fn any_within(&self, points: &[Point], q: &Point, r2: f64, r: f64) -> Option<usize> {
        let mut hit = None;
        self.for_each_candidate(q.coords(), r, |i| {
            if hit.is_none() && dist_sq(points[i].coords(), q.coords()) < r2 {
                hit = Some(i);
            }
        });
        hit
    }
}
