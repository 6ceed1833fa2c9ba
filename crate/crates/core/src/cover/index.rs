use std::collections::{BTreeMap, HashMap};

/// Bucket grid over balls of varying radius: a ball of radius r in
/// [2^L, 2^{L+1}) goes into the level-L grid with cell side 2^{L+1}.
#[derive(Debug, Clone, Default)]
pub struct SpatialIndex {
    centers: Vec<Vec<f64>>,
    radii: Vec<f64>,
    levels: BTreeMap<i32, HashMap<Vec<i64>, Vec<u32>>>,
}

fn level_of(r: f64) -> i32 {
    r.log2().floor() as i32
}

fn side(level: i32) -> f64 {
    2f64.powi(level + 1)
}

fn key(x: &[f64], side: f64) -> Vec<i64> {
    x.iter().map(|v| (v / side).floor() as i64).collect()
}

impl SpatialIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn insert(&mut self, center: Vec<f64>, radius: f64) -> usize {
        let id = self.centers.len();
        let l = level_of(radius);
        let k = key(&center, side(l));
        self.levels.entry(l).or_default().entry(k).or_default().push(id as u32);
        self.centers.push(center);
        self.radii.push(radius);
        id
    }

    /// Ids of balls with |x - c| < factor * r + extra, in increasing order.
    pub fn query(&self, x: &[f64], factor: f64, extra: f64, out: &mut Vec<usize>) {
        out.clear();
        let n = x.len();
        for (&l, grid) in &self.levels {
            let s = side(l);
            let maxd = factor * s + extra;
            let reach = (maxd / s).ceil() as i64;
            let base = key(x, s);
            let mut off = vec![-reach; n];
            loop {
                let k: Vec<i64> = base.iter().zip(&off).map(|(b, o)| b + o).collect();
                if let Some(ids) = grid.get(&k) {
                    for &id in ids {
                        let id = id as usize;
                        let c = &self.centers[id];
                        let d2: f64 = c.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
                        let lim = factor * self.radii[id] + extra;
                        if d2 < lim * lim {
                            out.push(id);
                        }
                    }
                }
                let mut d = 0;
                loop {
                    if d == n {
                        break;
                    }
                    off[d] += 1;
                    if off[d] <= reach {
                        break;
                    }
                    off[d] = -reach;
                    d += 1;
                }
                if d == n {
                    break;
                }
            }
        }
        out.sort_unstable();
    }
}
