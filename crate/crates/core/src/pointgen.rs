//! Deterministic pointset generators and the pointset JSON format.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Point;

/// Finite pointset in `R^dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    pub dim: usize,
    pub points: Vec<Point>,
    pub label: String,
}

impl PointSet {
    /// Validates dimensions and rejects duplicate points.
    pub fn new(dim: usize, points: Vec<Point>, label: impl Into<String>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::OutOfRange("ambient dimension must be at least 1".into()));
        }
        let mut seen = HashSet::with_capacity(points.len());
        for p in &points {
            crate::geom::check_dim(p, dim)?;
            let key: Vec<u64> = p.coords().iter().map(|c| (c + 0.0).to_bits()).collect();
            if !seen.insert(key) {
                return Err(Error::InvalidInput(format!("duplicate point {:?}", p.coords())));
            }
        }
        Ok(Self {
            dim,
            points,
            label: label.into(),
        })
    }

    /// Builds a 2-d set from coordinate pairs; panics on duplicates. Test helper.
    pub fn from_xy(xy: &[(f64, f64)]) -> Self {
        Self::new(2, xy.iter().map(|&(x, y)| Point::xy(x, y)).collect(), "xy").expect("valid pointset")
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn subset(&self, idx: &[usize]) -> PointSet {
        PointSet {
            dim: self.dim,
            points: idx.iter().map(|&i| self.points[i].clone()).collect(),
            label: format!("{}[subset]", self.label),
        }
    }

    /// Per-axis minimum and maximum. `None` for an empty set.
    pub fn bounds(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        let first = self.points.first()?;
        let mut lo = first.coords().to_vec();
        let mut hi = lo.clone();
        for p in &self.points[1..] {
            for (k, &c) in p.coords().iter().enumerate() {
                lo[k] = lo[k].min(c);
                hi[k] = hi[k].max(c);
            }
        }
        Some((lo, hi))
    }

    /// Exact diameter by all pairs.
    pub fn diameter(&self) -> f64 {
        let mut best = 0.0f64;
        for (i, p) in self.points.iter().enumerate() {
            for q in &self.points[i + 1..] {
                best = best.max(p.dist_sq(q));
            }
        }
        best.sqrt()
    }

    pub fn scaled(&self, c: f64) -> PointSet {
        PointSet {
            dim: self.dim,
            points: self.points.iter().map(|p| p.scaled(c)).collect(),
            label: self.label.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("pointset serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: PointSet = serde_json::from_str(s).map_err(|e| Error::InvalidInput(e.to_string()))?;
        for p in &raw.points {
            if p.coords().iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidInput("non-finite coordinate".into()));
            }
        }
        PointSet::new(raw.dim, raw.points, raw.label)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GeneratorKind {
    Carpet { k: u32 },
    CantorDust { k: u32, d: usize },
    Grid { m: usize, d: usize },
    Line { n: usize },
    RandomUniform { n: usize, d: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub scale: f64,
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind) -> Self {
        Self { kind, scale: 1.0 }
    }

    pub fn carpet(k: u32) -> Self {
        Self::new(GeneratorKind::Carpet { k })
    }

    pub fn cantor(k: u32, d: usize) -> Self {
        Self::new(GeneratorKind::CantorDust { k, d })
    }

    pub fn grid(m: usize, d: usize) -> Self {
        Self::new(GeneratorKind::Grid { m, d })
    }

    pub fn line(n: usize) -> Self {
        Self::new(GeneratorKind::Line { n })
    }

    pub fn random(n: usize, d: usize, seed: u64) -> Self {
        Self::new(GeneratorKind::RandomUniform { n, d, seed })
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::OutOfRange(format!("scale must be positive, got {}", self.scale)));
        }
        let ok = match self.kind {
            // 3^k must fit comfortably in f64 and memory
            GeneratorKind::Carpet { k } => (1..=10).contains(&k),
            GeneratorKind::CantorDust { k, d } => k >= 1 && d >= 1 && (k as usize) * d <= 24,
            GeneratorKind::Grid { m, d } => m >= 1 && d >= 1 && (m as f64).powi(d as i32) <= 1e8,
            GeneratorKind::Line { n } => n >= 1,
            GeneratorKind::RandomUniform { n, d, .. } => n >= 1 && d >= 1,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::OutOfRange(format!("generator parameters out of range: {self}")))
        }
    }
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            GeneratorKind::Carpet { k } => write!(f, "carpet:{k}")?,
            GeneratorKind::CantorDust { k, d } => write!(f, "cantor:{k}:{d}")?,
            GeneratorKind::Grid { m, d } => write!(f, "grid:{m}:{d}")?,
            GeneratorKind::Line { n } => write!(f, "line:{n}")?,
            GeneratorKind::RandomUniform { n, d, seed } => write!(f, "random:{n}:{d}:{seed}")?,
        }
        if self.scale != 1.0 {
            write!(f, "@{}", self.scale)?;
        }
        Ok(())
    }
}

/// Parses `carpet:K`, `cantor:K:D`, `grid:M:D`, `line:N`, `random:N:D[:SEED]`,
/// each optionally followed by `@SCALE`.
impl FromStr for GeneratorSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("cannot parse generator spec {s:?}"));
        let (body, scale) = match s.split_once('@') {
            Some((b, sc)) => (b, sc.parse::<f64>().map_err(|_| bad())?),
            None => (s, 1.0),
        };
        let parts: Vec<&str> = body.split(':').collect();
        let num = |i: usize| -> Result<u64> {
            parts.get(i).ok_or_else(bad)?.parse::<u64>().map_err(|_| bad())
        };
        let kind = match (parts[0], parts.len()) {
            ("carpet", 2) => GeneratorKind::Carpet { k: num(1)? as u32 },
            ("cantor", 2) => GeneratorKind::CantorDust { k: num(1)? as u32, d: 1 },
            ("cantor", 3) => GeneratorKind::CantorDust { k: num(1)? as u32, d: num(2)? as usize },
            ("grid", 3) => GeneratorKind::Grid { m: num(1)? as usize, d: num(2)? as usize },
            ("line", 2) => GeneratorKind::Line { n: num(1)? as usize },
            ("random", 3) => GeneratorKind::RandomUniform { n: num(1)? as usize, d: num(2)? as usize, seed: 0 },
            ("random", 4) => GeneratorKind::RandomUniform {
                n: num(1)? as usize,
                d: num(2)? as usize,
                seed: num(3)?,
            },
            _ => return Err(bad()),
        };
        let spec = GeneratorSpec { kind, scale };
        spec.validate()?;
        Ok(spec)
    }
}

/// Base-3 digits of `x`, least significant first, exactly `k` of them.
fn ternary_digits(mut x: u64, k: u32) -> impl Iterator<Item = u64> {
    (0..k).map(move |_| {
        let d = x % 3;
        x /= 3;
        d
    })
}

pub fn generate(spec: &GeneratorSpec) -> Result<PointSet> {
    spec.validate()?;
    let s = spec.scale;
    let label = spec.to_string();
    let points: Vec<Point> = match spec.kind {
        GeneratorKind::Carpet { k } => {
            let side = 3u64.pow(k);
            let mut pts = Vec::with_capacity(8usize.pow(k));
            for x in 0..side {
                for y in 0..side {
                    // deleted iff at some level both coordinates sit in the middle third
                    let central = ternary_digits(x, k).zip(ternary_digits(y, k)).any(|(a, b)| a == 1 && b == 1);
                    if !central {
                        pts.push(Point::xy(x as f64 * s, y as f64 * s));
                    }
                }
            }
            pts
        }
        GeneratorKind::CantorDust { k, d } => {
            let side = 3u64.pow(k);
            let axis: Vec<f64> = (0..side)
                .filter(|&x| ternary_digits(x, k).all(|t| t != 1))
                .map(|x| x as f64 * s)
                .collect();
            product(&axis, d)
        }
        GeneratorKind::Grid { m, d } => {
            let axis: Vec<f64> = (0..m).map(|x| x as f64 * s).collect();
            product(&axis, d)
        }
        GeneratorKind::Line { n } => (0..n).map(|i| Point::xy(i as f64 * s, 0.0)).collect(),
        GeneratorKind::RandomUniform { n, d, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut seen = HashSet::with_capacity(n);
            let mut pts = Vec::with_capacity(n);
            while pts.len() < n {
                let c: Vec<f64> = (0..d).map(|_| rng.random::<f64>() * s).collect();
                let key: Vec<u64> = c.iter().map(|v| v.to_bits()).collect();
                if seen.insert(key) {
                    pts.push(Point::new(c)?);
                }
            }
            pts
        }
    };
    let dim = match spec.kind {
        GeneratorKind::Carpet { .. } | GeneratorKind::Line { .. } => 2,
        GeneratorKind::CantorDust { d, .. } | GeneratorKind::Grid { d, .. } | GeneratorKind::RandomUniform { d, .. } => d,
    };
    Ok(PointSet { dim, points, label })
}

/// All `d`-tuples over `axis`, lexicographic with the first coordinate slowest.
fn product(axis: &[f64], d: usize) -> Vec<Point> {
    let mut out: Vec<Vec<f64>> = vec![Vec::with_capacity(d)];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&a| {
                    let mut v = prefix.clone();
                    v.push(a);
                    v
                })
            })
            .collect();
    }
    out.into_iter().map(|c| Point::new(c).expect("finite")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn carpet_counts() {
        for k in 1..=4 {
            assert_eq!(generate(&GeneratorSpec::carpet(k)).unwrap().len(), 8usize.pow(k));
        }
    }

    #[test]
    fn carpet_one_is_ring() {
        let p = generate(&GeneratorSpec::carpet(1)).unwrap();
        assert!(!p.points.contains(&Point::xy(1.0, 1.0)));
        assert_eq!(p.len(), 8);
    }

    #[test]
    fn carpet_three_has_central_hole() {
        let p = generate(&GeneratorSpec::carpet(3)).unwrap();
        assert_eq!(p.len(), 512);
        // the central 9x9 block is empty
        assert!(!p.points.iter().any(|q| {
            let (x, y) = (q.coords()[0], q.coords()[1]);
            (9.0..18.0).contains(&x) && (9.0..18.0).contains(&y)
        }));
    }

    #[test]
    fn cantor_two_one() {
        let p = generate(&GeneratorSpec::cantor(2, 1)).unwrap();
        let xs: Vec<f64> = p.points.iter().map(|q| q.coords()[0]).collect();
        assert_eq!(xs, vec![0.0, 2.0, 6.0, 8.0]);
        assert_eq!(generate(&GeneratorSpec::cantor(3, 2)).unwrap().len(), 64);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(generate(&GeneratorSpec::carpet(0)).is_err());
        assert!(generate(&GeneratorSpec::grid(0, 2)).is_err());
        assert!(generate(&GeneratorSpec::line(0)).is_err());
        assert!(generate(&GeneratorSpec::line(3).with_scale(-1.0)).is_err());
    }

    #[test]
    fn random_is_reproducible() {
        let a = generate(&GeneratorSpec::random(50, 3, 7)).unwrap();
        let b = generate(&GeneratorSpec::random(50, 3, 7)).unwrap();
        let c = generate(&GeneratorSpec::random(50, 3, 8)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.dim, 3);
    }

    #[test]
    fn spec_parsing_round_trips() {
        for s in ["carpet:3", "cantor:5:1", "grid:4:2", "line:10", "random:20:2:9", "carpet:2@0.5"] {
            let spec: GeneratorSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        assert!("carpet".parse::<GeneratorSpec>().is_err());
        assert!("blob:3".parse::<GeneratorSpec>().is_err());
    }

    #[test]
    fn json_round_trip() {
        let p = generate(&GeneratorSpec::random(10, 2, 3)).unwrap();
        let back = PointSet::from_json(&p.to_json()).unwrap();
        assert_eq!(p, back);
        assert!(PointSet::from_json(r#"{"dim":2,"points":[[0,0],[0,0]],"label":"x"}"#).is_err());
        assert!(PointSet::from_json(r#"{"dim":2,"points":[[0,0,1]],"label":"x"}"#).is_err());
    }

    proptest! {
        #[test]
        fn carpet_self_similar(k in 1u32..4) {
            let small = generate(&GeneratorSpec::carpet(k)).unwrap();
            let big = generate(&GeneratorSpec::carpet(k + 1)).unwrap();
            let set: HashSet<(i64, i64)> = big
                .points
                .iter()
                .map(|p| (p.coords()[0] as i64, p.coords()[1] as i64))
                .collect();
            for p in &small.points {
                prop_assert!(set.contains(&(3 * p.coords()[0] as i64, 3 * p.coords()[1] as i64)));
            }
        }

        #[test]
        fn generators_are_deterministic(n in 1usize..60, d in 1usize..4, seed in any::<u64>()) {
            let spec = GeneratorSpec::random(n, d, seed);
            prop_assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
        }
    }
}
