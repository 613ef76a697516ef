use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::quad::{integrate, Tolerance};

/// Binned probability density with explicit tail masses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramDensity {
    pub edges: Vec<f64>,
    pub counts: Vec<f64>,
    /// Total weight, including the tails.
    pub n: f64,
    /// Weight below `edges[0]`.
    pub below: f64,
    /// Weight above the last edge, including samples at infinity.
    pub above: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    bin_left: f64,
    bin_right: f64,
    count: f64,
    density: f64,
}

impl HistogramDensity {
    pub fn with_edges(edges: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 || edges.windows(2).any(|w| !(w[1] > w[0])) || edges.iter().any(|e| !e.is_finite()) {
            return invalid("histogram edges must be finite and strictly increasing");
        }
        let bins = edges.len() - 1;
        Ok(HistogramDensity { edges, counts: vec![0.0; bins], n: 0.0, below: 0.0, above: 0.0 })
    }

    /// `bins` equal bins on `[lo, hi]`.
    pub fn uniform(lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if bins == 0 || !(hi > lo) {
            return invalid("need hi > lo and at least one bin");
        }
        let w = (hi - lo) / bins as f64;
        let mut edges: Vec<f64> = (0..=bins).map(|i| lo + w * i as f64).collect();
        edges[bins] = hi;
        Self::with_edges(edges)
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn lo(&self) -> f64 {
        self.edges[0]
    }

    pub fn hi(&self) -> f64 {
        self.edges[self.bins()]
    }

    pub fn width(&self, i: usize) -> f64 {
        self.edges[i + 1] - self.edges[i]
    }

    pub fn center(&self, i: usize) -> f64 {
        0.5 * (self.edges[i] + self.edges[i + 1])
    }

    /// Bin index of `z`, if inside the range.
    pub fn locate(&self, z: f64) -> Option<usize> {
        if !(z >= self.lo() && z < self.hi()) {
            return None;
        }
        let b = self.bins();
        let w0 = self.width(0);
        // Fast path for uniform bins, corrected by a local search.
        let mut i = (((z - self.lo()) / w0) as usize).min(b - 1);
        while i > 0 && z < self.edges[i] {
            i -= 1;
        }
        while i + 1 < b && z >= self.edges[i + 1] {
            i += 1;
        }
        Some(i)
    }

    pub fn add_weighted(&mut self, z: f64, w: f64) {
        self.n += w;
        match self.locate(z) {
            Some(i) => self.counts[i] += w,
            None if z < self.lo() => self.below += w,
            None => self.above += w,
        }
    }

    /// Adds one sample; infinity and NaN count towards the upper tail.
    pub fn add(&mut self, z: f64) {
        self.add_weighted(z, 1.0)
    }

    /// Adds the counts of another histogram with identical edges.
    pub fn merge(&mut self, other: &HistogramDensity) -> Result<()> {
        if other.edges != self.edges {
            return invalid("cannot merge histograms with different edges");
        }
        for (c, o) in self.counts.iter_mut().zip(&other.counts) {
            *c += o;
        }
        self.n += other.n;
        self.below += other.below;
        self.above += other.above;
        Ok(())
    }

    /// Probability mass of bin `i`.
    pub fn mass(&self, i: usize) -> f64 {
        self.counts[i] / self.n
    }

    pub fn density(&self, i: usize) -> f64 {
        self.mass(i) / self.width(i)
    }

    pub fn tail_mass(&self) -> f64 {
        (self.below + self.above) / self.n
    }

    /// `∫ density` over the binned range, which is `1 − tail mass`.
    pub fn integral(&self) -> f64 {
        (0..self.bins()).map(|i| self.density(i) * self.width(i)).sum()
    }

    /// CDF with linear interpolation inside bins; the lower tail mass sits
    /// to the left of the range.
    pub fn cdf(&self, x: f64) -> f64 {
        let mut acc = self.below / self.n;
        if x < self.lo() {
            return 0.0;
        }
        for i in 0..self.bins() {
            if x >= self.edges[i + 1] {
                acc += self.mass(i);
            } else {
                acc += self.mass(i) * (x - self.edges[i]) / self.width(i);
                return acc;
            }
        }
        acc
    }

    /// Expected histogram of `n` samples from the density `f`.
    pub fn from_density<F: Fn(f64) -> f64>(f: F, edges: Vec<f64>, n: f64) -> Result<Self> {
        let mut h = Self::with_edges(edges)?;
        let tol = Tolerance { abs: 1e-13, rel: 1e-11 };
        for i in 0..h.bins() {
            h.counts[i] = n * integrate(&f, h.edges[i], h.edges[i + 1], tol)?.value;
        }
        h.below = n * integrate(&f, f64::NEG_INFINITY, h.lo(), tol)?.value;
        h.above = n * integrate(&f, h.hi(), f64::INFINITY, tol)?.value;
        h.n = n;
        Ok(h)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for i in 0..self.bins() {
            out.serialize(Row {
                bin_left: self.edges[i],
                bin_right: self.edges[i + 1],
                count: self.counts[i],
                density: self.density(i),
            })?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    /// Reads a histogram written by [`write_csv`](Self::write_csv). Tail
    /// masses are not stored and come back as zero.
    pub fn load_csv(path: &Path) -> Result<Self> {
        let mut rd = csv::Reader::from_path(path)?;
        let mut edges = Vec::new();
        let mut counts = Vec::new();
        for row in rd.deserialize() {
            let r: Row = row?;
            if edges.is_empty() {
                edges.push(r.bin_left);
            }
            edges.push(r.bin_right);
            counts.push(r.count);
        }
        let mut h = Self::with_edges(edges)?;
        h.n = counts.iter().sum();
        h.counts = counts;
        Ok(h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_and_tails() {
        let mut h = HistogramDensity::uniform(-1.0, 1.0, 4).unwrap();
        for z in [-2.0, -0.9, -0.1, 0.1, 0.2, 0.7, f64::INFINITY, 3.0] {
            h.add(z);
        }
        assert_eq!(h.below, 1.0);
        assert_eq!(h.above, 2.0);
        assert!((h.integral() - (1.0 - h.tail_mass())).abs() < 1e-15);
        assert!((h.cdf(1.0) - 6.0 / 8.0).abs() < 1e-15);
        assert_eq!(h.locate(-1.0), Some(0));
        assert_eq!(h.locate(1.0), None);
    }

    #[test]
    fn from_density_cauchy() {
        let f = |z: f64| 1.0 / (std::f64::consts::PI * (1.0 + z * z));
        let h = HistogramDensity::from_density(f, HistogramDensity::uniform(-10.0, 10.0, 40).unwrap().edges, 1.0)
            .unwrap();
        let tail = 2.0 * (1.0 / 10f64).atan() / std::f64::consts::PI;
        assert!((h.tail_mass() - tail).abs() < 1e-10);
        assert!((h.integral() + h.tail_mass() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn csv_roundtrip() {
        let mut h = HistogramDensity::uniform(0.0, 1.0, 3).unwrap();
        h.add(0.1);
        h.add(0.5);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("h.csv");
        h.save_csv(&p).unwrap();
        let back = HistogramDensity::load_csv(&p).unwrap();
        assert_eq!(back.counts, h.counts);
        assert!((back.edges[3] - 1.0).abs() < 1e-15);
    }
}
