use std::io::Write;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::HistogramDensity;
use crate::ensembles::RandomStream;
use crate::error::{invalid, Error, Result};
use crate::stats::{BatchMeans, Estimate, BATCHES};

/// Largest step the integrator is meant to be used with.
pub fn default_dt(energy: f64) -> f64 {
    1e-3 * (1.0f64).min(1.0 / (energy.abs() + 1.0).sqrt())
}

pub fn default_z_max(energy: f64) -> f64 {
    (100.0f64).max(10.0 * (energy.abs() + 1.0).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdeOptions {
    pub energy: f64,
    /// `σ` in `V = √σ B'`.
    pub noise_strength: f64,
    pub length: f64,
    pub dt: Option<f64>,
    pub z_max: Option<f64>,
    /// Filled with the time-stationary law of `Z` when present.
    pub histogram: Option<HistogramDensity>,
}

impl SdeOptions {
    pub fn new(energy: f64, noise_strength: f64, length: f64) -> Self {
        SdeOptions { energy, noise_strength, length, dt: None, z_max: None, histogram: None }
    }

    fn resolve(&self) -> Result<(f64, f64)> {
        if !(self.noise_strength >= 0.0) || !self.energy.is_finite() {
            return invalid("need finite energy and σ ≥ 0");
        }
        let dt = self.dt.unwrap_or_else(|| default_dt(self.energy));
        let z_max = self.z_max.unwrap_or_else(|| default_z_max(self.energy));
        if !(dt > 0.0) || !(z_max >= 10.0) {
            return invalid("need dt > 0 and z_max ≥ 10");
        }
        if dt > default_dt(self.energy) * (1.0 + 1e-12) {
            log::warn!("dt = {dt} exceeds the recommended {}", default_dt(self.energy));
        }
        Ok((dt, z_max))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdeRun {
    /// Passages through infinity per unit length.
    pub ids: Estimate,
    /// Time average of `Z` (blow-ups clipped symmetrically at ±Z_max).
    pub gamma: Estimate,
    pub crossings: u64,
    pub steps: u64,
    pub histogram: Option<HistogramDensity>,
}

/// Euler–Maruyama integration of `dZ = −(Z² + E) dx + √σ dB` over
/// `[0, L]`, reinjecting at `+Z_max` whenever `Z < −Z_max`.
pub fn sde_white_noise_run(opts: &SdeOptions, rng: RandomStream) -> Result<SdeRun> {
    let (dt, z_max) = opts.resolve()?;
    if !(opts.length > 0.0) {
        return invalid("length must be positive");
    }
    let seed = rng.seed();
    let mut rng = rng;
    let steps = (opts.length / dt).ceil() as u64;
    let sq = (opts.noise_strength * dt).sqrt();
    let e = opts.energy;
    let mut hist = opts.histogram.clone();
    let mut ids = BatchMeans::new(steps, BATCHES);
    let mut gamma = BatchMeans::new(steps, BATCHES);
    let mut z = z_max;
    let mut crossings = 0u64;
    let mut large = 0u64;
    for _ in 0..steps {
        let g: f64 = rng.sample(StandardNormal);
        let dz = -(z * z + e) * dt + sq * g;
        if dz.abs() > 0.5 * z_max {
            large += 1;
        }
        z += dz;
        let mut crossed = 0.0;
        if z < -z_max {
            crossings += 1;
            crossed = 1.0 / dt;
            z = z_max;
        }
        ids.push(crossed);
        gamma.push(z);
        if let Some(h) = hist.as_mut() {
            h.add(z);
        }
    }
    let frac = large as f64 / steps as f64;
    if frac > 1e-3 {
        return Err(Error::StepTooLarge(frac));
    }
    let length = steps as f64 * dt;
    Ok(SdeRun {
        ids: Estimate { value: crossings as f64 / length, stderr: ids.stderr(), n: steps, seed },
        gamma: Estimate { value: gamma.mean(), stderr: gamma.stderr(), n: steps, seed },
        crossings,
        steps,
        histogram: hist,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstPassageOptions {
    pub energy: f64,
    pub noise_strength: f64,
    /// Total number of passage times.
    pub samples: usize,
    /// Window length for the level-count table.
    pub window: f64,
    /// Independent renewal sequences; sequence `r` uses stream `(seed, r)`.
    pub replicas: u32,
    pub dt: Option<f64>,
    pub z_max: Option<f64>,
    /// Give up on a single passage after this time.
    pub max_time: f64,
}

impl FirstPassageOptions {
    pub fn new(energy: f64, noise_strength: f64, samples: usize, window: f64) -> Self {
        FirstPassageOptions {
            energy,
            noise_strength,
            samples,
            window,
            replicas: 16,
            dt: None,
            z_max: None,
            max_time: 1e7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirstPassageStats {
    /// Times from reinjection at `+Z_max` to the next passage below `−Z_max`.
    pub taus: Vec<f64>,
    pub mean: Estimate,
    /// Number of passages in consecutive windows of the renewal sequences.
    pub window_counts: Vec<u64>,
}

impl FirstPassageStats {
    /// Empirical CDF of `τ₁`.
    pub fn ecdf(&self, t: f64) -> f64 {
        self.taus.iter().filter(|&&x| x <= t).count() as f64 / self.taus.len() as f64
    }

    /// Table `counts[k]` = number of windows holding exactly `k` levels.
    pub fn count_table(&self) -> Vec<u64> {
        let max = self.window_counts.iter().copied().max().unwrap_or(0) as usize;
        let mut t = vec![0u64; max + 1];
        for &c in &self.window_counts {
            t[c as usize] += 1;
        }
        t
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["tau"])?;
        for t in &self.taus {
            out.write_record([format!("{t:e}")])?;
        }
        out.flush()?;
        Ok(())
    }
}

fn passage_sequence(
    opts: &FirstPassageOptions,
    count: usize,
    dt: f64,
    z_max: f64,
    mut rng: RandomStream,
) -> Result<Vec<f64>> {
    let sq = (opts.noise_strength * dt).sqrt();
    let e = opts.energy;
    let cap = (opts.max_time / dt).ceil() as u64;
    let mut taus = Vec::with_capacity(count);
    for _ in 0..count {
        let mut z = z_max;
        let mut steps = 0u64;
        loop {
            let g: f64 = rng.sample(StandardNormal);
            z += -(z * z + e) * dt + sq * g;
            steps += 1;
            if z < -z_max {
                break;
            }
            if steps >= cap {
                return Err(Error::NonConvergence { iterations: steps as usize, last_change: z });
            }
        }
        taus.push(steps as f64 * dt);
    }
    Ok(taus)
}

/// Passage times of the Riccati diffusion from `+Z_max` to `−∞` (the
/// position of the lowest level of a long sample) and level counts in
/// windows of length `opts.window`.
pub fn first_passage_stats(opts: &FirstPassageOptions, seed: u64) -> Result<FirstPassageStats> {
    let base = SdeOptions {
        energy: opts.energy,
        noise_strength: opts.noise_strength,
        length: 1.0,
        dt: opts.dt,
        z_max: opts.z_max,
        histogram: None,
    };
    let (dt, z_max) = base.resolve()?;
    if opts.samples == 0 || opts.replicas == 0 || !(opts.window > 0.0) {
        return invalid("need samples, replicas and a positive window");
    }
    let r = opts.replicas as usize;
    let chunks: Vec<usize> = (0..r).map(|i| opts.samples / r + usize::from(i < opts.samples % r)).collect();
    let runs: Vec<Result<Vec<f64>>> = chunks
        .par_iter()
        .enumerate()
        .map(|(i, &c)| passage_sequence(opts, c, dt, z_max, RandomStream::new(seed, i as u64)))
        .collect();
    let mut taus = Vec::with_capacity(opts.samples);
    let mut window_counts = Vec::new();
    for run in runs {
        let seq = run?;
        let mut t = 0.0;
        let mut edge = opts.window;
        let mut c = 0u64;
        for tau in &seq {
            t += tau;
            while t >= edge {
                window_counts.push(c);
                c = 0;
                edge += opts.window;
            }
            c += 1;
        }
        taus.extend(seq);
    }
    let mut b = BatchMeans::new(taus.len() as u64, BATCHES);
    for t in &taus {
        b.push(*t);
    }
    let mean = Estimate { value: b.mean(), stderr: b.stderr(), n: taus.len() as u64, seed };
    Ok(FirstPassageStats { taus, mean, window_counts })
}
