use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::Serialize;

use super::jumps::{check_cutoff, compensation, default_cutoff, JumpSampler};
use crate::error::{Error, Result};
use crate::levy_model::{ModelFile, SubordinatorSpec};

/// Paths stop once the expected remainder drops below this fraction of the integral.
pub const RELATIVE_TAIL: f64 = 1e-12;

/// Sign of the exponent: `I = ∫ e^{-ζ}` (decreasing) or `I = ∫ e^{+ζ}` (increasing).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Decreasing,
    Increasing,
}

#[derive(Debug, Clone)]
pub struct SimulationOptions {
    pub samples: usize,
    pub seed: u64,
    /// Small-jump cutoff `ε`; `None` picks [`default_cutoff`].
    pub cutoff: Option<f64>,
    pub direction: Direction,
}

impl SimulationOptions {
    pub fn new(samples: usize, seed: u64) -> Self {
        Self {
            samples,
            seed,
            cutoff: None,
            direction: Direction::Decreasing,
        }
    }

    pub fn cutoff(mut self, cutoff: f64) -> Self {
        self.cutoff = Some(cutoff);
        self
    }

    pub fn direction(mut self, direction: Direction) -> Self {
        self.direction = direction;
        self
    }
}

/// Independent draws of the exponential functional.
#[derive(Debug, Clone, Serialize)]
pub struct SampleSet {
    pub model: ModelFile,
    pub seed: u64,
    pub cutoff: f64,
    /// Drift added for the jumps below `cutoff`.
    pub compensation: f64,
    pub direction: Direction,
    #[serde(skip)]
    pub values: Vec<f64>,
    /// Wall-clock time of the run; not part of the reproducible output.
    pub elapsed_secs: f64,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Sample mean of `I^r` and its standard error.
    pub fn moment(&self, r: f64) -> (f64, f64) {
        let m = self.values.len() as f64;
        let (s, s2) = self
            .values
            .iter()
            .map(|v| v.powf(r))
            .fold((0.0, 0.0), |(a, b), p| (a + p, b + p * p));
        let mean = s / m;
        let var = (s2 / m - mean * mean).max(0.0) * m / (m - 1.0).max(1.0);
        (mean, (var / m).sqrt())
    }

    pub fn sorted(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        v
    }

    /// Single `I` column.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "I")?;
        for v in &self.values {
            writeln!(out, "{v:e}")?;
        }
        Ok(())
    }

    /// Writes `path` and a one-line JSON sidecar `path.meta` with seed,
    /// cutoff, count and model.
    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = BufWriter::new(File::create(path)?);
        self.write_csv(&mut out)?;
        out.flush()?;
        let mut meta = serde_json::to_value(self)?;
        meta["samples"] = self.values.len().into();
        meta.as_object_mut().map(|m| m.remove("elapsed_secs"));
        let mut side = path.as_os_str().to_owned();
        side.push(".meta");
        std::fs::write(side, format!("{meta}\n"))?;
        Ok(())
    }
}

/// Piecewise-linear path of `ζ`: a segment of length `dt` starting at
/// height `z`, along which `ζ` grows at the effective drift.
pub(crate) struct PathModel<'a> {
    pub drift: f64,
    pub kill: f64,
    pub jumps: JumpSampler<'a>,
    /// `E ∫₀^∞ e^{-ζ_s} ds` scale used by the stopping rule, `1/(q + φ(1))`.
    pub remainder_scale: f64,
}

impl<'a> PathModel<'a> {
    pub fn new(spec: &'a SubordinatorSpec, cutoff: f64) -> Result<Self> {
        let tail = spec.tail_model().as_ref();
        let drift = spec.drift() + compensation(tail, cutoff)?;
        let jumps = JumpSampler::new(tail, cutoff)?;
        let remainder_scale = 1.0 / (spec.kill() + spec.laplace_exponent(1.0)?);
        Ok(Self {
            drift,
            kill: spec.kill(),
            jumps,
            remainder_scale,
        })
    }

    pub fn rng(seed: u64, path: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(path);
        rng
    }

    pub fn kill_time(&self, rng: &mut ChaCha8Rng) -> f64 {
        if self.kill > 0.0 {
            rng.sample::<f64, _>(Exp1) / self.kill
        } else {
            f64::INFINITY
        }
    }

    pub fn next_gap(&self, rng: &mut ChaCha8Rng) -> f64 {
        if self.jumps.rate > 0.0 {
            rng.sample::<f64, _>(Exp1) / self.jumps.rate
        } else {
            f64::INFINITY
        }
    }

    pub fn jump(&self, rng: &mut ChaCha8Rng) -> f64 {
        // u in (0, 1]
        let u = 1.0 - rng.random::<f64>();
        self.jumps.sample(u)
    }

    /// `∫₀^dt e^{-c̃s} ds`.
    pub fn decay_integral(&self, dt: f64) -> f64 {
        if self.drift > 0.0 {
            -(-self.drift * dt).exp_m1() / self.drift
        } else {
            dt
        }
    }

    /// `∫₀^dt e^{c̃s} ds`.
    pub fn growth_integral(&self, dt: f64) -> f64 {
        if self.drift > 0.0 {
            (self.drift * dt).exp_m1() / self.drift
        } else {
            dt
        }
    }

    fn decreasing(&self, rng: &mut ChaCha8Rng) -> f64 {
        let mut left = self.kill_time(rng);
        let mut z = 0.0f64;
        let mut acc = 0.0;
        loop {
            let gap = self.next_gap(rng);
            let dt = gap.min(left);
            if dt.is_infinite() {
                // no more jumps and no killing: pure drift to the end
                return acc + (-z).exp() / self.drift;
            }
            acc += (-z).exp() * self.decay_integral(dt);
            z += self.drift * dt;
            if gap >= left {
                return acc;
            }
            left -= gap;
            z += self.jump(rng);
            if (-z).exp() * self.remainder_scale < RELATIVE_TAIL * acc {
                return acc;
            }
        }
    }

    fn increasing(&self, rng: &mut ChaCha8Rng) -> f64 {
        let mut left = self.kill_time(rng);
        let mut z = 0.0f64;
        let mut acc = 0.0;
        loop {
            let gap = self.next_gap(rng);
            let dt = gap.min(left);
            acc += z.exp() * self.growth_integral(dt);
            z += self.drift * dt;
            if gap >= left {
                return acc;
            }
            left -= gap;
            z += self.jump(rng);
        }
    }
}

/// Draws `samples` independent copies of `I`; path `i` uses ChaCha8 stream
/// `i` of `seed`, so the output does not depend on the thread count.
pub fn simulate(spec: &SubordinatorSpec, opts: &SimulationOptions) -> Result<SampleSet> {
    if opts.samples == 0 {
        return Err(Error::Domain("need at least one sample".into()));
    }
    if opts.direction == Direction::Increasing && spec.kill() == 0.0 {
        return Err(Error::InfiniteFunctional(
            "the increasing functional is finite only with killing (q > 0)".into(),
        ));
    }
    let cutoff = match opts.cutoff {
        Some(c) => c,
        None => default_cutoff(spec)?,
    };
    check_cutoff(cutoff)?;
    let start = Instant::now();
    let model = PathModel::new(spec, cutoff)?;
    let values: Vec<f64> = (0..opts.samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = PathModel::rng(opts.seed, i);
            match opts.direction {
                Direction::Decreasing => model.decreasing(&mut rng),
                Direction::Increasing => model.increasing(&mut rng),
            }
        })
        .collect();
    if let Some((i, v)) = values
        .iter()
        .enumerate()
        .find(|(_, v)| !(v.is_finite() && **v > 0.0))
    {
        return Err(Error::Degenerate(format!("path {i} produced I = {v}")));
    }
    Ok(SampleSet {
        model: spec.to_file(),
        seed: opts.seed,
        cutoff,
        compensation: model.drift - spec.drift(),
        direction: opts.direction,
        values,
        elapsed_secs: start.elapsed().as_secs_f64(),
    })
}
