use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::Exp;
use serde::{Deserialize, Serialize};

use super::{IoKind, TraceRecord};
use crate::error::{Result, SimError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizeDist {
    Fixed(u64),
    /// (size in bytes, weight) pairs.
    Mixture(Vec<(u64, f64)>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AddressPattern {
    Sequential,
    UniformRandom,
    /// `hot_ratio` of accesses land in the first `hot_fraction` of the span.
    Locality { hot_fraction: f64, hot_ratio: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arrival {
    ClosedLoop,
    /// Mean rate in I/Os per second.
    Poisson(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub count: usize,
    pub read_fraction: f64,
    pub sizes: SizeDist,
    pub address: AddressPattern,
    pub arrival: Arrival,
    pub seed: u64,
    pub fua_fraction: f64,
    /// Address range in bytes.
    pub span: u64,
    /// Offset granularity in bytes.
    pub align: u64,
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let frac = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(SimError::Config(format!("workload.{name} must be in [0, 1]")))
            }
        };
        frac("read_fraction", self.read_fraction)?;
        frac("fua_fraction", self.fua_fraction)?;
        if let AddressPattern::Locality { hot_fraction, hot_ratio } = self.address {
            frac("hot_ratio", hot_ratio)?;
            if !(hot_fraction > 0.0 && hot_fraction < 1.0) {
                return Err(SimError::Config("workload.hot_fraction must be in (0, 1)".into()));
            }
        }
        match &self.sizes {
            SizeDist::Fixed(0) => return Err(SimError::Config("workload size must be > 0".into())),
            SizeDist::Mixture(m) if m.is_empty() || m.iter().any(|(s, w)| *s == 0 || w.is_nan() || *w < 0.0) => {
                return Err(SimError::Config("workload size mixture is invalid".into()))
            }
            _ => {}
        }
        if let Arrival::Poisson(rate) = self.arrival {
            if rate.is_nan() || rate <= 0.0 {
                return Err(SimError::Config("workload.rate_iops must be > 0".into()));
            }
        }
        if self.align == 0 || self.span < self.align {
            return Err(SimError::Config("workload span must cover at least one alignment unit".into()));
        }
        Ok(())
    }
}

/// Deterministic record stream for `spec`.
pub fn generate(spec: &SynthSpec) -> Result<Vec<TraceRecord>> {
    spec.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    let sizes: Vec<u64>;
    let picker = match &spec.sizes {
        SizeDist::Fixed(s) => {
            sizes = vec![*s];
            None
        }
        SizeDist::Mixture(m) => {
            sizes = m.iter().map(|p| p.0).collect();
            Some(WeightedIndex::new(m.iter().map(|p| p.1)).map_err(|e| SimError::Config(format!("size weights: {e}")))?)
        }
    };
    let gaps = match spec.arrival {
        Arrival::ClosedLoop => None,
        Arrival::Poisson(rate) => Some(Exp::new(rate / 1e6).map_err(|e| SimError::Config(e.to_string()))?),
    };
    let units = spec.span / spec.align;
    let hot_units = match spec.address {
        AddressPattern::Locality { hot_fraction, .. } => ((units as f64 * hot_fraction) as u64).clamp(1, units),
        _ => units,
    };
    let mut out = Vec::with_capacity(spec.count);
    let mut clock = 0.0;
    let mut cursor = 0u64;
    for _ in 0..spec.count {
        let length = match &picker {
            None => sizes[0],
            Some(w) => sizes[w.sample(&mut rng)],
        };
        let len_units = length.div_ceil(spec.align).max(1);
        let offset = match spec.address {
            AddressPattern::Sequential => {
                if cursor + len_units > units {
                    cursor = 0;
                }
                let o = cursor;
                cursor += len_units;
                o
            }
            AddressPattern::UniformRandom => rng.random_range(0..units.saturating_sub(len_units).max(1)),
            AddressPattern::Locality { hot_ratio, .. } => {
                let hot = rng.random::<f64>() < hot_ratio;
                let (lo, hi) = if hot || hot_units >= units { (0, hot_units) } else { (hot_units, units) };
                let hi = hi.saturating_sub(len_units).max(lo + 1);
                rng.random_range(lo..hi)
            }
        } * spec.align;
        let kind = if rng.random::<f64>() < spec.read_fraction { IoKind::Read } else { IoKind::Write };
        let fua = spec.fua_fraction > 0.0 && rng.random::<f64>() < spec.fua_fraction;
        if let Some(d) = &gaps {
            clock += d.sample(&mut rng);
        }
        out.push(TraceRecord { timestamp: clock, kind, offset, length, fua });
    }
    Ok(out)
}
