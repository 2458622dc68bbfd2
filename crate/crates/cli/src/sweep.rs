use rayon::prelude::*;
use ssdsim_core::{simulate, Config, MetricsReport, PolicyKind, SimError};

/// Cross product of sweep axes over a base configuration. Empty axes keep
/// the base value.
pub struct Plan {
    pub base: Config,
    pub root_seed: u64,
    pub chips: Vec<u32>,
    pub sizes: Vec<u64>,
    pub policies: Vec<PolicyKind>,
}

pub struct Cell {
    pub chips: u32,
    pub size: Option<u64>,
    pub policy: PolicyKind,
    pub config: Config,
}

impl Cell {
    pub fn name(&self) -> String {
        let size = self.size.map_or_else(|| "mix".to_string(), |s| s.to_string());
        format!("chips{}_size{}_{}", self.chips, size, self.policy)
    }

    fn same_workload(&self, other: &Cell) -> bool {
        self.chips == other.chips && self.size == other.size
    }
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl Plan {
    /// Seeds depend on the root seed and the chip and size coordinates only,
    /// so every policy in a row sees the same workload.
    fn seed(&self, chips: Option<u32>, size: Option<u64>) -> u64 {
        let mut s = self.root_seed;
        if let Some(c) = chips {
            s = mix(s ^ c as u64);
        }
        if let Some(z) = size {
            s = mix(s ^ z.rotate_left(32));
        }
        s
    }

    pub fn cells(&self) -> Vec<Cell> {
        let chips: Vec<Option<u32>> =
            if self.chips.is_empty() { vec![None] } else { self.chips.iter().copied().map(Some).collect() };
        let sizes: Vec<Option<u64>> =
            if self.sizes.is_empty() { vec![None] } else { self.sizes.iter().copied().map(Some).collect() };
        let mut out = Vec::new();
        for &c in &chips {
            for &z in &sizes {
                for &policy in &self.policies {
                    let mut config = self.base.clone();
                    if let Some(n) = c {
                        config.geometry = config.geometry.with_total_chips(n);
                    }
                    if let Some(s) = z {
                        config.workload.sizes = vec![s];
                        config.workload.size_weights.clear();
                    }
                    config.workload.seed = self.seed(c, z);
                    config.policy.name = policy;
                    let size = z.or(match config.workload.sizes.as_slice() {
                        [s] => Some(*s),
                        _ => None,
                    });
                    out.push(Cell { chips: config.geometry.total_chips() as u32, size, policy, config });
                }
            }
        }
        out
    }
}

/// Runs every cell on the current rayon pool, then pairs each non-VAS cell
/// with the VAS cell of the same row when there is one.
pub fn execute(cells: &[Cell]) -> Vec<Result<MetricsReport, SimError>> {
    let mut results: Vec<_> = cells.par_iter().map(|c| simulate(&c.config, None)).collect();
    for i in 0..cells.len() {
        let base = cells
            .iter()
            .position(|b| b.policy == PolicyKind::Vas && b.same_workload(&cells[i]))
            .filter(|&b| b != i);
        let Some(b) = base else { continue };
        let Ok(baseline) = results[b].clone() else { continue };
        if let Ok(r) = &mut results[i] {
            if let Err(e) = r.compare_to(&baseline) {
                results[i] = Err(e);
            }
        }
    }
    results
}

/// Accepts plain bytes or a `K`/`M` suffix (binary units), e.g. `16K`, `4MB`.
pub fn parse_size(s: &str) -> Result<u64, String> {
    let t = s.trim().to_ascii_uppercase();
    let t = t.strip_suffix('B').unwrap_or(&t);
    let (digits, unit) = match t.chars().last() {
        Some('K') => (&t[..t.len() - 1], 1024),
        Some('M') => (&t[..t.len() - 1], 1024 * 1024),
        _ => (t, 1),
    };
    match digits.parse::<u64>() {
        Ok(n) if n > 0 => Ok(n * unit),
        _ => Err(format!("'{s}' is not a transfer size like 4096, 16K or 4M")),
    }
}
