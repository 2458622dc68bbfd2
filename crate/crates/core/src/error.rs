use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("requests span multiple chips")]
    MultiChip,
    #[error("illegal plane-sharing group on die {die}")]
    IllegalGroup { die: u32 },
    #[error("virtual page {vpage} outside exported capacity of {exported} pages")]
    OutOfRange { vpage: u64, exported: u64 },
    #[error("virtual page {0} was never written")]
    Unmapped(u64),
    #[error("capacity exhausted on chip {chip} die {die}")]
    CapacityExhausted { chip: usize, die: u32 },
    #[error("trace: {0}")]
    Trace(String),
    #[error("simulation stalled {0}")]
    Stalled(String),
    #[error("baseline workload digest {baseline} does not match run digest {run}")]
    DigestMismatch { baseline: String, run: String },
}

impl SimError {
    /// True for problems with the inputs rather than with the run itself.
    pub fn is_input_error(&self) -> bool {
        matches!(self, SimError::Config(_) | SimError::Trace(_) | SimError::DigestMismatch { .. })
    }
}

pub type Result<T> = std::result::Result<T, SimError>;
