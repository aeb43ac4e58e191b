use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("a gap sequence needs at least 2 gaps, got {0}")]
    TooFewGaps(usize),
    #[error("gaps must be positive and finite")]
    NonPositiveGap,
    #[error("renewal window is empty")]
    EmptyWindow,
    #[error("query index {index} outside trace window [{lo}, {hi}]")]
    OutsideWindow { index: i64, lo: i64, hi: i64 },
    #[error("trace window [{lo}, {hi}] does not cover the weight support")]
    WindowTooSmall { lo: i64, hi: i64 },
    #[error("all gaps merged; configuration is degenerate")]
    Degenerate,
    #[error("weight sequence has no nonzero entry")]
    AllZeroWeights,
    #[error("weight support of width {support} exceeds gap count {gaps}")]
    SupportExceedsGaps { support: usize, gaps: usize },
    #[error("empty sample")]
    EmptySample,
    #[error("operation requires a weight sequence anchored at index 0 with nonnegative support")]
    UnanchoredSupport,
    #[error("trajectory does not record the trace for step {0}")]
    MissingTrace(u32),
    #[error("the mean-zero algorithm has no closed-form intensity; use empirical rescale")]
    TheoreticalRescaleUnavailable,
    #[error("expected a trace with law {expected:?}, got {got:?}")]
    WrongRenewalLaw {
        expected: crate::laws::RenewalLaw,
        got: crate::laws::RenewalLaw,
    },
}
