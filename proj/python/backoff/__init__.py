from ._backoff import (
    BackoffError,
    DivergentSeries,
    DomainError,
    HeavyInterTx,
    InsufficientData,
    InsufficientTrace,
    InvalidParams,
    NoConvergence,
    PoorFit,
    ProtocolParams,
    SeriesTooShort,
    backoff_stats,
    estimate_ell,
    fairness_spec,
    gaussian_inter_tx,
    hurst,
    pdf_backoff,
    sample_backoff,
    simulate,
    solve_fixed_point,
)

__all__ = [name for name in dir() if not name.startswith("_")]
