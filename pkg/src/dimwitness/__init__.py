"""Model-independent dimension witnessing and leakage detection.

The toolkit turns a measured expectation time series into a matrix of
delayed vectors, validates its singular values against worst-case shot
noise, and reports how many survive — a lower bound on the rank, and hence
on the Hilbert-space dimension, of whatever produced the data. Simulation,
circuit emission and ingestion utilities exercise the witness end to end.
"""

__version__ = "0.1.0"

from .campaign import (
    CampaignConfig,
    CampaignReport,
    analyze_series_file,
    power_study,
    run_simulation_campaign,
    spectrum_dump,
)
from .dynamics import TimeSeries, exact_series, read_series, sample_series, write_series
from .errors import (
    ContractViolationError,
    DefectiveEvolutionError,
    DimensionMismatchError,
    DimWitnessError,
    IngestError,
    InvalidDimensionError,
    NumericalDriftError,
)
from .qasm import (
    CircuitSuite,
    CountsRecord,
    emit_single_qubit_suite,
    emit_two_qubit_suite,
    ingest_counts,
    simulate_counts,
    u3_angles,
    u3_matrix,
)
from .quantum import (
    HaarAngles,
    Observable,
    QuantumState,
    SpectralData,
    Superoperator,
    apply,
    basis_parity_observable,
    basis_state,
    choi_matrix,
    conjugated_observable,
    expectation,
    haar_unitary,
    identity_superop,
    is_trace_preserving,
    maximally_mixed,
    mix_superops,
    pure_state,
    qubit_unitary_from_angles,
    random_cptp,
    root_unitary,
    spectral_decompose,
    tensor_superop,
    unitary_superop,
)
from .witness import (
    DelayMatrix,
    RankReport,
    ValidationConfig,
    analyze,
    delay_matrix,
    p_value_bound,
    rank_ceiling,
    singular_values,
    threshold,
    validated_rank,
)

__all__ = [name for name in dir() if not name.startswith("_")]
