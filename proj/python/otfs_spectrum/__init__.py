"""OTFS/OFDM modulation, DAC reconstruction, PSD analysis and null-space precoding."""

from ._core import (
    ConfigError,
    Error,
    FeasibilityError,
    IndexError,
    InputError,
    analytic_psd,
    cep_component,
    cep_psd,
    compare,
    dft_matrix,
    discrete_spectrum,
    filter_response_sq,
    mask_from_pass_bands,
    modulate,
    periodogram,
    precode,
    precoders,
    preset_config,
    preset_names,
    random_stream,
    reconstruct,
    run_scenario,
)

__all__ = [
    "ConfigError",
    "Error",
    "FeasibilityError",
    "IndexError",
    "InputError",
    "analytic_psd",
    "cep_component",
    "cep_psd",
    "compare",
    "dft_matrix",
    "discrete_spectrum",
    "filter_response_sq",
    "mask_from_pass_bands",
    "modulate",
    "periodogram",
    "precode",
    "precoders",
    "preset_config",
    "preset_names",
    "random_stream",
    "reconstruct",
    "run_scenario",
]
