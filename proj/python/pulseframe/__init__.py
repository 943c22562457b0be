"""Imaging-based pulse recovery: channel-trace and motion pipelines."""

from ._pulseframe import (  # noqa: F401
    PulseframeError,
    butter_bandpass,
    chrom,
    detrend,
    estimate_hr,
    filtfilt,
    green,
    hann,
    hr_series,
    ibcg,
    ica,
    jade,
    lomb,
    mae,
    normalize_window,
    pca,
    pos,
    power_spectrum,
    rmse,
    select_source,
    skin_mask,
    snr,
    whiten,
    window_starts,
    zscore,
    __version__,
)
