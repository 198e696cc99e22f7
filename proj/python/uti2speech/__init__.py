"""Ultrasound-to-speech pipeline bindings.

The heavy lifting lives in the C++ extension; this package re-exports it.
"""

from ._core import (  # noqa: F401
    HOP,
    SAMPLE_RATE,
    Uti2SpeechError,
    analyze,
    estimate_mvf,
    griffin_lim,
    mcd,
    mel_filterbank,
    mel_spectrogram,
    ranksum_test,
    read_wav,
    resample_hop,
    resize_frame,
    savgol_smooth,
    split_dataset,
    synthesize,
    track_contf0,
    waveform_to_melcepstra,
    write_wav,
)

__all__ = [
    "HOP",
    "SAMPLE_RATE",
    "Uti2SpeechError",
    "analyze",
    "estimate_mvf",
    "griffin_lim",
    "mcd",
    "mel_filterbank",
    "mel_spectrogram",
    "ranksum_test",
    "read_wav",
    "resample_hop",
    "resize_frame",
    "savgol_smooth",
    "split_dataset",
    "synthesize",
    "track_contf0",
    "waveform_to_melcepstra",
    "write_wav",
]
