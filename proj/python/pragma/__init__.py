"""Pragmatic translation decoding."""

from ._core import (
    Model,
    PragmaError,
    beam_decode,
    bleu,
    decode_s1_cip,
    decode_s1_ip,
    fixture_model,
    greedy_decode,
    load_model,
    open_model,
    run_cli,
    s1_cgp_rerank,
    survey,
)

__all__ = [
    "Model",
    "PragmaError",
    "beam_decode",
    "bleu",
    "decode_s1_cip",
    "decode_s1_ip",
    "fixture_model",
    "greedy_decode",
    "load_model",
    "open_model",
    "run_cli",
    "s1_cgp_rerank",
    "survey",
]
