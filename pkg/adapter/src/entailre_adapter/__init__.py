"""Scoring worker that serves entailment logits over newline-delimited JSON.

The worker loads a pretrained sequence-classification NLI model, reads
request lines {"id", "premise", "hypothesis"} on stdin, and answers one
{"id", "entailment"} line per request on stdout, in order. It is the
reference endpoint for the ranking library's external-scorer protocol and
holds no other coupling to that library.
"""

from .config import AdapterConfig, AdapterError
from .model import NliModel
from .serve import serve

__all__ = ["AdapterConfig", "AdapterError", "NliModel", "serve"]

__version__ = "0.1.0"
