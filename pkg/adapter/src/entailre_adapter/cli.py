"""Command-line entry point: serve the scoring protocol over stdio.

Exit codes: 0 success / clean EOF; 1 configuration or model-fit errors and a
failed self-test; 2 usage and I/O errors (unloadable checkpoint path).
"""

from __future__ import annotations

import argparse
import sys

from .config import AdapterConfig, AdapterError
from .model import NliModel
from .serve import serve


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entailre-nli-adapter",
        description="Serve raw entailment logits for premise-hypothesis "
        "pairs over newline-delimited JSON on stdio.",
    )
    parser.add_argument("--model", required=True,
                        help="checkpoint directory or hub identifier")
    parser.add_argument("--batch-size", type=int, default=16,
                        help="maximum pairs forwarded together (default 16)")
    parser.add_argument("--device", default="cpu",
                        help="torch device for the forward pass (default cpu)")
    parser.add_argument("--entailment-index", type=int, default=2,
                        help="entailment column of the classification head "
                        "(default 2)")
    parser.add_argument("--selftest", action="store_true",
                        help="score the built-in entailed/contradicted pair, "
                        "report the ordering, and exit instead of serving")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:  # keep the stdout protocol channel free of library chatter
        from transformers.utils import logging as hf_logging

        hf_logging.set_verbosity_error()
        hf_logging.disable_progress_bar()
    except ImportError:
        pass
    try:
        config = AdapterConfig(
            model=args.model,
            batch_size=args.batch_size,
            device=args.device,
            entailment_index=args.entailment_index,
        )
        model = NliModel(config)
    except AdapterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: cannot load {args.model!r}: {exc}", file=sys.stderr)
        return 2
    if args.selftest:
        entailed, contradicted = model.sanity_ordering()
        ok = entailed > contradicted
        print(
            f"sanity ordering {'PASS' if ok else 'FAIL'}: "
            f"entailed {entailed:.6f} vs contradicted {contradicted:.6f}"
        )
        return 0 if ok else 1
    serve(model)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
