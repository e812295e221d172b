"""Command-line interface.

Subcommands: verbalize, train, predict, eval, ead, subsample, gradcheck,
experiment, synth. Exit codes: 0 success, 1 failed validation or failed
metric (bad labels, masks, spans, gradient-check failures), 2 usage or
I/O problems (missing or malformed files, protocol failures).

--config FILE reads flat key=value lines (keys are the long option names
of value-taking flags); explicit flags win over the file, the file wins
over built-in defaults.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import datasets
from .core import LossConfig
from .errors import (
    CheckpointError,
    EntailreError,
    ParseError,
    ProtocolError,
    ScorerTimeout,
)
from .evaluate import micro_f1, report_text, save_report
from .experiment import ExperimentConfig, run_experiment
from .gradcheck import check_chain_gradients, check_loss_gradients, check_score_gradients
from .inference import (
    ead_threshold_sweep,
    ead_train,
    load_predictions,
    predict,
    save_ead_model,
    save_predictions,
    score_instances,
)
from .ingest import (
    FORMATS,
    SUBSAMPLE_MODES,
    DatasetFile,
    SubsampleSpec,
    load_instances,
    save_instances,
    subsample,
)
from .scorer.external import ExternalScorer
from .scorer.mock import MockScorer
from .scorer.toy import ToyScorer, load_checkpoint, save_checkpoint
from .synthetic import write_corpus
from .trainer import TrainConfig, train
from .verbalizer import (
    FAMILIES,
    build_queries,
    load_template_bank,
    sample_exemplars,
    shipped_bank,
)

_USAGE_EXIT = 2
_VALIDATION_EXIT = 1


def _add_data_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dataset", required=True, choices=datasets.registered_datasets())
    p.add_argument("--format", default="tsv-masked", choices=FORMATS)
    p.add_argument("--bank", default=None, help="template bank TSV overriding the shipped one")


def _add_loss_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tau", type=float, default=0.01)
    p.add_argument("--gamma", type=float, default=0.7)
    p.add_argument("--lam", type=float, default=1.0)
    p.add_argument("--negatives", default="all", help='"all" or a positive count')


def _add_train_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--epochs", type=int, default=300)
    p.add_argument("--step-size", type=float, default=0.05)
    p.add_argument("--eval-every", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--hash-dim", type=int, default=65536)
    p.add_argument("--hidden", type=int, default=64)


def _add_subsample_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--subsample-mode", default=None, choices=SUBSAMPLE_MODES)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--subsample-seed", type=int, default=0)


def _loss_config(args: argparse.Namespace) -> LossConfig:
    negatives = args.negatives
    if isinstance(negatives, str) and negatives != "all":
        try:
            negatives = int(negatives)
        except ValueError as exc:
            raise ValueError(f'--negatives must be "all" or an integer, got {negatives!r}') from exc
    return LossConfig(tau=args.tau, gamma=args.gamma, lam=args.lam, negatives=negatives)


def _train_config(args: argparse.Namespace) -> TrainConfig:
    return TrainConfig(
        epochs=args.epochs,
        step_size=args.step_size,
        eval_every=args.eval_every,
        seed=args.seed,
        hash_dim=args.hash_dim,
        hidden=args.hidden,
    )


def _subsample_spec(args: argparse.Namespace) -> SubsampleSpec | None:
    if getattr(args, "subsample_mode", None) is None:
        return None
    return SubsampleSpec(mode=args.subsample_mode, k=args.k, p=args.p, seed=args.subsample_seed)


def _bank_for(args: argparse.Namespace):
    if args.bank:
        return load_template_bank(args.bank, args.dataset)
    return shipped_bank(args.dataset)


def _exemplars(args: argparse.Namespace, instances, space):
    seed = getattr(args, "exemplar_seed", None)
    if seed is None:
        return None
    return sample_exemplars(instances, space, seed)


def cmd_verbalize(args: argparse.Namespace) -> int:
    space = datasets.label_space(args.dataset)
    bank = _bank_for(args)
    instances = load_instances(DatasetFile(args.input, args.format), space)
    exemplars = _exemplars(args, instances, space)
    queries = build_queries(instances, space, bank, args.family, exemplars)
    lines = [
        f"{q.instance_id}\t{q.label_id}\t{q.premise}\t{q.hypothesis}" for q in queries
    ]
    body = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(body, encoding="utf-8")
    else:
        sys.stdout.write(body)
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    space = datasets.label_space(args.dataset)
    bank = _bank_for(args)
    train_data = load_instances(DatasetFile(args.train, args.format, "train"), space)
    spec = _subsample_spec(args)
    if spec is not None:
        train_data = subsample(train_data, spec, space)
    dev_data = (
        load_instances(DatasetFile(args.dev, args.format, "dev"), space) if args.dev else []
    )
    exemplars = _exemplars(args, train_data, space)
    params, history = train(
        train_data, dev_data, space, bank, args.family, _loss_config(args), _train_config(args), exemplars
    )
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_checkpoint(
        out / "checkpoint.npz",
        params,
        {"kind": "ranker", "dataset_id": args.dataset, "family": args.family},
    )
    rows = ["epoch\ttrain_loss\tdev_f1"]
    for rec in history:
        dev = "" if rec.dev_f1 is None else repr(rec.dev_f1)
        rows.append(f"{rec.epoch}\t{rec.train_loss!r}\t{dev}")
    (out / "history.tsv").write_text("\n".join(rows) + "\n", encoding="utf-8")
    best = max((r.dev_f1 for r in history if r.dev_f1 is not None), default=None)
    if best is not None:
        print(f"best dev micro_f1\t{best!r}")
    print(f"checkpoint\t{out / 'checkpoint.npz'}")
    return 0


def _scorer_for(args: argparse.Namespace, space):
    if args.scorer == "toy":
        if not args.checkpoint:
            raise ValueError("--scorer toy needs --checkpoint")
        params, meta = load_checkpoint(args.checkpoint)
        return ToyScorer(params), meta
    if args.scorer == "mock":
        if not args.mock_table:
            raise ValueError("--scorer mock needs --mock-table")
        return MockScorer.from_file(args.mock_table), {}
    if not args.cmd:
        raise ValueError("--scorer external needs --cmd")
    return ExternalScorer.from_command(args.cmd.split()), {}


def cmd_predict(args: argparse.Namespace) -> int:
    space = datasets.label_space(args.dataset)
    bank = _bank_for(args)
    instances = load_instances(DatasetFile(args.input, args.format), space)
    scorer, meta = _scorer_for(args, space)
    family = args.family or meta.get("family")
    if not family:
        raise ValueError("no --family given and the checkpoint does not record one")
    exemplars = _exemplars(args, instances, space)
    try:
        if args.jobs > 1 and args.scorer != "external":
            chunks = [instances[i :: args.jobs] for i in range(args.jobs)]
            with ThreadPoolExecutor(max_workers=args.jobs) as pool:
                parts = list(
                    pool.map(
                        lambda ch: score_instances(ch, space, bank, family, scorer, exemplars),
                        chunks,
                    )
                )
            by_id = {sv.instance_id: sv for part in parts for sv in part}
            vectors = [by_id[inst.instance_id] for inst in instances]
        else:
            vectors = score_instances(instances, space, bank, family, scorer, exemplars)
    finally:
        if args.scorer == "external":
            scorer.close()
    preds = [predict(sv, space) for sv in vectors]
    save_predictions(preds, space, args.out)
    print(f"predictions\t{args.out}")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    space = datasets.label_space(args.dataset)
    instances = load_instances(DatasetFile(args.input, args.format), space)
    preds = load_predictions(args.predictions, space)
    by_id = {p.instance_id: p for p in preds}
    missing = [inst.instance_id for inst in instances if inst.instance_id not in by_id]
    if missing:
        raise ParseError(f"predictions lack {len(missing)} instances, e.g. {missing[:3]}")
    report = micro_f1(
        [inst.gold for inst in instances],
        [by_id[inst.instance_id].predicted for inst in instances],
        space,
    )
    sys.stdout.write(report_text(report))
    if args.out_txt or args.out_json:
        save_report(
            report,
            args.out_txt or (args.predictions + ".report.txt"),
            args.out_json or (args.predictions + ".report.json"),
        )
    return 0


def cmd_ead(args: argparse.Namespace) -> int:
    space = datasets.label_space(args.dataset)
    bank = _bank_for(args)
    train_data = load_instances(DatasetFile(args.train, args.format, "train"), space)
    dev_data = load_instances(DatasetFile(args.dev, args.format, "dev"), space)
    model = ead_train(train_data, dev_data, space, _loss_config(args), _train_config(args), bank)
    params, meta = load_checkpoint(args.ranker_checkpoint)
    family = meta.get("family", args.family)
    ranker = ToyScorer(params)
    dev_vectors = score_instances(dev_data, space, bank, family, ranker)
    dev_preds = [predict(sv, space) for sv in dev_vectors]
    model.threshold = ead_threshold_sweep(model, dev_data, dev_preds, space, args.heuristic)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_ead_model(model, out / "ead.npz")
    print(f"threshold\t{model.threshold!r}")
    print(f"detector\t{out / 'ead.npz'}")
    return 0


def cmd_subsample(args: argparse.Namespace) -> int:
    space = datasets.label_space(args.dataset)
    instances = load_instances(DatasetFile(args.input, args.format), space)
    spec = SubsampleSpec(mode=args.mode, k=args.k, p=args.p, seed=args.seed)
    picked = subsample(instances, spec, space)
    save_instances(picked, args.out)
    print(f"kept\t{len(picked)}\tof\t{len(instances)}")
    return 0


def cmd_gradcheck(args: argparse.Namespace) -> int:
    failures = check_loss_gradients(args.configs, args.seed)
    failures += check_score_gradients(args.configs, args.seed + 1)
    failures += check_chain_gradients(max(1, args.configs // 2), args.seed + 2)
    for f in failures:
        print(f"FAIL {f}")
    print(f"gradcheck\t{'FAIL' if failures else 'PASS'}\t{len(failures)} failures")
    return _VALIDATION_EXIT if failures else 0


def cmd_experiment(args: argparse.Namespace) -> int:
    cfg = ExperimentConfig(
        dataset_id=args.dataset,
        family=args.family,
        fmt=args.format,
        train_path=args.train,
        dev_path=args.dev,
        test_path=args.test,
        bank_path=args.bank,
        subsample=_subsample_spec(args),
        loss=_loss_config(args),
        train=_train_config(args),
        scorer=args.scorer,
        mock_table=args.mock_table,
        external_cmd=tuple(args.cmd.split()) if args.cmd else None,
        heuristic=args.heuristic,
        exemplar_seed=args.exemplar_seed,
        out_dir=args.out_dir,
    )
    report, artifacts = run_experiment(cfg)
    sys.stdout.write(report_text(report))
    for name, path in artifacts.items():
        print(f"{name}\t{path}")
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    paths = write_corpus(
        args.out_dir,
        abstain_frac=args.abstain_frac,
        decoy_prob=args.decoy_prob,
        seed=args.seed,
    )
    for split, path in sorted(paths.items()):
        print(f"{split}\t{path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="entailre", description=__doc__)
    parser.add_argument("--config", default=None, help="flat key=value defaults file")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verbalize", help="write premise-hypothesis pairs for a data file")
    _add_data_flags(p)
    p.add_argument("--family", required=True, choices=FAMILIES)
    p.add_argument("--input", required=True)
    p.add_argument("--exemplar-seed", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_verbalize)

    p = sub.add_parser("train", help="train the ranking scorer")
    _add_data_flags(p)
    p.add_argument("--family", required=True, choices=FAMILIES)
    p.add_argument("--train", required=True)
    p.add_argument("--dev", default=None)
    p.add_argument("--exemplar-seed", type=int, default=None)
    _add_loss_flags(p)
    _add_train_flags(p)
    _add_subsample_flags(p)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("predict", help="rank candidates for a data file")
    _add_data_flags(p)
    p.add_argument("--family", default=None, choices=FAMILIES)
    p.add_argument("--input", required=True)
    p.add_argument("--checkpoint", default=None)
    p.add_argument("--scorer", default="toy", choices=("toy", "mock", "external"))
    p.add_argument("--mock-table", default=None)
    p.add_argument("--cmd", default=None, help="external scorer command line")
    p.add_argument("--exemplar-seed", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_predict)

    p = sub.add_parser("eval", help="score a predictions file against gold labels")
    _add_data_flags(p)
    p.add_argument("--input", required=True)
    p.add_argument("--predictions", required=True)
    p.add_argument("--out-txt", default=None)
    p.add_argument("--out-json", default=None)
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("ead", help="train the abstention detector and sweep its threshold")
    _add_data_flags(p)
    p.add_argument("--family", default="descriptive", choices=FAMILIES)
    p.add_argument("--train", required=True)
    p.add_argument("--dev", required=True)
    p.add_argument("--ranker-checkpoint", required=True)
    p.add_argument("--heuristic", default="simple")
    _add_loss_flags(p)
    _add_train_flags(p)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(fn=cmd_ead)

    p = sub.add_parser("subsample", help="shrink a split deterministically")
    _add_data_flags(p)
    p.add_argument("--input", required=True)
    p.add_argument("--mode", required=True, choices=SUBSAMPLE_MODES)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_subsample)

    p = sub.add_parser("gradcheck", help="finite-difference check of all gradients")
    p.add_argument("--configs", type=int, default=120)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_gradcheck)

    p = sub.add_parser("experiment", help="full train/predict/eval pipeline")
    _add_data_flags(p)
    p.add_argument("--family", default="descriptive", choices=FAMILIES)
    p.add_argument("--train", default=None)
    p.add_argument("--dev", default=None)
    p.add_argument("--test", required=True)
    p.add_argument("--scorer", default="toy", choices=("toy", "mock", "external"))
    p.add_argument("--mock-table", default=None)
    p.add_argument("--cmd", default=None)
    p.add_argument("--heuristic", default=None)
    p.add_argument("--exemplar-seed", type=int, default=None)
    _add_loss_flags(p)
    _add_train_flags(p)
    _add_subsample_flags(p)
    p.add_argument("--out-dir", default=None)
    p.set_defaults(fn=cmd_experiment)

    p = sub.add_parser("synth", help="write the built-in synthetic corpus")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--abstain-frac", type=float, default=0.8)
    p.add_argument("--decoy-prob", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=7)
    p.set_defaults(fn=cmd_synth)

    return parser


def _read_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ParseError(f"config {path} line {lineno}: expected key=value")
        key, value = stripped.split("=", 1)
        values[key.strip()] = value.strip()
    return values


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    """Install config-file values as subparser defaults; flags still win.

    String defaults go through each option's type converter inside
    argparse, so config values get the same conversion as flag values.
    """
    if "--config" not in argv:
        return argv
    at = argv.index("--config")
    if at + 1 >= len(argv):
        parser.error("--config needs a file argument")
    values = _read_config_file(argv[at + 1])
    subparsers = parser._subparsers._group_actions[0].choices.values()  # type: ignore[union-attr]
    matched: set[str] = set()
    for sp in subparsers:
        dests = {a.dest for a in sp._actions}
        known = {
            k.replace("-", "_"): v for k, v in values.items() if k.replace("-", "_") in dests
        }
        matched.update(k for k in values if k.replace("-", "_") in dests)
        sp.set_defaults(**known)
    unknown = set(values) - matched
    if unknown:
        raise ParseError(f"config file has keys matching no option: {sorted(unknown)}")
    return argv


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config(parser, argv)
        args = parser.parse_args(argv)
    except (OSError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _USAGE_EXIT
    try:
        return args.fn(args)
    except (OSError, ParseError, CheckpointError, ProtocolError, ScorerTimeout) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _USAGE_EXIT
    except (EntailreError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _VALIDATION_EXIT


if __name__ == "__main__":
    sys.exit(main())
