"""Command-line entry point.

One binary, subcommand style: QA generation, SFT-trace filtering, reward and
advantage computation, benchmark scoring, candidate-interval derivation, the
review service, manifest export, and manifest count validation. Exit codes:
0 success, 1 usage error, 2 data/schema error, 3 internal error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import __version__
from . import dataset, grammar, rewards, review, scoring, visibility
from .intervals import IntervalError
from .taxonomy import TaxonomyError

USAGE_ERROR, DATA_ERROR, INTERNAL_ERROR = 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_ERROR)


def tool_meta(config: dict) -> dict:
    return {"name": "vianqa", "version": __version__, "config": config}


def echo_config(config: dict) -> None:
    print(f"config: {json.dumps(config, sort_keys=True)}", file=sys.stderr)


def read_jsonl(path: Path):
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, 1):
            line = line.strip()
            if not line:
                continue
            try:
                yield lineno, json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: invalid JSON: {exc.msg}") from exc


def write_json(path: Path, doc: dict) -> None:
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", "utf-8")


def _reward_config(args) -> rewards.RewardConfig:
    weights = tuple(float(w) for w in args.weights.split(","))
    return rewards.RewardConfig(
        alpha_bon=args.alpha_bon,
        alpha_iou=args.alpha_iou,
        alpha_pen=args.alpha_pen,
        count_lambda=getattr(args, "lambda"),
        semantic_gate_enabled=not args.no_semantic_gate,
        flat_iou_mode=args.flat_iou,
        component_weights=weights,
        gate_answers_on_format=args.gate_answers_on_format,
    )


def _add_reward_flags(parser) -> None:
    parser.add_argument("--no-semantic-gate", action="store_true")
    parser.add_argument("--flat-iou", action="store_true")
    parser.add_argument("--weights", default="1,1,1,1", metavar="FMT,ANS,SG,VIS")
    parser.add_argument("--alpha-bon", type=float, default=0.3)
    parser.add_argument("--alpha-iou", type=float, default=0.7)
    parser.add_argument("--alpha-pen", type=float, default=-0.3)
    parser.add_argument("--lambda", type=float, default=0.5, dest="lambda")
    parser.add_argument("--gate-answers-on-format", action="store_true")


def _answers_from_record(record: dict, grammar_name: str) -> grammar.AnswerBlock:
    if "response" in record:
        return grammar.parse(str(record["response"]), grammar=grammar_name).answer
    values = {}
    for name in ("q1", "q2", "q3"):
        raw = record.get(name)
        if raw is None:
            values[name] = None
            continue
        try:
            allowed = "AB" if name == "q1" else ""
            values[name] = grammar.parse_letter(str(raw), allowed)
        except ValueError:
            values[name] = None
    q4 = record.get("q4")
    parsed_q4 = None
    if q4 is not None:
        try:
            parsed_q4 = grammar.parse_intervals(json.dumps(q4))
        except (grammar.IntervalParseError, TypeError):
            parsed_q4 = None
    return grammar.AnswerBlock(q1=values["q1"], q2=values["q2"], q3=values["q3"], q4=parsed_q4)


def cmd_gen_qa(args) -> int:
    config = {
        "subcommand": "gen-qa",
        "manifest": str(args.manifest),
        "out": str(args.out),
        "q3_options": args.q3_options,
        "seed_salt": args.seed_salt,
    }
    echo_config(config)
    clips = dataset.load_manifest(args.manifest)
    policy = dataset.DistractorPolicy(q3_option_count=args.q3_options, seed_salt=args.seed_salt)
    with open(args.out, "w", encoding="utf-8") as handle:
        count = 0
        for clip in clips:
            for qa in dataset.generate_qa(clip, policy):
                handle.write(json.dumps(qa.to_json_dict()) + "\n")
                count += 1
    print(f"wrote {count} QA instances for {len(clips)} clips to {args.out}")
    return 0


def cmd_filter_traces(args) -> int:
    config = {
        "subcommand": "filter-traces",
        "in": str(args.input),
        "kept": str(args.kept),
        "rejected": str(args.rejected),
        "grammar": args.grammar,
    }
    echo_config(config)
    records = list(read_jsonl(args.input))
    report = grammar.filter_sft_traces(
        [str(record.get("response", "")) for _, record in records],
        grammar=args.grammar,
    )
    rejected_by_index = {r.index: r for r in report.rejected}
    with open(args.kept, "w", encoding="utf-8") as kept_handle, open(
        args.rejected, "w", encoding="utf-8"
    ) as rejected_handle:
        for index, (_, record) in enumerate(records):
            if index in rejected_by_index:
                doc = dict(record)
                doc["violations"] = [
                    v.to_json_dict() for v in rejected_by_index[index].diagnoses
                ]
                rejected_handle.write(json.dumps(doc) + "\n")
            else:
                kept_handle.write(json.dumps(record) + "\n")
    print(f"kept {report.n_kept}, rejected {report.n_rejected} of {len(records)} traces")
    return 0


def cmd_reward(args) -> int:
    cfg = _reward_config(args)
    config = {
        "subcommand": "reward",
        "manifest": str(args.manifest),
        "groups": str(args.groups),
        "out": str(args.out),
        "grammar": args.grammar,
        "reward_config": dataclasses.asdict(cfg),
    }
    echo_config(config)
    clips = {c.clip_id: c for c in dataset.load_manifest(args.manifest)}
    policy = dataset.DistractorPolicy(seed_salt=args.seed_salt)
    with open(args.out, "w", encoding="utf-8") as handle:
        n_groups = n_responses = 0
        for lineno, record in read_jsonl(args.groups):
            clip = clips.get(record.get("clip_id"))
            if clip is None:
                raise ValueError(
                    f"{args.groups}:{lineno}: unknown clip {record.get('clip_id')!r}"
                )
            gt = rewards.GroundTruthBundle.from_qa(dataset.generate_qa(clip, policy))
            breakdowns = [
                rewards.reward_total(grammar.parse(str(r), grammar=args.grammar), gt, cfg)
                for r in record.get("responses", [])
            ]
            advantages = rewards.group_advantages([b.total for b in breakdowns], cfg)
            handle.write(
                json.dumps(
                    {
                        "group_id": record.get("group_id"),
                        "clip_id": clip.clip_id,
                        "rewards": [b.to_json_dict() for b in breakdowns],
                        "advantages": advantages,
                        "tool": tool_meta(config),
                    }
                )
                + "\n"
            )
            n_groups += 1
            n_responses += len(breakdowns)
    print(f"scored {n_responses} responses in {n_groups} groups -> {args.out}")
    return 0


def cmd_advantages(args) -> int:
    config = {
        "subcommand": "advantages",
        "in": str(args.input),
        "out": str(args.out),
        "std_epsilon": args.std_epsilon,
    }
    echo_config(config)
    cfg = rewards.RewardConfig(std_epsilon=args.std_epsilon)
    with open(args.out, "w", encoding="utf-8") as handle:
        count = 0
        for lineno, record in read_jsonl(args.input):
            values = record.get("rewards")
            if not isinstance(values, list) or not values:
                raise ValueError(
                    f"{args.input}:{lineno}: expected non-empty 'rewards' array"
                )
            advantages = rewards.group_advantages([float(v) for v in values], cfg)
            handle.write(
                json.dumps({"group_id": record.get("group_id"), "advantages": advantages})
                + "\n"
            )
            count += 1
    print(f"computed advantages for {count} groups -> {args.out}")
    return 0


def cmd_score(args) -> int:
    config = {
        "subcommand": "score",
        "manifest": str(args.manifest),
        "preds": str(args.preds),
        "protocol": args.protocol,
        "grammar": args.grammar,
        "miou_mode": args.miou_mode,
        "normal_clips": args.normal_clips,
        "model_name": args.model_name,
    }
    echo_config(config)
    clips = dataset.load_manifest(args.manifest)
    preds = []
    for lineno, record in read_jsonl(args.preds):
        clip_id = record.get("clip_id")
        if not clip_id:
            raise ValueError(f"{args.preds}:{lineno}: missing clip_id")
        preds.append(
            scoring.PredictionRecord(
                clip_id=clip_id,
                answers=_answers_from_record(record, args.grammar),
                raw_response=record.get("response"),
            )
        )
    report = scoring.score(
        preds,
        clips,
        protocol_split=args.protocol,
        use_pairwise_max=args.miou_mode == "max",
        exclude_empty_gt_from_miou=args.normal_clips == "exclude",
    )
    print(scoring.report_table({args.model_name: report}))
    if args.out:
        doc = report.to_json_dict()
        doc["tool"] = tool_meta(config)
        write_json(args.out, doc)
        print(f"report written to {args.out}")
    return 0


def cmd_derive(args) -> int:
    params = visibility.DiffParams(
        channel_threshold=args.channel_threshold,
        red_dominance_delta=args.red_delta,
        area_threshold=args.area_threshold,
        gap_fill_frames=args.gap_fill,
        min_interval_frames=args.min_frames,
        downscale_factor=args.downscale,
    )
    config = {
        "subcommand": "derive",
        "frames": str(args.frames),
        "out": str(args.out),
        "params": dataclasses.asdict(params),
        "fps": args.fps,
        "n_frames": args.n_frames,
    }
    echo_config(config)
    source = visibility.DiskFrameSource(Path(args.frames), n_frames=args.n_frames)
    clip_ids = args.clip or source.clip_ids()
    if not clip_ids:
        raise ValueError(f"no clip directories found under {args.frames}")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for clip_id in clip_ids:
        trace, candidates = visibility.derive_clip(
            clip_id, source, params, n_frames=args.n_frames, fps=args.fps
        )
        doc = visibility.candidate_document(clip_id, trace, candidates)
        doc["tool"] = tool_meta(config)
        write_json(out_dir / f"{clip_id}.json", doc)
        print(f"{clip_id}: {candidates.to_pairs()}")
    print(f"derived candidates for {len(clip_ids)} clips -> {out_dir}")
    return 0


def _build_store(args) -> review.ReviewStore:
    clips = dataset.load_manifest(args.manifest)
    candidates = {}
    if args.candidates:
        candidates = visibility.load_candidate_documents(
            sorted(Path(args.candidates).glob("*.json"))
        )
    return review.ReviewStore(
        clips=clips,
        candidates=candidates,
        log_path=Path(args.log) if args.log else None,
        frame_root=Path(args.frames) if args.frames else None,
        n_frames=args.n_frames,
    )


def cmd_serve(args) -> int:
    config = {
        "subcommand": "serve",
        "manifest": str(args.manifest),
        "candidates": str(args.candidates) if args.candidates else None,
        "log": str(args.log) if args.log else None,
        "frames": str(args.frames) if args.frames else None,
        "host": args.host,
        "port": args.port,
        "ui": str(args.ui) if args.ui else None,
    }
    echo_config(config)
    import uvicorn

    store = _build_store(args)
    for warning in store.replay_warnings:
        print(f"log replay warning: {warning}", file=sys.stderr)
    app = review.create_app(store, ui_dir=Path(args.ui) if args.ui else None)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_export_manifest(args) -> int:
    config = {
        "subcommand": "export-manifest",
        "manifest": str(args.manifest),
        "candidates": str(args.candidates) if args.candidates else None,
        "log": str(args.log) if args.log else None,
        "protocol": args.protocol,
        "out": str(args.out),
    }
    echo_config(config)
    store = _build_store(args)
    doc = store.export_manifest(args.protocol)
    doc["tool"] = tool_meta(config)
    Path(args.out).write_text(review.canonical_json(doc), "utf-8")
    print(f"exported {len(doc['clips'])} clips -> {args.out}")
    return 0


def cmd_validate(args) -> int:
    config = {
        "subcommand": "validate",
        "manifest": str(args.manifest),
        "protocol": args.protocol,
    }
    echo_config(config)
    clips = dataset.load_manifest(args.manifest)
    report = dataset.validate_counts(clips, protocol=args.protocol)
    doc = report.to_json_dict()
    doc["tool"] = tool_meta(config)
    print(json.dumps(doc, indent=2, sort_keys=True))
    for warning in report.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="vianqa", description=__doc__)
    parser.add_argument("--version", action="version", version=f"vianqa {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("gen-qa", help="expand a manifest into QA instances")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--q3-options", type=int, default=4)
    p.add_argument("--seed-salt", default="")
    p.set_defaults(func=cmd_gen_qa)

    p = sub.add_parser("filter-traces", help="partition SFT traces by format validity")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--kept", required=True)
    p.add_argument("--rejected", required=True)
    p.add_argument("--grammar", choices=grammar.GRAMMARS, default="structured")
    p.set_defaults(func=cmd_filter_traces)

    p = sub.add_parser("reward", help="score rollout groups with the reward family")
    p.add_argument("--manifest", required=True)
    p.add_argument("--groups", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--grammar", choices=grammar.GRAMMARS, default="structured")
    p.add_argument("--seed-salt", default="")
    _add_reward_flags(p)
    p.set_defaults(func=cmd_reward)

    p = sub.add_parser("advantages", help="group-relative advantages from rewards")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--std-epsilon", type=float, default=1e-8)
    p.set_defaults(func=cmd_advantages)

    p = sub.add_parser("score", help="score a prediction file against a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--preds", required=True)
    p.add_argument("--protocol", default=None, choices=list(dataset.taxonomy.SPLIT_TAGS))
    p.add_argument("--grammar", choices=grammar.GRAMMARS, default="benchmark")
    p.add_argument("--miou-mode", choices=("set", "max"), default="set")
    p.add_argument("--normal-clips", choices=("score", "exclude"), default="score")
    p.add_argument("--model-name", default="model")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("derive", help="derive candidate intervals from frame pairs")
    p.add_argument("--frames", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--clip", action="append", default=None)
    p.add_argument("--channel-threshold", type=int, default=30)
    p.add_argument("--red-delta", type=int, default=40)
    p.add_argument("--area-threshold", type=int, default=25)
    p.add_argument("--gap-fill", type=int, default=2)
    p.add_argument("--min-frames", type=int, default=3)
    p.add_argument("--downscale", type=int, default=2)
    p.add_argument("--fps", type=int, default=30)
    p.add_argument("--n-frames", type=int, default=60)
    p.set_defaults(func=cmd_derive)

    p = sub.add_parser("serve", help="run the review service")
    p.add_argument("--manifest", required=True)
    p.add_argument("--candidates", default=None)
    p.add_argument("--log", default=None)
    p.add_argument("--frames", default=None)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8321)
    p.add_argument("--ui", default=None)
    p.add_argument("--n-frames", type=int, default=60)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("export-manifest", help="export the reviewed manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--candidates", default=None)
    p.add_argument("--log", default=None)
    p.add_argument("--frames", default=None)
    p.add_argument("--protocol", default="all")
    p.add_argument("--out", required=True)
    p.add_argument("--n-frames", type=int, default=60)
    p.set_defaults(func=cmd_export_manifest)

    p = sub.add_parser("validate", help="validate manifest counts against published figures")
    p.add_argument("--manifest", required=True)
    p.add_argument("--protocol", choices=("standard", "unseen"), default="standard")
    p.set_defaults(func=cmd_validate)

    return parser


DATA_ERRORS = (
    dataset.ManifestError,
    scoring.ScoringError,
    TaxonomyError,
    IntervalError,
    review.DecisionError,
    visibility.FrameAlignmentError,
    FileNotFoundError,
    ValueError,
)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DATA_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_ERROR
    except KeyboardInterrupt:
        return INTERNAL_ERROR
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return INTERNAL_ERROR


if __name__ == "__main__":
    sys.exit(main())
