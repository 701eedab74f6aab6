"""Command-line interface exposing every toolkit operation.

All subcommands are pipe-safe and deterministic given fixtures. Exit
codes: 0 success, 1 domain error (parse/schema/validation faults), 2
usage error, 3 backend unavailable. ``--json-errors`` switches stderr to
machine-readable JSON error objects.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

from . import __version__, consistency, datasetio, evalsuite, regionqa, videodiff
from .errors import (
    BaconError,
    BackendUnavailableError,
    ParseError,
    SchemaError,
)
from .format import (
    GRAMMAR_ASSET_VERSION,
    GrammarConfig,
    build_instruction_prompt,
    from_json,
    parse,
    serialize,
    to_json,
)
from .geometry import Box
from .grounding import GroundingConfig, ground_graph_traced
from .model import renumber_graph, validate
from .providers import ProviderSet


@dataclass
class Thresholds:
    rho: float = 0.8
    rho_stable: float = 0.8
    tau_crop: float = 0.25
    tau_sim_ovd: float = 0.85
    tau_iou_ovd: float = 0.5
    tau_sim_sgg: float = 0.9
    tau_iou_sgg: float = 0.5
    tau_iou_region: float = 0.3
    tau_mask: float = 0.8
    tau_name: float = 0.85


@dataclass
class ProviderConfig:
    kind: str = "stub"
    endpoint: str | None = None
    fixture_path: str | None = None


@dataclass
class Config:
    thresholds: Thresholds = field(default_factory=Thresholds)
    provider: ProviderConfig = field(default_factory=ProviderConfig)
    grammar: GrammarConfig = field(default_factory=GrammarConfig)

    def check(self):
        for name, value in asdict(self.thresholds).items():
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"threshold {name}={value} outside [0,1]")
        if self.provider.kind not in ("stub", "http"):
            raise ValueError(f"unknown provider kind {self.provider.kind!r}")
        if self.provider.kind == "http" and not self.provider.endpoint:
            raise ValueError("provider kind 'http' requires an endpoint")
        if self.provider.kind == "stub" and self.provider.endpoint:
            raise ValueError("provider kind 'stub' takes no endpoint")

    def echo(self) -> dict:
        return {
            "thresholds": asdict(self.thresholds),
            "provider": {"kind": self.provider.kind, "endpoint": self.provider.endpoint},
        }


def load_config(path: str | None) -> Config:
    cfg = Config()
    if path is None:
        return cfg
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    thresholds = replace(cfg.thresholds, **data.get("thresholds", {}))
    provider = replace(cfg.provider, **data.get("provider", {}))
    grammar_data = data.get("grammar", {})
    grammar = GrammarConfig(
        main_titles=tuple(grammar_data.get("main_titles", GrammarConfig().main_titles)),
        canonical_subtitles=tuple(
            grammar_data.get("canonical_subtitles", GrammarConfig().canonical_subtitles)
        ),
        strict=grammar_data.get("strict", True),
    )
    return Config(thresholds=thresholds, provider=provider, grammar=grammar)


def make_providers(cfg: Config) -> ProviderSet:
    if cfg.provider.kind == "http":
        return ProviderSet.http(cfg.provider.endpoint)
    return ProviderSet.stub(cfg.provider.fixture_path)


def _read_input(path: str | None) -> str:
    if path is None or path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _load_graph(text: str, grammar: GrammarConfig):
    """Accept a graph in either the string format or JSON."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return from_json(text)
    return parse(text, grammar)


def _parse_box_arg(raw: str) -> Box:
    parts = raw.split(",")
    if len(parts) != 4:
        raise ValueError(f"--box needs x1,y1,x2,y2, got {raw!r}")
    return Box.from_list([float(p) for p in parts])


def _emit(payload: str):
    sys.stdout.write(payload)
    if not payload.endswith("\n"):
        sys.stdout.write("\n")


def _map_jobs(fn, items, jobs: int):
    if jobs <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _read_jsonl(path: str) -> list[dict]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rows.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise SchemaError("/", f"line {line_no}: invalid JSON: {exc}") from None
    return rows


def _pair_lines(pred_rows: list[dict], gt_rows: list[dict]):
    if len(pred_rows) != len(gt_rows):
        raise SchemaError(
            "/", f"pred has {len(pred_rows)} lines, gt has {len(gt_rows)}"
        )
    for i, (p, g) in enumerate(zip(pred_rows, gt_rows)):
        pid, gid = p.get("image_id"), g.get("image_id")
        if pid is not None and gid is not None and pid != gid:
            raise SchemaError(f"/{i}/image_id", f"pred {pid!r} != gt {gid!r}")
    return list(zip(pred_rows, gt_rows))


def _detection_set(row: dict, path: str) -> evalsuite.DetectionSet:
    items = []
    for j, item in enumerate(row.get("items", [])):
        try:
            items.append(
                evalsuite.Detection(
                    label=item["label"],
                    box=Box.from_list(item["box"]),
                    confidence=item.get("confidence"),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"{path}/items/{j}", str(exc)) from None
    return evalsuite.DetectionSet(items)


def _triplet_set(row: dict, path: str) -> evalsuite.TripletSet:
    items = []
    for j, item in enumerate(row.get("items", [])):
        try:
            items.append(
                evalsuite.BoxedTriplet(
                    subject=item["subject"],
                    predicate=item["predicate"],
                    object=item["object"],
                    subject_box=Box.from_list(item["subject_box"]),
                    object_box=Box.from_list(item["object_box"]),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"{path}/items/{j}", str(exc)) from None
    return evalsuite.TripletSet(items)


def _layout(row: dict, path: str) -> evalsuite.Layout:
    items = []
    for j, item in enumerate(row.get("items", [])):
        try:
            items.append((item["name"], Box.from_list(item["box"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"{path}/items/{j}", str(exc)) from None
    return evalsuite.Layout(items)


def _report_json(metrics: dict, details: dict, config: Config) -> str:
    return json.dumps(
        {"metrics": metrics, "details": details, "config": config.echo()},
        ensure_ascii=False,
    )


def cmd_parse(args, config: Config) -> int:
    graph = parse(_read_input(args.input), config.grammar)
    _emit(to_json(graph))
    return 0


def cmd_serialize(args, config: Config) -> int:
    graph = from_json(_read_input(args.input))
    _emit(serialize(graph, config.grammar))
    return 0


def cmd_json(args, config: Config) -> int:
    graph = _load_graph(_read_input(args.input), config.grammar)
    _emit(to_json(graph))
    return 0


def cmd_validate(args, config: Config) -> int:
    graph = _load_graph(_read_input(args.input), config.grammar)
    report = validate(graph)
    _emit(json.dumps({"ok": report.ok, "violations": report.to_jsonable()}))
    return 0 if report.ok else 1


def cmd_renumber(args, config: Config) -> int:
    graph = _load_graph(_read_input(args.input), config.grammar)
    _emit(to_json(renumber_graph(graph)))
    return 0


def cmd_prompt(args, config: Config) -> int:
    examples: list[tuple[str, str]] = []
    if args.examples:
        with open(args.examples, encoding="utf-8") as fh:
            data = json.load(fh)
        pairs = data.items() if isinstance(data, dict) else data
        examples = [(slot, text) for slot, text in pairs]
    _emit(build_instruction_prompt(config.grammar, examples))
    return 0


def cmd_ground(args, config: Config) -> int:
    graph = _load_graph(_read_input(args.graph), config.grammar)
    providers = make_providers(config)
    gcfg = GroundingConfig(
        crop_sim_threshold=config.thresholds.tau_crop,
        max_candidates=args.max_candidates,
        assign_same_category=not args.independent,
    )
    grounded, outcomes = ground_graph_traced(graph, args.image, providers, gcfg)
    if args.trace:
        trace = {name: outcome.to_jsonable() for name, outcome in sorted(outcomes.items())}
        _emit(f'{{"graph":{to_json(grounded)},"trace":{json.dumps(trace)}}}')
    else:
        _emit(to_json(grounded))
    return 0


def cmd_consistency(args, config: Config) -> int:
    data = json.loads(_read_input(args.input))
    if not isinstance(data, list) or not all(isinstance(a, str) for a in data):
        raise SchemaError("/", "expected a JSON list of answer strings")
    answers = consistency.AnswerSet(data)
    providers = make_providers(config)
    rho = args.rho if args.rho is not None else config.thresholds.rho
    ccfg = consistency.ConsistencyConfig(rho=rho, normalize=not args.raw)
    matrix = consistency.pair_matrix(answers, providers.text_embedder, ccfg)
    score = consistency.set_score(answers, providers.text_embedder, ccfg)
    _emit(
        json.dumps(
            {"pair_matrix": matrix, "set_score": score, "config": config.echo()},
            ensure_ascii=False,
        )
    )
    return 0


def _load_frames(path: str) -> list[videodiff.TrackedFrame]:
    frames = []
    for i, row in enumerate(_read_jsonl(path)):
        try:
            graph = from_json(json.dumps(row["caption"]))
            frames.append(
                videodiff.TrackedFrame(
                    frame_index=int(row["frame_index"]),
                    graph=graph,
                    track_ids={k: int(v) for k, v in row.get("track_ids", {}).items()},
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"/{i}", str(exc)) from None
    return frames


_ANSI = {
    videodiff.DiffStatus.NEW: "\x1b[34m",  # blue
    videodiff.DiffStatus.REMOVED: "\x1b[31m",  # red
    videodiff.DiffStatus.ALTERED: "\x1b[35m",  # pink/magenta
    videodiff.DiffStatus.PERSISTENT: "",  # default/black
}

_HTML_COLOR = {
    videodiff.DiffStatus.NEW: "blue",
    videodiff.DiffStatus.REMOVED: "red",
    videodiff.DiffStatus.ALTERED: "pink",
    videodiff.DiffStatus.PERSISTENT: "black",
}


def _render_diff_ansi(pairs) -> str:
    lines = []
    for prev_idx, curr_idx, report in pairs:
        lines.append(f"== frame {prev_idx} -> frame {curr_idx} ==")
        for item in report.all_items():
            text = item.current if item.current is not None else item.previous
            color = _ANSI[item.status]
            reset = "\x1b[0m" if color else ""
            lines.append(f"{color}[{item.status.value}] {item.kind}: {text}{reset}")
    return "\n".join(lines)


def _render_diff_html(pairs) -> str:
    import html

    lines = ["<div class=\"caption-diff\">"]
    for prev_idx, curr_idx, report in pairs:
        lines.append(f"<h3>frame {prev_idx} &rarr; frame {curr_idx}</h3>")
        for item in report.all_items():
            text = item.current if item.current is not None else item.previous
            color = _HTML_COLOR[item.status]
            lines.append(
                f'<div style="color:{color}">[{item.status.value}]'
                f" {item.kind}: {html.escape(str(text))}</div>"
            )
    lines.append("</div>")
    return "\n".join(lines)


def cmd_diff(args, config: Config) -> int:
    frames = _load_frames(args.frames)
    if len(frames) < 2:
        raise SchemaError("/", "need at least 2 frames to diff")
    providers = make_providers(config)
    tau_mask = args.tau_mask if args.tau_mask is not None else config.thresholds.tau_mask
    rho = args.rho_stable if args.rho_stable is not None else config.thresholds.rho_stable
    merged = videodiff.merge_track_ids(frames, tau_mask)
    pairs = []
    for prev, curr in zip(merged, merged[1:]):
        report = videodiff.diff_captions(prev, curr, providers.text_embedder, rho)
        pairs.append((prev.frame_index, curr.frame_index, report))
    if args.format == "json":
        payload = {
            "diffs": [
                {"prev": p, "curr": c, "report": r.to_jsonable()} for p, c, r in pairs
            ],
            "config": config.echo(),
        }
        _emit(json.dumps(payload, ensure_ascii=False))
    elif args.format == "html":
        _emit(_render_diff_html(pairs))
    else:
        _emit(_render_diff_ansi(pairs))
    return 0


def cmd_stats(args, config: Config) -> int:
    errors: list[datasetio.LineError] = []
    records = list(datasetio.load_jsonl(args.input, errors=errors))
    stats = datasetio.corpus_stats(records, args.top)
    payload = stats.to_jsonable()
    payload["line_errors"] = [{"line": e.line, "message": e.message} for e in errors]
    _emit(json.dumps(payload, ensure_ascii=False))
    return 0


def cmd_regionqa(args, config: Config) -> int:
    graph = _load_graph(_read_input(args.graph), config.grammar)
    if args.mode == "point":
        iou_min = args.iou_min if args.iou_min is not None else config.thresholds.tau_iou_region
        query = regionqa.RegionQuery(_parse_box_arg(args.box), iou_min)
        description = regionqa.region_description(graph, query)
        _emit(json.dumps({"description": description}, ensure_ascii=False))
        return 0
    with open(args.regions, encoding="utf-8") as fh:
        regions = [Box.from_list(r) for r in json.load(fh)]
    providers = make_providers(config)
    index, scores = regionqa.pointing_select(
        graph,
        args.question,
        regionqa.PointingCandidates(regions),
        providers.text_embedder,
    )
    _emit(json.dumps({"index": index, "scores": scores}))
    return 0


def cmd_eval(args, config: Config) -> int:
    providers = make_providers(config)
    embedder = providers.text_embedder
    t = config.thresholds

    if args.task == "ovd":
        tau_sim = args.tau_sim if args.tau_sim is not None else t.tau_sim_ovd
        tau_iou = args.tau_iou if args.tau_iou is not None else t.tau_iou_ovd
        rows = _pair_lines(_read_jsonl(args.pred), _read_jsonl(args.gt))
        pairs = [
            (_detection_set(p, f"/pred/{i}"), _detection_set(g, f"/gt/{i}"))
            for i, (p, g) in enumerate(rows)
        ]
        report = evalsuite.eval_ovd_corpus(pairs, embedder, tau_sim, tau_iou)
        _emit(_report_json(report.metrics, report.details, config))
        return 0

    if args.task == "sgg":
        tau_sim = args.tau_sim if args.tau_sim is not None else t.tau_sim_sgg
        tau_iou = args.tau_iou if args.tau_iou is not None else t.tau_iou_sgg
        rows = _pair_lines(_read_jsonl(args.pred), _read_jsonl(args.gt))
        sets = [
            (_triplet_set(p, f"/pred/{i}"), _triplet_set(g, f"/gt/{i}"))
            for i, (p, g) in enumerate(rows)
        ]
        reports = _map_jobs(
            lambda pg: evalsuite.eval_sgg_recall(pg[0], pg[1], embedder, tau_sim, tau_iou),
            sets,
            args.jobs,
        )
        matched = sum(r.details["matched"] for r in reports)
        total_gt = sum(r.details["total_gt"] for r in reports)
        metrics = {"recall": matched / total_gt if total_gt else 0.0}
        details = {
            "matched": matched,
            "total_gt": total_gt,
            "greedy_suboptimal": any(r.details["greedy_suboptimal"] for r in reports),
            "per_image": [r.details for r in reports],
        }
        _emit(_report_json(metrics, details, config))
        return 0

    if args.task == "layout":
        tau_name = args.tau_name if args.tau_name is not None else t.tau_name
        rows = _pair_lines(_read_jsonl(args.pred), _read_jsonl(args.gt))
        layouts = [
            (_layout(p, f"/pred/{i}"), _layout(g, f"/gt/{i}"))
            for i, (p, g) in enumerate(rows)
        ]
        reports = _map_jobs(
            lambda pg: evalsuite.eval_layout(pg[0], pg[1], embedder, tau_name),
            layouts,
            args.jobs,
        )
        matched = sum(r.details["matched"] for r in reports)
        total_pred = sum(r.details["total_pred"] for r in reports)
        total_gt = sum(r.details["total_gt"] for r in reports)
        iou_sum = sum(m["iou"] for r in reports for m in r.details["matches"])
        metrics = {
            "mIoU": iou_sum / matched if matched else 0.0,
            "precision": matched / total_pred if total_pred else 0.0,
            "recall": matched / total_gt if total_gt else 0.0,
        }
        details = {"per_image": [r.details for r in reports]}
        _emit(_report_json(metrics, details, config))
        return 0

    if args.task == "cqa":
        rows = _read_jsonl(args.cases)
        cases = []
        for i, row in enumerate(rows):
            try:
                cases.append((row["caption"], row["question"], list(row["answers"])))
            except (KeyError, TypeError) as exc:
                raise SchemaError(f"/cases/{i}", str(exc)) from None
        reports = _map_jobs(
            lambda case: evalsuite.eval_cqa([case], providers.qa_model, args.mode),
            cases,
            args.jobs,
        )
        total = sum(r.details["per_case"][0]["score"] for r in reports)
        metrics = {"accuracy": total / len(cases) if cases else 0.0}
        details = {"per_case": [r.details["per_case"][0] for r in reports]}
        _emit(_report_json(metrics, details, config))
        return 0

    # objects
    tau_name = args.tau_name if args.tau_name is not None else t.tau_name
    rows = _pair_lines(_read_jsonl(args.pred), _read_jsonl(args.gt))
    reports = []
    for i, (p, g) in enumerate(rows):
        try:
            pred_names = list(p["names"])
            gt_names = list(g["names"])
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"/{i}/names", str(exc)) from None
        reports.append(evalsuite.object_list_pr(pred_names, gt_names, embedder, tau_name))
    matched = sum(r.details["matched"] for r in reports)
    total_pred = sum(r.details["total_pred"] for r in reports)
    total_gt = sum(r.details["total_gt"] for r in reports)
    metrics = {
        "precision": matched / total_pred if total_pred else 0.0,
        "recall": matched / total_gt if total_gt else 0.0,
    }
    details = {"per_image": [r.details for r in reports]}
    _emit(_report_json(metrics, details, config))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bacon", description="Structured image-caption toolkit."
    )
    parser.add_argument(
        "--version",
        action="version",
        version=f"bacon {__version__} (grammar asset {GRAMMAR_ASSET_VERSION})",
    )
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument(
        "--json-errors", action="store_true", help="emit JSON errors on stderr"
    )
    parser.add_argument("--provider", choices=["stub", "http"], help="provider kind")
    parser.add_argument("--endpoint", help="HTTP provider endpoint")
    parser.add_argument("--fixtures", help="stub provider fixture JSON file")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="string format -> canonical JSON")
    p.add_argument("--input", help="input file (default stdin)")
    p.set_defaults(fn=cmd_parse)

    p = sub.add_parser("serialize", help="JSON -> string format")
    p.add_argument("--input", help="input file (default stdin)")
    p.set_defaults(fn=cmd_serialize)

    p = sub.add_parser("json", help="either format -> canonical JSON")
    p.add_argument("--input", help="input file (default stdin)")
    p.set_defaults(fn=cmd_json)

    p = sub.add_parser("validate", help="check graph invariants")
    p.add_argument("--input", help="input file (default stdin)")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("renumber", help="canonical per-category numbering")
    p.add_argument("--input", help="input file (default stdin)")
    p.set_defaults(fn=cmd_renumber)

    p = sub.add_parser("prompt", help="emit the captioning instruction prompt")
    p.add_argument("--examples", help="JSON file of {slot: text} overrides")
    p.set_defaults(fn=cmd_prompt)

    p = sub.add_parser("ground", help="attach boxes to caption objects")
    p.add_argument("--graph", help="graph file (default stdin)")
    p.add_argument("--image", required=True, help="image id for the providers")
    p.add_argument("--trace", action="store_true", help="include stage logs")
    p.add_argument("--max-candidates", type=int, default=10)
    p.add_argument(
        "--independent",
        action="store_true",
        help="ground each object independently (no same-category assignment)",
    )
    p.set_defaults(fn=cmd_ground)

    p = sub.add_parser("consistency", help="score repeated answers")
    p.add_argument("--input", help="JSON list of answers (default stdin)")
    p.add_argument("--rho", type=float, help="similarity threshold")
    p.add_argument("--raw", action="store_true", help="unnormalized scores")
    p.set_defaults(fn=cmd_consistency)

    p = sub.add_parser("diff", help="diff captions across video frames")
    p.add_argument("--frames", required=True, help="frames JSONL file")
    p.add_argument("--format", choices=["ansi", "html", "json"], default="ansi")
    p.add_argument("--tau-mask", type=float, help="track-merge overlap threshold")
    p.add_argument("--rho-stable", type=float, help="stability threshold")
    p.set_defaults(fn=cmd_diff)

    p = sub.add_parser("stats", help="corpus distribution statistics")
    p.add_argument("--input", required=True, help="corpus JSONL file")
    p.add_argument("--top", type=int, default=10)
    p.set_defaults(fn=cmd_stats)

    p = sub.add_parser("regionqa", help="region-based QA helpers")
    rq = p.add_subparsers(dest="mode", required=True)
    rp = rq.add_parser("point", help="describe a target region")
    rp.add_argument("--graph", help="graph file (default stdin)")
    rp.add_argument("--box", required=True, help="x1,y1,x2,y2")
    rp.add_argument("--iou-min", type=float)
    rp.set_defaults(fn=cmd_regionqa)
    rp = rq.add_parser("pointing", help="pick the best candidate region")
    rp.add_argument("--graph", help="graph file (default stdin)")
    rp.add_argument("--regions", required=True, help="JSON file of candidate boxes")
    rp.add_argument("--question", required=True)
    rp.set_defaults(fn=cmd_regionqa)

    p = sub.add_parser("eval", help="evaluation metrics")
    ev = p.add_subparsers(dest="task", required=True)
    for task in ("ovd", "sgg"):
        tp = ev.add_parser(task)
        tp.add_argument("--pred", required=True)
        tp.add_argument("--gt", required=True)
        tp.add_argument("--tau-sim", type=float)
        tp.add_argument("--tau-iou", type=float)
        tp.add_argument("--jobs", type=int, default=1)
        tp.set_defaults(fn=cmd_eval)
    tp = ev.add_parser("layout")
    tp.add_argument("--pred", required=True)
    tp.add_argument("--gt", required=True)
    tp.add_argument("--tau-name", type=float)
    tp.add_argument("--jobs", type=int, default=1)
    tp.set_defaults(fn=cmd_eval)
    tp = ev.add_parser("cqa")
    tp.add_argument("--cases", required=True)
    tp.add_argument("--mode", choices=["exact", "vqa"], default="exact")
    tp.add_argument("--jobs", type=int, default=1)
    tp.set_defaults(fn=cmd_eval)
    tp = ev.add_parser("objects")
    tp.add_argument("--pred", required=True)
    tp.add_argument("--gt", required=True)
    tp.add_argument("--tau-name", type=float)
    tp.set_defaults(fn=cmd_eval)

    return parser


def _error_payload(exc: Exception) -> dict:
    payload: dict = {"type": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, ParseError):
        payload["kind"] = exc.kind.value
        payload["line"] = exc.line
    if isinstance(exc, SchemaError):
        payload["path"] = exc.path
    return payload


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help/--version, 2 for usage errors
        return int(exc.code or 0)

    json_errors = args.json_errors
    try:
        config = load_config(args.config)
        if args.provider:
            config.provider.kind = args.provider
            if args.provider == "stub":
                config.provider.endpoint = None
        if args.endpoint:
            config.provider.endpoint = args.endpoint
        if args.fixtures:
            config.provider.fixture_path = args.fixtures
        config.check()
        return args.fn(args, config)
    except BackendUnavailableError as exc:
        _print_error(exc, json_errors)
        return 3
    except (BaconError, ValueError, OSError, json.JSONDecodeError) as exc:
        _print_error(exc, json_errors)
        return 1


def _print_error(exc: Exception, as_json: bool):
    if as_json:
        sys.stderr.write(json.dumps({"error": _error_payload(exc)}) + "\n")
    else:
        sys.stderr.write(f"error: {exc}\n")


def main() -> int:
    return run()


if __name__ == "__main__":
    sys.exit(main())
