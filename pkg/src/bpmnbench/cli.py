"""``bpmnbench`` command line: evaluate, benchmark, stats, report."""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import fields, replace
from pathlib import Path
from typing import Optional, Sequence

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import pragmatic, semantic, syntactic
from .evaluation import evaluate_xml
from .harness.client import GenerationConfig, HttpChatClient
from .harness.dataset import InvalidGroundTruth, MissingFile, load_dataset
from .harness.runner import run_benchmark
from .harness.store import RecordStore, read_records
from .model import ModelError
from .parser import parse_model
from .pragmatic import ThresholdError, ThresholdTable
from .scoring import DEFAULT_MIN_AVBM, SampleEvaluation, mean_scores
from .semantic import SemanticConfig
from .stats import (
    DegenerateDesign, contrasts_csv, contrasts_markdown, dimension_scores, pairwise_contrasts,
    score_matrix, skillings_mack,
)
from .text import SynonymLexicon
from .validity import validate

EXIT_OK, EXIT_INVALID, EXIT_USAGE = 0, 1, 2

log = logging.getLogger("bpmnbench")


class UsageError(Exception):
    pass


# -- configuration -----------------------------------------------------------

_GEN_KEYS = {f.name for f in fields(GenerationConfig)}
_SEM_KEYS = {"w_i", "w_s", "tau_syntactic", "tau_semantic", "tau_context_match", "tau_ctx",
             "tau_ged", "tau_match", "tau_gateway"}


def load_config(path: Optional[str]) -> dict:
    """Flat ``key = value`` lines or ``[generation]`` / ``[metrics]`` tables."""
    if not path:
        return {"generation": {}, "metrics": {}}
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise UsageError(f"bad config {path}: {exc}") from exc
    gen = dict(raw.get("generation", {}))
    met = dict(raw.get("metrics", {}))
    for k, v in raw.items():
        if isinstance(v, dict):
            continue
        if k in _GEN_KEYS:
            gen.setdefault(k, v)
        else:
            met.setdefault(k, v)
    unknown = set(gen) - _GEN_KEYS
    unknown |= set(met) - _SEM_KEYS - {"thresholds", "synonyms", "min_avbm"}
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    base = Path(path).parent
    for k in ("thresholds", "synonyms"):
        if k in met:
            met[k] = str((base / met[k]).resolve()) if not Path(met[k]).is_absolute() else met[k]
    return {"generation": gen, "metrics": met}


def _metric_settings(args, cfg: dict) -> tuple[Optional[ThresholdTable], SemanticConfig]:
    met = cfg["metrics"]
    th_path = getattr(args, "thresholds", None) or met.get("thresholds")
    syn_path = getattr(args, "synonyms", None) or met.get("synonyms")
    try:
        table = ThresholdTable.load(th_path) if th_path else None
        lexicon = SynonymLexicon.load(syn_path) if syn_path else SynonymLexicon.load()
    except (OSError, ThresholdError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    sem_kw = {k: float(v) for k, v in met.items() if k in _SEM_KEYS}
    return table, SemanticConfig(lexicon=lexicon, **sem_kw)


def _read_bytes(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc


def _fmt(x) -> str:
    if x is None:
        return "-"
    if isinstance(x, float):
        return f"{x:.4f}"
    return str(x)


# -- evaluate ----------------------------------------------------------------


def cmd_evaluate(args) -> int:
    cfg = load_config(args.config)
    table, sem_cfg = _metric_settings(args, cfg)
    data = _read_bytes(args.candidate)
    truth = None
    if args.truth:
        tdata = _read_bytes(args.truth)
        treport = validate(tdata)
        if not treport.valid:
            raise UsageError("ground truth is invalid: " + "; ".join(treport.lines()))
        truth = parse_model(tdata)
    ev = evaluate_xml(data, truth, table, sem_cfg)
    if args.json:
        out = {"q_val": ev.q_val, "scores": ev.scores_dict(), "errors": ev.report.lines()}
        print(json.dumps(out, indent=2))
        return EXIT_OK if ev.report.valid else EXIT_INVALID

    print(f"validity: {'valid' if ev.report.valid else 'invalid'} (q_val={ev.q_val:g})")
    for line in ev.report.lines():
        print(f"  {line}")
    if not ev.report.valid:
        return EXIT_INVALID
    print("\nsyntactic")
    for k in syntactic.METRIC_IDS:
        print(f"  {k:<5} {ev.syntactic.scores[k]:.4f}  {syntactic.METRIC_NAMES[k]}")
    print(f"  q_syn {ev.syntactic.q_syn:.4f}")
    print("\npragmatic")
    for k in pragmatic.METRIC_IDS:
        raw = ev.pragmatic.raw[k]
        print(f"  {k:<5} {ev.pragmatic.normalized[k]:.4f}  {pragmatic.METRIC_NAMES[k]} (raw {_fmt(raw)})")
    print(f"  q_prag {ev.pragmatic.q_prag:.4f}")
    if ev.semantic is not None:
        print("\nsemantic")
        for k in semantic.METRIC_IDS:
            print(f"  {k:<5} {ev.semantic.scores[k]:.4f}  {semantic.METRIC_NAMES[k]}")
        print(f"  q_sem {ev.semantic.q_sem:.4f}")
        print(f"\nq_qual  {ev.q_qual:.4f}")
        print(f"q_total {ev.q_total:.4f}")
    return EXIT_OK


# -- benchmark ---------------------------------------------------------------


def _generation_config(args, cfg: dict) -> GenerationConfig:
    gen = dict(cfg["generation"])
    overrides = {
        "endpoint_url": args.endpoint, "model_name": args.model, "runs": args.runs,
        "temperature": args.temperature, "timeout": args.timeout_seconds,
        "concurrency": args.concurrency,
    }
    gen.update({k: v for k, v in overrides.items() if v is not None})
    for k in ("endpoint_url", "model_name"):
        if not gen.get(k):
            raise UsageError(f"{k} is required (config or command line)")
    try:
        return GenerationConfig(**gen)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad generation config: {exc}") from exc


def cmd_benchmark(args) -> int:
    cfg = load_config(args.config)
    gen = _generation_config(args, cfg)
    table, sem_cfg = _metric_settings(args, cfg)
    try:
        dataset = load_dataset(args.dataset)
    except (MissingFile, InvalidGroundTruth) as exc:
        raise UsageError(f"dataset error: {type(exc).__name__}: {exc}") from exc
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    store = RecordStore(out / "records.jsonl")
    client = HttpChatClient(gen)
    try:
        n = sum(1 for _ in run_benchmark(gen, dataset, client, store, thresholds=table,
                                         semantic_config=sem_cfg))
    finally:
        client.close()
    records = read_records(out / "records.jsonl")
    min_avbm = args.min_avbm if args.min_avbm is not None else cfg["metrics"].get("min_avbm", DEFAULT_MIN_AVBM)
    (out / "summary.md").write_text(render_report(records, "md", float(min_avbm)), "utf-8")
    print(f"{n} new record(s); {len(records)} total in {out / 'records.jsonl'}")
    return EXIT_OK


# -- report ------------------------------------------------------------------

SUMMARY_COLUMNS = ("llm", "Q_val", "AVBM", "Q_syn", "Q_prag", "Q_sem", "Q_qual", "Q_total", "excluded")


def summarize(records: Sequence[dict], min_avbm: float = DEFAULT_MIN_AVBM) -> dict[str, dict]:
    """Per-llm means straight from stored records."""
    by_llm: dict[str, list[dict]] = {}
    for r in records:
        by_llm.setdefault(r["llm"], []).append(r)
    out = {}
    for llm in sorted(by_llm):
        recs = by_llm[llm]
        runs = max(int(r["run_index"]) for r in recs)
        counts = [sum(1 for r in recs if int(r["run_index"]) == i and r["q_val"] == 1) for i in range(1, runs + 1)]
        evs = []
        for r in recs:
            s = r.get("scores")
            if r["q_val"] == 1 and s and s.get("sem") is not None:
                evs.append(SampleEvaluation(1.0, s["syn"]["q_syn"], s["prag"]["q_prag"], s["sem"]["q_sem"]))
            else:
                evs.append(SampleEvaluation(0.0))
        means = mean_scores(evs, counts, runs=runs, min_avbm=min_avbm)
        detail = {}
        for group, ids in (("syn", syntactic.METRIC_IDS), ("prag", pragmatic.METRIC_IDS),
                           ("sem", semantic.METRIC_IDS)):
            valid = [r["scores"][group] for r in recs
                     if r["q_val"] == 1 and r.get("scores") and r["scores"].get(group)]
            for k in ids:
                xs = [v[k] for v in valid if v.get(k) is not None]
                detail[k] = math.fsum(xs) / len(xs) if xs else None
        out[llm] = {"means": means, "detail": detail}
    return out


def _table(header: Sequence[str], rows: Sequence[Sequence], fmt: str) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(header)
        w.writerows([[_fmt(c) if not isinstance(c, str) else c for c in row] for row in rows])
        return buf.getvalue()
    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    lines += ["| " + " | ".join(_fmt(c) if not isinstance(c, str) else c for c in row) + " |" for row in rows]
    return "\n".join(lines) + "\n"


def render_report(records: Sequence[dict], fmt: str, min_avbm: float = DEFAULT_MIN_AVBM) -> str:
    summary = summarize(records, min_avbm)
    if fmt == "json":
        return json.dumps({llm: {"means": v["means"].to_dict(), "metrics": v["detail"]}
                           for llm, v in summary.items()}, indent=2) + "\n"
    rows = []
    for llm, v in summary.items():
        m = v["means"]
        rows.append([llm, m.q_val, m.avbm, m.q_syn, m.q_prag, m.q_sem, m.q_qual, m.q_total,
                     "yes" if m.excluded else "no"])
    parts = []
    if fmt == "md":
        parts.append("## Mean scores\n")
    parts.append(_table(SUMMARY_COLUMNS, rows, fmt))
    for title, ids in (("Syntactic metrics", syntactic.METRIC_IDS), ("Pragmatic metrics", pragmatic.METRIC_IDS),
                       ("Semantic metrics", semantic.METRIC_IDS)):
        detail_rows = [[llm] + [v["detail"][k] for k in ids] for llm, v in summary.items()]
        parts.append(f"\n## {title}\n" if fmt == "md" else "\r\n")
        parts.append(_table(("llm",) + tuple(ids), detail_rows, fmt))
    return "".join(parts)


def _load_records(path: str) -> list[dict]:
    try:
        records = read_records(path)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read records {path}: {exc}") from exc
    if not records:
        raise UsageError(f"no records in {path}")
    return records


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, "utf-8", newline="")
    else:
        sys.stdout.write(text)


def cmd_report(args) -> int:
    records = _load_records(args.records)
    min_avbm = args.min_avbm if args.min_avbm is not None else DEFAULT_MIN_AVBM
    _emit(render_report(records, args.format, min_avbm), args.out)
    return EXIT_OK


# -- stats -------------------------------------------------------------------


def cmd_stats(args) -> int:
    records = _load_records(args.records)
    min_avbm = args.min_avbm if args.min_avbm is not None else DEFAULT_MIN_AVBM
    summary = summarize(records, min_avbm)
    kept = [llm for llm, v in summary.items() if not v["means"].excluded]
    if len(kept) < 2:
        raise UsageError(f"need at least two llms with AVBM >= {min_avbm:g}, have {len(kept)}")
    scores = dimension_scores(records, args.dimension)
    scores = {llm: scores[llm] for llm in kept}
    _, matrix = score_matrix(scores, kept)
    try:
        glob = skillings_mack(matrix)
    except DegenerateDesign as exc:
        raise UsageError(f"degenerate design: {exc}") from exc
    rows = pairwise_contrasts(scores, zero_method=args.zero_method)
    if args.format == "json":
        text = json.dumps({
            "dimension": args.dimension, "llms": kept,
            "global": {"T": glob.statistic, "df": glob.df, "p": glob.p_value},
            "contrasts": [c.__dict__ for c in rows],
        }, indent=2) + "\n"
    elif args.format == "csv":
        text = contrasts_csv(rows)
    else:
        text = (f"## Skillings-Mack ({args.dimension})\n\n"
                f"T = {glob.statistic:.4f}, df = {glob.df}, p = {glob.p_value:.4g}\n\n"
                f"## Pairwise Wilcoxon, Bonferroni m = {len(rows)}\n\n" + contrasts_markdown(rows))
    _emit(text, args.out)
    return EXIT_OK


# -- entry point -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bpmnbench", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def metric_flags(sp):
        sp.add_argument("--config", help="TOML config file")
        sp.add_argument("--thresholds", help="threshold table (TSV)")
        sp.add_argument("--synonyms", help="synonym lexicon file")

    ev = sub.add_parser("evaluate", help="score one BPMN file")
    ev.add_argument("candidate")
    ev.add_argument("--truth", help="ground-truth BPMN for semantic scores")
    ev.add_argument("--json", action="store_true", help="emit the record score schema as JSON")
    metric_flags(ev)
    ev.set_defaults(func=cmd_evaluate)

    bm = sub.add_parser("benchmark", help="generate and score models against an endpoint")
    bm.add_argument("--dataset", required=True)
    bm.add_argument("--out", required=True, help="output directory")
    bm.add_argument("--endpoint")
    bm.add_argument("--model")
    bm.add_argument("--runs", type=int)
    bm.add_argument("--temperature", type=float)
    bm.add_argument("--timeout-seconds", type=float)
    bm.add_argument("--concurrency", type=int, help="parallel requests to the endpoint (default 1)")
    bm.add_argument("--min-avbm", type=float)
    metric_flags(bm)
    bm.set_defaults(func=cmd_benchmark)

    st = sub.add_parser("stats", help="global and pairwise tests over records")
    st.add_argument("records")
    st.add_argument("--dimension", choices=("syntactic", "pragmatic", "semantic"), required=True)
    st.add_argument("--min-avbm", type=float)
    st.add_argument("--format", choices=("csv", "md", "json"), default="md")
    st.add_argument("--out")
    st.add_argument("--zero-method", choices=("wilcox", "pratt"), default="wilcox",
                    help="how pairwise tests treat zero differences")
    st.set_defaults(func=cmd_stats)

    rp = sub.add_parser("report", help="tables of mean scores per llm")
    rp.add_argument("records")
    rp.add_argument("--format", choices=("csv", "md", "json"), default="md")
    rp.add_argument("--min-avbm", type=float)
    rp.add_argument("--out")
    rp.set_defaults(func=cmd_report)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
