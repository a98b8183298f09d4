"""Command-line pipeline driver.

One subcommand per pipeline stage; `build`, `split`, `train`, `tag` and
`evaluate` chained together reproduce the whole workflow on any corpus.
Every flag can also come from a JSON config file (--config) or from a
CITEFORGE_<FLAG> environment variable; explicit flags win, then the
environment, then the config file.  Each run leaves a manifest with
checksums of everything it read and wrote.

Exit codes: 0 success, 1 domain error, 2 usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import random
import sys
import time
from pathlib import Path

from . import __version__
from .annotation import MalformedAnnotation
from .bibtex import (
    CleanPolicy,
    clean_corpus,
    histogram_table,
    parse_bibtex,
    serialize,
    validate_entry,
)
from .dataset import (
    FIELD_ROWS,
    TYPE_ROWS,
    BuildStats,
    SplitManifest,
    build_dataset,
    dataset_stats,
    export,
    load_jsonl,
    split_dataset,
)
from .evaluate import EvalPolicy, evaluate_dataset, format_report, write_report
from .harvest import (
    ConfigError,
    CorruptCheckpoint,
    HarvestConfig,
    efficiency_series,
    harvest as run_harvest,
    resume as run_resume,
    write_efficiency_csv,
)
from .hmm import HmmModel, align_training, tag_reference, train_hmm
from .styles import (
    DuplicateStyle,
    MissingVariable,
    SchemaError,
    annotate as render_annotated,
    builtin_styles_dir,
    load_styles,
    render,
)

DOMAIN_ERRORS = (
    ValueError,
    OSError,
    MalformedAnnotation,
    SchemaError,
    DuplicateStyle,
    MissingVariable,
    ConfigError,
    CorruptCheckpoint,
)

ENV_PREFIX = "CITEFORGE_"


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


class Run:
    """Collects inputs/outputs and writes the run manifest."""

    def __init__(self, subcommand: str, settings: dict):
        self.subcommand = subcommand
        self.settings = settings
        self.started = time.time()
        self.inputs: list[Path] = []
        self.outputs: list[Path] = []

    def read(self, path) -> Path:
        path = Path(path)
        self.inputs.append(path)
        return path

    def wrote(self, path) -> Path:
        path = Path(path)
        self.outputs.append(path)
        return path

    @staticmethod
    def _files(paths: list[Path]) -> list[Path]:
        """Digestable paths: directories (style sets) expand to their files."""
        out = []
        for path in paths:
            if path.is_dir():
                out.extend(sorted(p for p in path.glob("*") if p.is_file()))
            elif path.is_file():
                out.append(path)
        return out

    def finish(self) -> None:
        if not self.outputs:
            return
        manifest = {
            "subcommand": self.subcommand,
            "config_digest": hashlib.sha256(
                json.dumps(self.settings, sort_keys=True, default=str).encode()
            ).hexdigest(),
            "input_digests": [
                {"path": str(p), "sha256": _sha256(p)}
                for p in self._files(self.inputs)
            ],
            "output_digests": [
                {"path": str(p), "sha256": _sha256(p)}
                for p in self._files(self.outputs)
            ],
            "started": self.started,
            "finished": time.time(),
            "tool_version": __version__,
        }
        target = Path(str(self.outputs[0]) + ".manifest.json")
        target.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")


class Settings:
    """Flag resolution: command line, then environment, then config file."""

    # argparse dests that differ from their flag spelling
    ALIASES = {"in_path": "in"}

    def __init__(self, args: argparse.Namespace):
        self.cli = vars(args)
        config_path = self._lookup("config")
        self.config = {}
        if config_path:
            self.config = json.loads(Path(config_path).read_text(encoding="utf-8"))

    def _lookup(self, name: str):
        value = self.cli.get(name)
        if value is not None:
            return value
        env_name = self.ALIASES.get(name, name).upper().replace("-", "_")
        return os.environ.get(ENV_PREFIX + env_name)

    def get(self, name: str, default=None, cast=None):
        value = self._lookup(name)
        if value is None:
            alias = self.ALIASES.get(name, name)
            value = self.config.get(name, self.config.get(alias, default))
        if value is not None and cast is not None and not isinstance(value, cast):
            value = cast(value)
        return value

    def require(self, name: str):
        value = self.get(name)
        if value is None:
            flag = self.ALIASES.get(name, name).replace("_", "-")
            print(f"error: missing required flag --{flag}", file=sys.stderr)
            raise SystemExit(2)
        return value

    def resolved(self) -> dict:
        merged = dict(self.config)
        merged.update({k: v for k, v in self.cli.items() if v is not None})
        merged.pop("func", None)
        return merged


def _load_entries(settings: Settings, run: Run, path: str):
    text = Path(run.read(path)).read_text(encoding="utf-8")
    tag = settings.get("source_tag") or Path(path).stem
    return parse_bibtex(text, source_tag=tag)


def _styles(settings: Settings, run: Run):
    styles_path = settings.get("styles")
    if styles_path is None:
        styles_path = builtin_styles_dir()
    run.read(styles_path)
    styles = load_styles(styles_path)
    only = settings.get("style")
    if only:
        styles = [s for s in styles if s.style_id == only]
        if not styles:
            raise ValueError(f"style {only!r} not found under {styles_path}")
    return styles


def cmd_parse(settings: Settings, run: Run) -> int:
    entries, issues = _load_entries(settings, run, settings.require("in_path"))
    for entry in entries:
        issues.extend(validate_entry(entry))
    out = run.wrote(settings.require("out"))
    Path(out).write_text(serialize(entries), encoding="utf-8")
    issues_path = run.wrote(settings.get("issues") or str(out) + ".issues.json")
    Path(issues_path).write_text(
        json.dumps(
            [
                {"citation_key": i.citation_key, "kind": i.kind.value, "detail": i.detail}
                for i in issues
            ],
            indent=2,
        )
        + "\n",
        encoding="utf-8",
    )
    print(f"parsed {len(entries)} entries, {len(issues)} issues")
    return 0


def cmd_clean(settings: Settings, run: Run) -> int:
    entries, _ = _load_entries(settings, run, settings.require("in_path"))
    strip = tuple(
        f.strip() for f in (settings.get("strip_fields") or "").split(",") if f.strip()
    )
    policy = CleanPolicy(
        drop_homepage_misc=not settings.get("keep_homepage_misc", False),
        fields_to_strip=strip,
    )
    cleaned, stats = clean_corpus(entries, policy)
    out = run.wrote(settings.require("out"))
    Path(out).write_text(serialize(cleaned), encoding="utf-8")
    print(
        json.dumps(
            {
                "kept": len(cleaned),
                "dropped": stats.dropped,
                "dropped_by_reason": dict(stats.dropped_by_reason),
                "stripped": dict(stats.stripped),
            }
        )
    )
    return 0


def cmd_stats(settings: Settings, run: Run) -> int:
    paths = settings.require("in_path")
    if isinstance(paths, str):
        paths = [paths]
    if str(paths[0]).endswith(".jsonl"):
        records = list(load_jsonl(run.read(paths[0])))
        text = dataset_stats(records)
    else:
        entries = []
        for path in paths:
            got, _ = parse_bibtex(
                Path(run.read(path)).read_text(encoding="utf-8"),
                source_tag=Path(path).stem,
            )
            entries.extend(got)
        text = (
            histogram_table(entries, FIELD_ROWS, kind="field")
            + "\n\n"
            + histogram_table(entries, TYPE_ROWS, kind="type")
        )
    out = settings.get("out")
    if out:
        Path(run.wrote(out)).write_text(text + "\n", encoding="utf-8")
    print(text)
    return 0


def cmd_render(settings: Settings, run: Run) -> int:
    entries, _ = _load_entries(settings, run, settings.require("in_path"))
    styles = _styles(settings, run)
    lines = []
    for entry in entries:
        for style in styles:
            try:
                lines.append(render(entry, style))
            except MissingVariable as exc:
                print(f"skip: {exc}", file=sys.stderr)
    out = run.wrote(settings.require("out"))
    Path(out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"rendered {len(lines)} references")
    return 0


def cmd_annotate(settings: Settings, run: Run) -> int:
    entries, _ = _load_entries(settings, run, settings.require("in_path"))
    styles = _styles(settings, run)
    out = run.wrote(settings.require("out"))
    count = 0
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        for entry in entries:
            for style in styles:
                try:
                    ref = render_annotated(entry, style)
                except MissingVariable as exc:
                    print(f"skip: {exc}", file=sys.stderr)
                    continue
                fh.write(
                    json.dumps(
                        {
                            "id": entry.key,
                            "style": style.style_id,
                            "bibRef": ref.bib_ref,
                            "annoRef": ref.anno_ref,
                        },
                        ensure_ascii=False,
                    )
                    + "\n"
                )
                count += 1
    print(f"annotated {count} references")
    return 0


def cmd_build(settings: Settings, run: Run) -> int:
    entries, _ = _load_entries(settings, run, settings.require("in_path"))
    styles = _styles(settings, run)
    stats = BuildStats()
    records = build_dataset(
        entries,
        styles,
        chunk_size=settings.get("chunk", 1000, int),
        stats=stats,
        jobs=settings.get("jobs", 1, int),
    )
    out = run.wrote(settings.require("out"))
    checksum = export(records, settings.get("format", "jsonl"), out)
    print(
        json.dumps(
            {
                "entries": stats.entries,
                "records": stats.records,
                "citations": stats.citations,
                "skipped_renders": stats.skipped_renders,
                "dropped_records": stats.dropped_records,
                "sha256": checksum,
            }
        )
    )
    return 0


def cmd_split(settings: Settings, run: Run) -> int:
    records = load_jsonl(run.read(settings.require("in_path")))
    manifest = split_dataset(list(records), settings.get("seed", 42, int))
    out = run.wrote(settings.require("out"))
    Path(out).write_text(
        json.dumps(manifest.to_json_dict(), indent=2) + "\n", encoding="utf-8"
    )
    print(f"split: {len(manifest.train_ids)} train / {len(manifest.eval_ids)} eval")
    return 0


def _read_split(run: Run, path) -> SplitManifest:
    return SplitManifest.from_json_dict(
        json.loads(Path(run.read(path)).read_text(encoding="utf-8"))
    )


def cmd_train(settings: Settings, run: Run) -> int:
    records = list(load_jsonl(run.read(settings.require("in_path"))))
    split_path = settings.get("split")
    if split_path:
        train_ids = set(_read_split(run, split_path).train_ids)
        records = [r for r in records if r.id in train_ids]
    corpus = [
        align_training(cit["annoRef"]) for record in records for cit in record.citations
    ]
    model = train_hmm(corpus, alpha=settings.get("alpha", 0.1, float))
    out = run.wrote(settings.require("out"))
    model.save(out)
    print(
        f"trained on {len(corpus)} references: "
        f"{len(model.states)} states, vocabulary {len(model.vocab)}"
    )
    return 0


def _is_dataset_file(path: Path) -> bool:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError:
                return False
            return isinstance(row, dict) and "citations" in row
    return False


def cmd_tag(settings: Settings, run: Run) -> int:
    model = HmmModel.load(run.read(settings.require("model")))
    in_path = Path(run.read(settings.require("in_path")))
    out = run.wrote(settings.require("out"))
    count = 0
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        if _is_dataset_file(in_path):
            records = load_jsonl(in_path)
            split_path = settings.get("split")
            keep = None
            if split_path:
                keep = set(_read_split(run, split_path).eval_ids)
            for record in records:
                if keep is not None and record.id not in keep:
                    continue
                for cit in record.citations:
                    fields, log_prob = tag_reference(model, cit["bibRef"])
                    fh.write(
                        json.dumps(
                            {
                                "id": record.id,
                                "style": cit["style"],
                                "reference": cit["bibRef"],
                                "fields": [
                                    {"label": f.label, "value": f.value} for f in fields
                                ],
                                "log_prob": log_prob,
                            },
                            ensure_ascii=False,
                        )
                        + "\n"
                    )
                    count += 1
        else:
            for line in in_path.read_text(encoding="utf-8").splitlines():
                if not line.strip():
                    continue
                fields, log_prob = tag_reference(model, line.strip())
                fh.write(
                    json.dumps(
                        {
                            "reference": line.strip(),
                            "fields": [
                                {"label": f.label, "value": f.value} for f in fields
                            ],
                            "log_prob": log_prob,
                        },
                        ensure_ascii=False,
                    )
                    + "\n"
                )
                count += 1
    print(f"tagged {count} references")
    return 0


def cmd_evaluate(settings: Settings, run: Run) -> int:
    tagged_path = Path(run.read(settings.require("in_path")))
    records = list(load_jsonl(run.read(settings.require("dataset"))))
    eval_ids = None
    split_path = settings.get("split")
    if split_path:
        eval_ids = set(_read_split(run, split_path).eval_ids)
    policy = EvalPolicy(
        tau=settings.get("tau", 0.15, float),
        count_near_as_correct=bool(settings.get("near_as_correct", False)),
    )
    tagged = (
        json.loads(line)
        for line in tagged_path.read_text(encoding="utf-8").splitlines()
        if line.strip()
    )
    report = evaluate_dataset(tagged, records, policy, eval_ids=eval_ids)
    out = settings.get("out")
    if out:
        write_report(report, run.wrote(out))
    print(format_report(report))
    return 0


def cmd_harvest(settings: Settings, run: Run) -> int:
    agents = settings.get("user_agent") or ["citeforge/" + __version__]
    if isinstance(agents, str):
        agents = [agents]
    config = HarvestConfig(
        url_template=settings.require("url_template"),
        id_start=settings.get("id_start", 1, int),
        id_end=int(settings.require("id_end")),
        td_millis=settings.get("td", 1000, int),
        rid_millis=settings.get("rid", 500, int),
        user_agents=tuple(agents),
        max_retries=settings.get("max_retries", 2, int),
        output_path=settings.require("out"),
        checkpoint_path=settings.get("checkpoint")
        or str(settings.require("out")) + ".checkpoint.json",
        allow_external=bool(settings.get("allow_external", False)),
    )
    seed = settings.get("seed")
    rng = random.Random(int(seed)) if seed is not None else None
    if settings.get("resume", False):
        stats = run_resume(config, rng)
    else:
        stats = run_harvest(config, rng)
    run.wrote(config.output_path)
    run.wrote(config.checkpoint_path)
    csv_out = settings.get("efficiency_csv")
    if csv_out:
        series = efficiency_series(str(config.output_path) + ".log")
        write_efficiency_csv(series, run.wrote(csv_out))
    print(
        json.dumps(
            {
                "requests": stats.requests,
                "entries": stats.entries,
                "fetched_ids": stats.fetched_ids,
                "skips": stats.skips,
                "entries_per_request": stats.efficiency,
            }
        )
    )
    return 0


def cmd_serve_fixture(settings: Settings, run: Run) -> int:
    from .fixture import FixtureScript, FixtureServer

    script = FixtureScript()
    for rule in settings.get("fail") or []:
        parts = rule.split(":")
        fid, status = int(parts[0]), int(parts[1])
        script.fail_status[fid] = status
        if len(parts) > 2:
            script.fail_times[fid] = int(parts[2])
    for rule in settings.get("multi") or []:
        fid, count = (int(x) for x in rule.split(":"))
        script.entries[fid] = count
    server = FixtureServer(script, port=settings.get("port", 8344, int))
    server.start()
    print(f"fixture server on {server.base_url} (Ctrl+C to stop)")
    try:
        while True:
            time.sleep(3600)
    except KeyboardInterrupt:
        server.stop()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="citeforge",
        description="Synthesize citation training data, train a tagger, score parsers.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add(name: str, func, *flags):
        p = sub.add_parser(name)
        p.set_defaults(func=func)
        p.add_argument("--config", help="JSON file mirroring flags")
        for flag in flags:
            flag(p)
        return p

    def f_in(p, multiple=False):
        if multiple:
            p.add_argument("--in", dest="in_path", nargs="+")
        else:
            p.add_argument("--in", dest="in_path")

    def f_out(p):
        p.add_argument("--out")

    def f_styles(p):
        p.add_argument("--styles", help="style directory (default: builtin styles)")
        p.add_argument("--style", help="restrict to one style id")

    add("parse", cmd_parse, f_in, f_out,
        lambda p: p.add_argument("--issues"),
        lambda p: p.add_argument("--source-tag", dest="source_tag"))
    add("clean", cmd_clean, f_in, f_out,
        lambda p: p.add_argument("--strip-fields", dest="strip_fields"),
        lambda p: p.add_argument("--keep-homepage-misc", dest="keep_homepage_misc",
                                 action="store_const", const=True),
        lambda p: p.add_argument("--source-tag", dest="source_tag"))
    add("stats", cmd_stats, lambda p: f_in(p, multiple=True), f_out)
    add("render", cmd_render, f_in, f_out, f_styles,
        lambda p: p.add_argument("--source-tag", dest="source_tag"))
    add("annotate", cmd_annotate, f_in, f_out, f_styles,
        lambda p: p.add_argument("--source-tag", dest="source_tag"))
    add("build", cmd_build, f_in, f_out, f_styles,
        lambda p: p.add_argument("--chunk", type=int),
        lambda p: p.add_argument("--jobs", type=int),
        lambda p: p.add_argument("--format", choices=("jsonl", "csv")),
        lambda p: p.add_argument("--source-tag", dest="source_tag"))
    add("split", cmd_split, f_in, f_out,
        lambda p: p.add_argument("--seed", type=int))
    add("train", cmd_train, f_in, f_out,
        lambda p: p.add_argument("--split"),
        lambda p: p.add_argument("--alpha", type=float))
    add("tag", cmd_tag, f_in, f_out,
        lambda p: p.add_argument("--model"),
        lambda p: p.add_argument("--split"))
    add("evaluate", cmd_evaluate, f_in, f_out,
        lambda p: p.add_argument("--dataset"),
        lambda p: p.add_argument("--split"),
        lambda p: p.add_argument("--tau", type=float),
        lambda p: p.add_argument("--near-as-correct", dest="near_as_correct",
                                 action="store_const", const=True))
    add("harvest", cmd_harvest, f_out,
        lambda p: p.add_argument("--url-template", dest="url_template"),
        lambda p: p.add_argument("--id-start", dest="id_start", type=int),
        lambda p: p.add_argument("--id-end", dest="id_end", type=int),
        lambda p: p.add_argument("--td", type=int),
        lambda p: p.add_argument("--rid", type=int),
        lambda p: p.add_argument("--user-agent", dest="user_agent", action="append"),
        lambda p: p.add_argument("--max-retries", dest="max_retries", type=int),
        lambda p: p.add_argument("--checkpoint"),
        lambda p: p.add_argument("--resume", action="store_const", const=True),
        lambda p: p.add_argument("--allow-external", dest="allow_external",
                                 action="store_const", const=True),
        lambda p: p.add_argument("--seed", type=int),
        lambda p: p.add_argument("--efficiency-csv", dest="efficiency_csv"))
    add("serve-fixture", cmd_serve_fixture,
        lambda p: p.add_argument("--port", type=int),
        lambda p: p.add_argument("--fail", action="append"),
        lambda p: p.add_argument("--multi", action="append"))
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        settings = Settings(args)
        run = Run(args.subcommand, settings.resolved())
        code = args.func(settings, run)
        if code == 0:
            run.finish()
        return code
    except DOMAIN_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
