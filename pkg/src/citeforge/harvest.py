"""Rate-limited, checkpointed BibTeX fetching over HTTP.

A single serialized request stream walks an iterative-id URL template.
Between requests the harvester waits a fixed threshold delay plus a random
increment, rotates user agents per request, appends every successful body
to the output file and rewrites the checkpoint, so a crash costs at most
one refetch.  Only local fixture servers are allowed unless explicitly
overridden.
"""

from __future__ import annotations

import json
import random
import time
import urllib.error
import urllib.parse
import urllib.request
from dataclasses import dataclass, field
from pathlib import Path

from .bibtex import parse_bibtex


class ConfigError(ValueError):
    pass


class CorruptCheckpoint(ValueError):
    pass


@dataclass
class HarvestConfig:
    url_template: str
    id_start: int
    id_end: int  # inclusive
    td_millis: int = 1000
    rid_millis: int = 500
    user_agents: tuple[str, ...] = ("citeforge/0.1",)
    max_retries: int = 2
    output_path: str | Path = "harvest.bib"
    checkpoint_path: str | Path = "harvest.checkpoint.json"
    allow_external: bool = False
    timeout: float = 10.0

    def validate(self) -> None:
        if self.url_template.count("{id}") != 1:
            raise ConfigError("url_template must contain exactly one {id}")
        if self.id_start > self.id_end:
            raise ConfigError("empty id range")
        if self.td_millis < 0 or self.rid_millis < 0:
            raise ConfigError("delays must be nonnegative")
        if not self.user_agents:
            raise ConfigError("at least one user agent is required")
        if not self.allow_external:
            host = urllib.parse.urlparse(self.url_template).hostname or ""
            if host not in ("localhost", "127.0.0.1", "::1"):
                raise ConfigError(
                    f"refusing non-local host {host!r}; set allow_external to override"
                )


@dataclass
class Checkpoint:
    last_id: int
    entries_count: int
    last_error: str | None = None

    def write(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.__dict__), encoding="utf-8")

    @classmethod
    def read(cls, path: str | Path) -> "Checkpoint":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
            return cls(int(data["last_id"]), int(data["entries_count"]), data.get("last_error"))
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise CorruptCheckpoint(f"cannot read checkpoint {path}: {exc}") from exc


@dataclass
class HarvestStats:
    requests: int = 0
    entries: int = 0
    fetched_ids: int = 0
    skips: int = 0
    skipped_ids: list[int] = field(default_factory=list)

    @property
    def efficiency(self) -> float:
        """Entries gained per request made (the 1-for-1 yardstick)."""
        return self.entries / self.requests if self.requests else 0.0


def _fetch(url: str, user_agent: str, timeout: float) -> tuple[int, str]:
    request = urllib.request.Request(url, headers={"User-Agent": user_agent})
    try:
        with urllib.request.urlopen(request, timeout=timeout) as resp:
            return resp.status, resp.read().decode("utf-8", errors="replace")
    except urllib.error.HTTPError as exc:
        return exc.code, ""
    except (urllib.error.URLError, OSError) as exc:
        return 0, str(exc)


def _log_path(config: HarvestConfig) -> Path:
    return Path(str(config.output_path) + ".log")


def _run(
    config: HarvestConfig,
    first_id: int,
    base_entries: int,
    rng: random.Random,
) -> HarvestStats:
    stats = HarvestStats()
    entries_total = base_entries
    out_path = Path(config.output_path)
    log_path = _log_path(config)
    first_request = True
    with open(out_path, "a", encoding="utf-8") as out, open(
        log_path, "a", encoding="utf-8"
    ) as log:
        for current_id in range(first_id, config.id_end + 1):
            body = None
            error = None
            for attempt in range(config.max_retries + 1):
                if not first_request:
                    delay = config.td_millis * (2**attempt if attempt else 1)
                    delay += rng.uniform(0, config.rid_millis)
                    time.sleep(delay / 1000.0)
                first_request = False
                agent = rng.choice(config.user_agents)
                url = config.url_template.format(id=current_id)
                stats.requests += 1
                status, payload = _fetch(url, agent, config.timeout)
                if status == 200:
                    body = payload
                    break
                error = f"id {current_id}: HTTP {status or 'connection error'}"
            if body is not None:
                n_entries = len(parse_bibtex(body)[0])
                out.write(body)
                if not body.endswith("\n"):
                    out.write("\n")
                out.flush()
                entries_total += n_entries
                stats.entries += n_entries
                stats.fetched_ids += 1
                Checkpoint(current_id, entries_total).write(config.checkpoint_path)
                log.write(
                    json.dumps(
                        {"ts": time.time(), "id": current_id, "status": "ok",
                         "entries": n_entries}
                    )
                    + "\n"
                )
                log.flush()
            else:
                stats.skips += 1
                stats.skipped_ids.append(current_id)
                Checkpoint(current_id, entries_total, error).write(config.checkpoint_path)
                log.write(
                    json.dumps(
                        {"ts": time.time(), "id": current_id, "status": "skip",
                         "entries": 0}
                    )
                    + "\n"
                )
                log.flush()
    return stats


def harvest(config: HarvestConfig, rng: random.Random | None = None) -> HarvestStats:
    """Fetch the whole configured id range from scratch."""
    config.validate()
    return _run(config, config.id_start, 0, rng or random.Random())


def resume(config: HarvestConfig, rng: random.Random | None = None) -> HarvestStats:
    """Continue from the checkpoint; output is appended, never truncated.

    Raises CorruptCheckpoint rather than guessing and refetching.
    """
    config.validate()
    checkpoint = Checkpoint.read(config.checkpoint_path)
    if not (config.id_start - 1 <= checkpoint.last_id <= config.id_end):
        raise CorruptCheckpoint(
            f"checkpoint id {checkpoint.last_id} outside range "
            f"{config.id_start}..{config.id_end}"
        )
    return _run(config, checkpoint.last_id + 1, checkpoint.entries_count, rng or random.Random())


def efficiency_series(log_path: str | Path) -> list[tuple[float, int, float, float]]:
    """Per-request time series from a harvest log.

    Rows are (timestamp, cumulative entries, entries-per-request for the
    step, efficiency normalized by the best step).  Empty log, empty list.
    """
    rows: list[tuple[float, int, float]] = []
    cumulative = 0
    path = Path(log_path)
    if not path.exists():
        return []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            event = json.loads(line)
            cumulative += event["entries"]
            rows.append((event["ts"], cumulative, float(event["entries"])))
    if not rows:
        return []
    best = max(r[2] for r in rows)
    return [
        (ts, total, eff, eff / best if best else 0.0) for ts, total, eff in rows
    ]


def write_efficiency_csv(series, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("timestamp,entries,entries_per_request,normalized\n")
        for ts, total, eff, norm in series:
            fh.write(f"{ts},{total},{eff},{norm}\n")
