"""Back-translation augmentation of decision-tagged training windows.

Positive windows (target tagged TD) are copied once per pivot language,
with every real utterance text translated source -> pivot -> source. Tags,
target position, and padding are preserved; negatives and the originals are
left untouched. Transport failures drop the single (window, pivot) copy and
record a skip instead of failing the run.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO, Iterable, Protocol

from .corpus import TD, Utterance
from .detector.windows import Window
from .errors import ConfigError, ContractError, TransportError

DEFAULT_PIVOTS = ("vi", "en", "zh-CN", "zh-TW", "fr", "de", "ko")


class TranslatorClient(Protocol):
    """Round-trip translation transport.

    Must be total on nonempty text: either a nonempty translation comes
    back or a TransportError is raised; silently returning empty output is
    a contract breach.
    """

    def translate(self, text: str, source_lang: str, target_lang: str) -> str: ...


class IdentityTranslator:
    """Returns the input unchanged; the test/dry-run client."""

    def translate(self, text: str, source_lang: str, target_lang: str) -> str:
        return text


@dataclass
class AugmentationConfig:
    pivot_langs: tuple[str, ...] = DEFAULT_PIVOTS
    source_lang: str = "ja"
    scope: str = "positives_only"
    attempts: int = 3  # per translation call, counting the first try
    max_workers: int = 1

    def __post_init__(self):
        self.pivot_langs = tuple(self.pivot_langs)
        if not self.pivot_langs:
            raise ConfigError("pivot_langs must be nonempty")
        if len(set(self.pivot_langs)) != len(self.pivot_langs):
            raise ConfigError("pivot_langs must be duplicate-free")
        if self.scope != "positives_only":
            raise ConfigError(f"unsupported augmentation scope {self.scope!r}")
        if self.attempts < 1 or self.max_workers < 1:
            raise ConfigError("attempts and max_workers must be positive")


@dataclass
class BackTranslated:
    text: str
    pivot: str


@dataclass
class SkipRecord:
    meeting_id: str
    target_index: int
    pivot: str
    reason: str


@dataclass
class AugmentationResult:
    windows: list[Window]  # originals followed by augmented copies
    skips: list[SkipRecord] = field(default_factory=list)
    original_count: int = 0

    @property
    def added(self) -> int:
        return len(self.windows) - self.original_count


class TranslationCache:
    """Disk cache of round-trip translations keyed by (text, pivot)."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def _path(self, text: str, pivot: str) -> Path:
        digest = hashlib.sha256(f"{pivot}\x00{text}".encode("utf-8")).hexdigest()
        return self.directory / f"{digest}.json"

    def get(self, text: str, pivot: str) -> str | None:
        path = self._path(text, pivot)
        if not path.exists():
            return None
        return json.loads(path.read_text(encoding="utf-8"))["translated"]

    def put(self, text: str, pivot: str, translated: str) -> None:
        payload = {"pivot": pivot, "translated": translated}
        self._path(text, pivot).write_text(json.dumps(payload, ensure_ascii=False), encoding="utf-8")


def back_translate(
    text: str,
    pivot: str,
    client: TranslatorClient,
    source_lang: str = "ja",
    attempts: int = 3,
    cache: TranslationCache | None = None,
) -> BackTranslated:
    """Translate source -> pivot -> source, retrying transport failures."""
    if not text.strip():
        raise ContractError("back_translate requires nonempty text")
    if cache is not None:
        hit = cache.get(text, pivot)
        if hit is not None:
            return BackTranslated(text=hit, pivot=pivot)
    last: TransportError | None = None
    for _ in range(attempts):
        try:
            forward = client.translate(text, source_lang, pivot)
            if not forward.strip():
                raise TransportError(f"client returned empty text for pivot {pivot}")
            back = client.translate(forward, pivot, source_lang)
            if not back.strip():
                raise TransportError(f"client returned empty text translating back from {pivot}")
            if cache is not None:
                cache.put(text, pivot, back)
            return BackTranslated(text=back, pivot=pivot)
        except TransportError as exc:
            last = exc
    raise last if last is not None else TransportError("translation failed")


def _translate_window(
    window: Window,
    pivot: str,
    client: TranslatorClient,
    config: AugmentationConfig,
    cache: TranslationCache | None,
) -> Window:
    """One augmented copy; PAD slots keep their empty text untouched."""
    new_utterances: list[Utterance] = []
    for utt, is_pad in zip(window.utterances, window.pad_mask):
        if is_pad or not utt.text.strip():
            new_utterances.append(utt)
            continue
        result = back_translate(
            utt.text, pivot, client, source_lang=config.source_lang, attempts=config.attempts, cache=cache
        )
        new_utterances.append(dataclasses.replace(utt, text=result.text))
    return Window(
        utterances=new_utterances,
        target_pos=window.target_pos,
        pad_mask=list(window.pad_mask),
        meeting_id=window.meeting_id,
        target_index=window.target_index,
        tags=list(window.tags) if window.tags is not None else None,
    )


def augment_positive_windows(
    windows: list[Window],
    config: AugmentationConfig,
    client: TranslatorClient,
    cache: TranslationCache | None = None,
) -> AugmentationResult:
    """Original windows plus one back-translated copy of each positive
    window per pivot language. Copies are appended in (window order, pivot
    order) regardless of translation concurrency."""
    untagged = [w.target_index for w in windows if w.tags is None]
    if untagged:
        raise ContractError(f"augmentation requires gold tags; untagged windows target {untagged}")
    positives = [w for w in windows if w.target_tag == TD]
    tasks = [(window, pivot) for window in positives for pivot in config.pivot_langs]

    def run(task: tuple[Window, str]) -> Window:
        window, pivot = task
        return _translate_window(window, pivot, client, config, cache)

    outcomes: list[Window | Exception] = []
    if config.max_workers == 1:
        for task in tasks:
            try:
                outcomes.append(run(task))
            except (TransportError, ContractError) as exc:
                outcomes.append(exc)
    else:
        with ThreadPoolExecutor(max_workers=config.max_workers) as pool:
            futures = [pool.submit(run, task) for task in tasks]
            for future in futures:
                try:
                    outcomes.append(future.result())
                except (TransportError, ContractError) as exc:
                    outcomes.append(exc)

    result = AugmentationResult(windows=list(windows))
    result.original_count = len(windows)
    for (window, pivot), outcome in zip(tasks, outcomes):
        if isinstance(outcome, Exception):
            result.skips.append(
                SkipRecord(
                    meeting_id=window.meeting_id,
                    target_index=window.target_index,
                    pivot=pivot,
                    reason=str(outcome),
                )
            )
        else:
            result.windows.append(outcome)
    return result


def window_to_record(window: Window) -> dict:
    return {
        "meeting_id": window.meeting_id,
        "target_index": window.target_index,
        "target_pos": window.target_pos,
        "pad_mask": list(window.pad_mask),
        "tags": list(window.tags) if window.tags is not None else None,
        "utterances": [
            {"id": u.id, "index": u.index, "speaker": u.speaker, "text": u.text}
            for u in window.utterances
        ],
    }


def window_from_record(record: dict) -> Window:
    return Window(
        utterances=[
            Utterance(id=u["id"], index=u["index"], speaker=u["speaker"], text=u["text"])
            for u in record["utterances"]
        ],
        target_pos=record["target_pos"],
        pad_mask=list(record["pad_mask"]),
        meeting_id=record.get("meeting_id", ""),
        target_index=record.get("target_index", -1),
        tags=list(record["tags"]) if record.get("tags") is not None else None,
    )


def write_windows_jsonl(windows: Iterable[Window], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for window in windows:
            fh.write(json.dumps(window_to_record(window), ensure_ascii=False) + "\n")


def read_windows_jsonl(stream: BinaryIO | Iterable[bytes | str] | str | Path) -> list[Window]:
    if isinstance(stream, (str, Path)):
        lines: Iterable[bytes | str] = Path(stream).read_text(encoding="utf-8").splitlines()
    else:
        lines = stream
    windows = []
    for raw in lines:
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8")
        if not raw.strip():
            continue
        windows.append(window_from_record(json.loads(raw)))
    return windows
