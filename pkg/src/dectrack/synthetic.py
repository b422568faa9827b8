"""Deterministic toy corpora for exercising the detector and rewriter.

These generators produce small English-like meeting data with known
structure: templated decision utterances at a controlled positive rate for
the detector, and ellipsis samples (an entity named in context, referred to
only by pronoun in the decision utterance) for the rewriter. They exist so
the learning components can be trained and checked end to end without any
external corpus; none of this text comes from real meetings.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .corpus import NON_TD, TD, Meeting, Utterance

NAMES = ["aki", "ben", "chika", "dan", "emi", "fumi"]
NOUNS = ["report", "budget", "deadline", "rollout", "venue", "schedule", "logo", "contract", "survey"]
VERBS = ["ship", "review", "extend", "approve", "publish", "migrate", "archive", "confirm"]
DAYS = ["monday", "tuesday", "wednesday", "thursday", "friday"]

CHATTER = [
    "i think the {noun} looks fine to me",
    "did you see the {noun} from {name}",
    "uh maybe we can talk about the {noun} later",
    "sorry i was on mute for a second",
    "can someone share the {noun} again",
    "the {noun} numbers seem a bit off to me",
    "let me pull up the {noun} real quick",
    "{name} said the {noun} needs another look",
    "we spent too long on the {noun} last time",
    "honestly the {noun} part is still unclear",
]

PROPOSALS = [
    "i propose we {verb} the {noun} by {day}",
    "how about we {verb} the {noun} on {day}",
    "should we just {verb} the {noun} this week",
    "my suggestion is to {verb} the {noun} before {day}",
]

DECISIONS = [
    "then it is decided we {verb} the {noun} by {day}",
    "agreed we will {verb} the {noun} on {day}",
    "final call we {verb} the {noun} before {day}",
    "okay decision made we {verb} the {noun} by {day}",
]

# same surface either way; only the preceding utterance disambiguates
AMBIGUOUS_ACCEPT = "sounds good let us do that"


@dataclass
class ToyRewriteSample:
    context_texts: list[str]
    decision_text: str
    gold_rewrite: str
    entity: str


def _fill(template: str, rng: random.Random) -> str:
    return template.format(
        noun=rng.choice(NOUNS),
        name=rng.choice(NAMES),
        verb=rng.choice(VERBS),
        day=rng.choice(DAYS),
    )


def detector_toy_corpus(
    meetings: int = 30,
    utterances_low: int = 55,
    utterances_high: int = 75,
    positive_rate: float = 0.06,
    seed: int = 13,
) -> list[tuple[Meeting, dict[int, str]]]:
    """Meetings with templated decision utterances at roughly the requested
    positive rate. Returns (meeting, index -> tag) pairs.

    Decisions come in two shapes: explicit templates, and an ambiguous
    acceptance phrase that is TD only when it follows a proposal. The same
    phrase also appears after chatter as a hard negative.
    """
    rng = random.Random(seed)
    out: list[tuple[Meeting, dict[int, str]]] = []
    for m in range(meetings):
        length = rng.randint(utterances_low, utterances_high)
        texts: list[str] = []
        tags: dict[int, str] = {}
        while len(texts) < length:
            room = length - len(texts)
            roll = rng.random()
            if roll < positive_rate * 0.6 and room >= 2:
                # proposal followed by an explicit decision
                texts.append(_fill(rng.choice(PROPOSALS), rng))
                tags[len(texts) - 1] = NON_TD
                texts.append(_fill(rng.choice(DECISIONS), rng))
                tags[len(texts) - 1] = TD
            elif roll < positive_rate * 1.0 and room >= 2:
                # proposal accepted with the ambiguous phrase
                texts.append(_fill(rng.choice(PROPOSALS), rng))
                tags[len(texts) - 1] = NON_TD
                texts.append(AMBIGUOUS_ACCEPT)
                tags[len(texts) - 1] = TD
            elif roll < positive_rate * 1.3 and room >= 2:
                # hard negative: same phrase after chatter
                texts.append(_fill(rng.choice(CHATTER), rng))
                tags[len(texts) - 1] = NON_TD
                texts.append(AMBIGUOUS_ACCEPT)
                tags[len(texts) - 1] = NON_TD
            else:
                texts.append(_fill(rng.choice(CHATTER), rng))
                tags[len(texts) - 1] = NON_TD
        meeting = Meeting(
            id=f"toy{m}",
            title=f"toy meeting {m}",
            utterances=[
                Utterance(id=f"toy{m}:u{i}", index=i, speaker=rng.choice(NAMES), text=text)
                for i, text in enumerate(texts)
            ],
        )
        out.append((meeting, tags))
    return out


def detector_corpus_texts(corpus: list[tuple[Meeting, dict[int, str]]]) -> list[str]:
    return [u.text for meeting, _ in corpus for u in meeting.utterances]


ENTITY_PREFIXES = ["alpha", "beta", "gamma", "delta", "omega", "sigma"]
ENTITY_OBJECTS = ["report", "budget", "rollout", "survey", "contract", "schedule"]

CONTEXT_SHAPES = [
    "the {entity} from {name} is ready now",
    "{name} finished the {entity} yesterday",
    "let us talk about the {entity} next",
    "the {entity} still needs a final pass",
]

SPOKEN_SHAPES = [
    "uh we will {verb} it on {day}",
    "okay then we will {verb} it by {day} you know",
    "well we will {verb} it before {day}",
]

FILLERS = {"uh", "okay", "then", "well", "you", "know"}


def rewriter_toy_samples(count: int = 380, seed: int = 29) -> list[ToyRewriteSample]:
    """Ellipsis samples: the decision utterance says "it", the context names
    the entity, and the gold rewrite restores it and drops fillers."""
    rng = random.Random(seed)
    samples: list[ToyRewriteSample] = []
    for _ in range(count):
        entity = f"{rng.choice(ENTITY_PREFIXES)} {rng.choice(ENTITY_OBJECTS)}"
        name = rng.choice(NAMES)
        verb = rng.choice(VERBS)
        day = rng.choice(DAYS)
        context = [rng.choice(CONTEXT_SHAPES).format(entity=entity, name=name)]
        if rng.random() < 0.5:
            context.insert(0, _fill(rng.choice(CHATTER), rng))
        spoken = rng.choice(SPOKEN_SHAPES).format(verb=verb, day=day)
        # written form: entity restored, pronoun and fillers gone
        preposition = "on" if " on " in spoken else ("by" if " by " in spoken else "before")
        rewrite = f"we will {verb} the {entity} {preposition} {day}"
        samples.append(
            ToyRewriteSample(
                context_texts=context,
                decision_text=spoken,
                gold_rewrite=rewrite,
                entity=entity,
            )
        )
    return samples


def rewriter_corpus_texts(samples: list[ToyRewriteSample]) -> list[str]:
    texts: list[str] = []
    for sample in samples:
        texts.extend(sample.context_texts)
        texts.append(sample.decision_text)
        texts.append(sample.gold_rewrite)
    return texts
