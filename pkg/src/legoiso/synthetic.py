"""Synthetic LEGO-shaped corpora built from the published label frequencies.

The real corpus is license-gated; these corpora reproduce its label
histogram exactly with template texts taken from the documented system
prompts and typical ASR user turns.
"""

from __future__ import annotations

import random
from collections import Counter

from .corpus import SYSTEM, SYSTEM_LABEL_COUNTS, USER, USER_LABEL_COUNTS, Corpus, Turn, build_corpus
from .mapping import OverrideEntry, parse_pair

N_DIALOGS = 347

SYSTEM_TEXTS: dict[str, tuple[str, ...]] = {
    "Announce Querying": ("Just a second.", "Hold on. I'll look that up."),
    "Announce Restart": ("Okay, let's start from the beginning.",),
    "Ask Another Query": (
        "You can say, when is the next bus, when is the previous bus, start a new query, or goodbye.",
        "To ask about a different trip, you can say, start a new query. If you are finished, you can say goodbye.",
    ),
    "Ask Bus": ("What can I do for you?", "What bus schedule information are you looking for?"),
    "Ask Departure": ("Where are you leaving from?",),
    "Ask Destination": ("Where do you want to go?", "What is your destination?"),
    "Ask Time": ("When do you wanna travel?",),
    "Ask Confirm Bus": ("The 54C. Did I get that right?", "The 28X. Is this correct?"),
    "Ask Confirm Departure": ("Leaving from Oakland. Is this correct?",),
    "Ask Confirm Destination": ("Going to Fifth Avenue. Is this correct?",),
    "Ask Confirm Neighborhood": ("Waterworks Mall. Is this correct?",),
    "Ask Confirm Time": ("Leaving at 5 a.m.. Did I get that right?",),
    "Ask Confirm With Keys": (
        "If you want the schedule of the 54C say yes or press one, otherwise say no or press three.",
    ),
    "Confirm Restart": ("Are you sure you want to start over?",),
    "Confirm Understood": ("Right.", "Ok."),
    "Deliver Result": (
        "The next 61C leaves Eighth Avenue at Ann at 7:45 p.m. and arrives at Second Street at Grant at 7:59 p.m..",
    ),
    "Disambiguate Bus Stop": (
        "Which stop in Duquesne are you leaving from?",
        "Downtown and Forbes are both the same stop. Please provide a different start or end point.",
    ),
    "Explain": ("For example, you can say, Forbes and Murray, Downtown, or McKeesport.",),
    "Filler": ("Alright.",),
    "Goodbye": ("Thank you for using the CMU Let's Go Bus Information System. Goodbye.",),
    "Greeting": ("Welcome to the CMU Let's Go bus information system.",),
    "Inform Help": (
        "I am an automated spoken dialogue system that can give you schedule information for bus routes in "
        "Pittsburgh's East End. You can ask me about the following buses: 28X, 54C, 56U, 59U, 61A, 61B, 61C, "
        "61D, 61F, 64A, 69A, and 501.",
    ),
    "Inform No Route": (
        "I'm sorry, but there is no bus that goes between CMU and Squirrel Hill at that time.",
    ),
    "Inform No Schedule": (
        "I'm sorry but I do not have the schedule for the 500. The routes I currently cover are the following: "
        "28X, 54C, 56U, 59U, 61A, 61B, 61C, 61D, 61F, 64A, 69A, and 501.",
    ),
    "Inform Shorter Answer": (
        "Please use shorter answers because I have trouble understanding long sentences.",
        "I need you to give me a short answer.",
    ),
    "Instruct Louder": (
        "I'm having some trouble hearing you. If you're still there, please try to talk a little bit louder "
        "or closer to the phone.",
    ),
    "Instruct More Quiet": ("I can't understand loud speech. Please speak more quietly.",),
    "Offer Help": ("To get help at any time, just say Help or press zero.",),
}

USER_TEXTS: dict[str, tuple[str, ...]] = {
    "Place Information": ("DOWNTOWN", "DUQUESNE"),
    "Unqualified / Unrecognized": ("THE", "I'M HAVING FUN"),
    "Reject": ("NO", "NO I NEED THE NEXT BUS"),
    "Line Information": ("WHEN IS THE NEXT 28X FROM DOWNTOWN TO THE AIRPORT", "THE 61A"),
    "Time Information": ("ELEVEN O'CLOCK", "NOW"),
    "Confirm Departure": ("YES",),
    "Confirm Destination": ("YES",),
    "Confirm Time": ("YES",),
    "Confirm": ("CORRECT", "YES"),
    "Confirm Bus": ("YES",),
    "Request Next Bus": ("WHEN IS THE NEXT BUS", "THE NEXT BUS"),
    "Reject Departure": ("NO",),
    "New Query": ("START A NEW QUERY",),
    "Reject Time": ("NO",),
    "Request Previous Bus": ("WHEN IS THE PREVIOUS BUS", "THE PREVIOUS BUS"),
    "Reject Bus": ("NO",),
    "Reject Destination": ("NO",),
    "Request Help": ("HELP",),
    "Goodbye": ("GOODBYE",),
    "Request Schedule": ("HOLIDAY SCHEDULE",),
    "Polite": ("THANK YOU",),
    "Inform": ("I WANT TO GO TO THE AIRPORT",),
}

# Ask Confirm Departure/Destination turns that are really keypad confirmations.
KEYS_TEXTS = {
    "Ask Confirm Departure": "If you are leaving from Oakland say yes or press one, otherwise say no or press three.",
    "Ask Confirm Destination": "If you are going to Fifth Avenue say yes or press one, otherwise say no or press three.",
}

# 2341 confirmation questions minus the 2256 published Check Questions,
# split roughly in proportion to the two labels' frequencies.
KEYS_SPLIT = {"Ask Confirm Departure": 55, "Ask Confirm Destination": 30}

KEYS_ASSIGNMENTS = ("AutoFeedback:AutoPositive", "Task:Instruct")


def build_lego_like_corpus(seed: int = 0, keys_texts: dict[str, int] | None = None) -> Corpus:
    """A 347-dialog corpus whose label histogram equals the published tables.

    Every dialog opens with the Greeting prompt; the remaining turns are
    shuffled with ``seed`` and dealt round-robin. Texts cycle through each
    label's templates. ``keys_texts`` gives, per label, how many of its first
    turns carry a keypad-instruction text instead.
    """
    rng = random.Random(seed)
    rest = [(SYSTEM, label) for label, n in SYSTEM_LABEL_COUNTS.items() if label != "Greeting" for _ in range(n)]
    rest += [(USER, label) for label, n in USER_LABEL_COUNTS.items() for _ in range(n)]
    rng.shuffle(rest)

    per_dialog: list[list[tuple[str, str]]] = [[(SYSTEM, "Greeting")] for _ in range(N_DIALOGS)]
    for i, item in enumerate(rest):
        per_dialog[i % N_DIALOGS].append(item)

    keys_left = Counter(keys_texts or {})
    seen: Counter = Counter()
    turns = []
    for d, items in enumerate(per_dialog):
        dialog_id = f"synth-{d + 1:04d}"
        for i, (speaker, label) in enumerate(items):
            texts = SYSTEM_TEXTS[label] if speaker == SYSTEM else USER_TEXTS[label]
            if speaker == SYSTEM and keys_left[label] > 0:
                keys_left[label] -= 1
                text = KEYS_TEXTS[label]
            else:
                text = texts[seen[(speaker, label)] % len(texts)]
                seen[(speaker, label)] += 1
            turns.append(Turn(dialog_id, i, speaker, label, text))
    return build_corpus(turns, provenance=f"synthetic LEGO-shaped corpus (seed={seed})")


def keys_override_entries(c: Corpus, split: dict[str, int] = KEYS_SPLIT) -> list[OverrideEntry]:
    """Overrides re-mapping the first N turns of each label (corpus order) to the keypad strategy."""
    pairs = tuple(parse_pair(p) for p in KEYS_ASSIGNMENTS)
    left = Counter(split)
    out = []
    for t in c.turns():
        if t.speaker == SYSTEM and left[t.label] > 0:
            left[t.label] -= 1
            out.append(OverrideEntry(t.dialog_id, t.turn_index, pairs, f"{t.label} is a keypad confirmation"))
    return out
