"""Write the synthetic LEGO-shaped corpus and its keypad demo overrides.

    python scripts/make_synthetic_corpus.py --out synthetic.jsonl
    python scripts/make_synthetic_corpus.py --overrides src/legoiso/data/demo_overrides.jsonl
"""

import argparse
import json
from pathlib import Path

from legoiso.mapping import dump_overrides
from legoiso.synthetic import KEYS_SPLIT, build_lego_like_corpus, keys_override_entries


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", type=Path, help="corpus jsonl")
    ap.add_argument("--overrides", type=Path, help="keypad demo override file")
    ap.add_argument("--keys-texts", action="store_true",
                    help="give the keypad turns keypad texts instead of relying on overrides")
    args = ap.parse_args()

    corpus = build_lego_like_corpus(args.seed, KEYS_SPLIT if args.keys_texts else None)
    if args.out:
        with args.out.open("w", encoding="utf-8") as fh:
            for t in corpus.turns():
                fh.write(json.dumps({"dialog_id": t.dialog_id, "turn_index": t.turn_index, "speaker": t.speaker,
                                     "label": t.label, "text": t.text}, ensure_ascii=False) + "\n")
        print(f"wrote {len(corpus)} turns in {len(corpus.dialogs)} dialogs to {args.out}")
    if args.overrides:
        entries = keys_override_entries(corpus)
        args.overrides.write_text(dump_overrides(entries), encoding="utf-8")
        print(f"wrote {len(entries)} overrides to {args.overrides}")


if __name__ == "__main__":
    main()
