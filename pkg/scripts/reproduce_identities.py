"""Map the synthetic corpus and compare with the closed-form function counts.

Prints the distribution table followed by one verdict per expectation, first
with rules alone, then with the keypad demo overrides applied.
"""

from importlib import resources
from pathlib import Path

from legoiso import compare_report, function_distribution, load_expected, load_overrides, load_taxonomy, map_corpus
from legoiso.stats import render_table
from legoiso.synthetic import build_lego_like_corpus

DATA = Path(str(resources.files("legoiso") / "data"))


def main():
    taxonomy = load_taxonomy()
    corpus = build_lego_like_corpus()
    expected = load_expected(DATA / "synthetic_expected.jsonl", taxonomy)
    overrides = load_overrides(DATA / "demo_overrides.jsonl", taxonomy)

    for title, ov in (("rules only", []), ("with keypad overrides", overrides)):
        report = function_distribution(map_corpus(corpus, taxonomy, overrides=ov))
        print(f"== {title}: {len(corpus)} turns")
        print(render_table(report))
        for v in compare_report(report, expected):
            print(v)
        print()


if __name__ == "__main__":
    main()
