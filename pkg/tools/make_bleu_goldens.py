#!/usr/bin/env python3
"""Build the 50-pair BLEU fixture corpus and freeze its golden scores.

Expected values come from a one-time run of an independent scorer: the
single-file sacreBLEU 1.4.x distribution (mjpost/sacrebleu). Pass its
path on the command line; the script loads it with import-time stubs for
its optional portalocker/MeCab dependencies (only needed for dataset
downloads / Japanese tokenization, neither of which this corpus touches).

    python3 tools/make_bleu_goldens.py /path/to/sacrebleu.py

Outputs:

    tests/data/bleu_corpus.jsonl       {"hyp", "ref", "expected_bleu"} per pair
    tests/data/bleu_corpus_golden.json corpus-level score + statistics

The shipped metric implementation is never imported here; the goldens are
the only bridge between the two, which keeps the check two-sided.
"""

import argparse
import importlib.util
import json
import random
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent

PORTALOCKER_STUB = """\
class Lock:
    def __init__(self, *a, **k): pass
    def __enter__(self): return self
    def __exit__(self, *a): return False
"""

MECAB_STUB = """\
class _Dict:
    next = None
    size = 392126
    def __init__(self):
        self.filename = "/stub/ipadic/sys.dic"
class Tagger:
    def __init__(self, *a, **k): pass
    def parse(self, s): return s
    def dictionary_info(self):
        return _Dict()
"""


def load_reference_scorer(path: Path):
    stub_dir = Path(tempfile.mkdtemp(prefix="refbleu_stubs_"))
    (stub_dir / "portalocker.py").write_text(PORTALOCKER_STUB)
    (stub_dir / "MeCab.py").write_text(MECAB_STUB)
    sys.path.insert(0, str(stub_dir))
    module_spec = importlib.util.spec_from_file_location("refbleu", path)
    module = importlib.util.module_from_spec(module_spec)
    module_spec.loader.exec_module(module)
    return module


SUBJECTS = [
    "the ego-car",
    "the truck ahead",
    "a silver sedan",
    "the driver",
    "a delivery van",
    "the vehicle in the left lane",
]
ACTIONS = [
    "brakes hard before the crossing",
    "changes lanes without signaling",
    "keeps a safe following distance",
    "approaches the intersection slowly",
    "merges onto the highway",
    "turns sharply at the junction",
    "stops at the red light",
    "accelerates past the school zone",
]
CONTEXTS = [
    "while rain reduces visibility",
    "as traffic builds up ahead",
    "during the evening commute",
    "on a wet residential street",
    "near the pedestrian crossing",
    "with a cyclist on the right",
]
ADVICE = [
    "the driver should slow down and increase the gap",
    "a full stop is recommended before proceeding",
    "mirror checks are advised before the next merge",
    "reducing speed would keep the maneuver safe",
]

SWAPS = {
    "hard": "sharply",
    "slowly": "carefully",
    "safe": "sufficient",
    "rain": "drizzle",
    "traffic": "congestion",
    "recommended": "advised",
    "wet": "slippery",
    "evening": "late",
}


def perturb(sentence: str, rng: random.Random, intensity: int) -> str:
    """Derive a hypothesis from a reference: 0 identical .. 3 unrelated."""
    if intensity == 0:
        return sentence
    if intensity == 3:
        return " ".join(
            rng.choice(["asteroid", "violin", "seventeen", "purple", "quantum", "kettle"])
            for _ in range(rng.randint(3, 9))
        )
    words = sentence.split()
    for _ in range(intensity):
        kind = rng.randint(0, 2)
        if kind == 0 and len(words) > 4:
            words.pop(rng.randrange(len(words)))
        elif kind == 1:
            i = rng.randrange(len(words))
            words[i] = SWAPS.get(words[i], words[i] + "s" if not words[i].endswith("s") else words[i][:-1])
        else:
            i = rng.randrange(len(words) - 1)
            words[i], words[i + 1] = words[i + 1], words[i]
    return " ".join(words)


def build_corpus() -> list[tuple[str, str]]:
    rng = random.Random(20240817)
    pairs = []
    for i in range(50):
        ref = (
            f"{rng.choice(SUBJECTS)} {rng.choice(ACTIONS)} {rng.choice(CONTEXTS)}; "
            f"{rng.choice(ADVICE)}."
        )
        ref = ref[0].upper() + ref[1:]
        intensity = [0, 1, 1, 2, 2, 2, 3][i % 7]
        hyp = perturb(ref, rng, intensity)
        pairs.append((hyp, ref))
    return pairs


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("scorer", type=Path, help="path to the single-file sacrebleu.py (1.4.x)")
    args = parser.parse_args()

    ref_scorer = load_reference_scorer(args.scorer)
    pairs = build_corpus()
    data_dir = ROOT / "tests" / "data"
    data_dir.mkdir(parents=True, exist_ok=True)

    lines = []
    for hyp, ref in pairs:
        result = ref_scorer.corpus_bleu([hyp], [[ref]])
        lines.append(json.dumps({"hyp": hyp, "ref": ref, "expected_bleu": result.score}))
    (data_dir / "bleu_corpus.jsonl").write_text("\n".join(lines) + "\n", encoding="utf-8")

    corpus = ref_scorer.corpus_bleu([h for h, _ in pairs], [[r for _, r in pairs]])
    golden = {
        "expected_bleu": corpus.score,
        "precisions": list(corpus.precisions),
        "brevity_penalty": corpus.bp,
        "hyp_len": corpus.sys_len,
        "ref_len": corpus.ref_len,
    }
    (data_dir / "bleu_corpus_golden.json").write_text(
        json.dumps(golden, indent=2) + "\n", encoding="utf-8"
    )
    print(f"wrote {len(pairs)} pairs; corpus BLEU = {corpus.score:.4f}")


if __name__ == "__main__":
    main()
