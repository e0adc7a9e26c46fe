from importlib import resources
from pathlib import Path

import numpy as np
import pytest

from dexpr.config import parse_config
from dexpr.corpus import build_corpus

FIXTURES = Path(str(resources.files("dexpr.data.fixtures")))


@pytest.fixture
def toy_config_path():
    return FIXTURES / "toy.toml"


def make_config(tmp_path, **experiment):
    raw = {
        "dataset": {"path": str(FIXTURES / "toy.csv"), "positive_class": "complaint"},
        "experiment": {"fs_methods": ["DE"], "classifiers": ["dt"], "k_features": [9], "output_dir": str(tmp_path / "out")},
        "cv": {"folds": 2, "seed": 0},
        "mining": {"r": 0.5, "p": 1.0, "alpha": 2},
    }
    for key, val in experiment.items():
        section, _, name = key.partition("__")
        raw.setdefault(section, {})[name] = val
    return parse_config(raw, base_dir=FIXTURES)


def synthetic_corpus(n=3000, seed=0, signal=("love", "great", "fun"), noise_vocab=60, unique=False):
    """Short labelled texts: positives draw one signal word with prob 0.7, both classes draw noise.

    ``unique`` appends a per-document id token so raw texts never repeat.
    """
    rng = np.random.default_rng(seed)
    noise = [f"w{i}" for i in range(noise_vocab)]
    neg_signal = ("bore", "aw", "bad")
    texts, labels = [], []
    for i in range(n):
        y = bool(i % 2)
        words = list(rng.choice(noise, size=int(rng.integers(3, 8))))
        pool = signal if y else neg_signal
        if rng.random() < 0.7:
            words.insert(int(rng.integers(0, len(words) + 1)), str(rng.choice(pool)))
        if unique:
            words.append(f"doc{i}")
        texts.append(" ".join(words))
        labels.append(y)
    return build_corpus(texts, labels)


# acceptance verdicts, printed once at the end of the session
ACCEPTANCE: list[tuple[str, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
