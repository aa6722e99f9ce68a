#!/usr/bin/env python3
"""Build the explorer test fixture: a snapshot + word vectors in a target dir.

Drives the engine's command-line interface end to end so the frontend tests
exercise exactly what a deployment would produce.
"""

import subprocess
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[2] / "src"))

from firmvec.embed import save_company_dataset  # noqa: E402
from firmvec.synthetic import make_labeled_corpus  # noqa: E402
from firmvec.wordvec import save_word_vectors  # noqa: E402


def main() -> int:
    if len(sys.argv) != 2:
        print("usage: build_fixture.py <output-dir>", file=sys.stderr)
        return 2
    out = Path(sys.argv[1])
    out.mkdir(parents=True, exist_ok=True)

    records, table = make_labeled_corpus(seed=2718, n_companies=80, dim=16)
    dataset = out / "dataset.tsv"
    vectors = out / "vectors.vec"
    save_company_dataset(records, dataset)
    save_word_vectors(table, vectors, format="text")

    def cli(*args: str) -> None:
        subprocess.run(
            [sys.executable, "-m", "firmvec.cli", *args],
            check=True,
            cwd=Path(__file__).resolve().parents[2],
        )

    raw = out / "raw.c2v"
    reduced = out / "reduced.c2v"
    final = out / "fixture.c2v"
    cli("embed", "--dataset", str(dataset), "--vectors", str(vectors),
        "--strategy", "append_tokens", "--out", str(raw))
    cli("pca", "--snapshot", str(raw), "--out", str(reduced),
        "--variance-threshold", "0.95", "--max-components", "10")
    cli("segment", "fit", "--snapshot", str(reduced), "--out", str(final),
        "--k", "5", "--seed", "4")
    print(final)
    return 0


if __name__ == "__main__":
    sys.exit(main())
