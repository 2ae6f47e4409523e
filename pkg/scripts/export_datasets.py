"""
Export the bundled and synthetic benchmark datasets as CSV files.

Writes Iris (features plus a trailing label column) and, optionally, a set of
seeded Gaussian mixtures that the bench subcommand and tests can consume
without network access.

Usage:
    uv run python scripts/export_datasets.py
    uv run python scripts/export_datasets.py --dest data/ --mixtures gmm:n=10000,d=2,k=5 gmm:n=100000,d=3,k=10
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))

from gridshift.config.settings import get_settings
from gridshift.services import datasets


def _mixture_name(text: str) -> str:
    return text.replace(":", "_").replace(",", "_").replace("=", "")


def main(argv=None) -> int:
    settings = get_settings()
    parser = argparse.ArgumentParser(description=__doc__.split("\n\n")[0].strip())
    parser.add_argument("--dest", type=Path, default=settings.data_path,
                        help=f"Output directory (default: {settings.data_path})")
    parser.add_argument("--mixtures", nargs="*", default=[], metavar="SPEC",
                        help="Generator specs such as gmm:n=10000,d=2,k=5")
    parser.add_argument("--seed", type=int, default=settings.seed)
    args = parser.parse_args(argv)

    iris = datasets.load_iris()
    path = datasets.write_csv(iris, args.dest / "iris.csv")
    print(f"iris: {iris.n} x {iris.d} -> {path}")

    for text in args.mixtures:
        spec = datasets.parse_generator_spec(text)
        ds = datasets.generate(spec, seed=args.seed)
        path = datasets.write_csv(ds, args.dest / f"{_mixture_name(text)}.csv")
        print(f"{text}: {ds.n} x {ds.d} -> {path}")

    return 0


if __name__ == "__main__":
    sys.exit(main())
