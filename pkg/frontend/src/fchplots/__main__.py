"""Command line: python -m fchplots <kind> <artifact-dir> -o out.png"""

import argparse
import sys
from pathlib import Path

from .render import KINDS, ArtifactError, PlotSpec, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="fchplots")
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("artifact_dir")
    parser.add_argument("-o", "--out", required=True)
    parser.add_argument("--time", type=float, default=None,
                        help="snapshot/spectrum time (default: latest)")
    args = parser.parse_args(argv)
    spec = PlotSpec(
        artifact_dir=Path(args.artifact_dir),
        kind=args.kind,
        out=Path(args.out),
        time=args.time,
    )
    try:
        out = render(spec)
    except ArtifactError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
