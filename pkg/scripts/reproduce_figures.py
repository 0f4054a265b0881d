"""Run presets into runs/<name>/ and print a one-line summary for each.

    python scripts/reproduce_figures.py [name ...]
"""

import sys
import time

from gpelab.cli import main as cli
from gpelab.pipeline import PRESETS


def main(names):
    for name in names or PRESETS:
        start = time.perf_counter()
        code = cli(["preset", "--name", name, "--out", f"runs/{name}"])
        if code:
            return code
        print(f"  ({time.perf_counter() - start:.1f} s)")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
