"""Write every preset as a plan file under plans/ (the canonical plan files).

    python scripts/export_plans.py [out_dir]
"""

import sys
from pathlib import Path

from gpelab.pipeline import PRESETS, preset
from gpelab.plan_io import emit_plan


def main(out="plans"):
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    for name in PRESETS:
        (out / f"{name}.yaml").write_text(emit_plan(preset(name)))
        print(out / f"{name}.yaml")


if __name__ == "__main__":
    main(*sys.argv[1:])
