"""Run the full pipeline on the fixture corpus and inspect what it writes.

    python3 demos/03_build_training_documents.py [out_dir]
"""

import json
import sys
import tempfile
from pathlib import Path

from argforge import run_pipeline, validate_config
from argforge.pipeline import fixture_config_path

out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp(prefix="argforge-"))
config = validate_config(fixture_config_path())
manifest = run_pipeline(config, out)

print("stage counts:")
for k, v in sorted(manifest["stages"].items()):
    print(f"  {k:<18}{v}")

# Groups below the lower bound (here the 10 discipline arguments) are dropped.
print("\ndocuments:")
for d in manifest["documents"]:
    print(f"  {d['topic']} {d['stance']} {d['aspect']:<12} {d['n_args']} arguments")

first = json.loads((out / "docs" / "training.jsonl").read_text().splitlines()[0])
print("\nfirst training record:")
print("  control code:", first["control_code"])
print("  text:", first["text"][:120], "...")

# Lowering the cap shows the admission rule: largest groups first, skipping
# any that would overflow the budget.
config = validate_config({**json.loads(fixture_config_path().read_text()),
                          "topics": [{"name": "nuclear energy"}],
                          "bounds": {"min": 15, "max": 100, "cap": 100},
                          "paths": {"corpus": [str(p) for p in config.corpus]}})
small = run_pipeline(config, out / "cap100")
print("\nwith cap 100:", sorted(d["n_args"] for d in small["documents"]))
print(f"\noutputs under {out}")
