"""
Running bundled scenarios
=========================

Scenarios are JSON files of named expressions, objects and tasks.  The
same runner backs the ``levilab`` command.
"""

import json
import tempfile
from pathlib import Path

from levilab.cli import list_examples, run

print(list_examples())

out = Path(tempfile.mkdtemp())
code = run("uk_study", out, seed=0, threads=2)
report = json.loads((out / "report.json").read_text())
print("exit code", code)
for row in report["tasks"][0]["result"]["rows"]:
    print(f"k = {row['k']:>2}: sup distance {row['sup_distance']:.4f}")
