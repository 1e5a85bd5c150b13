"""Drive the whole pipeline through the command line.

Every stage reads and writes files, so the run is reproducible and
each artifact can be inspected. Running this script twice produces
byte-identical outputs.
"""

import json
import subprocess
import sys
import tempfile
from pathlib import Path


def run(*args):
    cmd = [sys.executable, "-m", "emokit", *args]
    print("$", "emokit", *args)
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        print(proc.stderr)
        raise SystemExit(proc.returncode)
    return proc.stdout


with tempfile.TemporaryDirectory() as tmp:
    base = Path(tmp)
    data = base / "data"
    work = base / "work"

    run("synth", "--kind", "recognition", "--seed", "13", "--n-videos-per-class", "8",
        "--n-frames", "15", "--out-dir", str(data))
    run("build-dict", "--aux", str(data / "aux_images.vef"), "--n-clusters", "12",
        "--seed", "13", "--out-dir", str(work))
    run("encode", "--manifest", str(data / "manifest_train.json"), "--dict",
        str(work / "dictionary.vef"), "--out", str(work / "train.json"))
    run("encode", "--manifest", str(data / "manifest_test.json"), "--dict",
        str(work / "dictionary.vef"), "--out", str(work / "test.json"))
    run("train", "--encodings", str(work / "train.json"), "--seed", "13", "--out-dir", str(work))
    out = run("eval", "--encodings", str(work / "test.json"), "--model",
              str(work / "model.json"), "--out-dir", str(work))

    metrics = json.loads(out)
    print("\neval metrics:")
    print(json.dumps(metrics, indent=2, sort_keys=True)[:400])

    run("report", "--inputs", str(work / "metrics.json"), "--out-dir", str(work))
    print("\nartifacts written:")
    for p in sorted(work.rglob("*")):
        if p.is_file():
            print(" ", p.relative_to(base))
