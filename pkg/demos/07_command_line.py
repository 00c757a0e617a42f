"""
Driving everything from the command line
========================================

The same scenarios run through the ``swarmgear`` command.  This script calls
it the way a shell would and shows what lands in the output directory.
"""

import subprocess
import sys
import tempfile
from pathlib import Path

root = Path(__file__).resolve().parent.parent
configs = root / "configs"
out = Path(tempfile.mkdtemp(prefix="swarmgear-demo-"))


def sg(*args):
    cmd = [sys.executable, "-m", "swarmgear", *args]
    print("$ swarmgear", " ".join(args))
    res = subprocess.run(cmd, capture_output=True, text=True)
    print(res.stdout.rstrip() or res.stderr.rstrip())
    print(f"(exit {res.returncode})\n")


sg("validate-config", "--config", str(configs / "square_star.yaml"))
sg("run", "--config", str(configs / "square_star.yaml"), "--out", str(out / "run"))
sg("compare", "--config", str(configs / "square_star.yaml"),
   "--variants", "star,ring,tree,apf", "--out", str(out / "compare"))
sg("sweep", "--config", str(configs / "square_star.yaml"), "--vary", "impedance.K_v=5,10,20",
   "--quiet", "--out", str(out / "sweep"))
sg("gait-trace", "--config", str(configs / "type1_gait.yaml"), "--out", str(out / "gait"))

# %%
# Errors map to exit codes: 2 for config problems, 3 for infeasible gaits.
sg("run", "--config", str(configs / "square_star.yaml"), "--set", "impedance.K_x=1",
   "--out", str(out / "bad"))
sg("gait-trace", "--config", str(configs / "type1_gait.yaml"), "--set", "gait.step_length=0.5",
   "--out", str(out / "bad"))

print("files written:")
for p in sorted(out.rglob("*")):
    if p.is_file():
        print("  ", p.relative_to(out))
