"""Smoke test for the skwaves extension module.

Builds the extension with cargo (unless SKWAVES_NO_BUILD is set), copies the
shared library next to a temporary import path and exercises the main calls.

    python3 python/smoke_test.py
"""

import math
import os
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]


def load_module():
    if not os.environ.get("SKWAVES_NO_BUILD"):
        subprocess.run(["cargo", "build", "--release", "-p", "skwaves-py"], cwd=ROOT, check=True)
    lib = ROOT / "target" / "release" / ("libskwaves.dylib" if sys.platform == "darwin" else "libskwaves.so")
    dest = Path(tempfile.mkdtemp(prefix="skwaves-"))
    shutil.copy(lib, dest / "skwaves.so")
    sys.path.insert(0, str(dest))
    import skwaves

    return skwaves


def main():
    sw = load_module()

    w0 = sw.solitary_threshold(1)
    assert abs(w0 - 12 ** (-1 / 3)) < 1e-12, w0
    try:
        sw.solve("solitary", 1, omega=0.43)
    except sw.DomainError:
        pass
    else:
        raise AssertionError("expected DomainError below the threshold")

    p = sw.solve("dn", k=0.5)
    assert abs(p.omega - 0.508) < 1e-3, p
    phi0, dphi0, _ = p.jet(0.0)
    assert abs(phi0 - p.a) < 1e-14 and dphi0 == 0.0

    prof = sw.build_profile("solitary", 2, omega=0.5)
    assert prof.topology == "line" and len(prof) == len(prof.x)
    assert prof.residual() < 1e-8, prof.residual()

    th = sw.theta("dn", 0.5)
    assert abs(th + 18.7569) / 18.7569 < 0.01, th

    spec = sw.spectrum("dn", k=0.5)
    assert spec["n_neg"] == 1 and spec["z_kernel"] == 2, spec

    slope = sw.vk_slope("solitary", 4, omega=0.3)
    assert slope["sign"] == "-", slope

    v = sw.verdict("dnq", k=0.5)
    assert v["verdict"] == "stable_H1", v["reason"]

    run = sw.stability_experiment("dn", k=0.5, t_final=1.0, dt=1e-2, log_every=10)
    assert run["mass_drift"] < 1e-12 and len(run["records"]) == 11, run["mass_drift"]

    sn, cn, dn = sw.jacobi(0.7, 0.6)
    assert abs(sn * sn + cn * cn - 1) < 1e-14 and abs(0.36 * sn * sn + dn * dn - 1) < 1e-14
    assert abs(sw.elliptic_k(0.0) - math.pi / 2) < 1e-15

    print("skwaves smoke test: ok")


if __name__ == "__main__":
    main()
