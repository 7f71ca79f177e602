"""Builds the extension module with cargo and exercises it from Python.

Usage: python3 python/smoke_test.py
"""

import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def build():
    subprocess.run(
        ["cargo", "build", "--release", "-p", "qpec-python", "--features", "extension-module"],
        cwd=ROOT,
        check=True,
    )
    lib = ROOT / "target" / "release" / "libqpec_py.so"
    dest = Path(tempfile.mkdtemp()) / "qpec_py.so"
    shutil.copy(lib, dest)
    sys.path.insert(0, str(dest.parent))


def main():
    build()
    import qpec_py as q

    f = q.Field(5)
    assert f.order == 5 and f.mul(2, 3) == 1 and f.inv(2) == 3
    assert f.sumset([[0, 1], [0, 2]]) == [0, 1, 2, 3]
    assert f.intersect([[0, 1, 2], [1, 2, 4]]) == [1, 2]
    assert f.sumset_bounds([3, 3]) == (5, 5, True)

    ch = q.Channel(4, 2, 0.5)
    assert abs(ch.capacity() - 0.75) < 1e-12
    assert all(0 in s for s in ch.transmit(0, 100, seed=1))

    assert abs(sum(q.intersection_probs(6, [2, 3])) - 1) < 1e-12
    p = q.pm_distribution(4, [2, 2], "exact")
    assert abs(p[1] - 1 / 3) < 1e-15 and p[2] == 0 and abs(p[3] - 2 / 3) < 1e-15

    converged, traj = q.de_run(4, 2, 0.7)
    assert converged and traj[0] == 0.7
    th = q.threshold(4, 4, model="union")
    assert abs(th - 0.4294) < 1e-3

    graph = "5 3 2\n0 0 2\n1 0 4\n2 0 3\n0 1 2\n1 1 4\n2 1 3\n"
    ok, iters, post = q.decode(graph, [[0, 1], [0, 2, 3], [0, 1, 2, 3, 4]])
    assert not ok and post[2] == [0, 1, 2, 4]

    g = q.regular_graph(4, 60, seed=3)
    assert g.splitlines()[0] == "4 60 30"
    r = q.simulate(4, 2, 0.0, 120, 4)
    assert r["successes"] == 4

    try:
        q.Field(6)
    except ValueError:
        pass
    else:
        raise AssertionError("GF(6) accepted")
    print("python smoke test passed")


if __name__ == "__main__":
    main()
