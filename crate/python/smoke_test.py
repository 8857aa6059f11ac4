"""Builds the extension module with cargo and exercises it from Python.

Usage: python3 python/smoke_test.py [--no-build]
"""

import json
import pathlib
import shutil
import subprocess
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def build():
    subprocess.run(
        ["cargo", "build", "--release", "-p", "quartic-sos-python", "--features", "extension-module"],
        cwd=ROOT,
        check=True,
    )


def load():
    lib = ROOT / "target" / "release" / "libquartic_sos_py.so"
    dest = pathlib.Path(tempfile.mkdtemp()) / "quartic_sos.so"
    shutil.copy(lib, dest)
    sys.path.insert(0, str(dest.parent))
    import quartic_sos

    return quartic_sos


def main():
    if "--no-build" not in sys.argv:
        build()
    qs = load()

    # (x^2 + y^2 + z^2)^2
    p = qs.Quartic.from_squares([[1, 0, 0, 1, 0, 1]])
    report = qs.sos_representation(p)
    assert report.is_sos, report
    assert len(report.squares) <= 3
    assert report.residual <= 1e-6
    ok, gap = qs.verify(p, report.certificate_json())
    assert ok, gap
    json.loads(report.to_json())

    # x^4 - 3x^2y^2 + y^4 + z^4 is negative at (1, 1, 0)
    neg = qs.Quartic.from_json('{"p": {"400": 1, "220": -3, "040": 1, "004": 1}}')
    assert neg.evaluate(1, 1, 0) == -1
    r = qs.sos_representation(neg)
    assert not r.is_sos and r.witness is not None
    assert neg.evaluate(*r.witness) < 0
    w = qs.negativity_witness(neg)
    assert neg.evaluate(*w) < 0
    assert qs.find_gram(neg) is None

    gram = qs.find_gram(p)
    back = qs.gram_to_quartic(gram)
    assert max(abs(a - b) for a, b in zip(back.coeffs, p.coeffs)) <= 1e-8

    a = qs.reconstruct([(2.0, (1.0, 2.0, 3.0)), (0.5, (1.0, -1.0, 0.0))])
    atoms = qs.decompose(a)
    again = qs.reconstruct(atoms)
    err = max(abs(x - y) for ra, rb in zip(a, again) for x, y in zip(ra, rb))
    assert err <= 1e-6 * 196, err

    a0, b = qs.gram_frame(p)
    assert len(a0) == 6 and len(b) == 15

    try:
        qs.Quartic([1.0, 2.0])
    except ValueError:
        pass
    else:
        raise AssertionError("short coefficient list accepted")

    print("python smoke test passed")


if __name__ == "__main__":
    main()
