"""Smoke test for the `semiesc` extension module.

Build it first, e.g. `maturin develop -m crates/py/Cargo.toml`, or
`cargo build -p semiesc-py --release --features extension-module` and copy
`target/release/libsemiesc.so` to `semiesc.so` somewhere on `sys.path`.
"""

import cmath
import json
import math
import os
import sys
import tempfile

import semiesc


def main():
    f = semiesc.EntireMap.exp_lambda(1)
    assert abs(f(1j * math.pi) - cmath.exp(1j * math.pi)) < 1e-15
    assert abs(f.period() - 2j * math.pi) < 1e-15
    assert f.singular_values() == [0j]
    orbit = f.orbit(0, 6)
    assert orbit[:3] == [0j, 1 + 0j, cmath.exp(1)]
    assert orbit[-1] is None, "e^z orbit of 0 overflows by step 6"
    assert semiesc.classify_orbit(f, 0)["status"] == "escaped"

    g = semiesc.Semigroup.periodic_translate(f, 2, 2j * math.pi)
    assert len(g) == 2
    assert g.normal_form([0, 1, 1, 0]) == (6, False)
    z = 0.3 - 0.2j
    direct = g.eval_word([1, 0], z)
    assert abs(direct - f(f(f(z + 2j * math.pi)))) < 1e-9 * abs(direct)

    same = semiesc.EntireMap.from_json(f.to_json())
    assert same.to_json() == f.to_json()

    h = semiesc.Semigroup([f, semiesc.EntireMap.exp_affine(1, 0, 2j * math.pi)])
    status, witness, step = semiesc.classify_branches(h, 0.5)
    assert status == "all_branches_escape" and witness is None and step >= 1

    raster = semiesc.grid(h, (-4, 4, -4, 4), 32, 32)
    esc, bnd, und = raster.counts()
    assert esc + bnd + und == 32 * 32 and esc > 0
    comps = json.loads(raster.components(8))
    assert all(c["touches_border"] for c in comps["components"])
    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "g.png")
        raster.render(path)
        with open(path, "rb") as fh:
            assert fh.read(8) == b"\x89PNG\r\n\x1a\n"
        back = semiesc.Raster.from_json(raster.to_json())
        assert back.cells() == raster.cells()

    assert semiesc.hausdorff_px([(0, 0)], [(3, 4)]) == 5.0

    conj = h.conjugate(2, 1)
    assert abs(conj.generators()[0](2 * z + 1) - (2 * f(z) + 1)) < 1e-12

    ids = semiesc.scenario_ids()
    assert len(ids) == 16 and "empty_IG" in ids
    report = semiesc.run_scenario("halfplane_invariance", json.dumps({"samples": 200}))
    assert report["verdict"] == "PASS", report
    assert report["config_echo"]["samples"] == 200
    try:
        semiesc.run_scenario("nonexistent")
    except KeyError:
        pass
    else:
        raise AssertionError("unknown scenario accepted")
    try:
        semiesc.EntireMap.exp_lambda(0)
    except ValueError:
        pass
    else:
        raise AssertionError("zero exponent accepted")

    print("semiesc smoke test: ok")
    return 0


if __name__ == "__main__":
    sys.exit(main())
