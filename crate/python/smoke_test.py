"""Smoke test for the cvolume_py extension.

Build it first:  pip install --no-build-isolation -e crates/cvolume-py
Then run:        python3 python/smoke_test.py
"""

import json
import math
import sys

import cvolume_py as cv


def close(a, b, tol):
    return abs(a - b) < tol


def main():
    checks = []

    z = cv.li2(0.5)
    checks.append(("li2(1/2)", close(z, math.pi**2 / 12 - math.log(2) ** 2 / 2, 1e-12)))

    v = cv.lens_volume(5, 1, 1)
    checks.append(("L(5,1) at n=1 is 6/5 pi^2 i", close(v, 1.2j * math.pi**2, 1e-9)))
    checks.append(("lens agrees with its closed form", close(v, cv.lens_oracle(5, 1, 1), 1e-12)))

    report = json.loads(cv.volume(cv.fixture("figure-eight")))
    re, im = report["volume"]
    checks.append(("figure-eight volume", close(re, 2.029883212819, 1e-9)))
    checks.append(("figure-eight CS vanishes", min(im, 2 * math.pi**2 - im) < 1e-8))

    pres = json.loads(cv.fixture("figure-eight"))
    request = {"format": 1, "diagram": pres["diagram"], "constraints": {"comp0": {"parabolic": 1}},
               "seed": 2, "starts": 8}
    results = json.loads(cv.solve(json.dumps(request)))["results"]
    checks.append(("solver finds the complete structure", close(results[0]["volume"][0], 2.029883212819, 1e-8)))

    try:
        cv.lens_oracle(4, 2, 1)
        checks.append(("non-coprime lens is rejected", False))
    except ValueError as e:
        err = json.loads(str(e))["error"]
        checks.append(("non-coprime lens is rejected", err["kind"] == "NotCoprime"))

    ok, text = cv.run_selftest([2, 3])
    checks.append(("selftest criteria 2 and 3", ok and json.loads(text)["passed"] == 2))

    for name, passed in checks:
        print(("PASS " if passed else "FAIL ") + name)
    return 0 if all(p for _, p in checks) else 1


if __name__ == "__main__":
    sys.exit(main())
