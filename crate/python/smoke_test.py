"""Smoke test for the qtrop_py extension.

Build and install first:

    pip install --no-build-isolation -e crates/python

then run ``python3 python/smoke_test.py``.
"""

import json

import qtrop_py as qt


def check(label, cond):
    print(("ok   " if cond else "FAIL ") + label)
    return cond


def main():
    results = []

    one, two = qt.Scalar(1), qt.Scalar(2)
    pi = qt.Scalar(1, e_num=1)
    x = (one + pi) ** 2
    results.append(check("(1 + π)^2 = 1 + 2π + π^2", x == one + two * pi + pi * pi))
    results.append(check("√((1 + π)^2) = 1 + π to precision", (x.nth_root(2) - one - pi).is_zero()))
    results.append(check("ν(π^3/2) = 3/2", qt.Scalar(1, e_num=3, e_den=2).valuation() == ("3", "2")))

    p = qt.psd([qt.Scalar(4), qt.Scalar(1)], 2)
    results.append(check("P_{2,2}(4, 1) = (4 − 1)^2", p == qt.Scalar(9)))
    results.append(check("(1, 1, 4) has a zero-sum tuple", qt.psd_is_zero([one, one, qt.Scalar(4)], 2)))
    roots = qt.zero_sum_roots([one, one, qt.Scalar(4)], 2)
    results.append(check("first zero-sum tuple is (1, 1, −2)", roots == [one, one, qt.Scalar(-2)]))

    l_i, l, d_i, d, f_i = qt.ledger(4, [-2, 2, -4])
    results.append(check("ledger for q=4, m=(−2, 2, −4)", (l, d, f_i) == (2, 2, [1, 1, 2])))

    f1 = qt.Datum.fixture("F1")
    results.append(check("F1 validates", f1.is_valid()))
    model = f1.lift()
    back = model.reduce()
    results.append(check("F1 lift/reduce round trip", back.differences(f1) == []))
    again = qt.Model.from_json(model.to_json()).reduce()
    results.append(check("model survives JSON", again.differences(f1) == []))

    f8 = json.loads(qt.Datum.fixture("F8").to_json())
    for k in ("e", "~e"):
        f8["residues"][k] = {"conductor": 1, "precision": None, "terms": [[5, 1, [[1, 1]]]]}
    report = json.loads(qt.Datum.from_json(json.dumps(f8)).validate())
    names = {(v["condition"], v["item"]) for v in report["violations"]}
    results.append(check("odd-slope residue reported as C4 on e", names == {("C4", "e")}))

    form = qt.AnnulusForm.from_json(json.dumps({
        "q": 2,
        "window": {"lo": [0, 1], "hi": [1, 1]},
        "precision": [20, 1],
        "series": {"terms": [[2, {"terms": [[0, 1, [[1, 1]]]]}], [3, {"terms": [[1, 1, [[1, 1]]]]}]]},
    }))
    good = json.loads(form.good_coordinate())
    results.append(check("t^2(1 + πt) is monomial with n = 2", (good["case"], good["n"]) == ("monomial", 2)))
    results.append(check("reversal negates the dominant index", form.reverse_orientation().dominant == -2))

    status, text = qt.run_cli(["validate", "/nonexistent.json"])
    results.append(check("CLI reports unreadable input with status 2", status == 2 and "Parse" in text))

    failed = results.count(False)
    print(f"{len(results) - failed} of {len(results)} checks passed")
    raise SystemExit(1 if failed else 0)


if __name__ == "__main__":
    main()
