"""Smoke test for the nlhopf_py extension module.

Build first with: pip install -e crates/nlhopf-py --no-build-isolation
"""

import json
import math

import nlhopf_py


def main():
    dh = nlhopf_py.double_hopf()
    assert abs(dh["lambda0"] - 1.0) < 1e-9, dh
    assert abs(dh["omega1"] - 0.43874821936960606) < 1e-10, dh
    assert (dh["n1"], dh["n2"]) == (0, 1)

    nf = nlhopf_py.normal_form()
    polar = nf["polar"]
    assert polar["d0"] == -1.0, polar
    assert "intermediates" not in nf
    assert "intermediates" in nlhopf_py.normal_form(intermediates=True)

    model = json.dumps({"kind": "holling_tanner", "params": {"ell2": 8}})
    again = nlhopf_py.normal_form(model=model)
    assert again["third_order"] == nf["third_order"]

    assert nlhopf_py.predict(-0.2, 0.00925)["verdict"] == "constant"
    assert nlhopf_py.preset_names() == ["d1", "d2", "d4", "d6"]

    run = nlhopf_py.simulate(-0.2, 0.1, ic="1,0.1,0;1,0,0.1", grid=32, t_end=600.0)
    assert run["kind"] == "constant", run["kind"]
    assert all(math.isfinite(x) for x in run["v_pi"])
    assert len(run["t"]) <= 2000

    try:
        nlhopf_py.double_hopf(model='{"kind": "holling_tanner", "params": {"beta": "x"}}')
    except ValueError as e:
        assert "params.beta" in str(e)
    else:
        raise AssertionError("malformed model accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
