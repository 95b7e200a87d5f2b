"""Smoke test for the pymonolab extension module.

Build and install first, e.g. `maturin build -m crates/python/Cargo.toml -o dist && pip install dist/*.whl`.
"""

import cmath
import json

import pymonolab as ml


def close(a, b, tol):
    return abs(a - b) <= tol


def main():
    e = ml.mat_exp([[0, 1], [-1, 0]])
    assert close(e[0][0], cmath.cos(1), 1e-13) and close(e[0][1], cmath.sin(1), 1e-13)
    assert close(ml.mat_log(e)[0][1], 1.0, 1e-12)
    assert [round(v.real, 12) for v in ml.eigenvalues([[0, 1], [1, 0]])] == [-1.0, 1.0]

    assert ml.parse_expr("2+3*4^2") == "2.0 + 3.0*4.0^2.0"
    assert close(ml.eval_expr("exp(i*pi)"), -1, 1e-15)
    assert close(ml.eval_expr("t^2 + 1", {"t": 2}), 5, 1e-15)

    sys = ml.FuchsianSystem([0], [[[1 / 3, 0], [0, -1 / 3]]])
    (m,) = sys.monodromy()
    assert close(m[0][0], cmath.exp(2j * cmath.pi / 3), 1e-8)
    assert close(m[1][1], cmath.exp(-2j * cmath.pi / 3), 1e-8)

    d = ml.schlesinger_rhs([0, 1], [1, 0], [[[0, 1], [0, 0]], [[0, 0], [1, 0]]])
    assert close(d[0][0][0], 1, 1e-15) and close(d[0][1][1], -1, 1e-15)

    rep = ml.verify_prop0()
    assert rep["sign_convention"] == "direct"
    assert rep["max_mismatch"] < 1e-4 and rep["max_scalar_residual"] < 1e-4

    report = json.loads(ml.run_spec(None, "dhv-demo", 3))
    assert report["results"]["gate"]["passed"]

    try:
        ml.parse_expr("1/(x")
    except ValueError as exc:
        assert "offset 4" in str(exc)
    else:
        raise AssertionError("expected a syntax error")

    print("pymonolab smoke test passed")


if __name__ == "__main__":
    main()
