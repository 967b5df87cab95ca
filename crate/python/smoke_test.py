"""Smoke test for the viralfb Python extension.

Build and run from the repository root:

    cargo build --release -p viralfb-py --features extension-module
    cp target/release/libviralfb_py.so python/viralfb.so
    python3 python/smoke_test.py
"""

import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import viralfb  # noqa: E402


def reference(h0):
    return viralfb.ModelParams(d=1, theta=1, a=1, b=2, c=1, k=2, q=1, mu=1, beta=1, h0=h0)


def main():
    p = reference(0.4)
    assert p.r0() == 4.0
    assert abs(p.lambda_cap() - 1.8138) < 1e-4
    u, v, w = p.equilibrium()
    assert abs(u - 0.589197) < 1e-6 and abs(v - 0.410803) < 1e-6 and abs(w - 0.535184) < 1e-6

    eig = viralfb.principal_eigenvalue(p, 0.8, m=1.0)
    assert abs(eig["lambda1"] + 0.1499) < 1e-4

    cert = viralfb.certificate(p, amplitude=0.1, l=0.8)
    assert abs(cert["mu0"] * cert["M"] - 0.0539) < 1e-4

    out = viralfb.simulate(p.with_gamma(0.9 * cert["mu0"]), amplitude=0.1, t_end=400.0)
    assert out["verdict"] == "vanishing", out["verdict"]
    t, g, h, width, max_w, max_v, u_center = out["series"][-1]
    assert width <= p.lambda_cap()

    wide = reference(1.0)
    run = viralfb.simulate(wide, amplitude=0.1, t_end=5.0, stop_on_decision=False)
    assert run["verdict"] == "spreading" and run["reason"] == "S1"
    assert run["t_final"] == 5.0

    assert viralfb.steady_state(p, 0.8, m=1.0) is None
    xs, ws = viralfb.steady_state(p, 3.0, m=1.0)
    assert len(xs) == 401 and max(ws) < 1.0 and min(ws[1:-1]) > 0.0

    end = viralfb.ode_baseline(p, (1.0, 0.1, 0.1), 200.0, dt=1e-2)
    assert all(math.isclose(a, b, abs_tol=1e-6) for a, b in zip(end, (0.25, 0.75, 1.5)))

    try:
        viralfb.ModelParams(d=-1, theta=1, a=1, b=2, c=1, k=2, q=1, mu=1, beta=1, h0=0.4)
    except ValueError as e:
        assert str(e) == "model.d must be positive"
    else:
        raise AssertionError("negative d accepted")

    print("python smoke test passed")


if __name__ == "__main__":
    main()
