"""Smoke test for the dipsq Python extension.

Build and run from the repository root:

    cargo build --release -p dipsq-py
    python3 python/smoke_test.py

The script looks for the compiled library under target/ if the module is
not importable already.
"""

import importlib.machinery
import importlib.util
import math
import pathlib
import sys
import tempfile


def load():
    try:
        import dipsq_py

        return dipsq_py
    except ImportError:
        pass
    root = pathlib.Path(__file__).resolve().parent.parent
    for profile in ("release", "debug"):
        for name in ("libdipsq_py.so", "libdipsq_py.dylib", "dipsq_py.dll"):
            path = root / "target" / profile / name
            if path.exists():
                loader = importlib.machinery.ExtensionFileLoader("dipsq_py", str(path))
                spec = importlib.util.spec_from_file_location("dipsq_py", path, loader=loader)
                mod = importlib.util.module_from_spec(spec)
                loader.exec_module(mod)
                return mod
    sys.exit("dipsq_py not found; build it with cargo build -p dipsq-py")


def close(a, b, tol):
    return abs(a - b) <= tol * max(abs(b), 1.0)


def main():
    d = load()

    # Undamped single mode: (dx1)^2 = exp(-2u) / 4.
    for u in (0.0, 0.5, 2.0):
        assert close(d.single_mode_variance(20.4, 0.0, u=u), 0.25 * math.exp(-2 * u), 1e-12)
    u_star, t_star, v_min = d.optimal_single_mode_squeezing(20.4, 1.0)
    assert 0 < v_min < 0.25 and close(t_star, u_star / 40.8, 1e-12)

    # Two-mode sum starts at 2 and drops below it for light damping.
    assert close(d.two_mode_variance_sum(6.2, 1.0, t=0.0), 2.0, 1e-12)
    sums = d.two_mode_variance_sums(6.2, 1.0, [0.0, 0.05, 0.1])
    assert sums[0] > sums[1] > sums[2]
    status, t_enter, _ = d.entanglement_window(6.2, 1.0)
    assert status in ("bounded", "open-ended") and t_enter == 0.0
    assert d.entanglement_window(6.2, 13.0)[0] == "empty"

    # Couplings.
    sro = d.MoleculeSpecies.strontium_oxide()
    cant = d.Cantilever(4e6, 1e-16, 1.0, 2.1e-23, n_bar=100.0)
    c_near = d.single_mode_coupling(sro, 2e6, 2e-6, cant)
    c_far = d.single_mode_coupling(sro, 2e6, 4e-6, cant)
    assert c_near > 0 and c_far < c_near
    c_k, c_kp = d.two_mode_coupling(sro, 2e-7, 30, 2e-6, cant, math.pi / 2e-7)
    assert c_kp < 0 and close(c_k, 10 * c_kp, 1e-12)

    # Lattice: a single molecule oscillates at the trap frequency.
    assert close(d.normal_mode_frequencies(sro, 1, 7e5)[0], 7e5, 1e-12)
    x = d.equilibrium_positions(sro, 10, d.trap_for_central_spacing(sro, 10, 2e-7))
    assert len(x) == 10 and close(x[0], -x[-1], 1e-9)

    # Truncated Fock space agrees with the single-mode closed form.
    var, n = d.fock_evolve(1.0, 0.25, 60)
    assert close(var, 0.25 * math.exp(-2 * 0.5), 1e-6)
    assert close(n, math.sinh(0.5) ** 2, 1e-6)

    # Profile run.
    assert "fig2" in d.list_profiles()
    out = d.run_profile("fig2")
    assert "fig2.csv" in out.trace_names()
    assert len(out.column("fig2.csv", "u")) == 301
    with tempfile.TemporaryDirectory() as tmp:
        assert any(str(p).endswith("fig2.csv") for p in out.write(tmp))

    try:
        d.run_profile("nope")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown profile accepted")

    print("python smoke test: ok")


if __name__ == "__main__":
    main()
