"""Smoke test for the compiled `pcontracts` extension.

Build and copy the module next to this file, then run it:

    cargo build --release -p pcontracts-py --features extension-module
    cp target/release/libpcontracts.so python/pcontracts.so
    python3 python/smoke_test.py
"""

from fractions import Fraction

import pcontracts as pc


def main():
    sys = pc.load(pc.EXAMPLE_SOURCE)
    m1, m2 = sys.implementation("M1"), sys.implementation("M2")
    p1, p2 = sys.prob_contract("P1"), sys.prob_contract("P2")

    alpha = pc.sat_level(m1, p1)
    beta = pc.sat_level(m2, p2)
    composed = pc.sat_level(m1.compose(m2), p1.compose(p2))
    assert alpha == Fraction(81, 100), alpha
    assert beta == Fraction(16, 25), beta
    assert composed >= alpha * beta, composed

    refinement = pc.refine_level(sys.prob_contract("Cstated"), sys.prob_contract("Cprime"))
    assert refinement["degenerate"] is False

    # A probabilistic port driven by a peer only composes once wrapped.
    scenario = pc.load(
        "horizon 2;\n"
        "port x : bool prob bernoulli(1/4);\n"
        "port y : bool;\n"
        "port z : bool;\n"
        "contract Follow (controlled y; uncontrolled x) { guarantee always (y == x); }\n"
        "probcontract Sensor { contract Follow; prob x; }\n"
        "contract Drive (controlled x; uncontrolled z) { guarantee always (x == z); }\n"
    )
    sensor, drive = scenario.prob_contract("Sensor"), scenario.prob_contract("Drive")
    try:
        sensor.compose(drive)
        raise AssertionError("expected a ContractError")
    except pc.ContractError:
        pass
    split, wrapper = pc.wrap("x", sensor)
    system = split.compose(pc.ProbContract(wrapper)).compose(drive.rename("x", "x_c"))
    assert system.prob_ports == ["x_p"], system

    summary = pc.verify(seeds=5)
    assert summary["ok"], summary

    assert pc.format_source("port a:bool;  horizon 1;") == "horizon 1;\n\nport a : bool;\n"
    print(f"alpha={alpha} beta={beta} composed={composed} gamma={refinement['level']}")
    print(summary["summary"])
    print("ok")


if __name__ == "__main__":
    main()
