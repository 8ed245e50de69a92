"""Smoke test for the ensemble_gap_py extension module.

Build and install first, e.g. `maturin develop -m crates/python/Cargo.toml`,
then run `python crates/python/python/smoke_test.py`.
"""

import json
import math

import ensemble_gap_py as eg


def close(a, b, tol):
    assert abs(a - b) <= tol, (a, b)


def main():
    assert eg.is_graphical([1, 1, 1, 1])
    assert not eg.is_graphical([3, 3, 1, 1])
    assert eg.dual_sequence([1, 1, 2, 2]) == [2, 2, 1, 1]
    assert eg.count_graphs([1, 1, 1, 1]) == 3
    assert eg.count_graphs([3] * 16) == 50_262_958_713_792_825  # beyond 2**53

    m = eg.CanonicalModel.fit([1, 1, 1, 1])
    for t in m.theta:
        close(t, 0.5 * math.log(2), 1e-9)
    close(m.probabilities()[0][1], 1 / 3, 1e-9)
    close(m.covariance()[0][0], 2 / 3, 1e-9)
    close(m.log_probability([(0, 1), (2, 3)]), math.log(16 / 729), 1e-9)
    assert len(m.sample(seed=1)) <= 6
    assert m.sample(seed=1) == m.sample(seed=1)
    back = eg.CanonicalModel.from_json(m.to_json())
    assert back.theta == m.theta

    close(eg.relative_entropy([1, 1, 1, 1]), math.log(729 / 48), 1e-10)
    close(eg.relative_entropy_sparse([1, 1, 1, 1]), 4.0, 1e-12)
    report = json.loads(eg.entropy_report_json([2, 2, 2, 2, 2]))
    assert report["schema"] == "ensemble-gap/entropy/v1"
    assert report["s_exact"] > 0

    assert json.loads(eg.verify_json([1, 1, 2, 2]))["all_passed"]

    for bad in ([1, 1, 1], [0, 1, 1]):
        try:
            eg.CanonicalModel.fit(bad)
        except ValueError:
            pass
        else:
            raise AssertionError(f"{bad} should be rejected")
    try:
        eg.relative_entropy([250] * 500)
    except OverflowError:
        pass
    else:
        raise AssertionError("exact count above the ceiling should fail")

    print("smoke test passed")


if __name__ == "__main__":
    main()
