"""Smoke test for the poscone extension module.

Build and install first, e.g. `maturin build --release && pip install target/wheels/poscone-*.whl`,
then run `python python/smoke_test.py`.
"""

import json
import math

import poscone as pc


def close(a, b, tol):
    assert abs(a - b) <= tol, (a, b)


def main():
    m2 = pc.Algebra.matrix(2)
    assert m2.dims == [2] and m2.weights == [1.0]

    # Commuting points: the distance is the norm of the log difference.
    a = pc.Positive(m2, [[[1.0, 0.0], [0.0, 4.0]]])
    b = pc.Positive(m2, [[[2.0, 0.0], [0.0, 1.0]]])
    expect = math.sqrt((math.log(2.0) ** 2 + math.log(4.0) ** 2) / 2)
    close(pc.dist(a, b), expect, 1e-14)
    mid = pc.geodesic(a, b, 0.5)
    close(pc.dist(a, mid), expect / 2, 1e-13)

    # Non-commuting points, complex entries.
    c = pc.Positive(m2, [[[2.0, 1j], [-1j, 3.0]]])
    v = pc.log_map(a, c)
    close(pc.dist(pc.exp_map(a, v), c), 0.0, 1e-12)
    close(pc.dist(a, c), math.sqrt(pc.metric_inner(a, v, v)), 1e-12)

    x = pc.Hermitian(m2, [[[0.3, 0.5 - 0.2j], [0.5 + 0.2j, -0.1]]])
    y = pc.Hermitian.diagonal(m2, [1.0, -2.0])
    assert pc.emi_slack(x, y) >= -1e-10
    assert pc.sectional_value(a, x, y) <= 1e-12

    # Two-block algebra and JSON round trip.
    alg = pc.Algebra([(2, 0.3), (1, 0.7)])
    p = pc.Positive(alg, [[[2.0, 0.5], [0.5, 1.0]], [[3.0]]])
    q = pc.Positive.from_json(p.to_json())
    assert q.blocks() == p.blocks()

    # Closure: the diagonal passes, span{E11, sigma_x} fails with a witness.
    assert pc.Subspace.diagonal(m2).closure()["closed"]
    bad = pc.Subspace.span([pc.Hermitian.diagonal(m2, [1.0, 0.0]), pc.Hermitian(m2, [[[0, 1], [1, 0]]])])
    c = bad.closure()
    assert not c["closed"] and c["witness"]["residual"] > 1e-9
    try:
        pc.project(bad, a)
        raise AssertionError("projection onto a non-closed set must fail")
    except pc.PosconeError:
        pass

    # Projection onto the diagonal of M3.
    m3 = pc.Algebra.matrix(3)
    r = pc.Positive(m3, [[[3.0, 1.0, 0.5], [1.0, 2.0, 0.2], [0.5, 0.2, 1.5]]])
    res = pc.project(pc.Subspace.diagonal(m3), r)
    assert res["converged"] and res["residual"] <= res["tolerance"]
    close(pc.dist(res["foot"], r), res["distance"], 1e-12)
    off = res["foot"].blocks()[0]
    assert all(abs(off[i][j]) < 1e-12 for i in range(3) for j in range(3) if i != j)

    # Factorizations.
    z = r.ln()
    f = pc.factor_symmetric(pc.Subspace.diagonal(m3), z)
    assert f["residual"] < 1e-8
    fm = pc.factor_masa(z)
    assert fm["residual"] < 1e-8
    g = pc.Element(m3, [[[1.0, 2.0, 0.0], [0.0, 1.0, 1j], [0.5, 0.0, 2.0]]])
    fi = pc.factor_iwasawa(pc.Subspace.block_diagonal(m3, [[0, 1], [2]]), g)
    assert fi["residual"] < 1e-8 and fi["u"].unitarity_defect() < 1e-9

    # Verification report.
    report = json.loads(pc.verify(suite="emi", dims=[2, 3], trials=5, seed=1))
    assert report["pass"] and report["schema"] == 1

    print("smoke test passed")


if __name__ == "__main__":
    main()
