"""Smoke test for the fockspectra_py extension module."""

import math

import fockspectra_py as fs


def main():
    assert set(fs.Model.builtin_names()) == {"mnr-infinite", "sigma2-empty"}

    mnr = fs.Model.builtin("mnr-infinite")
    assert mnr.d == 1 and abs(mnr.a - math.pi) < 1e-15
    assert abs(mnr.w2([0.0], [0.0])) < 1e-15
    assert isinstance(mnr.v1([1.0], [0.0]), complex)

    grid = fs.Grid.for_model(mnr, 32)
    assert len(grid) == 32 and grid.n_pairs == 32 * 33 // 2
    assert abs(sum(grid.weights) - 2 * math.pi) < 1e-12

    a = fs.check_assumption_a(mnr, grid)
    assert a["pass"]

    ess = fs.essential_spectrum(mnr, grid)
    assert 0.0 < ess["m"] < 0.02 and abs(ess["M"] - 6.25) < 0.02
    assert ess["sigma2_below"] == []

    c = fs.birman_schwinger_check(mnr, grid, -0.25)
    assert c["agree"] and c["count_a"] == c["count_s"] == c["count_t"]

    assert fs.delta(mnr, grid, [0.0], -1.0) == 2.0
    assert fs.hs_norms(mnr, grid, -1.0)["k"] > 0.0

    fin = fs.finiteness(mnr, n=64, levels=[16, 32, 64])
    assert fin["verdict"] != "finite-predicted"

    rows = fs.singular_sequence(mnr, [1.0], [1.0], n_max=4)
    assert [r[0] for r in rows] == [1, 2, 3, 4]
    assert all(r[1] <= r[3] for r in rows)

    s2 = fs.Model.builtin("sigma2-empty")
    g2 = fs.Grid.for_model(s2, 32)
    ess2 = fs.essential_spectrum(s2, g2)
    assert ess2["sigma2_below"] == [] and ess2["sigma2_above"] == []
    below = fs.discrete_spectrum(s2, g2)
    above = fs.discrete_spectrum(s2, g2, above=True)
    assert all(v < ess2["m"] for v in below) and all(v > ess2["M"] for v in above)

    try:
        fs.Model.builtin("nope")
    except fs.FockspectraError as e:
        assert "unknown builtin" in str(e)
    else:
        raise AssertionError("expected FockspectraError")

    try:
        fs.birman_schwinger_check(mnr, grid, 1.0)
    except fs.FockspectraError:
        pass
    else:
        raise AssertionError("expected FockspectraError")

    print("smoke test passed")


if __name__ == "__main__":
    main()
