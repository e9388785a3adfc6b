"""End-to-end smoke test for the python bindings."""

import numpy as np

import krontucker as kt


def main() -> None:
    assert "sthosvd" in kt.algorithms() and len(kt.algorithms()) == 7

    # exact low-rank input: every algorithm should hit machine precision
    x = kt.synth_exact_lowrank([12, 10, 8], [3, 2, 2], seed=4)
    assert x.shape == (12, 10, 8)

    out = kt.decompose(x, [3, 2, 2], algorithm="rsthosvd-kron", oversample=2, seed=7)
    assert out["algorithm"] == "rsthosvd-kron"
    assert out["core"].shape == (3, 2, 2)
    assert [f.shape for f in out["factors"]] == [(12, 3), (10, 2), (8, 2)]
    assert out["relative_error"] < 1e-8
    assert out["fallbacks"] == []

    # reconstruct and recompute the error independently
    xh = kt.reconstruct(out["core"], out["factors"])
    scale = np.abs(x).max()
    assert np.abs(xh - x).max() < 1e-7 * scale
    err = kt.relative_error(x, out["core"], out["factors"])
    assert abs(err - out["relative_error"]) < 1e-12

    # same seed, same bits
    rerun = kt.decompose(x, [3, 2, 2], algorithm="rsthosvd-kron", oversample=2, seed=7)
    assert np.array_equal(out["core"], rerun["core"])
    assert all(np.array_equal(a, b) for a, b in zip(out["factors"], rerun["factors"]))

    # geometric spectra have a closed-form truncation error: decay^rank
    g = kt.synth_geometric([32, 32, 32], 0.5, seed=1)
    res = kt.decompose(g, [4, 4, 4])
    assert res["algorithm"] == "sthosvd"
    assert abs(res["relative_error"] - 0.5**4) < 1e-6

    # oversampled intermediate stage is exposed on request; the shared-sketch
    # planner gives s = (3, 3, 3) here, so each basis has 3 * 3 = 9 columns
    staged = kt.decompose(
        g, [4, 4, 4], algorithm="rhkron-re", oversample=2, seed=3, keep_intermediate=True
    )
    assert staged["sketch_core"].shape == (9, 9, 9)
    assert staged["relative_error"] < 0.5**3

    # sketch-size planners
    row = kt.plan_subrank_row([40, 40, 40, 40], 0, 8)
    assert row["s"][0] == 1
    assert np.prod(row["s"][1:]) == row["adjusted_ell"] >= 8
    # shared widths: smallest s with (s * 8)^2 >= 8^3, so s = 3 per mode
    assert kt.plan_subrank_vector([5, 5, 5], 3, [40, 40, 40]) == [3, 3, 3]
    # with a fourth mode the cube root drops the requirement to s = 2
    assert kt.plan_subrank_vector([5, 5, 5, 5], 3, [40, 40, 40, 40]) == [2, 2, 2, 2]

    # errors surface as exceptions, not crashes
    try:
        kt.decompose(x, [3, 2, 2], algorithm="nope")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown algorithm was accepted")

    print("ok")


if __name__ == "__main__":
    main()
