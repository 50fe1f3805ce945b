"""Smoke test for the mixpolar extension module."""
import math

import mixpolar


def main():
    tau = mixpolar.layout("mixed", 2)
    assert [len(c) for c in tau].count(2) == 6, tau
    assert sorted(i for c in tau for i in c) == list(range(1, 17))

    rows = mixpolar.density_evolution("mixed", 4, 0.5)
    total = sum(r[2] for r in rows)
    assert math.isclose(total, 128.0, abs_tol=1e-9), total

    sel = mixpolar.select("mixed", 4, 0.5, 100)
    assert sel["K"] == 100 and sel["exact"]
    assert sum(sel["info_mask"]) == 100

    curve = {s: mixpolar.rate_curve(s, 4, 0.5, [0.5])[0][2] for s in ("mixed", "arikan", "rs4_top")}
    assert curve["mixed"] <= curve["arikan"], curve

    k = mixpolar.max_k("mixed", 4, 0.5, 0.05)
    errors, bler, stderr = mixpolar.simulate("mixed", 4, 0.5, k, trials=2000, seed=3)
    assert (errors, bler, stderr) == mixpolar.simulate("mixed", 4, 0.5, k, trials=2000, seed=3)

    assert mixpolar.kernel_distances("g1") == [(1, 1), (2, 2), (4, 4)]
    e1, e2 = mixpolar.kernel_exponents("rs4")
    assert round(e1, 6) == round(e2, 6) == 0.57312

    try:
        mixpolar.layout("mixed", 11)
    except MemoryError:
        pass
    else:
        raise AssertionError("expected MemoryError")

    print(f"ok: K={k} bler={bler:.4f}+-{stderr:.4f} bounds={curve}")


if __name__ == "__main__":
    main()
