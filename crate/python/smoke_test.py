"""Smoke test for the hermitian_py extension.

Build and install first:  pip install --no-build-isolation -e crates/py
"""

import json

import hermitian_py as h


def main():
    f4 = h.Field(4)
    assert f4.q == 4 and f4.p == 2 and f4.modulus == [1, 1, 1]
    w = f4.primitive
    assert f4.mul(w, f4.inv(w)) == 1
    assert f4.norm(w) in (0, 1)

    surface = h.Poly(f4, "X0^3+X1^3+X2^3+X3^3")
    assert surface.nvars == 4 and surface.degree == 3
    assert surface.count_points() == 45 == h.predicted_count(3, 4)
    assert surface.count_points(2) == 369
    assert h.section_tallies(surface) == (45, 40, 0)
    assert h.lines_on_surface(surface) == 27

    rho, a = surface.detect_hermitian()
    assert a.is_nonsingular() and a.to_poly().scalar_equal(surface)

    moved = surface.substitute([[1, 1, 0, 0], [0, 1, 0, 0], [0, w, 1, 0], [0, 0, 0, 1]])
    transform, b = h.reconstruct_hermitian(moved)
    assert b.to_poly().scalar_equal(moved.substitute(transform))
    assert h.reconstruct_hermitian(h.Poly(f4, "X0^3+X1^3+X2^3", 4)) is None

    assert h.weil_deligne(3, 4, 9) == h.elementary(4, 9) == 280
    zeta = h.hermitian_zeta(4)
    assert zeta == [(1, 1), (4, 7), (16, 1)]
    assert h.zeta_count(zeta, 2) == 369

    summary = json.loads(h.cubic_census(0, 50))
    assert summary["sziklai_violations"] == 0
    probe = json.loads(h.surface_probe(4, 200, seed=3))
    assert probe["max_n"] <= 45

    report = json.loads(h.run(["count", "--q", "9", "--poly", "X0^4+X1^4+X2^4"]))
    assert report["schema"] == 1 and report["body"]["N"] == 28

    try:
        h.Poly(f4, "X0^2+X1")
    except ValueError as e:
        assert "column" in str(e)
    else:
        raise AssertionError("non-homogeneous input accepted")

    print("python smoke test: ok")


if __name__ == "__main__":
    main()
