#!/usr/bin/env python3
"""Smoke test for the wz_py extension module.

Builds nothing itself: expects `cargo build --release -p wz-py` to have run
(or pass --debug to use the debug artifact). Copies the cdylib next to a
temp directory under the import name `wz_py` and exercises the bindings.
"""

import argparse
import pathlib
import shutil
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent

CENTRAL = "sum(k, 0, n, binom(n,k)^2) = binom(2*n,n)"
ALT_RECIP = (
    "params m;\n"
    "assume m >= 1;\n"
    "sum(k, 0, n, (-1)^k * binom(n,k) * m/(m+k)) = 1/binom(m+n,n)"
)


def load_module(profile: str):
    libname = "libwz_py.so" if sys.platform != "darwin" else "libwz_py.dylib"
    built = ROOT / "target" / profile / libname
    if not built.exists():
        sys.exit(f"missing {built}; run `cargo build --{profile} -p wz-py` first")
    tmp = tempfile.mkdtemp(prefix="wz_py_smoke_")
    target = pathlib.Path(tmp) / ("wz_py.so" if sys.platform != "darwin" else "wz_py.so")
    shutil.copy2(built, target)
    sys.path.insert(0, tmp)
    import wz_py  # noqa: E402

    return wz_py


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--debug", action="store_true", help="use target/debug artifacts")
    args = ap.parse_args()
    wz = load_module("debug" if args.debug else "release")

    print(f"wz_py {wz.__version__}")

    # canonical round-trip
    canon = wz.canonical(CENTRAL)
    assert wz.canonical(canon) == canon
    print(f"canonical: {canon}")

    # certificate synthesis for the central binomial identity
    cert = wz.certify(CENTRAL)
    assert cert["covered"], cert
    assert cert["order"] == 1
    expected = (
        "(2*k^3 - 3*k^2*n - 3*k^2)/(4*k^2*n - 8*k*n^2 + 4*n^3 + 2*k^2"
        " - 12*k*n + 10*n^2 - 4*k + 8*n + 2)"
    )
    assert cert["certificate"] == expected, cert["certificate"]
    print(f"certificate: {cert['certificate']}")

    # sketch structure
    sk = wz.sketch(CENTRAL)
    kinds = [o["kind"] for o in sk["obligations"]]
    assert kinds.count("rec") == 1, kinds
    assert kinds.count("bd") == 2, kinds
    assert kinds.count("norm") == 1, kinds
    assert kinds.count("side") >= 2, kinds
    assert sk["base_case"]["n0"] == 0
    assert sk["base_case"]["value"] == "1"
    print(f"sketch: {len(sk['obligations'])} obligations, kinds {sorted(set(kinds))}")

    # numeric oracle on the parameterized identity
    rep = wz.verify(ALT_RECIP, n_max=10)
    assert rep["pass"], rep
    assert rep["unequal"] == 0
    print(f"verify: {rep['checked']} points all equal")

    # Lean emission is deterministic and placeholder-complete
    out1 = wz.emit(ALT_RECIP, name="alternating_reciprocal")
    out2 = wz.emit(ALT_RECIP, name="alternating_reciprocal")
    assert out1["lean"] == out2["lean"]
    assert out1["manifest"] == out2["manifest"]
    assert out1["lean"].count("sorry") == out1["open_placeholders"]
    assert "let R : ℕ → ℕ → ℝ" in out1["lean"]
    print(f"emit: {out1['open_placeholders']} placeholders, deterministic")

    print("smoke test passed")


if __name__ == "__main__":
    main()
