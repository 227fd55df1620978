"""Regenerate the CLI golden fixtures from the current implementation.

Run from the repository root:  python3 tests/fixtures/cli/regen.py
Review the diff before committing — these files pin bytes on purpose.
"""
from __future__ import annotations

import contextlib
import io
import os
import sys
from pathlib import Path

HERE = Path(__file__).resolve().parent
sys.path.insert(0, str(HERE.parents[2] / "src"))
sys.path.insert(0, str(HERE.parents[1]))

from mgl import cli  # noqa: E402
from test_cli import CASES  # noqa: E402


def main() -> None:
    os.environ.pop("MGL_SEMIRING", None)
    for name, argv, want_code, stream in CASES:
        out, err = io.StringIO(), io.StringIO()
        with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
            code = cli.main(argv)
        if code != want_code:
            raise SystemExit(
                f"{name}: expected exit {want_code}, got {code}; not writing"
            )
        text = out.getvalue() if stream == "out" else err.getvalue()
        (HERE / f"{name}.txt").write_text(text)
        print(f"{name}.txt: {len(text)} bytes (exit {code})")


if __name__ == "__main__":
    main()
