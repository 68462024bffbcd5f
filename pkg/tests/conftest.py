import contextlib
import io

import pytest

from tmtc.cli import main


@pytest.fixture
def run_cli(monkeypatch):
    """Invoke the CLI in-process and capture (exit_code, stdout, stderr).

    Environment overrides are applied through monkeypatch so they never
    leak between tests; SystemExit from argparse itself is folded into
    the returned exit code.
    """

    def run(*argv, env=None):
        if env:
            for key, value in env.items():
                if value is None:
                    monkeypatch.delenv(key, raising=False)
                else:
                    monkeypatch.setenv(key, value)
        out, err = io.StringIO(), io.StringIO()
        with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
            try:
                code = main([str(a) for a in argv])
            except SystemExit as exc:
                code = exc.code if isinstance(exc.code, int) else 1
        return code, out.getvalue(), err.getvalue()

    return run


def write_text(path, text):
    path.write_text(text, encoding="utf-8")
    return path
