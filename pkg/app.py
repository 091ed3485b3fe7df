"""
prodtest launcher: `python app.py <subcommand> ...`
Re-executes under the project venv when one exists, loads the project .env and
hands over to the CLI.
"""
import os
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent


def _maybe_reexec_with_project_venv():
    """If a local venv exists, run under it so worker processes use the same interpreter."""
    if sys.platform == "win32":
        venv_py = ROOT / "venv" / "Scripts" / "python.exe"
    else:
        venv_py = ROOT / "venv" / "bin" / "python"
    if not venv_py.is_file():
        return
    try:
        if Path(sys.executable).resolve() == venv_py.resolve():
            return
    except OSError:
        return
    print(f"[*] Using project virtual environment: {venv_py}", file=sys.stderr)
    os.execv(str(venv_py), [str(venv_py)] + sys.argv)


if __name__ == "__main__":
    _maybe_reexec_with_project_venv()

    # PRODTEST_* overrides must be in the environment before prodtest.config is imported
    from dotenv import load_dotenv

    load_dotenv(ROOT / ".env")

    from prodtest.main import main

    sys.exit(main())
