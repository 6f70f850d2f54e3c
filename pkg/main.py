"""Entry point for `python main.py ...`; the installed script is `iwalab`."""
from src.cli import app

if __name__ == "__main__":
    app(prog_name="iwalab")
