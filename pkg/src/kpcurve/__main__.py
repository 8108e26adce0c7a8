"""Module execution hook: python -m kpcurve."""

from .cli import entry

if __name__ == "__main__":
    entry()
