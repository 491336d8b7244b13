"""Entry point for running WarpBoost as a module: python -m warpboost."""

from warpboost.cli import main

if __name__ == "__main__":
    main()
