# run_sweeps.py

import sys

from translation_lre.cli import main

if __name__ == "__main__":
    sys.exit(main())
