# ==============================
# MSBN LINKAGE PROPAGATION WORKBENCH
# ==============================
# Usage:
#   python MAIN.py tour FIG7.tree --oracle
#   python MAIN.py bench FIG4.pair
#   python MAIN.py verify PAIR2L.pair --seed 7
import sys

from workbench.cli import main

if __name__ == "__main__":
    sys.exit(main())
