import sys

from wsd_ensemble.cli import main

sys.exit(main())
