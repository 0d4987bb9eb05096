import sys

from deepcond.cli.main import main

sys.exit(main())
