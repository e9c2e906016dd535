import sys

from johncheck.cli import main

sys.exit(main())
