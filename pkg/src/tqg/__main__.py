import sys

from tqg.cli import main

sys.exit(main())
