import sys

from ckextend.cli import main

sys.exit(main())
