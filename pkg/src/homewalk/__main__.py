import sys

from homewalk.cli import main

sys.exit(main())
