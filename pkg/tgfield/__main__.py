import sys

from tgfield.main import main

sys.exit(main())
