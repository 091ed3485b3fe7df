import sys

from prodtest.main import main

sys.exit(main())
