import sys

from gerdsenai_vprompt.cli.main import main

sys.exit(main())
