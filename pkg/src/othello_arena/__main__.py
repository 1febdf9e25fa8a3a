import sys

from othello_arena.cli import main

sys.exit(main())
