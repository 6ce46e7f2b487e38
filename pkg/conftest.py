import os
import sys

# Make the flat src package importable from the tests, like the scripts do.
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))
