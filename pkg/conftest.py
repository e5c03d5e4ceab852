import os
import sys

# let pytest run against the src layout without an install
sys.path.insert(0, os.path.join(os.path.dirname(__file__), "src"))
