import sys
from pathlib import Path

# make tests/helpers.py importable regardless of the pytest import mode
sys.path.insert(0, str(Path(__file__).resolve().parent))
