import sys
from pathlib import Path

# make the steady_squeeze package importable without installation
sys.path.insert(0, str(Path(__file__).resolve().parent))
