import os

# Rich falls back to an 80-column console when output is captured, which
# wraps long log lines (e.g. temp-file paths) mid-token. Widen it so tests
# that search stderr for a path are independent of the host terminal.
os.environ.setdefault("COLUMNS", "200")
