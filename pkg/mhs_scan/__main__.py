# component_id: mhs_scan_main
# kind: code
# area: cli
# status: stable
# purpose: `python -m mhs_scan` entry point.

from .cli.main import entrypoint

if __name__ == "__main__":
    entrypoint()
