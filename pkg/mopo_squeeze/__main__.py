from mopo_squeeze.cli import run

run()
