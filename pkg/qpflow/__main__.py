from qpflow.main import run

run()
