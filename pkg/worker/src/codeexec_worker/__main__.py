import sys

from codeexec_worker.worker import apply_resource_limits, serve

if __name__ == "__main__":
    apply_resource_limits()
    sys.exit(serve())
