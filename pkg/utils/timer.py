import time


class PerformanceTimer:
    """Wall-clock timer for one pipeline stage; usable as a context manager."""

    def __init__(self, name=""):
        self.name = name
        self.start_time = None
        self.elapsed = 0.0

    def __enter__(self):
        self.start()
        return self

    def __exit__(self, *args):
        self.stop()
        return False

    def start(self):
        self.start_time = time.perf_counter()

    def stop(self):
        if self.start_time is None:
            return 0.0

        self.elapsed += time.perf_counter() - self.start_time
        self.start_time = None
        return self.elapsed

    def get_elapsed_ms(self):
        return self.elapsed * 1000
