def slice_len(start: int, stop: int) -> int:
    return stop - start
