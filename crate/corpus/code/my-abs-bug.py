def my_abs(x: int) -> int:
    if x >= 0:
        return -x
    else:
        return x
