def relu(x: int) -> int:
    return x if x < 0 else 0
