def step_down(x: int, step: int) -> int:
    return x - step
