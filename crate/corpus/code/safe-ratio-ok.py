def safe_ratio(total: float, count: float) -> float:
    return total / count if count > 0 else 0.0
