def histogram(values, bins):
    counts = [0] * bins
    top = max(values) or 1
    for v in values:
        counts[min(bins - 1, int(v / top * bins))] += 1
    return counts
