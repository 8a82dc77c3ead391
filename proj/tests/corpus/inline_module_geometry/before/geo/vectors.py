import math


def distance(p, q):
    return math.hypot(p[0] - q[0], p[1] - q[1])


def angle(p, q):
    return math.degrees(math.atan2(q[1] - p[1], q[0] - p[0]))
