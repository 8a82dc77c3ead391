import sys


def read_stdin():
    return sys.stdin.read()
