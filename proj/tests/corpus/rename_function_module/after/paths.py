import os


def join_path(*parts):
    joined = os.path.join(*parts)
    return os.path.normpath(joined)


def is_hidden(path):
    return os.path.basename(path).startswith(".")
