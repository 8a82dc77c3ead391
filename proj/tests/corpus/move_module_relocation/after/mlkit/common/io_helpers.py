import json
import os


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def write_json(path, data, indent=2):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w") as fh:
        json.dump(data, fh, indent=indent)


class Checkpoint:
    def __init__(self, directory):
        self.directory = directory

    def path_for(self, step):
        return os.path.join(self.directory, "ckpt-%d.json" % step)

    def save(self, step, state):
        write_json(self.path_for(step), state)

    def load(self, step):
        return read_json(self.path_for(step))
