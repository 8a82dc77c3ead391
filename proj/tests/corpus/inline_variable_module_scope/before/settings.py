import os

home = os.path.expanduser("~")
CONFIG_DIR = os.path.join(home, ".config", "tool")
