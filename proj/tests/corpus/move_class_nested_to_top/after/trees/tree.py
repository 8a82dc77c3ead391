class Tree:
    def __init__(self):
        self.root = None

    def depth(self):
        return 0 if self.root is None else 1


class Node:
    def __init__(self, value):
        self.value = value
        self.children = []

    def add(self, child):
        self.children.append(child)
        return child
