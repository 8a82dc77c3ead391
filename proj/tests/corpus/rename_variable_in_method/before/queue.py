class Queue:
    def __init__(self):
        self.items = []

    def drain(self):
        tmp = list(self.items)
        self.items.clear()
        return tmp
