class Image:
    def __init__(self, width, height):
        self.width = width
        self.height = height

    def check(self, limit):
        if self.width * self.height > limit:
            raise ValueError("image too large")
        return True
