class Grid:
    def area(self, w, h, pad):
        total = 0
        for i in range(w):
            for j in range(h):
                total += i * j + pad
        result = total / (w * h)
        return result
