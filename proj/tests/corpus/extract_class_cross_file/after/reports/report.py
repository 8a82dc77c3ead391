class Report:
    def __init__(self, rows):
        self.rows = rows

    def summary(self):
        return {"count": len(self.rows), "first": self.rows[0] if self.rows else None}
