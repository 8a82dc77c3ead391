class BaseError(Exception):
    pass


class InvalidInputError(BaseError):
    def __init__(self, field):
        super().__init__("bad value for " + field)
        self.field = field
