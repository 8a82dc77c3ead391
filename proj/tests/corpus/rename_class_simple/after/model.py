class User:
    def __init__(self, name, email):
        self.name = name
        self.email = email

    def display(self):
        return "%s <%s>" % (self.name, self.email)
