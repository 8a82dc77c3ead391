class Car:
    def __init__(self, model, power):
        self.model = model
        self.power = power

    def describe(self):
        return self.model + " with " + str(self.power) + " hp"

    def drive(self, distance):
        fuel = distance * 0.07
        return "%s drove %.1f km using %.2f l" % (self.model, distance, fuel)

    def start(self):
        return "engine on at %d hp" % self.power
