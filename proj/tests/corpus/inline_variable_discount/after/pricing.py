def price(base, customer):
    return base - base * customer.rate
