def price(base, customer):
    discount = base * customer.rate
    return base - discount
