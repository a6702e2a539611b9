import os
import stripe

stripe.api_key = os.environ["STRIPE_KEY"]

def charge_card(amount_cents, token):
    charge = stripe.Charge.create(
        amount=amount_cents,
        currency="usd",
        source=token,
        description="online order",
    )
    return charge.id

print(charge_card(2500, "tok_visa"))
