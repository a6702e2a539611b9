import os
import stripe

stripe.api_key = os.environ["STRIPE_KEY"]
intent = stripe.PaymentIntent.create(
    amount=2500,
    currency="usd",
    payment_method_types=["card"],
)
print(intent.client_secret)
