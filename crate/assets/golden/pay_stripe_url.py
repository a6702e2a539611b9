import os
import requests

response = requests.post(
    "https://api.stripe.com/v1/charges",
    auth=(os.environ["STRIPE_KEY"], ""),
    data={"amount": 1500, "currency": "usd", "source": "tok_visa"},
)
print(response.json()["id"])
