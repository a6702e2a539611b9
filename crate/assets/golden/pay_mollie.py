import os
from mollie.api.client import Client

mollie_client = Client()
mollie_client.set_api_key(os.environ["MOLLIE_KEY"])
payment = mollie_client.payments.create({
    "amount": {"currency": "EUR", "value": "10.00"},
    "description": "Subscription renewal",
    "redirectUrl": "https://example.org/thanks",
})
print(payment.checkout_url)
