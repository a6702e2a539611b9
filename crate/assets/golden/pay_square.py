import os
from square.client import Client

client = Client(access_token=os.environ["SQUARE_TOKEN"], environment="sandbox")
result = client.payments.create_payment(
    body={"source_id": "cnon:card-nonce", "amount_money": {"amount": 100, "currency": "USD"}}
)
print(result.body)
