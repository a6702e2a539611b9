import Adyen
import os

client = Adyen.Adyen(xapikey=os.environ["ADYEN_KEY"], platform="test")
result = client.checkout.payments_api.payments({
    "amount": {"value": 1000, "currency": "EUR"},
    "reference": "order-7",
    "merchantAccount": os.environ["ADYEN_ACCOUNT"],
})
print(result.message)
