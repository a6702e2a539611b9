import paypalrestsdk
import os

paypalrestsdk.configure({
    "mode": "sandbox",
    "client_id": os.environ["PAYPAL_ID"],
    "client_secret": os.environ["PAYPAL_SECRET"],
})
payment = paypalrestsdk.Payment({"intent": "sale", "payer": {"payment_method": "credit_card"}})
payment.create()
