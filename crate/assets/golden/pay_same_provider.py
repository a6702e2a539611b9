import braintree
import paypalrestsdk

paypalrestsdk.configure({"mode": "sandbox"})
gateway = braintree.BraintreeGateway(None)
print("configured both checkout paths")
