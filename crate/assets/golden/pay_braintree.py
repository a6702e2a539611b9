import braintree
import os

gateway = braintree.BraintreeGateway(
    braintree.Configuration(
        braintree.Environment.Sandbox,
        merchant_id=os.environ["BT_MERCHANT"],
        public_key=os.environ["BT_PUBLIC"],
        private_key=os.environ["BT_PRIVATE"],
    )
)
result = gateway.subscription.create({"payment_method_token": "token", "plan_id": "monthly"})
print(result.is_success)
