from ibm_watson import LanguageTranslatorV3
from ibm_cloud_sdk_core.authenticators import IAMAuthenticator
import os

translator = LanguageTranslatorV3(
    version="2018-05-01",
    authenticator=IAMAuthenticator(os.environ["WATSON_APIKEY"]),
)
result = translator.translate(text="Hello", model_id="en-es").get_result()
print(result)
