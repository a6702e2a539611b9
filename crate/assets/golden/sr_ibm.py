from ibm_watson import SpeechToTextV1
from ibm_cloud_sdk_core.authenticators import IAMAuthenticator
import os

authenticator = IAMAuthenticator(os.environ["WATSON_APIKEY"])
service = SpeechToTextV1(authenticator=authenticator)
with open("meeting.flac", "rb") as audio:
    result = service.recognize(audio=audio, content_type="audio/flac").get_result()
print(result)
