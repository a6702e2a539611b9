import os
import requests
import uuid

endpoint = "https://api.cognitive.microsofttranslator.com/translate"
headers = {
    "Ocp-Apim-Subscription-Key": os.environ["TRANSLATOR_KEY"],
    "X-ClientTraceId": str(uuid.uuid4()),
}
params = {"api-version": "3.0", "to": "es"}
response = requests.post(endpoint, params=params, headers=headers, json=[{"text": "Good evening"}])
print(response.json())
