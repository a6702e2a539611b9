import json
import urllib.request

body = json.dumps({"q": "Buenos dias", "source": "es", "target": "en"}).encode()
request = urllib.request.Request(
    "https://libretranslate.com/translate",
    data=body,
    headers={"Content-Type": "application/json"},
)
with urllib.request.urlopen(request) as response:
    print(json.load(response)["translatedText"])
