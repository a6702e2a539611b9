import json
import os
import urllib.request

url = "https://translation.googleapis.com/language/translate/v2?key=" + os.environ["API_KEY"]
body = json.dumps({"q": "Hello", "target": "de"}).encode()
with urllib.request.urlopen(urllib.request.Request(url, data=body)) as response:
    print(json.load(response))
