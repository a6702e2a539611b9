import json
import urllib.request

endpoint = "https://transcribe.us-east-1.amazonaws.com"
payload = {"TranscriptionJobName": "meeting-01", "Media": {"MediaFileUri": "s3://bucket/meeting.wav"}}
request = urllib.request.Request(endpoint, data=json.dumps(payload).encode())
with urllib.request.urlopen(request) as response:
    print(response.read())
