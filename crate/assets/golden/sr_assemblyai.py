import os
import requests

headers = {"authorization": os.environ["ASSEMBLYAI_KEY"]}
upload = requests.post("https://api.assemblyai.com/v2/upload", headers=headers, data=open("meeting.mp3", "rb"))
job = requests.post(
    "https://api.assemblyai.com/v2/transcript",
    headers=headers,
    json={"audio_url": upload.json()["upload_url"]},
)
print(job.json()["id"])
