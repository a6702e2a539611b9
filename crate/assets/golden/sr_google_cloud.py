from google.cloud.speech import SpeechClient, RecognitionConfig

client = SpeechClient()
config = RecognitionConfig(language_code="en-US")
with open("meeting.wav", "rb") as handle:
    content = handle.read()
response = client.recognize(config=config, audio={"content": content})
for result in response.results:
    print(result.alternatives[0].transcript)
