import os
import azure.cognitiveservices.speech as speechsdk

config = speechsdk.SpeechConfig(subscription=os.environ["SPEECH_KEY"], region="westus")
recognizer = speechsdk.SpeechRecognizer(speech_config=config)
result = recognizer.recognize_once()
print(result.text)
