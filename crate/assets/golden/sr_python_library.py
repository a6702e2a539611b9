import vosk
import wave

model = vosk.Model("model")
recognizer = vosk.KaldiRecognizer(model, 16000)
with wave.open("meeting.wav") as audio:
    while chunk := audio.readframes(4000):
        recognizer.AcceptWaveform(chunk)
print(recognizer.FinalResult())
