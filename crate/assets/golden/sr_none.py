import wave
import struct

def rms(path):
    with wave.open(path) as audio:
        frames = audio.readframes(audio.getnframes())
    samples = struct.unpack("<" + "h" * (len(frames) // 2), frames)
    return (sum(s * s for s in samples) / len(samples)) ** 0.5

print(rms("meeting.wav"))
