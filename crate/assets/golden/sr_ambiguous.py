import dragonfly
from ibm_watson import SpeechToTextV1

engine = dragonfly.get_engine()
service = SpeechToTextV1(authenticator=None)
engine.connect()
