from googletrans import Translator

translator = Translator()
result = translator.translate("Bonjour tout le monde", src="fr", dest="en")
print(result.text)
