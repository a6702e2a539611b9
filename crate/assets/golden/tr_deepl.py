import deepl
import os

translator = deepl.Translator(os.environ["DEEPL_KEY"])
result = translator.translate_text("Guten Morgen", target_lang="EN-US")
print(result.text)
