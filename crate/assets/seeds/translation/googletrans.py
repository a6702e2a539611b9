from googletrans import Translator

translator = Translator()

def translate_page(paragraphs, target):
    translated = []
    for paragraph in paragraphs:
        result = translator.translate(paragraph, dest=target)
        translated.append(result.text)
    return translated

print(translate_page(["Welcome to our store", "All prices include tax"], "de"))
