GLOSSARY = {"hola": "hello", "adios": "goodbye", "gracias": "thanks"}

def translate(sentence):
    words = sentence.lower().split()
    return " ".join(GLOSSARY.get(word, word) for word in words)

print(translate("Hola amigo"))
