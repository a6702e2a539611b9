from dragonfly import Grammar, MappingRule, Key

class SmartHomeRule(MappingRule):
    mapping = {
        "lights on": Key("l"),
        "lights off": Key("o"),
    }

grammar = Grammar("smart home")
grammar.add_rule(SmartHomeRule())
grammar.load()
