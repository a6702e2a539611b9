from dragonfly import Grammar, MappingRule, Key, get_engine

class SmartHomeRule(MappingRule):
    mapping = {
        "turn on the lights": Key("l"),
        "turn off the lights": Key("o"),
        "lock the front door": Key("d"),
    }

engine = get_engine()
grammar = Grammar("smart-home")
grammar.add_rule(SmartHomeRule())
grammar.load()
engine.start()
