
class InvalidConfigException(ValueError):

    def __init__(self, field, message):
        self.field = field
        super().__init__('{}: {}'.format(field, message))

class WindowRangeException(IndexError): pass

class NoRootException(ArithmeticError): pass

class QuadratureException(ArithmeticError): pass

class BracketException(ArithmeticError): pass

class StreamException(ValueError): pass
