import zope.interface

class IGreeter(zope.interface.Interface):
    def greet():
        """Say hello."""

print(type(IGreeter))
