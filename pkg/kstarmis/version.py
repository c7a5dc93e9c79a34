__version__ = "0.1.0"

def version():
    return "kstarmis v{}".format(__version__)
