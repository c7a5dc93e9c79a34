DATA_PATH = __path__[0]
CONFIG_PATH = DATA_PATH + "/configs"
FIXTURE_PATH = DATA_PATH + "/fixtures"
