# Project root on sys.path so tests import the src package
