# Rosa package: Sub Rosa and Planar Rosa rhombus substitutions for even n
__version__ = "0.1.0"
