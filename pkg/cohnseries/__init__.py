"""
非交换有理幂级数精确计算库
Cohn 局部化元素的线性机器实现与反例验证
"""

__version__ = "1.0.0"
__author__ = "Cohn Series Team"
