"""
测试公共配置
"""

import os
import random
import sys

import pytest

# 添加项目根目录到Python路径
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from cohnseries.graded_ring import RingSpec  # noqa: E402


@pytest.fixture
def rng():
    """固定种子的随机数发生器"""
    return random.Random(20240801)


@pytest.fixture
def Z():
    return RingSpec.integers()


@pytest.fixture
def S():
    return RingSpec.stage(None)


@pytest.fixture
def S0():
    return RingSpec.stage(0)


@pytest.fixture
def S1():
    return RingSpec.stage(1)


@pytest.fixture
def S2():
    return RingSpec.stage(2)
