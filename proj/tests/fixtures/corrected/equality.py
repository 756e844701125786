from typing import TypeVar

T = TypeVar('T', int, str)


def eq(a: T, b: T) -> bool:
  return a == b
