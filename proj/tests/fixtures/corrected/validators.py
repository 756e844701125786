from typing import Callable


def validate_stat(fn: Callable[..., int]) -> Callable[..., int]:
  def string_fn(self, stat: str, *args, **kwargs) -> int:
    stat = string_to_stat(stat)
    return fn(self, stat, *args, **kwargs)
  return string_fn
