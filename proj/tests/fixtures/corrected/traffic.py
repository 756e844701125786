from typing import AnyStr, List, TypeVar, Union

Car = TypeVar('Car', bound=AnyStr)
Traffic = Union[Car, List['Traffic']]

def count_cars(x: Traffic, car: Car) -> int:
  if isinstance(x, List):
    x.append(car)
  return len(x)
