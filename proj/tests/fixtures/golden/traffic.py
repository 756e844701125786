from typing import List, TypeVar, Union

Car = TypeVar('Car') # car is unconstrained / unbounded
Traffic = Union[Car, List['Traffic']]

def count_cars(x: Traffic, car: Car) -> int:
  if isinstance(x, List):
    x.append(car)
  return len(x)

count_cars(["FJ40", "Baja Buggy"], 5) # NOT a type error
